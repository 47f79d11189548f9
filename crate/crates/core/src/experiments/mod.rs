//! Monte Carlo experiments on coupled samples.
//!
//! Every replicate draws from a seed derived from `(base seed, experiment,
//! window, replicate)`, and replicate results are collected in replicate
//! order, so outputs do not depend on the number of workers.

mod census;
mod crossing;
mod seeds;
mod slab;
mod square_loop;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::measure::IntensityMeasure;
use crate::sampler::{BoundaryMode, Window};

pub use census::{uniqueness_census, CensusReplicate, CensusWindow, UniquenessCensus};
pub use crossing::{
    bracket_uc, bracket_uc_unchecked, crossing_curve, crossing_thresholds, CrossingCurve, CrossingReplicate, Drift,
    UcBracket,
};
pub use seeds::{detect_seeds, seed_density, seed_union, SeedDensity, SeedScan, SeedUnion};
pub use slab::{slab_experiment, SlabReplicate, SlabResult};
pub use square_loop::{
    loop_adjacency, loop_anchor_range, square_loop_experiment, ScaleAdjacency, ScaleReport,
    SquareLoopReport,
};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Default size fraction for the giant-cluster census.
pub const DEFAULT_THETA: f64 = 0.01;

/// Wilson score interval for `successes` out of `n` at 95% coverage.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    assert!(n > 0 && successes <= n);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// One estimated quantity with its 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub quantity: String,
    pub u: Option<f64>,
    /// Window size.
    pub n: Option<u64>,
    /// Slab thickness.
    #[serde(rename = "L")]
    pub l: Option<u64>,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    #[serde(rename = "N")]
    pub replicates: u64,
    pub seed: u64,
}

impl EstimateRecord {
    /// Proportion estimate with a Wilson interval.
    pub fn proportion(quantity: &str, successes: u64, n: u64, seed: u64) -> Self {
        let (lo, hi) = wilson_interval(successes, n);
        EstimateRecord {
            quantity: quantity.to_string(),
            u: None,
            n: None,
            l: None,
            estimate: successes as f64 / n as f64,
            lo,
            hi,
            replicates: n,
            seed,
        }
    }

    pub fn at_u(mut self, u: f64) -> Self {
        self.u = Some(u);
        self
    }

    pub fn at_window(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn at_thickness(mut self, l: u64) -> Self {
        self.l = Some(l);
        self
    }

    pub fn std_error(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.replicates as f64).sqrt()
    }
}

/// Parameters shared by the experiments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPlan {
    pub measure_digest: String,
    pub u_grid: Vec<f64>,
    /// `(lo, hi, target width)` for bisection.
    pub bisect: Option<(f64, f64, f64)>,
    /// Window sizes `W`; a box window has radius `W / 2`.
    pub windows: Vec<u64>,
    pub replicates: u64,
    pub base_seed: u64,
    pub slab_thicknesses: Vec<u64>,
    pub mode: BoundaryMode,
    /// Worker threads; affects wall time only.
    #[serde(skip)]
    pub workers: usize,
}

impl SweepPlan {
    pub fn new(m: &IntensityMeasure, windows: Vec<u64>, replicates: u64, base_seed: u64) -> Self {
        SweepPlan {
            measure_digest: m.digest(),
            u_grid: Vec::new(),
            bisect: None,
            windows,
            replicates,
            base_seed,
            slab_thicknesses: Vec::new(),
            mode: BoundaryMode::Contained,
            workers: 0,
        }
    }

    pub fn with_u_grid(mut self, u: Vec<f64>) -> Self {
        self.u_grid = u;
        self
    }

    pub fn with_bisect(mut self, lo: f64, hi: f64, width: f64) -> Self {
        self.bisect = Some((lo, hi, width));
        self
    }

    pub fn with_slab_thicknesses(mut self, ls: Vec<u64>) -> Self {
        self.slab_thicknesses = ls;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn check(&self, m: &IntensityMeasure) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        if self.measure_digest != m.digest() {
            return bad("plan was made for a different measure".into());
        }
        if self.replicates < 1 {
            return bad("at least one replicate is required".into());
        }
        if let Some(u) = self.u_grid.iter().find(|u| !(0.0..=1.0).contains(*u)) {
            return bad(format!("u = {u} lies outside [0, 1]"));
        }
        if self.windows.is_empty() {
            return bad("no window sizes given".into());
        }
        if self.windows.windows(2).any(|w| w[0] >= w[1]) {
            return bad("window sizes must be strictly increasing".into());
        }
        if self.windows[0] < 2 {
            return bad("window sizes must be at least 2".into());
        }
        if let Some((lo, hi, width)) = self.bisect {
            if !(0.0 <= lo && lo < hi && hi <= 1.0 && width > 0.0) {
                return bad(format!("bad bisection bracket {lo}:{hi}:{width}"));
            }
        }
        Ok(())
    }

    pub fn box_window(&self, m: &IntensityMeasure, size: u64) -> Result<Window> {
        Window::from_box(&BoxRegion::centered(m.dim(), size / 2)?, self.mode)
    }
}

/// Maps `f` over `0..n` on a pool of `workers` threads (0 = all cores),
/// returning results in index order.
pub fn run_indexed<T, F>(workers: usize, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Experiment tags for seed derivation.
pub(crate) mod tag {
    pub const CROSSING: u64 = 1;
    pub const CENSUS: u64 = 2;
    pub const SLAB: u64 = 3;
    pub const SQUARE_LOOP: u64 = 4;
    pub const SEEDS: u64 = 5;
}

/// `u = 1 - e^{-α}`.
pub fn level_to_u(level: f64) -> f64 {
    -(-level).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_reference_values() {
        // 50/100: center 0.5, half-width 1.96*sqrt(0.25/100 + z^2/40000)/(1+z^2/100).
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403832).abs() < 1e-5, "{lo}");
        assert!((hi - 0.596168).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277533).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(10, 10);
        assert_eq!(hi, 1.0);
        assert!((lo - 0.722467).abs() < 1e-5, "{lo}");
    }

    proptest! {
        #[test]
        fn wilson_contains_estimate(n in 1u64..5000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as u64;
            let r = EstimateRecord::proportion("q", k, n, 0);
            prop_assert!(r.lo <= r.estimate && r.estimate <= r.hi);
            prop_assert!(0.0 <= r.lo && r.hi <= 1.0);
        }
    }

    #[test]
    fn plan_checks() {
        let m = IntensityMeasure::nearest_neighbor(2, 1.0).unwrap();
        let ok = SweepPlan::new(&m, vec![8, 16], 10, 1);
        assert!(ok.check(&m).is_ok());
        assert!(SweepPlan::new(&m, vec![16, 8], 10, 1).check(&m).is_err());
        assert!(SweepPlan::new(&m, vec![8], 0, 1).check(&m).is_err());
        assert!(ok.clone().with_u_grid(vec![1.5]).check(&m).is_err());
        let other = IntensityMeasure::nearest_neighbor(2, 2.0).unwrap();
        assert!(ok.check(&other).is_err());
    }

    #[test]
    fn indexed_map_is_ordered_for_any_pool() {
        let a = run_indexed(1, 1000, |i| i * i).unwrap();
        let b = run_indexed(7, 1000, |i| i * i).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }
}
