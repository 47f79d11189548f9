use std::sync::Arc;

use serde::Serialize;

use super::{run_indexed, tag, EstimateRecord, SweepPlan};
use crate::clusters::ClusterLabeling;
use crate::error::{Error, Result};
use crate::lattice::SlabRegion;
use crate::measure::IntensityMeasure;
use crate::rng::derive_seed;
use crate::sampler::{apply_slab, draw_arrivals, enumerate_candidates, Window};

/// Long side over short side of the slab window.
pub const SLAB_ASPECT: u64 = 4;

/// Crossing indicators of one shared sample, one per thickness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlabReplicate {
    pub replicate: u64,
    pub seed: u64,
    pub crossing: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlabResult {
    pub u: f64,
    pub long: u64,
    pub wide: u64,
    pub thicknesses: Vec<u64>,
    pub records: Vec<EstimateRecord>,
    /// Replicates whose indicator drops when the thickness grows.
    pub nesting_violations: u64,
    /// Smallest tested thickness whose crossing estimate exceeds 0.9.
    pub thickness_above_0_9: Option<u64>,
    pub replicates: Vec<SlabReplicate>,
}

/// Long-axis crossing of the window `[0, 4W-1] x [0, W-1] x [1, Lmax]^{d-2}`
/// after truncation to each thickness `L`, all thicknesses sharing one sample.
/// `W` is the largest window size of the plan.
pub fn slab_experiment(
    m: &IntensityMeasure,
    plan: &SweepPlan,
    u: f64,
    thicknesses: &[u64],
) -> Result<SlabResult> {
    plan.check(m)?;
    if m.dim() < 3 {
        return Err(Error::Precondition(format!(
            "slab truncation needs d >= 3; the measure has d = {}",
            m.dim()
        )));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Precondition(format!("u = {u} lies outside [0, 1]")));
    }
    let mut ls = thicknesses.to_vec();
    if ls.is_empty() || ls.contains(&0) {
        return Err(Error::Precondition("slab thicknesses must be positive".into()));
    }
    ls.sort_unstable();
    ls.dedup();
    let wide = *plan.windows.last().expect("checked");
    let long = SLAB_ASPECT * wide;
    let lmax = *ls.last().expect("non-empty");
    let slab = SlabRegion::new(lmax, m.dim())?;
    let w = Window::slab(&slab, long, wide, plan.mode)?;
    let cand = Arc::new(enumerate_candidates(m, &w)?);

    let reps = run_indexed(plan.workers, plan.replicates, |r| {
        let seed = derive_seed(plan.base_seed, &[tag::SLAB, wide, r]);
        let full = draw_arrivals(cand.clone(), seed).configuration_at(u);
        let crossing = ls
            .iter()
            .map(|&l| {
                let c = apply_slab(&full, l).expect("d >= 3 checked");
                ClusterLabeling::build(&c).crossing_events(1).axis_crossing[0]
            })
            .collect();
        SlabReplicate {
            replicate: r,
            seed,
            crossing,
        }
    })?;

    let n = plan.replicates;
    let mut records = Vec::new();
    for (i, &l) in ls.iter().enumerate() {
        let k = reps.iter().filter(|r| r.crossing[i]).count() as u64;
        records.push(
            EstimateRecord::proportion("slab_crossing", k, n, plan.base_seed)
                .at_u(u)
                .at_window(wide)
                .at_thickness(l),
        );
    }
    let nesting_violations = reps
        .iter()
        .filter(|r| r.crossing.windows(2).any(|p| p[0] && !p[1]))
        .count() as u64;
    let thickness_above_0_9 = records.iter().find(|r| r.estimate > 0.9).and_then(|r| r.l);
    Ok(SlabResult {
        u,
        long,
        wide,
        thicknesses: ls,
        records,
        nesting_violations,
        thickness_above_0_9,
        replicates: reps,
    })
}
