use std::sync::Arc;

use serde::Serialize;

use super::{level_to_u, run_indexed, tag, EstimateRecord, SweepPlan, Z95};
use crate::clusters::first_passage;
use crate::error::{Error, Result};
use crate::measure::{validate, IntensityMeasure};
use crate::rng::derive_seed;
use crate::sampler::{draw_arrivals, enumerate_candidates, level_for};

/// Radius used for the validation gate of [`bracket_uc`].
const GATE_RADIUS: u64 = 4;

/// First-passage levels of one replicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingReplicate {
    pub window: u64,
    pub replicate: u64,
    pub seed: u64,
    /// Per axis, the level at which the axis is first crossed.
    pub axis_levels: Vec<f64>,
    pub origin_level: f64,
}

impl CrossingReplicate {
    pub fn crosses(&self, axis: usize, u: f64) -> bool {
        self.axis_levels[axis] <= level_for(u)
    }

    pub fn origin_connected(&self, u: f64) -> bool {
        self.origin_level <= level_for(u)
    }
}

/// First-passage levels for every replicate of window size `size`.
pub fn crossing_thresholds(
    m: &IntensityMeasure,
    plan: &SweepPlan,
    size: u64,
) -> Result<Vec<CrossingReplicate>> {
    let w = plan.box_window(m, size)?;
    let cand = Arc::new(enumerate_candidates(m, &w)?);
    run_indexed(plan.workers, plan.replicates, |r| {
        let seed = derive_seed(plan.base_seed, &[tag::CROSSING, size, r]);
        let fp = first_passage(&draw_arrivals(cand.clone(), seed));
        CrossingReplicate {
            window: size,
            replicate: r,
            seed,
            axis_levels: fp.axis_crossing,
            origin_level: fp.origin_to_boundary.unwrap_or(f64::INFINITY),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingCurve {
    pub records: Vec<EstimateRecord>,
    pub replicates: Vec<CrossingReplicate>,
}

/// `P[axis crossing]` for every axis and `P[0 ↔ ∂B(n)]` at every `(u, window)`.
pub fn crossing_curve(m: &IntensityMeasure, plan: &SweepPlan) -> Result<CrossingCurve> {
    plan.check(m)?;
    let mut records = Vec::new();
    let mut all = Vec::new();
    for &size in &plan.windows {
        let reps = crossing_thresholds(m, plan, size)?;
        let n = reps.len() as u64;
        for &u in &plan.u_grid {
            for a in 0..m.dim() {
                let k = reps.iter().filter(|r| r.crosses(a, u)).count() as u64;
                records.push(
                    EstimateRecord::proportion(&format!("crossing_axis{a}"), k, n, plan.base_seed)
                        .at_u(u)
                        .at_window(size),
                );
            }
            let k = reps.iter().filter(|r| r.origin_connected(u)).count() as u64;
            records.push(
                EstimateRecord::proportion("origin_to_boundary", k, n, plan.base_seed)
                    .at_u(u)
                    .at_window(size),
            );
        }
        all.extend(reps);
    }
    Ok(CrossingCurve {
        records,
        replicates: all,
    })
}

/// Median axis-0 crossing parameter at one window size, with an
/// order-statistic 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Drift {
    pub window: u64,
    pub median_u: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UcBracket {
    pub u_low: f64,
    pub u_high: f64,
    pub window: u64,
    pub steps: u32,
    pub drift: Vec<Drift>,
    pub records: Vec<EstimateRecord>,
}

/// Bisects on `u` until the axis-0 crossing frequency at the largest window
/// passes 1/2 inside a bracket of the requested width. All `u` share the same
/// coupled samples, so the empirical curve is monotone.
/// Refuses measures not shown to be multi-dimensional.
pub fn bracket_uc(m: &IntensityMeasure, plan: &SweepPlan) -> Result<UcBracket> {
    let gate = validate(m, GATE_RADIUS)?;
    if !gate.not_one_dimensional.holds() {
        return Err(Error::Precondition(format!(
            "the measure is not shown to be multi-dimensional ({}); a crossing threshold is not expected",
            gate.not_one_dimensional
        )));
    }
    bracket_uc_unchecked(m, plan)
}

/// [`bracket_uc`] without the dimensionality gate.
pub fn bracket_uc_unchecked(m: &IntensityMeasure, plan: &SweepPlan) -> Result<UcBracket> {
    plan.check(m)?;
    let (mut lo, mut hi, width) = plan.bisect.unwrap_or((0.0, 1.0, 0.02));

    let mut per_window = Vec::new();
    for &size in &plan.windows {
        per_window.push((size, crossing_thresholds(m, plan, size)?));
    }
    let (largest, reps) = per_window.last().expect("plan has windows");
    let n = reps.len() as u64;
    let count = |u: f64| reps.iter().filter(|r| r.crosses(0, u)).count() as u64;
    let half = |k: u64| 2 * k >= n;

    let (mut k_lo, mut k_hi) = (count(lo), count(hi));
    if half(k_lo) || !half(k_hi) {
        return Err(Error::Precondition(format!(
            "crossing frequency does not pass 1/2 inside [{lo}, {hi}] ({k_lo}/{n} to {k_hi}/{n})"
        )));
    }
    let mut steps = 0;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let k = count(mid);
        if k < k_lo || k > k_hi {
            return Err(Error::Precondition(format!(
                "crossing frequency is not monotone near u = {mid}"
            )));
        }
        if half(k) {
            hi = mid;
            k_hi = k;
        } else {
            lo = mid;
            k_lo = k;
        }
        steps += 1;
    }

    let mut drift = Vec::new();
    for (size, reps) in &per_window {
        let mut us: Vec<f64> = reps.iter().map(|r| level_to_u(r.axis_levels[0])).collect();
        us.sort_by(f64::total_cmp);
        let len = us.len();
        let rank = |x: f64| (x.round().clamp(1.0, len as f64) as usize) - 1;
        let mid = len as f64 / 2.0;
        let spread = Z95 * (len as f64).sqrt() / 2.0;
        drift.push(Drift {
            window: *size,
            median_u: us[rank(mid.ceil())],
            lo: us[rank((mid - spread).floor())],
            hi: us[rank((mid + spread).ceil())],
        });
    }

    let records = vec![
        EstimateRecord::proportion("crossing_axis0", k_lo, n, plan.base_seed)
            .at_u(lo)
            .at_window(*largest),
        EstimateRecord::proportion("crossing_axis0", k_hi, n, plan.base_seed)
            .at_u(hi)
            .at_window(*largest),
    ];
    Ok(UcBracket {
        u_low: lo,
        u_high: hi,
        window: *largest,
        steps,
        drift,
        records,
    })
}
