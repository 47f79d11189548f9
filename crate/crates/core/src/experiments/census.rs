use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{run_indexed, tag, EstimateRecord, SweepPlan};
use crate::clusters::ClusterLabeling;
use crate::error::{Error, Result};
use crate::measure::IntensityMeasure;
use crate::rng::derive_seed;
use crate::sampler::{draw_arrivals, enumerate_candidates};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReplicate {
    pub window: u64,
    pub replicate: u64,
    pub seed: u64,
    pub giants: usize,
    pub largest: usize,
}

/// Distribution of giant counts at one window size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusWindow {
    pub window: u64,
    /// giant count -> number of replicates.
    pub distribution: BTreeMap<usize, u64>,
    pub fraction_one: EstimateRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessCensus {
    pub u: f64,
    pub theta: f64,
    pub windows: Vec<CensusWindow>,
    pub replicates: Vec<CensusReplicate>,
}

impl UniquenessCensus {
    pub fn records(&self) -> Vec<EstimateRecord> {
        self.windows.iter().map(|w| w.fraction_one.clone()).collect()
    }
}

/// Counts boundary-touching clusters holding at least `θ · |window|` vertices
/// at parameter `u`, for every replicate and window.
pub fn uniqueness_census(
    m: &IntensityMeasure,
    plan: &SweepPlan,
    u: f64,
    theta: f64,
) -> Result<UniquenessCensus> {
    plan.check(m)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Precondition(format!("u = {u} lies outside [0, 1]")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Precondition(format!("size fraction {theta} outside (0, 1)")));
    }
    let mut windows = Vec::new();
    let mut all = Vec::new();
    for &size in &plan.windows {
        let w = plan.box_window(m, size)?;
        let cand = Arc::new(enumerate_candidates(m, &w)?);
        let reps = run_indexed(plan.workers, plan.replicates, |r| {
            let seed = derive_seed(plan.base_seed, &[tag::CENSUS, size, r]);
            let l = ClusterLabeling::build(&draw_arrivals(cand.clone(), seed).configuration_at(u));
            let threshold = ((theta * l.volume() as f64).ceil() as usize).max(1);
            let rep = l.crossing_events(threshold);
            CensusReplicate {
                window: size,
                replicate: r,
                seed,
                giants: rep.boundary_clusters,
                largest: rep.largest_cluster,
            }
        })?;
        let mut distribution = BTreeMap::new();
        for r in &reps {
            *distribution.entry(r.giants).or_insert(0) += 1;
        }
        let ones = distribution.get(&1).copied().unwrap_or(0);
        windows.push(CensusWindow {
            window: size,
            distribution,
            fraction_one: EstimateRecord::proportion("giant_count_one", ones, plan.replicates, plan.base_seed)
                .at_u(u)
                .at_window(size),
        });
        all.extend(reps);
    }
    Ok(UniquenessCensus {
        u,
        theta,
        windows,
        replicates: all,
    })
}
