//! The square-loop family at scales `n = 1, 2, ...`: `H_n` holds the
//! translates of `Q_{n+1}` whose lower-left corner lies in
//! `{2^{n-1}+1, ..., 2^n}^2`, and `E_n` is the event that some loop of `H_n`
//! is open. Each scale is sampled directly, one arrival per loop.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use super::{run_indexed, tag, EstimateRecord};
use crate::error::{Error, Result};
use crate::lattice::Vertex;
use crate::measure::{square_loop_shape, HyperEdgeInstance, SquareLoopFamily, MAX_LOOP_SCALE};
use crate::rng::{derive_seed, CounterStream};
use crate::sampler::{arrival_time, level_for};

/// Cap on `N · Σ |H_n|` uniform draws.
const DRAW_BUDGET: u128 = 20_000_000_000;
/// Cap on vertex comparisons in the adjacency check.
const ADJACENCY_BUDGET: u128 = 2_000_000_000;

/// Corners of `H_n`: `{2^{n-1}+1, ..., 2^n}` on both axes.
pub fn loop_anchor_range(n: u32) -> (i64, i64) {
    ((1i64 << (n - 1)) + 1, 1i64 << n)
}

fn loops_at(n: u32) -> u64 {
    1u64 << (2 * (n - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleReport {
    pub n: u32,
    pub loops: u64,
    pub per_loop_weight: f64,
    pub per_loop_probability: f64,
    /// `1 - (1-u)^{(n+1) 2^{-2(n+1)} 2^{2(n-1)}}`.
    pub closed_form: f64,
    pub estimate: EstimateRecord,
    /// `(estimate - closed_form) / σ` with `σ` from the closed form.
    pub z_score: f64,
    pub within_3sigma: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleAdjacency {
    pub n: u32,
    pub pairs: u64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareLoopReport {
    pub u: f64,
    pub replicates: u64,
    pub scales: Vec<ScaleReport>,
    pub adjacency: Vec<ScaleAdjacency>,
    /// Longest run of consecutive scales with `E_n`, per replicate:
    /// run length -> number of replicates.
    pub chain_distribution: BTreeMap<u32, u64>,
    pub longest_chain: u32,
}

/// Checks every pair in `H_n x H_{n+1}` for a common vertex.
pub fn loop_adjacency(n: u32) -> Result<ScaleAdjacency> {
    if n < 1 || n + 2 > MAX_LOOP_SCALE {
        return Err(Error::Precondition(format!("adjacency scale {n} out of range")));
    }
    let work = loops_at(n) as u128 * loops_at(n + 1) as u128 * (8u128 << (n + 1));
    if work > ADJACENCY_BUDGET {
        return Err(Error::TooLarge {
            what: "adjacency comparisons",
            estimate: work,
            budget: ADJACENCY_BUDGET,
        });
    }
    let family = |k: u32| -> Vec<HyperEdgeInstance> {
        let shape = Arc::new(square_loop_shape(2, k + 1));
        let (lo, hi) = loop_anchor_range(k);
        let mut out = Vec::new();
        for x in lo..=hi {
            for y in lo..=hi {
                out.push(HyperEdgeInstance {
                    shape: shape.clone(),
                    anchor: Vertex::new(vec![x, y]).expect("small coordinates"),
                });
            }
        }
        out
    };
    let small = family(n);
    let large = family(n + 1);
    let mut failures = 0;
    for h2 in &large {
        let set: HashSet<Vertex> = h2.vertices().into_iter().collect();
        for h1 in &small {
            if !h1.vertices().iter().any(|v| set.contains(v)) {
                failures += 1;
            }
        }
    }
    Ok(ScaleAdjacency {
        n,
        pairs: small.len() as u64 * large.len() as u64,
        failures,
    })
}

/// Samples `E_1, ..., E_{n_max}` over `replicates` replicates and checks
/// adjacency of consecutive scales for `n <= adjacency_max`.
pub fn square_loop_experiment(
    u: f64,
    n_max: u32,
    replicates: u64,
    base_seed: u64,
    adjacency_max: u32,
    workers: usize,
) -> Result<SquareLoopReport> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Precondition(format!("u = {u} lies outside [0, 1]")));
    }
    if n_max < 1 || replicates < 1 {
        return Err(Error::Precondition("need n_max >= 1 and at least one replicate".into()));
    }
    if n_max + 1 > MAX_LOOP_SCALE {
        return Err(Error::TooLarge {
            what: "loop scale",
            estimate: n_max as u128,
            budget: (MAX_LOOP_SCALE - 1) as u128,
        });
    }
    let draws: u128 = (1..=n_max).map(|n| loops_at(n) as u128).sum::<u128>() * replicates as u128;
    if draws > DRAW_BUDGET {
        return Err(Error::TooLarge {
            what: "loop draws",
            estimate: draws,
            budget: DRAW_BUDGET,
        });
    }
    let level = level_for(u);
    let weights: Vec<f64> = (1..=n_max).map(|n| SquareLoopFamily::weight(n + 1)).collect();

    // Bit n-1 set iff E_n occurred.
    let outcomes = run_indexed(workers, replicates, |r| {
        let seed = derive_seed(base_seed, &[tag::SQUARE_LOOP, r]);
        let mut mask = 0u64;
        for n in 1..=n_max {
            let w = weights[n as usize - 1];
            let mut s = CounterStream::new(seed, n as u64);
            let open = (0..loops_at(n)).any(|_| arrival_time(s.next_open01(), w) <= level);
            if open {
                mask |= 1 << (n - 1);
            }
        }
        mask
    })?;

    let mut scales = Vec::new();
    for n in 1..=n_max {
        let k = outcomes.iter().filter(|&&m| m >> (n - 1) & 1 == 1).count() as u64;
        let w = weights[n as usize - 1];
        let exponent = w * loops_at(n) as f64;
        let closed_form = crate::sampler::open_probability(u, exponent);
        let estimate = EstimateRecord::proportion("square_loop_event", k, replicates, base_seed)
            .at_u(u)
            .at_window(n as u64);
        let sigma = (closed_form * (1.0 - closed_form) / replicates as f64).sqrt();
        let diff = estimate.estimate - closed_form;
        let z_score = if sigma > 0.0 { diff / sigma } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
        scales.push(ScaleReport {
            n,
            loops: loops_at(n),
            per_loop_weight: w,
            per_loop_probability: crate::sampler::open_probability(u, w),
            closed_form,
            estimate,
            z_score,
            within_3sigma: z_score.abs() <= 3.0,
        });
    }

    let mut chain_distribution = BTreeMap::new();
    for &mask in &outcomes {
        let mut best = 0u32;
        let mut run = 0u32;
        for n in 0..n_max {
            if mask >> n & 1 == 1 {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        *chain_distribution.entry(best).or_insert(0) += 1;
    }
    let longest_chain = chain_distribution.keys().next_back().copied().unwrap_or(0);

    let adjacency = (1..=adjacency_max.min(n_max))
        .map(loop_adjacency)
        .collect::<Result<Vec<_>>>()?;

    Ok(SquareLoopReport {
        u,
        replicates,
        scales,
        adjacency,
        chain_distribution,
        longest_chain,
    })
}
