//! Seed boxes: `B(x, m)` is a seed when every positive-weight instance
//! contained in it is open; its modified box `B(x, m, c)` is then joined.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use super::{run_indexed, tag, EstimateRecord, SweepPlan};
use crate::error::{Error, Result};
use crate::lattice::{ModifiedBox, Vertex};
use crate::measure::IntensityMeasure;
use crate::rng::derive_seed;
use crate::sampler::{draw_arrivals, enumerate_candidates, open_probability, Configuration};

/// Refuse boxes holding more positive-weight instances than this.
pub const MAX_INSTANCES_PER_BOX: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedScan {
    pub radius: u64,
    pub corner_cut: u64,
    pub scanned: usize,
    pub instances_per_box: usize,
    pub seeds: Vec<Vertex>,
}

/// Contained instances of `B(0, m)` as `(candidate shape id, anchor offset)`.
struct BoxTemplate {
    entries: Vec<(usize, Vec<i64>)>,
    weights: Vec<f64>,
}

fn template(c: &Configuration, m: &IntensityMeasure, radius: u64) -> Result<BoxTemplate> {
    let d = m.dim();
    let side = 2 * radius as i64 + 1;
    let (members, _) = m.members_within(2 * radius);
    let mut total: u128 = 0;
    for mem in &members {
        let count = (0..d).fold(1u128, |acc, i| {
            let ext = mem.shape.bbox_hi()[i] - mem.shape.bbox_lo()[i];
            acc * (side - ext).max(0) as u128
        });
        total += count;
    }
    if total > MAX_INSTANCES_PER_BOX {
        return Err(Error::TooLarge {
            what: "positive-weight instances per box",
            estimate: total,
            budget: MAX_INSTANCES_PER_BOX,
        });
    }
    let cand = c.candidates();
    let r = radius as i64;
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    for mem in &members {
        let sid = cand
            .members()
            .binary_search_by(|x| x.shape.cmp(&mem.shape))
            .map_err(|_| {
                Error::Precondition(format!(
                    "the window does not admit shape {}; seed boxes must fit in the window",
                    mem.shape
                ))
            })?;
        let lo: Vec<i64> = (0..d).map(|i| -r - mem.shape.bbox_lo()[i]).collect();
        let hi: Vec<i64> = (0..d).map(|i| r - mem.shape.bbox_hi()[i]).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            continue;
        }
        let mut a = lo.clone();
        loop {
            entries.push((sid, a.clone()));
            weights.push(mem.weight);
            if !crate::anchors::odometer(&mut a, &lo, &hi) {
                break;
            }
        }
    }
    Ok(BoxTemplate { entries, weights })
}

fn is_seed(c: &Configuration, t: &BoxTemplate, center: &[i64]) -> Result<bool> {
    let cand = c.candidates();
    let open = c.open_positions();
    let mut anchor = vec![0i64; center.len()];
    for (sid, off) in &t.entries {
        for (k, x) in anchor.iter_mut().enumerate() {
            *x = center[k] + off[k];
        }
        let pos = cand.position(*sid, &anchor).ok_or_else(|| {
            Error::Precondition("seed box reaches outside the window".into())
        })?;
        if open.binary_search(&(pos as u32)).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scans centers on the grid of stride `2m + 1` whose boxes lie in the window.
pub fn detect_seeds(
    c: &Configuration,
    m: &IntensityMeasure,
    radius: u64,
    corner_cut: u64,
) -> Result<SeedScan> {
    if radius < 1 {
        return Err(Error::Precondition("seed radius must be at least 1".into()));
    }
    ModifiedBox::new(Vertex::origin(m.dim()), radius, corner_cut)?;
    let t = template(c, m, radius)?;
    let region = c.window().region();
    let r = radius as i64;
    let stride = 2 * r + 1;
    let lo: Vec<i64> = region.lo().iter().map(|x| x + r).collect();
    let hi: Vec<i64> = region.hi().iter().map(|x| x - r).collect();
    let mut seeds = Vec::new();
    let mut scanned = 0;
    if lo.iter().zip(&hi).all(|(a, b)| a <= b) {
        let counts: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / stride).collect();
        let zero = vec![0i64; counts.len()];
        let mut k = zero.clone();
        loop {
            let center: Vec<i64> = (0..k.len()).map(|i| lo[i] + k[i] * stride).collect();
            scanned += 1;
            if is_seed(c, &t, &center)? {
                seeds.push(Vertex::new(center)?);
            }
            if !crate::anchors::odometer(&mut k, &zero, &counts) {
                break;
            }
        }
    }
    Ok(SeedScan {
        radius,
        corner_cut,
        scanned,
        instances_per_box: t.entries.len(),
        seeds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedUnion {
    pub n: u64,
    pub placements: usize,
    pub seeds: Vec<Vertex>,
    /// Number of vertices in the union of the seeds' modified boxes.
    pub union_size: usize,
}

/// Seeds among all boxes `B(x, m)` lying in `T(m, n)`, i.e. `x_1 = n + m`
/// and `m <= x_j <= n - m` otherwise, with the union of their modified boxes.
pub fn seed_union(
    c: &Configuration,
    m: &IntensityMeasure,
    radius: u64,
    corner_cut: u64,
    n: u64,
) -> Result<SeedUnion> {
    if radius < 1 || n < 2 * radius {
        return Err(Error::Precondition(format!(
            "need 1 <= m and 2m <= n, got m = {radius}, n = {n}"
        )));
    }
    let t = template(c, m, radius)?;
    let d = m.dim();
    let r = radius as i64;
    let lo: Vec<i64> = (0..d).map(|i| if i == 0 { n as i64 + r } else { r }).collect();
    let hi: Vec<i64> = (0..d).map(|i| if i == 0 { n as i64 + r } else { n as i64 - r }).collect();
    let mut x = lo.clone();
    let mut seeds = Vec::new();
    let mut placements = 0;
    let mut union: HashSet<Vertex> = HashSet::new();
    loop {
        placements += 1;
        if is_seed(c, &t, &x)? {
            let v = Vertex::new(x.clone())?;
            union.extend(ModifiedBox::new(v.clone(), radius, corner_cut)?.vertices());
            seeds.push(v);
        }
        if !crate::anchors::odometer(&mut x, &lo, &hi) {
            break;
        }
    }
    Ok(SeedUnion {
        n,
        placements,
        seeds,
        union_size: union.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedDensity {
    pub record: EstimateRecord,
    pub instances_per_box: usize,
    /// Product of the open probabilities of the box's instances.
    pub independent_prediction: f64,
}

/// Fraction of scanned boxes that are seeds, pooled over replicates, on the
/// largest window of the plan.
pub fn seed_density(
    m: &IntensityMeasure,
    plan: &SweepPlan,
    u: f64,
    radius: u64,
    corner_cut: u64,
) -> Result<SeedDensity> {
    plan.check(m)?;
    let size = *plan.windows.last().expect("checked");
    let w = plan.box_window(m, size)?;
    let cand = Arc::new(enumerate_candidates(m, &w)?);
    let scans = run_indexed(plan.workers, plan.replicates, |r| {
        let seed = derive_seed(plan.base_seed, &[tag::SEEDS, size, r]);
        let c = draw_arrivals(cand.clone(), seed).configuration_at(u);
        detect_seeds(&c, m, radius, corner_cut).map(|s| (s.seeds.len(), s.scanned, s.instances_per_box))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let hits: u64 = scans.iter().map(|s| s.0 as u64).sum();
    let total: u64 = scans.iter().map(|s| s.1 as u64).sum();
    if total == 0 {
        return Err(Error::Precondition("no seed box fits in the window".into()));
    }
    let probe = draw_arrivals(cand.clone(), 0).configuration_at(u);
    let t = template(&probe, m, radius)?;
    let independent_prediction = t.weights.iter().map(|&w| open_probability(u, w)).product();
    Ok(SeedDensity {
        record: EstimateRecord::proportion("seed_density", hits, total, plan.base_seed)
            .at_u(u)
            .at_window(size),
        instances_per_box: scans[0].2,
        independent_prediction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxRegion;
    use crate::sampler::{BoundaryMode, Window};

    fn config(u: f64, seed: u64) -> (IntensityMeasure, Configuration) {
        let m = IntensityMeasure::nearest_neighbor(2, 1.0).unwrap();
        let w = Window::from_box(&BoxRegion::centered(2, 10).unwrap(), BoundaryMode::Contained)
            .unwrap();
        let cand = Arc::new(enumerate_candidates(&m, &w).unwrap());
        let c = draw_arrivals(cand, seed).configuration_at(u);
        (m, c)
    }

    #[test]
    fn all_or_nothing() {
        let (m, c) = config(1.0, 1);
        let s = detect_seeds(&c, &m, 1, 1).unwrap();
        assert_eq!(s.instances_per_box, 12);
        assert_eq!(s.scanned, 49);
        assert_eq!(s.seeds.len(), 49);
        let (m, c) = config(0.0, 1);
        assert!(detect_seeds(&c, &m, 1, 1).unwrap().seeds.is_empty());
        assert!(detect_seeds(&c, &m, 1, 2).is_err());
    }

    #[test]
    fn seeds_match_direct_check() {
        let (m, c) = config(0.85, 5);
        let s = detect_seeds(&c, &m, 1, 1).unwrap();
        let open: HashSet<Vec<Vertex>> = c
            .instances()
            .iter()
            .map(|h| h.vertices())
            .collect();
        for k in 0..49 {
            let x = vec![-9 + 3 * (k / 7), -9 + 3 * (k % 7)];
            let mut all = true;
            for dx in -1..=1i64 {
                for dy in -1..=1i64 {
                    let a = Vertex::new(vec![x[0] + dx, x[1] + dy]).unwrap();
                    for axis in 0..2 {
                        let b = a.add(&Vertex::unit(2, axis, 1));
                        if (b.coords()[axis] - x[axis]).abs() <= 1 && !open.contains(&vec![a.clone(), b]) {
                            all = false;
                        }
                    }
                }
            }
            let found = s.seeds.contains(&Vertex::new(x).unwrap());
            assert_eq!(found, all);
        }
    }

    #[test]
    fn union_over_octant_face() {
        let (m, c) = config(1.0, 2);
        let u = seed_union(&c, &m, 1, 1, 6).unwrap();
        // x_1 = 7, x_2 in [1, 5].
        assert_eq!(u.placements, 5);
        assert_eq!(u.seeds.len(), 5);
        assert!(u.union_size > 0);
        assert!(seed_union(&c, &m, 2, 1, 3).is_err());
    }
}
