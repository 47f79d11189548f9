//! Exact annulus-crossing masses `μ({h : h ∩ B(c, n) ≠ ∅, h ∩ ∂B(c, R) ≠ ∅})`.
//!
//! For a fixed inner radius `n` the anchors whose instance meets `B(c, n)`
//! are enumerated once per shape; each such anchor contributes to every outer
//! radius `R > n` at which its instance has a vertex of sup-norm `R` around
//! `c`. For king-connected shapes that set is the interval `(n, max norm]`,
//! otherwise it is computed vertex by vertex. Counts are integers per shape;
//! masses are `Σ weight * count` accumulated in canonical shape order.

use crate::anchors::for_each_anchor_run;
use crate::error::{Error, Result};
use crate::lattice::{BoxRegion, Vertex};

use super::{HyperEdgeShape, IntensityMeasure};

/// Masses for one inner radius and every outer radius.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusProfile {
    pub inner: u64,
    /// `masses[R]` for `R > inner`; entries at or below `inner` are zero.
    masses: Vec<f64>,
}

impl AnnulusProfile {
    pub fn mass(&self, outer: u64) -> f64 {
        if outer <= self.inner {
            return 0.0;
        }
        self.masses.get(outer as usize).copied().unwrap_or(0.0)
    }

    /// Largest outer radius with nonzero mass, if any.
    pub fn support_end(&self) -> Option<u64> {
        self.masses.iter().rposition(|&m| m > 0.0).map(|i| i as u64)
    }
}

/// Result of the search for `g(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnulusDecay {
    /// Smallest `R > n` whose annulus mass is at most `1/n`.
    Found(u64),
    /// No such `R` up to and including the cap.
    ExceedsCap(u64),
}

/// Per-outer-radius anchor counts for a single shape, indexed by outer radius.
fn shape_counts(shape: &HyperEdgeShape, center: &Vertex, inner: u64, min_outer: u64) -> Vec<u64> {
    let d = shape.dim();
    let n = inner as i64;
    let c = center.coords();
    let inner_box = BoxRegion::new(center.clone(), inner)
        .and_then(|b| b.cuboid())
        .expect("inner box within coordinate range");
    let (slo, shi) = (shape.bbox_lo().to_vec(), shape.bbox_hi().to_vec());
    let king = shape.is_king_connected();

    let cap = (inner + shape.diameter() + 2) as usize;
    let mut diff = vec![0i64; cap + 2];
    let mut norms: Vec<i64> = Vec::new();
    let mut anchor = vec![0i64; d];

    // Largest sup-norm of a + S around the center.
    let max_norm = |a: &[i64]| -> i64 {
        (0..d)
            .map(|i| (a[i] + shi[i] - c[i]).max(c[i] - a[i] - slo[i]))
            .max()
            .unwrap()
    };

    for_each_anchor_run(shape, &inner_box, |prefix, start, end| {
        anchor[..d - 1].copy_from_slice(prefix);
        for t in start..=end {
            anchor[d - 1] = t;
            if king {
                let hi = max_norm(&anchor);
                if hi > n && hi >= min_outer as i64 {
                    diff[(n + 1) as usize] += 1;
                    diff[(hi + 1) as usize] -= 1;
                }
            } else {
                norms.clear();
                for o in shape.offsets() {
                    let r = o
                        .coords()
                        .iter()
                        .enumerate()
                        .map(|(i, x)| (anchor[i] + x - c[i]).abs())
                        .max()
                        .unwrap();
                    if r > n {
                        norms.push(r);
                    }
                }
                norms.sort_unstable();
                norms.dedup();
                for &r in &norms {
                    diff[r as usize] += 1;
                    diff[r as usize + 1] -= 1;
                }
            }
        }
    });

    let mut counts = vec![0u64; cap + 1];
    let mut run = 0i64;
    for (r, slot) in counts.iter_mut().enumerate() {
        run += diff[r];
        *slot = run as u64;
    }
    counts
}

/// The whole profile `R ↦ mass(n, R)` around `center`.
pub fn annulus_profile(
    m: &IntensityMeasure,
    center: &Vertex,
    inner: u64,
    cutoff: Option<u32>,
) -> Result<AnnulusProfile> {
    profile_from(m, center, inner, cutoff, 0)
}

fn profile_from(
    m: &IntensityMeasure,
    center: &Vertex,
    inner: u64,
    cutoff: Option<u32>,
    min_outer: u64,
) -> Result<AnnulusProfile> {
    if inner < 1 {
        return Err(Error::Precondition("inner radius must be at least 1".into()));
    }
    if center.dim() != m.dim() {
        return Err(Error::Precondition("center dimension mismatch".into()));
    }
    let mut masses: Vec<f64> = Vec::new();
    for member in m.members(cutoff) {
        // A shape spanning from B(n) to ∂B(R) needs extent at least R - n.
        if member.shape.diameter() + inner < min_outer {
            continue;
        }
        let counts = shape_counts(&member.shape, center, inner, min_outer);
        if masses.len() < counts.len() {
            masses.resize(counts.len(), 0.0);
        }
        for (r, &k) in counts.iter().enumerate() {
            if k > 0 {
                masses[r] += member.weight * k as f64;
            }
        }
    }
    Ok(AnnulusProfile { inner, masses })
}

/// `μ({h : h ∩ B(n) ≠ ∅, h ∩ ∂B(outer) ≠ ∅})` around the origin.
pub fn annulus_mass(m: &IntensityMeasure, inner: u64, outer: u64, cutoff: Option<u32>) -> Result<f64> {
    annulus_mass_around(m, &Vertex::origin(m.dim()), inner, outer, cutoff)
}

pub fn annulus_mass_around(
    m: &IntensityMeasure,
    center: &Vertex,
    inner: u64,
    outer: u64,
    cutoff: Option<u32>,
) -> Result<f64> {
    if outer <= inner {
        return Err(Error::Precondition(format!(
            "outer radius {outer} must exceed inner radius {inner}"
        )));
    }
    Ok(profile_from(m, center, inner, cutoff, outer)?.mass(outer))
}

/// Smallest `g > n` with `annulus_mass(n, g) <= 1/n`, searched up to `cap`.
pub fn annulus_decay(
    m: &IntensityMeasure,
    inner: u64,
    cap: u64,
    cutoff: Option<u32>,
) -> Result<AnnulusDecay> {
    let profile = annulus_profile(m, &Vertex::origin(m.dim()), inner, cutoff)?;
    let bound = 1.0 / inner as f64;
    Ok((inner + 1..=cap)
        .find(|&g| profile.mass(g) <= bound)
        .map_or(AnnulusDecay::ExceedsCap(cap), AnnulusDecay::Found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxRegion;
    use crate::measure::{canonicalize, square_loop_shape, SquareLoopFamily};

    /// Direct oracle: scan every anchor whose instance could reach B(outer)
    /// and test both intersections vertex by vertex.
    fn brute_mass(m: &IntensityMeasure, center: &Vertex, inner: u64, outer: u64) -> f64 {
        let d = m.dim();
        let mut total = 0.0;
        for member in m.members(None) {
            let s = &member.shape;
            let reach = BoxRegion::new(center.clone(), outer).unwrap().cuboid().unwrap();
            let lo: Vec<i64> = (0..d).map(|i| reach.lo()[i] - s.bbox_hi()[i]).collect();
            let hi: Vec<i64> = (0..d).map(|i| reach.hi()[i] - s.bbox_lo()[i]).collect();
            let mut a = lo.clone();
            let mut count = 0u64;
            loop {
                let mut meets_inner = false;
                let mut meets_outer = false;
                for o in s.offsets() {
                    let r = (0..d)
                        .map(|i| (a[i] + o.coords()[i] - center.coords()[i]).abs())
                        .max()
                        .unwrap();
                    meets_inner |= r <= inner as i64;
                    meets_outer |= r == outer as i64;
                }
                if meets_inner && meets_outer {
                    count += 1;
                }
                if !crate::anchors::odometer(&mut a, &lo, &hi) {
                    break;
                }
            }
            total += member.weight * count as f64;
        }
        total
    }

    fn nn2() -> IntensityMeasure {
        IntensityMeasure::nearest_neighbor(2, 1.0).unwrap()
    }

    #[test]
    fn nearest_neighbor_examples() {
        assert_eq!(annulus_mass(&nn2(), 2, 5, None).unwrap(), 0.0);
        let m = annulus_mass(&nn2(), 2, 3, None).unwrap();
        assert_eq!(m, brute_mass(&nn2(), &Vertex::origin(2), 2, 3));
        assert_eq!(m, 20.0);
    }

    #[test]
    fn agrees_with_brute_force() {
        let jump = canonicalize([
            Vertex::origin(2),
            Vertex::new(vec![3, 1]).unwrap(),
            Vertex::new(vec![-1, 4]).unwrap(),
        ])
        .unwrap();
        let mixed = IntensityMeasure::new(
            2,
            vec![(jump, 0.25)],
            vec![crate::measure::Family::SquareLoop(SquareLoopFamily::new(2, 2).unwrap())],
        )
        .unwrap();
        let measures = [nn2(), IntensityMeasure::square_loops(2, 3).unwrap(), mixed];
        let centers = [Vertex::origin(2), Vertex::new(vec![5, -7]).unwrap()];
        for m in &measures {
            for c in &centers {
                for n in 1..=3u64 {
                    for outer in n + 1..=n + 9 {
                        let fast = annulus_mass_around(m, c, n, outer, None).unwrap();
                        let slow = brute_mass(m, c, n, outer);
                        assert!((fast - slow).abs() < 1e-9, "n={n} R={outer}: {fast} vs {slow}");
                    }
                }
            }
        }
    }

    #[test]
    fn three_dimensional_agrees_with_brute_force() {
        let m = IntensityMeasure::nearest_neighbor(3, 0.5).unwrap();
        let loops = IntensityMeasure::square_loops(3, 2).unwrap();
        for meas in [&m, &loops] {
            for (n, outer) in [(1u64, 2u64), (2, 3), (1, 5)] {
                let fast = annulus_mass(meas, n, outer, None).unwrap();
                let slow = brute_mass(meas, &Vertex::origin(3), n, outer);
                assert!((fast - slow).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn profile_matches_pointwise_queries() {
        let m = IntensityMeasure::square_loops(2, 4).unwrap();
        let p = annulus_profile(&m, &Vertex::origin(2), 3, None).unwrap();
        for outer in 4..=40 {
            let single = annulus_mass(&m, 3, outer, None).unwrap();
            assert_eq!(p.mass(outer), single, "R={outer}");
        }
    }

    #[test]
    fn monotone_in_outer_and_inner() {
        for m in [nn2(), IntensityMeasure::square_loops(2, 5).unwrap()] {
            for n in 1..=6u64 {
                let p = annulus_profile(&m, &Vertex::origin(2), n, None).unwrap();
                let q = annulus_profile(&m, &Vertex::origin(2), n + 1, None).unwrap();
                for outer in n + 1..=80 {
                    assert!(p.mass(outer + 1) <= p.mass(outer));
                    if outer > n + 1 {
                        assert!(q.mass(outer) >= p.mass(outer));
                    }
                }
            }
        }
    }

    #[test]
    fn nearest_neighbor_depends_only_on_gap() {
        let m = nn2();
        for n in 2..=8u64 {
            assert_eq!(annulus_mass(&m, n, n + 1, None).unwrap(), (8 * n + 4) as f64);
            for gap in 2..=4 {
                assert_eq!(annulus_mass(&m, n, n + gap, None).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn decay_examples() {
        assert_eq!(annulus_decay(&nn2(), 3, 100, None).unwrap(), AnnulusDecay::Found(5));
        let long = canonicalize([Vertex::origin(2), Vertex::new(vec![10, 0]).unwrap()]).unwrap();
        let m = IntensityMeasure::new(2, vec![(long, 0.01)], vec![]).unwrap();
        match annulus_decay(&m, 1, 100, None).unwrap() {
            AnnulusDecay::Found(g) => assert!(g <= 12, "g = {g}"),
            other => panic!("{other:?}"),
        }
        let loops = IntensityMeasure::square_loops(2, 14).unwrap();
        assert_eq!(annulus_decay(&loops, 4, 4096, None).unwrap(), AnnulusDecay::ExceedsCap(4096));
    }

    #[test]
    fn ring_masses_count_each_scale() {
        // One ring of scale 1 (5x5 square, 16 vertices): hand count of anchors
        // meeting B(1) and reaching sup-norm 5.
        let s = square_loop_shape(2, 1);
        let m = IntensityMeasure::new(2, vec![(s, 1.0)], vec![]).unwrap();
        let fast = annulus_mass(&m, 1, 5, None).unwrap();
        assert_eq!(fast, brute_mass(&m, &Vertex::origin(2), 1, 5));
        assert!(fast > 0.0);
    }

    #[test]
    fn precondition_errors() {
        assert!(annulus_mass(&nn2(), 3, 3, None).is_err());
        assert!(annulus_mass(&nn2(), 0, 3, None).is_err());
    }
}
