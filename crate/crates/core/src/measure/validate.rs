use std::fmt;

use serde::Serialize;

use super::IntensityMeasure;
use crate::clusters::ClusterLabeling;
use crate::error::{Error, Result};
use crate::lattice::{BoxRegion, ModifiedBox, Vertex};
use crate::sampler::{
    candidates_from_members, BoundaryMode, Configuration, Provenance, Window,
    DEFAULT_CANDIDATE_BUDGET,
};
use std::sync::Arc;

/// Outcome of a finite search. Nothing is claimed about the infinite lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "radius", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    FailsWithin(u64),
    UnknownBeyond(u64),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::FailsWithin(r) => write!(f, "fails within R={r}"),
            Verdict::UnknownBeyond(r) => write!(f, "unknown beyond R={r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub radius: u64,
    pub not_one_dimensional: Verdict,
    /// Linearly independent displacements `x, y` with `0, x ∈ h1` and `0, y ∈ h2`.
    pub independent_displacements: Option<(Vertex, Vertex)>,
    pub irreducible: Verdict,
    /// Smallest `r <= R` such that chains inside `B(r)` join 0 to every `±e_j`.
    pub irreducible_radius: Option<u64>,
    pub symmetry_closed: bool,
    pub symmetric_within_radius: bool,
    /// Smallest `c` such that `B(0, R, c)` is joined by the instances inside `B(R)`.
    pub corner_cut: Option<u64>,
    /// Members excluded because their diameter exceeds `2R`.
    pub skipped_members: usize,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "search radius: {}", self.radius)?;
        write!(f, "not essentially one-dimensional: {}", self.not_one_dimensional)?;
        if let Some((x, y)) = &self.independent_displacements {
            write!(f, " (witness {x}, {y})")?;
        }
        writeln!(f)?;
        write!(f, "irreducible: {}", self.irreducible)?;
        if let Some(r) = self.irreducible_radius {
            write!(f, " (within radius {r})")?;
        }
        writeln!(f)?;
        writeln!(f, "symmetry-closed flag: {}", self.symmetry_closed)?;
        writeln!(f, "symmetric up to diameter 2R: {}", self.symmetric_within_radius)?;
        match self.corner_cut {
            Some(c) => writeln!(f, "corner cut at R: {c}")?,
            None => writeln!(f, "corner cut at R: none")?,
        }
        write!(f, "members beyond diameter 2R: {}", self.skipped_members)
    }
}

/// Finite checks of the structural conditions on `m`, using members of
/// diameter at most `2R` and chains confined to `B(R)`.
pub fn validate(m: &IntensityMeasure, radius: u64) -> Result<ValidationReport> {
    if radius < 1 {
        return Err(Error::Precondition("validation radius must be at least 1".into()));
    }
    let d = m.dim();
    let (members, skipped) = m.members_within(2 * radius);

    // Displacements between two vertices of one shape, shortest first.
    let r = radius as i64;
    let mut disp: Vec<Vec<i64>> = Vec::new();
    let mut long_displacement = false;
    for mem in &members {
        let offs = mem.shape.offsets();
        for a in offs {
            for b in offs {
                if a == b {
                    continue;
                }
                let x: Vec<i64> = a.coords().iter().zip(b.coords()).map(|(p, q)| p - q).collect();
                if x.iter().any(|c| c.abs() > r) {
                    long_displacement = true;
                } else {
                    disp.push(x);
                }
            }
        }
    }
    disp.sort_by_key(|x| (x.iter().map(|c| c.abs()).max(), x.clone()));
    disp.dedup();
    let witness = independent_pair(&disp);
    let not_one_dimensional = match (&witness, skipped > 0 || long_displacement) {
        (Some(_), _) => Verdict::Holds,
        (None, true) => Verdict::UnknownBeyond(radius),
        (None, false) => Verdict::FailsWithin(radius),
    };

    let mut irreducible_radius = None;
    if joins_units(m, &members, radius)? {
        let (mut lo, mut hi) = (1u64, radius);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if joins_units(m, &members, mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        irreducible_radius = Some(lo);
    }
    let irreducible = if irreducible_radius.is_some() {
        Verdict::Holds
    } else {
        Verdict::FailsWithin(radius)
    };

    let labeling = full_labeling(m, &members, radius)?;
    let mut corner_cut = None;
    for c in 1..=radius {
        let mb = ModifiedBox::new(Vertex::origin(d), radius, c)?;
        let verts = mb.vertices();
        let root = labeling.root_of(&verts[0])?;
        if verts.iter().all(|v| labeling.root_of(v).map(|x| x == root).unwrap_or(false)) {
            corner_cut = Some(c);
            break;
        }
    }

    let symmetric_within_radius = {
        let probe = IntensityMeasure {
            dim: d,
            atoms: members
                .iter()
                .map(|mem| super::Atom {
                    shape: mem.shape.clone(),
                    weight: mem.weight,
                })
                .collect(),
            families: Vec::new(),
            symmetry_closed: false,
        };
        probe.is_symmetric(None)
    };

    Ok(ValidationReport {
        radius,
        not_one_dimensional,
        independent_displacements: witness
            .map(|(x, y)| (Vertex::from_raw(x), Vertex::from_raw(y))),
        irreducible,
        irreducible_radius,
        symmetry_closed: m.is_symmetry_closed(),
        symmetric_within_radius,
        corner_cut,
        skipped_members: skipped,
    })
}

fn independent_pair(disp: &[Vec<i64>]) -> Option<(Vec<i64>, Vec<i64>)> {
    let first = disp.first()?;
    let d = first.len();
    disp.iter().find_map(|y| {
        let independent = (0..d).any(|i| (i + 1..d).any(|j| first[i] * y[j] != first[j] * y[i]));
        independent.then(|| (first.clone(), y.clone()))
    })
}

/// Labeling of `B(radius)` with every contained instance open.
fn full_labeling(
    m: &IntensityMeasure,
    members: &[super::Member],
    radius: u64,
) -> Result<ClusterLabeling> {
    let w = Window::from_box(&BoxRegion::centered(m.dim(), radius)?, BoundaryMode::Contained)?;
    let fitting: Vec<super::Member> = members
        .iter()
        .filter(|mem| mem.shape.diameter() <= 2 * radius)
        .cloned()
        .collect();
    let cand = Arc::new(candidates_from_members(
        fitting,
        m.digest(),
        &w,
        DEFAULT_CANDIDATE_BUDGET,
    )?);
    let all: Vec<u32> = (0..cand.len() as u32).collect();
    let c = Configuration::from_positions(
        cand,
        all,
        Provenance {
            seed: 0,
            u: 1.0,
            level: f64::INFINITY,
            slab: None,
        },
    );
    Ok(ClusterLabeling::build(&c))
}

fn joins_units(m: &IntensityMeasure, members: &[super::Member], radius: u64) -> Result<bool> {
    let d = m.dim();
    let l = full_labeling(m, members, radius)?;
    let o = Vertex::origin(d);
    for j in 0..d {
        for s in [1, -1] {
            if !l.connected(&o, &Vertex::unit(d, j, s))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
