//! Translation-invariant intensity measures on hyper-edges.
//!
//! A measure is a finite list of weighted shape classes (atoms) plus
//! parametric families. Shapes are stored canonically anchored so that
//! translation invariance holds by construction: an instance is a
//! `(shape, anchor)` pair and every translate of a shape carries the same weight.

mod annulus;
mod spec;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSymmetry, Vertex};

pub use annulus::{
    annulus_decay, annulus_mass, annulus_mass_around, annulus_profile, AnnulusDecay,
    AnnulusProfile,
};
pub use spec::{AtomSpec, FamilySpec, MeasureSpec};
pub use validate::{validate, ValidationReport, Verdict};

/// A translation class of hyper-edges, anchored so that its lexicographically
/// smallest offset is the zero vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperEdgeShape {
    offsets: Vec<Vertex>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl HyperEdgeShape {
    pub fn offsets(&self) -> &[Vertex] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Per-axis minimum of the offsets.
    pub fn bbox_lo(&self) -> &[i64] {
        &self.lo
    }

    /// Per-axis maximum of the offsets.
    pub fn bbox_hi(&self) -> &[i64] {
        &self.hi
    }

    /// Sup-norm diameter: the largest per-axis extent.
    pub fn diameter(&self) -> u64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) as u64)
            .max()
            .unwrap_or(0)
    }

    pub fn contains_offset(&self, v: &Vertex) -> bool {
        self.offsets.binary_search(v).is_ok()
    }

    pub fn transform(&self, sym: &LatticeSymmetry) -> HyperEdgeShape {
        canonicalize(self.offsets.iter().map(|v| sym.apply(v)))
            .expect("symmetries preserve shape validity")
    }

    /// Whether the offsets form one component under king moves
    /// (sup-norm distance 1). Along such a shape the sup-norm of the
    /// vertices changes by at most one per step.
    pub fn is_king_connected(&self) -> bool {
        let d = self.dim();
        let steps: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
            .map(|mut code| {
                (0..d)
                    .map(|_| {
                        let c = (code % 3) as i64 - 1;
                        code /= 3;
                        c
                    })
                    .collect()
            })
            .filter(|s: &Vec<i64>| s.iter().any(|&c| c != 0))
            .collect();
        // Offsets are sorted, so membership is a binary search.
        let find = |p: &[i64]| self.offsets.binary_search_by(|v| v.coords().cmp(p)).ok();
        let mut seen = vec![false; self.offsets.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        let mut next = vec![0i64; d];
        while let Some(i) = stack.pop() {
            let cur = self.offsets[i].coords();
            for s in &steps {
                for k in 0..d {
                    next[k] = cur[k] + s[k];
                }
                if let Some(j) = find(&next) {
                    if !seen[j] {
                        seen[j] = true;
                        reached += 1;
                        stack.push(j);
                    }
                }
            }
        }
        reached == self.offsets.len()
    }
}

impl fmt::Display for HyperEdgeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.offsets.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Returns the unique translate of `offsets` whose lexicographically minimal
/// element is the origin. Duplicate points are merged.
pub fn canonicalize<I>(offsets: I) -> Result<HyperEdgeShape>
where
    I: IntoIterator<Item = Vertex>,
{
    let mut pts: Vec<Vertex> = offsets.into_iter().collect();
    pts.sort();
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::InvalidShape(format!(
            "a hyper-edge needs at least two distinct vertices, got {}",
            pts.len()
        )));
    }
    let d = pts[0].dim();
    if pts.iter().any(|p| p.dim() != d) {
        return Err(Error::InvalidShape("offsets of mixed dimension".into()));
    }
    let base = pts[0].clone();
    let offsets: Vec<Vertex> = pts.iter().map(|p| p.sub(&base)).collect();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for p in &offsets {
        for (i, &c) in p.coords().iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    Ok(HyperEdgeShape { offsets, lo, hi })
}

/// One hyper-edge: `anchor + shape`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperEdgeInstance {
    pub shape: Arc<HyperEdgeShape>,
    pub anchor: Vertex,
}

impl HyperEdgeInstance {
    pub fn vertices(&self) -> Vec<Vertex> {
        self.shape
            .offsets()
            .iter()
            .map(|o| o.add(&self.anchor))
            .collect()
    }

    /// The lattice shift `τ_v`.
    pub fn translate(&self, v: &Vertex) -> HyperEdgeInstance {
        HyperEdgeInstance {
            shape: self.shape.clone(),
            anchor: self.anchor.add(v),
        }
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.shape.contains_offset(&v.sub(&self.anchor))
    }
}

/// Square rings `Q_k = {(x, y) : max(|x|, |y|) = 2^k} x {0}^{d-2}` with weight `k 2^{-2k}`,
/// for scales `1..=max_scale`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareLoopFamily {
    pub dim: usize,
    pub max_scale: u32,
}

/// Rings larger than this would not fit the coordinate range comfortably.
pub const MAX_LOOP_SCALE: u32 = 24;

impl SquareLoopFamily {
    pub fn new(dim: usize, max_scale: u32) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMeasure("dimension must be at least 2".into()));
        }
        if !(1..=MAX_LOOP_SCALE).contains(&max_scale) {
            return Err(Error::InvalidMeasure(format!(
                "square_loop max_scale must lie in 1..={MAX_LOOP_SCALE}, got {max_scale}"
            )));
        }
        Ok(SquareLoopFamily { dim, max_scale })
    }

    pub fn shape(&self, scale: u32) -> HyperEdgeShape {
        square_loop_shape(self.dim, scale)
    }

    pub fn weight(scale: u32) -> f64 {
        scale as f64 * (2f64).powi(-2 * scale as i32)
    }
}

/// The ring `Q_k` embedded in the first two axes, canonically anchored.
pub fn square_loop_shape(dim: usize, scale: u32) -> HyperEdgeShape {
    let r = 1i64 << scale;
    let point = |x: i64, y: i64| {
        let mut c = vec![0i64; dim];
        c[0] = x;
        c[1] = y;
        Vertex::from_raw(c)
    };
    let mut pts = Vec::with_capacity(8 * r as usize);
    for t in -r..=r {
        pts.push(point(t, -r));
        pts.push(point(t, r));
    }
    for t in -r + 1..r {
        pts.push(point(-r, t));
        pts.push(point(r, t));
    }
    canonicalize(pts).expect("rings have many vertices")
}

/// A parametric family generating one shape class per scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    SquareLoop(SquareLoopFamily),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SquareLoop(_) => "square_loop",
        }
    }

    pub fn max_scale(&self) -> u32 {
        match self {
            Family::SquareLoop(f) => f.max_scale,
        }
    }

    /// Per-axis bounding-box extent of the member at scale `k`.
    pub fn extent(&self, k: u32) -> Vec<u64> {
        match self {
            Family::SquareLoop(f) => {
                let mut e = vec![0u64; f.dim];
                e[0] = 2u64 << k;
                e[1] = 2u64 << k;
                e
            }
        }
    }

    pub fn diameter(&self, k: u32) -> u64 {
        self.extent(k).into_iter().max().unwrap_or(0)
    }

    /// `(shape(k), weight(k))` for `k = 1..=min(max_scale, cutoff)`.
    pub fn members(&self, cutoff: Option<u32>) -> Vec<(HyperEdgeShape, f64)> {
        let top = cutoff.map_or(self.max_scale(), |c| c.min(self.max_scale()));
        match self {
            Family::SquareLoop(f) => (1..=top)
                .map(|k| (f.shape(k), SquareLoopFamily::weight(k)))
                .collect(),
        }
    }
}

/// A weighted shape class.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub shape: Arc<HyperEdgeShape>,
    pub weight: f64,
}

/// A shape class with its total weight, as seen by samplers and counters.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub shape: Arc<HyperEdgeShape>,
    pub weight: f64,
}

/// The intensity measure `μ`. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    families: Vec<Family>,
    symmetry_closed: bool,
}

impl IntensityMeasure {
    /// Atoms are sorted canonically; duplicate shapes and non-positive or
    /// non-finite weights are rejected.
    pub fn new(dim: usize, atoms: Vec<(HyperEdgeShape, f64)>, families: Vec<Family>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMeasure(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        let mut map: BTreeMap<HyperEdgeShape, f64> = BTreeMap::new();
        for (shape, w) in atoms {
            if shape.dim() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "shape {shape} has dimension {}, measure has {dim}",
                    shape.dim()
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "weight of {shape} must be positive and finite, got {w}"
                )));
            }
            if map.insert(shape.clone(), w).is_some() {
                return Err(Error::InvalidMeasure(format!("duplicate shape {shape}")));
            }
        }
        for f in &families {
            let Family::SquareLoop(sl) = f;
            if sl.dim != dim {
                return Err(Error::InvalidMeasure("family dimension mismatch".into()));
            }
        }
        Ok(IntensityMeasure {
            dim,
            atoms: map
                .into_iter()
                .map(|(shape, weight)| Atom {
                    shape: Arc::new(shape),
                    weight,
                })
                .collect(),
            families,
            symmetry_closed: false,
        })
    }

    pub fn empty(dim: usize) -> Self {
        IntensityMeasure {
            dim,
            atoms: Vec::new(),
            families: Vec::new(),
            symmetry_closed: false,
        }
    }

    /// Unit edges along every axis, each with weight `w`. Bernoulli bond
    /// percolation with `p = 1 - (1 - u)^w`.
    pub fn nearest_neighbor(dim: usize, weight: f64) -> Result<Self> {
        let atoms = (0..dim)
            .map(|axis| {
                let shape = canonicalize([Vertex::origin(dim), Vertex::unit(dim, axis, 1)])?;
                Ok((shape, weight))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = Self::new(dim, atoms, Vec::new())?;
        m.symmetry_closed = true;
        Ok(m)
    }

    pub fn square_loops(dim: usize, max_scale: u32) -> Result<Self> {
        let fam = SquareLoopFamily::new(dim, max_scale)?;
        Self::new(dim, Vec::new(), vec![Family::SquareLoop(fam)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn is_symmetry_closed(&self) -> bool {
        self.symmetry_closed
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.families.is_empty()
    }

    /// All positive-weight shape classes in canonical order, families
    /// enumerated up to `cutoff`. A shape produced by both an atom and a
    /// family carries the sum of both weights.
    pub fn members(&self, cutoff: Option<u32>) -> Vec<Member> {
        let mut map: BTreeMap<Arc<HyperEdgeShape>, f64> = BTreeMap::new();
        for a in &self.atoms {
            map.insert(a.shape.clone(), a.weight);
        }
        for f in &self.families {
            for (shape, w) in f.members(cutoff) {
                *map.entry(Arc::new(shape)).or_insert(0.0) += w;
            }
        }
        map.into_iter()
            .map(|(shape, weight)| Member { shape, weight })
            .collect()
    }

    /// Members of sup-norm diameter at most `max_diameter`, together with
    /// the number of members left out. Oversized family members are never
    /// materialized.
    pub fn members_within(&self, max_diameter: u64) -> (Vec<Member>, usize) {
        let mut skipped = 0usize;
        let mut map: BTreeMap<Arc<HyperEdgeShape>, f64> = BTreeMap::new();
        for a in &self.atoms {
            if a.shape.diameter() <= max_diameter {
                map.insert(a.shape.clone(), a.weight);
            } else {
                skipped += 1;
            }
        }
        for f in &self.families {
            let top = (1..=f.max_scale())
                .take_while(|&k| f.diameter(k) <= max_diameter)
                .last()
                .unwrap_or(0);
            skipped += (f.max_scale() - top) as usize;
            for (shape, w) in f.members(Some(top)) {
                *map.entry(Arc::new(shape)).or_insert(0.0) += w;
            }
        }
        let members = map
            .into_iter()
            .map(|(shape, weight)| Member { shape, weight })
            .collect();
        (members, skipped)
    }

    /// `μ({h : v ∈ h})`: each shape contributes `weight * |shape|`, since that
    /// many anchors place it over any fixed vertex.
    pub fn local_mass(&self, v: &Vertex, cutoff: Option<u32>) -> f64 {
        assert_eq!(v.dim(), self.dim, "vertex dimension mismatch");
        self.members(cutoff)
            .iter()
            .map(|m| m.weight * m.shape.len() as f64)
            .sum()
    }

    /// Adds every symmetry image of every atom with the atom's weight.
    /// Families are left as they are.
    pub fn symmetry_closure(&self) -> Result<IntensityMeasure> {
        let group = LatticeSymmetry::group(self.dim);
        let mut map: BTreeMap<HyperEdgeShape, f64> = BTreeMap::new();
        for a in &self.atoms {
            for g in &group {
                let img = a.shape.transform(g);
                if let Some(&w) = map.get(&img) {
                    if w != a.weight {
                        return Err(Error::WeightConflict {
                            shape: img.to_string(),
                            first: w,
                            second: a.weight,
                        });
                    }
                } else {
                    map.insert(img, a.weight);
                }
            }
        }
        let mut m = IntensityMeasure::new(self.dim, map.into_iter().collect(), self.families.clone())?;
        m.symmetry_closed = true;
        Ok(m)
    }

    /// Whether every member (up to `cutoff`) is mapped by every lattice
    /// symmetry onto a member of equal weight.
    pub fn is_symmetric(&self, cutoff: Option<u32>) -> bool {
        let members = self.members(cutoff);
        let lookup: BTreeMap<&HyperEdgeShape, f64> =
            members.iter().map(|m| (m.shape.as_ref(), m.weight)).collect();
        let group = LatticeSymmetry::group(self.dim);
        members.iter().all(|m| {
            group
                .iter()
                .all(|g| lookup.get(&m.shape.transform(g)) == Some(&m.weight))
        })
    }

    /// Canonical JSON form: atoms in canonical order, explicit flags.
    pub fn to_spec(&self) -> MeasureSpec {
        MeasureSpec {
            dimension: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomSpec {
                    offsets: a
                        .shape
                        .offsets()
                        .iter()
                        .map(|v| v.coords().to_vec())
                        .collect(),
                    weight: a.weight,
                })
                .collect(),
            families: self
                .families
                .iter()
                .map(|f| FamilySpec {
                    name: f.name().to_string(),
                    params: serde_json::json!({ "max_scale": f.max_scale() }),
                })
                .collect(),
            symmetry_closed: self.symmetry_closed,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(&self.to_spec()).expect("spec serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MeasureSpec =
            serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.build()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
