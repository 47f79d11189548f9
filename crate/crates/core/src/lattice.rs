//! Integer-lattice geometry on Z^d.
//!
//! Every vertex set returned here iterates in lexicographic order so that runs
//! are reproducible bit for bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates must stay within `[-MAX_COORD, MAX_COORD]`.
pub const MAX_COORD: i64 = 1 << 31;

/// A point of Z^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(Vec<i64>);

impl Vertex {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "dimension must be at least 2, got {}",
                coords.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| c.abs() > MAX_COORD) {
            return Err(Error::InvalidGeometry(format!(
                "coordinate {c} exceeds the supported range of ±2^31"
            )));
        }
        Ok(Vertex(coords))
    }

    /// Wraps coordinates without range checks. Callers guarantee `d >= 2`.
    pub(crate) fn from_raw(coords: Vec<i64>) -> Self {
        debug_assert!(coords.len() >= 2);
        Vertex(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Vertex(vec![0; dim])
    }

    /// `sign * e_axis`.
    pub fn unit(dim: usize, axis: usize, sign: i64) -> Self {
        let mut c = vec![0; dim];
        c[axis] = sign;
        Vertex(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn add(&self, other: &Vertex) -> Vertex {
        Vertex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vertex) -> Vertex {
        Vertex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Axis-aligned block `[lo_1, hi_1] x ... x [lo_d, hi_d]` with row-major
/// vertex indexing (last axis fastest), so index order is lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cuboid {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Cuboid {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() < 2 {
            return Err(Error::InvalidGeometry(
                "cuboid bounds must have equal dimension of at least 2".into(),
            ));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if a > b {
                return Err(Error::InvalidGeometry(format!("empty cuboid side [{a}, {b}]")));
            }
            if a.abs() > MAX_COORD || b.abs() > MAX_COORD {
                return Err(Error::InvalidGeometry(
                    "cuboid exceeds the supported range of ±2^31".into(),
                ));
            }
        }
        Ok(Cuboid { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> u64 {
        (self.hi[axis] - self.lo[axis] + 1) as u64
    }

    /// Number of vertices, saturating on overflow.
    pub fn volume(&self) -> u128 {
        (0..self.dim()).fold(1u128, |acc, i| acc.saturating_mul(self.side(i) as u128))
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (a, b))| a <= c && c <= b)
    }

    /// Row-major strides; `strides[d-1] == 1`.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for i in (0..d - 1).rev() {
            s[i] = s[i + 1] * self.side(i + 1) as usize;
        }
        s
    }

    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let mut idx = 0usize;
        for i in 0..self.dim() {
            idx = idx * self.side(i) as usize + (v[i] - self.lo[i]) as usize;
        }
        Some(idx)
    }

    pub fn vertex_at(&self, mut index: usize) -> Vertex {
        let d = self.dim();
        let mut c = vec![0i64; d];
        for i in (0..d).rev() {
            let side = self.side(i) as usize;
            c[i] = self.lo[i] + (index % side) as i64;
            index /= side;
        }
        Vertex(c)
    }

    /// Writes the coordinates of vertex `index` into `out`.
    pub fn write_vertex_at(&self, mut index: usize, out: &mut [i64]) {
        for i in (0..self.dim()).rev() {
            let side = self.side(i) as usize;
            out[i] = self.lo[i] + (index % side) as i64;
            index /= side;
        }
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let n = self.volume() as usize;
        (0..n).map(|i| self.vertex_at(i)).collect()
    }

    /// Whether `v` lies on the face `x_axis = lo` (`upper == false`) or `x_axis = hi`.
    pub fn on_face(&self, v: &[i64], axis: usize, upper: bool) -> bool {
        if upper {
            v[axis] == self.hi[axis]
        } else {
            v[axis] == self.lo[axis]
        }
    }

    pub fn intersect(&self, other: &Cuboid) -> Option<Cuboid> {
        let lo: Vec<i64> = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect();
        let hi: Vec<i64> = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            None
        } else {
            Some(Cuboid { lo, hi })
        }
    }
}

/// `B(x, n) = x + {-n, ..., n}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxRegion {
    pub center: Vertex,
    pub radius: u64,
}

impl BoxRegion {
    pub fn new(center: Vertex, radius: u64) -> Result<Self> {
        let b = BoxRegion { center, radius };
        b.cuboid()?;
        Ok(b)
    }

    pub fn centered(dim: usize, radius: u64) -> Result<Self> {
        Self::new(Vertex::origin(dim), radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn cuboid(&self) -> Result<Cuboid> {
        let r = self.radius as i64;
        Cuboid::new(
            self.center.0.iter().map(|c| c - r).collect(),
            self.center.0.iter().map(|c| c + r).collect(),
        )
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        v.sub(&self.center).sup_norm() <= self.radius as i64
    }

    /// All `(2n+1)^d` vertices in lexicographic order.
    pub fn vertices(&self) -> Vec<Vertex> {
        self.cuboid().map(|c| c.vertices()).unwrap_or_default()
    }

    /// Vertices at sup-norm distance exactly `n` from the center; `{center}` when `n = 0`.
    pub fn boundary_vertices(&self) -> Vec<Vertex> {
        let r = self.radius as i64;
        self.vertices()
            .into_iter()
            .filter(|v| v.sub(&self.center).sup_norm() == r)
            .collect()
    }
}

/// Which face subset [`octant_face`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    /// `T(n)`: `x_1 = n` and `x_j >= 0` for `j >= 2`.
    Octant,
    /// `F(n)`: `x_1 = n`.
    Full,
}

/// `T(n)` (shift 0) or `T(m, n) = ∪_{j=0}^{2m} (j e_1 + T(n))`; with
/// [`FaceKind::Full`] the non-negativity constraint is dropped (`F(n)` and its shifts).
pub fn octant_face(dim: usize, n: u64, shift: u64, kind: FaceKind) -> Result<Vec<Vertex>> {
    if dim < 2 {
        return Err(Error::InvalidGeometry("dimension must be at least 2".into()));
    }
    if n < 1 {
        return Err(Error::InvalidGeometry("face radius must be at least 1".into()));
    }
    let n = n as i64;
    let lo_rest = match kind {
        FaceKind::Octant => 0,
        FaceKind::Full => -n,
    };
    let mut lo = vec![lo_rest; dim];
    let mut hi = vec![n; dim];
    lo[0] = n;
    hi[0] = n + 2 * shift as i64;
    Ok(Cuboid::new(lo, hi)?.vertices())
}

/// `B(x, m, c)`: the box `B(x, m)` with its `2^d` corner cubes of side `c` removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedBox {
    pub center: Vertex,
    pub radius: u64,
    pub corner_cut: u64,
}

impl ModifiedBox {
    pub fn new(center: Vertex, radius: u64, corner_cut: u64) -> Result<Self> {
        if corner_cut < 1 || corner_cut > radius {
            return Err(Error::InvalidGeometry(format!(
                "corner cut must satisfy 1 <= c <= m, got c = {corner_cut}, m = {radius}"
            )));
        }
        BoxRegion::new(center.clone(), radius)?;
        Ok(ModifiedBox {
            center,
            radius,
            corner_cut,
        })
    }

    /// `y` belongs iff it is in `B(x, m)` and some coordinate of `y - x` lies in `[-(m-c), m-c]`.
    pub fn contains(&self, y: &Vertex) -> bool {
        let rel = y.sub(&self.center);
        let m = self.radius as i64;
        let keep = m - self.corner_cut as i64;
        rel.sup_norm() <= m && rel.0.iter().any(|c| c.abs() <= keep)
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        BoxRegion {
            center: self.center.clone(),
            radius: self.radius,
        }
        .vertices()
        .into_iter()
        .filter(|v| self.contains(v))
        .collect()
    }
}

/// A signed axis permutation: `(φ v)_i = signs[i] * v[perm[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeSymmetry {
    perm: Vec<usize>,
    signs: Vec<i64>,
}

impl LatticeSymmetry {
    pub fn new(perm: Vec<usize>, signs: Vec<i64>) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::InvalidGeometry("not a permutation".into()));
            }
            seen[p] = true;
        }
        if signs.len() != d || signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidGeometry("signs must be ±1 per axis".into()));
        }
        Ok(LatticeSymmetry { perm, signs })
    }

    pub fn identity(dim: usize) -> Self {
        LatticeSymmetry {
            perm: (0..dim).collect(),
            signs: vec![1; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn apply(&self, v: &Vertex) -> Vertex {
        Vertex(self.apply_coords(v.coords()))
    }

    pub fn apply_coords(&self, v: &[i64]) -> Vec<i64> {
        (0..self.perm.len())
            .map(|i| self.signs[i] * v[self.perm[i]])
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LatticeSymmetry) -> LatticeSymmetry {
        // (self(other v))_i = s_i * (other v)_{p_i} = s_i * t_{p_i} * v[q_{p_i}]
        let d = self.dim();
        LatticeSymmetry {
            perm: (0..d).map(|i| other.perm[self.perm[i]]).collect(),
            signs: (0..d).map(|i| self.signs[i] * other.signs[self.perm[i]]).collect(),
        }
    }

    /// All `2^d d!` signed permutations in a fixed order.
    pub fn group(dim: usize) -> Vec<LatticeSymmetry> {
        let mut out = Vec::new();
        for perm in permutations(dim) {
            for mask in 0..(1u32 << dim) {
                let signs = (0..dim)
                    .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                    .collect();
                out.push(LatticeSymmetry {
                    perm: perm.clone(),
                    signs,
                });
            }
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// `Z_{>=0}^2 x {1, ..., L}^{d-2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlabRegion {
    pub thickness: u64,
    pub dim: usize,
}

impl SlabRegion {
    pub fn new(thickness: u64, dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Precondition(format!(
                "slab truncation needs d >= 3, got d = {dim}"
            )));
        }
        if thickness < 1 {
            return Err(Error::InvalidGeometry("slab thickness must be positive".into()));
        }
        Ok(SlabRegion { thickness, dim })
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v[0] >= 0
            && v[1] >= 0
            && v[2..].iter().all(|&c| c >= 1 && c <= self.thickness as i64)
    }

    /// Whether the axis-aligned block `[lo, hi]` lies inside the slab.
    pub fn contains_block(&self, lo: &[i64], hi: &[i64]) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    /// The finite piece `[0, long-1] x [0, wide-1] x [1, L]^{d-2}`.
    pub fn window(&self, long: u64, wide: u64) -> Result<Cuboid> {
        let mut lo = vec![1i64; self.dim];
        let mut hi = vec![self.thickness as i64; self.dim];
        lo[0] = 0;
        lo[1] = 0;
        hi[0] = long as i64 - 1;
        hi[1] = wide as i64 - 1;
        Cuboid::new(lo, hi)
    }
}
