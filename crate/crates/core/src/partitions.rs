//! Multi-partitions (partitions into at least three blocks) and their
//! compatibility, with an exhaustive check of the bound
//! `#Y >= #family + 2` for compatible families of distinct multi-partitions.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest ground set accepted by [`verify_lemma`].
pub const MAX_LEMMA_SIZE: usize = 7;

/// How the containment in the compatibility definition is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// `P1_i ⊇ ∪_{k≠j} P2_k`, equivalently `P1_i ∪ P2_j = Y`.
    #[default]
    Inclusive,
    /// Proper containment: additionally `P1_i ∩ P2_j ≠ ∅`.
    Strict,
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reading::Inclusive => "inclusive",
            Reading::Strict => "strict",
        })
    }
}

impl std::str::FromStr for Reading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inclusive" => Ok(Reading::Inclusive),
            "strict" => Ok(Reading::Strict),
            other => Err(Error::Partition(format!("unknown reading {other:?}"))),
        }
    }
}

/// A partition of a finite label set into at least three nonempty blocks.
/// Blocks are bit masks over the sorted ground set, kept in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPartition {
    ground: Vec<u32>,
    blocks: Vec<u64>,
}

impl MultiPartition {
    pub fn new(ground: &[u32], blocks: &[Vec<u32>]) -> Result<Self> {
        let mut g = ground.to_vec();
        g.sort_unstable();
        g.dedup();
        if g.len() != ground.len() {
            return Err(Error::Partition("ground set has repeated labels".into()));
        }
        if g.len() > 64 {
            return Err(Error::Partition("ground sets are limited to 64 labels".into()));
        }
        let mut masks = Vec::with_capacity(blocks.len());
        let mut seen = 0u64;
        for b in blocks {
            if b.is_empty() {
                return Err(Error::Partition("empty block".into()));
            }
            let mut mask = 0u64;
            for x in b {
                let i = g
                    .binary_search(x)
                    .map_err(|_| Error::Partition(format!("label {x} is not in the ground set")))?;
                mask |= 1 << i;
            }
            if mask & seen != 0 || mask.count_ones() as usize != b.len() {
                return Err(Error::Partition("blocks overlap".into()));
            }
            seen |= mask;
            masks.push(mask);
        }
        Self::from_masks(g, masks)
    }

    fn from_masks(ground: Vec<u32>, mut blocks: Vec<u64>) -> Result<Self> {
        let full = full_mask(ground.len());
        if blocks.iter().fold(0, |a, b| a | b) != full {
            return Err(Error::Partition("blocks do not cover the ground set".into()));
        }
        if blocks.len() < 3 {
            return Err(Error::Partition(format!(
                "a multi-partition needs at least 3 blocks, got {}",
                blocks.len()
            )));
        }
        blocks.sort_unstable();
        Ok(MultiPartition { ground, blocks })
    }

    pub fn ground(&self) -> &[u32] {
        &self.ground
    }

    pub fn blocks(&self) -> Vec<Vec<u32>> {
        self.blocks
            .iter()
            .map(|&m| {
                (0..self.ground.len())
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| self.ground[i])
                    .collect()
            })
            .collect()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    fn full(&self) -> u64 {
        full_mask(self.ground.len())
    }
}

impl fmt::Display for MultiPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn same_ground(p: &MultiPartition, q: &MultiPartition) -> Result<()> {
    if p.ground != q.ground {
        return Err(Error::Partition("multi-partitions of different ground sets".into()));
    }
    Ok(())
}

/// Some block of `p` and some block of `q` together cover the ground set
/// (and meet, under the strict reading).
pub fn is_compatible_with(p: &MultiPartition, q: &MultiPartition, reading: Reading) -> Result<bool> {
    same_ground(p, q)?;
    let full = p.full();
    Ok(p.blocks.iter().any(|&a| {
        q.blocks.iter().any(|&b| {
            a | b == full && (reading == Reading::Inclusive || a & b != 0)
        })
    }))
}

/// Witness blocks `(P1_i, P2_j)` whose union is the ground set.
pub fn compatibility_witness(
    p: &MultiPartition,
    q: &MultiPartition,
    reading: Reading,
) -> Result<Option<(Vec<u32>, Vec<u32>)>> {
    same_ground(p, q)?;
    let full = p.full();
    let (pb, qb) = (p.blocks(), q.blocks());
    for (i, &a) in p.blocks.iter().enumerate() {
        for (j, &b) in q.blocks.iter().enumerate() {
            if a | b == full && (reading == Reading::Inclusive || a & b != 0) {
                return Ok(Some((pb[i].clone(), qb[j].clone())));
            }
        }
    }
    Ok(None)
}

pub fn is_compatible(p: &MultiPartition, q: &MultiPartition) -> Result<bool> {
    is_compatible_with(p, q, Reading::default())
}

/// The ordered-containment form: some ordering puts `P1_1` over the union of
/// `P2_2, ..., P2_r`.
pub fn is_compatible_by_containment(
    p: &MultiPartition,
    q: &MultiPartition,
    reading: Reading,
) -> Result<bool> {
    same_ground(p, q)?;
    Ok(p.blocks.iter().any(|&a| {
        (0..q.blocks.len()).any(|j| {
            let rest = q
                .blocks
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(0u64, |acc, (_, &b)| acc | b);
            let contains = a & rest == rest;
            match reading {
                Reading::Inclusive => contains,
                Reading::Strict => contains && a != rest,
            }
        })
    }))
}

/// All members distinct and pairwise compatible.
pub fn is_compatible_family_with(ps: &[MultiPartition], reading: Reading) -> Result<bool> {
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            same_ground(p, q)?;
            if p == q || !is_compatible_with(p, q, reading)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn is_compatible_family(ps: &[MultiPartition]) -> Result<bool> {
    is_compatible_family_with(ps, Reading::default())
}

/// Every multi-partition of `{0, ..., n-1}`, in a fixed order.
pub fn all_multi_partitions(n: usize) -> Vec<MultiPartition> {
    let ground: Vec<u32> = (0..n as u32).collect();
    let mut out = Vec::new();
    let mut blocks: Vec<u64> = Vec::new();
    fn rec(i: usize, n: usize, blocks: &mut Vec<u64>, ground: &[u32], out: &mut Vec<MultiPartition>) {
        if i == n {
            if blocks.len() >= 3 {
                out.push(
                    MultiPartition::from_masks(ground.to_vec(), blocks.clone())
                        .expect("generated partitions are valid"),
                );
            }
            return;
        }
        for k in 0..blocks.len() {
            blocks[k] |= 1 << i;
            rec(i + 1, n, blocks, ground, out);
            blocks[k] &= !(1 << i);
        }
        blocks.push(1 << i);
        rec(i + 1, n, blocks, ground, out);
        blocks.pop();
    }
    rec(0, n, &mut blocks, &ground, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub ground_size: usize,
    pub multi_partitions: usize,
    pub maximal_families: u64,
    pub max_family: usize,
    pub counterexamples: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub reading: Reading,
    pub sizes: Vec<SizeReport>,
}

impl LemmaReport {
    pub fn counterexamples(&self) -> u64 {
        self.sizes.iter().map(|s| s.counterexamples).sum()
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "compatibility reading: {}", self.reading)?;
        for s in &self.sizes {
            writeln!(
                f,
                "|Y|={}: {} multi-partitions, {} maximal compatible families, largest {} (bound {}), counterexamples {}",
                s.ground_size,
                s.multi_partitions,
                s.maximal_families,
                s.max_family,
                s.ground_size - 2,
                s.counterexamples
            )?;
        }
        if self.counterexamples() == 0 {
            write!(f, "no counterexample")
        } else {
            write!(f, "{} counterexamples", self.counterexamples())
        }
    }
}

/// For each `3 <= |Y| <= max_size`, enumerates the maximal cliques of the
/// compatibility graph on all multi-partitions of `Y` and checks that every
/// one has at most `|Y| - 2` members.
pub fn verify_lemma(max_size: usize, reading: Reading) -> Result<LemmaReport> {
    if max_size > MAX_LEMMA_SIZE {
        return Err(Error::Precondition(format!(
            "ground sets above {MAX_LEMMA_SIZE} labels are refused (got {max_size})"
        )));
    }
    let mut sizes = Vec::new();
    for n in 3..=max_size {
        let ps = all_multi_partitions(n);
        let k = ps.len();
        let words = k.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; k];
        for i in 0..k {
            for j in i + 1..k {
                if is_compatible_with(&ps[i], &ps[j], reading)? {
                    adj[i][j / 64] |= 1 << (j % 64);
                    adj[j][i / 64] |= 1 << (i % 64);
                }
            }
        }
        let mut stats = CliqueStats::default();
        let mut p = vec![0u64; words];
        for i in 0..k {
            p[i / 64] |= 1 << (i % 64);
        }
        bron_kerbosch(&adj, 0, p, vec![0u64; words], &mut stats, n);
        sizes.push(SizeReport {
            ground_size: n,
            multi_partitions: k,
            maximal_families: stats.maximal,
            max_family: stats.largest,
            counterexamples: stats.violations,
        });
    }
    Ok(LemmaReport { reading, sizes })
}

#[derive(Default)]
struct CliqueStats {
    maximal: u64,
    largest: usize,
    violations: u64,
}

fn bron_kerbosch(adj: &[Vec<u64>], depth: usize, p: Vec<u64>, x: Vec<u64>, s: &mut CliqueStats, n: usize) {
    let empty = |v: &[u64]| v.iter().all(|&w| w == 0);
    if empty(&p) && empty(&x) {
        s.maximal += 1;
        s.largest = s.largest.max(depth);
        if n < depth + 2 {
            s.violations += 1;
        }
        return;
    }
    // Pivot with the most neighbours in P.
    let count = |v: usize| -> u32 {
        adj[v].iter().zip(&p).map(|(a, b)| (a & b).count_ones()).sum()
    };
    let pivot = bits(&p)
        .chain(bits(&x))
        .max_by_key(|&v| (count(v), std::cmp::Reverse(v)))
        .expect("P or X non-empty");
    let candidates: Vec<usize> = bits(&p).filter(|&v| adj[pivot][v / 64] >> (v % 64) & 1 == 0).collect();
    let (mut p, mut x) = (p, x);
    for v in candidates {
        let np: Vec<u64> = p.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
        let nx: Vec<u64> = x.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
        bron_kerbosch(adj, depth + 1, np, nx, s, n);
        p[v / 64] &= !(1 << (v % 64));
        x[v / 64] |= 1 << (v % 64);
    }
}

fn bits(v: &[u64]) -> impl Iterator<Item = usize> + '_ {
    v.iter().enumerate().flat_map(|(w, &word)| {
        (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
    })
}
