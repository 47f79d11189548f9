//! Enumeration of the anchors `a` for which `a + S` meets an axis-aligned block.
//!
//! The shape is split into columns along the last axis. For each anchor
//! prefix (the first `d-1` coordinates) the admissible last coordinates form
//! a union of intervals, one per run of consecutive column entries, so the
//! cost is governed by the number of columns rather than by `|S|` times the
//! block volume.

use std::collections::HashMap;

use crate::lattice::Cuboid;
use crate::measure::HyperEdgeShape;

/// Column decomposition of a shape along its last axis.
pub(crate) struct Columns {
    /// prefix -> sorted disjoint runs `[start, end]` of last coordinates.
    map: HashMap<Vec<i64>, Vec<(i64, i64)>>,
    /// Same prefixes in lexicographic order.
    prefixes: Vec<Vec<i64>>,
    /// Runs per prefix, aligned with `prefixes`.
    sorted_runs: Vec<Vec<(i64, i64)>>,
}

impl Columns {
    pub(crate) fn new(shape: &HyperEdgeShape) -> Self {
        let d = shape.dim();
        let mut map: HashMap<Vec<i64>, Vec<(i64, i64)>> = HashMap::new();
        // Offsets are sorted lexicographically, so within a prefix the last
        // coordinates arrive in increasing order.
        for o in shape.offsets() {
            let c = o.coords();
            let runs = map.entry(c[..d - 1].to_vec()).or_default();
            match runs.last_mut() {
                Some(last) if last.1 + 1 == c[d - 1] => last.1 = c[d - 1],
                _ => runs.push((c[d - 1], c[d - 1])),
            }
        }
        let mut prefixes: Vec<Vec<i64>> = map.keys().cloned().collect();
        prefixes.sort();
        let sorted_runs = prefixes.iter().map(|p| map[p].clone()).collect();
        Columns {
            map,
            prefixes,
            sorted_runs,
        }
    }
}

/// Calls `f(anchor_prefix, start, end)` for every maximal run of anchors
/// `prefix ++ [t]`, `start <= t <= end`, such that `anchor + S` meets `block`.
/// Runs arrive in lexicographic order.
pub(crate) fn for_each_anchor_run<F>(shape: &HyperEdgeShape, block: &Cuboid, mut f: F)
where
    F: FnMut(&[i64], i64, i64),
{
    let d = shape.dim();
    assert_eq!(block.dim(), d);
    let cols = Columns::new(shape);
    let (blo, bhi) = (block.lo(), block.hi());
    let (slo, shi) = (shape.bbox_lo(), shape.bbox_hi());
    let k = d - 1;

    let prefix_lo: Vec<i64> = (0..k).map(|i| blo[i] - shi[i]).collect();
    let prefix_hi: Vec<i64> = (0..k).map(|i| bhi[i] - slo[i]).collect();
    let block_prefix_volume: u128 = (0..k)
        .map(|i| (bhi[i] - blo[i] + 1) as u128)
        .product();
    let scan_block = block_prefix_volume < cols.prefixes.len() as u128;

    let mut prefix = prefix_lo.clone();
    let mut key = vec![0i64; k];
    let mut t = vec![0i64; k];
    let mut intervals: Vec<(i64, i64)> = Vec::new();
    loop {
        intervals.clear();
        let push_column = |runs: &Vec<(i64, i64)>, intervals: &mut Vec<(i64, i64)>| {
            for &(sa, sb) in runs {
                intervals.push((blo[k] - sb, bhi[k] - sa));
            }
        };
        if k == 1 {
            // Columns whose prefix lands in the block form a contiguous range.
            let first = cols.prefixes.partition_point(|q| q[0] + prefix[0] < blo[0]);
            let last = cols.prefixes.partition_point(|q| q[0] + prefix[0] <= bhi[0]);
            for runs in &cols.sorted_runs[first..last] {
                push_column(runs, &mut intervals);
            }
        } else if scan_block {
            t.copy_from_slice(&blo[..k]);
            loop {
                for i in 0..k {
                    key[i] = t[i] - prefix[i];
                }
                if let Some(runs) = cols.map.get(&key) {
                    push_column(runs, &mut intervals);
                }
                if !odometer(&mut t, &blo[..k], &bhi[..k]) {
                    break;
                }
            }
        } else {
            for q in &cols.prefixes {
                if (0..k).all(|i| {
                    let c = prefix[i] + q[i];
                    blo[i] <= c && c <= bhi[i]
                }) {
                    push_column(&cols.map[q], &mut intervals);
                }
            }
        }
        if !intervals.is_empty() {
            intervals.sort_unstable();
            let (mut cs, mut ce) = intervals[0];
            for &(s, e) in &intervals[1..] {
                if s <= ce + 1 {
                    ce = ce.max(e);
                } else {
                    f(&prefix, cs, ce);
                    cs = s;
                    ce = e;
                }
            }
            f(&prefix, cs, ce);
        }
        if !odometer(&mut prefix, &prefix_lo, &prefix_hi) {
            break;
        }
    }
}

/// Advances `x` lexicographically within `[lo, hi]`; false once exhausted.
pub(crate) fn odometer(x: &mut [i64], lo: &[i64], hi: &[i64]) -> bool {
    for i in (0..x.len()).rev() {
        if x[i] < hi[i] {
            x[i] += 1;
            return true;
        }
        x[i] = lo[i];
    }
    false
}
