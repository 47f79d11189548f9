//! Open clusters of a window and the connectivity queries on them.

use crate::error::{Error, Result};
use crate::lattice::{Cuboid, Vertex};
use crate::measure::HyperEdgeInstance;
use crate::sampler::{CoupledSample, Configuration};

/// Disjoint sets over `0..n` with union by rank and path compression.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "union-find over more than 2^32 elements");
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Root lookup without compression.
    pub fn root(&self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        r
    }

    /// Merges the sets of `a` and `b`; returns the surviving root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (hi, lo) = match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Equal => {
                self.rank[ra] += 1;
                (ra, rb)
            }
        };
        self.parent[lo] = hi as u32;
        self.size[hi] += self.size[lo];
        hi
    }

    /// Size of the set containing `x`.
    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Bit `2i` marks the low face of axis `i`, bit `2i + 1` the high face.
pub(crate) fn face_mask(region: &Cuboid, idx: usize, coords: &mut [i64]) -> u64 {
    region.write_vertex_at(idx, coords);
    let mut mask = 0u64;
    for (i, &c) in coords.iter().enumerate() {
        if c == region.lo()[i] {
            mask |= 1 << (2 * i);
        }
        if c == region.hi()[i] {
            mask |= 1 << (2 * i + 1);
        }
    }
    mask
}

/// Per-cluster summary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterStats {
    pub root: usize,
    pub size: usize,
    pub bbox_lo: Vec<i64>,
    pub bbox_hi: Vec<i64>,
    pub faces: u64,
}

impl ClusterStats {
    pub fn touches_boundary(&self) -> bool {
        self.faces != 0
    }

    pub fn crosses(&self, axis: usize) -> bool {
        let both = 0b11u64 << (2 * axis);
        self.faces & both == both
    }
}

/// Finite-volume percolation indicators of one labeling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingReport {
    /// Per axis: some cluster touches both opposite faces.
    pub axis_crossing: Vec<bool>,
    /// The window center connects to the window boundary; `None` when the
    /// window has no center.
    pub origin_to_boundary: Option<bool>,
    pub largest_cluster: usize,
    /// Clusters touching the boundary with at least the requested size.
    pub boundary_clusters: usize,
}

/// Partition of the window vertices into open clusters.
#[derive(Clone, Debug)]
pub struct ClusterLabeling {
    region: Cuboid,
    center: Option<Vertex>,
    uf: UnionFind,
}

impl ClusterLabeling {
    /// Merges the in-window vertices of every open instance.
    pub fn build(c: &Configuration) -> Self {
        let w = c.window();
        let cand = c.candidates();
        let mut uf = UnionFind::new(w.volume());
        for &i in c.open_positions() {
            let mut first: Option<usize> = None;
            cand.for_each_vertex_index(i as usize, |v| match first {
                None => first = Some(v),
                Some(f) => {
                    uf.union(f, v);
                }
            });
        }
        ClusterLabeling {
            region: w.region().clone(),
            center: w.center().cloned(),
            uf,
        }
    }

    /// Labeling of `region` in which each listed vertex group is merged.
    pub fn from_vertex_sets<I, S>(region: Cuboid, center: Option<Vertex>, sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = Vertex>,
    {
        let mut uf = UnionFind::new(region.volume() as usize);
        for set in sets {
            let mut first: Option<usize> = None;
            for v in set {
                let idx = index(&region, &v)?;
                match first {
                    None => first = Some(idx),
                    Some(f) => {
                        uf.union(f, idx);
                    }
                }
            }
        }
        Ok(ClusterLabeling { region, center, uf })
    }

    pub fn region(&self) -> &Cuboid {
        &self.region
    }

    pub fn volume(&self) -> usize {
        self.uf.len()
    }

    /// Root index of the cluster of `x`.
    pub fn root_of(&self, x: &Vertex) -> Result<usize> {
        Ok(self.uf.root(index(&self.region, x)?))
    }

    pub fn cluster_size(&self, x: &Vertex) -> Result<usize> {
        let r = self.root_of(x)?;
        Ok(self.uf.size[r] as usize)
    }

    /// `x ↔ y`.
    pub fn connected(&self, x: &Vertex, y: &Vertex) -> Result<bool> {
        Ok(self.root_of(x)? == self.root_of(y)?)
    }

    /// `x ↔ h`: `x` is connected to some in-window vertex of `h`.
    pub fn connected_to_instance(&self, x: &Vertex, h: &HyperEdgeInstance) -> Result<bool> {
        let r = self.root_of(x)?;
        Ok(h.vertices()
            .iter()
            .filter_map(|v| self.region.index_of(v.coords()))
            .any(|i| self.uf.root(i) == r))
    }

    /// `P ↔ H` for vertex sets: some vertex of `p` shares a cluster with some vertex of `h`.
    pub fn set_connected(&self, p: &[Vertex], h: &[Vertex]) -> Result<bool> {
        let mut roots = std::collections::HashSet::new();
        for v in p {
            roots.insert(self.root_of(v)?);
        }
        for v in h {
            if roots.contains(&self.root_of(v)?) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Cluster index per vertex, renumbered by first occurrence in
    /// lexicographic order. Equal partitions give equal vectors.
    pub fn canonical_labels(&self) -> Vec<u32> {
        let n = self.volume();
        let mut map = vec![u32::MAX; n];
        let mut next = 0u32;
        (0..n)
            .map(|i| {
                let r = self.uf.root(i);
                if map[r] == u32::MAX {
                    map[r] = next;
                    next += 1;
                }
                map[r]
            })
            .collect()
    }

    /// Statistics of every cluster, ordered by root index.
    pub fn stats(&self) -> Vec<ClusterStats> {
        let d = self.region.dim();
        let n = self.volume();
        let mut slot = vec![u32::MAX; n];
        let mut out: Vec<ClusterStats> = Vec::new();
        let mut coords = vec![0i64; d];
        for i in 0..n {
            let r = self.uf.root(i);
            let faces = face_mask(&self.region, i, &mut coords);
            if slot[r] == u32::MAX {
                slot[r] = out.len() as u32;
                out.push(ClusterStats {
                    root: r,
                    size: 0,
                    bbox_lo: coords.clone(),
                    bbox_hi: coords.clone(),
                    faces: 0,
                });
            }
            let s = &mut out[slot[r] as usize];
            s.size += 1;
            s.faces |= faces;
            for k in 0..d {
                s.bbox_lo[k] = s.bbox_lo[k].min(coords[k]);
                s.bbox_hi[k] = s.bbox_hi[k].max(coords[k]);
            }
        }
        out.sort_by_key(|s| s.root);
        out
    }

    pub fn crossing_events(&self, size_threshold: usize) -> CrossingReport {
        let stats = self.stats();
        let d = self.region.dim();
        let axis_crossing = (0..d).map(|a| stats.iter().any(|s| s.crosses(a))).collect();
        let origin_to_boundary = self.center.as_ref().map(|c| {
            let r = self.uf.root(self.region.index_of(c.coords()).expect("center in window"));
            stats.iter().any(|s| s.root == r && s.touches_boundary())
        });
        CrossingReport {
            axis_crossing,
            origin_to_boundary,
            largest_cluster: stats.iter().map(|s| s.size).max().unwrap_or(0),
            boundary_clusters: stats
                .iter()
                .filter(|s| s.touches_boundary() && s.size >= size_threshold)
                .count(),
        }
    }

    /// Number of clusters touching the window boundary with at least
    /// `θ · |window|` vertices.
    pub fn giant_census(&self, theta: f64) -> Result<usize> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Precondition(format!(
                "size fraction must lie in (0, 1), got {theta}"
            )));
        }
        let threshold = (theta * self.volume() as f64).ceil() as usize;
        Ok(self.crossing_events(threshold.max(1)).boundary_clusters)
    }
}

fn index(region: &Cuboid, v: &Vertex) -> Result<usize> {
    region
        .index_of(v.coords())
        .ok_or_else(|| Error::OutsideWindow(format!("vertex {v} is outside the window")))
}

/// Levels at which percolation events first occur on a coupled sample.
/// An event holds at level `α` iff its recorded level is `<= α`; events
/// that never occur carry `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstPassage {
    pub axis_crossing: Vec<f64>,
    pub origin_to_boundary: Option<f64>,
}

/// Adds instances in order of arrival while tracking face contacts per
/// cluster, so that one pass yields the crossing level of every event.
pub fn first_passage(sample: &CoupledSample) -> FirstPassage {
    let cand = sample.candidates();
    let w = cand.window();
    let region = w.region();
    let d = region.dim();
    let n = w.volume();
    let mut order: Vec<u32> = (0..cand.len() as u32).collect();
    let t = sample.arrivals();
    order.sort_unstable_by(|&a, &b| t[a as usize].total_cmp(&t[b as usize]).then(a.cmp(&b)));

    let mut coords = vec![0i64; d];
    let mut faces: Vec<u64> = (0..n).map(|i| face_mask(region, i, &mut coords)).collect();
    let mut uf = UnionFind::new(n);
    let origin = w.center().and_then(|c| region.index_of(c.coords()));

    let mut axis = vec![f64::INFINITY; d];
    let mut pending = d;
    let mut origin_level = origin.map(|o| if faces[o] != 0 { 0.0 } else { f64::INFINITY });
    for a in 0..d {
        let both = 0b11u64 << (2 * a);
        if (0..n).any(|i| faces[i] & both == both) {
            axis[a] = 0.0;
            pending -= 1;
        }
    }
    let origin_done = |lvl: &Option<f64>| lvl.is_none_or(|l| l.is_finite());
    if pending == 0 && origin_done(&origin_level) {
        return FirstPassage {
            axis_crossing: axis,
            origin_to_boundary: origin_level,
        };
    }

    let mut verts: Vec<usize> = Vec::new();
    for &i in &order {
        verts.clear();
        cand.for_each_vertex_index(i as usize, |v| verts.push(v));
        let Some((&head, rest)) = verts.split_first() else {
            continue;
        };
        let mut root = uf.find(head);
        let mut merged = false;
        for &v in rest {
            let rv = uf.find(v);
            if rv != root {
                let m = faces[root] | faces[rv];
                root = uf.union(root, rv);
                faces[root] = m;
                merged = true;
            }
        }
        if !merged {
            continue;
        }
        let level = t[i as usize];
        let mask = faces[root];
        for (a, slot) in axis.iter_mut().enumerate() {
            let both = 0b11u64 << (2 * a);
            if slot.is_infinite() && mask & both == both {
                *slot = level;
                pending -= 1;
            }
        }
        if let (Some(o), Some(l)) = (origin, origin_level.as_mut()) {
            if l.is_infinite() && mask != 0 && uf.find(o) == root {
                *l = level;
            }
        }
        if pending == 0 && origin_done(&origin_level) {
            break;
        }
    }
    FirstPassage {
        axis_crossing: axis,
        origin_to_boundary: origin_level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxRegion;
    use crate::measure::{canonicalize, IntensityMeasure};
    use crate::sampler::{draw_arrivals, enumerate_candidates, BoundaryMode, Provenance, Window};
    use proptest::prelude::*;
    use std::collections::VecDeque;
    use std::sync::Arc;

    fn v(c: &[i64]) -> Vertex {
        Vertex::new(c.to_vec()).unwrap()
    }

    fn window(d: usize, r: u64) -> Window {
        Window::from_box(&BoxRegion::centered(d, r).unwrap(), BoundaryMode::Contained).unwrap()
    }

    fn nn_sample(d: usize, r: u64, seed: u64) -> CoupledSample {
        let m = IntensityMeasure::nearest_neighbor(d, 1.0).unwrap();
        draw_arrivals(Arc::new(enumerate_candidates(&m, &window(d, r)).unwrap()), seed)
    }

    /// Breadth-first search over open instances; returns canonical labels.
    fn bfs_labels(c: &Configuration) -> Vec<u32> {
        let cand = c.candidates();
        let n = c.window().volume();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &i in c.open_positions() {
            let mut vs = Vec::new();
            cand.for_each_vertex_index(i as usize, |x| vs.push(x));
            for &a in &vs {
                for &b in &vs {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        let mut label = vec![u32::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = next;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if label[y] == u32::MAX {
                        label[y] = next;
                        q.push_back(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 1);
        uf.union(2, 3);
        uf.union(1, 3);
        assert_eq!(uf.find(0), uf.find(2));
        assert_ne!(uf.find(0), uf.find(4));
        assert_eq!(uf.set_size(3), 4);
        assert_eq!(uf.set_size(5), 1);
    }

    #[test]
    fn single_instance_forms_one_cluster() {
        let region = BoxRegion::centered(2, 2).unwrap().cuboid().unwrap();
        let l = ClusterLabeling::from_vertex_sets(
            region.clone(),
            None,
            [vec![v(&[0, 0]), v(&[1, 1]), v(&[-1, 2])]],
        )
        .unwrap();
        assert!(l.connected(&v(&[0, 0]), &v(&[-1, 2])).unwrap());
        assert_eq!(l.cluster_size(&v(&[1, 1])).unwrap(), 3);
        assert_eq!(l.cluster_size(&v(&[2, 2])).unwrap(), 1);
        assert_eq!(l.stats().iter().map(|s| s.size).sum::<usize>(), 25);
        assert!(l.connected(&v(&[2, 2]), &v(&[2, 2])).unwrap());
        assert!(matches!(
            l.connected(&v(&[0, 0]), &v(&[3, 0])),
            Err(Error::OutsideWindow(_))
        ));
    }

    #[test]
    fn instances_sharing_a_vertex_merge() {
        let region = BoxRegion::centered(2, 3).unwrap().cuboid().unwrap();
        let l = ClusterLabeling::from_vertex_sets(
            region,
            None,
            [
                vec![v(&[0, 0]), v(&[1, 0])],
                vec![v(&[1, 0]), v(&[2, 2])],
                vec![v(&[-3, -3]), v(&[-2, -3])],
            ],
        )
        .unwrap();
        assert!(l.connected(&v(&[0, 0]), &v(&[2, 2])).unwrap());
        assert!(!l.connected(&v(&[0, 0]), &v(&[-3, -3])).unwrap());
        let h = HyperEdgeInstance {
            shape: Arc::new(canonicalize([v(&[0, 0]), v(&[0, 1])]).unwrap()),
            anchor: v(&[2, 1]),
        };
        assert!(l.connected_to_instance(&v(&[0, 0]), &h).unwrap());
        assert!(l.set_connected(&[v(&[3, 3]), v(&[1, 0])], &[v(&[2, 2])]).unwrap());
        assert!(!l.set_connected(&[v(&[3, 3])], &[v(&[2, 2])]).unwrap());
    }

    #[test]
    fn empty_and_full_configurations() {
        let s = nn_sample(2, 3, 1);
        let empty = ClusterLabeling::build(&s.configuration_at(0.0));
        assert_eq!(empty.stats().len(), 49);
        let rep = empty.crossing_events(1);
        assert_eq!(rep.axis_crossing, vec![false, false]);
        assert_eq!(rep.origin_to_boundary, Some(false));
        assert_eq!(empty.giant_census(0.5).unwrap(), 0);

        let full = ClusterLabeling::build(&s.configuration_at(1.0));
        let rep = full.crossing_events(1);
        assert_eq!(rep.axis_crossing, vec![true, true]);
        assert_eq!(rep.origin_to_boundary, Some(true));
        assert_eq!(rep.largest_cluster, 49);
        assert_eq!(full.giant_census(0.01).unwrap(), 1);
        assert!(full.giant_census(1.0).is_err());
    }

    #[test]
    fn one_wide_instance_crosses_its_axis() {
        let shape = canonicalize((-3..=3).map(|x| v(&[x, 0]))).unwrap();
        let m = IntensityMeasure::new(2, vec![(shape.clone(), 1.0)], vec![]).unwrap();
        let cand = Arc::new(enumerate_candidates(&m, &window(2, 3)).unwrap());
        let pos = cand.position(0, &[-3, 1]).unwrap();
        let c = Configuration::from_positions(
            cand,
            vec![pos as u32],
            Provenance { seed: 0, u: 0.0, level: 0.0, slab: None },
        );
        let rep = ClusterLabeling::build(&c).crossing_events(1);
        assert_eq!(rep.axis_crossing, vec![true, false]);
        assert_eq!(rep.origin_to_boundary, Some(false));
    }

    #[test]
    fn matches_bfs_oracle_on_small_windows() {
        let shape = canonicalize([v(&[0, 0]), v(&[2, 1]), v(&[1, -1])]).unwrap();
        let mixed = IntensityMeasure::new(
            2,
            vec![(shape, 0.3)],
            vec![],
        )
        .unwrap();
        let nn = IntensityMeasure::nearest_neighbor(2, 1.0).unwrap();
        let mut checked = 0;
        for (mi, m) in [nn, mixed].iter().enumerate() {
            for mode in [BoundaryMode::Contained, BoundaryMode::Clipped] {
                let w = Window::from_cuboid(
                    Cuboid::new(vec![0, 0], vec![7, 7]).unwrap(),
                    mode,
                );
                let cand = Arc::new(enumerate_candidates(m, &w).unwrap());
                for seed in 0..50u64 {
                    let s = draw_arrivals(cand.clone(), seed * 7 + mi as u64);
                    let c = s.configuration_at(0.2 + 0.6 * (seed as f64 / 50.0));
                    assert_eq!(ClusterLabeling::build(&c).canonical_labels(), bfs_labels(&c));
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 200);
    }

    #[test]
    fn reversed_processing_gives_same_partition() {
        let s = nn_sample(2, 5, 3);
        let c = s.configuration_at(0.5);
        let fwd = ClusterLabeling::build(&c);
        let sets: Vec<Vec<Vertex>> = c.instances().iter().rev().map(|h| h.vertices()).collect();
        let rev =
            ClusterLabeling::from_vertex_sets(c.window().region().clone(), None, sets).unwrap();
        assert_eq!(fwd.canonical_labels(), rev.canonical_labels());
    }

    #[test]
    fn symmetry_permutes_cluster_sizes() {
        let s = nn_sample(2, 6, 8);
        let c = s.configuration_at(0.45);
        let base = ClusterLabeling::build(&c);
        let mut sizes: Vec<usize> = base.stats().iter().map(|s| s.size).collect();
        sizes.sort();
        for g in crate::lattice::LatticeSymmetry::group(2) {
            let sets: Vec<Vec<Vertex>> = c
                .instances()
                .iter()
                .map(|h| h.vertices().iter().map(|x| g.apply(x)).collect())
                .collect();
            let l = ClusterLabeling::from_vertex_sets(c.window().region().clone(), None, sets)
                .unwrap();
            let mut img: Vec<usize> = l.stats().iter().map(|s| s.size).collect();
            img.sort();
            assert_eq!(img, sizes);
        }
    }

    #[test]
    fn first_passage_agrees_with_direct_labeling() {
        for seed in 0..20u64 {
            let s = nn_sample(2, 6, seed);
            let fp = first_passage(&s);
            for k in 1..20 {
                let u = k as f64 / 20.0;
                let alpha = crate::sampler::level_for(u);
                let rep = ClusterLabeling::build(&s.configuration_at(u)).crossing_events(1);
                for a in 0..2 {
                    assert_eq!(rep.axis_crossing[a], fp.axis_crossing[a] <= alpha);
                }
                assert_eq!(
                    rep.origin_to_boundary.unwrap(),
                    fp.origin_to_boundary.unwrap() <= alpha
                );
            }
        }
    }

    proptest! {
        #[test]
        fn clusters_nest_in_u(seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (u1, u2) = if a <= b { (a, b) } else { (b, a) };
            let s = nn_sample(2, 4, seed);
            let l1 = ClusterLabeling::build(&s.configuration_at(u1)).canonical_labels();
            let l2 = ClusterLabeling::build(&s.configuration_at(u2)).canonical_labels();
            // Same label at u1 implies same label at u2.
            let mut rep = std::collections::HashMap::new();
            for (i, &l) in l1.iter().enumerate() {
                let r = *rep.entry(l).or_insert(l2[i]);
                prop_assert_eq!(r, l2[i]);
            }
        }
    }
}
