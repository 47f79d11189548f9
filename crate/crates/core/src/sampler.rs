//! Finite-window sampling through the Poisson first-arrival coupling.
//!
//! Every candidate instance `h` receives an arrival time
//! `t = -ln(1 - U) / μ({h})`. The configuration at level `α` keeps the
//! instances with `t <= α`; at parameter `u` the level is `α = -ln(1 - u)`,
//! so `P[h open] = 1 - (1 - u)^{μ({h})}` and all parameters share one sample.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{BoxRegion, Cuboid, SlabRegion, Vertex};
use crate::measure::{HyperEdgeInstance, IntensityMeasure, Member};
use crate::rng::CounterStream;

/// Default cap on the number of candidate instances in one window.
pub const DEFAULT_CANDIDATE_BUDGET: u128 = 50_000_000;

/// Stream id used for arrival times.
const ARRIVAL_STREAM: u64 = 0;

/// How instances near the window boundary are treated. Both modes are
/// finite-volume conventions of this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Only instances with every vertex inside the window.
    #[default]
    Contained,
    /// Every instance meeting the window; vertices outside are ignored.
    Clipped,
}

impl BoundaryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryMode::Contained => "contained",
            BoundaryMode::Clipped => "clipped",
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contained" => Ok(BoundaryMode::Contained),
            "clipped" => Ok(BoundaryMode::Clipped),
            other => Err(Error::Precondition(format!("unknown boundary mode {other:?}"))),
        }
    }
}

/// A finite block of Z^d with a boundary mode. Box windows remember their
/// center for origin-to-boundary queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    region: Cuboid,
    mode: BoundaryMode,
    center: Option<Vertex>,
}

impl Window {
    pub fn from_box(b: &BoxRegion, mode: BoundaryMode) -> Result<Self> {
        Ok(Window {
            region: b.cuboid()?,
            mode,
            center: Some(b.center.clone()),
        })
    }

    pub fn from_cuboid(region: Cuboid, mode: BoundaryMode) -> Self {
        Window {
            region,
            mode,
            center: None,
        }
    }

    /// `[0, long-1] x [0, wide-1] x [1, L]^{d-2}`.
    pub fn slab(slab: &SlabRegion, long: u64, wide: u64, mode: BoundaryMode) -> Result<Self> {
        Ok(Self::from_cuboid(slab.window(long, wide)?, mode))
    }

    pub fn region(&self) -> &Cuboid {
        &self.region
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn center(&self) -> Option<&Vertex> {
        self.center.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn volume(&self) -> usize {
        self.region.volume() as usize
    }

    pub fn describe(&self) -> String {
        format!(
            "lo={} hi={} mode={} (finite-volume convention)",
            join(self.region.lo()),
            join(self.region.hi()),
            self.mode
        )
    }
}

pub(crate) fn join(xs: &[i64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// All instances admitted by a window, in canonical order: by shape class
/// (the measure's member order), then by anchor lexicographically.
#[derive(Debug)]
pub struct CandidateSet {
    window: Window,
    digest: String,
    members: Vec<Member>,
    shape_of: Vec<u32>,
    anchors: Vec<i64>,
    /// Per member: vertex offsets as linear window indices.
    linear_offsets: Vec<Vec<isize>>,
    /// Per instance, contained mode only: linear index of the anchor.
    anchor_index: Vec<isize>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.shape_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape_of.is_empty()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn measure_digest(&self) -> &str {
        &self.digest
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Index of the instance's shape in [`CandidateSet::members`].
    pub fn shape_id(&self, i: usize) -> usize {
        self.shape_of[i] as usize
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.members[self.shape_of[i] as usize].weight
    }

    pub fn anchor(&self, i: usize) -> &[i64] {
        let d = self.dim();
        &self.anchors[i * d..(i + 1) * d]
    }

    pub fn instance(&self, i: usize) -> HyperEdgeInstance {
        HyperEdgeInstance {
            shape: self.members[self.shape_id(i)].shape.clone(),
            anchor: Vertex::from_raw(self.anchor(i).to_vec()),
        }
    }

    /// Calls `f` with the window index of every in-window vertex of instance `i`.
    pub fn for_each_vertex_index<F: FnMut(usize)>(&self, i: usize, mut f: F) {
        let sid = self.shape_id(i);
        match self.window.mode {
            BoundaryMode::Contained => {
                let base = self.anchor_index[i];
                for &o in &self.linear_offsets[sid] {
                    f((base + o) as usize);
                }
            }
            BoundaryMode::Clipped => {
                let a = self.anchor(i);
                let mut p = vec![0i64; a.len()];
                for o in self.members[sid].shape.offsets() {
                    for (k, c) in o.coords().iter().enumerate() {
                        p[k] = a[k] + c;
                    }
                    if let Some(idx) = self.window.region.index_of(&p) {
                        f(idx);
                    }
                }
            }
        }
    }

    /// Whether every vertex of instance `i` lies in `[lo, hi]`.
    pub fn instance_within(&self, i: usize, lo: &[i64], hi: &[i64]) -> bool {
        let s = &self.members[self.shape_id(i)].shape;
        let a = self.anchor(i);
        (0..a.len()).all(|k| a[k] + s.bbox_lo()[k] >= lo[k] && a[k] + s.bbox_hi()[k] <= hi[k])
    }

    /// Canonical position of the instance `(shape_id, anchor)`, if admitted.
    pub fn position(&self, shape_id: usize, anchor: &[i64]) -> Option<usize> {
        let d = self.dim();
        let key = (shape_id as u32, anchor);
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            let probe = (self.shape_of[mid], &self.anchors[mid * d..(mid + 1) * d]);
            match probe.cmp(&key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

/// Enumerates the window's candidate instances with the default budget.
pub fn enumerate_candidates(m: &IntensityMeasure, w: &Window) -> Result<CandidateSet> {
    enumerate_candidates_with_budget(m, w, DEFAULT_CANDIDATE_BUDGET)
}

pub fn enumerate_candidates_with_budget(
    m: &IntensityMeasure,
    w: &Window,
    budget: u128,
) -> Result<CandidateSet> {
    if m.dim() != w.dim() {
        return Err(Error::Precondition(format!(
            "measure has dimension {}, window has {}",
            m.dim(),
            w.dim()
        )));
    }
    let region = w.region();
    let d = region.dim();
    let members = match w.mode() {
        BoundaryMode::Contained => {
            let widest = (0..d).map(|i| region.side(i) - 1).max().unwrap_or(0);
            m.members_within(widest).0
        }
        BoundaryMode::Clipped => {
            // Family members are bounded by their extents before any is built.
            let mut estimate: u128 = 0;
            for f in m.families() {
                for k in 1..=f.max_scale() {
                    let ext = f.extent(k);
                    let count = (0..d).fold(1u128, |acc, i| {
                        acc.saturating_mul(region.side(i) as u128 + ext[i] as u128)
                    });
                    estimate = estimate.saturating_add(count);
                }
            }
            if estimate > budget {
                return Err(Error::TooLarge {
                    what: "candidate instances",
                    estimate,
                    budget,
                });
            }
            m.members(None)
        }
    };
    candidates_from_members(members, m.digest(), w, budget)
}

pub(crate) fn candidates_from_members(
    members: Vec<Member>,
    digest: String,
    w: &Window,
    budget: u128,
) -> Result<CandidateSet> {
    let region = w.region();
    let d = region.dim();
    let volume = region.volume();
    if volume > budget || volume > u32::MAX as u128 {
        return Err(Error::TooLarge {
            what: "window vertices",
            estimate: volume,
            budget: budget.min(u32::MAX as u128),
        });
    }

    let mut estimate: u128 = 0;
    for mem in &members {
        let s = &mem.shape;
        let mut count: u128 = 1;
        for i in 0..d {
            let ext = (s.bbox_hi()[i] - s.bbox_lo()[i]) as i128;
            let side = region.side(i) as i128;
            let n = match w.mode() {
                BoundaryMode::Contained => (side - ext).max(0),
                BoundaryMode::Clipped => side + ext,
            };
            count = count.saturating_mul(n as u128);
        }
        estimate = estimate.saturating_add(count);
    }
    if estimate > budget {
        return Err(Error::TooLarge {
            what: "candidate instances",
            estimate,
            budget,
        });
    }

    let strides = region.strides();
    let linear_offsets: Vec<Vec<isize>> = members
        .iter()
        .map(|mem| {
            mem.shape
                .offsets()
                .iter()
                .map(|o| {
                    o.coords()
                        .iter()
                        .zip(&strides)
                        .map(|(c, s)| *c as isize * *s as isize)
                        .sum()
                })
                .collect()
        })
        .collect();

    let mut shape_of = Vec::new();
    let mut anchors = Vec::new();
    let mut anchor_index = Vec::new();
    for (sid, mem) in members.iter().enumerate() {
        let s = &mem.shape;
        match w.mode() {
            BoundaryMode::Contained => {
                let lo: Vec<i64> = (0..d).map(|i| region.lo()[i] - s.bbox_lo()[i]).collect();
                let hi: Vec<i64> = (0..d).map(|i| region.hi()[i] - s.bbox_hi()[i]).collect();
                if lo.iter().zip(&hi).any(|(a, b)| a > b) {
                    continue;
                }
                let mut a = lo.clone();
                loop {
                    shape_of.push(sid as u32);
                    anchors.extend_from_slice(&a);
                    let mut idx = 0isize;
                    for i in 0..d {
                        idx += (a[i] - region.lo()[i]) as isize * strides[i] as isize;
                    }
                    anchor_index.push(idx);
                    if !crate::anchors::odometer(&mut a, &lo, &hi) {
                        break;
                    }
                }
            }
            BoundaryMode::Clipped => {
                crate::anchors::for_each_anchor_run(s, region, |prefix, start, end| {
                    for t in start..=end {
                        shape_of.push(sid as u32);
                        anchors.extend_from_slice(prefix);
                        anchors.push(t);
                    }
                });
            }
        }
    }
    Ok(CandidateSet {
        window: w.clone(),
        digest,
        members,
        shape_of,
        anchors,
        linear_offsets,
        anchor_index,
    })
}

/// Arrival time of an instance of weight `weight` given a uniform draw.
pub fn arrival_time(uniform: f64, weight: f64) -> f64 {
    -(-uniform).ln_1p() / weight
}

/// The level `α = -ln(1 - u)`; `u` is clamped to `[0, 1 - 2^-52]` except that
/// `u >= 1` maps to `+∞`.
pub fn level_for(u: f64) -> f64 {
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let u = u.clamp(0.0, 1.0 - f64::EPSILON);
    -(-u).ln_1p()
}

/// `1 - (1 - u)^w`.
pub fn open_probability(u: f64, weight: f64) -> f64 {
    if u >= 1.0 {
        return 1.0;
    }
    -((1.0 - u).ln() * weight).exp_m1()
}

/// Arrival times for every candidate of a window under one seed.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    candidates: Arc<CandidateSet>,
    arrivals: Vec<f64>,
    seed: u64,
}

/// Draws one arrival per candidate from the counter stream keyed by `seed`;
/// candidate `i` always reads position `i`.
pub fn draw_arrivals(candidates: Arc<CandidateSet>, seed: u64) -> CoupledSample {
    let mut stream = CounterStream::new(seed, ARRIVAL_STREAM);
    let arrivals = (0..candidates.len())
        .map(|i| arrival_time(stream.next_open01(), candidates.weight(i)))
        .collect();
    CoupledSample {
        candidates,
        arrivals,
        seed,
    }
}

impl CoupledSample {
    pub fn candidates(&self) -> &Arc<CandidateSet> {
        &self.candidates
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn open_at_level(&self, alpha: f64) -> Configuration {
        let open: Vec<u32> = self
            .arrivals
            .iter()
            .enumerate()
            .filter(|(_, &t)| t <= alpha)
            .map(|(i, _)| i as u32)
            .collect();
        Configuration {
            arrivals: open.iter().map(|&i| self.arrivals[i as usize]).collect(),
            open,
            candidates: self.candidates.clone(),
            provenance: Provenance {
                seed: self.seed,
                level: alpha,
                u: 1.0 - (-alpha).exp(),
                slab: None,
            },
        }
    }

    /// Instances open at parameter `u`.
    pub fn configuration_at(&self, u: f64) -> Configuration {
        let mut c = self.open_at_level(level_for(u));
        c.provenance.u = u.clamp(0.0, 1.0);
        c
    }
}

/// Where a configuration came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub u: f64,
    pub level: f64,
    pub slab: Option<u64>,
}

/// The open instances of a window, in canonical order.
#[derive(Clone, Debug)]
pub struct Configuration {
    candidates: Arc<CandidateSet>,
    open: Vec<u32>,
    arrivals: Vec<f64>,
    provenance: Provenance,
}

impl Configuration {
    /// Builds a configuration from explicit candidate positions (sorted and deduplicated).
    pub fn from_positions(candidates: Arc<CandidateSet>, mut open: Vec<u32>, provenance: Provenance) -> Self {
        open.sort_unstable();
        open.dedup();
        let arrivals = vec![0.0; open.len()];
        Configuration {
            candidates,
            open,
            arrivals,
            provenance,
        }
    }

    pub fn candidates(&self) -> &Arc<CandidateSet> {
        &self.candidates
    }

    pub fn window(&self) -> &Window {
        self.candidates.window()
    }

    /// Candidate positions of the open instances, ascending.
    pub fn open_positions(&self) -> &[u32] {
        &self.open
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn instances(&self) -> Vec<HyperEdgeInstance> {
        self.open
            .iter()
            .map(|&i| self.candidates.instance(i as usize))
            .collect()
    }

    /// Writes the line format: a `#` provenance header, then one
    /// `shape-id anchor arrival-time` line per open instance.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        let p = &self.provenance;
        writeln!(out, "# hyperperc configuration v1")?;
        writeln!(out, "# seed {}", p.seed)?;
        writeln!(out, "# u {}", p.u)?;
        writeln!(out, "# measure {}", self.candidates.measure_digest())?;
        writeln!(out, "# window {}", self.window().describe())?;
        if let Some(l) = p.slab {
            writeln!(out, "# slab {l}")?;
        }
        writeln!(out, "# open {}", self.open.len())?;
        for (k, &i) in self.open.iter().enumerate() {
            let i = i as usize;
            writeln!(
                out,
                "{} {} {}",
                self.candidates.shape_id(i),
                join(self.candidates.anchor(i)),
                self.arrivals[k]
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// One line of the configuration format.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRecord {
    pub shape_id: usize,
    pub anchor: Vec<i64>,
    pub arrival: f64,
}

/// Parsed configuration file: header key/value pairs and instance lines.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigurationFile {
    pub header: BTreeMap<String, String>,
    pub records: Vec<InstanceRecord>,
}

pub fn parse_configuration(text: &str) -> Result<ConfigurationFile> {
    let mut header = BTreeMap::new();
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let bad = |what: &str| Error::Spec(format!("line {}: {what}", lineno + 1));
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once(' ') {
                header.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let shape_id = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad shape id"))?;
        let anchor = parts
            .next()
            .ok_or_else(|| bad("missing anchor"))?
            .split(',')
            .map(|c| c.parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad anchor"))?;
        let arrival = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad arrival time"))?;
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        records.push(InstanceRecord {
            shape_id,
            anchor,
            arrival,
        });
    }
    Ok(ConfigurationFile { header, records })
}

/// Keeps exactly the open instances lying inside `Z_{>=0}^2 x {1..L}^{d-2}`.
pub fn apply_slab(c: &Configuration, thickness: u64) -> Result<Configuration> {
    let slab = SlabRegion::new(thickness, c.window().dim())?;
    let cand = &c.candidates;
    let mut open = Vec::new();
    let mut arrivals = Vec::new();
    for (k, &i) in c.open.iter().enumerate() {
        let i = i as usize;
        let s = &cand.members()[cand.shape_id(i)].shape;
        let a = cand.anchor(i);
        let lo: Vec<i64> = a.iter().zip(s.bbox_lo()).map(|(x, y)| x + y).collect();
        let hi: Vec<i64> = a.iter().zip(s.bbox_hi()).map(|(x, y)| x + y).collect();
        if slab.contains_block(&lo, &hi) {
            open.push(i as u32);
            arrivals.push(c.arrivals[k]);
        }
    }
    let mut provenance = c.provenance.clone();
    provenance.slab = Some(thickness);
    Ok(Configuration {
        candidates: cand.clone(),
        open,
        arrivals,
        provenance,
    })
}
