//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hyperperc::clusters::ClusterLabeling;
use hyperperc::experiments::{
    bracket_uc, slab_experiment, square_loop_experiment, uniqueness_census, SweepPlan,
};
use hyperperc::lattice::{Cuboid, Vertex};
use hyperperc::measure::{annulus_decay, annulus_mass, canonicalize, AnnulusDecay, IntensityMeasure};
use hyperperc::partitions::{verify_lemma, Reading};
use hyperperc::report::{csv_string, write_jsonl};
use hyperperc::sampler::{draw_arrivals, enumerate_candidates, open_probability, BoundaryMode, Window};

/// A shape list with weights, a window `[lo, hi]` and the queried pairs.
type OracleCase = (Vec<(Vec<Vec<i64>>, f64)>, Vec<i64>, Vec<i64>, Vec<(Vec<i64>, Vec<i64>)>);

/// Tolerances.
const SIGMAS: f64 = 3.0;
const DRIFT_SIGMAS: f64 = 2.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn shape(points: &[&[i64]]) -> hyperperc::measure::HyperEdgeShape {
    canonicalize(points.iter().map(|p| Vertex::new(p.to_vec()).unwrap())).unwrap()
}

fn nn(dim: usize, weight: f64) -> IntensityMeasure {
    IntensityMeasure::nearest_neighbor(dim, weight).unwrap()
}

fn z(estimate: f64, p: f64, n: f64) -> f64 {
    let sd = (p * (1.0 - p) / n).sqrt();
    if sd == 0.0 {
        if estimate == p { 0.0 } else { f64::INFINITY }
    } else {
        (estimate - p) / sd
    }
}

// ---------------------------------------------------------------- 1

fn marginal_law() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x6d61_7267);
    let line = Window::from_cuboid(Cuboid::new(vec![0, 0], vec![1000, 0]).unwrap(), BoundaryMode::Contained);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for pair in 0..20 {
        let w = rng.random_range(0.05..5.0);
        let u = rng.random_range(0.02..0.98);
        let m = IntensityMeasure::new(2, vec![(shape(&[&[0, 0], &[1, 0]]), w)], vec![]).unwrap();
        let cand = Arc::new(enumerate_candidates(&m, &line).unwrap());
        assert_eq!(cand.len(), 1000);
        let mut open = 0usize;
        for r in 0..100u64 {
            open += draw_arrivals(cand.clone(), (pair << 32) | r).configuration_at(u).len();
        }
        let draws = 100.0 * cand.len() as f64;
        let zz = z(open as f64 / draws, open_probability(u, w), draws);
        worst = worst.max(zz.abs());
        if zz.abs() > SIGMAS {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures}/20 pairs outside 3σ over 1e5 draws each, max |z| = {worst:.2}"),
    )
}

// ---------------------------------------------------------------- 2

/// Independent enumeration of contained translates.
fn oracle_instances(shapes: &[(Vec<Vec<i64>>, f64)], lo: &[i64], hi: &[i64]) -> Vec<(Vec<Vec<i64>>, f64)> {
    let mut out = Vec::new();
    for (offsets, w) in shapes {
        for ax in lo[0]..=hi[0] {
            for ay in lo[1]..=hi[1] {
                let pts: Vec<Vec<i64>> = offsets.iter().map(|o| vec![o[0] + ax, o[1] + ay]).collect();
                if pts.iter().all(|p| (0..2).all(|i| lo[i] <= p[i] && p[i] <= hi[i])) {
                    out.push((pts, *w));
                }
            }
        }
    }
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Exact `P(x <-> y)` by summing over all open patterns.
fn exact_connection(
    instances: &[(Vec<Vec<i64>>, f64)],
    u: f64,
    pairs: &[(Vec<i64>, Vec<i64>)],
) -> Vec<f64> {
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    for (pts, _) in instances {
        for p in pts {
            let n = index.len();
            index.entry(p.clone()).or_insert(n);
        }
    }
    for (a, b) in pairs {
        for p in [a, b] {
            let n = index.len();
            index.entry(p.clone()).or_insert(n);
        }
    }
    let k = instances.len();
    let probs: Vec<f64> = instances.iter().map(|(_, w)| 1.0 - (1.0 - u).powf(*w)).collect();
    let mut result = vec![0.0; pairs.len()];
    for mask in 0u32..(1 << k) {
        let mut weight = 1.0;
        let mut parent: Vec<usize> = (0..index.len()).collect();
        for (i, (pts, _)) in instances.iter().enumerate() {
            if mask >> i & 1 == 1 {
                weight *= probs[i];
                let r0 = find(&mut parent, index[&pts[0]]);
                for p in &pts[1..] {
                    let r = find(&mut parent, index[p]);
                    parent[r] = r0;
                }
            } else {
                weight *= 1.0 - probs[i];
            }
        }
        for (j, (a, b)) in pairs.iter().enumerate() {
            if find(&mut parent, index[a]) == find(&mut parent, index[b]) {
                result[j] += weight;
            }
        }
    }
    result
}

fn exact_oracle() -> Outcome {
    const N: u64 = 100_000;
    let edge_x = vec![vec![0, 0], vec![1, 0]];
    let edge_y = vec![vec![0, 0], vec![0, 1]];
    let tromino = vec![vec![0, 0], vec![1, 0], vec![0, 1]];
    let cases: Vec<OracleCase> = vec![
        (
            vec![(edge_x.clone(), 1.0), (edge_y.clone(), 1.0)],
            vec![-1, -1],
            vec![1, 1],
            vec![
                (vec![-1, -1], vec![1, 1]),
                (vec![0, 0], vec![1, 0]),
                (vec![-1, 0], vec![1, 0]),
            ],
        ),
        (
            vec![(edge_x, 0.7), (edge_y, 0.7), (tromino, 0.4)],
            vec![0, 0],
            vec![1, 2],
            vec![
                (vec![0, 0], vec![1, 2]),
                (vec![0, 0], vec![1, 0]),
                (vec![1, 0], vec![0, 2]),
            ],
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut comparisons = 0;
    let mut failures = 0;
    let mut sizes = Vec::new();
    for (case, (shapes, lo, hi, pairs)) in cases.iter().enumerate() {
        let atoms = shapes
            .iter()
            .map(|(o, w)| {
                let pts: Vec<&[i64]> = o.iter().map(|p| p.as_slice()).collect();
                (shape(&pts), *w)
            })
            .collect();
        let m = IntensityMeasure::new(2, atoms, vec![]).unwrap();
        let window = Window::from_cuboid(Cuboid::new(lo.clone(), hi.clone()).unwrap(), BoundaryMode::Contained);
        let cand = Arc::new(enumerate_candidates(&m, &window).unwrap());
        let instances = oracle_instances(shapes, lo, hi);
        sizes.push(instances.len());
        if cand.len() != instances.len() || instances.len() > 12 {
            return outcome(false, format!("candidate count {} vs oracle {}", cand.len(), instances.len()));
        }
        let verts: Vec<(Vertex, Vertex)> = pairs
            .iter()
            .map(|(a, b)| (Vertex::new(a.clone()).unwrap(), Vertex::new(b.clone()).unwrap()))
            .collect();
        for u in [0.3, 0.7] {
            let exact = exact_connection(&instances, u, pairs);
            let mut hits = vec![0u64; pairs.len()];
            for r in 0..N {
                let c = draw_arrivals(cand.clone(), ((case as u64) << 40) | r).configuration_at(u);
                let labels = ClusterLabeling::build(&c);
                for (j, (a, b)) in verts.iter().enumerate() {
                    if labels.connected(a, b).unwrap() {
                        hits[j] += 1;
                    }
                }
            }
            for (j, &h) in hits.iter().enumerate() {
                let zz = z(h as f64 / N as f64, exact[j], N as f64);
                worst = worst.max(zz.abs());
                comparisons += 1;
                if zz.abs() > SIGMAS {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!(
            "windows with {sizes:?} instances, {failures}/{comparisons} connection probabilities outside 3σ, max |z| = {worst:.2}"
        ),
    )
}

// ---------------------------------------------------------------- 3

/// Bond percolation on `[-r, r]^2` with its own RNG and union-find;
/// returns the number of left-right crossings in `n` samples.
fn reference_bond_crossings(radius: i64, p: f64, n: u64, seed: u64) -> u64 {
    let side = (2 * radius + 1) as usize;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..n {
        let mut parent: Vec<usize> = (0..side * side).collect();
        for y in 0..side {
            for x in 0..side {
                let v = y * side + x;
                if x + 1 < side && rng.random::<f64>() < p {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, v + 1));
                    parent[a] = b;
                }
                if y + 1 < side && rng.random::<f64>() < p {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, v + side));
                    parent[a] = b;
                }
            }
        }
        let mut left = std::collections::HashSet::new();
        for y in 0..side {
            left.insert(find(&mut parent, y * side));
        }
        if (0..side).any(|y| left.contains(&find(&mut parent, y * side + side - 1))) {
            hits += 1;
        }
    }
    hits
}

struct BondRun {
    csv: Vec<String>,
}

fn bond_reduction(workers: usize) -> (Outcome, BondRun) {
    const N: u64 = 2000;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut csv = Vec::new();
    for (weight, target) in [(1.0, 0.5), (2.0, 1.0 - 0.5f64.sqrt())] {
        let m = nn(2, weight);
        let plan = SweepPlan::new(&m, vec![32, 64, 128], N, 2024)
            .with_bisect(0.0, 1.0, 0.02)
            .with_workers(workers);
        let b = match bracket_uc(&m, &plan) {
            Ok(b) => b,
            Err(e) => return (outcome(false, format!("bracket_uc failed: {e}")), BondRun { csv }),
        };
        csv.push(csv_string(&b.records));
        let width_ok = b.u_high - b.u_low <= 0.02;
        let contains = b.u_low <= target && target <= b.u_high;
        // Reference simulator at both bracket ends on the largest window.
        let mut agree = true;
        let mut zs = Vec::new();
        for rec in &b.records {
            let u = rec.u.unwrap();
            let k = reference_bond_crossings(64, open_probability(u, weight), N, u.to_bits());
            let f_ref = k as f64 / N as f64;
            let pooled = 0.5 * (f_ref + rec.estimate);
            let sd = (pooled * (1.0 - pooled) * 2.0 / N as f64).sqrt().max(1e-12);
            let zz = (rec.estimate - f_ref) / sd;
            zs.push(format!("{:.2}", zz));
            agree &= zz.abs() <= SIGMAS;
        }
        pass &= width_ok && contains && agree;
        lines.push(format!(
            "w={weight}: [{:.4}, {:.4}] ∋ {target:.4} {}, reference z at ends {}",
            b.u_low,
            b.u_high,
            if contains { "yes" } else { "no" },
            zs.join("/")
        ));
    }
    (outcome(pass, lines.join("; ")), BondRun { csv })
}

// ---------------------------------------------------------------- 4

fn monotone_coupling() -> Outcome {
    let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let cases = [
        (nn(2, 1.0), 24u64),
        (IntensityMeasure::square_loops(2, 3).unwrap(), 24),
        (IntensityMeasure::from_json(include_str!("../../../measures/plaquette_ring.json")).unwrap(), 8),
    ];
    let mut open_violations = 0;
    let mut partition_violations = 0;
    let mut samples = 0;
    for (i, (m, size)) in cases.iter().enumerate() {
        let b = hyperperc::lattice::BoxRegion::centered(m.dim(), size / 2).unwrap();
        let cand = Arc::new(enumerate_candidates(m, &Window::from_box(&b, BoundaryMode::Contained).unwrap()).unwrap());
        for r in 0..100u64 {
            samples += 1;
            let s = draw_arrivals(cand.clone(), ((i as u64) << 32) | r);
            let mut prev: Option<(Vec<u32>, Vec<u32>)> = None;
            for &u in &grid {
                let c = s.configuration_at(u);
                let open = c.open_positions().to_vec();
                let labels = ClusterLabeling::build(&c).canonical_labels();
                if let Some((po, pl)) = &prev {
                    if !po.iter().all(|p| open.binary_search(p).is_ok()) {
                        open_violations += 1;
                    }
                    // Refinement: each earlier label maps into a single later label.
                    let mut map: HashMap<u32, u32> = HashMap::new();
                    if pl.iter().zip(&labels).any(|(a, b)| *map.entry(*a).or_insert(*b) != *b) {
                        partition_violations += 1;
                    }
                }
                prev = Some((open, labels));
            }
        }
    }
    outcome(
        open_violations == 0 && partition_violations == 0,
        format!(
            "{samples} shared samples over 3 measures, u in 0.1..0.9: {open_violations} open-set and {partition_violations} partition violations"
        ),
    )
}

// ---------------------------------------------------------------- 5

fn square_loops() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut adjacency_failures = 0;
    let mut pairs = 0;
    for (k, u) in [0.25, 0.5].into_iter().enumerate() {
        let r = match square_loop_experiment(u, 6, 100_000, 77 + k as u64, 4, 0) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("experiment failed: {e}")),
        };
        for s in &r.scales {
            worst = worst.max(s.z_score.abs());
            if !s.within_3sigma {
                failures.push(format!("u={u} n={}", s.n));
            }
        }
        for a in &r.adjacency {
            adjacency_failures += a.failures;
            pairs += a.pairs;
        }
    }
    outcome(
        failures.is_empty() && adjacency_failures == 0 && pairs > 0,
        format!(
            "12 scale events, {} outside 3σ (max |z| = {worst:.2}); adjacency n<=4: {adjacency_failures} failures in {pairs} pairs",
            failures.len()
        ),
    )
}

// ---------------------------------------------------------------- 6

fn uniqueness() -> Outcome {
    let m = nn(2, 1.0);
    let plan = SweepPlan::new(&m, vec![64, 128, 256], 500, 606);
    let c = match uniqueness_census(&m, &plan, 0.6, 0.05) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("census failed: {e}")),
    };
    let f: Vec<(f64, f64)> = c
        .windows
        .iter()
        .map(|w| (w.fraction_one.estimate, w.fraction_one.std_error()))
        .collect();
    let last = f.last().unwrap().0;
    let monotone = f
        .windows(2)
        .all(|p| p[1].0 >= p[0].0 - DRIFT_SIGMAS * (p[0].1.powi(2) + p[1].1.powi(2)).sqrt());
    outcome(
        last >= 0.95 && monotone,
        format!(
            "fraction with one giant at 64/128/256: {}; nondecreasing within 2σ: {monotone}",
            f.iter().map(|x| format!("{:.3}", x.0)).collect::<Vec<_>>().join("/")
        ),
    )
}

// ---------------------------------------------------------------- 7

struct SlabRun {
    csv: String,
    jsonl: Vec<u8>,
}

fn slab(workers: usize) -> (Outcome, SlabRun) {
    let m = nn(3, 1.0);
    let plan = SweepPlan::new(&m, vec![32], 200, 707).with_workers(workers);
    let r = match slab_experiment(&m, &plan, 0.35, &[1, 2, 4, 8]) {
        Ok(r) => r,
        Err(e) => {
            return (
                outcome(false, format!("slab failed: {e}")),
                SlabRun { csv: String::new(), jsonl: Vec::new() },
            )
        }
    };
    let est = |l: u64| r.records.iter().find(|x| x.l == Some(l)).unwrap().clone();
    let (e1, e8) = (est(1), est(8));
    let gap = e8.estimate - e1.estimate;
    let separated = e1.hi < e8.lo;
    let mut jsonl = Vec::new();
    write_jsonl(&r.replicates, &mut jsonl).unwrap();
    (
        outcome(
            r.nesting_violations == 0 && gap >= 0.2 && separated,
            format!(
                "128x32xL, N=200: crossing at L=1,2,4,8 = {}; nesting violations {}; L=8 minus L=1 = {gap:.3}; intervals disjoint: {separated}",
                r.records.iter().map(|x| format!("{:.3}", x.estimate)).collect::<Vec<_>>().join("/"),
                r.nesting_violations
            ),
        ),
        SlabRun { csv: csv_string(&r.records), jsonl },
    )
}

// ---------------------------------------------------------------- 8

fn annulus() -> Outcome {
    let mut nn_ok = true;
    for d in [2, 3] {
        let m = nn(d, 1.0);
        for n in 2..=if d == 2 { 64 } else { 16 } {
            nn_ok &= annulus_mass(&m, n, 2 * n, None).unwrap() == 0.0;
        }
    }
    let loops = IntensityMeasure::square_loops(2, 16).unwrap();
    let masses: Vec<f64> = [4u64, 8, 16, 32]
        .iter()
        .map(|&n| annulus_mass(&loops, n, 2 * n, None).unwrap())
        .collect();
    let increasing = masses.windows(2).all(|w| w[0] < w[1]);
    let mut decay = Vec::new();
    for n in [4u64, 8, 16, 32] {
        decay.push(annulus_decay(&loops, n, 64 * n, None).unwrap());
    }
    let exceeds = decay.iter().all(|d| matches!(d, AnnulusDecay::ExceedsCap(_)));
    outcome(
        nn_ok && increasing && exceeds,
        format!(
            "nearest neighbour mass(n, 2n) = 0 for n>=2: {nn_ok}; loop masses at n=4,8,16,32: {}; decay beyond cap 64n: {exceeds}",
            masses.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(" < ")
        ),
    )
}

// ---------------------------------------------------------------- 9

fn lemma() -> Outcome {
    match verify_lemma(6, Reading::Inclusive) {
        Ok(r) => outcome(
            r.counterexamples() == 0 && r.sizes.len() == 4,
            format!(
                "largest compatible family for |Y|=3..6: {}; counterexamples {}",
                r.sizes.iter().map(|s| s.max_family.to_string()).collect::<Vec<_>>().join("/"),
                r.counterexamples()
            ),
        ),
        Err(e) => outcome(false, format!("failed: {e}")),
    }
}

// ----------------------------------------------------------------

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration, Duration)> = Vec::new();
    let mut record = |id, name, limit_s: u64, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        results.push((id, name, o, t.elapsed(), Duration::from_secs(limit_s)));
    };

    record(1, "marginal law", 10, &mut marginal_law);
    record(2, "exact enumeration oracle", 30, &mut exact_oracle);
    let mut bond_a = None;
    record(3, "bond percolation reduction", 600, &mut || {
        let (o, run) = bond_reduction(4);
        bond_a = Some(run);
        o
    });
    record(4, "monotone coupling", 600, &mut monotone_coupling);
    record(5, "square-loop counterexample", 120, &mut square_loops);
    record(6, "uniqueness proxy", 300, &mut uniqueness);
    let mut slab_a = None;
    record(7, "slab monotonicity", 600, &mut || {
        let (o, run) = slab(4);
        slab_a = Some(run);
        o
    });
    record(8, "annulus condition", 60, &mut annulus);
    record(9, "compatible-family bound", 120, &mut lemma);
    record(10, "determinism across worker counts", 1200, &mut || {
        let (_, bond_b) = bond_reduction(1);
        let (_, slab_b) = slab(1);
        let a = bond_a.as_ref().unwrap();
        let s = slab_a.as_ref().unwrap();
        let bond_same = a.csv == bond_b.csv && !a.csv.is_empty();
        let slab_same = s.csv == slab_b.csv && s.jsonl == slab_b.jsonl && !s.csv.is_empty();
        outcome(
            bond_same && slab_same,
            format!("workers 4 vs 1: bond CSV identical {bond_same}, slab CSV and JSONL identical {slab_same}"),
        )
    });

    let mut failed = 0;
    for (id, name, o, took, limit) in &results {
        let in_time = took <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {name}: {} ({}; {:.1} s, limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
