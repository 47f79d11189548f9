//! Command-line driver for the `hyperperc` experiments.
//!
//! Exit codes: 0 success, 2 malformed measure specification, 3 refused
//! precondition, 1 anything else. Errors are printed to stderr as one JSON
//! object.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hyperperc::experiments::{
    bracket_uc_unchecked, crossing_curve, seed_density, seed_union, slab_experiment,
    square_loop_experiment, uniqueness_census, EstimateRecord, SweepPlan, DEFAULT_THETA,
};
use hyperperc::lattice::SlabRegion;
use hyperperc::measure::{annulus_decay, annulus_profile, validate, AnnulusDecay, IntensityMeasure};
use hyperperc::partitions::{verify_lemma, Reading};
use hyperperc::report::{emit_jsonl, emit_plot_data, git_blob_hash, RunManifest};
use hyperperc::rng::derive_seed;
use hyperperc::sampler::{apply_slab, draw_arrivals, enumerate_candidates, BoundaryMode, Window};
use hyperperc::{Error, Result};

/// Radius of the structural checks run before an experiment.
const GATE_RADIUS: u64 = 4;

#[derive(Parser)]
#[command(name = "hyperperc", version, about = "Poisson hyper-edge percolation on Z^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = "HYPERPERC_OUT", default_value = "hyperperc-out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Outputs do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Measure specification (JSON).
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    replicates: u64,
    /// Window sizes, comma separated and increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    window: Vec<u64>,
    /// Boundary convention for instances leaving the window.
    #[arg(long, default_value = "contained")]
    mode: BoundaryMode,
    /// Run even if the measure fails the structural checks.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Finite structural checks of a measure.
    Validate {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 3)]
        radius: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Draw one configuration and write it as text.
    Sample {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        window: u64,
        #[arg(long)]
        u: f64,
        /// Slab thickness; samples the slab window instead of a box.
        #[arg(long = "L")]
        thickness: Option<u64>,
        #[arg(long, default_value = "contained")]
        mode: BoundaryMode,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Crossing probabilities on a grid of u.
    Crossing {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
    },
    /// Bracket the crossing threshold by bisection.
    Uc {
        #[command(flatten)]
        sweep: SweepArgs,
        /// LO:HI:WIDTH
        #[arg(long, value_parser = parse_bisect)]
        bisect: Option<(f64, f64, f64)>,
    },
    /// Census of boundary-touching giant clusters.
    Uniqueness {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
    },
    /// Long-axis crossing of truncated slabs.
    Slab {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        u: f64,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        thickness: Vec<u64>,
    },
    /// Scale events of the square-loop family against the closed form.
    SquareLoop {
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        n_max: u32,
        #[arg(long, default_value_t = 10_000)]
        replicates: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Check adjacency of consecutive scales up to this scale.
        #[arg(long, default_value_t = 4)]
        adjacency_max: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact annulus-crossing masses and their decay.
    Annulus {
        #[arg(long)]
        measure: PathBuf,
        /// Inner radii.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Fixed outer radius.
        #[arg(long, conflicts_with = "lambda")]
        outer: Option<u64>,
        /// Outer radius floor(lambda * n), as a decimal or a fraction p/q.
        #[arg(long, value_parser = parse_ratio)]
        lambda: Option<(u64, u64)>,
        /// Largest outer radius searched for the decay radius.
        #[arg(long, default_value_t = 4096)]
        cap: u64,
        /// Largest family scale included.
        #[arg(long)]
        cutoff: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seed-box density and the union over an octant face.
    Seeds {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        u: f64,
        /// Seed box radius m.
        #[arg(long)]
        radius: u64,
        /// Corner cut c of the modified box.
        #[arg(long, default_value_t = 1)]
        corner: u64,
        /// Also report the seed union over T(m, n) in the first replicate.
        #[arg(long)]
        union_n: Option<u64>,
    },
    /// Exhaustive check of the compatible-family bound on small ground sets.
    VerifyLemma {
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        #[arg(long, default_value = "inclusive")]
        reading: Reading,
    },
}

fn parse_bisect(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected LO:HI:WIDTH, got {s:?}"));
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    Ok((v[0], v[1], v[2]))
}

/// Parses `p/q`, an integer or a decimal into an exact ratio.
fn parse_ratio(s: &str) -> std::result::Result<(u64, u64), String> {
    let bad = || format!("expected a positive ratio such as 2, 1.5 or 3/2, got {s:?}");
    let (p, q) = if let Some((p, q)) = s.split_once('/') {
        (p.trim().parse::<u64>().map_err(|_| bad())?, q.trim().parse::<u64>().map_err(|_| bad())?)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let q = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        (int.checked_mul(q).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?, q)
    } else {
        (s.trim().parse::<u64>().map_err(|_| bad())?, 1)
    };
    if p == 0 || q == 0 {
        return Err(bad());
    }
    Ok((p, q))
}

struct LoadedMeasure {
    path: PathBuf,
    measure: IntensityMeasure,
    file_hash: String,
}

fn load_measure(path: &Path) -> Result<LoadedMeasure> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::Spec(format!("{} is not UTF-8", path.display())))?;
    Ok(LoadedMeasure {
        path: path.to_path_buf(),
        measure: IntensityMeasure::from_json(text)?,
        file_hash: git_blob_hash(&bytes),
    })
}

/// Structural requirements an experiment places on the measure.
#[derive(Clone, Copy)]
struct Gates {
    multi_dimensional: bool,
    irreducible: bool,
    symmetric: bool,
}

const NO_GATES: Gates = Gates {
    multi_dimensional: false,
    irreducible: false,
    symmetric: false,
};

fn check_gates(m: &IntensityMeasure, gates: Gates, force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    let v = validate(m, GATE_RADIUS)?;
    let mut failed = Vec::new();
    if gates.multi_dimensional && !v.not_one_dimensional.holds() {
        failed.push(format!("not essentially one-dimensional: {}", v.not_one_dimensional));
    }
    if gates.irreducible && !v.irreducible.holds() {
        failed.push(format!("irreducible: {}", v.irreducible));
    }
    if gates.symmetric && !v.symmetric_within_radius {
        failed.push("lattice symmetry: fails".to_string());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "measure fails validation at R={GATE_RADIUS} ({}); pass --force to run anyway",
            failed.join("; ")
        )))
    }
}

/// Creates the output directory and writes the manifest before any sampling.
struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    #[allow(clippy::too_many_arguments)]
    fn start(
        command: &str,
        out: &Path,
        measure: Option<&LoadedMeasure>,
        seed: Option<u64>,
        mode: Option<BoundaryMode>,
        forced: bool,
        parameters: serde_json::Value,
        outputs: &[&str],
    ) -> Result<Run> {
        fs::create_dir_all(out)?;
        let mut manifest = RunManifest::new(command);
        if let Some(lm) = measure {
            manifest.measure_digest = Some(lm.measure.digest());
            manifest.measure_file = Some(lm.path.display().to_string());
            manifest.measure_file_hash = Some(lm.file_hash.clone());
        }
        manifest.base_seed = seed;
        manifest.boundary_convention = mode.map(|m| m.to_string());
        manifest.forced = forced;
        manifest.parameters = parameters;
        manifest.outputs = outputs.iter().map(PathBuf::from).collect();
        manifest.write(&out.join("manifest.json"))?;
        Ok(Run {
            dir: out.to_path_buf(),
            manifest,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        debug_assert!(self.manifest.outputs.iter().any(|p| p == Path::new(name)));
        self.dir.join(name)
    }

    fn write_json<T: serde::Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
        s.push('\n');
        fs::write(self.path(name), s)?;
        Ok(())
    }
}

fn sweep_plan(lm: &LoadedMeasure, s: &SweepArgs) -> SweepPlan {
    let mut plan = SweepPlan::new(&lm.measure, s.window.clone(), s.replicates, s.seed)
        .with_workers(s.output.workers);
    plan.mode = s.mode;
    plan
}

fn start_sweep(
    command: &str,
    lm: &LoadedMeasure,
    s: &SweepArgs,
    plan: &SweepPlan,
    extra: serde_json::Value,
    outputs: &[&str],
) -> Result<Run> {
    let mut parameters = serde_json::to_value(plan).map_err(std::io::Error::from)?;
    if let (Some(obj), serde_json::Value::Object(more)) = (parameters.as_object_mut(), extra) {
        obj.extend(more);
    }
    Run::start(
        command,
        &s.output.out,
        Some(lm),
        Some(s.seed),
        Some(s.mode),
        s.force,
        parameters,
        outputs,
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate {
            measure,
            radius,
            json,
        } => {
            let lm = load_measure(&measure)?;
            let report = validate(&lm.measure, radius)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(std::io::Error::from)?);
            } else {
                println!("measure: {} (digest {})", measure.display(), lm.measure.digest());
                println!("{report}");
            }
        }

        Command::Sample {
            measure,
            seed,
            window,
            u,
            thickness,
            mode,
            output,
        } => {
            let lm = load_measure(&measure)?;
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::Precondition(format!("u = {u} lies outside [0, 1]")));
            }
            let w = match thickness {
                Some(l) => Window::slab(&SlabRegion::new(l, lm.measure.dim())?, 4 * window, window, mode)?,
                None => {
                    let b = hyperperc::lattice::BoxRegion::centered(lm.measure.dim(), window / 2)?;
                    Window::from_box(&b, mode)?
                }
            };
            let cand = Arc::new(enumerate_candidates(&lm.measure, &w)?);
            let run = Run::start(
                "sample",
                &output.out,
                Some(&lm),
                Some(seed),
                Some(mode),
                false,
                json!({ "window": window, "u": u, "L": thickness }),
                &["configuration.txt"],
            )?;
            let mut c = draw_arrivals(cand, seed).configuration_at(u);
            if let Some(l) = thickness {
                c = apply_slab(&c, l)?;
            }
            fs::write(run.path("configuration.txt"), c.to_text())?;
            println!("{} open instances of {} candidates in {}", c.len(), c.candidates().len(), w.describe());
        }

        Command::Crossing { sweep, u } => {
            let lm = load_measure(&sweep.measure)?;
            let plan = sweep_plan(&lm, &sweep).with_u_grid(u);
            plan.check(&lm.measure)?;
            check_gates(&lm.measure, NO_GATES, sweep.force)?;
            let run = start_sweep(
                "crossing",
                &lm,
                &sweep,
                &plan,
                json!({}),
                &["crossing.csv", "crossing.jsonl"],
            )?;
            let curve = crossing_curve(&lm.measure, &plan)?;
            emit_jsonl(&curve.replicates, &run.path("crossing.jsonl"))?;
            emit_plot_data(&curve.records, &run.path("crossing.csv"))?;
            print_records(&curve.records);
        }

        Command::Uc { sweep, bisect } => {
            let lm = load_measure(&sweep.measure)?;
            let mut plan = sweep_plan(&lm, &sweep);
            if let Some((lo, hi, w)) = bisect {
                plan = plan.with_bisect(lo, hi, w);
            }
            plan.check(&lm.measure)?;
            check_gates(
                &lm.measure,
                Gates {
                    multi_dimensional: true,
                    ..NO_GATES
                },
                sweep.force,
            )?;
            let run = start_sweep("uc", &lm, &sweep, &plan, json!({}), &["uc.csv", "uc.json"])?;
            let b = bracket_uc_unchecked(&lm.measure, &plan)?;
            run.write_json("uc.json", &b)?;
            emit_plot_data(&b.records, &run.path("uc.csv"))?;
            println!("u_c in [{}, {}] at window {} after {} steps", b.u_low, b.u_high, b.window, b.steps);
            for d in &b.drift {
                println!("window {}: median crossing u {} [{}, {}]", d.window, d.median_u, d.lo, d.hi);
            }
        }

        Command::Uniqueness { sweep, u, theta } => {
            let lm = load_measure(&sweep.measure)?;
            let plan = sweep_plan(&lm, &sweep);
            plan.check(&lm.measure)?;
            check_gates(
                &lm.measure,
                Gates {
                    multi_dimensional: false,
                    irreducible: true,
                    symmetric: true,
                },
                sweep.force,
            )?;
            let run = start_sweep(
                "uniqueness",
                &lm,
                &sweep,
                &plan,
                json!({ "u": u, "theta": theta }),
                &["uniqueness.csv", "uniqueness.jsonl", "uniqueness.json"],
            )?;
            let census = uniqueness_census(&lm.measure, &plan, u, theta)?;
            emit_jsonl(&census.replicates, &run.path("uniqueness.jsonl"))?;
            run.write_json("uniqueness.json", &census.windows)?;
            emit_plot_data(&census.records(), &run.path("uniqueness.csv"))?;
            for w in &census.windows {
                println!("window {}: giant counts {:?}", w.window, w.distribution);
            }
            print_records(&census.records());
        }

        Command::Slab {
            sweep,
            u,
            thickness,
        } => {
            let lm = load_measure(&sweep.measure)?;
            let plan = sweep_plan(&lm, &sweep).with_slab_thicknesses(thickness.clone());
            plan.check(&lm.measure)?;
            SlabRegion::new(1, lm.measure.dim())?;
            check_gates(
                &lm.measure,
                Gates {
                    multi_dimensional: true,
                    ..NO_GATES
                },
                sweep.force,
            )?;
            let run = start_sweep(
                "slab",
                &lm,
                &sweep,
                &plan,
                json!({ "u": u }),
                &["slab.csv", "slab.jsonl"],
            )?;
            let r = slab_experiment(&lm.measure, &plan, u, &thickness)?;
            emit_jsonl(&r.replicates, &run.path("slab.jsonl"))?;
            emit_plot_data(&r.records, &run.path("slab.csv"))?;
            print_records(&r.records);
            println!("nesting violations: {}", r.nesting_violations);
            match r.thickness_above_0_9 {
                Some(l) => println!("smallest L with crossing above 0.9: {l}"),
                None => println!("no tested L has crossing above 0.9"),
            }
        }

        Command::SquareLoop {
            u,
            n_max,
            replicates,
            seed,
            adjacency_max,
            output,
        } => {
            let run = Run::start(
                "square-loop",
                &output.out,
                None,
                Some(seed),
                None,
                false,
                json!({ "u": u, "n_max": n_max, "replicates": replicates, "adjacency_max": adjacency_max }),
                &["square_loop.csv", "square_loop.json"],
            )?;
            let mut reports = Vec::new();
            let mut records = Vec::new();
            for (k, &ui) in u.iter().enumerate() {
                let s = derive_seed(seed, &[k as u64]);
                let r = square_loop_experiment(ui, n_max, replicates, s, adjacency_max, output.workers)?;
                for sc in &r.scales {
                    println!(
                        "u={ui} n={}: estimate {} closed form {} z={:.2}",
                        sc.n, sc.estimate.estimate, sc.closed_form, sc.z_score
                    );
                    records.push(sc.estimate.clone());
                }
                for a in &r.adjacency {
                    println!("adjacency n={}: {} pairs, {} failures", a.n, a.pairs, a.failures);
                }
                reports.push(r);
            }
            run.write_json("square_loop.json", &reports)?;
            emit_plot_data(&records, &run.path("square_loop.csv"))?;
        }

        Command::Annulus {
            measure,
            n,
            outer,
            lambda,
            cap,
            cutoff,
            output,
        } => {
            let lm = load_measure(&measure)?;
            let run = Run::start(
                "annulus",
                &output.out,
                Some(&lm),
                None,
                None,
                false,
                json!({ "n": n, "outer": outer, "lambda": lambda.map(|(p, q)| format!("{p}/{q}")), "cap": cap, "cutoff": cutoff }),
                &["annulus.json"],
            )?;
            let mut rows = Vec::new();
            for &inner in &n {
                let profile = annulus_profile(&lm.measure, &hyperperc::lattice::Vertex::origin(lm.measure.dim()), inner, cutoff)?;
                let r = match (outer, lambda) {
                    (Some(r), _) => Some(r),
                    (None, Some((p, q))) => Some((inner as u128 * p as u128 / q as u128) as u64),
                    (None, None) => None,
                };
                let mass = r.map(|r| profile.mass(r));
                let decay = annulus_decay(&lm.measure, inner, cap, cutoff)?;
                let (g, exceeds) = match decay {
                    AnnulusDecay::Found(g) => (Some(g), false),
                    AnnulusDecay::ExceedsCap(_) => (None, true),
                };
                match (r, mass) {
                    (Some(r), Some(mass)) => print!("n={inner} R={r}: mass {mass}; "),
                    _ => print!("n={inner}: "),
                }
                match g {
                    Some(g) => println!("g(n) = {g}"),
                    None => println!("g(n) exceeds cap {cap}"),
                }
                rows.push(json!({
                    "n": inner, "outer": r, "mass": mass,
                    "g": g, "g_exceeds_cap": exceeds, "cap": cap,
                }));
            }
            run.write_json("annulus.json", &rows)?;
        }

        Command::Seeds {
            sweep,
            u,
            radius,
            corner,
            union_n,
        } => {
            let lm = load_measure(&sweep.measure)?;
            let plan = sweep_plan(&lm, &sweep);
            plan.check(&lm.measure)?;
            check_gates(
                &lm.measure,
                Gates {
                    irreducible: true,
                    ..NO_GATES
                },
                sweep.force,
            )?;
            let run = start_sweep(
                "seeds",
                &lm,
                &sweep,
                &plan,
                json!({ "u": u, "radius": radius, "corner": corner, "union_n": union_n }),
                &["seeds.csv", "seeds.json"],
            )?;
            let density = seed_density(&lm.measure, &plan, u, radius, corner)?;
            let union = match union_n {
                Some(n) => {
                    let size = *plan.windows.last().expect("checked");
                    let w = plan.box_window(&lm.measure, size)?;
                    let cand = Arc::new(enumerate_candidates(&lm.measure, &w)?);
                    let s = derive_seed(sweep.seed, &[size, 0]);
                    let c = draw_arrivals(cand, s).configuration_at(u);
                    Some(seed_union(&c, &lm.measure, radius, corner, n)?)
                }
                None => None,
            };
            run.write_json("seeds.json", &json!({ "density": density, "union": union }))?;
            emit_plot_data(std::slice::from_ref(&density.record), &run.path("seeds.csv"))?;
            print_records(std::slice::from_ref(&density.record));
            println!(
                "{} instances per box; independent prediction {}",
                density.instances_per_box, density.independent_prediction
            );
            if let Some(un) = union {
                println!(
                    "T(m, n) with n={}: {} of {} boxes are seeds, union of {} vertices",
                    un.n,
                    un.seeds.len(),
                    un.placements,
                    un.union_size
                );
            }
        }

        Command::VerifyLemma { max_size, reading } => {
            let report = verify_lemma(max_size, reading)?;
            println!("{report}");
        }
    }
    Ok(())
}

fn print_records(records: &[EstimateRecord]) {
    for r in records {
        let mut label = r.quantity.clone();
        if let Some(u) = r.u {
            label.push_str(&format!(" u={u}"));
        }
        if let Some(n) = r.n {
            label.push_str(&format!(" n={n}"));
        }
        if let Some(l) = r.l {
            label.push_str(&format!(" L={l}"));
        }
        println!("{label}: {} [{}, {}] N={}", r.estimate, r.lo, r.hi, r.replicates);
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Spec(_)
        | Error::InvalidShape(_)
        | Error::InvalidMeasure(_)
        | Error::WeightConflict { .. } => 2,
        Error::Precondition(_)
        | Error::TooLarge { .. }
        | Error::InvalidGeometry(_)
        | Error::OutsideWindow(_)
        | Error::Partition(_) => 3,
        Error::Io(_) => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Spec(_) | Error::InvalidShape(_) | Error::InvalidMeasure(_) | Error::WeightConflict { .. } => {
            "spec"
        }
        Error::Precondition(_) | Error::InvalidGeometry(_) | Error::OutsideWindow(_) | Error::Partition(_) => {
            "precondition"
        }
        Error::TooLarge { .. } => "too_large",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                json!({ "error": error_kind(&e), "message": e.to_string(), "exit_code": code })
            );
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_are_exact() {
        assert_eq!(parse_ratio("2"), Ok((2, 1)));
        assert_eq!(parse_ratio("3/2"), Ok((3, 2)));
        assert_eq!(parse_ratio("1.5"), Ok((15, 10)));
        assert!(parse_ratio("0").is_err());
        assert!(parse_ratio("-1").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn bisect_needs_three_parts() {
        assert_eq!(parse_bisect("0.4:0.6:0.01"), Ok((0.4, 0.6, 0.01)));
        assert!(parse_bisect("0.4:0.6").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
