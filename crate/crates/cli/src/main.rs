use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng as _;

use uavbench::ela::{self, FeatureMatrix};
use uavbench::harness::{self, ExperimentPlan, RunRecord};
use uavbench::instancegen::{self, SuiteConfig, SuiteProvenance, TerrainParams};
use uavbench::objective::{CostConfig, PathObjective};
use uavbench::seeding::rng_from_seed;
use uavbench::stats::{self, ResultsMatrix};

#[derive(Parser)]
#[command(name = "uavbench", version, about = "UAV path-planning optimizer benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance suite.
    Gen {
        /// JSON list of terrain parameter sets; the built-in 28 when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Threat counts; one instance per (terrain, count).
        #[arg(long, value_delimiter = ',', default_value = "15,30")]
        densities: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON suite configuration overriding the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one path on an instance.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        /// Flat (r, psi, phi) values, comma separated, or a file holding them.
        #[arg(long, conflicts_with = "random")]
        vector: Option<String>,
        /// Draw a uniform random vector instead.
        #[arg(long)]
        random: bool,
        #[arg(long)]
        dv: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON cost configuration.
        #[arg(long)]
        cost: Option<PathBuf>,
    },
    /// Execute an experiment plan.
    Run {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, env = "UAVBENCH_WORKERS")]
        workers: Option<usize>,
        /// Skip cells already in the run log.
        #[arg(long)]
        resume: bool,
    },
    /// Summary, significance, budget and dimension tables.
    Stats {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        dv: usize,
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Landscape features and their 2-D projection.
    Ela {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = 10)]
        dv: usize,
        #[arg(long, default_value_t = ela::DEFAULT_SAMPLES_PER_DIM)]
        samples_per_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot-ready data from a run directory.
    Export {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, value_enum)]
        what: ExportKind,
        /// Grid points per trace.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    Traces,
    Trajectories,
    BoxplotData,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn gen(params: Option<PathBuf>, densities: Vec<usize>, seed: u64, config: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let params: Vec<TerrainParams> = match params {
        Some(p) => read_json(&p)?,
        None => instancegen::default_terrain_params(),
    };
    let config: SuiteConfig = match config {
        Some(p) => read_json(&p)?,
        None => SuiteConfig::default(),
    };
    ensure!(!densities.is_empty(), "at least one density is required");
    let suite = instancegen::build_suite_with(&params, &densities, seed, &config)?;
    let prov = SuiteProvenance::new(seed, &densities, &params, &config);
    let manifest = instancegen::write_suite(&out, &suite, prov)?;
    println!(
        "terrains: {}, densities: {:?}, instances: {}, manifest: {}",
        params.len(),
        densities,
        suite.len(),
        manifest.display()
    );
    Ok(())
}

fn parse_vector(arg: &str) -> Result<Vec<f64>> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else {
        arg.to_string()
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("not a number: `{s}`")))
        .collect()
}

fn eval(instance: PathBuf, vector: Option<String>, random: bool, dv: Option<usize>, seed: u64, cost: Option<PathBuf>) -> Result<()> {
    let inst = instancegen::load_instance(&instance)?;
    let cfg: CostConfig = match cost {
        Some(p) => read_json(&p)?,
        None => CostConfig::default(),
    };
    let x = match (vector, random) {
        (Some(v), _) => {
            let x = parse_vector(&v)?;
            ensure!(!x.is_empty() && x.len() % 3 == 0, "dimension mismatch: {} values is not a positive multiple of 3", x.len());
            if let Some(dv) = dv {
                ensure!(x.len() == 3 * dv, "dimension mismatch: {} values, expected 3 * {dv} = {}", x.len(), 3 * dv);
            }
            x
        }
        (None, true) => {
            let dv = dv.context("--random needs --dv")?;
            ensure!(dv > 0, "--dv must be positive");
            let bounds = uavbench::objective::search_bounds(&inst, dv);
            let mut rng = rng_from_seed(seed);
            bounds.iter().map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo)).collect()
        }
        (None, false) => bail!("give --vector or --random"),
    };
    let dv = x.len() / 3;
    let obj = PathObjective::new(&inst, dv, cfg);
    if obj.bounds().iter().zip(&x).any(|(&(lo, hi), &v)| !(lo..=hi).contains(&v)) {
        eprintln!("warning: vector lies outside the search bounds");
    }
    let b = obj.breakdown(&x);
    let path = obj.decode(&x);
    let report = serde_json::json!({
        "instance": inst.id,
        "dv": dv,
        "f1": b.f1,
        "f2": b.f2,
        "f3": b.f3,
        "f4": b.f4,
        "total": b.total,
        "violated_pairs": b.violated_pairs,
        "altitude_violations": b.altitude_violations,
        "waypoints": path.nodes(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run(plan: PathBuf, workers: Option<usize>, resume: bool) -> Result<()> {
    let plan = ExperimentPlan::load(&plan)?;
    let workers = workers
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1);
    let summary = harness::run_plan(&plan, workers, resume)?;
    println!(
        "cells: {}, skipped: {}, executed: {}, failed: {}",
        summary.total_cells,
        summary.skipped,
        summary.executed,
        summary.failures.len()
    );
    for f in &summary.failures {
        eprintln!("failed {}: {}", f.cell, f.error);
    }
    ensure!(summary.failures.is_empty(), "{} cells failed", summary.failures.len());
    Ok(())
}

fn write_rows<R: serde::Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    stats::write_csv(path, rows).with_context(|| format!("writing {}", path.display()))
}

fn stats_cmd(runs: PathBuf, dv: usize, budget: u64, out: PathBuf) -> Result<()> {
    let records = harness::read_records(&runs)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let m = ResultsMatrix::from_records(&records, dv, budget)?;
    let summary = stats::summary_table(&m)?;
    write_rows(&out.join("summary.csv"), &summary)?;
    println!("{:<14} {:>14} {:>6} {:>8}", "method", "mean_rel_error", "wins", "rank");
    for r in &summary {
        println!("{:<14} {:>14.6} {:>6} {:>8.3}", r.method, r.mean_rel_error, r.wins, r.friedman_rank);
    }
    if m.methods.len() >= 2 {
        let (best, rows) = stats::significance_table(&m, None)?;
        println!("best method: {best}");
        write_rows(&out.join("significance.csv"), &rows)?;
    }

    let budgets: BTreeSet<u64> = records.iter().filter(|r| r.dv == dv).map(|r| r.base_budget).collect();
    let budgets: Vec<u64> = budgets.into_iter().collect();
    let mut improvement = Vec::new();
    for w in budgets.windows(2) {
        let low = ResultsMatrix::from_records(&records, dv, w[0]);
        let high = ResultsMatrix::from_records(&records, dv, w[1]);
        if let (Ok(low), Ok(high)) = (low, high) {
            improvement.extend(stats::budget_improvement(&low, &high, &format!("{}->{}", w[0], w[1]))?);
        }
    }
    if !improvement.is_empty() {
        write_rows(&out.join("budget_improvement.csv"), &improvement)?;
    }

    let dvs: BTreeSet<usize> = records.iter().filter(|r| r.base_budget == budget).map(|r| r.dv).collect();
    let per_dv: Vec<(usize, ResultsMatrix)> = dvs
        .into_iter()
        .filter_map(|d| ResultsMatrix::from_records(&records, d, budget).ok().map(|m| (d, m)))
        .collect();
    if per_dv.len() >= 2 {
        write_rows(&out.join("variable_dimension.csv"), &stats::variable_dimension_table(budget, &per_dv)?)?;
    }
    Ok(())
}

fn ela_cmd(suite: PathBuf, dv: usize, samples_per_dim: usize, seed: u64, out: PathBuf) -> Result<()> {
    ensure!(dv > 0, "--dv must be positive");
    let instances = instancegen::load_suite(&suite)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut rows = Vec::with_capacity(instances.len());
    for inst in &instances {
        let obj = PathObjective::new(inst, dv, CostConfig::default());
        let f = |x: &[f64]| obj.evaluate(x);
        let feats = ela::problem_features(&f, obj.bounds(), samples_per_dim, seed)
            .with_context(|| format!("features of {}", inst.id))?;
        eprintln!("{}: {} features", inst.id, feats.len());
        rows.push((inst.id.clone(), "uav".to_string(), feats));
    }
    let raw = FeatureMatrix::from_vectors(rows);
    raw.write_csv(&out.join("features.csv"))?;
    let clean = ela::clean_features(&raw)?;
    clean.write_csv(&out.join("features_clean.csv"))?;
    let proj = ela::pca_project(&clean, 2)?;
    proj.write_csv(&out.join("projection.csv"))?;
    println!(
        "problems: {}, features: {} raw, {} kept, PC1+PC2 share {:.3}",
        raw.labels.len(),
        raw.names.len(),
        clean.names.len(),
        proj.explained.iter().take(2).sum::<f64>()
    );
    Ok(())
}

fn export(runs: PathBuf, what: ExportKind, points: usize, out: PathBuf) -> Result<()> {
    let records = harness::read_records(&runs)?;
    ensure!(!records.is_empty(), "{} holds no runs", runs.display());
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    match what {
        ExportKind::Traces => {
            let mut written = 0;
            for r in &records {
                let grid = harness::linear_grid(r.budget, points);
                let table = harness::export_traces(std::slice::from_ref(r), &grid);
                written += table.write_per_cell(&out)?.len();
            }
            println!("wrote {written} trace files to {}", out.display());
        }
        ExportKind::Trajectories => {
            let path = out.join("trajectories.csv");
            harness::write_trajectories(&records, &path)?;
            println!("wrote {}", path.display());
        }
        ExportKind::BoxplotData => {
            let settings: BTreeSet<(usize, u64)> = records.iter().map(|r: &RunRecord| (r.dv, r.base_budget)).collect();
            let mut rows = Vec::new();
            for (dv, b) in settings {
                let m = ResultsMatrix::from_records(&records, dv, b)?;
                rows.extend(stats::relative_error_rows(&m, dv, b)?);
            }
            let path = out.join("relative_errors.csv");
            write_rows(&path, &rows)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { params, densities, seed, config, out } => gen(params, densities, seed, config, out),
        Command::Eval { instance, vector, random, dv, seed, cost } => eval(instance, vector, random, dv, seed, cost),
        Command::Run { plan, workers, resume } => run(plan, workers, resume),
        Command::Stats { runs, dv, budget, out } => stats_cmd(runs, dv, budget, out),
        Command::Ela { suite, dv, samples_per_dim, seed, out } => ela_cmd(suite, dv, samples_per_dim, seed, out),
        Command::Export { runs, what, points, out } => export(runs, what, points, out),
    }
}
