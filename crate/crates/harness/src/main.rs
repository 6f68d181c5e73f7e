use clap::{Args, Parser, Subcommand};
use gapbo::problems::{cache_path, catalog};
use gapbo_harness::config::{parse_seeds, OUT_DIR_ENV};
use gapbo_harness::reference::reference_front;
use gapbo_harness::summary::summarize;
use gapbo_harness::{run_to_dir, HarnessError, Result, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gapbo", version, about = "Multi-objective Bayesian optimization by ε-constraint gap filling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimization for one or more seeds and write records.csv.
    Run(RunArgs),
    /// Aggregate records.csv in a results directory across seeds.
    Summarize {
        out_dir: PathBuf,
    },
    /// Build (or load) the reference front of a problem.
    ReferenceFront {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value = "fronts")]
        cache_dir: PathBuf,
        /// Points requested from analytic fronts.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Also write the front to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available problems.
    ListProblems,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// unconstrained, constrained or preference.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    /// Seeds, repeatable or comma-separated; `a..b` ranges are allowed.
    #[arg(long = "seed", value_name = "SEEDS")]
    seeds: Vec<String>,
    /// stage, random or sobol.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for concurrent seeds (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Any other setting, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let env_out = std::env::var(OUT_DIR_ENV).ok();
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path, env_out.as_deref())?,
        None => RunConfig::from_text("", env_out.as_deref())?,
    };
    for kv in &args.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    if let Some(v) = &args.problem {
        cfg.set("problem", v)?;
    }
    if let Some(v) = &args.mode {
        cfg.set("mode", v)?;
    }
    if let Some(v) = args.budget {
        cfg.budget = v;
    }
    if !args.seeds.is_empty() {
        cfg.seeds = args.seeds.iter().map(|s| parse_seeds(s)).collect::<Result<Vec<_>>>()?.concat();
    }
    if let Some(v) = &args.algorithm {
        cfg.set("algorithm", v)?;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = &args.format {
        cfg.set("format", v)?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve(&args)?;
            let (records, dir) = run_to_dir(&cfg)?;
            println!("{} records written to {}", records.len(), dir.display());
        }
        Command::Summarize { out_dir } => {
            let (rows, files) = summarize(&out_dir)?;
            println!("{} iterations summarized", rows.len());
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::ReferenceFront { problem, cache_dir, points, out } => {
            let spec = gapbo::problems::lookup(&problem).map_err(|e| HarnessError::Config(e.to_string()))?;
            let front = reference_front(&spec, &cache_dir, points)?;
            if let Some(path) = out {
                front.write_csv(&path)?;
            }
            let origin = if spec.has_analytic_front() {
                "analytic".to_string()
            } else {
                format!("cached at {}", cache_path(&cache_dir, &spec).display())
            };
            println!("{}: {} points ({origin})", spec.name, front.points.len());
        }
        Command::ListProblems => {
            println!("{:<10} {:>3} {:>3} {:>3}  {:<10} {:<10}", "name", "d", "m", "c", "preference", "front");
            for p in catalog() {
                let pref = if p.preference.is_some() { "yes" } else { "no" };
                let front = if p.has_analytic_front() { "analytic" } else { "cached" };
                println!("{:<10} {:>3} {:>3} {:>3}  {:<10} {:<10}", p.name, p.dim_x, p.dim_y, p.dim_c, pref, front);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
