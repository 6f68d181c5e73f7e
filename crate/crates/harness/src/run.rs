//! Run orchestration: one optimization per seed, metrics on a fixed grid.

use crate::config::{Algorithm, Format, RunConfig};
use crate::error::{HarnessError, Result};
use crate::record::{self, RunRecord};
use crate::reference::reference_front;
use gapbo::design;
use gapbo::metrics::{fill_distance, hypervolume, igd, igd_plus, pareto_filter};
use gapbo::problems::ProblemSpec;
use gapbo::stage::{Dataset, LoopState, Mode, StepReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

/// Metric values for the observations made so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub hv: f64,
    pub igd: f64,
    pub igd_plus: f64,
    pub fill_distance: f64,
    pub feasible_ratio: f64,
    pub no_feasible: bool,
}

/// Hypervolume against the problem's reference point and distance metrics
/// against `front`, all over the feasible non-dominated observations.
pub fn measure(problem: &ProblemSpec, data: &Dataset, front: &[Vec<f64>]) -> Result<Snapshot> {
    let mask = data.feasible_mask();
    let feasible: Vec<Vec<f64>> = data.ys.iter().zip(&mask).filter(|(_, &f)| f).map(|(y, _)| y.clone()).collect();
    let ratio = gapbo::metrics::feasible_ratio(&mask);
    if feasible.is_empty() {
        return Ok(Snapshot {
            hv: f64::NAN,
            igd: f64::NAN,
            igd_plus: f64::NAN,
            fill_distance: f64::NAN,
            feasible_ratio: ratio,
            no_feasible: true,
        });
    }
    let observed = pareto_filter(&feasible);
    Ok(Snapshot {
        hv: hypervolume(&observed, &problem.reference_point),
        igd: igd(&observed, front)?,
        igd_plus: igd_plus(&observed, front)?,
        fill_distance: fill_distance(&observed, front)?,
        feasible_ratio: ratio,
        no_feasible: false,
    })
}

/// The front distance metrics are measured against: the reference front, or
/// its part inside the preference box in preference mode.
pub fn metric_front(cfg: &RunConfig, problem: &ProblemSpec) -> Result<Vec<Vec<f64>>> {
    let front = reference_front(problem, &cfg.cache_dir, cfg.front_points)?;
    if cfg.mode != Mode::Preference {
        return Ok(front.points);
    }
    let roi = problem.preference.as_ref().expect("validated preference mode");
    let clipped = front.clipped_to(&roi.lower, &roi.upper);
    if clipped.is_empty() {
        return Err(HarnessError::Config(format!("{}: no reference front point lies in the preference box", problem.name)));
    }
    Ok(clipped)
}

fn step_flags(r: &StepReport, into: &mut BTreeSet<&'static str>) {
    if r.front_fallback {
        into.insert("front_fallback");
    }
    if r.acquisition_fallback {
        into.insert("acq_fallback");
    }
    if r.incumbent_none() {
        into.insert("incumbent_none");
    }
    match r.target_in_roi {
        Some(true) => {
            into.insert("roi_target");
        }
        Some(false) => {
            into.insert("roi_miss");
        }
        None => {}
    }
}

fn is_recorded(i: usize, last: usize, every: usize) -> bool {
    i % every == 0 || i == last
}

/// Outcome of one seed: its records and every observation made.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub records: Vec<RunRecord>,
    pub dataset: Dataset,
}

/// Runs one seed against the metric front `front`.
pub fn run_seed(cfg: &RunConfig, problem: &ProblemSpec, front: &[Vec<f64>], seed: u64) -> Result<SeedRun> {
    let init = cfg.init_size(problem);
    let iterations = cfg.budget - init;
    let mut records = Vec::new();
    let mut emit = |i: usize, data: &Dataset, wall: f64, flags: &BTreeSet<&'static str>| -> Result<()> {
        let s = measure(problem, data, front)?;
        let mut flags: Vec<String> = flags.iter().map(|f| f.to_string()).collect();
        if s.no_feasible {
            flags.insert(0, "no_feasible".into());
        }
        records.push(RunRecord {
            seed,
            iteration: i,
            hv: s.hv,
            igd: s.igd,
            igd_plus: s.igd_plus,
            fill_distance: s.fill_distance,
            feasible_ratio: s.feasible_ratio,
            wall_seconds: wall,
            flags,
        });
        Ok(())
    };

    let dataset = match cfg.algorithm {
        Algorithm::Stage => {
            let mut state = LoopState::initialize(problem.clone(), cfg.mode, cfg.stage.clone(), seed, init)?;
            let mut flags = BTreeSet::new();
            let mut wall = 0.0;
            for i in 1..=iterations {
                let start = Instant::now();
                let report = state.step()?;
                if cfg.timing {
                    wall += start.elapsed().as_secs_f64();
                }
                step_flags(&report, &mut flags);
                if is_recorded(i, iterations, cfg.metrics_every) {
                    emit(i, &state.dataset, wall, &flags)?;
                    flags.clear();
                    wall = 0.0;
                }
            }
            state.dataset
        }
        Algorithm::Random | Algorithm::Sobol => {
            let xs = if cfg.algorithm == Algorithm::Random {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                design::uniform(cfg.budget, &problem.bounds, &mut rng)
            } else {
                design::sobol(cfg.budget, &problem.bounds, seed)
            };
            let mut data = Dataset::default();
            let none = BTreeSet::new();
            for (n, x) in xs.into_iter().enumerate() {
                let e = problem.evaluate(&x)?;
                data.push(x, e);
                let i = (n + 1).saturating_sub(init);
                if n + 1 > init && is_recorded(i, iterations, cfg.metrics_every) {
                    emit(i, &data, 0.0, &none)?;
                }
            }
            data
        }
    };
    Ok(SeedRun { records, dataset })
}

/// Runs every seed, concurrently when the `parallel` feature is on, and
/// returns the outcomes in seed order.
pub fn run_seeds(cfg: &RunConfig, problem: &ProblemSpec, front: &[Vec<f64>]) -> Vec<Result<SeedRun>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build();
        if let Ok(pool) = pool {
            return pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, problem, front, s)).collect());
        }
    }
    cfg.seeds.iter().map(|&s| run_seed(cfg, problem, front, s)).collect()
}

/// Runs every seed and returns the records in seed order.
pub fn run(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    let problem = cfg.validate()?;
    let front = metric_front(cfg, &problem)?;
    let mut all = Vec::new();
    for r in run_seeds(cfg, &problem, &front) {
        all.extend(r?.records);
    }
    Ok(all)
}

pub const RECORDS_CSV: &str = "records.csv";
pub const RECORDS_JSON: &str = "records.json";
pub const CONFIG_ECHO: &str = "config.txt";

/// Runs and writes `records.csv` (plus `records.json` for the JSON format)
/// and the resolved configuration into the output directory.
pub fn run_to_dir(cfg: &RunConfig) -> Result<(Vec<RunRecord>, PathBuf)> {
    let records = run(cfg)?;
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    record::export(&records, &dir.join(RECORDS_CSV))?;
    if cfg.format == Format::Json {
        record::export(&records, &dir.join(RECORDS_JSON))?;
    }
    let echo = dir.join(CONFIG_ECHO);
    fs::write(&echo, cfg.to_text()).map_err(|e| HarnessError::io(&echo, e))?;
    Ok((records, dir.clone()))
}
