//! The outer optimization loop.
//!
//! One iteration: draw a posterior path per output, solve the sampled problem
//! with NSGA-II, pick the sampled-front point farthest from the observations,
//! turn it into ε-thresholds for all but one objective, maximize constrained
//! expected improvement, evaluate the true problem there.

mod target;

pub use target::{
    build_subproblem, lexicographic_target, normalized, preference_violation, select_objective, select_target,
};

use crate::acquisition::{maximize_cei, CeiOptions, EpsilonSubproblem};
use crate::evo::{nsga2, Nsga2Config};
use crate::par::Execution;
use crate::problems::{Evaluation, PreferenceBox, ProblemSpec};
use crate::surrogate::{sample_path, FitOptions, GpModel, SampledPath};
use crate::{design, Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                let t = s.trim().to_ascii_lowercase().replace('-', "_");
                match t.as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::Argument(format!(
                        concat!("unknown ", stringify!($name), " '{}' (expected one of: {})"),
                        s,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named_enum!(Mode {
    Unconstrained => "unconstrained",
    Constrained => "constrained",
    Preference => "preference",
});

named_enum!(
    /// How the primary objective `k` is chosen each iteration.
    ObjectiveSchedule {
        RoundRobin => "round_robin",
        Random => "random",
        Feasible => "feasible",
    }
);

named_enum!(TargetRule {
    Maxmin => "maxmin",
    RandomLexicographic => "random_lexicographic",
});

named_enum!(QueryRule {
    Cei => "cei",
    DirectSample => "direct_sample",
});

#[derive(Debug, Clone)]
pub struct StageConfig {
    pub slack: f64,
    pub nsga_pop: usize,
    pub nsga_gens: usize,
    pub cei_starts: usize,
    pub cei_probes: usize,
    pub pattern_iters: usize,
    pub rff_features: usize,
    pub objective_schedule: ObjectiveSchedule,
    pub target_rule: TargetRule,
    pub query_rule: QueryRule,
    /// Min-max scale objectives before measuring target distances.
    pub normalize_objectives: bool,
    /// GP fitting options; the input box is always the problem's bounds.
    pub gp: FitOptions,
    pub exec: Execution,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            slack: 1e-3,
            nsga_pop: 300,
            nsga_gens: 50,
            cei_starts: 20,
            cei_probes: 512,
            pattern_iters: 128,
            rff_features: 512,
            objective_schedule: ObjectiveSchedule::RoundRobin,
            target_rule: TargetRule::Maxmin,
            query_rule: QueryRule::Cei,
            normalize_objectives: false,
            gp: FitOptions::default(),
            exec: Execution::default(),
        }
    }
}

/// Observed inputs, objectives and constraint values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub cs: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn push(&mut self, x: Vec<f64>, eval: Evaluation) {
        self.xs.push(x);
        self.ys.push(eval.y);
        self.cs.push(eval.g);
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn feasible_mask(&self) -> Vec<bool> {
        self.cs.iter().map(|c| c.iter().all(|&v| v >= 0.0)).collect()
    }
}

/// Non-dominated points of a sampled problem and the inputs producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFront {
    pub objectives: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    /// No candidate met the constraints; this is the least-violating front.
    pub fallback: bool,
}

/// Runs NSGA-II on a cheap vector function `f(x) = (objectives, constraints)`
/// where constraints are feasible when `≥ 0`. With `preference`, the
/// either/or bounds on objectives `j ≠ k` are added as a further constraint.
pub fn sampled_front_of<F>(
    f: F,
    bounds: &[(f64, f64)],
    preference: Option<(&PreferenceBox, usize)>,
    cfg: &StageConfig,
    seed: u64,
) -> Result<SampledFront>
where
    F: Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Sync,
{
    let nsga_cfg = Nsga2Config {
        pop_size: cfg.nsga_pop,
        generations: cfg.nsga_gens,
        exec: cfg.exec,
        ..Default::default()
    };
    let pop = nsga2(
        |x: &[f64]| {
            let (y, g) = f(x);
            let mut violation: f64 = g.iter().map(|v| (-v).max(0.0)).sum();
            if let Some((roi, k)) = preference {
                violation += preference_violation(&y, k, roi);
            }
            (y, violation)
        },
        bounds,
        &nsga_cfg,
        seed,
    )?;
    let fallback = pop.constraint_violation.iter().any(|&v| v > 0.0);
    Ok(SampledFront { objectives: pop.objectives, inputs: pop.individuals, fallback })
}

/// What happened in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub x: Vec<f64>,
    pub evaluation: Evaluation,
    /// Primary objective, 0-based.
    pub k: usize,
    pub target: Vec<f64>,
    pub subproblem: EpsilonSubproblem,
    /// The sampled front had no constraint-satisfying point.
    pub front_fallback: bool,
    /// Every probe of the acquisition had zero value.
    pub acquisition_fallback: bool,
    /// In preference mode, whether the target met the preference bounds.
    pub target_in_roi: Option<bool>,
}

impl StepReport {
    pub fn incumbent_none(&self) -> bool {
        self.subproblem.incumbent.is_none()
    }
}

const STREAM_FIT: u64 = 0;
const STREAM_PATH: u64 = 64;
const STREAM_NSGA: u64 = 128;
const STREAM_CEI: u64 = 129;
const STREAM_SCHEDULE: u64 = 130;
const STREAM_TARGET: u64 = 131;

/// Seed for one purpose of one iteration, independent across `(t, stream)`.
pub fn derive_seed(seed: u64, t: usize, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((t as u64) << 8) | stream);
    rng.next_u64()
}

/// Default initial design size, `2(d + 1)`.
pub fn default_init(dim_x: usize) -> usize {
    2 * (dim_x + 1)
}

/// State of one optimization run.
#[derive(Debug, Clone)]
pub struct LoopState {
    pub problem: ProblemSpec,
    pub mode: Mode,
    pub config: StageConfig,
    pub dataset: Dataset,
    /// Evaluations made after the initial design.
    pub t: usize,
    pub seed: u64,
    models: Option<Vec<GpModel>>,
}

impl LoopState {
    /// Evaluates a scrambled Sobol design of `n_init` points.
    pub fn initialize(problem: ProblemSpec, mode: Mode, config: StageConfig, seed: u64, n_init: usize) -> Result<Self> {
        check_mode(&problem, mode)?;
        if n_init < 2 {
            return Err(Error::Argument("the initial design needs at least 2 points".into()));
        }
        let mut dataset = Dataset::default();
        for x in design::sobol(n_init, &problem.bounds, seed) {
            let e = problem.evaluate(&x)?;
            dataset.push(x, e);
        }
        Self::from_dataset(problem, mode, config, seed, dataset)
    }

    pub fn from_dataset(problem: ProblemSpec, mode: Mode, config: StageConfig, seed: u64, dataset: Dataset) -> Result<Self> {
        check_mode(&problem, mode)?;
        if dataset.len() < 2 {
            return Err(Error::Data("at least 2 observations are needed".into()));
        }
        Ok(LoopState { problem, mode, config, dataset, t: 0, seed, models: None })
    }

    fn modelled_outputs(&self) -> usize {
        match self.mode {
            Mode::Constrained => self.problem.dim_y + self.problem.dim_c,
            _ => self.problem.dim_y,
        }
    }

    fn output(&self, i: usize) -> Vec<f64> {
        let m = self.problem.dim_y;
        if i < m {
            self.dataset.ys.iter().map(|y| y[i]).collect()
        } else {
            self.dataset.cs.iter().map(|c| c[i - m]).collect()
        }
    }

    /// Objective models followed, in constrained mode, by constraint models;
    /// fitted to the current dataset.
    pub fn models(&mut self) -> Result<&[GpModel]> {
        if self.models.is_none() {
            let opts = FitOptions { bounds: Some(self.problem.bounds.clone()), ..self.config.gp.clone() };
            let mut models = Vec::with_capacity(self.modelled_outputs());
            for i in 0..self.modelled_outputs() {
                let seed = derive_seed(self.seed, self.t, STREAM_FIT + i as u64);
                let model = GpModel::fit(&self.dataset.xs, &self.output(i), &opts, seed).map_err(|e| {
                    Error::Numerical(format!("{}: fitting output {} at iteration {} failed: {e}", self.problem.name, i, self.t))
                })?;
                models.push(model);
            }
            self.models = Some(models);
        }
        Ok(self.models.as_deref().unwrap())
    }

    fn paths(&mut self) -> Result<Vec<SampledPath>> {
        let features = self.config.rff_features;
        let (seed, t) = (self.seed, self.t);
        self.models()?
            .iter()
            .enumerate()
            .map(|(i, m)| sample_path(m, features, derive_seed(seed, t, STREAM_PATH + i as u64)))
            .collect()
    }

    /// The sampled Pareto front for the current iteration. `k` selects the
    /// objective left unbounded by the preference constraint.
    pub fn sampled_front(&mut self, k: usize) -> Result<SampledFront> {
        let paths = self.paths()?;
        let m = self.problem.dim_y;
        let preference = match self.mode {
            Mode::Preference => self.problem.preference.as_ref().map(|p| (p, k)),
            _ => None,
        };
        sampled_front_of(
            |x: &[f64]| {
                let y = paths[..m].iter().map(|p| p.eval(x)).collect();
                let g = paths[m..].iter().map(|p| p.eval(x)).collect();
                (y, g)
            },
            &self.problem.bounds,
            preference,
            &self.config,
            derive_seed(self.seed, self.t, STREAM_NSGA),
        )
    }

    /// Observations the target is compared against: feasible ones in
    /// constrained mode when any exist, all otherwise.
    pub fn comparison_set(&self) -> Vec<Vec<f64>> {
        if self.mode == Mode::Constrained {
            let mask = self.dataset.feasible_mask();
            let feasible: Vec<Vec<f64>> =
                self.dataset.ys.iter().zip(&mask).filter(|(_, &f)| f).map(|(y, _)| y.clone()).collect();
            if !feasible.is_empty() {
                return feasible;
            }
        }
        self.dataset.ys.clone()
    }

    /// Runs one iteration: proposes a point, evaluates it, records it.
    pub fn step(&mut self) -> Result<StepReport> {
        let m = self.problem.dim_y;
        let cfg = self.config.clone();
        let observed = self.comparison_set();
        let k_pre = self.t % m;
        let mut sched_rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, self.t, STREAM_SCHEDULE));
        let mut target_rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, self.t, STREAM_TARGET));

        let need_front = cfg.target_rule == TargetRule::Maxmin || cfg.query_rule == QueryRule::DirectSample;
        let front = if need_front { Some(self.sampled_front(k_pre)?) } else { None };

        let (target, carrier) = match cfg.target_rule {
            TargetRule::Maxmin => {
                let front = front.as_ref().unwrap();
                let idx = if cfg.normalize_objectives {
                    let (f, o) = normalized(&front.objectives, &observed);
                    select_target(&f, &o)
                } else {
                    select_target(&front.objectives, &observed)
                };
                (front.objectives[idx].clone(), Some(idx))
            }
            TargetRule::RandomLexicographic => {
                let target = lexicographic_target(&observed, k_pre, &mut target_rng);
                let carrier = front.as_ref().map(|f| nearest(&f.objectives, &target));
                (target, carrier)
            }
        };

        let k = select_objective(self.t, m, cfg.objective_schedule, &target, &observed, &mut sched_rng);
        let constraints = (self.mode == Mode::Constrained).then_some(self.dataset.cs.as_slice());
        let preference = match self.mode {
            Mode::Preference => self.problem.preference.as_ref(),
            _ => None,
        };
        let sub = build_subproblem(&target, &self.dataset.ys, constraints, k, cfg.slack, preference);
        let target_in_roi = preference.map(|roi| preference_violation(&target, k_pre, roi) == 0.0);

        let (x, acquisition_fallback) = match cfg.query_rule {
            QueryRule::DirectSample => (front.as_ref().unwrap().inputs[carrier.unwrap()].clone(), false),
            QueryRule::Cei => {
                let opts = CeiOptions {
                    n_starts: cfg.cei_starts,
                    n_probes: cfg.cei_probes,
                    pattern_iters: cfg.pattern_iters,
                    exec: cfg.exec,
                };
                let cei_seed = derive_seed(self.seed, self.t, STREAM_CEI);
                let bounds = self.problem.bounds.clone();
                let opt = maximize_cei(&sub, self.models()?, &bounds, &opts, cei_seed)?;
                (opt.x, opt.fallback)
            }
        };

        let evaluation = self.problem.evaluate(&x)?;
        self.dataset.push(x.clone(), evaluation.clone());
        self.t += 1;
        self.models = None;
        Ok(StepReport {
            x,
            evaluation,
            k,
            target,
            subproblem: sub,
            front_fallback: front.as_ref().is_some_and(|f| f.fallback),
            acquisition_fallback,
            target_in_roi,
        })
    }
}

fn nearest(points: &[Vec<f64>], q: &[f64]) -> usize {
    let d = |p: &Vec<f64>| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let mut best = 0;
    for i in 1..points.len() {
        if d(&points[i]) < d(&points[best]) {
            best = i;
        }
    }
    best
}

fn check_mode(problem: &ProblemSpec, mode: Mode) -> Result<()> {
    match mode {
        Mode::Constrained if !problem.is_constrained() => {
            Err(Error::Argument(format!("{} has no constraints; constrained mode is unavailable", problem.name)))
        }
        Mode::Preference if problem.preference.is_none() => {
            Err(Error::Argument(format!("{} has no preference box; preference mode is unavailable", problem.name)))
        }
        _ => Ok(()),
    }
}
