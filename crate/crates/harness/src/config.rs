//! Run configuration: a flat `key = value` file, CLI overrides on top.

use crate::error::{HarnessError, Result};
use gapbo::problems::{lookup, ProblemSpec};
use gapbo::stage::{default_init, Mode, ObjectiveSchedule, QueryRule, StageConfig, TargetRule};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable that overrides `out_dir` from a config file.
pub const OUT_DIR_ENV: &str = "GAPBO_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Stage,
    Random,
    Sobol,
}

impl FromStr for Algorithm {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stage" => Ok(Algorithm::Stage),
            "random" => Ok(Algorithm::Random),
            "sobol" => Ok(Algorithm::Sobol),
            _ => Err(HarnessError::Config(format!("unknown algorithm '{s}' (expected stage, random or sobol)"))),
        }
    }
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Stage => "stage",
            Algorithm::Random => "random",
            Algorithm::Sobol => "sobol",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(HarnessError::Config(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub mode: Mode,
    /// Total true evaluations per seed, initial design included.
    pub budget: usize,
    pub seeds: Vec<u64>,
    /// Initial design size; `2(d + 1)` when absent.
    pub init: Option<usize>,
    pub stage: StageConfig,
    pub algorithm: Algorithm,
    pub out_dir: PathBuf,
    pub metrics_every: usize,
    /// Worker threads for running seeds concurrently; 0 uses every core.
    pub jobs: usize,
    pub format: Format,
    /// Where evolutionary reference fronts are cached.
    pub cache_dir: PathBuf,
    /// Points requested from analytic reference fronts.
    pub front_points: usize,
    /// Record wall-clock seconds per iteration; off keeps output files
    /// byte-identical across reruns.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "ZDT1".into(),
            mode: Mode::Unconstrained,
            budget: 60,
            seeds: vec![0],
            init: None,
            stage: StageConfig::default(),
            algorithm: Algorithm::Stage,
            out_dir: PathBuf::from("results"),
            metrics_every: 1,
            jobs: 0,
            format: Format::Csv,
            cache_dir: PathBuf::from("fronts"),
            front_points: 1000,
            timing: false,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(HarnessError::Config(format!("line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(out)
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e| HarnessError::Config(format!("{key}: cannot parse '{v}': {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(HarnessError::Config(format!("{key}: expected a boolean, got '{v}'"))),
    }
}

/// Comma- or whitespace-separated seeds; `a..b` expands to `a, …, b-1`.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for tok in v.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let a: u64 = parse_value("seeds", a)?;
            let b: u64 = parse_value("seeds", b)?;
            seeds.extend(a..b);
        } else {
            seeds.push(parse_value("seeds", tok)?);
        }
    }
    Ok(seeds)
}

fn core_enum<T: FromStr<Err = gapbo::Error>>(v: &str) -> Result<T> {
    v.parse().map_err(|e: gapbo::Error| HarnessError::Config(e.to_string()))
}

impl RunConfig {
    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let v = value.trim();
        let s = &mut self.stage;
        match key.as_str() {
            "problem" => self.problem = v.to_string(),
            "mode" => self.mode = core_enum(v)?,
            "budget" => self.budget = parse_value(&key, v)?,
            "seed" | "seeds" => self.seeds = parse_seeds(v)?,
            "init" => self.init = Some(parse_value(&key, v)?),
            "algorithm" => self.algorithm = v.parse()?,
            "out_dir" | "out" => self.out_dir = PathBuf::from(v),
            "metrics_every" => self.metrics_every = parse_value(&key, v)?,
            "jobs" => self.jobs = parse_value(&key, v)?,
            "format" => self.format = v.parse()?,
            "cache_dir" => self.cache_dir = PathBuf::from(v),
            "front_points" => self.front_points = parse_value(&key, v)?,
            "timing" => self.timing = parse_bool(&key, v)?,
            "slack" => s.slack = parse_value(&key, v)?,
            "nsga_pop" => s.nsga_pop = parse_value(&key, v)?,
            "nsga_gens" => s.nsga_gens = parse_value(&key, v)?,
            "cei_starts" => s.cei_starts = parse_value(&key, v)?,
            "cei_probes" => s.cei_probes = parse_value(&key, v)?,
            "pattern_iters" => s.pattern_iters = parse_value(&key, v)?,
            "rff_features" => s.rff_features = parse_value(&key, v)?,
            "objective_schedule" => s.objective_schedule = core_enum::<ObjectiveSchedule>(v)?,
            "target_rule" => s.target_rule = core_enum::<TargetRule>(v)?,
            "query_rule" => s.query_rule = core_enum::<QueryRule>(v)?,
            "normalize_objectives" => s.normalize_objectives = parse_bool(&key, v)?,
            "gp_restarts" => s.gp.restarts = parse_value(&key, v)?,
            "gp_max_iters" => s.gp.max_iters = parse_value(&key, v)?,
            _ => return Err(HarnessError::Config(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Builds a config from file text; `env_out_dir` (the value of
    /// [`OUT_DIR_ENV`], if set) replaces the file's `out_dir`.
    pub fn from_text(text: &str, env_out_dir: Option<&str>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, v) in parse_pairs(text)? {
            cfg.set(&k, &v)?;
        }
        if let Some(dir) = env_out_dir.filter(|d| !d.is_empty()) {
            cfg.out_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path, env_out_dir: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text, env_out_dir)
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        lookup(&self.problem).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn init_size(&self, problem: &ProblemSpec) -> usize {
        self.init.unwrap_or_else(|| default_init(problem.dim_x))
    }

    /// Checks every invariant that can be checked without evaluating.
    pub fn validate(&self) -> Result<ProblemSpec> {
        let problem = self.problem_spec()?;
        let init = self.init_size(&problem);
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if init < 2 {
            return bad(format!("init must be at least 2, got {init}"));
        }
        if self.budget <= init {
            return bad(format!("budget ({}) must exceed the initial design ({init})", self.budget));
        }
        if self.metrics_every == 0 {
            return bad("metrics_every must be positive".into());
        }
        match self.mode {
            Mode::Constrained if !problem.is_constrained() => {
                return bad(format!("{} has no constraints; use mode = unconstrained", problem.name))
            }
            Mode::Preference if problem.preference.is_none() => {
                return bad(format!("{} has no preference box", problem.name))
            }
            _ => {}
        }
        let s = &self.stage;
        if s.nsga_pop < 2 || s.nsga_pop % 2 != 0 || s.nsga_gens == 0 {
            return bad("nsga_pop must be even and ≥ 2 and nsga_gens positive".into());
        }
        if s.cei_starts == 0 || s.cei_probes == 0 || s.rff_features == 0 || s.gp.restarts == 0 {
            return bad("cei_starts, cei_probes, rff_features and gp_restarts must be positive".into());
        }
        if !(s.slack >= 0.0 && s.slack.is_finite()) {
            return bad("slack must be a finite non-negative number".into());
        }
        if self.front_points < 2 {
            return bad("front_points must be at least 2".into());
        }
        Ok(problem)
    }

    /// The resolved settings in the config-file format.
    pub fn to_text(&self) -> String {
        let s = &self.stage;
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("writing to a String");
        kv("problem", self.problem.clone());
        kv("mode", self.mode.to_string());
        kv("algorithm", self.algorithm.as_str().into());
        kv("budget", self.budget.to_string());
        kv("seeds", seeds.join(","));
        if let Some(i) = self.init {
            kv("init", i.to_string());
        }
        kv("metrics_every", self.metrics_every.to_string());
        kv("front_points", self.front_points.to_string());
        kv("timing", self.timing.to_string());
        kv("slack", s.slack.to_string());
        kv("nsga_pop", s.nsga_pop.to_string());
        kv("nsga_gens", s.nsga_gens.to_string());
        kv("cei_starts", s.cei_starts.to_string());
        kv("cei_probes", s.cei_probes.to_string());
        kv("pattern_iters", s.pattern_iters.to_string());
        kv("rff_features", s.rff_features.to_string());
        kv("objective_schedule", s.objective_schedule.to_string());
        kv("target_rule", s.target_rule.to_string());
        kv("query_rule", s.query_rule.to_string());
        kv("normalize_objectives", s.normalize_objectives.to_string());
        kv("gp_restarts", s.gp.restarts.to_string());
        kv("gp_max_iters", s.gp.max_iters.to_string());
        out
    }
}
