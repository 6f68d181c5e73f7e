//! Reference fronts: closed form when available, otherwise a cached
//! NSGA-II approximation on the true problem.

use crate::error::Result;
use gapbo::evo::{nsga2, Nsga2Config};
use gapbo::metrics::pareto_filter;
use gapbo::problems::{cache_path, true_front, FrontProvenance, ProblemSpec, ReferenceFront};
use gapbo::Error;
use std::path::Path;

pub const FRONT_POP: usize = 500;
pub const FRONT_GENS: usize = 500;
pub const FRONT_SEED: u64 = 20_240_601;

/// Runs NSGA-II on the true problem and keeps the feasible non-dominated set.
pub fn evolve_front(problem: &ProblemSpec, pop_size: usize, generations: usize, seed: u64) -> Result<ReferenceFront> {
    let cfg = Nsga2Config { pop_size, generations, ..Default::default() };
    let pop = nsga2(
        |x: &[f64]| {
            let e = problem.evaluate(x).expect("NSGA-II stays within bounds");
            let violation = e.g.iter().map(|v| (-v).max(0.0)).sum();
            (e.y, violation)
        },
        &problem.bounds,
        &cfg,
        seed,
    )?;
    let feasible: Vec<Vec<f64>> = pop
        .objectives
        .iter()
        .zip(&pop.constraint_violation)
        .filter(|(_, &v)| v == 0.0)
        .map(|(y, _)| y.clone())
        .collect();
    if feasible.is_empty() {
        return Err(Error::Numerical(format!("{}: NSGA-II found no feasible point", problem.name)).into());
    }
    Ok(ReferenceFront { points: pareto_filter(&feasible), provenance: FrontProvenance::CachedEvolutionary })
}

/// The problem's reference front. Non-analytic fronts are read from
/// `cache_dir`, generated and written there when missing or unreadable.
pub fn reference_front(problem: &ProblemSpec, cache_dir: &Path, n: usize) -> Result<ReferenceFront> {
    match true_front(problem, n, Some(cache_dir)) {
        Ok(front) => Ok(front),
        Err(Error::Unavailable(_)) | Err(Error::Data(_)) => {
            let front = evolve_front(problem, FRONT_POP, FRONT_GENS, FRONT_SEED)?;
            front.write_csv(&cache_path(cache_dir, problem))?;
            Ok(front)
        }
        Err(e) => Err(e.into()),
    }
}
