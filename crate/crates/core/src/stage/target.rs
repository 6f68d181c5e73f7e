//! Target selection, objective scheduling and subproblem construction.

use crate::acquisition::{EpsilonSubproblem, PreferenceBounds};
use crate::metrics::pareto_filter;
use crate::problems::PreferenceBox;
use rand::Rng;

use super::ObjectiveSchedule;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Index of the front point farthest from its nearest observation; the lowest
/// index wins ties.
pub fn select_target(front: &[Vec<f64>], observations: &[Vec<f64>]) -> usize {
    assert!(!front.is_empty() && !observations.is_empty(), "target selection needs points on both sides");
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, p) in front.iter().enumerate() {
        let d = observations.iter().map(|o| dist2(p, o)).fold(f64::INFINITY, f64::min);
        if d > best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Per-objective min-max scaling fitted on `front ∪ observations`.
pub fn normalized(front: &[Vec<f64>], observations: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = front[0].len();
    let all = front.iter().chain(observations);
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for p in all {
        for j in 0..m {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let scale = |p: &Vec<f64>| -> Vec<f64> {
        (0..m)
            .map(|j| {
                let span = hi[j] - lo[j];
                if span > 1e-12 { (p[j] - lo[j]) / span } else { 0.0 }
            })
            .collect()
    };
    (front.iter().map(scale).collect(), observations.iter().map(scale).collect())
}

/// Primary objective for iteration `t` (0-based index).
pub fn select_objective<R: Rng>(
    t: usize,
    m: usize,
    schedule: ObjectiveSchedule,
    target: &[f64],
    observations: &[Vec<f64>],
    rng: &mut R,
) -> usize {
    match schedule {
        ObjectiveSchedule::RoundRobin => t % m,
        ObjectiveSchedule::Random => rng.gen_range(0..m),
        ObjectiveSchedule::Feasible => {
            let nearest = observations
                .iter()
                .min_by(|a, b| dist2(a, target).total_cmp(&dist2(b, target)))
                .expect("observations are non-empty");
            let mut k = 0;
            for j in 1..m {
                if (target[j] - nearest[j]).abs() < (target[k] - nearest[k]).abs() {
                    k = j;
                }
            }
            k
        }
    }
}

/// Sequentially draws thresholds for the objectives `j ≠ k` in index order,
/// each uniformly within the range still spanned by the observed Pareto
/// points that satisfy the earlier thresholds. Coordinate `k` of the result
/// is the best `f_k` among the surviving points.
pub fn lexicographic_target<R: Rng>(observations: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<f64> {
    let mut alive = pareto_filter(observations);
    let m = observations[0].len();
    let mut target = vec![0.0; m];
    for j in (0..m).filter(|&j| j != k) {
        let lo = alive.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
        let hi = alive.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
        let e = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        target[j] = e;
        alive.retain(|p| p[j] >= e);
    }
    target[k] = alive.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
    target
}

/// Builds the ε-constraint subproblem around `target`.
///
/// Each threshold is clipped to the best observed value of its objective, so
/// at least one observation meets every ε-threshold.
pub fn build_subproblem(
    target: &[f64],
    ys: &[Vec<f64>],
    cs: Option<&[Vec<f64>]>,
    k: usize,
    slack: f64,
    preference: Option<&PreferenceBox>,
) -> EpsilonSubproblem {
    let m = target.len();
    let epsilons = (0..m)
        .filter(|&j| j != k)
        .map(|j| {
            let best = ys.iter().map(|y| y[j]).fold(f64::NEG_INFINITY, f64::max);
            target[j].min(best)
        })
        .collect();
    let mut sub = EpsilonSubproblem::new(k, slack, epsilons);
    if let Some(cs) = cs {
        let c = cs.first().map_or(0, |c| c.len());
        sub.external_thresholds = vec![0.0; c];
    }
    sub.preference = preference.map(|p| PreferenceBounds { lower: p.lower.clone(), upper: p.upper.clone() });
    sub.with_incumbent_from(ys, cs.unwrap_or(&[]))
}

/// Violation of the either/or preference bounds on the objectives `j ≠ k`:
/// the smaller of the distances to the lower-bound and upper-bound sets.
pub fn preference_violation(y: &[f64], k: usize, roi: &PreferenceBox) -> f64 {
    let mut below_lower = 0.0;
    let mut above_upper = 0.0;
    for j in (0..y.len()).filter(|&j| j != k) {
        below_lower += (roi.lower[j] - y[j]).max(0.0);
        above_upper += (y[j] - roi.upper[j]).max(0.0);
    }
    f64::min(below_lower, above_upper)
}
