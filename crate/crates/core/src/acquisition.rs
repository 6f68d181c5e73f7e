//! Constrained expected improvement on an ε-constraint subproblem.
//!
//! The primary objective `k` is augmented with a small slack on the other
//! objectives, `f_k + s Σ_{j≠k} f_j`, which keeps the optimizer away from
//! weakly Pareto optimal points. Every other objective becomes a threshold
//! constraint `f_j ≥ ε_j`. Outputs are modelled by independent GPs.

use crate::normal;
use crate::par::Execution;
use crate::surrogate::GpModel;
use crate::{design, Error, Result};

/// Either/or bounds on the non-primary objectives: a point is acceptable when
/// it lies above `lower` in every coordinate or below `upper` in every
/// coordinate. Both vectors span all `m` objectives; entry `k` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSubproblem {
    /// Primary objective, 0-based.
    pub k: usize,
    pub slack: f64,
    /// Thresholds for the objectives `j ≠ k`, in increasing `j`.
    pub epsilons: Vec<f64>,
    /// Lower thresholds on the external constraint outputs.
    pub external_thresholds: Vec<f64>,
    pub preference: Option<PreferenceBounds>,
    /// Best augmented value among observations meeting every constraint;
    /// `None` when no observation does.
    pub incumbent: Option<f64>,
}

impl EpsilonSubproblem {
    pub fn new(k: usize, slack: f64, epsilons: Vec<f64>) -> Self {
        EpsilonSubproblem {
            k,
            slack,
            epsilons,
            external_thresholds: Vec::new(),
            preference: None,
            incumbent: None,
        }
    }

    pub fn num_objectives(&self) -> usize {
        self.epsilons.len() + 1
    }

    /// Indices of the constrained objectives, aligned with `epsilons`.
    pub fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_objectives()).filter(move |&j| j != self.k)
    }

    pub fn augmented(&self, y: &[f64]) -> f64 {
        y[self.k] + self.slack * self.others().map(|j| y[j]).sum::<f64>()
    }

    /// Whether an observed `(y, c)` meets the ε-thresholds, the external
    /// thresholds and, when present, the preference disjunction.
    pub fn admits(&self, y: &[f64], c: &[f64]) -> bool {
        let eps_ok = self.others().zip(&self.epsilons).all(|(j, &e)| y[j] >= e);
        let ext_ok = c.iter().zip(&self.external_thresholds).all(|(v, t)| v >= t);
        let pref_ok = match &self.preference {
            None => true,
            Some(p) => {
                self.others().all(|j| y[j] >= p.lower[j]) || self.others().all(|j| y[j] <= p.upper[j])
            }
        };
        eps_ok && ext_ok && pref_ok
    }

    /// Sets the incumbent from observed objectives `ys` and constraints `cs`
    /// (`cs` may be empty for unconstrained problems).
    pub fn with_incumbent_from(mut self, ys: &[Vec<f64>], cs: &[Vec<f64>]) -> Self {
        let empty = Vec::new();
        self.incumbent = ys
            .iter()
            .enumerate()
            .filter(|(i, y)| self.admits(y, cs.get(*i).unwrap_or(&empty)))
            .map(|(_, y)| self.augmented(y))
            .fold(None, |best: Option<f64>, v| Some(best.map_or(v, |b| b.max(v))));
        self
    }

    fn validate(&self, m: usize, c: usize) -> Result<()> {
        if self.k >= m || self.epsilons.len() + 1 != m {
            return Err(Error::Argument(format!(
                "subproblem with k = {} and {} thresholds does not fit {} objectives",
                self.k,
                self.epsilons.len(),
                m
            )));
        }
        if self.external_thresholds.len() != c {
            return Err(Error::Argument(format!(
                "{} external thresholds for {} constraint models",
                self.external_thresholds.len(),
                c
            )));
        }
        if let Some(p) = &self.preference {
            if p.lower.len() != m || p.upper.len() != m {
                return Err(Error::Argument("preference bounds must span every objective".into()));
            }
        }
        Ok(())
    }
}

/// Closed-form expected improvement of a Gaussian over `incumbent`.
pub fn expected_improvement(mean: f64, stdev: f64, incumbent: f64) -> f64 {
    let gap = mean - incumbent;
    if stdev < 1e-12 {
        return gap.max(0.0);
    }
    let z = gap / stdev;
    (gap * normal::cdf(z) + stdev * normal::pdf(z)).max(0.0)
}

/// `P(f ≥ threshold)` for `f ~ N(mean, stdev²)`; an indicator when `stdev` is 0.
fn upper_tail(mean: f64, stdev: f64, threshold: f64) -> f64 {
    if stdev < 1e-12 {
        return if mean >= threshold { 1.0 } else { 0.0 };
    }
    normal::cdf((mean - threshold) / stdev)
}

/// `P(lo ≤ f ≤ hi)`; either end may be infinite.
fn interval(mean: f64, stdev: f64, lo: f64, hi: f64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    if stdev < 1e-12 {
        return if mean >= lo && mean <= hi { 1.0 } else { 0.0 };
    }
    let above = normal::cdf((mean - lo) / stdev);
    let beyond = normal::cdf((mean - hi) / stdev);
    (above - beyond).max(0.0)
}

/// Product of independent Gaussian tail probabilities `P(f_j ≥ ε_j)`.
pub fn probability_of_feasibility(means: &[f64], stdevs: &[f64], thresholds: &[f64]) -> f64 {
    means
        .iter()
        .zip(stdevs)
        .zip(thresholds)
        .map(|((&m, &s), &t)| upper_tail(m, s, t))
        .product()
}

/// Posterior means and standard deviations of every modelled output at one
/// input: the `m` objectives followed by the external constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub objective_mean: Vec<f64>,
    pub objective_sd: Vec<f64>,
    pub constraint_mean: Vec<f64>,
    pub constraint_sd: Vec<f64>,
}

/// `models` holds the objective models followed by the constraint models.
pub fn posterior_moments(x: &[f64], models: &[GpModel], m: usize) -> Moments {
    let (om, osd): (Vec<f64>, Vec<f64>) = models[..m]
        .iter()
        .map(|g| {
            let (mu, var) = g.predict(x);
            (mu, var.sqrt())
        })
        .unzip();
    let (cm, csd): (Vec<f64>, Vec<f64>) = models[m..]
        .iter()
        .map(|g| {
            let (mu, var) = g.predict(x);
            (mu, var.sqrt())
        })
        .unzip();
    Moments { objective_mean: om, objective_sd: osd, constraint_mean: cm, constraint_sd: csd }
}

/// Mean and standard deviation of the augmented objective.
pub fn augmented_moments(mo: &Moments, sub: &EpsilonSubproblem) -> (f64, f64) {
    let k = sub.k;
    let s = sub.slack;
    let mean = mo.objective_mean[k] + s * sub.others().map(|j| mo.objective_mean[j]).sum::<f64>();
    let var = mo.objective_sd[k].powi(2) + s * s * sub.others().map(|j| mo.objective_sd[j].powi(2)).sum::<f64>();
    (mean, var.sqrt())
}

/// Probability that the ε-thresholds, the external thresholds and the
/// preference disjunction all hold.
///
/// With preference bounds the objective part is computed exactly under
/// independence, by inclusion-exclusion over the two boxes intersected with
/// the ε half-spaces.
pub fn probability_of_feasibility_from_moments(mo: &Moments, sub: &EpsilonSubproblem) -> f64 {
    let external = probability_of_feasibility(&mo.constraint_mean, &mo.constraint_sd, &sub.external_thresholds);
    let objective = match &sub.preference {
        None => {
            let (mu, sd): (Vec<f64>, Vec<f64>) =
                sub.others().map(|j| (mo.objective_mean[j], mo.objective_sd[j])).unzip();
            probability_of_feasibility(&mu, &sd, &sub.epsilons)
        }
        Some(p) => {
            let mut above = 1.0;
            let mut below = 1.0;
            let mut both = 1.0;
            for (j, &e) in sub.others().zip(&sub.epsilons) {
                let (mu, sd) = (mo.objective_mean[j], mo.objective_sd[j]);
                let lo = e.max(p.lower[j]);
                above *= interval(mu, sd, lo, f64::INFINITY);
                below *= interval(mu, sd, e, p.upper[j]);
                both *= interval(mu, sd, lo, p.upper[j]);
            }
            (above + below - both).clamp(0.0, 1.0)
        }
    };
    objective * external
}

/// Log of the feasibility probability, kept finite deep in the tails so the
/// all-zero fallback can still rank candidates.
fn log_feasibility(mo: &Moments, sub: &EpsilonSubproblem) -> f64 {
    let p = probability_of_feasibility_from_moments(mo, sub);
    if p > 1e-300 {
        return p.ln();
    }
    let log_tail = |mean: f64, sd: f64, t: f64| {
        if sd < 1e-12 {
            if mean >= t { 0.0 } else { -1e300 }
        } else {
            normal::log_cdf((mean - t) / sd)
        }
    };
    let mut total: f64 = mo
        .constraint_mean
        .iter()
        .zip(&mo.constraint_sd)
        .zip(&sub.external_thresholds)
        .map(|((&m, &s), &t)| log_tail(m, s, t))
        .sum();
    match &sub.preference {
        None => {
            total += sub
                .others()
                .zip(&sub.epsilons)
                .map(|(j, &e)| log_tail(mo.objective_mean[j], mo.objective_sd[j], e))
                .sum::<f64>();
        }
        Some(p) => {
            let (mut above, mut below) = (0.0, 0.0);
            for (j, &e) in sub.others().zip(&sub.epsilons) {
                let (mu, sd) = (mo.objective_mean[j], mo.objective_sd[j]);
                above += log_tail(mu, sd, e.max(p.lower[j]));
                below += log_tail(mu, sd, e) + log_tail(-mu, sd, -p.upper[j]);
            }
            total += above.max(below);
        }
    }
    total
}

/// `EI(augmented objective) × PoF`, or PoF alone when there is no incumbent.
pub fn cei_from_moments(mo: &Moments, sub: &EpsilonSubproblem) -> f64 {
    let pof = probability_of_feasibility_from_moments(mo, sub);
    match sub.incumbent {
        None => pof,
        Some(best) => {
            let (mean, sd) = augmented_moments(mo, sub);
            expected_improvement(mean, sd, best) * pof
        }
    }
}

pub fn cei(x: &[f64], sub: &EpsilonSubproblem, models: &[GpModel]) -> f64 {
    cei_from_moments(&posterior_moments(x, models, sub.num_objectives()), sub)
}

#[derive(Debug, Clone)]
pub struct CeiOptions {
    pub n_starts: usize,
    pub n_probes: usize,
    pub pattern_iters: usize,
    pub exec: Execution,
}

impl Default for CeiOptions {
    fn default() -> Self {
        CeiOptions { n_starts: 20, n_probes: 512, pattern_iters: 128, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CeiOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Every probe had zero acquisition value; `x` maximizes feasibility.
    pub fallback: bool,
}

/// Maximizes cEI over `bounds` from the best of `n_probes` scrambled Sobol
/// probes, each refined by a coordinate pattern search.
pub fn maximize_cei(
    sub: &EpsilonSubproblem,
    models: &[GpModel],
    bounds: &[(f64, f64)],
    opts: &CeiOptions,
    seed: u64,
) -> Result<CeiOptimum> {
    let m = sub.num_objectives();
    if models.len() < m {
        return Err(Error::Argument(format!("{} models for {} objectives", models.len(), m)));
    }
    sub.validate(m, models.len() - m)?;
    maximize_with(|x: &[f64]| posterior_moments(x, models, m), sub, bounds, opts, seed)
}

/// [`maximize_cei`] over an arbitrary moment function.
pub fn maximize_with<M>(
    moments: M,
    sub: &EpsilonSubproblem,
    bounds: &[(f64, f64)],
    opts: &CeiOptions,
    seed: u64,
) -> Result<CeiOptimum>
where
    M: Fn(&[f64]) -> Moments + Sync,
{
    if opts.n_starts == 0 || opts.n_probes == 0 {
        return Err(Error::Argument("cEI maximization needs at least one start and one probe".into()));
    }
    if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::Argument("cEI maximization needs non-empty bounds with lo < hi".into()));
    }
    let probes = design::sobol(opts.n_probes, bounds, seed);
    let probe_moments = opts.exec.map(&probes, |x| moments(x));
    let values: Vec<f64> = probe_moments.iter().map(|mo| sanitize(cei_from_moments(mo, sub))).collect();

    if values.iter().all(|&v| v <= 0.0) {
        let key = |i: usize| {
            let mo = &probe_moments[i];
            (log_feasibility(mo, sub), mo.objective_mean[sub.k])
        };
        let mut best = 0;
        let mut best_key = key(0);
        for i in 1..probes.len() {
            let ki = key(i);
            if ki.0 > best_key.0 || (ki.0 == best_key.0 && ki.1 > best_key.1) {
                best = i;
                best_key = ki;
            }
        }
        return Ok(CeiOptimum { x: probes[best].clone(), value: 0.0, fallback: true });
    }

    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(opts.n_starts);
    let refined = opts.exec.map(&order, |&i| {
        pattern_search(|x| sanitize(cei_from_moments(&moments(x), sub)), &probes[i], values[i], bounds, opts.pattern_iters)
    });
    let mut best = refined[0].clone();
    for r in &refined[1..] {
        if r.1 > best.1 {
            best = r.clone();
        }
    }
    Ok(CeiOptimum { x: best.0, value: best.1, fallback: false })
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() { 0.0 } else { v }
}

/// Compass search: try `±step` along each coordinate, take the first strict
/// improvement, halve every step when none is found.
fn pattern_search<F>(f: F, x0: &[f64], f0: f64, bounds: &[(f64, f64)], iters: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut step: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.1 * (hi - lo)).collect();
    let min_step: Vec<f64> = bounds.iter().map(|(lo, hi)| 1e-9 * (hi - lo)).collect();
    for _ in 0..iters {
        let mut improved = false;
        'coords: for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] = (x[d] + dir * step[d]).clamp(bounds[d].0, bounds[d].1);
                if y[d] == x[d] {
                    continue;
                }
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break 'coords;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step.iter().zip(&min_step).all(|(s, m)| s < m) {
                break;
            }
        }
    }
    (x, fx)
}
