use super::sort::{crowding_distance, sort_by_dominance};
use crate::metrics::dominates;
use crate::par::Execution;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Nsga2Config {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// SBX distribution index.
    pub eta_crossover: f64,
    /// Polynomial-mutation distribution index.
    pub eta_mutation: f64,
    /// Per-variable mutation probability; `1/d` when `None`.
    pub mutation_prob: Option<f64>,
    pub exec: Execution,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            pop_size: 300,
            generations: 50,
            crossover_prob: 0.9,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
            mutation_prob: None,
            exec: Execution::default(),
        }
    }
}

/// A set of evaluated individuals with their NSGA-II ranking.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Population {
    pub individuals: Vec<Vec<f64>>,
    pub objectives: Vec<Vec<f64>>,
    /// Total constraint violation, 0 when feasible.
    pub constraint_violation: Vec<f64>,
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    fn push(&mut self, x: Vec<f64>, y: Vec<f64>, v: f64) {
        self.individuals.push(x);
        self.objectives.push(y);
        self.constraint_violation.push(v);
    }

    fn subset(&self, idx: &[usize]) -> Population {
        Population {
            individuals: idx.iter().map(|&i| self.individuals[i].clone()).collect(),
            objectives: idx.iter().map(|&i| self.objectives[i].clone()).collect(),
            constraint_violation: idx.iter().map(|&i| self.constraint_violation[i]).collect(),
            rank: idx.iter().filter_map(|&i| self.rank.get(i).copied()).collect(),
            crowding: idx.iter().filter_map(|&i| self.crowding.get(i).copied()).collect(),
        }
    }

    fn quarantined(&self, i: usize) -> bool {
        self.constraint_violation[i].is_nan()
    }

    /// Deb's constrained domination; quarantined individuals never win.
    fn constrained_dominates(&self, i: usize, j: usize) -> bool {
        let (vi, vj) = (self.constraint_violation[i], self.constraint_violation[j]);
        match (vi == 0.0, vj == 0.0) {
            (true, true) => dominates(&self.objectives[i], &self.objectives[j]),
            (true, false) => true,
            (false, true) => false,
            (false, false) => vi < vj,
        }
    }

    /// Fronts under constrained domination, quarantined individuals last.
    fn fronts(&self) -> Vec<Vec<usize>> {
        let healthy: Vec<usize> = (0..self.len()).filter(|&i| !self.quarantined(i)).collect();
        let mut fronts: Vec<Vec<usize>> = sort_by_dominance(healthy.len(), |a, b| {
            self.constrained_dominates(healthy[a], healthy[b])
        })
        .into_iter()
        .map(|f| f.into_iter().map(|a| healthy[a]).collect())
        .collect();
        let sick: Vec<usize> = (0..self.len()).filter(|&i| self.quarantined(i)).collect();
        if !sick.is_empty() {
            fronts.push(sick);
        }
        fronts
    }

    fn assign_ranks(&mut self) -> Vec<Vec<usize>> {
        let fronts = self.fronts();
        self.rank = vec![0; self.len()];
        self.crowding = vec![0.0; self.len()];
        for (r, front) in fronts.iter().enumerate() {
            let objs: Vec<Vec<f64>> = front.iter().map(|&i| self.objectives[i].clone()).collect();
            for (&i, c) in front.iter().zip(crowding_distance(&objs)) {
                self.rank[i] = r;
                self.crowding[i] = c;
            }
        }
        fronts
    }

    fn better(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b] || (self.rank[a] == self.rank[b] && self.crowding[a] > self.crowding[b])
    }
}

fn sbx<R: Rng>(p1: &[f64], p2: &[f64], bounds: &[(f64, f64)], eta: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for (i, &(lb, ub)) in bounds.iter().enumerate() {
        if rng.gen::<f64>() > 0.5 || (p1[i] - p2[i]).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if p1[i] < p2[i] { (p1[i], p2[i]) } else { (p2[i], p1[i]) };
        let u: f64 = rng.gen();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lb) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (ub - y2) / (y2 - y1));
        let mut a = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lb, ub);
        let mut b = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lb, ub);
        if rng.gen::<bool>() {
            std::mem::swap(&mut a, &mut b);
        }
        c1[i] = a;
        c2[i] = b;
    }
    (c1, c2)
}

fn polynomial_mutation<R: Rng>(x: &mut [f64], bounds: &[(f64, f64)], eta: f64, prob: f64, rng: &mut R) {
    for (v, &(lb, ub)) in x.iter_mut().zip(bounds) {
        if rng.gen::<f64>() >= prob {
            continue;
        }
        let span = ub - lb;
        let d1 = (*v - lb) / span;
        let d2 = (ub - *v) / span;
        let u: f64 = rng.gen();
        let pow = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = (*v + dq * span).clamp(lb, ub);
    }
}

/// Evaluates a batch; non-finite outputs are quarantined with a NaN violation.
fn evaluate<F>(f: &F, xs: Vec<Vec<f64>>, exec: Execution, into: &mut Population)
where
    F: Fn(&[f64]) -> (Vec<f64>, f64) + Sync,
{
    let outs = exec.map(&xs, |x| f(x));
    for (x, (y, v)) in xs.into_iter().zip(outs) {
        let healthy = y.iter().all(|v| v.is_finite()) && !v.is_nan() && v != f64::INFINITY;
        let v = if healthy { v.max(0.0) } else { f64::NAN };
        into.push(x, y, v);
    }
}

/// Runs NSGA-II maximizing `f(x).0` subject to `f(x).1 == 0` (total
/// constraint violation) and returns the final first front.
pub fn nsga2<F>(f: F, bounds: &[(f64, f64)], cfg: &Nsga2Config, seed: u64) -> Result<Population>
where
    F: Fn(&[f64]) -> (Vec<f64>, f64) + Sync,
{
    nsga2_with_observer(f, bounds, cfg, seed, |_, _| {})
}

/// Like [`nsga2`], calling `observer(generation, population)` after each
/// survival step.
pub fn nsga2_with_observer<F, O>(
    f: F,
    bounds: &[(f64, f64)],
    cfg: &Nsga2Config,
    seed: u64,
    mut observer: O,
) -> Result<Population>
where
    F: Fn(&[f64]) -> (Vec<f64>, f64) + Sync,
    O: FnMut(usize, &Population),
{
    if cfg.pop_size < 2 || cfg.pop_size % 2 != 0 {
        return Err(Error::Argument(format!("population size must be even and ≥ 2, got {}", cfg.pop_size)));
    }
    if cfg.generations == 0 {
        return Err(Error::Argument("NSGA-II needs at least one generation".into()));
    }
    if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::Argument("NSGA-II needs non-empty bounds with lo < hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.pop_size;
    let mutation_prob = cfg.mutation_prob.unwrap_or(1.0 / bounds.len() as f64);

    let init: Vec<Vec<f64>> = (0..n)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect())
        .collect();
    let mut pop = Population::default();
    evaluate(&f, init, cfg.exec, &mut pop);
    pop.assign_ranks();

    for gen in 0..cfg.generations {
        let tournament = |rng: &mut ChaCha8Rng| {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if pop.better(b, a) { b } else { a }
        };
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_prob {
                sbx(&pop.individuals[p1], &pop.individuals[p2], bounds, cfg.eta_crossover, &mut rng)
            } else {
                (pop.individuals[p1].clone(), pop.individuals[p2].clone())
            };
            polynomial_mutation(&mut c1, bounds, cfg.eta_mutation, mutation_prob, &mut rng);
            polynomial_mutation(&mut c2, bounds, cfg.eta_mutation, mutation_prob, &mut rng);
            children.push(c1);
            children.push(c2);
        }

        let mut merged = pop.clone();
        evaluate(&f, children, cfg.exec, &mut merged);
        let fronts = merged.assign_ranks();
        let mut survivors = Vec::with_capacity(n);
        for front in fronts {
            if survivors.len() + front.len() <= n {
                survivors.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| {
                    merged.crowding[b]
                        .partial_cmp(&merged.crowding[a])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                survivors.extend(rest.into_iter().take(n - survivors.len()));
            }
            if survivors.len() == n {
                break;
            }
        }
        pop = merged.subset(&survivors);
        pop.assign_ranks();
        observer(gen, &pop);
    }

    let best: Vec<usize> = (0..pop.len()).filter(|&i| pop.rank[i] == 0).collect();
    Ok(pop.subset(&best))
}
