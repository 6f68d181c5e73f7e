//! Box-constrained quasi-Newton ascent used for hyperparameter fitting.

use std::collections::VecDeque;

const MEMORY: usize = 6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of a bounded ascent run.
#[derive(Debug, Clone)]
pub(crate) struct Ascent {
    pub x: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
}

/// Maximizes `f` over the box `[lo, hi]` with projected L-BFGS and a
/// backtracking line search that only accepts improving steps, so the
/// returned value is never below the value at the clamped start.
///
/// `f` returns `None` where it cannot be evaluated; those points are
/// treated as infinitely bad.
pub(crate) fn maximize_in_box<F>(f: F, x0: &[f64], lo: &[f64], hi: &[f64], max_iter: usize) -> Ascent
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let clamp = |x: &mut [f64]| {
        for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
            *v = v.clamp(*l, *h);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let Some((mut fx, mut grad)) = f(&x) else {
        return Ascent { x, value: f64::NEG_INFINITY, start_value: f64::NEG_INFINITY };
    };
    let start_value = fx;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();

    for iter in 0..max_iter {
        // Components pinned at a bound with the gradient pushing outward stay fixed.
        let free: Vec<bool> = (0..x.len())
            .map(|i| !((x[i] <= lo[i] && grad[i] < 0.0) || (x[i] >= hi[i] && grad[i] > 0.0)))
            .collect();
        let g: Vec<f64> = grad.iter().zip(&free).map(|(g, &f)| if f { *g } else { 0.0 }).collect();
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-7 {
            break;
        }

        // Two-loop recursion on the ascent gradient.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y) in history.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push((a, rho));
        }
        if let Some((s, y)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y), (a, rho)) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().zip(&free).map(|(d, &f)| if f { *d } else { 0.0 }).collect();
        if dot(&dir, &g) <= 0.0 {
            dir = g.clone();
        }

        let mut step = if iter == 0 && history.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..30 {
            let mut cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            clamp(&mut cand);
            let moved: Vec<f64> = cand.iter().zip(&x).map(|(c, xi)| c - xi).collect();
            if dot(&moved, &moved) == 0.0 {
                break;
            }
            if let Some((fc, gc)) = f(&cand) {
                if fc.is_finite() && fc >= fx + 1e-4 * dot(&g, &moved) {
                    accepted = Some((cand, fc, gc, moved));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc, gc, s)) = accepted else { break };
        // Curvature pairs for the minimization of -f.
        let y: Vec<f64> = grad.iter().zip(&gc).map(|(old, new)| old - new).collect();
        if dot(&s, &y) > 1e-12 {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y));
        }
        let improvement = fc - fx;
        x = cand;
        fx = fc;
        grad = gc;
        if improvement < 1e-9 * (1.0 + fx.abs()) {
            break;
        }
    }
    Ascent { x, value: fx, start_value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum_of_a_quadratic() {
        let f = |x: &[f64]| {
            let v = -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 0.5).powi(2);
            Some((v, vec![-2.0 * (x[0] - 1.0), -20.0 * (x[1] + 0.5)]))
        };
        let r = maximize_in_box(f, &[3.0, 2.0], &[-5.0, -5.0], &[5.0, 5.0], 100);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 0.5).abs() < 1e-4, "{:?}", r.x);
        assert!(r.value >= r.start_value);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| Some((x[0] + x[1], vec![1.0, 1.0]));
        let r = maximize_in_box(f, &[0.0, 0.0], &[-1.0, -1.0], &[2.0, 0.5], 50);
        assert_eq!(r.x, vec![2.0, 0.5]);
    }
}
