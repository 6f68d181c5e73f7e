//! Benchmark definitions. Formulas are the usual minimization forms; the
//! returned objective vectors are their negations.

use super::{Evaluation, PreferenceBox, ProblemSpec};
use crate::metrics::pareto_filter;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

const FRONT_SEED: u64 = 0x5eed_f007;

fn zdt_g(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 1.0;
    }
    1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| lo + step * i as f64)
}

pub(super) fn zdt1(d: usize, name: &str) -> ProblemSpec {
    ProblemSpec::new(
        name,
        2,
        0,
        vec![(0.0, 1.0); d],
        vec![-11.0, -11.0],
        Arc::new(|x: &[f64]| {
            let f1 = x[0];
            let g = zdt_g(x);
            let f2 = g * (1.0 - (f1 / g).sqrt());
            Evaluation { y: vec![-f1, -f2], g: vec![] }
        }),
    )
    .expect("static definition")
    .with_front(Arc::new(|n| {
        linspace(0.0, 1.0, n).map(|f1| vec![-f1, -(1.0 - f1.sqrt())]).collect()
    }))
}

pub(super) fn zdt2(d: usize) -> ProblemSpec {
    ProblemSpec::new(
        "ZDT2",
        2,
        0,
        vec![(0.0, 1.0); d],
        vec![-11.0, -11.0],
        Arc::new(|x: &[f64]| {
            let f1 = x[0];
            let g = zdt_g(x);
            let f2 = g * (1.0 - (f1 / g).powi(2));
            Evaluation { y: vec![-f1, -f2], g: vec![] }
        }),
    )
    .expect("static definition")
    .with_front(Arc::new(|n| {
        linspace(0.0, 1.0, n).map(|f1| vec![-f1, -(1.0 - f1 * f1)]).collect()
    }))
}

fn zdt3_f2(f1: f64, g: f64) -> f64 {
    g * (1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * PI * f1).sin())
}

pub(super) fn zdt3() -> ProblemSpec {
    let roi = PreferenceBox::from_corners(&[-1.0, -1.0], &[-0.2, -0.4]).expect("static box");
    ProblemSpec::new(
        "ZDT3",
        2,
        0,
        vec![(0.0, 1.0); 2],
        vec![-1.0, -1.0],
        Arc::new(|x: &[f64]| {
            let f1 = x[0];
            let f2 = zdt3_f2(f1, zdt_g(x));
            Evaluation { y: vec![-f1, -f2], g: vec![] }
        }),
    )
    .expect("static definition")
    .with_preference(roi)
    .expect("static box")
    .with_front(Arc::new(|n| {
        // The front is five disjoint pieces of the g = 1 curve covering
        // roughly 31% of f1 in [0, 0.852]; oversample then filter.
        let grid = (n.max(2) as f64 / 0.3).ceil() as usize;
        let pts: Vec<Vec<f64>> = linspace(0.0, 0.852, grid)
            .map(|f1| vec![-f1, -zdt3_f2(f1, 1.0)])
            .collect();
        pareto_filter(&pts)
    }))
}

fn dtlz2_objectives(x: &[f64], m: usize) -> Vec<f64> {
    let g: f64 = x[m - 1..].iter().map(|v| (v - 0.5).powi(2)).sum();
    spherical(&x[..m - 1], 1.0 + g)
}

/// Point on a sphere of `radius` in the positive orthant from `m - 1` angles in [0, 1].
fn spherical(angles: &[f64], radius: f64) -> Vec<f64> {
    let m = angles.len() + 1;
    (0..m)
        .map(|j| {
            let mut v = radius;
            for a in &angles[..m - 1 - j] {
                v *= (a * FRAC_PI_2).cos();
            }
            if j > 0 {
                v *= (angles[m - 1 - j] * FRAC_PI_2).sin();
            }
            v
        })
        .collect()
}

pub(super) fn dtlz2() -> ProblemSpec {
    let m = 5;
    let table = vec![-0.8442, -0.8999, -0.8358, -0.8710, -0.8553];
    let roi = PreferenceBox::from_corners(&table, &[-0.2; 5]).expect("static box");
    ProblemSpec::new(
        "DTLZ2",
        m,
        0,
        vec![(0.0, 1.0); 6],
        table,
        Arc::new(move |x: &[f64]| Evaluation {
            y: dtlz2_objectives(x, m).into_iter().map(|v| -v).collect(),
            g: vec![],
        }),
    )
    .expect("static definition")
    .with_preference(roi)
    .expect("static box")
    .with_front(Arc::new(move |n| {
        let mut rng = ChaCha8Rng::seed_from_u64(FRONT_SEED);
        (0..n)
            .map(|_| {
                let z: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                z.iter().map(|v| -v / norm).collect()
            })
            .collect()
    }))
}

fn dtlz7_shape(f: f64) -> f64 {
    f * (1.0 + (3.0 * PI * f).sin())
}

/// Whether `f` lies in one of the optimal intervals of a DTLZ7 position
/// variable, i.e. the shape term attains its running maximum there.
fn dtlz7_optimal(f: f64) -> bool {
    const STEPS: usize = 4096;
    let u = dtlz7_shape(f);
    (0..STEPS)
        .map(|i| f * i as f64 / STEPS as f64)
        .all(|fp| dtlz7_shape(fp) <= u + 1e-12)
}

pub(super) fn dtlz7() -> ProblemSpec {
    let m = 5;
    ProblemSpec::new(
        "DTLZ7",
        m,
        0,
        vec![(0.0, 1.0); 6],
        vec![-1.1; 5],
        Arc::new(move |x: &[f64]| {
            let k = x.len() - m + 1;
            let g = 1.0 + 9.0 * x[m - 1..].iter().sum::<f64>() / k as f64;
            let h = m as f64 - x[..m - 1].iter().map(|&f| dtlz7_shape(f) / (1.0 + g)).sum::<f64>();
            let mut y: Vec<f64> = x[..m - 1].iter().map(|v| -v).collect();
            y.push(-(1.0 + g) * h);
            Evaluation { y, g: vec![] }
        }),
    )
    .expect("static definition")
    .with_front(Arc::new(move |n| {
        let mut rng = ChaCha8Rng::seed_from_u64(FRONT_SEED);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let f: Vec<f64> = (0..m - 1).map(|_| rng.gen::<f64>()).collect();
            if !f.iter().all(|&v| dtlz7_optimal(v)) {
                continue;
            }
            let h = m as f64 - f.iter().map(|&v| dtlz7_shape(v) / 2.0).sum::<f64>();
            let mut y: Vec<f64> = f.iter().map(|v| -v).collect();
            y.push(-2.0 * h);
            out.push(y);
        }
        out
    }))
}

pub(super) fn mw7() -> ProblemSpec {
    ProblemSpec::new(
        "MW7",
        2,
        2,
        vec![(0.0, 1.0); 4],
        vec![-1.2, -1.2],
        Arc::new(|x: &[f64]| {
            let g = 1.0
                + x.windows(2)
                    .map(|w| 2.0 * (w[1] + (w[0] - 0.5).powi(2) - 1.0).powi(2))
                    .sum::<f64>();
            let f1 = x[0];
            let f2 = g * (1.0 - (f1 / g).powi(2)).max(0.0).sqrt();
            let angle = f2.atan2(f1);
            let s4 = (4.0 * angle).sin();
            let r2 = f1 * f1 + f2 * f2;
            // Feasible band between two wavy circles.
            let c1 = (1.2 + (0.4 * s4.powi(16)).abs()).powi(2) - r2;
            let c2 = r2 - (1.15 - 0.2 * s4.powi(8)).powi(2);
            Evaluation { y: vec![-f1, -f2], g: vec![c1, c2] }
        }),
    )
    .expect("static definition")
}

pub(super) fn constr() -> ProblemSpec {
    ProblemSpec::new(
        "CONSTR",
        2,
        2,
        vec![(0.1, 1.0), (0.0, 5.0)],
        vec![-10.0, -10.0],
        Arc::new(|x: &[f64]| {
            let f1 = x[0];
            let f2 = (1.0 + x[1]) / x[0];
            let g1 = x[1] + 9.0 * x[0] - 6.0;
            let g2 = -x[1] + 9.0 * x[0] - 1.0;
            Evaluation { y: vec![-f1, -f2], g: vec![g1, g2] }
        }),
    )
    .expect("static definition")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dtlz7_intervals_match_known_boundaries() {
        assert!(dtlz7_optimal(0.0));
        assert!(dtlz7_optimal(0.25));
        assert!(!dtlz7_optimal(0.26));
        assert!(!dtlz7_optimal(0.62));
        assert!(dtlz7_optimal(0.64));
        assert!(dtlz7_optimal(0.85));
        assert!(!dtlz7_optimal(0.87));
    }

    #[test]
    fn spherical_is_unit_norm() {
        let p = spherical(&[0.2, 0.4, 0.9, 0.1], 1.0);
        assert_abs_diff_eq!(p.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn mw7_distance_term() {
        let p = mw7();
        let e = p.evaluate(&[0.6, 0.75, 0.5, 0.75]).unwrap();
        let g = 1.0 + 2.0 * (0.75f64 + 0.01 - 1.0).powi(2) + 2.0 * (0.5f64 + 0.0625 - 1.0).powi(2)
            + 2.0 * (0.75f64 + 0.0 - 1.0).powi(2);
        assert_abs_diff_eq!(e.y[0], -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(e.y[1], -(g * (1.0 - (0.6 / g).powi(2)).sqrt()), epsilon = 1e-12);
    }
}
