//! Random Fourier feature approximations of GP sample paths.
//!
//! Frequencies come from the Matérn-5/2 spectral measure, a multivariate
//! Student-t with 5 degrees of freedom scaled by the inverse lengthscales.
//! A posterior path is an exact draw from the Bayesian linear regression
//! over those features, obtained by conditioning a prior weight draw on the
//! data (`w = w0 + Φᵀ(ΦΦᵀ + τI)⁻¹(y − Φw0 − ε)`).

use super::gp::{GpModel, Hyperparameters, Scaling};
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use std::f64::consts::PI;

const STUDENT_DOF: f64 = 5.0;

/// A cheap deterministic function approximating one GP draw.
#[derive(Debug, Clone)]
pub struct SampledPath {
    dim: usize,
    /// Row-major `F × d`, already divided by the lengthscales.
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    weights: Vec<f64>,
    amplitude: f64,
    scaling: Scaling,
}

impl SampledPath {
    pub fn num_features(&self) -> usize {
        self.phases.len()
    }

    pub fn feature_frequencies(&self) -> impl Iterator<Item = &[f64]> {
        self.frequencies.chunks(self.dim)
    }

    pub fn feature_phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn feature_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let z = self.scaling.input(x);
        let f: f64 = self
            .frequencies
            .chunks(self.dim)
            .zip(&self.phases)
            .zip(&self.weights)
            .map(|((w, b), a)| {
                let arg: f64 = w.iter().zip(&z).map(|(wi, zi)| wi * zi).sum::<f64>() + b;
                a * arg.cos()
            })
            .sum();
        self.scaling.y_mean + self.scaling.y_std * self.amplitude * f
    }
}

struct Features {
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    amplitude: f64,
}

impl Features {
    fn draw(hyper: &Hyperparameters, num_features: usize, rng: &mut ChaCha8Rng) -> Self {
        let d = hyper.lengthscales.len();
        let chi = ChiSquared::new(STUDENT_DOF).expect("positive dof");
        let mut frequencies = Vec::with_capacity(num_features * d);
        let mut phases = Vec::with_capacity(num_features);
        for _ in 0..num_features {
            let scale = (STUDENT_DOF / chi.sample(rng)).sqrt();
            for l in &hyper.lengthscales {
                let z: f64 = rng.sample(StandardNormal);
                frequencies.push(z * scale / l);
            }
            phases.push(rng.gen_range(0.0..2.0 * PI));
        }
        Features {
            frequencies,
            phases,
            amplitude: (2.0 * hyper.signal_variance / num_features as f64).sqrt(),
        }
    }

    /// Feature matrix `n × F` at unit-cube inputs.
    fn matrix(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let d = xs[0].len();
        let f = self.phases.len();
        DMatrix::from_fn(xs.len(), f, |i, j| {
            let w = &self.frequencies[j * d..(j + 1) * d];
            let arg: f64 = w.iter().zip(&xs[i]).map(|(a, b)| a * b).sum::<f64>() + self.phases[j];
            self.amplitude * arg.cos()
        })
    }
}

fn standard_normals(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Draws one approximate posterior path of `model`.
pub fn sample_path(model: &GpModel, num_features: usize, seed: u64) -> Result<SampledPath> {
    if num_features == 0 {
        return Err(Error::Argument("a sampled path needs at least one feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hyper = model.hyperparameters();
    let features = Features::draw(hyper, num_features, &mut rng);
    let phi = features.matrix(&model.train_x);
    let n = model.train_x.len();
    let w0 = standard_normals(num_features, &mut rng);
    let tau = hyper.noise_variance + model.jitter;
    let eps = standard_normals(n, &mut rng) * tau.sqrt();
    let y = DVector::from_column_slice(&model.train_y);
    let resid = y - &phi * &w0 - eps;

    let mut gram = &phi * phi.transpose();
    for i in 0..n {
        gram[(i, i)] += tau;
    }
    let chol = factor_gram(gram)?;
    let weights = w0 + phi.transpose() * chol.solve(&resid);

    Ok(SampledPath {
        dim: model.dim(),
        frequencies: features.frequencies,
        phases: features.phases,
        weights: weights.iter().copied().collect(),
        amplitude: features.amplitude,
        scaling: model.scaling.clone(),
    })
}

fn factor_gram(gram: DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = Cholesky::new(gram.clone()) {
        return Ok(c);
    }
    let mut jitter = super::gp::JITTER_START;
    while jitter <= super::gp::JITTER_MAX * (1.0 + 1e-9) {
        let mut g = gram.clone();
        for i in 0..g.nrows() {
            g[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(g) {
            return Ok(c);
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical("feature Gram matrix not positive definite".into()))
}

/// Draws a path from the zero-mean prior with the given hyperparameters,
/// on inputs already in unit-cube coordinates.
pub fn sample_prior_path(hyper: &Hyperparameters, num_features: usize, seed: u64) -> SampledPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = Features::draw(hyper, num_features, &mut rng);
    let d = hyper.lengthscales.len();
    SampledPath {
        dim: d,
        frequencies: features.frequencies,
        phases: features.phases,
        weights: standard_normals(num_features, &mut rng).iter().copied().collect(),
        amplitude: features.amplitude,
        scaling: Scaling { lo: vec![0.0; d], span: vec![1.0; d], y_mean: 0.0, y_std: 1.0 },
    }
}
