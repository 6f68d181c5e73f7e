use super::kernel::Matern52;
use super::optimize::maximize_in_box;
use crate::par::Execution;
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Jitter added on the first factorization failure; escalated ×10 up to
/// [`JITTER_MAX`].
pub const JITTER_START: f64 = 1e-3;
pub const JITTER_MAX: f64 = 1e-1;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    /// In unit-cube input coordinates.
    pub lengthscales: Vec<f64>,
    /// In standardized target units.
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl Hyperparameters {
    fn to_log(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.lengthscales.iter().map(|l| l.ln()).collect();
        t.push(self.signal_variance.ln());
        t.push(self.noise_variance.ln());
        t
    }

    fn from_log(theta: &[f64]) -> Self {
        let d = theta.len() - 2;
        Hyperparameters {
            lengthscales: theta[..d].iter().map(|t| t.exp()).collect(),
            signal_variance: theta[d].exp(),
            noise_variance: theta[d + 1].exp(),
        }
    }

    fn kernel(&self) -> Matern52 {
        Matern52::new(self.lengthscales.clone(), self.signal_variance)
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Box used to rescale inputs to the unit cube; the data range when absent.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub restarts: usize,
    pub lengthscale_range: (f64, f64),
    pub signal_variance_range: (f64, f64),
    pub noise_range: (f64, f64),
    pub max_iters: usize,
    pub exec: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bounds: None,
            restarts: 8,
            lengthscale_range: (1e-3, 10.0),
            signal_variance_range: (1e-3, 10.0),
            noise_range: (1e-6, 1e-1),
            max_iters: 100,
            exec: Execution::default(),
        }
    }
}

impl FitOptions {
    pub fn with_bounds(bounds: &[(f64, f64)]) -> Self {
        FitOptions { bounds: Some(bounds.to_vec()), ..Default::default() }
    }
}

/// Affine maps between caller units and model units.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Scaling {
    pub lo: Vec<f64>,
    pub span: Vec<f64>,
    pub y_mean: f64,
    pub y_std: f64,
}

impl Scaling {
    fn new(xs: &[Vec<f64>], ys: &[f64], bounds: Option<&[(f64, f64)]>) -> Self {
        let d = xs[0].len();
        let (lo, span) = match bounds {
            Some(b) => (b.iter().map(|p| p.0).collect(), b.iter().map(|p| p.1 - p.0).collect()),
            None => {
                let lo: Vec<f64> = (0..d).map(|j| xs.iter().map(|x| x[j]).fold(f64::INFINITY, f64::min)).collect();
                let span = (0..d)
                    .map(|j| {
                        let hi = xs.iter().map(|x| x[j]).fold(f64::NEG_INFINITY, f64::max);
                        if hi - lo[j] > 1e-12 { hi - lo[j] } else { 1.0 }
                    })
                    .collect();
                (lo, span)
            }
        };
        let n = ys.len() as f64;
        let y_mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n;
        let y_std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        Scaling { lo, span, y_mean, y_std }
    }

    pub fn input(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.lo).zip(&self.span).map(|((v, l), s)| (v - l) / s).collect()
    }

    pub fn target(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_std
    }
}

fn covariance(kernel: &Matern52, xs: &[Vec<f64>], noise: f64) -> DMatrix<f64> {
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(&xs[i], &xs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += noise;
    }
    k
}

/// Cholesky factorization, escalating diagonal jitter on failure.
fn factor(k: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok((c, 0.0));
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut kj = k.clone();
        for i in 0..kj.nrows() {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(kj) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical(format!(
        "covariance matrix not positive definite with jitter up to {JITTER_MAX}"
    )))
}

struct Conditioned {
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
    mll: f64,
}

fn condition(xs: &[Vec<f64>], ys: &[f64], hyper: &Hyperparameters) -> Result<Conditioned> {
    let k = covariance(&hyper.kernel(), xs, hyper.noise_variance);
    let (chol, jitter) = factor(k)?;
    let y = DVector::from_column_slice(ys);
    let alpha = chol.solve(&y);
    let n = ys.len() as f64;
    let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let mll = -0.5 * y.dot(&alpha) - log_det_half - 0.5 * n * (2.0 * PI).ln();
    Ok(Conditioned { chol, alpha, jitter, mll })
}

/// Log marginal likelihood and its gradient in log-hyperparameter space.
fn mll_with_gradient(xs: &[Vec<f64>], ys: &[f64], theta: &[f64]) -> Option<(f64, Vec<f64>)> {
    let hyper = Hyperparameters::from_log(theta);
    let c = condition(xs, ys, &hyper).ok()?;
    if !c.mll.is_finite() {
        return None;
    }
    let n = ys.len();
    let d = hyper.lengthscales.len();
    let kinv = c.chol.inverse();
    let kernel = hyper.kernel();
    let mut grad = vec![0.0; d + 2];
    let mut dl = vec![0.0; d];
    for i in 0..n {
        for j in 0..=i {
            let w = c.alpha[i] * c.alpha[j] - kinv[(i, j)];
            let weight = if i == j { 0.5 * w } else { w };
            if i != j {
                kernel.log_lengthscale_grad(&xs[i], &xs[j], &mut dl);
                for (g, v) in grad[..d].iter_mut().zip(&dl) {
                    *g += weight * v;
                }
            }
            grad[d] += weight * kernel.eval(&xs[i], &xs[j]);
            if i == j {
                grad[d + 1] += weight * hyper.noise_variance;
            }
        }
    }
    Some((c.mll, grad))
}

/// Start value and optimized value of one fitting restart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartTrace {
    pub start_mll: f64,
    pub final_mll: f64,
}

/// A fitted, immutable GP posterior over one output.
#[derive(Debug, Clone)]
pub struct GpModel {
    hyper: Hyperparameters,
    kernel: Matern52,
    pub(crate) scaling: Scaling,
    pub(crate) train_x: Vec<Vec<f64>>,
    pub(crate) train_y: Vec<f64>,
    chol_l: DMatrix<f64>,
    alpha: Vec<f64>,
    pub(crate) jitter: f64,
    mll: f64,
    trace: Vec<RestartTrace>,
}

fn validate(xs: &[Vec<f64>], ys: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Data("a GP needs at least one observation".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Data(format!("{} inputs but {} targets", xs.len(), ys.len())));
    }
    let d = xs[0].len();
    if d == 0 || xs.iter().any(|x| x.len() != d) {
        return Err(Error::Data("inputs have inconsistent dimensions".into()));
    }
    if ys.iter().any(|y| !y.is_finite()) || xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite training data".into()));
    }
    Ok(())
}

impl GpModel {
    /// Fits hyperparameters by multi-start maximization of the log marginal
    /// likelihood on standardized targets.
    pub fn fit(xs: &[Vec<f64>], ys: &[f64], opts: &FitOptions, seed: u64) -> Result<GpModel> {
        validate(xs, ys)?;
        let scaling = Scaling::new(xs, ys, opts.bounds.as_deref());
        let tx: Vec<Vec<f64>> = xs.iter().map(|x| scaling.input(x)).collect();
        let ty: Vec<f64> = ys.iter().map(|&y| scaling.target(y)).collect();
        let d = tx[0].len();

        let mut lo = vec![opts.lengthscale_range.0.ln(); d];
        let mut hi = vec![opts.lengthscale_range.1.ln(); d];
        lo.push(opts.signal_variance_range.0.ln());
        hi.push(opts.signal_variance_range.1.ln());
        lo.push(opts.noise_range.0.ln());
        hi.push(opts.noise_range.1.ln());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let restarts = opts.restarts.max(1);
        let starts: Vec<Vec<f64>> = (0..restarts)
            .map(|r| {
                let mut start = if r == 0 {
                    Hyperparameters {
                        lengthscales: vec![0.5; d],
                        signal_variance: 1.0,
                        noise_variance: 1e-4,
                    }
                    .to_log()
                } else {
                    let mut t: Vec<f64> = (0..d).map(|_| rng.gen_range((0.02f64).ln()..(2.0f64).ln())).collect();
                    t.push(rng.gen_range((0.2f64).ln()..(3.0f64).ln()));
                    t.push(rng.gen_range((1e-6f64).ln()..(1e-2f64).ln()));
                    t
                };
                for ((v, l), h) in start.iter_mut().zip(&lo).zip(&hi) {
                    *v = v.clamp(*l, *h);
                }
                start
            })
            .collect();

        let runs = opts.exec.map(&starts, |s| {
            maximize_in_box(|t| mll_with_gradient(&tx, &ty, t), s, &lo, &hi, opts.max_iters)
        });
        let best = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.value.is_finite())
            .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                Some((_, v)) if v >= r.value => acc,
                _ => Some((i, r.value)),
            })
            .ok_or_else(|| Error::Numerical("no restart produced a finite likelihood".into()))?;
        let hyper = Hyperparameters::from_log(&runs[best.0].x);
        let trace = runs
            .iter()
            .map(|r| RestartTrace { start_mll: r.start_value, final_mll: r.value })
            .collect();
        let mut model = Self::assemble(scaling, tx, ty, hyper)?;
        model.trace = trace;
        Ok(model)
    }

    /// Conditions on data with fixed hyperparameters.
    pub fn with_hyperparameters(
        xs: &[Vec<f64>],
        ys: &[f64],
        hyper: Hyperparameters,
        bounds: Option<&[(f64, f64)]>,
    ) -> Result<GpModel> {
        validate(xs, ys)?;
        if hyper.lengthscales.len() != xs[0].len() {
            return Err(Error::Argument("lengthscale count differs from input dimension".into()));
        }
        let scaling = Scaling::new(xs, ys, bounds);
        let tx: Vec<Vec<f64>> = xs.iter().map(|x| scaling.input(x)).collect();
        let ty: Vec<f64> = ys.iter().map(|&y| scaling.target(y)).collect();
        Self::assemble(scaling, tx, ty, hyper)
    }

    fn assemble(scaling: Scaling, tx: Vec<Vec<f64>>, ty: Vec<f64>, hyper: Hyperparameters) -> Result<GpModel> {
        let c = condition(&tx, &ty, &hyper)?;
        Ok(GpModel {
            kernel: hyper.kernel(),
            hyper,
            scaling,
            train_x: tx,
            train_y: ty,
            chol_l: c.chol.l(),
            alpha: c.alpha.iter().copied().collect(),
            jitter: c.jitter,
            mll: c.mll,
            trace: Vec::new(),
        })
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn kernel(&self) -> &Matern52 {
        &self.kernel
    }

    pub fn y_mean(&self) -> f64 {
        self.scaling.y_mean
    }

    pub fn y_std(&self) -> f64 {
        self.scaling.y_std
    }

    pub fn dim(&self) -> usize {
        self.hyper.lengthscales.len()
    }

    pub fn num_observations(&self) -> usize {
        self.train_x.len()
    }

    /// Jitter that was needed to factor the training covariance (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Prior variance of the latent function in original units.
    pub fn prior_variance(&self) -> f64 {
        self.hyper.signal_variance * self.scaling.y_std.powi(2)
    }

    /// MLL of the training data at the fitted hyperparameters.
    pub fn training_mll(&self) -> f64 {
        self.mll
    }

    /// Start and final MLL of every restart of the last fit.
    pub fn fit_trace(&self) -> &[RestartTrace] {
        &self.trace
    }

    /// Latent posterior mean and variance at one input, in original units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let z = self.scaling.input(x);
        let n = self.train_x.len();
        let mut v: Vec<f64> = self.train_x.iter().map(|t| self.kernel.eval(&z, t)).collect();
        let mean: f64 = v.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        // Forward substitution L v = k*.
        for i in 0..n {
            let mut s = v[i];
            for j in 0..i {
                s -= self.chol_l[(i, j)] * v[j];
            }
            v[i] = s / self.chol_l[(i, i)];
        }
        let var = (self.hyper.signal_variance - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        (
            self.scaling.y_mean + self.scaling.y_std * mean,
            var * self.scaling.y_std.powi(2),
        )
    }

    pub fn posterior(&self, xs: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        xs.iter().map(|x| self.predict(x)).unzip()
    }

    /// Gaussian log marginal likelihood of `(xs, ys)` under this model's
    /// hyperparameters, input scaling, and target standardization.
    pub fn log_marginal_likelihood(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
        validate(xs, ys)?;
        if xs[0].len() != self.dim() {
            return Err(Error::Argument("input dimension differs from the model".into()));
        }
        let tx: Vec<Vec<f64>> = xs.iter().map(|x| self.scaling.input(x)).collect();
        let ty: Vec<f64> = ys.iter().map(|&y| self.scaling.target(y)).collect();
        Ok(condition(&tx, &ty, &self.hyper)?.mll)
    }
}
