const SQRT5: f64 = 2.236_067_977_499_79;

/// Matérn-5/2 kernel with one lengthscale per input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Matern52 {
    pub lengthscales: Vec<f64>,
    pub variance: f64,
}

impl Matern52 {
    pub fn new(lengthscales: Vec<f64>, variance: f64) -> Self {
        Matern52 { lengthscales, variance }
    }

    fn scaled_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| ((x - y) / l).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Covariance as a function of the lengthscale-scaled distance.
    pub fn of_distance(&self, r: f64) -> f64 {
        let s = SQRT5 * r;
        self.variance * (1.0 + s + s * s / 3.0) * (-s).exp()
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.of_distance(self.scaled_distance(a, b))
    }

    /// Derivatives of `k(a, b)` with respect to each log-lengthscale,
    /// written into `out`.
    pub(crate) fn log_lengthscale_grad(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let r = self.scaled_distance(a, b);
        let s = SQRT5 * r;
        let common = self.variance * (5.0 / 3.0) * (1.0 + s) * (-s).exp();
        for (d, o) in out.iter_mut().enumerate() {
            let u = (a[d] - b[d]) / self.lengthscales[d];
            *o = common * u * u;
        }
    }
}
