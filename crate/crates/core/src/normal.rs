//! Standard normal density and distribution helpers.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `ln Φ(z)`, finite far into the lower tail where `cdf` underflows.
pub fn log_cdf(z: f64) -> f64 {
    if z > -30.0 {
        let c = cdf(z);
        if c > 0.0 {
            return c.ln();
        }
    }
    // Mills-ratio asymptotic expansion.
    let z2 = z * z;
    -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * PI).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
}
