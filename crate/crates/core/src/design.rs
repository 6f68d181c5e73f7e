//! Space-filling and uniform designs over a box.

use rand::Rng;

/// `n` points of an Owen-scrambled Sobol sequence mapped into `bounds`.
///
/// Different `seed`s give independent scramblings of the same sequence.
pub fn sobol(n: usize, bounds: &[(f64, f64)], seed: u64) -> Vec<Vec<f64>> {
    sobol_range(0, n, bounds, seed)
}

/// Points `start..start + n` of the scrambled sequence.
pub fn sobol_range(start: usize, n: usize, bounds: &[(f64, f64)], seed: u64) -> Vec<Vec<f64>> {
    assert!(bounds.len() <= 256, "scrambled Sobol supports at most 256 dimensions");
    let scramble = (seed ^ (seed >> 32)) as u32;
    (start..start + n)
        .map(|i| {
            bounds
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| {
                    let u = sobol_burley::sample(i as u32, d as u32, scramble) as f64;
                    lo + u * (hi - lo)
                })
                .collect()
        })
        .collect()
}

pub fn uniform<R: Rng>(n: usize, bounds: &[(f64, f64)], rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        .collect()
}
