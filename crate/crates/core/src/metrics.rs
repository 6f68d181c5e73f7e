//! Dominance utilities and Pareto-front quality indicators.
//!
//! All indicators assume maximization. Distance-based indicators
//! ([`igd`], [`igd_plus`], [`fill_distance`]) measure from each reference
//! front point to its nearest observation.

use crate::{Error, Result};
use std::cmp::Ordering;

/// `a` is no worse than `b` everywhere.
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    weakly_dominates(a, b) && a.iter().zip(b).any(|(x, y)| x > y)
}

/// Indices of the points no other point dominates; repeated points keep
/// only their first occurrence.
pub fn pareto_indices(points: &[Vec<f64>]) -> Vec<usize> {
    let mut keep = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates(q, p) {
                continue 'outer;
            }
        }
        if keep.iter().any(|&k: &usize| points[k] == *p) {
            continue;
        }
        keep.push(i);
    }
    keep
}

pub fn pareto_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    pareto_indices(points).into_iter().map(|i| points[i].clone()).collect()
}

/// Exact hypervolume dominated by `front` and bounded below by `reference`.
///
/// Points that do not strictly exceed the reference in every coordinate
/// contribute nothing.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> f64 {
    let shifted: Vec<Vec<f64>> = front
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(v, r)| v > r))
        .map(|p| p.iter().zip(reference).map(|(v, r)| v - r).collect())
        .collect();
    if shifted.is_empty() {
        return 0.0;
    }
    wfg(pareto_filter(&shifted))
}

/// Volume of the union of boxes `[0, p]`; `pts` must be non-dominated.
fn wfg(mut pts: Vec<Vec<f64>>) -> f64 {
    let m = pts[0].len();
    match (pts.len(), m) {
        (1, _) => pts[0].iter().product(),
        (_, 1) => pts.iter().map(|p| p[0]).fold(0.0, f64::max),
        (_, 2) => sweep_2d(&mut pts),
        _ => {
            pts.sort_by(|a, b| b[m - 1].partial_cmp(&a[m - 1]).unwrap_or(Ordering::Equal));
            let mut total = 0.0;
            for i in 0..pts.len() {
                let own: f64 = pts[i].iter().product();
                let limited: Vec<Vec<f64>> = pts[i + 1..]
                    .iter()
                    .map(|q| q.iter().zip(&pts[i]).map(|(a, b)| a.min(*b)).collect())
                    .collect();
                let overlap = if limited.is_empty() {
                    0.0
                } else {
                    wfg(pareto_filter(&limited))
                };
                total += own - overlap;
            }
            total
        }
    }
}

fn sweep_2d(pts: &mut [Vec<f64>]) -> f64 {
    pts.sort_by(|a, b| b[0].partial_cmp(&a[0]).unwrap_or(Ordering::Equal));
    let mut area = 0.0;
    let mut covered = 0.0;
    for p in pts.iter() {
        if p[1] > covered {
            area += p[0] * (p[1] - covered);
            covered = p[1];
        }
    }
    area
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// One-sided distance: how far the observation falls short of the
/// reference point, coordinate by coordinate.
fn shortfall(reference: &[f64], observed: &[f64]) -> f64 {
    reference
        .iter()
        .zip(observed)
        .map(|(r, o)| (r - o).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn nearest_distances(
    observations: &[Vec<f64>],
    ref_front: &[Vec<f64>],
    dist: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<Vec<f64>> {
    if observations.is_empty() || ref_front.is_empty() {
        return Err(Error::Argument("distance indicators need non-empty point sets".into()));
    }
    Ok(ref_front
        .iter()
        .map(|r| observations.iter().map(|o| dist(r, o)).fold(f64::INFINITY, f64::min))
        .collect())
}

/// Mean distance from each reference point to its nearest observation.
pub fn igd(observations: &[Vec<f64>], ref_front: &[Vec<f64>]) -> Result<f64> {
    let d = nearest_distances(observations, ref_front, euclidean)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// IGD with the dominance-aware one-sided distance.
pub fn igd_plus(observations: &[Vec<f64>], ref_front: &[Vec<f64>]) -> Result<f64> {
    let d = nearest_distances(observations, ref_front, shortfall)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Largest distance from a reference point to its nearest observation.
pub fn fill_distance(observations: &[Vec<f64>], ref_front: &[Vec<f64>]) -> Result<f64> {
    let d = nearest_distances(observations, ref_front, euclidean)?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

/// Observed objective vectors with their feasibility under the external
/// constraints (all feasible when the problem has none).
#[derive(Debug, Clone, Default)]
pub struct ParetoArchive {
    pub points: Vec<Vec<f64>>,
    pub feasible_mask: Vec<bool>,
}

impl ParetoArchive {
    pub fn new(points: Vec<Vec<f64>>, feasible_mask: Vec<bool>) -> Self {
        assert_eq!(points.len(), feasible_mask.len());
        ParetoArchive { points, feasible_mask }
    }

    pub fn unconstrained(points: Vec<Vec<f64>>) -> Self {
        let n = points.len();
        ParetoArchive { points, feasible_mask: vec![true; n] }
    }

    pub fn feasible_points(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .zip(&self.feasible_mask)
            .filter(|(_, &ok)| ok)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Non-dominated feasible observations.
    pub fn front(&self) -> Vec<Vec<f64>> {
        pareto_filter(&self.feasible_points())
    }

    pub fn feasible_ratio(&self) -> f64 {
        feasible_ratio(&self.feasible_mask)
    }
}

/// Fraction of `true` entries; 0 for an empty mask.
pub fn feasible_ratio(mask: &[bool]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    mask.iter().filter(|&&f| f).count() as f64 / mask.len() as f64
}
