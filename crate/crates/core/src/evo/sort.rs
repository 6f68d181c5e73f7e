use crate::metrics::dominates;
use std::cmp::Ordering;

/// Fast non-dominated sort over an arbitrary strict dominance relation on
/// `0..n`. Fronts are returned best first, indices ascending within each.
pub fn sort_by_dominance<D>(n: usize, dominates: D) -> Vec<Vec<usize>>
where
    D: Fn(usize, usize) -> bool,
{
    let mut dominated_by_count = vec![0usize; n];
    let mut dominated_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(i, j) {
                dominated_sets[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(j, i) {
                dominated_sets[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_sets[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Partitions `points` into Pareto fronts under maximization.
pub fn non_dominated_sort(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    sort_by_dominance(points.len(), |i, j| dominates(&points[i], &points[j]))
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// NSGA-II crowding distance of each point within one front. Boundary
/// points of every objective get `f64::INFINITY`.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        // Ties fall back to the whole vector so the result does not depend
        // on input order.
        order.sort_by(|&a, &b| {
            front[a][k]
                .partial_cmp(&front[b][k])
                .unwrap_or(Ordering::Equal)
                .then_with(|| lexicographic(&front[a], &front[b]))
                .then(a.cmp(&b))
        });
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 || !span.is_finite() {
            continue;
        }
        for w in 1..n - 1 {
            let idx = order[w];
            if dist[idx].is_finite() {
                dist[idx] += (front[order[w + 1]][k] - front[order[w - 1]][k]) / span;
            }
        }
    }
    dist
}
