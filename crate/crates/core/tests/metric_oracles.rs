use gapbo::metrics::{fill_distance, hypervolume, igd, igd_plus, pareto_filter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Inclusion-exclusion over every subset of boxes `[ref, p]`.
fn hv_inclusion_exclusion(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut corner: Vec<f64> = vec![f64::INFINITY; r.len()];
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for j in 0..r.len() {
                    corner[j] = corner[j].min(p[j]);
                }
            }
        }
        let vol: f64 = corner.iter().zip(r).map(|(c, r)| (c - r).max(0.0)).product();
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * vol;
    }
    total
}

fn hv_monte_carlo(points: &[Vec<f64>], r: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let m = r.len();
    let hi: Vec<f64> = (0..m).map(|j| points.iter().map(|p| p[j]).fold(r[j], f64::max)).collect();
    let box_vol: f64 = hi.iter().zip(r).map(|(h, l)| h - l).product();
    let mut hits = 0usize;
    for _ in 0..samples {
        let z: Vec<f64> = (0..m).map(|j| rng.gen_range(r[j]..hi[j])).collect();
        if points.iter().any(|p| p.iter().zip(&z).all(|(a, b)| a >= b)) {
            hits += 1;
        }
    }
    box_vol * hits as f64 / samples as f64
}

#[test]
fn hypervolume_matches_inclusion_exclusion() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in 2..=4 {
        for _ in 0..30 {
            let n = rng.gen_range(1..=8);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let r = vec![-1.2; m];
            let exact = hv_inclusion_exclusion(&pts, &r);
            let got = hypervolume(&pts, &r);
            assert!((got - exact).abs() <= 1e-9 * exact.max(1.0), "m={m}: {got} vs {exact}");
        }
    }
}

#[test]
fn hypervolume_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in 2..=4 {
        for _ in 0..3 {
            let pts: Vec<Vec<f64>> = (0..8).map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let r = vec![0.0; m];
            let mc = hv_monte_carlo(&pts, &r, 400_000, &mut rng);
            let got = hypervolume(&pts, &r);
            assert!((got - mc).abs() / mc < 0.005, "m={m}: {got} vs {mc}");
        }
    }
}

#[test]
fn fill_distance_bounds_igd_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let m = rng.gen_range(2..=4);
        let obs: Vec<Vec<f64>> = (0..rng.gen_range(1..20)).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();
        let front: Vec<Vec<f64>> = (0..rng.gen_range(1..30)).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();
        let fd = fill_distance(&obs, &front).unwrap();
        let g = igd(&obs, &front).unwrap();
        assert!(fd >= g - 1e-12);
        assert!(g >= igd_plus(&obs, &front).unwrap() - 1e-12);
    }
}

#[test]
fn dominated_points_do_not_change_hypervolume() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen(), rng.gen(), rng.gen()]).collect();
    let r = [0.0; 3];
    assert!((hypervolume(&pts, &r) - hypervolume(&pareto_filter(&pts), &r)).abs() < 1e-12);
}
