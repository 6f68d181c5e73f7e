//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use gapbo::evo::{nsga2, non_dominated_sort, Nsga2Config};
use gapbo::metrics::{dominates, fill_distance, hypervolume, igd, igd_plus, pareto_filter};
use gapbo::problems::lookup;
use gapbo::stage::{Mode, ObjectiveSchedule, QueryRule, TargetRule};
use gapbo::surrogate::{sample_prior_path, FitOptions, GpModel, Hyperparameters, Matern52};
use gapbo_harness::reference::reference_front;
use gapbo_harness::run::{metric_front, run_seeds, SeedRun};
use gapbo_harness::{run_to_dir, Algorithm, RunConfig, RunRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn finals(records: &[RunRecord]) -> Vec<&RunRecord> {
    let last = records.iter().map(|r| r.iteration).max().unwrap_or(0);
    records.iter().filter(|r| r.iteration == last).collect()
}

fn execute(cfg: &RunConfig) -> Vec<SeedRun> {
    let problem = cfg.validate().expect("valid acceptance config");
    let front = metric_front(cfg, &problem).expect("reference front");
    run_seeds(cfg, &problem, &front).into_iter().map(|r| r.expect("run completes")).collect()
}

fn records_of(runs: &[SeedRun]) -> Vec<RunRecord> {
    runs.iter().flat_map(|r| r.records.clone()).collect()
}

fn config(problem: &str, mode: Mode, budget: usize, seeds: std::ops::Range<u64>, cache: &Path) -> RunConfig {
    RunConfig {
        problem: problem.into(),
        mode,
        budget,
        seeds: seeds.collect(),
        cache_dir: cache.into(),
        ..Default::default()
    }
}

fn hv_inclusion_exclusion(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut total = 0.0;
    for mask in 1u32..(1 << points.len()) {
        let mut corner = vec![f64::INFINITY; r.len()];
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                corner.iter_mut().zip(p).for_each(|(c, v)| *c = c.min(*v));
            }
        }
        let vol: f64 = corner.iter().zip(r).map(|(c, r)| (c - r).max(0.0)).product();
        total += if mask.count_ones() % 2 == 1 { vol } else { -vol };
    }
    total
}

fn hv_monte_carlo(points: &[Vec<f64>], r: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let hi: Vec<f64> = (0..r.len()).map(|j| points.iter().map(|p| p[j]).fold(r[j], f64::max)).collect();
    let vol: f64 = hi.iter().zip(r).map(|(h, l)| h - l).product();
    let hits = (0..samples)
        .filter(|_| {
            let z: Vec<f64> = r.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..*h)).collect();
            points.iter().any(|p| p.iter().zip(&z).all(|(a, b)| a >= b))
        })
        .count();
    vol * hits as f64 / samples as f64
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_ie: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    for m in 2..=3 {
        for _ in 0..40 {
            let n = rng.gen_range(1..=8);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let r = vec![0.0; m];
            let exact = hv_inclusion_exclusion(&pts, &r);
            worst_ie = worst_ie.max((hypervolume(&pts, &r) - exact).abs() / exact);
        }
        for _ in 0..3 {
            let pts: Vec<Vec<f64>> = (0..8).map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let r = vec![0.0; m];
            let mc = hv_monte_carlo(&pts, &r, 400_000, &mut rng);
            worst_mc = worst_mc.max((hypervolume(&pts, &r) - mc).abs() / mc);
        }
    }
    // Fixed fixtures with hand-computed values.
    let hv_ok = hypervolume(&[vec![1.0, 2.0], vec![2.0, 1.0]], &[0.0, 0.0]) == 3.0;
    let obs = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
    let front = vec![vec![0.0, 1.0], vec![3.0, 0.0]];
    let fixtures_ok = igd(&obs, &front).unwrap() == 2.0
        && fill_distance(&obs, &front).unwrap() == 3.0
        && igd_plus(&[vec![0.0, 0.0]], &[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap() == 1.5;
    let mut fd_ok = true;
    for _ in 0..100 {
        let m = rng.gen_range(2..=4);
        let o: Vec<Vec<f64>> = (0..rng.gen_range(1..15)).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();
        let f: Vec<Vec<f64>> = (0..rng.gen_range(1..25)).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();
        fd_ok &= fill_distance(&o, &f).unwrap() >= igd(&o, &f).unwrap() - 1e-12;
    }
    outcome(
        worst_ie <= 0.005 && worst_mc <= 0.005 && hv_ok && fixtures_ok && fd_ok,
        format!(
            "HV rel. error vs inclusion-exclusion {worst_ie:.2e}, vs Monte-Carlo {worst_mc:.2e} (limit 5e-3); \
             hand fixtures {}; FD >= IGD on 100 instances {}",
            hv_ok && fixtures_ok,
            fd_ok
        ),
    )
}

fn surrogate_checks() -> Outcome {
    // Noiseless interpolation.
    let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 10.0 * ((6.0 * x[0]).sin() + 0.5 * x[0]) + 3.0).collect();
    let opts = FitOptions { noise_range: (1e-6, 1e-6), ..Default::default() };
    let gp = GpModel::fit(&xs, &ys, &opts, 2).unwrap();
    let interp = xs.iter().zip(&ys).map(|(x, y)| (gp.predict(x).0 - y).abs() / gp.y_std()).fold(0.0, f64::max);

    // Random-feature prior covariance.
    let hyper = Hyperparameters { lengthscales: vec![0.4, 0.8], signal_variance: 1.3, noise_variance: 1e-6 };
    let kernel = Matern52::new(hyper.lengthscales.clone(), hyper.signal_variance);
    let (a, b) = ([0.3, 0.6], [0.5, 0.5]);
    let (mut saa, mut sab) = (0.0, 0.0);
    for s in 0..2000 {
        let p = sample_prior_path(&hyper, 512, s);
        saa += p.eval(&a).powi(2);
        sab += p.eval(&a) * p.eval(&b);
    }
    let cov_err = f64::max(
        (saa / 2000.0 - kernel.eval(&a, &a)).abs() / kernel.eval(&a, &a),
        (sab / 2000.0 - kernel.eval(&a, &b)).abs() / kernel.eval(&a, &b),
    );

    // Marginal-likelihood ascent on random 1-D datasets.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ascent_ok = true;
    for s in 0..20 {
        let n = rng.gen_range(3..15);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (rng.gen_range(1.0..8.0) * x[0]).sin() + rng.gen_range(-0.1..0.1)).collect();
        let gp = GpModel::fit(&xs, &ys, &FitOptions::default(), s).unwrap();
        ascent_ok &= gp.fit_trace().iter().all(|t| t.final_mll >= t.start_mll);
    }
    outcome(
        interp <= 1e-3 && cov_err <= 0.1 && ascent_ok,
        format!(
            "interpolation error {interp:.2e}·y_std (limit 1e-3); RFF covariance rel. error {cov_err:.3} (limit 0.1); \
             MLL ascent on 20 datasets {ascent_ok}"
        ),
    )
}

fn nsga_sanity() -> Outcome {
    let toy = |x: &[f64]| (vec![-x[0] * x[0], -(x[0] - 1.0).powi(2)], 0.0);
    let cfg = Nsga2Config { pop_size: 100, generations: 50, ..Default::default() };
    let good_seeds = (0..10)
        .filter(|&s| {
            let front = nsga2(toy, &[(-2.0, 2.0)], &cfg, s).unwrap();
            front.individuals.iter().all(|x| (-0.05..=1.05).contains(&x[0]))
        })
        .count();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sort_ok = true;
    for _ in 0..20 {
        let pts: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.gen_range(0..8) as f64, rng.gen_range(0..8) as f64]).collect();
        let fronts = non_dominated_sort(&pts);
        // Brute force: peel off the non-dominated layer repeatedly.
        let mut left: Vec<usize> = (0..pts.len()).collect();
        let mut brute = Vec::new();
        while !left.is_empty() {
            let layer: Vec<usize> =
                left.iter().copied().filter(|&i| !left.iter().any(|&j| dominates(&pts[j], &pts[i]))).collect();
            left.retain(|i| !layer.contains(i));
            brute.push(layer);
        }
        sort_ok &= fronts == brute;
    }
    outcome(
        good_seeds == 10 && sort_ok,
        format!("toy front inputs within [-0.05, 1.05] in {good_seeds}/10 seeds; sort equals brute force {sort_ok}"),
    )
}

fn stage_vs_random(cache: &Path) -> Outcome {
    let mut cfg = config("ZDT1_D6", Mode::Unconstrained, 80, 0..5, cache);
    cfg.init = Some(14);
    let stage = records_of(&execute(&cfg));
    cfg.algorithm = Algorithm::Random;
    let random = records_of(&execute(&cfg));
    let med = |rs: &[RunRecord], f: fn(&RunRecord) -> f64| median(finals(rs).into_iter().map(f).collect());
    let (s_igd, r_igd) = (med(&stage, |r| r.igd), med(&random, |r| r.igd));
    let (s_fd, r_fd) = (med(&stage, |r| r.fill_distance), med(&random, |r| r.fill_distance));
    outcome(
        s_igd <= 0.5 * r_igd && s_fd <= 0.5 * r_fd,
        format!(
            "median final IGD {s_igd:.4} vs random {r_igd:.4} (ratio {:.3}); FD {s_fd:.4} vs {r_fd:.4} (ratio {:.3}); limit 0.5",
            s_igd / r_igd,
            s_fd / r_fd
        ),
    )
}

fn constrained(cache: &Path) -> Outcome {
    let cfg = config("CONSTR", Mode::Constrained, 60, 0..5, cache);
    let problem = lookup("CONSTR").unwrap();
    let runs = execute(&cfg);
    let ref_hv = hypervolume(&reference_front(&problem, cache, 1000).unwrap().points, &problem.reference_point);
    let mut ratios = Vec::new();
    let mut hvs = Vec::new();
    let mut worst_g = f64::INFINITY;
    for run in &runs {
        let last = run.records.last().unwrap();
        ratios.push(last.feasible_ratio);
        hvs.push(last.hv);
        let mask = run.dataset.feasible_mask();
        let feasible: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let ys: Vec<Vec<f64>> = feasible.iter().map(|&i| run.dataset.ys[i].clone()).collect();
        for p in pareto_filter(&ys) {
            let i = feasible[ys.iter().position(|y| *y == p).unwrap()];
            worst_g = worst_g.min(run.dataset.cs[i].iter().cloned().fold(f64::INFINITY, f64::min));
        }
    }
    let (ratio, hv) = (median(ratios.clone()), median(hvs.clone()));
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_hv = hvs.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        ratio >= 0.6 && worst_g >= -1e-6 && hv >= 0.9 * ref_hv,
        format!(
            "median final feasible ratio {ratio:.3} (min {min_ratio:.3}, limit 0.6); min g on reported fronts {worst_g:.3e}; \
             median final HV {hv:.4} (min {min_hv:.4}) vs 0.9 × reference {:.4}",
            0.9 * ref_hv
        ),
    )
}

fn preference(cache: &Path) -> Outcome {
    let cfg = config("ZDT3", Mode::Preference, 60, 0..5, cache);
    let stage = records_of(&execute(&cfg));
    let in_roi = stage.iter().filter(|r| r.has_flag("roi_target")).count();
    let frac = in_roi as f64 / stage.len() as f64;
    let mut rcfg = cfg.clone();
    rcfg.algorithm = Algorithm::Random;
    let random = records_of(&execute(&rcfg));
    let s_igd = median(finals(&stage).iter().map(|r| r.igd).collect());
    let r_igd = median(finals(&random).iter().map(|r| r.igd).collect());
    outcome(
        frac >= 0.7 && s_igd <= 0.5 * r_igd,
        format!(
            "targets from the preference-constrained sampled front {in_roi}/{} ({:.0}%, limit 70%); \
             median final ROI IGD {s_igd:.4} vs random {r_igd:.4} (ratio {:.3}, limit 0.5)",
            stage.len(),
            100.0 * frac,
            s_igd / r_igd
        ),
    )
}

fn determinism(cache: &Path, scratch: &Path) -> Outcome {
    let mut cases = Vec::new();
    for (problem, mode, budget) in [("ZDT1_D6", Mode::Unconstrained, 24), ("CONSTR", Mode::Constrained, 16)] {
        let mut cfg = config(problem, mode, budget, 0..2, cache);
        cfg.format = gapbo_harness::Format::Json;
        let mut outputs = Vec::new();
        for rep in 0..2 {
            cfg.out_dir = scratch.join(format!("{problem}-{rep}"));
            run_to_dir(&cfg).unwrap();
            let bytes: Vec<Vec<u8>> = ["records.csv", "records.json", "config.txt"]
                .iter()
                .map(|f| std::fs::read(cfg.out_dir.join(f)).unwrap())
                .collect();
            outputs.push(bytes);
        }
        cases.push((problem, outputs[0] == outputs[1]));
    }
    let pass = cases.iter().all(|c| c.1);
    outcome(
        pass,
        cases.iter().map(|(p, same)| format!("{p}: {}", if *same { "identical" } else { "DIFFERENT" })).collect::<Vec<_>>().join("; "),
    )
}

fn ablations(cache: &Path) -> Outcome {
    let base = config("ZDT1", Mode::Unconstrained, 40, 0..3, cache);
    let variants: Vec<(&str, RunConfig)> = vec![
        ("default", base.clone()),
        ("direct_sample", {
            let mut c = base.clone();
            c.stage.query_rule = QueryRule::DirectSample;
            c
        }),
        ("random_lexicographic", {
            let mut c = base.clone();
            c.stage.target_rule = TargetRule::RandomLexicographic;
            c
        }),
        ("random_schedule", {
            let mut c = base.clone();
            c.stage.objective_schedule = ObjectiveSchedule::Random;
            c
        }),
        ("feasible_schedule", {
            let mut c = base.clone();
            c.stage.objective_schedule = ObjectiveSchedule::Feasible;
            c
        }),
    ];
    let mut medians = Vec::new();
    let mut completed = true;
    for (name, cfg) in &variants {
        let problem = cfg.validate().unwrap();
        let front = metric_front(cfg, &problem).unwrap();
        let runs: Vec<_> = run_seeds(cfg, &problem, &front);
        let ok = runs.iter().all(|r| r.as_ref().is_ok_and(|r| r.records.len() == 40 - 22));
        completed &= ok;
        let igds: Vec<f64> = runs.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.records.last().unwrap().igd).collect();
        medians.push((name, if igds.is_empty() { f64::NAN } else { median(igds) }));
    }
    let default = medians[0].1;
    let soft = medians[1..].iter().all(|(_, v)| default <= *v);
    outcome(
        completed,
        format!(
            "all variants completed {completed}; median final IGD {}; default best (soft, recorded only) {soft}",
            medians.iter().map(|(n, v)| format!("{n} {v:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn main() {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let cache = scratch.path().join("fronts");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("metric oracles", Box::new(metric_oracles)),
        ("surrogate correctness", Box::new(surrogate_checks)),
        ("NSGA-II sanity", Box::new(nsga_sanity)),
        ("unconstrained vs random baseline", Box::new(|| stage_vs_random(&cache))),
        ("constrained mode", Box::new(|| constrained(&cache))),
        ("preference mode", Box::new(|| preference(&cache))),
        ("determinism", Box::new(|| determinism(&cache, scratch.path()))),
        ("ablation plumbing", Box::new(|| ablations(&cache))),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = Duration::from_secs_f64(start.elapsed().as_secs_f64().round());
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {verdict} [{took:?}] {}", i + 1, result.detail);
        if !result.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
