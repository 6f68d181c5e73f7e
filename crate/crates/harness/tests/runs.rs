use gapbo::metrics::dominates;
use gapbo::problems::{cache_path, lookup, FrontProvenance};
use gapbo_harness::reference::reference_front;
use gapbo_harness::run::{RECORDS_CSV, RECORDS_JSON};
use gapbo_harness::{record, run, run_to_dir, Algorithm, Format, RunConfig};
use std::fs;

fn light(problem: &str, budget: usize, seeds: &[u64]) -> RunConfig {
    let mut cfg = RunConfig { problem: problem.into(), budget, seeds: seeds.to_vec(), ..Default::default() };
    for (k, v) in [
        ("nsga_pop", "40"),
        ("nsga_gens", "15"),
        ("cei_starts", "3"),
        ("cei_probes", "64"),
        ("pattern_iters", "20"),
        ("rff_features", "128"),
        ("gp_restarts", "2"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg
}

#[test]
fn one_record_per_iteration_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = light("ZDT1", 30, &[1, 2]);
    cfg.init = Some(14);
    cfg.cache_dir = dir.path().into();
    let records = run(&cfg).unwrap();
    assert_eq!(records.iter().filter(|r| r.seed == 1).count(), 16);
    assert_eq!(records.iter().filter(|r| r.seed == 2).count(), 16);
    assert_eq!(records.last().unwrap().iteration, 16);
}

#[test]
fn coarser_metric_grid_keeps_the_final_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = light("ZDT1_D6", 25, &[0]);
    cfg.metrics_every = 5;
    cfg.algorithm = Algorithm::Sobol;
    cfg.cache_dir = dir.path().into();
    let its: Vec<usize> = run(&cfg).unwrap().iter().map(|r| r.iteration).collect();
    assert_eq!(its, vec![5, 10, 11]);
}

#[test]
fn baselines_report_every_metric() {
    let dir = tempfile::tempdir().unwrap();
    for algorithm in [Algorithm::Random, Algorithm::Sobol] {
        let mut cfg = light("ZDT2", 30, &[4]);
        cfg.algorithm = algorithm;
        cfg.cache_dir = dir.path().into();
        for r in run(&cfg).unwrap() {
            for v in [r.hv, r.igd, r.igd_plus, r.fill_distance, r.feasible_ratio] {
                assert!(v.is_finite());
            }
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = light("ZDT1_D6", 18, &[3, 4]);
    cfg.format = Format::Json;
    cfg.cache_dir = dir.path().join("fronts");
    cfg.out_dir = dir.path().join("a");
    run_to_dir(&cfg).unwrap();
    cfg.out_dir = dir.path().join("b");
    run_to_dir(&cfg).unwrap();
    for f in [RECORDS_CSV, RECORDS_JSON, "config.txt"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
    let text = fs::read_to_string(dir.path().join("a").join(RECORDS_CSV)).unwrap();
    assert_eq!(record::to_csv(&record::parse_csv(&text).unwrap()).unwrap(), text);
}

#[test]
fn constrained_runs_flag_iterations_without_feasible_points() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = light("CONSTR", 10, &[0]);
    cfg.mode = gapbo::stage::Mode::Constrained;
    cfg.cache_dir = dir.path().into();
    for r in run(&cfg).unwrap() {
        assert_eq!(r.has_flag("no_feasible"), r.feasible_ratio == 0.0);
        assert_eq!(r.hv.is_nan(), r.has_flag("no_feasible"));
    }
}

#[test]
fn analytic_fronts_write_no_cache() {
    let dir = tempfile::tempdir().unwrap();
    let zdt1 = lookup("ZDT1").unwrap();
    let f = reference_front(&zdt1, dir.path(), 100).unwrap();
    assert_eq!(f.provenance, FrontProvenance::Analytic);
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn evolutionary_fronts_are_cached_and_regenerated_when_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    let mw7 = lookup("MW7").unwrap();
    let path = cache_path(dir.path(), &mw7);
    let first = reference_front(&mw7, dir.path(), 100).unwrap();
    assert!(path.exists());
    assert_eq!(first.provenance, FrontProvenance::CachedEvolutionary);
    for a in &first.points {
        for b in &first.points {
            assert!(!dominates(a, b));
        }
    }
    let second = reference_front(&mw7, dir.path(), 100).unwrap();
    assert_eq!(first.points, second.points);
    fs::write(&path, "f1,f2\n0.1,oops\n").unwrap();
    let third = reference_front(&mw7, dir.path(), 100).unwrap();
    assert_eq!(third.points, first.points);
    assert_eq!(fs::read_to_string(&path).unwrap(), first.to_csv());
}
