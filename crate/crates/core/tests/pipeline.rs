//! End-to-end runs: instance files, solver, screening lanes and exports.

use sasvi_core::path::LaneResult;
use sasvi_core::{
    generate_synthetic, lambda_max, load_instance, run_path, GridSpec, InstanceFormat, PathConfig, PathResult,
    ProblemInstance, RuleKind, SolverConfig, SyntheticSpec,
};
use tempfile::TempDir;

fn instance(seed: u64) -> ProblemInstance {
    generate_synthetic(&SyntheticSpec { n: 40, p: 150, p_bar: 8, rho: 0.5, sigma: 0.1, seed }).unwrap().instance
}

fn config(count: usize) -> PathConfig {
    PathConfig { grid: GridSpec::Ratios { count, lo: 0.05, hi: 1.0 }, ..PathConfig::default() }
}

fn discards(r: &PathResult) -> Vec<Vec<Vec<usize>>> {
    r.lanes.iter().map(|l| l.steps.iter().map(|s| s.kept_by_rule.clone()).collect()).collect()
}

#[test]
fn default_grid_spans_lambda_max_to_five_percent() {
    let inst = instance(1);
    let lmax = lambda_max(&inst).unwrap();
    let r = run_path(&inst, &PathConfig::default()).unwrap();
    assert_eq!(r.lambdas.len(), 100);
    assert_eq!(r.lambdas[0], lmax);
    assert!((r.lambdas[99] - 0.05 * lmax).abs() <= 1e-15 * lmax);
    assert!(r.lambdas.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(r.lanes.len(), 4);
    assert!(r.all_checks_passed(), "{:?}", r.check_failures());
    for lane in &r.lanes {
        assert_eq!(lane.steps.len(), 100);
        // nothing is active at λmax, so the exact anchor discards all but the argmax ties
        assert!(lane.steps[0].rejection_ratio(r.p) >= 0.99, "{}", lane.rule);
    }
}

#[test]
fn single_point_grid_at_lambda_max() {
    let inst = instance(2);
    let cfg = PathConfig { grid: GridSpec::Ratios { count: 1, lo: 1.0, hi: 1.0 }, ..PathConfig::default() };
    let r = run_path(&inst, &cfg).unwrap();
    assert_eq!(r.lambdas, vec![r.lambda_max]);
    for lane in &r.lanes {
        assert_eq!(lane.steps.len(), 1);
        assert_eq!(lane.steps[0].gap, 0.0);
    }
}

#[test]
fn screened_lanes_match_unscreened_solutions() {
    let inst = instance(3);
    let r = run_path(&inst, &PathConfig { baseline_unscreened: true, ..config(40) }).unwrap();
    assert!(r.all_checks_passed(), "{:?}", r.check_failures());
    let base = r.baseline.as_ref().unwrap();
    assert_eq!(base.len(), 40);
    for lane in &r.lanes {
        for (s, b) in lane.steps.iter().zip(base) {
            assert_eq!(s.violations, 0);
            assert!(s.max_dev_from_baseline.unwrap() <= 10.0 * r.gap_tol);
            // discarded features are never in the unscreened support
            assert!(s.survivors >= b.active, "{} at {}", lane.rule, s.lambda);
        }
    }
}

#[test]
fn runs_are_deterministic_and_thread_count_does_not_change_discards() {
    let inst = instance(4);
    let a = run_path(&inst, &config(30)).unwrap();
    let b = run_path(&inst, &config(30)).unwrap();
    let c = run_path(&inst, &PathConfig { threads: 4, ..config(30) }).unwrap();
    assert_eq!(discards(&a), discards(&b));
    assert_eq!(discards(&a), discards(&c));
    assert_eq!(a.lambdas, c.lambdas);
}

#[test]
fn fixed_anchor_is_safe_and_weaker() {
    let inst = instance(5);
    let seq = run_path(&inst, &PathConfig { rules: vec![RuleKind::Sasvi], ..config(30) }).unwrap();
    let fixed = run_path(
        &inst,
        &PathConfig { rules: vec![RuleKind::Sasvi], fixed_anchor: true, baseline_unscreened: true, ..config(30) },
    )
    .unwrap();
    assert!(fixed.all_checks_passed(), "{:?}", fixed.check_failures());
    let total = |r: &PathResult| r.lanes[0].steps.iter().map(|s| s.discarded).sum::<usize>();
    assert!(total(&fixed) <= total(&seq));
}

#[test]
fn uncertified_solve_aborts_the_lane_with_a_diagnostic() {
    let inst = instance(6);
    let cfg = PathConfig {
        rules: vec![RuleKind::Sasvi, RuleKind::Dpp],
        solver: SolverConfig { max_sweeps: 1, ..SolverConfig::default() },
        ..config(10)
    };
    let r = run_path(&inst, &cfg).unwrap();
    assert!(!r.all_checks_passed());
    for lane in &r.lanes {
        let err = lane.error.as_deref().expect("lane error recorded");
        assert!(err.contains("uncertified"), "{err}");
        // λmax is exact; the next point fails and stops the lane
        assert!(lane.steps.len() < 10);
        assert!(!lane.steps.last().unwrap().certified);
    }
    assert!(r.check_failures().iter().any(|f| f.contains("lane aborted")));
}

#[test]
fn results_export_to_csv_and_json() {
    let inst = instance(7);
    let r = run_path(&inst, &PathConfig { baseline_unscreened: true, ..config(10) }).unwrap();
    let csv = r.rejection_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rule,lambda_ratio,rejection_ratio,screen_ms,solve_ms,violations"));
    assert_eq!(lines.count(), 40);
    let json = serde_json::to_string(&r).unwrap();
    let back: PathResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back.lambdas, r.lambdas);
    assert_eq!(discards(&back), discards(&r));
    let lane: &LaneResult = back.lane(RuleKind::Strong).unwrap();
    assert_eq!(lane.steps.len(), 10);
    assert!(back.baseline_total_ms().is_some());
}

#[test]
fn instance_files_round_trip_into_identical_paths() {
    let dir = TempDir::new().unwrap();
    let inst = instance(8);
    let raw = dir.path().join("inst.lsv");
    inst.save_raw(&raw).unwrap();
    let (x_csv, y_csv) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
    inst.save_csv(&x_csv, &y_csv).unwrap();
    let from_raw = load_instance(&raw, InstanceFormat::RawF64).unwrap();
    let from_csv = load_instance(&x_csv, InstanceFormat::Csv { y_path: y_csv }).unwrap();
    assert_eq!(from_raw.data(), inst.data());
    assert_eq!(from_csv.data(), inst.data());
    assert_eq!(from_csv.y(), inst.y());
    let cfg = config(15);
    let (a, b) = (run_path(&inst, &cfg).unwrap(), run_path(&from_csv, &cfg).unwrap());
    assert_eq!(discards(&a), discards(&b));
}
