use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use sasvi_core::oracle::verify_safety;
use sasvi_core::path::LaneResult;
use sasvi_core::removal::{profiles_csv, removal_profiles};
use sasvi_core::{
    build_anchor, generate_synthetic, lambda_max, load_instance, run_path, screen as screen_rule, solve,
    GridSpec, InstanceFormat, PathConfig, PathResult, ProblemInstance, RemovalThreshold, RuleKind,
    SolverConfig, SyntheticSpec,
};

use crate::{BenchArgs, Format, GenArgs, GridArgs, InstanceArgs, PathArgs, ScreenArgs, SolverArgs, SpecArgs, SureRemovalArgs};

/// Name used for the unscreened solver in bench output.
const UNSCREENED: &str = "unscreened";

fn synthetic_spec(a: &SpecArgs, seed: u64) -> SyntheticSpec {
    SyntheticSpec { n: a.n, p: a.p, p_bar: a.pbar, rho: a.rho, sigma: a.sigma, seed }
}

fn solver_config(a: &SolverArgs) -> SolverConfig {
    SolverConfig { gap_tol: a.gap_tol, max_sweeps: a.max_sweeps, ..SolverConfig::default() }
}

fn load(a: &InstanceArgs) -> Result<ProblemInstance> {
    let format = match a.format {
        Format::Raw => InstanceFormat::RawF64,
        Format::Csv => {
            let y_path = a.y.clone().context("--format csv needs --y <response file>")?;
            InstanceFormat::Csv { y_path }
        }
    };
    let inst = load_instance(&a.instance, format).with_context(|| format!("loading {}", a.instance.display()))?;
    Ok(if a.standardize { inst.standardized() } else { inst })
}

fn ratio(name: &str, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        bail!("--{name} is a fraction of lambda_max and must lie in (0, 1], got {r}");
    }
    Ok(r)
}

fn parse_rules(list: &str) -> Result<Vec<RuleKind>> {
    let mut rules = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let rule: RuleKind = name.parse()?;
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    Ok(rules)
}

fn path_config(g: &GridArgs, s: &SolverArgs) -> Result<PathConfig> {
    Ok(PathConfig {
        grid: GridSpec::Ratios { count: g.grid, lo: g.lo, hi: g.hi },
        rules: parse_rules(&g.rules)?,
        margin: g.margin,
        solver: solver_config(s),
        baseline_unscreened: g.baseline,
        fixed_anchor: g.fixed_anchor,
        threads: g.threads,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn gen(a: &GenArgs) -> Result<bool> {
    let data = generate_synthetic(&synthetic_spec(&a.spec, a.spec.seed))?;
    let inst = if a.standardize { data.instance.standardized() } else { data.instance.clone() };
    inst.require_nonzero_response()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let raw = a.out.join("instance.lsv");
    inst.save_raw(&raw).with_context(|| format!("writing {}", raw.display()))?;
    write(&a.out.join("instance.json"), &to_json(&data.metadata(a.standardize))?)?;
    println!("wrote {} (n={}, p={}, support {})", raw.display(), inst.n(), inst.p(), data.support.len());
    Ok(true)
}

#[derive(Serialize)]
struct ScreenSummary {
    rule: RuleKind,
    lambda_max: f64,
    lambda1: f64,
    lambda2: f64,
    p: usize,
    rejection_ratio: f64,
    needs_kkt_check: bool,
    discarded: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<Vec<usize>>,
}

pub fn screen(a: &ScreenArgs) -> Result<bool> {
    let (r1, r2) = (ratio("lambda1", a.lambda1)?, ratio("lambda2", a.lambda2)?);
    if r2 > r1 {
        bail!("--lambda2 ({r2}) must not exceed --lambda1 ({r1})");
    }
    let rule: RuleKind = a.rule.parse()?;
    let inst = load(&a.input)?;
    let cfg = solver_config(&a.solver);
    let lmax = lambda_max(&inst)?;
    let (l1, l2) = (r1 * lmax, r2 * lmax);
    let sol = solve(&inst, l1, None, &cfg)?;
    sol.require_certified()?;
    let anchor = build_anchor(&inst, &sol)?;
    let report = screen_rule(rule, &anchor, l2, a.margin)?;
    if let Some(out) = &a.out {
        write(out, &report.to_csv())?;
    }
    let violations = if a.verify {
        let reference = solve(&inst, l2, Some(&sol.beta), &cfg)?;
        Some(verify_safety(&report, &reference, cfg.gap_tol)?)
    } else {
        None
    };
    let ok = violations.as_ref().is_none_or(|v| v.is_empty());
    let summary = ScreenSummary {
        rule,
        lambda_max: lmax,
        lambda1: l1,
        lambda2: l2,
        p: report.p(),
        rejection_ratio: report.rejection_ratio(),
        needs_kkt_check: report.needs_kkt_check,
        discarded: report.discarded,
        violations,
    };
    print!("{}", to_json(&summary)?);
    Ok(ok)
}

#[derive(Serialize)]
struct LaneTiming {
    rule: RuleKind,
    steps_completed: usize,
    screen_ms: f64,
    solve_ms: f64,
    total_ms: f64,
    mean_rejection_ratio: f64,
    violations: usize,
    error: Option<String>,
}

#[derive(Serialize)]
struct BaselineCheck {
    total_ms: f64,
    max_dev_from_baseline: f64,
    limit: f64,
    passed: bool,
}

#[derive(Serialize)]
struct TimingReport {
    status: &'static str,
    n: usize,
    p: usize,
    lambda_max: f64,
    grid_points: usize,
    lanes: Vec<LaneTiming>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineCheck>,
    failures: Vec<String>,
}

fn lane_timing(lane: &LaneResult, p: usize) -> LaneTiming {
    let steps = &lane.steps;
    LaneTiming {
        rule: lane.rule,
        steps_completed: steps.len(),
        screen_ms: lane.total_screen_ms(),
        solve_ms: lane.total_solve_ms(),
        total_ms: lane.total_ms(),
        mean_rejection_ratio: steps.iter().map(|s| s.rejection_ratio(p)).sum::<f64>() / steps.len().max(1) as f64,
        violations: steps.iter().map(|s| s.violations).sum(),
        error: lane.error.clone(),
    }
}

fn baseline_check(result: &PathResult) -> Option<BaselineCheck> {
    let total_ms = result.baseline_total_ms()?;
    let limit = 10.0 * result.gap_tol;
    let max_dev = result
        .lanes
        .iter()
        .flat_map(|l| &l.steps)
        .filter_map(|s| s.max_dev_from_baseline)
        .fold(0.0, f64::max);
    let certified = result.baseline.iter().flatten().all(|s| s.certified);
    Some(BaselineCheck { total_ms, max_dev_from_baseline: max_dev, limit, passed: certified && max_dev <= limit })
}

pub fn path(a: &PathArgs) -> Result<bool> {
    let inst = load(&a.input)?;
    let cfg = path_config(&a.grid, &a.solver)?;
    let result = run_path(&inst, &cfg)?;
    let failures = result.check_failures();
    let ok = failures.is_empty();
    // failed runs keep what was computed, under names that say so
    let suffix = if ok { "" } else { ".partial" };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write(&a.out.join(format!("rejection{suffix}.csv")), &result.rejection_csv())?;
    write(&a.out.join(format!("path{suffix}.json")), &to_json(&result)?)?;
    let report = TimingReport {
        status: if ok { "complete" } else { "partial" },
        n: result.n,
        p: result.p,
        lambda_max: result.lambda_max,
        grid_points: result.lambdas.len(),
        lanes: result.lanes.iter().map(|l| lane_timing(l, result.p)).collect(),
        baseline: baseline_check(&result),
        failures,
    };
    write(&a.out.join(format!("timing{suffix}.json")), &to_json(&report)?)?;

    for lane in &report.lanes {
        println!(
            "{:<7} points {:>4}  mean rejection {:.4}  screen {:>10.3} ms  solve {:>10.3} ms  violations {}",
            lane.rule.name(),
            lane.steps_completed,
            lane.mean_rejection_ratio,
            lane.screen_ms,
            lane.solve_ms,
            lane.violations
        );
    }
    if let Some(b) = &report.baseline {
        println!(
            "baseline equivalence: unscreened {:.3} ms, max |beta - beta_unscreened| {:.3e} (limit {:.0e}) {}",
            b.total_ms,
            b.max_dev_from_baseline,
            b.limit,
            if b.passed { "PASS" } else { "FAIL" }
        );
    }
    for f in &report.failures {
        eprintln!("check failed: {f}");
    }
    Ok(ok)
}

pub fn sure_removal(a: &SureRemovalArgs) -> Result<bool> {
    let r1 = ratio("lambda1", a.lambda1)?;
    let inst = load(&a.input)?;
    let lmax = lambda_max(&inst)?;
    let sol = solve(&inst, r1 * lmax, None, &solver_config(&a.solver))?;
    sol.require_certified()?;
    let anchor = build_anchor(&inst, &sol)?;
    let profiles = removal_profiles(&anchor, a.margin)?;
    let csv = profiles_csv(&profiles);
    match &a.out {
        Some(out) => {
            write(out, &csv)?;
            let never = profiles.iter().filter(|p| p.lambda_s == RemovalThreshold::Never).count();
            let everywhere = profiles.iter().filter(|p| p.lambda_s == RemovalThreshold::Everywhere).count();
            println!(
                "{} features: {} with a finite threshold ({everywhere} removable everywhere), {never} never removable",
                profiles.len(),
                profiles.len() - never
            );
        }
        None => print!("{csv}"),
    }
    Ok(true)
}

#[derive(Serialize)]
struct BenchRow {
    rule: String,
    total_ms_mean: f64,
    total_ms_std: f64,
    trials: usize,
}

fn bench_row(rule: String, samples: &[f64]) -> BenchRow {
    let k = samples.len();
    let mean = samples.iter().sum::<f64>() / k as f64;
    let std = if k > 1 {
        (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else {
        0.0
    };
    BenchRow { rule, total_ms_mean: mean, total_ms_std: std, trials: k }
}

pub fn bench(a: &BenchArgs) -> Result<bool> {
    if a.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let cfg = path_config(&a.grid, &a.solver)?;
    let mut lane_ms: Vec<Vec<f64>> = vec![Vec::with_capacity(a.trials); cfg.rules.len()];
    let mut base_ms = Vec::with_capacity(a.trials);
    let mut ok = true;
    for t in 0..a.trials {
        let seed = a.spec.seed.wrapping_add(t as u64);
        let data = generate_synthetic(&synthetic_spec(&a.spec, seed))?;
        let result = run_path(&data.instance, &cfg)?;
        for f in result.check_failures() {
            eprintln!("trial {t} (seed {seed}): check failed: {f}");
            ok = false;
        }
        for (samples, rule) in lane_ms.iter_mut().zip(&cfg.rules) {
            samples.push(result.lane(*rule).map_or(f64::NAN, LaneResult::total_ms));
        }
        if let Some(ms) = result.baseline_total_ms() {
            base_ms.push(ms);
        }
    }
    let mut rows: Vec<BenchRow> =
        cfg.rules.iter().zip(&lane_ms).map(|(rule, samples)| bench_row(rule.to_string(), samples)).collect();
    if !base_ms.is_empty() {
        rows.push(bench_row(UNSCREENED.to_owned(), &base_ms));
    }
    let json = to_json(&rows)?;
    match &a.out {
        Some(out) => write(out, &json)?,
        None => print!("{json}"),
    }
    Ok(ok)
}
