//! Sequential screening along a regularization path.
//!
//! Each rule runs in its own lane: the certified solution at `λ_k` becomes the
//! anchor that screens `λ_{k+1}`, the reduced problem is solved on the
//! survivors with a warm start, and the result is expanded back to all `p`
//! coordinates. The first grid point is screened from the exact anchor at
//! `λmax`.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::ProblemInstance;
use crate::error::{Error, Result};
use crate::geometry::{build_anchor, ScreeningAnchor};
use crate::rules::{screen, RuleKind};
use crate::solver::{kkt_violations, lambda_max, solve, solve_restricted, PrimalDualSolution, SolverConfig};

/// Relative slack for KKT checks on discarded features.
pub const KKT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpec {
    /// Absolute `λ` values, strictly decreasing, all in `(0, λmax]`.
    Explicit(Vec<f64>),
    /// `count` values of `λ/λmax` equally spaced from `hi` down to `lo`.
    Ratios { count: usize, lo: f64, hi: f64 },
}

impl GridSpec {
    /// 100 points from λmax down to 0.05·λmax.
    pub fn standard() -> Self {
        GridSpec::Ratios { count: 100, lo: 0.05, hi: 1.0 }
    }

    /// Absolute `λ` values, strictly decreasing.
    pub fn materialize(&self, lmax: f64) -> Result<Vec<f64>> {
        let grid = match self {
            GridSpec::Ratios { count, lo, hi } => {
                let (count, lo, hi) = (*count, *lo, *hi);
                if count == 0 {
                    return Err(Error::Config("grid needs at least one point".into()));
                }
                if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
                    return Err(Error::Config(format!("grid ratios need 0 < lo <= hi <= 1, got lo={lo}, hi={hi}")));
                }
                if count > 1 && lo == hi {
                    return Err(Error::Config("lo == hi only allowed for a single-point grid".into()));
                }
                if count == 1 {
                    vec![hi * lmax]
                } else {
                    let step = (hi - lo) / (count - 1) as f64;
                    (0..count)
                        .map(|k| if k + 1 == count { lo } else { hi - k as f64 * step })
                        .map(|r| r * lmax)
                        .collect()
                }
            }
            GridSpec::Explicit(values) => {
                if values.is_empty() {
                    return Err(Error::Config("grid needs at least one point".into()));
                }
                if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && **v <= lmax)) {
                    return Err(Error::Config(format!("grid value {bad} outside (0, lambda_max = {lmax}]")));
                }
                values.clone()
            }
        };
        if grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("grid must be strictly decreasing".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub grid: GridSpec,
    pub rules: Vec<RuleKind>,
    pub margin: f64,
    pub solver: SolverConfig,
    /// Also solve every grid point without screening and compare.
    pub baseline_unscreened: bool,
    /// Screen every grid point from the `λmax` anchor instead of the previous point.
    pub fixed_anchor: bool,
    /// Lanes run on up to this many threads; `1` keeps timings uncontended.
    pub threads: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::standard(),
            rules: RuleKind::ALL.to_vec(),
            margin: crate::DEFAULT_MARGIN,
            solver: SolverConfig::default(),
            baseline_unscreened: false,
            fixed_anchor: false,
            threads: 1,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.rules.is_empty() && !self.baseline_unscreened {
            return Err(Error::Config("nothing to run: no rules and no baseline".into()));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(Error::Config(format!("margin must lie in [0, 1), got {}", self.margin)));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Metrics for one grid point of one lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub lambda: f64,
    pub lambda_ratio: f64,
    pub discarded: usize,
    pub survivors: usize,
    /// Features the rule kept, ascending; the complement of the discard set.
    pub kept_by_rule: Vec<usize>,
    pub screen_ms: f64,
    pub solve_ms: f64,
    /// Features put back by the KKT correction loop (strong rule only).
    pub kkt_readds: usize,
    /// Discarded features that are nonzero at the optimum; must be 0 for safe rules.
    pub violations: usize,
    pub gap: f64,
    pub certified: bool,
    pub sweeps: usize,
    /// `‖β − β_baseline‖_∞` when a baseline was run.
    pub max_dev_from_baseline: Option<f64>,
}

impl StepMetrics {
    pub fn rejection_ratio(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else {
            self.discarded as f64 / p as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneResult {
    pub rule: RuleKind,
    pub steps: Vec<StepMetrics>,
    /// Set when the lane stopped early; `steps` holds the completed points.
    pub error: Option<String>,
}

impl LaneResult {
    pub fn total_screen_ms(&self) -> f64 {
        self.steps.iter().map(|s| s.screen_ms).sum()
    }

    pub fn total_solve_ms(&self) -> f64 {
        self.steps.iter().map(|s| s.solve_ms).sum()
    }

    pub fn total_ms(&self) -> f64 {
        self.total_screen_ms() + self.total_solve_ms()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineStep {
    pub lambda: f64,
    pub solve_ms: f64,
    pub active: usize,
    pub gap: f64,
    pub certified: bool,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub n: usize,
    pub p: usize,
    pub lambda_max: f64,
    pub lambdas: Vec<f64>,
    pub gap_tol: f64,
    pub baseline: Option<Vec<BaselineStep>>,
    pub lanes: Vec<LaneResult>,
}

/// One row of the rejection-ratio table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub rule: RuleKind,
    pub lambda_ratio: f64,
    pub rejection_ratio: f64,
    pub screen_ms: f64,
    pub solve_ms: f64,
    pub violations: usize,
}

impl PathResult {
    pub fn lane(&self, rule: RuleKind) -> Option<&LaneResult> {
        self.lanes.iter().find(|l| l.rule == rule)
    }

    pub fn baseline_total_ms(&self) -> Option<f64> {
        self.baseline.as_ref().map(|b| b.iter().map(|s| s.solve_ms).sum())
    }

    pub fn rejection_ratio_table(&self) -> Vec<RejectionRow> {
        self.lanes
            .iter()
            .flat_map(|lane| {
                lane.steps.iter().map(move |s| RejectionRow {
                    rule: lane.rule,
                    lambda_ratio: s.lambda_ratio,
                    rejection_ratio: s.rejection_ratio(self.p),
                    screen_ms: s.screen_ms,
                    solve_ms: s.solve_ms,
                    violations: s.violations,
                })
            })
            .collect()
    }

    /// `rule,lambda_ratio,rejection_ratio,screen_ms,solve_ms,violations`.
    pub fn rejection_csv(&self) -> String {
        let mut out = String::from("rule,lambda_ratio,rejection_ratio,screen_ms,solve_ms,violations\n");
        for r in self.rejection_ratio_table() {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:.6},{:.6},{}",
                r.rule, r.lambda_ratio, r.rejection_ratio, r.screen_ms, r.solve_ms, r.violations
            );
        }
        out
    }

    /// Problems found in the run: lane errors, uncertified points, safety
    /// violations, and deviations from the baseline above `10·gap_tol`.
    pub fn check_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(base) = &self.baseline {
            for s in base.iter().filter(|s| !s.certified) {
                out.push(format!("baseline uncertified at lambda={:?} (gap {:e})", s.lambda, s.gap));
            }
        }
        let dev_tol = 10.0 * self.gap_tol;
        for lane in &self.lanes {
            if let Some(e) = &lane.error {
                out.push(format!("{}: lane aborted: {e}", lane.rule));
            }
            for s in &lane.steps {
                if !s.certified {
                    out.push(format!("{}: uncertified at lambda={:?} (gap {:e})", lane.rule, s.lambda, s.gap));
                }
                if s.violations > 0 {
                    out.push(format!("{}: {} violations at lambda={:?}", lane.rule, s.violations, s.lambda));
                }
                if let Some(d) = s.max_dev_from_baseline {
                    if d > dev_tol {
                        out.push(format!("{}: deviates from baseline by {d:e} at lambda={:?}", lane.rule, s.lambda));
                    }
                }
            }
        }
        out
    }

    pub fn all_checks_passed(&self) -> bool {
        self.check_failures().is_empty()
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs every configured lane over the grid.
pub fn run_path(inst: &ProblemInstance, config: &PathConfig) -> Result<PathResult> {
    config.validate()?;
    let lmax = lambda_max(inst)?;
    let lambdas = config.grid.materialize(lmax)?;

    let (baseline, baseline_betas) = if config.baseline_unscreened {
        let (steps, betas) = run_baseline(inst, &lambdas, &config.solver)?;
        (Some(steps), Some(betas))
    } else {
        (None, None)
    };

    let top = solve(inst, lmax, None, &config.solver)?;
    let top_anchor = build_anchor(inst, &top)?;
    let lane = |rule: RuleKind| {
        run_lane(inst, rule, &lambdas, lmax, &top_anchor, baseline_betas.as_deref(), config)
    };
    let lanes: Vec<LaneResult> = if config.threads > 1 && config.rules.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| config.rules.par_iter().map(|&r| lane(r)).collect())
    } else {
        config.rules.iter().map(|&r| lane(r)).collect()
    };

    Ok(PathResult {
        n: inst.n(),
        p: inst.p(),
        lambda_max: lmax,
        lambdas,
        gap_tol: config.solver.gap_tol,
        baseline,
        lanes,
    })
}

fn run_baseline(
    inst: &ProblemInstance,
    lambdas: &[f64],
    solver: &SolverConfig,
) -> Result<(Vec<BaselineStep>, Vec<Vec<f64>>)> {
    let mut steps = Vec::with_capacity(lambdas.len());
    let mut betas: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let t = Instant::now();
        let sol = solve(inst, lambda, betas.last().map(|b| b.as_slice()), solver)?;
        steps.push(BaselineStep {
            lambda,
            solve_ms: ms_since(t),
            active: sol.nnz(),
            gap: sol.gap,
            certified: sol.certified,
            sweeps: sol.sweeps_used,
        });
        betas.push(sol.beta);
    }
    Ok((steps, betas))
}

fn run_lane(
    inst: &ProblemInstance,
    rule: RuleKind,
    lambdas: &[f64],
    lmax: f64,
    top_anchor: &ScreeningAnchor,
    baseline: Option<&[Vec<f64>]>,
    config: &PathConfig,
) -> LaneResult {
    let mut steps = Vec::with_capacity(lambdas.len());
    let mut anchor: Option<ScreeningAnchor> = None;
    let mut prev: Option<PrimalDualSolution> = None;
    let mut anchor_ms = 0.0;
    for (k, &lambda) in lambdas.iter().enumerate() {
        let out = match lane_step(inst, rule, lambda, anchor.as_ref().unwrap_or(top_anchor), prev.as_ref(), config) {
            Ok(out) => out,
            Err(e) => return LaneResult { rule, steps, error: Some(format!("lambda={lambda:?}: {e}")) },
        };
        let mut metrics = out.metrics;
        metrics.lambda_ratio = lambda / lmax;
        // building the anchor used here counts toward this point's screening time
        metrics.screen_ms += anchor_ms;
        if let Some(base) = baseline {
            metrics.max_dev_from_baseline = Some(max_abs_diff(&out.solution.beta, &base[k]));
            if rule.is_safe() {
                let limit = 10.0 * config.solver.gap_tol;
                metrics.violations = out.discarded.iter().filter(|&&j| base[k][j].abs() > limit).count();
            }
        }
        let certified = metrics.certified;
        steps.push(metrics);
        if !certified {
            let gap = out.solution.gap;
            return LaneResult { rule, steps, error: Some(format!("lambda={lambda:?}: solution uncertified (gap {gap:e})")) };
        }
        if !config.fixed_anchor {
            let t = Instant::now();
            let built = build_anchor(inst, &out.solution);
            anchor_ms = ms_since(t);
            match built {
                Ok(a) => anchor = Some(a),
                Err(e) => return LaneResult { rule, steps, error: Some(format!("anchor at lambda={lambda:?}: {e}")) },
            }
        }
        prev = Some(out.solution);
    }
    LaneResult { rule, steps, error: None }
}

struct StepOutcome {
    metrics: StepMetrics,
    solution: PrimalDualSolution,
    discarded: Vec<usize>,
}

fn lane_step(
    inst: &ProblemInstance,
    rule: RuleKind,
    lambda: f64,
    anchor: &ScreeningAnchor,
    prev: Option<&PrimalDualSolution>,
    config: &PathConfig,
) -> Result<StepOutcome> {
    let t = Instant::now();
    let report = screen(rule, anchor, lambda, config.margin)?;
    let mut survivors = report.survivors();
    let screen_ms = ms_since(t);
    let kept_by_rule = survivors.clone();

    let t = Instant::now();
    let warm = prev.map(|s| s.beta.as_slice());
    let mut sol = solve_restricted(inst, lambda, Some(&survivors), warm, &config.solver)?;
    let mut discarded = report.discarded.clone();
    let mut readds = 0;
    let mut violations = 0;
    if rule.is_safe() {
        violations = kkt_violations(inst, &sol, &discarded, KKT_TOL).len();
    } else {
        loop {
            let bad = kkt_violations(inst, &sol, &discarded, KKT_TOL);
            if bad.is_empty() {
                break;
            }
            readds += bad.len();
            discarded.retain(|j| !bad.contains(j));
            survivors.extend(bad);
            survivors.sort_unstable();
            sol = solve_restricted(inst, lambda, Some(&survivors), Some(&sol.beta), &config.solver)?;
        }
    }
    let solve_ms = ms_since(t);

    let metrics = StepMetrics {
        lambda,
        lambda_ratio: 0.0,
        discarded: report.discarded.len(),
        survivors: survivors.len(),
        kept_by_rule,
        screen_ms,
        solve_ms,
        kkt_readds: readds,
        violations,
        gap: sol.gap,
        certified: sol.certified,
        sweeps: sol.sweeps_used,
        max_dev_from_baseline: None,
    };
    Ok(StepOutcome { metrics, solution: sol, discarded: report.discarded })
}
