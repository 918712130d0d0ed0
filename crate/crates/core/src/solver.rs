//! Certified Lasso solves.
//!
//! Cyclic coordinate descent with soft-thresholding and active-set cycling.
//! Every returned solution carries a dual-feasible point obtained by scaling
//! the residual, `θ = r / max(λ, ‖X^T r‖_∞)`, and the relative duality gap
//! `(P(β) − D(θ)) / max(1, P(β))` with
//!
//! ```text
//! P(β) = ½‖y − Xβ‖² + λ‖β‖₁,     D(θ) = λ⟨y, θ⟩ − ½λ²‖θ‖².
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2_sq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Cap on coordinate sweeps (full and active-set sweeps both count).
    pub max_sweeps: usize,
    /// Sweep the nonzero coordinates until they settle before each full pass.
    pub active_set_cycling: bool,
    /// Convergence also requires the largest coordinate move in the last full
    /// pass, measured as `|Δβ_j|·‖x_j‖`, to be below `step_tol·‖y‖`. The gap
    /// alone only pins `Xβ` to `O(sqrt(gap))`.
    pub step_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { gap_tol: 1e-10, max_sweeps: 100_000, active_set_cycling: true, step_tol: 1e-13 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) {
            return Err(Error::Config(format!("gap_tol must be positive, got {}", self.gap_tol)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be at least 1".into()));
        }
        if !(self.step_tol >= 0.0) {
            return Err(Error::Config(format!("step_tol must be >= 0, got {}", self.step_tol)));
        }
        Ok(())
    }
}

/// A primal/dual pair at one `λ`, certified against the full problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualSolution {
    pub lambda: f64,
    pub beta: Vec<f64>,
    /// Dual-feasible point `r / max(λ, ‖X^T r‖_∞)`.
    pub theta: Vec<f64>,
    /// `X^T θ`, one entry per feature.
    pub xt_theta: Vec<f64>,
    /// Relative duality gap of `(beta, theta)` on the full problem.
    pub gap: f64,
    pub primal: f64,
    pub dual: f64,
    pub sweeps_used: usize,
    /// `gap <= gap_tol` and the iterate settled before `max_sweeps`.
    pub certified: bool,
}

impl PrimalDualSolution {
    pub fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(Error::Uncertified { lambda: self.lambda, gap: self.gap })
        }
    }

    pub fn nnz(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    /// Sparse `j,beta_j` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,beta_j\n");
        for (j, b) in self.beta.iter().enumerate().filter(|(_, b)| **b != 0.0) {
            let _ = writeln!(out, "{j},{b:?}");
        }
        out
    }

    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            lambda: self.lambda,
            gap: self.gap,
            sweeps: self.sweeps_used,
            certified: self.certified,
            nnz: self.nnz(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub lambda: f64,
    pub gap: f64,
    pub sweeps: usize,
    pub certified: bool,
    pub nnz: usize,
}

/// `‖X^T y‖_∞`: the smallest `λ` at which the Lasso solution is zero.
pub fn lambda_max(inst: &ProblemInstance) -> Result<f64> {
    inst.require_nonzero_response()?;
    let lmax = inst.xj_dot_y().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if lmax == 0.0 {
        return Err(Error::Degenerate);
    }
    Ok(lmax)
}

#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Coordinate-descent iterate with an incrementally maintained residual.
#[derive(Debug, Clone)]
pub struct CoordinateDescent<'a> {
    inst: &'a ProblemInstance,
    lambda: f64,
    beta: Vec<f64>,
    resid: Vec<f64>,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(inst: &'a ProblemInstance, lambda: f64, beta: Vec<f64>) -> Self {
        assert_eq!(beta.len(), inst.p());
        let mut cd = Self { inst, lambda, beta, resid: Vec::new() };
        cd.refresh_residual();
        cd
    }

    /// Recomputes `r = y − Xβ` from scratch.
    pub fn refresh_residual(&mut self) {
        let mut r = self.inst.y().to_vec();
        for (j, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                axpy(-b, self.inst.column(j), &mut r);
            }
        }
        self.resid = r;
    }

    /// One cyclic pass over `coords`. Returns `max_j |Δβ_j|·‖x_j‖`.
    pub fn sweep(&mut self, coords: &[usize]) -> f64 {
        let norms = self.inst.col_norms();
        let mut max_step = 0.0f64;
        for &j in coords {
            let nj = norms[j];
            if nj == 0.0 {
                continue;
            }
            let col = self.inst.column(j);
            let sq = nj * nj;
            let old = self.beta[j];
            let z = old + dot(col, &self.resid) / sq;
            let new = soft_threshold(z, self.lambda / sq);
            let delta = new - old;
            if delta != 0.0 {
                axpy(-delta, col, &mut self.resid);
                self.beta[j] = new;
                max_step = max_step.max(delta.abs() * nj);
            }
        }
        max_step
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    pub fn into_beta(self) -> Vec<f64> {
        self.beta
    }

    pub fn objective(&self) -> f64 {
        0.5 * norm2_sq(&self.resid) + self.lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Relative duality gap of the problem restricted to `coords`.
    pub fn relative_gap(&self, coords: &[usize]) -> f64 {
        let corr = coords.iter().fold(0.0f64, |m, &j| m.max(dot(self.inst.column(j), &self.resid).abs()));
        let (primal, dual) = self.objectives(corr.max(self.lambda));
        relative(primal, dual)
    }

    fn objectives(&self, scale: f64) -> (f64, f64) {
        let primal = self.objective();
        let r2 = norm2_sq(&self.resid);
        let yr = dot(self.inst.y(), &self.resid);
        // θ = r / scale
        let dual = self.lambda * yr / scale - 0.5 * self.lambda * self.lambda * r2 / (scale * scale);
        (primal, dual)
    }
}

fn relative(primal: f64, dual: f64) -> f64 {
    (primal - dual).max(0.0) / primal.max(1.0)
}

/// Solves the Lasso at `lambda`, optionally warm-started from a full-length `warm`.
pub fn solve(
    inst: &ProblemInstance,
    lambda: f64,
    warm: Option<&[f64]>,
    config: &SolverConfig,
) -> Result<PrimalDualSolution> {
    solve_restricted(inst, lambda, None, warm, config)
}

/// Solves the Lasso with every feature outside `features` pinned to zero.
///
/// Coordinate descent runs on `features` only (all features when `None`), but
/// the returned dual point, `X^T θ` and gap are computed on the full problem,
/// so `certified` is true only when the restricted optimum is also optimal for
/// the full problem.
pub fn solve_restricted(
    inst: &ProblemInstance,
    lambda: f64,
    features: Option<&[usize]>,
    warm: Option<&[f64]>,
    config: &SolverConfig,
) -> Result<PrimalDualSolution> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidLambda(format!("lambda must be positive, got {lambda}")));
    }
    config.validate()?;
    let p = inst.p();
    let lmax = lambda_max(inst)?;

    if lambda >= lmax {
        // β = 0 is optimal and θ = y/λ is the exact dual optimum
        let theta: Vec<f64> = inst.y().iter().map(|v| v / lambda).collect();
        let xt_theta = inst.xj_dot_y().iter().map(|v| v / lambda).collect();
        let primal = 0.5 * norm2_sq(inst.y());
        return Ok(PrimalDualSolution {
            lambda,
            beta: vec![0.0; p],
            theta,
            xt_theta,
            gap: 0.0,
            primal,
            dual: primal,
            sweeps_used: 0,
            certified: true,
        });
    }

    let all: Vec<usize>;
    let coords: &[usize] = match features {
        Some(f) => {
            if let Some(&bad) = f.iter().find(|&&j| j >= p) {
                return Err(Error::Dimension(format!("feature index {bad} out of range (p = {p})")));
            }
            f
        }
        None => {
            all = (0..p).collect();
            &all
        }
    };

    let mut beta = vec![0.0; p];
    if let Some(w) = warm {
        if w.len() != p {
            return Err(Error::Dimension(format!("warm start has {} entries, p = {p}", w.len())));
        }
        for &j in coords {
            beta[j] = w[j];
        }
    }

    let y_norm = inst.y_norm();
    let floor = 64.0 * f64::EPSILON * (inst.n() as f64).sqrt();
    let step_limit = config.step_tol.max(floor) * y_norm;

    let mut cd = CoordinateDescent::new(inst, lambda, beta);
    let mut sweeps = 0usize;
    let mut converged = false;
    let mut active: Vec<usize> = Vec::new();
    while sweeps < config.max_sweeps {
        let step = cd.sweep(coords);
        sweeps += 1;
        cd.refresh_residual();
        if step <= step_limit && cd.relative_gap(coords) <= config.gap_tol {
            converged = true;
            break;
        }
        if config.active_set_cycling {
            active.clear();
            active.extend(coords.iter().copied().filter(|&j| cd.beta()[j] != 0.0));
            if active.len() < coords.len() {
                while sweeps < config.max_sweeps {
                    let s = cd.sweep(&active);
                    sweeps += 1;
                    if s <= step_limit {
                        break;
                    }
                }
            }
        }
    }

    let beta = cd.into_beta();
    let mut sol = certify(inst, lambda, beta)?;
    sol.sweeps_used = sweeps;
    sol.certified = converged && sol.gap <= config.gap_tol;
    Ok(sol)
}

/// Builds the dual point and full-problem gap for a given `beta`.
pub fn certify(inst: &ProblemInstance, lambda: f64, beta: Vec<f64>) -> Result<PrimalDualSolution> {
    if beta.len() != inst.p() {
        return Err(Error::Dimension(format!("beta has {} entries, p = {}", beta.len(), inst.p())));
    }
    let cd = CoordinateDescent::new(inst, lambda, beta);
    let xt_r = inst.xt_times(cd.residual());
    let scale = xt_r.iter().fold(lambda, |m, v| m.max(v.abs()));
    let (primal, dual) = cd.objectives(scale);
    let theta = cd.residual().iter().map(|v| v / scale).collect();
    let xt_theta = xt_r.iter().map(|v| v / scale).collect();
    let gap = relative(primal, dual);
    Ok(PrimalDualSolution {
        lambda,
        beta: cd.into_beta(),
        theta,
        xt_theta,
        gap,
        primal,
        dual,
        sweeps_used: 0,
        certified: false,
    })
}

/// Features in `candidates` with `|⟨x_j, y − Xβ⟩| > λ(1 + tol)`.
pub fn kkt_violations(
    inst: &ProblemInstance,
    solution: &PrimalDualSolution,
    candidates: &[usize],
    tol: f64,
) -> Vec<usize> {
    let r = {
        let mut r = inst.y().to_vec();
        axpy(-1.0, &inst.predict(&solution.beta), &mut r);
        r
    };
    let limit = solution.lambda * (1.0 + tol);
    candidates
        .iter()
        .copied()
        .filter(|&j| dot(inst.column(j), &r).abs() > limit)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec};

    fn random_instance(n: usize, p: usize, seed: u64) -> ProblemInstance {
        generate_synthetic(&SyntheticSpec { n, p, p_bar: 5.min(p), rho: 0.5, sigma: 0.1, seed })
            .unwrap()
            .instance
    }

    #[test]
    fn lambda_max_small_example() {
        let inst = ProblemInstance::from_columns(2, 2, vec![1.0, 0.0, 0.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(lambda_max(&inst).unwrap(), 2.0);
    }

    #[test]
    fn lambda_max_orthogonal_response_is_degenerate() {
        let inst = ProblemInstance::from_columns(2, 1, vec![1.0, 0.0], vec![0.0, 3.0]).unwrap();
        assert!(matches!(lambda_max(&inst), Err(Error::Degenerate)));
        let zero = ProblemInstance::from_columns(2, 1, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(lambda_max(&zero), Err(Error::ZeroResponse)));
    }

    #[test]
    fn solution_at_lambda_max_is_exact() {
        let inst = random_instance(20, 50, 1);
        let lmax = lambda_max(&inst).unwrap();
        let sol = solve(&inst, lmax, None, &SolverConfig::default()).unwrap();
        assert!(sol.beta.iter().all(|b| *b == 0.0));
        assert_eq!(sol.gap, 0.0);
        assert!(sol.certified);
        for (t, y) in sol.theta.iter().zip(inst.y()) {
            assert_eq!(*t, y / lmax);
        }
        let below = solve(&inst, 0.99 * lmax, None, &SolverConfig::default()).unwrap();
        assert!(below.certified);
        assert!(below.nnz() > 0);
    }

    #[test]
    fn single_column_matches_closed_form() {
        let x = vec![0.5, -1.0, 2.0, 0.25];
        let y = vec![1.0, 0.3, 2.5, -0.7];
        let inst = ProblemInstance::from_columns(4, 1, x.clone(), y.clone()).unwrap();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let xx: f64 = x.iter().map(|a| a * a).sum();
        for lambda in [0.1, 1.0, 3.0, 5.9] {
            let sol = solve(&inst, lambda, None, &SolverConfig::default()).unwrap();
            let expect = soft_threshold(xy, lambda) / xx;
            assert!((sol.beta[0] - expect).abs() < 1e-12, "λ={lambda}: {} vs {expect}", sol.beta[0]);
        }
    }

    #[test]
    fn kkt_conditions_hold_at_certified_solution() {
        let inst = random_instance(20, 40, 7);
        let lmax = lambda_max(&inst).unwrap();
        let lambda = 0.3 * lmax;
        let sol = solve(&inst, lambda, None, &SolverConfig::default()).unwrap();
        assert!(sol.certified, "gap {}", sol.gap);
        assert!(sol.gap <= 1e-10);
        let r: Vec<f64> = {
            let xb = inst.predict(&sol.beta);
            inst.y().iter().zip(&xb).map(|(a, b)| a - b).collect()
        };
        for j in 0..inst.p() {
            let c = dot(inst.column(j), &r) / lambda;
            assert!(c.abs() <= 1.0 + 1e-8, "j={j}: {c}");
            if sol.beta[j] != 0.0 {
                assert!((c - sol.beta[j].signum()).abs() <= 1e-6, "j={j}: {c}");
            }
        }
        assert!(sol.xt_theta.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert!(kkt_violations(&inst, &sol, &(0..inst.p()).collect::<Vec<_>>(), 1e-9).is_empty());
    }

    #[test]
    fn zero_beta_violates_kkt_at_argmax() {
        let inst = random_instance(15, 30, 3);
        let lmax = lambda_max(&inst).unwrap();
        let argmax = (0..inst.p())
            .max_by(|&a, &b| inst.xj_dot_y()[a].abs().total_cmp(&inst.xj_dot_y()[b].abs()))
            .unwrap();
        let sol = certify(&inst, 0.5 * lmax, vec![0.0; inst.p()]).unwrap();
        let v = kkt_violations(&inst, &sol, &(0..inst.p()).collect::<Vec<_>>(), 0.0);
        assert!(v.contains(&argmax));
    }

    #[test]
    fn objective_is_monotone_across_sweeps() {
        let inst = random_instance(25, 60, 9);
        let lambda = 0.1 * lambda_max(&inst).unwrap();
        let mut cd = CoordinateDescent::new(&inst, lambda, vec![0.0; inst.p()]);
        let all: Vec<usize> = (0..inst.p()).collect();
        let mut prev = cd.objective();
        for _ in 0..50 {
            cd.sweep(&all);
            let obj = cd.objective();
            assert!(obj <= prev + 1e-12 * prev.abs(), "{obj} > {prev}");
            prev = obj;
        }
    }

    #[test]
    fn warm_start_does_not_worsen_initial_objective() {
        let inst = random_instance(25, 60, 10);
        let lmax = lambda_max(&inst).unwrap();
        let cfg = SolverConfig::default();
        let prev = solve(&inst, 0.5 * lmax, None, &cfg).unwrap();
        let lambda = 0.45 * lmax;
        let cold = CoordinateDescent::new(&inst, lambda, vec![0.0; inst.p()]).objective();
        let warm = CoordinateDescent::new(&inst, lambda, prev.beta.clone()).objective();
        assert!(warm <= cold);
        let a = solve(&inst, lambda, Some(&prev.beta), &cfg).unwrap();
        let b = solve(&inst, lambda, None, &cfg).unwrap();
        assert!(a.sweeps_used <= b.sweeps_used);
        let dev = a.beta.iter().zip(&b.beta).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-9, "dev {dev}");
    }

    #[test]
    fn gap_certificate_is_nonnegative_and_consistent() {
        let inst = random_instance(20, 30, 12);
        let lambda = 0.2 * lambda_max(&inst).unwrap();
        for beta in [vec![0.0; 30], vec![0.1; 30]] {
            let sol = certify(&inst, lambda, beta).unwrap();
            assert!(sol.primal - sol.dual >= -1e-12 * sol.primal.abs());
            let rel = (sol.primal - sol.dual).max(0.0) / sol.primal.max(1.0);
            assert_eq!(sol.gap, rel);
            assert!(sol.xt_theta.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn restricted_solve_matches_full_on_true_support() {
        let inst = random_instance(20, 40, 4);
        let lambda = 0.4 * lambda_max(&inst).unwrap();
        let cfg = SolverConfig::default();
        let full = solve(&inst, lambda, None, &cfg).unwrap();
        let keep: Vec<usize> = (0..inst.p()).filter(|&j| full.beta[j] != 0.0).collect();
        let restricted = solve_restricted(&inst, lambda, Some(&keep), None, &cfg).unwrap();
        assert!(restricted.certified);
        let dev = full.beta.iter().zip(&restricted.beta).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-9);
        // dropping an active feature breaks full-problem certification
        let wrong: Vec<usize> = keep[1..].to_vec();
        let broken = solve_restricted(&inst, lambda, Some(&wrong), None, &cfg).unwrap();
        assert!(!broken.certified);
        assert!(!kkt_violations(&inst, &broken, &[keep[0]], 1e-9).is_empty());
    }

    #[test]
    fn sweep_cap_returns_uncertified_iterate() {
        let inst = random_instance(20, 40, 5);
        let lambda = 0.05 * lambda_max(&inst).unwrap();
        let cfg = SolverConfig { max_sweeps: 1, ..SolverConfig::default() };
        let sol = solve(&inst, lambda, None, &cfg).unwrap();
        assert!(!sol.certified);
        assert!(matches!(sol.require_certified(), Err(Error::Uncertified { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let inst = random_instance(5, 5, 1);
        let cfg = SolverConfig::default();
        assert!(solve(&inst, 0.0, None, &cfg).is_err());
        assert!(solve(&inst, -1.0, None, &cfg).is_err());
        assert!(solve(&inst, 1.0, Some(&[0.0]), &cfg).is_err());
        assert!(solve(&inst, 1.0, None, &SolverConfig { gap_tol: 0.0, ..cfg.clone() }).is_err());
        assert!(solve(&inst, 1.0, None, &SolverConfig { max_sweeps: 0, ..cfg }).is_err());
    }

    #[test]
    fn exports() {
        let inst = random_instance(10, 8, 2);
        let sol = solve(&inst, 0.3 * lambda_max(&inst).unwrap(), None, &SolverConfig::default()).unwrap();
        let csv = sol.to_csv();
        assert!(csv.starts_with("j,beta_j\n"));
        assert_eq!(csv.lines().count(), 1 + sol.nnz());
        let json = serde_json::to_value(sol.summary()).unwrap();
        assert!(json.get("lambda").is_some() && json.get("gap").is_some() && json.get("sweeps").is_some());
    }
}
