//! Dual-space geometry of sequential screening.
//!
//! Given the dual optimum `θ1` at `λ1`, the dual optimum at `λ2 < λ1` lies in
//!
//! ```text
//! Ω = { θ : ⟨θ1 − y/λ1, θ − θ1⟩ ≥ 0,  ⟨θ − y/λ2, θ1 − θ⟩ ≥ 0 }
//! ```
//!
//! (a half-space through `θ1` intersected with the ball whose diameter is the
//! segment `[θ1, y/λ2]`). With `a = y/λ1 − θ1`, `b = y/λ2 − θ1` and
//! `γ = 1/λ2 − 1/λ1`, the maximum of `±⟨x_j, θ⟩` over `Ω` has a closed form
//! in four cases. Every quantity below is evaluated from scalars cached once
//! per anchor, so a bound costs O(1) per feature.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, norm2_sq};
use crate::solver::{lambda_max, PrimalDualSolution};

/// `a` is treated as zero when `‖a‖ ≤ A_ZERO_REL·‖y‖/λ1`.
pub const A_ZERO_REL: f64 = 1e-12;

/// Largest `⟨x_j,a⟩²/(‖a‖²‖x_j‖²)` for which `‖x_j⊥‖` comes from scalars.
const PERP_SCALAR_MAX: f64 = 0.5;

/// Everything the rules need from a certified solve at `λ1`.
#[derive(Debug, Clone)]
pub struct ScreeningAnchor {
    pub lambda1: f64,
    pub lambda_max: f64,
    pub y: Vec<f64>,
    pub theta1: Vec<f64>,
    /// `y/λ1 − θ1 = Xβ1/λ1`; exactly zero when `a_is_zero`.
    pub a: Vec<f64>,
    pub a_is_zero: bool,
    pub a_norm2: f64,
    /// `⟨a, y⟩`, clamped at zero (it is nonnegative at the exact optimum).
    pub a_dot_y: f64,
    pub y_norm2: f64,
    /// `‖y⊥‖` with `y⊥ = y − a⟨y, a⟩/‖a‖²` (equals `‖y‖` when `a = 0`).
    pub y_perp_norm: f64,
    pub theta1_norm2: f64,
    pub theta1_dot_y: f64,
    pub xj_dot_theta1: Vec<f64>,
    pub xj_dot_a: Vec<f64>,
    pub xj_dot_y: Vec<f64>,
    pub xj_norm: Vec<f64>,
    pub xj_perp_norm: Vec<f64>,
    pub xjperp_dot_yperp: Vec<f64>,
    pub diagnostics: AnchorDiagnostics,
}

/// Values recorded while checking the anchor geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorDiagnostics {
    pub max_abs_xj_dot_theta1: f64,
    /// `⟨a, y⟩` before clamping.
    pub raw_a_dot_y: f64,
    pub solution_gap: f64,
}

impl ScreeningAnchor {
    pub fn p(&self) -> usize {
        self.xj_norm.len()
    }

    pub fn n(&self) -> usize {
        self.theta1.len()
    }

    /// `⟨y/λ2 − θ1, a⟩`, `‖y/λ2 − θ1‖²` and `γ` for a target `λ2`.
    pub fn b_vector(&self, lambda2: f64) -> Result<BScalars> {
        check_order(self.lambda1, lambda2)?;
        let gamma = 1.0 / lambda2 - 1.0 / self.lambda1;
        let b_norm2 = self.a_norm2 + 2.0 * gamma * self.a_dot_y + gamma * gamma * self.y_norm2;
        let b_dot_a = self.a_norm2 + gamma * self.a_dot_y;
        Ok(BScalars { gamma, b_norm2, b_norm: b_norm2.max(0.0).sqrt(), b_dot_a })
    }
}

/// Scalars describing `b = y/λ2 − θ1 = a + γ y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BScalars {
    pub gamma: f64,
    pub b_norm2: f64,
    pub b_norm: f64,
    pub b_dot_a: f64,
}

impl BScalars {
    /// `⟨x_j, b⟩ = ⟨x_j, a⟩ + γ⟨x_j, y⟩`.
    #[inline]
    pub fn xj_dot_b(&self, anchor: &ScreeningAnchor, j: usize) -> f64 {
        anchor.xj_dot_a[j] + self.gamma * anchor.xj_dot_y[j]
    }
}

fn check_order(lambda1: f64, lambda2: f64) -> Result<()> {
    if !(lambda2 > 0.0 && lambda2.is_finite()) {
        return Err(Error::InvalidLambda(format!("lambda2 must be positive, got {lambda2}")));
    }
    if lambda2 > lambda1 {
        return Err(Error::InvalidLambda(format!(
            "lambda2 = {lambda2} exceeds the anchor lambda1 = {lambda1}"
        )));
    }
    Ok(())
}

/// Builds the screening anchor from a certified solution at `λ1 ≤ λmax`.
pub fn build_anchor(inst: &ProblemInstance, solution: &PrimalDualSolution) -> Result<ScreeningAnchor> {
    solution.require_certified()?;
    let lmax = lambda_max(inst)?;
    let lambda1 = solution.lambda;
    if lambda1 > lmax * (1.0 + 1e-12) {
        return Err(Error::InvalidLambda(format!(
            "anchor lambda1 = {lambda1} exceeds lambda_max = {lmax}"
        )));
    }
    if solution.theta.len() != inst.n() || solution.xt_theta.len() != inst.p() {
        return Err(Error::Dimension("solution does not match the instance".into()));
    }

    let y = inst.y();
    let theta1 = solution.theta.clone();
    let y_norm2 = norm2_sq(y);
    let mut a: Vec<f64> = y.iter().zip(&theta1).map(|(yi, ti)| yi / lambda1 - ti).collect();
    let a_is_zero = norm2(&a) <= A_ZERO_REL * y_norm2.sqrt() / lambda1;
    if a_is_zero {
        if (lambda1 - lmax).abs() > 1e-9 * lmax {
            return Err(Error::Geometry(format!(
                "prediction vanishes at lambda1 = {lambda1} < lambda_max = {lmax}"
            )));
        }
        a.iter_mut().for_each(|v| *v = 0.0);
    }

    let xj_dot_theta1 = solution.xt_theta.clone();
    let max_abs = xj_dot_theta1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs > 1.0 + 1e-9 {
        return Err(Error::Geometry(format!("dual point is infeasible: max |<x_j, theta1>| = {max_abs}")));
    }

    let a_norm2 = norm2_sq(&a);
    let raw_a_dot_y = dot(&a, y);
    if raw_a_dot_y < -1e-9 * a_norm2.sqrt() * y_norm2.sqrt() {
        return Err(Error::Geometry(format!("<a, y> = {raw_a_dot_y} is negative")));
    }
    let a_dot_y = raw_a_dot_y.max(0.0);

    let xj_dot_y = inst.xj_dot_y().to_vec();
    let xj_norm = inst.col_norms().to_vec();
    let (xj_dot_a, xj_perp_norm, xjperp_dot_yperp, y_perp_norm);
    if a_is_zero {
        xj_dot_a = vec![0.0; inst.p()];
        xj_perp_norm = xj_norm.clone();
        xjperp_dot_yperp = xj_dot_y.clone();
        y_perp_norm = y_norm2.sqrt();
    } else {
        // ⟨x_j, a⟩ = ⟨x_j, y⟩/λ1 − ⟨x_j, θ1⟩ avoids another pass over X
        xj_dot_a = xj_dot_y
            .iter()
            .zip(&xj_dot_theta1)
            .map(|(xy, xt)| xy / lambda1 - xt)
            .collect::<Vec<_>>();
        xj_perp_norm = (0..inst.p())
            .map(|j| {
                let (nj, xa) = (xj_norm[j], xj_dot_a[j]);
                let along = xa * xa / a_norm2;
                if along <= PERP_SCALAR_MAX * nj * nj {
                    (nj * nj - along).sqrt()
                } else {
                    // subtracting squared norms would lose most digits here
                    let c = xa / a_norm2;
                    inst.column(j).iter().zip(&a).map(|(xi, ai)| (xi - c * ai).powi(2)).sum::<f64>().sqrt()
                }
            })
            .collect();
        xjperp_dot_yperp = xj_dot_y
            .iter()
            .zip(&xj_dot_a)
            .map(|(xy, xa)| xy - a_dot_y * xa / a_norm2)
            .collect();
        y_perp_norm = (y_norm2 - a_dot_y * a_dot_y / a_norm2).max(0.0).sqrt();
    }

    Ok(ScreeningAnchor {
        lambda1,
        lambda_max: lmax,
        theta1_norm2: norm2_sq(&theta1),
        theta1_dot_y: dot(&theta1, y),
        y: y.to_vec(),
        theta1,
        a,
        a_is_zero,
        a_norm2,
        a_dot_y,
        y_norm2,
        y_perp_norm,
        xj_dot_theta1,
        xj_dot_a,
        xj_dot_y,
        xj_norm,
        xj_perp_norm,
        xjperp_dot_yperp,
        diagnostics: AnchorDiagnostics {
            max_abs_xj_dot_theta1: max_abs,
            raw_a_dot_y,
            solution_gap: solution.gap,
        },
    })
}

/// `min ⟨x, r⟩` subject to `⟨a, r + b⟩ ≤ 0` and `‖r‖ ≤ ‖b‖`, from scalars.
///
/// The minimizer sits on the sphere alone (value `−‖x‖‖b‖`) when `a = 0` or
/// the angle between `a` and `b` is at least the angle between `a` and `x`;
/// otherwise it lies on the intersection of the sphere with the hyperplane.
pub fn linear_min_from_scalars(
    x_norm: f64,
    x_dot_a: f64,
    x_perp_norm: f64,
    a_norm2: f64,
    b_norm: f64,
    b_dot_a: f64,
) -> f64 {
    if a_norm2 == 0.0 || b_dot_a / b_norm <= x_dot_a / x_norm {
        -x_norm * b_norm
    } else {
        let chord = (b_norm * b_norm - b_dot_a * b_dot_a / a_norm2).max(0.0).sqrt();
        -x_perp_norm * chord - b_dot_a * x_dot_a / a_norm2
    }
}

/// Vector form of [`linear_min_from_scalars`].
pub fn constrained_linear_min(x: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    if x.len() != a.len() || a.len() != b.len() {
        return Err(Error::Dimension("x, a and b must have equal length".into()));
    }
    let x_norm = norm2(x);
    if x_norm == 0.0 {
        return Err(Error::ZeroVector("x"));
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Err(Error::ZeroVector("b"));
    }
    let a_norm2 = norm2_sq(a);
    let b_dot_a = dot(b, a);
    if b_dot_a < -1e-12 * b_norm * a_norm2.sqrt() {
        return Err(Error::Geometry(format!("<b, a> = {b_dot_a} is negative")));
    }
    let x_dot_a = dot(x, a);
    let x_perp_norm = if a_norm2 == 0.0 {
        x_norm
    } else {
        let c = x_dot_a / a_norm2;
        x.iter().zip(a).map(|(xi, ai)| (xi - c * ai).powi(2)).sum::<f64>().sqrt()
    };
    Ok(linear_min_from_scalars(x_norm, x_dot_a, x_perp_norm, a_norm2, b_norm, b_dot_a.max(0.0)))
}

/// Which branch of the four-case bound produced a [`BoundPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundCase {
    /// `a ≠ 0` and `⟨b,a⟩/‖b‖ > |⟨x_j,a⟩|/‖x_j‖`: both maximizers on the hyperplane.
    HalfSpace,
    /// `⟨x_j,a⟩ > 0`, angle condition reversed: `u−` attained on the sphere alone.
    MinusOnSphere,
    /// `⟨x_j,a⟩ < 0`, angle condition reversed: `u+` attained on the sphere alone.
    PlusOnSphere,
    /// `a = 0`: the anchor is at `λmax` and both bounds come from the ball.
    ZeroPrediction,
}

impl BoundCase {
    pub fn tag(self) -> u8 {
        match self {
            BoundCase::HalfSpace => 1,
            BoundCase::MinusOnSphere => 2,
            BoundCase::PlusOnSphere => 3,
            BoundCase::ZeroPrediction => 4,
        }
    }
}

/// Upper bounds on `⟨x_j, θ2*⟩` and `⟨−x_j, θ2*⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub u_plus: f64,
    pub u_minus: f64,
    pub case: BoundCase,
}

impl BoundPair {
    pub fn max(&self) -> f64 {
        self.u_plus.max(self.u_minus)
    }
}

/// Bounds for feature `j` at `λ2` with the `b` scalars precomputed.
pub fn bounds_with(anchor: &ScreeningAnchor, b: &BScalars, j: usize) -> BoundPair {
    let t = anchor.xj_dot_theta1[j];
    let xn = anchor.xj_norm[j];
    let ball_plus = || t + 0.5 * (xn * b.b_norm + b.xj_dot_b(anchor, j));
    let ball_minus = || -t + 0.5 * (xn * b.b_norm - b.xj_dot_b(anchor, j));

    if anchor.a_is_zero {
        return BoundPair { u_plus: ball_plus(), u_minus: ball_minus(), case: BoundCase::ZeroPrediction };
    }

    let half = 0.5 * b.gamma;
    let cross = anchor.xj_perp_norm[j] * anchor.y_perp_norm;
    let xpy = anchor.xjperp_dot_yperp[j];
    let plane_plus = t + half * (cross + xpy);
    let plane_minus = -t + half * (cross - xpy);

    let ratio_b = b.b_dot_a / b.b_norm;
    let ratio_x = if xn > 0.0 { anchor.xj_dot_a[j] / xn } else { 0.0 };
    if ratio_b > ratio_x.abs() {
        BoundPair { u_plus: plane_plus, u_minus: plane_minus, case: BoundCase::HalfSpace }
    } else if ratio_x > 0.0 {
        BoundPair { u_plus: plane_plus, u_minus: ball_minus(), case: BoundCase::MinusOnSphere }
    } else if ratio_x < 0.0 {
        BoundPair { u_plus: ball_plus(), u_minus: plane_minus, case: BoundCase::PlusOnSphere }
    } else {
        // unreachable for a valid anchor: a ≠ 0 forces ⟨b, a⟩ ≥ ‖a‖² > 0
        BoundPair { u_plus: plane_plus, u_minus: plane_minus, case: BoundCase::HalfSpace }
    }
}

/// `u_j^±(λ2)` for one feature.
pub fn sasvi_bounds(anchor: &ScreeningAnchor, j: usize, lambda2: f64) -> Result<BoundPair> {
    if j >= anchor.p() {
        return Err(Error::Dimension(format!("feature {j} out of range (p = {})", anchor.p())));
    }
    let b = anchor.b_vector(lambda2)?;
    Ok(bounds_with(anchor, &b, j))
}

/// `u_j^±(λ2)` for every feature.
pub fn sasvi_bounds_all(anchor: &ScreeningAnchor, lambda2: f64) -> Result<Vec<BoundPair>> {
    let b = anchor.b_vector(lambda2)?;
    Ok((0..anchor.p()).map(|j| bounds_with(anchor, &b, j)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Keep,
    Discard,
}

/// Discard iff both bounds are below `1 − margin`.
pub fn screen_feature(bound: &BoundPair, margin: f64) -> Decision {
    let limit = 1.0 - margin;
    if bound.u_plus < limit && bound.u_minus < limit {
        Decision::Discard
    } else {
        Decision::Keep
    }
}

/// Diagnostic dump: `j,lambda2,u_plus,u_minus,case_tag`.
pub fn bounds_csv(lambda2: f64, bounds: &[BoundPair]) -> String {
    let mut out = String::from("j,lambda2,u_plus,u_minus,case_tag\n");
    for (j, b) in bounds.iter().enumerate() {
        let _ = writeln!(out, "{j},{lambda2:?},{:?},{:?},{}", b.u_plus, b.u_minus, b.case.tag());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec};
    use crate::solver::{solve, SolverConfig};

    fn instance(n: usize, p: usize, seed: u64) -> ProblemInstance {
        generate_synthetic(&SyntheticSpec { n, p, p_bar: 5.min(p), rho: 0.5, sigma: 0.1, seed })
            .unwrap()
            .instance
    }

    fn anchor_at(inst: &ProblemInstance, ratio: f64) -> ScreeningAnchor {
        let lmax = lambda_max(inst).unwrap();
        let sol = solve(inst, ratio * lmax, None, &SolverConfig::default()).unwrap();
        build_anchor(inst, &sol).unwrap()
    }

    #[test]
    fn anchor_at_lambda_max_has_zero_prediction() {
        let inst = instance(20, 40, 1);
        let anchor = anchor_at(&inst, 1.0);
        assert!(anchor.a_is_zero);
        assert_eq!(anchor.a_norm2, 0.0);
        for (t, y) in anchor.theta1.iter().zip(inst.y()) {
            assert_eq!(*t, y / anchor.lambda_max);
        }
        let b = sasvi_bounds(&anchor, 3, 0.5 * anchor.lambda1).unwrap();
        assert_eq!(b.case, BoundCase::ZeroPrediction);
        let bs = anchor.b_vector(0.5 * anchor.lambda1).unwrap();
        assert_eq!(bs.b_dot_a, 0.0);
        assert!((bs.b_norm - bs.gamma * inst.y_norm()).abs() < 1e-12 * bs.b_norm);
    }

    #[test]
    fn prediction_identity_and_acute_angle() {
        let inst = instance(20, 40, 2);
        let lmax = lambda_max(&inst).unwrap();
        let l1 = 0.7 * lmax;
        let sol = solve(&inst, l1, None, &SolverConfig::default()).unwrap();
        let anchor = build_anchor(&inst, &sol).unwrap();
        assert!(!anchor.a_is_zero);
        let xb = inst.predict(&sol.beta);
        let diff: f64 = anchor.a.iter().zip(&xb).map(|(a, v)| (a - v / l1).powi(2)).sum::<f64>().sqrt();
        assert!(diff <= 1e-8, "{diff}");
        for k in 1..50 {
            let l2 = l1 * (1.0 - k as f64 / 50.0).max(1e-3);
            let b = anchor.b_vector(l2).unwrap();
            assert!(b.b_norm > 0.0);
            assert!(b.b_dot_a > 0.0);
        }
    }

    #[test]
    fn gamma_zero_limit() {
        let inst = instance(15, 30, 3);
        let anchor = anchor_at(&inst, 0.6);
        let b = anchor.b_vector(anchor.lambda1).unwrap();
        assert_eq!(b.gamma, 0.0);
        assert_eq!(b.b_norm2, anchor.a_norm2);
        assert_eq!(b.b_dot_a, anchor.a_norm2);
        for j in 0..anchor.p() {
            let bp = sasvi_bounds(&anchor, j, anchor.lambda1).unwrap();
            let t = anchor.xj_dot_theta1[j];
            assert!((bp.u_plus - t).abs() < 1e-9 && (bp.u_minus + t).abs() < 1e-9, "j={j} {bp:?}");
        }
    }

    #[test]
    fn b_scalars_match_explicit_vector() {
        let inst = instance(12, 25, 4);
        let anchor = anchor_at(&inst, 0.5);
        for l2 in [0.49, 0.3, 0.05].map(|r| r * anchor.lambda_max) {
            let bs = anchor.b_vector(l2).unwrap();
            let b: Vec<f64> = inst.y().iter().zip(&anchor.theta1).map(|(y, t)| y / l2 - t).collect();
            let rel = |u: f64, v: f64| (u - v).abs() / v.abs().max(1e-300);
            assert!(rel(bs.b_norm2, norm2_sq(&b)) < 1e-10);
            assert!(rel(bs.b_dot_a, dot(&b, &anchor.a)) < 1e-10);
            for j in 0..inst.p() {
                let direct = dot(inst.column(j), &b);
                assert!((bs.xj_dot_b(&anchor, j) - direct).abs() <= 1e-10 * (inst.col_norms()[j] * bs.b_norm));
            }
        }
    }

    #[test]
    fn perp_norm_relation() {
        let inst = instance(12, 25, 5);
        let anchor = anchor_at(&inst, 0.4);
        for j in 0..anchor.p() {
            let direct = {
                let c = anchor.xj_dot_a[j] / anchor.a_norm2;
                inst.column(j).iter().zip(&anchor.a).map(|(x, a)| (x - c * a).powi(2)).sum::<f64>()
            };
            let nj2 = anchor.xj_norm[j].powi(2);
            assert!((anchor.xj_perp_norm[j].powi(2) - direct).abs() <= 1e-9 * nj2);
        }
    }

    #[test]
    fn linear_min_examples() {
        let s2 = 2f64.sqrt();
        let v = constrained_linear_min(&[1.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v + s2).abs() < 1e-15);
        let v = constrained_linear_min(&[0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-15);
        let v = constrained_linear_min(&[3.0, 4.0, 0.0], &[0.0; 3], &[0.0, 0.0, 2.0]).unwrap();
        assert!((v + 10.0).abs() < 1e-15);
        assert!(matches!(constrained_linear_min(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroVector("x"))));
        assert!(matches!(constrained_linear_min(&[1.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]), Err(Error::ZeroVector("b"))));
    }

    #[test]
    fn rejects_parameter_ordering_violations() {
        let inst = instance(10, 10, 6);
        let anchor = anchor_at(&inst, 0.5);
        assert!(sasvi_bounds(&anchor, 0, anchor.lambda1 * 1.01).is_err());
        assert!(sasvi_bounds(&anchor, 0, 0.0).is_err());
        assert!(sasvi_bounds(&anchor, 0, -1.0).is_err());
        assert!(sasvi_bounds(&anchor, 99, 0.1).is_err());
    }

    #[test]
    fn uncertified_solution_rejected() {
        let inst = instance(10, 20, 7);
        let lmax = lambda_max(&inst).unwrap();
        let sol = solve(&inst, 0.2 * lmax, None, &SolverConfig { max_sweeps: 1, ..Default::default() }).unwrap();
        assert!(matches!(build_anchor(&inst, &sol), Err(Error::Uncertified { .. })));
    }

    #[test]
    fn orthogonal_feature_bounds_are_flat() {
        // x_2 = a exactly gives x_2⊥ = 0; build that by hand on a two-column design
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
        let y = vec![2.0, 0.5, 1.0];
        let inst = ProblemInstance::from_rows(&rows, y).unwrap();
        let lmax = lambda_max(&inst).unwrap();
        let l1 = 0.6 * lmax;
        let sol = solve(&inst, l1, None, &SolverConfig::default()).unwrap();
        let anchor = build_anchor(&inst, &sol).unwrap();
        // only column 0 is active, so a is parallel to e1 and column 1 is orthogonal to a
        assert!(anchor.xj_dot_a[1].abs() < 1e-12);
        // column 1 is not parallel to a, so its perp part is itself
        assert!((anchor.xj_perp_norm[1] - 1.0).abs() < 1e-12);
        // column 0 is parallel to a: perp part vanishes and bounds do not move with λ2
        assert!(anchor.xj_perp_norm[0] < 1e-7);
        for r in [0.9, 0.5, 0.1, 0.01] {
            let bp = sasvi_bounds(&anchor, 0, r * l1).unwrap();
            assert_eq!(bp.case, BoundCase::MinusOnSphere);
            assert!((bp.u_plus - anchor.xj_dot_theta1[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn screen_feature_margin() {
        let pair = |u, v| BoundPair { u_plus: u, u_minus: v, case: BoundCase::HalfSpace };
        assert_eq!(screen_feature(&pair(0.3, 0.4), 1e-6), Decision::Discard);
        assert_eq!(screen_feature(&pair(0.999_999, 0.2), 1e-6), Decision::Keep);
        assert_eq!(screen_feature(&pair(0.2, 1.5), 0.0), Decision::Keep);
    }

    #[test]
    fn bounds_csv_layout() {
        let pairs = [BoundPair { u_plus: 0.5, u_minus: 0.25, case: BoundCase::MinusOnSphere }];
        let csv = bounds_csv(0.5, &pairs);
        assert_eq!(csv, "j,lambda2,u_plus,u_minus,case_tag\n0,0.5,0.5,0.25,2\n");
    }
}
