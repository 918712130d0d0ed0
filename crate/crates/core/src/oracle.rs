//! Brute-force reference computations for tests and acceptance runs.
//!
//! Nothing in the screening pipeline calls into this module. The functions
//! here recompute the same quantities as [`crate::geometry`] by independent
//! means: exhaustive search in the plane spanned by `a` and `x`, and rejection
//! sampling of the feasible set.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{constrained_linear_min, ScreeningAnchor};
use crate::linalg::{dot, norm2, norm2_sq};
use crate::rules::ScreenReport;
use crate::solver::PrimalDualSolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub samples: usize,
    pub planar_steps: usize,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { samples: 100_000, planar_steps: 1_000_000, tol: 1e-5 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.planar_steps == 0 || !(self.tol > 0.0) {
            return Err(Error::Config("oracle samples, planar_steps and tol must be positive".into()));
        }
        Ok(())
    }
}

/// `min ⟨x, r⟩` over `{r : ⟨a, r + b⟩ ≤ 0, ‖r‖ ≤ ‖b‖}` restricted to `span{a, x}`.
///
/// In the orthonormal frame `e1 = a/‖a‖`, `e2 ∝ x⊥` the feasible set is the
/// disc of radius `‖b‖` cut by `s ≤ −⟨a, b⟩/‖a‖`. Its boundary is an arc and a
/// chord; both are swept with `planar_steps` points and the chord endpoints
/// are evaluated exactly.
pub fn planar_min(x: &[f64], a: &[f64], b: &[f64], config: &OracleConfig) -> Result<f64> {
    config.validate()?;
    if x.len() != a.len() || a.len() != b.len() {
        return Err(Error::Dimension("x, a and b must have equal length".into()));
    }
    let x_norm = norm2(x);
    let radius = norm2(b);
    if x_norm == 0.0 {
        return Err(Error::ZeroVector("x"));
    }
    if radius == 0.0 {
        return Err(Error::ZeroVector("b"));
    }
    let steps = config.planar_steps;
    let a_norm = norm2(a);
    if a_norm == 0.0 {
        // r = s x/‖x‖ with |s| ≤ ‖b‖
        return Ok(sweep_segment(-radius, radius, steps, |s| s * x_norm));
    }

    let x1 = dot(x, a) / a_norm;
    let x2 = norm2_sq(x) - x1 * x1;
    let x2 = if x2 > 1e-28 * x_norm * x_norm { x2.sqrt() } else { 0.0 };
    let s_max = -dot(a, b) / a_norm;
    if s_max < -radius * (1.0 + 1e-12) {
        return Err(Error::Geometry("feasible set is empty".into()));
    }
    let s_max = s_max.max(-radius);
    let objective = |s: f64, u: f64| s * x1 + u * x2;

    if x2 == 0.0 {
        // x is parallel to a: the problem lives on the line through e1
        return Ok(sweep_segment(-radius, s_max.min(radius), steps, |s| s * x1));
    }

    let mut best = f64::INFINITY;
    // arc
    let dphi = std::f64::consts::TAU / steps as f64;
    for k in 0..steps {
        let (sin, cos) = (k as f64 * dphi).sin_cos();
        let (s, u) = (radius * cos, radius * sin);
        if s <= s_max {
            best = best.min(objective(s, u));
        }
    }
    // chord
    if s_max < radius {
        let half = (radius * radius - s_max * s_max).max(0.0).sqrt();
        best = best.min(sweep_segment(-half, half, steps, |u| objective(s_max, u)));
    }
    Ok(best)
}

fn sweep_segment(lo: f64, hi: f64, steps: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut best = f(lo).min(f(hi));
    let h = (hi - lo) / steps as f64;
    for k in 1..steps {
        best = best.min(f(lo + k as f64 * h));
    }
    best
}

fn b_vector(anchor: &ScreeningAnchor, lambda2: f64) -> Vec<f64> {
    anchor.y.iter().zip(&anchor.theta1).map(|(y, t)| y / lambda2 - t).collect()
}

fn midpoint_dot(anchor: &ScreeningAnchor, lambda2: f64, x: &[f64]) -> f64 {
    // ⟨x, θ1 + y/λ2⟩
    x.iter().zip(anchor.theta1.iter().zip(&anchor.y)).map(|(xi, (t, y))| xi * (t + y / lambda2)).sum()
}

/// `max ⟨x, θ⟩` over the feasible set at `λ2`, via [`planar_min`].
///
/// With `θ = (θ1 + y/λ2 + r)/2` the maximum is
/// `½⟨x, θ1 + y/λ2⟩ − ½ min ⟨−x, r⟩`.
pub fn planar_max(anchor: &ScreeningAnchor, lambda2: f64, x: &[f64], config: &OracleConfig) -> Result<f64> {
    anchor.b_vector(lambda2)?;
    let b = b_vector(anchor, lambda2);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let m = planar_min(&neg, &anchor.a, &b, config)?;
    Ok(0.5 * midpoint_dot(anchor, lambda2, x) - 0.5 * m)
}

/// `(u+, u−)` for an arbitrary vector `x`, evaluated from explicit n-vectors.
pub fn explicit_bounds(anchor: &ScreeningAnchor, lambda2: f64, x: &[f64]) -> Result<(f64, f64)> {
    anchor.b_vector(lambda2)?;
    let b = b_vector(anchor, lambda2);
    let mid = midpoint_dot(anchor, lambda2, x);
    if norm2(x) == 0.0 {
        return Ok((0.0, 0.0));
    }
    if norm2(&b) == 0.0 {
        let t = dot(x, &anchor.theta1);
        return Ok((t, -t));
    }
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let u_plus = 0.5 * mid - 0.5 * constrained_linear_min(&neg, &anchor.a, &b)?;
    let u_minus = -0.5 * mid - 0.5 * constrained_linear_min(x, &anchor.a, &b)?;
    Ok((u_plus, u_minus))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMax {
    /// `-inf` when nothing was accepted.
    pub max: f64,
    pub accepted: usize,
}

/// Largest `⟨x, θ⟩` over uniform samples of the feasible set at `λ2`.
///
/// The target distribution is uniform on the ball with diameter `[θ1, y/λ2]`
/// restricted to `⟨θ1 − y/λ1, θ − θ1⟩ ≥ 0`. That set is a ball cap, which can
/// be a tiny fraction of the ball, so candidates are drawn uniformly from the
/// cylinder circumscribing the cap and kept when they pass both membership
/// tests. `accepted` counts the kept points.
pub fn sample_feasible_max<R: Rng + ?Sized>(
    anchor: &ScreeningAnchor,
    lambda2: f64,
    x: &[f64],
    config: &OracleConfig,
    rng: &mut R,
) -> Result<SampleMax> {
    config.validate()?;
    anchor.b_vector(lambda2)?;
    let n = anchor.n();
    if x.len() != n {
        return Err(Error::Dimension(format!("x has {} entries, n = {n}", x.len())));
    }
    let b = b_vector(anchor, lambda2);
    let radius = 0.5 * norm2(&b);
    let center: Vec<f64> = anchor.theta1.iter().zip(&b).map(|(t, bi)| t + 0.5 * bi).collect();
    let a_norm = norm2(&anchor.a);
    // cap = {z : ⟨e, z⟩ ≤ −h, ‖z‖ ≤ radius} around the centre, with e = a/‖a‖
    let (e, h): (Vec<f64>, f64) = if a_norm == 0.0 {
        (vec![0.0; n], -radius)
    } else {
        let e: Vec<f64> = anchor.a.iter().map(|v| v / a_norm).collect();
        let h = 0.5 * dot(&b, &anchor.a) / a_norm;
        (e, h.min(radius))
    };
    let width = (radius * radius - h.max(0.0).powi(2)).max(0.0).sqrt();
    let axial = a_norm != 0.0 && n > 1;

    let mut z = vec![0.0; n];
    let mut best = f64::NEG_INFINITY;
    let mut accepted = 0;
    for _ in 0..config.samples {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        if axial {
            // uniform in the cross-section ball of radius `width`, uniform along e on [−radius, −h]
            let along = dot(&z, &e);
            z.iter_mut().zip(&e).for_each(|(v, ei)| *v -= along * ei);
            let zn = norm2(&z);
            if zn == 0.0 {
                continue;
            }
            let rho = width * rng.random::<f64>().powf(1.0 / (n - 1) as f64) / zn;
            let s = -radius + (radius - h) * rng.random::<f64>();
            z.iter_mut().zip(&e).for_each(|(v, ei)| *v = rho * *v + s * ei);
        } else {
            let zn = norm2(&z);
            if zn == 0.0 {
                continue;
            }
            let rho = radius * rng.random::<f64>().powf(1.0 / n as f64) / zn;
            z.iter_mut().for_each(|v| *v *= rho);
        }
        if norm2(&z) > radius {
            continue;
        }
        // θ − θ1 = b/2 + z must satisfy ⟨a, θ − θ1⟩ ≤ 0
        let along_a: f64 = anchor.a.iter().zip(b.iter().zip(&z)).map(|(ai, (bi, zi))| ai * (0.5 * bi + zi)).sum();
        if along_a > 0.0 {
            continue;
        }
        accepted += 1;
        let value: f64 = x.iter().zip(center.iter().zip(&z)).map(|(xi, (ci, zi))| xi * (ci + zi)).sum();
        best = best.max(value);
    }
    Ok(SampleMax { max: best, accepted })
}

/// Discarded features whose reference coefficient exceeds `10·gap_tol`.
pub fn verify_safety(report: &ScreenReport, reference: &PrimalDualSolution, gap_tol: f64) -> Result<Vec<usize>> {
    if !reference.certified || reference.gap > gap_tol {
        return Err(Error::Uncertified { lambda: reference.lambda, gap: reference.gap });
    }
    let scale = report.lambda2.abs().max(reference.lambda.abs());
    if (reference.lambda - report.lambda2).abs() > 1e-12 * scale {
        return Err(Error::InvalidLambda(format!(
            "reference solved at {} but report targets {}",
            reference.lambda, report.lambda2
        )));
    }
    if reference.beta.len() != report.p() {
        return Err(Error::Dimension("reference and report disagree on p".into()));
    }
    let limit = 10.0 * gap_tol;
    Ok(report.discarded.iter().copied().filter(|&j| reference.beta[j].abs() > limit).collect())
}
