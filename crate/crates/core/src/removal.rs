//! Sure-removal parameters.
//!
//! After orienting `x_j` so that `⟨x_j, a⟩ ≥ 0`, `u+` never decreases as `λ2`
//! moves down from `λ1`, and `u−` does the same except on `[λ2y, λ2a]` when
//! `λ2a > λ2y`, where it turns back down. The breakpoints come from the roots
//! of
//!
//! ```text
//! f(λ) = ⟨y/λ − θ1, a⟩ / ‖y/λ − θ1‖     (increasing)
//! g(λ) = ⟨y/λ − θ1, y⟩ / ‖y/λ − θ1‖     (decreasing)
//! ```
//!
//! so the largest `λ` at which `max(u+, u−)` reaches `1 − margin` can be
//! found by bisection on at most three monotone segments.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bounds_with, BoundPair, ScreeningAnchor};

/// Bisection budget for roots and crossings.
pub const BISECTION_ITERS: usize = 50;
/// Left end of every search interval, relative to `λ1`.
pub const LOWER_REL: f64 = 1e-12;

/// Where a feature is guaranteed to be discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "lambda")]
pub enum RemovalThreshold {
    /// Discarded for every `λ2` in `(0, λ1)`.
    Everywhere,
    /// Discarded for every `λ2` in `(λ_s, λ1)`.
    Above(f64),
    /// Not discarded for `λ2` just below `λ1`.
    Never,
}

impl RemovalThreshold {
    /// `0` for [`Everywhere`](Self::Everywhere), `None` for [`Never`](Self::Never).
    pub fn value(self) -> Option<f64> {
        match self {
            RemovalThreshold::Everywhere => Some(0.0),
            RemovalThreshold::Above(l) => Some(l),
            RemovalThreshold::Never => None,
        }
    }

    pub fn covers(self, lambda2: f64) -> bool {
        match self {
            RemovalThreshold::Everywhere => true,
            RemovalThreshold::Above(l) => lambda2 > l,
            RemovalThreshold::Never => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemovalCase {
    /// `λ2a ≤ λ2y`: both bounds grow as `λ2` decreases.
    Monotone,
    /// `λ2a > λ2y`: `u−` has a local maximum at `λ2a`.
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalProfile {
    pub j: usize,
    /// `⟨x_j, a⟩ < 0`, so the profile describes `−x_j`.
    pub flipped: bool,
    pub lambda_2a: f64,
    pub lambda_2y: f64,
    pub case: RemovalCase,
    /// `λ2a == λ2y` exactly; routed to the monotone case.
    pub tie: bool,
    pub lambda_s: RemovalThreshold,
}

impl RemovalProfile {
    /// `(u+, u−)` for the oriented feature (swapped when `flipped`).
    pub fn oriented(&self, bound: &BoundPair) -> (f64, f64) {
        if self.flipped {
            (bound.u_minus, bound.u_plus)
        } else {
            (bound.u_plus, bound.u_minus)
        }
    }
}

fn check_lambda(anchor: &ScreeningAnchor, lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= anchor.lambda1) {
        return Err(Error::InvalidLambda(format!(
            "lambda = {lambda} outside (0, lambda1 = {}]",
            anchor.lambda1
        )));
    }
    Ok(())
}

/// `⟨y/λ − θ1, a⟩ / ‖y/λ − θ1‖`.
pub fn aux_f(anchor: &ScreeningAnchor, lambda: f64) -> Result<f64> {
    check_lambda(anchor, lambda)?;
    let b = anchor.b_vector(lambda)?;
    if b.b_norm == 0.0 {
        return Err(Error::ZeroVector("b"));
    }
    Ok(b.b_dot_a / b.b_norm)
}

/// `⟨y/λ − θ1, y⟩ / ‖y/λ − θ1‖`.
pub fn aux_g(anchor: &ScreeningAnchor, lambda: f64) -> Result<f64> {
    check_lambda(anchor, lambda)?;
    let b = anchor.b_vector(lambda)?;
    if b.b_norm == 0.0 {
        return Err(Error::ZeroVector("b"));
    }
    Ok((anchor.a_dot_y + b.gamma * anchor.y_norm2) / b.b_norm)
}

/// Shrinks `[lo, hi]` geometrically around the switch of a predicate that
/// holds at `lo` and fails at `hi`.
fn bisect(mut lo: f64, mut hi: f64, holds: impl Fn(f64) -> bool) -> (f64, f64) {
    for _ in 0..BISECTION_ITERS {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Computes `λ2a`, `λ2y`, the case split and `λ_s` for feature `j`.
pub fn removal_profile(anchor: &ScreeningAnchor, j: usize, margin: f64) -> Result<RemovalProfile> {
    if j >= anchor.p() {
        return Err(Error::Dimension(format!("feature {j} out of range (p = {})", anchor.p())));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Config(format!("margin must lie in [0, 1), got {margin}")));
    }
    let l1 = anchor.lambda1;
    let lo = LOWER_REL * l1;
    let flipped = anchor.xj_dot_a[j] < 0.0;
    let sign = if flipped { -1.0 } else { 1.0 };
    let xn = anchor.xj_norm[j];

    let (lambda_2a, lambda_2y) = if anchor.a_is_zero || xn == 0.0 {
        (0.0, l1)
    } else {
        let y_norm = anchor.y_norm2.sqrt();
        let a_norm = anchor.a_norm2.sqrt();
        let xa = sign * anchor.xj_dot_a[j] / xn;
        let xy = sign * anchor.xj_dot_y[j] / xn;

        let l2a = if anchor.a_dot_y / y_norm >= xa {
            0.0
        } else {
            let f = |l: f64| aux_f(anchor, l).expect("lambda in range");
            if f(l1) <= xa {
                l1
            } else if f(lo) >= xa {
                lo
            } else {
                let (a, b) = bisect(lo, l1, |l| f(l) < xa);
                (a * b).sqrt()
            }
        };
        let l2y = if anchor.a_dot_y / a_norm >= xy {
            l1
        } else {
            let g = |l: f64| aux_g(anchor, l).expect("lambda in range");
            if g(lo) <= xy {
                lo
            } else {
                let (a, b) = bisect(lo, l1, |l| g(l) > xy);
                (a * b).sqrt()
            }
        };
        (l2a, l2y)
    };

    let case = if lambda_2a <= lambda_2y { RemovalCase::Monotone } else { RemovalCase::Bump };
    let lambda_s = threshold(anchor, j, margin, case, lambda_2a, lambda_2y)?;
    Ok(RemovalProfile { j, flipped, lambda_2a, lambda_2y, case, tie: lambda_2a == lambda_2y, lambda_s })
}

fn threshold(
    anchor: &ScreeningAnchor,
    j: usize,
    margin: f64,
    case: RemovalCase,
    l2a: f64,
    l2y: f64,
) -> Result<RemovalThreshold> {
    let limit = 1.0 - margin;
    let l1 = anchor.lambda1;
    // at λ2 = λ1 both bounds collapse to ±⟨x_j, θ1⟩
    if anchor.xj_dot_theta1[j].abs() >= limit {
        return Ok(RemovalThreshold::Never);
    }
    let reaches = |l: f64| -> bool {
        let b = anchor.b_vector(l).expect("lambda in range");
        bounds_with(anchor, &b, j).max() >= limit
    };
    let lo = LOWER_REL * l1;
    let mut cuts = vec![l1];
    if case == RemovalCase::Bump {
        // u− peaks at λ2a and dips at λ2y; on each piece the predicate switches at most once
        cuts.extend([l2a, l2y].into_iter().filter(|&c| c > lo && c < l1));
    }
    cuts.push(lo);
    for w in cuts.windows(2) {
        let (top, bottom) = (w[0], w[1]);
        if reaches(bottom) {
            let (_, hi) = bisect(bottom, top, reaches);
            return Ok(RemovalThreshold::Above(hi));
        }
    }
    Ok(RemovalThreshold::Everywhere)
}

/// `λ_s` for feature `j`: the feature is discarded for every `λ2 ∈ (λ_s, λ1)`.
pub fn sure_removal_lambda(anchor: &ScreeningAnchor, j: usize, margin: f64) -> Result<RemovalThreshold> {
    removal_profile(anchor, j, margin).map(|p| p.lambda_s)
}

pub fn removal_profiles(anchor: &ScreeningAnchor, margin: f64) -> Result<Vec<RemovalProfile>> {
    (0..anchor.p()).map(|j| removal_profile(anchor, j, margin)).collect()
}

/// `j,lambda_2a,lambda_2y,case,lambda_s,flipped`; `lambda_s` is `none` when
/// never removable and `0` when removable everywhere.
pub fn profiles_csv(profiles: &[RemovalProfile]) -> String {
    let mut out = String::from("j,lambda_2a,lambda_2y,case,lambda_s,flipped\n");
    for p in profiles {
        let case = match (p.case, p.tie) {
            (RemovalCase::Monotone, true) => "monotone-tie",
            (RemovalCase::Monotone, false) => "monotone",
            (RemovalCase::Bump, _) => "bump",
        };
        let ls = match p.lambda_s.value() {
            Some(v) => format!("{v:?}"),
            None => "none".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{:?},{:?},{case},{ls},{}",
            p.j,
            p.lambda_2a,
            p.lambda_2y,
            u8::from(p.flipped)
        );
    }
    out
}
