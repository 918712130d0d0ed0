//! Screening rules behind one interface.
//!
//! Every rule maps `(anchor, λ2)` to a per-feature upper bound on
//! `|⟨x_j, θ2*⟩|` and discards feature `j` when that bound is below
//! `1 − margin`. Sasvi, SAFE and DPP are safe; the strong rule is a heuristic
//! whose discards must be checked against the KKT conditions after solving.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bounds_with, ScreeningAnchor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Sasvi,
    Safe,
    Dpp,
    Strong,
}

impl RuleKind {
    pub const ALL: [RuleKind; 4] = [RuleKind::Sasvi, RuleKind::Safe, RuleKind::Dpp, RuleKind::Strong];

    /// Whether discarded features are guaranteed to be zero at `λ2`.
    pub fn is_safe(self) -> bool {
        !matches!(self, RuleKind::Strong)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Sasvi => "sasvi",
            RuleKind::Safe => "safe",
            RuleKind::Dpp => "dpp",
            RuleKind::Strong => "strong",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sasvi" => Ok(RuleKind::Sasvi),
            "safe" => Ok(RuleKind::Safe),
            "dpp" => Ok(RuleKind::Dpp),
            "strong" => Ok(RuleKind::Strong),
            other => Err(Error::Config(format!("unknown rule '{other}' (expected sasvi, safe, dpp or strong)"))),
        }
    }
}

/// Outcome of screening every feature for one `λ2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub rule: RuleKind,
    pub lambda1: f64,
    pub lambda2: f64,
    pub margin: f64,
    /// Ascending feature indices.
    pub discarded: Vec<usize>,
    /// Per-feature bound on `|⟨x_j, θ2*⟩|` (for Sasvi, `max(u+, u−)`).
    pub bounds: Vec<f64>,
    pub needs_kkt_check: bool,
}

impl ScreenReport {
    pub fn p(&self) -> usize {
        self.bounds.len()
    }

    pub fn survivors(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.p() - self.discarded.len());
        let mut d = self.discarded.iter().peekable();
        for j in 0..self.p() {
            if d.peek() == Some(&&j) {
                d.next();
            } else {
                out.push(j);
            }
        }
        out
    }

    pub fn rejection_ratio(&self) -> f64 {
        if self.p() == 0 {
            0.0
        } else {
            self.discarded.len() as f64 / self.p() as f64
        }
    }

    /// `rule,lambda1,lambda2,j,bound,discarded` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rule,lambda1,lambda2,j,bound,discarded\n");
        let mut d = self.discarded.iter().peekable();
        for (j, b) in self.bounds.iter().enumerate() {
            let hit = d.peek() == Some(&&j);
            if hit {
                d.next();
            }
            let _ = writeln!(
                out,
                "{},{:?},{:?},{j},{b:?},{}",
                self.rule,
                self.lambda1,
                self.lambda2,
                u8::from(hit)
            );
        }
        out
    }
}

/// Screens all features at `lambda2` with the given rule.
pub fn screen(rule: RuleKind, anchor: &ScreeningAnchor, lambda2: f64, margin: f64) -> Result<ScreenReport> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Config(format!("margin must lie in [0, 1), got {margin}")));
    }
    let bounds = match rule {
        RuleKind::Sasvi => sasvi(anchor, lambda2)?,
        RuleKind::Safe => safe(anchor, lambda2)?,
        RuleKind::Dpp => dpp(anchor, lambda2)?,
        RuleKind::Strong => strong(anchor, lambda2)?,
    };
    let limit = 1.0 - margin;
    let discarded = bounds.iter().enumerate().filter(|(_, b)| **b < limit).map(|(j, _)| j).collect();
    Ok(ScreenReport {
        rule,
        lambda1: anchor.lambda1,
        lambda2,
        margin,
        discarded,
        bounds,
        needs_kkt_check: !rule.is_safe(),
    })
}

fn sasvi(anchor: &ScreeningAnchor, lambda2: f64) -> Result<Vec<f64>> {
    let b = anchor.b_vector(lambda2)?;
    Ok((0..anchor.p()).map(|j| bounds_with(anchor, &b, j).max()).collect())
}

/// Ball centred at `y/λ2` with radius `‖s*θ1 − y/λ2‖`, where `s*θ1` is the
/// best rescaling of `θ1` within `|s| ≤ 1`.
fn safe(anchor: &ScreeningAnchor, lambda2: f64) -> Result<Vec<f64>> {
    check_lambda2(anchor, lambda2)?;
    if anchor.theta1_norm2 == 0.0 {
        return Err(Error::ZeroVector("theta1"));
    }
    let s = (anchor.theta1_dot_y / (lambda2 * anchor.theta1_norm2)).clamp(-1.0, 1.0);
    let radius = anchor
        .theta1
        .iter()
        .zip(&anchor.y)
        .map(|(t, y)| (s * t - y / lambda2).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(anchor
        .xj_dot_y
        .iter()
        .zip(&anchor.xj_norm)
        .map(|(xy, nj)| xy.abs() / lambda2 + nj * radius)
        .collect())
}

/// Ball centred at `θ1` with radius `‖y‖(1/λ2 − 1/λ1)`.
fn dpp(anchor: &ScreeningAnchor, lambda2: f64) -> Result<Vec<f64>> {
    check_lambda2(anchor, lambda2)?;
    let radius = anchor.y_norm2.sqrt() * (1.0 / lambda2 - 1.0 / anchor.lambda1);
    Ok(anchor
        .xj_dot_theta1
        .iter()
        .zip(&anchor.xj_norm)
        .map(|(t, nj)| t.abs() + nj * radius)
        .collect())
}

fn strong(anchor: &ScreeningAnchor, lambda2: f64) -> Result<Vec<f64>> {
    check_lambda2(anchor, lambda2)?;
    let ratio = anchor.lambda1 / lambda2;
    Ok(anchor.xj_dot_theta1.iter().map(|t| ratio * t.abs() + ratio - 1.0).collect())
}

fn check_lambda2(anchor: &ScreeningAnchor, lambda2: f64) -> Result<()> {
    anchor.b_vector(lambda2).map(|_| ())
}
