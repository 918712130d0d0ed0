//! Fixtures shared by the benchmarks.

use sasvi_core::{build_anchor, generate_synthetic, lambda_max, solve, ProblemInstance, ScreeningAnchor, SolverConfig, SyntheticSpec};

/// Correlated-Gaussian instance with `rho = 0.5` and `sigma = 0.1`.
pub fn instance(n: usize, p: usize, p_bar: usize, seed: u64) -> ProblemInstance {
    generate_synthetic(&SyntheticSpec { n, p, p_bar, rho: 0.5, sigma: 0.1, seed }).expect("valid spec").instance
}

/// Anchor from a certified solve at `ratio · λmax`.
pub fn anchor_at(inst: &ProblemInstance, ratio: f64) -> ScreeningAnchor {
    let lmax = lambda_max(inst).expect("nonzero response");
    let sol = solve(inst, ratio * lmax, None, &SolverConfig::default()).expect("solve");
    build_anchor(inst, &sol).expect("certified anchor")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let inst = instance(20, 50, 5, 1);
        let anchor = anchor_at(&inst, 0.5);
        assert_eq!(anchor.p(), 50);
        assert!(anchor.lambda1 < anchor.lambda_max);
    }
}
