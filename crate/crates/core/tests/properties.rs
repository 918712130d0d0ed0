//! Randomized properties of the screening bounds.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sasvi_core::geometry::{constrained_linear_min, sasvi_bounds_all};
use sasvi_core::oracle::explicit_bounds;
use sasvi_core::{build_anchor, generate_synthetic, lambda_max, screen, solve, RuleKind, ScreeningAnchor, SolverConfig, SyntheticSpec};
use sasvi_core::{ProblemInstance, PrimalDualSolution};

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn setup(seed: u64, n: usize, p: usize, ratio: f64) -> (ProblemInstance, ScreeningAnchor, PrimalDualSolution) {
    let inst = generate_synthetic(&SyntheticSpec { n, p, p_bar: 3, rho: 0.5, sigma: 0.1, seed }).unwrap().instance;
    let lmax = lambda_max(&inst).unwrap();
    let sol = solve(&inst, ratio * lmax, None, &SolverConfig::default()).unwrap();
    let anchor = build_anchor(&inst, &sol).unwrap();
    (inst, anchor, sol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_is_below_every_feasible_point(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(&mut rng, n);
        let a = gaussian(&mut rng, n);
        let mut b = gaussian(&mut rng, n);
        if dot(&a, &b) < 0.0 {
            b.iter_mut().for_each(|v| *v = -*v);
        }
        let min = constrained_linear_min(&x, &a, &b).unwrap();
        let radius = dot(&b, &b).sqrt();
        let scale = dot(&x, &x).sqrt() * radius;
        for _ in 0..500 {
            let dir = gaussian(&mut rng, n);
            let len = dot(&dir, &dir).sqrt();
            let shrink: f64 = rng.random::<f64>().powf(1.0 / n as f64);
            let r: Vec<f64> = dir.iter().map(|v| v / len * radius * shrink).collect();
            let rb: Vec<f64> = r.iter().zip(&b).map(|(u, v)| u + v).collect();
            if dot(&a, &rb) <= 0.0 {
                prop_assert!(min <= dot(&x, &r) + 1e-10 * scale, "min {min} above feasible {}", dot(&x, &r));
            }
        }
        // the minimum is attained: the sphere point -b lies in the set
        prop_assert!(min <= -dot(&x, &b) + 1e-10 * scale);
    }

    #[test]
    fn bounds_cover_the_dual_optimum(seed in 0u64..10_000, ratio in 0.1f64..0.95, frac in 0.05f64..1.0) {
        let (inst, anchor, sol) = setup(seed, 12, 25, ratio);
        let l2 = frac * anchor.lambda1;
        let target = solve(&inst, l2, Some(&sol.beta), &SolverConfig::default()).unwrap();
        let bounds = sasvi_bounds_all(&anchor, l2).unwrap();
        for (j, bp) in bounds.iter().enumerate() {
            let t = target.xt_theta[j];
            prop_assert!(bp.u_plus + bp.u_minus >= -1e-9, "j={j} {bp:?}");
            prop_assert!(bp.u_plus >= t - 1e-6 && bp.u_minus >= -t - 1e-6, "j={j} t={t} {bp:?}");
            prop_assert!(bp.max() >= anchor.xj_dot_theta1[j].abs() - 1e-9 || frac < 1.0);
        }
    }

    #[test]
    fn sasvi_never_looser_than_dpp(seed in 0u64..10_000, ratio in 0.1f64..0.95, frac in 0.05f64..1.0) {
        let (_, anchor, _) = setup(seed, 12, 25, ratio);
        let l2 = frac * anchor.lambda1;
        let sasvi = screen(RuleKind::Sasvi, &anchor, l2, 1e-6).unwrap();
        let dpp = screen(RuleKind::Dpp, &anchor, l2, 1e-6).unwrap();
        for (s, d) in sasvi.bounds.iter().zip(&dpp.bounds) {
            prop_assert!(*s <= d + 1e-9 * (1.0 + d.abs()), "sasvi {s} dpp {d}");
        }
        for j in &dpp.discarded {
            prop_assert!(sasvi.discarded.binary_search(j).is_ok());
        }
    }

    #[test]
    fn cached_scalars_match_explicit_vectors(seed in 0u64..10_000, ratio in 0.1f64..0.95, frac in 0.05f64..1.0) {
        let (inst, anchor, _) = setup(seed, 12, 25, ratio);
        let l2 = frac * anchor.lambda1;
        let bounds = sasvi_bounds_all(&anchor, l2).unwrap();
        for (j, bp) in bounds.iter().enumerate() {
            let (up, um) = explicit_bounds(&anchor, l2, inst.column(j)).unwrap();
            let tol = 1e-10 * (1.0 + up.abs().max(um.abs()));
            prop_assert!((bp.u_plus - up).abs() <= tol, "j={j} {} vs {up}", bp.u_plus);
            prop_assert!((bp.u_minus - um).abs() <= tol, "j={j} {} vs {um}", bp.u_minus);
        }
    }

    #[test]
    fn bounds_are_continuous_across_cases(seed in 0u64..10_000, ratio in 0.1f64..0.95, frac in 0.05f64..0.99) {
        let (_, anchor, _) = setup(seed, 12, 25, ratio);
        let l2 = frac * anchor.lambda1;
        let here = sasvi_bounds_all(&anchor, l2).unwrap();
        let near = sasvi_bounds_all(&anchor, l2 * (1.0 + 1e-9)).unwrap();
        for (h, n) in here.iter().zip(&near) {
            let scale = 1.0 + h.u_plus.abs().max(h.u_minus.abs());
            prop_assert!((h.u_plus - n.u_plus).abs() <= 1e-5 * scale, "{h:?} {n:?}");
            prop_assert!((h.u_minus - n.u_minus).abs() <= 1e-5 * scale, "{h:?} {n:?}");
        }
    }
}
