//! Randomized invariants over admissible parameters.

use proptest::prelude::*;

use qhahn::ensemble::{gap_bruteforce_all, gap_direct_all, weights, EnsembleParams};
use qhahn::precision::Mat2;
use qhahn::Ctx;

fn ensemble(q: f64, n: usize, k: usize, a: f64, b: f64) -> EnsembleParams {
    let ctx = Ctx::new(192).unwrap();
    EnsembleParams::new(ctx.from_f64(q), n, k.min(n), ctx.from_f64(a), ctx.from_f64(b)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gaps_are_a_distribution_function(q in 0.2f64..0.8, n in 2usize..8, k in 1usize..4, a in 0.1f64..1.2, b in 0.1f64..1.2) {
        let p = ensemble(q, n, k, a, b);
        let d = gap_direct_all(&p).unwrap();
        let tol = p.ctx().parse("1e-40").unwrap();
        for s in 0..d.len() {
            prop_assert!(d[s] > -tol.clone() && d[s] < p.ctx().one() + &tol);
            if s > 0 {
                prop_assert!(d[s] >= &d[s - 1] - &tol);
            }
        }
        prop_assert!(d[n + 1].rel_diff(&p.ctx().one()) < tol);
        // fewer than k sites below s: no room for all particles
        for s in 0..p.k {
            prop_assert!(d[s].abs() < tol);
        }
    }

    #[test]
    fn fredholm_agrees_with_enumeration(q in 0.2f64..0.8, n in 2usize..7, k in 1usize..4, a in 0.1f64..1.2, b in 0.1f64..1.2) {
        let p = ensemble(q, n, k, a, b);
        let d = gap_direct_all(&p).unwrap();
        let e = gap_bruteforce_all(&p).unwrap();
        // det(I - K) is accurate in absolute terms; tiny D(s) lose relative digits
        let tol = p.ctx().parse("1e-50").unwrap();
        for s in p.k..=n + 1 {
            prop_assert!((&d[s] - &e[s]).abs() < tol, "s = {}", s);
        }
    }

    #[test]
    fn weights_are_positive(q in 0.1f64..0.95, n in 1usize..40, a in 0.05f64..1.0, b in 0.05f64..1.0) {
        let p = ensemble(q, n, 1, a, b);
        prop_assert!(weights(&p).unwrap().iter().all(|w| w.to_f64() > 0.0));
    }

    #[test]
    fn mat2_inverse_roundtrip(x in prop::array::uniform4(-5.0f64..5.0)) {
        let ctx = Ctx::new(128).unwrap();
        prop_assume!((x[0] * x[3] - x[1] * x[2]).abs() > 1e-3);
        let m = Mat2::new(ctx.from_f64(x[0]), ctx.from_f64(x[1]), ctx.from_f64(x[2]), ctx.from_f64(x[3]));
        let e = m.mul(&m.inv().unwrap()).sub(&Mat2::identity(ctx)).max_abs();
        prop_assert!(e < ctx.parse("1e-30").unwrap());
    }
}
