use qhahn::airy::*;
use qhahn::ensemble::EnsembleSpec;
use qhahn::scaling::*;
use qhahn::Ctx;
use rand::{Rng, SeedableRng};

fn ctx() -> Ctx {
    Ctx::new(256).unwrap()
}

#[test]
fn edge_constants() {
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, 100).unwrap();
    let c1 = compute_c1(&sp, Branch::Rightmost, ctx()).unwrap().to_f64();
    let c2 = compute_c2(&sp, Branch::Rightmost, ctx()).unwrap().to_f64();
    assert!((c1 - 0.84839).abs() < 1e-4, "{c1}");
    assert!((c2 - 0.38999).abs() < 1e-3, "{c2}");
    let sp = ScalingParams::new(0.5, 0.2, -1.1, -1.3, 100).unwrap();
    let c1 = compute_c1(&sp, Branch::Rightmost, ctx()).unwrap().to_f64();
    let c2 = compute_c2(&sp, Branch::Rightmost, ctx()).unwrap().to_f64();
    assert!((c1 - 0.69758).abs() < 1e-4, "{c1}");
    assert!((c2 - 0.47101).abs() < 1e-3, "{c2}");
}

#[test]
fn both_branches_solve_the_quadratic() {
    let sp = ScalingParams::new(0.99, 0.2, -1.1, -1.3, 100).unwrap();
    let c = Ctx::new(512).unwrap();
    let [c0, c1, c2] = edge_quadratic(&sp, c).unwrap();
    let q0 = c.parse("0.99").unwrap();
    let (mut sum, mut prod) = (c.zero(), c.one());
    for br in [Branch::Leftmost, Branch::Rightmost] {
        let p = q0.pow(&compute_c1(&sp, br, c).unwrap());
        sum = sum + &p;
        prod = prod * &p;
    }
    // Vieta
    assert!(sum.rel_diff(&(-(&c1 / &c2))) < c.eps());
    assert!(prod.rel_diff(&(&c0 / &c2)) < c.eps());
}

#[test]
fn no_real_edge_is_reported() {
    // a large lambda pushes the quadratic's roots off the real line or out of (0, 1)
    let sp = ScalingParams::new(0.99, 0.999, -30.0, -30.0, 100).unwrap();
    let r = compute_c1(&sp, Branch::Rightmost, ctx());
    assert!(matches!(r, Err(qhahn::Error::NoRealEdge(_))), "{r:?}");
}

#[test]
fn finite_size_edge_converges() {
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, 100).unwrap();
    let c = ctx();
    let c1 = compute_c1(&sp, Branch::Rightmost, c).unwrap();
    let c2 = compute_c2(&sp, Branch::Rightmost, c).unwrap();
    let (a1, a2) = finite_edge(&sp, c).unwrap();
    let (b1, b2) = finite_edge(&sp.with_n(200), c).unwrap();
    assert!((&b1 - &c1).abs() < (&a1 - &c1).abs());
    assert!((&b2 - &c2).abs() < (&a2 - &c2).abs());
    assert!((b2 - a2).abs().to_f64() < 100f64.powf(-1.0 / 3.0));
}

#[test]
fn difference_operator_eigen_relation() {
    for (q, n, k, a, b) in [("0.7", 12, 3, "0.5", "0.5"), ("0.5", 8, 4, "0.3", "0.8")] {
        let p = EnsembleSpec::new(q, n, k, a, b).at(ctx()).unwrap();
        let op = DifferenceOperator::new(&p);
        assert!(op.symmetry_defect().unwrap() < p.ctx().eps());
        for m in 0..=k {
            let r = op.eigen_residual(m).unwrap();
            assert!(r.to_f64() < 1e-20, "n = {m}: {r}");
        }
    }
}

#[test]
fn airy_solves_its_equation() {
    let c = ctx();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let h = c.parse("1e-13").unwrap();
    for _ in 0..20 {
        let x = c.from_f64(rng.gen_range(-7.5..7.5));
        let f = |t: &qhahn::Real| airy_hp(t).unwrap().0;
        let second = (f(&(&x + &h)) - f(&x) * 2 + f(&(&x - &h))) / h.square();
        let res = (second - &x * f(&x)).abs();
        assert!(res.to_f64() < 1e-25, "{x}: {res}");
    }
    let (c1, _) = airy_seeds(c);
    assert!(airy_hp(&c.zero()).unwrap().0.rel_diff(&c1) < c.eps());
    let mut prev = f64::INFINITY;
    for i in 1..40 {
        let a = airy(i as f64 * 0.25).unwrap();
        assert!(a > 0.0 && a < prev);
        prev = a;
    }
}

#[test]
fn tracy_widom_basics() {
    let f = tw_f2(10.0, 40).unwrap();
    assert!(f > 1.0 - 1e-8 && f <= 1.0 + 1e-15);
    let g = TWGrid::uniform(-6.0, 4.0, 41, 60).unwrap();
    assert!(g.is_monotone());
    assert!(g.grid.iter().all(|p| p.2 >= 0.0));
    assert!(tw_f2(0.0, 10).is_err());
}
