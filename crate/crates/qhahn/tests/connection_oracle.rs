use qhahn::connection::*;
use qhahn::ensemble::{gap_direct_all, EnsembleSpec, Lattice};
use qhahn::painleve::{generic_residuals, initial_state, qpv_step_generic, trajectory};
use qhahn::Ctx;

fn params(
    bits: u32,
    q: &str,
    n: usize,
    k: usize,
    a: &str,
    b: &str,
) -> qhahn::ensemble::EnsembleParams {
    EnsembleSpec::new(q, n, k, a, b)
        .at(Ctx::new(bits).unwrap())
        .unwrap()
}

#[test]
fn ak_matches_sandwich_and_det() {
    let p = params(256, "0.7", 10, 3, "0.5", "0.5");
    let ctx = p.ctx();
    let lat = Lattice::new(&p).unwrap();
    let ak = build_ak(&p).unwrap();
    for z in ["0.37", "-1.9", "4.25"] {
        let z = ctx.parse(z).unwrap();
        let a = ak.eval(&z).unwrap();
        let d = connection_direct(&p, &lat, p.k, &z).unwrap();
        assert!(a.sub(&d).max_abs() / d.max_abs() < ctx.parse("1e-60").unwrap());
        assert!(a.det().rel_diff(&ak.det_closed_form(&z)) < ctx.parse("1e-60").unwrap());
    }
    let n0 = ak.matrix.numerator_at(&ctx.zero());
    assert!(n0.m[0][0].rel_diff(&ak.w) < ctx.eps());
    assert!(n0.m[1][1].rel_diff(&ak.w) < ctx.eps());
    assert!(n0.m[1][0].is_zero() && n0.m[0][1].is_zero());
}

#[test]
fn coordinates_follow_the_recurrence() {
    let p = params(384, "0.7", 10, 3, "0.5", "0.5");
    let ctx = p.ctx();
    let (states, _) = trajectory(&p).unwrap();
    let st0 = initial_state(&p).unwrap();
    let (t, r) = extract_coordinates(&build_ak(&p).unwrap()).unwrap();
    assert!(t.rel_diff(&st0.t) < ctx.parse("1e-50").unwrap());
    assert!(r.rel_diff(&st0.r) < ctx.parse("1e-50").unwrap());
    let path = TauPath::new(&p).unwrap();
    for st in &states {
        let (t, r) = extract_coordinates(path.state(st.s)).unwrap();
        assert!(
            t.rel_diff(&st.t) < ctx.parse("1e-40").unwrap(),
            "t at s = {}",
            st.s
        );
        assert!(
            r.rel_diff(&st.r) < ctx.parse("1e-40").unwrap(),
            "r at s = {}",
            st.s
        );
        let direct = connection_at_section(&p, st.s).unwrap();
        let (td, rd) = extract_coordinates(&direct).unwrap();
        assert!(td.rel_diff(&st.t) < ctx.parse("1e-40").unwrap());
        assert!(rd.rel_diff(&st.r) < ctx.parse("1e-40").unwrap());
    }
}

#[test]
fn tau_ratios_on_qhahn_chain() {
    let p = params(384, "0.7", 10, 3, "0.5", "0.5");
    let ctx = p.ctx();
    let d = gap_direct_all(&p).unwrap();
    let path = TauPath::new(&p).unwrap();
    for s in p.k + 1..=p.n {
        let direct = &d[s + 1] * &d[s - 1] / d[s].square();
        let t = path.tau_ratio(s);
        let cf = tau_closed_form_section(&path, &p, s).unwrap();
        assert!(
            t.rel_diff(&direct) < ctx.parse("1e-40").unwrap(),
            "mu ratio at {s}"
        );
        assert!(
            cf.rel_diff(&direct) < ctx.parse("1e-40").unwrap(),
            "closed form at {s}: {} {}",
            cf.to_sig(20),
            direct.to_sig(20)
        );
    }
    let g = tau_gaps(&p).unwrap();
    for s in p.k..=p.n + 1 {
        assert!(g.get(s).rel_diff(&d[s]) < ctx.parse("1e-40").unwrap());
    }
}

#[test]
fn generic_step_and_tau() {
    let ctx = Ctx::new(256).unwrap();
    let u = ctx.parse("1.3").unwrap();
    let v = ctx.parse("0.6").unwrap();
    let w = ctx.parse("-0.8").unwrap();
    let q = ctx.parse("0.7").unwrap();
    let a = synthetic_connection(ctx, 7, &u, &v, &w, &q).unwrap();
    let z = ctx.parse("0.123").unwrap();
    assert!(
        a.eval(&z).unwrap().det().rel_diff(&a.det_closed_form(&z)) < ctx.parse("1e-60").unwrap()
    );
    let (w0, w0p) = fresh_bases(&a).unwrap();
    let mut a = a;
    a.kernel_vec = Some(w0);
    a.residue_vec = Some(w0p);
    let b = modification_step(&a).unwrap();
    assert!(
        b.eval(&z).unwrap().det().rel_diff(&b.det_closed_form(&z)) < ctx.parse("1e-50").unwrap()
    );
    let (w1, w1p) = fresh_bases(&b).unwrap();
    assert!(direction_mismatch(&w1, b.kernel_vec.as_ref().unwrap()) < ctx.parse("1e-50").unwrap());
    assert!(
        direction_mismatch(&w1p, b.residue_vec.as_ref().unwrap()) < ctx.parse("1e-50").unwrap()
    );
    let (t, r) = extract_coordinates(&a).unwrap();
    let (th, rh) = extract_coordinates(&b).unwrap();
    let gp = a.qpv_params();
    let (e1, e2) = generic_residuals(&t, &r, &th, &rh, &gp);
    assert!(
        e1.abs() < ctx.parse("1e-50").unwrap() && e2.abs() < ctx.parse("1e-50").unwrap(),
        "{e1} {e2}"
    );
    let (ts, rs) = qpv_step_generic(&t, &r, &gp).unwrap();
    assert!(ts.rel_diff(&th) < ctx.parse("1e-50").unwrap());
    assert!(rs.rel_diff(&rh) < ctx.parse("1e-50").unwrap());
    let tau = tau_second_derivative(&a, &b).unwrap();
    let cf = tau_closed_form(&a, &b).unwrap();
    assert!(
        tau.rel_diff(&cf) < ctx.parse("1e-40").unwrap(),
        "{tau} {cf}"
    );
}

#[test]
fn coordinates_are_gauge_invariant() {
    let p = params(256, "0.5", 8, 2, "0.5", "0.5");
    let ctx = p.ctx();
    let ak = build_ak(&p).unwrap();
    let (t, r) = extract_coordinates(&ak).unwrap();
    let g = [
        ctx.parse("1.7").unwrap(),
        ctx.parse("-0.4").unwrap(),
        ctx.parse("2.2").unwrap(),
        ctx.parse("0.3").unwrap(),
    ];
    let gt = gauge_transform(&ak, [&g[0], &g[1], &g[2], &g[3]]);
    let (t2, r2) = extract_coordinates(&gt).unwrap();
    assert!(t.rel_diff(&t2) < ctx.parse("1e-60").unwrap());
    assert!(r.rel_diff(&r2) < ctx.parse("1e-60").unwrap());
    let z = ctx.parse("0.77").unwrap();
    assert!(
        gt.eval(&z).unwrap().det().rel_diff(&ak.det_closed_form(&z)) < ctx.parse("1e-60").unwrap()
    );
}
