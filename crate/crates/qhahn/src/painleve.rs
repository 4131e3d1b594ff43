//! Asymmetric q-Painleve V recurrences for the gap probabilities.
//!
//! The gap probabilities obey a second-order multiplicative recurrence
//! `D(s+1) D(s-1) / D(s)^2 = ratio(t_s, r_s, r_{s+1})`, where `(t_s, r_s)`
//! follow a first-order system (the q-Hahn specialisation of asymmetric
//! q-PV). Seeds `D_k(k)`, `D_k(k+1)` and the starting point `(t_k, r_k)` are
//! explicit.
//!
//! Conventions fixed here (checked against the Fredholm determinants):
//! * the state at section `s` is read off the connection `A_s`, whose
//!   numerator takes the value `w_s = -b^{-1} q^{-N-s+2}` at `z = 0`;
//! * the step `s -> s+1` uses `w = w_{s+1}`;
//! * `ratio(s)` built from states `s` and `s+1` equals
//!   `D(s+1) D(s-1) / D(s)^2`.

use serde::{Deserialize, Serialize};

use crate::ensemble::{build_basis_degree, normalizer_z, EnsembleParams, Lattice};
use crate::error::{Error, Result};
use crate::precision::{Ctx, Real};

/// A point `(t_s, r_s)` of the trajectory plus the constant `w_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PainleveState {
    pub s: usize,
    pub r: Real,
    pub t: Real,
    pub w: Real,
}

/// Zeros, poles and leading data of a generic connection, in the order
/// `a1..a6` (zeros `a1, a3, a5`; poles `a2, a4, a6`).
#[derive(Clone, Debug, PartialEq)]
pub struct GenericQPVParams {
    pub a: [Real; 6],
    pub u: Real,
    pub v: Real,
    pub w: Real,
    pub q: Real,
}

impl GenericQPVParams {
    /// Parameters after one step: `a1 -> q a1`, `a2 -> q a2`, `w -> q w`.
    pub fn advanced(&self) -> GenericQPVParams {
        let mut a = self.a.clone();
        a[0] = &a[0] * &self.q;
        a[1] = &a[1] * &self.q;
        GenericQPVParams {
            a,
            u: self.u.clone(),
            v: self.v.clone(),
            w: &self.w * &self.q,
            q: self.q.clone(),
        }
    }

    /// `u v prod a_i / w^2`, equal to one for parameters read off a connection.
    pub fn consistency(&self) -> Real {
        let mut p = &self.u * &self.v;
        for a in &self.a {
            p = p * a;
        }
        p / self.w.square()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Direct,
    Recurrence,
    Tau,
    Partition,
    Bruteforce,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Direct => "direct",
            Provenance::Recurrence => "recurrence",
            Provenance::Tau => "tau",
            Provenance::Partition => "partition",
            Provenance::Bruteforce => "bruteforce",
        }
    }
}

/// `(s, D_k(s))` for `s = 0..=N+1`.
#[derive(Clone, Debug)]
pub struct GapSequence {
    pub values: Vec<(usize, Real)>,
    pub provenance: Provenance,
}

impl GapSequence {
    pub fn from_vec(v: Vec<Real>, provenance: Provenance) -> GapSequence {
        GapSequence {
            values: v.into_iter().enumerate().collect(),
            provenance,
        }
    }

    pub fn get(&self, s: usize) -> &Real {
        &self.values[s].1
    }

    pub fn as_slice(&self) -> Vec<Real> {
        self.values.iter().map(|(_, d)| d.clone()).collect()
    }
}

/// The fixed singular points `a3 = q^{-N}`, `a4 = b^{-1} q^{-N}`,
/// `a5 = a q`, `a6 = q`.
#[derive(Clone, Debug)]
pub struct QHahnPoints {
    pub a3: Real,
    pub a4: Real,
    pub a5: Real,
    pub a6: Real,
}

impl QHahnPoints {
    pub fn new(p: &EnsembleParams) -> QHahnPoints {
        let a3 = p.qpow(-(p.n as i64));
        let a4 = &a3 / &p.beta;
        QHahnPoints {
            a3,
            a4,
            a5: &p.alpha * &p.q,
            a6: p.q.clone(),
        }
    }
}

/// `w_s = -b^{-1} q^{-N-s+2}`, the value at `z = 0` of the numerator of `A_s`.
pub fn w_at(p: &EnsembleParams, s: usize) -> Real {
    -(p.qpow(-(p.n as i64) - s as i64 + 2) / &p.beta)
}

fn rho(p: &EnsembleParams, lat: &Lattice, i: usize) -> Real {
    let ctx = p.ctx();
    let mut prod = ctx.one();
    for j in 0..p.k {
        if j != i {
            prod = prod * (&lat.points[i] - &lat.points[j]).square();
        }
    }
    (&lat.weights[i] * prod).recip()
}

/// Coefficients `(c2, c1, c0)` of the `a21` numerator of `A_k`,
/// `c2 z^2 + c1 z + c0`; `c0` vanishes identically.
pub fn initial_a21(p: &EnsembleParams) -> Result<(Real, Real, Real)> {
    let ctx = p.ctx();
    let lat = Lattice::new(p)?;
    let pts = QHahnPoints::new(p);
    let k = p.k as i64;
    let a1 = p.qpow(1 - k);
    let cu = p.qpow(1 - k) / (&p.alpha * &p.beta);
    let qk = p.qpow(k);
    let (mut c2, mut c1, mut c0) = (ctx.zero(), ctx.zero(), ctx.zero());
    let s356 = &pts.a3 + &pts.a5 + &pts.a6;
    let e356 = &pts.a3 * &pts.a5 + &pts.a3 * &pts.a6 + &pts.a5 * &pts.a6;
    let s124 = &a1 + &a1 + &pts.a4;
    let e124 = &a1 * &a1 + (&a1 * &pts.a4) * 2;
    for m in 0..p.k {
        let r = rho(p, &lat, m);
        let ym = &lat.points[m];
        let yq = ym * &p.q;
        c2 = c2 + &r * (&cu - &qk);
        c1 = c1 + &r * (&cu * (&yq - &s356) - &qk * (ym - &s124));
        c0 = c0
            + &r * (&cu * (yq.square() - &s356 * &yq + &e356)
                - &qk * (ym.square() - &s124 * ym + &e124));
    }
    Ok((c2, c1, c0))
}

/// Starting point of the trajectory at `s = k`.
pub fn initial_state(p: &EnsembleParams) -> Result<PainleveState> {
    let (c2, c1, _) = initial_a21(p)?;
    let eps = p.ctx().eps();
    if c2.abs() <= &eps * c1.abs() {
        return Err(Error::DegenerateInitialData(
            "leading a21 coefficient vanishes".into(),
        ));
    }
    let pts = QHahnPoints::new(p);
    Ok(PainleveState {
        s: p.k,
        r: -pts.a4.recip(),
        t: -(c1 / c2),
        w: w_at(p, p.k),
    })
}

fn nonzero(x: Real, s: usize, what: &str) -> Result<Real> {
    let eps = x.ctx().eps();
    if x.abs() <= eps.square() || !x.is_finite() {
        Err(Error::SingularStep {
            s,
            reason: what.to_string(),
        })
    } else {
        Ok(x)
    }
}

/// Right side of the first q-Hahn equation at state `s`.
fn qhahn_rhs1(st: &PainleveState, p: &EnsembleParams, pts: &QHahnPoints) -> Result<Real> {
    let s = st.s as i64;
    let t = &st.t;
    let num = p.qpow(-2 * s) * (t - &pts.a3) * (t - &pts.a4) * (t - &pts.a5) * (t - &pts.a6);
    let den = &p.alpha / &p.beta * p.qpow(-2 * p.n as i64) * (t - p.qpow(1 - s)).square();
    Ok(num / nonzero(den, st.s, "t_s = q^{-s+1}")?)
}

/// Right side of the second q-Hahn equation, given `r_{s+1}`.
fn qhahn_rhs2(
    s: usize,
    r1: &Real,
    w1: &Real,
    p: &EnsembleParams,
    pts: &QHahnPoints,
) -> Result<Real> {
    let si = s as i64;
    let k = p.k as i64;
    let one = p.ctx().one();
    let ab = &p.alpha * &p.beta;
    let num = p.qpow(-4 * si + 1)
        * (&pts.a3 * r1 + &one)
        * (&pts.a4 * r1 + &one)
        * (&pts.a5 * r1 + &one)
        * (&pts.a6 * r1 + &one);
    let den = &ab * (r1 * w1 - p.qpow(-2 * si + k)) * (r1 * w1 - p.qpow(-2 * si - k + 1) / &ab);
    Ok(num / nonzero(den, s, "r_{s+1} w bracket")?)
}

/// First half of a step: `r_{s+1}` from `(t_s, r_s)`.
pub fn qpv_next_r(st: &PainleveState, p: &EnsembleParams) -> Result<Real> {
    let pts = QHahnPoints::new(p);
    let one = p.ctx().one();
    let b = nonzero(&st.r * &st.t + &one, st.s, "r_s t_s + 1 = 0")?;
    let t = nonzero(st.t.clone(), st.s, "t_s = 0")?;
    Ok((qhahn_rhs1(st, p, &pts)? / b - one) / t)
}

/// One step `s -> s+1` of the q-Hahn system: solve the first equation for
/// `r_{s+1}`, then the second for `t_{s+1}`.
pub fn qpv_step_qhahn(st: &PainleveState, p: &EnsembleParams) -> Result<PainleveState> {
    let pts = QHahnPoints::new(p);
    let one = p.ctx().one();
    let r1 = qpv_next_r(st, p)?;
    let w1 = &st.w / &p.q;
    let b = nonzero(&r1 * &st.t + &one, st.s, "r_{s+1} t_s + 1 = 0")?;
    let rr = nonzero(r1.clone(), st.s, "r_{s+1} = 0")?;
    let t1 = (qhahn_rhs2(st.s, &r1, &w1, p, &pts)? / b - one) / rr;
    Ok(PainleveState {
        s: st.s + 1,
        r: r1,
        t: t1,
        w: w1,
    })
}

/// Residuals `lhs/rhs - 1` of both q-Hahn equations on a pair of states.
pub fn qhahn_residuals(
    st: &PainleveState,
    nx: &PainleveState,
    p: &EnsembleParams,
) -> Result<(Real, Real)> {
    let pts = QHahnPoints::new(p);
    let one = p.ctx().one();
    let l1 = (&nx.r * &st.t + &one) * (&st.r * &st.t + &one);
    let r1 = qhahn_rhs1(st, p, &pts)?;
    let l2 = (&nx.r * &nx.t + &one) * (&nx.r * &st.t + &one);
    let r2 = qhahn_rhs2(st.s, &nx.r, &nx.w, p, &pts)?;
    Ok((l1.rel_diff(&r1), l2.rel_diff(&r2)))
}

/// Right sides of the generic equations. Inside the brackets the shift
/// parameter enters as `1/q` for a connection stepped by `a1 -> q a1`.
fn generic_rhs1(t: &Real, r: &Real, gp: &GenericQPVParams) -> Real {
    let _ = t;
    let one = r.ctx().one();
    let qi = gp.q.recip();
    let [a1, a2, a3, a4, a5, a6] = &gp.a;
    let a12 = a1 * a2;
    let num = &gp.u
        * &gp.v
        * a12.square()
        * (r * a3 + &one)
        * (r * a4 + &one)
        * (r * a5 + &one)
        * (r * a6 + &one);
    let den = (r * &gp.w - &gp.v * &a12) * (&qi * r * &gp.w - &gp.u * &a12);
    num / den
}

fn generic_rhs2(th: &Real, gp: &GenericQPVParams) -> Real {
    let qi = gp.q.recip();
    let [a1, a2, a3, a4, a5, a6] = &gp.a;
    let num = a1 * a2 * (th - a3) * (th - a4) * (th - a5) * (th - a6);
    let den = a3 * a4 * a5 * a6 * (&qi * th - a1) * (&qi * th - a2);
    num / den
}

/// One generic step `(t, r) -> (t_hat, r_hat)`: first equation for `t_hat`,
/// then the second for `r_hat`. Advance `gp` with [`GenericQPVParams::advanced`]
/// before the next step.
pub fn qpv_step_generic(t: &Real, r: &Real, gp: &GenericQPVParams) -> Result<(Real, Real)> {
    let one = t.ctx().one();
    let b = nonzero(r * t + &one, 0, "r t + 1 = 0")?;
    let rr = nonzero(r.clone(), 0, "r = 0")?;
    let rhs1 = generic_rhs1(t, r, gp);
    if !rhs1.is_finite() {
        return Err(Error::SingularStep {
            s: 0,
            reason: "first equation denominator".into(),
        });
    }
    let th = (rhs1 / b - &one) / rr;
    let b2 = nonzero(r * &th + &one, 0, "r t_hat + 1 = 0")?;
    let tt = nonzero(th.clone(), 0, "t_hat = 0")?;
    let rhs2 = generic_rhs2(&th, gp);
    if !rhs2.is_finite() {
        return Err(Error::SingularStep {
            s: 0,
            reason: "second equation denominator".into(),
        });
    }
    let rh = (rhs2 / b2 - &one) / tt;
    Ok((th, rh))
}

/// Residuals of both generic equations for `(t, r) -> (t_hat, r_hat)`.
pub fn generic_residuals(
    t: &Real,
    r: &Real,
    th: &Real,
    rh: &Real,
    gp: &GenericQPVParams,
) -> (Real, Real) {
    let one = t.ctx().one();
    let l1 = (r * th + &one) * (r * t + &one);
    let l2 = (rh * th + &one) * (r * th + &one);
    (
        l1.rel_diff(&generic_rhs1(t, r, gp)),
        l2.rel_diff(&generic_rhs2(th, gp)),
    )
}

/// `D(s+1) D(s-1) / D(s)^2` from states `s` and `s+1`.
pub fn ratio_formula(st: &PainleveState, nx: &PainleveState, p: &EnsembleParams) -> Result<Real> {
    let pts = QHahnPoints::new(p);
    let s = st.s as i64;
    let k = p.k as i64;
    let ab = &p.alpha * &p.beta;
    let w = &nx.w;
    let x = p.qpow(1 - s);
    let num = &ab
        * (&st.r * w - p.qpow(-2 * s + k + 1))
        * (&nx.r * w - p.qpow(-2 * s - k + 1) / &ab)
        * (&st.t - &x).square();
    let den = p.qpow(-2 * s) * (&x - &pts.a3) * (&x - &pts.a5) * (&x - &pts.a4) * (&x - &pts.a6);
    if den.is_zero() {
        return Err(Error::SingularRatio(st.s));
    }
    Ok(num / den)
}

/// `D_k(k)`: the single configuration `{0..k-1}` divided by `Z`.
pub fn dkk(p: &EnsembleParams) -> Result<Real> {
    let lat = Lattice::new(p)?;
    let basis = build_basis_degree(p, &lat, p.n + 1, p.k)?;
    let z = normalizer_z(p, &basis)?;
    Ok(dkk_with(p, &lat, &z))
}

fn dkk_with(p: &EnsembleParams, lat: &Lattice, z: &Real) -> Real {
    let mut v = p.ctx().one();
    for i in 0..p.k {
        v = v * &lat.weights[i];
        for j in i + 1..p.k {
            v = v * (&lat.points[i] - &lat.points[j]).square();
        }
    }
    v / z
}

/// `D_k(k+1) = w(k) q_k D_k(k) prod_{l<k} (y_k - y_l)^2`.
pub fn dkk1(p: &EnsembleParams) -> Result<Real> {
    let lat = Lattice::new(p)?;
    let basis = build_basis_degree(p, &lat, p.n + 1, p.k)?;
    let z = normalizer_z(p, &basis)?;
    Ok(dkk1_with(p, &lat, &dkk_with(p, &lat, &z)))
}

fn dkk1_with(p: &EnsembleParams, lat: &Lattice, d_k: &Real) -> Real {
    let k = p.k;
    let ctx = p.ctx();
    let yk = &lat.points[k];
    let mut vk = ctx.one();
    for l in 0..k {
        vk = vk * (yk - &lat.points[l]).square();
    }
    let rho_k = (&lat.weights[k] * &vk).recip();
    let mut qk = rho_k;
    for m in 0..k {
        qk = qk + rho(p, lat, m) / (yk - &lat.points[m]).square();
    }
    &lat.weights[k] * qk * d_k * vk
}

/// Both seeds at once, sharing one orthogonal basis.
pub fn seeds(p: &EnsembleParams) -> Result<(Real, Real)> {
    let lat = Lattice::new(p)?;
    let basis = build_basis_degree(p, &lat, p.n + 1, p.k)?;
    let z = normalizer_z(p, &basis)?;
    let d0 = dkk_with(p, &lat, &z);
    let d1 = dkk1_with(p, &lat, &d0);
    Ok((d0, d1))
}

/// Trajectory `(t_s, r_s)` for `s = k..=N`, plus `r_{N+1}`.
pub fn trajectory(p: &EnsembleParams) -> Result<(Vec<PainleveState>, Real)> {
    let mut states = vec![initial_state(p)?];
    while states.last().unwrap().s < p.n {
        let nx = qpv_step_qhahn(states.last().unwrap(), p)?;
        states.push(nx);
    }
    let r_last = qpv_next_r(states.last().unwrap(), p)?;
    Ok((states, r_last))
}

/// `D_k(s)` for `s = 0..=N+1` from the seeds and the recurrence.
pub fn reconstruct_gaps(p: &EnsembleParams) -> Result<GapSequence> {
    let ctx = p.ctx();
    let (d0, d1) = seeds(p)?;
    let mut d = vec![ctx.zero(); p.k];
    d.push(d0);
    d.push(d1);
    if p.k < p.n {
        let (states, r_last) = trajectory(p)?;
        for s in p.k + 1..=p.n {
            let st = &states[s - p.k];
            let nx = if s < p.n {
                states[s - p.k + 1].clone()
            } else {
                PainleveState {
                    s: s + 1,
                    r: r_last.clone(),
                    t: ctx.zero(),
                    w: &st.w / &p.q,
                }
            };
            let rt = ratio_formula(st, &nx, p)?;
            let next = rt * d[s].square() / &d[s - 1];
            d.push(next.finite("recurrence")?);
        }
    }
    Ok(GapSequence::from_vec(d, Provenance::Recurrence))
}

/// Default precision for the recurrence at a given lattice: the lattice
/// spread rule, and at least `3N + 128` bits since the recurrence sheds
/// roughly `2.6` bits per step when `q` is close to 1.
pub fn recommended_bits(ctx: Ctx, p: &EnsembleParams) -> u32 {
    Ctx::escalated_for(ctx.bits(), p.q.to_f64(), p.n).max(3 * p.n as u32 + 128)
}

/// Agreement required between two precisions in [`reconstruct_gaps_checked`].
pub const PRECISION_CHECK_TOL: f64 = 1e-30;

/// The recurrence at the recommended precision, confirmed by a rerun with
/// 64 more bits; the precision doubles (at most three times) on mismatch.
pub fn reconstruct_gaps_checked(p: &EnsembleParams) -> Result<GapSequence> {
    let mut bits = recommended_bits(p.ctx(), p);
    for _ in 0..4 {
        let lo = reconstruct_gaps(&p.with_ctx(Ctx::new(bits)?))?;
        let hi = reconstruct_gaps(&p.with_ctx(Ctx::new(bits + 64)?))?;
        let worst = lo
            .values
            .iter()
            .zip(&hi.values)
            .skip(p.k)
            .map(|((_, a), (_, b))| a.rel_diff(b).to_f64())
            .fold(0.0, f64::max);
        if worst < PRECISION_CHECK_TOL {
            return Ok(hi);
        }
        bits *= 2;
    }
    Err(Error::CancellationFailure(format!(
        "recurrence unstable up to {bits} bits"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleSpec;

    #[test]
    fn hand_values() {
        let ctx = Ctx::new(256).unwrap();
        let p = EnsembleSpec::new("0.5", 4, 2, "0.5", "0.5")
            .at(ctx)
            .unwrap();
        let st = initial_state(&p).unwrap();
        // r_k = -1/a4 = -b q^N = -1/32
        assert_eq!(st.r, ctx.int(-1) / 32);
        // |w_k| = b^{-1} q^{-N-k+2} = 2^5
        assert_eq!(st.w.abs(), ctx.int(32));
        let (_, _, c0) = initial_a21(&p).unwrap();
        let (c2, c1, _) = initial_a21(&p).unwrap();
        assert!(c0.abs() < ctx.eps() * c1.abs().max(c2.abs()));
    }

    #[test]
    fn k_one_seed() {
        let ctx = Ctx::new(256).unwrap();
        let p = EnsembleSpec::new("0.5", 5, 1, "0.5", "0.5")
            .at(ctx)
            .unwrap();
        let lat = Lattice::new(&p).unwrap();
        let tot = crate::precision::sum(ctx, lat.weights.iter());
        assert!(dkk(&p).unwrap().rel_diff(&(&lat.weights[0] / &tot)) < ctx.eps());
    }

    #[test]
    fn generic_guard() {
        let ctx = Ctx::new(128).unwrap();
        let one = ctx.one();
        let gp = GenericQPVParams {
            a: [
                ctx.int(2),
                ctx.int(3),
                ctx.int(5),
                ctx.int(7),
                ctx.int(11),
                ctx.int(13),
            ],
            u: one.clone(),
            v: one.clone(),
            w: one.clone(),
            q: ctx.parse("0.5").unwrap(),
        };
        let t = ctx.int(4);
        let r = -(t.recip());
        assert!(matches!(
            qpv_step_generic(&t, &r, &gp),
            Err(Error::SingularStep { .. })
        ));
    }
}
