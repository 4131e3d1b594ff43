//! Rational 2x2 q^{-1}-connections attached to the ensemble, their
//! modifications, and the tau-function ratios they produce.
//!
//! A connection is stored as `A(z) = N(z) / ((z-a2)(z-a4)(z-a6))` with a
//! polynomial numerator `N` of degree 3. For the q-Hahn ensemble
//! `A_s(z) = M_s(z/q) A_0(z) M_s(z)^{-1}`, where `M_s` is built from the
//! orthogonal polynomials on the first `s` lattice points. Its zeros and
//! poles are `a1 = a2 = q^{-s+1}` (a colliding pair), `a3 = q^{-N}`,
//! `a4 = b^{-1} q^{-N}`, `a5 = a q`, `a6 = q`.
//!
//! Two kinds of step are provided:
//! * [`modification_step`]: the generic move `a1 -> q a1`, `a2 -> q a2`,
//!   `w -> q w` for a connection in general position (`a1 != a2`), with the
//!   kernel/residue bases propagated and `<w', w>` ratios as the tau ratio;
//! * [`collision_step_up`]: the q-Hahn move `A_s -> A_{s+1}`, where the
//!   colliding pair makes the pairing vanish; the tau ratio is then read off
//!   the nilpotent residue of the gauge matrix instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::{build_basis_degree, EnsembleParams, Lattice};
use crate::error::{Error, Result};
use crate::painleve::{
    qpv_next_r, w_at, GapSequence, GenericQPVParams, PainleveState, Provenance, QHahnPoints,
};
use crate::poly::Poly;
use crate::precision::{
    dominant_column, dominant_row, dot2, perp, Ctx, Mat2, MatrixHP, Real, Vec2,
};

/// 2x2 matrix of polynomials.
pub type PolyMat2 = [[Poly; 2]; 2];

fn pm_mul(a: &PolyMat2, b: &PolyMat2) -> PolyMat2 {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `(z - c) I + s R`.
fn pm_affine(c: &Real, r: &Mat2, s: &Real) -> PolyMat2 {
    let e = |i: usize, j: usize| {
        let k = &r.m[i][j] * s;
        if i == j {
            Poly {
                c: vec![k - c, c.ctx().one()],
            }
        } else {
            Poly {
                c: vec![k, c.ctx().zero()],
            }
        }
    };
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn pm_eval(a: &PolyMat2, z: &Real) -> Mat2 {
    Mat2::new(
        a[0][0].eval(z),
        a[0][1].eval(z),
        a[1][0].eval(z),
        a[1][1].eval(z),
    )
}

/// Rational 2x2 matrix with a common scalar denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix2 {
    pub numerator: PolyMat2,
    pub denominator: Poly,
}

impl RationalMatrix2 {
    pub fn numerator_at(&self, z: &Real) -> Mat2 {
        pm_eval(&self.numerator, z)
    }

    pub fn eval(&self, z: &Real) -> Result<Mat2> {
        let d = self.denominator.eval(z);
        if d.is_zero() {
            return Err(Error::DomainError(z.to_f64()));
        }
        Ok(self.numerator_at(z).scale(&d.recip()))
    }

    pub fn det(&self, z: &Real) -> Result<Real> {
        Ok(self.eval(z)?.det())
    }
}

/// A connection in the normal form used throughout, plus basis vectors for
/// the next modification.
#[derive(Clone, Debug)]
pub struct ConnectionState {
    pub matrix: RationalMatrix2,
    /// `a1..a6`; zeros are `a1, a3, a5`, poles `a2, a4, a6`.
    pub a: [Real; 6],
    pub u: Real,
    pub v: Real,
    pub w: Real,
    pub q: Real,
    /// Basis of `ker A(a1)`.
    pub kernel_vec: Option<Vec2>,
    /// Basis of the row space of `Res_{a2} A` (stored as a column).
    pub residue_vec: Option<Vec2>,
    pub step_index: i64,
}

impl ConnectionState {
    pub fn ctx(&self) -> Ctx {
        self.q.ctx()
    }

    pub fn zeros(&self) -> [&Real; 3] {
        [&self.a[0], &self.a[2], &self.a[4]]
    }

    pub fn poles(&self) -> [&Real; 3] {
        [&self.a[1], &self.a[3], &self.a[5]]
    }

    pub fn eval(&self, z: &Real) -> Result<Mat2> {
        self.matrix.eval(z)
    }

    /// `u v (z-a1)(z-a3)(z-a5) / ((z-a2)(z-a4)(z-a6))`.
    pub fn det_closed_form(&self, z: &Real) -> Real {
        let [a1, a2, a3, a4, a5, a6] = &self.a;
        &self.u * &self.v * (z - a1) * (z - a3) * (z - a5) / ((z - a2) * (z - a4) * (z - a6))
    }

    pub fn qpv_params(&self) -> GenericQPVParams {
        GenericQPVParams {
            a: self.a.clone(),
            u: self.u.clone(),
            v: self.v.clone(),
            w: self.w.clone(),
            q: self.q.clone(),
        }
    }

    /// `<w, w'>`.
    pub fn pairing(&self) -> Option<Real> {
        match (&self.kernel_vec, &self.residue_vec) {
            (Some(a), Some(b)) => Some(dot2(a, b)),
            _ => None,
        }
    }
}

fn denominator(a2: &Real, a4: &Real, a6: &Real) -> Poly {
    Poly::from_roots(&a2.ctx().one(), &[a2, a4, a6])
}

/// `A_0(z) = diag(phi(z), 1)`,
/// `phi(z) = (z - a q)(z - q^{-N}) / (a b (z - q)(z - b^{-1} q^{-N}))`.
pub fn build_a0(p: &EnsembleParams) -> RationalMatrix2 {
    let ctx = p.ctx();
    let pts = QHahnPoints::new(p);
    let ab = &p.alpha * &p.beta;
    let n11 = Poly::from_roots(&ctx.one(), &[&pts.a5, &pts.a3]);
    let n22 = Poly::from_roots(&ab, &[&pts.a6, &pts.a4]);
    RationalMatrix2 {
        numerator: [[n11, Poly::zero(ctx)], [Poly::zero(ctx), n22.clone()]],
        denominator: n22,
    }
}

/// `phi` at a lattice point from the weight itself: `phi(y_x) = q w(x+1)/w(x)`.
pub fn a0_weight_ratio(lat: &Lattice, p: &EnsembleParams, x: usize) -> Real {
    &p.q * &lat.weights[x + 1] / &lat.weights[x]
}

/// The explicit connection at `s = k`.
pub fn build_ak(p: &EnsembleParams) -> Result<ConnectionState> {
    let ctx = p.ctx();
    let pts = QHahnPoints::new(p);
    let k = p.k as i64;
    let a1 = p.qpow(1 - k);
    let u = p.qpow(-k) / (&p.alpha * &p.beta);
    let v = p.qpow(k);
    let (c2, c1, c0) = crate::painleve::initial_a21(p)?;
    let scale = c2.abs().max(c1.abs());
    if c0.abs() > ctx.eps() * &scale {
        return Err(Error::CancellationFailure(format!(
            "constant term of a21 is {}",
            c0.to_sig(6)
        )));
    }
    let n11 = Poly::from_roots(&u, &[&pts.a3, &pts.a5, &pts.a6]);
    let n22 = Poly::from_roots(&v, &[&a1, &a1, &pts.a4]);
    let n21 = Poly {
        c: vec![ctx.zero(), c1, c2],
    };
    let a = [
        a1.clone(),
        a1.clone(),
        pts.a3.clone(),
        pts.a4.clone(),
        pts.a5.clone(),
        pts.a6.clone(),
    ];
    let matrix = RationalMatrix2 {
        numerator: [[n11, Poly::zero(ctx)], [n21, n22]],
        denominator: denominator(&a[1], &a[3], &a[5]),
    };
    let mut cs = ConnectionState {
        matrix,
        a,
        u,
        v,
        w: w_at(p, p.k),
        q: p.q.clone(),
        kernel_vec: None,
        residue_vec: None,
        step_index: p.k as i64,
    };
    let (res, _) = laurent_at_collision(&cs);
    let wp = dominant_row(&res);
    cs.kernel_vec = Some(perp(&wp));
    cs.residue_vec = Some(wp);
    Ok(cs)
}

/// `M_s(z) = [[P, C_P], [c Q, c C_Q]]` with `P = P_k`, `Q = P_{k-1}` on the
/// first `s` points, `c = 1/h_{k-1}` and `C_f(z) = sum_i f(y_i) w(i) / (z - y_i)`.
pub fn section_matrix(p: &EnsembleParams, lat: &Lattice, s: usize, z: &Real) -> Result<Mat2> {
    let k = p.k;
    if s < k || s > p.n + 1 {
        return Err(Error::DegenerateSupport {
            support: s,
            degree: k,
        });
    }
    let ctx = p.ctx();
    let basis = build_basis_degree(p, lat, s, k - 1)?;
    let c = basis.norms[k - 1].recip();
    let pts = &lat.points[..s];
    // P_k by one more recurrence step (vanishes on the support when s = k)
    let (ra, rb) = if s == k {
        (ctx.zero(), ctx.zero())
    } else {
        pk_coeffs(&basis, lat, s)
    };
    let pk_at = |x: &Real, vals_km1: &Real, vals_km2: &Real| -> Real {
        if s == k {
            let mut acc = ctx.one();
            for y in pts {
                acc = acc * (x - y);
            }
            acc
        } else {
            (x - &ra) * vals_km1 - &rb * vals_km2
        }
    };
    let qv = &basis.values[k - 1];
    let qv2: Vec<Real> = if k >= 2 {
        basis.values[k - 2].clone()
    } else {
        vec![ctx.zero(); s]
    };
    let qz = basis.eval(k - 1, z);
    let qz2 = if k >= 2 {
        basis.eval(k - 2, z)
    } else {
        ctx.zero()
    };
    let pz = pk_at(z, &qz, &qz2);
    let mut cp = ctx.zero();
    let mut cq = ctx.zero();
    for i in 0..s {
        let d = z - &pts[i];
        let wi = &lat.weights[i];
        let pv = if s == k {
            ctx.zero()
        } else {
            pk_at(&pts[i], &qv[i], &qv2[i])
        };
        cp = cp + pv * wi / &d;
        cq = cq + &qv[i] * wi / &d;
    }
    Ok(Mat2::new(pz, cp, &c * qz, c * cq))
}

fn pk_coeffs(basis: &crate::ensemble::OrthoBasis, lat: &Lattice, s: usize) -> (Real, Real) {
    let k = basis.degree() + 1;
    let v = &basis.values[k - 1];
    let ctx = v[0].ctx();
    let mut h = ctx.zero();
    let mut m = ctx.zero();
    for x in 0..s {
        let t = &v[x] * &v[x] * &lat.weights[x];
        m = m + &t * &lat.points[x];
        h = h + t;
    }
    let a = m / &h;
    let b = if k >= 2 {
        h / &basis.norms[k - 2]
    } else {
        ctx.zero()
    };
    (a, b)
}

/// `A_s(z) = M_s(z/q) A_0(z) M_s(z)^{-1}` evaluated directly.
pub fn connection_direct(p: &EnsembleParams, lat: &Lattice, s: usize, z: &Real) -> Result<Mat2> {
    let a0 = build_a0(p).eval(z)?;
    let m1 = section_matrix(p, lat, s, &(z / &p.q))?;
    let m0 = section_matrix(p, lat, s, z)?;
    Ok(m1.mul(&a0).mul(&m0.inv()?))
}

/// The connection at section `s` rebuilt from direct evaluations by
/// interpolating its numerator; an oracle for the stepped chain.
pub fn connection_at_section(p: &EnsembleParams, s: usize) -> Result<ConnectionState> {
    let ctx = p.ctx();
    let lat = Lattice::new(p)?;
    let pts = QHahnPoints::new(p);
    let a1 = p.qpow(1 - s as i64);
    let den = denominator(&a1, &pts.a4, &pts.a6);
    let deg = 6usize;
    let nodes: Vec<Real> = (0..=deg)
        .map(|j| {
            ctx.parse("0.3711").unwrap() + ctx.parse("0.2373").unwrap() * (j as i32)
                - ctx.parse("0.9").unwrap()
        })
        .collect();
    let vals = nodes
        .iter()
        .map(|z| Ok(connection_direct(p, &lat, s, z)?.scale(&den.eval(z))))
        .collect::<Result<Vec<Mat2>>>()?;
    let vm = MatrixHP::from_fn(deg + 1, deg + 1, |i, j| nodes[i].powi(j as i32));
    let mut num: Vec<Poly> = Vec::new();
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let rhs: Vec<Real> = vals.iter().map(|m| m.m[i][j].clone()).collect();
        let c = solve(&vm, &rhs)?;
        num.push(Poly { c }.truncate_checked(4, &ctx.eps(), "numerator degree")?);
    }
    let numerator = [
        [num[0].clone(), num[1].clone()],
        [num[2].clone(), num[3].clone()],
    ];
    let u = numerator[0][0].coeff(3);
    let v = numerator[1][1].coeff(3);
    let w = numerator[0][0].coeff(0);
    Ok(ConnectionState {
        matrix: RationalMatrix2 {
            numerator,
            denominator: den,
        },
        a: [a1.clone(), a1, pts.a3, pts.a4, pts.a5, pts.a6],
        u,
        v,
        w,
        q: p.q.clone(),
        kernel_vec: None,
        residue_vec: None,
        step_index: s as i64,
    })
}

fn solve(a: &MatrixHP, b: &[Real]) -> Result<Vec<Real>> {
    let n = a.rows();
    let mut m: Vec<Vec<Real>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.get(i, j).clone())
                .chain([b[i].clone()])
                .collect()
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, piv);
        if m[c][c].is_zero() {
            return Err(Error::NotSingular);
        }
        for r in 0..n {
            if r != c {
                let f = &m[r][c] / &m[c][c];
                for j in c..=n {
                    let t = &f * &m[c][j];
                    m[r][j] = &m[r][j] - t;
                }
            }
        }
    }
    Ok((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

/// Gauge-invariant coordinates `(t, r)`: `t` is the nonzero root of the
/// numerator of `a21`, and
/// `r = w (t-a3)(t-a4)(t-a5)(t-a6) / (n11(t) a3 a4 a5 a6 t) - 1/t`.
pub fn extract_coordinates(cs: &ConnectionState) -> Result<(Real, Real)> {
    let n21 = &cs.matrix.numerator[1][0];
    let (c0, c1, c2) = (n21.coeff(0), n21.coeff(1), n21.coeff(2));
    let scale = n21.norm();
    let eps = cs.ctx().eps();
    if c0.abs() > &eps * &scale {
        return Err(Error::CancellationFailure(
            "a21 does not vanish at z = 0".into(),
        ));
    }
    if c2.abs() <= &eps * &scale {
        return Err(Error::CoordinateAtInfinity);
    }
    let t = -(c1 / c2);
    let [_, _, a3, a4, a5, a6] = &cs.a;
    // on the last section t lands on a3 and n11(a3) = 0: r is then only
    // defined by continuation and the formula reads 0/0
    let near = eps.sqrt();
    for aj in [a3, a4, a5, a6] {
        if t.rel_diff(aj) < near {
            return Err(Error::SingularStep {
                s: cs.step_index.max(0) as usize,
                reason: "t on a singular point".into(),
            });
        }
    }
    let n11t = cs.matrix.numerator[0][0].eval(&t);
    let r = &cs.w * (&t - a3) * (&t - a4) * (&t - a5) * (&t - a6) / (n11t * a3 * a4 * a5 * a6 * &t)
        - t.recip();
    Ok((t, r))
}

fn tol(cs: &ConnectionState) -> Real {
    // polynomial-division remainders are judged at a quarter of the digits
    cs.ctx().eps().sqrt()
}

/// Generic modification `a1 -> q a1`, `a2 -> q a2`, `w -> q w`:
/// `A_hat(z) = R(z/q) A(z) R(z)^{-1}` with `R(z) = I + R0/(z - a2)` and
/// `R0 = (a2 - a1) w w'^T / <w, w'>`.
pub fn modification_step(cs: &ConnectionState) -> Result<ConnectionState> {
    let ctx = cs.ctx();
    let q = &cs.q;
    let [a1, a2, a3, a4, a5, a6] = cs.a.clone();
    if a1.rel_diff(&a2) <= ctx.eps() {
        return Err(Error::NonGenericConnection(
            "a1 = a2; use collision_step_up".into(),
        ));
    }
    let n = &cs.matrix.numerator;
    let wv = match &cs.kernel_vec {
        Some(v) => v.clone(),
        None => crate::precision::null_vector_2x2(&pm_eval(n, &a1).to_matrix())?,
    };
    let wp = match &cs.residue_vec {
        Some(v) => v.clone(),
        None => dominant_row(&pm_eval(n, &a2)),
    };
    let pair = dot2(&wv, &wp);
    if pair.abs() <= ctx.eps() * wv[0].abs().max(wv[1].abs()) * wp[0].abs().max(wp[1].abs()) {
        return Err(Error::NonGenericConnection("<w, w'> vanishes".into()));
    }
    let r0 = Mat2::outer(&wv, &wp).scale(&((&a2 - &a1) / &pair));
    let one = ctx.one();
    let left = pm_affine(&(q * &a2), &r0, q);
    let right = pm_affine(&a1, &r0, &(-&one));
    let big = pm_mul(&pm_mul(&left, n), &right);
    let t = tol(cs);
    let mut num = big.clone();
    for row in num.iter_mut() {
        for e in row.iter_mut() {
            let d = e.div_exact(&a1, &t, "modification at a1")?;
            *e = d
                .div_exact(&a2, &t, "modification at a2")?
                .truncate_checked(4, &t, "modified numerator")?;
        }
    }
    let na1 = q * &a1;
    let na2 = q * &a2;
    let matrix = RationalMatrix2 {
        numerator: num,
        denominator: denominator(&na2, &a4, &a6),
    };
    // propagate the bases
    let r_at = |z: &Real| Mat2::identity(ctx).add(&r0.scale(&(z - &a2).recip()));
    let rinv_at = |z: &Real| Mat2::identity(ctx).sub(&r0.scale(&(z - &a1).recip()));
    let a_old = |z: &Real| cs.matrix.eval(z);
    let wh = r_at(&na1).apply(&a_old(&na1)?.inv()?.apply(&wv));
    let wph = a_old(&na2)?.mul(&rinv_at(&na2)).apply_left(&wp);
    Ok(ConnectionState {
        matrix,
        a: [na1, na2, a3, a4, a5, a6],
        u: cs.u.clone(),
        v: cs.v.clone(),
        w: &cs.w * q,
        q: q.clone(),
        kernel_vec: Some(wh),
        residue_vec: Some(wph),
        step_index: cs.step_index + 1,
    })
}

/// Kernel and residue directions of `cs` recomputed from its matrix.
pub fn fresh_bases(cs: &ConnectionState) -> Result<(Vec2, Vec2)> {
    let n = &cs.matrix.numerator;
    let wv = crate::precision::null_vector_2x2(&pm_eval(n, &cs.a[0]).to_matrix())?;
    let wp = dominant_row(&pm_eval(n, &cs.a[1]));
    Ok((wv, wp))
}

/// `|sin|` of the angle between two plane vectors.
pub fn direction_mismatch(a: &Vec2, b: &Vec2) -> Real {
    let cross = &a[0] * &b[1] - &a[1] * &b[0];
    let na = dot2(a, a).sqrt();
    let nb = dot2(b, b).sqrt();
    cross.abs() / (na * nb)
}

/// Second tau ratio `<w_hat, w'_hat> / <w, w'>` across a generic step.
pub fn tau_second_derivative(before: &ConnectionState, after: &ConnectionState) -> Result<Real> {
    let p0 = before
        .pairing()
        .ok_or_else(|| Error::NonGenericConnection("missing bases".into()))?;
    let p1 = after
        .pairing()
        .ok_or_else(|| Error::NonGenericConnection("missing bases".into()))?;
    if p0.is_zero() {
        return Err(Error::NonGenericConnection("<w, w'> = 0".into()));
    }
    Ok(p1 / p0)
}

/// Closed form of the second tau ratio in the coordinates before and after a
/// generic step; `Q = 1/q` is the inverse shift.
pub fn tau_closed_form(before: &ConnectionState, after: &ConnectionState) -> Result<Real> {
    let (_, r) = extract_coordinates(before)?;
    let (th, rh) = extract_coordinates(after)?;
    tau_closed_form_coords(before, &r, &th, &rh)
}

fn tau_closed_form_coords(
    before: &ConnectionState,
    r: &Real,
    th: &Real,
    rh: &Real,
) -> Result<Real> {
    let qi = before.q.recip();
    let [a1, a2, a3, a4, a5, a6] = &before.a;
    let (u, v, w) = (&before.u, &before.v, &before.w);
    let a12 = a1 * a2;
    let num =
        (&qi * rh * w - v * &a12) * (&qi * r * w - u * &a12) * (&qi * th - a1) * (&qi * th - a2);
    let den = u * v * (a1 - &qi * a3) * (a1 - &qi * a5) * (a2 - &qi * a4) * (a2 - &qi * a6) * &a12;
    Ok(num / den)
}

/// Laurent data of `A` at the colliding point `a = a1 = a2`:
/// `A(z) = Res/(z - a) + A0 + O(z - a)`.
pub fn laurent_at_collision(cs: &ConnectionState) -> (Mat2, Mat2) {
    let a = &cs.a[1];
    let (a4, a6) = (&cs.a[3], &cs.a[5]);
    let g = (a - a4) * (a - a6);
    let dg = (a - a4) + (a - a6);
    let n = &cs.matrix.numerator;
    let na = pm_eval(n, a);
    let dn = Mat2::new(
        n[0][0].deriv().eval(a),
        n[0][1].deriv().eval(a),
        n[1][0].deriv().eval(a),
        n[1][1].deriv().eval(a),
    );
    let res = na.scale(&g.recip());
    let a0 = dn.scale(&g).sub(&na.scale(&dg)).scale(&g.square().recip());
    (res, a0)
}

/// Outcome of one collision step.
#[derive(Clone, Debug)]
pub struct CollisionStep {
    pub next: ConnectionState,
    /// Scalar `mu` with `R0 = mu w w'^T` in the propagated bases.
    pub mu: Real,
    /// Relative residual of the defining equation for `R0`.
    pub residual: Real,
}

/// q-Hahn step `A_s -> A_{s+1}` (`a1 = a2 = a -> a/q`, `w -> w/q`), using a
/// nilpotent `R0` so that `R(z) = I + R0/(z - a/q)` has inverse
/// `I - R0/(z - a/q)`.
pub fn collision_step_up(cs: &ConnectionState) -> Result<CollisionStep> {
    let ctx = cs.ctx();
    let q = &cs.q;
    let a = cs.a[1].clone();
    let (res, a0) = laurent_at_collision(cs);
    let c = dominant_column(&res);
    let jc = perp(&c);
    let x = Mat2::outer(&c, &jc).mul(&a0);
    let xx = x.frob(&x);
    if xx.is_zero() {
        return Err(Error::NonGenericConnection(
            "degenerate Laurent data".into(),
        ));
    }
    let lam = -(res.frob(&x) / (q * xx));
    let r0 = Mat2::outer(&c, &jc).scale(&lam);
    let residual = res.add(&r0.mul(&a0).scale(q)).max_abs() / res.max_abs();
    let an = &a / q;
    let left = pm_affine(&a, &r0, q);
    let right = pm_affine(&an, &r0, &(-ctx.one()));
    let big = pm_mul(&pm_mul(&left, &cs.matrix.numerator), &right);
    let t = tol(cs);
    let mut num = big.clone();
    for row in num.iter_mut() {
        for e in row.iter_mut() {
            let d = e.div_exact(&a, &t, "collision step")?;
            *e = d.div_exact(&a, &t, "collision step")?.truncate_checked(
                4,
                &t,
                "collision numerator",
            )?;
        }
    }
    let [_, _, a3, a4, a5, a6] = cs.a.clone();
    let matrix = RationalMatrix2 {
        numerator: num,
        denominator: denominator(&an, &a4, &a6),
    };
    let r_at = Mat2::identity(ctx).add(&r0.scale(&(&a - &an).recip()));
    let rinv_at = Mat2::identity(ctx).sub(&r0.scale(&(&a - &an).recip()));
    let a_new = matrix.eval(&a)?;
    let wv = cs
        .kernel_vec
        .clone()
        .ok_or_else(|| Error::NonGenericConnection("missing kernel basis".into()))?;
    let wp = cs
        .residue_vec
        .clone()
        .ok_or_else(|| Error::NonGenericConnection("missing residue basis".into()))?;
    let wv1 = a_new.apply(&r_at.apply(&wv));
    let wp1 = rinv_at.mul(&a_new.inv()?).apply_left(&wp);
    let outer = Mat2::outer(&wv1, &wp1);
    let mu = r0.frob(&outer) / outer.frob(&outer);
    let next = ConnectionState {
        matrix,
        a: [an.clone(), an, a3, a4, a5, a6],
        u: cs.u.clone(),
        v: cs.v.clone(),
        w: &cs.w / q,
        q: q.clone(),
        kernel_vec: Some(wv1),
        residue_vec: Some(wp1),
        step_index: cs.step_index + 1,
    };
    Ok(CollisionStep { next, mu, residual })
}

/// The full chain `A_k, A_{k+1}, .., A_{N+1}` with the step scalars.
#[derive(Clone, Debug)]
pub struct TauPath {
    pub states: Vec<ConnectionState>,
    /// `mu[j]` belongs to the step from section `k+j` to `k+j+1`.
    pub mu: Vec<Real>,
    pub residuals: Vec<Real>,
}

impl TauPath {
    pub fn new(p: &EnsembleParams) -> Result<TauPath> {
        let mut states = vec![build_ak(p)?];
        let mut mu = Vec::new();
        let mut residuals = Vec::new();
        for _ in p.k..=p.n {
            let step = collision_step_up(states.last().unwrap())?;
            mu.push(step.mu);
            residuals.push(step.residual);
            states.push(step.next);
        }
        Ok(TauPath {
            states,
            mu,
            residuals,
        })
    }

    pub fn k(&self) -> usize {
        self.states[0].step_index as usize
    }

    pub fn state(&self, s: usize) -> &ConnectionState {
        &self.states[s - self.k()]
    }

    /// `D(s+1) D(s-1) / D(s)^2 = q mu_s / mu_{s-1}` for `s = k+1..=N`.
    pub fn tau_ratio(&self, s: usize) -> Real {
        let j = s - self.k();
        &self.states[0].q * &self.mu[j] / &self.mu[j - 1]
    }
}

/// Closed form of the second tau ratio on the q-Hahn chain at section `s`:
/// the generic closed form across the downward step `A_{s+1} -> A_s`.
/// On `s = N` the matrix coordinate `r_{N+1}` is singular (see
/// [`extract_coordinates`]); its continuous value comes from one step of the
/// q-Hahn system instead.
pub fn tau_closed_form_section(path: &TauPath, p: &EnsembleParams, s: usize) -> Result<Real> {
    let before = path.state(s + 1);
    let after = path.state(s);
    match extract_coordinates(before) {
        Ok(_) => tau_closed_form(before, after),
        Err(Error::SingularStep { .. }) => {
            let (t, r) = extract_coordinates(after)?;
            let st = PainleveState {
                s,
                r,
                t: t.clone(),
                w: after.w.clone(),
            };
            let r_next = qpv_next_r(&st, p)?;
            tau_closed_form_coords(before, &r_next, &t, &st.r)
        }
        Err(e) => Err(e),
    }
}

/// `D_k(s)` for `s = 0..=N+1` along the connection path.
pub fn tau_gaps(p: &EnsembleParams) -> Result<GapSequence> {
    let ctx = p.ctx();
    let (d0, d1) = crate::painleve::seeds(p)?;
    let mut d = vec![ctx.zero(); p.k];
    d.push(d0);
    d.push(d1);
    if p.k < p.n {
        let path = TauPath::new(p)?;
        for s in p.k + 1..=p.n {
            let next = path.tau_ratio(s) * d[s].square() / &d[s - 1];
            d.push(next.finite("tau path")?);
        }
    }
    Ok(GapSequence::from_vec(d, Provenance::Tau))
}

/// Conjugates by the constant-plus-linear upper-triangular gauge
/// `G(z) = [[g11, g12 + g13 z], [0, g22]]`: `A -> G(z/q) A(z) G(z)^{-1}`.
pub fn gauge_transform(cs: &ConnectionState, g: [&Real; 4]) -> ConnectionState {
    let ctx = cs.ctx();
    let [g11, g12, g13, g22] = g;
    let gl: PolyMat2 = [
        [
            Poly::constant(g11.clone()),
            Poly {
                c: vec![g12.clone(), g13 / &cs.q],
            },
        ],
        [Poly::zero(ctx), Poly::constant(g22.clone())],
    ];
    let det = g11 * g22;
    let gi: PolyMat2 = [
        [
            Poly::constant(g22 / &det),
            Poly {
                c: vec![-(g12 / &det), -(g13 / &det)],
            },
        ],
        [Poly::zero(ctx), Poly::constant(g11 / &det)],
    ];
    let num = pm_mul(&pm_mul(&gl, &cs.matrix.numerator), &gi);
    let mut out = cs.clone();
    out.matrix = RationalMatrix2 {
        numerator: num,
        denominator: cs.matrix.denominator.clone(),
    };
    out.kernel_vec = None;
    out.residue_vec = None;
    out
}

/// A random connection in general position with prescribed `u, v, w` and
/// real, well-separated singular points: `N(z) = (zB1+C1)(zB2+C2)(zB3+C3)`
/// with `B3 = (B1B2)^{-1} diag(u,v)` and `C3 = w (C1C2)^{-1}`.
pub fn synthetic_connection(
    ctx: Ctx,
    seed: u64,
    u: &Real,
    v: &Real,
    w: &Real,
    q: &Real,
) -> Result<ConnectionState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rnd = |rng: &mut ChaCha8Rng| ctx.from_f64(rng.gen_range(-1.0..1.0));
    for _ in 0..10_000 {
        let mut m = || Mat2::new(rnd(&mut rng), rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
        let (b1, c1, b2, c2) = (m(), m(), m(), m());
        let b3 = b1
            .mul(&b2)
            .inv()?
            .mul(&Mat2::new(u.clone(), ctx.zero(), ctx.zero(), v.clone()));
        let c3 = c1.mul(&c2).inv()?.scale(w);
        let mut roots = Vec::new();
        let mut ok = true;
        for (b, c) in [(&b1, &c1), (&b2, &c2), (&b3, &c3)] {
            let qa = b.det();
            let qc = c.det();
            let qb = b.add(c).det() - &qa - &qc;
            let disc = qb.square() - ctx.int(4) * &qa * &qc;
            if disc < 0 || qa.is_zero() {
                ok = false;
                break;
            }
            let sq = disc.sqrt();
            roots.push((-&qb + &sq) / (&qa * 2));
            roots.push((-&qb - &sq) / (&qa * 2));
        }
        if !ok {
            continue;
        }
        let sep = ctx.parse("0.05").unwrap();
        let far = roots.iter().all(|r| r.abs() > sep && r.abs() < ctx.int(20));
        let apart = (0..6).all(|i| (i + 1..6).all(|j| (&roots[i] - &roots[j]).abs() > sep));
        let apart_q = (0..6).all(|i| (0..6).all(|j| (q * &roots[i] - &roots[j]).abs() > sep));
        if !(far && apart && apart_q) {
            continue;
        }
        let lin = |b: &Mat2, c: &Mat2| -> PolyMat2 {
            let e = |i: usize, j: usize| Poly {
                c: vec![c.m[i][j].clone(), b.m[i][j].clone()],
            };
            [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
        };
        let n = pm_mul(&pm_mul(&lin(&b1, &c1), &lin(&b2, &c2)), &lin(&b3, &c3));
        let a: [Real; 6] = [
            roots[0].clone(),
            roots[1].clone(),
            roots[2].clone(),
            roots[3].clone(),
            roots[4].clone(),
            roots[5].clone(),
        ];
        let matrix = RationalMatrix2 {
            numerator: n,
            denominator: denominator(&a[1], &a[3], &a[5]),
        };
        return Ok(ConnectionState {
            matrix,
            a,
            u: u.clone(),
            v: v.clone(),
            w: w.clone(),
            q: q.clone(),
            kernel_vec: None,
            residue_vec: None,
            step_index: 0,
        });
    }
    Err(Error::NonGenericConnection(
        "no admissible random connection found".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleSpec;

    #[test]
    fn a0_shape() {
        let ctx = Ctx::new(256).unwrap();
        let p = EnsembleSpec::new("0.7", 8, 2, "0.5", "0.5")
            .at(ctx)
            .unwrap();
        let a0 = build_a0(&p);
        let z = ctx.parse("2.3").unwrap();
        let m = a0.eval(&z).unwrap();
        assert!(m.m[0][1].is_zero() && m.m[1][0].is_zero());
        assert_eq!(m.m[1][1], ctx.one());
        let lat = Lattice::new(&p).unwrap();
        for x in 0..5 {
            let y = &lat.points[x];
            let phi = a0.eval(y).unwrap().m[0][0].clone();
            assert!(phi.rel_diff(&a0_weight_ratio(&lat, &p, x)) < ctx.eps());
        }
    }
}
