//! Edge scaling of the rightmost particle.
//!
//! With `q = q0^{1/N}`, `k = round(k0 N)` and fixed `alpha = q0^a`,
//! `beta = q0^b`, the symmetrized difference operator of the ensemble near
//! `x = c1 N + c2 N^{1/3} u` approaches the Airy operator `g'' - u g`. The
//! edge `c1` solves a quadratic in `p = q0^{c1}`; `c2` solves a cubic
//! obtained by Taylor matching.

use serde::{Deserialize, Serialize};

use crate::airy::tw_density;
use crate::ensemble::{build_basis_degree, EnsembleParams, Lattice};
use crate::error::{Error, Result};
use crate::painleve::reconstruct_gaps_checked;
use crate::precision::{Ctx, MatrixHP, Real};

/// Scaling regime: `q0, k0 in (0,1)`, `a, b < 0`, and the size `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub q0: f64,
    pub k0: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Which root of the edge quadratic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Larger `c1`: the edge the largest particle sits at.
    Rightmost,
    Leftmost,
}

fn dec(ctx: Ctx, x: f64) -> Result<Real> {
    // shortest round-trip decimal, so "0.99" means 0.99 exactly
    ctx.parse(&format!("{x}"))
}

impl ScalingParams {
    pub fn new(q0: f64, k0: f64, a: f64, b: f64, n: usize) -> Result<ScalingParams> {
        let sp = ScalingParams { q0, k0, a, b, n };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.q0 > 0.0
            && self.q0 < 1.0
            && self.k0 > 0.0
            && self.k0 < 1.0
            && self.a < 0.0
            && self.b < 0.0;
        if !ok || self.n < 2 {
            return Err(Error::InadmissibleParams(format!(
                "scaling parameters {self:?}"
            )));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> ScalingParams {
        ScalingParams { n, ..self.clone() }
    }

    /// `(A, B, K) = (q0^a, q0^b, q0^k0)`.
    pub fn abk(&self, ctx: Ctx) -> Result<(Real, Real, Real)> {
        let q0 = dec(ctx, self.q0)?;
        Ok((
            q0.pow(&dec(ctx, self.a)?),
            q0.pow(&dec(ctx, self.b)?),
            q0.pow(&dec(ctx, self.k0)?),
        ))
    }

    /// Eigenvalue level `(1-K)(1-ABK)/K` matched at the edge.
    pub fn lambda(&self, ctx: Ctx) -> Result<Real> {
        let (a, b, k) = self.abk(ctx)?;
        let one = ctx.one();
        Ok((&one - &k) * (&one - &a * &b * &k) / k)
    }

    /// Limiting coefficients `B, D` of the difference operator at `p = q^x`.
    pub fn symbol(&self, ctx: Ctx, p: &Real) -> Result<(Real, Real)> {
        let (a, b, _) = self.abk(ctx)?;
        let q0 = dec(ctx, self.q0)?;
        let one = ctx.one();
        let bx = (&one - p / &q0) * (&one - &a * p);
        let dx = &a * &b * (&one - p) * (&one - p / (&b * &q0));
        Ok((bx, dx))
    }

    /// `E(xi) = 2 sqrt(B D) - B - D - lambda` at `p = q0^xi`.
    pub fn edge_function(&self, ctx: Ctx, xi: &Real) -> Result<Real> {
        let q0 = dec(ctx, self.q0)?;
        let (bx, dx) = self.symbol(ctx, &q0.pow(xi))?;
        let bd = &bx * &dx;
        if bd < 0 {
            return Err(Error::DomainError(xi.to_f64()));
        }
        Ok(bd.sqrt() * 2 - bx - dx - self.lambda(ctx)?)
    }

    /// `dE/dxi`, analytically.
    pub fn edge_slope(&self, ctx: Ctx, xi: &Real) -> Result<Real> {
        let (a, b, _) = self.abk(ctx)?;
        let q0 = dec(ctx, self.q0)?;
        let p = q0.pow(xi);
        let one = ctx.one();
        let (bx, dx) = self.symbol(ctx, &p)?;
        let db = -((&one - &a * &p) / &q0) - &a * (&one - &p / &q0);
        let bq = &b * &q0;
        let dd = &a * &b * (-(&one - &p / &bq) - (&one - &p) / &bq);
        let sq = (&bx * &dx).sqrt();
        let de_dp = (&db * &dx + &bx * &dd) / sq - db - dd;
        Ok(de_dp * p * q0.ln())
    }

    /// The ensemble of size `N`: lattice of `N` points (`N - 1` as the
    /// ensemble parameter), `q = q0^{1/N}`, `k = round(k0 N)`.
    pub fn ensemble(&self, ctx: Ctx) -> Result<EnsembleParams> {
        let q0 = dec(ctx, self.q0)?;
        let q = q0.pow(&(ctx.one() / ctx.int(self.n as i64)));
        let k = ((self.k0 * self.n as f64).round() as usize).max(1);
        let alpha = q0.pow(&dec(ctx, self.a)?);
        let beta = q0.pow(&dec(ctx, self.b)?);
        EnsembleParams::new(q, self.n - 1, k, alpha, beta)
    }
}

/// Coefficients `(c0, c1, c2)` of the edge quadratic
/// `lambda^2 + 2 lambda (B + D) + (B - D)^2` in `p` (its `p^3`, `p^4` terms
/// cancel because `B - D` is linear in `p`).
pub fn edge_quadratic(sp: &ScalingParams, ctx: Ctx) -> Result<[Real; 3]> {
    let (a, b, _) = sp.abk(ctx)?;
    let q0 = dec(ctx, sp.q0)?;
    let lam = sp.lambda(ctx)?;
    let one = ctx.one();
    // B(p) = 1 - (1/q0 + A) p + (A/q0) p^2
    let bc = [one.clone(), -(q0.recip() + &a), &a / &q0];
    // D(p) = AB - (AB + A/q0) p + (A/q0) p^2
    let ab = &a * &b;
    let dc = [ab.clone(), -(&ab + &a / &q0), &a / &q0];
    let s: Vec<Real> = (0..3).map(|i| &bc[i] + &dc[i]).collect();
    let t: Vec<Real> = (0..2).map(|i| &bc[i] - &dc[i]).collect();
    let c0 = lam.square() + &lam * &s[0] * 2 + t[0].square();
    let c1 = &lam * &s[1] * 2 + &t[0] * &t[1] * 2;
    let c2 = &lam * &s[2] * 2 + t[1].square();
    Ok([c0, c1, c2])
}

/// Both real roots `p` of the edge quadratic, as `xi = log p / log q0`,
/// sorted ascending, keeping those on the matching branch of `E`.
pub fn edge_roots(sp: &ScalingParams, ctx: Ctx) -> Result<Vec<Real>> {
    let [c0, c1, c2] = edge_quadratic(sp, ctx)?;
    let disc = c1.square() - &c0 * &c2 * 4;
    if disc < 0 {
        return Err(Error::NoRealEdge(disc.to_f64()));
    }
    let sq = disc.sqrt();
    let lq = dec(ctx, sp.q0)?.ln();
    let mut out = Vec::new();
    for sgn in [1, -1] {
        let p = (-&c1 + &sq * sgn) / (&c2 * 2);
        if !(p > 0 && p < 1) {
            continue;
        }
        let xi = p.ln() / &lq;
        if let Ok(e) = sp.edge_function(ctx, &xi) {
            let scale = sp.lambda(ctx)?.abs().max(ctx.one());
            if e.abs() <= ctx.eps().sqrt() * scale {
                out.push(xi);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    if out.is_empty() {
        return Err(Error::NoRealEdge(disc.to_f64()));
    }
    Ok(out)
}

/// `c1 = log p / log q0`.
pub fn compute_c1(sp: &ScalingParams, branch: Branch, ctx: Ctx) -> Result<Real> {
    let roots = edge_roots(sp, ctx)?;
    Ok(match branch {
        Branch::Rightmost => roots.last().unwrap().clone(),
        Branch::Leftmost => roots[0].clone(),
    })
}

/// `c2` from the cubic `c2^3 |E'(c1)| = sqrt(B D)`, by bisection on `(0, 10)`.
pub fn compute_c2(sp: &ScalingParams, branch: Branch, ctx: Ctx) -> Result<Real> {
    let c1 = compute_c1(sp, branch, ctx)?;
    let q0 = dec(ctx, sp.q0)?;
    let (bx, dx) = sp.symbol(ctx, &q0.pow(&c1))?;
    let de = sp.edge_slope(ctx, &c1)?;
    let rhs = (bx * dx).sqrt();
    let f = |c: &Real| c.powi(3) * de.abs() - &rhs;
    let (mut lo, mut hi) = (ctx.zero(), ctx.int(10));
    if !(f(&lo) < 0 && f(&hi) > 0) {
        return Err(Error::ScalingFailure(
            "no root of the c2 cubic in (0, 10)".into(),
        ));
    }
    let tol = ctx.parse("1e-12")?;
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / 2;
        if f(&mid) < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish to working precision
    let mut c = (lo + hi) / 2;
    for _ in 0..8 {
        let d = c.square() * 3 * de.abs();
        c = &c - f(&c) / d;
    }
    Ok(c)
}

/// Finite-`N` analogue of `(c1, c2)` from the exact coefficients of the
/// ensemble of size `N`: root of the discrete edge function
/// `2 sqrt(B(x) D(x+1)) - B(x) - D(x) - lambda_k` and its slope.
pub fn finite_edge(sp: &ScalingParams, ctx: Ctx) -> Result<(Real, Real)> {
    let p = sp.ensemble(ctx)?;
    let op = DifferenceOperator::new(&p);
    let lam = op.eigenvalue(p.k);
    let nn = ctx.int(sp.n as i64);
    let e = |x: &Real| -> Result<Real> {
        let (b0, d0) = op.coeffs_at(x);
        let (_, d1) = op.coeffs_at(&(x + 1));
        let bd = &b0 * &d1;
        if bd < 0 {
            return Err(Error::DomainError(x.to_f64()));
        }
        Ok(bd.sqrt() * 2 - b0 - d0 - &lam)
    };
    let c1 = compute_c1(sp, Branch::Rightmost, ctx)?;
    // bracket around the limiting edge
    let mut lo = &c1 * &nn - sp.n as i32 / 10 - 2;
    let mut hi = &c1 * &nn + sp.n as i32 / 10 + 2;
    let top = ctx.int(p.n as i64 - 1);
    if hi > top {
        hi = top;
    }
    if lo < 1 {
        lo = ctx.one();
    }
    let (flo, fhi) = (e(&lo)?, e(&hi)?);
    if flo.is_sign_negative() == fhi.is_sign_negative() {
        return Err(Error::ScalingFailure("finite edge not bracketed".into()));
    }
    for _ in 0..200 {
        let mid = (&lo + &hi) / 2;
        if e(&mid)?.is_sign_negative() == flo.is_sign_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = (lo + hi) / 2;
    let h = ctx.parse("1e-6")?;
    let de = (e(&(&x + &h))? - e(&(&x - &h))?) / (&h * 2);
    let (b0, _) = op.coeffs_at(&x);
    let (_, d1) = op.coeffs_at(&(&x + 1));
    // x = c1 N + c2 N^{1/3} u  =>  c2^3 N |dE/dx| = sqrt(B D)
    let c2 = ((b0 * d1).sqrt() / (de.abs() * &nn)).cbrt();
    Ok((x / nn, c2))
}

/// The q-Hahn difference operator
/// `(L f)(x) = B(x) f(x+1) - (B(x) + D(x)) f(x) + D(x) f(x-1)` with
/// `B(x) = (1 - q^{x-N})(1 - a q^{x+1})`,
/// `D(x) = a b q (1 - q^x)(1 - b^{-1} q^{x-N-1})`.
#[derive(Clone, Debug)]
pub struct DifferenceOperator {
    pub p: EnsembleParams,
}

impl DifferenceOperator {
    pub fn new(p: &EnsembleParams) -> DifferenceOperator {
        DifferenceOperator { p: p.clone() }
    }

    /// `(B(x), D(x))` at a real argument.
    pub fn coeffs_at(&self, x: &Real) -> (Real, Real) {
        let p = &self.p;
        let ctx = p.ctx();
        let one = ctx.one();
        let n = ctx.int(p.n as i64);
        let qx = p.q.pow(x);
        let qxn = p.q.pow(&(x - &n));
        let b = (&one - &qxn) * (&one - &p.alpha * &qx * &p.q);
        let d = &p.alpha * &p.beta * &p.q * (&one - &qx) * (&one - &qxn / (&p.beta * &p.q));
        (b, d)
    }

    pub fn b(&self, x: usize) -> Real {
        self.coeffs_at(&self.p.ctx().int(x as i64)).0
    }

    pub fn d(&self, x: usize) -> Real {
        self.coeffs_at(&self.p.ctx().int(x as i64)).1
    }

    /// `q^{-n}(1 - q^n)(1 - a b q^{n+1})`.
    pub fn eigenvalue(&self, n: usize) -> Real {
        let p = &self.p;
        let one = p.ctx().one();
        let qn = p.qpow(n as i64);
        (&one - &qn) * (&one - &p.alpha * &p.beta * p.qpow(n as i64 + 1)) / qn
    }

    /// `L f` for `f` tabulated on `x = 0..=N`.
    pub fn apply(&self, f: &[Real]) -> Vec<Real> {
        let n = self.p.n;
        (0..=n)
            .map(|x| {
                let (b, d) = (self.b(x), self.d(x));
                let mut v = -((&b + &d) * &f[x]);
                if x < n {
                    v = v + b * &f[x + 1];
                }
                if x > 0 {
                    v = v + d * &f[x - 1];
                }
                v
            })
            .collect()
    }

    /// `S L S^{-1}` with `S = diag(sqrt(w))`: tridiagonal, off-diagonal
    /// entries `sqrt(B(x) D(x+1))` when the weight balances.
    pub fn symmetrized(&self) -> Result<MatrixHP> {
        let p = &self.p;
        let lat = Lattice::new(p)?;
        let n = p.n + 1;
        let sw: Vec<Real> = lat.weights.iter().map(|w| w.sqrt()).collect();
        let ctx = p.ctx();
        let mut m = MatrixHP::zeros(ctx, n, n);
        for x in 0..n {
            let (b, d) = (self.b(x), self.d(x));
            m.set(x, x, -(&b + &d));
            if x + 1 < n {
                m.set(x, x + 1, b * &sw[x] / &sw[x + 1]);
            }
            if x > 0 {
                m.set(x, x - 1, d * &sw[x] / &sw[x - 1]);
            }
        }
        Ok(m)
    }

    /// Largest `|M - M^T|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> Result<Real> {
        let m = self.symmetrized()?;
        let n = m.rows();
        let mut worst = self.p.ctx().zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((m.get(i, j) - m.get(j, i)).abs());
            }
        }
        Ok(worst / m.max_abs().unwrap())
    }

    /// Relative residual of `L P_n = lambda_n P_n` on the full lattice,
    /// measured against the size of the three terms of `L P_n`.
    pub fn eigen_residual(&self, n: usize) -> Result<Real> {
        let p = &self.p;
        let lat = Lattice::new(p)?;
        let basis = build_basis_degree(p, &lat, p.n + 1, n)?;
        let f = &basis.values[n];
        let lf = self.apply(f);
        let lam = self.eigenvalue(n);
        let ctx = p.ctx();
        let mut num = ctx.zero();
        let mut den = ctx.zero();
        for x in 0..=p.n {
            num = num.max((&lf[x] - &lam * &f[x]).abs());
            let mut s = (self.b(x) + self.d(x)).abs() * f[x].abs();
            if x < p.n {
                s = s + self.b(x).abs() * f[x + 1].abs();
            }
            if x > 0 {
                s = s + self.d(x).abs() * f[x - 1].abs();
            }
            den = den.max(s);
        }
        Ok(num / den)
    }
}

/// Gap probabilities `D_k(s)`, `s = 0..=N`, of the size-`N` ensemble by the
/// precision-checked recurrence.
pub fn scaled_gaps(sp: &ScalingParams, ctx: Ctx) -> Result<(EnsembleParams, Vec<Real>)> {
    let p = sp.ensemble(ctx)?;
    let g = reconstruct_gaps_checked(&p)?;
    Ok((p, g.as_slice()))
}

/// Law of the largest particle, `P(max = s) = D(s+1) - D(s)`, mapped to
/// `u_s = (s - c1 N)/(c2 N^{1/3})`.
#[derive(Clone, Debug)]
pub struct EdgeLaw {
    pub c1: f64,
    pub c2: f64,
    pub n: usize,
    /// `(s, u_s, P(max = s))`.
    pub atoms: Vec<(usize, f64, f64)>,
}

impl EdgeLaw {
    pub fn new(sp: &ScalingParams, gaps: &[Real], ctx: Ctx) -> Result<EdgeLaw> {
        let c1 = compute_c1(sp, Branch::Rightmost, ctx)?.to_f64();
        let c2 = compute_c2(sp, Branch::Rightmost, ctx)?.to_f64();
        let n = sp.n;
        let scale = c2 * (n as f64).cbrt();
        let atoms = (0..gaps.len() - 1)
            .map(|s| {
                let m = (&gaps[s + 1] - &gaps[s]).to_f64();
                (s, (s as f64 - c1 * n as f64) / scale, m)
            })
            .collect();
        Ok(EdgeLaw { c1, c2, n, atoms })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.2).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.1 * a.2).sum()
    }

    /// Lattice spacing in `u`.
    pub fn scale(&self) -> f64 {
        self.c2 * (self.n as f64).cbrt()
    }
}

/// One point of the rescaled density next to the limiting density.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityPoint {
    pub u: f64,
    pub s: usize,
    pub value: f64,
    pub tw: f64,
    pub clipped: bool,
}

/// `(D(s+1) - D(s)) c2 N^{1/3}` with `s = round(c1 N + c2 N^{1/3} u)`,
/// clipped to the support, next to the Tracy-Widom density.
pub fn scaled_density(law: &EdgeLaw, us: &[f64], order: usize) -> Result<Vec<DensityPoint>> {
    let last = law.atoms.len() - 1;
    us.iter()
        .map(|&u| {
            let x = (law.c1 * law.n as f64 + law.scale() * u).round();
            let (s, clipped) = if x < 0.0 {
                (0, true)
            } else if x as usize > last {
                (last, true)
            } else {
                (x as usize, false)
            };
            Ok(DensityPoint {
                u,
                s,
                value: law.atoms[s].2 * law.scale(),
                tw: tw_density(u, order)?,
                clipped,
            })
        })
        .collect()
}

/// `(log N, log |E[TW] - E[qH_N]|)` for each `N`, and the fitted slope.
#[derive(Clone, Debug, Serialize)]
pub struct Convergence {
    pub points: Vec<(usize, f64, f64)>,
    pub slope: f64,
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn convergence_experiment(
    sp: &ScalingParams,
    ns: &[usize],
    tw_mean: f64,
    ctx: Ctx,
) -> Result<Convergence> {
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let spn = sp.with_n(n);
        let (_, gaps) = scaled_gaps(&spn, ctx)?;
        let law = EdgeLaw::new(&spn, &gaps, ctx)?;
        let err = (tw_mean - law.mean()).abs();
        points.push((n, (n as f64).ln(), err.ln()));
    }
    let slope = least_squares_slope(&points.iter().map(|p| (p.1, p.2)).collect::<Vec<_>>());
    Ok(Convergence { points, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_has_both_edges() {
        let ctx = Ctx::new(128).unwrap();
        let sp = ScalingParams::new(0.5, 0.2, -1.1, -1.3, 100).unwrap();
        let r = edge_roots(&sp, ctx).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0] < r[1]);
    }
}
