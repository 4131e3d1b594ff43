//! The q-Hahn orthogonal polynomial ensemble.
//!
//! `k` particles live on the geometric lattice `y_i = q^{-i}`, `i = 0..N`,
//! with joint law proportional to the squared Vandermonde in the `y`'s times
//! `prod w(x_i)`. The ensemble is determinantal with a Christoffel-Darboux
//! kernel, so the gap probability `D_k(s)` (all particles strictly below
//! index `s`) is a Fredholm determinant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::precision::{det, product, Ctx, MatrixHP, Real};

/// Plain-text form of the ensemble parameters: decimal strings are kept so a
/// run is reproducible at any precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub q: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub alpha: String,
    pub beta: String,
}

impl EnsembleSpec {
    pub fn new(q: &str, n: usize, k: usize, alpha: &str, beta: &str) -> EnsembleSpec {
        EnsembleSpec {
            q: q.into(),
            n,
            k,
            alpha: alpha.into(),
            beta: beta.into(),
        }
    }

    pub fn at(&self, ctx: Ctx) -> Result<EnsembleParams> {
        EnsembleParams::new(
            ctx.parse(&self.q)?,
            self.n,
            self.k,
            ctx.parse(&self.alpha)?,
            ctx.parse(&self.beta)?,
        )
    }
}

/// `(q, N, k, alpha, beta)` at a fixed working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleParams {
    pub q: Real,
    pub n: usize,
    pub k: usize,
    pub alpha: Real,
    pub beta: Real,
}

impl EnsembleParams {
    /// Validates the admissible ranges and positivity of the weight.
    pub fn new(q: Real, n: usize, k: usize, alpha: Real, beta: Real) -> Result<EnsembleParams> {
        let ctx = q.ctx();
        if !(q > 0 && q < 1) {
            return Err(Error::InadmissibleParams(format!(
                "q = {} must lie in (0,1)",
                q.to_sig(8)
            )));
        }
        if n == 0 || k == 0 || k > n {
            return Err(Error::InadmissibleParams(format!(
                "need 1 <= k <= N, got k = {k}, N = {n}"
            )));
        }
        let qinv = q.recip();
        let qmn = qinv.powi(n as i32);
        let low = alpha > 0 && alpha < qinv && beta > 0 && beta < qinv;
        let high = alpha > qmn && beta > qmn;
        if !(low || high) {
            return Err(Error::InadmissibleParams(format!(
                "alpha = {}, beta = {} outside both admissible ranges",
                alpha.to_sig(8),
                beta.to_sig(8)
            )));
        }
        let p = EnsembleParams {
            q,
            n,
            k,
            alpha,
            beta,
        };
        for (x, w) in weights(&p)?.iter().enumerate() {
            if !(*w > 0) || !w.is_finite() {
                return Err(Error::InadmissibleParams(format!(
                    "w({x}) = {} is not positive",
                    w.to_sig(8)
                )));
            }
        }
        let _ = ctx;
        Ok(p)
    }

    pub fn ctx(&self) -> Ctx {
        self.q.ctx()
    }

    /// Same parameters re-rounded at another precision (only meaningful when
    /// the inputs were exactly representable or re-parsed from a spec).
    pub fn with_ctx(&self, ctx: Ctx) -> EnsembleParams {
        EnsembleParams {
            q: self.q.with_prec(ctx.bits()),
            n: self.n,
            k: self.k,
            alpha: self.alpha.with_prec(ctx.bits()),
            beta: self.beta.with_prec(ctx.bits()),
        }
    }

    /// Lattice point `y_i = q^{-i}`.
    pub fn y(&self, i: usize) -> Real {
        self.q.recip().powi(i as i32)
    }

    /// `q^e` for a signed integer exponent.
    pub fn qpow(&self, e: i64) -> Real {
        self.q.powi(e as i32)
    }
}

/// `(y; q)_n = (1-y)(1-yq)...(1-yq^{n-1})`.
pub fn qpochhammer(y: &Real, q: &Real, n: usize) -> Real {
    let ctx = y.ctx();
    let mut acc = ctx.one();
    let mut t = y.clone();
    for _ in 0..n {
        acc = acc * (ctx.one() - &t);
        t = t * q;
    }
    acc
}

/// `w(x) = (abq)^{-x} (aq, q^{-N}; q)_x / (q, b^{-1} q^{-N}; q)_x`.
pub fn weight(x: usize, p: &EnsembleParams) -> Result<Real> {
    if x > p.n {
        return Err(Error::InadmissibleParams(format!(
            "x = {x} outside 0..={}",
            p.n
        )));
    }
    let q = &p.q;
    let qmn = q.recip().powi(p.n as i32);
    let num = qpochhammer(&(&p.alpha * q), q, x) * qpochhammer(&qmn, q, x);
    let den = qpochhammer(q, q, x) * qpochhammer(&(&qmn / &p.beta), q, x);
    let pre = (&p.alpha * &p.beta * q).powi(-(x as i32));
    (pre * num / den).finite("weight")
}

/// All weights `w(0..=N)` through the one-step ratio
/// `w(x+1)/w(x) = (1-aq^{x+1})(1-q^{x-N}) / ((1-q^{x+1})(1-b^{-1}q^{x-N}) abq)`.
pub fn weights(p: &EnsembleParams) -> Result<Vec<Real>> {
    let ctx = p.ctx();
    let one = ctx.one();
    let q = &p.q;
    let abq = &p.alpha * &p.beta * q;
    let mut qx1 = q.clone();
    let mut qxn = q.recip().powi(p.n as i32);
    let mut out = Vec::with_capacity(p.n + 1);
    let mut w = ctx.one();
    for _ in 0..p.n {
        out.push(w.clone());
        let num = (&one - &p.alpha * &qx1) * (&one - &qxn);
        let den = (&one - &qx1) * (&one - &qxn / &p.beta) * &abq;
        w = (w * num / den).finite("weight")?;
        qx1 = qx1 * q;
        qxn = qxn * q;
    }
    out.push(w);
    Ok(out)
}

/// Lattice points and weights.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub points: Vec<Real>,
    pub weights: Vec<Real>,
}

impl Lattice {
    pub fn new(p: &EnsembleParams) -> Result<Lattice> {
        let points = (0..=p.n).map(|i| p.y(i)).collect();
        Ok(Lattice {
            points,
            weights: weights(p)?,
        })
    }
}

/// Monic orthogonal polynomials `P_0..P_deg` on `{y_0, .., y_{s-1}}`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    pub support_size: usize,
    /// Monic power-basis coefficients (low to high).
    pub coeffs: Vec<Poly>,
    /// `h_i = (P_i, P_i)_w`.
    pub norms: Vec<Real>,
    /// Three-term recurrence `P_{i+1} = (y - a_i) P_i - b_i P_{i-1}`.
    pub rec_a: Vec<Real>,
    pub rec_b: Vec<Real>,
    /// `values[i][x] = P_i(y_x)` on the support.
    pub values: Vec<Vec<Real>>,
}

impl OrthoBasis {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluates `P_i(z)` through the three-term recurrence.
    pub fn eval(&self, i: usize, z: &Real) -> Real {
        let ctx = z.ctx();
        let mut prev = ctx.zero();
        let mut cur = ctx.one();
        for j in 0..i {
            let next = (z - &self.rec_a[j]) * &cur - &self.rec_b[j] * &prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `(f, g)_w` of two tabulated functions on the support.
    pub fn inner(&self, lat: &Lattice, f: &[Real], g: &[Real]) -> Real {
        let ctx = f[0].ctx();
        let mut acc = ctx.zero();
        for x in 0..self.support_size {
            acc = acc + &f[x] * &g[x] * &lat.weights[x];
        }
        acc
    }
}

/// Stieltjes procedure on the first `s` lattice points, degrees `0..=deg`.
pub fn build_basis_degree(
    p: &EnsembleParams,
    lat: &Lattice,
    s: usize,
    deg: usize,
) -> Result<OrthoBasis> {
    if s <= deg || s > p.n + 1 {
        return Err(Error::DegenerateSupport {
            support: s,
            degree: deg,
        });
    }
    let ctx = p.ctx();
    let pts = &lat.points[..s];
    let w = &lat.weights[..s];
    let mut values: Vec<Vec<Real>> = vec![vec![ctx.one(); s]];
    let mut coeffs = vec![Poly::constant(ctx.one())];
    let mut norms = Vec::with_capacity(deg + 1);
    let mut rec_a = Vec::with_capacity(deg);
    let mut rec_b = Vec::with_capacity(deg);
    for n in 0..=deg {
        let vals = &values[n];
        let mut h = ctx.zero();
        let mut m = ctx.zero();
        for x in 0..s {
            let t = &vals[x] * &vals[x] * &w[x];
            m = m + &t * &pts[x];
            h = h + t;
        }
        if !(h > 0) {
            return Err(Error::DegenerateSupport {
                support: s,
                degree: n,
            });
        }
        if n == deg {
            norms.push(h);
            break;
        }
        let a = &m / &h;
        let b = if n == 0 {
            ctx.zero()
        } else {
            &h / &norms[n - 1]
        };
        let next_vals: Vec<Real> = (0..s)
            .map(|x| {
                let mut v = (&pts[x] - &a) * &vals[x];
                if n > 0 {
                    v = v - &b * &values[n - 1][x];
                }
                v
            })
            .collect();
        let mut c = Poly::linear(&a).mul(&coeffs[n]);
        if n > 0 {
            c = c.sub(&coeffs[n - 1].scale(&b));
        }
        c.c.truncate(n + 2);
        values.push(next_vals);
        coeffs.push(c);
        norms.push(h);
        rec_a.push(a);
        rec_b.push(b);
    }
    Ok(OrthoBasis {
        support_size: s,
        coeffs,
        norms,
        rec_a,
        rec_b,
        values,
    })
}

/// `P_0..P_k` on `{y_0..y_{s-1}}`; needs `s >= k+1`.
pub fn build_basis(p: &EnsembleParams, support: usize) -> Result<OrthoBasis> {
    let lat = Lattice::new(p)?;
    build_basis_degree(p, &lat, support, p.k)
}

/// `Z = prod_{i<k} h_i` on the full lattice: the normalisation of the
/// k-particle measure.
pub fn normalizer_z(p: &EnsembleParams, basis: &OrthoBasis) -> Result<Real> {
    if basis.support_size != p.n + 1 || basis.norms.len() < p.k {
        return Err(Error::DegenerateSupport {
            support: basis.support_size,
            degree: p.k,
        });
    }
    Ok(product(p.ctx(), basis.norms[..p.k].iter().cloned()))
}

/// The restricted kernel matrix used in one Fredholm determinant.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub section_start: usize,
    pub entries: MatrixHP,
}

/// Christoffel-Darboux kernel on the full lattice, conjugated by `sqrt(w)`.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub params: EnsembleParams,
    pub lattice: Lattice,
    pub basis: OrthoBasis,
    full: MatrixHP,
}

impl Kernel {
    pub fn new(p: &EnsembleParams) -> Result<Kernel> {
        let lat = Lattice::new(p)?;
        let basis = build_basis_degree(p, &lat, p.n + 1, p.k)?;
        let n = p.n + 1;
        let k = p.k;
        let c = basis.norms[k - 1].recip();
        let u_poly = &basis.coeffs[k];
        let v_poly = basis.coeffs[k - 1].scale(&c);
        let du = u_poly.deriv();
        let dv = v_poly.deriv();
        let u: Vec<Real> = basis.values[k].clone();
        let v: Vec<Real> = basis.values[k - 1].iter().map(|x| x * &c).collect();
        let sw: Vec<Real> = lat.weights.iter().map(|w| w.sqrt()).collect();
        let y = &lat.points;
        let full = MatrixHP::from_fn(n, n, |i, j| {
            if i == j {
                let yi = &y[i];
                &lat.weights[i] * (du.eval(yi) * &v[i] - &u[i] * dv.eval(yi))
            } else {
                &sw[i] * &sw[j] * (&u[i] * &v[j] - &v[i] * &u[j]) / (&y[i] - &y[j])
            }
        });
        Ok(Kernel {
            params: p.clone(),
            lattice: lat,
            basis,
            full,
        })
    }

    /// `K(y_i, y_j)`.
    pub fn entry(&self, i: usize, j: usize) -> &Real {
        self.full.get(i, j)
    }

    pub fn full(&self) -> &MatrixHP {
        &self.full
    }

    /// `K` restricted to indices `s..=N`.
    pub fn restricted(&self, s: usize) -> KernelMatrix {
        let n = self.params.n + 1;
        let m = n.saturating_sub(s);
        KernelMatrix {
            section_start: s,
            entries: MatrixHP::from_fn(m, m, |i, j| self.full.get(s + i, s + j).clone()),
        }
    }

    /// `D_k(s) = det(I - K_s)`.
    pub fn gap(&self, s: usize) -> Result<Real> {
        let ctx = self.params.ctx();
        if s < self.params.k {
            return Ok(ctx.zero());
        }
        if s > self.params.n {
            return Ok(ctx.one());
        }
        let km = self.restricted(s).entries;
        let m = km.rows();
        let a = MatrixHP::from_fn(m, m, |i, j| {
            let d = if i == j { ctx.one() } else { ctx.zero() };
            d - km.get(i, j)
        });
        det(&a)
    }
}

/// Single kernel entry `K(y_i, y_j)` from a full-support basis.
pub fn kernel(p: &EnsembleParams, basis: &OrthoBasis, i: usize, j: usize) -> Result<Real> {
    if basis.support_size != p.n + 1 || basis.degree() < p.k {
        return Err(Error::DegenerateSupport {
            support: basis.support_size,
            degree: p.k,
        });
    }
    let lat = Lattice::new(p)?;
    let k = p.k;
    let c = basis.norms[k - 1].recip();
    let u = &basis.coeffs[k];
    let v = basis.coeffs[k - 1].scale(&c);
    let (yi, yj) = (&lat.points[i], &lat.points[j]);
    if i == j {
        return Ok(
            &lat.weights[i] * (u.deriv().eval(yi) * v.eval(yi) - u.eval(yi) * v.deriv().eval(yi))
        );
    }
    let num = u.eval(yi) * v.eval(yj) - v.eval(yi) * u.eval(yj);
    Ok((&lat.weights[i] * &lat.weights[j]).sqrt() * num / (yi - yj))
}

/// `D_k(s)` as a Fredholm determinant; 0 for `s < k`, 1 for `s = N+1`.
pub fn gap_direct(p: &EnsembleParams, s: usize) -> Result<Real> {
    Kernel::new(p)?.gap(s)
}

/// `D_k(s)` for every `s = 0..=N+1`.
pub fn gap_direct_all(p: &EnsembleParams) -> Result<Vec<Real>> {
    let ker = Kernel::new(p)?;
    (0..=p.n + 1).map(|s| ker.gap(s)).collect()
}

/// `D_k(s)` for every `s = 0..=N+1` as a ratio of partition functions
/// `Z_s / Z_{N+1}`, `Z_s` being the product of the first `k` norms on
/// `{y_0..y_{s-1}}`. Costs `O(N^2 k)`, usable at large `N`.
pub fn gap_partition_all(p: &EnsembleParams) -> Result<Vec<Real>> {
    let ctx = p.ctx();
    let lat = Lattice::new(p)?;
    let k = p.k;
    let zs = |s: usize| -> Result<Real> {
        let b = build_basis_degree(p, &lat, s, k - 1)?;
        Ok(product(ctx, b.norms.into_iter()))
    };
    let total = zs(p.n + 1)?;
    let mut out = vec![ctx.zero(); k];
    for s in k..=p.n {
        out.push(zs(s)? / &total);
    }
    out.push(ctx.one());
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Exhaustive sum over all k-subsets, returning `D_k(s)` for `s = 0..=N+1`.
pub fn gap_bruteforce_all(p: &EnsembleParams) -> Result<Vec<Real>> {
    let n = p.n + 1;
    let count = binomial(n, p.k);
    if count > 1_000_000 {
        return Err(Error::TooLarge(count));
    }
    let ctx = p.ctx();
    let lat = Lattice::new(p)?;
    // bucket[m]: total mass of configurations whose largest index is m
    let mut bucket = vec![ctx.zero(); n];
    let mut idx: Vec<usize> = Vec::with_capacity(p.k);
    fn rec(
        start: usize,
        left: usize,
        acc: Real,
        idx: &mut Vec<usize>,
        lat: &Lattice,
        bucket: &mut [Real],
    ) {
        if left == 0 {
            let m = *idx.last().unwrap();
            bucket[m] = &bucket[m] + acc;
            return;
        }
        let n = lat.points.len();
        for x in start..=n - left {
            let mut f = &acc * &lat.weights[x];
            for &i in idx.iter() {
                f = f * (&lat.points[x] - &lat.points[i]).square();
            }
            idx.push(x);
            rec(x + 1, left - 1, f, idx, lat, bucket);
            idx.pop();
        }
    }
    rec(0, p.k, ctx.one(), &mut idx, &lat, &mut bucket);
    let total = crate::precision::sum(ctx, bucket.iter());
    let mut out = Vec::with_capacity(n + 1);
    let mut run = ctx.zero();
    out.push(ctx.zero());
    for b in &bucket {
        run = run + b;
        out.push(&run / &total);
    }
    Ok(out)
}

/// Brute-force `D_k(s)`: the normalised mass of subsets inside `{0..s-1}`.
pub fn gap_bruteforce(p: &EnsembleParams, s: usize) -> Result<Real> {
    let all = gap_bruteforce_all(p)?;
    Ok(all[s.min(p.n + 1)].clone())
}

/// Direct sum `sum over k-subsets of prod (y_i - y_j)^2 prod w(x_i)`.
pub fn partition_bruteforce(p: &EnsembleParams) -> Result<Real> {
    let n = p.n + 1;
    let count = binomial(n, p.k);
    if count > 1_000_000 {
        return Err(Error::TooLarge(count));
    }
    let lat = Lattice::new(p)?;
    let mut total = p.ctx().zero();
    let mut idx = vec![0usize; p.k];
    fn rec(pos: usize, start: usize, idx: &mut Vec<usize>, lat: &Lattice, total: &mut Real) {
        let k = idx.len();
        if pos == k {
            let ctx = total.ctx();
            let mut f = ctx.one();
            for a in 0..k {
                f = f * &lat.weights[idx[a]];
                for b in a + 1..k {
                    f = f * (&lat.points[idx[a]] - &lat.points[idx[b]]).square();
                }
            }
            *total = &*total + f;
            return;
        }
        for x in start..=lat.points.len() - (k - pos) {
            idx[pos] = x;
            rec(pos + 1, x + 1, idx, lat, total);
        }
    }
    rec(0, 0, &mut idx, &lat, &mut total);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: &str, n: usize, k: usize, a: &str, b: &str) -> EnsembleParams {
        EnsembleSpec::new(q, n, k, a, b)
            .at(Ctx::new(256).unwrap())
            .unwrap()
    }

    #[test]
    fn pochhammer_examples() {
        let ctx = Ctx::new(128).unwrap();
        let h = ctx.parse("0.5").unwrap();
        assert_eq!(qpochhammer(&h, &h, 0), ctx.one());
        assert_eq!(qpochhammer(&h, &h, 1), ctx.parse("0.5").unwrap());
        assert_eq!(qpochhammer(&h, &h, 2), ctx.parse("0.375").unwrap());
    }

    #[test]
    fn weight_at_one_by_hand() {
        let p = params("0.5", 4, 2, "0.5", "0.5");
        let ctx = p.ctx();
        assert_eq!(weight(0, &p).unwrap(), ctx.one());
        // (abq)^{-1}(1-aq)(1-q^{-N}) / ((1-q)(1-b^{-1}q^{-N})) with a=b=q=1/2, N=4
        let hand = ctx.int(8) * ctx.parse("0.75").unwrap() * ctx.int(-15)
            / (ctx.parse("0.5").unwrap() * ctx.int(-31));
        assert!(weight(1, &p).unwrap().rel_diff(&hand) < ctx.eps());
    }

    #[test]
    fn incremental_weights_match_products() {
        let p = params("0.7", 9, 3, "0.4", "0.6");
        let ws = weights(&p).unwrap();
        for (x, w) in ws.iter().enumerate() {
            assert!(w.rel_diff(&weight(x, &p).unwrap()) < p.ctx().eps());
        }
    }

    #[test]
    fn inadmissible_rejected() {
        let ctx = Ctx::new(128).unwrap();
        let r = EnsembleSpec::new("0.5", 4, 2, "3", "0.5").at(ctx);
        assert!(matches!(r, Err(Error::InadmissibleParams(_))));
        let r = EnsembleSpec::new("1.5", 4, 2, "0.5", "0.5").at(ctx);
        assert!(matches!(r, Err(Error::InadmissibleParams(_))));
        assert!(EnsembleSpec::new("0.5", 4, 2, "40", "40").at(ctx).is_ok());
    }

    #[test]
    fn low_degree_basis() {
        let p = params("0.5", 4, 2, "0.5", "0.5");
        let lat = Lattice::new(&p).unwrap();
        let b = build_basis(&p, 5).unwrap();
        let ctx = p.ctx();
        let h0 = crate::precision::sum(ctx, lat.weights.iter());
        assert!(b.norms[0].rel_diff(&h0) < ctx.eps());
        let m1 = crate::precision::sum(
            ctx,
            lat.weights
                .iter()
                .zip(&lat.points)
                .map(|(w, y)| w * y)
                .collect::<Vec<_>>()
                .iter(),
        );
        assert!((&b.coeffs[1].c[0] + &m1 / &h0).abs() < ctx.eps());
        assert!(matches!(
            build_basis(&p, 2),
            Err(Error::DegenerateSupport { .. })
        ));
    }

    #[test]
    fn gap_boundaries() {
        let p = params("0.5", 6, 2, "0.5", "0.5");
        let ker = Kernel::new(&p).unwrap();
        assert_eq!(ker.gap(7).unwrap(), p.ctx().one());
        assert_eq!(ker.gap(1).unwrap(), p.ctx().zero());
    }
}
