//! Airy function and the Tracy-Widom GUE distribution `F2`.
//!
//! `Ai` is summed from its Maclaurin series for `|x| <= 8` and from the
//! standard asymptotic expansions beyond, in extended precision. `F2(u)` is
//! the Fredholm determinant of the Airy kernel on `(u, inf)`, discretized by
//! Gauss-Legendre nodes mapped to the half-line.

use crate::error::{Error, Result};
use crate::precision::{Ctx, Real};

/// Working precision behind the `f64` entry points.
pub const AIRY_BITS: u32 = 192;
/// Beyond this the kernel entries are below `f64` resolution and set to 0.
pub const KERNEL_CUTOFF: f64 = 40.0;
/// Inter-order agreement required by [`tw_f2`].
pub const ORDER_TOL: f64 = 1e-10;

/// `(Ai(x), Ai'(x))` at the precision of `x`.
pub fn airy_hp(x: &Real) -> Result<(Real, Real)> {
    let xf = x.to_f64();
    if !(xf.abs() <= KERNEL_CUTOFF) {
        return Err(Error::DomainError(xf));
    }
    if xf.abs() <= 8.0 {
        Ok(maclaurin(x))
    } else if xf > 0.0 {
        Ok(asymptotic_pos(x))
    } else {
        Ok(asymptotic_neg(x))
    }
}

/// `Ai(x)` in `f64`.
pub fn airy(x: f64) -> Result<f64> {
    let ctx = Ctx::new(AIRY_BITS)?;
    Ok(airy_hp(&ctx.from_f64(x))?.0.to_f64())
}

/// `(Ai(x), Ai'(x))` in `f64`.
pub fn airy_pair(x: f64) -> Result<(f64, f64)> {
    let ctx = Ctx::new(AIRY_BITS)?;
    let (a, d) = airy_hp(&ctx.from_f64(x))?;
    Ok((a.to_f64(), d.to_f64()))
}

/// `Ai(0) = 3^{-2/3}/Gamma(2/3)` and `-Ai'(0) = 3^{-1/3}/Gamma(1/3)`.
pub fn airy_seeds(ctx: Ctx) -> (Real, Real) {
    let three = ctx.int(3);
    let c1 = three.pow(&(ctx.int(-2) / 3)) / (ctx.int(2) / 3).gamma();
    let c2 = three.pow(&(ctx.int(-1) / 3)) / (ctx.one() / 3).gamma();
    (c1, c2)
}

fn maclaurin(x: &Real) -> (Real, Real) {
    let ctx = x.ctx();
    let (c1, c2) = airy_seeds(ctx);
    let x3 = x.powi(3);
    // f = sum x^{3k} a_k, g = sum x^{3k+1} b_k with
    // a_{k+1} = a_k / ((3k+2)(3k+3)), b_{k+1} = b_k / ((3k+3)(3k+4))
    let mut tf = ctx.one();
    let mut tg = x.clone();
    let mut f = ctx.zero();
    let mut g = ctx.zero();
    let mut df = ctx.zero();
    let mut dg = ctx.zero();
    let tiny = Real(rug::Float::with_val(
        ctx.bits(),
        rug::Float::i_exp(1, -(ctx.bits() as i32) - 8),
    ));
    for k in 0..400i32 {
        f = &f + &tf;
        g = &g + &tg;
        // derivatives: d/dx x^{3k} = 3k x^{3k-1}
        if k > 0 {
            df = &df + &tf * (3 * k) / x;
        }
        dg = &dg + &tg * (3 * k + 1) / x;
        let kf = 3 * k;
        tf = &tf * &x3 / ((kf + 2) * (kf + 3));
        tg = &tg * &x3 / ((kf + 3) * (kf + 4));
        if tf.abs() <= &tiny * f.abs().max(ctx.one()) && tg.abs() <= &tiny * g.abs().max(ctx.one())
        {
            break;
        }
    }
    if x.is_zero() {
        dg = ctx.one();
    }
    (&c1 * &f - &c2 * &g, &c1 * df - c2 * dg)
}

/// `u_k = (2k+1)(2k+3)..(6k-1) / (216^k k!)` and `v_k = -(6k+1)/(6k-1) u_k`.
fn asymptotic_coeffs(ctx: Ctx, n: usize) -> (Vec<Real>, Vec<Real>) {
    let mut u = vec![ctx.one()];
    let mut v = vec![ctx.one()];
    for k in 1..n {
        let kk = k as i64;
        let prev = &u[k - 1];
        // ratio u_k/u_{k-1} = (6k-5)(6k-3)(6k-1) / (216 k (2k-1))
        let next = prev * ctx.int((6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1))
            / ctx.int(216 * kk * (2 * kk - 1));
        v.push(-(&next * ctx.int(6 * kk + 1) / ctx.int(6 * kk - 1)));
        u.push(next);
    }
    (u, v)
}

fn truncated_sum(c: &[Real], zi: &Real, alternate: bool, parity: Option<usize>) -> Real {
    // sums the asymptotic series up to its smallest term
    let ctx = zi.ctx();
    let mut s = ctx.zero();
    let mut last = None::<Real>;
    let mut pw = ctx.one();
    for (k, ck) in c.iter().enumerate() {
        let term = ck * &pw;
        pw = pw * zi;
        if let Some(p) = parity {
            if k % 2 != p {
                continue;
            }
        }
        if let Some(l) = &last {
            if term.abs() > *l {
                break;
            }
        }
        last = Some(term.abs());
        let j = match parity {
            Some(_) => k / 2,
            None => k,
        };
        if alternate && j % 2 == 1 {
            s = s - term;
        } else {
            s = s + term;
        }
    }
    s
}

fn asymptotic_pos(x: &Real) -> (Real, Real) {
    let ctx = x.ctx();
    let zeta = x.pow(&(ctx.int(3) / 2)) * 2 / 3;
    let zi = zeta.recip();
    let (u, v) = asymptotic_coeffs(ctx, 60);
    let e = (-&zeta).exp() / (ctx.pi().sqrt() * 2);
    let x4 = x.sqrt().sqrt();
    let ai = &e / &x4 * truncated_sum(&u, &zi, true, None);
    let dai = -(e * x4 * truncated_sum(&v, &zi, true, None));
    (ai, dai)
}

fn asymptotic_neg(x: &Real) -> (Real, Real) {
    let ctx = x.ctx();
    let y = -x;
    let zeta = y.pow(&(ctx.int(3) / 2)) * 2 / 3;
    let zi = zeta.recip();
    let (u, v) = asymptotic_coeffs(ctx, 80);
    let phase = &zeta + ctx.pi() / 4;
    let (s, c) = phase.0.clone().sin_cos(rug::Float::new(ctx.bits()));
    let (s, c) = (Real(s), Real(c));
    let y4 = y.sqrt().sqrt();
    let sp = ctx.pi().sqrt();
    let ue = truncated_sum(&u, &zi, true, Some(0));
    let uo = truncated_sum(&u, &zi, true, Some(1));
    let ve = truncated_sum(&v, &zi, true, Some(0));
    let vo = truncated_sum(&v, &zi, true, Some(1));
    let ai = (&s * ue - &c * uo) / (&sp * &y4);
    let dai = -(y4 / sp * (c * ve + s * vo));
    (ai, dai)
}

/// Gauss-Legendre nodes and weights on `(-1, 1)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Length scale of the half-line map `x = u + L t/(1-t)`.
const MAP_SCALE: f64 = 6.0;

/// `F2(u)` at a fixed quadrature order.
pub fn fredholm_f2(u: f64, order: usize) -> Result<f64> {
    let (t, wt) = gauss_legendre(order);
    let mut xs = Vec::with_capacity(order);
    let mut ws = Vec::with_capacity(order);
    for (ti, wi) in t.iter().zip(&wt) {
        let s = 0.5 * (ti + 1.0);
        xs.push(u + MAP_SCALE * s / (1.0 - s));
        ws.push(0.5 * wi * MAP_SCALE / ((1.0 - s) * (1.0 - s)));
    }
    let ai: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| {
            if x > KERNEL_CUTOFF {
                Ok((0.0, 0.0))
            } else {
                airy_pair(x)
            }
        })
        .collect::<Result<_>>()?;
    let n = order;
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a1, d1) = ai[i];
            let (a2, d2) = ai[j];
            let k = if i == j {
                d1 * d1 - xs[i] * a1 * a1
            } else {
                (a1 * d2 - d1 * a2) / (xs[i] - xs[j])
            };
            let v = ws[i].sqrt() * k * ws[j].sqrt();
            m[i * n + j] = if i == j { 1.0 - v } else { -v };
        }
    }
    Ok(det_f64(&mut m, n))
}

fn det_f64(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a * n + c].abs().total_cmp(&m[b * n + c].abs()))
            .unwrap();
        if m[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        let d = m[c * n + c];
        det *= d;
        for r in c + 1..n {
            let f = m[r * n + c] / d;
            for j in c..n {
                m[r * n + j] -= f * m[c * n + j];
            }
        }
    }
    det
}

/// `F2(u)`, doubling the order (up to 3 times) until two consecutive
/// orders agree to [`ORDER_TOL`].
pub fn tw_f2(u: f64, order: usize) -> Result<f64> {
    if order < 20 {
        return Err(Error::QuadratureError(format!("order {order} below 20")));
    }
    let mut m = order;
    let mut prev = fredholm_f2(u, m)?;
    for _ in 0..3 {
        let next = fredholm_f2(u, 2 * m)?;
        if (next - prev).abs() < ORDER_TOL {
            return Ok(next);
        }
        prev = next;
        m *= 2;
    }
    Err(Error::QuadratureError(format!(
        "F2({u}) not converged at order {m}"
    )))
}

/// Tabulated `F2` and its density.
#[derive(Clone, Debug)]
pub struct TWGrid {
    /// `(u, F2(u), F2'(u))`.
    pub grid: Vec<(f64, f64, f64)>,
    pub quadrature_order: usize,
}

/// Step for the central difference giving the density.
const DENSITY_STEP: f64 = 1e-3;

impl TWGrid {
    pub fn new(us: &[f64], order: usize) -> Result<TWGrid> {
        let grid = us
            .iter()
            .map(|&u| {
                let f = tw_f2(u, order)?;
                let h = DENSITY_STEP;
                let d =
                    (fredholm_f2(u + h, 2 * order)? - fredholm_f2(u - h, 2 * order)?) / (2.0 * h);
                Ok((u, f, d))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TWGrid {
            grid,
            quadrature_order: order,
        })
    }

    pub fn uniform(lo: f64, hi: f64, points: usize, order: usize) -> Result<TWGrid> {
        let us: Vec<f64> = (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect();
        TWGrid::new(&us, order)
    }

    pub fn is_monotone(&self) -> bool {
        self.grid.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

/// Density `F2'(u)` by central differences.
pub fn tw_density(u: f64, order: usize) -> Result<f64> {
    let h = DENSITY_STEP;
    Ok((fredholm_f2(u + h, order)? - fredholm_f2(u - h, order)?) / (2.0 * h))
}

/// Mean of the distribution, `b F(b) - a F(a) - int_a^b F(u) du` on
/// `[a, b] = [-10, 8]`.
pub fn tw_mean(order: usize) -> Result<f64> {
    let (a, b) = (-10.0, 8.0);
    let (t, w) = gauss_legendre(64);
    let mut integral = 0.0;
    for (ti, wi) in t.iter().zip(&w) {
        let u = a + (b - a) * 0.5 * (ti + 1.0);
        integral += 0.5 * (b - a) * wi * fredholm_f2(u, order)?;
    }
    Ok(b * fredholm_f2(b, order)? - a * fredholm_f2(a, order)? - integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn airy_reference_values() {
        // Ai(1) = 0.1352924163128814, Ai'(1) = -0.1591474412967932
        let (a, d) = airy_pair(1.0).unwrap();
        assert!((a - 0.1352924163128814).abs() < 1e-15);
        assert!((d + 0.1591474412967932).abs() < 1e-15);
        // Ai(-2) = 0.2274074282016856
        assert!((airy(-2.0).unwrap() - 0.2274074282016856).abs() < 1e-15);
        // series and asymptotic branches agree where they meet
        let ctx = Ctx::new(256).unwrap();
        for x in [-9.0, -8.0, 8.0, 9.0] {
            let x = ctx.from_f64(x);
            let (a, d) = maclaurin(&x);
            let (b, e) = if x > 0 {
                asymptotic_pos(&x)
            } else {
                asymptotic_neg(&x)
            };
            let scale = a.abs() + d.abs();
            let tol = &scale * ctx.parse("1e-13").unwrap();
            assert!((&a - &b).abs() < tol && (&d - &e).abs() < tol, "{x}");
        }
        assert!(airy(41.0).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }
}
