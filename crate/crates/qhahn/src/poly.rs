//! Dense univariate polynomials with high-precision coefficients.

use crate::error::{Error, Result};
use crate::precision::{Ctx, Real};

/// Coefficients stored low to high: `c[i]` multiplies `z^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub c: Vec<Real>,
}

impl Poly {
    pub fn zero(ctx: Ctx) -> Poly {
        Poly {
            c: vec![ctx.zero()],
        }
    }

    pub fn constant(x: Real) -> Poly {
        Poly { c: vec![x] }
    }

    /// Monic linear factor `z - a`.
    pub fn linear(a: &Real) -> Poly {
        Poly {
            c: vec![-a, a.ctx().one()],
        }
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(lead: &Real, roots: &[&Real]) -> Poly {
        let mut p = Poly::constant(lead.clone());
        for r in roots {
            p = p.mul(&Poly::linear(r));
        }
        p
    }

    pub fn ctx(&self) -> Ctx {
        self.c[0].ctx()
    }

    /// Formal degree (length minus one; trailing zeros are kept).
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Real {
        self.c.get(i).cloned().unwrap_or_else(|| self.ctx().zero())
    }

    pub fn eval(&self, z: &Real) -> Real {
        let mut acc = self.ctx().zero();
        for a in self.c.iter().rev() {
            acc = acc * z + a;
        }
        acc
    }

    pub fn deriv(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero(self.ctx());
        }
        Poly {
            c: self
                .c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * i as i32)
                .collect(),
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly {
            c: (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly {
            c: (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect(),
        }
    }

    pub fn scale(&self, s: &Real) -> Poly {
        Poly {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let ctx = self.ctx();
        let mut out = vec![ctx.zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        Poly { c: out }
    }

    /// `p(z / q)`.
    pub fn compose_scale(&self, q: &Real) -> Poly {
        let inv = q.recip();
        let mut f = self.ctx().one();
        let mut out = Vec::with_capacity(self.c.len());
        for a in &self.c {
            out.push(a * &f);
            f = f * &inv;
        }
        Poly { c: out }
    }

    /// Largest absolute coefficient.
    pub fn norm(&self) -> Real {
        self.c
            .iter()
            .map(|a| a.abs())
            .reduce(|a, b| a.max(b))
            .unwrap_or_else(|| self.ctx().zero())
    }

    /// Synthetic division by `z - a`: returns quotient and remainder.
    pub fn div_linear(&self, a: &Real) -> (Poly, Real) {
        let n = self.c.len();
        if n == 1 {
            return (Poly::zero(self.ctx()), self.c[0].clone());
        }
        let mut q = vec![self.ctx().zero(); n - 1];
        let mut acc = self.ctx().zero();
        for i in (0..n).rev() {
            acc = acc * a + &self.c[i];
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Poly { c: q }, acc)
    }

    /// Exact division by `z - a`, failing when the remainder exceeds
    /// `tol` relative to the coefficient scale.
    pub fn div_exact(&self, a: &Real, tol: &Real, what: &str) -> Result<Poly> {
        let (q, r) = self.div_linear(a);
        let scale = self.norm() * a.abs().max(self.ctx().one()).powi(self.c.len() as i32);
        if r.abs() > tol * &scale && !scale.is_zero() {
            return Err(Error::CancellationFailure(format!(
                "{what}: remainder {} at z = {}",
                r.to_sig(6),
                a.to_sig(10)
            )));
        }
        Ok(q)
    }

    /// Drop high-order coefficients that are negligible against the rest.
    pub fn trim(&self, tol: &Real) -> Poly {
        let s = self.norm();
        let mut c = self.c.clone();
        while c.len() > 1 && c.last().map(|x| x.abs() <= tol * &s).unwrap_or(false) {
            c.pop();
        }
        Poly { c }
    }

    /// Keep exactly `n` coefficients, checking the dropped ones are tiny.
    pub fn truncate_checked(&self, n: usize, tol: &Real, what: &str) -> Result<Poly> {
        let s = self.norm();
        for (i, a) in self.c.iter().enumerate().skip(n) {
            if a.abs() > tol * &s {
                return Err(Error::CancellationFailure(format!(
                    "{what}: coefficient of z^{i} is {} (expected degree < {n})",
                    a.to_sig(6)
                )));
            }
        }
        let mut c: Vec<Real> = self.c.iter().take(n).cloned().collect();
        while c.len() < n {
            c.push(self.ctx().zero());
        }
        Ok(Poly { c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_roundtrip() {
        let ctx = Ctx::new(128).unwrap();
        let a = ctx.parse("0.3").unwrap();
        let b = ctx.parse("-2.5").unwrap();
        let p = Poly::from_roots(&ctx.int(3), &[&a, &b]);
        let q = p.div_exact(&a, &ctx.eps(), "test").unwrap();
        assert!(q.eval(&b).abs() < ctx.eps());
        assert_eq!(q.len(), 2);
        assert!(p.div_exact(&ctx.int(7), &ctx.eps(), "test").is_err());
    }

    #[test]
    fn derivative_and_scale() {
        let ctx = Ctx::new(128).unwrap();
        let p = Poly {
            c: vec![ctx.int(1), ctx.int(2), ctx.int(3)],
        };
        assert_eq!(p.deriv().c, vec![ctx.int(2), ctx.int(6)]);
        let s = p.compose_scale(&ctx.int(2));
        let z = ctx.int(6);
        assert_eq!(s.eval(&z), p.eval(&ctx.int(3)));
    }
}
