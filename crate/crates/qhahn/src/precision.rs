//! Arbitrary-precision reals and the small dense linear algebra built on them.
//!
//! Lattice points `q^{-i}` span hundreds of binary orders of magnitude, so
//! everything runs on MPFR floats (through `rug`). A [`Ctx`] fixes the
//! mantissa width; every [`Real`] produced under it carries that width and
//! binary operations work at the wider of their two operands.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Working precision. Immutable and `Copy`, so it can be shared freely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ctx {
    bits: u32,
}

impl Ctx {
    pub const DEFAULT_BITS: u32 = 256;

    pub fn new(bits: u32) -> Result<Ctx> {
        if bits < 64 {
            return Err(Error::PrecisionTooLow(bits));
        }
        Ok(Ctx { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Same context at twice the precision (used by self-checks).
    pub fn doubled(&self) -> Ctx {
        Ctx {
            bits: self.bits * 2,
        }
    }

    /// Relative threshold for rank and cancellation decisions: `2^{-bits/2}`.
    pub fn eps(&self) -> Real {
        let one = Float::with_val(self.bits, 1);
        Real(one >> (self.bits / 2) as i32)
    }

    pub fn int(&self, n: i64) -> Real {
        Real(Float::with_val(self.bits, n))
    }

    pub fn zero(&self) -> Real {
        self.int(0)
    }

    pub fn one(&self) -> Real {
        self.int(1)
    }

    pub fn from_f64(&self, x: f64) -> Real {
        Real(Float::with_val(self.bits, x))
    }

    /// Correctly rounded decimal parse, so "0.7" means 7/10 and not the
    /// nearest double.
    pub fn parse(&self, s: &str) -> Result<Real> {
        let p = Float::parse(s.trim()).map_err(|_| Error::Parse(s.to_string()))?;
        Ok(Real(Float::with_val(self.bits, p)))
    }

    pub fn pi(&self) -> Real {
        Real(Float::with_val(self.bits, Constant::Pi))
    }

    /// Precision large enough for a lattice `q^{-i}`, `i <= n`: at least
    /// `4 n log2(1/q)` bits, never below `requested`.
    pub fn escalated_for(requested: u32, q: f64, n: usize) -> u32 {
        let need = (4.0 * n as f64 * (1.0 / q).log2()).ceil();
        let need = if need.is_finite() && need > 0.0 {
            need as u32
        } else {
            0
        };
        requested.max(need).max(64)
    }
}

/// Arbitrary-precision real, a thin wrapper over an MPFR float.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(pub Float);

impl Real {
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn ctx(&self) -> Ctx {
        Ctx {
            bits: self.0.prec(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative()
    }

    /// Errors when the value is NaN or infinite.
    pub fn finite(self, what: &str) -> Result<Real> {
        if self.0.is_finite() {
            Ok(self)
        } else {
            Err(Error::PrecisionOverflow(what.to_string()))
        }
    }

    pub fn abs(&self) -> Real {
        Real(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Real {
        Real(self.0.clone().sqrt())
    }

    pub fn cbrt(&self) -> Real {
        Real(self.0.clone().cbrt())
    }

    pub fn ln(&self) -> Real {
        Real(self.0.clone().ln())
    }

    pub fn exp(&self) -> Real {
        Real(self.0.clone().exp())
    }

    pub fn recip(&self) -> Real {
        Real(self.0.clone().recip())
    }

    pub fn square(&self) -> Real {
        Real(self.0.clone().square())
    }

    pub fn powi(&self, n: i32) -> Real {
        Real(self.0.clone().pow(n))
    }

    pub fn pow(&self, e: &Real) -> Real {
        let p = self.prec().max(e.prec());
        Real(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    pub fn gamma(&self) -> Real {
        Real(self.0.clone().gamma())
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn with_prec(&self, bits: u32) -> Real {
        Real(Float::with_val(bits, &self.0))
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_sig(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    /// Relative distance `|a-b| / max(|a|,|b|)`, zero when both vanish.
    pub fn rel_diff(&self, other: &Real) -> Real {
        let d = (self - other).abs();
        let m = self.abs().max(other.abs());
        if m.is_zero() {
            m
        } else {
            d / m
        }
    }

    pub fn total_cmp(&self, other: &Real) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sig(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or((self.prec() / 4) as usize);
        write!(f, "{}", self.to_sig(digits))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let p = self.prec().max(rhs.prec());
                Real(Float::with_val(p, &self.0 $op &rhs.0))
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self $op &rhs
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                if self.prec() >= rhs.prec() {
                    Real(self.0 $op &rhs.0)
                } else {
                    &self $op rhs
                }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self $op &rhs
            }
        }
        impl $tr<i32> for Real {
            type Output = Real;
            fn $m(self, rhs: i32) -> Real {
                Real(self.0 $op rhs)
            }
        }
        impl $tr<i32> for &Real {
            type Output = Real;
            fn $m(self, rhs: i32) -> Real {
                Real(self.0.clone() $op rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

impl PartialEq<i32> for Real {
    fn eq(&self, other: &i32) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<i32> for Real {
    fn partial_cmp(&self, other: &i32) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

/// Sum of a sequence of reals (the empty sum is zero at `ctx`).
pub fn sum<'a, I: IntoIterator<Item = &'a Real>>(ctx: Ctx, it: I) -> Real {
    let mut acc = ctx.zero();
    for x in it {
        acc = acc + x;
    }
    acc
}

/// Product of a sequence of reals (the empty product is one at `ctx`).
pub fn product<I: IntoIterator<Item = Real>>(ctx: Ctx, it: I) -> Real {
    let mut acc = ctx.one();
    for x in it {
        acc = acc * x;
    }
    acc
}

/// Dense row-major matrix of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixHP {
    rows: usize,
    cols: usize,
    data: Vec<Real>,
}

impl MatrixHP {
    pub fn zeros(ctx: Ctx, rows: usize, cols: usize) -> MatrixHP {
        MatrixHP {
            rows,
            cols,
            data: vec![ctx.zero(); rows * cols],
        }
    }

    pub fn identity(ctx: Ctx, n: usize) -> MatrixHP {
        let mut m = MatrixHP::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Real>>) -> Result<MatrixHP> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(MatrixHP {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Real) -> MatrixHP {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        MatrixHP { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Real {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Real) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &MatrixHP) -> Result<MatrixHP> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(MatrixHP::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(0, 0).ctx().zero();
            for l in 0..self.cols {
                acc = acc + self.get(i, l) * other.get(l, j);
            }
            acc
        }))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Option<Real> {
        self.data.iter().map(|x| x.abs()).reduce(|a, b| a.max(b))
    }
}

/// Determinant by LU with partial pivoting. The empty matrix has
/// determinant one.
pub fn det(m: &MatrixHP) -> Result<Real> {
    if m.rows != m.cols {
        return Err(Error::Dimension(format!("det of {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    if n == 0 {
        return Err(Error::Dimension(
            "det of empty matrix needs a context".into(),
        ));
    }
    let mut a = m.data.clone();
    let ctx = a[0].ctx();
    let mut d = ctx.one();
    for c in 0..n {
        let mut piv = c;
        let mut best = a[c * n + c].abs();
        for r in c + 1..n {
            let v = a[r * n + c].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best.is_zero() {
            return Ok(ctx.zero());
        }
        if piv != c {
            for j in 0..n {
                a.swap(c * n + j, piv * n + j);
            }
            d = -d;
        }
        let p = a[c * n + c].clone();
        d = d * &p;
        for r in c + 1..n {
            let f = &a[r * n + c] / &p;
            if f.is_zero() {
                continue;
            }
            for j in c + 1..n {
                let t = &f * &a[c * n + j];
                a[r * n + j] = &a[r * n + j] - t;
            }
        }
    }
    d.finite("determinant")
}

/// Determinant with an explicit context so the 0x0 case is defined.
pub fn det_or_one(ctx: Ctx, m: &MatrixHP) -> Result<Real> {
    if m.rows == 0 && m.cols == 0 {
        Ok(ctx.one())
    } else {
        det(m)
    }
}

/// 2x2 matrix, the workhorse of the connection code.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[Real; 2]; 2],
}

pub type Vec2 = [Real; 2];

impl Mat2 {
    pub fn new(a: Real, b: Real, c: Real, d: Real) -> Mat2 {
        Mat2 {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity(ctx: Ctx) -> Mat2 {
        Mat2::new(ctx.one(), ctx.zero(), ctx.zero(), ctx.one())
    }

    pub fn scalar(x: &Real) -> Mat2 {
        let z = x.ctx().zero();
        Mat2::new(x.clone(), z.clone(), z, x.clone())
    }

    /// Outer product `a b^T`.
    pub fn outer(a: &Vec2, b: &Vec2) -> Mat2 {
        Mat2::new(&a[0] * &b[0], &a[0] * &b[1], &a[1] * &b[0], &a[1] * &b[1])
    }

    pub fn det(&self) -> Real {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn inv(&self) -> Result<Mat2> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::NonGenericConnection(
                "inverting a singular 2x2 matrix".into(),
            ));
        }
        Ok(Mat2::new(
            &self.m[1][1] / &d,
            -(&self.m[0][1] / &d),
            -(&self.m[1][0] / &d),
            &self.m[0][0] / &d,
        ))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let e = |i: usize, j: usize| &self.m[i][0] * &o.m[0][j] + &self.m[i][1] * &o.m[1][j];
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let e = |i: usize, j: usize| &self.m[i][j] + &o.m[i][j];
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let e = |i: usize, j: usize| &self.m[i][j] - &o.m[i][j];
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn scale(&self, s: &Real) -> Mat2 {
        let e = |i: usize, j: usize| &self.m[i][j] * s;
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0].clone(),
            self.m[1][0].clone(),
            self.m[0][1].clone(),
            self.m[1][1].clone(),
        )
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        [
            &self.m[0][0] * &v[0] + &self.m[0][1] * &v[1],
            &self.m[1][0] * &v[0] + &self.m[1][1] * &v[1],
        ]
    }

    /// Row vector times matrix, `v^T M`.
    pub fn apply_left(&self, v: &Vec2) -> Vec2 {
        [
            &v[0] * &self.m[0][0] + &v[1] * &self.m[1][0],
            &v[0] * &self.m[0][1] + &v[1] * &self.m[1][1],
        ]
    }

    /// Frobenius inner product.
    pub fn frob(&self, o: &Mat2) -> Real {
        &self.m[0][0] * &o.m[0][0]
            + &self.m[0][1] * &o.m[0][1]
            + &self.m[1][0] * &o.m[1][0]
            + &self.m[1][1] * &o.m[1][1]
    }

    pub fn max_abs(&self) -> Real {
        let a = self.m[0][0].abs().max(self.m[0][1].abs());
        let b = self.m[1][0].abs().max(self.m[1][1].abs());
        a.max(b)
    }

    pub fn to_matrix(&self) -> MatrixHP {
        MatrixHP::from_fn(2, 2, |i, j| self.m[i][j].clone())
    }

    pub fn from_matrix(m: &MatrixHP) -> Result<Mat2> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::Dimension(format!(
                "expected 2x2, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Mat2::new(
            m.get(0, 0).clone(),
            m.get(0, 1).clone(),
            m.get(1, 0).clone(),
            m.get(1, 1).clone(),
        ))
    }
}

pub fn dot2(a: &Vec2, b: &Vec2) -> Real {
    &a[0] * &b[0] + &a[1] * &b[1]
}

/// Rotation by a quarter turn, `J(v) = (-v1, v0)`; `J(v)` is orthogonal to `v`.
pub fn perp(v: &Vec2) -> Vec2 {
    [-&v[1], v[0].clone()]
}

fn normalize_largest(v: Vec2) -> Vec2 {
    let s = if v[0].abs() >= v[1].abs() {
        v[0].clone()
    } else {
        v[1].clone()
    };
    [&v[0] / &s, &v[1] / &s]
}

fn rank_check(m: &Mat2) -> Result<()> {
    let scale = m.max_abs();
    if scale.is_zero() {
        return Err(Error::RankZero);
    }
    let eps = m.m[0][0].ctx().eps();
    if m.det().abs() > eps * scale.square() {
        return Err(Error::NotSingular);
    }
    Ok(())
}

/// Nonzero kernel vector of a rank-one 2x2 matrix, largest entry 1.
pub fn null_vector_2x2(m: &MatrixHP) -> Result<Vec2> {
    let m = Mat2::from_matrix(m)?;
    rank_check(&m)?;
    let r0 = m.m[0][0].abs().max(m.m[0][1].abs());
    let r1 = m.m[1][0].abs().max(m.m[1][1].abs());
    let row = if r0 >= r1 { 0 } else { 1 };
    let v = [-&m.m[row][1], m.m[row][0].clone()];
    Ok(normalize_largest(v))
}

/// Generator of the column space of a rank-one 2x2 matrix, largest entry 1.
pub fn rank1_residue_direction(m: &MatrixHP) -> Result<Vec2> {
    let m = Mat2::from_matrix(m)?;
    rank_check(&m)?;
    let c0 = m.m[0][0].abs().max(m.m[1][0].abs());
    let c1 = m.m[0][1].abs().max(m.m[1][1].abs());
    let col = if c0 >= c1 { 0 } else { 1 };
    Ok(normalize_largest([
        m.m[0][col].clone(),
        m.m[1][col].clone(),
    ]))
}

/// Column-space generator of a 2x2 matrix without the rank check: picks the
/// column of larger magnitude. Used where the rank is one by construction
/// but cancellation makes the determinant test too strict.
pub fn dominant_column(m: &Mat2) -> Vec2 {
    let c0 = m.m[0][0].abs().max(m.m[1][0].abs());
    let c1 = m.m[0][1].abs().max(m.m[1][1].abs());
    let col = if c0 >= c1 { 0 } else { 1 };
    normalize_largest([m.m[0][col].clone(), m.m[1][col].clone()])
}

/// Row-space generator, the transpose analogue of [`dominant_column`].
pub fn dominant_row(m: &Mat2) -> Vec2 {
    dominant_column(&m.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Ctx {
        Ctx::new(256).unwrap()
    }

    #[test]
    fn parse_is_exact_decimal() {
        let x = c().parse("0.7").unwrap();
        let back = x * 10 - c().int(7);
        assert!(back.abs() < c().eps().square());
    }

    #[test]
    fn det_small_cases() {
        let ctx = c();
        let one = MatrixHP::from_rows(vec![vec![ctx.int(5)]]).unwrap();
        assert_eq!(det(&one).unwrap(), ctx.int(5));
        assert_eq!(det(&MatrixHP::identity(ctx, 3)).unwrap(), ctx.one());
        let m = MatrixHP::from_rows(vec![
            vec![ctx.int(1), ctx.int(2)],
            vec![ctx.int(3), ctx.int(4)],
        ])
        .unwrap();
        assert!(det(&m).unwrap().rel_diff(&ctx.int(-2)) < ctx.eps());
    }

    #[test]
    fn null_vectors() {
        let ctx = c();
        let m = |a: i64, b: i64, cc: i64, d: i64| {
            MatrixHP::from_rows(vec![
                vec![ctx.int(a), ctx.int(b)],
                vec![ctx.int(cc), ctx.int(d)],
            ])
            .unwrap()
        };
        let v = null_vector_2x2(&m(0, 0, 0, 1)).unwrap();
        assert_eq!(v, [ctx.one(), ctx.zero()]);
        let v = null_vector_2x2(&m(1, 1, 1, 1)).unwrap();
        assert_eq!(&v[0] + &v[1], ctx.zero());
        assert_eq!(null_vector_2x2(&m(1, 0, 0, 1)), Err(Error::NotSingular));
        assert_eq!(null_vector_2x2(&m(0, 0, 0, 0)), Err(Error::RankZero));
        let r = rank1_residue_direction(&m(2, 4, 1, 2)).unwrap();
        assert_eq!(r, [ctx.one(), ctx.parse("0.5").unwrap()]);
        let r = rank1_residue_direction(&m(0, 0, 0, 3)).unwrap();
        assert_eq!(r, [ctx.zero(), ctx.one()]);
        assert_eq!(
            rank1_residue_direction(&m(1, 0, 0, 1)),
            Err(Error::NotSingular)
        );
    }

    #[test]
    fn escalation_rule() {
        assert_eq!(Ctx::escalated_for(256, 0.5, 10), 256);
        assert_eq!(Ctx::escalated_for(64, 0.5, 100), 400);
    }
}
