//! Fixed-precision complex arithmetic on top of MPFR floats.
//!
//! Every value carries its precision; binary operations compute at the
//! maximum precision of their operands and round to nearest. Operations are
//! deterministic: the same inputs at the same precision produce bitwise
//! identical results on every run.

use rug::float::Round;
use rug::ops::NegAssign;
use rug::{Float, Rational};
use std::fmt;

/// A complex number with explicit MPFR precision.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn zero(prec: u32) -> Self {
        Complex {
            re: Float::with_val(prec, 0),
            im: Float::with_val(prec, 0),
        }
    }

    pub fn one(prec: u32) -> Self {
        Complex {
            re: Float::with_val(prec, 1),
            im: Float::with_val(prec, 0),
        }
    }

    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Complex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_rationals(prec: u32, re: &Rational, im: &Rational) -> Self {
        Complex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Complex {
            re,
            im: Float::with_val(prec, 0),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn neg(&self) -> Self {
        Complex {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.prec().max(rhs.prec());
        let re = Float::with_val(p, &self.re * &rhs.re) - Float::with_val(p, &self.im * &rhs.im);
        let im = Float::with_val(p, &self.re * &rhs.im) + Float::with_val(p, &self.im * &rhs.re);
        Complex {
            re: Float::with_val(p, re),
            im: Float::with_val(p, im),
        }
    }

    pub fn mul_float(&self, rhs: &Float) -> Self {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re * rhs),
            im: Float::with_val(p, &self.im * rhs),
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }

    /// `self += a * b` without an intermediate allocation for the sum.
    pub fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        let t = a.mul(b);
        self.re += &t.re;
        self.im += &t.im;
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.clone().square() + self.im.clone().square())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let n = self.norm_sqr();
        let re = Float::with_val(p, &self.re / &n);
        let im = -Float::with_val(p, &self.im / &n);
        Complex { re, im }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.recip())
    }

    /// Integer power by binary exponentiation; `powi(0)` is one.
    pub fn powi(&self, e: i64) -> Self {
        let p = self.prec();
        if e == 0 {
            return Complex::one(p);
        }
        let mut base = if e < 0 { self.recip() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Complex::one(p);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// exp(self) via exp(re)·(cos im, sin im).
    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.clone().exp());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Complex {
            re: Float::with_val(p, &m * &c),
            im: Float::with_val(p, &m * &s),
        }
    }

    /// Distance |self − rhs|.
    pub fn dist(&self, rhs: &Self) -> Float {
        self.sub(rhs).abs()
    }

    // -- in-place operations for allocation-free hot loops ------------------

    pub fn assign(&mut self, src: &Self) {
        self.re.assign(&src.re);
        self.im.assign(&src.im);
    }

    pub fn assign_zero(&mut self) {
        self.re.assign(0);
        self.im.assign(0);
    }

    /// self = a + b.
    pub fn assign_add(&mut self, a: &Self, b: &Self) {
        self.re.assign(&a.re + &b.re);
        self.im.assign(&a.im + &b.im);
    }

    /// self = a + t·c for a small integer t, using one scratch float.
    pub fn assign_add_scaled_i64(&mut self, a: &Self, c: &Self, t: i64, tmp: &mut Float) {
        tmp.assign(&c.re);
        *tmp *= t;
        self.re.assign(&a.re + &*tmp);
        tmp.assign(&c.im);
        *tmp *= t;
        self.im.assign(&a.im + &*tmp);
    }

    /// self = a·b; self must not alias a or b.
    pub fn assign_mul(&mut self, a: &Self, b: &Self, t1: &mut Float, t2: &mut Float) {
        t1.assign(&a.re * &b.re);
        t2.assign(&a.im * &b.im);
        self.re.assign(&*t1 - &*t2);
        t1.assign(&a.re * &b.im);
        t2.assign(&a.im * &b.re);
        self.im.assign(&*t1 + &*t2);
    }

    /// self += a·b without allocation.
    pub fn add_assign_mul(&mut self, a: &Self, b: &Self, t1: &mut Float, t2: &mut Float) {
        t1.assign(&a.re * &b.re);
        t2.assign(&a.im * &b.im);
        *t1 -= &*t2;
        self.re += &*t1;
        t1.assign(&a.re * &b.im);
        t2.assign(&a.im * &b.re);
        *t1 += &*t2;
        self.im += &*t1;
    }

    /// self = 1/a; self must not alias a.
    pub fn assign_recip(&mut self, a: &Self, t1: &mut Float) {
        t1.assign(&a.re * &a.re);
        self.re.assign(&a.im * &a.im);
        *t1 += &self.re; // |a|²
        self.re.assign(&a.re / &*t1);
        self.im.assign(&a.im / &*t1);
        self.im.neg_assign();
    }

    /// |self|² into an existing float.
    pub fn norm_sqr_into(&self, out: &mut Float, tmp: &mut Float) {
        out.assign(&self.re * &self.re);
        tmp.assign(&self.im * &self.im);
        *out += &*tmp;
    }

    /// self += t·c for a small integer t.
    pub fn add_assign_scaled_i64(&mut self, c: &Self, t: i64, tmp: &mut Float) {
        tmp.assign(&c.re);
        *tmp *= t;
        self.re += &*tmp;
        tmp.assign(&c.im);
        *tmp *= t;
        self.im += &*tmp;
    }

    /// self = exp(arg), allocation-free given three scratch floats.
    pub fn assign_exp(&mut self, arg: &Self, ws: &mut Workspace) {
        ws.t1.assign(&arg.re);
        ws.t1.exp_mut();
        ws.t2.assign(&arg.im);
        ws.t2.sin_cos_mut(&mut ws.t3); // sin into t2, cos into t3
        self.re.assign(&ws.t1 * &ws.t3);
        self.im.assign(&ws.t1 * &ws.t2);
    }
}

use rug::Assign;

/// Scratch floats for allocation-free complex arithmetic.
pub struct Workspace {
    pub t1: Float,
    pub t2: Float,
    pub t3: Float,
}

impl Workspace {
    pub fn new(prec: u32) -> Self {
        Workspace {
            t1: Float::new(prec),
            t2: Float::new(prec),
            t3: Float::new(prec),
        }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_sign_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// 2^c as a float at the given precision, for tolerances of the form 2^(c−p).
pub fn two_pow(c: i64, prec: u32) -> Float {
    Float::with_val(prec, 1u32) << c as i32
}

/// |x|^(−2s) · conj(x)^k computed as conj(x)^k · exp(−s·ln|x|²), taking the
/// real positive branch of the logarithm. `x` must be nonzero.
pub fn conj_pow_over_abs_pow(x: &Complex, k: i64, s: &Complex) -> Complex {
    let p = x.prec().max(s.prec());
    let n2 = x.norm_sqr();
    debug_assert!(n2.is_sign_positive() && !n2.is_zero());
    let ln_n2 = Float::with_val(p, n2.ln_ref());
    let exponent = Complex {
        re: -Float::with_val(p, &s.re * &ln_n2),
        im: -Float::with_val(p, &s.im * &ln_n2),
    };
    let factor = exponent.exp();
    x.conj().powi(k).mul(&factor)
}

/// n^(−s) for a positive rational n and complex s, via exp(−s·ln n).
pub fn rational_pow_neg_s(n: &Rational, s: &Complex, prec: u32) -> Complex {
    let nf = Float::with_val(prec, n);
    debug_assert!(nf.is_sign_positive() && !nf.is_zero());
    let ln = nf.ln();
    let exponent = Complex {
        re: -Float::with_val(prec, &s.re * &ln),
        im: -Float::with_val(prec, &s.im * &ln),
    };
    exponent.exp()
}

/// Deterministic blocked summation.
///
/// Terms are accumulated into fixed-size blocks in arrival order; block sums
/// are then combined by pairwise tree reduction. The result depends only on
/// the term sequence and precision, never on a worker count, so a parallel
/// reduction that merges whole blocks in index order reproduces the serial
/// sum bitwise.
pub struct BlockSum {
    prec: u32,
    block: usize,
    cur: Complex,
    count: usize,
    sums: Vec<Complex>,
}

pub const SUM_BLOCK: usize = 1024;

impl BlockSum {
    pub fn new(prec: u32) -> Self {
        BlockSum {
            prec,
            block: SUM_BLOCK,
            cur: Complex::zero(prec),
            count: 0,
            sums: Vec::new(),
        }
    }

    pub fn push(&mut self, term: &Complex) {
        self.cur.add_assign(term);
        self.count += 1;
        if self.count == self.block {
            self.sums
                .push(std::mem::replace(&mut self.cur, Complex::zero(self.prec)));
            self.count = 0;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty() && self.count == 0
    }

    pub fn finish(mut self) -> Complex {
        if self.count > 0 {
            self.sums.push(self.cur);
        } else if self.sums.is_empty() {
            return Complex::zero(self.prec);
        }
        let mut level = self.sums;
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            let mut it = level.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.add(&b)),
                    None => next.push(a),
                }
            }
            level = next;
        }
        level.pop().unwrap()
    }
}

/// Round-to-nearest float parse helper used by tests and the CLI.
pub fn float_from_str(s: &str, prec: u32) -> Option<Float> {
    Float::parse(s)
        .ok()
        .map(|v| Float::with_val_round(prec, v, Round::Nearest).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_div_roundtrip() {
        let a = Complex::from_f64(128, 3.5, -2.25);
        let b = Complex::from_f64(128, -1.125, 0.75);
        let q = a.mul(&b).div(&b);
        assert!(q.dist(&a) < two_pow(-100, 128));
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let a = Complex::from_f64(128, 0.5, 1.25);
        let mut acc = Complex::one(128);
        for _ in 0..7 {
            acc = acc.mul(&a);
        }
        assert!(a.powi(7).dist(&acc) < two_pow(-110, 128));
        let inv7 = a.powi(-7);
        assert!(inv7.mul(&acc).dist(&Complex::one(128)) < two_pow(-100, 128));
    }

    #[test]
    fn exp_of_zero_is_one() {
        let z = Complex::zero(96);
        assert!(z.exp().dist(&Complex::one(96)).is_zero());
    }

    #[test]
    fn conj_pow_formula_real_case() {
        // |2|^(−2·1.5) = 2^(−3) = 0.125, with k = 0.
        let x = Complex::from_f64(128, 2.0, 0.0);
        let s = Complex::from_f64(128, 1.5, 0.0);
        let v = conj_pow_over_abs_pow(&x, 0, &s);
        assert!(v.dist(&Complex::from_f64(128, 0.125, 0.0)) < two_pow(-100, 128));
    }

    #[test]
    fn block_sum_matches_naive_and_is_order_deterministic() {
        let terms: Vec<Complex> = (0..5000)
            .map(|i| Complex::from_f64(128, 1.0 / (i as f64 + 1.0), (i as f64).sin()))
            .collect();
        let mut bs = BlockSum::new(128);
        for t in &terms {
            bs.push(t);
        }
        let s1 = bs.finish();
        let mut bs2 = BlockSum::new(128);
        for t in &terms {
            bs2.push(t);
        }
        let s2 = bs2.finish();
        assert_eq!(s1.re, s2.re);
        assert_eq!(s1.im, s2.im);
        // agrees with naive fold well within tolerance
        let mut naive = Complex::zero(128);
        for t in &terms {
            naive.add_assign(t);
        }
        assert!(s1.dist(&naive) < two_pow(-90, 128));
    }
}
