//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying roughly 106 bits of significand.
//!
//! Elementary functions are computed from the `f64` approximation and then
//! corrected (Newton steps for `ln`, `sqrt`, `atan2`) or evaluated by
//! argument reduction plus Taylor series (`exp`, `sin`, `cos`), so every
//! result is accurate to a few units in 2^-104.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

const PI: Dd = Dd::from_parts(std::f64::consts::PI, 1.224_646_799_147_353_2e-16);
const TWO_PI: Dd = Dd::from_parts(std::f64::consts::TAU, 2.449_293_598_294_706_4e-16);
const HALF_PI: Dd = Dd::from_parts(std::f64::consts::FRAC_PI_2, 6.123_233_995_736_766e-17);
const LN_2: Dd = Dd::from_parts(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
const EPS: f64 = 4.930_380_657_631_324e-32; // 2^-104

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Dd::renorm(p, e + self.lo * b)
    }

    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    fn sqr(self) -> Self {
        self * self
    }

    /// `exp(r) - 1` for |r| below 2^-9 (ten Taylor terms suffice).
    fn expm1_small(r: Dd) -> Dd {
        let mut term = r;
        let mut sum = r;
        for k in 2..=12 {
            term = term * r / Dd::from(k as f64);
            sum += term;
        }
        sum
    }

    fn sin_cos_reduced(t: Dd) -> (Dd, Dd) {
        // |t| <= pi/4 (+ rounding), Taylor series to 2^-104
        let t2 = t.sqr();
        let mut s_term = t;
        let mut s_sum = t;
        let mut c_term = Dd::one();
        let mut c_sum = Dd::one();
        for k in 1..=16 {
            let kk = (2 * k) as f64;
            c_term = -(c_term * t2) / Dd::from(kk * (kk - 1.0));
            s_term = -(s_term * t2) / Dd::from(kk * (kk + 1.0));
            c_sum += c_term;
            s_sum += s_term;
            if s_term.hi.abs() < EPS * 1e-3 && c_term.hi.abs() < EPS * 1e-3 {
                break;
            }
        }
        (s_sum, c_sum)
    }

    pub fn sin_cos(self) -> (Dd, Dd) {
        if !self.hi.is_finite() {
            return (Dd::from(f64::NAN), Dd::from(f64::NAN));
        }
        let z = (self / TWO_PI).round();
        let r = self - TWO_PI * z;
        let j = (r.hi / HALF_PI.hi).round();
        let t = r - HALF_PI.mul_f64(j);
        let (s, c) = Dd::sin_cos_reduced(t);
        match (j as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == 0.0 {
            write!(f, "{:e}", self.hi)
        } else {
            write!(f, "{:e}{:+e}", self.hi, self.lo)
        }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::from(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd::from_parts(h, l) + Dd::from(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = self / b;
        let t = if q >= Dd::zero() { q.floor() } else { -(-q).floor() };
        self - t * b
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl DivAssign for Dd {
    fn div_assign(&mut self, b: Dd) {
        *self = *self / b;
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::from(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::from(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Dd::from)
    }
}

impl Real for Dd {
    const BITS: u32 = 106;
    const STIRLING_SHIFT: f64 = 40.0;

    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn epsilon() -> Self {
        Dd::from(EPS)
    }
    fn pi() -> Self {
        PI
    }
    fn ln_2() -> Self {
        LN_2
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::zero() } else { Dd::from(f64::NAN) };
        }
        let y = Dd::from(self.hi.sqrt());
        y + (self - y.sqr()) / y.mul_f64(2.0)
    }
    fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::zero();
        }
        if self.hi.is_nan() {
            return self;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = (self - LN_2.mul_f64(k)).ldexp(-9);
        let mut s = Dd::expm1_small(r);
        for _ in 0..9 {
            s = s.mul_f64(2.0) + s.sqr();
        }
        (s + Dd::one()).ldexp(k as i32)
    }
    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        if !self.hi.is_finite() {
            return self;
        }
        let x = Dd::from(self.hi.ln());
        let x = x + self * (-x).exp() - Dd::one();
        x + self * (-x).exp() - Dd::one()
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn atan2(self, x: Self) -> Self {
        let y = self;
        if y.hi == 0.0 && x.hi == 0.0 {
            return Dd::zero();
        }
        let t0 = Dd::from(y.hi.atan2(x.hi));
        let (s, c) = t0.sin_cos();
        t0 + (y * c - x * s) / (x * c + y * s)
    }
    fn round(self) -> Self {
        let r = self.hi.round();
        if r == self.hi {
            Dd::renorm(r, self.lo.round())
        } else if (self.hi - r).abs() == 0.5 {
            // tie on hi; lo breaks it
            if self.lo == 0.0 || (self.lo > 0.0) == (r > self.hi) {
                Dd::from(r)
            } else {
                Dd::from(self.hi.floor() + if r > self.hi { 0.0 } else { 1.0 })
            }
        } else {
            Dd::from(r)
        }
    }
    fn floor(self) -> Self {
        let r = self.hi.floor();
        if r == self.hi {
            Dd::renorm(r, self.lo.floor())
        } else {
            Dd::from(r)
        }
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference digits below were produced with a 40-digit multiprecision
    // library and are split as hi + lo.
    fn close(a: Dd, hi: f64, lo: f64, rel: f64) -> bool {
        let d = a - Dd::from_parts(hi, lo);
        d.abs().to_f64() <= rel * hi.abs()
    }

    #[test]
    fn arithmetic_is_exact_beyond_f64() {
        let third = Dd::one() / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::one();
        assert!(back.abs().to_f64() < 1e-31);
        let big = Dd::from(1.0) + Dd::from(1e-20);
        assert_eq!((big - Dd::one()).to_f64(), 1e-20);
    }

    #[test]
    fn sqrt_two() {
        let s = Dd::from(2.0).sqrt();
        assert!(close(s, std::f64::consts::SQRT_2, -9.667293313452913e-17, 1e-31));
    }

    #[test]
    fn exp_and_ln_are_inverse() {
        for &x in &[-30.5, -1.25, -1e-5, 0.3, 1.0, 7.75, 50.3, 300.0] {
            let v = Dd::from(x) / Dd::from(3.0);
            let back = v.exp().ln();
            assert!((back - v).abs().to_f64() <= 4e-31 * v.abs().to_f64().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn exp_one_and_pi_trig() {
        assert!(close(Dd::one().exp(), std::f64::consts::E, 1.4456468917292502e-16, 1e-31));
        let (s, c) = PI.sin_cos();
        assert!(s.abs().to_f64() < 1e-31);
        assert!((c + Dd::one()).abs().to_f64() < 1e-31);
        // sin(3) = 0.14112000805986722210074480280811
        assert!(close(Dd::from(3.0).sin(), 0.1411200080598672, 8.577269787017502e-18, 1e-29));
    }

    #[test]
    fn pythagoras_and_atan2() {
        for &x in &[-40.1, -2.0, 0.1, 1.3, 5.5, 123.4] {
            let v = Dd::from(x) / Dd::from(7.0);
            let (s, c) = v.sin_cos();
            assert!((s * s + c * c - Dd::one()).abs().to_f64() < 1e-30);
            let a = s.atan2(c);
            let expected = v - TWO_PI * (v / TWO_PI).round();
            assert!((a - expected).abs().to_f64() < 1e-30, "x = {x}");
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(Dd::from_parts(3.0, -1e-20).round(), Dd::from(3.0));
        assert_eq!(Dd::from_parts(2.5, 1e-20).round().to_f64(), 3.0);
        assert_eq!(Dd::from_parts(2.5, -1e-20).round().to_f64(), 2.0);
        assert_eq!(Dd::from_parts(3.0, -1e-20).floor().to_f64(), 2.0);
        assert_eq!(Dd::from(-1.5).floor().to_f64(), -2.0);
    }
}
