//! Real scalar abstraction shared by the double and double-double backends.
//!
//! Everything that may need extended precision (series tables, c-functions,
//! difference operators) is written against [`Real`]. Complex values are
//! `num_complex::Complex<T>`; the transcendental functions live in [`cx`]
//! because `num_complex` only provides them for `num_traits::Float`.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::Num;

/// Complex scalar over a [`Real`] backend.
pub type Cx<T> = Complex<T>;

pub trait Real:
    Num
    + Copy
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Significand precision in bits (53 for `f64`, 106 for double-double).
    const BITS: u32;
    /// Real part below which log-gamma is shifted upwards before the
    /// asymptotic series is applied.
    const STIRLING_SHIFT: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn epsilon() -> Self;
    fn pi() -> Self;
    fn ln_2() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn round(self) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;

    fn from_i64(k: i64) -> Self {
        Self::from_f64(k as f64)
    }

    fn powi(self, k: i32) -> Self {
        let mut base = if k < 0 { Self::one() / self } else { self };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    fn sinh(self) -> Self {
        if self.abs().to_f64() < 0.125 {
            // odd Taylor series avoids the cancellation in (e^x - e^-x)/2
            let x2 = self * self;
            let mut term = self;
            let mut sum = self;
            let mut k = 1i64;
            loop {
                term = term * x2 / Self::from_i64((2 * k) * (2 * k + 1));
                sum += term;
                if term.abs() <= Self::epsilon() * sum.abs() || k > 40 {
                    break;
                }
                k += 1;
            }
            sum
        } else {
            let e = self.exp();
            (e - Self::one() / e) / Self::from_f64(2.0)
        }
    }

    fn cosh(self) -> Self {
        let e = self.exp();
        (e + Self::one() / e) / Self::from_f64(2.0)
    }

    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Real for f64 {
    const BITS: u32 = 53;
    const STIRLING_SHIFT: f64 = 15.0;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ln_2() -> Self {
        std::f64::consts::LN_2
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn atan2(self, other: Self) -> Self {
        f64::atan2(self, other)
    }
    fn round(self) -> Self {
        f64::round(self)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
}

/// Complex elementary functions over any [`Real`] backend.
pub mod cx {
    use super::{Cx, Real};

    pub fn real<T: Real>(x: f64) -> Cx<T> {
        Cx::new(T::from_f64(x), T::zero())
    }

    pub fn from_c64<T: Real>(z: Cx<f64>) -> Cx<T> {
        Cx::new(T::from_f64(z.re), T::from_f64(z.im))
    }

    pub fn to_c64<T: Real>(z: Cx<T>) -> Cx<f64> {
        Cx::new(z.re.to_f64(), z.im.to_f64())
    }

    pub fn abs<T: Real>(z: Cx<T>) -> T {
        let (a, b) = (z.re.abs(), z.im.abs());
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big == T::zero() {
            return T::zero();
        }
        let r = small / big;
        big * (T::one() + r * r).sqrt()
    }

    pub fn arg<T: Real>(z: Cx<T>) -> T {
        z.im.atan2(z.re)
    }

    pub fn exp<T: Real>(z: Cx<T>) -> Cx<T> {
        let m = z.re.exp();
        Cx::new(m * z.im.cos(), m * z.im.sin())
    }

    /// Principal logarithm.
    pub fn ln<T: Real>(z: Cx<T>) -> Cx<T> {
        Cx::new(abs(z).ln(), arg(z))
    }

    pub fn sin<T: Real>(z: Cx<T>) -> Cx<T> {
        Cx::new(z.re.sin() * z.im.cosh(), z.re.cos() * z.im.sinh())
    }

    pub fn sinh<T: Real>(z: Cx<T>) -> Cx<T> {
        Cx::new(z.re.sinh() * z.im.cos(), z.re.cosh() * z.im.sin())
    }

    pub fn sqrt<T: Real>(z: Cx<T>) -> Cx<T> {
        let r = abs(z);
        if r == T::zero() {
            return Cx::new(T::zero(), T::zero());
        }
        let half = T::from_f64(0.5);
        let re = ((r + z.re.abs()) * half).sqrt();
        if z.re >= T::zero() {
            Cx::new(re, z.im / (re + re))
        } else {
            let im = if z.im >= T::zero() { re } else { -re };
            Cx::new(z.im.abs() / (re + re), im)
        }
    }

    pub fn is_finite<T: Real>(z: Cx<T>) -> bool {
        z.re.is_finite() && z.im.is_finite()
    }

    /// Distance from `z` to the nearest integer.
    pub fn dist_to_integer<T: Real>(z: Cx<T>) -> f64 {
        let k = z.re.round();
        abs(Cx::new(z.re - k, z.im)).to_f64()
    }

    /// Distance from `z` to the nearest non-positive integer.
    pub fn dist_to_nonpositive_integer<T: Real>(z: Cx<T>) -> f64 {
        let k = z.re.round().min(T::zero());
        abs(Cx::new(z.re - k, z.im)).to_f64()
    }
}
