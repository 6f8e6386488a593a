//! Complex log-gamma for any [`Real`] backend.
//!
//! Stirling's series with ten Bernoulli terms, applied after shifting the
//! argument to `Re z >= T::STIRLING_SHIFT`; the left half-plane goes through
//! the reflection formula. The returned value is *a* logarithm of Γ(z): its
//! imaginary part may differ from the principal branch by a multiple of 2π,
//! which is irrelevant once the value is exponentiated.

use crate::scalar::{cx, Cx, Real};

/// B_{2k} / (2k (2k-1)) as exact numerator/denominator pairs, k = 1..=10.
const STIRLING_COEFFS: [(f64, f64); 10] = [
    (1.0, 12.0),
    (-1.0, 360.0),
    (1.0, 1260.0),
    (-1.0, 1680.0),
    (1.0, 1188.0),
    (-691.0, 360_360.0),
    (1.0, 156.0),
    (-3617.0, 122_400.0),
    (43867.0, 244_188.0),
    (-174_611.0, 125_400.0),
];

pub fn ln_gamma<T: Real>(z: Cx<T>) -> Cx<T> {
    if z.re < T::from_f64(0.5) {
        let one = Cx::new(T::one(), T::zero());
        let ln_pi = Cx::new(T::pi().ln(), T::zero());
        return ln_pi - ln_sin_pi(z) - ln_gamma(one - z);
    }
    let shift = T::from_f64(T::STIRLING_SHIFT);
    let mut w = z;
    let mut correction = Cx::new(T::zero(), T::zero());
    let mut chunk = Cx::new(T::one(), T::zero());
    let mut in_chunk = 0;
    while w.re < shift {
        chunk = chunk * w;
        in_chunk += 1;
        if in_chunk == 8 {
            correction = correction + cx::ln(chunk);
            chunk = Cx::new(T::one(), T::zero());
            in_chunk = 0;
        }
        w = w + T::one();
    }
    if in_chunk > 0 {
        correction = correction + cx::ln(chunk);
    }
    stirling(w) - correction
}

fn stirling<T: Real>(z: Cx<T>) -> Cx<T> {
    let half = T::from_f64(0.5);
    let half_ln_2pi = (T::pi() * T::from_f64(2.0)).ln() * half;
    let inv = Cx::new(T::one(), T::zero()) / z;
    let inv2 = inv * inv;
    let mut series = Cx::new(T::zero(), T::zero());
    let mut power = inv;
    for &(num, den) in STIRLING_COEFFS.iter() {
        series = series + power * (T::from_f64(num) / T::from_f64(den));
        power = power * inv2;
    }
    (z - half) * cx::ln(z) - z + half_ln_2pi + series
}

/// A logarithm of sin(πz), stable for large |Im z|.
fn ln_sin_pi<T: Real>(z: Cx<T>) -> Cx<T> {
    let two = T::from_f64(2.0);
    let k = (z.re / two).round() * two;
    let w = Cx::new(z.re - k, z.im);
    let pi = T::pi();
    if w.im.abs() < T::from_f64(15.0) {
        return cx::ln(cx::sin(w * pi));
    }
    let i = Cx::new(T::zero(), T::one());
    let one = Cx::new(T::one(), T::zero());
    let ln2 = T::ln_2();
    let half_pi = pi / two;
    if w.im > T::zero() {
        let e = cx::exp(i * w * (pi * two));
        -(i * w * pi) + cx::ln(one - e) + Cx::new(-ln2, half_pi)
    } else {
        let e = cx::exp(-(i * w * (pi * two)));
        i * w * pi + cx::ln(one - e) + Cx::new(-ln2, -half_pi)
    }
}

pub fn gamma<T: Real>(z: Cx<T>) -> Cx<T> {
    cx::exp(ln_gamma(z))
}
