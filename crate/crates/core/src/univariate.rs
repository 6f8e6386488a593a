//! Rank-one reference functions computed without the multivariate series:
//! Kummer's ₁F₁, the Whittaker M and W functions in the Morse normalization,
//! and the Macdonald function K by double-exponential quadrature.

use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::scalar::{cx, Cx};
use crate::summation::ComplexSum;

pub type C64 = Cx<f64>;

const ETA: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KummerParams {
    pub a: C64,
    pub b: C64,
    pub z: C64,
}

/// `₁F₁(a; b; z) = Σ (a)_k / (b)_k zᵏ / k!`.
pub fn kummer_1f1(p: KummerParams) -> Result<C64> {
    let KummerParams { a, b, z } = p;
    if cx::dist_to_nonpositive_integer(b) <= ETA {
        return Err(Error::ParameterPole(format!("1F1 lower parameter b = {b} is a non-positive integer")));
    }
    let mut sum = ComplexSum::new();
    let mut term = C64::new(1.0, 0.0);
    let mut small = 0;
    let mut k = 0.0f64;
    sum.add(term);
    while small < 3 {
        term = term * (a + k) / (b + k) * z / (k + 1.0);
        sum.add(term);
        k += 1.0;
        // the ratio test only settles once k exceeds |z|
        if k > z.norm() && term.norm() <= f64::EPSILON * sum.total().norm() {
            small += 1;
        } else {
            small = 0;
        }
        if k > 1e5 {
            break;
        }
    }
    Ok(sum.total())
}

/// `φ_ξ(x; g) = e^{ξx} e^{−e^{−x}/2} ₁F₁(½ + g − ξ; 1 − 2ξ; e^{−x})`.
pub fn whittaker_m_phi(xi: C64, x: C64, g: C64) -> Result<C64> {
    let two_xi = xi * 2.0;
    if two_xi.re > 0.5 && cx::dist_to_integer(two_xi) <= ETA {
        return Err(Error::ParameterPole(format!("2xi = {two_xi} is a positive integer")));
    }
    let z = (-x).exp();
    let f = kummer_1f1(KummerParams { a: 0.5 + g - xi, b: 1.0 - two_xi, z })?;
    Ok((xi * x - z * 0.5).exp() * f)
}

/// `ln(1/Γ(z))`, or `None` at a pole of Γ where the reciprocal vanishes.
fn ln_recip_gamma(z: C64) -> Option<C64> {
    if cx::dist_to_nonpositive_integer(z) <= ETA {
        None
    } else {
        Some(-ln_gamma(z))
    }
}

/// Γ(2ξ) / Γ(½ + g + ξ).
pub fn univariate_c(xi: C64, g: C64) -> Result<C64> {
    let two_xi = xi * 2.0;
    if cx::dist_to_nonpositive_integer(two_xi) <= ETA {
        return Err(Error::ParameterPole(format!("gamma pole at 2xi = {two_xi}")));
    }
    Ok(match ln_recip_gamma(0.5 + g + xi) {
        Some(r) => (ln_gamma(two_xi) + r).exp(),
        None => C64::new(0.0, 0.0),
    })
}

/// `Φ_ξ(x; g) = Γ(2ξ)/Γ(½+g+ξ) φ_ξ + Γ(−2ξ)/Γ(½+g−ξ) φ_{−ξ}`.
pub fn whittaker_w_phi(xi: C64, x: C64, g: C64) -> Result<C64> {
    if cx::dist_to_integer(xi * 2.0) <= ETA {
        return Err(Error::ParameterPole(format!("2xi = {} is an integer", xi * 2.0)));
    }
    let plus = univariate_c(xi, g)? * whittaker_m_phi(xi, x, g)?;
    let minus = univariate_c(-xi, g)? * whittaker_m_phi(-xi, x, g)?;
    Ok(plus + minus)
}

/// Tanh-sinh rule on `[0, t_max]` with step `h`.
fn tanh_sinh_level<F: Fn(f64) -> C64>(f: &F, t_max: f64, h: f64) -> C64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = ComplexSum::new();
    let mut k = 0i64;
    loop {
        let mut done = true;
        for u in if k == 0 { vec![0.0] } else { vec![k as f64 * h, -(k as f64) * h] } {
            let s = half_pi * u.sinh();
            let t = t_max / (1.0 + (-2.0 * s).exp());
            let weight = t_max * 0.5 * half_pi * u.cosh() / s.cosh().powi(2);
            if weight > 1e-300 && t > 0.0 && t < t_max {
                sum.add(f(t) * weight);
                done = false;
            }
        }
        if done || k as f64 * h > 6.0 {
            break;
        }
        k += 1;
    }
    sum.total() * h
}

/// `K_ν(z) = ∫₀^∞ e^{−z cosh t} cosh(νt) dt` for `Re z > 0`.
pub fn bessel_k_quad(nu: C64, z: C64) -> Result<C64> {
    if !(z.re > 0.0) {
        return Err(Error::InvalidInput(format!("Bessel K quadrature needs Re z > 0, got {z}")));
    }
    let f = |t: f64| (-z * t.cosh()).exp() * (nu * t).cosh();
    // log-magnitude envelope of the integrand
    let envelope = |t: f64| -z.re * t.cosh() + nu.re.abs() * t;
    let step = 0.05;
    let mut peak = envelope(0.0);
    let mut t = 0.0;
    loop {
        t += step;
        let e = envelope(t);
        peak = peak.max(e);
        if e < peak - 20.0 * std::f64::consts::LN_10 && t > 1.0 {
            break;
        }
        if t > 1e3 {
            return Err(Error::QuadratureNotConverged { difference: f64::INFINITY });
        }
    }
    let t_max = t;
    let mut h = 0.5;
    let mut prev = tanh_sinh_level(&f, t_max, h);
    let mut difference = f64::INFINITY;
    for level in 1..=10 {
        h *= 0.5;
        let next = tanh_sinh_level(&f, t_max, h);
        difference = (next - prev).norm();
        if level >= 3 && difference <= 1e-15 * next.norm() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { difference })
}

/// `K_ξ(½ e^{−x}) / √π`, the `g = 0` value of Φ.
pub fn bessel_phi(xi: C64, x: C64) -> Result<C64> {
    Ok(bessel_k_quad(xi, (-x).exp() * 0.5)? / std::f64::consts::PI.sqrt())
}

/// Relative residual of the rank-one dual difference equation
/// `V₊(Φ_{ξ+1} − Φ_ξ) + V₋(Φ_{ξ−1} − Φ_ξ) = e^x Φ_ξ`.
pub fn univariate_dde_residual(xi: C64, x: C64, g: C64) -> Result<f64> {
    let two_xi = xi * 2.0;
    for (label, d) in [("2xi", two_xi), ("2xi + 1", two_xi + 1.0), ("2xi - 1", two_xi - 1.0)] {
        if d.norm() <= ETA {
            return Err(Error::CoefficientPole { factor: label.into() });
        }
    }
    let v_plus = (0.5 + g + xi) / (two_xi * (two_xi + 1.0));
    let v_minus = (0.5 + g - xi) / (two_xi * (two_xi - 1.0));
    let centre = whittaker_w_phi(xi, x, g)?;
    let up = whittaker_w_phi(xi + 1.0, x, g)?;
    let down = whittaker_w_phi(xi - 1.0, x, g)?;
    let rhs = x.exp() * centre;
    Ok((v_plus * (up - centre) + v_minus * (down - centre) - rhs).norm() / rhs.norm())
}

/// The `g = 0` form `(Φ_{ξ+1} − Φ_{ξ−1}) / (4ξ) = e^x Φ_ξ` on the Bessel side.
pub fn bessel_recurrence_residual(xi: C64, x: C64) -> Result<f64> {
    let centre = bessel_phi(xi, x)?;
    let lhs = (bessel_phi(xi + 1.0, x)? - bessel_phi(xi - 1.0, x)?) / (xi * 4.0);
    let rhs = x.exp() * centre;
    Ok((lhs - rhs).norm() / rhs.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn kummer_special_cases() {
        let z = c(0.7, -0.4);
        let f = |a, b, z| kummer_1f1(KummerParams { a, b, z }).unwrap();
        assert_eq!(f(c(0.3, 0.1), c(1.2, 0.0), c(0.0, 0.0)), c(1.0, 0.0));
        assert!(rel(f(c(0.4, 0.3), c(0.4, 0.3), z), z.exp()) < 1e-15);
        assert!(rel(f(c(1.0, 0.0), c(2.0, 0.0), z), (z.exp() - 1.0) / z) < 1e-15);
        // terminating series
        assert!(rel(f(c(-3.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)), c(11.0 / 15.0, 0.0)) < 1e-15);
        let reference = c(0.703_753_167_360_744_2, -0.143_034_822_976_349_76);
        assert!(rel(f(c(0.3, 0.2), c(1.7, -0.4), c(-2.5, 1.0)), reference) < 1e-14);
    }

    #[test]
    fn kummer_rejects_lower_parameter_poles() {
        let p = KummerParams { a: c(0.5, 0.0), b: c(-2.0, 0.0), z: c(0.3, 0.0) };
        assert!(matches!(kummer_1f1(p), Err(Error::ParameterPole(_))));
    }

    #[test]
    fn bessel_half_order_closed_form() {
        for z in [c(0.3, 0.0), c(1.0, 0.5), c(0.02, 0.0)] {
            let k = bessel_k_quad(c(0.5, 0.0), z).unwrap();
            let exact = (std::f64::consts::PI / (z * 2.0)).sqrt() * (-z).exp();
            assert!(rel(k, exact) < 1e-14, "z={z}");
        }
    }

    #[test]
    fn bessel_is_even_in_the_order() {
        let z = c(0.4, 0.1);
        let nu = c(0.37, 0.8);
        assert!(rel(bessel_k_quad(nu, z).unwrap(), bessel_k_quad(-nu, z).unwrap()) < 1e-15);
    }

    /// `K_ν = π/2 (I_{−ν} − I_ν) / sin(νπ)` with the ascending series for I.
    fn bessel_k_series(nu: f64, z: f64) -> f64 {
        let i = |v: f64| {
            let mut term = (z / 2.0).powf(v) / crate::gamma::gamma(c(v + 1.0, 0.0)).re;
            let mut sum = term;
            for k in 1..60 {
                term *= (z / 2.0).powi(2) / (k as f64 * (k as f64 + v));
                sum += term;
            }
            sum
        };
        std::f64::consts::FRAC_PI_2 * (i(-nu) - i(nu)) / (nu * std::f64::consts::PI).sin()
    }

    #[test]
    fn bessel_against_series_and_reference() {
        let reference = 0.435_076_024_208_802_04;
        let series = bessel_k_series(0.3, 1.0);
        assert!((series - reference).abs() < 1e-14);
        let k = bessel_k_quad(c(0.3, 0.0), c(1.0, 0.0)).unwrap();
        assert!((k.re - reference).abs() < 1e-15 && k.im.abs() < 1e-15);
        let k = bessel_k_quad(c(0.0, 0.5), c(0.3, 0.0)).unwrap();
        assert!(rel(k, c(1.100_928_182_739_346_5, 0.0)) < 1e-14);
        let k = bessel_k_quad(c(0.3, 0.6), c(0.02, 0.0)).unwrap();
        let reference = c(0.108_131_582_364_957_39, 2.169_514_926_861_059_4);
        assert!(rel(k, reference) < 1e-13);
    }

    #[test]
    fn bessel_rejects_left_half_plane() {
        assert!(bessel_k_quad(c(0.3, 0.0), c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn m_function_plane_wave_limit() {
        let xi = c(0.0, 0.6);
        let x = c(25.0, 0.0);
        let v = whittaker_m_phi(xi, x, c(0.8, 0.0)).unwrap();
        assert!((v - (xi * x).exp()).norm() < 1e-9);
        assert!(whittaker_m_phi(c(1.0, 0.0), x, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn m_function_near_the_first_pole_is_finite() {
        for d in [1e-2, 1e-4, 1e-6] {
            let v = whittaker_m_phi(c(0.5 - d, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    #[test]
    fn w_function_symmetry_and_bessel_case() {
        let x = c(1.0, 0.0);
        for xi in [c(0.3, 0.0), c(0.0, 0.45), c(0.2, 0.7)] {
            let g = c(0.7, 0.0);
            assert!(rel(whittaker_w_phi(xi, x, g).unwrap(), whittaker_w_phi(-xi, x, g).unwrap()) < 1e-14);
            let w0 = whittaker_w_phi(xi, x, c(0.0, 0.0)).unwrap();
            assert!(rel(w0, bessel_phi(xi, x).unwrap()) < 1e-12, "xi={xi}");
        }
        assert!(whittaker_w_phi(c(0.5, 0.0), x, c(0.3, 0.0)).is_err());
    }

    #[test]
    fn difference_equation_residuals() {
        for &(xi, x, g) in
            &[(c(0.3, 0.0), 1.0, 0.0), (c(0.17, 0.4), 0.6, 0.7), (c(0.0, 0.85), 2.5, 1.5), (c(0.41, -0.2), 3.0, -0.4)]
        {
            let r = univariate_dde_residual(xi, c(x, 0.0), c(g, 0.0)).unwrap();
            assert!(r < 1e-10, "xi={xi} x={x} g={g}: {r:e}");
        }
        let r = bessel_recurrence_residual(c(0.3, 0.0), c(1.0, 0.0)).unwrap();
        assert!(r < 1e-10);
        assert!(matches!(
            univariate_dde_residual(c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Err(Error::CoefficientPole { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kummer_transformation(
            ar in -2.0f64..2.0, ai in -1.0f64..1.0,
            br in 0.2f64..3.0, bi in -1.0f64..1.0,
            zr in -3.0f64..3.0, zi in -3.0f64..3.0,
        ) {
            let (a, b, z) = (c(ar, ai), c(br, bi), c(zr, zi));
            let lhs = kummer_1f1(KummerParams { a, b, z }).unwrap();
            let rhs = z.exp() * kummer_1f1(KummerParams { a: b - a, b, z: -z }).unwrap();
            let scale = lhs.norm().max(1e-3);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(z.re.abs().exp()));
        }
    }
}
