//! The c → ∞ confluence checks.

use super::cfunc::cs_whittaker_normalized;
use super::series::{coupling_schedule, cs_phi_translated};
use crate::connection::whittaker_eval;
use crate::domain::{cone_enumerate, PositionPoint, RootData, SpectralPoint};
use crate::error::Result;
use crate::hc_series::{denominator, phi_eval, TruncationPlan};
use crate::scalar::{cx, Cx, Real};

/// One row of [`confluence_error`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfluencePoint {
    pub c: f64,
    /// `|e^{−c<ξ,ρ>} φ^cs_ξ(x + cρ; k^{(c)}) − φ_ξ(x; g)|`.
    pub err_phi: f64,
    /// `|γ(k^{(c)}) Φ^cs_ξ(x + cρ; k^{(c)}) − Φ_ξ(x; g)|`.
    pub err_big_phi: f64,
    /// Truncation estimates of both sides, summed.
    pub truncation: f64,
    /// The truncation estimate is not small against either gap.
    pub truncation_dominated: bool,
}

/// Distance of both CS-side quantities from their Toda limits along `c_grid`,
/// with every series truncated at the plan's level.
pub fn confluence_error<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    c_grid: &[f64],
    plan: &TruncationPlan,
) -> Result<Vec<ConfluencePoint>> {
    x.check_chamber()?;
    let phi = phi_eval(xi, x, g, plan)?;
    let big_phi = whittaker_eval(xi, x, g, plan)?;
    c_grid
        .iter()
        .map(|&c| {
            let ct = T::from_f64(c);
            let cs_phi = cs_phi_translated(xi, x, g, ct, plan)?;
            let cs_big = cs_whittaker_normalized(xi, x, g, ct, plan)?;
            let err_phi = cx::abs(cs_phi.value - phi.value).to_f64();
            let err_big_phi = cx::abs(cs_big.value - big_phi.value).to_f64();
            let truncation = cs_phi.tail_estimate + phi.tail_bound + cs_big.tail_bound + big_phi.tail_bound;
            Ok(ConfluencePoint {
                c,
                err_phi,
                err_big_phi,
                truncation,
                truncation_dominated: truncation > 0.1 * err_phi.min(err_big_phi),
            })
        })
        .collect()
}

/// A scaled CS weight next to its Toda limit.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightLimit {
    pub root: Vec<i32>,
    pub mult: u32,
    /// `e^{−c l <α,ρ>} a^cs_α(k^{(c)})`.
    pub scaled: Cx<f64>,
    /// `a_α` when α lies in the Toda set and `l = 1`, else 0.
    pub limit: Cx<f64>,
}

/// All `(α, l)` with `l<α,ρ> ≤ max_level`.
pub fn weight_limits(n: usize, g: Cx<f64>, c: f64, max_level: u32) -> Vec<WeightLimit> {
    let roots = RootData::new(n);
    let k = coupling_schedule(c, g);
    let toda = roots.toda_weights(g);
    let mut out = Vec::new();
    for alpha in &roots.positive {
        let limit =
            roots.toda.iter().position(|t| t.vector == alpha.vector).map(|i| toda[i]).unwrap_or(Cx::new(0.0, 0.0));
        let w = k.weight(alpha.norm2);
        let mut l = 1;
        while l * alpha.height <= max_level {
            let scaled = w * (-(c * (l * alpha.height) as f64)).exp();
            out.push(WeightLimit {
                root: alpha.vector.clone(),
                mult: l,
                scaled,
                limit: if l == 1 { limit } else { Cx::new(0.0, 0.0) },
            });
            l += 1;
        }
    }
    out
}

/// `Δ_U(ξ) = Π <μ − 2ξ, μ>` over `μ > 0` whose hyperplane
/// `<μ − 2ζ, μ> = 0` meets the closed ball of radius `radius` about `center`.
/// Only `μ` with `|μ| ≤ 2(|center| + radius)` can qualify, which caps the
/// level at `2(|center| + radius)|ρ|`.
pub fn normalization_delta<T: Real>(center: &SpectralPoint, radius: f64, xi: &SpectralPoint<T>) -> Cx<T> {
    let n = center.dim();
    let centre_norm = center.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rho_norm = ((1..=n).map(|k| (k * k) as f64).sum::<f64>()).sqrt();
    let cap = (2.0 * (centre_norm + radius) * rho_norm).ceil() as u32;
    let mut product = Cx::new(T::one(), T::zero());
    for level in cone_enumerate(n, cap).iter().skip(1) {
        for mu in level {
            let norm2 = mu.norm2() as f64;
            let pairing: Cx<f64> = center.entries().iter().zip(mu.entries()).map(|(z, &m)| z * m as f64).sum();
            let distance = (pairing - norm2 / 2.0).norm() / norm2.sqrt();
            if distance <= radius {
                product = product * denominator(xi.entries(), mu);
            }
        }
    }
    product
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hc_series::phi_eval;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn point(v: &[(f64, f64)]) -> SpectralPoint {
        SpectralPoint::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn rank_one_confluence_tightens() {
        let xi = point(&[(0.0, 0.3)]);
        let x = PositionPoint::in_chamber(&[1.0]).unwrap();
        let rows = confluence_error(&xi, &x, c(1.0, 0.0), &[4.0, 6.0, 8.0], &TruncationPlan::new(30)).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].err_phi < w[0].err_phi && w[1].err_big_phi < w[0].err_big_phi, "{rows:?}");
        }
        assert!(rows.iter().all(|r| !r.truncation_dominated), "{rows:?}");
    }

    #[test]
    fn weights_tend_to_the_toda_set() {
        let g = c(0.7, 0.0);
        for n in 1..=3 {
            let rows = weight_limits(n, g, 10.0, 6);
            assert!(rows.iter().any(|r| r.limit != c(0.0, 0.0)));
            for r in &rows {
                assert!((r.scaled - r.limit).norm() < 2e-3, "{r:?}");
            }
        }
        let coarse = weight_limits(2, g, 5.0, 6);
        let fine = weight_limits(2, g, 10.0, 6);
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((b.scaled - b.limit).norm() <= (a.scaled - a.limit).norm());
        }
    }

    #[test]
    fn delta_products() {
        let deep = point(&[(0.23, 0.31), (0.11, 0.77)]);
        assert_eq!(normalization_delta(&deep, 1e-3, &deep), c(1.0, 0.0));
        // a ball about a point with 2ξ_1 = 1 picks up μ = e_1
        let on = point(&[(0.5, 0.0), (0.2, 0.3)]);
        let probe = point(&[(0.47, 0.02), (0.21, 0.28)]);
        let d = normalization_delta(&on, 0.1, &probe);
        let e1 = c(1.0, 0.0) - probe.entries()[0] * 2.0;
        let one = point(&[(0.5, 0.0)]);
        let d1 = normalization_delta(&one, 0.1, &point(&[(0.47, 0.02)]));
        assert!((d1 - e1).norm() < 1e-15, "{d1} vs {e1}");
        assert!((d / e1).norm() > 0.0);
        assert!(normalization_delta(&on, 0.1, &on).norm() < 1e-15);
    }

    #[test]
    fn normalized_series_crosses_its_hyperplane() {
        let centre = point(&[(0.5, 0.0)]);
        let x = PositionPoint::real(&[1.2]).unwrap();
        let plan = TruncationPlan::new(30);
        let value = |d: f64| {
            let xi = point(&[(0.5 + d, 0.0)]);
            normalization_delta(&centre, 0.1, &xi) * phi_eval(&xi, &x, c(0.6, 0.0), &plan).unwrap().value
        };
        let (a, b, far) = (value(-1e-4), value(1e-4), value(5e-2));
        assert!(a.norm() < 10.0 * far.norm() && b.norm() < 10.0 * far.norm());
        assert!((a - b).norm() < 1e-2 * far.norm());
        // without the normalization the series blows up
        let raw = phi_eval(&point(&[(0.5 + 1e-4, 0.0)]), &x, c(0.6, 0.0), &plan).unwrap().value;
        let phi_far = far.norm() / (2.0 * 5e-2);
        assert!(raw.norm() > 100.0 * phi_far);
    }

    #[test]
    fn rank_two_confluence_tightens() {
        let xi = point(&[(0.12, 0.35), (-0.2, 0.8)]);
        let x = PositionPoint::in_chamber(&[1.6, 0.7]).unwrap();
        let rows = confluence_error(&xi, &x, c(0.5, 0.0), &[4.0, 6.0, 8.0], &TruncationPlan::new(25)).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].err_phi < w[0].err_phi && w[1].err_big_phi < w[0].err_big_phi, "{rows:?}");
        }
    }
}
