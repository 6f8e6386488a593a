//! Harish-Chandra series of the Toda Laplacian with Morse boundary terms,
//!
//! ```text
//! L = Σ ∂²_j − Σ_{α∈S} a_α e^{−<α,x>},   φ_ξ(x) = Σ_{ν≥0} a_ν(ξ) e^{<ξ−ν, x>},
//! <ν − 2ξ, ν> a_ν = Σ_{α∈S} a_α a_{ν−α},   a_0 = 1.
//! ```
//!
//! Coefficients are built level by level over the dominance cone. The
//! truncation tail is bounded by `|e^{<ξ,x>}| Σ_{m>M} C(n+m−1, m) Cᵐ/m!`
//! with constants estimated from the actual (ξ, x, g).

use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::{Cone, ConeVector, PositionPoint, SpectralPoint, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::scalar::{cx, Cx, Real};
use crate::summation::ComplexSum;

/// Extra levels scanned beyond the truncation level when estimating the
/// lower bound on `|<ν − 2ξ, ν>| / <ν, ρ>²`.
pub const SPECTRAL_SCAN_MARGIN: u32 = 20;

/// Truncation level and tolerances for series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPlan {
    pub max_level: u32,
    /// Largest acceptable tail bound. Infinite means the bound is only
    /// reported.
    pub tol: f64,
    /// Exclusion radius around singular hyperplanes.
    pub eta: f64,
    /// Relative accuracy that cancellation in orbit sums may consume
    /// before a result is flagged.
    pub target: f64,
}

impl TruncationPlan {
    pub fn new(max_level: u32) -> Self {
        TruncationPlan { max_level, tol: f64::INFINITY, eta: DEFAULT_ETA, target: 1e-10 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = target;
        self
    }
}

impl Default for TruncationPlan {
    fn default() -> Self {
        Self::new(30)
    }
}

/// Constants of the coefficient growth estimate `|a_ν e^{−<ν,x>}| ≤ C^m / m!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailConstants {
    /// Lower bound of `|<ν − 2ξ, ν>| / <ν, ρ>²` over the scanned levels.
    pub a: f64,
    /// `max_α |e^{−<α,x>}|^{1/<α,ρ>}`.
    pub b: f64,
    /// `max_α |a_α|`.
    pub c: f64,
    /// `A = 1 + c n / a`.
    pub growth: f64,
    /// `C = b A`.
    pub rate: f64,
}

impl TailConstants {
    pub fn estimate(xi: &[Cx<f64>], x: &[Cx<f64>], g: Cx<f64>, plan: &TruncationPlan) -> Self {
        let n = xi.len();
        let a = spectral_gap_bound(xi, plan.max_level + SPECTRAL_SCAN_MARGIN, plan.eta);
        let b = position_base(x);
        // rank one has no difference roots, so the weight 2 is absent
        let c = if n > 1 { g.norm().max(2.0) } else { g.norm().max(0.25) };
        let growth = 1.0 + c * n as f64 / a;
        TailConstants { a, b, c, growth, rate: b * growth }
    }

    /// `Σ_{m > M} C(n+m−1, m) Cᵐ / m!`.
    pub fn tail_sum(&self, n: usize, max_level: u32) -> f64 {
        binomial_exponential_tail(n, max_level, self.rate)
    }
}

/// `min |<ν − 2ξ, ν>| / <ν, ρ>²` over `0 < <ν,ρ> ≤ levels`, clipped below by `eta`.
pub fn spectral_gap_bound(xi: &[Cx<f64>], levels: u32, eta: f64) -> f64 {
    let n = xi.len();
    let cone = Cone::shared(n, levels);
    let mut best = f64::INFINITY;
    for v in &cone.vectors()[1..cone.count_through(levels)] {
        let d = denominator(xi, v).norm();
        let l = v.level() as f64;
        best = best.min(d / (l * l));
    }
    best.max(eta)
}

fn position_base(x: &[Cx<f64>]) -> f64 {
    let n = x.len();
    let mut b: f64 = 0.0;
    for k in 0..n.saturating_sub(1) {
        b = b.max((-(x[k] - x[k + 1]).re).exp());
    }
    // e_n and 2e_n have heights 1 and 2; both give the same base
    b.max((-x[n - 1].re).exp())
}

/// Sum of `C(n+m−1, m) rᵐ / m!` over `m > max_level`, in log space.
pub fn binomial_exponential_tail(n: usize, max_level: u32, rate: f64) -> f64 {
    if rate == 0.0 {
        return 0.0;
    }
    if !rate.is_finite() {
        return f64::INFINITY;
    }
    let ln_r = rate.ln();
    let lgamma = |v: f64| ln_gamma(Cx::new(v, 0.0)).re;
    let mut total = 0.0f64;
    let mut m = max_level as f64 + 1.0;
    loop {
        let ln_binom = lgamma(n as f64 + m) - lgamma(m + 1.0) - lgamma(n as f64);
        let ln_term = ln_binom + m * ln_r - lgamma(m + 1.0);
        let term = ln_term.exp();
        total += term;
        if !total.is_finite() {
            return f64::INFINITY;
        }
        if m > rate + n as f64 && (term <= 1e-18 * total || term == 0.0) {
            break;
        }
        m += 1.0;
    }
    total
}

pub(crate) fn denominator<T: Real>(xi: &[Cx<T>], nu: &ConeVector) -> Cx<T> {
    let mut d = Cx::new(T::from_i64(nu.norm2()), T::zero());
    let two = T::from_f64(2.0);
    for (z, &v) in xi.iter().zip(nu.entries()) {
        if v != 0 {
            d = d - *z * (two * T::from_i64(v as i64));
        }
    }
    d
}

/// Coefficients `a_ν(ξ; g)` for all ν with level at most `max_level`.
#[derive(Clone, Debug)]
pub struct HcTable<T: Real = f64> {
    cone: Arc<Cone>,
    xi: SpectralPoint<T>,
    g: Cx<T>,
    weights: Vec<Cx<T>>,
    max_level: u32,
    coeffs: Vec<Cx<T>>,
    denominators: Vec<Cx<T>>,
}

impl<T: Real> HcTable<T> {
    /// Runs the recurrence. Fails with `NearSingularSpectral` at the first
    /// level where some `|<μ − 2ξ, μ>| ≤ eta`.
    pub fn build(xi: &SpectralPoint<T>, g: Cx<T>, max_level: u32, eta: f64) -> Result<Self> {
        let n = xi.dim();
        let cone = Cone::shared(n, max_level);
        let weights = cone.roots().toda_weights(g);
        let total = cone.count_through(max_level);
        let mut coeffs = Vec::with_capacity(total);
        let mut denominators = Vec::with_capacity(total);
        coeffs.push(Cx::new(T::one(), T::zero()));
        denominators.push(Cx::new(T::zero(), T::zero()));
        for m in 1..=max_level {
            let range = cone.level_range(m);
            let compute = |i: usize| -> Result<(Cx<T>, Cx<T>)> {
                let nu = &cone.vectors()[i];
                let d = denominator(xi.entries(), nu);
                let margin = cx::abs(d).to_f64();
                if margin <= eta {
                    return Err(Error::NearSingularSpectral { mu: nu.entries().to_vec(), margin });
                }
                let mut rhs = Cx::new(T::zero(), T::zero());
                for link in cone.toda_links(i) {
                    rhs = rhs + weights[link.root] * coeffs[link.pred];
                }
                Ok((rhs / d, d))
            };
            let level: Vec<(Cx<T>, Cx<T>)> = if range.len() >= 256 {
                range.into_par_iter().map(compute).collect::<Result<_>>()?
            } else {
                range.map(compute).collect::<Result<_>>()?
            };
            for (a, d) in level {
                coeffs.push(a);
                denominators.push(d);
            }
        }
        Ok(HcTable { cone, xi: xi.clone(), g, weights, max_level, coeffs, denominators })
    }

    pub fn dim(&self) -> usize {
        self.xi.dim()
    }

    pub fn xi(&self) -> &SpectralPoint<T> {
        &self.xi
    }

    pub fn coupling(&self) -> Cx<T> {
        self.g
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    /// Coefficients in cone order.
    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// `<ν − 2ξ, ν>` in cone order (zero at ν = 0).
    pub fn denominators(&self) -> &[Cx<T>] {
        &self.denominators
    }

    /// `|<ν−2ξ,ν> a_ν − Σ_α a_α a_{ν−α}|` for the coefficient at `index`.
    pub fn recurrence_defect(&self, index: usize) -> f64 {
        let mut rhs = Cx::new(T::zero(), T::zero());
        for link in self.cone.toda_links(index) {
            rhs = rhs + self.weights[link.root] * self.coeffs[link.pred];
        }
        cx::abs(self.denominators[index] * self.coeffs[index] - rhs).to_f64()
    }

    /// `max |a_ν|` over level `m`.
    pub fn level_max(&self, m: u32) -> f64 {
        self.cone.level_range(m).map(|i| cx::abs(self.coeffs[i]).to_f64()).fold(0.0, f64::max)
    }

    /// Precomputed `u_k^p`, `u_k = e^{−(x_k − x_{k+1})}`, for `p ≤ max_level`.
    fn gap_powers(&self, x: &PositionPoint<T>) -> Vec<Vec<Cx<T>>> {
        gap_powers(x, self.max_level)
    }

    /// `e^{−<ν,x>}` for the vector at `index`.
    fn damping(&self, powers: &[Vec<Cx<T>>], index: usize) -> Cx<T> {
        monomial(powers, &self.cone.vectors()[index])
    }

    /// `Σ a_ν e^{−<ν,x>}`, accumulated in canonical order.
    pub fn reduced_sum(&self, x: &PositionPoint<T>) -> ComplexSum<T> {
        let powers = self.gap_powers(x);
        let mut sum = ComplexSum::new();
        for i in 0..self.coeffs.len() {
            sum.add(self.coeffs[i] * self.damping(&powers, i));
        }
        sum
    }

    /// Reduced forms `(e^{−<ξ,x>}(L − <ξ,ξ>)φ_M, e^{−<ξ,x>}φ_M)` of the truncated series.
    pub fn laplacian_defect(&self, x: &PositionPoint<T>) -> (Cx<T>, Cx<T>) {
        let powers = self.gap_powers(x);
        let xi = self.xi.entries();
        let xi2 = self.xi.dot(xi);
        let mut second = ComplexSum::new();
        let mut plain = ComplexSum::new();
        for (i, nu) in self.cone.vectors()[..self.coeffs.len()].iter().enumerate() {
            let term = self.coeffs[i] * self.damping(&powers, i);
            let mut q = Cx::new(T::zero(), T::zero());
            for (z, &v) in xi.iter().zip(nu.entries()) {
                let w = *z - T::from_i64(v as i64);
                q = q + w * w;
            }
            second.add(term * q);
            plain.add(term);
        }
        let phi = plain.total();
        let potential = toda_potential(x, self.g, &self.cone);
        (second.total() - potential * phi - xi2 * phi, phi)
    }
}

pub(crate) fn gap_powers<T: Real>(x: &PositionPoint<T>, max_level: u32) -> Vec<Vec<Cx<T>>> {
    x.gaps()
        .into_iter()
        .map(|gap| {
            let u = cx::exp(-gap);
            let mut row = Vec::with_capacity(max_level as usize + 1);
            let mut p = Cx::new(T::one(), T::zero());
            for _ in 0..=max_level {
                row.push(p);
                p = p * u;
            }
            row
        })
        .collect()
}

pub(crate) fn monomial<T: Real>(powers: &[Vec<Cx<T>>], nu: &ConeVector) -> Cx<T> {
    let mut e = Cx::new(T::one(), T::zero());
    for (row, &s) in powers.iter().zip(nu.partial_sums()) {
        if s > 0 {
            e = e * row[s as usize];
        }
    }
    e
}

/// `Σ_{α∈S} a_α e^{−<α,x>}`.
pub fn toda_potential<T: Real>(x: &PositionPoint<T>, g: Cx<T>, cone: &Cone) -> Cx<T> {
    let roots = cone.roots();
    let weights = roots.toda_weights(g);
    let mut v = Cx::new(T::zero(), T::zero());
    for (alpha, w) in roots.toda.iter().zip(&weights) {
        let mut e = Cx::new(T::zero(), T::zero());
        for (z, &a) in x.entries().iter().zip(&alpha.vector) {
            if a != 0 {
                e = e + *z * T::from_i64(a as i64);
            }
        }
        v = v + *w * cx::exp(-e);
    }
    v
}

/// `a_ν(ξ; g)` looked up in a built table.
pub fn hc_coefficient<T: Real>(table: &HcTable<T>, nu: &ConeVector) -> Result<Cx<T>> {
    if nu.entries().len() != table.dim() {
        return Err(Error::InvalidInput("cone vector has the wrong dimension".into()));
    }
    if nu.level() > table.max_level {
        return Err(Error::InvalidInput(format!(
            "level {} exceeds the table's maximal level {}",
            nu.level(),
            table.max_level
        )));
    }
    let i = table.cone.position(nu.entries()).expect("dominant vector within range");
    Ok(table.coeffs[i])
}

/// Value of a truncated series together with its a-priori tail bound.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue<T: Real = f64> {
    pub value: Cx<T>,
    pub tail_bound: f64,
    pub constants: TailConstants,
}

fn check_dims<T: Real>(xi: &SpectralPoint<T>, x: &PositionPoint<T>) -> Result<()> {
    if xi.dim() != x.dim() {
        return Err(Error::InvalidInput(format!(
            "spectral dimension {} differs from position dimension {}",
            xi.dim(),
            x.dim()
        )));
    }
    Ok(())
}

/// Tail bound `|e^{<ξ,x>}| Σ_{m>M} ...` for the series at (ξ, x, g).
pub fn tail_bound<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> (f64, TailConstants) {
    let constants = TailConstants::estimate(&xi.to_c64(), &x.to_c64(), cx::to_c64(g), plan);
    let lead = cx::to_c64(xi.dot(x.entries())).re.exp();
    (lead * constants.tail_sum(xi.dim(), plan.max_level), constants)
}

/// Fundamental Whittaker function `φ_ξ(x; g)` truncated at `plan.max_level`.
pub fn phi_eval<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> Result<SeriesValue<T>> {
    check_dims(xi, x)?;
    let table = HcTable::build(xi, g, plan.max_level, plan.eta)?;
    let (bound, constants) = tail_bound(xi, x, g, plan);
    if bound > plan.tol {
        return Err(Error::TailNotConverged { bound, tol: plan.tol, level: plan.max_level as usize });
    }
    let reduced = table.reduced_sum(x).total();
    let value = cx::exp(xi.dot(x.entries())) * reduced;
    Ok(SeriesValue { value, tail_bound: bound, constants })
}

/// `|L φ − <ξ,ξ> φ| / max(|φ|, 1e-30)` for the truncated series.
pub fn toda_laplacian_residual<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> Result<f64> {
    check_dims(xi, x)?;
    let table = HcTable::build(xi, g, plan.max_level, plan.eta)?;
    let (defect, phi) = table.laplacian_defect(x);
    Ok(cx::abs(defect).to_f64() / cx::abs(phi).to_f64().max(1e-30))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn point(v: &[(f64, f64)]) -> SpectralPoint {
        SpectralPoint::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn first_coefficients_by_hand() {
        let xi = point(&[(0.31, 0.2), (0.17, -0.4)]);
        let g = c(0.8, 0.1);
        let table = HcTable::build(&xi, g, 4, DEFAULT_ETA).unwrap();
        let xi2 = xi.entries()[1];
        let zero = ConeVector::new(vec![0, 0]).unwrap();
        assert_eq!(hc_coefficient(&table, &zero).unwrap(), c(1.0, 0.0));
        let e2 = ConeVector::new(vec![0, 1]).unwrap();
        let expected = g / (1.0 - 2.0 * xi2);
        assert!((hc_coefficient(&table, &e2).unwrap() - expected).norm() < 1e-15);
        let two_e2 = ConeVector::new(vec![0, 2]).unwrap();
        let expected = (g * g / (1.0 - 2.0 * xi2) + 0.25) / (4.0 - 4.0 * xi2);
        assert!((hc_coefficient(&table, &two_e2).unwrap() - expected).norm() < 1e-15);
        let deep = ConeVector::new(vec![3, 0]).unwrap();
        assert!(hc_coefficient(&table, &deep).is_err());
    }

    #[test]
    fn recurrence_resubstitution() {
        let xi = point(&[(0.2, 0.7), (-0.1, 0.3), (0.05, -0.9)]);
        let table = HcTable::build(&xi, c(1.2, 0.0), 18, DEFAULT_ETA).unwrap();
        for i in 1..table.coefficients().len() {
            let a = cx::abs(table.coefficients()[i]);
            let d = cx::abs(table.denominators()[i]);
            assert!(table.recurrence_defect(i) <= 1e-12 * (1.0 + a * d));
        }
    }

    #[test]
    fn near_singular_spectral_point_is_refused() {
        // <e_1 − 2ξ, e_1> = 1 − 2ξ_1 = 0
        let xi = point(&[(0.5, 0.0), (0.1, 0.2)]);
        match HcTable::build(&xi, c(0.3, 0.0), 5, DEFAULT_ETA) {
            Err(Error::NearSingularSpectral { mu, .. }) => assert_eq!(mu, vec![1, 0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn plane_wave_limit_in_one_variable() {
        let xi = point(&[(0.0, 0.7)]);
        let x = PositionPoint::real(&[20.0]).unwrap();
        let r = phi_eval(&xi, &x, c(0.0, 0.0), &TruncationPlan::new(12)).unwrap();
        let lead = (xi.entries()[0] * 20.0).exp();
        assert!((r.value - lead).norm() <= r.tail_bound.max(1e-15) + 1e-9);
        assert!((r.value - lead).norm() < 1e-6);
        assert!(r.tail_bound < 1e-6);
    }

    #[test]
    fn growth_constants_satisfy_induction_inequality() {
        let xi = [c(0.3, 0.4), c(-0.2, 1.1)];
        let x = [c(2.0, 0.0), c(0.8, 0.0)];
        let k = TailConstants::estimate(&xi, &x, c(0.6, 0.0), &TruncationPlan::new(25));
        let n = 2.0;
        assert!(k.growth * k.growth > k.c / k.a * (1.0 + n * k.growth));
        assert_eq!(k.c, 2.0);
    }

    #[test]
    fn tail_sum_matches_direct_summation() {
        let direct: f64 = (11..200)
            .map(|m| {
                let binom = (1..=m).fold(1.0, |acc, i| acc * (2.0 + i as f64) / i as f64);
                let fact = (1..=m).fold(1.0f64, |acc, i| acc * i as f64);
                binom * 1.7f64.powi(m) / fact
            })
            .sum();
        let tail = binomial_exponential_tail(3, 10, 1.7);
        assert!((tail - direct).abs() <= 1e-12 * direct);
        assert_eq!(binomial_exponential_tail(2, 5, 0.0), 0.0);
    }

    #[test]
    fn residual_is_small_and_independent_of_the_morse_coupling() {
        let xi = point(&[(0.0, 0.4), (0.0, 0.7)]);
        let x = PositionPoint::real(&[2.0, 1.0]).unwrap();
        let plan = TruncationPlan::new(30);
        for g in [0.0, 1.0, 2.5] {
            let r = toda_laplacian_residual(&xi, &x, c(g, 0.0), &plan).unwrap();
            assert!(r <= 1e-8, "g={g}: {r:e}");
        }
    }

    #[test]
    fn growth_bound_holds() {
        let xi = point(&[(0.13, 0.4), (-0.3, 0.9)]);
        let g = c(0.9, 0.0);
        let plan = TruncationPlan::new(25);
        let x = [c(0.0, 0.0), c(0.0, 0.0)];
        let k = TailConstants::estimate(&xi.to_c64(), &x, g, &plan);
        let table = HcTable::build(&xi, g, 25, DEFAULT_ETA).unwrap();
        let mut fact = 1.0f64;
        for m in 0..=25u32 {
            if m > 0 {
                fact *= m as f64;
            }
            assert!(table.level_max(m) <= k.growth.powi(m as i32) / fact * (1.0 + 1e-12));
        }
    }

    #[test]
    fn double_double_agrees_with_double() {
        use crate::dd::Dd;
        let xi = point(&[(0.21, 0.3), (0.4, -0.6)]);
        let x = PositionPoint::real(&[1.7, 0.6]).unwrap();
        let g = c(0.4, 0.0);
        let plan = TruncationPlan::new(20);
        let v64 = phi_eval(&xi, &x, g, &plan).unwrap().value;
        let vdd = phi_eval(&xi.cast::<Dd>(), &x.cast::<Dd>(), cx::from_c64(g), &plan).unwrap().value;
        assert!((cx::to_c64(vdd) - v64).norm() < 1e-13 * v64.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn raising_the_truncation_stays_within_the_tail_bound(
            re in -0.45f64..0.45, im1 in 0.1f64..1.5, im2 in -1.5f64..-0.1,
            gap in 1.0f64..2.5, g in 0.0f64..2.0, m in 8u32..20,
        ) {
            let xi = point(&[(re, im1), (0.5 * re, im2)]);
            prop_assume!(xi.is_regular(1e-3));
            let x = PositionPoint::real(&[1.0 + gap, 1.0]).unwrap();
            let coarse = phi_eval(&xi, &x, c(g, 0.0), &TruncationPlan::new(m)).unwrap();
            let fine = phi_eval(&xi, &x, c(g, 0.0), &TruncationPlan::new(m + 5)).unwrap();
            prop_assert!((fine.value - coarse.value).norm() <= coarse.tail_bound + 1e-13 * fine.value.norm());
        }
    }
}
