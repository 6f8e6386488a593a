//! Couplings and Harish-Chandra series of the hyperoctahedral
//! Calogero–Sutherland operator.

use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::{Cone, PositionPoint, RootData, SpectralPoint};
use crate::error::{Error, Result};
use crate::hc_series::{denominator, gap_powers, monomial, TruncationPlan};
use crate::scalar::{cx, Cx, Real};
use crate::summation::ComplexSum;

/// CS couplings `(k_0, k_1, k_2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingTriple<T: Real = f64> {
    pub k0: Cx<T>,
    pub k1: Cx<T>,
    pub k2: Cx<T>,
}

impl<T: Real> CouplingTriple<T> {
    pub fn new(k0: Cx<T>, k1: Cx<T>, k2: Cx<T>) -> Self {
        CouplingTriple { k0, k1, k2 }
    }

    /// `a^cs_α` for a root of squared length `norm2`.
    pub fn weight(&self, norm2: i32) -> Cx<T> {
        let one = T::one();
        match norm2 {
            1 => self.k1 * (self.k1 + self.k2 * T::from_f64(2.0) - one),
            2 => self.k0 * (self.k0 - one) * T::from_f64(2.0),
            4 => self.k2 * (self.k2 - one) * T::from_f64(4.0),
            _ => panic!("no BC root of squared length {norm2}"),
        }
    }

    /// Weights aligned with [`RootData::positive`].
    pub fn weights(&self, roots: &RootData) -> Vec<Cx<T>> {
        roots.positive.iter().map(|r| self.weight(r.norm2)).collect()
    }
}

/// `k^{(c)}`: positive roots of `k_0(k_0−1) = e^c`, `k_2(k_2−1) = e^{2c}/16`,
/// and `k_1 = 2g`.
pub fn coupling_schedule<T: Real>(c: T, g: Cx<T>) -> CouplingTriple<T> {
    let one = T::one();
    let half = T::from_f64(0.5);
    let ec = c.exp();
    let k0 = (one + (one + ec * T::from_f64(4.0)).sqrt()) * half;
    let k2 = (one + (one + ec * ec * T::from_f64(0.25)).sqrt()) * half;
    CouplingTriple { k0: Cx::new(k0, T::zero()), k1: g * T::from_f64(2.0), k2: Cx::new(k2, T::zero()) }
}

/// Coefficients `â_ν` of the series `e^{−c<ξ,ρ>} φ^cs_ξ(x + cρ; k)`; at
/// `c = 0` these are the plain `a^cs_ν(ξ; k)`.
#[derive(Clone, Debug)]
pub struct CsTable<T: Real = f64> {
    cone: Arc<Cone>,
    xi: SpectralPoint<T>,
    couplings: CouplingTriple<T>,
    translation: T,
    /// `l · a^cs_α · e^{−c l <α,ρ>}`, indexed `[root][l]`.
    link_weights: Vec<Vec<Cx<T>>>,
    max_level: u32,
    coeffs: Vec<Cx<T>>,
    denominators: Vec<Cx<T>>,
}

impl<T: Real> CsTable<T> {
    pub fn build(
        xi: &SpectralPoint<T>,
        couplings: &CouplingTriple<T>,
        translation: T,
        max_level: u32,
        eta: f64,
    ) -> Result<Self> {
        let cone = Cone::shared(xi.dim(), max_level);
        let weights = couplings.weights(cone.roots());
        let link_weights: Vec<Vec<Cx<T>>> = cone
            .roots()
            .positive
            .iter()
            .zip(&weights)
            .map(|(root, &w)| {
                (0..=max_level)
                    .map(|l| {
                        let lt = T::from_i64(l as i64);
                        let damp = (-(translation * lt * T::from_i64(root.height as i64))).exp();
                        w * (lt * damp)
                    })
                    .collect()
            })
            .collect();
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
                let mut rhs = ComplexSum::new();
                for link in cone.cs_links(i) {
                    rhs.add(link_weights[link.root][link.mult as usize] * coeffs[link.pred]);
                }
                Ok((rhs.total() / d, d))
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
        Ok(CsTable {
            cone,
            xi: xi.clone(),
            couplings: *couplings,
            translation,
            link_weights,
            max_level,
            coeffs,
            denominators,
        })
    }

    pub fn xi(&self) -> &SpectralPoint<T> {
        &self.xi
    }

    pub fn couplings(&self) -> &CouplingTriple<T> {
        &self.couplings
    }

    pub fn translation(&self) -> T {
        self.translation
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// `|<ν−2ξ,ν> â_ν − Σ l â_α e^{−cl<α,ρ>} â_{ν−lα}|` relative to the
    /// largest summand.
    pub fn recurrence_defect(&self, index: usize) -> f64 {
        let mut rhs = ComplexSum::new();
        for link in self.cone.cs_links(index) {
            rhs.add(self.link_weights[link.root][link.mult as usize] * self.coeffs[link.pred]);
        }
        let lhs = self.denominators[index] * self.coeffs[index];
        let scale = cx::abs(lhs).to_f64().max(rhs.magnitude().to_f64());
        if scale == 0.0 {
            return 0.0;
        }
        cx::abs(lhs - rhs.total()).to_f64() / scale
    }

    /// `Σ_{level m} |â_ν e^{−<ν,x>}|` for `m = 0..=M`, and the reduced sum.
    pub fn reduced_by_level(&self, x: &PositionPoint<T>) -> (Cx<T>, Vec<f64>) {
        let powers = gap_powers(x, self.max_level);
        let mut sum = ComplexSum::new();
        let mut levels = Vec::with_capacity(self.max_level as usize + 1);
        for m in 0..=self.max_level {
            let mut size = 0.0;
            for i in self.cone.level_range(m) {
                let t = self.coeffs[i] * monomial(&powers, &self.cone.vectors()[i]);
                size += cx::abs(t).to_f64();
                sum.add(t);
            }
            levels.push(size);
        }
        (sum.total(), levels)
    }

    /// Reduced forms `(e^{−<ξ,x>}(L^cs − <ξ,ξ>)φ_M, e^{−<ξ,x>}φ_M)` with
    /// the exact inverse-sinh² potential. Only meaningful at zero translation.
    pub fn eigen_defect(&self, x: &PositionPoint<T>) -> (Cx<T>, Cx<T>) {
        let powers = gap_powers(x, self.max_level);
        let xi = self.xi.entries();
        let mut second = ComplexSum::new();
        let mut plain = ComplexSum::new();
        for (i, nu) in self.cone.vectors()[..self.coeffs.len()].iter().enumerate() {
            let term = self.coeffs[i] * monomial(&powers, nu);
            let mut q = Cx::new(T::zero(), T::zero());
            for (z, &v) in xi.iter().zip(nu.entries()) {
                let w = *z - T::from_i64(v as i64);
                q = q + w * w;
            }
            second.add(term * q);
            plain.add(term);
        }
        let phi = plain.total();
        let potential = cs_potential(x, &self.couplings);
        (second.total() - potential * phi - self.xi.dot(xi) * phi, phi)
    }
}

fn inv_sinh2<T: Real>(z: Cx<T>) -> Cx<T> {
    let s = cx::sinh(z);
    Cx::new(T::one(), T::zero()) / (s * s)
}

/// The potential of `L^cs`, so that `L^cs = Δ − potential`.
pub fn cs_potential<T: Real>(x: &PositionPoint<T>, k: &CouplingTriple<T>) -> Cx<T> {
    let z = x.entries();
    let half = T::from_f64(0.5);
    let one_term = k.weight(1) * T::from_f64(0.25);
    let four_term = k.k2 * (k.k2 - T::one());
    let pair_term = k.weight(2) * T::from_f64(0.25);
    let mut v = Cx::new(T::zero(), T::zero());
    for (j, &a) in z.iter().enumerate() {
        v = v + one_term * inv_sinh2(a * half) + four_term * inv_sinh2(a);
        for &b in &z[j + 1..] {
            v = v + pair_term * (inv_sinh2((a + b) * half) + inv_sinh2((a - b) * half));
        }
    }
    v
}

/// A truncated CS series with an empirical tail estimate.
#[derive(Clone, Copy, Debug)]
pub struct CsSeriesValue<T: Real = f64> {
    pub value: Cx<T>,
    /// Geometric extrapolation of the last two level magnitudes; not a bound.
    pub tail_estimate: f64,
}

/// Geometric continuation of level magnitudes `t_{M−1}`, `t_M`.
pub fn empirical_tail(levels: &[f64]) -> f64 {
    let k = levels.len();
    if k < 2 {
        return f64::INFINITY;
    }
    let (prev, last) = (levels[k - 2], levels[k - 1]);
    if last == 0.0 {
        return 0.0;
    }
    let q = last / prev;
    if !(q < 1.0) {
        return f64::INFINITY;
    }
    last * q / (1.0 - q)
}

fn series_value<T: Real>(table: &CsTable<T>, xi: &SpectralPoint<T>, x: &PositionPoint<T>) -> CsSeriesValue<T> {
    let (reduced, levels) = table.reduced_by_level(x);
    let lead = cx::exp(xi.dot(x.entries()));
    CsSeriesValue { value: lead * reduced, tail_estimate: empirical_tail(&levels) * cx::abs(lead).to_f64() }
}

fn check_pair<T: Real>(xi: &SpectralPoint<T>, x: &PositionPoint<T>) -> Result<()> {
    if xi.dim() != x.dim() {
        return Err(Error::InvalidInput(format!(
            "spectral dimension {} differs from position dimension {}",
            xi.dim(),
            x.dim()
        )));
    }
    x.check_chamber()
}

/// `φ^cs_ξ(x; k)` for `x` in the open chamber `x_1 > … > x_n > 0`.
pub fn cs_phi_eval<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    k: &CouplingTriple<T>,
    plan: &TruncationPlan,
) -> Result<CsSeriesValue<T>> {
    check_pair(xi, x)?;
    let table = CsTable::build(xi, k, T::zero(), plan.max_level, plan.eta)?;
    Ok(series_value(&table, xi, x))
}

/// `e^{−c<ξ,ρ>} φ^cs_ξ(x + cρ; k^{(c)})`, summed directly in the
/// translated frame.
pub fn cs_phi_translated<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    c: T,
    plan: &TruncationPlan,
) -> Result<CsSeriesValue<T>> {
    check_pair(xi, x)?;
    let k = coupling_schedule(c, g);
    let table = CsTable::build(xi, &k, c, plan.max_level, plan.eta)?;
    Ok(series_value(&table, xi, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_ETA;
    use crate::hc_series::HcTable;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn point(v: &[(f64, f64)]) -> SpectralPoint {
        SpectralPoint::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn schedule_solves_its_quadratics() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let k = coupling_schedule(0.0, c(0.3, 0.2));
        assert!((k.k0.re - golden).abs() < 1e-15);
        assert!((k.k2.re - (1.0 + 1.25f64.sqrt()) / 2.0).abs() < 1e-15);
        assert_eq!(k.k1, c(0.6, 0.4));
        for cc in [0.0, 1.0, 4.0, 8.0, 12.0] {
            let k = coupling_schedule(cc, c(1.0, 0.0));
            let (k0, k2) = (k.k0.re, k.k2.re);
            assert!(k0 > 0.0 && k2 > 0.0);
            assert!((k0 * (k0 - 1.0) / f64::exp(cc) - 1.0).abs() < 1e-12);
            assert!((k2 * (k2 - 1.0) * 16.0 / f64::exp(2.0 * cc) - 1.0).abs() < 1e-12);
        }
        let k = coupling_schedule(14.0, c(1.0, 0.0));
        assert!((k.k0.re / f64::exp(7.0) - 1.0).abs() < 1e-3);
        assert!((k.k2.re * 4.0 / f64::exp(14.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn weights_by_root_length() {
        let k = CouplingTriple::new(c(1.5, 0.0), c(0.4, 0.0), c(2.0, 0.0));
        assert!((k.weight(1) - 0.4 * (0.4 + 4.0 - 1.0)).norm() < 1e-15);
        assert!((k.weight(2) - 2.0 * 1.5 * 0.5).norm() < 1e-15);
        assert!((k.weight(4) - 8.0).norm() < 1e-15);
    }

    #[test]
    fn free_couplings_give_a_plane_wave() {
        for kk in [0.0, 1.0] {
            let k = CouplingTriple::new(c(kk, 0.0), c(0.0, 0.0), c(kk, 0.0));
            let xi = point(&[(0.2, 0.4), (-0.1, 0.9)]);
            let t = CsTable::build(&xi, &k, 0.0, 10, DEFAULT_ETA).unwrap();
            assert_eq!(t.coefficients()[0], c(1.0, 0.0));
            assert!(t.coefficients()[1..].iter().all(|a| a.norm() == 0.0));
        }
    }

    #[test]
    fn recurrence_resubstitution() {
        let xi = point(&[(0.3, 0.2), (-0.2, 0.7), (0.1, -0.4)]);
        for cc in [0.0, 3.0] {
            let k = coupling_schedule(cc, c(0.7, 0.0));
            let t = CsTable::build(&xi, &k, cc, 14, DEFAULT_ETA).unwrap();
            let worst = (0..t.coefficients().len()).map(|i| t.recurrence_defect(i)).fold(0.0, f64::max);
            assert!(worst < 1e-12, "{worst:e}");
        }
    }

    /// Backward RK4 integration of the rank-one CS equation from a far point
    /// where the solution is a plane wave.
    fn rk4_oracle(xi: Cx<f64>, x: f64, k: &CouplingTriple) -> Cx<f64> {
        let p1 = k.weight(1) * 0.25;
        let p4 = k.k2 * (k.k2 - 1.0);
        let pot = |t: f64| p1 / (t / 2.0).sinh().powi(2) + p4 / t.sinh().powi(2);
        let rhs = |t: f64, y: [Cx<f64>; 2]| [y[1], (pot(t) + xi * xi) * y[0]];
        let far = 45.0;
        let mut y = [(xi * far).exp(), xi * (xi * far).exp()];
        let steps = 80_000;
        let h = -(far - x) / steps as f64;
        let mut t = far;
        for _ in 0..steps {
            let a = rhs(t, y);
            let b = rhs(t + h / 2.0, [y[0] + a[0] * (h / 2.0), y[1] + a[1] * (h / 2.0)]);
            let cc = rhs(t + h / 2.0, [y[0] + b[0] * (h / 2.0), y[1] + b[1] * (h / 2.0)]);
            let d = rhs(t + h, [y[0] + cc[0] * h, y[1] + cc[1] * h]);
            for i in 0..2 {
                y[i] += (a[i] + b[i] * 2.0 + cc[i] * 2.0 + d[i]) * (h / 6.0);
            }
            t += h;
        }
        y[0]
    }

    #[test]
    fn rank_one_matches_direct_integration() {
        let plan = TruncationPlan::new(40);
        let k = CouplingTriple::new(c(1.3, 0.0), c(0.8, 0.0), c(1.7, 0.0));
        for &(xi, x) in &[(c(0.0, 0.3), 2.0), (c(-0.25, 0.5), 1.5), (c(-0.4, -0.2), 3.0)] {
            let s = SpectralPoint::new(vec![xi]).unwrap();
            let p = PositionPoint::in_chamber(&[x]).unwrap();
            let v = cs_phi_eval(&s, &p, &k, &plan).unwrap();
            let o = rk4_oracle(xi, x, &k);
            assert!((v.value - o).norm() < 1e-8 * o.norm(), "xi={xi} x={x}: {} vs {o}", v.value);
            assert!(v.tail_estimate < 1e-8 * o.norm());
        }
    }

    #[test]
    fn translated_coefficients_approach_toda() {
        let xi = point(&[(0.1, 0.4), (0.3, -0.2)]);
        let g = c(0.8, 0.0);
        let toda = HcTable::build(&xi, g, 6, DEFAULT_ETA).unwrap();
        let mut last = f64::INFINITY;
        for cc in [4.0, 7.0, 10.0] {
            let t = CsTable::build(&xi, &coupling_schedule(cc, g), cc, 6, DEFAULT_ETA).unwrap();
            let err = t.coefficients().iter().zip(toda.coefficients()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn chamber_is_enforced() {
        let xi = point(&[(0.1, 0.4), (0.3, -0.2)]);
        let k = coupling_schedule(0.0, c(0.5, 0.0));
        let x = PositionPoint::real(&[1.0, 2.0]).unwrap();
        let e = cs_phi_eval(&xi, &x, &k, &TruncationPlan::new(5)).unwrap_err();
        assert_eq!(e.name(), "ChamberViolation");
    }

    #[test]
    fn empirical_tail_cases() {
        assert_eq!(empirical_tail(&[1.0, 0.0]), 0.0);
        assert!((empirical_tail(&[1.0, 0.5]) - 0.5).abs() < 1e-15);
        assert_eq!(empirical_tail(&[1.0, 2.0]), f64::INFINITY);
    }
}
