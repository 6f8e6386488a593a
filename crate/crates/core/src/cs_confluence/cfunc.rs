//! CS c-function, the γ normalization, and the CS orbit sums.

use rayon::prelude::*;

use super::series::{coupling_schedule, CouplingTriple, CsTable};
use crate::connection::{c_function, CFunctionValue, GammaProduct, WhittakerValue};
use crate::domain::{group_enumerate, Lattice, PositionPoint, SignedPermutation, SpectralPoint};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::hc_series::TruncationPlan;
use crate::scalar::{cx, Cx, Real};
use crate::summation::ComplexSum;

/// `C^cs(ξ; k)`.
pub fn cs_c_function<T: Real>(xi: &SpectralPoint<T>, k: &CouplingTriple<T>, eta: f64) -> Result<CFunctionValue<T>> {
    let z = xi.entries();
    let n = z.len();
    let two = T::from_f64(2.0);
    let half_k1 = k.k1 * T::from_f64(0.5);
    let mut p = GammaProduct::new(eta);
    for (j, &zj) in z.iter().enumerate() {
        p.numerator(zj * two, || format!("2xi_{}", j + 1))?;
        p.numerator(half_k1 + zj, || format!("k1/2 + xi_{}", j + 1))?;
        p.denominator(k.k1 + zj * two);
        p.denominator(half_k1 + k.k2 + z[j]);
    }
    for j in 0..n {
        for l in j + 1..n {
            p.numerator(z[j] + z[l], || format!("xi_{} + xi_{}", j + 1, l + 1))?;
            p.numerator(z[j] - z[l], || format!("xi_{} - xi_{}", j + 1, l + 1))?;
            p.denominator(k.k0 + z[j] + z[l]);
            p.denominator(k.k0 + z[j] - z[l]);
        }
    }
    Ok(p.finish())
}

/// `ln γ(k)` in the duplicated form
/// `n(n−1) ln Γ(k_0) + n[(k_1 − 1) ln 2 + ln Γ(k_1/2 + k_2) − ½ ln π]`.
pub fn ln_gamma_factor<T: Real>(n: usize, k: &CouplingTriple<T>, eta: f64) -> Result<Cx<T>> {
    let mut p = GammaProduct::new(eta);
    if n > 1 {
        p.numerator(k.k0, || "k0".into())?;
    }
    let mut log = p.finish().log_value * T::from_i64((n * n.saturating_sub(1)) as i64);
    let arg = k.k1 * T::from_f64(0.5) + k.k2;
    if cx::dist_to_nonpositive_integer(arg) <= eta {
        return Err(Error::ParameterPole(format!("k1/2 + k2 = {} is a pole of Gamma", cx::to_c64(arg))));
    }
    let per_index = (k.k1 - T::one()) * T::ln_2() + ln_gamma(arg) - Cx::new(T::pi().ln() * T::from_f64(0.5), T::zero());
    log = log + per_index * T::from_i64(n as i64);
    Ok(log)
}

/// `γ(k) = Γ(k_0)^{n(n−1)} (Γ(k_1)Γ(k_1/2 + k_2) / (Γ(k_1/2)Γ(½ + k_1/2)))^n`.
pub fn gamma_factor<T: Real>(n: usize, k: &CouplingTriple<T>, eta: f64) -> Result<Cx<T>> {
    ln_gamma_factor(n, k, eta).map(cx::exp)
}

/// The undoubled form of [`gamma_factor`], evaluated factor by factor.
pub fn gamma_factor_direct<T: Real>(n: usize, k: &CouplingTriple<T>, eta: f64) -> Result<Cx<T>> {
    let half = T::from_f64(0.5);
    let mut p = GammaProduct::new(eta);
    p.numerator(k.k1, || "k1".into())?;
    p.numerator(k.k1 * half + k.k2, || "k1/2 + k2".into())?;
    p.denominator(k.k1 * half);
    p.denominator(k.k1 * half + half);
    let per_index = p.finish();
    let mut log = per_index.log_value * T::from_i64(n as i64);
    if n > 1 {
        log = log + ln_gamma(k.k0) * T::from_i64((n * (n - 1)) as i64);
    }
    Ok(cx::exp(log))
}

/// `γ(k^{(c)}) e^{c<ξ,ρ>} C^cs(ξ; k^{(c)})`, which tends to `C(ξ; g)`.
pub fn scaled_cs_c_function<T: Real>(xi: &SpectralPoint<T>, g: Cx<T>, c: T, eta: f64) -> Result<CFunctionValue<T>> {
    let k = coupling_schedule(c, g);
    let cs = cs_c_function(xi, &k, eta)?;
    let log = cs.log_value + ln_gamma_factor(xi.dim(), &k, eta)? + xi.dot_rho() * c;
    Ok(CFunctionValue::from_parts(log, cs.vanishes))
}

/// `|γ e^{c<ξ,ρ>} C^cs(ξ; k^{(c)}) − C(ξ; g)|` relative to `|C(ξ; g)|`.
pub fn c_function_limit_error(xi: &SpectralPoint, g: Cx<f64>, c: f64, eta: f64) -> Result<f64> {
    let limit = c_function(xi, g, eta)?.value;
    let scaled = scaled_cs_c_function(xi, g, c, eta)?.value;
    Ok((scaled - limit).norm() / limit.norm())
}

fn orbit_error(w: &SignedPermutation) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::InOrbitTerm { element: w.to_string(), source: Box::new(e) }
}

/// `Σ_w exp(log_norm + c<wξ,ρ> + ln C^cs(wξ)) · e^{−c<wξ,ρ>} φ^cs_{wξ}(x + cρ)`.
fn cs_orbit_sum<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    k: &CouplingTriple<T>,
    c: T,
    log_norm: Cx<T>,
    plan: &TruncationPlan,
) -> Result<WhittakerValue<T>> {
    if xi.dim() != x.dim() {
        return Err(Error::InvalidInput("spectral and position dimensions differ".into()));
    }
    x.check_chamber()?;
    xi.check_regular(Lattice::All, plan.eta)?;
    let terms: Vec<(Cx<T>, f64)> = group_enumerate(xi.dim())
        .par_iter()
        .map(|w| -> Result<(Cx<T>, f64)> {
            let wxi = SpectralPoint::new(w.act(xi.entries()))?;
            let cfun = cs_c_function(&wxi, k, plan.eta).map_err(orbit_error(w))?;
            if cfun.vanishes {
                return Ok((Cx::new(T::zero(), T::zero()), 0.0));
            }
            let table = CsTable::build(&wxi, k, c, plan.max_level, plan.eta).map_err(orbit_error(w))?;
            let (reduced, levels) = table.reduced_by_level(x);
            let scale = cx::exp(log_norm + cfun.log_value + wxi.dot_rho() * c + wxi.dot(x.entries()));
            let tail = super::series::empirical_tail(&levels) * cx::abs(scale).to_f64();
            Ok((scale * reduced, tail))
        })
        .collect::<Result<_>>()?;
    let mut sum = ComplexSum::new();
    let mut tail = 0.0;
    for (t, e) in &terms {
        sum.add(*t);
        tail += e;
    }
    let condition = sum.condition();
    Ok(WhittakerValue {
        value: sum.total(),
        tail_bound: tail,
        condition,
        flagged: condition * T::epsilon().to_f64() > plan.target,
        bits: T::BITS,
    })
}

/// `Φ^cs_ξ(x; k) = Σ_w C^cs(wξ; k) φ^cs_{wξ}(x; k)`. The `tail_bound` field
/// carries the empirical estimate.
pub fn cs_whittaker_eval<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    k: &CouplingTriple<T>,
    plan: &TruncationPlan,
) -> Result<WhittakerValue<T>> {
    cs_orbit_sum(xi, x, k, T::zero(), Cx::new(T::zero(), T::zero()), plan)
}

/// `γ(k^{(c)}) Φ^cs_ξ(x + cρ; k^{(c)})`, assembled in the translated frame.
pub fn cs_whittaker_normalized<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    c: T,
    plan: &TruncationPlan,
) -> Result<WhittakerValue<T>> {
    let k = coupling_schedule(c, g);
    let log_norm = ln_gamma_factor(xi.dim(), &k, plan.eta)?;
    cs_orbit_sum(xi, x, &k, c, log_norm, plan)
}

/// `|L^cs Φ^cs − <ξ,ξ>Φ^cs| / |Φ^cs|` with termwise derivatives and the exact
/// inverse-sinh² potential.
pub fn cs_eigen_residual<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    k: &CouplingTriple<T>,
    plan: &TruncationPlan,
) -> Result<f64> {
    x.check_chamber()?;
    xi.check_regular(Lattice::All, plan.eta)?;
    let parts: Vec<(Cx<T>, Cx<T>)> = group_enumerate(xi.dim())
        .par_iter()
        .map(|w| -> Result<(Cx<T>, Cx<T>)> {
            let wxi = SpectralPoint::new(w.act(xi.entries()))?;
            let cfun = cs_c_function(&wxi, k, plan.eta).map_err(orbit_error(w))?;
            if cfun.vanishes {
                return Ok((Cx::new(T::zero(), T::zero()), Cx::new(T::zero(), T::zero())));
            }
            let table = CsTable::build(&wxi, k, T::zero(), plan.max_level, plan.eta).map_err(orbit_error(w))?;
            let (defect, phi) = table.eigen_defect(x);
            let scale = cx::exp(cfun.log_value + wxi.dot(x.entries()));
            Ok((scale * defect, scale * phi))
        })
        .collect::<Result<_>>()?;
    let defect: ComplexSum<T> = parts.iter().map(|p| p.0).collect();
    let value: ComplexSum<T> = parts.iter().map(|p| p.1).collect();
    Ok(cx::abs(defect.total()).to_f64() / cx::abs(value.total()).to_f64())
}
