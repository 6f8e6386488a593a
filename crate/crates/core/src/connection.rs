//! The c-function and the W-symmetrized Whittaker function
//!
//! ```text
//! C(ξ; g) = Π_j Γ(2ξ_j) / Γ(½ + g + ξ_j) · Π_{j<k} Γ(ξ_j + ξ_k) Γ(ξ_j − ξ_k),
//! Φ_ξ(x; g) = Σ_{w∈W} C(wξ; g) φ_{wξ}(x; g).
//! ```

use rayon::prelude::*;

use crate::dd::Dd;
use crate::domain::{group_enumerate, Lattice, PositionPoint, SignedPermutation, SpectralPoint};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::hc_series::{tail_bound, HcTable, TruncationPlan};
use crate::scalar::{cx, Cx, Real};
use crate::summation::ComplexSum;

/// A c-function value kept in logarithmic form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CFunctionValue<T: Real = f64> {
    /// `exp(log_value)`, or zero when `vanishes`.
    pub value: Cx<T>,
    /// Logarithm of the product of all non-vanishing factors.
    pub log_value: Cx<T>,
    /// Some reciprocal gamma factor sits exactly at a pole of Γ.
    pub vanishes: bool,
}

impl<T: Real> CFunctionValue<T> {
    pub(crate) fn from_parts(log_value: Cx<T>, vanishes: bool) -> Self {
        let value = if vanishes { Cx::new(T::zero(), T::zero()) } else { cx::exp(log_value) };
        CFunctionValue { value, log_value, vanishes }
    }
}

/// Accumulates `± ln Γ(z)` terms of a gamma product.
pub(crate) struct GammaProduct<T: Real> {
    log: Cx<T>,
    vanishes: bool,
    eta: f64,
}

impl<T: Real> GammaProduct<T> {
    pub(crate) fn new(eta: f64) -> Self {
        GammaProduct { log: Cx::new(T::zero(), T::zero()), vanishes: false, eta }
    }

    /// Multiplies by Γ(z); a pole is an error.
    pub(crate) fn numerator(&mut self, z: Cx<T>, label: impl FnOnce() -> String) -> Result<()> {
        if cx::dist_to_nonpositive_integer(z) <= self.eta {
            return Err(Error::CFunctionPole { argument: format!("{} = {}", label(), cx::to_c64(z)) });
        }
        self.log = self.log + ln_gamma(z);
        Ok(())
    }

    /// Divides by Γ(z); a pole makes the product vanish.
    pub(crate) fn denominator(&mut self, z: Cx<T>) {
        if cx::dist_to_nonpositive_integer(z) <= self.eta {
            self.vanishes = true;
        } else {
            self.log = self.log - ln_gamma(z);
        }
    }

    pub(crate) fn finish(self) -> CFunctionValue<T> {
        CFunctionValue::from_parts(self.log, self.vanishes)
    }
}

/// `C(ξ; g)` via log-gamma sums.
pub fn c_function<T: Real>(xi: &SpectralPoint<T>, g: Cx<T>, eta: f64) -> Result<CFunctionValue<T>> {
    let z = xi.entries();
    let n = z.len();
    let half = T::from_f64(0.5);
    let two = T::from_f64(2.0);
    let mut p = GammaProduct::new(eta);
    for (j, &zj) in z.iter().enumerate() {
        p.numerator(zj * two, || format!("2xi_{}", j + 1))?;
        p.denominator(g + zj + half);
    }
    for j in 0..n {
        for k in j + 1..n {
            p.numerator(z[j] + z[k], || format!("xi_{} + xi_{}", j + 1, k + 1))?;
            p.numerator(z[j] - z[k], || format!("xi_{} - xi_{}", j + 1, k + 1))?;
        }
    }
    Ok(p.finish())
}

/// Orbit sum with diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct WhittakerValue<T: Real = f64> {
    pub value: Cx<T>,
    /// `Σ_w |C(wξ)| · tail(wξ)`.
    pub tail_bound: f64,
    /// `Σ_w |term_w| / |Σ_w term_w|`.
    pub condition: f64,
    /// Cancellation may have consumed more than the plan's target accuracy.
    pub flagged: bool,
    /// Significand bits of the arithmetic that produced `value`.
    pub bits: u32,
}

struct OrbitTerm<T: Real> {
    term: Cx<T>,
    tail: f64,
}

fn in_orbit(w: &SignedPermutation) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::InOrbitTerm { element: w.to_string(), source: Box::new(e) }
}

fn orbit_term<T: Real>(
    w: &SignedPermutation,
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> Result<OrbitTerm<T>> {
    let wxi = SpectralPoint::new(w.act(xi.entries())).map_err(in_orbit(w))?;
    let c = c_function(&wxi, g, plan.eta).map_err(in_orbit(w))?;
    if c.vanishes {
        return Ok(OrbitTerm { term: Cx::new(T::zero(), T::zero()), tail: 0.0 });
    }
    let table = HcTable::build(&wxi, g, plan.max_level, plan.eta).map_err(in_orbit(w))?;
    let reduced = table.reduced_sum(x).total();
    let (tail, _) = tail_bound(&wxi, x, g, plan);
    let scale = c.log_value + wxi.dot(x.entries());
    let c_abs = cx::to_c64(c.log_value).re.exp();
    Ok(OrbitTerm { term: cx::exp(scale) * reduced, tail: c_abs * tail })
}

fn check_inputs<T: Real>(xi: &SpectralPoint<T>, x: &PositionPoint<T>, eta: f64) -> Result<()> {
    if xi.dim() != x.dim() {
        return Err(Error::InvalidInput(format!(
            "spectral dimension {} differs from position dimension {}",
            xi.dim(),
            x.dim()
        )));
    }
    xi.check_regular(Lattice::All, eta)
}

/// `Φ_ξ(x; g)` in the arithmetic of `T`.
pub fn whittaker_eval<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> Result<WhittakerValue<T>> {
    check_inputs(xi, x, plan.eta)?;
    let group = group_enumerate(xi.dim());
    let terms: Vec<OrbitTerm<T>> = group.par_iter().map(|w| orbit_term(w, xi, x, g, plan)).collect::<Result<_>>()?;
    let mut sum = ComplexSum::new();
    let mut tail = 0.0;
    for t in &terms {
        sum.add(t.term);
        tail += t.tail;
    }
    let condition = sum.condition();
    let flagged = condition * T::epsilon().to_f64() > plan.target;
    Ok(WhittakerValue { value: sum.total(), tail_bound: tail, condition, flagged, bits: T::BITS })
}

/// `Φ_ξ(x; g)` in double precision, recomputed in double-double when the
/// orbit sum cancels beyond the plan's target accuracy.
pub fn whittaker_eval_adaptive(
    xi: &SpectralPoint,
    x: &PositionPoint,
    g: Cx<f64>,
    plan: &TruncationPlan,
) -> Result<WhittakerValue> {
    let first = whittaker_eval(xi, x, g, plan)?;
    if !first.flagged {
        return Ok(first);
    }
    let wide = whittaker_eval(&xi.cast::<Dd>(), &x.cast::<Dd>(), cx::from_c64(g), plan)?;
    Ok(WhittakerValue {
        value: cx::to_c64(wide.value),
        tail_bound: wide.tail_bound,
        condition: wide.condition,
        flagged: wide.flagged,
        bits: wide.bits,
    })
}

/// `Σ_w C(wξ; g) e^{<wξ, x>}`, the leading asymptotics of Φ.
pub fn plane_wave_sum<T: Real>(xi: &SpectralPoint<T>, x: &PositionPoint<T>, g: Cx<T>, eta: f64) -> Result<Cx<T>> {
    check_inputs(xi, x, eta)?;
    let mut sum = ComplexSum::new();
    for w in group_enumerate(xi.dim()) {
        let wxi = SpectralPoint::new(w.act(xi.entries()))?;
        let c = c_function(&wxi, g, eta).map_err(in_orbit(&w))?;
        if !c.vanishes {
            sum.add(cx::exp(c.log_value + wxi.dot(x.entries())));
        }
    }
    Ok(sum.total())
}

/// `|L Φ − <ξ,ξ> Φ| / |Φ|` for the truncated orbit sum.
pub fn whittaker_laplacian_residual<T: Real>(
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> Result<f64> {
    check_inputs(xi, x, plan.eta)?;
    let parts: Vec<(Cx<T>, Cx<T>)> = group_enumerate(xi.dim())
        .par_iter()
        .map(|w| -> Result<(Cx<T>, Cx<T>)> {
            let wxi = SpectralPoint::new(w.act(xi.entries()))?;
            let c = c_function(&wxi, g, plan.eta).map_err(in_orbit(w))?;
            if c.vanishes {
                return Ok((Cx::new(T::zero(), T::zero()), Cx::new(T::zero(), T::zero())));
            }
            let table = HcTable::build(&wxi, g, plan.max_level, plan.eta).map_err(in_orbit(w))?;
            let (defect, phi) = table.laplacian_defect(x);
            let scale = cx::exp(c.log_value + wxi.dot(x.entries()));
            Ok((scale * defect, scale * phi))
        })
        .collect::<Result<_>>()?;
    let defect: ComplexSum<T> = parts.iter().map(|p| p.0).collect();
    let value: ComplexSum<T> = parts.iter().map(|p| p.1).collect();
    Ok(cx::abs(defect.total()).to_f64() / cx::abs(value.total()).to_f64().max(1e-30))
}
