//! Hypergeometric difference-equation coefficients and their scaling limits.

use rayon::prelude::*;

use super::cfunc::{cs_whittaker_eval, cs_whittaker_normalized};
use super::series::{coupling_schedule, CouplingTriple};
use crate::domain::{Lattice, PositionPoint, SpectralPoint};
use crate::dual_ops::{subsets_of, SignedSubset};
use crate::error::{Error, Result};
use crate::hc_series::TruncationPlan;
use crate::scalar::{cx, Cx, Real};
use crate::summation::ComplexSum;

#[derive(Clone, Copy, PartialEq)]
enum PairSign {
    Plus,
    Minus,
}

fn ratio<T: Real>(num: Cx<T>, den: Cx<T>, eta: f64, label: impl FnOnce() -> String) -> Result<Cx<T>> {
    if cx::abs(den).to_f64() <= eta {
        return Err(Error::CoefficientPole { factor: label() });
    }
    Ok(num / den)
}

fn signed<T: Real>(z: Cx<T>, e: i8) -> Cx<T> {
    if e > 0 {
        z
    } else {
        -z
    }
}

/// The CS analogue of the V/U block. Every factor is multiplied by `unit`,
/// which is `e^{−c}` for the scaled coefficients and 1 otherwise.
fn cs_block<T: Real>(
    xi: &[Cx<T>],
    members: &[(usize, i8)],
    rest: &[usize],
    k: &CouplingTriple<T>,
    pair: PairSign,
    unit: T,
    eta: f64,
) -> Result<Cx<T>> {
    let one = T::one();
    let two = T::from_f64(2.0);
    let half_k1 = k.k1 * T::from_f64(0.5);
    let mut acc = Cx::new(one, T::zero());
    for &(i, e) in members {
        let ez = signed(xi[i], e);
        let num = (ez + half_k1 + k.k2) * (ez * two + one + k.k1);
        let den = ez * (ez * two + one);
        acc = acc
            * ratio(num, den, eta, || format!("{0}xi_{1} (1 {0} 2xi_{1})", if e > 0 { '+' } else { '-' }, i + 1))?
            * unit;
        for &m in rest {
            let plus = ez + xi[m];
            let minus = ez - xi[m];
            acc = acc
                * ratio(plus + k.k0, plus, eta, || format!("eps xi_{} + xi_{}", i + 1, m + 1))?
                * ratio(minus + k.k0, minus, eta, || format!("eps xi_{} - xi_{}", i + 1, m + 1))?
                * unit;
        }
    }
    for (a, &(i, e)) in members.iter().enumerate() {
        for &(j, f) in &members[a + 1..] {
            let s = signed(xi[i], e) + signed(xi[j], f);
            let shifted = s + one;
            let second = match pair {
                PairSign::Plus => shifted + k.k0,
                PairSign::Minus => shifted - k.k0,
            };
            acc = acc
                * ratio(s + k.k0, s, eta, || format!("eps xi_{} + eps xi_{}", i + 1, j + 1))?
                * ratio(second, shifted, eta, || format!("1 + eps xi_{} + eps xi_{}", i + 1, j + 1))?
                * unit;
        }
    }
    Ok(acc)
}

fn signed_members(s: &SignedSubset) -> Vec<(usize, i8)> {
    s.members().iter().copied().zip(s.signs().iter().copied()).collect()
}

fn v_with_unit<T: Real>(
    s: &SignedSubset,
    xi: &SpectralPoint<T>,
    k: &CouplingTriple<T>,
    unit: T,
    eta: f64,
) -> Result<Cx<T>> {
    if s.dim() != xi.dim() {
        return Err(Error::InvalidInput("signed subset and spectral point differ in dimension".into()));
    }
    cs_block(xi.entries(), &signed_members(s), &s.complement(), k, PairSign::Plus, unit, eta)
}

fn u_with_unit<T: Real>(
    k_set: &[usize],
    p: usize,
    xi: &SpectralPoint<T>,
    k: &CouplingTriple<T>,
    unit: T,
    eta: f64,
) -> Result<Cx<T>> {
    if p > k_set.len() || k_set.iter().any(|&i| i >= xi.dim()) {
        return Err(Error::InvalidInput(format!("U^cs needs p <= |K| and K inside 1..n, got p={p}, K={k_set:?}")));
    }
    let mut sum = ComplexSum::new();
    for pos in subsets_of(&(0..k_set.len()).collect::<Vec<_>>(), p) {
        let chosen: Vec<usize> = pos.iter().map(|&i| k_set[i]).collect();
        let rest: Vec<usize> = k_set.iter().copied().filter(|i| !chosen.contains(i)).collect();
        for mask in 0u32..(1 << p) {
            let members: Vec<(usize, i8)> =
                chosen.iter().enumerate().map(|(b, &i)| (i, if mask >> b & 1 == 1 { -1 } else { 1 })).collect();
            sum.add(cs_block(xi.entries(), &members, &rest, k, PairSign::Minus, unit, eta)?);
        }
    }
    let sign = if p.is_multiple_of(2) { T::one() } else { -T::one() };
    Ok(sum.total() * sign)
}

/// `V^cs_{εJ}(ξ; k)`.
pub fn cs_coeff_v<T: Real>(s: &SignedSubset, xi: &SpectralPoint<T>, k: &CouplingTriple<T>, eta: f64) -> Result<Cx<T>> {
    v_with_unit(s, xi, k, T::one(), eta)
}

/// `U^cs_{K,p}(ξ; k)` with zero-based increasing `K`.
pub fn cs_coeff_u<T: Real>(
    k_set: &[usize],
    p: usize,
    xi: &SpectralPoint<T>,
    k: &CouplingTriple<T>,
    eta: f64,
) -> Result<Cx<T>> {
    u_with_unit(k_set, p, xi, k, T::one(), eta)
}

/// `e^{−(c/2)|J|(2n+1−|J|)} V^cs_{εJ}(ξ; k^{(c)})`.
pub fn scaled_cs_coeff_v<T: Real>(s: &SignedSubset, xi: &SpectralPoint<T>, g: Cx<T>, c: T, eta: f64) -> Result<Cx<T>> {
    v_with_unit(s, xi, &coupling_schedule(c, g), (-c).exp(), eta)
}

/// `e^{−(c/2)p(2|K|+1−p)} U^cs_{K,p}(ξ; k^{(c)})`.
pub fn scaled_cs_coeff_u<T: Real>(
    k_set: &[usize],
    p: usize,
    xi: &SpectralPoint<T>,
    g: Cx<T>,
    c: T,
    eta: f64,
) -> Result<Cx<T>> {
    u_with_unit(k_set, p, xi, &coupling_schedule(c, g), (-c).exp(), eta)
}

/// `E_ℓ(x) = 4^ℓ Σ_{|J|=ℓ} Π_{j∈J} sinh²(x_j/2)`.
pub fn e_ell<T: Real>(ell: usize, x: &PositionPoint<T>) -> Cx<T> {
    scaled_e_ell(ell, x, T::zero())
}

/// `e^{−(c/2)ℓ(2n+1−ℓ)} E_ℓ(x + cρ)`, using `4 sinh²(y/2) = e^y (1 − e^{−y})²`
/// so that no factor overflows.
pub fn scaled_e_ell<T: Real>(ell: usize, x: &PositionPoint<T>, c: T) -> Cx<T> {
    let n = x.dim();
    let y = x.translated(c).entries().to_vec();
    let offset = c * T::from_f64(0.5) * T::from_i64((ell * (2 * n + 1 - ell)) as i64);
    let one = Cx::new(T::one(), T::zero());
    let mut sum = ComplexSum::new();
    for set in subsets_of(&(0..n).collect::<Vec<_>>(), ell) {
        let mut log = Cx::new(-offset, T::zero());
        let mut shape = one;
        for &j in &set {
            log = log + y[j];
            let f = one - cx::exp(-y[j]);
            shape = shape * f * f;
        }
        sum.add(cx::exp(log) * shape);
    }
    sum.total()
}

fn check_level(ell: usize, n: usize) -> Result<()> {
    if ell == 0 || ell > n {
        return Err(Error::InvalidInput(format!("level {ell} outside 1..={n}")));
    }
    Ok(())
}

/// Relative residual of the hypergeometric difference equation
/// `Σ U^cs V^cs Φ^cs_{ξ+e_{εJ}} = E_ℓ(x) Φ^cs_ξ` and its condition number.
pub fn cs_dde_residual<T: Real>(
    ell: usize,
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    k: &CouplingTriple<T>,
    plan: &TruncationPlan,
) -> Result<(f64, f64)> {
    check_level(ell, xi.dim())?;
    let coeff = |s: &SignedSubset| -> Result<Cx<T>> {
        Ok(cs_coeff_u(&s.complement(), ell - s.len(), xi, k, plan.eta)? * cs_coeff_v(s, xi, k, plan.eta)?)
    };
    let phi = |z: &SpectralPoint<T>| cs_whittaker_eval(z, x, k, plan).map(|v| v.value);
    residual_from(ell, xi, coeff, phi, e_ell(ell, x), plan)
}

/// The same residual after substituting `k^{(c)}`, translating `x → x + cρ`
/// and rescaling both sides by `e^{−(c/2)ℓ(2n+1−ℓ)} γ(k^{(c)})`. Returns the
/// residual, the condition number, and the rescaled left-hand side.
pub fn scaled_cs_dde<T: Real>(
    ell: usize,
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    c: T,
    plan: &TruncationPlan,
) -> Result<(f64, f64, Cx<T>)> {
    check_level(ell, xi.dim())?;
    let coeff = |s: &SignedSubset| -> Result<Cx<T>> {
        Ok(scaled_cs_coeff_u(&s.complement(), ell - s.len(), xi, g, c, plan.eta)?
            * scaled_cs_coeff_v(s, xi, g, c, plan.eta)?)
    };
    let phi = |z: &SpectralPoint<T>| cs_whittaker_normalized(z, x, g, c, plan).map(|v| v.value);
    let terms = dual_sum(ell, xi, coeff, phi, plan)?;
    let rhs = scaled_e_ell(ell, x, c) * cs_whittaker_normalized(xi, x, g, c, plan)?.value;
    let scale = cx::abs(rhs).to_f64();
    Ok((cx::abs(terms.total() - rhs).to_f64() / scale, terms.magnitude().to_f64() / scale, terms.total()))
}

fn dual_sum<T, C, F>(
    ell: usize,
    xi: &SpectralPoint<T>,
    coeff: C,
    phi: F,
    plan: &TruncationPlan,
) -> Result<ComplexSum<T>>
where
    T: Real,
    C: Fn(&SignedSubset) -> Result<Cx<T>> + Sync,
    F: Fn(&SpectralPoint<T>) -> Result<Cx<T>> + Sync,
{
    let subsets = SignedSubset::enumerate(xi.dim(), ell);
    for s in &subsets {
        xi.shifted(&s.shift()).check_regular(Lattice::All, plan.eta)?;
    }
    let values: Vec<Cx<T>> =
        subsets.par_iter().map(|s| Ok(coeff(s)? * phi(&xi.shifted(&s.shift()))?)).collect::<Result<_>>()?;
    Ok(values.into_iter().collect())
}

fn residual_from<T, C, F>(
    ell: usize,
    xi: &SpectralPoint<T>,
    coeff: C,
    phi: F,
    eigenvalue: Cx<T>,
    plan: &TruncationPlan,
) -> Result<(f64, f64)>
where
    T: Real,
    C: Fn(&SignedSubset) -> Result<Cx<T>> + Sync,
    F: Fn(&SpectralPoint<T>) -> Result<Cx<T>> + Sync,
{
    let terms = dual_sum(ell, xi, coeff, &phi, plan)?;
    let rhs = eigenvalue * phi(xi)?;
    let scale = cx::abs(rhs).to_f64();
    Ok((cx::abs(terms.total() - rhs).to_f64() / scale, terms.magnitude().to_f64() / scale))
}
