//! Difference operators in the spectral variable and their residue probes.

use rayon::prelude::*;

use crate::connection::whittaker_eval;
use crate::domain::{Lattice, PositionPoint, SpectralPoint};
use crate::error::{Error, Result};
use crate::hc_series::{phi_eval, TruncationPlan};
use crate::scalar::{cx, Cx, Real};
use crate::summation::ComplexSum;

/// `εJ`: a subset `J ⊂ {1..n}` with a sign attached to each member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedSubset {
    n: usize,
    /// Zero-based, increasing.
    members: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedSubset {
    pub fn new(n: usize, members: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if members.len() != signs.len() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("signed subset needs one sign in {+1,-1} per member".into()));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) || members.iter().any(|&j| j >= n) {
            return Err(Error::InvalidInput(format!("members {members:?} are not increasing indices below {n}")));
        }
        Ok(SignedSubset { n, members, signs })
    }

    pub fn empty(n: usize) -> Self {
        SignedSubset { n, members: Vec::new(), signs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `J^c` in increasing order.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|j| !self.members.contains(j)).collect()
    }

    /// `e_{εJ} = Σ_{j∈J} ε_j e_j`.
    pub fn shift(&self) -> Vec<i32> {
        let mut v = vec![0; self.n];
        for (&j, &e) in self.members.iter().zip(&self.signs) {
            v[j] = e as i32;
        }
        v
    }

    /// All signed subsets of `{1..n}` with `|J| ≤ max_len`, ordered by size,
    /// then subsets lexicographically, then signs as a binary counter.
    pub fn enumerate(n: usize, max_len: usize) -> Vec<SignedSubset> {
        let mut out = Vec::new();
        for size in 0..=max_len.min(n) {
            for members in subsets_of(&(0..n).collect::<Vec<_>>(), size) {
                for mask in 0u32..(1 << size) {
                    let signs = (0..size).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                    out.push(SignedSubset { n, members: members.clone(), signs });
                }
            }
        }
        out
    }
}

/// `k`-element subsets of `set`, lexicographic in positions.
pub(crate) fn subsets_of(set: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > set.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| set[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == set.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for t in i..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

fn nonzero<T: Real>(z: Cx<T>, eta: f64, label: impl FnOnce() -> String) -> Result<Cx<T>> {
    if cx::abs(z).to_f64() <= eta {
        return Err(Error::CoefficientPole { factor: label() });
    }
    Ok(z)
}

/// The product shared by V and U: the signed members `(i, ε_i)` against the
/// unsigned partner indices `rest`.
fn block<T: Real>(xi: &[Cx<T>], signed: &[(usize, i8)], rest: &[usize], g: Cx<T>, eta: f64) -> Result<Cx<T>> {
    let half = T::from_f64(0.5);
    let two = T::from_f64(2.0);
    let one = T::one();
    let mut num = Cx::new(one, T::zero());
    let mut den = Cx::new(one, T::zero());
    for &(i, e) in signed {
        let z = xi[i];
        let ez = if e > 0 { z } else { -z };
        num = num * (g + ez + half);
        let e_t = T::from_i64(e as i64);
        den = den * nonzero(z * two, eta, || format!("2xi_{}", i + 1))?;
        den = den * nonzero(z * two + e_t, eta, || format!("2xi_{} {} 1", i + 1, sign_char(e)))?;
        for &k in rest {
            den = den * nonzero(z * z - xi[k] * xi[k], eta, || format!("xi_{}^2 - xi_{}^2", i + 1, k + 1))?;
        }
    }
    for (a, &(i, e)) in signed.iter().enumerate() {
        for &(j, f) in &signed[a + 1..] {
            let s = signed_xi(xi[i], e) + signed_xi(xi[j], f);
            let label = || format!("{}xi_{} {}xi_{}", sign_char(e), i + 1, sign_char(f), j + 1);
            den = den * nonzero(s, eta, label)?;
            den = den * nonzero(s + one, eta, || format!("1 {}", label()))?;
        }
    }
    Ok(num / den)
}

fn signed_xi<T: Real>(z: Cx<T>, e: i8) -> Cx<T> {
    if e > 0 {
        z
    } else {
        -z
    }
}

fn sign_char(e: i8) -> char {
    if e > 0 {
        '+'
    } else {
        '-'
    }
}

/// `V_{εJ}(ξ; g)`.
pub fn coeff_v<T: Real>(eps_j: &SignedSubset, xi: &SpectralPoint<T>, g: Cx<T>, eta: f64) -> Result<Cx<T>> {
    check_dim(eps_j.dim(), xi.dim())?;
    let signed: Vec<(usize, i8)> = eps_j.members.iter().copied().zip(eps_j.signs.iter().copied()).collect();
    block(xi.entries(), &signed, &eps_j.complement(), g, eta)
}

/// `U_{K,p}(ξ; g)` with `K` given by zero-based increasing indices.
pub fn coeff_u<T: Real>(k_set: &[usize], p: usize, xi: &SpectralPoint<T>, g: Cx<T>, eta: f64) -> Result<Cx<T>> {
    if p > k_set.len() {
        return Err(Error::InvalidInput(format!("p = {p} exceeds |K| = {}", k_set.len())));
    }
    if k_set.iter().any(|&k| k >= xi.dim()) || k_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!("K = {k_set:?} is not an increasing index set")));
    }
    let mut sum = ComplexSum::new();
    for pos in subsets_of(&(0..k_set.len()).collect::<Vec<_>>(), p) {
        let members: Vec<usize> = pos.iter().map(|&i| k_set[i]).collect();
        let rest: Vec<usize> = k_set.iter().copied().filter(|k| !members.contains(k)).collect();
        for mask in 0u32..(1 << p) {
            let signed: Vec<(usize, i8)> =
                members.iter().enumerate().map(|(b, &i)| (i, if mask >> b & 1 == 1 { -1 } else { 1 })).collect();
            sum.add(block(xi.entries(), &signed, &rest, g, eta)?);
        }
    }
    let sign = if (p * (p + 1) / 2).is_multiple_of(2) { T::one() } else { -T::one() };
    Ok(sum.total() * sign)
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

fn check_level(ell: usize, n: usize) -> Result<()> {
    if ell == 0 || ell > n {
        return Err(Error::InvalidInput(format!("level {ell} outside 1..={n}")));
    }
    Ok(())
}

/// The coefficients `U_{J^c, ℓ−|J|} V_{εJ}` of `D_{ξ,ℓ}` with their shifts.
pub fn dual_terms<T: Real>(
    ell: usize,
    xi: &SpectralPoint<T>,
    g: Cx<T>,
    eta: f64,
) -> Result<Vec<(SignedSubset, Cx<T>)>> {
    let n = xi.dim();
    check_level(ell, n)?;
    SignedSubset::enumerate(n, ell)
        .into_iter()
        .map(|s| {
            let u = coeff_u(&s.complement(), ell - s.len(), xi, g, eta)?;
            let v = coeff_v(&s, xi, g, eta)?;
            Ok((s, u * v))
        })
        .collect()
}

/// `(D_{ξ,ℓ} f)(ξ)` together with `Σ |terms|`.
pub fn apply_d_with_magnitude<T, F>(ell: usize, f: F, xi: &SpectralPoint<T>, g: Cx<T>, eta: f64) -> Result<(Cx<T>, f64)>
where
    T: Real,
    F: Fn(&SpectralPoint<T>) -> Result<Cx<T>> + Sync,
{
    let terms = dual_terms(ell, xi, g, eta)?;
    let values: Vec<Cx<T>> =
        terms.par_iter().map(|(s, coeff)| Ok(*coeff * f(&xi.shifted(&s.shift()))?)).collect::<Result<_>>()?;
    let sum: ComplexSum<T> = values.into_iter().collect();
    Ok((sum.total(), sum.magnitude().to_f64()))
}

/// `(D_{ξ,ℓ} f)(ξ) = Σ_{|J|≤ℓ, ε} U_{J^c,ℓ−|J|}(ξ) V_{εJ}(ξ) f(ξ + e_{εJ})`.
pub fn apply_d<T, F>(ell: usize, f: F, xi: &SpectralPoint<T>, g: Cx<T>, eta: f64) -> Result<Cx<T>>
where
    T: Real,
    F: Fn(&SpectralPoint<T>) -> Result<Cx<T>> + Sync,
{
    apply_d_with_magnitude(ell, f, xi, g, eta).map(|r| r.0)
}

/// `e^{x_1 + ... + x_ℓ}`.
pub fn dual_eigenvalue<T: Real>(ell: usize, x: &PositionPoint<T>) -> Cx<T> {
    let mut s = Cx::new(T::zero(), T::zero());
    for z in &x.entries()[..ell] {
        s = s + *z;
    }
    cx::exp(s)
}

/// Relative residual of `D_{ξ,ℓ} Φ_·(x) = e^{x_1+…+x_ℓ} Φ_ξ(x)` and the
/// condition number `Σ|terms| / |rhs|`.
pub fn dde_residual<T: Real>(
    ell: usize,
    xi: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    plan: &TruncationPlan,
) -> Result<(f64, f64)> {
    check_dim(xi.dim(), x.dim())?;
    check_level(ell, xi.dim())?;
    for s in SignedSubset::enumerate(xi.dim(), ell) {
        xi.shifted(&s.shift()).check_regular(Lattice::All, plan.eta)?;
    }
    let phi = |z: &SpectralPoint<T>| whittaker_eval(z, x, g, plan).map(|v| v.value);
    let (lhs, magnitude) = apply_d_with_magnitude(ell, phi, xi, g, plan.eta)?;
    let rhs = dual_eigenvalue(ell, x) * phi(xi)?;
    let scale = cx::abs(rhs).to_f64();
    Ok((cx::abs(lhs - rhs).to_f64() / scale, magnitude / scale))
}

/// The hyperplane family probed by [`residue_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hyperplane {
    /// `2ξ_1 = m`, approached along `e_1`.
    Single(u32),
    /// `ξ_1 + ξ_2 = m`, approached along `(e_1 + e_2)/2`.
    Pair(u32),
}

impl Hyperplane {
    pub fn order(self) -> u32 {
        match self {
            Hyperplane::Single(m) | Hyperplane::Pair(m) => m,
        }
    }

    /// Value of the defining linear form minus `m`.
    pub fn defect<T: Real>(self, xi: &SpectralPoint<T>) -> Cx<T> {
        let z = xi.entries();
        match self {
            Hyperplane::Single(m) => z[0] * T::from_f64(2.0) - T::from_i64(m as i64),
            Hyperplane::Pair(m) => z[0] + z[1] - T::from_i64(m as i64),
        }
    }

    /// `ξ̂ + δ·normal`, with the normal scaled so the defect equals `2δ`
    /// (single) or `δ` (pair).
    pub fn offset<T: Real>(self, base: &SpectralPoint<T>, delta: T) -> Result<SpectralPoint<T>> {
        let mut z = base.entries().to_vec();
        match self {
            Hyperplane::Single(_) => z[0] = z[0] + delta,
            Hyperplane::Pair(_) => {
                let h = delta * T::from_f64(0.5);
                z[0] = z[0] + h;
                z[1] = z[1] + h;
            }
        }
        SpectralPoint::new(z)
    }
}

/// Which function a residue probe multiplies by the hyperplane defect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeTarget {
    /// The W-symmetrized `Φ_ξ`.
    Symmetrized,
    /// The fundamental series `φ_ξ`.
    Fundamental,
}

/// Outcome of a residue probe.
#[derive(Clone, Debug)]
pub struct ResidueProbe {
    /// Least-squares slope of `ln |r(δ)|` against `ln δ`.
    pub slope: f64,
    /// Richardson extrapolation of `r(δ)` to `δ = 0`.
    pub extrapolated: Cx<f64>,
    /// `|f|` at the largest offset.
    pub reference: f64,
    pub deltas: Vec<f64>,
    pub samples: Vec<Cx<f64>>,
    /// Cancellation condition number at the smallest offset.
    pub condition: f64,
}

/// Richardson table for nodes `δ, δ/2, δ/4, …`, eliminating one power of δ
/// per column. Returns the last diagonal entry.
pub fn richardson_halving(samples: &[Cx<f64>]) -> Cx<f64> {
    let mut col = samples.to_vec();
    let mut factor = 1.0;
    while col.len() > 1 {
        factor *= 2.0;
        col = col.windows(2).map(|w| (w[1] * factor - w[0]) / (factor - 1.0)).collect();
    }
    col[0]
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Probes `r(δ) = defect(ξ) · f(ξ)` with `ξ = ξ̂ + δ·normal` on the halving
/// nodes `δ_0, δ_0/2, …` (`nodes` of them) in the arithmetic of `T`.
#[allow(clippy::too_many_arguments)]
pub fn residue_probe<T: Real>(
    plane: Hyperplane,
    base: &SpectralPoint<T>,
    x: &PositionPoint<T>,
    g: Cx<T>,
    delta0: f64,
    nodes: usize,
    target: ProbeTarget,
    plan: &TruncationPlan,
) -> Result<ResidueProbe> {
    check_dim(base.dim(), x.dim())?;
    if matches!(plane, Hyperplane::Pair(_)) && base.dim() < 2 {
        return Err(Error::InvalidInput("pair hyperplanes need n >= 2".into()));
    }
    if plane.order() == 0 || nodes < 2 || !(delta0 > 0.0) {
        return Err(Error::InvalidInput("residue probes need m > 0, two or more nodes and delta > 0".into()));
    }
    let on_plane = cx::abs(plane.defect(base)).to_f64();
    if on_plane > 1e-12 {
        return Err(Error::InvalidInput(format!("base point is {on_plane:e} away from the hyperplane")));
    }
    let deltas: Vec<f64> = (0..nodes).map(|i| delta0 / f64::powi(2.0, i as i32)).collect();
    let mut samples = Vec::with_capacity(nodes);
    let mut reference = 0.0;
    let mut condition = 0.0;
    for (i, &d) in deltas.iter().enumerate() {
        let xi = plane.offset(base, T::from_f64(d))?;
        let (value, cond) = match target {
            ProbeTarget::Symmetrized => {
                let v = whittaker_eval(&xi, x, g, plan)?;
                (v.value, v.condition)
            }
            ProbeTarget::Fundamental => {
                let v = phi_eval(&xi, x, g, plan)?;
                (v.value, 1.0)
            }
        };
        if i == 0 {
            reference = cx::abs(value).to_f64();
        }
        condition = cond;
        samples.push(cx::to_c64(plane.defect(&xi) * value));
    }
    let budget = plan.target;
    if condition * T::epsilon().to_f64() > budget {
        return Err(Error::PrecisionExhausted { condition, bits: T::BITS });
    }
    let magnitudes: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    Ok(ResidueProbe {
        slope: log_log_slope(&deltas, &magnitudes),
        extrapolated: richardson_halving(&samples),
        reference,
        deltas,
        samples,
        condition,
    })
}
