//! Spectral and position vectors.

use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};

/// Distance threshold to excluded lattices used when nothing else is given.
pub const DEFAULT_ETA: f64 = 1e-9;

/// Wave vector ξ ∈ ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint<T: Real = f64> {
    entries: Vec<Cx<T>>,
}

/// Which family of integer conditions a regularity check excludes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    /// `2ξ_j ∉ ℤ`, `ξ_j ± ξ_k ∉ ℤ`.
    All,
    /// Only the positive integers.
    Positive,
    /// Only the non-positive integers.
    NonPositive,
}

impl<T: Real> SpectralPoint<T> {
    pub fn new(entries: Vec<Cx<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("spectral point needs n >= 1 entries".into()));
        }
        if !entries.iter().all(|z| cx::is_finite(*z)) {
            return Err(Error::InvalidInput("spectral point has non-finite entries".into()));
        }
        Ok(SpectralPoint { entries })
    }

    pub fn from_c64(entries: &[Cx<f64>]) -> Result<Self> {
        Self::new(entries.iter().map(|z| cx::from_c64(*z)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.entries
    }

    pub fn to_c64(&self) -> Vec<Cx<f64>> {
        self.entries.iter().map(|z| cx::to_c64(*z)).collect()
    }

    /// `self + shift` for an integer shift vector.
    pub fn shifted(&self, shift: &[i32]) -> Self {
        let entries = self.entries.iter().zip(shift).map(|(z, &s)| *z + T::from_i64(s as i64)).collect();
        SpectralPoint { entries }
    }

    pub fn dot(&self, other: &[Cx<T>]) -> Cx<T> {
        let mut acc = Cx::new(T::zero(), T::zero());
        for (a, b) in self.entries.iter().zip(other) {
            acc = acc + *a * *b;
        }
        acc
    }

    /// `<ξ, ρ>` with ρ = (n, n-1, ..., 1).
    pub fn dot_rho(&self) -> Cx<T> {
        let n = self.dim();
        let mut acc = Cx::new(T::zero(), T::zero());
        for (j, z) in self.entries.iter().enumerate() {
            acc = acc + *z * T::from_i64((n - j) as i64);
        }
        acc
    }

    /// The linear forms `2ξ_j`, `ξ_j + ξ_k`, `ξ_j - ξ_k` (j < k), labelled.
    fn integrality_forms(&self) -> Vec<(String, Cx<T>)> {
        let n = self.dim();
        let two = T::from_f64(2.0);
        let mut forms = Vec::with_capacity(n * n);
        for j in 0..n {
            forms.push((format!("2xi_{}", j + 1), self.entries[j] * two));
        }
        for j in 0..n {
            for k in j + 1..n {
                let (a, b) = (self.entries[j], self.entries[k]);
                forms.push((format!("xi_{} + xi_{}", j + 1, k + 1), a + b));
                forms.push((format!("xi_{} - xi_{}", j + 1, k + 1), a - b));
            }
        }
        forms
    }

    /// Smallest distance of the integrality forms to the excluded lattice,
    /// with the label of the form attaining it.
    pub fn regularity_margin(&self, lattice: Lattice) -> (f64, String) {
        let mut best = (f64::INFINITY, String::new());
        for (label, z) in self.integrality_forms() {
            let d = match lattice {
                Lattice::All => cx::dist_to_integer(z),
                Lattice::NonPositive => cx::dist_to_nonpositive_integer(z),
                Lattice::Positive => {
                    let k = z.re.round().max(T::one());
                    cx::abs(Cx::new(z.re - k, z.im)).to_f64()
                }
            };
            if d < best.0 {
                best = (d, label);
            }
        }
        best
    }

    /// Fails with `IrregularSpectral` when some form lies within `eta` of
    /// the excluded lattice.
    pub fn check_regular(&self, lattice: Lattice, eta: f64) -> Result<()> {
        let (d, label) = self.regularity_margin(lattice);
        if d <= eta {
            return Err(Error::IrregularSpectral(format!(
                "{label} is within {d:e} of an excluded integer ({lattice:?})"
            )));
        }
        Ok(())
    }

    pub fn is_regular(&self, eta: f64) -> bool {
        self.check_regular(Lattice::All, eta).is_ok()
    }
}

impl SpectralPoint<f64> {
    pub fn cast<T: Real>(&self) -> SpectralPoint<T> {
        SpectralPoint { entries: self.entries.iter().map(|z| cx::from_c64(*z)).collect() }
    }
}

/// Particle positions x ∈ ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionPoint<T: Real = f64> {
    entries: Vec<Cx<T>>,
    chamber: bool,
}

impl<T: Real> PositionPoint<T> {
    pub fn new(entries: Vec<Cx<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("position needs n >= 1 entries".into()));
        }
        if !entries.iter().all(|z| cx::is_finite(*z)) {
            return Err(Error::InvalidInput("position has non-finite entries".into()));
        }
        Ok(PositionPoint { entries, chamber: false })
    }

    pub fn real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| cx::real(x)).collect())
    }

    /// A point asserted to lie in the open chamber `x_1 > ... > x_n > 0`.
    pub fn in_chamber(entries: &[f64]) -> Result<Self> {
        for (j, &x) in entries.iter().enumerate() {
            let next = entries.get(j + 1).copied().unwrap_or(0.0);
            if !(x > next) {
                return Err(Error::ChamberViolation(format!("x_{} = {x} is not larger than {next}", j + 1)));
            }
        }
        let mut p = Self::real(entries)?;
        p.chamber = true;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.entries
    }

    pub fn is_chamber(&self) -> bool {
        self.chamber
    }

    /// Re-validates the chamber condition on the real parts.
    pub fn check_chamber(&self) -> Result<()> {
        let n = self.dim();
        for j in 0..n {
            if self.entries[j].im != T::zero() {
                return Err(Error::ChamberViolation(format!("x_{} is not real", j + 1)));
            }
            let next = if j + 1 < n { self.entries[j + 1].re } else { T::zero() };
            if !(self.entries[j].re > next) {
                return Err(Error::ChamberViolation(format!("x_{} does not exceed its successor", j + 1)));
            }
        }
        Ok(())
    }

    /// Consecutive gaps `x_k - x_{k+1}` with `x_{n+1} = 0`.
    pub fn gaps(&self) -> Vec<Cx<T>> {
        let n = self.dim();
        (0..n).map(|k| if k + 1 < n { self.entries[k] - self.entries[k + 1] } else { self.entries[k] }).collect()
    }

    /// `x + c ρ`.
    pub fn translated(&self, c: T) -> Self {
        let n = self.dim();
        let entries = self.entries.iter().enumerate().map(|(j, z)| *z + c * T::from_i64((n - j) as i64)).collect();
        PositionPoint { entries, chamber: self.chamber }
    }

    pub fn to_c64(&self) -> Vec<Cx<f64>> {
        self.entries.iter().map(|z| cx::to_c64(*z)).collect()
    }
}

impl PositionPoint<f64> {
    pub fn cast<T: Real>(&self) -> PositionPoint<T> {
        PositionPoint { entries: self.entries.iter().map(|z| cx::from_c64(*z)).collect(), chamber: self.chamber }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(v: &[(f64, f64)]) -> SpectralPoint {
        SpectralPoint::new(v.iter().map(|&(a, b)| Cx::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn regularity_classification() {
        assert!(xi(&[(0.37, 0.11), (0.83, -0.05)]).is_regular(DEFAULT_ETA));
        assert!(!xi(&[(0.5, 0.0), (0.2, 0.1)]).is_regular(DEFAULT_ETA));
        assert!(!xi(&[(0.7, 0.1), (0.3, -0.1)]).is_regular(DEFAULT_ETA));
        // 2ξ_1 = 1 is excluded from the positive side only
        let p = xi(&[(0.5, 0.0), (0.2, 0.3)]);
        assert!(p.check_regular(Lattice::NonPositive, DEFAULT_ETA).is_ok());
        assert!(p.check_regular(Lattice::Positive, DEFAULT_ETA).is_err());
        let q = xi(&[(-1.0, 0.0), (0.2, 0.3)]);
        assert!(q.check_regular(Lattice::Positive, DEFAULT_ETA).is_ok());
        assert!(q.check_regular(Lattice::NonPositive, DEFAULT_ETA).is_err());
    }

    #[test]
    fn empty_points_are_rejected() {
        assert!(SpectralPoint::<f64>::new(vec![]).is_err());
        assert!(PositionPoint::<f64>::real(&[]).is_err());
    }

    #[test]
    fn chamber_flag() {
        assert!(PositionPoint::<f64>::in_chamber(&[3.0, 2.0, 0.5]).unwrap().is_chamber());
        assert!(PositionPoint::<f64>::in_chamber(&[3.0, 3.0]).is_err());
        assert!(PositionPoint::<f64>::in_chamber(&[1.0, -0.5]).is_err());
        let p = PositionPoint::<f64>::in_chamber(&[2.0, 1.0]).unwrap().translated(1.5);
        assert_eq!(p.entries()[0].re, 5.0);
        assert_eq!(p.entries()[1].re, 2.5);
        assert!(p.check_chamber().is_ok());
    }

    #[test]
    fn gaps_end_at_zero() {
        let p = PositionPoint::<f64>::real(&[4.0, 1.5]).unwrap();
        let g: Vec<f64> = p.gaps().iter().map(|z| z.re).collect();
        assert_eq!(g, vec![2.5, 1.5]);
    }
}
