//! Compensated (Neumaier) summation for real and complex accumulators.

use crate::scalar::{Cx, Real};

#[derive(Clone, Copy, Debug)]
pub struct NeumaierSum<T: Real> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for NeumaierSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> NeumaierSum<T> {
    pub fn new() -> Self {
        NeumaierSum { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Complex accumulator that also tracks the sum of magnitudes, so callers
/// can report a cancellation condition number.
#[derive(Clone, Copy, Debug)]
pub struct ComplexSum<T: Real> {
    re: NeumaierSum<T>,
    im: NeumaierSum<T>,
    abs: NeumaierSum<T>,
}

impl<T: Real> Default for ComplexSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ComplexSum<T> {
    pub fn new() -> Self {
        ComplexSum { re: NeumaierSum::new(), im: NeumaierSum::new(), abs: NeumaierSum::new() }
    }

    pub fn add(&mut self, z: Cx<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
        self.abs.add(crate::scalar::cx::abs(z));
    }

    pub fn total(&self) -> Cx<T> {
        Cx::new(self.re.total(), self.im.total())
    }

    /// Sum of the magnitudes of all added terms.
    pub fn magnitude(&self) -> T {
        self.abs.total()
    }

    /// `sum |term| / |sum term|`; infinite when the sum vanishes exactly.
    pub fn condition(&self) -> f64 {
        let t = crate::scalar::cx::abs(self.total()).to_f64();
        let m = self.magnitude().to_f64();
        if m == 0.0 {
            1.0
        } else if t == 0.0 {
            f64::INFINITY
        } else {
            m / t
        }
    }
}

impl<T: Real> FromIterator<Cx<T>> for ComplexSum<T> {
    fn from_iter<I: IntoIterator<Item = Cx<T>>>(iter: I) -> Self {
        let mut s = ComplexSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}
