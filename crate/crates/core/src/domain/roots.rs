//! The two integer root families: the Toda perturbation set S and the
//! positive roots R₊ of type BCₙ.

use crate::scalar::{Cx, Real};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub vector: Vec<i32>,
    /// `<α, ρ>`.
    pub height: u32,
    /// `<α, α>`.
    pub norm2: i32,
}

impl Root {
    fn new(vector: Vec<i32>) -> Self {
        let n = vector.len();
        let height: i32 = vector.iter().enumerate().map(|(j, &v)| v * (n - j) as i32).sum();
        let norm2 = vector.iter().map(|v| v * v).sum();
        Root { vector, height: height as u32, norm2 }
    }
}

fn unit(n: usize, j: usize, scale: i32) -> Vec<i32> {
    let mut v = vec![0; n];
    v[j] = scale;
    v
}

/// Perturbation vectors and positive roots for rank `n`.
#[derive(Clone, Debug)]
pub struct RootData {
    pub n: usize,
    /// `e_1 - e_2, ..., e_{n-1} - e_n, e_n, 2e_n`, in this order.
    pub toda: Vec<Root>,
    /// `e_j`, `2e_j` for each j, then `e_j - e_k`, `e_j + e_k` for j < k.
    pub positive: Vec<Root>,
}

impl RootData {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rank must be positive");
        let mut toda = Vec::with_capacity(n + 1);
        for j in 0..n - 1 {
            let mut v = unit(n, j, 1);
            v[j + 1] = -1;
            toda.push(Root::new(v));
        }
        toda.push(Root::new(unit(n, n - 1, 1)));
        toda.push(Root::new(unit(n, n - 1, 2)));

        let mut positive = Vec::with_capacity(n * (n + 1));
        for j in 0..n {
            positive.push(Root::new(unit(n, j, 1)));
            positive.push(Root::new(unit(n, j, 2)));
        }
        for j in 0..n {
            for k in j + 1..n {
                let mut minus = unit(n, j, 1);
                minus[k] = -1;
                positive.push(Root::new(minus));
                let mut plus = unit(n, j, 1);
                plus[k] = 1;
                positive.push(Root::new(plus));
            }
        }
        RootData { n, toda, positive }
    }

    /// Toda weights aligned with [`RootData::toda`]: 2 for the differences,
    /// `g` for `e_n` and 1/4 for `2e_n`.
    pub fn toda_weights<T: Real>(&self, g: Cx<T>) -> Vec<Cx<T>> {
        let mut w = vec![Cx::new(T::from_f64(2.0), T::zero()); self.n - 1];
        w.push(g);
        w.push(Cx::new(T::from_f64(0.25), T::zero()));
        w
    }

    /// Coefficients of `ν` in the basis S, with the `2e_n` component zero.
    /// Every dominant ν decomposes this way with nonnegative coefficients.
    pub fn toda_decomposition(&self, nu: &[i32]) -> Vec<i64> {
        let mut partial = 0i64;
        let mut coeffs = Vec::with_capacity(self.n + 1);
        for &v in nu {
            partial += v as i64;
            coeffs.push(partial);
        }
        coeffs.push(0);
        coeffs
    }
}

/// Convert the Hamiltonian convention `H = -½ Σ∂² + ... + a e^{-x_n} + b e^{-2x_n}`
/// to the coupling `g` used throughout (with `b = 1/8`).
pub fn coupling_from_hamiltonian(a: f64) -> f64 {
    2.0 * a
}

/// The Morse coefficient `a` of the Hamiltonian for a coupling `g`.
pub fn hamiltonian_from_coupling(g: f64) -> f64 {
    g / 2.0
}
