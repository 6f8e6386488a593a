//! Signed permutations `w = (σ, ε)` acting by `(wξ)_j = ε_j ξ_{σ(j)}`.

use std::fmt;

use crate::scalar::{Cx, Real};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    /// Zero-based one-line notation.
    sigma: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(sigma: Vec<usize>, signs: Vec<i8>) -> Option<Self> {
        let n = sigma.len();
        if signs.len() != n || signs.iter().any(|&s| s != 1 && s != -1) {
            return None;
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return None;
            }
            seen[s] = true;
        }
        Some(SignedPermutation { sigma, signs })
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation { sigma: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(j, &s)| j == s) && self.signs.iter().all(|&e| e == 1)
    }

    pub fn act<T: Real>(&self, xi: &[Cx<T>]) -> Vec<Cx<T>> {
        self.sigma.iter().zip(&self.signs).map(|(&s, &e)| if e > 0 { xi[s] } else { -xi[s] }).collect()
    }

    /// The product `self * other`, i.e. `(self * other) ξ = self(other ξ)`.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let sigma = self.sigma.iter().map(|&s| other.sigma[s]).collect();
        let signs = self.sigma.iter().zip(&self.signs).map(|(&s, &e)| e * other.signs[s]).collect();
        SignedPermutation { sigma, signs }
    }

    pub fn inverse(&self) -> SignedPermutation {
        let n = self.dim();
        let mut sigma = vec![0; n];
        let mut signs = vec![1; n];
        for (j, (&s, &e)) in self.sigma.iter().zip(&self.signs).enumerate() {
            sigma[s] = j;
            signs[s] = e;
        }
        SignedPermutation { sigma, signs }
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, (&s, &e)) in self.sigma.iter().zip(&self.signs).enumerate() {
            if j > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", if e > 0 { '+' } else { '-' }, s + 1)?;
        }
        write!(f, ")")
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All `2ⁿ n!` signed permutations: permutations in lexicographic order,
/// and for each the sign vectors as a binary counter (bit j set means
/// `ε_{j+1} = -1`). The identity comes first.
pub fn group_enumerate(n: usize) -> Vec<SignedPermutation> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::with_capacity((1usize << n) * (1..=n).product::<usize>());
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        for mask in 0u32..(1u32 << n) {
            let signs = (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect();
            out.push(SignedPermutation { sigma: perm.clone(), signs });
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}
