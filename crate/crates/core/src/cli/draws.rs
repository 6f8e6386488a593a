//! Seeded random parameters for the verification suites.
//!
//! Spectral draws have real parts in `[−0.5, 0.5]` and positive imaginary
//! parts at least `0.1` apart, so every `2ξ_j`, `ξ_j ± ξ_k` keeps a nonzero
//! imaginary part under integer shifts. Positions have all gaps
//! `x_k − x_{k+1}` and `x_n` in `[1, 2.5]`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{PositionPoint, SpectralPoint};
use crate::scalar::Cx;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn spectral<R: Rng>(rng: &mut R, n: usize) -> SpectralPoint {
    let mut im: Vec<f64> = Vec::with_capacity(n);
    while im.len() < n {
        let y = rng.gen_range(0.15..1.2);
        if im.iter().all(|&z: &f64| (z - y).abs() >= 0.1) {
            im.push(y);
        }
    }
    let entries = im.into_iter().map(|y| Cx::new(rng.gen_range(-0.5..0.5), y)).collect();
    SpectralPoint::new(entries).expect("nonempty")
}

pub fn position<R: Rng>(rng: &mut R, n: usize) -> PositionPoint {
    let mut x = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        acc += rng.gen_range(1.0..2.5);
        x[k] = acc;
    }
    PositionPoint::in_chamber(&x).expect("decreasing and positive")
}

/// Real Morse coupling in `[0, 1.5]`.
pub fn coupling<R: Rng>(rng: &mut R) -> Cx<f64> {
    Cx::new(rng.gen_range(0.0..1.5), 0.0)
}
