//! Seeded, portable randomness. ChaCha8 is counter-based, so a `(seed,
//! stream)` pair names an identical sequence on every platform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::math;

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in the open interval (0, 1).
fn open01<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Symmetric Dirichlet(alpha) draw of length `n`.
pub(crate) fn dirichlet<R: Rng>(rng: &mut R, n: usize, alpha: f64) -> Vec<f64> {
    let mut g: Vec<f64> = if alpha == 1.0 {
        (0..n).map(|_| -math::ln(open01(rng))).collect()
    } else {
        let gamma = Gamma::new(alpha, 1.0).expect("alpha > 0");
        (0..n).map(|_| gamma.sample(rng)).collect()
    };
    let total: f64 = g.iter().sum();
    if total > 0.0 {
        g.iter_mut().for_each(|v| *v /= total);
    } else {
        // every gamma draw underflowed (tiny alpha): put the mass on one cell
        let k = rng.random_range(0..n);
        g.iter_mut().enumerate().for_each(|(i, v)| *v = if i == k { 1.0 } else { 0.0 });
    }
    g
}

pub(crate) fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.random()
}
