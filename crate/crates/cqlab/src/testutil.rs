//! Shared helpers for unit tests.

use nalgebra::Complex;

use crate::operator::{CMat, DensityMatrix, HermitianOperator};
use crate::rng::Stream;

pub fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = Stream::new(seed, 0);
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex::new(rng.next_normal(), rng.next_normal())
    });
    HermitianOperator::hermitian_part(g)
}

pub fn random_psd_rank(dim: usize, rank: usize, seed: u64) -> HermitianOperator {
    let mut rng = Stream::new(seed, 1);
    let g = CMat::from_fn(dim, rank, |_, _| {
        Complex::new(rng.next_normal(), rng.next_normal())
    });
    HermitianOperator::hermitian_part(&g * g.adjoint())
}

pub fn random_state(dim: usize, seed: u64) -> DensityMatrix {
    let h = random_psd_rank(dim, dim, seed.wrapping_mul(0x515_7eed).wrapping_add(seed));
    DensityMatrix::new(h.scale(1.0 / h.trace())).expect("normalized Gram matrix is a state")
}

pub fn max_entry_diff(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    (a.matrix() - b.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
