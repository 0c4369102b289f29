//! Seeded generation of random test inputs for the verification suites.
//!
//! Everything here is deterministic in the seed (see [`crate::rng`] for the
//! pinned generator), so randomized suites are reproducible run to run and
//! across reimplementations.

use nalgebra::DMatrix;

use crate::objective::SplitPair;
use crate::rng::{NormalStream, SplitMix64};
use crate::symmat::SymMatrix;

/// Random positive definite matrix: a full-rank Gram matrix plus `0.1 I`,
/// which bounds the smallest eigenvalue away from zero and keeps condition
/// numbers at desk scale (well under `1e6`).
pub fn random_pd(n: usize, seed: u64) -> SymMatrix {
    &SymMatrix::random_psd(n, n, 1.0, seed).expect("full rank is valid")
        + &SymMatrix::identity(n).scale(0.1)
}

/// Random square matrix with standard-normal entries, filled row-major.
pub fn random_square(n: usize, seed: u64) -> DMatrix<f64> {
    let mut stream = NormalStream::new(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = stream.next_normal();
        }
    }
    m
}

/// Random split pair with dependent parts of the given ranks (rank 0 gives a
/// zero dependent part) and positive definite independent parts.
pub fn random_pair(n: usize, rank1: usize, rank2: usize, seed: u64) -> SplitPair {
    let mut seeds = SplitMix64::new(seed);
    let p1d = SymMatrix::random_psd(n, rank1, 1.0, seeds.next_seed()).expect("rank within 0..=n");
    let p1i = random_pd(n, seeds.next_seed());
    let p2d = SymMatrix::random_psd(n, rank2, 1.0, seeds.next_seed()).expect("rank within 0..=n");
    let p2i = random_pd(n, seeds.next_seed());
    SplitPair::new(p1d, p1i, p2d, p2i).expect("construction yields a valid pair")
}

/// Seeded corpus of `count` pairs cycling through `dims`, with dependent-part
/// ranks drawn uniformly from `{0, ..., n}` per pair.
pub fn pair_corpus(count: usize, dims: &[usize], seed: u64) -> Vec<SplitPair> {
    assert!(!dims.is_empty(), "dims must be nonempty");
    let mut seeds = SplitMix64::new(seed);
    (0..count)
        .map(|k| {
            let n = dims[k % dims.len()];
            let rank1 = (seeds.next_u64() % (n as u64 + 1)) as usize;
            let rank2 = (seeds.next_u64() % (n as u64 + 1)) as usize;
            random_pair(n, rank1, rank2, seeds.next_seed())
        })
        .collect()
}
