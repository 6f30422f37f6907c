//! Seeded random instances for property checks and the verification suite.
//!
//! Coefficients are multiples of 1/8 in [-1, 1], so the same instance is
//! exact in both scalar modes.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chaos::{ChaosDecomposition, TruthTable};
use crate::kernel::{IndexTuple, SymmetricKernel};
use crate::scalar::Scalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dyadic<S: Scalar>(rng: &mut impl Rng) -> S {
    let k = loop {
        let k: i64 = rng.gen_range(-8..=8);
        if k != 0 {
            break k;
        }
    };
    S::from_i64(k) / S::from_i64(8)
}

/// A kernel of the given order on coordinates `1..=support` with at most
/// `max_entries` nonzero classes (at least one when `order <= support`).
pub fn random_kernel<S: Scalar>(
    rng: &mut impl Rng,
    order: usize,
    support: usize,
    max_entries: usize,
) -> SymmetricKernel<S> {
    if order > support || max_entries == 0 {
        return SymmetricKernel::zero(order);
    }
    let count = rng.gen_range(1..=max_entries);
    let entries: Vec<(IndexTuple, S)> = (0..count)
        .map(|_| {
            let mut t: IndexTuple = sample(rng, support, order).into_iter().map(|c| c as u32 + 1).collect();
            t.sort_unstable();
            (t, dyadic(rng))
        })
        .collect();
    // later draws of the same class overwrite earlier ones
    let mut map = std::collections::BTreeMap::new();
    for (t, v) in entries {
        map.insert(t, v);
    }
    SymmetricKernel::new(order, map).expect("sampled tuples are canonical")
}

/// A decomposition on `d` coordinates with kernels of orders `1..=max_order`.
pub fn random_decomposition<S: Scalar>(
    rng: &mut impl Rng,
    d: usize,
    max_order: usize,
    centered: bool,
) -> ChaosDecomposition<S> {
    let mean = if centered { S::zero() } else { dyadic(rng) };
    let mut kernels = Vec::new();
    for q in 1..=max_order.min(d) {
        if rng.gen_bool(0.8) {
            kernels.push(random_kernel(rng, q, d, 4));
        }
    }
    ChaosDecomposition::new(d, mean, kernels).expect("support within d")
}

/// A table of independent dyadic values.
pub fn random_table<S: Scalar>(rng: &mut impl Rng, d: usize) -> TruthTable<S> {
    TruthTable::new(d, (0..1usize << d).map(|_| dyadic(rng)).collect()).expect("length 2^d")
}
