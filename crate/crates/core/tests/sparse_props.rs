use std::collections::BTreeSet;

use malliavin_stein::chaos::ChaosDecomposition;
use malliavin_stein::sparse::{
    fractional_product, loglog_slope, max_star_count, multilinear_indicator, multilinear_kernel, sharp_count,
    star_count, star_counts, Cover, Injection, SparseIndexSet,
};
use malliavin_stein::stein::{bound_weighted_sparse, WeightSequence};
use malliavin_stein::{Error, Rational, Scalar};
use proptest::prelude::*;

fn factorial(d: usize) -> u64 {
    (1..=d as u64).product()
}

/// Ordered disjoint pairs `(I, K)` whose union splits into two members of
/// `F` other than `{I, K}`, times `(d!)²`.
fn sharp_oracle(set: &SparseIndexSet) -> u64 {
    let reps: BTreeSet<Vec<u32>> = set.representatives().iter().map(|t| t.to_vec()).collect();
    let d = set.d();
    let mut count = 0u64;
    for i in &reps {
        for k in &reps {
            if i.iter().any(|x| k.contains(x)) {
                continue;
            }
            let union: Vec<u32> = i.iter().chain(k).copied().collect();
            let found = (0u32..1 << (2 * d)).filter(|m| m.count_ones() as usize == d).any(|mask| {
                let (mut a, mut b): (Vec<u32>, Vec<u32>) = (Vec::new(), Vec::new());
                for (bit, &x) in union.iter().enumerate() {
                    if mask >> bit & 1 == 1 { a.push(x) } else { b.push(x) }
                }
                a.sort_unstable();
                b.sort_unstable();
                reps.contains(&a) && reps.contains(&b) && a != *i && a != *k
            });
            if found {
                count += 1;
            }
        }
    }
    count * factorial(d).pow(2)
}

fn random_set() -> impl Strategy<Value = SparseIndexSet> {
    (2usize..=3, 5usize..=8).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::btree_set(1u32..=n as u32, d), 1..14).prop_map(move |ts| {
            SparseIndexSet::new(d, n, ts.into_iter().map(|t| t.into_iter().collect::<Vec<_>>())).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn star_counts_sum_to_d_times_cardinality(set in random_set()) {
        let total: u64 = star_counts(&set).values().sum();
        prop_assert_eq!(total, set.d() as u64 * set.cardinality());
        for j in 1..=set.n() {
            let direct = set.representatives().iter().filter(|t| t.contains(&(j as u32))).count() as u64;
            prop_assert_eq!(star_count(&set, j).unwrap(), direct * factorial(set.d()));
        }
    }

    #[test]
    fn sharp_count_matches_oracle(set in random_set()) {
        let fast = sharp_count(&set).unwrap();
        prop_assert_eq!(fast, sharp_oracle(&set));
        // membership is symmetric, so the ordered count is even in units of (d!)²
        prop_assert_eq!(fast / factorial(set.d()).pow(2) % 2, 0);
    }

    #[test]
    fn multilinear_normalization_is_exact(set in random_set()) {
        let (f, c2) = multilinear_indicator::<Rational>(&set).unwrap();
        let norm = Rational::factorial(set.d()) * c2 * f.norm_sq();
        prop_assert_eq!(norm, Rational::from_i64(1));
    }

    #[test]
    fn construction_is_deterministic(big_n in 9usize..200, seed in any::<u64>()) {
        let cover = Cover::parse(3, 2, "1,2;2,3;1,3").unwrap();
        for phi in [Injection::MixedRadix, Injection::Random { seed }] {
            let a = fractional_product(&cover, big_n, &phi).unwrap();
            prop_assert_eq!(&a, &fractional_product(&cover, big_n, &phi).unwrap());
        }
        // an injection cannot create or remove coordinate collisions
        let mixed = fractional_product(&cover, big_n, &Injection::MixedRadix).unwrap();
        let random = fractional_product(&cover, big_n, &Injection::Random { seed }).unwrap();
        prop_assert_eq!(mixed.cardinality(), random.cardinality());
    }
}

#[test]
fn small_star_examples() {
    let one = SparseIndexSet::new(2, 3, [[1u32, 2]]).unwrap();
    assert_eq!(star_count(&one, 1).unwrap(), 2);
    let two = SparseIndexSet::new(2, 3, [[1u32, 2], [1, 3]]).unwrap();
    assert_eq!(star_count(&two, 1).unwrap(), 4);
    assert_eq!(max_star_count(&two), 4);
}

#[test]
fn sharp_examples() {
    let apart = SparseIndexSet::new(2, 4, [[1u32, 2], [3, 4]]).unwrap();
    assert_eq!(sharp_count(&apart).unwrap(), 0);
    let all: Vec<[u32; 2]> = (1..=4).flat_map(|i| (i + 1..=4).map(move |j| [i, j])).collect();
    let full = SparseIndexSet::new(2, 4, all).unwrap();
    assert!(sharp_count(&full).unwrap() > 0);
    assert_eq!(sharp_count(&full).unwrap(), sharp_oracle(&full));
}

#[test]
fn single_pair_kernel() {
    let set = SparseIndexSet::new(2, 4, [[1u32, 2]]).unwrap();
    assert_eq!(set.cardinality(), 2);
    let f = multilinear_kernel(&set).unwrap();
    assert_eq!(f.get(&[1, 2]), 0.5);
    let dec = ChaosDecomposition::new(4, 0.0, vec![f]).unwrap();
    assert!((dec.variance() - 1.0).abs() < 1e-15);
    let t = dec.to_table().unwrap();
    let second: f64 = t.values().iter().map(|v| v * v).sum::<f64>() / 16.0;
    assert!((second - 1.0).abs() < 1e-15);
}

#[test]
fn weighted_single_pair() {
    let set = SparseIndexSet::new(2, 2, [[1u32, 2]]).unwrap();
    let beta = WeightSequence::finite(1, vec![std::f64::consts::FRAC_1_SQRT_2; 2]);
    let w = bound_weighted_sparse(&beta, &set).unwrap();
    assert!((w.measure - 0.5).abs() < 1e-15);
    let zero = WeightSequence::finite(1, vec![0.0; 2]);
    assert_eq!(bound_weighted_sparse(&zero, &set).unwrap_err(), Error::ZeroMeasure);
}

#[test]
fn fractional_product_by_hand_at_nine() {
    // n = 3: φ(a, b) = a + 3(b - 1) on the codes of S = (first, second)
    let cover = Cover::parse(3, 2, "1,2;2,3;1,3").unwrap();
    let phi = |a: u32, b: u32| a + 3 * (b - 1);
    let mut expected = BTreeSet::new();
    for k1 in 1..=3 {
        for k2 in 1..=3 {
            for k3 in 1..=3 {
                let mut t = vec![phi(k1, k2), phi(k2, k3), phi(k1, k3)];
                t.sort_unstable();
                if t[0] != t[1] && t[1] != t[2] {
                    expected.insert(t);
                }
            }
        }
    }
    let set = fractional_product(&cover, 9, &Injection::MixedRadix).unwrap();
    let got: BTreeSet<Vec<u32>> = set.representatives().iter().map(|t| t.to_vec()).collect();
    assert_eq!(got, expected);
    assert!(matches!(fractional_product(&cover, 8, &Injection::MixedRadix), Err(Error::NTooSmall { n: 8, min: 9 })));
}

#[test]
fn star_ratio_decays_like_inverse_n() {
    let cover = Cover::parse(3, 2, "1,2;2,3;1,3").unwrap();
    let ns = [64usize, 256, 1024, 4096];
    let ratios: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let set = fractional_product(&cover, n, &Injection::MixedRadix).unwrap();
            max_star_count(&set) as f64 / set.cardinality() as f64
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    assert!((loglog_slope(&xs, &ratios).unwrap() + 1.0).abs() < 0.1);
}
