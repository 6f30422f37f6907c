use malliavin_stein::contraction::{check_estimates, contraction_norm_sq, star, trace_power4};
use malliavin_stein::gen;
use malliavin_stein::{Rational, Scalar, SymmetricKernel};
use proptest::prelude::*;

fn kernel(entries: &[(&[u32], f64)]) -> SymmetricKernel<f64> {
    SymmetricKernel::new(entries[0].0.len(), entries.iter().map(|(t, v)| (t.to_vec(), *v))).unwrap()
}

/// Brute-force `f ⋆_1^1 g` for order-2 kernels: `Σ_a f(i, a) g(j, a)`.
fn matrix_contraction(f: &SymmetricKernel<f64>, g: &SymmetricKernel<f64>, d: u32) -> Vec<Vec<f64>> {
    (1..=d)
        .map(|i| (1..=d).map(|j| (1..=d).map(|a| f.get(&[i, a]) * g.get(&[j, a])).sum()).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn all_estimates_hold(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let n = 1 + (seed % 4) as usize;
        let m = 1 + ((seed >> 8) % 4) as usize;
        let f = gen::random_kernel::<f64>(&mut rng, n, 8, 8);
        let g = gen::random_kernel::<f64>(&mut rng, m, 8, 8);
        let report = check_estimates(&f, &g);
        let failures: Vec<_> = report.failures().collect();
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }
}

proptest! {
    #[test]
    fn star_is_bilinear(seed in any::<u64>(), r in 0usize..=2, l in 0usize..=2) {
        prop_assume!(l <= r);
        let mut rng = gen::rng(seed);
        let f1 = gen::random_kernel::<Rational>(&mut rng, 2, 5, 5);
        let f2 = gen::random_kernel::<Rational>(&mut rng, 2, 5, 5);
        let g = gen::random_kernel::<Rational>(&mut rng, 3, 5, 5);
        let lhs = star(&f1.add(&f2).unwrap(), &g, r, l).unwrap();
        let rhs = star(&f1, &g, r, l).unwrap().add(&star(&f2, &g, r, l).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn contractions_are_lipschitz(seed in any::<u64>(), r in 0usize..=2, l in 0usize..=2) {
        prop_assume!(l <= r);
        let mut rng = gen::rng(seed);
        let f = gen::random_kernel::<f64>(&mut rng, 2, 6, 6);
        let g = gen::random_kernel::<f64>(&mut rng, 2, 6, 6);
        let df = gen::random_kernel::<f64>(&mut rng, 2, 6, 3).scale(&0.01);
        let dg = gen::random_kernel::<f64>(&mut rng, 2, 6, 3).scale(&0.01);
        let (f2, g2) = (f.add(&df).unwrap(), g.add(&dg).unwrap());
        let gap = star(&f, &g, r, l).unwrap().sub(&star(&f2, &g2, r, l).unwrap()).unwrap().l2_norm();
        let bound = df.l2_norm() * g.l2_norm() + f2.l2_norm() * dg.l2_norm();
        prop_assert!(gap <= bound + 1e-12, "{} > {}", gap, bound);
    }

    #[test]
    fn tensor_and_full_contraction_norms(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut rng = gen::rng(seed);
        let f = gen::random_kernel::<Rational>(&mut rng, n, 6, 5);
        let g = gen::random_kernel::<Rational>(&mut rng, m, 6, 5);
        let tensor = star(&f, &g, 0, 0).unwrap();
        prop_assert_eq!(tensor.norm_sq(), f.norm_sq() * g.norm_sq());
        let full = star(&f, &f, n, n).unwrap();
        prop_assert_eq!(full.order(), 0);
        prop_assert_eq!(full.scalar_value(), f.norm_sq());
    }

    #[test]
    fn grouped_norm_matches_materialized(seed in any::<u64>(), r in 0usize..=3, l in 0usize..=3) {
        prop_assume!(l <= r);
        let mut rng = gen::rng(seed);
        let f = gen::random_kernel::<Rational>(&mut rng, 3, 6, 6);
        let g = gen::random_kernel::<Rational>(&mut rng, 3, 6, 6);
        prop_assert_eq!(contraction_norm_sq(&f, &g, r, l).unwrap(), star(&f, &g, r, l).unwrap().norm_sq());
    }

    #[test]
    fn one_one_contraction_is_a_matrix_product(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let f = gen::random_kernel::<f64>(&mut rng, 2, 5, 6);
        let g = gen::random_kernel::<f64>(&mut rng, 2, 5, 6);
        let c = star(&f, &g, 1, 1).unwrap();
        let oracle = matrix_contraction(&f, &g, 5);
        for i in 1..=5u32 {
            for j in 1..=5u32 {
                prop_assert!((c.get(&[i, j]) - oracle[i as usize - 1][j as usize - 1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn second_contraction_below_trace(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let f = gen::random_kernel::<Rational>(&mut rng, 2, 6, 8);
        let lhs = contraction_norm_sq(&f, &f, 2, 1).unwrap();
        prop_assert!(lhs <= trace_power4(&f).unwrap());
    }
}

#[test]
fn single_pair_examples() {
    let f = kernel(&[(&[1, 2], 1.0)]);
    let c = star(&f, &f, 2, 1).unwrap();
    assert_eq!(c.get(&[1]), 1.0);
    assert_eq!(c.get(&[2]), 1.0);
    assert_eq!(star(&f, &f, 2, 2).unwrap().scalar_value(), 2.0);
    let m = star(&f, &f, 1, 1).unwrap();
    assert_eq!((m.get(&[1, 1]), m.get(&[2, 2]), m.get(&[1, 2])), (1.0, 1.0, 0.0));
    assert!((m.l2_norm() - 2f64.sqrt()).abs() < 1e-15);
    assert!(m.l2_norm() <= f.norm_sq());
}

#[test]
fn trace_examples() {
    assert_eq!(trace_power4(&kernel(&[(&[1, 2], 1.0)])).unwrap(), 2.0);
    assert_eq!(trace_power4(&kernel(&[(&[1, 2], 1.0), (&[3, 4], 1.0)])).unwrap(), 4.0);
    let exact = SymmetricKernel::new(2, [([1u32, 2], Rational::from_i64(1))]).unwrap();
    assert_eq!(trace_power4(&exact).unwrap(), Rational::from_i64(2));
}
