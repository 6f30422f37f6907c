//! Seeded identity and inequality checks shared by the command-line suite.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chaos::{product, ChaosDecomposition, RademacherPoint};
use crate::contraction::check_estimates;
use crate::engine::{distance, enumerate_expectation_exact};
use crate::error::Result;
use crate::gen;
use crate::malliavin::{
    apply_l, apply_pt, chain_rule_residual, divergence, exchangeable_drift_check, flip_bound_violation,
    fund_ipp_check, gradient, gradient_energy, gradient_independent_of_own_coordinate, mehler_evaluate,
    mehler_integral_check,
};
use crate::scalar::{Rational, Scalar};
use crate::stein::{bound_general, fixed_chaos_terms};
use crate::testfn::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub id: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn eq(suite: &str, id: &str, seed: u64, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let pass = (lhs - rhs).abs() <= tolerance;
        CheckRow { suite: suite.into(), id: id.into(), seed, lhs, rhs, tolerance, pass }
    }

    fn le(suite: &str, id: &str, seed: u64, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let pass = lhs <= rhs + tolerance;
        CheckRow { suite: suite.into(), id: id.into(), seed, lhs, rhs, tolerance, pass }
    }

    fn exact(suite: &str, id: &str, seed: u64, lhs: &Rational, rhs: &Rational) -> Self {
        CheckRow {
            suite: suite.into(),
            id: id.into(),
            seed,
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            tolerance: 0.0,
            pass: lhs == rhs,
        }
    }
}

/// Isometry and product formula in exact arithmetic.
pub fn isometry_product_checks(seed: u64, d: usize) -> Result<Vec<CheckRow>> {
    let mut rng = gen::rng(seed);
    let support = d.min(6);
    let q = rng.gen_range(1..=4.min(support));
    let n = rng.gen_range(1..=4.min(support));
    let m = rng.gen_range(1..=4.min(support));
    let f = gen::random_kernel::<Rational>(&mut rng, q, support, 5);
    let a = gen::random_kernel::<Rational>(&mut rng, n, support, 4);
    let b = gen::random_kernel::<Rational>(&mut rng, m, support, 4);

    let jf = ChaosDecomposition::new(d, Rational::from_i64(0), vec![f.clone()])?.to_table()?;
    let second = enumerate_expectation_exact(|p| {
        let v = jf.at(p).expect("same dimension");
        v.clone() * v
    }, d)?;
    let iso = <Rational as Scalar>::factorial(q) * f.norm_sq();
    let mut rows = vec![CheckRow::exact("isometry", "second_moment", seed, &second, &iso)];

    let ta = ChaosDecomposition::new(d, Rational::from_i64(0), vec![a.clone()])?.to_table()?;
    let tb = ChaosDecomposition::new(d, Rational::from_i64(0), vec![b.clone()])?.to_table()?;
    let prod = product(&a, &b)?.with_dimension(d)?.to_table()?;
    let mismatches = ta
        .values()
        .iter()
        .zip(tb.values())
        .zip(prod.values())
        .filter(|((x, y), z)| (*x).clone() * (*y).clone() != **z)
        .count();
    rows.push(CheckRow {
        suite: "product".into(),
        id: "pointwise_product".into(),
        seed,
        lhs: mismatches as f64,
        rhs: 0.0,
        tolerance: 0.0,
        pass: mismatches == 0,
    });
    Ok(rows)
}

/// Every contraction norm estimate on a random pair, in arithmetic `S`.
pub fn estimate_checks<S: Scalar>(seed: u64) -> Vec<CheckRow> {
    let mut rng = gen::rng(seed);
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=4);
    let support = rng.gen_range(n.max(m)..=8);
    let f = gen::random_kernel::<S>(&mut rng, n, support, 6);
    let g = gen::random_kernel::<S>(&mut rng, m, support, 6);
    check_estimates(&f, &g)
        .rows
        .into_iter()
        .map(|r| CheckRow {
            suite: "estimates".into(),
            id: format!("{}[n={n},m={m},r={},l={}]", r.id, r.r, r.l),
            seed,
            lhs: r.lhs,
            rhs: r.rhs,
            tolerance: 1e-10 * (1.0 + r.rhs.abs()),
            pass: r.pass,
        })
        .collect()
}

fn max_table_gap(a: &ChaosDecomposition<f64>, b: &ChaosDecomposition<f64>) -> Result<f64> {
    let (ta, tb) = (a.to_table()?, b.to_table()?);
    Ok(ta.values().iter().zip(tb.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Operator identities on one random decomposition of dimension `d`.
pub fn malliavin_checks(seed: u64, d: usize) -> Result<Vec<CheckRow>> {
    const S: &str = "malliavin";
    let mut rng = gen::rng(seed);
    let dec = gen::random_decomposition::<f64>(&mut rng, d, 4.min(d), true);
    let mut rows = Vec::new();

    let delta_d = divergence(&gradient(&dec))?.with_dimension(d)?;
    let minus_l = apply_l(&dec).scale(&-1.0);
    rows.push(CheckRow::eq(S, "divergence_of_gradient", seed, max_table_gap(&delta_d, &minus_l)?, 0.0, 1e-10));

    for phi in [TestFunction::sin(1.0, 0.0), TestFunction::cos(0.7, 0.2)] {
        let (lhs, rhs) = fund_ipp_check(&dec, &phi)?;
        rows.push(CheckRow::eq(S, &format!("integration_by_parts[{}]", phi.name()), seed, lhs, rhs, 1e-10));
    }

    let field = gradient(&dec);
    let indep = gradient_independent_of_own_coordinate(&field);
    rows.push(CheckRow::eq(S, "gradient_free_of_own_coordinate", seed, indep as u8 as f64, 1.0, 0.0));
    let table = dec.to_table()?;
    rows.push(CheckRow::le(S, "flip_within_twice_gradient", seed, flip_bound_violation(&table), 0.0, 1e-12));
    let (e_inv, e_grad) = gradient_energy(&dec)?;
    rows.push(CheckRow::le(S, "inverse_gradient_energy", seed, e_inv, e_grad, 1e-12));
    let first_only = dec.orders().all(|q| q == 1);
    let equal = (e_inv - e_grad).abs() <= 1e-12 * (1.0 + e_grad);
    rows.push(CheckRow::eq(S, "energy_equality_iff_first_chaos", seed, equal as u8 as f64, first_only as u8 as f64, 0.0));

    let t: f64 = rng.gen_range(0.0..2.0);
    let omega = RademacherPoint::from_index(d, rng.gen_range(0..1u64 << d));
    let mehler = mehler_evaluate(&dec, t, &omega)?.value;
    let semigroup = apply_pt(&dec, t)?.evaluate(&omega)?;
    rows.push(CheckRow::eq(S, "mehler_semigroup", seed, mehler, semigroup, 1e-10));
    let (lhs, rhs) = mehler_integral_check(&dec, &omega)?;
    rows.push(CheckRow::eq(S, "mehler_integral", seed, lhs, rhs, 1e-8));

    let mut worst = f64::NEG_INFINITY;
    for phi in [TestFunction::sin(1.3, 0.1), TestFunction::cos(0.8, 0.0), TestFunction::cubic()] {
        for w in 0..1u64 << d {
            let omega = RademacherPoint::from_index(d, w);
            for k in 1..=d as u32 {
                let (res, bound) = chain_rule_residual(&table, &phi, k, &omega)?;
                worst = worst.max(res - bound);
            }
        }
    }
    rows.push(CheckRow::le(S, "chain_rule_remainder", seed, worst, 0.0, 1e-12));

    let exact = dec.map_scalar(|&x| Rational::from_f64(x));
    let drift = exchangeable_drift_check(&exact)?;
    let worst = drift.deviations.iter().map(|&(_, e)| e).fold(0.0, f64::max);
    rows.push(CheckRow { pass: drift.exact, ..CheckRow::eq(S, "exchangeable_drift", seed, worst, 0.0, 0.0) });
    Ok(rows)
}

/// Dominance of the general bound and the fixed-chaos closed form.
pub fn bound_checks(seed: u64, d: usize) -> Result<Vec<CheckRow>> {
    const S: &str = "bounds";
    let mut rng = gen::rng(seed);
    let dec = gen::random_decomposition::<f64>(&mut rng, d, 3.min(d), true);
    let mut rows = Vec::new();
    if dec.variance() > 0.0 {
        let dec = dec.scale(&(1.0 / dec.variance().sqrt()));
        for a in [0.5, 1.0, 2.0] {
            let h = TestFunction::cos(a, 0.0);
            let b = bound_general(&dec, &h)?;
            rows.push(CheckRow::le(S, &format!("dominance[a={a}]"), seed, distance(&dec, &h)?, b.total, 1e-9));
        }
    }
    let q = rng.gen_range(2..=3.min(d).max(2));
    let f = gen::random_kernel::<f64>(&mut rng, q, d.min(6), 5);
    if !f.is_empty() {
        let terms = fixed_chaos_terms(&f)?;
        let b = bound_general(&ChaosDecomposition::new(d, 0.0, vec![f])?, &TestFunction::cos(1.0, 0.0))?;
        let enumerated = b.b1_variance_form * b.b1_variance_form;
        rows.push(CheckRow::eq(S, &format!("fixed_chaos_identity[q={q}]"), seed, enumerated, terms.mww, 1e-10 * (1.0 + terms.mww)));
        let assembled = 20.0 / (3.0 * q as f64) * terms.mww4;
        rows.push(CheckRow::le(S, &format!("fixed_chaos_fourth_moment[q={q}]"), seed, b.b2, assembled, 1e-10 * (1.0 + assembled)));
    }
    Ok(rows)
}

/// The full suite over `seeds` instances of dimension at most `d`.
pub fn verify_all(d: usize, seeds: u64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for seed in 0..seeds {
        rows.extend(isometry_product_checks(seed, d.clamp(1, 10))?);
        rows.extend(estimate_checks::<f64>(seed));
        rows.extend(malliavin_checks(seed, d.clamp(1, 8))?);
        rows.extend(bound_checks(seed, d.clamp(2, 10))?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let rows = verify_all(4, 5).unwrap();
        let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
