//! Discrete Malliavin operators: the gradient `D`, divergence `δ`, the
//! Ornstein–Uhlenbeck operator `L`, its inverse, the semigroup `P_t`, and
//! pathwise checks built on them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::chaos::{ChaosDecomposition, RademacherPoint, TruthTable};
use crate::engine::{mc_sample, Estimate};
use crate::error::{Error, Result};
use crate::kernel::{IndexTuple, SymmetricKernel};
use crate::scalar::Scalar;
use crate::testfn::TestFunction;

/// Largest dimension for which the Mehler expectation is enumerated.
pub const MEHLER_ENUMERATION_LIMIT: usize = 16;

/// `k ↦ D_k F`; coordinates that are absent map to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField<S = f64> {
    dimension: usize,
    components: BTreeMap<u32, ChaosDecomposition<S>>,
}

impl<S: Scalar> GradientField<S> {
    pub fn new(dimension: usize, components: BTreeMap<u32, ChaosDecomposition<S>>) -> Self {
        GradientField { dimension, components }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, k: u32) -> ChaosDecomposition<S> {
        self.components
            .get(&k)
            .cloned()
            .unwrap_or_else(|| ChaosDecomposition::constant(self.dimension, S::zero()))
    }

    pub fn components(&self) -> impl Iterator<Item = (u32, &ChaosDecomposition<S>)> {
        self.components.iter().map(|(&k, v)| (k, v))
    }
}

/// `D_k F = Σ_n n J_{n-1}(f_n(·, k))`.
pub fn gradient<S: Scalar>(dec: &ChaosDecomposition<S>) -> GradientField<S> {
    let d = dec.dimension();
    let mut components = BTreeMap::new();
    for k in dec.active_coordinates() {
        let mut mean = S::zero();
        let mut kernels = Vec::new();
        for f in dec.kernels() {
            let n = f.order();
            let c = S::from_i64(n as i64);
            if n == 1 {
                mean = c * f.section_scalar(k);
            } else {
                let s = f.section(k).expect("order >= 2").scale(&c);
                if !s.is_empty() {
                    kernels.push(s);
                }
            }
        }
        let dk = ChaosDecomposition::new(d, mean, kernels).expect("sections stay in dimension");
        components.insert(k, dk);
    }
    GradientField { dimension: d, components }
}

/// `½(F(ω with X_k = +1) - F(ω with X_k = -1))`.
pub fn pathwise_gradient<S: Scalar>(table: &TruthTable<S>, k: u32, omega: &RademacherPoint) -> Result<S> {
    let d = table.dimension();
    if k == 0 || k as usize > d {
        return Err(Error::IndexOutOfRange { index: k as usize, bound: d });
    }
    let plus = table.at(&omega.with_sign(k, true)?)?;
    let minus = table.at(&omega.with_sign(k, false)?)?;
    Ok((plus - minus) / S::from_i64(2))
}

/// The table of `D_k F` from a table of `F`.
pub fn pathwise_gradient_table<S: Scalar>(table: &TruthTable<S>, k: u32) -> Result<TruthTable<S>> {
    let d = table.dimension();
    if k == 0 || k as usize > d {
        return Err(Error::IndexOutOfRange { index: k as usize, bound: d });
    }
    let bit = 1usize << (k - 1);
    let two = S::from_i64(2);
    let v = table.values();
    let values = (0..v.len())
        .map(|i| (v[i | bit].clone() - v[i & !bit].clone()) / two.clone())
        .collect();
    TruthTable::new(d, values)
}

/// `L F = -Σ n J_n(f_n)`.
pub fn apply_l<S: Scalar>(dec: &ChaosDecomposition<S>) -> ChaosDecomposition<S> {
    dec.scale_orders(S::zero(), |n| -S::from_i64(n as i64))
}

/// `L⁻¹ F = -Σ n⁻¹ J_n(f_n)` for centered `F`.
pub fn apply_l_inverse<S: Scalar>(dec: &ChaosDecomposition<S>) -> Result<ChaosDecomposition<S>> {
    if !dec.is_centered() {
        return Err(Error::NotCentered(dec.mean().to_f64()));
    }
    Ok(dec.scale_orders(S::zero(), |n| -(S::one() / S::from_i64(n as i64))))
}

/// `P_t F = E F + Σ e^{-nt} J_n(f_n)`.
pub fn apply_pt<S: Scalar>(dec: &ChaosDecomposition<S>, t: f64) -> Result<ChaosDecomposition<S>> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Invalid(format!("semigroup time must be >= 0, got {t}")));
    }
    Ok(dec.scale_orders(dec.mean().clone(), |n| S::from_f64((-(n as f64) * t).exp())))
}

/// Divergence, the adjoint of the gradient:
/// `δ(u) = Σ_k X_k · ½(u_k(ω^{k+}) + u_k(ω^{k-}))`.
///
/// In chaos terms the average over `X_k` drops every kernel entry touching
/// `k`, and multiplying `J_n(h)` by `X_k` yields `J_{n+1}` of `h` extended
/// to `k` and divided by `n + 1`.
pub fn divergence<S: Scalar>(u: &GradientField<S>) -> Result<ChaosDecomposition<S>> {
    let mut d = u.dimension;
    let mut by_order: BTreeMap<usize, BTreeMap<IndexTuple, S>> = BTreeMap::new();
    let mut add = |q: usize, t: IndexTuple, v: S| {
        let slot = by_order.entry(q).or_default().entry(t).or_insert_with(S::zero);
        *slot = slot.clone() + v;
    };
    for (k, uk) in u.components() {
        d = d.max(k as usize).max(uk.dimension());
        if !uk.mean().is_zero() {
            add(1, IndexTuple::from_slice(&[k]), uk.mean().clone());
        }
        for h in uk.kernels() {
            let n = h.order();
            let c = S::from_i64(n as i64 + 1);
            for (t, v) in h.entries() {
                if t.contains(&k) {
                    continue;
                }
                let mut key = t.clone();
                key.push(k);
                key.sort_unstable();
                add(n + 1, key, v.clone() / c.clone());
            }
        }
    }
    let kernels = by_order.into_iter().map(|(q, e)| SymmetricKernel::from_canonical(q, e)).collect();
    ChaosDecomposition::new(d, S::zero(), kernels)
}

fn hamming_weights(table: &TruthTable<f64>, omega: &RademacherPoint) -> Result<Vec<f64>> {
    let d = table.dimension();
    if omega.dimension() != d {
        return Err(Error::DimensionTooSmall { needed: d, dimension: omega.dimension() });
    }
    let base = omega.index();
    let mut by_distance = vec![0.0; d + 1];
    for (i, v) in table.values().iter().enumerate() {
        by_distance[((i as u64) ^ base).count_ones() as usize] += v;
    }
    Ok(by_distance)
}

/// `E[F(X^t) | X = ω]` from distance-grouped sums, each coordinate kept with
/// probability `(1 + e^{-t})/2`.
fn mehler_from_weights(by_distance: &[f64], keep_corr: f64) -> f64 {
    let d = by_distance.len() - 1;
    let same = 0.5 * (1.0 + keep_corr);
    let flip = 0.5 * (1.0 - keep_corr);
    by_distance
        .iter()
        .enumerate()
        .map(|(h, v)| v * same.powi((d - h) as i32) * flip.powi(h as i32))
        .sum()
}

/// `P_t F(ω) = E[F(X^t) | X = ω]` where `X^t` keeps each coordinate with
/// probability `e^{-t}` and resamples it otherwise. Exact for
/// `d ≤ 16`; above that a seeded Monte Carlo estimate (seed 0, 2^18 draws).
pub fn mehler_evaluate(dec: &ChaosDecomposition<f64>, t: f64, omega: &RademacherPoint) -> Result<Estimate> {
    if dec.dimension() <= MEHLER_ENUMERATION_LIMIT {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Invalid(format!("semigroup time must be >= 0, got {t}")));
        }
        let table = dec.to_table()?;
        let w = hamming_weights(&table, &omega_prefix(omega, dec.dimension())?)?;
        return Ok(Estimate::exact(mehler_from_weights(&w, (-t).exp()), dec.dimension()));
    }
    mehler_evaluate_mc(dec, t, omega, 1 << 18, 0)
}

fn omega_prefix(omega: &RademacherPoint, d: usize) -> Result<RademacherPoint> {
    if omega.dimension() < d {
        return Err(Error::DimensionTooSmall { needed: d, dimension: omega.dimension() });
    }
    let mut p = RademacherPoint::new(d);
    for k in 1..=d as u32 {
        if omega.sign_unchecked(k) > 0 {
            p.flip(k);
        }
    }
    Ok(p)
}

pub fn mehler_evaluate_mc(
    dec: &ChaosDecomposition<f64>,
    t: f64,
    omega: &RademacherPoint,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Invalid(format!("semigroup time must be >= 0, got {t}")));
    }
    let d = dec.dimension();
    let base = omega_prefix(omega, d)?;
    let keep = (-t).exp();
    mc_sample(
        |rng| {
            let mut p = base.clone();
            for k in 1..=d as u32 {
                if rng.gen::<f64>() >= keep && rng.gen::<bool>() {
                    p.flip(k);
                }
            }
            dec.evaluate(&p).expect("dimension checked")
        },
        samples,
        seed,
    )
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Both sides of `⟨DF, -DL⁻¹F⟩(ω) = ∫_0^∞ e^{-t} ⟨DF(ω), E[DF(X^t) | X = ω]⟩ dt`.
/// The left side comes from the chaos expansion, the right side from the
/// resampling representation integrated in `u = e^{-t}`.
pub fn mehler_integral_check(dec: &ChaosDecomposition<f64>, omega: &RademacherPoint) -> Result<(f64, f64)> {
    let centered = dec.scale_orders(0.0, |_| 1.0);
    let df = gradient(&centered);
    let dl = gradient(&apply_l_inverse(&centered)?);
    let mut lhs = 0.0;
    let d = dec.dimension();
    let mut h = vec![0.0; 1usize << d];
    let omega = omega_prefix(omega, d)?;
    for (k, dk) in df.components() {
        let at = dk.evaluate(&omega)?;
        lhs -= at * dl.get(k).evaluate(&omega)?;
        let table = dk.to_table()?;
        for (slot, v) in h.iter_mut().zip(table.values()) {
            *slot += at * v;
        }
    }
    let w = hamming_weights(&TruthTable::new(d, h)?, &omega)?;
    let rhs = adaptive_simpson(&|u| mehler_from_weights(&w, u), 0.0, 1.0, 1e-13);
    Ok((lhs, rhs))
}

/// Pathwise chain-rule remainder and its bound `(10/3)‖φ'''‖ |D_k F|³`.
pub fn chain_rule_residual(
    table: &TruthTable<f64>,
    phi: &TestFunction,
    k: u32,
    omega: &RademacherPoint,
) -> Result<(f64, f64)> {
    let d = table.dimension();
    if k == 0 || k as usize > d {
        return Err(Error::IndexOutOfRange { index: k as usize, bound: d });
    }
    let need = |j: usize, x: f64| {
        phi.derivative(j, x)
            .ok_or_else(|| Error::Invalid(format!("test function lacks derivative {j}")))
    };
    let f = table.at(omega)?;
    let fp = table.at(&omega.with_sign(k, true)?)?;
    let fm = table.at(&omega.with_sign(k, false)?)?;
    let dk = 0.5 * (fp - fm);
    let dphi = 0.5 * (phi.eval(fp) - phi.eval(fm));
    let xk = omega.sign(k)? as f64;
    let correction = 0.5 * (need(2, fp)? + need(2, fm)?) * dk * dk * xk;
    let residual = (dphi - need(1, f)? * dk + correction).abs();
    let bound = 10.0 / 3.0 * phi.require(3)? * dk.abs().powi(3);
    Ok((residual, bound))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DriftReport {
    pub dimension: usize,
    /// `(order, max_ω |E(J_n' - J_n | X) + (n/d) J_n|)`.
    pub deviations: Vec<(usize, f64)>,
    pub exact: bool,
}

impl DriftReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.exact || self.deviations.iter().all(|&(_, e)| e <= tol)
    }
}

/// Builds the exchanged variable (uniform index `I`, independent sign `X*`
/// replacing `X_I`) and compares `E(J_n' - J_n | X)` with `-(n/d) J_n` at
/// every point and for every order.
pub fn exchangeable_drift_check<S: Scalar>(dec: &ChaosDecomposition<S>) -> Result<DriftReport> {
    let d = dec.dimension();
    if d == 0 {
        return Err(Error::Invalid("exchangeable pair needs d >= 1".into()));
    }
    let mut deviations = Vec::new();
    let mut exact = true;
    let dd = S::from_i64(d as i64);
    let two = S::from_i64(2);
    for f in dec.kernels() {
        let n = f.order();
        let single = ChaosDecomposition::new(d, S::zero(), vec![f.clone()])?;
        let t = single.to_table()?;
        let v = t.values();
        let mut worst = 0.0f64;
        for (i, fi) in v.iter().enumerate() {
            let mut acc = S::zero();
            for b in 0..d {
                let bit = 1usize << b;
                let resampled = (v[i | bit].clone() + v[i & !bit].clone()) / two.clone();
                acc = acc + resampled - fi.clone();
            }
            let drift = acc / dd.clone();
            let expected = -(S::from_i64(n as i64) * fi.clone()) / dd.clone();
            if drift != expected {
                exact = false;
            }
            worst = worst.max((drift - expected).to_f64().abs());
        }
        deviations.push((n, worst));
    }
    Ok(DriftReport { dimension: d, deviations, exact })
}

/// Both sides of `E[F φ(F)] = E[⟨Dφ(F), -DL⁻¹F⟩]` for centered `F`.
pub fn fund_ipp_check(dec: &ChaosDecomposition<f64>, phi: &TestFunction) -> Result<(f64, f64)> {
    let dec = dec.compress();
    let table = dec.to_table()?;
    let phi_table = table.map(|&x| phi.eval(x));
    let n = table.values().len() as f64;
    let lhs = table.values().iter().zip(phi_table.values()).map(|(a, b)| a * b).sum::<f64>() / n;
    let g = gradient(&apply_l_inverse(&dec)?);
    let mut rhs = 0.0;
    for (k, gk) in g.components() {
        let dphi = pathwise_gradient_table(&phi_table, k)?;
        let gt = gk.to_table()?;
        rhs -= dphi.values().iter().zip(gt.values()).map(|(a, b)| a * b).sum::<f64>() / n;
    }
    Ok((lhs, rhs))
}

/// `(E‖DL⁻¹F‖², E‖DF‖²)` by enumeration.
pub fn gradient_energy(dec: &ChaosDecomposition<f64>) -> Result<(f64, f64)> {
    let dec = dec.compress().scale_orders(0.0, |_| 1.0);
    let mean_sq = |field: &GradientField<f64>| -> Result<f64> {
        let mut s = 0.0;
        for (_, c) in field.components() {
            let t = c.to_table()?;
            s += t.values().iter().map(|x| x * x).sum::<f64>() / t.values().len() as f64;
        }
        Ok(s)
    };
    Ok((mean_sq(&gradient(&apply_l_inverse(&dec)?))?, mean_sq(&gradient(&dec))?))
}

/// Largest violation of `|F_k^± - F| ≤ 2|D_k F|` over all points and `k`.
pub fn flip_bound_violation(table: &TruthTable<f64>) -> f64 {
    let d = table.dimension();
    let v = table.values();
    let mut worst = 0.0f64;
    for k in 0..d {
        let bit = 1usize << k;
        for (i, &f) in v.iter().enumerate() {
            let (p, m) = (v[i | bit], v[i & !bit]);
            let dk = 0.5 * (p - m);
            let excess = (p - f).abs().max((m - f).abs()) - 2.0 * dk.abs();
            worst = worst.max(excess);
        }
    }
    worst
}

/// True when no component of `DF` references its own coordinate.
pub fn gradient_independent_of_own_coordinate<S: Scalar>(field: &GradientField<S>) -> bool {
    field.components().all(|(k, c)| c.kernels().all(|f| f.entries().all(|(t, _)| !t.contains(&k))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::decompose_walsh;
    use crate::scalar::Rational;

    fn first_chaos(alpha: &[f64]) -> ChaosDecomposition<f64> {
        let k = SymmetricKernel::new(
            1,
            alpha.iter().enumerate().map(|(i, &a)| ([i as u32 + 1], a)),
        )
        .unwrap();
        ChaosDecomposition::new(alpha.len(), 0.0, vec![k]).unwrap()
    }

    fn j2_half() -> ChaosDecomposition<f64> {
        ChaosDecomposition::from_kernel(SymmetricKernel::new(2, [([1u32, 2], 0.5)]).unwrap())
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(&first_chaos(&[0.3, -0.7]));
        assert_eq!(*g.get(1).mean(), 0.3);
        assert_eq!(*g.get(2).mean(), -0.7);
        assert_eq!(g.get(2).kernels().count(), 0);
        let g = gradient(&j2_half());
        assert_eq!(g.get(1).kernel(1).unwrap().get(&[2]), 1.0);
        assert!(gradient_independent_of_own_coordinate(&g));
        assert_eq!(g.get(3).kernels().count(), 0);
    }

    #[test]
    fn gradient_matches_pathwise() {
        let vals: Vec<f64> = (0..64).map(|i| ((i * 29 % 17) as f64 - 8.0) / 3.0).collect();
        let t = TruthTable::new(6, vals).unwrap();
        let g = gradient(&decompose_walsh(&t).unwrap());
        for k in 1..=6u32 {
            let gk = g.get(k);
            for i in 0..64 {
                let p = RademacherPoint::from_index(6, i);
                let a = pathwise_gradient(&t, k, &p).unwrap();
                assert!((gk.evaluate(&p).unwrap() - a).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pathwise_examples() {
        let x1x2 = TruthTable::new(2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let p = RademacherPoint::from_signs(&[-1, 1]).unwrap();
        assert_eq!(pathwise_gradient(&x1x2, 1, &p).unwrap(), 1.0);
        let m = RademacherPoint::from_signs(&[1, -1]).unwrap();
        assert_eq!(pathwise_gradient(&x1x2, 1, &m).unwrap(), -1.0);
        let c = TruthTable::new(2, vec![3.0; 4]).unwrap();
        assert_eq!(pathwise_gradient(&c, 2, &m).unwrap(), 0.0);
        assert!(matches!(pathwise_gradient(&c, 3, &m), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn operator_examples() {
        let f = j2_half();
        let lf = apply_l(&f);
        assert_eq!(lf.kernel(2).unwrap().get(&[1, 2]), -1.0);
        let back = apply_l(&apply_l_inverse(&f).unwrap());
        assert!(back.approx_eq(&f, 1e-15));
        assert!(apply_pt(&f, 0.0).unwrap().approx_eq(&f, 0.0));
        let shifted = f.add(&ChaosDecomposition::constant(2, 1.5));
        let far = apply_pt(&shifted, 50.0).unwrap();
        assert!(far.approx_eq(&ChaosDecomposition::constant(2, 1.5), 1e-12));
        assert!(matches!(apply_l_inverse(&shifted), Err(Error::NotCentered(_))));
    }

    #[test]
    fn divergence_of_gradient_is_minus_l() {
        let f = j2_half();
        let d = divergence(&gradient(&f)).unwrap();
        assert!(d.approx_eq(&apply_l(&f).scale(&-1.0), 1e-15));
        let zero = GradientField::<f64>::new(3, BTreeMap::new());
        assert_eq!(divergence(&zero).unwrap().kernels().count(), 0);
        let vals: Vec<Rational> = (0..32).map(|i: i64| Rational::from_i64((i * 13) % 7 - 3)).collect();
        let dec = decompose_walsh(&TruthTable::new(5, vals).unwrap()).unwrap();
        let lhs = divergence(&gradient(&dec)).unwrap();
        let rhs = apply_l(&dec).scale(&Rational::from_i64(-1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mehler_examples() {
        let x1 = first_chaos(&[1.0]);
        let p = RademacherPoint::from_signs(&[1]).unwrap();
        for t in [0.0, 0.3, 2.0] {
            assert!((mehler_evaluate(&x1, t, &p).unwrap().value - (-t).exp()).abs() < 1e-15);
        }
        let f = j2_half().add(&first_chaos(&[0.2, 0.1])).add(&ChaosDecomposition::constant(2, 0.7));
        let q = RademacherPoint::from_signs(&[1, -1]).unwrap();
        assert!((mehler_evaluate(&f, 0.0, &q).unwrap().value - f.evaluate(&q).unwrap()).abs() < 1e-15);
        assert!((mehler_evaluate(&f, 50.0, &q).unwrap().value - 0.7).abs() < 1e-12);
        let pt = apply_pt(&f, 0.8).unwrap().evaluate(&q).unwrap();
        assert!((mehler_evaluate(&f, 0.8, &q).unwrap().value - pt).abs() < 1e-14);
    }

    #[test]
    fn mehler_monte_carlo_agrees() {
        let alpha: Vec<f64> = (0..20).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let f = first_chaos(&alpha);
        let p = RademacherPoint::from_index(20, 0b1010_1100_1111_0000_1011);
        let est = mehler_evaluate(&f, 0.4, &p).unwrap();
        let exact = apply_pt(&f, 0.4).unwrap().evaluate(&p).unwrap();
        assert!(est.std_error > 0.0);
        assert!((est.value - exact).abs() < 5.0 * est.std_error);
    }

    #[test]
    fn mehler_integral_identity() {
        let f = j2_half().add(&first_chaos(&[0.4, -0.3, 0.2]));
        let g = f.add(&ChaosDecomposition::from_kernel(
            SymmetricKernel::new(3, [([1u32, 2, 3], 0.25)]).unwrap(),
        ));
        for i in 0..8 {
            let p = RademacherPoint::from_index(3, i);
            let (l, r) = mehler_integral_check(&g, &p).unwrap();
            assert!((l - r).abs() < 1e-10, "{l} vs {r}");
        }
    }

    #[test]
    fn chain_rule_examples() {
        let x1 = TruthTable::new(1, vec![-1.0, 1.0]).unwrap();
        let p = RademacherPoint::from_signs(&[1]).unwrap();
        let (res, bound) = chain_rule_residual(&x1, &TestFunction::cubic(), 1, &p).unwrap();
        assert!((res - 2.0).abs() < 1e-15);
        assert!((bound - 20.0).abs() < 1e-12);
        let (res, _) = chain_rule_residual(&x1, &TestFunction::linear(2.0, 1.0), 1, &p).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn drift_examples() {
        let x1 = first_chaos(&[1.0]);
        let rep = exchangeable_drift_check(&x1).unwrap();
        assert!(rep.exact);
        let x1x2 = ChaosDecomposition::from_kernel(
            SymmetricKernel::new(2, [([1u32, 2], Rational::new(1.into(), 2.into()))]).unwrap(),
        );
        assert!(exchangeable_drift_check(&x1x2).unwrap().exact);
        let c = ChaosDecomposition::constant(3, 2.0);
        let rep = exchangeable_drift_check(&c).unwrap();
        assert!(rep.deviations.is_empty() && rep.exact);
    }

    #[test]
    fn fund_ipp_and_energy() {
        let f = j2_half().add(&first_chaos(&[0.4, -0.3, 0.2]));
        let (l, r) = fund_ipp_check(&f, &TestFunction::cos(1.3, 0.2)).unwrap();
        assert!((l - r).abs() < 1e-12);
        let (a, b) = gradient_energy(&f).unwrap();
        assert!(a < b);
        let (a, b) = gradient_energy(&first_chaos(&[0.4, -0.3])).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(flip_bound_violation(&f.to_table().unwrap()) <= 0.0);
    }
}
