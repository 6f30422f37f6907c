//! Multiple integrals, chaos decompositions and truth tables.
//!
//! Truth tables list `F(ω)` for all `ω ∈ {-1,+1}^d` with coordinate 1 as the
//! least significant bit of the index; a set bit means `X_k = +1`.

use std::collections::BTreeMap;

use crate::contraction::symmetrized_off_diagonal;
use crate::error::{Error, Result};
use crate::kernel::{IndexTuple, SymmetricKernel};
use crate::scalar::{binomial_u64, Scalar};

/// Largest dimension for which 2^d tables are built.
pub const MAX_DIMENSION: usize = 24;

/// A point `ω ∈ {-1,+1}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RademacherPoint {
    dimension: usize,
    bits: Vec<u64>,
}

impl RademacherPoint {
    /// All coordinates equal to -1.
    pub fn new(dimension: usize) -> Self {
        RademacherPoint { dimension, bits: vec![0; dimension.div_ceil(64)] }
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut p = RademacherPoint::new(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => p.set(i as u32 + 1, true),
                -1 => {}
                _ => return Err(Error::Invalid(format!("sign must be +1 or -1, got {s}"))),
            }
        }
        Ok(p)
    }

    /// The point whose truth-table index is `index`.
    pub fn from_index(dimension: usize, index: u64) -> Self {
        let mut p = RademacherPoint::new(dimension);
        if dimension > 0 {
            let mask = if dimension >= 64 { u64::MAX } else { (1u64 << dimension) - 1 };
            p.bits[0] = index & mask;
        }
        p
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Truth-table index; only meaningful for `d ≤ 64`.
    pub fn index(&self) -> u64 {
        self.bits.first().copied().unwrap_or(0)
    }

    fn set(&mut self, k: u32, plus: bool) {
        let i = (k - 1) as usize;
        if plus {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub(crate) fn flip(&mut self, k: u32) {
        let i = (k - 1) as usize;
        self.bits[i / 64] ^= 1 << (i % 64);
    }

    fn check(&self, k: u32) -> Result<()> {
        if k == 0 || k as usize > self.dimension {
            return Err(Error::IndexOutOfRange { index: k as usize, bound: self.dimension });
        }
        Ok(())
    }

    /// `X_k(ω)` as ±1.
    pub fn sign(&self, k: u32) -> Result<i32> {
        self.check(k)?;
        Ok(self.sign_unchecked(k))
    }

    pub(crate) fn sign_unchecked(&self, k: u32) -> i32 {
        let i = (k - 1) as usize;
        if self.bits[i / 64] >> (i % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Copy with coordinate `k` forced to `+1` (`plus`) or `-1`.
    pub fn with_sign(&self, k: u32, plus: bool) -> Result<Self> {
        self.check(k)?;
        let mut p = self.clone();
        p.set(k, plus);
        Ok(p)
    }

    pub fn signs(&self) -> Vec<i8> {
        (1..=self.dimension as u32).map(|k| self.sign_unchecked(k) as i8).collect()
    }
}

/// Values of a functional on all `2^d` points.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable<S = f64> {
    d: usize,
    values: Vec<S>,
}

fn check_dimension(d: usize, limit: usize) -> Result<()> {
    if d > limit || d >= usize::BITS as usize {
        return Err(Error::DimensionLimit { d, limit });
    }
    Ok(())
}

impl<S: Scalar> TruthTable<S> {
    pub fn new(d: usize, values: Vec<S>) -> Result<Self> {
        if d >= 63 || values.len() != 1usize << d {
            return Err(Error::BadTableLength { len: values.len(), d });
        }
        Ok(TruthTable { d, values })
    }

    pub fn from_fn(d: usize, f: impl Fn(&RademacherPoint) -> S) -> Result<Self> {
        check_dimension(d, MAX_DIMENSION)?;
        let values = (0..1u64 << d).map(|i| f(&RademacherPoint::from_index(d, i))).collect();
        Ok(TruthTable { d, values })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn get(&self, index: usize) -> &S {
        &self.values[index]
    }

    pub fn at(&self, omega: &RademacherPoint) -> Result<S> {
        if omega.dimension() != self.d {
            return Err(Error::DimensionTooSmall { needed: self.d, dimension: omega.dimension() });
        }
        Ok(self.values[omega.index() as usize].clone())
    }

    pub fn mean(&self) -> S {
        let sum = self.values.iter().fold(S::zero(), |a, v| a + v.clone());
        sum / S::from_i64(self.values.len() as i64)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TruthTable<T> {
        TruthTable { d: self.d, values: self.values.iter().map(f).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::BadTableLength { len: other.values.len(), d: self.d });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect();
        Ok(TruthTable { d: self.d, values })
    }
}

/// `F = mean + Σ_n J_n(f_n)` on a declared dimension `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosDecomposition<S = f64> {
    dimension: usize,
    mean: S,
    kernels: BTreeMap<usize, SymmetricKernel<S>>,
}

impl<S: Scalar> ChaosDecomposition<S> {
    pub fn new(dimension: usize, mean: S, kernels: Vec<SymmetricKernel<S>>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for k in kernels {
            if k.support_bound() > dimension {
                return Err(Error::DimensionTooSmall { needed: k.support_bound(), dimension });
            }
            let q = k.order();
            if map.contains_key(&q) {
                return Err(Error::Invalid(format!("two kernels of order {q}")));
            }
            if !k.is_empty() {
                map.insert(q, k);
            }
        }
        Ok(ChaosDecomposition { dimension, mean, kernels: map })
    }

    pub fn constant(dimension: usize, mean: S) -> Self {
        ChaosDecomposition { dimension, mean, kernels: BTreeMap::new() }
    }

    /// The single integral `J_q(f)` on the smallest dimension holding it.
    pub fn from_kernel(f: SymmetricKernel<S>) -> Self {
        let d = f.support_bound();
        Self::new(d, S::zero(), vec![f]).expect("fits by construction")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mean(&self) -> &S {
        &self.mean
    }

    pub fn kernel(&self, q: usize) -> Option<&SymmetricKernel<S>> {
        self.kernels.get(&q)
    }

    pub fn kernels(&self) -> impl Iterator<Item = &SymmetricKernel<S>> {
        self.kernels.values()
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.kernels.keys().copied()
    }

    pub fn max_order(&self) -> usize {
        self.kernels.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_centered(&self) -> bool {
        self.mean.is_zero()
    }

    /// Same decomposition on a larger (or equal) dimension.
    pub fn with_dimension(&self, dimension: usize) -> Result<Self> {
        Self::new(dimension, self.mean.clone(), self.kernels.values().cloned().collect())
    }

    /// The same functional on its active coordinates, relabeled `1..=a`.
    pub fn compress(&self) -> Self {
        let active = self.active_coordinates();
        let map: BTreeMap<u32, u32> =
            active.iter().enumerate().map(|(i, &c)| (c, i as u32 + 1)).collect();
        let kernels = self
            .kernels
            .iter()
            .map(|(&q, k)| (q, k.remap(|c| map[&c])))
            .collect();
        ChaosDecomposition { dimension: active.len(), mean: self.mean.clone(), kernels }
    }

    /// Coordinates that appear in some kernel, sorted.
    pub fn active_coordinates(&self) -> Vec<u32> {
        let set: std::collections::BTreeSet<u32> = self
            .kernels
            .values()
            .flat_map(|k| k.entries().flat_map(|(t, _)| t.to_vec()).collect::<Vec<_>>())
            .collect();
        set.into_iter().collect()
    }

    /// Applies `c(n)` to the order-`n` kernel and `c0` to the mean.
    pub fn scale_orders(&self, mean: S, c: impl Fn(usize) -> S) -> Self {
        let kernels = self
            .kernels
            .iter()
            .map(|(&q, k)| (q, k.scale(&c(q))))
            .filter(|(_, k)| !k.is_empty())
            .collect();
        ChaosDecomposition { dimension: self.dimension, mean, kernels }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.scale_orders(self.mean.clone() * c.clone(), |_| c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut kernels = self.kernels.clone();
        for (&q, k) in &other.kernels {
            let merged = match kernels.get(&q) {
                Some(existing) => existing.add(k).expect("same order"),
                None => k.clone(),
            };
            if merged.is_empty() {
                kernels.remove(&q);
            } else {
                kernels.insert(q, merged);
            }
        }
        ChaosDecomposition {
            dimension: self.dimension.max(other.dimension),
            mean: self.mean.clone() + other.mean.clone(),
            kernels,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    /// `Var F = Σ_q q!‖f_q‖²`.
    pub fn variance(&self) -> S {
        covariance(self, self)
    }

    pub fn evaluate(&self, omega: &RademacherPoint) -> Result<S> {
        evaluate(self, omega)
    }

    /// Values at all `2^d` points via the inverse Walsh transform.
    pub fn to_table(&self) -> Result<TruthTable<S>> {
        self.to_table_with_limit(MAX_DIMENSION)
    }

    pub fn to_table_with_limit(&self, limit: usize) -> Result<TruthTable<S>> {
        let d = self.dimension;
        check_dimension(d, limit)?;
        let mut c = vec![S::zero(); 1usize << d];
        c[0] = self.mean.clone();
        for (&q, k) in &self.kernels {
            let fact = S::factorial(q);
            for (t, v) in k.entries() {
                let mask = t.iter().fold(0usize, |m, &i| m | 1 << (i - 1));
                c[mask] = fact.clone() * v.clone();
            }
        }
        let mut h = 1;
        while h < c.len() {
            for block in (0..c.len()).step_by(2 * h) {
                for lo in block..block + h {
                    let a = c[lo].clone();
                    let b = c[lo + h].clone();
                    c[lo] = a.clone() - b.clone();
                    c[lo + h] = a + b;
                }
            }
            h *= 2;
        }
        Ok(TruthTable { d, values: c })
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ChaosDecomposition<T> {
        ChaosDecomposition {
            dimension: self.dimension,
            mean: f(&self.mean),
            kernels: self
                .kernels
                .iter()
                .map(|(&q, k)| (q, k.map_scalar(&f)))
                .filter(|(_, k)| !k.is_empty())
                .collect(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if !self.mean.close_to(&other.mean, tol) {
            return false;
        }
        let orders: std::collections::BTreeSet<usize> =
            self.kernels.keys().chain(other.kernels.keys()).copied().collect();
        orders.into_iter().all(|q| {
            let zero = SymmetricKernel::zero(q);
            let a = self.kernels.get(&q).unwrap_or(&zero);
            let b = other.kernels.get(&q).unwrap_or(&zero);
            a.approx_eq(b, tol)
        })
    }
}

/// `J_q(f)(ω) = q! Σ_{i_1<…<i_q} f(i) X_{i_1}…X_{i_q}`.
pub fn evaluate_multiple_integral<S: Scalar>(f: &SymmetricKernel<S>, omega: &RademacherPoint) -> Result<S> {
    if f.support_bound() > omega.dimension() {
        return Err(Error::DimensionTooSmall { needed: f.support_bound(), dimension: omega.dimension() });
    }
    let sum = f.entries().fold(S::zero(), |acc, (t, v)| {
        let neg = t.iter().filter(|&&k| omega.sign_unchecked(k) < 0).count() % 2 == 1;
        if neg {
            acc - v.clone()
        } else {
            acc + v.clone()
        }
    });
    Ok(sum * S::factorial(f.order()))
}

pub fn evaluate<S: Scalar>(dec: &ChaosDecomposition<S>, omega: &RademacherPoint) -> Result<S> {
    if dec.dimension > omega.dimension() {
        return Err(Error::DimensionTooSmall { needed: dec.dimension, dimension: omega.dimension() });
    }
    dec.kernels
        .values()
        .try_fold(dec.mean.clone(), |acc, k| Ok(acc + evaluate_multiple_integral(k, omega)?))
}

fn kernels_from_coefficients<S: Scalar>(d: usize, coef: &[S]) -> Result<ChaosDecomposition<S>> {
    let mut by_order: BTreeMap<usize, BTreeMap<IndexTuple, S>> = BTreeMap::new();
    for (mask, c) in coef.iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let t: IndexTuple = (0..d).filter(|b| mask >> b & 1 == 1).map(|b| b as u32 + 1).collect();
        let q = t.len();
        by_order.entry(q).or_default().insert(t, c.clone() / S::factorial(q));
    }
    let kernels = by_order
        .into_iter()
        .map(|(q, e)| SymmetricKernel::from_canonical(q, e))
        .collect();
    ChaosDecomposition::new(d, coef[0].clone(), kernels)
}

/// Decomposition by fast Walsh–Hadamard transform:
/// `n! f_n(i_1,…,i_n) = E[F X_{i_1}…X_{i_n}]`.
pub fn decompose_walsh<S: Scalar>(table: &TruthTable<S>) -> Result<ChaosDecomposition<S>> {
    decompose_walsh_with_limit(table, MAX_DIMENSION)
}

pub fn decompose_walsh_with_limit<S: Scalar>(table: &TruthTable<S>, limit: usize) -> Result<ChaosDecomposition<S>> {
    let d = table.d;
    check_dimension(d, limit)?;
    let mut c = table.values.clone();
    let mut h = 1;
    while h < c.len() {
        for block in (0..c.len()).step_by(2 * h) {
            for lo in block..block + h {
                let minus = c[lo].clone();
                let plus = c[lo + h].clone();
                c[lo] = plus.clone() + minus.clone();
                c[lo + h] = plus - minus;
            }
        }
        h *= 2;
    }
    let scale = S::from_i64(1i64 << d);
    for v in c.iter_mut() {
        *v = v.clone() / scale.clone();
    }
    kernels_from_coefficients(d, &c)
}

/// Decomposition by explicit conditional expectations and Möbius inversion
/// over subsets; `O(3^d)`, kept as an independent oracle.
pub fn decompose_hoeffding<S: Scalar>(table: &TruthTable<S>) -> Result<ChaosDecomposition<S>> {
    decompose_hoeffding_with_limit(table, MAX_DIMENSION)
}

pub fn decompose_hoeffding_with_limit<S: Scalar>(table: &TruthTable<S>, limit: usize) -> Result<ChaosDecomposition<S>> {
    let d = table.d;
    check_dimension(d, limit)?;
    let size = 1usize << d;
    let full = size - 1;
    let mean = table.mean();
    // cond[I] = E[F - EF | X_i = +1, i ∈ I]
    let mut cond = vec![S::zero(); size];
    for (i, slot) in cond.iter_mut().enumerate() {
        let free = full & !i;
        let mut sum = S::zero();
        let mut sub = free;
        loop {
            sum = sum + table.values[i | sub].clone();
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        let count = S::from_i64(1i64 << free.count_ones());
        *slot = sum / count - mean.clone();
    }
    let mut coef = vec![S::zero(); size];
    coef[0] = mean;
    for (j, slot) in coef.iter_mut().enumerate().skip(1) {
        let n = j.count_ones();
        let mut acc = S::zero();
        let mut sub = j;
        loop {
            let term = cond[sub].clone();
            if (n - sub.count_ones()) % 2 == 0 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & j;
        }
        *slot = acc;
    }
    kernels_from_coefficients(d, &coef)
}

/// Decomposition of `J_n(f) J_m(g)`:
/// `Σ_r r! C(n,r) C(m,r) J_{n+m-2r}((f ⋆_r^r g)~ 1_Δ)`.
pub fn product<S: Scalar>(f: &SymmetricKernel<S>, g: &SymmetricKernel<S>) -> Result<ChaosDecomposition<S>> {
    let (n, m) = (f.order(), g.order());
    let d = f.support_bound().max(g.support_bound());
    let mut mean = S::zero();
    let mut kernels = Vec::new();
    for r in 0..=n.min(m) {
        let coef = S::factorial(r)
            * S::from_i64(binomial_u64(n, r) as i64)
            * S::from_i64(binomial_u64(m, r) as i64);
        if n + m == 2 * r {
            mean = coef * f.inner(g);
        } else {
            let k = symmetrized_off_diagonal(f, g, r)?.scale(&coef);
            if !k.is_empty() {
                kernels.push(k);
            }
        }
    }
    ChaosDecomposition::new(d, mean, kernels)
}

/// `Cov(A, B) = Σ_q q! ⟨a_q, b_q⟩`.
pub fn covariance<S: Scalar>(a: &ChaosDecomposition<S>, b: &ChaosDecomposition<S>) -> S {
    a.kernels.iter().fold(S::zero(), |acc, (q, f)| match b.kernels.get(q) {
        Some(g) => acc + S::factorial(*q) * f.inner(g),
        None => acc,
    })
}
