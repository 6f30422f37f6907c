//! Discrete kernels on tuples of positive integers.
//!
//! A [`SymmetricKernel`] stores one coefficient per symmetry class, keyed by
//! the strictly increasing representative of the class. Its symmetric
//! extension to all permutations, and the value zero on every tuple with a
//! repeated coordinate, are implicit. A [`GeneralKernel`] stores arbitrary
//! (possibly asymmetric, possibly diagonal) tuples explicitly and is what
//! star contractions produce.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::BuildHasherDefault;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ordered list of 1-based coordinates into the Rademacher sequence.
pub type IndexTuple = SmallVec<[u32; 8]>;

/// Hash map with a fixed hasher so iteration order (and therefore float
/// summation order) is reproducible across runs.
pub(crate) type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

pub(crate) fn has_repeat(sorted: &[u32]) -> bool {
    sorted.windows(2).any(|w| w[0] == w[1])
}

pub(crate) fn is_off_diagonal(tuple: &[u32]) -> bool {
    let mut s: IndexTuple = tuple.into();
    s.sort_unstable();
    !has_repeat(&s)
}

/// Rearranges `v` into the next lexicographic permutation; false when `v`
/// was already the last one.
pub(crate) fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Calls `f` once for every distinct arrangement of the multiset `tuple`.
pub(crate) fn for_each_arrangement(tuple: &[u32], mut f: impl FnMut(&[u32])) {
    let mut v: IndexTuple = tuple.into();
    v.sort_unstable();
    loop {
        f(&v);
        if !next_permutation(&mut v) {
            break;
        }
    }
}

/// Number of distinct arrangements of a sorted multiset.
pub(crate) fn arrangement_count(sorted: &[u32]) -> u64 {
    let mut count = crate::scalar::factorial_u64(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        count /= crate::scalar::factorial_u64(j - i);
        i = j;
    }
    count
}

/// Symmetric kernel vanishing on diagonals, stored on sorted representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricKernel<S = f64> {
    order: usize,
    entries: BTreeMap<IndexTuple, S>,
}

impl<S: Scalar> SymmetricKernel<S> {
    /// Builds a kernel from raw `(tuple, value)` pairs given in any
    /// coordinate order. Repeating a symmetry class with the same value is
    /// accepted; zero coefficients are dropped.
    pub fn new<T, I>(order: usize, raw: I) -> Result<Self>
    where
        T: AsRef<[u32]>,
        I: IntoIterator<Item = (T, S)>,
    {
        if order == 0 {
            return Err(Error::Invalid("symmetric kernels have order >= 1".into()));
        }
        let mut entries: BTreeMap<IndexTuple, S> = BTreeMap::new();
        for (tuple, value) in raw {
            let tuple = tuple.as_ref();
            if tuple.len() != order {
                return Err(Error::OrderMismatch { order, tuple: tuple.to_vec() });
            }
            if tuple.contains(&0) {
                return Err(Error::ZeroCoordinate(tuple.to_vec()));
            }
            let mut key: IndexTuple = tuple.into();
            key.sort_unstable();
            if has_repeat(&key) {
                return Err(Error::DiagonalEntry(tuple.to_vec()));
            }
            match entries.get(&key) {
                Some(prev) if *prev != value => {
                    return Err(Error::ConflictingValues(key.to_vec()));
                }
                Some(_) => {}
                None => {
                    entries.insert(key, value);
                }
            }
        }
        entries.retain(|_, v| !v.is_zero());
        Ok(SymmetricKernel { order, entries })
    }

    pub fn zero(order: usize) -> Self {
        SymmetricKernel { order, entries: BTreeMap::new() }
    }

    /// Entries already sorted, off-diagonal and of the right length.
    pub(crate) fn from_canonical(order: usize, entries: BTreeMap<IndexTuple, S>) -> Self {
        debug_assert!(entries.keys().all(|k| k.len() == order && !has_repeat(k)));
        let mut entries = entries;
        entries.retain(|_, v| !v.is_zero());
        SymmetricKernel { order, entries }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorted representatives with their coefficients.
    pub fn entries(&self) -> impl Iterator<Item = (&IndexTuple, &S)> {
        self.entries.iter()
    }

    /// Smallest `N` with support inside `[N]^q`; 0 for the zero kernel.
    pub fn support_bound(&self) -> usize {
        self.entries.keys().map(|k| *k.last().unwrap() as usize).max().unwrap_or(0)
    }

    /// Value at an arbitrary tuple (any order, diagonals allowed).
    pub fn get(&self, tuple: &[u32]) -> S {
        if tuple.len() != self.order {
            return S::zero();
        }
        let mut key: IndexTuple = tuple.into();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_else(S::zero)
    }

    /// Squared norm over all of `N^q`: each class carries `q!` permutations.
    pub fn norm_sq(&self) -> S {
        let sum = self.entries.values().fold(S::zero(), |acc, v| acc + v.clone() * v.clone());
        sum * S::factorial(self.order)
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().to_f64().max(0.0).sqrt()
    }

    /// Inner product on `N^q`.
    pub fn inner(&self, other: &Self) -> S {
        if self.order != other.order {
            return S::zero();
        }
        let (small, large) =
            if self.len() <= other.len() { (self, other) } else { (other, self) };
        let sum = small.entries.iter().fold(S::zero(), |acc, (k, v)| match large.entries.get(k) {
            Some(w) => acc + v.clone() * w.clone(),
            None => acc,
        });
        sum * S::factorial(self.order)
    }

    /// Influence of coordinate `j`: the sum of `f(j, b)^2` over all `b`.
    pub fn influence(&self, j: u32) -> S {
        let sum = self
            .entries
            .iter()
            .filter(|(k, _)| k.contains(&j))
            .fold(S::zero(), |acc, (_, v)| acc + v.clone() * v.clone());
        sum * S::factorial(self.order - 1)
    }

    /// Influence of every coordinate that appears in the support.
    pub fn influences(&self) -> BTreeMap<u32, S> {
        let mut out: BTreeMap<u32, S> = BTreeMap::new();
        for (k, v) in &self.entries {
            let sq = v.clone() * v.clone();
            for &j in k {
                let slot = out.entry(j).or_insert_with(S::zero);
                *slot = slot.clone() + sq.clone();
            }
        }
        let fact = S::factorial(self.order - 1);
        for v in out.values_mut() {
            *v = v.clone() * fact.clone();
        }
        out
    }

    pub fn max_influence(&self) -> f64 {
        self.influences().values().map(|v| v.to_f64()).fold(0.0, f64::max)
    }

    /// The kernel `f(., k)` of order `q - 1`. For `q = 1` the result is the
    /// scalar `f(k)`, returned through [`SymmetricKernel::section_scalar`].
    pub fn section(&self, k: u32) -> Option<SymmetricKernel<S>> {
        if self.order < 2 {
            return None;
        }
        let entries = self
            .entries
            .iter()
            .filter(|(t, _)| t.contains(&k))
            .map(|(t, v)| {
                let rest: IndexTuple = t.iter().copied().filter(|&c| c != k).collect();
                (rest, v.clone())
            })
            .collect();
        Some(SymmetricKernel { order: self.order - 1, entries })
    }

    pub fn section_scalar(&self, k: u32) -> S {
        if self.order != 1 {
            return S::zero();
        }
        self.get(&[k])
    }

    pub fn scale(&self, c: &S) -> Self {
        let entries = self.entries.iter().map(|(k, v)| (k.clone(), v.clone() * c.clone())).collect();
        SymmetricKernel::from_canonical(self.order, entries)
    }

    /// Coefficient-wise sum; `None` when the orders differ.
    pub fn add(&self, other: &Self) -> Option<Self> {
        if self.order != other.order {
            return None;
        }
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let slot = entries.entry(k.clone()).or_insert_with(S::zero);
            *slot = slot.clone() + v.clone();
        }
        Some(SymmetricKernel::from_canonical(self.order, entries))
    }

    pub fn sub(&self, other: &Self) -> Option<Self> {
        self.add(&other.scale(&-S::one()))
    }

    /// Expands to every permutation of every stored class.
    pub fn to_general(&self) -> GeneralKernel<S> {
        let mut entries = DetMap::default();
        for (k, v) in &self.entries {
            for_each_arrangement(k, |p| {
                entries.insert(IndexTuple::from(p), v.clone());
            });
        }
        GeneralKernel { order: self.order, entries }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SymmetricKernel<T> {
        let entries = self.entries.iter().map(|(k, v)| (k.clone(), f(v))).collect();
        SymmetricKernel::from_canonical(self.order, entries)
    }

    /// Equality of canonical entry maps up to `tol` (exact for rationals).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.order != other.order {
            return false;
        }
        let zero = S::zero();
        let keys = self.entries.keys().chain(other.entries.keys());
        keys.into_iter().all(|k| {
            let a = self.entries.get(k).unwrap_or(&zero);
            let b = other.entries.get(k).unwrap_or(&zero);
            a.close_to(b, tol)
        })
    }

    /// Renames coordinates through an injective map.
    pub fn remap(&self, f: impl Fn(u32) -> u32) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(t, v)| {
                let mut k: IndexTuple = t.iter().map(|&c| f(c)).collect();
                k.sort_unstable();
                (k, v.clone())
            })
            .collect();
        SymmetricKernel::from_canonical(self.order, entries)
    }

    /// Shifts every coordinate by `offset`, e.g. to move a kernel indexed
    /// by the integers onto the positive integers.
    pub fn relabel(&self, offset: i64) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, v) in &self.entries {
            let mut t = IndexTuple::new();
            for &c in k {
                let shifted = c as i64 + offset;
                if shifted < 1 || shifted > u32::MAX as i64 {
                    return Err(Error::ZeroCoordinate(k.to_vec()));
                }
                t.push(shifted as u32);
            }
            entries.insert(t, v.clone());
        }
        Ok(SymmetricKernel::from_canonical(self.order, entries))
    }
}

/// Convenience wrapper around [`SymmetricKernel::new`].
pub fn make_symmetric_kernel<S: Scalar, T: AsRef<[u32]>>(
    order: usize,
    raw: impl IntoIterator<Item = (T, S)>,
) -> Result<SymmetricKernel<S>> {
    SymmetricKernel::new(order, raw)
}

/// Kernel on explicit tuples; may be asymmetric and may charge diagonals.
/// Order 0 holds a single scalar under the empty tuple.
#[derive(Clone, Debug)]
pub struct GeneralKernel<S = f64> {
    order: usize,
    entries: DetMap<IndexTuple, S>,
}

impl<S: Scalar> PartialEq for GeneralKernel<S> {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.entries == other.entries
    }
}

impl<S: Scalar> GeneralKernel<S> {
    /// Builds a kernel; repeated tuples are summed and zeros dropped.
    pub fn new<T, I>(order: usize, raw: I) -> Result<Self>
    where
        T: AsRef<[u32]>,
        I: IntoIterator<Item = (T, S)>,
    {
        let mut entries: DetMap<IndexTuple, S> = DetMap::default();
        for (tuple, value) in raw {
            let tuple = tuple.as_ref();
            if tuple.len() != order {
                return Err(Error::OrderMismatch { order, tuple: tuple.to_vec() });
            }
            if tuple.contains(&0) {
                return Err(Error::ZeroCoordinate(tuple.to_vec()));
            }
            let slot = entries.entry(tuple.into()).or_insert_with(S::zero);
            *slot = slot.clone() + value;
        }
        entries.retain(|_, v| !v.is_zero());
        Ok(GeneralKernel { order, entries })
    }

    pub fn scalar(value: S) -> Self {
        let mut entries = DetMap::default();
        if !value.is_zero() {
            entries.insert(IndexTuple::new(), value);
        }
        GeneralKernel { order: 0, entries }
    }

    pub(crate) fn from_map(order: usize, mut entries: DetMap<IndexTuple, S>) -> Self {
        entries.retain(|_, v| !v.is_zero());
        GeneralKernel { order, entries }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, tuple: &[u32]) -> S {
        self.entries.get(tuple).cloned().unwrap_or_else(S::zero)
    }

    /// The value of an order-0 kernel.
    pub fn scalar_value(&self) -> S {
        self.get(&[])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&IndexTuple, &S)> {
        self.entries.iter()
    }

    /// Entries in lexicographic tuple order.
    pub fn sorted_entries(&self) -> Vec<(IndexTuple, S)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn norm_sq(&self) -> S {
        self.sorted_entries().into_iter().fold(S::zero(), |acc, (_, v)| acc + v.clone() * v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().to_f64().max(0.0).sqrt()
    }

    /// Canonical symmetrization: the average over all coordinate permutations.
    pub fn symmetrize(&self) -> GeneralKernel<S> {
        if self.order <= 1 {
            return self.clone();
        }
        let mut class_sums: BTreeMap<IndexTuple, S> = BTreeMap::new();
        for (k, v) in &self.entries {
            let mut key = k.clone();
            key.sort_unstable();
            let slot = class_sums.entry(key).or_insert_with(S::zero);
            *slot = slot.clone() + v.clone();
        }
        let mut entries = DetMap::default();
        for (key, sum) in class_sums {
            // averaging over n! permutations of a multiset is averaging over its
            // distinct arrangements
            let value = sum / S::from_i64(arrangement_count(&key) as i64);
            if value.is_zero() {
                continue;
            }
            for_each_arrangement(&key, |p| {
                entries.insert(IndexTuple::from(p), value.clone());
            });
        }
        GeneralKernel { order: self.order, entries }
    }

    /// Multiplication by the indicator of tuples with pairwise distinct coordinates.
    pub fn restrict_off_diagonal(&self) -> GeneralKernel<S> {
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| is_off_diagonal(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        GeneralKernel { order: self.order, entries }
    }

    /// Multiplication by the indicator of tuples with a repeated coordinate.
    pub fn restrict_diagonal(&self) -> GeneralKernel<S> {
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| !is_off_diagonal(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        GeneralKernel { order: self.order, entries }
    }

    pub fn add(&self, other: &Self) -> Option<Self> {
        if self.order != other.order {
            return None;
        }
        let mut entries = self.entries.clone();
        for (k, v) in other.sorted_entries() {
            let slot = entries.entry(k).or_insert_with(S::zero);
            *slot = slot.clone() + v;
        }
        Some(GeneralKernel::from_map(self.order, entries))
    }

    pub fn sub(&self, other: &Self) -> Option<Self> {
        let neg = GeneralKernel {
            order: other.order,
            entries: other.entries.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        };
        self.add(&neg)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.order != other.order {
            return false;
        }
        let zero = S::zero();
        self.entries.keys().chain(other.entries.keys()).all(|k| {
            let a = self.entries.get(k).unwrap_or(&zero);
            let b = other.entries.get(k).unwrap_or(&zero);
            a.close_to(b, tol)
        })
    }

    /// Converts to a [`SymmetricKernel`] when the kernel is symmetric (up to
    /// `tol`) and vanishes on diagonals.
    pub fn to_symmetric(&self, tol: f64) -> Result<SymmetricKernel<S>> {
        if self.order == 0 {
            return Err(Error::Invalid("order-0 kernel has no symmetric form".into()));
        }
        let mut canon: BTreeMap<IndexTuple, S> = BTreeMap::new();
        for (k, v) in &self.entries {
            if !is_off_diagonal(k) {
                if v.to_f64().abs() > tol || S::MODE == "rational" {
                    return Err(Error::DiagonalEntry(k.to_vec()));
                }
                continue;
            }
            let mut key = k.clone();
            key.sort_unstable();
            match canon.get(&key) {
                Some(prev) if !prev.close_to(v, tol) => {
                    return Err(Error::ConflictingValues(key.to_vec()))
                }
                Some(_) => {}
                None => {
                    canon.insert(key, v.clone());
                }
            }
        }
        for (key, v) in &canon {
            let mut missing = false;
            for_each_arrangement(key, |p| {
                if !self.entries.contains_key(p) {
                    missing = true;
                }
            });
            if missing && v.to_f64().abs() > tol {
                return Err(Error::ConflictingValues(key.to_vec()));
            }
        }
        Ok(SymmetricKernel::from_canonical(self.order, canon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn make_kernel_examples() {
        let f = SymmetricKernel::new(2, [([1u32, 2], 0.5)]).unwrap();
        assert_eq!(f.get(&[1, 2]), 0.5);
        assert_eq!(f.get(&[2, 1]), 0.5);
        assert_eq!(
            SymmetricKernel::new(2, [([1u32, 1], 1.0)]).unwrap_err(),
            Error::DiagonalEntry(vec![1, 1])
        );
        let g = SymmetricKernel::new(3, [([3u32, 1, 2], 1.0)]).unwrap();
        let (k, v) = g.entries().next().unwrap();
        assert_eq!(k.as_slice(), &[1, 2, 3]);
        assert_eq!(*v, 1.0);
    }

    #[test]
    fn make_kernel_errors() {
        assert!(matches!(
            SymmetricKernel::new(2, [(vec![1u32, 2, 3], 1.0)]),
            Err(Error::OrderMismatch { .. })
        ));
        assert_eq!(
            SymmetricKernel::new(2, [([1u32, 2], 1.0), ([2, 1], 2.0)]).unwrap_err(),
            Error::ConflictingValues(vec![1, 2])
        );
        // same value twice is fine, zeros are dropped
        let f = SymmetricKernel::new(2, [([1u32, 2], 1.0), ([2, 1], 1.0), ([3, 4], 0.0)]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.support_bound(), 2);
    }

    #[test]
    fn symmetrize_examples() {
        let g = GeneralKernel::new(2, [([1u32, 2], 1.0)]).unwrap();
        let s = g.symmetrize();
        assert_eq!(s.get(&[1, 2]), 0.5);
        assert_eq!(s.get(&[2, 1]), 0.5);
        assert!(s.symmetrize().approx_eq(&s, 0.0));

        let g = GeneralKernel::new(2, [([1u32, 2], 2.0), ([2, 1], 4.0), ([3, 3], 6.0)]).unwrap();
        let s = g.symmetrize();
        assert_eq!(s.get(&[1, 2]), 3.0);
        assert_eq!(s.get(&[2, 1]), 3.0);
        assert_eq!(s.get(&[3, 3]), 6.0);
    }

    #[test]
    fn symmetrize_multiset_in_rationals() {
        // g(1,1,2) = 3 alone: 3!/2! = 3 distinct arrangements share the mass
        let g = GeneralKernel::<Rational>::new(3, [([1u32, 1, 2], Rational::from_i64(3))]).unwrap();
        let s = g.symmetrize();
        for t in [[1u32, 1, 2], [1, 2, 1], [2, 1, 1]] {
            assert_eq!(s.get(&t), Rational::from_i64(1));
        }
    }

    #[test]
    fn norms() {
        let f = SymmetricKernel::new(2, [([1u32, 2], 0.5)]).unwrap();
        assert!((f.l2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((f.to_general().l2_norm() - f.l2_norm()).abs() < 1e-15);
        assert_eq!(SymmetricKernel::<f64>::zero(3).l2_norm(), 0.0);
        let g = GeneralKernel::new(2, [([1u32, 1], 3.0)]).unwrap();
        assert_eq!(g.l2_norm(), 3.0);
    }

    #[test]
    fn influence_examples() {
        let f = SymmetricKernel::new(2, [([1u32, 2], 0.5)]).unwrap();
        assert_eq!(f.influence(1), 0.25);
        assert_eq!(f.influence(3), 0.0);
        let f1 = SymmetricKernel::new(1, [([1u32], 3.0)]).unwrap();
        assert_eq!(f1.influence(1), 9.0);
        let f2 = SymmetricKernel::new(2, [([1u32, 2], 1.0), ([1, 3], 1.0)]).unwrap();
        assert_eq!(f2.influence(1), 2.0);
        assert_eq!(f2.influences()[&1], 2.0);
    }

    #[test]
    fn restrict_examples() {
        let g = GeneralKernel::new(2, [([1u32, 1], 5.0), ([1, 2], 3.0)]).unwrap();
        let r = g.restrict_off_diagonal();
        assert_eq!(r.len(), 1);
        assert_eq!(r.get(&[1, 2]), 3.0);
        assert_eq!(r.restrict_off_diagonal(), r);
        let g3 = GeneralKernel::new(3, [([1u32, 2, 1], 7.0)]).unwrap();
        assert!(g3.restrict_off_diagonal().is_empty());
        assert_eq!(g3.restrict_diagonal().get(&[1, 2, 1]), 7.0);
    }

    #[test]
    fn round_trip_through_general() {
        let f = SymmetricKernel::new(3, [([1u32, 2, 5], 0.25), ([2, 3, 4], -1.0)]).unwrap();
        let back = f.to_general().to_symmetric(0.0).unwrap();
        assert_eq!(back, f);
        let asym = GeneralKernel::new(2, [([1u32, 2], 1.0)]).unwrap();
        assert!(asym.to_symmetric(1e-12).is_err());
    }

    #[test]
    fn section_and_relabel() {
        let f = SymmetricKernel::new(3, [([1u32, 2, 3], 2.0), ([2, 4, 5], 1.0)]).unwrap();
        let s = f.section(2).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.get(&[3, 1]), 2.0);
        assert_eq!(s.get(&[4, 5]), 1.0);
        let r = f.relabel(10).unwrap();
        assert_eq!(r.get(&[11, 12, 13]), 2.0);
        assert!(f.relabel(-1).is_err());
    }

    #[test]
    fn permutation_helpers() {
        let mut seen = Vec::new();
        for_each_arrangement(&[2, 1, 1], |p| seen.push(p.to_vec()));
        assert_eq!(seen, vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);
        assert_eq!(arrangement_count(&[1, 1, 2]), 3);
        assert_eq!(arrangement_count(&[1, 2, 3, 4]), 24);
    }
}
