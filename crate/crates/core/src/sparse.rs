//! Symmetric sparse index sets, their star and sharp statistics, the
//! normalized multilinear-form kernel, and fractional Cartesian products.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{DetMap, IndexTuple, SymmetricKernel};
use crate::scalar::{factorial_u64, Scalar};

/// Largest `d` accepted by the pair scans.
pub const SHARP_DIMENSION_LIMIT: usize = 6;

/// A symmetric subset of `[N]^d` without diagonal tuples, stored as its
/// strictly increasing representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub struct SparseIndexSet {
    d: usize,
    n: usize,
    tuples: Vec<IndexTuple>,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    tuples: Vec<Vec<u32>>,
}

impl TryFrom<RawSet> for SparseIndexSet {
    type Error = Error;
    fn try_from(raw: RawSet) -> Result<Self> {
        SparseIndexSet::new(raw.d, raw.n, raw.tuples)
    }
}

impl From<SparseIndexSet> for RawSet {
    fn from(s: SparseIndexSet) -> Self {
        RawSet { d: s.d, n: s.n, tuples: s.tuples.iter().map(|t| t.to_vec()).collect() }
    }
}

impl SparseIndexSet {
    /// Builds the set from any orderings of its tuples; each tuple is sorted
    /// and duplicates collapse.
    pub fn new<T: AsRef<[u32]>>(d: usize, n: usize, tuples: impl IntoIterator<Item = T>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Invalid(format!("sparse sets need d >= 2, got {d}")));
        }
        let mut set = BTreeSet::new();
        for t in tuples {
            let t = t.as_ref();
            if t.len() != d {
                return Err(Error::OrderMismatch { order: d, tuple: t.to_vec() });
            }
            let mut s: IndexTuple = t.iter().copied().collect();
            s.sort_unstable();
            if s[0] == 0 {
                return Err(Error::ZeroCoordinate(t.to_vec()));
            }
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DiagonalEntry(t.to_vec()));
            }
            let top = s[d - 1] as usize;
            if top > n {
                return Err(Error::IndexOutOfRange { index: top, bound: n });
            }
            set.insert(s);
        }
        Ok(SparseIndexSet { d, n, tuples: set.into_iter().collect() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The ambient bound `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn representatives(&self) -> &[IndexTuple] {
        &self.tuples
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// `|F_N|`, counting every ordering.
    pub fn cardinality(&self) -> u64 {
        factorial_u64(self.d) * self.tuples.len() as u64
    }

    pub fn contains(&self, tuple: &[u32]) -> bool {
        let mut s: IndexTuple = tuple.iter().copied().collect();
        s.sort_unstable();
        self.tuples.binary_search(&s).is_ok()
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptySet)
        } else {
            Ok(())
        }
    }
}

/// `|F*_{N,j}|`: tuples (all orderings) containing `j`.
pub fn star_count(set: &SparseIndexSet, j: usize) -> Result<u64> {
    if j == 0 || j > set.n {
        return Err(Error::IndexOutOfRange { index: j, bound: set.n });
    }
    let j = j as u32;
    let reps = set.tuples.iter().filter(|t| t.contains(&j)).count() as u64;
    Ok(factorial_u64(set.d) * reps)
}

/// `j ↦ |F*_{N,j}|` for every `j` that occurs.
pub fn star_counts(set: &SparseIndexSet) -> BTreeMap<u32, u64> {
    let mut counts = BTreeMap::new();
    let df = factorial_u64(set.d);
    for t in &set.tuples {
        for &c in t.iter() {
            *counts.entry(c).or_insert(0) += df;
        }
    }
    counts
}

pub fn max_star_count(set: &SparseIndexSet) -> u64 {
    star_counts(set).values().copied().max().unwrap_or(0)
}

fn check_sharp_dimension(d: usize) -> Result<()> {
    if d > SHARP_DIMENSION_LIMIT {
        return Err(Error::DimensionLimit { d, limit: SHARP_DIMENSION_LIMIT });
    }
    Ok(())
}

fn split_by_mask(t: &[u32], mask: u32) -> (IndexTuple, IndexTuple) {
    let (mut inside, mut outside) = (IndexTuple::new(), IndexTuple::new());
    for (i, &c) in t.iter().enumerate() {
        if mask >> i & 1 == 1 {
            inside.push(c);
        } else {
            outside.push(c);
        }
    }
    (inside, outside)
}

fn union_sorted(a: &[u32], b: &[u32]) -> IndexTuple {
    let mut u: IndexTuple = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u
}

fn disjoint(a: &[u32], b: &[u32]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

/// For every representative `i`, the sorted representatives `k` with
/// `(i, k)` in the sharp set.
///
/// A disjoint pair `(I, K)` qualifies iff `I ∪ K` splits into two members of
/// the set other than `I` and `K`. Each such split `A ⊔ B` has
/// `A = K' ∪ (I \ I')` and `B = I' ∪ (K \ K')`, so the partners of `I` are
/// found by walking the members containing `I \ I'` and those containing `I'`.
fn sharp_partners(set: &SparseIndexSet) -> Result<Vec<Vec<u32>>> {
    let d = set.d;
    check_sharp_dimension(d)?;
    let position: DetMap<IndexTuple, u32> =
        set.tuples.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    let mut containing: DetMap<IndexTuple, Vec<u32>> = DetMap::default();
    for (i, t) in set.tuples.iter().enumerate() {
        for mask in 1..(1u32 << d) - 1 {
            containing.entry(split_by_mask(t, mask).0).or_default().push(i as u32);
        }
    }
    let empty = Vec::new();
    Ok((0..set.tuples.len())
        .into_par_iter()
        .map(|i| {
            let it = &set.tuples[i];
            let mut partners = Vec::new();
            for mask in 1..(1u32 << d) - 1 {
                // mask selects I', its complement is kept inside A
                let (moved, keep) = split_by_mask(it, mask);
                let via_keep = containing.get(&keep).unwrap_or(&empty);
                let via_moved = containing.get(&moved).unwrap_or(&empty);
                for &a in via_keep {
                    let at = &set.tuples[a as usize];
                    let k_prime: IndexTuple = at.iter().copied().filter(|c| !keep.contains(c)).collect();
                    if !disjoint(&k_prime, it) {
                        continue;
                    }
                    for &b in via_moved {
                        let bt = &set.tuples[b as usize];
                        let rest: IndexTuple = bt.iter().copied().filter(|c| !moved.contains(c)).collect();
                        if !disjoint(&rest, it) || !disjoint(&rest, &k_prime) {
                            continue;
                        }
                        if let Some(&k) = position.get(&union_sorted(&k_prime, &rest)) {
                            partners.push(k);
                        }
                    }
                }
            }
            partners.sort_unstable();
            partners.dedup();
            partners
        })
        .collect())
}

/// `|F#_N|` over ordered pairs of the full symmetric set.
pub fn sharp_count(set: &SparseIndexSet) -> Result<u64> {
    let partners = sharp_partners(set)?;
    let pairs: u64 = partners.iter().map(|p| p.len() as u64).sum();
    let df = factorial_u64(set.d);
    Ok(df * df * pairs)
}

/// `|F#_N|` by scanning every ordered pair of representatives and every
/// choice of exchanged positions. Quadratic in the set size.
pub fn sharp_count_brute_force(set: &SparseIndexSet) -> Result<u64> {
    let d = set.d;
    check_sharp_dimension(d)?;
    let members: HashSet<&IndexTuple> = set.tuples.iter().collect();
    let recombines = |i: &IndexTuple, k: &IndexTuple| {
        for mi in 1..(1u32 << d) - 1 {
            let p = mi.count_ones();
            let (i_moved, i_keep) = split_by_mask(i, mi);
            for mk in (1..(1u32 << d) - 1).filter(|m| m.count_ones() == p) {
                let (k_moved, k_keep) = split_by_mask(k, mk);
                if members.contains(&union_sorted(&k_moved, &i_keep))
                    && members.contains(&union_sorted(&i_moved, &k_keep))
                {
                    return true;
                }
            }
        }
        false
    };
    let pairs: u64 = set
        .tuples
        .par_iter()
        .map(|i| {
            set.tuples
                .iter()
                .filter(|k| disjoint(i, k) && recombines(i, k))
                .count() as u64
        })
        .sum();
    let df = factorial_u64(d);
    Ok(df * df * pairs)
}

/// Weighted sharp measure `Σ_{(I,K) ∈ F#} w(I) w(K)` over representative
/// pairs (not yet multiplied by `(d!)²`).
pub(crate) fn sharp_weighted(set: &SparseIndexSet, w: &[f64]) -> Result<f64> {
    let partners = sharp_partners(set)?;
    Ok(partners
        .iter()
        .enumerate()
        .map(|(i, ks)| w[i] * ks.iter().map(|&k| w[k as usize]).sum::<f64>())
        .sum())
}

/// `f_N = [d!|F_N|]^{-1/2} 1_{F_N}`, so that `d!‖f_N‖² = 1`.
pub fn multilinear_kernel(set: &SparseIndexSet) -> Result<SymmetricKernel<f64>> {
    set.require_nonempty()?;
    let c = 1.0 / ((factorial_u64(set.d) * set.cardinality()) as f64).sqrt();
    SymmetricKernel::new(set.d, set.tuples.iter().map(|t| (t.clone(), c)))
}

/// The indicator `1_{F_N}` together with the squared normalization
/// `c² = 1/(d!|F_N|)`; exact in any scalar mode.
pub fn multilinear_indicator<S: Scalar>(set: &SparseIndexSet) -> Result<(SymmetricKernel<S>, S)> {
    set.require_nonempty()?;
    let f = SymmetricKernel::new(set.d, set.tuples.iter().map(|t| (t.clone(), S::one())))?;
    let c2 = S::one() / S::from_i64((factorial_u64(set.d) * set.cardinality()) as i64);
    Ok((f, c2))
}

/// A connected `m`-uniform cover of `[d]` by `d` distinct sets in which
/// every index appears exactly `m` times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    d: usize,
    m: usize,
    sets: Vec<Vec<u32>>,
}

impl Cover {
    pub fn new(d: usize, m: usize, sets: Vec<Vec<u32>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidCover(msg));
        if d < 3 || m < 2 || m >= d {
            return bad(format!("need d >= 3 and 2 <= m <= d-1, got d={d}, m={m}"));
        }
        if sets.len() != d {
            return bad(format!("expected {d} sets, got {}", sets.len()));
        }
        let mut canon = Vec::with_capacity(d);
        let mut counts = vec![0usize; d + 1];
        for s in &sets {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != m {
                return bad(format!("set {s:?} does not have {m} distinct elements"));
            }
            if s.iter().any(|&j| j == 0 || j as usize > d) {
                return bad(format!("set {s:?} leaves [1, {d}]"));
            }
            for &j in &s {
                counts[j as usize] += 1;
            }
            canon.push(s);
        }
        let distinct: BTreeSet<&Vec<u32>> = canon.iter().collect();
        if distinct.len() != d {
            return bad("sets are not distinct".into());
        }
        if let Some(j) = (1..=d).find(|&j| counts[j] != m) {
            return bad(format!("index {j} appears {} times, expected {m}", counts[j]));
        }
        // connectivity of the sets under "shares an index"
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..d {
                if !seen[b] && !disjoint(&canon[a], &canon[b]) {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("cover is not connected".into());
        }
        Ok(Cover { d, m, sets: canon })
    }

    /// Parses `"1,2;2,3;1,3"`.
    pub fn parse(d: usize, m: usize, spec: &str) -> Result<Self> {
        let sets = spec
            .split(';')
            .map(|part| {
                part.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::InvalidCover(format!("bad index '{x}'")))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, m, sets)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }
}

/// The one-to-one map `φ: [n]^m → [N]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Injection {
    /// `k ↦ 1 + Σ_j (k_j - 1) n^{j-1}`.
    MixedRadix,
    /// A uniformly random injection drawn from a seeded generator.
    Random { seed: u64 },
    /// Images of the mixed-radix codes `0..n^m`, in that order.
    Explicit(Vec<u32>),
}

/// Largest `n` with `n^m ≤ big`.
fn integer_root(big: usize, m: usize) -> usize {
    let fits = |n: usize| (0..m).try_fold(1usize, |acc, _| acc.checked_mul(n)).is_some_and(|p| p <= big);
    let mut n = (big as f64).powf(1.0 / m as f64).round() as usize + 1;
    while !fits(n) {
        n -= 1;
    }
    while fits(n + 1) {
        n += 1;
    }
    n
}

fn injection_table(phi: &Injection, n: usize, m: usize, big_n: usize) -> Result<Vec<u32>> {
    let size = n.pow(m as u32);
    match phi {
        Injection::MixedRadix => Ok((1..=size as u32).collect()),
        Injection::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(sample(&mut rng, big_n, size).into_iter().map(|x| x as u32 + 1).collect())
        }
        Injection::Explicit(table) => {
            if table.len() != size {
                return Err(Error::NotInjective(format!("expected {size} images, got {}", table.len())));
            }
            if let Some(&x) = table.iter().find(|&&x| x == 0 || x as usize > big_n) {
                return Err(Error::NotInjective(format!("image {x} outside [1, {big_n}]")));
            }
            let distinct: HashSet<u32> = table.iter().copied().collect();
            if distinct.len() != size {
                return Err(Error::NotInjective("two codes share an image".into()));
            }
            Ok(table.clone())
        }
    }
}

/// `F_N = sym(F*_N ∩ Δ)` with `F*_N = {(φ(π_{S_1}k), …, φ(π_{S_d}k)) : k ∈ [n]^d}`
/// and `n = ⌊N^{1/m}⌋`.
pub fn fractional_product(cover: &Cover, big_n: usize, phi: &Injection) -> Result<SparseIndexSet> {
    let (d, m) = (cover.d, cover.m);
    let min = d.pow(m as u32);
    if big_n < min {
        return Err(Error::NTooSmall { n: big_n, min });
    }
    let n = integer_root(big_n, m);
    let table = injection_table(phi, n, m, big_n)?;
    let total = n.pow(d as u32);
    let mut out = BTreeSet::new();
    let mut k = vec![0usize; d];
    for code in 0..total {
        let mut c = code;
        for kj in k.iter_mut() {
            *kj = c % n;
            c /= n;
        }
        let mut t: IndexTuple = cover
            .sets
            .iter()
            .map(|s| {
                let idx = s.iter().rev().fold(0usize, |acc, &j| acc * n + k[j as usize - 1]);
                table[idx]
            })
            .collect();
        t.sort_unstable();
        if t.windows(2).all(|w| w[0] != w[1]) {
            out.insert(t);
        }
    }
    Ok(SparseIndexSet { d, n: big_n, tuples: out.into_iter().collect() })
}

/// Least-squares slope of `ln y` against `ln x` over the positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
