//! Star contractions `f ⋆_r^l g` and the norm estimates they satisfy.
//!
//! Output layout of [`star`]: the first `n - r` coordinates are free in `f`,
//! the next `r - l` are shared by `f` and `g` without being summed, and the
//! last `m - r` are free in `g`.
//!
//! The norm routines never materialize the contraction. They group `f` and
//! `g` by the shared-but-unsummed set, index the summed set, and accumulate
//! contributions by sorting, which keeps sparse-set kernels with tens of
//! thousands of entries tractable.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{for_each_arrangement, DetMap, GeneralKernel, IndexTuple, SymmetricKernel};
use crate::scalar::Scalar;

fn check_range(n: usize, m: usize, r: usize, l: usize) -> Result<()> {
    if l > r || r > n.min(m) {
        return Err(Error::ContractionOutOfRange { n, m, r, l });
    }
    Ok(())
}

/// Materialized star contraction.
pub fn star<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    r: usize,
    l: usize,
) -> Result<GeneralKernel<S>> {
    let (n, m) = (f.order(), g.order());
    check_range(n, m, r, l)?;
    // g's arrangements indexed by their last r coordinates
    let mut g_index: DetMap<IndexTuple, Vec<(IndexTuple, S)>> = DetMap::default();
    for (k, v) in g.entries() {
        for_each_arrangement(k, |p| {
            let (head, tail) = p.split_at(m - r);
            g_index.entry(tail.into()).or_default().push((head.into(), v.clone()));
        });
    }
    let mut out: DetMap<IndexTuple, S> = DetMap::default();
    for (k, v) in f.entries() {
        for_each_arrangement(k, |p| {
            let Some(matches) = g_index.get(&p[n - r..]) else { return };
            let free = &p[..n - r];
            let shared = &p[n - r..n - l];
            for (z, w) in matches {
                let mut key: IndexTuple = free.into();
                key.extend_from_slice(shared);
                key.extend_from_slice(z);
                let slot = out.entry(key).or_insert_with(S::zero);
                *slot = slot.clone() + v.clone() * w.clone();
            }
        });
    }
    Ok(GeneralKernel::from_map(n + m - r - l, out))
}

fn subsets(set: &[u32], k: usize, mut f: impl FnMut(&[u32], IndexTuple)) {
    let n = set.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let chosen: IndexTuple = idx.iter().map(|&i| set[i]).collect();
        let rest: IndexTuple = (0..n).filter(|i| !idx.contains(i)).map(|i| set[i]).collect();
        f(&chosen, rest);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

type Section<S> = Vec<(IndexTuple, S)>;

/// Groups the entries of a kernel by `k`-subsets: subset -> (remainder, value).
fn group_by_subsets<S: Scalar>(
    entries: &[(IndexTuple, S)],
    k: usize,
) -> BTreeMap<IndexTuple, Section<S>> {
    let mut out: BTreeMap<IndexTuple, Section<S>> = BTreeMap::new();
    for (t, v) in entries {
        subsets(t, k, |chosen, rest| {
            out.entry(chosen.into()).or_default().push((rest, v.clone()));
        });
    }
    out
}

fn disjoint(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

fn merge_sorted(a: &[u32], b: &[u32]) -> IndexTuple {
    let mut out: IndexTuple = a.into();
    out.extend_from_slice(b);
    out.sort_unstable();
    out
}

fn key_bucket(key: &[u32], buckets: u64) -> u64 {
    if buckets <= 1 {
        return 0;
    }
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &c in key {
        h = (h ^ c as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    (h ^ (h >> 29)) % buckets
}

const CHUNK: u64 = 2_000_000;

/// Sums the values of equal keys, in memory-bounded passes, and feeds each
/// reduced `(key, total)` to `sink`. `emit` is called once per pass and must
/// push every contribution through the provided callback.
fn reduce_by_key<S: Scalar>(
    expected: u64,
    emit: impl Fn(&mut dyn FnMut(IndexTuple, bool, S)),
    mut sink: impl FnMut(&[u32], bool, S),
) {
    let passes = expected.div_ceil(CHUNK).max(1);
    for pass in 0..passes {
        let mut buf: Vec<(IndexTuple, bool, S)> = Vec::new();
        emit(&mut |key, flag, v| {
            if key_bucket(&key, passes) == pass {
                buf.push((key, flag, v));
            }
        });
        buf.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut i = 0;
        while i < buf.len() {
            let mut acc = buf[i].2.clone();
            let mut j = i + 1;
            while j < buf.len() && buf[j].0 == buf[i].0 {
                acc = acc + buf[j].2.clone();
                j += 1;
            }
            sink(&buf[i].0, buf[i].1, acc);
            i = j;
        }
    }
}

/// For set-level sections `f_list`, `g_list`, returns
/// `(Σ_{X,Z} H², Σ_{X∩Z=∅} H²)` with `H(X,Z) = Σ_A f(X∪A) g(Z∪A)` over
/// `l`-sets `A`. Sums are over unordered `X`, `Z`.
fn set_pair_norms<S: Scalar>(
    f_list: &[(IndexTuple, S)],
    g_list: &[(IndexTuple, S)],
    l: usize,
    want_off: bool,
) -> (S, S) {
    if l == 0 && !want_off {
        let sf = f_list.iter().fold(S::zero(), |a, (_, v)| a + v.clone() * v.clone());
        let sg = g_list.iter().fold(S::zero(), |a, (_, v)| a + v.clone() * v.clone());
        return (sf * sg, S::zero());
    }
    let fa = group_by_subsets(f_list, l);
    let ga = group_by_subsets(g_list, l);
    let common: Vec<(&Section<S>, &Section<S>)> =
        fa.iter().filter_map(|(a, xs)| ga.get(a).map(|zs| (xs, zs))).collect();
    let expected: u64 = common.iter().map(|(x, z)| (x.len() * z.len()) as u64).sum();
    let mut total = S::zero();
    let mut off = S::zero();
    reduce_by_key(
        expected,
        |push| {
            for (xs, zs) in &common {
                for (x, fv) in xs.iter() {
                    for (z, gv) in zs.iter() {
                        let mut key: IndexTuple = x.clone();
                        key.extend_from_slice(z);
                        push(key, disjoint(x, z), fv.clone() * gv.clone());
                    }
                }
            }
        },
        |_, is_off, h| {
            let sq = h.clone() * h;
            if is_off {
                off = off.clone() + sq.clone();
            }
            total = total.clone() + sq;
        },
    );
    (total, off)
}

fn sorted_entries<S: Scalar>(f: &SymmetricKernel<S>) -> Vec<(IndexTuple, S)> {
    f.entries().map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn norm_parts<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    r: usize,
    l: usize,
    want_off: bool,
) -> Result<(S, S)> {
    let (n, m) = (f.order(), g.order());
    check_range(n, m, r, l)?;
    let fe = sorted_entries(f);
    let ge = sorted_entries(g);
    let fy = group_by_subsets(&fe, r - l);
    let gy = group_by_subsets(&ge, r - l);
    let mut total = S::zero();
    let mut off = S::zero();
    for (y, fl) in &fy {
        if let Some(gl) = gy.get(y) {
            let (t, o) = set_pair_norms(fl, gl, l, want_off);
            total = total + t;
            off = off + o;
        }
    }
    let lf = S::factorial(l);
    let scale = S::factorial(n - r) * S::factorial(r - l) * S::factorial(m - r) * lf.clone() * lf;
    Ok((total * scale.clone(), off * scale))
}

/// `‖f ⋆_r^l g‖²` without materializing the contraction.
pub fn contraction_norm_sq<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    r: usize,
    l: usize,
) -> Result<S> {
    Ok(norm_parts(f, g, r, l, false)?.0)
}

/// `(‖f ⋆_r^l g‖², ‖(f ⋆_r^l g)·1_Δ‖²)`: the full squared norm and the part
/// carried by tuples with pairwise distinct coordinates.
pub fn contraction_norm_sq_split<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    r: usize,
    l: usize,
) -> Result<(S, S)> {
    norm_parts(f, g, r, l, true)
}

/// Calls `push(U, c)` for every contribution to `Σ` over orderings of the
/// symmetrized, off-diagonal `f ⋆_p^p g`, keyed by the sorted union `U`.
fn sym_off_contributions<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    p: usize,
) -> Result<(u64, impl Fn(&mut dyn FnMut(IndexTuple, bool, S)))> {
    let (n, m) = (f.order(), g.order());
    check_range(n, m, p, p)?;
    let fa = group_by_subsets(&sorted_entries(f), p);
    let ga = group_by_subsets(&sorted_entries(g), p);
    let common: Vec<(Section<S>, Section<S>)> = fa
        .into_iter()
        .filter_map(|(a, xs)| ga.get(&a).map(|zs| (xs, zs.clone())))
        .collect();
    let expected = common.iter().map(|(x, z)| (x.len() * z.len()) as u64).sum();
    let weight = S::factorial(n - p) * S::factorial(m - p) * S::factorial(p);
    let emit = move |push: &mut dyn FnMut(IndexTuple, bool, S)| {
        for (xs, zs) in &common {
            for (x, fv) in xs {
                for (z, gv) in zs {
                    if disjoint(x, z) {
                        push(merge_sorted(x, z), true, weight.clone() * fv.clone() * gv.clone());
                    }
                }
            }
        }
    };
    Ok((expected, emit))
}

/// The kernel `(f ⋆_p^p g)~ · 1_Δ` of order `n + m - 2p ≥ 1`.
pub fn symmetrized_off_diagonal<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    p: usize,
) -> Result<SymmetricKernel<S>> {
    let k = f.order() + g.order() - 2 * p.min(f.order().min(g.order()));
    if k == 0 {
        return Err(Error::Invalid("full contraction is a scalar; use the inner product".into()));
    }
    let (expected, emit) = sym_off_contributions(f, g, p)?;
    let kf = S::factorial(k);
    let mut entries = BTreeMap::new();
    reduce_by_key(expected, emit, |u, _, s| {
        entries.insert(IndexTuple::from(u), s / kf.clone());
    });
    Ok(SymmetricKernel::from_canonical(k, entries))
}

/// `‖(f ⋆_p^p g)~ · 1_Δ‖²`; for `p = n = m` this is `⟨f, g⟩²`.
pub fn symmetrized_off_diagonal_norm_sq<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    p: usize,
) -> Result<S> {
    let (n, m) = (f.order(), g.order());
    check_range(n, m, p, p)?;
    let k = n + m - 2 * p;
    if k == 0 {
        let ip = f.inner(g);
        return Ok(ip.clone() * ip);
    }
    let (expected, emit) = sym_off_contributions(f, g, p)?;
    let mut acc = S::zero();
    reduce_by_key(expected, emit, |_, _, s| acc = acc.clone() + s.clone() * s);
    Ok(acc / S::factorial(k))
}

/// `Trace([f]⁴) = ‖f ⋆_1^1 f‖²` for a kernel of order 2.
pub fn trace_power4<S: Scalar>(f: &SymmetricKernel<S>) -> Result<S> {
    if f.order() != 2 {
        return Err(Error::Invalid(format!("trace_power4 needs order 2, got {}", f.order())));
    }
    contraction_norm_sq(f, f, 1, 1)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EstimateRow {
    pub id: String,
    pub r: usize,
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct EstimateReport {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<EstimateRow>,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EstimateRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    fn le_row(&mut self, id: &str, r: usize, l: usize, lhs: f64, rhs: f64) {
        let slack = 1e-10 * (1.0 + rhs.abs());
        self.rows.push(EstimateRow { id: id.into(), r, l, lhs, rhs, pass: lhs <= rhs + slack });
    }

    fn eq_row(&mut self, id: &str, r: usize, l: usize, lhs: f64, rhs: f64) {
        let slack = 1e-10 * (1.0 + rhs.abs());
        let pass = (lhs - rhs).abs() <= slack;
        self.rows.push(EstimateRow { id: id.into(), r, l, lhs, rhs, pass });
    }
}

/// `‖f(j,·) ⋆_p^p g(j,·)‖²`, allowing sections of order 0 (scalars).
fn section_contraction_norm_sq<S: Scalar>(
    f: &SymmetricKernel<S>,
    g: &SymmetricKernel<S>,
    j: u32,
    p: usize,
) -> S {
    match (f.section(j), g.section(j)) {
        (Some(fj), Some(gj)) => star(&fj, &gj, p, p).map(|k| k.norm_sq()).unwrap_or_else(|_| S::zero()),
        (None, Some(gj)) => {
            let c = f.section_scalar(j);
            c.clone() * c * gj.norm_sq()
        }
        (Some(fj), None) => {
            let c = g.section_scalar(j);
            c.clone() * c * fj.norm_sq()
        }
        (None, None) => {
            let a = f.section_scalar(j) * g.section_scalar(j);
            a.clone() * a
        }
    }
}

/// Evaluates every norm estimate relating `f`, `g` and their contractions
/// and reports each comparison. A failing row indicates a bug.
pub fn check_estimates<S: Scalar>(f: &SymmetricKernel<S>, g: &SymmetricKernel<S>) -> EstimateReport {
    let (n, m) = (f.order(), g.order());
    let mut rep = EstimateReport { n, m, rows: Vec::new() };
    let nf = f.l2_norm();
    let ng = g.l2_norm();

    for r in 0..=n.min(m) {
        for l in 0..=r {
            let lhs = contraction_norm_sq(f, g, r, l).expect("range checked").to_f64().sqrt();
            rep.le_row("contraction_norm_product", r, l, lhs, nf * ng);
        }
    }

    let ff_top = contraction_norm_sq(f, f, n, n - 1).expect("valid").to_f64();
    if n >= 2 {
        let max_inf = f.max_influence();
        rep.le_row("max_influence_squared", n, n - 1, max_inf * max_inf, ff_top);
        rep.le_row("influence_upper", n, n - 1, ff_top, nf * nf * max_inf);

        let coords: std::collections::BTreeSet<u32> = f
            .entries()
            .chain(g.entries())
            .flat_map(|(k, _)| k.iter().copied().collect::<Vec<_>>())
            .collect();
        for l in 1..=n.min(m) {
            let lhs = contraction_norm_sq(f, g, l, l - 1).expect("valid").to_f64();
            let sections = coords
                .iter()
                .fold(S::zero(), |acc, &j| acc + section_contraction_norm_sq(f, g, j, l - 1))
                .to_f64();
            rep.eq_row("section_identity", l, l - 1, lhs, sections);
            rep.le_row("section_bound", l, l - 1, lhs, ff_top.sqrt() * ng * ng);
        }
    }

    let one_zero = contraction_norm_sq(f, f, 1, 0).expect("valid").to_f64();
    rep.eq_row("one_zero_identity", 1, 0, one_zero.sqrt(), ff_top.sqrt());
    for l in 2..=n {
        let lhs = contraction_norm_sq(f, f, l, l - 1).expect("valid").to_f64().sqrt();
        let (full, off) = contraction_norm_sq_split(f, f, l - 1, l - 1).expect("valid");
        let diag = (full.clone() - off).to_f64().max(0.0).sqrt();
        rep.le_row("diagonal_chain_lower", l, l - 1, lhs, diag);
        rep.le_row("diagonal_chain_upper", l - 1, l - 1, diag, full.to_f64().sqrt());
    }
    if n == 2 {
        let (full, off) = contraction_norm_sq_split(f, f, 1, 1).expect("valid");
        let diag = (full.clone() - off).to_f64();
        rep.eq_row("order_two_diagonal_identity", 2, 1, ff_top, diag);
        rep.le_row("order_two_trace", 2, 1, ff_top, full.to_f64());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn k2(entries: &[([u32; 2], f64)]) -> SymmetricKernel<f64> {
        SymmetricKernel::new(2, entries.iter().map(|(t, v)| (*t, *v))).unwrap()
    }

    #[test]
    fn star_examples() {
        let f = k2(&[([1, 2], 1.0)]);
        let s21 = star(&f, &f, 2, 1).unwrap();
        assert_eq!(s21.order(), 1);
        assert_eq!(s21.get(&[1]), 1.0);
        assert_eq!(s21.get(&[2]), 1.0);
        let s22 = star(&f, &f, 2, 2).unwrap();
        assert_eq!(s22.order(), 0);
        assert_eq!(s22.scalar_value(), 2.0);
        let s11 = star(&f, &f, 1, 1).unwrap();
        assert_eq!(s11.get(&[1, 1]), 1.0);
        assert_eq!(s11.get(&[2, 2]), 1.0);
        assert_eq!(s11.get(&[1, 2]), 0.0);
        assert!(matches!(star(&f, &f, 1, 2), Err(Error::ContractionOutOfRange { .. })));
        assert!(matches!(star(&f, &f, 3, 0), Err(Error::ContractionOutOfRange { .. })));
    }

    #[test]
    fn star_layout_follows_shared_in_the_middle() {
        // f ⋆_1^0 g (i1,i2,i3) = f(i1,i2) g(i3,i2)
        let f = k2(&[([1, 2], 2.0)]);
        let g = k2(&[([2, 5], 3.0)]);
        let s = star(&f, &g, 1, 0).unwrap();
        assert_eq!(s.get(&[1, 2, 5]), 6.0);
        assert_eq!(s.get(&[5, 2, 1]), 0.0);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn tensor_product() {
        let f = k2(&[([1, 2], 2.0)]);
        let g = SymmetricKernel::new(1, [([3u32], 5.0)]).unwrap();
        let s = star(&f, &g, 0, 0).unwrap();
        assert_eq!(s.get(&[2, 1, 3]), 10.0);
        assert!((s.l2_norm() - f.l2_norm() * g.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn trace_examples() {
        let f = k2(&[([1, 2], 1.0)]);
        assert_eq!(trace_power4(&f).unwrap(), 2.0);
        assert_eq!(trace_power4(&SymmetricKernel::<f64>::zero(2)).unwrap(), 0.0);
        let f2 = k2(&[([1, 2], 1.0), ([3, 4], 1.0)]);
        assert_eq!(trace_power4(&f2).unwrap(), 4.0);
    }

    #[test]
    fn grouped_norms_match_materialized() {
        let f = SymmetricKernel::new(
            3,
            [([1u32, 2, 3], 0.5), ([1, 2, 4], -0.25), ([2, 3, 5], 1.5), ([1, 4, 5], 0.75)],
        )
        .unwrap();
        let g = SymmetricKernel::new(2, [([1u32, 2], 1.0), ([2, 4], -2.0), ([3, 5], 0.5)]).unwrap();
        for (a, b) in [(&f, &f), (&f, &g), (&g, &f), (&g, &g)] {
            for r in 0..=a.order().min(b.order()) {
                for l in 0..=r {
                    let s = star(a, b, r, l).unwrap();
                    let (full, off) = contraction_norm_sq_split(a, b, r, l).unwrap();
                    assert!((full - s.norm_sq()).abs() < 1e-12, "r={r} l={l}");
                    assert!((off - s.restrict_off_diagonal().norm_sq()).abs() < 1e-12);
                    assert!((contraction_norm_sq(a, b, r, l).unwrap() - full).abs() < 1e-12);
                }
                if a.order() + b.order() > 2 * r {
                    let s = star(a, b, r, r).unwrap().symmetrize().restrict_off_diagonal();
                    let k = symmetrized_off_diagonal(a, b, r).unwrap();
                    assert!(k.to_general().approx_eq(&s, 1e-12));
                    let ns = symmetrized_off_diagonal_norm_sq(a, b, r).unwrap();
                    assert!((ns - s.norm_sq()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rational_contractions_are_exact() {
        let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
        let f = SymmetricKernel::new(2, [([1u32, 2], q(1, 3)), ([2, 3], q(-2, 5))]).unwrap();
        let s = star(&f, &f, 1, 1).unwrap();
        assert_eq!(contraction_norm_sq(&f, &f, 1, 1).unwrap(), s.norm_sq());
        assert_eq!(trace_power4(&f).unwrap(), s.norm_sq());
    }

    #[test]
    fn subsets_enumerates_combinations() {
        let mut seen = Vec::new();
        subsets(&[1, 2, 3], 2, |c, rest| seen.push((c.to_vec(), rest.to_vec())));
        assert_eq!(
            seen,
            vec![(vec![1, 2], vec![3]), (vec![1, 3], vec![2]), (vec![2, 3], vec![1])]
        );
        let mut n0 = 0;
        subsets(&[1, 2], 0, |c, rest| {
            assert!(c.is_empty());
            assert_eq!(rest.len(), 2);
            n0 += 1;
        });
        assert_eq!(n0, 1);
        let mut n3 = 0;
        subsets(&[4, 5, 6], 3, |_, rest| {
            assert!(rest.is_empty());
            n3 += 1;
        });
        assert_eq!(n3, 1);
    }

    #[test]
    fn estimates_single_entry() {
        let f = k2(&[([1, 2], 1.0)]);
        let rep = check_estimates(&f, &f);
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
        let n11 = contraction_norm_sq(&f, &f, 1, 1).unwrap().sqrt();
        assert!((n11 - 2f64.sqrt()).abs() < 1e-15);
        // ‖f ⋆_2^1 f‖² ≤ Trace([f]^4)
        assert!(contraction_norm_sq(&f, &f, 2, 1).unwrap() <= trace_power4(&f).unwrap());
    }
}
