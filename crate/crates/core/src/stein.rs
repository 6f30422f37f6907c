//! Explicit normal-approximation bounds: the general two-term bound, its
//! closed forms on averages, fixed chaoses, double integrals, sums of a
//! single and a double integral, weighted 2-runs and sparse multilinear
//! forms, plus the Wasserstein smoothing and Chatterjee's quadratic-form bound.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{ChaosDecomposition, MAX_DIMENSION};
use crate::contraction::{
    contraction_norm_sq, contraction_norm_sq_split, symmetrized_off_diagonal_norm_sq,
};
use crate::error::{Error, Result};
use crate::kernel::SymmetricKernel;
use crate::malliavin::apply_l_inverse;
use crate::scalar::{binomial_u64, factorial_u64, Scalar};
use crate::sparse::{self, SparseIndexSet};
use crate::testfn::TestFunction;

/// Tolerance for the normalization preconditions.
pub const NORMALIZATION_TOL: f64 = 1e-9;

const TWENTY_THIRDS: f64 = 20.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Addend {
    pub label: String,
    pub value: f64,
}

/// The two-term bound `min(4‖h‖, ‖h''‖)·B1 + ‖h''‖·B2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinBound {
    pub b1: f64,
    pub b1_variance_form: f64,
    pub b2: f64,
    pub total: f64,
    pub breakdown: Vec<Addend>,
}

fn min_coefficient(h: &TestFunction) -> Result<(f64, f64)> {
    let sup = h.require(0)?;
    let sup2 = h.require(2)?;
    Ok(((4.0 * sup).min(sup2), sup2))
}

fn assemble(h: &TestFunction, b1: f64, b1_variance_form: f64, b2: f64) -> Result<SteinBound> {
    let (m, sup2) = min_coefficient(h)?;
    let first = if b1 == 0.0 { 0.0 } else { m * b1 };
    let second = if b2 == 0.0 { 0.0 } else { sup2 * b2 };
    Ok(SteinBound {
        b1,
        b1_variance_form,
        b2,
        total: first + second,
        breakdown: vec![
            Addend { label: "min(4|h|,|h''|) * B1".into(), value: first },
            Addend { label: "|h''| * B2".into(), value: second },
        ],
    })
}

/// `B1 = E|1 - ⟨DF, -DL⁻¹F⟩|` and `B2 = (20/3) E Σ_k |D_k L⁻¹F| |D_k F|³` by
/// exact enumeration.
///
/// Only coordinates carried by kernels of order at least two make the
/// gradients random; first-chaos coordinates outside that set contribute
/// the constants `f₁(k)²` and `f₁(k)⁴`, so pure first-chaos inputs of any
/// length are handled without enumeration.
pub fn bound_general(dec: &ChaosDecomposition<f64>, h: &TestFunction) -> Result<SteinBound> {
    if !dec.is_centered() {
        return Err(Error::NotCentered(*dec.mean()));
    }
    min_coefficient(h)?;
    let random: BTreeSet<u32> = dec
        .kernels()
        .filter(|k| k.order() >= 2)
        .flat_map(|k| k.entries().flat_map(|(t, _)| t.to_vec()).collect::<Vec<_>>())
        .collect();
    let a = random.len();
    if a > MAX_DIMENSION {
        return Err(Error::DimensionLimit { d: a, limit: MAX_DIMENSION });
    }
    let relabel: BTreeMap<u32, u32> = random.iter().enumerate().map(|(i, &c)| (c, i as u32 + 1)).collect();
    let (mut inner_const, mut fourth_const) = (0.0, 0.0);
    let mut kernels = Vec::new();
    for f in dec.kernels() {
        if f.order() == 1 {
            let mut kept = Vec::new();
            for (t, &v) in f.entries() {
                match relabel.get(&t[0]) {
                    Some(&c) => kept.push(([c], v)),
                    None => {
                        inner_const += v * v;
                        fourth_const += v.powi(4);
                    }
                }
            }
            kernels.push(SymmetricKernel::new(1, kept)?);
        } else {
            kernels.push(f.remap(|c| relabel[&c]));
        }
    }
    let reduced = ChaosDecomposition::new(a, 0.0, kernels)?;
    let tf = reduced.to_table()?;
    let tm = apply_l_inverse(&reduced)?.scale(&-1.0).to_table()?;
    let (vf, vm) = (tf.values(), tm.values());

    let size = 1usize << a;
    let chunk = 1usize << 12;
    let partial: Vec<(f64, f64, f64)> = (0..size.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let (mut abs_dev, mut sq_dev, mut fourth) = (0.0, 0.0, 0.0);
            for w in c * chunk..((c + 1) * chunk).min(size) {
                let (mut inner, mut b2) = (inner_const, fourth_const);
                for k in 0..a {
                    let bit = 1usize << k;
                    let df = 0.5 * (vf[w | bit] - vf[w & !bit]);
                    let dm = 0.5 * (vm[w | bit] - vm[w & !bit]);
                    inner += df * dm;
                    b2 += dm.abs() * df.abs().powi(3);
                }
                abs_dev += (1.0 - inner).abs();
                sq_dev += (1.0 - inner).powi(2);
                fourth += b2;
            }
            (abs_dev, sq_dev, fourth)
        })
        .collect();
    let n = size as f64;
    let (s1, s2, s4) = partial
        .iter()
        .fold((0.0, 0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let b1 = s1 / n;
    let b1_var = (s2 / n).sqrt();
    assemble(h, b1, b1_var.max(b1), TWENTY_THIRDS * s4 / n)
}

/// Certified bounds on the part of a sequence beyond its stored values:
/// `Σ_tail α² ≤ sum_sq` and `Σ_tail α⁴ ≤ sum_fourth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub sum_sq: f64,
    pub sum_fourth: f64,
}

/// Weights `α_i`, `i = offset, offset + 1, …`, possibly the truncation of
/// an infinite family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    offset: i64,
    values: Vec<f64>,
    #[serde(default)]
    truncated: bool,
    #[serde(default)]
    tail: Option<TailCertificate>,
}

impl WeightSequence {
    pub fn finite(offset: i64, values: Vec<f64>) -> Self {
        WeightSequence { offset, values, truncated: false, tail: None }
    }

    /// The first terms of an infinite family; bounds refuse to run unless a
    /// tail certificate is supplied.
    pub fn truncated(offset: i64, values: Vec<f64>, tail: Option<TailCertificate>) -> Self {
        WeightSequence { offset, values, truncated: true, tail }
    }

    /// `α_i = c` for `i = 1..=n`.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::finite(1, vec![c; n])
    }

    /// `α = 1_{1..n}`.
    pub fn ones(n: usize) -> Self {
        Self::constant(n, 1.0)
    }

    /// `α_i = √r / i` for `i ≥ r`, stored up to `i = m` with the tails
    /// `Σ_{i>m} r/i² ≤ r/m` and `Σ_{i>m} r²/i⁴ ≤ r²/(3m³)`.
    pub fn inverse(r: usize, m: usize) -> Result<Self> {
        if r < 1 || m < r {
            return Err(Error::Invalid(format!("need 1 <= r <= m, got r={r}, m={m}")));
        }
        let sr = (r as f64).sqrt();
        let values = (r..=m).map(|i| sr / i as f64).collect();
        let (rf, mf) = (r as f64, m as f64);
        let tail = TailCertificate { sum_sq: rf / mf, sum_fourth: rf * rf / (3.0 * mf.powi(3)) };
        Ok(Self::truncated(r as i64, values, Some(tail)))
    }

    /// `α_i = 1/i` for `i ≥ n`, stored up to `i = m`.
    pub fn harmonic(n: usize, m: usize) -> Result<Self> {
        if n < 1 || m < n {
            return Err(Error::Invalid(format!("need 1 <= n <= m, got n={n}, m={m}")));
        }
        let values = (n..=m).map(|i| 1.0 / i as f64).collect();
        let mf = m as f64;
        let tail = TailCertificate { sum_sq: 1.0 / mf, sum_fourth: 1.0 / (3.0 * mf.powi(3)) };
        Ok(Self::truncated(n as i64, values, Some(tail)))
    }

    /// Parses `ones:n=100`, `const:n=16,c=0.25`, `inv:r=50,m=100000`,
    /// `harm:n=10,m=100000` and `list:0.5,0.5`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
        if head == "list" {
            let values = rest
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad weight '{x}'"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Self::finite(1, values));
        }
        let mut params = BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("expected key=value in '{part}'")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Invalid(format!("bad number '{v}'")))?;
            params.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| params.get(k).copied().ok_or_else(|| Error::Invalid(format!("'{head}' needs {k}=")));
        let int = |k: &str| -> Result<usize> {
            let v = get(k)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Invalid(format!("{k} must be a non-negative integer")));
            }
            Ok(v as usize)
        };
        match head {
            "ones" => Ok(Self::ones(int("n")?)),
            "const" => Ok(Self::constant(int("n")?, get("c")?)),
            "inv" => {
                let r = int("r")?;
                Self::inverse(r, params.get("m").map_or(Ok(1000 * r.max(1000)), |_| int("m"))?)
            }
            "harm" => {
                let n = int("n")?;
                Self::harmonic(n, params.get("m").map_or(Ok(1000 * n.max(1000)), |_| int("m"))?)
            }
            other => Err(Error::Invalid(format!("unknown weight sequence '{other}'"))),
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn tail(&self) -> Option<TailCertificate> {
        self.tail
    }

    /// `α_i`, zero outside the stored range.
    pub fn get(&self, i: i64) -> f64 {
        let k = i - self.offset;
        if k < 0 {
            return 0.0;
        }
        self.values.get(k as usize).copied().unwrap_or(0.0)
    }

    fn certified_tail(&self) -> Result<TailCertificate> {
        match (self.truncated, self.tail) {
            (false, _) => Ok(TailCertificate { sum_sq: 0.0, sum_fourth: 0.0 }),
            (true, Some(t)) => Ok(t),
            (true, None) => Err(Error::MissingTailCertificate),
        }
    }

    /// An interval containing `Σα²`.
    pub fn sum_sq_bounds(&self) -> Result<(f64, f64)> {
        let s: f64 = self.values.iter().map(|a| a * a).sum();
        Ok((s, s + self.certified_tail()?.sum_sq))
    }

    /// An upper bound on `Σα⁴`.
    pub fn sum_fourth_bound(&self) -> Result<f64> {
        let s: f64 = self.values.iter().map(|a| a.powi(4)).sum();
        Ok(s + self.certified_tail()?.sum_fourth)
    }

    fn require_finite(&self) -> Result<()> {
        if self.truncated {
            return Err(Error::Invalid("this bound needs a finite weight sequence".into()));
        }
        Ok(())
    }

    /// `J_1(α)` as a decomposition; indices must be positive.
    pub fn to_decomposition(&self) -> Result<ChaosDecomposition<f64>> {
        self.require_finite()?;
        let f = self.to_kernel()?;
        let d = f.support_bound();
        ChaosDecomposition::new(d, 0.0, vec![f])
    }

    fn to_kernel(&self) -> Result<SymmetricKernel<f64>> {
        if self.offset < 1 && self.values.iter().take((1 - self.offset) as usize).any(|&v| v != 0.0) {
            return Err(Error::ZeroCoordinate(vec![]));
        }
        SymmetricKernel::new(
            1,
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(k, &v)| ([(self.offset + k as i64) as u32], v)),
        )
    }
}

/// `min(4‖h‖, ‖h''‖)|1 - Σα²| + (20/3)‖h''‖Σα⁴` for `F = Σ α_i X_i`.
///
/// For truncated families the certified tails give
/// `|1 - Σα²| ≤ max(|1 - S₂|, |1 - S₂ - T₂|)` and `Σα⁴ ≤ S₄ + T₄`.
pub fn bound_average(alpha: &WeightSequence, h: &TestFunction) -> Result<SteinBound> {
    let (lo, hi) = alpha.sum_sq_bounds()?;
    let fourth = alpha.sum_fourth_bound()?;
    let dev = (1.0 - lo).abs().max((1.0 - hi).abs());
    assemble(h, dev, dev, TWENTY_THIRDS * fourth)
}

/// The three kernel-side quantities for `F = J_q(f)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedChaosTerms<S> {
    pub order: usize,
    /// `|1 - q!‖f‖²|²`.
    pub variance_gap_sq: S,
    /// `E(1 - ‖DF‖²/q)²` in closed form, with symmetrized contractions.
    pub mww: S,
    /// Its upper bound with unsymmetrized contractions.
    pub mww2: S,
    /// Upper bound on `E‖DF‖⁴_{ℓ⁴}`.
    pub mww4: S,
}

fn chaos_coefficient<S: Scalar>(q: usize, p: usize) -> S {
    let c = factorial_u64(p - 1) * binomial_u64(q - 1, p - 1).pow(2);
    let c = S::from_i64(c as i64);
    c.clone() * c * S::factorial(2 * q - 2 * p)
}

pub fn fixed_chaos_terms<S: Scalar>(f: &SymmetricKernel<S>) -> Result<FixedChaosTerms<S>> {
    let q = f.order();
    if q < 2 {
        return Err(Error::Invalid(format!("fixed-chaos bound needs order >= 2, got {q}")));
    }
    let gap = S::one() - S::factorial(q) * f.norm_sq();
    let gap_sq = gap.clone() * gap;
    let q2 = S::from_i64((q * q) as i64);
    let (mut sym, mut unsym, mut fourth) = (S::zero(), S::zero(), S::zero());
    for p in 1..=q {
        let c: S = chaos_coefficient(q, p);
        if p < q {
            sym = sym + c.clone() * symmetrized_off_diagonal_norm_sq(f, f, p)?;
            unsym = unsym + c.clone() * contraction_norm_sq_split(f, f, p, p)?.1;
        }
        fourth = fourth + c * contraction_norm_sq(f, f, p, p - 1)?;
    }
    Ok(FixedChaosTerms {
        order: q,
        mww: gap_sq.clone() + q2.clone() * sym,
        mww2: gap_sq.clone() + q2.clone() * unsym,
        mww4: q2.clone() * q2 * fourth,
        variance_gap_sq: gap_sq,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedChaosBound {
    pub terms: FixedChaosTerms<f64>,
    pub bound: SteinBound,
}

/// `min(4‖h‖, ‖h''‖)·√mww + (20/(3q))‖h''‖·mww4` for `F = J_q(f)`.
pub fn bound_fixed_chaos(f: &SymmetricKernel<f64>, h: &TestFunction) -> Result<FixedChaosBound> {
    let terms = fixed_chaos_terms(f)?;
    let b1 = terms.mww.max(0.0).sqrt();
    let b2 = TWENTY_THIRDS / terms.order as f64 * terms.mww4;
    let bound = assemble(h, b1, b1, b2)?;
    Ok(FixedChaosBound { terms, bound })
}

fn require_order(f: &SymmetricKernel<f64>, q: usize) -> Result<()> {
    if f.order() != q {
        return Err(Error::Invalid(format!("expected a kernel of order {q}, got {}", f.order())));
    }
    Ok(())
}

fn require_unit(what: &'static str, value: f64) -> Result<()> {
    if (value - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { what, value });
    }
    Ok(())
}

/// Both variants of the double-integral bound and the trace chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleIntegralBound {
    /// `Trace([f]⁴) = ‖f ⋆₁¹ f‖²`.
    pub trace: f64,
    /// `‖f ⋆₁¹ f · 1_Δ‖`.
    pub off_diagonal_norm: f64,
    /// `‖f ⋆₂¹ f‖²`.
    pub star_two_one_sq: f64,
    /// `‖f ⋆₁¹ f · 1_{Δᶜ}‖²`.
    pub diagonal_sq: f64,
    pub with_star_two_one: f64,
    pub with_diagonal: f64,
    /// The smaller of the two variants.
    pub best: f64,
    /// `4√2 min(4‖h‖,‖h''‖)√Trace + 160‖h''‖ Trace`.
    pub trace_chain: f64,
}

/// `4√2 min(4‖h‖,‖h''‖)‖f⋆₁¹f·1_Δ‖ + 160‖h''‖‖f⋆₂¹f‖²` for `2‖f‖² = 1`.
pub fn bound_double_integral(f: &SymmetricKernel<f64>, h: &TestFunction) -> Result<DoubleIntegralBound> {
    require_order(f, 2)?;
    require_unit("2|f|^2", 2.0 * f.norm_sq())?;
    let (m, sup2) = min_coefficient(h)?;
    let (trace, off) = contraction_norm_sq_split(f, f, 1, 1)?;
    let star21 = contraction_norm_sq(f, f, 2, 1)?;
    let diag = (trace - off).max(0.0);
    let c = 4.0 * std::f64::consts::SQRT_2 * m;
    let off_norm = off.max(0.0).sqrt();
    let with_star = c * off_norm + 160.0 * sup2 * star21;
    let with_diag = c * off_norm + 160.0 * sup2 * diag;
    Ok(DoubleIntegralBound {
        trace,
        off_diagonal_norm: off_norm,
        star_two_one_sq: star21,
        diagonal_sq: diag,
        with_star_two_one: with_star,
        with_diagonal: with_diag,
        best: with_star.min(with_diag),
        trace_chain: c * trace.max(0.0).sqrt() + 160.0 * sup2 * trace,
    })
}

/// Bound for `F = J_1(f) + J_2(g)` with `Var F = 1`:
/// `min(4‖h‖,‖h''‖)(2√2‖g⋆₁¹g·1_Δ‖ + 3‖f⋆₁¹g‖) + (160/3)‖h''‖Σ_k[f(k)⁴ + 16(Σ_i|g(i,k)|)⁴]`.
pub fn bound_single_plus_double(
    f: &WeightSequence,
    g: &SymmetricKernel<f64>,
    h: &TestFunction,
) -> Result<SteinBound> {
    require_order(g, 2)?;
    f.require_finite()?;
    let fk = f.to_kernel()?;
    require_unit("Var F", fk.norm_sq() + 2.0 * g.norm_sq())?;
    let (_, g_off) = contraction_norm_sq_split(g, g, 1, 1)?;
    let fg = contraction_norm_sq(&fk, g, 1, 1)?;
    let b1 = 2.0 * std::f64::consts::SQRT_2 * g_off.max(0.0).sqrt() + 3.0 * fg.max(0.0).sqrt();
    let mut col: BTreeMap<u32, f64> = BTreeMap::new();
    for (t, &v) in g.entries() {
        *col.entry(t[0]).or_insert(0.0) += v.abs();
        *col.entry(t[1]).or_insert(0.0) += v.abs();
    }
    let sum: f64 = fk.entries().map(|(_, v)| v.powi(4)).sum::<f64>()
        + 16.0 * col.values().map(|s| s.powi(4)).sum::<f64>();
    assemble(h, b1, b1, 160.0 / 3.0 * sum)
}

/// Bound and variance for the normalized weighted 2-run
/// `G = Σ α_i ξ_i ξ_{i+1}` with Bernoulli `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRunsBound {
    /// `(3/16)Σα² + (1/8)Σα_iα_{i+1}` over the stored weights.
    pub var_g: f64,
    /// Certified lower bound on the variance, equal to `var_g` for finite inputs.
    pub var_g_lower: f64,
    /// The two addends of `var_g`.
    pub variance_terms: Vec<Addend>,
    pub sum_fourth: f64,
    pub total: f64,
    pub breakdown: Vec<Addend>,
}

/// `Var G = (3/16)Σα_i² + (1/8)Σα_iα_{i+1}`.
pub fn two_runs_variance<S: Scalar>(alpha: &[S]) -> S {
    let sq = alpha.iter().fold(S::zero(), |acc, a| acc + a.clone() * a.clone());
    let lag = alpha.windows(2).fold(S::zero(), |acc, w| acc + w[0].clone() * w[1].clone());
    S::from_i64(3) / S::from_i64(16) * sq + lag / S::from_i64(8)
}

/// `(7/16)·min(4‖h‖,‖h''‖)/Var G·√Σα⁴ + (35/24)·‖h''‖/(Var G)²·Σα⁴`.
pub fn bound_two_runs(alpha: &WeightSequence, h: &TestFunction) -> Result<TwoRunsBound> {
    let (m, sup2) = min_coefficient(h)?;
    let var = two_runs_variance(&alpha.values);
    let sq: f64 = alpha.values.iter().map(|a| a * a).sum();
    let lag: f64 = alpha.values.windows(2).map(|w| w[0] * w[1]).sum();
    let variance_terms = vec![
        Addend { label: "(3/16) sum a_i^2".into(), value: 3.0 / 16.0 * sq },
        Addend { label: "(1/8) sum a_i a_(i+1)".into(), value: lag / 8.0 },
    ];
    let tail = alpha.certified_tail()?;
    let lower = if alpha.truncated {
        // the lag sum past the stored range is at most √((α_last² + T₂)T₂)
        let last = alpha.values.last().copied().unwrap_or(0.0);
        var - ((last * last + tail.sum_sq) * tail.sum_sq).sqrt() / 8.0
    } else {
        var
    };
    if !(lower > 0.0) {
        return Err(Error::DegenerateVariance(lower));
    }
    let fourth = alpha.sum_fourth_bound()?;
    let first = 7.0 / 16.0 * m / lower * fourth.sqrt();
    let second = 35.0 / 24.0 * sup2 / (lower * lower) * fourth;
    Ok(TwoRunsBound {
        var_g: var,
        var_g_lower: lower,
        variance_terms,
        sum_fourth: fourth,
        total: first + second,
        breakdown: vec![
            Addend { label: "(7/16) min(4|h|,|h''|) sqrt(sum a^4) / Var G".into(), value: first },
            Addend { label: "(35/24) |h''| sum a^4 / (Var G)^2".into(), value: second },
        ],
    })
}

/// The kernels of `(G - E G)/√Var G = J_1(f) + J_2(g)` for finite `α`:
/// `f = (1/(4√V))Σ_a α_a(1_a + 1_{a+1})` and
/// `g = (1/(8√V))Σ_a α_a(1_a⊗1_{a+1} + 1_{a+1}⊗1_a)`.
/// Weight `α_a` with `a = offset + k` sits on coordinates `k + 1, k + 2`.
pub fn two_runs_kernels(alpha: &WeightSequence) -> Result<(WeightSequence, SymmetricKernel<f64>)> {
    alpha.require_finite()?;
    let var = two_runs_variance(&alpha.values);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance(var));
    }
    let s = var.sqrt();
    let n = alpha.values.len();
    let mut f = vec![0.0; n + 1];
    let mut g = Vec::with_capacity(n);
    for (k, &a) in alpha.values.iter().enumerate() {
        f[k] += a / (4.0 * s);
        f[k + 1] += a / (4.0 * s);
        if a != 0.0 {
            g.push(([k as u32 + 1, k as u32 + 2], a / (8.0 * s)));
        }
    }
    Ok((WeightSequence::finite(1, f), SymmetricKernel::new(2, g)?))
}

/// `√(2(B1 + B2)(5 + E|F|))`, valid when `4(B1 + B2) ≤ 5`.
pub fn wasserstein_bound(b1: f64, b2: f64, e_abs_f: f64) -> Result<f64> {
    let s = b1 + b2;
    if !(4.0 * s <= 5.0) {
        return Err(Error::Inapplicable(format!("4(B1 + B2) = {} exceeds 5", 4.0 * s)));
    }
    Ok((2.0 * s * (5.0 + e_abs_f)).sqrt())
}

/// `√(½Trace([f]⁴)) + (5/2)Σ_j(Σ_i f(i,j)²)^{3/2}`.
pub fn chatterjee_bound(f: &SymmetricKernel<f64>) -> Result<f64> {
    require_order(f, 2)?;
    let trace = contraction_norm_sq(f, f, 1, 1)?;
    let mut rows: BTreeMap<u32, f64> = BTreeMap::new();
    for (t, &v) in f.entries() {
        *rows.entry(t[0]).or_insert(0.0) += v * v;
        *rows.entry(t[1]).or_insert(0.0) += v * v;
    }
    Ok((0.5 * trace).sqrt() + 2.5 * rows.values().map(|r| r.powf(1.5)).sum::<f64>())
}

/// Structural statistics of a sparse set together with the explicit
/// contraction bound on its normalized multilinear form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseStats {
    pub cardinality: u64,
    pub max_star: u64,
    pub sharp: u64,
    /// `|F#|^{1/2}/|F|`.
    pub stat1: f64,
    /// `(max_j |F*_j|/|F|)^{1/4}`.
    pub stat2: f64,
    pub exact_bound: f64,
}

pub fn bound_sparse_stats(set: &SparseIndexSet, h: &TestFunction) -> Result<SparseStats> {
    let f = sparse::multilinear_kernel(set)?;
    let card = set.cardinality();
    let max_star = sparse::max_star_count(set);
    let sharp = sparse::sharp_count(set)?;
    let exact = bound_fixed_chaos(&f, h)?;
    Ok(SparseStats {
        cardinality: card,
        max_star,
        sharp,
        stat1: (sharp as f64).sqrt() / card as f64,
        stat2: (max_star as f64 / card as f64).powf(0.25),
        exact_bound: exact.bound.total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub big_n: usize,
    pub stats: SparseStats,
}

/// Statistics of `F_N` along a grid of `N` with log-log slopes in `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub cardinality_slope: Option<f64>,
    pub bound_slope: Option<f64>,
    pub stat1_slope: Option<f64>,
    pub stat2_slope: Option<f64>,
}

impl ScalingTable {
    fn column(&self, f: impl Fn(&SparseStats) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| f(&r.stats)).collect()
    }

    pub fn stats_decreasing(&self) -> bool {
        let strictly = |v: Vec<f64>| v.windows(2).all(|w| w[1] < w[0]);
        strictly(self.column(|s| s.stat1)) && strictly(self.column(|s| s.stat2))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,cardinality,max_star,sharp,stat1,stat2,exact_bound\n");
        for r in &self.rows {
            let s = &r.stats;
            out.push_str(&format!(
                "{},{},{},{},{:e},{:e},{:e}\n",
                r.big_n, s.cardinality, s.max_star, s.sharp, s.stat1, s.stat2, s.exact_bound
            ));
        }
        out
    }
}

pub fn scaling_table(
    cover: &sparse::Cover,
    ns: &[usize],
    phi: &sparse::Injection,
    h: &TestFunction,
) -> Result<ScalingTable> {
    let rows = ns
        .iter()
        .map(|&big_n| {
            let set = sparse::fractional_product(cover, big_n, phi)?;
            Ok(ScalingRow { big_n, stats: bound_sparse_stats(&set, h)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut t = ScalingTable { rows, cardinality_slope: None, bound_slope: None, stat1_slope: None, stat2_slope: None };
    t.cardinality_slope = sparse::loglog_slope(&xs, &t.column(|s| s.cardinality as f64));
    t.bound_slope = sparse::loglog_slope(&xs, &t.column(|s| s.exact_bound));
    t.stat1_slope = sparse::loglog_slope(&xs, &t.column(|s| s.stat1));
    t.stat2_slope = sparse::loglog_slope(&xs, &t.column(|s| s.stat2));
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSparseStats {
    /// `m_β^d(F)`.
    pub measure: f64,
    /// `m_β^{2d}(F#)`.
    pub sharp_measure: f64,
    /// `sup_j m_β^d(F*_j)`.
    pub max_star_measure: f64,
    pub stat1: f64,
    pub stat2: f64,
}

/// The two statistics with counting measure replaced by the product
/// measure of `m_β(A) = Σ_{i∈A} β_i²`.
pub fn bound_weighted_sparse(beta: &WeightSequence, set: &SparseIndexSet) -> Result<WeightedSparseStats> {
    let df = factorial_u64(set.d()) as f64;
    let w: Vec<f64> = set
        .representatives()
        .iter()
        .map(|t| t.iter().map(|&c| beta.get(c as i64).powi(2)).product())
        .collect();
    let measure = df * w.iter().sum::<f64>();
    if !(measure > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let sharp = df * df * sparse::sharp_weighted(set, &w)?;
    let mut star: BTreeMap<u32, f64> = BTreeMap::new();
    for (t, wt) in set.representatives().iter().zip(&w) {
        for &c in t.iter() {
            *star.entry(c).or_insert(0.0) += df * wt;
        }
    }
    let max_star = star.values().copied().fold(0.0, f64::max);
    Ok(WeightedSparseStats {
        measure,
        sharp_measure: sharp,
        max_star_measure: max_star,
        stat1: sharp.sqrt() / measure,
        stat2: (max_star / measure).powf(0.25),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SymmetricKernel;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn single_coordinate() {
        let dec = WeightSequence::ones(1).to_decomposition().unwrap();
        let h = TestFunction::cos(1.0, 0.0);
        let b = bound_general(&dec, &h).unwrap();
        assert_eq!(b.b1, 0.0);
        assert!(close(b.b2, 20.0 / 3.0, 1e-15));
        let avg = bound_average(&WeightSequence::ones(1), &h).unwrap();
        assert!(close(avg.total, 20.0 / 3.0, 1e-15));
    }

    #[test]
    fn partial_sums_use_no_enumeration() {
        let n = 4096;
        let alpha = WeightSequence::constant(n, 1.0 / (n as f64).sqrt());
        let h = TestFunction::cos(2.0, 0.0);
        let b = bound_general(&alpha.to_decomposition().unwrap(), &h).unwrap();
        assert!(b.b1 < 1e-12);
        assert!(close(b.total, 20.0 / (3.0 * n as f64) * 4.0, 1e-9));
    }

    #[test]
    fn rejects_uncentered_and_missing_norms() {
        let dec = ChaosDecomposition::constant(2, 1.0);
        assert!(matches!(bound_general(&dec, &TestFunction::cos(1.0, 0.0)), Err(Error::NotCentered(_))));
        let dec = WeightSequence::ones(1).to_decomposition().unwrap();
        assert!(matches!(bound_general(&dec, &TestFunction::cubic()), Err(Error::MissingNorm(_))));
    }

    #[test]
    fn inverse_weights_meet_stated_estimates() {
        let h = TestFunction::cos(1.0, 0.0);
        for r in [2usize, 5, 50] {
            let alpha = WeightSequence::inverse(r, 200_000).unwrap();
            let (lo, hi) = alpha.sum_sq_bounds().unwrap();
            let dev = (1.0 - lo).abs().max((1.0 - hi).abs());
            assert!(dev <= 1.0 / r as f64);
            assert!(alpha.sum_fourth_bound().unwrap() <= 1.0 / (r as f64 - 1.0));
            let total = bound_average(&alpha, &h).unwrap().total;
            assert!(total <= 1.0 / r as f64 + 20.0 / (3.0 * (r as f64 - 1.0)));
        }
        let bare = WeightSequence::truncated(1, vec![1.0], None);
        assert!(matches!(bound_average(&bare, &h), Err(Error::MissingTailCertificate)));
    }

    #[test]
    fn fixed_chaos_single_entry() {
        // value 1/√2 on {1,2} has E F² = 2, so only the gap term is nonzero
        let f = SymmetricKernel::new(2, [([1u32, 2], std::f64::consts::FRAC_1_SQRT_2)]).unwrap();
        let t = fixed_chaos_terms(&f).unwrap();
        assert!(close(t.variance_gap_sq, 1.0, 1e-15));
        assert!(close(t.mww, 1.0, 1e-15));
        let unit = SymmetricKernel::new(2, [([1u32, 2], 0.5)]).unwrap();
        let t = fixed_chaos_terms(&unit).unwrap();
        assert!(t.variance_gap_sq.abs() < 1e-15);
        assert!(t.mww.abs() < 1e-15);
        // f⋆₁¹f = ¼ on the diagonal; f⋆₂¹f(k) = Σ_i f(i,k)² = ¼; f⋆₁⁰f(a,b,c) = f(a,b)f(c,b)
        assert!(close(t.mww4, 16.0 * (2.0 / 8.0 + 1.0 / 8.0), 1e-14));
        let zero = SymmetricKernel::<f64>::zero(3);
        assert_eq!(fixed_chaos_terms(&zero).unwrap().mww, 1.0);
    }

    #[test]
    fn double_integral_single_entry() {
        let f = SymmetricKernel::new(2, [([1u32, 2], 0.5)]).unwrap();
        let h = TestFunction::cos(1.0, 0.0);
        let b = bound_double_integral(&f, &h).unwrap();
        // [f] = ½·antidiag, [f]⁴ = I/16
        assert!(close(b.trace, 0.125, 1e-14));
        assert_eq!(b.off_diagonal_norm, 0.0);
        let m = 4f64.min(1.0);
        assert!(close(b.trace_chain, 4.0 * 2f64.sqrt() * m * 0.125f64.sqrt() + 160.0 * 0.125, 1e-14));
        assert!(b.best <= b.with_star_two_one && b.best <= b.with_diagonal);
        let unnorm = SymmetricKernel::new(2, [([1u32, 2], std::f64::consts::FRAC_1_SQRT_2)]).unwrap();
        assert!(close(crate::contraction::trace_power4(&unnorm).unwrap(), 0.5, 1e-14));
        assert!(matches!(bound_double_integral(&unnorm, &h), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn chatterjee_single_entry() {
        let f = SymmetricKernel::new(2, [([1u32, 2], std::f64::consts::FRAC_1_SQRT_2)]).unwrap();
        let expect = 0.5 + 2.5 * 2.0 * 0.5f64.powf(1.5);
        assert!(close(chatterjee_bound(&f).unwrap(), expect, 1e-14));
        assert_eq!(chatterjee_bound(&SymmetricKernel::zero(2)).unwrap(), 0.0);
    }

    #[test]
    fn wasserstein_cases() {
        assert_eq!(wasserstein_bound(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(wasserstein_bound(1.0, 1.0, 1.0), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn two_runs_variance_small() {
        assert!(close(two_runs_variance(&[1.0, 1.0, 1.0]), 13.0 / 16.0, 1e-15));
        let h = TestFunction::cos(1.0, 0.0);
        let b = bound_two_runs(&WeightSequence::ones(100), &h).unwrap();
        assert!(close(b.var_g, 300.0 / 16.0 + 99.0 / 8.0, 1e-14));
        assert!(matches!(
            bound_two_runs(&WeightSequence::finite(1, vec![0.0]), &h),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn single_plus_double_reduces_to_average_shape() {
        let h = TestFunction::cos(1.0, 0.0);
        let f = WeightSequence::constant(4, 0.5);
        let b = bound_single_plus_double(&f, &SymmetricKernel::zero(2), &h).unwrap();
        assert_eq!(b.b1, 0.0);
        assert!(close(b.b2, 160.0 / 3.0 * 4.0 * 0.0625, 1e-14));
    }

    #[test]
    fn weighted_sparse_counting_measure() {
        let set = SparseIndexSet::new(2, 2, [[1, 2]]).unwrap();
        let beta = WeightSequence::constant(2, std::f64::consts::FRAC_1_SQRT_2);
        let w = bound_weighted_sparse(&beta, &set).unwrap();
        assert!(close(w.measure, 0.5, 1e-15));
        let off = WeightSequence::finite(5, vec![1.0]);
        assert!(matches!(bound_weighted_sparse(&off, &set), Err(Error::ZeroMeasure)));
    }
}
