//! Exact enumeration, seeded Monte Carlo, Gaussian expectations and the
//! measured distance `|E h(F) - E h(Z)|`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{ChaosDecomposition, RademacherPoint, MAX_DIMENSION};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::testfn::TestFunction;

/// Identifier of the random stream recorded in every report.
pub const RNG_ID: &str = "chacha8-rand_chacha0.3-stream-per-chunk4096";

const MC_CHUNK: u64 = 4096;
const ENUM_CHUNK_BITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn exact(value: f64, d: usize) -> Self {
        Estimate { value, std_error: 0.0, samples: 1u64 << d, seed: 0 }
    }
}

/// Visits all points of `{-1,+1}^d` whose high bits equal `chunk`, in Gray
/// code order of the low `bits` coordinates.
fn gray_walk(d: usize, bits: usize, chunk: u64, mut f: impl FnMut(&RademacherPoint)) {
    let start = chunk << bits;
    let mut point = RademacherPoint::from_index(d, start);
    f(&point);
    for i in 1u64..(1 << bits) {
        point.flip(i.trailing_zeros() + 1);
        f(&point);
    }
}

/// `E F` under the uniform law on `{-1,+1}^d`, exactly.
///
/// The sum is split into fixed chunks that are reduced in index order, so
/// the result does not depend on the number of worker threads.
pub fn enumerate_expectation(
    f: impl Fn(&RademacherPoint) -> f64 + Sync,
    d: usize,
) -> Result<Estimate> {
    if d > MAX_DIMENSION {
        return Err(Error::DimensionLimit { d, limit: MAX_DIMENSION });
    }
    let bits = d.min(ENUM_CHUNK_BITS);
    let chunks = 1u64 << (d - bits);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            gray_walk(d, bits, c, |p| s += f(p));
            s
        })
        .collect();
    let total: f64 = partial.iter().sum();
    Ok(Estimate::exact(total / (1u64 << d) as f64, d))
}

/// Exact expectation in any scalar type (sequential).
pub fn enumerate_expectation_exact<S: Scalar>(
    f: impl Fn(&RademacherPoint) -> S,
    d: usize,
) -> Result<S> {
    if d > MAX_DIMENSION {
        return Err(Error::DimensionLimit { d, limit: MAX_DIMENSION });
    }
    let mut total = S::zero();
    gray_walk(d, d, 0, |p| total = total.clone() + f(p));
    Ok(total / S::from_i64(1i64 << d))
}

pub(crate) fn random_point(d: usize, rng: &mut ChaCha8Rng) -> RademacherPoint {
    let mut p = RademacherPoint::new(d);
    for k in 1..=d as u32 {
        if rng.gen::<bool>() {
            p.flip(k);
        }
    }
    p
}

/// Sample mean of `draw(rng)` over `samples` draws.
///
/// Chunk `c` of 4096 draws uses ChaCha stream `c` of `seed`, which makes
/// the estimate independent of the worker count. Sums are shifted by the
/// first draw so a constant has standard error exactly 0.
pub fn mc_sample(
    draw: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::Invalid("Monte Carlo needs at least 2 samples".into()));
    }
    let stream_rng = |c: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c);
        rng
    };
    let shift = draw(&mut stream_rng(0));
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(c);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x = draw(&mut rng) - shift;
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let var = ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0);
    Ok(Estimate { value: shift + s1 / n, std_error: (var / n).sqrt(), samples, seed })
}

/// Sample-mean estimate of `E F` from `samples` uniform points.
pub fn mc_estimate(
    f: impl Fn(&RademacherPoint) -> f64 + Sync,
    d: usize,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    mc_sample(|rng| f(&random_point(d, rng)), samples, seed)
}

/// Orthonormal Hermite values `(p_n(x), p_{n-1}(x))` by recurrence.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
    }
    (p1, p2)
}

/// Nodes and weights for `∫ e^{-x²} g(x) dx`. Roots are bracketed by sign
/// changes on a grid finer than the smallest node gap, then polished by
/// Newton steps.
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let weight = |x: f64| {
        let (_, pm1) = hermite_pair(n, x);
        let pp = (2.0 * n as f64).sqrt() * pm1;
        2.0 / (pp * pp)
    };
    let mut roots = Vec::with_capacity(n);
    let top = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let step = 0.25 / (2.0 * n as f64).sqrt();
    let mut x0 = if n % 2 == 1 { step } else { 0.0 };
    let mut v0 = hermite_pair(n, x0).0;
    while x0 < top {
        let x1 = x0 + step;
        let v1 = hermite_pair(n, x1).0;
        if v0 == 0.0 || v0.signum() != v1.signum() {
            let (mut lo, mut hi) = (x0, x1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if hermite_pair(n, mid).0.signum() == v0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut z = 0.5 * (lo + hi);
            for _ in 0..3 {
                let (p, pm1) = hermite_pair(n, z);
                let dz = p / ((2.0 * n as f64).sqrt() * pm1);
                if (z - dz - z).abs() < step {
                    z -= dz;
                }
            }
            roots.push(z);
        }
        x0 = x1;
        v0 = v1;
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &z in roots.iter().rev() {
        out.push((z, weight(z)));
    }
    if n % 2 == 1 {
        out.push((0.0, weight(0.0)));
    }
    for &z in &roots {
        out.push((-z, weight(z)));
    }
    assert_eq!(out.len(), n, "Hermite root bracketing missed a node");
    out
}

/// Nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let m = n.div_ceil(2);
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        out[i] = (z, w);
        out[n - 1 - i] = (-z, w);
    }
    out
}

fn hermite_rule(n: usize) -> &'static [(f64, f64)] {
    static R128: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R256: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    match n {
        128 => R128.get_or_init(|| gauss_hermite(128)),
        _ => R256.get_or_init(|| gauss_hermite(256)),
    }
}

fn legendre_rule(n: usize) -> &'static [(f64, f64)] {
    static R128: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R256: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    match n {
        128 => R128.get_or_init(|| gauss_legendre(128)),
        _ => R256.get_or_init(|| gauss_legendre(256)),
    }
}

fn hermite_expectation(h: &TestFunction, n: usize) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    let s: f64 = hermite_rule(n).iter().map(|&(x, w)| w * h.eval(sqrt2 * x)).sum();
    s / std::f64::consts::PI.sqrt()
}

fn legendre_expectation(h: &TestFunction, lo: f64, hi: f64, n: usize) -> f64 {
    let (c, r) = ((hi + lo) / 2.0, (hi - lo) / 2.0);
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    legendre_rule(n)
        .iter()
        .map(|&(u, w)| {
            let x = c + r * u;
            w * r * h.eval(x) * norm * (-x * x / 2.0).exp()
        })
        .sum()
}

/// `E h(Z)` for a standard Gaussian `Z`: Gauss–Hermite with 128 nodes,
/// cross-checked at 256. Compactly supported functions are integrated with
/// Gauss–Legendre on their support instead, since the kinks at the support
/// edge stall Hermite convergence.
pub fn gaussian_expectation(h: &TestFunction) -> Result<f64> {
    let (a, b) = match h.support() {
        Some((lo, hi)) => (legendre_expectation(h, lo, hi, 128), legendre_expectation(h, lo, hi, 256)),
        None => (hermite_expectation(h, 128), hermite_expectation(h, 256)),
    };
    let diff = (a - b).abs();
    if diff.is_nan() || diff >= 1e-10 {
        return Err(Error::QuadratureUnstable(diff));
    }
    Ok(b)
}

/// `|E h(F) - E h(Z)|` with `E h(F)` by exact enumeration.
pub fn distance(dec: &ChaosDecomposition<f64>, h: &TestFunction) -> Result<f64> {
    let compact = dec.compress();
    let table = compact.to_table()?;
    let eh: f64 = table.values().iter().map(|&x| h.eval(x)).sum::<f64>() / table.values().len() as f64;
    Ok((eh - gaussian_expectation(h)?).abs())
}

/// Monte Carlo version of [`distance`]; the standard error is that of `E h(F)`.
pub fn distance_mc(
    dec: &ChaosDecomposition<f64>,
    h: &TestFunction,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let compact = dec.compress();
    let d = compact.dimension();
    let est = mc_estimate(|p| h.eval(compact.evaluate(p).expect("dimension matches")), d, samples, seed)?;
    let g = gaussian_expectation(h)?;
    Ok(Estimate { value: (est.value - g).abs(), ..est })
}
