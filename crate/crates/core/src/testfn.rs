//! Test functions `h` with certified sup-norms of `h, h', h'', h'''`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Cos { a: f64, b: f64 },
    Bump { w: f64 },
    Cubic,
    Linear { a: f64, b: f64 },
    Custom { name: String, derivs: Vec<RealFn> },
}

/// An evaluator with upper bounds on the sup-norms of its first three
/// derivatives. Any bound may be unavailable.
#[derive(Clone)]
pub struct TestFunction {
    kind: Kind,
    norms: [Option<f64>; 4],
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name()).field("norms", &self.norms).finish()
    }
}

/// Sup-norms of the bump `(1-u²)⁴` and its `u`-derivatives on `[-1,1]`.
fn bump_unit_norms() -> [f64; 4] {
    // ‖p‖ = 1 and ‖p''‖ = 8 are attained at u = 0; the odd derivatives are
    // certified by a dense grid plus a margin covering the grid spacing.
    let n = 200_000;
    let (mut m1, mut m3) = (0.0f64, 0.0f64);
    for i in 0..=n {
        let u = -1.0 + 2.0 * i as f64 / n as f64;
        m1 = m1.max(bump_u(u, 1).abs());
        m3 = m3.max(bump_u(u, 3).abs());
    }
    // |p''| ≤ 8 and |p''''| ≤ 384 bound the slopes of p' and p'''
    let h = 1.0 / n as f64;
    [1.0, m1 + 8.0 * h, 8.0, m3 + 384.0 * h]
}

fn bump_u(u: f64, k: usize) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - u * u;
    match k {
        0 => s.powi(4),
        1 => -8.0 * u * s.powi(3),
        2 => s * s * (56.0 * u * u - 8.0),
        3 => u * s * (144.0 - 336.0 * u * u),
        _ => f64::NAN,
    }
}

impl TestFunction {
    /// `h(x) = cos(a x + b)`.
    pub fn cos(a: f64, b: f64) -> Self {
        let a_abs = a.abs();
        TestFunction {
            kind: Kind::Cos { a, b },
            norms: [Some(1.0), Some(a_abs), Some(a_abs * a_abs), Some(a_abs.powi(3))],
        }
    }

    /// `h(x) = sin(a x + b)`.
    pub fn sin(a: f64, b: f64) -> Self {
        Self::cos(a, b - std::f64::consts::FRAC_PI_2)
    }

    /// The C³ bump `(1 - (x/w)²)⁴` on `|x| < w`, zero elsewhere.
    pub fn bump(w: f64) -> Result<Self> {
        if w.is_nan() || w <= 0.0 {
            return Err(Error::Invalid(format!("bump width must be positive, got {w}")));
        }
        let u = bump_unit_norms();
        let norms = [Some(u[0]), Some(u[1] / w), Some(u[2] / (w * w)), Some(u[3] / w.powi(3))];
        Ok(TestFunction { kind: Kind::Bump { w }, norms })
    }

    /// `φ(x) = x³`; unbounded, so only `‖φ'''‖ = 6` is certified.
    pub fn cubic() -> Self {
        TestFunction { kind: Kind::Cubic, norms: [None, None, None, Some(6.0)] }
    }

    /// `φ(x) = a x + b`.
    pub fn linear(a: f64, b: f64) -> Self {
        TestFunction { kind: Kind::Linear { a, b }, norms: [None, Some(a.abs()), Some(0.0), Some(0.0)] }
    }

    /// Caller-certified function. `derivs[k]` evaluates the k-th derivative;
    /// missing entries make the corresponding derivative unavailable.
    pub fn custom(name: impl Into<String>, derivs: Vec<RealFn>, norms: [Option<f64>; 4]) -> Result<Self> {
        if derivs.is_empty() {
            return Err(Error::Invalid("custom test function needs an evaluator".into()));
        }
        Ok(TestFunction { kind: Kind::Custom { name: name.into(), derivs }, norms })
    }

    /// Parses `cos:a=1,b=0`, `sin:a=2`, `bump:w=2`, `cubic`, `linear:a=1,b=0`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut a = 1.0;
        let mut b = 0.0;
        let mut w = 2.0;
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("expected key=value in '{part}'")))?;
            let v: f64 =
                val.trim().parse().map_err(|_| Error::Invalid(format!("bad number '{val}'")))?;
            match key.trim() {
                "a" => a = v,
                "b" => b = v,
                "w" => w = v,
                other => return Err(Error::Invalid(format!("unknown parameter '{other}'"))),
            }
        }
        match head {
            "cos" => Ok(Self::cos(a, b)),
            "sin" => Ok(Self::sin(a, b)),
            "bump" => Self::bump(w),
            "cubic" => Ok(Self::cubic()),
            "linear" => Ok(Self::linear(a, b)),
            other => Err(Error::Invalid(format!("unknown test function '{other}'"))),
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Cos { a, b } => format!("cos:a={a},b={b}"),
            Kind::Bump { w } => format!("bump:w={w}"),
            Kind::Cubic => "cubic".into(),
            Kind::Linear { a, b } => format!("linear:a={a},b={b}"),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x).expect("value always available")
    }

    /// The k-th derivative at `x`, if known.
    pub fn derivative(&self, k: usize, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Cos { a, b } => {
                let t = a * x + b;
                let ak = a.powi(k as i32);
                Some(match k % 4 {
                    0 => ak * t.cos(),
                    1 => -ak * t.sin(),
                    2 => -ak * t.cos(),
                    _ => ak * t.sin(),
                })
            }
            Kind::Bump { w } => (k <= 3).then(|| bump_u(x / w, k) / w.powi(k as i32)),
            Kind::Cubic => Some(match k {
                0 => x * x * x,
                1 => 3.0 * x * x,
                2 => 6.0 * x,
                3 => 6.0,
                _ => 0.0,
            }),
            Kind::Linear { a, b } => Some(match k {
                0 => a * x + b,
                1 => *a,
                _ => 0.0,
            }),
            Kind::Custom { derivs, .. } => derivs.get(k).map(|f| f(x)),
        }
    }

    /// Certified `‖h^{(k)}‖∞`, `k ≤ 3`.
    pub fn sup_norm(&self, k: usize) -> Option<f64> {
        self.norms.get(k).copied().flatten()
    }

    pub fn sup_h(&self) -> Option<f64> {
        self.norms[0]
    }

    pub fn sup_h1(&self) -> Option<f64> {
        self.norms[1]
    }

    pub fn sup_h2(&self) -> Option<f64> {
        self.norms[2]
    }

    pub fn sup_h3(&self) -> Option<f64> {
        self.norms[3]
    }

    pub(crate) fn require(&self, k: usize) -> Result<f64> {
        const NAMES: [&str; 4] = ["h", "h'", "h''", "h'''"];
        self.sup_norm(k).ok_or(Error::MissingNorm(NAMES[k]))
    }

    /// `[-w, w]` for compactly supported built-ins.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::Bump { w } => Some((-w, w)),
            _ => None,
        }
    }

    /// Closed form of `E h(Z)` when one is known.
    pub fn gaussian_closed_form(&self) -> Option<f64> {
        match self.kind {
            Kind::Cos { a, b } => Some((-a * a / 2.0).exp() * b.cos()),
            Kind::Cubic => Some(0.0),
            Kind::Linear { b, .. } => Some(b),
            _ => None,
        }
    }
}
