//! Polynomial weights `w_k(x) = (1 + |x|)^k` and the discrete norms of the weighted spaces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Window};

/// Polynomial weight exponent `k >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Weight {
    k: f64,
}

impl Weight {
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(invalid(format!("weight exponent must be a finite k >= 0, got {k}")));
        }
        Ok(Self { k })
    }

    /// The trivial weight `w = 1`.
    pub fn unit() -> Self {
        Self { k: 0.0 }
    }

    pub fn exponent(&self) -> f64 {
        self.k
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_radius(euclid(x))
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        if self.k == 0.0 {
            1.0
        } else {
            (1.0 + r).powf(self.k)
        }
    }
}

impl TryFrom<f64> for Weight {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Weight::new(k)
    }
}

impl From<Weight> for f64 {
    fn from(w: Weight) -> f64 {
        w.k
    }
}

pub(crate) fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `(1 + |x|_2)^k`.
pub fn weight_eval(k: f64, x: &[f64]) -> Result<f64> {
    Ok(Weight::new(k)?.eval(x))
}

/// Signed slacks of the four weight inequalities; each is nonnegative when the
/// inequality holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSlacks {
    /// `w(x+y) - 1`
    pub lower: f64,
    /// `w(x) w(y) - w(x+y)`
    pub submultiplicative: f64,
    /// `w(x-y) w(x) - w(y)`
    pub reverse: f64,
    /// `w(y)(w(y) - 1) - |w(x+y)/w(x) - 1|`
    pub ratio: f64,
}

impl WeightSlacks {
    pub fn min(&self) -> f64 {
        self.lower.min(self.submultiplicative).min(self.reverse).min(self.ratio)
    }
}

pub fn weight_inequality_check(k: f64, x: &[f64], y: &[f64]) -> Result<WeightSlacks> {
    let w = Weight::new(k)?;
    if x.len() != y.len() {
        return Err(invalid("points of different dimension"));
    }
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let (wx, wy, wsum, wdiff) = (w.eval(x), w.eval(y), w.eval(&sum), w.eval(&diff));
    Ok(WeightSlacks {
        lower: wsum - 1.0,
        submultiplicative: wx * wy - wsum,
        reverse: wdiff * wx - wy,
        ratio: wy * (wy - 1.0) - (wsum / wx - 1.0).abs(),
    })
}

/// Base space of the weighted space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceKind {
    Buc,
    C0,
    Lp(f64),
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Buc => f.write_str("BUC"),
            SpaceKind::C0 => f.write_str("C0"),
            SpaceKind::Lp(p) => write!(f, "L{p}"),
        }
    }
}

impl FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "buc" => Ok(SpaceKind::Buc),
            "c0" => Ok(SpaceKind::C0),
            other => {
                let p = other
                    .strip_prefix("lp")
                    .or_else(|| other.strip_prefix('l'))
                    .ok_or_else(|| Error::Parse(format!("unknown space kind {s:?}")))?;
                let p: f64 = p.parse().map_err(|_| Error::Parse(format!("bad Lp exponent in {s:?}")))?;
                Ok(SpaceKind::Lp(p))
            }
        }
    }
}

/// A weighted space `wX` with norm `||f||_wX = ||f / w||_X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceSpec {
    weight: Weight,
    kind: SpaceKind,
}

impl SpaceSpec {
    pub fn new(weight: Weight, kind: SpaceKind) -> Result<Self> {
        if let SpaceKind::Lp(p) = kind {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(invalid(format!("Lp exponent must satisfy 1 <= p < inf, got {p}")));
            }
        }
        Ok(Self { weight, kind })
    }

    pub fn buc(k: f64) -> Result<Self> {
        Self::new(Weight::new(k)?, SpaceKind::Buc)
    }

    pub fn lp(k: f64, p: f64) -> Result<Self> {
        Self::new(Weight::new(k)?, SpaceKind::Lp(p))
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn with_weight(&self, weight: Weight) -> Self {
        Self { weight, kind: self.kind }
    }

    /// Discrete norm on the whole grid.
    pub fn norm(&self, f: &Field) -> Result<f64> {
        weighted_norm(f, self)
    }

    /// Discrete norm restricted to an interior window.
    pub fn norm_on(&self, f: &Field, window: &Window) -> Result<f64> {
        weighted_norm_on(f, self, window)
    }
}

/// `||f / w||` as a grid maximum (BUC, C0) or a Riemann sum (Lp).
pub fn weighted_norm(f: &Field, s: &SpaceSpec) -> Result<f64> {
    weighted_norm_on(f, s, &Window::full())
}

pub fn weighted_norm_on(f: &Field, s: &SpaceSpec, window: &Window) -> Result<f64> {
    let grid = *f.grid();
    let points = window.indices(&grid);
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let w = s.weight();
    let scaled = points.iter().map(|&p| f.modulus_at(p) / w.eval(&grid.point(p)));
    Ok(match s.kind() {
        SpaceKind::Buc | SpaceKind::C0 => scaled.fold(0.0, f64::max),
        SpaceKind::Lp(p) => {
            let sum: f64 = if p == 1.0 { scaled.sum() } else { scaled.map(|v| v.powf(p)).sum() };
            (sum * grid.cell_volume()).powf(1.0 / p)
        }
    })
}

/// Weighted norm restricted to an interior window; the measure used for every residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowedNorm {
    pub space: SpaceSpec,
    pub window: Window,
}

impl WindowedNorm {
    pub fn new(space: SpaceSpec, window: Window) -> Self {
        Self { space, window }
    }

    pub fn of(&self, f: &Field) -> Result<f64> {
        weighted_norm_on(f, &self.space, &self.window)
    }

    pub fn distance(&self, a: &Field, b: &Field) -> Result<f64> {
        self.of(&a.sub(b)?)
    }

    /// `||a - b|| / ||reference||`, falling back to the absolute distance when the
    /// reference vanishes.
    pub fn relative_distance(&self, a: &Field, b: &Field, reference: &Field) -> Result<f64> {
        let d = self.distance(a, b)?;
        let r = self.of(reference)?;
        Ok(if r > 0.0 { d / r } else { d })
    }
}
