//! Named analytic initial fields and seeded random bump mixtures.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{sample, Field, Grid};
use crate::kernel::{kernel_eval, ComplexTime};

/// A pointwise rule that can be sampled on any grid. Every component receives the
/// same scalar profile unless the rule is a random mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldRule {
    /// `e^{-|x|^2}`
    Gaussian,
    /// `1`
    Constant,
    /// `chi_s(x)` for real `s > 0`
    Kernel(f64),
    /// Narrow Gaussian bumps, negligible at the grid boundary.
    Bumps(u64),
    /// Wide, low-curvature Gaussian bumps.
    WideBumps(u64),
    /// `max(0, 1 - |x|/2)`, Lipschitz but not differentiable.
    Tent,
    /// `cos(x_1)`, bounded and non-decaying.
    Trig,
}

impl fmt::Display for FieldRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldRule::Gaussian => f.write_str("gaussian"),
            FieldRule::Constant => f.write_str("constant"),
            FieldRule::Kernel(s) => write!(f, "kernel:{s}"),
            FieldRule::Bumps(seed) => write!(f, "bumps:{seed}"),
            FieldRule::WideBumps(seed) => write!(f, "wide_bumps:{seed}"),
            FieldRule::Tent => f.write_str("tent"),
            FieldRule::Trig => f.write_str("trig"),
        }
    }
}

impl FromStr for FieldRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown field rule {s:?}"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let seed = |a: Option<&str>| -> Result<u64> { a.map_or(Ok(0), |a| a.parse().map_err(|_| bad())) };
        Ok(match name {
            "gaussian" => FieldRule::Gaussian,
            "constant" => FieldRule::Constant,
            "tent" => FieldRule::Tent,
            "trig" => FieldRule::Trig,
            "kernel" => {
                let t: f64 = arg.ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if !(t > 0.0) {
                    return Err(bad());
                }
                FieldRule::Kernel(t)
            }
            "bumps" => FieldRule::Bumps(seed(arg)?),
            "wide_bumps" => FieldRule::WideBumps(seed(arg)?),
            _ => return Err(bad()),
        })
    }
}

impl FieldRule {
    pub fn sample(&self, grid: Grid, components: usize) -> Result<Field> {
        let scalar = |rule: &dyn Fn(&[f64]) -> Complex64| {
            sample(grid, components, |x, out| {
                let v = rule(x);
                out.iter_mut().for_each(|o| *o = v);
            })
        };
        match self {
            FieldRule::Gaussian => scalar(&|x| Complex64::new((-norm2(x)).exp(), 0.0)),
            FieldRule::Constant => scalar(&|_| Complex64::new(1.0, 0.0)),
            FieldRule::Kernel(s) => {
                let s = ComplexTime::real(*s)?;
                scalar(&|x| kernel_eval(s, x).unwrap_or_default())
            }
            FieldRule::Tent => scalar(&|x| Complex64::new((1.0 - norm2(x).sqrt() / 2.0).max(0.0), 0.0)),
            FieldRule::Trig => scalar(&|x| Complex64::new(x[0].cos(), 0.0)),
            FieldRule::Bumps(seed) => {
                BumpMixture::random(&mut ChaCha8Rng::seed_from_u64(*seed), grid.dim(), components, BumpShape::NARROW).sample(grid)
            }
            FieldRule::WideBumps(seed) => {
                BumpMixture::random(&mut ChaCha8Rng::seed_from_u64(*seed), grid.dim(), components, BumpShape::WIDE).sample(grid)
            }
        }
    }

    /// Whether the rule decays to negligible values at the edge of the reference grids.
    pub fn decays(&self) -> bool {
        !matches!(self, FieldRule::Constant | FieldRule::Trig)
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Parameter ranges for random bump mixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpShape {
    pub center_range: f64,
    pub width: (f64, f64),
    pub count: (usize, usize),
}

impl BumpShape {
    /// Widths 0.7..1.2 with centres in [-1.5, 1.5]^n: below 1e-12 beyond |x| = 8.
    pub const NARROW: BumpShape = BumpShape { center_range: 1.5, width: (0.7, 1.2), count: (2, 4) };
    /// Widths 2..3 with centres in [-1, 1]^n: curvature at most 1/2 per unit amplitude.
    pub const WIDE: BumpShape = BumpShape { center_range: 1.0, width: (2.0, 3.0), count: (2, 4) };
}

/// `Σ_j c_j e^{-|x - a_j|^2 / s_j^2}` with complex `C^m` coefficients of total modulus at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpMixture {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    coefficients: Vec<Vec<Complex64>>,
}

impl BumpMixture {
    pub fn random<R: Rng>(rng: &mut R, dim: usize, components: usize, shape: BumpShape) -> Self {
        let count = rng.random_range(shape.count.0..=shape.count.1);
        let mut centers = Vec::with_capacity(count);
        let mut widths = Vec::with_capacity(count);
        let mut coefficients = Vec::with_capacity(count);
        for _ in 0..count {
            centers.push((0..dim).map(|_| rng.random_range(-shape.center_range..=shape.center_range)).collect());
            widths.push(rng.random_range(shape.width.0..=shape.width.1));
            coefficients.push(
                (0..components)
                    .map(|_| {
                        let c = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                        c / (2f64.sqrt() * count as f64)
                    })
                    .collect(),
            );
        }
        Self { centers, widths, coefficients }
    }

    pub fn sample(&self, grid: Grid) -> Result<Field> {
        let m = self.coefficients.first().map_or(1, Vec::len);
        sample(grid, m, |x, out| {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            for ((a, s), coeffs) in self.centers.iter().zip(&self.widths).zip(&self.coefficients) {
                let d2: f64 = x.iter().zip(a).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum();
                let e = (-d2 / (s * s)).exp();
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o += c * e;
                }
            }
        })
    }
}

/// `count` random narrow-bump fields from one seed.
pub fn random_fields(grid: Grid, components: usize, seed: u64, count: usize) -> Result<Vec<Field>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| BumpMixture::random(&mut rng, grid.dim(), components, BumpShape::NARROW).sample(grid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_names_round_trip() {
        for rule in [
            FieldRule::Gaussian,
            FieldRule::Constant,
            FieldRule::Kernel(0.5),
            FieldRule::Bumps(17),
            FieldRule::WideBumps(3),
            FieldRule::Tent,
            FieldRule::Trig,
        ] {
            assert_eq!(rule.to_string().parse::<FieldRule>().unwrap(), rule);
        }
        assert_eq!("bumps".parse::<FieldRule>().unwrap(), FieldRule::Bumps(0));
        assert!("kernel:-1".parse::<FieldRule>().is_err());
        assert!("kernel".parse::<FieldRule>().is_err());
        assert!("sine".parse::<FieldRule>().is_err());
    }

    #[test]
    fn bumps_are_seeded_and_negligible_at_the_edge() {
        let g = Grid::new(1, 12.0, 1025).unwrap();
        let a = FieldRule::Bumps(5).sample(g, 2).unwrap();
        let b = FieldRule::Bumps(5).sample(g, 2).unwrap();
        let c = FieldRule::Bumps(6).sample(g, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for f in random_fields(g, 1, 9, 50).unwrap() {
            assert!(f.values()[0].norm() < 1e-12);
            assert!(f.values()[g.len() - 1].norm() < 1e-12);
            assert!(f.max_abs() <= 1.0);
        }
    }

    #[test]
    fn wide_bumps_have_bounded_amplitude() {
        let g = Grid::new(2, 6.0, 49).unwrap();
        let f = FieldRule::WideBumps(2).sample(g, 1).unwrap();
        assert!(f.max_abs() <= 1.0 && f.max_abs() > 0.0);
    }
}
