//! The complex-time Gauss-Weierstrass kernel
//! `chi_z(x) = (4 pi z)^{-n/2} exp(-|x|^2 / 4z)` and its closed-form companions.
//!
//! All complex powers use the principal branch. For `Re z > 0` the argument of
//! `4 pi z` lies in `(-pi/2, pi/2)`, so `(4 pi z)^{-n/2}` is single valued and equals
//! the `n`-th power of the one-dimensional normalisation. That is what lets the
//! convolution routines factor the kernel axis by axis.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use statrs::function::gamma::gamma_ur;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;

/// A point of the closed time domain `{0} ∪ {Re z > 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTime(Complex64);

impl ComplexTime {
    pub fn new(z: Complex64) -> Result<Self> {
        let zero = z.re == 0.0 && z.im == 0.0;
        if !z.is_finite() || !(zero || z.re > 0.0) {
            return Err(Error::InvalidTime { re: z.re, im: z.im });
        }
        Ok(Self(z))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn real(t: f64) -> Result<Self> {
        Self::new(Complex64::new(t, 0.0))
    }

    /// `r e^{i phi}`.
    pub fn polar(r: f64, phi: f64) -> Result<Self> {
        if r == 0.0 {
            return Self::new(Complex64::new(0.0, 0.0));
        }
        Self::new(Complex64::from_polar(r, phi))
    }

    pub fn zero() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }

    pub fn is_real(&self) -> bool {
        self.0.im == 0.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    pub fn arg(&self) -> f64 {
        self.0.arg()
    }

    /// `z / |z|`; undefined (NaN) at zero.
    pub fn unit(&self) -> Complex64 {
        self.0 / self.0.norm()
    }

    pub fn in_sector(&self, alpha: f64) -> bool {
        !self.is_zero() && self.arg().abs() < alpha
    }

    /// Sum of two times; stays in the domain since both summands do.
    pub fn plus(&self, other: ComplexTime) -> ComplexTime {
        ComplexTime(self.0 + other.0)
    }

    /// `z + delta`, rejected if it leaves the domain.
    pub fn shifted(&self, delta: Complex64) -> Result<ComplexTime> {
        ComplexTime::new(self.0 + delta)
    }

    pub(crate) fn require_positive(&self) -> Result<Complex64> {
        if self.is_zero() {
            Err(Error::InvalidTime { re: 0.0, im: 0.0 })
        } else {
            Ok(self.0)
        }
    }
}

impl fmt::Display for ComplexTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im = self.0.im;
        if im.is_sign_negative() {
            write!(f, "{}-{}i", self.0.re, -im)
        } else {
            write!(f, "{}+{}i", self.0.re, im)
        }
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `a+i` (no spaces).
impl FromStr for ComplexTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot parse complex number {s:?}; expected a+bi"));
        let s = s.trim();
        if s.is_empty() || s.contains(char::is_whitespace) {
            return Err(bad());
        }
        let z = match s.strip_suffix(['i', 'j']) {
            None => Complex64::new(s.parse().map_err(|_| bad())?, 0.0),
            Some(body) => {
                let bytes = body.as_bytes();
                let split = (1..bytes.len())
                    .rev()
                    .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
                let (re, im) = match split {
                    Some(i) => (&body[..i], &body[i..]),
                    None => ("0", body),
                };
                let im = match im {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    other => other.parse().map_err(|_| bad())?,
                };
                Complex64::new(re.parse().map_err(|_| bad())?, im)
            }
        };
        ComplexTime::new(z)
    }
}

/// `(4 pi z)^{-dim/2}` on the principal branch.
fn normalisation(z: Complex64, dim: usize) -> Complex64 {
    (-(dim as f64) / 2.0 * (4.0 * PI * z).ln()).exp()
}

/// One-dimensional kernel factor `(4 pi z)^{-1/2} e^{-y^2/4z}`.
pub(crate) fn kernel_1d(z: Complex64, y: f64) -> Complex64 {
    normalisation(z, 1) * (-(y * y) / (4.0 * z)).exp()
}

/// Second spatial derivative of the one-dimensional factor.
pub(crate) fn kernel_1d_dxx(z: Complex64, y: f64) -> Complex64 {
    kernel_1d(z, y) * (y * y / (4.0 * z * z) - 1.0 / (2.0 * z))
}

/// `chi_z(x)` for `x` in `R^n`.
pub fn kernel_eval(zeta: ComplexTime, x: &[f64]) -> Result<Complex64> {
    let z = zeta.require_positive()?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(normalisation(z, x.len()) * (-r2 / (4.0 * z)).exp())
}

/// `d chi_z / dz = Delta chi_z = chi_z(x) (|x|^2/(4 z^2) - n/(2z))`.
pub fn kernel_dzeta(zeta: ComplexTime, x: &[f64]) -> Result<Complex64> {
    let z = zeta.require_positive()?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let n = x.len() as f64;
    Ok(kernel_eval(zeta, x)? * (r2 / (4.0 * z * z) - n / (2.0 * z)))
}

/// Riemann sum of `chi_z` over the grid.
pub fn kernel_mass(zeta: ComplexTime, grid: &Grid) -> Result<Complex64> {
    zeta.require_positive()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..grid.len() {
        acc += kernel_eval(zeta, &grid.point(p))?;
    }
    Ok(acc * grid.cell_volume())
}

/// Fourier symbol `e^{-z |xi|^2}` (transform convention `∫ f(x) e^{-i x.xi} dx`).
pub fn kernel_fourier(zeta: ComplexTime, xi: &[f64]) -> Result<Complex64> {
    let z = zeta.require_positive()?;
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    Ok((-z * r2).exp())
}

/// `∫_{|x|>R} (4 pi r)^{-n/2} e^{-|x|^2 c / 4r} dx = c^{-n/2} Q(n/2, R^2 c / 4r)`.
pub(crate) fn gaussian_tail(modulus: f64, cos_angle: f64, radius: f64, dim: usize) -> f64 {
    let a = dim as f64 / 2.0;
    let scale = cos_angle.powf(-a);
    if radius <= 0.0 {
        return scale;
    }
    let x = radius * radius * cos_angle / (4.0 * modulus);
    scale * gamma_ur(a, x)
}

/// Upper bound for `∫_{|x|>R} |chi_z(x)| dx` from the sector majorant with angle `alpha`.
pub fn kernel_tail_bound(zeta: ComplexTime, alpha: f64, radius: f64, dim: usize) -> Result<f64> {
    check_sector_angle(alpha)?;
    zeta.require_positive()?;
    if !zeta.in_sector(alpha) {
        return Err(Error::OutsideSector { arg: zeta.arg(), alpha });
    }
    if !(radius >= 0.0) || dim == 0 {
        return Err(invalid("tail bound needs R >= 0 and n >= 1"));
    }
    Ok(gaussian_tail(zeta.modulus(), alpha.cos(), radius, dim))
}

pub(crate) fn check_sector_angle(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(invalid(format!("sector angle must lie in (0, pi/2), got {alpha}")));
    }
    Ok(())
}

/// Smallest radius (to bisection accuracy) whose sector tail bound is at most `tol`.
pub fn radius_for_tail(zeta: ComplexTime, alpha: f64, dim: usize, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tail tolerance must be positive"));
    }
    let bound = |r: f64| kernel_tail_bound(zeta, alpha, r, dim);
    let mut hi = 2.0 * zeta.modulus().sqrt().max(1e-3);
    while bound(hi)? > tol {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid)? > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Grid whose half-extent keeps the kernel's tail mass below `tol` and whose spacing
/// does not exceed `max_spacing`. The half-extent never drops below `min_half_extent`.
pub fn grid_for_kernel(
    zeta: ComplexTime,
    alpha: f64,
    dim: usize,
    max_spacing: f64,
    min_half_extent: f64,
    tol: f64,
) -> Result<Grid> {
    let half = radius_for_tail(zeta, alpha, dim, tol)?.max(min_half_extent);
    let points = (2.0 * half / max_spacing).ceil() as usize + 1;
    Grid::new(dim, half, points)
}
