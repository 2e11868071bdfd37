//! Evaluation of `G(z) f = chi_z * f` by direct quadrature and by the spectral multiplier.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid};
use crate::kernel::{gaussian_tail, kernel_1d, kernel_1d_dxx, kernel_eval, ComplexTime};
use crate::spectral::apply_radial_multiplier;
use crate::weights::Weight;

/// Default budget for the kernel mass left outside the grid.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Riemann-sum convolution with zero fill outside the grid.
    Quadrature,
    /// DFT, multiply by `e^{-z |xi|^2}`, inverse DFT (periodic).
    Spectral,
}

impl Method {
    /// Spectral for real times, quadrature for genuinely complex ones.
    pub fn default_for(zeta: ComplexTime) -> Method {
        if zeta.is_real() {
            Method::Spectral
        } else {
            Method::Quadrature
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Quadrature => "quadrature",
            Method::Spectral => "spectral",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Method::Quadrature),
            "spectral" => Ok(Method::Spectral),
            other => Err(Error::Parse(format!("unknown method {other:?} (quadrature|spectral)"))),
        }
    }
}

/// Result of an application together with its truncation budget.
#[derive(Debug, Clone)]
pub struct Applied {
    pub field: Field,
    /// Mass of `|chi_z|` outside the ball of radius `L`.
    pub tail_mass: f64,
    /// Whether `tail_mass` is within the configured budget.
    pub grid_adequate: bool,
}

/// Evaluator for the semigroup.
///
/// `symbol_time_scale` multiplies the time inside the spectral symbol, i.e. the
/// spectral path uses `e^{-c z |xi|^2}`. It is 1 for the heat semigroup and exists so
/// verification suites can be run against a deliberately wrong multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Semigroup {
    pub symbol_time_scale: f64,
    pub tail_budget: f64,
}

impl Default for Semigroup {
    fn default() -> Self {
        Self { symbol_time_scale: 1.0, tail_budget: DEFAULT_TAIL_BUDGET }
    }
}

impl Semigroup {
    pub fn apply(&self, zeta: ComplexTime, f: &Field, method: Method) -> Result<Field> {
        if zeta.is_zero() {
            return Ok(f.clone());
        }
        let z = zeta.value();
        Ok(match method {
            Method::Quadrature => separable_convolution(f, z, None),
            Method::Spectral => apply_radial_multiplier(f, |xi2| self.symbol(zeta, xi2)),
        })
    }

    /// Fourier multiplier `e^{-c z |xi|^2}` used by the spectral path, as a function of `|xi|^2`.
    pub fn symbol(&self, zeta: ComplexTime, xi2: f64) -> Complex64 {
        (-self.symbol_time_scale * zeta.value() * xi2).exp()
    }

    pub fn apply_traced(&self, zeta: ComplexTime, f: &Field, method: Method) -> Result<Applied> {
        let field = self.apply(zeta, f, method)?;
        let tail_mass = if zeta.is_zero() {
            0.0
        } else {
            let g = f.grid();
            gaussian_tail(zeta.modulus(), zeta.arg().cos(), g.half_extent(), g.dim())
        };
        Ok(Applied { field, tail_mass, grid_adequate: tail_mass <= self.tail_budget })
    }

    /// `G'(z) f = chi'_z * f` by quadrature.
    pub fn apply_dzeta(&self, zeta: ComplexTime, f: &Field) -> Result<Field> {
        let z = zeta.require_positive()?;
        let grid = *f.grid();
        let mut total: Option<Field> = None;
        for axis in 0..grid.dim() {
            let term = separable_convolution(f, z, Some(axis));
            total = Some(match total {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        Ok(total.expect("grid dimension is at least 1"))
    }

    /// States `G(t_i) f` for strictly increasing nonnegative real times.
    pub fn trajectory(&self, f: &Field, times: &[f64], method: Method) -> Result<Trajectory> {
        validate_times(times)?;
        let states = times
            .par_iter()
            .map(|&t| self.apply(ComplexTime::real(t)?, f, method))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { times: times.to_vec(), states })
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("trajectory needs at least one time"));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(invalid("trajectory times must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("trajectory times must be strictly increasing"));
    }
    Ok(())
}

/// `Σ_y K(y) f(x - y) h^n` for the product kernel `Π_a k(y_a)` with zero fill.
///
/// With `second_derivative_axis = Some(a)` the factor along axis `a` is replaced by
/// its second derivative; summing over `a` gives the Laplacian of the kernel.
fn separable_convolution(f: &Field, z: Complex64, second_derivative_axis: Option<usize>) -> Field {
    let grid = *f.grid();
    let n = grid.points();
    let h = grid.spacing();
    let offsets = |dxx: bool| -> Vec<Complex64> {
        (0..2 * n - 1)
            .map(|i| {
                let y = (i as f64 - (n - 1) as f64) * h;
                let k = if dxx { kernel_1d_dxx(z, y) } else { kernel_1d(z, y) };
                k * h
            })
            .collect()
    };
    let plain = offsets(false);
    let curved = second_derivative_axis.map(|_| offsets(true));
    let m = f.components();
    let mut values = f.values().to_vec();
    for axis in 0..grid.dim() {
        let kernel = match (&curved, second_derivative_axis) {
            (Some(c), Some(a)) if a == axis => c,
            _ => &plain,
        };
        convolve_axis(&mut values, &grid, m, axis, kernel);
    }
    Field::from_parts(grid, m, values)
}

/// `out[i] = Σ_j kernel[i - j + n - 1] in[j]` along every line of the given axis.
fn convolve_axis(values: &mut [Complex64], grid: &Grid, m: usize, axis: usize, kernel: &[Complex64]) {
    let n = grid.points();
    let stride = grid.stride(axis);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for start in (0..grid.len()).filter(|p| (p / stride).is_multiple_of(n)) {
        for c in 0..m {
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = values[(start + j * stride) * m + c];
            }
            for (i, o) in out.iter_mut().enumerate() {
                let taps = &kernel[i..i + n];
                // taps[k] = kernel[i + k] pairs with line[n - 1 - k]
                *o = taps.iter().zip(line.iter().rev()).map(|(a, b)| a * b).sum();
            }
            for (j, v) in out.iter().enumerate() {
                values[(start + j * stride) * m + c] = *v;
            }
        }
    }
}

pub fn apply(zeta: ComplexTime, f: &Field, method: Method) -> Result<Field> {
    Semigroup::default().apply(zeta, f, method)
}

pub fn apply_dzeta(zeta: ComplexTime, f: &Field) -> Result<Field> {
    Semigroup::default().apply_dzeta(zeta, f)
}

pub fn trajectory(f: &Field, times: &[f64], method: Method) -> Result<Trajectory> {
    Semigroup::default().trajectory(f, times, method)
}

/// `M_k(z) = Σ_y w_k(y) |chi_z(y)| h^n` over every lattice offset the quadrature path
/// can reach, so that `||G(z) f||_wX <= M_k(z) ||f||_wX` holds for the discrete norms.
pub fn operator_bound(zeta: ComplexTime, k: f64, grid: &Grid) -> Result<f64> {
    zeta.require_positive()?;
    let weight = Weight::new(k)?;
    let offsets = Grid::new(grid.dim(), 2.0 * grid.half_extent(), 2 * grid.points() - 1)?;
    let mut acc = 0.0;
    for p in 0..offsets.len() {
        let y = offsets.point(p);
        acc += weight.eval(&y) * kernel_eval(zeta, &y)?.norm();
    }
    Ok(acc * grid.cell_volume())
}

/// Real-time evolution `u(t_i) = G(t_i) f` on one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Field>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Field>) -> Result<Self> {
        validate_times(&times)?;
        if times.len() != states.len() {
            return Err(invalid("one state per time required"));
        }
        if let Some(first) = states.first() {
            if let Some(bad) = states.iter().find(|s| !s.is_compatible(first)) {
                return Err(Error::GridMismatch(format!("trajectory state on {:?}", bad.grid())));
            }
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
