//! The Laplacian as generator: discrete Laplacians, the generator identities, the
//! integrated (mild) equation and the pointwise classical residual.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{pair, Field, TestFunction, Window};
use crate::kernel::ComplexTime;
use crate::semigroup::{Method, Semigroup, Trajectory};
use crate::spectral::apply_radial_multiplier;
use crate::weights::WindowedNorm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LaplacianMethod {
    /// Second-order central differences with zero fill.
    #[default]
    FiniteDifference,
    /// DFT multiplier `-|xi|^2`.
    Spectral,
}

impl fmt::Display for LaplacianMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LaplacianMethod::FiniteDifference => "finite_difference",
            LaplacianMethod::Spectral => "spectral",
        })
    }
}

impl FromStr for LaplacianMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite_difference" | "fd" => Ok(LaplacianMethod::FiniteDifference),
            "spectral" => Ok(LaplacianMethod::Spectral),
            other => Err(Error::Parse(format!("unknown Laplacian method {other:?}"))),
        }
    }
}

pub fn discrete_laplacian(f: &Field, method: LaplacianMethod) -> Result<Field> {
    match method {
        LaplacianMethod::Spectral => Ok(apply_radial_multiplier(f, |xi2| Complex64::new(-xi2, 0.0))),
        LaplacianMethod::FiniteDifference => finite_difference_laplacian(f),
    }
}

fn finite_difference_laplacian(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let n = grid.points();
    if n < 3 {
        return Err(invalid("finite-difference Laplacian needs at least 3 points per axis"));
    }
    let m = f.components();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let src = f.values();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    let mut multi = vec![0; grid.dim()];
    let zero = Complex64::new(0.0, 0.0);
    for p in 0..grid.len() {
        grid.unravel(p, &mut multi);
        for (axis, &j) in multi.iter().enumerate() {
            let stride = grid.stride(axis);
            for c in 0..m {
                let centre = src[p * m + c];
                let left = if j > 0 { src[(p - stride) * m + c] } else { zero };
                let right = if j + 1 < n { src[(p + stride) * m + c] } else { zero };
                out[p * m + c] += (left - 2.0 * centre + right) * inv_h2;
            }
        }
    }
    Ok(Field::from_parts(grid, m, out))
}

/// Everything a residual needs besides its inputs: how to evolve, how to
/// differentiate in space and how to measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualContext {
    pub semigroup: Semigroup,
    pub method: Method,
    pub laplacian: LaplacianMethod,
    pub norm: WindowedNorm,
}

impl ResidualContext {
    pub fn new(method: Method, laplacian: LaplacianMethod, norm: WindowedNorm) -> Self {
        Self { semigroup: Semigroup::default(), method, laplacian, norm }
    }

    pub fn evolve(&self, t: f64, f: &Field) -> Result<Field> {
        self.semigroup.apply(ComplexTime::real(t)?, f, self.method)
    }

    pub fn laplacian(&self, f: &Field) -> Result<Field> {
        discrete_laplacian(f, self.laplacian)
    }
}

/// `r1 = |dG f/dt - Delta G f|`, `r2 = |Delta G f - G Delta f|`, `r3 = |dG f/dt - chi'_t * f|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl GeneratorResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

fn central_time_difference(ctx: &ResidualContext, f: &Field, t: f64, dt: f64) -> Result<Field> {
    let plus = ctx.evolve(t + dt, f)?;
    let minus = ctx.evolve(t - dt, f)?;
    let s = Complex64::new(0.5 / dt, 0.0);
    plus.combine(s, &minus, -s)
}

pub fn generator_residuals(f: &Field, t: f64, dt: f64, ctx: &ResidualContext) -> Result<GeneratorResiduals> {
    if !(dt > 0.0) || !(t - dt > 0.0) {
        return Err(invalid(format!("generator residuals need 0 < dt < t, got t={t}, dt={dt}")));
    }
    let ddt = central_time_difference(ctx, f, t, dt)?;
    let evolved = ctx.evolve(t, f)?;
    let lap_evolved = ctx.laplacian(&evolved)?;
    let evolved_lap = ctx.evolve(t, &ctx.laplacian(f)?)?;
    let derivative = ctx.semigroup.apply_dzeta(ComplexTime::real(t)?, f)?;
    Ok(GeneratorResiduals {
        r1: ctx.norm.distance(&ddt, &lap_evolved)?,
        r2: ctx.norm.distance(&lap_evolved, &evolved_lap)?,
        r3: ctx.norm.distance(&ddt, &derivative)?,
    })
}

/// `|(G(h) f - f)/h - Delta f|`, the difference quotient defining the generator.
pub fn difference_quotient_residual(f: &Field, h: f64, ctx: &ResidualContext) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid("difference quotient step must be positive"));
    }
    let quotient = ctx.evolve(h, f)?.combine(Complex64::new(1.0 / h, 0.0), f, Complex64::new(-1.0 / h, 0.0))?;
    ctx.norm.distance(&quotient, &ctx.laplacian(f)?)
}

/// Difference quotient `((G(h) f - f)/h)(phi)` tested against `phi`.
pub fn paired_difference_quotient(f: &Field, phi: &TestFunction, h: f64, ctx: &ResidualContext) -> Result<Vec<Complex64>> {
    let evolved = ctx.evolve(h, f)?;
    let quotient = evolved.combine(Complex64::new(1.0 / h, 0.0), f, Complex64::new(-1.0 / h, 0.0))?;
    pair(&quotient, phi)
}

/// `max_c |pair(Delta F, phi) - pair(F, Delta phi)|`: moving the Laplacian onto the test function.
pub fn transposition_residual(f: &Field, phi: &TestFunction, method: LaplacianMethod) -> Result<f64> {
    let lhs = pair(&discrete_laplacian(f, method)?, phi)?;
    let lap_phi = discrete_laplacian(phi.field(), method)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); f.components()];
    let dv = f.grid().cell_volume();
    for (p, &w) in lap_phi.values().iter().enumerate() {
        for (a, &v) in acc.iter_mut().zip(f.at(p)) {
            *a += v * w;
        }
    }
    Ok(lhs.iter().zip(acc).map(|(l, r)| (l - r * dv).norm()).fold(0.0, f64::max))
}

/// Quadrature nodes for `∫_eps^t`. With `eps = 0` the first uniform cell is split
/// geometrically (ratio 2) toward 0; the mesh always has exactly `steps` cells.
pub fn time_nodes(t: f64, eps: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(invalid(format!("time integral needs steps >= 2, got {steps}")));
    }
    if !(eps >= 0.0) || !(eps < t) || !t.is_finite() {
        return Err(invalid(format!("time integral needs 0 <= eps < t, got eps={eps}, t={t}")));
    }
    if eps > 0.0 {
        let h = (t - eps) / steps as f64;
        return Ok((0..=steps).map(|i| if i == steps { t } else { eps + i as f64 * h }).collect());
    }
    let graded = steps.ilog2() as usize;
    let uniform = steps - graded;
    let h = t / uniform as f64;
    let mut nodes = vec![0.0];
    nodes.extend((1..=graded).rev().map(|j| h / 2f64.powi(j as i32)));
    nodes.extend((1..=uniform).map(|i| if i == uniform { t } else { i as f64 * h }));
    Ok(nodes)
}

/// Composite trapezoid approximation of `∫_eps^t G(s) f ds`.
pub fn time_integral(f: &Field, t: f64, eps: f64, steps: usize, ctx: &ResidualContext) -> Result<Field> {
    let nodes = time_nodes(t, eps, steps)?;
    let states = nodes.par_iter().map(|&s| ctx.evolve(s, f)).collect::<Result<Vec<_>>>()?;
    let mut acc = Field::zeros(*f.grid(), f.components());
    for (i, state) in states.iter().enumerate() {
        let left = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
        let right = if i + 1 < nodes.len() { nodes[i + 1] - nodes[i] } else { 0.0 };
        let w = Complex64::new(0.5 * (left + right), 0.0);
        acc = acc.combine(Complex64::new(1.0, 0.0), state, w)?;
    }
    Ok(acc)
}

/// `|Delta ∫_0^t G(s) f ds - (G(t) f - f)|` on the interior window.
pub fn mild_identity_residual(f: &Field, t: f64, steps: usize, ctx: &ResidualContext) -> Result<f64> {
    mild_identity_residual_from(f, t, 0.0, steps, ctx)
}

/// `|Delta ∫_eps^t G(s) f ds - (G(t) f - G(eps) f)|`; `eps = 0` is the mild identity.
pub fn mild_identity_residual_from(f: &Field, t: f64, eps: f64, steps: usize, ctx: &ResidualContext) -> Result<f64> {
    let integral = time_integral(f, t, eps, steps, ctx)?;
    let lhs = ctx.laplacian(&integral)?;
    let rhs = ctx.evolve(t, f)?.sub(&ctx.evolve(eps, f)?)?;
    ctx.norm.distance(&lhs, &rhs)
}

/// `max |(u(t+dt) - u(t-dt))/(2 dt) - Delta u(t)|` over interior points and interior
/// times of a trajectory with uniformly spaced positive times.
pub fn classical_residual(traj: &Trajectory, laplacian: LaplacianMethod, window: &Window) -> Result<f64> {
    let first = traj.times().iter().position(|&t| t > 0.0).unwrap_or(traj.len());
    let times = &traj.times()[first..];
    let states = &traj.states()[first..];
    if times.len() < 3 {
        return Err(invalid("classical residual needs at least 3 positive times"));
    }
    let dt = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs())) {
        return Err(invalid("classical residual needs uniformly spaced times"));
    }
    let grid = *states[0].grid();
    let points = window.indices(&grid);
    let m = states[0].components();
    let mut worst: f64 = 0.0;
    for i in 1..times.len() - 1 {
        let lap = discrete_laplacian(&states[i], laplacian)?;
        for &p in &points {
            let mut sq = 0.0;
            for c in 0..m {
                let k = p * m + c;
                let ddt = (states[i + 1].values()[k] - states[i - 1].values()[k]) / (2.0 * dt);
                sq += (ddt - lap.values()[k]).norm_sqr();
            }
            worst = worst.max(sq.sqrt());
        }
    }
    Ok(worst)
}
