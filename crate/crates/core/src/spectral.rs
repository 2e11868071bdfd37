//! Discrete Fourier machinery on the periodised grid.
//!
//! The DFT of `points` samples with spacing `h` sees angular frequencies
//! `xi_k = 2 pi k / (points h)` with `k` wrapped into the symmetric range.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::grid::{Field, Grid};

/// Angular DFT frequencies along one axis, in DFT order.
pub fn angular_frequencies(grid: &Grid) -> Vec<f64> {
    let n = grid.points();
    let base = 2.0 * PI / (n as f64 * grid.spacing());
    (0..n)
        .map(|k| {
            let signed = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
            signed * base
        })
        .collect()
}

/// `|xi|^2` at every flat DFT index.
pub(crate) fn squared_frequencies(grid: &Grid) -> Vec<f64> {
    let axis = angular_frequencies(grid);
    let mut multi = vec![0; grid.dim()];
    (0..grid.len())
        .map(|p| {
            grid.unravel(p, &mut multi);
            multi.iter().map(|&k| axis[k] * axis[k]).sum()
        })
        .collect()
}

/// In-place n-d transform of every component. The inverse is normalised.
pub(crate) fn transform(values: &mut [Complex64], grid: &Grid, components: usize, direction: FftDirection) {
    let n = grid.points();
    let fft = FftPlanner::new().plan_fft(n, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = grid.len();
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        for start in (0..total).filter(|p| (p / stride).is_multiple_of(n)) {
            for c in 0..components {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = values[(start + j * stride) * components + c];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    values[(start + j * stride) * components + c] = *v;
                }
            }
        }
    }
    if direction == FftDirection::Inverse {
        let scale = 1.0 / total as f64;
        values.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Multiplies the spectrum of `f` by `symbol(|xi|^2)` and transforms back.
pub(crate) fn apply_radial_multiplier(f: &Field, symbol: impl Fn(f64) -> Complex64) -> Field {
    let grid = *f.grid();
    let m = f.components();
    let mut values = f.values().to_vec();
    transform(&mut values, &grid, m, FftDirection::Forward);
    for (chunk, xi2) in values.chunks_mut(m).zip(squared_frequencies(&grid)) {
        let s = symbol(xi2);
        chunk.iter_mut().for_each(|v| *v *= s);
    }
    transform(&mut values, &grid, m, FftDirection::Inverse);
    Field::from_parts(grid, m, values)
}

/// Riemann-sum approximation of `∫ f(x) e^{-i x.xi} dx` at the DFT frequencies,
/// for every component, in DFT order (point-major like a [`Field`]).
pub fn continuous_transform(f: &Field) -> Vec<Complex64> {
    let grid = *f.grid();
    let m = f.components();
    let mut values = f.values().to_vec();
    transform(&mut values, &grid, m, FftDirection::Forward);
    // The first sample sits at x = -L, not 0: e^{-i (-L) xi} per axis.
    let axis = angular_frequencies(&grid);
    let dv = grid.cell_volume();
    let l = grid.half_extent();
    let mut multi = vec![0; grid.dim()];
    for (p, chunk) in values.chunks_mut(m).enumerate() {
        grid.unravel(p, &mut multi);
        let phase: f64 = multi.iter().map(|&k| axis[k] * l).sum();
        let factor = Complex64::from_polar(dv, phase);
        chunk.iter_mut().for_each(|v| *v *= factor);
    }
    values
}
