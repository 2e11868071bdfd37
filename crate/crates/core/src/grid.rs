//! Truncated uniform lattices on `[-L, L]^n` and vector-valued fields sampled on them.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Uniform lattice with `points` nodes per axis on `[-half_extent, half_extent]^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_extent: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_extent: f64, points: usize) -> Result<Self> {
        if dim < 1 {
            return Err(invalid(format!("grid dimension must be >= 1, got {dim}")));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(invalid(format!("grid half-extent must be positive, got {half_extent}")));
        }
        if points < 2 {
            return Err(invalid(format!("grid needs at least 2 points per axis, got {points}")));
        }
        points
            .checked_pow(dim as u32)
            .ok_or_else(|| invalid("grid point count overflows"))?;
        Ok(Self { dim, half_extent, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / (self.points - 1) as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of lattice points, `points^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of lattice index `j` along any axis.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.spacing()
    }

    /// Axis coordinates `x_j = -L + j h`.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coord(j)).collect()
    }

    /// Row-major decomposition of a flat point index (first axis varies slowest).
    pub fn unravel(&self, mut index: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.dim);
        for slot in out.iter_mut().rev() {
            *slot = index % self.points;
            index /= self.points;
        }
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &j| acc * self.points + j)
    }

    /// Coordinates of the flat point index.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut multi = vec![0; self.dim];
        self.unravel(index, &mut multi);
        multi.iter().map(|&j| self.coord(j)).collect()
    }

    /// Stride of the given axis in flat point indices.
    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    pub(crate) fn same_lattice(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.points == other.points && self.half_extent == other.half_extent
    }
}

/// Sampled function `R^n -> C^m` on a [`Grid`], stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    components: usize,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self { grid, components, values: vec![Complex64::new(0.0, 0.0); grid.len() * components] }
    }

    pub fn from_values(grid: Grid, components: usize, values: Vec<Complex64>) -> Result<Self> {
        if components == 0 {
            return Err(invalid("field needs at least one component"));
        }
        if values.len() != grid.len() * components {
            return Err(invalid(format!(
                "expected {} values for {} points x {} components, got {}",
                grid.len() * components,
                grid.len(),
                components,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: grid.point(pos / components) });
        }
        Ok(Self { grid, components, values })
    }

    /// Internal constructor for values known to be well-formed.
    pub(crate) fn from_parts(grid: Grid, components: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len() * components);
        Self { grid, components, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Codomain dimension `m`.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value vector at a flat point index.
    pub fn at(&self, index: usize) -> &[Complex64] {
        &self.values[index * self.components..(index + 1) * self.components]
    }

    /// Euclidean norm of the value at a point, `|f|(x) = ||f(x)||`.
    pub fn modulus_at(&self, index: usize) -> f64 {
        self.at(index).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_compatible(&self, other: &Field) -> bool {
        self.grid.same_lattice(&other.grid) && self.components == other.components
    }

    pub(crate) fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "fields on {:?} (m={}) and {:?} (m={})",
                self.grid, self.components, other.grid, other.components
            )))
        }
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::from_parts(self.grid, self.components, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Field, b: Complex64) -> Result<Field> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| a * x + b * y).collect();
        Ok(Field::from_parts(self.grid, self.components, values))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Largest entry modulus over the whole grid.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Samples a pointwise rule on every lattice point. The rule writes the `m` components.
pub fn sample<F>(grid: Grid, components: usize, rule: F) -> Result<Field>
where
    F: Fn(&[f64], &mut [Complex64]),
{
    if components == 0 {
        return Err(invalid("field needs at least one component"));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * components];
    let mut multi = vec![0; grid.dim()];
    let mut x = vec![0.0; grid.dim()];
    for (p, chunk) in values.chunks_mut(components).enumerate() {
        grid.unravel(p, &mut multi);
        for (xi, &j) in x.iter_mut().zip(&multi) {
            *xi = grid.coord(j);
        }
        rule(&x, chunk);
        if chunk.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: x });
        }
    }
    Ok(Field::from_parts(grid, components, values))
}

/// Samples a scalar (`m = 1`) rule.
pub fn sample_scalar<F>(grid: Grid, rule: F) -> Result<Field>
where
    F: Fn(&[f64]) -> Complex64,
{
    sample(grid, 1, |x, out| out[0] = rule(x))
}

/// Lattice translation `f_s(x) = f(x + s h)` with zero fill outside the grid.
pub fn translate(f: &Field, shift: &[i64]) -> Result<Field> {
    let grid = *f.grid();
    if shift.len() != grid.dim() {
        return Err(invalid(format!("shift has {} entries for a {}-d grid", shift.len(), grid.dim())));
    }
    let n = grid.points() as i64;
    if let Some(&s) = shift.iter().find(|s| s.abs() >= n) {
        return Err(invalid(format!("shift component {s} exceeds grid size {n}")));
    }
    let m = f.components();
    let mut out = Field::zeros(grid, m);
    let mut multi = vec![0; grid.dim()];
    let mut src = vec![0; grid.dim()];
    'points: for p in 0..grid.len() {
        grid.unravel(p, &mut multi);
        for ((s, &j), &d) in src.iter_mut().zip(&multi).zip(shift) {
            let k = j as i64 + d;
            if k < 0 || k >= n {
                continue 'points;
            }
            *s = k as usize;
        }
        let q = grid.ravel(&src);
        out.values_mut()[p * m..(p + 1) * m].copy_from_slice(f.at(q));
    }
    Ok(out)
}

/// Scalar field whose outermost `border` layers vanish; the discrete stand-in for a
/// compactly supported test function.
#[derive(Debug, Clone)]
pub struct TestFunction {
    field: Field,
    border: usize,
}

impl TestFunction {
    pub fn new(field: Field, border: usize) -> Result<Self> {
        if field.components() != 1 {
            return Err(invalid("test functions are scalar valued"));
        }
        if border < 2 {
            return Err(invalid(format!("test function border must be >= 2 layers, got {border}")));
        }
        let grid = *field.grid();
        if 2 * border >= grid.points() {
            return Err(invalid("test function border swallows the whole grid"));
        }
        let mut multi = vec![0; grid.dim()];
        for p in 0..grid.len() {
            grid.unravel(p, &mut multi);
            let on_border = multi.iter().any(|&j| j < border || j >= grid.points() - border);
            if on_border && field.values()[p] != Complex64::new(0.0, 0.0) {
                return Err(invalid(format!(
                    "test function is nonzero at boundary point {:?}",
                    grid.point(p)
                )));
            }
        }
        Ok(Self { field, border })
    }

    /// Smooth bump `exp(1 - 1/(1 - |x-c|^2/r^2))` supported in the open ball of radius `r`.
    pub fn smooth_bump(grid: Grid, center: &[f64], radius: f64, border: usize) -> Result<Self> {
        if center.len() != grid.dim() || !(radius > 0.0) {
            return Err(invalid("bump needs a center of grid dimension and a positive radius"));
        }
        let field = sample_scalar(grid, |x| {
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (radius * radius);
            if d2 < 1.0 {
                Complex64::new((1.0 - 1.0 / (1.0 - d2)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })?;
        Self::new(field, border)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn border(&self) -> usize {
        self.border
    }
}

/// Discrete `∫ f φ dx`, one entry per component of `f`.
pub fn pair(f: &Field, phi: &TestFunction) -> Result<Vec<Complex64>> {
    if !f.grid().same_lattice(phi.field().grid()) {
        return Err(Error::GridMismatch("pairing a field with a test function on another grid".into()));
    }
    let m = f.components();
    let dv = f.grid().cell_volume();
    let mut acc = vec![Complex64::new(0.0, 0.0); m];
    for (p, &w) in phi.field().values().iter().enumerate() {
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (a, &v) in acc.iter_mut().zip(f.at(p)) {
            *a += v * w;
        }
    }
    Ok(acc.into_iter().map(|a| a * dv).collect())
}

/// Interior sub-grid excluding a boundary margin (fraction of the full width per side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    margin: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self { margin: 0.25 }
    }
}

impl Window {
    pub fn new(margin: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&margin) {
            return Err(invalid(format!("window margin must lie in [0, 0.5), got {margin}")));
        }
        Ok(Self { margin })
    }

    /// The whole grid.
    pub fn full() -> Self {
        Self { margin: 0.0 }
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Inclusive index range kept along each axis: `|x| <= (1 - 2 margin) L`.
    pub fn axis_range(&self, grid: &Grid) -> (usize, usize) {
        if self.margin == 0.0 {
            return (0, grid.points() - 1);
        }
        let limit = (1.0 - 2.0 * self.margin) * grid.half_extent() * (1.0 + 1e-12);
        let lo = (0..grid.points()).find(|&j| grid.coord(j).abs() <= limit);
        match lo {
            Some(lo) => (lo, grid.points() - 1 - lo),
            None => (1, 0),
        }
    }

    /// Flat indices of the points inside the window, in lattice order.
    pub fn indices(&self, grid: &Grid) -> Vec<usize> {
        let (lo, hi) = self.axis_range(grid);
        if lo > hi {
            return Vec::new();
        }
        let mut multi = vec![0; grid.dim()];
        (0..grid.len())
            .filter(|&p| {
                grid.unravel(p, &mut multi);
                multi.iter().all(|&j| j >= lo && j <= hi)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(1, 1.0, 3).unwrap();
        assert_eq!(g.axis(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.spacing(), 1.0);

        let g = Grid::new(2, 8.0, 129).unwrap();
        assert_eq!(g.len(), 129 * 129);
        assert_eq!(g.spacing(), 0.125);

        let g = Grid::new(1, 8.0, 1025).unwrap();
        assert_eq!(g.spacing(), 0.015625);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(Grid::new(0, 1.0, 3).is_err());
        assert!(Grid::new(1, 0.0, 3).is_err());
        assert!(Grid::new(1, -2.0, 3).is_err());
        assert!(Grid::new(1, 1.0, 1).is_err());
    }

    #[test]
    fn ravel_round_trips() {
        let g = Grid::new(3, 1.0, 4).unwrap();
        let mut multi = [0; 3];
        for p in 0..g.len() {
            g.unravel(p, &mut multi);
            assert_eq!(g.ravel(&multi), p);
        }
        g.unravel(4 * 4 + 2, &mut multi);
        assert_eq!(multi, [1, 0, 2]);
    }

    #[test]
    fn sample_examples() {
        let g = Grid::new(2, 1.0, 5).unwrap();
        let f = sample(g, 2, |_, out| {
            out[0] = Complex64::new(1.5, -2.0);
            out[1] = c(3.0);
        })
        .unwrap();
        assert!(f.values().chunks(2).all(|v| v[0] == Complex64::new(1.5, -2.0) && v[1] == c(3.0)));

        let g = Grid::new(1, 2.0, 9).unwrap();
        let f = sample_scalar(g, |x| c(x[0])).unwrap();
        let xs: Vec<f64> = f.values().iter().map(|v| v.re).collect();
        assert_eq!(xs, g.axis());

        let g = Grid::new(2, 3.0, 17).unwrap();
        let f = sample_scalar(g, |x| c((-(x[0] * x[0] + x[1] * x[1])).exp())).unwrap();
        for p in 0..g.len() {
            let x = g.point(p);
            let want = (-(x[0] * x[0] + x[1] * x[1])).exp();
            assert!((f.values()[p].re - want).abs() <= 1e-15);
        }
    }

    #[test]
    fn sample_reports_nonfinite_point() {
        let g = Grid::new(1, 1.0, 3).unwrap();
        let err = sample_scalar(g, |x| c(1.0 / x[0])).unwrap_err();
        match err {
            Error::NonFinite { point } => assert_eq!(point, vec![0.0]),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn translate_zero_shift_is_identity() {
        let g = Grid::new(2, 1.0, 6).unwrap();
        let f = sample_scalar(g, |x| Complex64::new(x[0], x[1] * x[1])).unwrap();
        assert_eq!(translate(&f, &[0, 0]).unwrap(), f);
    }

    #[test]
    fn translate_moves_bump_one_cell() {
        let g = Grid::new(1, 2.0, 5).unwrap();
        let f = Field::from_values(g, 1, [0.0, 0.0, 1.0, 0.0, 0.0].map(c).to_vec()).unwrap();
        // f_s(x) = f(x + s h): shifting by -1 moves the bump one cell right.
        let right = translate(&f, &[-1]).unwrap();
        assert_eq!(right.values(), &[0.0, 0.0, 0.0, 1.0, 0.0].map(c));
        let g2 = sample_scalar(g, |x| c(x[0] + 10.0)).unwrap();
        let left = translate(&g2, &[1]).unwrap();
        assert_eq!(left.values()[4], c(0.0));
        assert_eq!(left.values()[0], c(-1.0 + 10.0));
    }

    #[test]
    fn translate_matches_resampled_rule_on_interior() {
        let g = Grid::new(1, 6.0, 241).unwrap();
        let rule = |x: f64| (-(x - 0.3) * (x - 0.3)).exp() * (2.0 * x).cos();
        let f = sample_scalar(g, |x| c(rule(x[0]))).unwrap();
        let s = 7_i64;
        let moved = translate(&f, &[s]).unwrap();
        let h = g.spacing();
        let mut l2 = 0.0;
        for j in 0..(g.points() - s as usize) {
            let want = rule(g.coord(j) + s as f64 * h);
            l2 += (moved.values()[j].re - want).powi(2) * h;
        }
        assert!(l2.sqrt() < 1e-13);
        assert!(translate(&f, &[241]).is_err());
        assert!(translate(&f, &[-241]).is_err());
    }

    #[test]
    fn pair_constant_and_zero() {
        let g = Grid::new(2, 2.0, 41).unwrap();
        let phi = TestFunction::smooth_bump(g, &[0.1, -0.2], 1.0, 2).unwrap();
        let mass: f64 = phi.field().values().iter().map(|v| v.re).sum::<f64>() * g.cell_volume();
        let cst = sample(g, 2, |_, out| {
            out[0] = Complex64::new(2.0, 1.0);
            out[1] = c(-3.0);
        })
        .unwrap();
        let got = pair(&cst, &phi).unwrap();
        assert!((got[0] - Complex64::new(2.0, 1.0) * mass).norm() < 1e-13);
        assert!((got[1] - c(-3.0 * mass)).norm() < 1e-13);
        let z = Field::zeros(g, 1);
        assert_eq!(pair(&z, &phi).unwrap(), vec![c(0.0)]);
    }

    #[test]
    fn pair_rejects_grid_mismatch() {
        let g = Grid::new(1, 2.0, 41).unwrap();
        let g2 = Grid::new(1, 2.0, 43).unwrap();
        let phi = TestFunction::smooth_bump(g, &[0.0], 1.0, 2).unwrap();
        assert!(matches!(pair(&Field::zeros(g2, 1), &phi), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn test_function_rejects_boundary_mass() {
        let g = Grid::new(1, 2.0, 21).unwrap();
        let f = sample_scalar(g, |_| c(1.0)).unwrap();
        assert!(TestFunction::new(f, 2).is_err());
        let bump = TestFunction::smooth_bump(g, &[0.0], 1.0, 2).unwrap();
        assert!(TestFunction::new(bump.field().clone(), 1).is_err());
    }

    #[test]
    fn window_keeps_central_half() {
        let g = Grid::new(1, 12.0, 1025).unwrap();
        let (lo, hi) = Window::default().axis_range(&g);
        assert_eq!(g.coord(lo), -6.0);
        assert_eq!(g.coord(hi), 6.0);
        let g2 = Grid::new(2, 1.0, 5).unwrap();
        assert_eq!(Window::default().indices(&g2), vec![6, 7, 8, 11, 12, 13, 16, 17, 18]);
        assert_eq!(Window::full().indices(&g2).len(), 25);
        assert!(Window::new(0.5).is_err());
    }
}
