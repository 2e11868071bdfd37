//! Python bindings: grids, fields, the semigroup, weighted norms and the
//! verification suite.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use heat_semigroup::config::RunConfig;
use heat_semigroup::generator::discrete_laplacian;
use heat_semigroup::io::{load_field, save_field};
use heat_semigroup::kernel::{kernel_dzeta, kernel_eval, kernel_mass, kernel_tail_bound};
use heat_semigroup::semigroup::operator_bound;
use heat_semigroup::verify::semigroup_law_residual;
use heat_semigroup::weights::weight_eval;
use heat_semigroup::{
    run_suite, ComplexTime, Error, Field, FieldRule, Grid, LaplacianMethod, Method, Semigroup, SpaceKind, SpaceSpec,
    VerificationReport, Weight, Window, WindowedNorm,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for heat_semigroup::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn time(z: Complex64) -> PyResult<ComplexTime> {
    ComplexTime::new(z).py()
}

fn method(name: Option<&str>, z: ComplexTime) -> PyResult<Method> {
    name.map_or(Ok(Method::default_for(z)), |n| n.parse().py())
}

fn space(k: f64, kind: &str, p: Option<f64>) -> PyResult<SpaceSpec> {
    let kind = match (kind.to_ascii_lowercase().as_str(), p) {
        ("lp", Some(p)) => SpaceKind::Lp(p),
        (_, None) => kind.parse().py()?,
        (_, Some(_)) => return Err(PyValueError::new_err("p is only meaningful for kind='Lp'")),
    };
    SpaceSpec::new(Weight::new(k).py()?, kind).py()
}

fn window(margin: Option<f64>) -> PyResult<Window> {
    margin.map_or(Ok(Window::full()), |m| Window::new(m).py())
}

/// Uniform symmetric lattice with `points` samples per axis on `[-L, L]^dim`.
#[pyclass(name = "Grid", module = "heatsg", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyGrid(Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, half_extent: f64, points: usize) -> PyResult<Self> {
        Ok(Self(Grid::new(dim, half_extent, points).py()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn half_extent(&self) -> f64 {
        self.0.half_extent()
    }

    #[getter]
    fn points(&self) -> usize {
        self.0.points()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Coordinates of one axis.
    fn axis(&self) -> Vec<f64> {
        self.0.axis()
    }

    fn __repr__(&self) -> String {
        format!("Grid(dim={}, half_extent={}, points={})", self.0.dim(), self.0.half_extent(), self.0.points())
    }
}

/// Sampled `C^m`-valued field, point-major.
#[pyclass(name = "Field", module = "heatsg", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyField(Field);

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (grid, values, components = 1))]
    fn new(grid: &PyGrid, values: Vec<Complex64>, components: usize) -> PyResult<Self> {
        Ok(Self(Field::from_values(grid.0, components, values).py()?))
    }

    /// Samples a named rule such as `"gaussian"`, `"kernel:0.5"` or `"bumps:7"`.
    #[staticmethod]
    #[pyo3(signature = (rule, grid, components = 1))]
    fn from_rule(rule: &str, grid: &PyGrid, components: usize) -> PyResult<Self> {
        let rule: FieldRule = rule.parse().py()?;
        Ok(Self(rule.sample(grid.0, components).py()?))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self(load_field(&path).py()?))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_field(&self.0, &path).py()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn components(&self) -> usize {
        self.0.components()
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    /// Weighted norm `||f / w_k||_X`; `margin` restricts to an interior window.
    #[pyo3(signature = (k = 0.0, kind = "BUC", p = None, margin = None))]
    fn norm(&self, k: f64, kind: &str, p: Option<f64>, margin: Option<f64>) -> PyResult<f64> {
        WindowedNorm::new(space(k, kind, p)?, window(margin)?).of(&self.0).py()
    }

    fn __sub__(&self, other: &PyField) -> PyResult<PyField> {
        Ok(Self(self.0.sub(&other.0).py()?))
    }

    fn __repr__(&self) -> String {
        format!("Field(points={}, components={})", self.0.grid().len(), self.0.components())
    }
}

/// Verification report with one row per check.
#[pyclass(name = "Report", module = "heatsg", frozen)]
pub struct PyReport(VerificationReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.0.all_passed()
    }

    /// `(check, anchor, residual, tolerance, passed)` tuples in report order.
    fn rows(&self) -> Vec<(String, String, f64, f64, bool)> {
        self.0
            .results
            .iter()
            .map(|r| (r.check.clone(), r.anchor.to_string(), r.residual, r.tolerance, r.passed))
            .collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        self.0.to_csv().py()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __len__(&self) -> usize {
        self.0.results.len()
    }
}

fn engine(symbol_time_scale: f64) -> Semigroup {
    Semigroup { symbol_time_scale, ..Semigroup::default() }
}

/// `G(zeta) f`. The method defaults to spectral for real times and quadrature otherwise.
#[pyfunction]
#[pyo3(signature = (zeta, field, method = None, symbol_time_scale = 1.0))]
fn apply(zeta: Complex64, field: &PyField, method: Option<&str>, symbol_time_scale: f64) -> PyResult<PyField> {
    let z = time(zeta)?;
    Ok(PyField(engine(symbol_time_scale).apply(z, &field.0, self::method(method, z)?).py()?))
}

/// `G'(zeta) f` by quadrature.
#[pyfunction]
fn apply_dzeta(zeta: Complex64, field: &PyField) -> PyResult<PyField> {
    Ok(PyField(Semigroup::default().apply_dzeta(time(zeta)?, &field.0).py()?))
}

#[pyfunction]
#[pyo3(signature = (field, times, method = "spectral"))]
fn trajectory(field: &PyField, times: Vec<f64>, method: &str) -> PyResult<Vec<PyField>> {
    let traj = Semigroup::default().trajectory(&field.0, &times, method.parse().py()?).py()?;
    Ok(traj.states().iter().cloned().map(PyField).collect())
}

#[pyfunction]
#[pyo3(name = "kernel_eval")]
fn py_kernel_eval(zeta: Complex64, x: Vec<f64>) -> PyResult<Complex64> {
    kernel_eval(time(zeta)?, &x).py()
}

#[pyfunction]
#[pyo3(name = "kernel_dzeta")]
fn py_kernel_dzeta(zeta: Complex64, x: Vec<f64>) -> PyResult<Complex64> {
    kernel_dzeta(time(zeta)?, &x).py()
}

#[pyfunction]
#[pyo3(name = "kernel_mass")]
fn py_kernel_mass(zeta: Complex64, grid: &PyGrid) -> PyResult<Complex64> {
    kernel_mass(time(zeta)?, &grid.0).py()
}

#[pyfunction]
#[pyo3(name = "kernel_tail_bound")]
fn py_kernel_tail_bound(zeta: Complex64, alpha: f64, radius: f64, dim: usize) -> PyResult<f64> {
    kernel_tail_bound(time(zeta)?, alpha, radius, dim).py()
}

#[pyfunction]
#[pyo3(name = "weight_eval")]
fn py_weight_eval(k: f64, x: Vec<f64>) -> PyResult<f64> {
    weight_eval(k, &x).py()
}

#[pyfunction]
#[pyo3(name = "operator_bound")]
fn py_operator_bound(zeta: Complex64, k: f64, grid: &PyGrid) -> PyResult<f64> {
    operator_bound(time(zeta)?, k, &grid.0).py()
}

#[pyfunction]
#[pyo3(name = "discrete_laplacian", signature = (field, method = "finite_difference"))]
fn py_discrete_laplacian(field: &PyField, method: &str) -> PyResult<PyField> {
    let m: LaplacianMethod = method.parse().py()?;
    Ok(PyField(discrete_laplacian(&field.0, m).py()?))
}

/// Relative residual of `G(z1 + z2) f = G(z1) G(z2) f` on the default interior window.
#[pyfunction]
#[pyo3(name = "semigroup_law_residual", signature = (z1, z2, field, k = 0.0, symbol_time_scale = 1.0))]
fn py_semigroup_law_residual(z1: Complex64, z2: Complex64, field: &PyField, k: f64, symbol_time_scale: f64) -> PyResult<f64> {
    let norm = WindowedNorm::new(SpaceSpec::buc(k).py()?, Window::default());
    let r = semigroup_law_residual(time(z1)?, time(z2)?, &field.0, &norm, &engine(symbol_time_scale), None).py()?;
    Ok(r.relative)
}

/// Runs the verification suite described by a TOML configuration string.
#[pyfunction]
#[pyo3(name = "run_suite")]
fn py_run_suite(py: Python<'_>, config: &str) -> PyResult<PyReport> {
    let cfg = RunConfig::parse(config).py()?.suite().py()?;
    Ok(PyReport(py.detach(|| run_suite(&cfg))))
}

#[pymodule]
pub fn heatsg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(apply, m)?)?;
    m.add_function(wrap_pyfunction!(apply_dzeta, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(py_kernel_eval, m)?)?;
    m.add_function(wrap_pyfunction!(py_kernel_dzeta, m)?)?;
    m.add_function(wrap_pyfunction!(py_kernel_mass, m)?)?;
    m.add_function(wrap_pyfunction!(py_kernel_tail_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_weight_eval, m)?)?;
    m.add_function(wrap_pyfunction!(py_operator_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_discrete_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(py_semigroup_law_residual, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_suite, m)?)?;
    Ok(())
}
