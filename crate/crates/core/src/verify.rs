//! Tolerance-tagged residual checks for every identity the semigroup must satisfy,
//! collected into a deterministic report.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fields::{random_fields, FieldRule};
use crate::generator::{
    classical_residual, difference_quotient_residual, generator_residuals, mild_identity_residual,
    paired_difference_quotient, transposition_residual, LaplacianMethod, ResidualContext,
};
use crate::grid::{sample_scalar, Field, Grid, TestFunction, Window};
use crate::kernel::{check_sector_angle, grid_for_kernel, kernel_eval, kernel_mass, ComplexTime};
use crate::semigroup::{operator_bound, Method, Semigroup};
use crate::spectral::{angular_frequencies, continuous_transform};
use crate::weights::{weight_inequality_check, SpaceSpec, WindowedNorm};

/// Composition residual of `G(z1 + z2) = G(z1) G(z2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawResidual {
    pub absolute: f64,
    /// `absolute / ||G(z1 + z2) f||`
    pub relative: f64,
}

/// Compares the composition `G(z1) G(z2) f` (evaluated with `method`, or the
/// per-time default when `None`) against a direct quadrature evaluation at `z1 + z2`.
pub fn semigroup_law_residual(
    z1: ComplexTime,
    z2: ComplexTime,
    f: &Field,
    norm: &WindowedNorm,
    engine: &Semigroup,
    method: Option<Method>,
) -> Result<LawResidual> {
    let pick = |z: ComplexTime| method.unwrap_or_else(|| Method::default_for(z));
    let direct = engine.apply(z1.plus(z2), f, Method::Quadrature)?;
    let inner = engine.apply(z2, f, pick(z2))?;
    let composed = engine.apply(z1, &inner, pick(z1))?;
    let absolute = norm.distance(&direct, &composed)?;
    let scale = norm.of(&direct)?;
    Ok(LawResidual { absolute, relative: if scale > 0.0 { absolute / scale } else { absolute } })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub ray: f64,
    pub radius: f64,
    pub residual: f64,
}

/// `||G(r e^{i phi}) f - f||` for every ray angle `phi` and radius `r`, rows ordered by
/// (ray, radius). Uses the quadrature path.
pub fn continuity_scan(
    f: &Field,
    norm: &WindowedNorm,
    alpha: f64,
    rays: &[f64],
    radii: &[f64],
    engine: &Semigroup,
) -> Result<Vec<ScanRow>> {
    check_sector_angle(alpha)?;
    if let Some(&ray) = rays.iter().find(|r| !(r.abs() < alpha)) {
        return Err(Error::OutsideSector { arg: ray, alpha });
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("radii must be positive and strictly decreasing"));
    }
    let jobs: Vec<(f64, f64)> = rays.iter().flat_map(|&ray| radii.iter().map(move |&r| (ray, r))).collect();
    jobs.par_iter()
        .map(|&(ray, radius)| {
            let z = ComplexTime::polar(radius, ray)?;
            let moved = engine.apply(z, f, Method::Quadrature)?;
            Ok(ScanRow { ray, radius, residual: norm.distance(&moved, f)? })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphyResiduals {
    /// Norm of the discrete `dU/d(conj z) = (D_re U + i D_im U)/2`.
    pub cauchy_riemann: f64,
    /// `||D_re U - G'(z) f||`.
    pub derivative_match: f64,
}

/// Central differences of `U(z) = G(z) f` along the real and imaginary directions.
pub fn holomorphy_residuals(
    f: &Field,
    zeta: ComplexTime,
    h: f64,
    norm: &WindowedNorm,
    engine: &Semigroup,
) -> Result<HolomorphyResiduals> {
    if !(h > 0.0) {
        return Err(invalid("holomorphy step must be positive"));
    }
    let step = |d: Complex64| -> Result<Field> {
        let z = zeta.shifted(d)?;
        if z.is_zero() {
            return Err(Error::InvalidTime { re: 0.0, im: 0.0 });
        }
        engine.apply(z, f, Method::Quadrature)
    };
    let half = Complex64::new(0.5 / h, 0.0);
    let d_re = step(Complex64::new(h, 0.0))?.combine(half, &step(Complex64::new(-h, 0.0))?, -half)?;
    let d_im = step(Complex64::new(0.0, h))?.combine(half, &step(Complex64::new(0.0, -h))?, -half)?;
    let dbar = d_re.combine(Complex64::new(0.5, 0.0), &d_im, Complex64::new(0.0, 0.5))?;
    let derivative = engine.apply_dzeta(zeta, f)?;
    Ok(HolomorphyResiduals { cauchy_riemann: norm.of(&dbar)?, derivative_match: norm.distance(&d_re, &derivative)? })
}

/// Norm of the trapezoid approximation of `∮ G(z) f dz` over a circle in the right half-plane.
pub fn contour_residual(
    f: &Field,
    center: ComplexTime,
    radius: f64,
    nodes: usize,
    norm: &WindowedNorm,
    engine: &Semigroup,
) -> Result<f64> {
    if nodes < 8 {
        return Err(invalid(format!("contour needs at least 8 nodes, got {nodes}")));
    }
    if !(radius > 0.0) || !(center.value().re - radius > 0.0) {
        return Err(invalid("contour disk must lie in the open right half-plane"));
    }
    let terms = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / nodes as f64;
            let offset = Complex64::from_polar(radius, theta);
            let z = center.shifted(offset)?;
            let dz = Complex64::i() * offset * (2.0 * PI / nodes as f64);
            Ok(engine.apply(z, f, Method::Quadrature)?.scale(dz))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Field::zeros(*f.grid(), f.components());
    for t in &terms {
        acc = acc.add(t)?;
    }
    norm.of(&acc)
}

/// Named groups of checks, run in this registration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Weights,
    KernelMass,
    Fourier,
    ClosedForm,
    SemigroupLaw,
    PathEquivalence,
    Continuity,
    Holomorphy,
    Generator,
    Transposition,
    Mild,
    OperatorBound,
    Classical,
    Spot2d,
}

impl CheckKind {
    pub const ALL: [CheckKind; 14] = [
        CheckKind::Weights,
        CheckKind::KernelMass,
        CheckKind::Fourier,
        CheckKind::ClosedForm,
        CheckKind::SemigroupLaw,
        CheckKind::PathEquivalence,
        CheckKind::Continuity,
        CheckKind::Holomorphy,
        CheckKind::Generator,
        CheckKind::Transposition,
        CheckKind::Mild,
        CheckKind::OperatorBound,
        CheckKind::Classical,
        CheckKind::Spot2d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Weights => "weights",
            CheckKind::KernelMass => "kernel_mass",
            CheckKind::Fourier => "fourier",
            CheckKind::ClosedForm => "closed_form",
            CheckKind::SemigroupLaw => "semigroup_law",
            CheckKind::PathEquivalence => "path_equivalence",
            CheckKind::Continuity => "continuity",
            CheckKind::Holomorphy => "holomorphy",
            CheckKind::Generator => "generator",
            CheckKind::Transposition => "transposition",
            CheckKind::Mild => "mild",
            CheckKind::OperatorBound => "operator_bound",
            CheckKind::Classical => "classical",
            CheckKind::Spot2d => "spot_2d",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

/// Per-check thresholds. Ratio checks store the allowed distance of an observed
/// refinement ratio from its nominal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub weights: f64,
    pub kernel_mass_real: f64,
    pub kernel_mass_complex: f64,
    pub fourier: f64,
    pub closed_form: f64,
    pub semigroup_law: f64,
    pub path_equivalence: f64,
    pub continuity_final: f64,
    pub continuity_monotone: f64,
    pub holomorphy_ratio: f64,
    pub contour: f64,
    pub generator: f64,
    pub difference_quotient_ratio: f64,
    pub pairing_ratio: f64,
    pub transposition: f64,
    pub mild: f64,
    pub mild_reduction: f64,
    pub operator_bound: f64,
    pub classical_reduction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            weights: 1e-12,
            kernel_mass_real: 1e-8,
            kernel_mass_complex: 1e-6,
            fourier: 1e-4,
            closed_form: 1e-6,
            semigroup_law: 1e-5,
            path_equivalence: 1e-5,
            continuity_final: 1e-3,
            continuity_monotone: 1e-9,
            holomorphy_ratio: 0.5,
            contour: 1e-8,
            generator: 1e-4,
            difference_quotient_ratio: 0.5,
            pairing_ratio: 0.5,
            transposition: 1e-10,
            mild: 1e-4,
            mild_reduction: 0.5,
            operator_bound: 1e-8,
            classical_reduction: 1.0 / 3.0,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 19] = [
        "weights",
        "kernel_mass_real",
        "kernel_mass_complex",
        "fourier",
        "closed_form",
        "semigroup_law",
        "path_equivalence",
        "continuity_final",
        "continuity_monotone",
        "holomorphy_ratio",
        "contour",
        "generator",
        "difference_quotient_ratio",
        "pairing_ratio",
        "transposition",
        "mild",
        "mild_reduction",
        "operator_bound",
        "classical_reduction",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "weights" => &mut self.weights,
            "kernel_mass_real" => &mut self.kernel_mass_real,
            "kernel_mass_complex" => &mut self.kernel_mass_complex,
            "fourier" => &mut self.fourier,
            "closed_form" => &mut self.closed_form,
            "semigroup_law" => &mut self.semigroup_law,
            "path_equivalence" => &mut self.path_equivalence,
            "continuity_final" => &mut self.continuity_final,
            "continuity_monotone" => &mut self.continuity_monotone,
            "holomorphy_ratio" => &mut self.holomorphy_ratio,
            "contour" => &mut self.contour,
            "generator" => &mut self.generator,
            "difference_quotient_ratio" => &mut self.difference_quotient_ratio,
            "pairing_ratio" => &mut self.pairing_ratio,
            "transposition" => &mut self.transposition,
            "mild" => &mut self.mild,
            "mild_reduction" => &mut self.mild_reduction,
            "operator_bound" => &mut self.operator_bound,
            "classical_reduction" => &mut self.classical_reduction,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(name).map(|v| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(invalid(format!("tolerance tol.{name} must be finite and nonnegative")));
        }
        *self.slot(name).ok_or_else(|| invalid(format!("unknown tolerance tol.{name}")))? = value;
        Ok(())
    }
}

/// Everything a suite run depends on. A fixed config (including the seed) yields a
/// byte-identical report.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Reference grid for the one-grid checks.
    pub grid: Grid,
    /// Grid for two-dimensional spot checks; `None` skips them.
    pub spot_grid: Option<Grid>,
    pub space: SpaceSpec,
    pub alpha: f64,
    /// Times used by the kernel-mass and path-equivalence checks.
    pub zetas: Vec<ComplexTime>,
    pub seed: u64,
    pub components: usize,
    pub window: Window,
    pub laplacian: LaplacianMethod,
    /// Random fields per configuration in the operator-bound check.
    pub random_fields: usize,
    pub checks: Vec<CheckKind>,
    pub tolerances: Tolerances,
    /// Kernel tail budget used to size kernel-mass grids.
    pub tail_budget: f64,
    pub semigroup: Semigroup,
}

impl SuiteConfig {
    /// `n = 1, L = 12, N = 1025`, 2-d spot grid `L = 8, N = 257`, unweighted BUC,
    /// sector angle `0.4 pi`, 25% margins.
    pub fn reference() -> Self {
        let t = |re: f64| ComplexTime::real(re).expect("positive");
        let p = |r: f64, phi: f64| ComplexTime::polar(r, phi).expect("right half-plane");
        Self {
            grid: Grid::new(1, 12.0, 1025).expect("valid grid"),
            spot_grid: Some(Grid::new(2, 8.0, 257).expect("valid grid")),
            space: SpaceSpec::buc(0.0).expect("valid space"),
            alpha: 0.4 * PI,
            zetas: vec![t(0.25), t(1.0), t(4.0), p(1.0, FRAC_PI_4), p(1.0, -FRAC_PI_4), p(0.5, FRAC_PI_3)],
            seed: 20_240_601,
            components: 1,
            window: Window::default(),
            laplacian: LaplacianMethod::FiniteDifference,
            random_fields: 100,
            checks: CheckKind::ALL.to_vec(),
            tolerances: Tolerances::default(),
            tail_budget: 1e-10,
            semigroup: Semigroup::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sector_angle(self.alpha)?;
        if let Some(z) = self.zetas.iter().find(|z| !z.is_zero() && !z.is_real() && !z.in_sector(self.alpha)) {
            return Err(Error::OutsideSector { arg: z.arg(), alpha: self.alpha });
        }
        if self.zetas.iter().any(|z| z.is_zero()) {
            return Err(invalid("suite times must be nonzero"));
        }
        if self.components == 0 {
            return Err(invalid("fields need at least one component"));
        }
        if self.grid.points() < 5 {
            return Err(invalid("reference grid needs at least 5 points per axis"));
        }
        if !(self.tail_budget > 0.0) {
            return Err(invalid("tail budget must be positive"));
        }
        Ok(())
    }

    fn norm_with(&self, k: f64) -> Result<WindowedNorm> {
        Ok(WindowedNorm::new(SpaceSpec::new(crate::weights::Weight::new(k)?, self.space.kind())?, self.window))
    }

    fn context(&self, method: Method, k: f64) -> Result<ResidualContext> {
        let mut ctx = ResidualContext::new(method, self.laplacian, self.norm_with(k)?);
        ctx.semigroup = self.semigroup;
        Ok(ctx)
    }
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: String,
    /// The identity the check certifies.
    pub anchor: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Free-form provenance, e.g. grid sizes and truncation budgets.
    pub metadata: Vec<(String, String)>,
}

impl CheckResult {
    fn new(check: String, anchor: &'static str, residual: f64, tolerance: f64) -> Self {
        let passed = residual.is_finite() && residual >= 0.0 && residual <= tolerance;
        Self { check, anchor, residual, tolerance, passed, metadata: Vec::new() }
    }

    fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    fn crashed(kind: CheckKind, err: &Error) -> Self {
        CheckResult::new(kind.name().to_string(), anchor_of(kind), f64::INFINITY, 0.0).with("error", err)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub results: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    /// `check,anchor,residual,tolerance,pass` with shortest round-trip floats.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "anchor", "residual", "tolerance", "pass"])?;
        for r in &self.results {
            w.write_record([
                r.check.as_str(),
                r.anchor,
                &format!("{:e}", r.residual),
                &format!("{:e}", r.tolerance),
                if r.passed { "true" } else { "false" },
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.results.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
        for r in &self.results {
            let _ = write!(
                out,
                "[{}] {:<width$}  residual {:>10.3e}  tol {:>9.2e}  ({})",
                if r.passed { "PASS" } else { "FAIL" },
                r.check,
                r.residual,
                r.tolerance,
                r.anchor,
            );
            if !r.metadata.is_empty() {
                let meta: Vec<String> = r.metadata.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = write!(out, "  [{}]", meta.join(", "));
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} passed, {} failed", self.results.len(), self.results.len() - failed, failed);
        out
    }
}

fn anchor_of(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::Weights => "1 <= w(x+y) <= w(x)w(y); w(y) <= w(x-y)w(x); |w(x+y)/w(x)-1| <= w(y)(w(y)-1)",
        CheckKind::KernelMass => "int chi_z dx = 1 for Re z > 0",
        CheckKind::Fourier => "hat chi_z(xi) = exp(-z |xi|^2)",
        CheckKind::ClosedForm => "G(t) e^{-|x|^2} = (1+4t)^{-n/2} e^{-|x|^2/(1+4t)}; chi_s * chi_t = chi_{s+t}",
        CheckKind::SemigroupLaw => "G(z1+z2) = G(z1) G(z2)",
        CheckKind::PathEquivalence => "chi_z * f = F^{-1}[exp(-z|xi|^2) F f]",
        CheckKind::Continuity => "||chi_z * f - f||_wX -> 0 as z -> 0 in |arg z| < alpha",
        CheckKind::Holomorphy => "dG/dz = chi'_z * f; d/d(conj z) G(z) f = 0; contour integral of G(z) f = 0",
        CheckKind::Generator => "d/dt G(t)f = Delta G(t)f = G(t) Delta f = chi'_t * f",
        CheckKind::Transposition => "(Delta F)(phi) = F(Delta phi); (G(h)f - f)/h -> Delta f weakly",
        CheckKind::Mild => "Delta int_0^t G(s)f ds = G(t)f - f",
        CheckKind::OperatorBound => "||g * f||_wX <= ||w g||_L1 ||f||_wX",
        CheckKind::Classical => "du/dt = Delta u on (0, inf) x R^n",
        CheckKind::Spot2d => "2-d: G(z1+z2) = G(z1) G(z2); quadrature = spectral",
    }
}

/// Runs every enabled check. A check that errors is reported as a failure and the
/// suite carries on; rows come out in registration order.
pub fn run_suite(cfg: &SuiteConfig) -> VerificationReport {
    if let Err(e) = cfg.validate() {
        return VerificationReport {
            results: vec![CheckResult::new("config".into(), "valid suite configuration", f64::INFINITY, 0.0)
                .with("error", e)],
        };
    }
    let groups: Vec<Vec<CheckResult>> = cfg
        .checks
        .par_iter()
        .map(|&kind| run_check(cfg, kind).unwrap_or_else(|e| vec![CheckResult::crashed(kind, &e)]))
        .collect();
    VerificationReport { results: groups.into_iter().flatten().collect() }
}

pub fn run_check(cfg: &SuiteConfig, kind: CheckKind) -> Result<Vec<CheckResult>> {
    match kind {
        CheckKind::Weights => check_weights(cfg),
        CheckKind::KernelMass => check_kernel_mass(cfg),
        CheckKind::Fourier => check_fourier(cfg),
        CheckKind::ClosedForm => check_closed_form(cfg),
        CheckKind::SemigroupLaw => check_semigroup_law(cfg),
        CheckKind::PathEquivalence => check_path_equivalence(cfg),
        CheckKind::Continuity => check_continuity(cfg),
        CheckKind::Holomorphy => check_holomorphy(cfg),
        CheckKind::Generator => check_generator(cfg),
        CheckKind::Transposition => check_transposition(cfg),
        CheckKind::Mild => check_mild(cfg),
        CheckKind::OperatorBound => check_operator_bound(cfg),
        CheckKind::Classical => check_classical(cfg),
        CheckKind::Spot2d => check_spot_2d(cfg),
    }
}

/// Compact label for a complex time, e.g. `0.3536+0.3536i`.
fn short(z: ComplexTime) -> String {
    let fmt = |x: f64| {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    };
    let v = z.value();
    if v.im == 0.0 {
        fmt(v.re)
    } else {
        format!("{}{}{}i", fmt(v.re), if v.im < 0.0 { '-' } else { '+' }, fmt(v.im.abs()))
    }
}

fn row(kind: CheckKind, label: String, residual: f64, tolerance: f64) -> CheckResult {
    CheckResult::new(format!("{}[{label}]", kind.name()), anchor_of(kind), residual, tolerance)
}

/// Distance of an observed refinement ratio from its nominal value.
fn ratio_row(kind: CheckKind, label: String, ratio: f64, nominal: f64, tolerance: f64) -> CheckResult {
    row(kind, label, (ratio - nominal).abs(), tolerance).with("ratio", format!("{ratio:.4}"))
}

const WEIGHT_SWEEP: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.7];

fn check_weights(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let dim = cfg.grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for k in WEIGHT_SWEEP {
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-20.0..20.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-20.0..20.0)).collect();
            let s = weight_inequality_check(k, &x, &y)?;
            let scale = 1.0 + s.submultiplicative.abs().max(s.ratio.abs());
            worst = worst.max(-s.min() / scale);
        }
        rows.push(row(CheckKind::Weights, format!("k={k}"), worst.max(0.0), cfg.tolerances.weights));
    }
    Ok(rows)
}

fn check_kernel_mass(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut grids = vec![cfg.grid];
    grids.extend(cfg.spot_grid);
    let mut rows = Vec::new();
    for base in grids {
        for &z in &cfg.zetas {
            let g = grid_for_kernel(z, cfg.alpha, base.dim(), base.spacing(), base.half_extent(), cfg.tail_budget)?;
            let err = (kernel_mass(z, &g)? - 1.0).norm();
            let tol = if z.is_real() { cfg.tolerances.kernel_mass_real } else { cfg.tolerances.kernel_mass_complex };
            rows.push(
                row(CheckKind::KernelMass, format!("n={};zeta={}", base.dim(), short(z)), err, tol)
                    .with("L", format!("{:.3}", g.half_extent()))
                    .with("N", g.points())
                    .with("tail_budget", cfg.tail_budget),
            );
        }
    }
    Ok(rows)
}

fn check_fourier(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let axis = angular_frequencies(&g);
    let cutoff = axis.iter().fold(0.0_f64, |a, v| a.max(v.abs())) / 2.0;
    let mut rows = Vec::new();
    for z in [ComplexTime::real(1.0)?, ComplexTime::from_parts(1.0, 1.0)?] {
        let chi = sample_scalar(g, |x| kernel_eval(z, x).unwrap_or_default())?;
        let hat = continuous_transform(&chi);
        let mut multi = vec![0; g.dim()];
        let mut worst: f64 = 0.0;
        for (p, v) in hat.iter().enumerate() {
            g.unravel(p, &mut multi);
            if multi.iter().any(|&k| axis[k].abs() > cutoff) {
                continue;
            }
            let xi2: f64 = multi.iter().map(|&k| axis[k] * axis[k]).sum();
            worst = worst.max((v - cfg.semigroup.symbol(z, xi2)).norm());
        }
        rows.push(row(CheckKind::Fourier, format!("zeta={}", short(z)), worst, cfg.tolerances.fourier).with("xi_max", format!("{cutoff:.3}")));
    }
    Ok(rows)
}

fn interior_max(a: &Field, b: &Field, window: &Window) -> f64 {
    window
        .indices(a.grid())
        .into_iter()
        .map(|p| a.at(p).iter().zip(b.at(p)).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn check_closed_form(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let n = g.dim() as f64;
    let f = FieldRule::Gaussian.sample(g, cfg.components)?;
    let mut rows = Vec::new();
    for t in [0.1, 1.0, 5.0] {
        let zt = ComplexTime::real(t)?;
        let method = Method::default_for(zt);
        let applied = cfg.semigroup.apply_traced(zt, &f, method)?;
        let want = crate::grid::sample(g, cfg.components, |x, out| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let v = (1.0 + 4.0 * t).powf(-n / 2.0) * (-r2 / (1.0 + 4.0 * t)).exp();
            out.iter_mut().for_each(|o| *o = Complex64::new(v, 0.0));
        })?;
        rows.push(
            row(CheckKind::ClosedForm, format!("gaussian;t={t}"), interior_max(&applied.field, &want, &cfg.window), cfg.tolerances.closed_form)
                .with("method", method)
                .with("tail_mass", format!("{:.1e}", applied.tail_mass)),
        );
    }
    let (s, t) = (ComplexTime::real(0.5)?, ComplexTime::real(0.5)?);
    let chi_s = sample_scalar(g, |x| kernel_eval(s, x).unwrap_or_default())?;
    let chi_st = sample_scalar(g, |x| kernel_eval(s.plus(t), x).unwrap_or_default())?;
    let method = Method::default_for(t);
    let conv = cfg.semigroup.apply(t, &chi_s, method)?;
    rows.push(
        row(CheckKind::ClosedForm, "kernel;s=0.5;t=0.5".into(), interior_max(&conv, &chi_st, &cfg.window), cfg.tolerances.closed_form)
            .with("method", method),
    );
    Ok(rows)
}

fn law_pairs() -> Result<Vec<(ComplexTime, ComplexTime)>> {
    Ok(vec![
        (ComplexTime::real(0.3)?, ComplexTime::real(0.7)?),
        (ComplexTime::polar(0.5, FRAC_PI_4)?, ComplexTime::polar(0.5, -FRAC_PI_4)?),
        (ComplexTime::polar(0.2, FRAC_PI_6)?, ComplexTime::real(0.5)?),
    ])
}

fn check_semigroup_law(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let fields = [
        ("gaussian".to_string(), FieldRule::Gaussian.sample(g, cfg.components)?),
        (format!("bumps:{}", cfg.seed), FieldRule::Bumps(cfg.seed).sample(g, cfg.components)?),
    ];
    let mut rows = Vec::new();
    for (z1, z2) in law_pairs()? {
        for (name, f) in &fields {
            for k in [0.0, 1.0, 2.0] {
                let r = semigroup_law_residual(z1, z2, f, &cfg.norm_with(k)?, &cfg.semigroup, None)?;
                rows.push(
                    row(CheckKind::SemigroupLaw, format!("z1={};z2={};{name};k={k}", short(z1), short(z2)), r.relative, cfg.tolerances.semigroup_law)
                        .with("absolute", format!("{:.3e}", r.absolute)),
                );
            }
        }
    }
    Ok(rows)
}

fn path_rows(cfg: &SuiteConfig, g: Grid, zetas: &[ComplexTime], rules: &[FieldRule], dim_label: &str, kind: CheckKind) -> Result<Vec<CheckResult>> {
    let norm = cfg.norm_with(cfg.space.weight().exponent())?;
    let mut rows = Vec::new();
    for rule in rules {
        let f = rule.sample(g, cfg.components)?;
        for &z in zetas {
            let q = cfg.semigroup.apply(z, &f, Method::Quadrature)?;
            let s = cfg.semigroup.apply(z, &f, Method::Spectral)?;
            let rel = norm.relative_distance(&s, &q, &q)?;
            rows.push(row(kind, format!("{dim_label}{rule};zeta={}", short(z)), rel, cfg.tolerances.path_equivalence));
        }
    }
    Ok(rows)
}

fn check_path_equivalence(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let rules = [FieldRule::Gaussian, FieldRule::Bumps(cfg.seed), FieldRule::Kernel(0.5)];
    let mut zetas = cfg.zetas.clone();
    zetas.push(ComplexTime::real(0.1)?);
    path_rows(cfg, cfg.grid, &zetas, &rules, "", CheckKind::PathEquivalence)
}

/// Radii `2^{-1}, ..., 2^{-10}`.
pub fn continuity_radii() -> Vec<f64> {
    (1..=10).map(|j| 0.5f64.powi(j)).collect()
}

fn check_continuity(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let rays = [-FRAC_PI_4, 0.0, FRAC_PI_4];
    let radii = continuity_radii();
    let mut rows = Vec::new();
    for seed in [cfg.seed, cfg.seed + 1] {
        let rule = FieldRule::WideBumps(seed);
        let f = rule.sample(g, cfg.components)?;
        for k in [0.0, 2.0] {
            let table = continuity_scan(&f, &cfg.norm_with(k)?, cfg.alpha, &rays, &radii, &cfg.semigroup)?;
            for ray in rays {
                let series: Vec<f64> = table.iter().filter(|r| r.ray == ray).map(|r| r.residual).collect();
                let increase = series.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                let last = *series.last().expect("radii are nonempty");
                let label = format!("{rule};k={k};ray={ray:.4}");
                rows.push(row(CheckKind::Continuity, format!("monotone;{label}"), increase, cfg.tolerances.continuity_monotone));
                rows.push(row(CheckKind::Continuity, format!("final;{label}"), last, cfg.tolerances.continuity_final).with("radius", radii[radii.len() - 1]));
            }
        }
    }
    Ok(rows)
}

fn check_holomorphy(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let f = FieldRule::Gaussian.sample(cfg.grid, cfg.components)?;
    let norm = cfg.norm_with(cfg.space.weight().exponent())?;
    let one = ComplexTime::real(1.0)?;
    let coarse = holomorphy_residuals(&f, one, 1e-2, &norm, &cfg.semigroup)?;
    let fine = holomorphy_residuals(&f, one, 5e-3, &norm, &cfg.semigroup)?;
    let tol = cfg.tolerances.holomorphy_ratio;
    let contour = contour_residual(&f, one, 0.25, 64, &norm, &cfg.semigroup)?;
    Ok(vec![
        ratio_row(CheckKind::Holomorphy, "derivative_match;h=1e-2/5e-3".into(), coarse.derivative_match / fine.derivative_match, 4.0, tol)
            .with("coarse", format!("{:.3e}", coarse.derivative_match)),
        ratio_row(CheckKind::Holomorphy, "cauchy_riemann;h=1e-2/5e-3".into(), coarse.cauchy_riemann / fine.cauchy_riemann, 4.0, tol)
            .with("coarse", format!("{:.3e}", coarse.cauchy_riemann)),
        row(CheckKind::Holomorphy, "contour;center=1;radius=0.25;m=64".into(), contour, cfg.tolerances.contour),
    ])
}

fn check_generator(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let f = FieldRule::Gaussian.sample(cfg.grid, cfg.components)?;
    let method = Method::Spectral;
    let mut rows = Vec::new();
    for k in [0.0, 1.0] {
        let ctx = cfg.context(method, k)?;
        let r = generator_residuals(&f, 0.5, 1e-3, &ctx)?;
        for (name, v) in [("r1", r.r1), ("r2", r.r2), ("r3", r.r3)] {
            rows.push(row(CheckKind::Generator, format!("{name};t=0.5;dt=1e-3;k={k}"), v, cfg.tolerances.generator).with("laplacian", cfg.laplacian));
        }
    }
    let ctx = cfg.context(method, cfg.space.weight().exponent())?;
    let steps = [1e-2, 5e-3, 2.5e-3];
    let errs = steps.iter().map(|&h| difference_quotient_residual(&f, h, &ctx)).collect::<Result<Vec<_>>>()?;
    for (w, hs) in errs.windows(2).zip(steps.windows(2)) {
        rows.push(ratio_row(CheckKind::Generator, format!("difference_quotient;h={:e}/{:e}", hs[0], hs[1]), w[0] / w[1], 2.0, cfg.tolerances.difference_quotient_ratio));
    }
    Ok(rows)
}

fn check_transposition(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let dim = g.dim();
    let border = 2;
    let half = g.half_extent();
    let phi = TestFunction::smooth_bump(g, &vec![0.1 * half; dim], 0.4 * half, border)?;
    let carrier = TestFunction::smooth_bump(g, &vec![-0.05 * half; dim], 0.5 * half, border)?;
    let f = FieldRule::Bumps(cfg.seed).sample(g, cfg.components)?;
    let values = f
        .values()
        .chunks(cfg.components)
        .zip(carrier.field().values())
        .flat_map(|(v, c)| v.iter().map(move |x| x * c))
        .collect();
    let supported = Field::from_values(g, cfg.components, values)?;
    let mut rows = vec![row(
        CheckKind::Transposition,
        format!("laplacian={}", cfg.laplacian),
        transposition_residual(&supported, &phi, cfg.laplacian)?,
        cfg.tolerances.transposition,
    )];
    // Weak generator limit: ((G(h) f - f)/h)(phi) -> f(Delta phi), first order in h.
    let ctx = cfg.context(Method::Spectral, 0.0)?;
    let lap_phi = crate::generator::discrete_laplacian(phi.field(), cfg.laplacian)?;
    let target = pair_plain(&f, &lap_phi)?;
    let gap = |h: f64| -> Result<f64> {
        let got = paired_difference_quotient(&f, &phi, h, &ctx)?;
        Ok(got.iter().zip(&target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    };
    let (a, b) = (gap(1e-2)?, gap(5e-3)?);
    rows.push(ratio_row(CheckKind::Transposition, "weak_generator;h=1e-2/5e-3".into(), a / b, 2.0, cfg.tolerances.pairing_ratio));
    Ok(rows)
}

/// `∫ f g dx` for a scalar `g` without the interior-support requirement.
fn pair_plain(f: &Field, g: &Field) -> Result<Vec<Complex64>> {
    let m = f.components();
    let dv = f.grid().cell_volume();
    let mut acc = vec![Complex64::new(0.0, 0.0); m];
    for (p, &w) in g.values().iter().enumerate() {
        for (a, &v) in acc.iter_mut().zip(f.at(p)) {
            *a += v * w;
        }
    }
    Ok(acc.into_iter().map(|a| a * dv).collect())
}

fn coarsened(g: &Grid) -> Result<Grid> {
    Grid::new(g.dim(), g.half_extent(), (g.points() - 1) / 2 + 1)
}

fn refined(g: &Grid) -> Result<Grid> {
    Grid::new(g.dim(), g.half_extent(), 2 * (g.points() - 1) + 1)
}

fn check_mild(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let k = cfg.space.weight().exponent();
    let ctx = cfg.context(Method::Spectral, k)?;
    let steps = 256;
    let fine_grid = cfg.grid;
    let coarse_grid = coarsened(&fine_grid)?;
    let fine = mild_identity_residual(&FieldRule::Gaussian.sample(fine_grid, cfg.components)?, 1.0, steps, &ctx)?;
    let coarse = mild_identity_residual(&FieldRule::Gaussian.sample(coarse_grid, cfg.components)?, 1.0, steps / 2, &ctx)?;
    Ok(vec![
        row(CheckKind::Mild, format!("gaussian;t=1;steps={steps}"), fine, cfg.tolerances.mild).with("laplacian", cfg.laplacian),
        row(CheckKind::Mild, format!("reduction;steps={}/{steps};N={}/{}", steps / 2, coarse_grid.points(), fine_grid.points()), fine / coarse, cfg.tolerances.mild_reduction)
            .with("coarse", format!("{coarse:.3e}")),
    ])
}

fn check_operator_bound(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let fields = random_fields(g, cfg.components, cfg.seed, cfg.random_fields)?;
    let mut rows = Vec::new();
    for z in [ComplexTime::real(1.0)?, ComplexTime::polar(1.0, FRAC_PI_4)?] {
        let evolved = fields.par_iter().map(|f| cfg.semigroup.apply(z, f, Method::Quadrature)).collect::<Result<Vec<_>>>()?;
        for k in [0.0, 1.0, 2.0] {
            let space = cfg.space.with_weight(crate::weights::Weight::new(k)?);
            let bound = operator_bound(z, k, &g)?;
            let mut excess: f64 = 0.0;
            for (f, gf) in fields.iter().zip(&evolved) {
                let lhs = space.norm(gf)?;
                let rhs = bound * space.norm(f)?;
                excess = excess.max((lhs - rhs - 1e-10) / rhs.max(f64::MIN_POSITIVE));
            }
            rows.push(
                row(CheckKind::OperatorBound, format!("zeta={};k={k};fields={}", short(z), fields.len()), excess.max(0.0), cfg.tolerances.operator_bound)
                    .with("M_k", format!("{bound:.6}")),
            );
        }
    }
    Ok(rows)
}

fn check_classical(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let run = |g: Grid, dt: f64| -> Result<f64> {
        let f = FieldRule::Gaussian.sample(g, cfg.components)?;
        let count = (1.0 / dt).round() as usize;
        let times: Vec<f64> = (0..=count).map(|i| 0.5 + i as f64 * dt).collect();
        let traj = cfg.semigroup.trajectory(&f, &times, Method::Spectral)?;
        classical_residual(&traj, cfg.laplacian, &cfg.window)
    };
    let coarse = run(cfg.grid, 1e-2)?;
    let fine_grid = refined(&cfg.grid)?;
    let fine = run(fine_grid, 5e-3)?;
    Ok(vec![row(CheckKind::Classical, format!("reduction;dt=1e-2/5e-3;N={}/{}", cfg.grid.points(), fine_grid.points()), fine / coarse, cfg.tolerances.classical_reduction)
        .with("coarse", format!("{coarse:.3e}"))
        .with("fine", format!("{fine:.3e}"))])
}

fn check_spot_2d(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let Some(g) = cfg.spot_grid else { return Ok(Vec::new()) };
    let zetas = [ComplexTime::real(1.0)?, ComplexTime::polar(0.5, FRAC_PI_4)?];
    let mut rows = path_rows(cfg, g, &zetas, &[FieldRule::Gaussian], "n=2;", CheckKind::Spot2d)?;
    let f = FieldRule::Gaussian.sample(g, cfg.components)?;
    let norm = WindowedNorm::new(cfg.space.with_weight(crate::weights::Weight::new(1.0)?), cfg.window);
    for (z1, z2) in law_pairs()? {
        let r = semigroup_law_residual(z1, z2, &f, &norm, &cfg.semigroup, None)?;
        rows.push(row(CheckKind::Spot2d, format!("n=2;law;z1={};z2={};k=1", short(z1), short(z2)), r.relative, cfg.tolerances.semigroup_law));
    }
    Ok(rows)
}

/// Continuity table for the CLI: one row per (ray, radius).
pub fn continuity_table(cfg: &SuiteConfig, f: &Field) -> Result<Vec<ScanRow>> {
    let rays = [-FRAC_PI_4, 0.0, FRAC_PI_4];
    let norm = cfg.norm_with(cfg.space.weight().exponent())?;
    continuity_scan(f, &norm, cfg.alpha, &rays, &continuity_radii(), &cfg.semigroup)
}

/// `(dt, r1, r2, r3)` for halving time steps at `t = 0.5`.
pub fn generator_table(cfg: &SuiteConfig, f: &Field) -> Result<Vec<(f64, f64, f64, f64)>> {
    let ctx = cfg.context(Method::Spectral, cfg.space.weight().exponent())?;
    (0..6)
        .map(|j| {
            let dt = 0.04 / 2f64.powi(j);
            let r = generator_residuals(f, 0.5, dt, &ctx)?;
            Ok((dt, r.r1, r.r2, r.r3))
        })
        .collect()
}

/// `(steps, residual)` of the mild identity at `t = 1`.
pub fn mild_table(cfg: &SuiteConfig, f: &Field) -> Result<Vec<(usize, f64)>> {
    let ctx = cfg.context(Method::Spectral, cfg.space.weight().exponent())?;
    [16usize, 32, 64, 128, 256, 512]
        .iter()
        .map(|&steps| Ok((steps, mild_identity_residual(f, 1.0, steps, &ctx)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        let mut cfg = SuiteConfig::reference();
        cfg.grid = Grid::new(1, 8.0, 257).unwrap();
        cfg.spot_grid = Some(Grid::new(2, 6.0, 65).unwrap());
        cfg.random_fields = 10;
        cfg
    }

    fn gaussian(g: Grid) -> Field {
        FieldRule::Gaussian.sample(g, 1).unwrap()
    }

    #[test]
    fn report_is_deterministic_and_ordered() {
        let mut cfg = small();
        cfg.checks = vec![CheckKind::Weights, CheckKind::SemigroupLaw, CheckKind::OperatorBound, CheckKind::Spot2d];
        let a = run_suite(&cfg);
        let b = run_suite(&cfg);
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.to_text(), b.to_text());
        let groups: Vec<&str> = a.results.iter().map(|r| r.check.split('[').next().unwrap()).collect();
        let mut expected = groups.clone();
        expected.dedup();
        assert_eq!(expected, ["weights", "semigroup_law", "operator_bound", "spot_2d"]);
        assert!(a.all_passed(), "{}", a.to_text());
    }

    #[test]
    fn empty_check_list_gives_empty_report() {
        let mut cfg = small();
        cfg.checks.clear();
        let r = run_suite(&cfg);
        assert!(r.results.is_empty() && r.all_passed());
        assert_eq!(r.to_csv().unwrap(), "check,anchor,residual,tolerance,pass\n");
    }

    #[test]
    fn failing_checks_become_rows() {
        let mut cfg = small();
        cfg.grid = Grid::new(1, 8.0, 4).unwrap();
        let r = run_suite(&cfg);
        assert_eq!(r.results.len(), 1);
        assert!(!r.all_passed());
        assert!(r.to_csv().unwrap().contains("inf,0e0,false"));

        let mut cfg = small();
        cfg.checks = vec![CheckKind::Transposition];
        cfg.grid = Grid::new(1, 8.0, 9).unwrap();
        let r = run_suite(&cfg);
        assert!(r.failures().count() >= 1);
    }

    #[test]
    fn wrong_symbol_is_detected() {
        let mut cfg = small();
        cfg.checks = vec![CheckKind::SemigroupLaw, CheckKind::PathEquivalence];
        cfg.semigroup.symbol_time_scale = 2.0;
        assert!(run_suite(&cfg).failures().count() >= 2);
    }

    #[test]
    fn law_residual_is_small_for_every_method_choice() {
        let f = gaussian(Grid::new(1, 8.0, 257).unwrap());
        let norm = WindowedNorm::new(SpaceSpec::buc(1.0).unwrap(), Window::default());
        let (z1, z2) = (ComplexTime::polar(0.4, 0.5).unwrap(), ComplexTime::real(0.3).unwrap());
        for method in [None, Some(Method::Quadrature), Some(Method::Spectral)] {
            let r = semigroup_law_residual(z1, z2, &f, &norm, &Semigroup::default(), method).unwrap();
            assert!(r.relative < 1e-10, "{method:?}: {r:?}");
        }
    }

    #[test]
    fn continuity_scan_rejects_bad_inputs() {
        let f = gaussian(Grid::new(1, 8.0, 129).unwrap());
        let norm = WindowedNorm::new(SpaceSpec::buc(0.0).unwrap(), Window::default());
        let engine = Semigroup::default();
        assert!(matches!(
            continuity_scan(&f, &norm, 0.5, &[0.6], &[0.5], &engine),
            Err(Error::OutsideSector { .. })
        ));
        assert!(continuity_scan(&f, &norm, 0.5, &[0.0], &[0.25, 0.5], &engine).is_err());
        assert!(continuity_scan(&f, &norm, 0.5, &[0.0], &[0.5, 0.0], &engine).is_err());
        assert!(continuity_scan(&f, &norm, 2.0, &[0.0], &[0.5], &engine).is_err());
        let rows = continuity_scan(&f, &norm, 0.5, &[-0.2, 0.2], &[0.5, 0.1], &engine).unwrap();
        assert_eq!(rows.iter().map(|r| (r.ray, r.radius)).collect::<Vec<_>>(), [(-0.2, 0.5), (-0.2, 0.1), (0.2, 0.5), (0.2, 0.1)]);
    }

    #[test]
    fn holomorphy_and_contour_domains() {
        let f = gaussian(Grid::new(1, 8.0, 129).unwrap());
        let norm = WindowedNorm::new(SpaceSpec::buc(0.0).unwrap(), Window::default());
        let engine = Semigroup::default();
        assert!(holomorphy_residuals(&f, ComplexTime::real(0.01).unwrap(), 0.02, &norm, &engine).is_err());
        assert!(holomorphy_residuals(&f, ComplexTime::real(1.0).unwrap(), 0.0, &norm, &engine).is_err());
        assert!(contour_residual(&f, ComplexTime::real(0.2).unwrap(), 0.25, 64, &norm, &engine).is_err());
        assert!(contour_residual(&f, ComplexTime::real(1.0).unwrap(), 0.25, 4, &norm, &engine).is_err());
    }

    #[test]
    fn tolerances_are_addressable_by_name() {
        let mut t = Tolerances::default();
        for name in Tolerances::NAMES {
            t.set(name, 0.125).unwrap();
            assert_eq!(t.get(name), Some(0.125));
        }
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("mild", -1.0).is_err());
        assert_eq!(t.get("nope"), None);
    }

    #[test]
    fn check_names_round_trip() {
        for kind in CheckKind::ALL {
            assert_eq!(kind.name().parse::<CheckKind>().unwrap(), kind);
        }
        assert!("everything".parse::<CheckKind>().is_err());
    }
}
