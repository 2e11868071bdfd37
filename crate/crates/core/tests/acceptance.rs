//! Acceptance criteria on the reference configuration. Runs without the libtest
//! harness so every criterion prints exactly one PASS/FAIL line.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use heat_semigroup::config::RunConfig;
use heat_semigroup::fields::{random_fields, FieldRule};
use heat_semigroup::generator::{
    classical_residual, difference_quotient_residual, generator_residuals, mild_identity_residual, ResidualContext,
};
use heat_semigroup::grid::{sample, sample_scalar};
use heat_semigroup::kernel::{grid_for_kernel, kernel_eval, kernel_mass};
use heat_semigroup::semigroup::operator_bound;
use heat_semigroup::spectral::{angular_frequencies, continuous_transform};
use heat_semigroup::verify::{
    continuity_radii, continuity_scan, contour_residual, holomorphy_residuals, run_suite, semigroup_law_residual,
};
use heat_semigroup::{ComplexTime, Field, Grid, LaplacianMethod, Method, Semigroup, SpaceSpec, SuiteConfig, Window, WindowedNorm};
use num_complex::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&SuiteConfig) -> Outcome);

fn reference() -> SuiteConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.toml");
    RunConfig::load(&path).and_then(|c| c.suite()).expect("reference config loads")
}

fn z(re: f64, im: f64) -> ComplexTime {
    ComplexTime::from_parts(re, im).unwrap()
}

fn polar(r: f64, phi: f64) -> ComplexTime {
    ComplexTime::polar(r, phi).unwrap()
}

fn norm(k: f64, window: Window) -> WindowedNorm {
    WindowedNorm::new(SpaceSpec::buc(k).unwrap(), window)
}

fn gate(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kernel_mass_criterion(cfg: &SuiteConfig) -> Outcome {
    let real = [z(0.25, 0.0), z(1.0, 0.0), z(4.0, 0.0)];
    let complex = [polar(1.0, FRAC_PI_4), polar(1.0, -FRAC_PI_4), polar(0.5, FRAC_PI_3)];
    let spot = cfg.spot_grid.unwrap();
    let (mut worst_real, mut worst_complex) = (0.0_f64, 0.0_f64);
    for base in [cfg.grid, spot] {
        for zeta in real.iter().chain(&complex) {
            let g = grid_for_kernel(*zeta, cfg.alpha, base.dim(), base.spacing(), base.half_extent(), 1e-10).unwrap();
            let err = (kernel_mass(*zeta, &g).unwrap() - 1.0).norm();
            if zeta.is_real() {
                worst_real = worst_real.max(err);
            } else {
                worst_complex = worst_complex.max(err);
            }
        }
    }
    gate(
        worst_real <= 1e-8 && worst_complex <= 1e-6,
        format!("max |mass - 1|: real {worst_real:.2e} (tol 1e-8), complex {worst_complex:.2e} (tol 1e-6), n = 1, 2"),
    )
}

fn fourier_criterion(cfg: &SuiteConfig) -> Outcome {
    let g = cfg.grid;
    let axis = angular_frequencies(&g);
    let cutoff = axis.iter().fold(0.0_f64, |a, v| a.max(v.abs())) / 2.0;
    let mut worst = 0.0_f64;
    for zeta in [z(1.0, 0.0), z(1.0, 1.0)] {
        let chi = sample_scalar(g, |x| kernel_eval(zeta, x).unwrap()).unwrap();
        for (k, v) in continuous_transform(&chi).iter().enumerate() {
            let xi = axis[k];
            if xi.abs() <= cutoff {
                worst = worst.max((v - (-zeta.value() * xi * xi).exp()).norm());
            }
        }
    }
    gate(worst <= 1e-4, format!("max |DFT - exp(-z xi^2)| = {worst:.2e} on |xi| <= {cutoff:.1} (tol 1e-4)"))
}

fn semigroup_law_criterion(cfg: &SuiteConfig) -> Outcome {
    let pairs = [
        (z(0.3, 0.0), z(0.7, 0.0)),
        (polar(0.5, FRAC_PI_4), polar(0.5, -FRAC_PI_4)),
        (polar(0.2, FRAC_PI_6), z(0.5, 0.0)),
    ];
    let fields = [FieldRule::Gaussian, FieldRule::Bumps(cfg.seed), FieldRule::Bumps(cfg.seed + 1)];
    let engine = Semigroup::default();
    let mut worst = 0.0_f64;
    for rule in &fields {
        let f = rule.sample(cfg.grid, 1).unwrap();
        for (z1, z2) in pairs {
            for k in [0.0, 1.0, 2.0] {
                let r = semigroup_law_residual(z1, z2, &f, &norm(k, cfg.window), &engine, None).unwrap();
                worst = worst.max(r.relative);
            }
        }
    }
    gate(worst <= 1e-5, format!("max relative residual {worst:.2e} over 3 pairs x k in {{0,1,2}} x 3 fields (tol 1e-5)"))
}

fn closed_form_criterion(cfg: &SuiteConfig) -> Outcome {
    let g = cfg.grid;
    let interior = cfg.window.indices(&g);
    let gap = |a: &Field, b: &Field| interior.iter().map(|&p| (a.values()[p] - b.values()[p]).norm()).fold(0.0, f64::max);
    let f = FieldRule::Gaussian.sample(g, 1).unwrap();
    let mut worst = 0.0_f64;
    for t in [0.1, 1.0, 5.0] {
        let got = heat_semigroup::semigroup::apply(z(t, 0.0), &f, Method::Spectral).unwrap();
        let want = sample(g, 1, |x, out| {
            out[0] = Complex64::new((1.0 + 4.0 * t).powf(-0.5) * (-x[0] * x[0] / (1.0 + 4.0 * t)).exp(), 0.0)
        })
        .unwrap();
        worst = worst.max(gap(&got, &want));
    }
    let chi = |s: f64| sample_scalar(g, |x| kernel_eval(z(s, 0.0), x).unwrap()).unwrap();
    let conv = heat_semigroup::semigroup::apply(z(0.5, 0.0), &chi(0.5), Method::Quadrature).unwrap();
    let kernel_gap = gap(&conv, &chi(1.0));
    gate(
        worst <= 1e-6 && kernel_gap <= 1e-6,
        format!("Gaussian interior max {worst:.2e}, chi_0.5 * chi_0.5 vs chi_1 {kernel_gap:.2e} (tol 1e-6)"),
    )
}

fn continuity_criterion(cfg: &SuiteConfig) -> Outcome {
    let rays = [-FRAC_PI_4, 0.0, FRAC_PI_4];
    let radii = continuity_radii();
    let engine = Semigroup::default();
    let (mut worst_rise, mut worst_final) = (0.0_f64, 0.0_f64);
    for seed in [cfg.seed, cfg.seed + 1, cfg.seed + 2] {
        let f = FieldRule::WideBumps(seed).sample(cfg.grid, 1).unwrap();
        for k in [0.0, 2.0] {
            let rows = continuity_scan(&f, &norm(k, cfg.window), cfg.alpha, &rays, &radii, &engine).unwrap();
            for ray in rays {
                let series: Vec<f64> = rows.iter().filter(|r| r.ray == ray).map(|r| r.residual).collect();
                worst_rise = series.windows(2).map(|w| w[1] - w[0]).fold(worst_rise, f64::max);
                worst_final = worst_final.max(*series.last().unwrap());
            }
        }
    }
    gate(
        worst_rise <= 1e-9 && worst_final <= 1e-3,
        format!("largest increase {worst_rise:.2e} (slack 1e-9), residual at r = 2^-10 {worst_final:.2e} (tol 1e-3)"),
    )
}

fn holomorphy_criterion(cfg: &SuiteConfig) -> Outcome {
    let f = FieldRule::Gaussian.sample(cfg.grid, 1).unwrap();
    let engine = Semigroup::default();
    let nrm = norm(0.0, cfg.window);
    let one = z(1.0, 0.0);
    let a = holomorphy_residuals(&f, one, 1e-2, &nrm, &engine).unwrap();
    let b = holomorphy_residuals(&f, one, 5e-3, &nrm, &engine).unwrap();
    let dm = a.derivative_match / b.derivative_match;
    let cr = a.cauchy_riemann / b.cauchy_riemann;
    let contour = contour_residual(&f, one, 0.25, 64, &nrm, &engine).unwrap();
    let in_band = |r: f64| (3.5..=4.5).contains(&r);
    gate(
        in_band(dm) && in_band(cr) && contour <= 1e-8,
        format!("ratios derivative {dm:.3}, Cauchy-Riemann {cr:.3} (band [3.5, 4.5]); contour {contour:.2e} (tol 1e-8)"),
    )
}

fn generator_criterion(cfg: &SuiteConfig) -> Outcome {
    let f = FieldRule::Gaussian.sample(cfg.grid, 1).unwrap();
    let mut worst = 0.0_f64;
    for k in [0.0, 1.0] {
        let ctx = ResidualContext::new(Method::Spectral, LaplacianMethod::FiniteDifference, norm(k, cfg.window));
        worst = worst.max(generator_residuals(&f, 0.5, 1e-3, &ctx).unwrap().max());
    }
    let ctx = ResidualContext::new(Method::Spectral, LaplacianMethod::FiniteDifference, norm(0.0, cfg.window));
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&h| difference_quotient_residual(&f, h, &ctx).unwrap()).collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let first_order = ratios.iter().all(|r| (1.5..=2.5).contains(r));
    gate(
        worst <= 1e-4 && first_order,
        format!(
            "max(r1, r2, r3) = {worst:.2e} (tol 1e-4); difference-quotient ratios {:.3}, {:.3} (first order: [1.5, 2.5])",
            ratios[0], ratios[1]
        ),
    )
}

fn mild_criterion(cfg: &SuiteConfig) -> Outcome {
    let ctx = ResidualContext::new(Method::Spectral, LaplacianMethod::FiniteDifference, norm(0.0, cfg.window));
    let fine_grid = cfg.grid;
    let coarse_grid = Grid::new(1, fine_grid.half_extent(), (fine_grid.points() - 1) / 2 + 1).unwrap();
    let fine = mild_identity_residual(&FieldRule::Gaussian.sample(fine_grid, 1).unwrap(), 1.0, 256, &ctx).unwrap();
    let coarse = mild_identity_residual(&FieldRule::Gaussian.sample(coarse_grid, 1).unwrap(), 1.0, 128, &ctx).unwrap();
    let factor = coarse / fine;
    gate(
        fine <= 1e-4 && factor >= 2.0,
        format!("residual {fine:.2e} at 256 graded steps (tol 1e-4); refinement factor {factor:.2} (need >= 2)"),
    )
}

fn path_equivalence_criterion(cfg: &SuiteConfig) -> Outcome {
    let zetas = [z(0.1, 0.0), z(1.0, 0.0), z(4.0, 0.0), polar(1.0, FRAC_PI_4), polar(1.0, -FRAC_PI_4), polar(0.5, FRAC_PI_3)];
    let rules = [FieldRule::Gaussian, FieldRule::Bumps(cfg.seed), FieldRule::Kernel(0.5)];
    let mut worst = 0.0_f64;
    let mut check = |g: Grid, zs: &[ComplexTime]| {
        for rule in &rules {
            let f = rule.sample(g, 1).unwrap();
            for &zeta in zs {
                let q = heat_semigroup::semigroup::apply(zeta, &f, Method::Quadrature).unwrap();
                let s = heat_semigroup::semigroup::apply(zeta, &f, Method::Spectral).unwrap();
                worst = worst.max(norm(1.0, cfg.window).relative_distance(&s, &q, &q).unwrap());
            }
        }
    };
    check(cfg.grid, &zetas);
    check(cfg.spot_grid.unwrap(), &[z(1.0, 0.0), polar(0.5, FRAC_PI_4)]);
    gate(worst <= 1e-5, format!("max relative gap {worst:.2e} on the interior window, n = 1 and n = 2 (tol 1e-5)"))
}

fn operator_bound_criterion(cfg: &SuiteConfig) -> Outcome {
    let g = cfg.grid;
    let fields = random_fields(g, 1, cfg.seed, 100).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for zeta in [z(1.0, 0.0), polar(1.0, FRAC_PI_4)] {
        let evolved: Vec<Field> =
            fields.iter().map(|f| heat_semigroup::semigroup::apply(zeta, f, Method::Quadrature).unwrap()).collect();
        for k in [0.0, 1.0, 2.0] {
            let space = SpaceSpec::buc(k).unwrap();
            let m = operator_bound(zeta, k, &g).unwrap();
            for (f, gf) in fields.iter().zip(&evolved) {
                let lhs = space.norm(gf).unwrap();
                let rhs = m * space.norm(f).unwrap() * (1.0 + 1e-8) + 1e-10;
                worst = worst.max(lhs / rhs);
            }
        }
    }
    gate(worst <= 1.0, format!("max ||G f|| / (M_k ||f|| (1 + 1e-8) + 1e-10) = {worst:.6} over 600 cases (need <= 1)"))
}

fn classical_criterion(cfg: &SuiteConfig) -> Outcome {
    let run = |g: Grid, dt: f64| {
        let f = FieldRule::Gaussian.sample(g, 1).unwrap();
        let count = (1.0 / dt).round() as usize;
        let times: Vec<f64> = (0..=count).map(|i| 0.5 + i as f64 * dt).collect();
        let traj = heat_semigroup::semigroup::trajectory(&f, &times, Method::Spectral).unwrap();
        classical_residual(&traj, LaplacianMethod::FiniteDifference, &cfg.window).unwrap()
    };
    let coarse = run(cfg.grid, 1e-2);
    let fine = run(Grid::new(1, cfg.grid.half_extent(), 2 * (cfg.grid.points() - 1) + 1).unwrap(), 5e-3);
    let factor = coarse / fine;
    gate(factor >= 3.0, format!("residual {coarse:.2e} -> {fine:.2e}, factor {factor:.2} (need >= 3)"))
}

fn mutation_criterion(cfg: &SuiteConfig) -> Outcome {
    let mut broken = cfg.clone();
    broken.semigroup.symbol_time_scale = 2.0;
    let report = run_suite(&broken);
    let failing: Vec<String> = report.failures().map(|r| r.check.split('[').next().unwrap().to_string()).collect();
    let mut groups = failing.clone();
    groups.dedup();
    gate(
        failing.len() >= 2,
        format!("{} failing checks under exp(-2 z xi^2), in groups {groups:?}", failing.len()),
    )
}

fn main() -> ExitCode {
    let cfg = reference();
    assert_eq!(cfg.grid, Grid::new(1, 12.0, 1025).unwrap());
    assert!((cfg.alpha - 0.4 * PI).abs() < 1e-15);
    let criteria: [Criterion; 12] = [
        ("kernel mass", kernel_mass_criterion),
        ("Fourier symbol", fourier_criterion),
        ("semigroup law", semigroup_law_criterion),
        ("Gaussian closed form", closed_form_criterion),
        ("sector continuity", continuity_criterion),
        ("holomorphy", holomorphy_criterion),
        ("generator identities", generator_criterion),
        ("mild identity", mild_criterion),
        ("path equivalence", path_equivalence_criterion),
        ("operator bound", operator_bound_criterion),
        ("classical solution", classical_criterion),
        ("mutation sensitivity", mutation_criterion),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match run(&cfg) {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{:.1}s]", i + 1, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
