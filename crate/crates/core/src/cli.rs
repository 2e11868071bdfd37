//! Command-line front end. Exit status: 0 success, 1 failed checks, 2 usage,
//! configuration or input errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{EvolveTarget, RunConfig};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::io::{load_field, save_field, save_trajectory};
use crate::kernel::ComplexTime;
use crate::semigroup::Method;
use crate::verify::{continuity_table, generator_table, mild_table, run_suite};

#[derive(Debug, Parser)]
#[command(name = "heatsg", version, about = "Complex-time heat semigroup on weighted spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply the semigroup to an initial field at one complex time or along real times.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Complex time written `a+bi`.
        #[arg(long, conflicts_with = "times", allow_hyphen_values = true)]
        zeta: Option<String>,
        /// Comma-separated nonnegative real times.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Initial-field rule such as `gaussian` or `bumps:7`.
        #[arg(long)]
        field: Option<String>,
        /// CSV file with the initial field.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification suite and write the report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a convergence or scan table.
    Table {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        check: Option<TableArg>,
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Quadrature,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum TableArg {
    Continuity,
    Generator,
    Mild,
}

impl TableArg {
    fn name(self) -> &'static str {
        match self {
            TableArg::Continuity => "continuity",
            TableArg::Generator => "generator",
            TableArg::Mild => "mild",
        }
    }
}

enum Outcome {
    Done,
    ChecksFailed,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::ChecksFailed) => 1,
        Err(e) => {
            eprintln!("heatsg: {e}");
            2
        }
    }
}

fn prepare(config: &Path, out: &Path) -> Result<RunConfig> {
    let cfg = RunConfig::load(config)?;
    fs::create_dir_all(out)?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::Evolve { config, zeta, times, method, field, input, out } => {
            let mut cfg = prepare(&config, &out)?;
            if let Some(z) = zeta {
                let z: ComplexTime = z.parse()?;
                cfg.evolve.zeta = Some([z.value().re, z.value().im]);
                cfg.evolve.times = None;
            }
            if let Some(t) = times {
                cfg.evolve.times = Some(t);
                cfg.evolve.zeta = None;
            }
            if let Some(m) = method {
                cfg.evolve.method = Some(Method::from(m).to_string());
            }
            if let Some(rule) = field {
                cfg.evolve.field = Some(rule);
                cfg.evolve.input = None;
            }
            if input.is_some() {
                cfg.evolve.input = input;
            }
            cfg.suite()?;
            let f = initial_field(&cfg)?;
            let chosen = cfg.evolve_method()?;
            let pick = |z: ComplexTime| chosen.unwrap_or_else(|| Method::default_for(z));
            let engine = cfg.suite()?.semigroup;
            match cfg.evolve_target()? {
                EvolveTarget::Single(z) => save_field(&engine.apply(z, &f, pick(z))?, &out.join("field.csv"))?,
                EvolveTarget::Times(ts) => {
                    let method = chosen.unwrap_or(Method::Spectral);
                    save_trajectory(&engine.trajectory(&f, &ts, method)?, &out)?;
                }
            }
            cfg.save_effective(&out)?;
            Ok(Outcome::Done)
        }
        Command::Verify { config, seed, out } => {
            let mut cfg = prepare(&config, &out)?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let report = run_suite(&cfg.suite()?);
            fs::write(out.join("report.csv"), report.to_csv()?)?;
            let text = report.to_text();
            fs::write(out.join("report.txt"), &text)?;
            cfg.save_effective(&out)?;
            print!("{text}");
            Ok(if report.all_passed() { Outcome::Done } else { Outcome::ChecksFailed })
        }
        Command::Table { config, check, field, out } => {
            let mut cfg = prepare(&config, &out)?;
            if let Some(c) = check {
                cfg.table.check = Some(c.name().to_string());
            }
            if field.is_some() {
                cfg.table.field = field;
            }
            let which = match cfg.table.check.as_deref() {
                Some("continuity") => TableArg::Continuity,
                Some("generator") => TableArg::Generator,
                Some("mild") => TableArg::Mild,
                Some(other) => return Err(Error::InvalidConfig(format!("unknown table check {other:?}"))),
                None => return Err(Error::InvalidConfig("table needs --check or table.check".into())),
            };
            let suite = cfg.suite()?;
            let default_rule = if which == TableArg::Continuity { format!("wide_bumps:{}", suite.seed) } else { "gaussian".into() };
            let rule: crate::fields::FieldRule = cfg.table.field.clone().unwrap_or(default_rule).parse()?;
            let f = rule.sample(suite.grid, suite.components)?;
            let path = out.join(format!("{}.csv", which.name()));
            let mut w = csv::Writer::from_path(&path)?;
            match which {
                TableArg::Continuity => {
                    w.write_record(["field", "ray", "radius", "residual"])?;
                    for r in continuity_table(&suite, &f)? {
                        w.write_record([rule.to_string(), format!("{:e}", r.ray), format!("{:e}", r.radius), format!("{:e}", r.residual)])?;
                    }
                }
                TableArg::Generator => {
                    w.write_record(["dt", "r1", "r2", "r3"])?;
                    for (dt, r1, r2, r3) in generator_table(&suite, &f)? {
                        w.write_record([dt, r1, r2, r3].map(|v| format!("{v:e}")))?;
                    }
                }
                TableArg::Mild => {
                    w.write_record(["steps", "residual"])?;
                    for (steps, r) in mild_table(&suite, &f)? {
                        w.write_record([steps.to_string(), format!("{r:e}")])?;
                    }
                }
            }
            w.flush()?;
            cfg.save_effective(&out)?;
            Ok(Outcome::Done)
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::Spectral => Method::Spectral,
        }
    }
}

fn initial_field(cfg: &RunConfig) -> Result<Field> {
    if let Some(path) = &cfg.evolve.input {
        let f = load_field(path)?;
        let grid = cfg.grid()?;
        if *f.grid() != grid {
            return Err(Error::GridMismatch(format!(
                "{} holds a field on n={}, L={}, N={} but the config grid is n={}, L={}, N={}",
                path.display(),
                f.grid().dim(),
                f.grid().half_extent(),
                f.grid().points(),
                grid.dim(),
                grid.half_extent(),
                grid.points()
            )));
        }
        return Ok(f);
    }
    cfg.evolve_field_rule()?.sample(cfg.grid()?, cfg.components())
}
