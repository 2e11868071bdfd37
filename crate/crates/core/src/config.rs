//! TOML run configuration shared by the `evolve`, `verify` and `table` subcommands.
//!
//! ```toml
//! seed = 20240601
//!
//! [grid]
//! n = 1
//! L = 12.0
//! N = 1025
//!
//! [space]
//! k = 0.0
//! kind = "BUC"      # BUC, C0 or Lp (with p)
//!
//! [sector]
//! alpha = 1.2566370614359172
//!
//! [tol]
//! semigroup_law = 1e-5
//! ```
//!
//! Every table other than `[grid]` is optional. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::FieldRule;
use crate::generator::LaplacianMethod;
use crate::grid::{Grid, Window};
use crate::kernel::ComplexTime;
use crate::semigroup::{Method, Semigroup, DEFAULT_TAIL_BUDGET};
use crate::verify::{CheckKind, SuiteConfig, Tolerances};
use crate::weights::{SpaceKind, SpaceSpec, Weight};

/// File name under which the effective configuration is stored next to the outputs.
pub const EFFECTIVE_CONFIG: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "one")]
    pub n: usize,
    #[serde(rename = "L")]
    pub half_extent: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpotGridSection {
    #[serde(rename = "L")]
    pub half_extent: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub k: Option<f64>,
    pub kind: Option<String>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSection {
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplacianSection {
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    /// `[re, im]` pairs.
    pub zetas: Option<Vec<[f64; 2]>>,
    pub components: Option<usize>,
    pub random_fields: Option<usize>,
    pub tail_budget: Option<f64>,
    pub symbol_time_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    /// Field rule name such as `gaussian` or `bumps:7`.
    pub field: Option<String>,
    /// CSV file holding the initial field; takes precedence over `field`.
    pub input: Option<PathBuf>,
    pub components: Option<usize>,
    pub zeta: Option<[f64; 2]>,
    pub times: Option<Vec<f64>>,
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSection {
    pub check: Option<String>,
    pub field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Check groups to run, in order. Defaults to all of them.
    pub checks: Option<Vec<String>>,
    pub grid: GridSection,
    pub grid2d: Option<SpotGridSection>,
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub sector: SectorSection,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub laplacian: LaplacianSection,
    #[serde(default)]
    pub suite: SuiteSection,
    #[serde(default)]
    pub tol: BTreeMap<String, f64>,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub table: TableSection,
}

/// What `evolve` should compute.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolveTarget {
    Single(ComplexTime),
    Times(Vec<f64>),
}

impl RunConfig {
    /// Parses TOML text. Errors carry the line and column reported by the parser.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.suite()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let (Some(input), Some(base)) = (&cfg.evolve.input, path.parent()) {
            if input.is_relative() {
                cfg.evolve.input = Some(base.join(input));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Writes the effective configuration to `dir/config.toml`, with input paths made absolute.
    pub fn save_effective(&self, dir: &Path) -> Result<PathBuf> {
        let mut cfg = self.clone();
        if let Some(input) = &cfg.evolve.input {
            cfg.evolve.input = Some(fs::canonicalize(input)?);
        }
        let path = dir.join(EFFECTIVE_CONFIG);
        fs::write(&path, cfg.to_toml()?)?;
        Ok(path)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.half_extent, self.grid.points)
    }

    pub fn space(&self) -> Result<SpaceSpec> {
        let weight = Weight::new(self.space.k.unwrap_or(0.0))?;
        let name = self.space.kind.as_deref().unwrap_or("BUC");
        let kind = match (name.to_ascii_lowercase().as_str(), self.space.p) {
            ("lp", Some(p)) => SpaceKind::Lp(p),
            ("lp", None) => return Err(invalid("space.kind = \"Lp\" needs space.p")),
            (_, p) => {
                let kind: SpaceKind = name.parse()?;
                if p.is_some() && !matches!(kind, SpaceKind::Lp(_)) {
                    return Err(invalid(format!("space.p is only meaningful for Lp, not {kind}")));
                }
                kind
            }
        };
        SpaceSpec::new(weight, kind)
    }

    pub fn laplacian(&self) -> Result<LaplacianMethod> {
        self.laplacian.method.as_deref().map_or(Ok(LaplacianMethod::default()), str::parse)
    }

    pub fn components(&self) -> usize {
        self.evolve.components.or(self.suite.components).unwrap_or(1)
    }

    pub fn suite(&self) -> Result<SuiteConfig> {
        let mut cfg = SuiteConfig::reference();
        cfg.grid = self.grid()?;
        cfg.spot_grid = self.grid2d.as_ref().map(|s| Grid::new(2, s.half_extent, s.points)).transpose()?;
        cfg.space = self.space()?;
        cfg.alpha = self.sector.alpha.unwrap_or(0.4 * PI);
        if let Some(z) = &self.suite.zetas {
            cfg.zetas = z.iter().map(|[re, im]| ComplexTime::from_parts(*re, *im)).collect::<Result<_>>()?;
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.components = self.suite.components.unwrap_or(1);
        cfg.window = self.window.margin.map_or(Ok(Window::default()), Window::new)?;
        cfg.laplacian = self.laplacian()?;
        cfg.random_fields = self.suite.random_fields.unwrap_or(cfg.random_fields);
        if let Some(names) = &self.checks {
            cfg.checks = names.iter().map(|n| n.parse()).collect::<Result<Vec<CheckKind>>>()?;
        }
        let mut tol = Tolerances::default();
        for (name, value) in &self.tol {
            tol.set(name, *value)?;
        }
        cfg.tolerances = tol;
        cfg.tail_budget = self.suite.tail_budget.unwrap_or(DEFAULT_TAIL_BUDGET);
        cfg.semigroup = Semigroup {
            symbol_time_scale: self.suite.symbol_time_scale.unwrap_or(1.0),
            tail_budget: cfg.tail_budget,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn evolve_field_rule(&self) -> Result<FieldRule> {
        self.evolve.field.as_deref().unwrap_or("gaussian").parse()
    }

    pub fn evolve_target(&self) -> Result<EvolveTarget> {
        match (&self.evolve.zeta, &self.evolve.times) {
            (Some(_), Some(_)) => Err(invalid("evolve.zeta and evolve.times are mutually exclusive")),
            (Some([re, im]), None) => Ok(EvolveTarget::Single(ComplexTime::from_parts(*re, *im)?)),
            (None, Some(t)) => Ok(EvolveTarget::Times(t.clone())),
            (None, None) => Err(invalid("evolve needs a zeta or a list of times")),
        }
    }

    /// Explicit method, if any; otherwise callers pick per time.
    pub fn evolve_method(&self) -> Result<Option<Method>> {
        self.evolve.method.as_deref().map(str::parse).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nL = 6.0\nN = 65\n";

    #[test]
    fn minimal_config_uses_reference_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        let suite = cfg.suite().unwrap();
        assert_eq!(suite.grid, Grid::new(1, 6.0, 65).unwrap());
        assert_eq!(suite.space, SpaceSpec::buc(0.0).unwrap());
        assert_eq!(suite.checks, CheckKind::ALL.to_vec());
        assert_eq!(suite.spot_grid, None);
    }

    #[test]
    fn keys_map_onto_the_suite() {
        let text = r#"
seed = 7
checks = ["weights", "mild"]
[grid]
n = 2
L = 4.0
N = 33
[space]
k = 1.5
kind = "Lp"
p = 2.0
[sector]
alpha = 1.0
[window]
margin = 0.1
[laplacian]
method = "spectral"
[suite]
zetas = [[1.0, 0.5]]
[tol]
mild = 3e-4
"#;
        let s = RunConfig::parse(text).unwrap().suite().unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.checks, vec![CheckKind::Weights, CheckKind::Mild]);
        assert_eq!(s.grid.dim(), 2);
        assert_eq!(s.space, SpaceSpec::lp(1.5, 2.0).unwrap());
        assert_eq!(s.alpha, 1.0);
        assert_eq!(s.window, Window::new(0.1).unwrap());
        assert_eq!(s.laplacian, LaplacianMethod::Spectral);
        assert_eq!(s.tolerances.mild, 3e-4);
        assert_eq!(s.zetas, vec![ComplexTime::from_parts(1.0, 0.5).unwrap()]);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let cases = [
            "[grid]\nL = 6.0\n",
            "[grid]\nL = 6.0\nN = 65\nwidth = 3\n",
            "[grid]\nL = 6.0\nN = 65\n[space]\nk = -1.0\n",
            "[grid]\nL = 6.0\nN = 65\n[space]\nkind = \"Lp\"\n",
            "[grid]\nL = 6.0\nN = 65\n[space]\nkind = \"BUC\"\np = 2.0\n",
            "[grid]\nL = 6.0\nN = 65\n[sector]\nalpha = 2.0\n",
            "[grid]\nL = 6.0\nN = 65\n[tol]\nbogus = 1.0\n",
            "[grid]\nL = 6.0\nN = 65\nchecks = [\"nope\"]\n",
            "[grid]\nL = 6.0\nN = 65\n[suite]\nzetas = [[0.0, 1.0]]\n",
            "[grid]\nL = 6.0\nN = 65\n[sector]\nalpha = 0.5\n[suite]\nzetas = [[1.0, 1.0]]\n",
        ];
        for text in cases {
            assert!(RunConfig::parse(text).is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = RunConfig::parse("[grid]\nL = 6.0\nN = \"many\"\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn serialization_round_trips() {
        let text = "seed = 3\n[grid]\nL = 6.0\nN = 65\n[evolve]\nzeta = [1.0, -0.5]\nmethod = \"quadrature\"\n";
        let cfg = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(cfg.evolve_target().unwrap(), EvolveTarget::Single(ComplexTime::from_parts(1.0, -0.5).unwrap()));
        assert_eq!(cfg.evolve_method().unwrap(), Some(Method::Quadrature));
    }
}
