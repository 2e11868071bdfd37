//! The complex-time heat semigroup `G(z) f = chi_z * f` on polynomially weighted,
//! vector-valued function spaces over `R^n`, together with residual checks for the
//! identities it satisfies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod fields;
pub mod generator;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod semigroup;
pub mod spectral;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use fields::FieldRule;
pub use generator::LaplacianMethod;
pub use grid::{Field, Grid, TestFunction, Window};
pub use kernel::ComplexTime;
pub use semigroup::{Method, Semigroup, Trajectory};
pub use verify::{run_suite, CheckKind, SuiteConfig, VerificationReport};
pub use weights::{SpaceKind, SpaceSpec, Weight, WindowedNorm};
