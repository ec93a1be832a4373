// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, CSV formats, and the sweep runner behind the
//! `distpriv` command.
//!
//! ```no_run
//! use std::path::Path;
//! use distpriv::{config::ExperimentConfig, runner};
//!
//! let cfg = ExperimentConfig::desk_default();
//! let curves = runner::parse_curves("eps-vs-k").unwrap();
//! runner::run(cfg, Path::new("."), &curves, Path::new("results"), Default::default()).unwrap();
//! ```

pub mod config;
pub mod error;
pub mod io;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{ConfigError, RunError};
pub use runner::{Curve, Experiment};
