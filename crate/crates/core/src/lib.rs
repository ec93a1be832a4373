// SPDX-License-Identifier: Apache-2.0

//! Local obfuscation mechanisms that hide the distribution of their inputs.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure computation:
//!
//! - [`model`]: finite spaces, distributions, channels, and lifting a channel
//!   to act on input distributions
//! - [`transport`]: couplings, the ∞-Wasserstein distance, and lifted
//!   adjacency relations, decided by exact integer max-flow
//! - [`mechanisms`]: randomized response, exponential, grid planar
//!   Laplace/Gaussian, and restricted Laplace channels
//! - [`tupling`]: the dummy-tupling mechanism, its exact output
//!   probabilities, quality loss, and the dummy-count privacy bound
//! - [`privacy`]: exact and Monte-Carlo DP/XDP/DistP quantification,
//!   transfer bounds, composition, and the Bayes-decision attack
//! - [`geo`]: grids, quadtree partitioning, empirical attribute
//!   distributions, and synthetic check-in populations
//!
//! File formats, configuration, and the experiment CLI live in the companion
//! `distpriv` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod geo;
pub mod math;
pub mod mechanisms;
pub mod model;
pub mod privacy;
pub mod rng;
pub mod stats;
pub mod transport;
pub mod tupling;

pub use error::{Error, Result};
pub use model::{AdjacencyRelation, Channel, FiniteSpace, ProbDist};
pub use privacy::{Extended, PrivacyReport};

/// Absolute tolerance for probability sums and row stochasticity.
pub const PROB_TOL: f64 = 1e-12;

/// Relative tolerance for metric validation.
pub const METRIC_TOL: f64 = 1e-9;
