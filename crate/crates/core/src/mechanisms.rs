// SPDX-License-Identifier: Apache-2.0

//! Constructors for concrete obfuscation channels over a single space.
//!
//! The grid planar Laplace and Gaussian mechanisms evaluate the continuous
//! density at region centroids and renormalize over the output space; they
//! approximate the continuous mechanisms rather than integrating over cells.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::model::{AdjacencyRelation, Channel, FiniteSpace};
use crate::transport::{sensitivity, UtilityFunction};

/// A point obfuscation mechanism and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum MechanismSpec {
    RandomizedResponse {
        epsilon: f64,
    },
    /// Exponential mechanism with utility `−d`.
    Exponential {
        epsilon: f64,
    },
    PlanarLaplace {
        epsilon: f64,
    },
    /// `sigma` in the space's distance unit.
    PlanarGaussian {
        sigma: f64,
    },
    RestrictedLaplace {
        epsilon: f64,
        radius: f64,
    },
    Identity,
}

impl MechanismSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::RandomizedResponse { .. } => "randomized-response",
            Self::Exponential { .. } => "exponential",
            Self::PlanarLaplace { .. } => "planar-laplace",
            Self::PlanarGaussian { .. } => "planar-gaussian",
            Self::RestrictedLaplace { .. } => "restricted-laplace",
            Self::Identity => "identity",
        }
    }

    /// Short abbreviation used in result tables.
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::RandomizedResponse { .. } => "RR",
            Self::Exponential { .. } => "EXP",
            Self::PlanarLaplace { .. } => "PL",
            Self::PlanarGaussian { .. } => "PG",
            Self::RestrictedLaplace { .. } => "RL",
            Self::Identity => "ID",
        }
    }

    /// The mechanism's main parameter (ε, or σ for the Gaussian).
    pub fn parameter(&self) -> f64 {
        match *self {
            Self::RandomizedResponse { epsilon }
            | Self::Exponential { epsilon }
            | Self::PlanarLaplace { epsilon }
            | Self::RestrictedLaplace { epsilon, .. } => epsilon,
            Self::PlanarGaussian { sigma } => sigma,
            Self::Identity => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::RandomizedResponse { epsilon }
            | Self::Exponential { epsilon }
            | Self::PlanarLaplace { epsilon } => check_epsilon(epsilon),
            Self::PlanarGaussian { sigma } => {
                if sigma.is_finite() && sigma > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("sigma", "must be finite and positive"))
                }
            }
            Self::RestrictedLaplace { epsilon, radius } => {
                check_epsilon(epsilon)?;
                if radius.is_nan() || radius < 0.0 {
                    Err(invalid("radius", "must be nonnegative"))
                } else {
                    Ok(())
                }
            }
            Self::Identity => Ok(()),
        }
    }

    pub fn build(&self, space: &Arc<FiniteSpace>) -> Result<Channel> {
        self.validate()?;
        match *self {
            Self::RandomizedResponse { epsilon } => randomized_response(space, epsilon),
            Self::Exponential { epsilon } => {
                exponential_mechanism(space, epsilon, &UtilityFunction::negated_distance(space))
            }
            Self::PlanarLaplace { epsilon } => planar_laplace_grid(space, epsilon),
            Self::PlanarGaussian { sigma } => planar_gaussian_grid(space, sigma),
            Self::RestrictedLaplace { epsilon, radius } => restricted_laplace(space, epsilon, radius),
            Self::Identity => Ok(Channel::identity(space.clone())),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon >= 0.0 {
        Ok(())
    } else {
        Err(invalid("epsilon", "must be finite and nonnegative"))
    }
}

/// k-ary randomized response: keep the input with probability
/// `e^ε / (e^ε + n − 1)`, otherwise report another element uniformly.
pub fn randomized_response(space: &Arc<FiniteSpace>, epsilon: f64) -> Result<Channel> {
    check_epsilon(epsilon)?;
    let n = space.len();
    let e = math::exp(epsilon);
    let denom = e + (n as f64 - 1.0);
    let keep = e / denom;
    let other = 1.0 / denom;
    let mut rows = vec![other; n * n];
    for x in 0..n {
        rows[x * n + x] = keep;
    }
    Channel::new(space.clone(), space.clone(), rows)
}

/// `A(x)[y] ∝ e^{−ε·d(x,y)}` on the ball `d(x, y) ≤ r`, zero outside.
pub fn restricted_laplace(space: &Arc<FiniteSpace>, epsilon: f64, radius: f64) -> Result<Channel> {
    check_epsilon(epsilon)?;
    if radius.is_nan() || radius < 0.0 {
        return Err(invalid("radius", "must be nonnegative"));
    }
    let n = space.len();
    let mut rows = Vec::with_capacity(n * n);
    for x in 0..n {
        let mut logits: Vec<f64> = space
            .distances_from(x)
            .iter()
            .map(|&d| {
                if d <= radius {
                    -epsilon * d
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        if logits.iter().all(|l| *l == f64::NEG_INFINITY) {
            return Err(Error::EmptyBall(x));
        }
        math::softmax_in_place(&mut logits);
        rows.extend(logits);
    }
    Channel::new(space.clone(), space.clone(), rows)
}

/// `A(x)[y] ∝ e^{ε·u(x,y) / (2Δ)}` where Δ is the sensitivity of `u` over all
/// pairs.
pub fn exponential_mechanism(space: &Arc<FiniteSpace>, epsilon: f64, u: &UtilityFunction) -> Result<Channel> {
    check_epsilon(epsilon)?;
    let n = space.len();
    if u.inputs() != n || u.outputs() != n {
        return Err(Error::SpaceMismatch("utility table"));
    }
    let delta = sensitivity(u, &AdjacencyRelation::all_pairs(n))?;
    if epsilon == 0.0 {
        return Channel::new(space.clone(), space.clone(), vec![1.0 / n as f64; n * n]);
    }
    if delta == 0.0 {
        return Err(Error::DegenerateUtility);
    }
    let scale = epsilon / (2.0 * delta);
    let mut rows = Vec::with_capacity(n * n);
    for x in 0..n {
        let mut logits: Vec<f64> = u.row(x).iter().map(|v| scale * v).collect();
        math::softmax_in_place(&mut logits);
        rows.extend(logits);
    }
    Channel::new(space.clone(), space.clone(), rows)
}

/// `A(x)[y] ∝ e^{−ε·d(x,y)}` over the whole space.
pub fn planar_laplace_grid(space: &Arc<FiniteSpace>, epsilon: f64) -> Result<Channel> {
    restricted_laplace(space, epsilon, f64::INFINITY)
}

/// `A(x)[y] ∝ e^{−d(x,y)² / (2σ²)}` over the whole space.
pub fn planar_gaussian_grid(space: &Arc<FiniteSpace>, sigma: f64) -> Result<Channel> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(
            "sigma",
            format!("must be finite and positive, got {sigma}"),
        ));
    }
    let n = space.len();
    let mut rows = Vec::with_capacity(n * n);
    for x in 0..n {
        let mut logits: Vec<f64> = space
            .distances_from(x)
            .iter()
            .map(|&d| -(d * d) / (2.0 * sigma * sigma))
            .collect();
        math::softmax_in_place(&mut logits);
        rows.extend(logits);
    }
    Channel::new(space.clone(), space.clone(), rows)
}
