// SPDX-License-Identifier: Apache-2.0

//! Privacy quantification: exact DP/XDP/DistP scans, the Monte-Carlo
//! estimator for the tupling mechanism, transfer bounds, composition, and the
//! Bayes-decision attack.

mod asr;
mod bounds;
mod exact;
mod sampled;

pub use asr::{attack_success_rate, AsrMechanism};
pub use bounds::{
    close_belief_bound_distp, close_belief_bound_xdistp, compose, dp_to_distp_bound, xdp_to_xdistp_bound,
    CompositionMode,
};
pub use exact::{
    bayes_factor, distp_epsilon_exact, dp_epsilon, max_divergence, tight_delta, xdp_epsilon, PairScan,
};
pub use sampled::{distp_epsilon_tupling_mc, PrivacyLossSamples, MIN_MC_SAMPLES};

use core::fmt;

use crate::error::{invalid, Result};

/// A nonnegative quantity that may be unbounded.
///
/// Unbounded privacy is an explicit state so it never leaks into arithmetic
/// as a float infinity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    /// Maps `+∞` to [`Extended::Infinite`].
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Self::Infinite
        } else {
            Self::Finite(v)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// The value as a float, `+∞` when unbounded. For display and comparison
    /// only.
    pub fn to_f64(self) -> f64 {
        match self {
            Self::Finite(v) => v,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Notion {
    Dp,
    Xdp,
    DistP,
    XDistP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Method {
    Exact,
    MonteCarlo,
    Theoretical,
}

/// Metric scaling the exponent of the extended notions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum MetricKind {
    Utility,
    WassersteinInf,
}

impl Notion {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dp => "DP",
            Self::Xdp => "XDP",
            Self::DistP => "DistP",
            Self::XDistP => "XDistP",
        }
    }
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::MonteCarlo => "monte-carlo",
            Self::Theoretical => "theoretical",
        }
    }
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Utility => "d_u",
            Self::WassersteinInf => "W_inf",
        }
    }
}

/// Sample count and seed of a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SampleInfo {
    pub samples: usize,
    pub seed: u64,
}

/// A privacy guarantee or estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PrivacyReport {
    epsilon: Extended,
    delta: f64,
    notion: Notion,
    method: Method,
    metric: Option<MetricKind>,
    sampling: Option<SampleInfo>,
    epsilon_stderr: Option<f64>,
}

impl PrivacyReport {
    /// Requires `ε ≥ 0` and `δ ∈ [0, 1]`.
    pub fn new(epsilon: Extended, delta: f64, notion: Notion, method: Method) -> Result<Self> {
        if let Extended::Finite(e) = epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(invalid("epsilon", "must be finite and nonnegative"));
            }
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid("delta", "must lie in [0, 1]"));
        }
        Ok(Self {
            epsilon,
            delta,
            notion,
            method,
            metric: None,
            sampling: None,
            epsilon_stderr: None,
        })
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = Some(metric);
        self
    }

    pub fn with_sampling(mut self, samples: usize, seed: u64, stderr: f64) -> Self {
        self.sampling = Some(SampleInfo { samples, seed });
        self.epsilon_stderr = Some(stderr);
        self
    }

    pub fn epsilon(&self) -> Extended {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn notion(&self) -> Notion {
        self.notion
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn metric(&self) -> Option<MetricKind> {
        self.metric
    }

    pub fn sampling(&self) -> Option<SampleInfo> {
        self.sampling
    }

    pub fn epsilon_stderr(&self) -> Option<f64> {
        self.epsilon_stderr
    }
}
