// SPDX-License-Identifier: Apache-2.0

//! Theoretical bounds: DP and XDP transfer to distributions, close-belief
//! attackers, and composition.

use super::{Extended, Method, MetricKind, Notion, PrivacyReport};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::model::{AdjacencyRelation, ProbDist};
use crate::transport::{in_lifted_inf_relation, wasserstein_inf};

fn nonneg(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(name, "must be finite and nonnegative"))
    }
}

fn unit(name: &'static str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(name, "must lie in [0, 1]"))
    }
}

/// Exponent `ε·(d + 2c)` against an attacker whose beliefs are within `c`
/// of the true distributions.
pub fn close_belief_bound_xdistp(epsilon: f64, distance: f64, c: f64) -> Result<f64> {
    Ok(nonneg("epsilon", epsilon)? * (nonneg("distance", distance)? + 2.0 * nonneg("c", c)?))
}

/// `(3ε, (1 + e^ε + e^{2ε})·δ)` against a close-belief attacker, δ capped at 1.
pub fn close_belief_bound_distp(epsilon: f64, delta: f64) -> Result<(f64, f64)> {
    let e = nonneg("epsilon", epsilon)?;
    let d = unit("delta", delta)?;
    let factor = 1.0 + math::exp(e) + math::exp(2.0 * e);
    Ok((3.0 * e, (factor * d).min(1.0)))
}

/// `(ε, δ)`-DP w.r.t. `Φ` gives `(ε, δ·|Φ|)`-DistP w.r.t. the lifted relation.
pub fn dp_to_distp_bound(epsilon: f64, delta: f64, relation_size: usize) -> Result<PrivacyReport> {
    let e = nonneg("epsilon", epsilon)?;
    let d = unit("delta", delta)?;
    PrivacyReport::new(
        Extended::Finite(e),
        (d * relation_size as f64).min(1.0),
        Notion::DistP,
        Method::Theoretical,
    )
}

/// `(ε, d, δ)`-XDP w.r.t. `Φ` gives, for a pair in the ∞-lifted relation,
/// the effective exponent `ε·W∞(λ₀, λ₁)` with `δ·|Φ|`.
pub fn xdp_to_xdistp_bound(
    epsilon: f64,
    delta: f64,
    phi: &AdjacencyRelation,
    lambda0: &ProbDist,
    lambda1: &ProbDist,
) -> Result<PrivacyReport> {
    let e = nonneg("epsilon", epsilon)?;
    let d = unit("delta", delta)?;
    if in_lifted_inf_relation(lambda0, lambda1, phi)?.is_none() {
        return Err(Error::NotInLiftedRelation);
    }
    let (w, _) = wasserstein_inf(lambda0, lambda1)?;
    Ok(PrivacyReport::new(
        Extended::Finite(e * w),
        (d * phi.len() as f64).min(1.0),
        Notion::XDistP,
        Method::Theoretical,
    )?
    .with_metric(MetricKind::WassersteinInf))
}

/// How privacy reports combine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompositionMode {
    /// Sequential composition sharing one input: `(Σε, Σδ·|Φ|)`.
    SequentialShared { relation_size: usize },
    /// Sequential composition on independent inputs: `(Σε, Σδ)`.
    SequentialIndependent,
    /// Post-processing leaves the guarantee unchanged.
    PostProcess,
    /// Pre-processing by a `c`-stable transformation: `(c·ε, δ)`.
    PreProcess { stability: f64 },
}

/// Combines reports by one row of the composition table. δ is capped at 1.
pub fn compose(reports: &[PrivacyReport], mode: CompositionMode) -> Result<PrivacyReport> {
    let first = reports
        .first()
        .ok_or(Error::IncompatibleReports("nothing to compose"))?;
    for r in reports {
        if r.notion() != first.notion() || r.metric() != first.metric() {
            return Err(Error::IncompatibleReports("mixed privacy notions"));
        }
        if !r.epsilon().is_finite() {
            return Err(Error::UnboundedComposition);
        }
    }
    let eps = |r: &PrivacyReport| r.epsilon().finite().unwrap_or(f64::INFINITY);
    let (epsilon, delta) = match mode {
        CompositionMode::SequentialShared { relation_size } => (
            reports.iter().map(eps).sum::<f64>(),
            reports.iter().map(|r| r.delta()).sum::<f64>() * relation_size as f64,
        ),
        CompositionMode::SequentialIndependent => (
            reports.iter().map(eps).sum::<f64>(),
            reports.iter().map(|r| r.delta()).sum::<f64>(),
        ),
        CompositionMode::PostProcess | CompositionMode::PreProcess { .. } if reports.len() != 1 => {
            return Err(Error::IncompatibleReports("expects exactly one report"));
        }
        CompositionMode::PostProcess => (eps(first), first.delta()),
        CompositionMode::PreProcess { stability } => {
            (nonneg("stability", stability)? * eps(first), first.delta())
        }
    };
    let mut out = PrivacyReport::new(
        Extended::Finite(epsilon),
        delta.min(1.0),
        first.notion(),
        Method::Theoretical,
    )?;
    if let Some(m) = first.metric() {
        out = out.with_metric(m);
    }
    Ok(out)
}
