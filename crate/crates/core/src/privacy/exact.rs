// SPDX-License-Identifier: Apache-2.0

//! Exact privacy scans over finite output distributions.

use alloc::vec::Vec;

use super::{Extended, Method, MetricKind, Notion, PrivacyReport};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::model::{same_space, AdjacencyRelation, Channel, FiniteSpace, ProbDist};

/// Ordered pairs of output distributions `(P, Q)` checked for
/// `P[R] ≤ e^ε·Q[R] + δ` over all events `R`.
#[derive(Debug, Clone)]
pub struct PairScan<'a> {
    pairs: Vec<(&'a [f64], &'a [f64])>,
}

impl<'a> PairScan<'a> {
    pub fn new(pairs: Vec<(&'a [f64], &'a [f64])>) -> Self {
        Self { pairs }
    }

    /// Least `ε ≥ 0` with `δ = 0`: the largest log-ratio on outputs where the
    /// first distribution is positive.
    pub fn pure_epsilon(&self) -> Extended {
        let mut best = 0.0f64;
        for &(p, q) in &self.pairs {
            for (&a, &b) in p.iter().zip(q) {
                if a > 0.0 {
                    if b == 0.0 {
                        return Extended::Infinite;
                    }
                    best = best.max(math::ln(a / b));
                }
            }
        }
        Extended::Finite(best)
    }

    /// Least `δ` for which `(ε, δ)` holds:
    /// `max over pairs of Σ_y max(0, P[y] − e^ε·Q[y])`.
    pub fn tight_delta(&self, epsilon: f64) -> f64 {
        self.delta_at_ratio(math::exp(epsilon))
    }

    fn delta_at_ratio(&self, t: f64) -> f64 {
        self.pairs
            .iter()
            .map(|&(p, q)| p.iter().zip(q).map(|(&a, &b)| (a - t * b).max(0.0)).sum::<f64>())
            .fold(0.0, f64::max)
            .min(1.0)
    }

    /// Least `ε ≥ 0` for which `(ε, δ)` holds.
    ///
    /// With `t = e^ε`, each pair's tight δ is piecewise linear in `t` with
    /// breakpoints at its likelihood ratios. Bisection over the sorted ratios
    /// finds the bracketing segment and the crossing is solved in closed form
    /// on it, so the result is exact.
    pub fn epsilon_at(&self, delta: f64) -> Extended {
        if delta <= 0.0 {
            return self.pure_epsilon();
        }
        if self.delta_at_ratio(1.0) <= delta {
            return Extended::Finite(0.0);
        }
        let mut ratios: Vec<f64> = self
            .pairs
            .iter()
            .flat_map(|&(p, q)| p.iter().zip(q))
            .filter(|(&a, &b)| a > 0.0 && b > 0.0 && a > b)
            .map(|(&a, &b)| a / b)
            .collect();
        ratios.sort_by(f64::total_cmp);
        ratios.dedup();

        // First candidate ratio meeting the target, if any.
        let (mut lo, mut hi) = (0usize, ratios.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.delta_at_ratio(ratios[mid]) <= delta {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let t_lo = if lo == 0 { 1.0 } else { ratios[lo - 1] };
        let t_hi = ratios.get(lo).copied();
        let infinite_mass = self
            .pairs
            .iter()
            .map(|&(p, q)| {
                p.iter()
                    .zip(q)
                    .filter(|(_, &b)| b == 0.0)
                    .map(|(&a, _)| a)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if t_hi.is_none() && infinite_mass > delta {
            return Extended::Infinite;
        }

        // On (t_lo, t_hi) each pair's active outputs are those with ratio > t_lo.
        let mut t_star = t_lo;
        for &(p, q) in &self.pairs {
            let (mut a_sum, mut b_sum) = (0.0, 0.0);
            for (&a, &b) in p.iter().zip(q) {
                if a > 0.0 && (b == 0.0 || a / b > t_lo) {
                    a_sum += a;
                    b_sum += b;
                }
            }
            if a_sum > delta && b_sum > 0.0 {
                t_star = t_star.max((a_sum - delta) / b_sum);
            }
        }
        if let Some(t_hi) = t_hi {
            t_star = t_star.min(t_hi);
        }
        Extended::Finite(math::ln(t_star).max(0.0))
    }
}

fn relation_pairs<'a>(channel: &'a Channel, phi: &AdjacencyRelation) -> Result<PairScan<'a>> {
    if phi.size() != channel.input_space().len() {
        return Err(Error::SpaceMismatch("adjacency relation vs channel inputs"));
    }
    Ok(PairScan::new(
        phi.iter()
            .map(|(a, b)| (channel.row(a), channel.row(b)))
            .collect(),
    ))
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(invalid("delta", "must lie in [0, 1]"))
    }
}

/// Exact `ε` of `(ε, δ)`-DP of `channel` over the ordered pairs of `phi`.
pub fn dp_epsilon(channel: &Channel, phi: &AdjacencyRelation, delta: f64) -> Result<PrivacyReport> {
    check_delta(delta)?;
    let scan = relation_pairs(channel, phi)?;
    PrivacyReport::new(scan.epsilon_at(delta), delta, Notion::Dp, Method::Exact)
}

/// Least `δ` making `(ε, δ)`-DP hold over `phi`.
pub fn tight_delta(channel: &Channel, phi: &AdjacencyRelation, epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(invalid("epsilon", "must be nonnegative"));
    }
    Ok(relation_pairs(channel, phi)?.tight_delta(epsilon))
}

/// Exact `ε` of `(ε, d, 0)`-XDP: the largest log-ratio divided by `d(x, x′)`
/// over distinct inputs. Only `δ = 0` is supported.
pub fn xdp_epsilon(channel: &Channel, metric: &FiniteSpace, delta: f64) -> Result<PrivacyReport> {
    if delta != 0.0 {
        return Err(Error::Unsupported("XDP scans support delta = 0 only"));
    }
    let n = channel.input_space().len();
    if metric.len() != n {
        return Err(Error::SpaceMismatch("metric vs channel inputs"));
    }
    let mut best = Extended::Finite(0.0);
    for x in 0..n {
        for x2 in 0..n {
            if x == x2 {
                continue;
            }
            let ratio = PairScan::new(alloc::vec![(channel.row(x), channel.row(x2))]).pure_epsilon();
            let d = metric.distance(x, x2);
            let scaled = match ratio {
                Extended::Infinite => Extended::Infinite,
                Extended::Finite(r) if r <= 0.0 => Extended::Finite(0.0),
                Extended::Finite(_) if d == 0.0 => Extended::Infinite,
                Extended::Finite(r) => Extended::Finite(r / d),
            };
            best = best.max(scaled);
            if best == Extended::Infinite {
                break;
            }
        }
    }
    Ok(PrivacyReport::new(best, 0.0, Notion::Xdp, Method::Exact)?.with_metric(MetricKind::Utility))
}

/// Exact DistP: DP of the lifted channel over the ordered distribution pairs.
pub fn distp_epsilon_exact(
    channel: &Channel,
    pairs: &[(ProbDist, ProbDist)],
    delta: f64,
) -> Result<PrivacyReport> {
    check_delta(delta)?;
    if pairs.is_empty() {
        return Err(Error::EmptyRelation);
    }
    let lifted: Vec<(ProbDist, ProbDist)> = pairs
        .iter()
        .map(|(a, b)| Ok((channel.lift(a)?, channel.lift(b)?)))
        .collect::<Result<_>>()?;
    let scan = PairScan::new(lifted.iter().map(|(a, b)| (a.mass(), b.mass())).collect());
    PrivacyReport::new(scan.epsilon_at(delta), delta, Notion::DistP, Method::Exact)
}

/// `K(λ₀, λ₁, y) = A♯(λ₀)[y] / A♯(λ₁)[y]`; infinite when the denominator is 0.
pub fn bayes_factor(channel: &Channel, lambda0: &ProbDist, lambda1: &ProbDist, y: usize) -> Result<Extended> {
    channel.output_space().check_index(y)?;
    let p = channel.lift(lambda0)?.get(y);
    let q = channel.lift(lambda1)?.get(y);
    Ok(if q == 0.0 {
        Extended::Infinite
    } else {
        Extended::Finite(p / q)
    })
}

/// δ-approximate max divergence
/// `max over R with μ₀[R] ≥ δ of ln((μ₀[R] − δ) / μ₁[R])`.
///
/// The maximizing event is a prefix of the outputs sorted by decreasing
/// likelihood ratio, so only those `n` events are scanned. The finite value
/// may be negative. Fails with [`Error::NoAdmissibleEvent`] when every event
/// gives `−∞`.
pub fn max_divergence(mu0: &ProbDist, mu1: &ProbDist, delta: f64) -> Result<Extended> {
    if !same_space(mu0.space(), mu1.space()) {
        return Err(Error::SpaceMismatch("max divergence"));
    }
    check_delta(delta)?;
    let (p, q) = (mu0.mass(), mu1.mass());
    let mut order: Vec<usize> = (0..p.len()).collect();
    let key = |i: usize| {
        if p[i] == 0.0 {
            f64::NEG_INFINITY
        } else if q[i] == 0.0 {
            f64::INFINITY
        } else {
            p[i] / q[i]
        }
    };
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let (mut pm, mut qm) = (0.0, 0.0);
    let mut best: Option<Extended> = None;
    for &i in &order {
        pm += p[i];
        qm += q[i];
        let excess = pm - delta;
        if excess <= 0.0 {
            continue;
        }
        let value = if qm == 0.0 {
            Extended::Infinite
        } else {
            Extended::Finite(math::ln(excess / qm))
        };
        best = Some(best.map_or(value, |b| b.max(value)));
    }
    best.ok_or(Error::NoAdmissibleEvent)
}
