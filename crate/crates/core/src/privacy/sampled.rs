// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo DistP estimation for the tupling mechanism.
//!
//! Tuples are drawn from `Q(λ₀)` and `Q(λ₁)`; for each the exact privacy loss
//! `ln(Q(λ₀)[ȳ] / Q(λ₁)[ȳ])` is evaluated, and `ε̂` at `δ` is the empirical
//! `(1 − δ)`-quantile of the loss, taken in both directions, clamped at 0.

use alloc::vec::Vec;

use super::{Extended, Method, Notion, PrivacyReport};
use crate::error::{invalid, Error, Result};
use crate::model::ProbDist;
use crate::rng::SeedStream;
use crate::stats::{quantile_with_stderr, sort_samples};
use crate::tupling::{input_sampler, TuplingMechanism};

/// Smallest sample count accepted by the estimator.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Sorted privacy-loss samples in both directions; one draw serves any `δ`.
#[derive(Debug, Clone)]
pub struct PrivacyLossSamples {
    forward: Vec<f64>,
    backward: Vec<f64>,
    samples: usize,
    seed: u64,
}

impl PrivacyLossSamples {
    /// Draws `samples` tuples from each side. Stream substreams 0 and 1 feed
    /// the two directions.
    pub fn draw(
        tp: &TuplingMechanism,
        lambda0: &ProbDist,
        lambda1: &ProbDist,
        samples: usize,
        stream: SeedStream,
    ) -> Result<Self> {
        if samples < MIN_MC_SAMPLES {
            return Err(Error::TooFewSamples {
                given: samples,
                min: MIN_MC_SAMPLES,
            });
        }
        let l0 = tp.inner().lift(lambda0)?;
        let l1 = tp.inner().lift(lambda1)?;
        let forward = direction(tp, lambda0, l0.mass(), l1.mass(), samples, stream.substream(0));
        let backward = direction(tp, lambda1, l1.mass(), l0.mass(), samples, stream.substream(1));
        Ok(Self {
            forward,
            backward,
            samples,
            seed: stream.seed(),
        })
    }

    /// `(ε̂, standard error)` at `delta`.
    pub fn epsilon_at(&self, delta: f64) -> (Extended, f64) {
        let q = 1.0 - delta;
        let (f, fse) = quantile_with_stderr(&self.forward, q);
        let (b, bse) = quantile_with_stderr(&self.backward, q);
        let (v, se) = if f >= b { (f, fse) } else { (b, bse) };
        (Extended::from_f64(v.max(0.0)), if v > 0.0 { se } else { 0.0 })
    }

    pub fn report(&self, delta: f64) -> Result<PrivacyReport> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid("delta", "must lie in [0, 1]"));
        }
        let (eps, se) = self.epsilon_at(delta);
        Ok(
            PrivacyReport::new(eps, delta, Notion::DistP, Method::MonteCarlo)?.with_sampling(
                self.samples,
                self.seed,
                se,
            ),
        )
    }

    pub fn forward(&self) -> &[f64] {
        &self.forward
    }

    pub fn backward(&self) -> &[f64] {
        &self.backward
    }
}

fn direction(
    tp: &TuplingMechanism,
    source: &ProbDist,
    lifted_source: &[f64],
    lifted_other: &[f64],
    samples: usize,
    stream: SeedStream,
) -> Vec<f64> {
    let sampler = tp.sampler();
    let inputs = input_sampler(source);
    let mut rng = stream.rng();
    let mut buf = Vec::with_capacity(tp.k() + 1);
    let mut losses = Vec::with_capacity(samples);
    for _ in 0..samples {
        sampler.sample_from_dist(&inputs, &mut rng, &mut buf);
        losses.push(tp.log_likelihood_ratio(lifted_source, lifted_other, &buf));
    }
    sort_samples(losses)
}

/// Monte-Carlo `(ε̂, δ)`-DistP of the tupling mechanism for the pair.
pub fn distp_epsilon_tupling_mc(
    tp: &TuplingMechanism,
    lambda0: &ProbDist,
    lambda1: &ProbDist,
    delta: f64,
    samples: usize,
    stream: SeedStream,
) -> Result<PrivacyReport> {
    PrivacyLossSamples::draw(tp, lambda0, lambda1, samples, stream)?.report(delta)
}
