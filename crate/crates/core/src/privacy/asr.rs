// SPDX-License-Identifier: Apache-2.0

//! Attack success rate of the Bayes-decision attacker.
//!
//! The attacker knows the attribute priors `π` and the location distribution
//! `λ_a` of each attribute, observes one output, and guesses
//! `argmax_a π_a·p(output | λ_a)` with ties going to the lowest index.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{invalid, Error, Result};
use crate::model::{Channel, ProbDist};
use crate::stats::{Estimate, RunningMean};
use crate::tupling::{input_sampler, EvalMode, TuplingMechanism};
use crate::PROB_TOL;

#[derive(Debug, Clone, Copy)]
pub enum AsrMechanism<'a> {
    Channel(&'a Channel),
    Tupling(&'a TuplingMechanism),
}

impl AsrMechanism<'_> {
    fn channel(&self) -> &Channel {
        match self {
            Self::Channel(c) => c,
            Self::Tupling(t) => t.inner(),
        }
    }
}

/// Lowest index maximizing `weights[a]`.
fn decide(weights: &[f64]) -> usize {
    let mut best = 0;
    for (a, &w) in weights.iter().enumerate().skip(1) {
        if w > weights[best] {
            best = a;
        }
    }
    best
}

/// Joint mass of the attributes the decision rule rejects.
fn misclassified(weights: &[f64]) -> f64 {
    let d = decide(weights);
    weights
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != d)
        .map(|(_, w)| w)
        .sum()
}

/// Probability that the attacker guesses the attribute correctly.
pub fn attack_success_rate(
    mechanism: AsrMechanism<'_>,
    attributes: &[ProbDist],
    priors: &[f64],
    mode: EvalMode,
) -> Result<Estimate> {
    if attributes.is_empty() || attributes.len() != priors.len() {
        return Err(invalid("priors", "need one prior per attribute distribution"));
    }
    if priors.iter().any(|p| !(0.0..=1.0).contains(p)) || (priors.iter().sum::<f64>() - 1.0).abs() > PROB_TOL
    {
        return Err(invalid("priors", "must be a probability vector"));
    }
    let lifted: Vec<Vec<f64>> = attributes
        .iter()
        .map(|d| Ok(mechanism.channel().lift(d)?.mass().to_vec()))
        .collect::<Result<_>>()?;
    let mut weights = alloc::vec![0.0; priors.len()];

    match mode {
        EvalMode::Exact => {
            let error: f64 = match mechanism {
                AsrMechanism::Channel(c) => (0..c.output_space().len())
                    .map(|y| {
                        for (a, w) in weights.iter_mut().enumerate() {
                            *w = priors[a] * lifted[a][y];
                        }
                        misclassified(&weights)
                    })
                    .sum(),
                AsrMechanism::Tupling(tp) => {
                    let mut total = 0.0;
                    for tuple in tp.enumerate_tuples()? {
                        for (a, w) in weights.iter_mut().enumerate() {
                            *w = priors[a] * tp.tuple_prob_lifted(&lifted[a], &tuple);
                        }
                        total += misclassified(&weights);
                    }
                    total
                }
            };
            // Summing the error mass keeps exact answers exact: disjoint
            // supports give exactly 0 rather than a rounded sum of 1.
            let value = 1.0 - error;
            Ok(Estimate {
                value,
                stderr: 0.0,
                samples: 0,
            })
        }
        EvalMode::MonteCarlo { samples, stream } => {
            if samples == 0 {
                return Err(Error::TooFewSamples { given: 0, min: 1 });
            }
            let prior_sampler = WeightedIndex::new(priors).map_err(|_| invalid("priors", "all zero"))?;
            let input_samplers: Vec<_> = attributes.iter().map(input_sampler).collect();
            let mut rng = stream.rng();
            let mut acc = RunningMean::default();
            match mechanism {
                AsrMechanism::Channel(c) => {
                    let rows: Vec<WeightedIndex<f64>> = (0..c.input_space().len())
                        .map(|x| WeightedIndex::new(c.row(x)).expect("stochastic row"))
                        .collect();
                    for _ in 0..samples {
                        let truth = prior_sampler.sample(&mut rng);
                        let x = input_samplers[truth].sample(&mut rng);
                        let y = rows[x].sample(&mut rng);
                        for (a, w) in weights.iter_mut().enumerate() {
                            *w = priors[a] * lifted[a][y];
                        }
                        acc.push(f64::from(u8::from(decide(&weights) == truth)));
                    }
                }
                AsrMechanism::Tupling(tp) => {
                    let sampler = tp.sampler();
                    let mut buf = Vec::with_capacity(tp.k() + 1);
                    for _ in 0..samples {
                        let truth = prior_sampler.sample(&mut rng);
                        sampler.sample_from_dist(&input_samplers[truth], &mut rng, &mut buf);
                        for (a, w) in weights.iter_mut().enumerate() {
                            *w = priors[a] * tp.relative_likelihood(&lifted[a], &buf);
                        }
                        acc.push(f64::from(u8::from(decide(&weights) == truth)));
                    }
                }
            }
            Ok(acc.finish())
        }
    }
}
