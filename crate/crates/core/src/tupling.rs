// SPDX-License-Identifier: Apache-2.0

//! The tupling mechanism: report the inner mechanism's output hidden at a
//! uniformly random position among `k` dummies drawn from `ν`.
//!
//! For an input distribution `λ` the probability of a tuple `ȳ` is
//! `(1/(k+1)) Σ_i A♯(λ)[y_i] Π_{j≠i} ν[y_j]`, which is what
//! [`TuplingMechanism::tuple_prob`] evaluates.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::model::{same_space, Channel, FiniteSpace, ProbDist};
use crate::rng::{SeedStream, StreamRng};
use crate::stats::{Estimate, RunningMean};

/// Largest tuple space enumerated exactly.
pub const EXACT_TUPLE_LIMIT: u128 = 1_000_000;

/// Tolerance used when comparing lifted probabilities against `β`.
pub const BETA_TOL: f64 = 1e-12;

/// An ordered output tuple of `k + 1` output-space indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TupleOutput(pub Vec<usize>);

impl TupleOutput {
    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuplingMechanism {
    k: usize,
    dummy: ProbDist,
    inner: Channel,
}

impl TuplingMechanism {
    /// Requires `k ≥ 1` and `dummy` over the inner channel's output space.
    pub fn new(k: usize, dummy: ProbDist, inner: Channel) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "the tupling mechanism needs at least one dummy"));
        }
        Self::build(k, dummy, inner)
    }

    /// The `k = 0` reduction (no dummies), which is just the inner channel.
    /// Kept outside [`TuplingMechanism::new`] so the privacy bound never sees it.
    pub fn without_dummies(dummy: ProbDist, inner: Channel) -> Result<Self> {
        Self::build(0, dummy, inner)
    }

    /// Tupling with uniform dummies over the inner channel's outputs.
    pub fn uniform(k: usize, inner: Channel) -> Result<Self> {
        let dummy = ProbDist::uniform(inner.output_space().clone());
        Self::new(k, dummy, inner)
    }

    fn build(k: usize, dummy: ProbDist, inner: Channel) -> Result<Self> {
        if !same_space(dummy.space(), inner.output_space()) {
            return Err(Error::SpaceMismatch("dummy distribution vs channel outputs"));
        }
        Ok(Self { k, dummy, inner })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dummy(&self) -> &ProbDist {
        &self.dummy
    }

    pub fn inner(&self) -> &Channel {
        &self.inner
    }

    pub fn output_len(&self) -> usize {
        self.inner.output_space().len()
    }

    pub fn dummy_is_uniform(&self) -> bool {
        let u = 1.0 / self.dummy.len() as f64;
        self.dummy.mass().iter().all(|m| (m - u).abs() <= BETA_TOL)
    }

    /// Precomputes the per-row samplers.
    pub fn sampler(&self) -> TupleSampler<'_> {
        TupleSampler::new(self)
    }

    /// One draw of the mechanism on input `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<TupleOutput> {
        self.inner.input_space().check_index(x)?;
        let mut buf = Vec::with_capacity(self.k + 1);
        self.sampler().sample_into(x, rng, &mut buf);
        Ok(TupleOutput(buf))
    }

    /// One draw from the named stream.
    pub fn sample_seeded(&self, x: usize, stream: SeedStream) -> Result<TupleOutput> {
        self.sample(x, &mut stream.rng())
    }

    /// Exact probability of `tuple` when the input is drawn from `dist`.
    pub fn tuple_prob(&self, dist: &ProbDist, tuple: &TupleOutput) -> Result<f64> {
        if tuple.len() != self.k + 1 {
            return Err(invalid("tuple", "length must be k + 1"));
        }
        if let Some(&y) = tuple.0.iter().find(|&&y| y >= self.output_len()) {
            return Err(Error::IndexOutOfRange {
                index: y,
                size: self.output_len(),
            });
        }
        let lifted = self.inner.lift(dist)?;
        Ok(self.tuple_prob_lifted(lifted.mass(), tuple.values()))
    }

    /// [`TuplingMechanism::tuple_prob`] given the lifted distribution `A♯(λ)`.
    pub fn tuple_prob_lifted(&self, lifted: &[f64], tuple: &[usize]) -> f64 {
        let nu = self.dummy.mass();
        let len = tuple.len();
        // prefix[i] = Π_{j<i} ν[y_j]; suffix walks from the right.
        let mut prefix = vec![1.0; len + 1];
        for i in 0..len {
            prefix[i + 1] = prefix[i] * nu[tuple[i]];
        }
        let mut suffix = 1.0;
        let mut total = 0.0;
        for i in (0..len).rev() {
            total += lifted[tuple[i]] * prefix[i] * suffix;
            suffix *= nu[tuple[i]];
        }
        total / len as f64
    }

    /// `ln(Q(λ₀)[ȳ] / Q(λ₁)[ȳ])` from the two lifted distributions.
    ///
    /// The dummy factors cancel: with every `ν[y_j] > 0` the ratio is
    /// `Σ_i A♯(λ₀)[y_i]/ν[y_i]` over the same sum for `λ₁`; with exactly one
    /// zero-dummy-mass entry only that position can hold the real output.
    /// Returns `±∞` when one side is zero and NaN when both are.
    pub fn log_likelihood_ratio(&self, lifted0: &[f64], lifted1: &[f64], tuple: &[usize]) -> f64 {
        let nu = self.dummy.mass();
        let zeros: Vec<usize> = tuple.iter().copied().filter(|&y| nu[y] == 0.0).collect();
        let (num, den) = match zeros.len() {
            0 => tuple.iter().fold((0.0, 0.0), |(a, b), &y| {
                (a + lifted0[y] / nu[y], b + lifted1[y] / nu[y])
            }),
            1 => {
                let occurrences = tuple.iter().filter(|&&y| y == zeros[0]).count();
                if occurrences > 1 {
                    (0.0, 0.0)
                } else {
                    (lifted0[zeros[0]], lifted1[zeros[0]])
                }
            }
            _ => (0.0, 0.0),
        };
        log_ratio(num, den)
    }

    /// A quantity proportional to `Q(λ)[ȳ]` with a factor that depends on
    /// the tuple only, so it ranks attribute hypotheses without underflow.
    pub fn relative_likelihood(&self, lifted: &[f64], tuple: &[usize]) -> f64 {
        let nu = self.dummy.mass();
        if tuple.iter().all(|&y| nu[y] > 0.0) {
            tuple.iter().map(|&y| lifted[y] / nu[y]).sum()
        } else {
            self.tuple_prob_lifted(lifted, tuple)
        }
    }

    /// Total number of distinct output tuples, `|Y|^{k+1}`.
    pub fn tuple_space_size(&self) -> u128 {
        (self.output_len() as u128).saturating_pow((self.k + 1) as u32)
    }

    /// Every tuple in lexicographic order.
    pub fn enumerate_tuples(&self) -> Result<TupleIter> {
        let tuples = self.tuple_space_size();
        if tuples > EXACT_TUPLE_LIMIT {
            return Err(Error::InstanceTooLarge {
                tuples,
                limit: EXACT_TUPLE_LIMIT,
            });
        }
        Ok(TupleIter {
            base: self.output_len(),
            current: Some(vec![0; self.k + 1]),
        })
    }

    fn loss_space(&self) -> Result<&Arc<FiniteSpace>> {
        if same_space(self.inner.input_space(), self.inner.output_space()) {
            Ok(self.inner.input_space())
        } else {
            Err(Error::SpaceMismatch(
                "quality loss needs inputs and outputs in one space",
            ))
        }
    }
}

fn log_ratio(num: f64, den: f64) -> f64 {
    match (num > 0.0, den > 0.0) {
        (true, true) => math::ln(num / den),
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (false, false) => f64::NAN,
    }
}

/// Odometer over `Y^{k+1}`.
#[derive(Debug, Clone)]
pub struct TupleIter {
    base: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.base {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// Cached categorical samplers for repeated draws.
#[derive(Debug, Clone)]
pub struct TupleSampler<'a> {
    mechanism: &'a TuplingMechanism,
    rows: Vec<WeightedIndex<f64>>,
    dummy: WeightedIndex<f64>,
}

impl<'a> TupleSampler<'a> {
    fn new(mechanism: &'a TuplingMechanism) -> Self {
        let n = mechanism.inner.input_space().len();
        let rows = (0..n)
            .map(|x| WeightedIndex::new(mechanism.inner.row(x)).expect("channel rows are stochastic"))
            .collect();
        let dummy = WeightedIndex::new(mechanism.dummy.mass()).expect("dummy is a distribution");
        Self {
            mechanism,
            rows,
            dummy,
        }
    }

    /// Draws `s ~ A(x)`, then `k` dummies from `ν`, then the insertion
    /// position, and writes the tuple into `buf`.
    pub fn sample_into<R: Rng + ?Sized>(&self, x: usize, rng: &mut R, buf: &mut Vec<usize>) {
        buf.clear();
        let s = self.rows[x].sample(rng);
        for _ in 0..self.mechanism.k {
            buf.push(self.dummy.sample(rng));
        }
        let position = rng.random_range(0..=self.mechanism.k);
        buf.insert(position, s);
    }

    /// Draws `x ~ dist` first, then a tuple; returns `x`.
    pub fn sample_from_dist<R: Rng + ?Sized>(
        &self,
        inputs: &WeightedIndex<f64>,
        rng: &mut R,
        buf: &mut Vec<usize>,
    ) -> usize {
        let x = inputs.sample(rng);
        self.sample_into(x, rng, buf);
        x
    }
}

/// Sampler over the support of an input distribution.
pub fn input_sampler(dist: &ProbDist) -> WeightedIndex<f64> {
    WeightedIndex::new(dist.mass()).expect("distributions have positive total mass")
}

/// How to evaluate an expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: usize, stream: SeedStream },
}

/// Expected quality loss `Σ_x Σ_ȳ λ[x]·Q(x)[ȳ]·min_i d(x, y_i)`.
pub fn expected_loss(tp: &TuplingMechanism, dist: &ProbDist, mode: EvalMode) -> Result<Estimate> {
    let space = tp.loss_space()?;
    if !same_space(space, dist.space()) {
        return Err(Error::SpaceMismatch("loss input distribution"));
    }
    match mode {
        EvalMode::Exact => {
            let support = dist.support();
            let mut total = 0.0;
            for tuple in tp.enumerate_tuples()? {
                for &x in &support {
                    let q = tp.tuple_prob_lifted(tp.inner.row(x), &tuple);
                    if q == 0.0 {
                        continue;
                    }
                    let loss = tuple
                        .iter()
                        .map(|&y| space.distance(x, y))
                        .fold(f64::INFINITY, f64::min);
                    total += dist.get(x) * q * loss;
                }
            }
            Ok(Estimate {
                value: total,
                stderr: 0.0,
                samples: 0,
            })
        }
        EvalMode::MonteCarlo { samples, stream } => {
            if samples == 0 {
                return Err(Error::TooFewSamples { given: 0, min: 1 });
            }
            let sampler = tp.sampler();
            let inputs = input_sampler(dist);
            let mut rng: StreamRng = stream.rng();
            let mut buf = Vec::with_capacity(tp.k + 1);
            let mut acc = RunningMean::default();
            for _ in 0..samples {
                let x = sampler.sample_from_dist(&inputs, &mut rng, &mut buf);
                let loss = buf
                    .iter()
                    .map(|&y| space.distance(x, y))
                    .fold(f64::INFINITY, f64::min);
                acc.push(loss);
            }
            Ok(acc.finish())
        }
    }
}

/// Expected loss `Σ_x λ[x] Σ_y A(x)[y]·d(x, y)` of a plain channel over one space.
pub fn channel_expected_loss(channel: &Channel, dist: &ProbDist) -> Result<f64> {
    let space = channel.input_space();
    if !same_space(space, channel.output_space()) || !same_space(space, dist.space()) {
        return Err(Error::SpaceMismatch(
            "quality loss needs inputs and outputs in one space",
        ));
    }
    Ok(dist.expected_value(|x| {
        channel
            .row(x)
            .iter()
            .zip(space.distances_from(x))
            .map(|(p, d)| p * d)
            .sum()
    }))
}

/// Fraction of outputs `y` (uniform over `Y`) with `lifted[y] ≤ β`.
pub fn fraction_at_most(lifted: &[f64], beta: f64) -> f64 {
    let count = lifted.iter().filter(|&&p| p <= beta + BETA_TOL).count();
    count as f64 / lifted.len() as f64
}

/// Whether `λ` lies in `Λ_{β,η,A}`: at least a `1 − η` fraction of outputs
/// (drawn uniformly from `Y`) have `A♯(λ)[y] ≤ β`.
pub fn lambda_membership(channel: &Channel, dist: &ProbDist, beta: f64, eta: f64) -> Result<bool> {
    for (name, v) in [("beta", beta), ("eta", eta)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, "must lie in [0, 1]"));
        }
    }
    let lifted = channel.lift(dist)?;
    let n = lifted.len() as f64;
    let count = lifted.mass().iter().filter(|&&p| p <= beta + BETA_TOL).count() as f64;
    Ok(count >= (1.0 - eta) * n - 1e-9)
}

/// The dummy-count privacy bound `(ε_α, δ_α)` for uniform dummies.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DummyCountBound {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub epsilon_alpha: f64,
    pub delta_alpha: f64,
}

/// `ε_α = ln((k + (α+β)|Y|) / (k − α|Y|))`, `δ_α = 2e^{−2α²/(kβ²)} + η`,
/// valid for `0 < α < k/|Y|`.
pub fn dummy_count_bound(
    k: usize,
    outputs: usize,
    alpha: f64,
    beta: f64,
    eta: f64,
) -> Result<DummyCountBound> {
    check_bound_inputs(k, outputs, beta, eta)?;
    let (kf, yf) = (k as f64, outputs as f64);
    if !(alpha > 0.0 && alpha < kf / yf) {
        return Err(invalid("alpha", "must lie in (0, k/|Y|)"));
    }
    Ok(DummyCountBound {
        alpha,
        beta,
        eta,
        epsilon_alpha: math::ln((kf + (alpha + beta) * yf) / (kf - alpha * yf)),
        delta_alpha: 2.0 * math::exp(-2.0 * alpha * alpha / (kf * beta * beta)) + eta,
    })
}

fn check_bound_inputs(k: usize, outputs: usize, beta: f64, eta: f64) -> Result<()> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if outputs == 0 {
        return Err(invalid("outputs", "must be at least 1"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", "must lie in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", "must lie in [0, 1]"));
    }
    Ok(())
}

/// Smallest `ε_α` over `α` subject to `δ_α ≤ delta`, or `None` if no valid
/// `α` meets the target.
///
/// `ε_α` increases with `α` and `δ_α` decreases, so the optimum is the least
/// `α` meeting the δ constraint: `α* = β·sqrt(k·ln(2/(δ−η))/2)`.
pub fn minimize_dummy_count_bound(
    k: usize,
    outputs: usize,
    beta: f64,
    eta: f64,
    delta: f64,
) -> Result<Option<DummyCountBound>> {
    check_bound_inputs(k, outputs, beta, eta)?;
    let slack = delta - eta;
    if slack <= 0.0 {
        return Ok(None);
    }
    let kf = k as f64;
    let limit = kf / outputs as f64;
    let mut alpha = if slack >= 2.0 {
        0.0
    } else {
        beta * math::sqrt(kf * math::ln(2.0 / slack) / 2.0)
    };
    if alpha >= limit {
        return Ok(None);
    }
    if alpha <= 0.0 {
        alpha = limit * 1e-12;
    }
    let mut bound = dummy_count_bound(k, outputs, alpha, beta, eta)?;
    // Rounding in the closed form can overshoot the target by an ulp.
    while bound.delta_alpha > delta {
        alpha = alpha * (1.0 + 1e-15) + f64::MIN_POSITIVE;
        if alpha >= limit {
            return Ok(None);
        }
        bound = dummy_count_bound(k, outputs, alpha, beta, eta)?;
    }
    Ok(Some(bound))
}

/// Outcome of searching `(β, η)` for a distribution pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSearch {
    /// The `(β, η)` pair of the best bound, or the `η = 0` pair when no
    /// candidate meets the target.
    pub beta: f64,
    pub eta: f64,
    pub bound: Option<DummyCountBound>,
}

/// Best dummy-count bound for the pair at target `delta`.
///
/// Each candidate `β` is a lifted probability of either distribution; its
/// `η` is the largest fraction of outputs above `β`, so both distributions
/// lie in `Λ_{β,η,A}`. The candidate with the smallest minimized `ε_α` wins.
pub fn best_dummy_count_bound(
    tp: &TuplingMechanism,
    lambda0: &ProbDist,
    lambda1: &ProbDist,
    delta: f64,
) -> Result<BoundSearch> {
    if !tp.dummy_is_uniform() {
        return Err(Error::Unsupported(
            "the dummy-count bound assumes uniform dummies",
        ));
    }
    if tp.k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let l0 = tp.inner.lift(lambda0)?;
    let l1 = tp.inner.lift(lambda1)?;
    let mut candidates: Vec<f64> = l0
        .mass()
        .iter()
        .chain(l1.mass())
        .copied()
        .filter(|p| *p > 0.0)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let outputs = tp.output_len();
    let eta_for = |beta: f64| {
        let above0 = 1.0 - fraction_at_most(l0.mass(), beta);
        let above1 = 1.0 - fraction_at_most(l1.mass(), beta);
        above0.max(above1).clamp(0.0, 1.0)
    };
    let top = *candidates
        .last()
        .expect("lifted distributions have positive mass");
    let mut best = BoundSearch {
        beta: top.min(1.0),
        eta: 0.0,
        bound: None,
    };
    for &beta in candidates.iter().rev() {
        let beta = beta.min(1.0);
        let eta = eta_for(beta);
        if eta >= delta {
            break;
        }
        if let Some(b) = minimize_dummy_count_bound(tp.k, outputs, beta, eta, delta)? {
            let better = best.bound.is_none_or(|cur| b.epsilon_alpha < cur.epsilon_alpha);
            if better {
                best = BoundSearch {
                    beta,
                    eta,
                    bound: Some(b),
                };
            }
        }
    }
    Ok(best)
}
