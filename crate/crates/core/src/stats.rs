// SPDX-License-Identifier: Apache-2.0

//! Sample means, standard errors, and order-statistic quantiles.

use alloc::vec::Vec;

use crate::math;

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMean {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn finish(&self) -> Estimate {
        let stderr = if self.n > 1 {
            math::sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
        } else {
            0.0
        };
        Estimate {
            value: self.mean,
            stderr,
            samples: self.n,
        }
    }
}

/// Rank (0-based) of the empirical `q`-quantile: the smallest sample `v` with
/// `F_n(v) ≥ q`.
pub fn quantile_rank(n: usize, q: f64) -> usize {
    let r = math::ceil(q * n as f64 - 1e-9) as i64 - 1;
    r.clamp(0, n as i64 - 1) as usize
}

/// Empirical `q`-quantile of ascending `sorted` with a distribution-free
/// standard error from the binomial spread of the order-statistic rank.
///
/// Infinite samples are allowed; the standard error is infinite if the
/// spread window touches one.
pub fn quantile_with_stderr(sorted: &[f64], q: f64) -> (f64, f64) {
    let n = sorted.len();
    let rank = quantile_rank(n, q);
    let spread = math::ceil(math::sqrt(n as f64 * q * (1.0 - q))) as usize;
    let lo = rank.saturating_sub(spread.max(1));
    let hi = (rank + spread.max(1)).min(n - 1);
    let se = (sorted[hi] - sorted[lo]) / 2.0;
    (sorted[rank], if se.is_nan() { f64::INFINITY } else { se })
}

/// Sorts ascending with NaN-free total order.
pub fn sort_samples(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}
