// SPDX-License-Identifier: Apache-2.0

//! Finite probability spaces, distributions over them, channels, and lifting.
//!
//! Elements are addressed by dense index; labels are metadata. All values are
//! immutable after construction, and spaces are shared through [`Arc`].

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::{METRIC_TOL, PROB_TOL};

/// An indexed finite set with a pairwise metric.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    metric: Vec<f64>,
}

impl FiniteSpace {
    /// Builds a space from labels and a row-major `n × n` distance matrix.
    ///
    /// The matrix must have a zero diagonal, be symmetric and nonnegative, and
    /// satisfy the triangle inequality up to a relative tolerance of 1e-9.
    pub fn new(labels: Vec<String>, metric: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidMetric("space must be nonempty".into()));
        }
        if metric.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "expected {} entries, got {}",
                n * n,
                metric.len()
            )));
        }
        check_metric_shape(n, &metric)?;
        for i in 0..n {
            for j in 0..n {
                let dij = metric[i * n + j];
                for k in 0..n {
                    let via = metric[i * n + k] + metric[k * n + j];
                    if dij > via + METRIC_TOL * via.max(1.0) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails: d({i},{j}) = {dij} > d({i},{k}) + d({k},{j}) = {via}"
                        )));
                    }
                }
            }
        }
        Ok(Self { labels, metric })
    }

    /// Builds a space of planar points under the Euclidean metric.
    ///
    /// The triangle inequality holds by construction, so only the cheap
    /// shape checks run.
    pub fn euclidean(labels: Vec<String>, points: &[(f64, f64)]) -> Result<Self> {
        let n = labels.len();
        if n == 0 || points.len() != n {
            return Err(Error::InvalidMetric(format!(
                "need one point per label ({} labels, {} points)",
                n,
                points.len()
            )));
        }
        let mut metric = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = math::hypot(points[i].0 - points[j].0, points[i].1 - points[j].1);
                metric[i * n + j] = d;
                metric[j * n + i] = d;
            }
        }
        check_metric_shape(n, &metric)?;
        Ok(Self { labels, metric })
    }

    /// Points `0..n` on a line at the given coordinates, labelled by index.
    pub fn line(coords: &[f64]) -> Result<Self> {
        let labels = (0..coords.len()).map(|i| format!("{i}")).collect();
        let points: Vec<(f64, f64)> = coords.iter().map(|&c| (c, 0.0)).collect();
        Self::euclidean(labels, &points)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric[i * self.len() + j]
    }

    /// Row `i` of the distance matrix.
    pub fn distances_from(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.metric[i * n..(i + 1) * n]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.metric.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.len(),
            })
        }
    }
}

fn check_metric_shape(n: usize, metric: &[f64]) -> Result<()> {
    for i in 0..n {
        if metric[i * n + i] != 0.0 {
            return Err(Error::InvalidMetric(format!("d({i},{i}) must be 0")));
        }
        for j in 0..n {
            let d = metric[i * n + j];
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "d({i},{j}) = {d} is not a finite nonnegative value"
                )));
            }
            if d != metric[j * n + i] {
                return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
            }
        }
    }
    Ok(())
}

pub(crate) fn same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A probability vector over a [`FiniteSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    space: Arc<FiniteSpace>,
    mass: Vec<f64>,
}

impl ProbDist {
    /// Entries must lie in `[0, 1]` and sum to 1 within 1e-12.
    pub fn new(space: Arc<FiniteSpace>, mass: Vec<f64>) -> Result<Self> {
        validate_prob_vector(&mass, space.len()).map_err(Error::InvalidDistribution)?;
        Ok(Self { space, mass })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(space: Arc<FiniteSpace>, weights: &[f64]) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} weights, got {}",
                space.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        let mass = weights.iter().map(|w| w / total).collect();
        Self::new(space, mass)
    }

    pub fn uniform(space: Arc<FiniteSpace>) -> Self {
        let n = space.len();
        Self {
            mass: vec![1.0 / n as f64; n],
            space,
        }
    }

    /// The point distribution concentrated on `x`.
    pub fn point(space: Arc<FiniteSpace>, x: usize) -> Result<Self> {
        space.check_index(x)?;
        let mut mass = vec![0.0; space.len()];
        mass[x] = 1.0;
        Ok(Self { space, mass })
    }

    /// `t·a + (1 − t)·b`.
    pub fn mixture(t: f64, a: &ProbDist, b: &ProbDist) -> Result<Self> {
        if !same_space(&a.space, &b.space) {
            return Err(Error::SpaceMismatch("mixture components"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(crate::error::invalid("t", "must lie in [0, 1]"));
        }
        let mass = a
            .mass
            .iter()
            .zip(&b.mass)
            .map(|(x, y)| t * x + (1.0 - t) * y)
            .collect();
        Self::new(a.space.clone(), mass)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn get(&self, x: usize) -> f64 {
        self.mass[x]
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Indices with positive mass.
    pub fn support(&self) -> Vec<usize> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_mass(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_mass(&self) -> f64 {
        self.mass.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ_x λ[x]·f(x)`.
    pub fn expected_value<F: FnMut(usize) -> f64>(&self, mut f: F) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(x, m)| m * f(x))
            .sum()
    }

    /// Total-variation distance to `other`.
    pub fn total_variation(&self, other: &ProbDist) -> Result<f64> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch("total variation"));
        }
        Ok(0.5
            * self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

/// Free-function form of [`ProbDist::point`].
pub fn point_dist(space: &Arc<FiniteSpace>, x: usize) -> Result<ProbDist> {
    ProbDist::point(space.clone(), x)
}

/// Free-function form of [`ProbDist::expected_value`].
pub fn expected_value<F: FnMut(usize) -> f64>(dist: &ProbDist, f: F) -> f64 {
    dist.expected_value(f)
}

fn validate_prob_vector(mass: &[f64], n: usize) -> core::result::Result<(), String> {
    if mass.len() != n {
        return Err(format!("expected {n} entries, got {}", mass.len()));
    }
    let mut total = 0.0;
    for (i, &m) in mass.iter().enumerate() {
        if !(0.0..=1.0 + PROB_TOL).contains(&m) {
            return Err(format!("entry {i} = {m} outside [0, 1]"));
        }
        total += m;
    }
    if (total - 1.0).abs() > PROB_TOL {
        return Err(format!("entries sum to {total}, not 1"));
    }
    Ok(())
}

/// A row-stochastic matrix from an input space to an output space.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input: Arc<FiniteSpace>,
    output: Arc<FiniteSpace>,
    rows: Vec<f64>,
}

impl Channel {
    /// `rows` is row-major `|input| × |output|`; every row must be a valid
    /// probability vector.
    pub fn new(input: Arc<FiniteSpace>, output: Arc<FiniteSpace>, rows: Vec<f64>) -> Result<Self> {
        let (n, m) = (input.len(), output.len());
        if rows.len() != n * m {
            return Err(Error::InvalidChannel(format!(
                "expected {}×{} entries, got {}",
                n,
                m,
                rows.len()
            )));
        }
        for x in 0..n {
            validate_prob_vector(&rows[x * m..(x + 1) * m], m)
                .map_err(|e| Error::InvalidChannel(format!("row {x}: {e}")))?;
        }
        Ok(Self { input, output, rows })
    }

    pub fn from_rows(input: Arc<FiniteSpace>, output: Arc<FiniteSpace>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::InvalidChannel(format!(
                "expected {} rows, got {}",
                input.len(),
                rows.len()
            )));
        }
        Self::new(input, output, rows.concat())
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let n = space.len();
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Self {
            input: space.clone(),
            output: space,
            rows,
        }
    }

    pub fn input_space(&self) -> &Arc<FiniteSpace> {
        &self.input
    }

    pub fn output_space(&self) -> &Arc<FiniteSpace> {
        &self.output
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let m = self.output.len();
        &self.rows[x * m..(x + 1) * m]
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x * self.output.len() + y]
    }

    /// The output distribution `A♯(λ) = Σ_x λ[x]·A(x)`.
    pub fn lift(&self, dist: &ProbDist) -> Result<ProbDist> {
        if !same_space(&self.input, &dist.space) {
            return Err(Error::SpaceMismatch("lifting input"));
        }
        Ok(ProbDist {
            space: self.output.clone(),
            mass: self.lift_raw(dist.mass()),
        })
    }

    pub(crate) fn lift_raw(&self, mass: &[f64]) -> Vec<f64> {
        let m = self.output.len();
        let mut out = vec![0.0; m];
        for (x, &p) in mass.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(x)) {
                *o += p * a;
            }
        }
        // Each output is a convex combination; clamp away accumulation drift.
        for o in out.iter_mut() {
            *o = o.min(1.0);
        }
        out
    }
}

/// Free-function form of [`Channel::lift`].
pub fn lift_channel(channel: &Channel, dist: &ProbDist) -> Result<ProbDist> {
    channel.lift(dist)
}

/// A set of ordered index pairs over one space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyRelation {
    size: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl AdjacencyRelation {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(size: usize, pairs: I) -> Result<Self> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        for &(a, b) in &pairs {
            let index = a.max(b);
            if index >= size {
                return Err(Error::IndexOutOfRange { index, size });
            }
        }
        Ok(Self { size, pairs })
    }

    /// Every ordered pair, including the diagonal.
    pub fn all_pairs(size: usize) -> Self {
        Self {
            size,
            pairs: (0..size).flat_map(|a| (0..size).map(move |b| (a, b))).collect(),
        }
    }

    pub fn diagonal(size: usize) -> Self {
        Self {
            size,
            pairs: (0..size).map(|a| (a, a)).collect(),
        }
    }

    /// Closure under swapping each pair.
    pub fn symmetric_closure(&self) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.extend(self.pairs.iter().map(|&(a, b)| (b, a)));
        Self {
            size: self.size,
            pairs,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `|Φ|`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}
