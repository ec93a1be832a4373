// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::sync::Arc;

use distpriv_core::{Channel, FiniteSpace, ProbDist};
use proptest::prelude::*;

/// Nonnegative weights with at least one clearly positive entry; about a
/// quarter of the entries are exact zeros.
pub fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.01f64..1.0], n)
        .prop_filter("needs positive mass", |w| w.iter().any(|&v| v > 0.0))
}

/// Strictly positive weights.
pub fn positive_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n)
}

/// Planar points with pairwise distinct coordinates on a coarse lattice,
/// so distance ties are frequent.
pub fn lattice_points(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::btree_set((0u8..5, 0u8..5), n)
        .prop_map(|s| s.into_iter().map(|(x, y)| (f64::from(x), f64::from(y))).collect())
}

pub fn plane(points: &[(f64, f64)]) -> Arc<FiniteSpace> {
    let labels = (0..points.len()).map(|i| format!("p{i}")).collect();
    Arc::new(FiniteSpace::euclidean(labels, points).unwrap())
}

pub fn line(n: usize) -> Arc<FiniteSpace> {
    let coords: Vec<f64> = (0..n).map(|i| i as f64).collect();
    Arc::new(FiniteSpace::line(&coords).unwrap())
}

pub fn dist(space: &Arc<FiniteSpace>, w: &[f64]) -> ProbDist {
    ProbDist::from_weights(space.clone(), w).unwrap()
}

/// Channel whose rows are the normalized weight rows.
pub fn channel(space: &Arc<FiniteSpace>, rows: &[Vec<f64>]) -> Channel {
    let normalized: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.iter().map(|v| v / s).collect()
        })
        .collect();
    Channel::from_rows(space.clone(), space.clone(), &normalized).unwrap()
}
