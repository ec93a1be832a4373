// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use distpriv_core::{Channel, ProbDist};
use proptest::prelude::*;

fn setup() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, f64)> {
    (2usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(weights(n), n),
            weights(n),
            weights(n),
            0.0f64..=1.0,
        )
    })
}

/// Doubly stochastic rows as a mixture of permutation matrices.
fn doubly_stochastic() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| {
        let perm = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
        (prop::collection::vec((perm, 0.01f64..1.0), 1..4), weights(n)).prop_map(move |(parts, w)| {
            let total: f64 = parts.iter().map(|(_, c)| c).sum();
            let mut rows = vec![vec![0.0; n]; n];
            for (p, c) in &parts {
                for (x, &y) in p.iter().enumerate() {
                    rows[x][y] += c / total;
                }
            }
            (rows, w)
        })
    })
}

#[test]
fn extreme_mass_bound_needs_unit_column_sums() {
    // Both rows put all mass on output 0, so the lifted mass there is 1.
    let s = line(2);
    let a = channel(&s, &[vec![1.0, 0.0], vec![1.0, 0.0]]);
    let l = ProbDist::uniform(s);
    assert_eq!(a.lift(&l).unwrap().get(0), 1.0);
    assert!(l.max_mass() < 1.0);
}

proptest! {
    #[test]
    fn lifted_mass_between_extreme_input_masses((rows, w) in doubly_stochastic()) {
        let s = line(w.len());
        let a = Channel::from_rows(s.clone(), s.clone(), &rows).unwrap();
        let l = dist(&s, &w);
        let lifted = a.lift(&l).unwrap();
        let (lo, hi) = (l.min_mass(), l.max_mass());
        for &p in lifted.mass() {
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12, "{p} not in [{lo}, {hi}]");
        }
    }

    #[test]
    fn lifting_is_affine((rows, w0, w1, t) in setup()) {
        let s = line(w0.len());
        let a = channel(&s, &rows);
        let (l0, l1) = (dist(&s, &w0), dist(&s, &w1));
        let mixed = a.lift(&ProbDist::mixture(t, &l0, &l1).unwrap()).unwrap();
        let (a0, a1) = (a.lift(&l0).unwrap(), a.lift(&l1).unwrap());
        for y in 0..s.len() {
            let want = t * a0.get(y) + (1.0 - t) * a1.get(y);
            prop_assert!((mixed.get(y) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn identity_lift_is_exact((_, w, _, _) in setup()) {
        let s = line(w.len());
        let l = dist(&s, &w);
        prop_assert_eq!(Channel::identity(s).lift(&l).unwrap(), l);
    }
}
