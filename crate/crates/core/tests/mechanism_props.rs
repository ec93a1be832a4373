// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use distpriv_core::mechanisms::{
    exponential_mechanism, planar_gaussian_grid, planar_laplace_grid, randomized_response, restricted_laplace,
};
use distpriv_core::privacy::{dp_epsilon, xdp_epsilon};
use distpriv_core::transport::UtilityFunction;
use distpriv_core::{AdjacencyRelation, Extended};
use proptest::prelude::*;

#[test]
fn randomized_response_is_exactly_epsilon_dp() {
    for eps in [0.1, std::f64::consts::LN_2, 1.0, 2.0] {
        for n in [2, 3, 7] {
            let a = randomized_response(&line(n), eps).unwrap();
            let got = dp_epsilon(&a, &AdjacencyRelation::all_pairs(n), 0.0).unwrap();
            assert!((got.epsilon().finite().unwrap() - eps).abs() <= 1e-9);
        }
    }
}

#[test]
fn restricted_laplace_below_diameter_is_not_dp() {
    let s = line(5);
    for r in [0.0, 1.0, 2.5, 3.9] {
        let a = restricted_laplace(&s, 1.0, r).unwrap();
        let got = dp_epsilon(&a, &AdjacencyRelation::all_pairs(5), 0.0).unwrap();
        assert_eq!(got.epsilon(), Extended::Infinite, "r = {r}");
    }
    let full = restricted_laplace(&s, 1.0, 4.0).unwrap();
    assert!(dp_epsilon(&full, &AdjacencyRelation::all_pairs(5), 0.0)
        .unwrap()
        .epsilon()
        .is_finite());
}

proptest! {
    #[test]
    fn restricted_laplace_support_is_the_ball(pts in (2usize..8).prop_flat_map(lattice_points), eps in 0.0f64..5.0, r in 0.0f64..6.0) {
        let s = plane(&pts);
        let a = restricted_laplace(&s, eps, r).unwrap();
        for x in 0..s.len() {
            for y in 0..s.len() {
                prop_assert_eq!(a.prob(x, y) > 0.0, s.distance(x, y) <= r);
            }
        }
    }

    #[test]
    fn laplace_xdp_between_epsilon_and_twice(pts in (2usize..8).prop_flat_map(lattice_points), eps in 0.05f64..3.0) {
        let s = plane(&pts);
        let a = planar_laplace_grid(&s, eps).unwrap();
        let got = xdp_epsilon(&a, &s, 0.0).unwrap().epsilon().finite().unwrap();
        // Ratios are e^{ε·d} times a normalizer ratio in [e^{−ε·d}, e^{ε·d}];
        // the outputs y = x and y = x′ multiply to e^{2ε·d}, so one reaches e^{ε·d}.
        prop_assert!(got <= 2.0 * eps + 1e-9);
        prop_assert!(got >= eps - 1e-9);
    }

    #[test]
    fn constructed_channels_are_stochastic(pts in (2usize..8).prop_flat_map(lattice_points), eps in 0.0f64..4.0, sigma in 0.1f64..5.0) {
        let s = plane(&pts);
        let channels = [
            randomized_response(&s, eps).unwrap(),
            planar_laplace_grid(&s, eps).unwrap(),
            planar_gaussian_grid(&s, sigma).unwrap(),
            exponential_mechanism(&s, eps, &UtilityFunction::negated_distance(&s)).unwrap(),
        ];
        for a in &channels {
            for x in 0..s.len() {
                prop_assert!((a.row(x).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                prop_assert!(a.row(x).iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn exponential_mechanism_is_epsilon_dp(pts in (2usize..8).prop_flat_map(lattice_points), eps in 0.01f64..4.0) {
        let s = plane(&pts);
        let a = exponential_mechanism(&s, eps, &UtilityFunction::negated_distance(&s)).unwrap();
        let got = dp_epsilon(&a, &AdjacencyRelation::all_pairs(s.len()), 0.0).unwrap();
        prop_assert!(got.epsilon().finite().unwrap() <= eps + 1e-9);
    }
}
