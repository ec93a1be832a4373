// SPDX-License-Identifier: Apache-2.0

//! Couplings, the ∞-Wasserstein distance, and lifted adjacency relations.
//!
//! Transport feasibility is decided by max-flow on the bipartite graph between
//! the two supports. Masses are quantized to integers at a scale of 10¹² with
//! largest-remainder rounding, so both sides carry exactly the same total. A
//! flow that misses at most one unit per support point counts as feasible,
//! which absorbs the independent rounding of the two sides.

mod flow;

pub use flow::Dinic;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{same_space, AdjacencyRelation, FiniteSpace, ProbDist};

/// Integer units per unit of probability mass.
pub const MASS_SCALE: u64 = 1_000_000_000_000;

/// Tolerance on coupling marginals.
pub const MARGINAL_TOL: f64 = 1e-10;

/// A joint distribution with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    left: ProbDist,
    right: ProbDist,
    joint: Vec<f64>,
}

impl Coupling {
    /// `joint` is row-major `|left| × |right|`.
    pub fn new(left: ProbDist, right: ProbDist, joint: Vec<f64>) -> Result<Self> {
        let (n0, n1) = (left.len(), right.len());
        if joint.len() != n0 * n1 {
            return Err(Error::InvalidDistribution(format!(
                "coupling needs {}×{} entries, got {}",
                n0,
                n1,
                joint.len()
            )));
        }
        if joint.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution(
                "coupling entries must be nonnegative".into(),
            ));
        }
        for i in 0..n0 {
            let row: f64 = joint[i * n1..(i + 1) * n1].iter().sum();
            if (row - left.get(i)).abs() > MARGINAL_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "row {i} sums to {row}, expected {}",
                    left.get(i)
                )));
            }
        }
        for j in 0..n1 {
            let col: f64 = (0..n0).map(|i| joint[i * n1 + j]).sum();
            if (col - right.get(j)).abs() > MARGINAL_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "column {j} sums to {col}, expected {}",
                    right.get(j)
                )));
            }
        }
        Ok(Self { left, right, joint })
    }

    pub fn left(&self) -> &ProbDist {
        &self.left
    }

    pub fn right(&self) -> &ProbDist {
        &self.right
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.right.len() + j]
    }

    /// Pairs carrying positive mass.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let n1 = self.right.len();
        self.joint
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(k, _)| (k / n1, k % n1))
            .collect()
    }

    /// Largest distance moved on the support.
    pub fn max_move(&self, space: &FiniteSpace) -> f64 {
        self.support()
            .into_iter()
            .map(|(i, j)| space.distance(i, j))
            .fold(0.0, f64::max)
    }
}

/// A utility table `u(x, y)` over `X × Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityFunction {
    inputs: usize,
    outputs: usize,
    table: Vec<f64>,
}

impl UtilityFunction {
    pub fn new(inputs: usize, outputs: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != inputs * outputs || table.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::invalid(
                "utility",
                format!("need {} finite entries", inputs * outputs),
            ));
        }
        Ok(Self {
            inputs,
            outputs,
            table,
        })
    }

    /// `u(x, y) = −d(x, y)`.
    pub fn negated_distance(space: &FiniteSpace) -> Self {
        let n = space.len();
        let table = (0..n)
            .flat_map(|x| space.distances_from(x).iter().map(|d| -d))
            .collect();
        Self {
            inputs: n,
            outputs: n,
            table,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.table[x * self.outputs..(x + 1) * self.outputs]
    }
}

/// `d_u(x, x′) = max_y |u(x, y) − u(x′, y)|`.
pub fn utility_distance(u: &UtilityFunction, x: usize, x_prime: usize) -> Result<f64> {
    for i in [x, x_prime] {
        if i >= u.inputs {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: u.inputs,
            });
        }
    }
    Ok(u.row(x)
        .iter()
        .zip(u.row(x_prime))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Largest utility distance over the pairs of `phi`.
pub fn sensitivity(u: &UtilityFunction, phi: &AdjacencyRelation) -> Result<f64> {
    if phi.is_empty() {
        return Err(Error::EmptyRelation);
    }
    let mut best = 0.0f64;
    for (a, b) in phi.iter() {
        best = best.max(utility_distance(u, a, b)?);
    }
    Ok(best)
}

/// Largest distance between the two supports.
pub fn diameter(lambda0: &ProbDist, lambda1: &ProbDist) -> Result<f64> {
    check_pair(lambda0, lambda1)?;
    let space = lambda0.space();
    let s1 = lambda1.support();
    Ok(lambda0
        .support()
        .into_iter()
        .flat_map(|i| s1.iter().map(move |&j| (i, j)))
        .map(|(i, j)| space.distance(i, j))
        .fold(0.0, f64::max))
}

/// The ∞-Wasserstein distance and a coupling attaining it.
pub fn wasserstein_inf(lambda0: &ProbDist, lambda1: &ProbDist) -> Result<(f64, Coupling)> {
    check_pair(lambda0, lambda1)?;
    let space = lambda0.space().clone();
    let problem = TransportProblem::new(lambda0, lambda1);

    let mut thresholds: Vec<f64> = problem
        .left
        .iter()
        .flat_map(|&(i, _)| problem.right.iter().map(move |&(j, _)| (i, j)))
        .map(|(i, j)| space.distance(i, j))
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    // The largest threshold admits every support pair, which is always feasible.
    let (mut lo, mut hi) = (0usize, thresholds.len() - 1);
    let mut witness = problem
        .solve(|i, j| space.distance(i, j) <= thresholds[hi])
        .expect("complete bipartite transport is feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        let t = thresholds[mid];
        match problem.solve(|i, j| space.distance(i, j) <= t) {
            Some(w) => {
                hi = mid;
                witness = w;
            }
            None => lo = mid + 1,
        }
    }
    // `witness` was always produced at `thresholds[hi]`.
    let t = thresholds[hi];
    let coupling = problem.to_coupling(lambda0, lambda1, &witness)?;
    Ok((t, coupling))
}

/// Whether some coupling of the pair is supported inside `phi`; returns it.
pub fn in_lifted_relation(
    lambda0: &ProbDist,
    lambda1: &ProbDist,
    phi: &AdjacencyRelation,
) -> Result<Option<Coupling>> {
    check_pair(lambda0, lambda1)?;
    check_relation(lambda0, phi)?;
    let problem = TransportProblem::new(lambda0, lambda1);
    match problem.solve(|i, j| phi.contains(i, j)) {
        Some(flow) => Ok(Some(problem.to_coupling(lambda0, lambda1, &flow)?)),
        None => Ok(None),
    }
}

/// Whether some coupling supported inside `phi` also attains the ∞-Wasserstein
/// distance of the pair.
pub fn in_lifted_inf_relation(
    lambda0: &ProbDist,
    lambda1: &ProbDist,
    phi: &AdjacencyRelation,
) -> Result<Option<Coupling>> {
    check_relation(lambda0, phi)?;
    let (w, _) = wasserstein_inf(lambda0, lambda1)?;
    let space = lambda0.space().clone();
    let problem = TransportProblem::new(lambda0, lambda1);
    match problem.solve(|i, j| phi.contains(i, j) && space.distance(i, j) <= w) {
        Some(flow) => Ok(Some(problem.to_coupling(lambda0, lambda1, &flow)?)),
        None => Ok(None),
    }
}

fn check_pair(lambda0: &ProbDist, lambda1: &ProbDist) -> Result<()> {
    if same_space(lambda0.space(), lambda1.space()) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch("transport endpoints"))
    }
}

fn check_relation(lambda: &ProbDist, phi: &AdjacencyRelation) -> Result<()> {
    if phi.size() == lambda.len() {
        Ok(())
    } else {
        Err(Error::SpaceMismatch("adjacency relation"))
    }
}

/// Quantizes `mass` to integers summing to exactly [`MASS_SCALE`].
///
/// Largest-remainder rounding, then every positive entry is raised to at least
/// one unit (taken from the largest entry) so supports are preserved.
pub fn quantize(mass: &[f64]) -> Vec<u64> {
    let total: f64 = mass.iter().sum();
    let scale = MASS_SCALE as f64;
    let mut units: Vec<u64> = Vec::with_capacity(mass.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(mass.len());
    for (i, &m) in mass.iter().enumerate() {
        let exact = m / total * scale;
        let base = crate::math::floor(exact);
        units.push(base as u64);
        remainders.push((exact - base, i));
    }
    let assigned: u64 = units.iter().sum();
    let mut missing = MASS_SCALE.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().cycle().take(mass.len() * 2) {
        if missing == 0 {
            break;
        }
        if mass[i] > 0.0 {
            units[i] += 1;
            missing -= 1;
        }
    }
    for i in 0..mass.len() {
        if mass[i] > 0.0 && units[i] == 0 {
            let donor = (0..mass.len())
                .max_by_key(|&k| (units[k], usize::MAX - k))
                .unwrap();
            units[donor] -= 1;
            units[i] = 1;
        }
    }
    units
}

/// A bipartite transport instance over the two supports.
struct TransportProblem {
    left: Vec<(usize, u64)>,
    right: Vec<(usize, u64)>,
}

/// Flow on each support pair as `(i, j, units)`.
type FlowPlan = Vec<(usize, usize, u64)>;

impl TransportProblem {
    fn new(lambda0: &ProbDist, lambda1: &ProbDist) -> Self {
        let side = |d: &ProbDist| -> Vec<(usize, u64)> {
            quantize(d.mass())
                .into_iter()
                .enumerate()
                .filter(|(_, u)| *u > 0)
                .collect()
        };
        Self {
            left: side(lambda0),
            right: side(lambda1),
        }
    }

    /// Routes all mass using only allowed pairs, up to the rounding slack,
    /// or `None` if impossible.
    fn solve<F: Fn(usize, usize) -> bool>(&self, allowed: F) -> Option<FlowPlan> {
        let (a, b) = (self.left.len(), self.right.len());
        let source = a + b;
        let sink = source + 1;
        let mut graph = Dinic::new(a + b + 2);
        for (li, &(_, units)) in self.left.iter().enumerate() {
            graph.add_arc(source, li, units);
        }
        for (ri, &(_, units)) in self.right.iter().enumerate() {
            graph.add_arc(a + ri, sink, units);
        }
        let mut arcs = Vec::new();
        for (li, &(i, _)) in self.left.iter().enumerate() {
            for (ri, &(j, _)) in self.right.iter().enumerate() {
                if allowed(i, j) {
                    arcs.push((i, j, graph.add_arc(li, a + ri, MASS_SCALE)));
                }
            }
        }
        // Each side is rounded on its own, so up to one unit per support
        // point may be unroutable even when the real instance is feasible.
        let slack = (a + b) as u64;
        if graph.max_flow(source, sink) + slack < MASS_SCALE {
            return None;
        }
        Some(
            arcs.into_iter()
                .map(|(i, j, h)| (i, j, graph.flow_on(h)))
                .filter(|&(_, _, f)| f > 0)
                .collect(),
        )
    }

    fn to_coupling(&self, lambda0: &ProbDist, lambda1: &ProbDist, plan: &FlowPlan) -> Result<Coupling> {
        let n1 = lambda1.len();
        let mut joint = vec![0.0; lambda0.len() * n1];
        for &(i, j, units) in plan {
            joint[i * n1 + j] = units as f64 / MASS_SCALE as f64;
        }
        Coupling::new(lambda0.clone(), lambda1.clone(), joint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;

    fn three_point_pair() -> (ProbDist, ProbDist) {
        let s = Arc::new(FiniteSpace::line(&[1.0, 2.0, 3.0]).unwrap());
        (
            ProbDist::new(s.clone(), vec![0.2, 0.5, 0.3]).unwrap(),
            ProbDist::new(s, vec![0.3, 0.2, 0.5]).unwrap(),
        )
    }

    #[test]
    fn three_point_distance_and_diameter() {
        let (a, b) = three_point_pair();
        let (w, gamma) = wasserstein_inf(&a, &b).unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(gamma.max_move(a.space()), 1.0);
        assert_eq!(diameter(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn identical_and_point_distributions() {
        let (a, _) = three_point_pair();
        let (w, gamma) = wasserstein_inf(&a, &a).unwrap();
        assert_eq!(w, 0.0);
        assert!(gamma.support().iter().all(|(i, j)| i == j));
        let s = a.space().clone();
        let p0 = ProbDist::point(s.clone(), 0).unwrap();
        let p2 = ProbDist::point(s, 2).unwrap();
        let (w, gamma) = wasserstein_inf(&p0, &p2).unwrap();
        assert_eq!(w, 2.0);
        assert_eq!(gamma.support(), vec![(0, 2)]);
        assert_eq!(diameter(&p0, &p2).unwrap(), 2.0);
    }

    #[test]
    fn lifted_relation_examples() {
        let (a, b) = three_point_pair();
        assert!(in_lifted_relation(&a, &b, &AdjacencyRelation::all_pairs(3))
            .unwrap()
            .is_some());
        assert!(in_lifted_relation(&a, &b, &AdjacencyRelation::diagonal(3))
            .unwrap()
            .is_none());
        // Indices 0,1,2 stand for the points 1,2,3.
        let phi = AdjacencyRelation::new(3, [(0, 0), (1, 0), (1, 1), (1, 2), (2, 2)]).unwrap();
        let gamma = in_lifted_relation(&a, &b, &phi).unwrap().unwrap();
        assert!(gamma.support().iter().all(|&(i, j)| phi.contains(i, j)));
        // The only coupling supported in this relation.
        for (i, j, v) in [(0, 0, 0.2), (1, 0, 0.1), (1, 1, 0.2), (1, 2, 0.2), (2, 2, 0.3)] {
            assert!((gamma.get(i, j) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn lifted_inf_relation_examples() {
        let (a, b) = three_point_pair();
        assert!(in_lifted_inf_relation(&a, &a, &AdjacencyRelation::diagonal(3))
            .unwrap()
            .is_some());
        assert!(in_lifted_inf_relation(&a, &b, &AdjacencyRelation::all_pairs(3))
            .unwrap()
            .is_some());
        // Two points at distance 1: λ₀ = η₀, λ₁ = (½, ½). W∞ = 1 and every
        // coupling must move mass 0 → 1, so removing (0, 1) breaks membership.
        let s = Arc::new(FiniteSpace::line(&[0.0, 1.0]).unwrap());
        let p = ProbDist::point(s.clone(), 0).unwrap();
        let h = ProbDist::new(s, vec![0.5, 0.5]).unwrap();
        let phi = AdjacencyRelation::new(2, [(0, 0), (1, 1), (1, 0)]).unwrap();
        assert!(in_lifted_inf_relation(&p, &h, &phi).unwrap().is_none());
    }

    #[test]
    fn utility_distance_examples() {
        let s = FiniteSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let u = UtilityFunction::negated_distance(&s);
        assert_eq!(utility_distance(&u, 1, 1).unwrap(), 0.0);
        assert_eq!(utility_distance(&u, 0, 2).unwrap(), 2.0);
        assert_eq!(utility_distance(&u, 2, 0).unwrap(), 2.0);
        assert_eq!(sensitivity(&u, &AdjacencyRelation::diagonal(3)).unwrap(), 0.0);
        assert_eq!(sensitivity(&u, &AdjacencyRelation::all_pairs(3)).unwrap(), 2.0);
        let single = AdjacencyRelation::new(3, [(0, 1)]).unwrap();
        assert_eq!(sensitivity(&u, &single).unwrap(), 1.0);
        let empty = AdjacencyRelation::new(3, []).unwrap();
        assert_eq!(sensitivity(&u, &empty), Err(Error::EmptyRelation));
    }

    #[test]
    fn quantization_preserves_total_and_support() {
        let q = quantize(&[0.1, 0.2, 0.7]);
        assert_eq!(q.iter().sum::<u64>(), MASS_SCALE);
        let q = quantize(&[1e-15, 0.5, 0.5 - 1e-15]);
        assert_eq!(q.iter().sum::<u64>(), MASS_SCALE);
        assert!(q[0] >= 1);
        let third = 1.0 / 3.0;
        let q = quantize(&[third, third, third]);
        assert_eq!(q.iter().sum::<u64>(), MASS_SCALE);
    }
}
