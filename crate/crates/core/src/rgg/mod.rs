//! Geometric graphs, monotone properties and probability estimation.

mod graph;
mod property;

pub use graph::{Graph, UnionFind};
pub use property::MonotoneProperty;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::stats::Estimate;
use crate::rng::{stream, Stream};
use crate::spaces::{SpaceDescriptor, SpacePoint};

/// An ordered tuple of points of one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    space: SpaceDescriptor,
    points: Vec<SpacePoint>,
}

impl Configuration {
    pub fn new(space: SpaceDescriptor, points: Vec<SpacePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::usage("a configuration needs at least one point"));
        }
        if let Some(p) = points.iter().find(|p| !space.contains(p)) {
            return Err(Error::SpaceMismatch { expected: space.to_string(), got: p.kind_name().into() });
        }
        Ok(Configuration { space, points })
    }

    pub fn sample(space: SpaceDescriptor, n: usize, rng: &mut Stream) -> Self {
        assert!(n >= 1);
        Configuration { space, points: (0..n).map(|_| space.sample(rng)).collect() }
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn points(&self) -> &[SpacePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pairwise distances `d(x_i, x_j)` for `i < j`, row by row.
    pub fn pair_distances(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.space.distance_unchecked(&self.points[i], &self.points[j]));
            }
        }
        out
    }

    /// The configuration with points reordered by `perm` (point `i` moves to `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut pts = self.points.clone();
        for (i, &p) in perm.iter().enumerate() {
            pts[p] = self.points[i].clone();
        }
        Configuration { space: self.space, points: pts }
    }
}

/// The graph joining `i` and `j` when `d(x_i, x_j) <= r`.
pub fn build_graph(config: &Configuration, r: f64) -> Graph {
    let n = config.len();
    let mut g = Graph::empty(n);
    let pts = config.points();
    for i in 0..n {
        for j in i + 1..n {
            if config.space.distance_unchecked(&pts[i], &pts[j]) <= r {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Graph at radius `r` from precomputed [`Configuration::pair_distances`].
pub fn graph_from_distances(n: usize, dists: &[f64], r: f64) -> Graph {
    let mut g = Graph::empty(n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if dists[k] <= r {
                g.add_edge(i, j);
            }
            k += 1;
        }
    }
    g
}

/// Estimates `P(G(n, r) in F)` from `trials` independent configurations.
/// Trial `i` draws from stream `i` of `seed`, so the result does not depend
/// on the worker count.
pub fn estimate_probability(
    space: SpaceDescriptor,
    n: usize,
    r: f64,
    property: &MonotoneProperty,
    trials: u64,
    seed: u64,
) -> Estimate {
    estimate_curve(space, n, &[r], property, trials, seed).remove(0)
}

/// One estimate per radius, all radii evaluated on the same configurations.
pub fn estimate_curve(
    space: SpaceDescriptor,
    n: usize,
    radii: &[f64],
    property: &MonotoneProperty,
    trials: u64,
    seed: u64,
) -> Vec<Estimate> {
    assert!(trials >= 1, "need at least one trial");
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t);
            let config = Configuration::sample(space, n, &mut rng);
            let dists = config.pair_distances();
            radii.iter().map(|&r| property.evaluate(&graph_from_distances(n, &dists, r)) as u64).collect::<Vec<_>>()
        })
        .reduce(|| vec![0; radii.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    counts.into_iter().map(|c| Estimate::from_counts(c, trials, seed)).collect()
}

/// Bisection for the radius at which the property probability reaches `target`.
///
/// Every step reuses the same `trials_per_step` configurations, so the
/// estimated probability is exactly nondecreasing in the radius.
pub fn find_threshold_radius(
    space: SpaceDescriptor,
    n: usize,
    property: &MonotoneProperty,
    target: f64,
    tol: f64,
    trials_per_step: u64,
    seed: u64,
) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::usage(format!("target {target} outside (0, 1]")));
    }
    if tol <= 0.0 {
        return Err(Error::usage("tolerance must be positive"));
    }
    let diameter = space.diameter();
    let ends = estimate_curve(space, n, &[0.0, diameter], property, trials_per_step, seed);
    if ends[0].value >= target || ends[1].value < target {
        return Err(Error::NonBracketing { low: ends[0].value, high: ends[1].value, diameter });
    }
    let (mut lo, mut hi) = (0.0, diameter);
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if estimate_probability(space, n, mid, property, trials_per_step, seed).value >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::TorusPoint;

    fn torus1(xs: &[f64]) -> Configuration {
        let pts = xs.iter().map(|&x| SpacePoint::Torus(TorusPoint::from_reals(&[x]))).collect();
        Configuration::new(SpaceDescriptor::torus(1), pts).unwrap()
    }

    #[test]
    fn configuration_validation() {
        assert!(Configuration::new(SpaceDescriptor::torus(1), vec![]).is_err());
        assert!(Configuration::new(SpaceDescriptor::torus(1), vec![SpacePoint::Interval(0.5)]).is_err());
    }

    #[test]
    fn hand_evaluated_wraparound_graph() {
        let g = build_graph(&torus1(&[0.0, 0.1, 0.5]), 0.15);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn radius_extremes() {
        let mut rng = stream(1, 0);
        for s in ["torus:2", "sphere:2", "cube:3", "pillowcase", "intervals"] {
            let space: SpaceDescriptor = s.parse().unwrap();
            let c = Configuration::sample(space, 12, &mut rng);
            assert_eq!(build_graph(&c, space.diameter()).edge_count(), 66, "{s}");
            assert_eq!(build_graph(&c, 0.0).edge_count(), 0, "{s}");
        }
    }

    #[test]
    fn graphs_grow_with_radius() {
        let mut rng = stream(2, 0);
        for _ in 0..200 {
            let c = Configuration::sample(SpaceDescriptor::sphere(2), 15, &mut rng);
            let (r1, r2) = (0.3, 0.7);
            assert!(build_graph(&c, r1).is_subgraph_of(&build_graph(&c, r2)));
        }
    }

    #[test]
    fn relabelling_leaves_symmetric_properties_unchanged() {
        let props: Vec<MonotoneProperty> =
            ["edge", "connected", "mindeg:2", "clique:3", "giant:0.5"].iter().map(|s| s.parse().unwrap()).collect();
        let mut rng = stream(3, 0);
        let perm: Vec<usize> = (0..10).rev().collect();
        for _ in 0..200 {
            let c = Configuration::sample(SpaceDescriptor::torus(2), 10, &mut rng);
            let pc = c.permuted(&perm);
            for p in &props {
                assert_eq!(p.evaluate(&build_graph(&c, 0.3)), p.evaluate(&build_graph(&pc, 0.3)));
            }
        }
    }

    #[test]
    fn probability_endpoints() {
        let space = SpaceDescriptor::torus(2);
        let p = MonotoneProperty::Connected;
        assert_eq!(estimate_probability(space, 8, space.diameter(), &p, 200, 1).value, 1.0);
        assert_eq!(estimate_probability(space, 8, 0.0, &p, 200, 1).value, 0.0);
    }

    #[test]
    fn two_circle_points_edge_probability() {
        let e = estimate_probability(SpaceDescriptor::torus(1), 2, 0.1, &MonotoneProperty::Edge, 20_000, 5);
        assert!((e.value - 0.2).abs() <= 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn curve_is_nondecreasing() {
        let radii: Vec<f64> = (0..20).map(|i| i as f64 * 0.02).collect();
        let curve = estimate_curve(SpaceDescriptor::cube(2), 10, &radii, &MonotoneProperty::Connected, 500, 9);
        for w in curve.windows(2) {
            assert!(w[1].value + 3.0 * w[1].stderr.max(w[0].stderr) >= w[0].value);
        }
    }

    #[test]
    fn threshold_radius_for_two_circle_points() {
        let space = SpaceDescriptor::torus(1);
        let r = find_threshold_radius(space, 2, &MonotoneProperty::Edge, 0.5, 1e-3, 20_000, 7).unwrap();
        let sigma = (0.25f64 / 20_000.0).sqrt();
        assert!((r - 0.25).abs() <= 1e-3 + 3.0 * sigma, "r = {r}");
        let again = find_threshold_radius(space, 2, &MonotoneProperty::Edge, 0.5, 1e-3, 20_000, 7).unwrap();
        assert_eq!(r.to_bits(), again.to_bits());
    }

    #[test]
    fn threshold_targets_at_the_boundary() {
        let space = SpaceDescriptor::torus(1);
        match find_threshold_radius(space, 2, &MonotoneProperty::Edge, 1.0, 1e-3, 2000, 7) {
            Ok(r) => assert!(r > 0.45),
            Err(e) => assert!(matches!(e, Error::NonBracketing { .. })),
        }
        let never = MonotoneProperty::custom_unaudited("never", |_: &Graph| false);
        assert!(matches!(
            find_threshold_radius(space, 2, &never, 0.5, 1e-3, 100, 7),
            Err(Error::NonBracketing { .. })
        ));
        assert!(find_threshold_radius(space, 2, &MonotoneProperty::Edge, 0.0, 1e-3, 100, 7).is_err());
    }

    #[test]
    fn estimates_are_worker_count_invariant() {
        let space = SpaceDescriptor::torus(2);
        let p = MonotoneProperty::Connected;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_probability(space, 20, 0.25, &p, 300, 42));
        let b = four.install(|| estimate_probability(space, 20, 0.25, &p, 300, 42));
        assert_eq!(a, b);
    }
}
