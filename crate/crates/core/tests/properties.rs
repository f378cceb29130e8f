//! Property tests of invariants that hold for arbitrary inputs.

use geothresh::harness::wilson_interval;
use geothresh::heights::{zonal_factor, MultiPointFunction};
use geothresh::maps::{default_generators, torus_family, SpaceMap, UnimodularMatrix};
use geothresh::rgg::{build_graph, Configuration, Graph, MonotoneProperty};
use geothresh::rng::stream;
use geothresh::spaces::{canonicalize_pillowcase, fold_to_cube, SpaceDescriptor, SpacePoint, TorusPoint};
use geothresh::spectral::{apply_q, contraction_bound_sq, frequency_step, FrequencyVector, SparseFrequencyFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn space_strategy() -> impl Strategy<Value = SpaceDescriptor> {
    prop_oneof![
        (1usize..5).prop_map(SpaceDescriptor::torus),
        (1usize..4).prop_map(SpaceDescriptor::sphere),
        (1usize..4).prop_map(SpaceDescriptor::cube),
        Just(SpaceDescriptor::pillowcase()),
        Just(SpaceDescriptor::intervals()),
    ]
}

fn sl2() -> impl Strategy<Value = UnimodularMatrix> {
    // Products of the elementary generators stay in SL_2(Z).
    prop::collection::vec((0usize..2, -3i64..=3), 0..6).prop_map(|steps| {
        let mut m = UnimodularMatrix::identity(2);
        for (kind, k) in steps {
            let e = if kind == 0 { vec![vec![1, k], vec![0, 1]] } else { vec![vec![1, 0], vec![k, 1]] };
            m = m.checked_mul(&UnimodularMatrix::new(e).unwrap()).unwrap();
        }
        m
    })
}

proptest! {
    #[test]
    fn metric_axioms(space in space_strategy(), seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let (x, y, z) = (space.sample(&mut rng), space.sample(&mut rng), space.sample(&mut rng));
        let d = |a: &SpacePoint, b: &SpacePoint| space.distance(a, b).unwrap();
        prop_assert!(d(&x, &x) < 1e-12);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert!(d(&x, &y) <= space.diameter() + 1e-12);
    }

    #[test]
    fn torus_map_round_trip_is_exact(m in sl2(), seed in any::<u64>()) {
        let x = SpacePoint::Torus(TorusPoint::sample(2, &mut stream(seed, 0)));
        let f = SpaceMap::TorusLinear(m);
        prop_assert_eq!(f.inverse().apply(&f.apply(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn inverse_is_two_sided(m in sl2()) {
        let inv = m.inverse();
        prop_assert!(m.checked_mul(&inv).unwrap().is_identity());
        prop_assert!(inv.checked_mul(&m).unwrap().is_identity());
    }

    #[test]
    fn frequency_step_inverts(m in sl2(), e in prop::collection::vec(-1000i64..=1000, 2)) {
        prop_assume!(e.iter().any(|&x| x != 0));
        let v = FrequencyVector::from_flat(2, e).unwrap();
        let w = frequency_step(&m, &v).unwrap();
        prop_assert_eq!(frequency_step(&m.inverse(), &w).unwrap(), v);
    }

    #[test]
    fn frequency_operator_contracts(
        seed in any::<u64>(),
        d in 2usize..4,
        n in 1usize..3,
    ) {
        let family = torus_family(d, default_generators()).unwrap();
        let h = SparseFrequencyFunction::random(d, n, 20, 1000, &mut stream(seed, 0));
        let q = apply_q(&family, &h).unwrap();
        prop_assert!(q.norm_sq() <= contraction_bound_sq(d) * h.norm_sq() + 1e-12);
    }

    #[test]
    fn delta_contraction_is_sharp_in_one_plane(a in 1i64..100, b in -100i64..100) {
        let family = torus_family(2, default_generators()).unwrap();
        let v = FrequencyVector::from_flat(2, vec![a, b]).unwrap();
        let mut h = SparseFrequencyFunction::new();
        h.add(v, Complex64::new(1.0, 0.0));
        // Four distinct images of weight 1/4 each: ||Qh||^2 = 1/4.
        prop_assert!((apply_q(&family, &h).unwrap().norm_sq() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pillowcase_identifies_antipodes(seed in any::<u64>()) {
        let x = TorusPoint::sample(2, &mut stream(seed, 0));
        let c = canonicalize_pillowcase(&x);
        prop_assert_eq!(canonicalize_pillowcase(&x.negate()), c);
        prop_assert_eq!(canonicalize_pillowcase(&TorusPoint::from_raw(c.to_vec())), c);
    }

    #[test]
    fn fold_is_two_lipschitz(seed in any::<u64>(), d in 1usize..4) {
        let mut rng = stream(seed, 0);
        let (x, y) = (TorusPoint::sample(d, &mut rng), TorusPoint::sample(d, &mut rng));
        let torus = SpaceDescriptor::torus(d);
        let cube = SpaceDescriptor::cube(d);
        let dt = torus.distance(&SpacePoint::Torus(x.clone()), &SpacePoint::Torus(y.clone())).unwrap();
        let dc = cube.distance(&SpacePoint::Cube(fold_to_cube(&x)), &SpacePoint::Cube(fold_to_cube(&y))).unwrap();
        prop_assert!(dc <= 2.0 * dt + 1e-12);
    }

    #[test]
    fn graphs_grow_with_radius(seed in any::<u64>(), r1 in 0.0..0.5f64, dr in 0.0..0.5f64) {
        let config = Configuration::sample(SpaceDescriptor::torus(2), 12, &mut stream(seed, 0));
        prop_assert!(build_graph(&config, r1).is_subgraph_of(&build_graph(&config, r1 + dr)));
    }

    #[test]
    fn registry_properties_are_monotone(edges in prop::collection::vec((0usize..9, 0usize..9), 0..30), extra in (0usize..9, 0usize..9)) {
        let mut g = Graph::empty(9);
        for (i, j) in edges {
            if i != j { g.add_edge(i, j); }
        }
        let mut h = g.clone();
        if extra.0 != extra.1 { h.add_edge(extra.0, extra.1); }
        for name in ["edge", "connected", "mindeg:2", "mindeg:1@3", "clique:3", "giant:0.5"] {
            let p: MonotoneProperty = name.parse().unwrap();
            prop_assert!(!p.evaluate(&g) || p.evaluate(&h), "{}", name);
        }
    }

    #[test]
    fn wilson_interval_brackets_estimate(trials in 1u64..5000, frac in 0.0..=1.0f64) {
        let s = ((trials as f64) * frac).round() as u64;
        let (lo, hi) = wilson_interval(s, trials, 0.95);
        let p = s as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn conditioning_preserves_means(c in 0usize..3, k in 1usize..5, j in 0usize..3, l in 1usize..4) {
        let f = MultiPointFunction::product(2, 3, vec![(0, zonal_factor(2, j, k).unwrap()), (1, zonal_factor(2, c, l).unwrap())]);
        let g = f.clone().plus(&MultiPointFunction::constant(2, 3, 0.7));
        let e = g.condition_on(c);
        prop_assert!((e.mean() - g.mean()).abs() < 1e-10);
        // Conditional expectation is a projection.
        prop_assert!((e.condition_on(c).norm_sq() - e.norm_sq()).abs() < 1e-9);
        prop_assert!(e.norm_sq() <= g.norm_sq() + 1e-9);
    }
}
