//! Randomized algebraic invariants for the group and correlation layers.

use proptest::prelude::*;

use packing_lab::correlation::{
    autocorrelation, cross_correlation, difference_set, Method,
};
use packing_lab::group::{DenseSet, Group, GroupSpec, MetricKind, Norm};

fn arb_spec() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        proptest::collection::vec(2u64..13, 1..=3).prop_map(GroupSpec::cyclic),
        (1usize..=8).prop_map(GroupSpec::dyadic),
    ]
}

fn arb_group() -> impl Strategy<Value = Group> {
    arb_spec().prop_map(|spec| Group::new(spec).expect("small specs pass the guard"))
}

/// A group of at most a few hundred elements together with a subset.
fn arb_group_and_set() -> impl Strategy<Value = (Group, DenseSet)> {
    prop_oneof![
        proptest::collection::vec(2u64..10, 1..=2).prop_map(GroupSpec::cyclic),
        (1usize..=6).prop_map(GroupSpec::dyadic),
    ]
    .prop_flat_map(|spec| {
        let group = Group::new(spec).expect("small specs pass the guard");
        let n = group.size();
        (Just(group), proptest::collection::vec(any::<bool>(), n))
    })
    .prop_map(|(group, bits)| {
        let set = DenseSet::from_indices(
            group.clone(),
            bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)),
        );
        (group, set)
    })
}

proptest! {
    #[test]
    fn group_axioms((group, xs) in arb_group().prop_flat_map(|g| {
        let n = g.size();
        (Just(g), proptest::collection::vec(0..n, 3))
    })) {
        let (x, y, z) = (xs[0], xs[1], xs[2]);
        prop_assert_eq!(
            group.add_index(group.add_index(x, y), z),
            group.add_index(x, group.add_index(y, z))
        );
        prop_assert_eq!(group.add_index(x, y), group.add_index(y, x));
        prop_assert_eq!(group.add_index(x, 0), x);
        prop_assert_eq!(group.add_index(x, group.neg_index(x)), 0);
        prop_assert_eq!(group.sub_index(x, y), group.add_index(x, group.neg_index(y)));
    }

    #[test]
    fn norm_symmetry_and_triangle((group, xs) in arb_group().prop_flat_map(|g| {
        let n = g.size();
        (Just(g), proptest::collection::vec(0..n, 2))
    })) {
        let (x, y) = (xs[0], xs[1]);
        prop_assert_eq!(group.norm_index(x), group.norm_index(group.neg_index(x)));
        let s = group.norm_index(group.add_index(x, y));
        let (nx, ny) = (group.norm_index(x), group.norm_index(y));
        match group.metric() {
            MetricKind::CyclicQuotient => prop_assert!(s.0 <= nx.0 + ny.0),
            MetricKind::DyadicUltrametric => prop_assert!(s <= nx.max(ny)),
        }
    }

    #[test]
    fn index_coords_roundtrip((group, x) in arb_group().prop_flat_map(|g| {
        let n = g.size();
        (Just(g), 0..n)
    })) {
        let e = group.elem_at(x);
        prop_assert_eq!(group.index_of(&e), x);
        prop_assert_eq!(group.norm(&e), group.norm_index(x));
    }

    #[test]
    fn ball_is_annulus_from_zero((group, r) in arb_group().prop_flat_map(|g| {
        let d = g.diameter().0;
        (Just(g), 0..=d + 2)
    })) {
        prop_assert_eq!(group.ball(Norm(r)), group.annulus(Norm(0), Norm(r)).unwrap());
    }

    #[test]
    fn translate_preserves_cardinality(((_group, set), shift) in arb_group_and_set().prop_flat_map(|(g, s)| {
        let n = g.size();
        ((Just(g), Just(s)), 0..n)
    })) {
        let t = set.translate_index(shift);
        prop_assert_eq!(t.cardinality(), set.cardinality());
        prop_assert_eq!(set.negate().negate(), set.clone());
        prop_assert_eq!(set.translate_index(0), set);
    }

    #[test]
    fn correlation_sum_and_symmetry((group, a) in arb_group_and_set()) {
        let b = a.negate().translate_index(group.size() / 2);
        let t = cross_correlation(&a, &b, Method::Naive).unwrap();
        let u = cross_correlation(&b, &a, Method::Naive).unwrap();
        prop_assert_eq!(
            t.values().iter().sum::<i64>(),
            (a.cardinality() * b.cardinality()) as i64
        );
        for g_idx in 0..group.size() {
            prop_assert_eq!(t.value_at(g_idx), u.value_at(group.neg_index(g_idx)));
        }
    }

    #[test]
    fn difference_set_is_autocorrelation_support((group, a) in arb_group_and_set()) {
        prop_assume!(!a.is_empty());
        let d = difference_set(&a).unwrap();
        let ac = autocorrelation(&a, Method::Naive).unwrap();
        for g_idx in 0..group.size() {
            prop_assert_eq!(d.contains_index(g_idx), ac.value_at(g_idx) > 0);
        }
        prop_assert!(d.contains_index(0));
        prop_assert_eq!(d.negate(), d);
    }

    #[test]
    fn separated_sets_are_separated_and_maximal((group, spacing) in arb_group().prop_flat_map(|g| {
        let d = g.diameter().0;
        (Just(g), 1..=d + 1)
    })) {
        let region = group.full_set();
        let out = group
            .maximal_separated(&region, Norm(spacing), &[group.identity()])
            .unwrap();
        let members: Vec<usize> = out.iter_indices().collect();
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[..k] {
                prop_assert!(group.dist_index(i, j) >= Norm(spacing));
            }
        }
        for p in 0..group.size() {
            if !out.contains_index(p) {
                prop_assert!(members.iter().any(|&m| group.dist_index(p, m) < Norm(spacing)));
            }
        }
    }
}
