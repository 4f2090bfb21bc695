//! Acceptance suite. Each test implements one criterion at its stated
//! tolerance (always exact) and prints a PASS line; run with
//! `cargo test -p packing-lab --test acceptance -- --nocapture`.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use packing_lab::constructions::{
    build_levels, make_schedule, perfect_tree_generator, sigma_sets, tree_walk, TerminalMode,
};
use packing_lab::correlation::{
    counting_bound, covers, cross_correlation, difference_set, neighborhood_bound, Method,
};
use packing_lab::group::{DenseSet, Elem, Group, GroupSpec, Norm};
use packing_lab::packing::{
    almost_index_structural, disjointness_witness_check, packing_index_exact, packing_index_lower,
    spectrum_scan,
};

use common::{all_subsets, brute_force_packing_index};

fn group(spec: GroupSpec) -> Group {
    Group::new(spec).unwrap()
}

fn set(g: &Group, idx: &[usize]) -> DenseSet {
    DenseSet::from_indices(g.clone(), idx.iter().copied())
}

/// Criterion 1 — exact solver equals brute force on every nonempty
/// subset of ℤ₆, ℤ₈, ℤ₃², ℤ₂³, ℤ₁₂.
#[test]
fn criterion_1_oracle_equivalence() {
    let specs = [
        GroupSpec::cyclic(vec![6]),
        GroupSpec::cyclic(vec![8]),
        GroupSpec::cyclic(vec![3, 3]),
        GroupSpec::dyadic(3),
        GroupSpec::cyclic(vec![12]),
    ];
    let mut total = 0u64;
    for spec in specs {
        let g = group(spec);
        let subsets: Vec<(u32, DenseSet)> = all_subsets(&g).collect();
        let checked: u64 = subsets
            .par_iter()
            .map(|(mask, a)| {
                let solver = packing_index_exact(a, 0).unwrap().value;
                let oracle = brute_force_packing_index(a, 0);
                assert_eq!(solver, oracle, "disagreement on {g} mask {mask:#x}");
                1
            })
            .sum();
        total += checked;
    }
    println!("ACCEPTANCE 1: PASS — solver matches brute force on {total} subsets across 5 groups");
}

/// Criterion 2 — the worked examples: the cross in ℤ₉² and the half
/// intervals in ℤ₈ and ℤ₈².
#[test]
fn criterion_2_worked_examples() {
    let g = group(GroupSpec::cyclic(vec![9, 9]));
    let row: Vec<usize> = (0..9).map(|k| g.index_of(&Elem::new(vec![k, 0]))).collect();
    let col: Vec<usize> = (0..9).map(|k| g.index_of(&Elem::new(vec![0, k]))).collect();
    let row_set = set(&g, &row);
    let col_set = set(&g, &col);
    let cross = row_set.union(&col_set);
    assert_eq!(packing_index_exact(&row_set, 0).unwrap().value, 9);
    assert_eq!(packing_index_exact(&col_set, 0).unwrap().value, 9);
    assert_eq!(packing_index_exact(&cross, 0).unwrap().value, 1);

    let g8 = group(GroupSpec::cyclic(vec![8]));
    let j = set(&g8, &[0, 1, 2, 3]);
    let r = packing_index_exact(&j, 0).unwrap();
    assert_eq!(r.value, 2);
    assert_eq!(r.witness, vec![Elem::new(vec![0]), Elem::new(vec![4])]);

    let g88 = group(GroupSpec::cyclic(vec![8, 8]));
    let j2: Vec<usize> = (0..8)
        .flat_map(|x| (0..8).map(move |y| (x, y)))
        .filter(|&(x, y)| x < 4 && y < 4)
        .map(|(x, y)| g88.index_of(&Elem::new(vec![x, y])))
        .collect();
    let j2_set = set(&g88, &j2);
    let r = packing_index_exact(&j2_set, 0).unwrap();
    assert_eq!(r.value, 4);
    let expected_witness: Vec<Elem> = [(0u64, 0u64), (0, 4), (4, 0), (4, 4)]
        .iter()
        .map(|&(x, y)| Elem::new(vec![x, y]))
        .collect();
    assert_eq!(r.witness, expected_witness);
    assert!(disjointness_witness_check(&j2_set, &expected_witness, 0).unwrap());
    println!(
        "ACCEPTANCE 2: PASS — ind(row)=9 ind(col)=9 ind(cross)=1; ind(J)=2 ind(J²)=4 with witness {{0,4}}^d"
    );
}

/// Criterion 3 — spectrum scans with solver-vs-oracle agreement and the
/// torsion-structure annotations.
#[test]
fn criterion_3_spectrum_scans() {
    let z3 = group(GroupSpec::cyclic(vec![3]));
    let r = spectrum_scan(&z3, 0, false).unwrap();
    assert_eq!(r.histogram.keys().copied().collect::<Vec<_>>(), vec![2, 4]);

    let z22 = group(GroupSpec::cyclic(vec![2, 2]));
    let r = spectrum_scan(&z22, 0, false).unwrap();
    assert_eq!(r.histogram.keys().copied().collect::<Vec<_>>(), vec![2, 3, 5]);

    for (spec, absent, reason) in [
        (GroupSpec::dyadic(3), 4u64, "|G/[G]_2| = 1 ≤ 2"),
        (GroupSpec::cyclic(vec![3, 3]), 3u64, "G = [G]_3"),
    ] {
        let g = group(spec);
        let subsets: Vec<(u32, DenseSet)> = all_subsets(&g).collect();
        subsets.par_iter().for_each(|(mask, a)| {
            let solver = packing_index_exact(a, 0).unwrap().value + 1;
            let oracle = brute_force_packing_index(a, 0) + 1;
            assert_eq!(solver, oracle, "sharp disagreement on {g} mask {mask:#x}");
        });
        let r = spectrum_scan(&g, 0, false).unwrap();
        let is_absent = !r.histogram.contains_key(&absent);
        println!(
            "ACCEPTANCE 3: {g} sharp values {:?}; sharp {absent} absent: {is_absent} ({reason}); counterexamples: {:?}",
            r.histogram.keys().collect::<Vec<_>>(),
            r.counterexamples
        );
        assert!(is_absent);
        assert!(r.counterexamples.is_empty());
        assert_eq!(r.expected_absent, vec![absent]);
    }
    println!("ACCEPTANCE 3: PASS — spectra exact, exclusions observed");
}

/// Criterion 4 — generator smoke test on the 3-point interval in ℤ₁₀₂₄.
#[test]
fn criterion_4_generator_smoke() {
    let g = group(GroupSpec::cyclic(vec![1024]));
    let a = set(&g, &[1023, 0, 1]);
    let tree = perfect_tree_generator(&a, 8).unwrap();
    assert!(tree.s.cardinality() >= 4, "|S| = {}", tree.s.cardinality());
    let witness = tree.s.elems();
    assert!(disjointness_witness_check(&a, &witness, 0).unwrap());
    // The hand-derived witness with branch points 512 and 8 is admissible.
    let hand: Vec<Elem> = [0u64, 8, 512, 520].iter().map(|&x| Elem::new(vec![x])).collect();
    assert!(disjointness_witness_check(&a, &hand, 0).unwrap());
    let exact = packing_index_exact(&a, 0).unwrap().value;
    assert!(exact >= 4);
    println!(
        "ACCEPTANCE 4: PASS — generator depth {} gives |S| = {} ≥ 4, exact index {exact} ≥ 4",
        tree.depth(),
        tree.s.cardinality()
    );
}

/// Criterion 5 — the four-level sparse construction at m = 4 194 304:
/// schedule inequalities, annulus avoidance, generator witnesses, 100
/// verified tree walks and δ = 7 coverage.
#[test]
fn criterion_5_four_level_sparse_construction() {
    let sched = make_schedule(1, 4, TerminalMode::Sparse).unwrap();
    assert_eq!(sched.m, 4_194_304);

    // (a) schedule inequalities
    let certs = sched.inequality_certificates();
    assert!(certs.iter().all(|c| c.ok));

    // (b) annulus avoidance is verified inside sigma_sets; re-check the
    // certificates explicitly and count the annuli covered.
    let levels = build_levels(&sched).unwrap();
    let pair = sigma_sets(&sched, &levels).unwrap();
    let even_annuli =
        pair.certificates.iter().filter(|c| c.name.starts_with("even-annulus")).count();
    let odd_annuli =
        pair.certificates.iter().filter(|c| c.name.starts_with("odd-annulus")).count();
    assert_eq!(even_annuli, 2);
    assert_eq!(odd_annuli, 1);
    assert!(pair.certificates.iter().all(|c| c.ok));

    // (c) generator witnesses on both sides, certificates included.
    let tree_a = perfect_tree_generator(&pair.a, 8).unwrap();
    let tree_b = perfect_tree_generator(&pair.b, 8).unwrap();
    assert!(tree_a.s.cardinality() >= 4, "|S_A| = {}", tree_a.s.cardinality());
    assert!(tree_b.s.cardinality() >= 2, "|S_B| = {}", tree_b.s.cardinality());

    // (d) 100 seeded-random tree walks; every node condition is checked
    // inside tree_walk, and the completed-branch remainder stays ≤ 7.
    let g = sched.group().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let target = g.elem_at(rng.gen_range(0..g.size()));
        let w = tree_walk(&target, &pair).unwrap();
        assert!(w.max_leaf_remainder <= Norm(7));
        assert!(w.d0.cardinality() >= 4);
    }

    // (e) δ-coverage of the correlation support at δ = 7·eps[3] = 7.
    let corr = cross_correlation(&pair.a, &pair.b, Method::Auto).unwrap();
    assert!(covers(&corr.support(), Norm(7)));

    println!(
        "ACCEPTANCE 5: PASS — |S_A| = {}, |S_B| = {}, 100 walks verified, δ=7 coverage holds",
        tree_a.s.cardinality(),
        tree_b.s.cardinality()
    );
}

/// Criterion 6 — three-level dense construction at m = 65 536: exact
/// coverage and the collapse of the union's packing index to 1.
#[test]
fn criterion_6_three_level_dense_coverage() {
    let sched = make_schedule(1, 3, TerminalMode::Dense).unwrap();
    assert_eq!(sched.m, 65_536);
    let levels = build_levels(&sched).unwrap();
    let pair = sigma_sets(&sched, &levels).unwrap();
    let corr = cross_correlation(&pair.a, &pair.b, Method::Auto).unwrap();
    let theta = corr.min();
    assert!(theta >= 1, "min_g |Σ₀ ∩ (g+Σ₁)| = {theta}");
    let dc = difference_set(&pair.c).unwrap();
    assert!(dc.is_full());
    println!("ACCEPTANCE 6: PASS — θ = {theta} ≥ 1 and (Σ₀∪Σ₁) − (Σ₀∪Σ₁) = G, so ind(C) = 1");
}

/// Criterion 7 — transform-vs-naive equality on 200 random pairs per
/// family: ℤ₄₀₉₆ (FFT) and ℤ₂¹² (Walsh–Hadamard).
#[test]
fn criterion_7_transform_oracle() {
    for (spec, label) in [
        (GroupSpec::cyclic(vec![4096]), "fft"),
        (GroupSpec::dyadic(12), "walsh-hadamard"),
    ] {
        let g = group(spec);
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0 + label.len() as u64);
        let pairs: Vec<(DenseSet, DenseSet)> = (0..200)
            .map(|_| {
                let pa = rng.gen_range(0.05..0.95);
                let pb = rng.gen_range(0.05..0.95);
                let a = DenseSet::from_indices(
                    g.clone(),
                    (0..g.size()).filter(|_| rng.gen_bool(pa)),
                );
                let b = DenseSet::from_indices(
                    g.clone(),
                    (0..g.size()).filter(|_| rng.gen_bool(pb)),
                );
                (a, b)
            })
            .collect();
        pairs.par_iter().for_each(|(a, b)| {
            let naive = cross_correlation(a, b, Method::Naive).unwrap();
            let fast = cross_correlation(a, b, Method::Transform).unwrap();
            assert_eq!(naive.values(), fast.values(), "{label} mismatch");
        });
        println!("ACCEPTANCE 7: {label} identical to naive on 200 random pairs in {g}");
    }
    println!("ACCEPTANCE 7: PASS");
}

fn random_group(rng: &mut ChaCha8Rng, max_size: usize) -> Group {
    loop {
        let spec = match rng.gen_range(0..4) {
            0 => GroupSpec::cyclic(vec![rng.gen_range(2..=max_size as u64)]),
            1 => {
                let a = rng.gen_range(2..=64u64);
                let b = rng.gen_range(2..=64u64);
                GroupSpec::cyclic(vec![a, b])
            }
            2 => GroupSpec::dyadic(rng.gen_range(1..=12)),
            _ => {
                let a = rng.gen_range(2..=16u64);
                let b = rng.gen_range(2..=8u64);
                let c = rng.gen_range(2..=8u64);
                GroupSpec::cyclic(vec![a, b, c])
            }
        };
        if let Ok(g) = Group::new(spec) {
            if g.size() <= max_size {
                return g;
            }
        }
    }
}

fn random_nonempty_set(rng: &mut ChaCha8Rng, g: &Group) -> DenseSet {
    let p = rng.gen_range(0.02..0.8);
    let mut s = DenseSet::from_indices(g.clone(), (0..g.size()).filter(|_| rng.gen_bool(p)));
    if s.is_empty() {
        s.insert_index(rng.gen_range(0..g.size()));
    }
    s
}

/// Criterion 8 — invariance suite over 500 random instances: bound
/// domination everywhere, plus translation/negation invariance,
/// t-monotonicity and the period-subgroup identity where exact values
/// are affordable.
#[test]
fn criterion_8_invariance_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE55);
    let mut exact_checked = 0u64;
    let mut bound_checked = 0u64;
    for instance in 0..500 {
        let small = instance % 2 == 0;
        let g = random_group(&mut rng, if small { 64 } else { 4096 });
        let a = random_nonempty_set(&mut rng, &g);
        let counting = counting_bound(&a).unwrap();
        let neighborhood = neighborhood_bound(&a).unwrap();
        let heur = packing_index_lower(&a, 0, 2, instance as u64).unwrap();
        assert!(heur.value <= counting, "counting bound violated on {g}");
        assert!(heur.value <= neighborhood, "neighborhood bound violated on {g}");
        assert!(disjointness_witness_check(&a, &heur.witness, 0).unwrap());
        bound_checked += 1;

        if g.size() <= 64 {
            let exact0 = packing_index_exact(&a, 0).unwrap();
            assert!(exact0.value <= counting);
            assert!(exact0.value <= neighborhood);
            assert!(heur.value <= exact0.value);
            assert!(disjointness_witness_check(&a, &exact0.witness, 0).unwrap());

            let shift = rng.gen_range(0..g.size());
            let translated = packing_index_exact(&a.translate_index(shift), 0).unwrap();
            assert_eq!(translated.value, exact0.value);
            let negated = packing_index_exact(&a.negate(), 0).unwrap();
            assert_eq!(negated.value, exact0.value);

            let mut prev = exact0.value;
            for t in 1..=2u64 {
                let v = packing_index_exact(&a, t).unwrap().value;
                assert!(v >= prev);
                prev = v;
            }
            let t_top = a.cardinality() as u64 - 1;
            let at_top = packing_index_exact(&a, t_top).unwrap().value;
            assert_eq!(at_top, almost_index_structural(&a).unwrap());
            exact_checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 8: PASS — bounds dominated on {bound_checked} instances, exact invariances on {exact_checked}"
    );
}
