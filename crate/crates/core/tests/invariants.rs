mod common;

use std::collections::BTreeSet;

use fraisse_core::amalgamation::{enumerate_rp2, P2Spec};
use fraisse_core::generic::{ExtensionStep, GenericOracle};
use fraisse_core::reduct::{
    definable_as_union, parse_type_table, partition_refines, union_of_classes, write_type_table, Refinement,
    TypedUniverse,
};
use fraisse_core::structure::{canonical_form, tuple_type};
use fraisse_core::text::parse_document;
use fraisse_core::types::enumerate_types;
use fraisse_core::zeroone::sample_uniform;
use fraisse_core::FinStructure;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Marked points send directed edges to plain points and nothing else.
const ORIENTED: &str = "
vocab o
rel P 1
rel R 2

p2
structure empty over o
size 0

structure marked over o
size 1
P: 0

structure plain over o
size 1

structure mm over o
size 2
P: 0; 1

structure pp over o
size 2

structure mp over o
size 2
P: 0

structure arrow over o
size 2
P: 0
R: 0 1
";

fn p2s() -> Vec<P2Spec> {
    let oriented = P2Spec::new(parse_document(ORIENTED).unwrap().p2_members()).unwrap();
    vec![P2Spec::random_graph(), oriented]
}

fn graph_of(seed: u64, n: usize) -> FinStructure {
    common::random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn oracle_stays_in_the_class(which in 0usize..2, seed in any::<u64>(), points in 0usize..8, k in 0usize..3) {
        let p2 = p2s().swap_remove(which);
        let mut o = GenericOracle::new(p2.clone(), seed).unwrap();
        o.grow(points).unwrap();
        prop_assert!(p2.in_rp2(o.current()).unwrap());
        let before = o.current().clone();
        o.saturate(k, 300);
        prop_assert!(p2.in_rp2(o.current()).unwrap());
        // Saturation only adds points: the old structure is an initial segment.
        let prefix: Vec<usize> = (0..before.size()).collect();
        prop_assert_eq!(o.current().induced_substructure(&prefix).unwrap().0, before);
    }

    #[test]
    fn oracle_is_deterministic_and_replayable(which in 0usize..2, seed in any::<u64>(), points in 0usize..6) {
        let p2 = p2s().swap_remove(which);
        let run = || {
            let mut o = GenericOracle::new(p2.clone(), seed).unwrap();
            o.grow(points).unwrap();
            o.saturate(1, 100);
            o
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(a.current(), b.current());
        prop_assert_eq!(a.transcript(), b.transcript());
        let steps: Vec<ExtensionStep> = a.transcript().lines().map(|l| ExtensionStep::parse(l).unwrap()).collect();
        let c = GenericOracle::replay(p2.clone(), seed, &steps).unwrap();
        prop_assert_eq!(a.current(), c.current());
    }

    #[test]
    fn sampled_structures_are_members(which in 0usize..2, seed in any::<u64>(), n in 0usize..25) {
        let p2 = p2s().swap_remove(which);
        let s = sample_uniform(&p2, n, seed).unwrap();
        prop_assert_eq!(s.size(), n);
        prop_assert!(p2.in_rp2(&s).unwrap());
        prop_assert_eq!(s, sample_uniform(&p2, n, seed).unwrap());
    }

    #[test]
    fn type_census_ignores_relabelling(seed in any::<u64>(), n in 1usize..8, arity in 1usize..4) {
        let g = graph_of(seed, n);
        let perm = common::random_permutation(&mut ChaCha8Rng::seed_from_u64(seed ^ 1), n);
        let h = common::relabel(&g, &perm);
        for distinct in [false, true] {
            let a = enumerate_types(&g, arity, &[], distinct).unwrap();
            let b = enumerate_types(&h, arity, &[], distinct).unwrap();
            prop_assert_eq!(&a.entries, &b.entries);
            let expected = if distinct { (0..arity).map(|i| n.saturating_sub(i)).product() } else { n.pow(arity as u32) };
            prop_assert_eq!(a.total(), expected);
        }
        // Over a parameter, the census moves with the parameter.
        let a = enumerate_types(&g, 1, &[0], false).unwrap();
        let b = enumerate_types(&h, 1, &[perm[0]], false).unwrap();
        prop_assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn canonical_form_is_a_complete_invariant(seed in any::<u64>(), n in 0usize..8) {
        let g = graph_of(seed, n);
        let perm = common::random_permutation(&mut ChaCha8Rng::seed_from_u64(seed ^ 2), n);
        prop_assert_eq!(canonical_form(&g).0, canonical_form(&common::relabel(&g, &perm)).0);
        let h = graph_of(seed.wrapping_add(1), n);
        prop_assert_eq!(canonical_form(&g).0 == canonical_form(&h).0, common::naive_isomorphism(&g, &h).is_some());
    }

    #[test]
    fn refinement_is_reflexive_and_transitive(seed in any::<u64>(), n in 1usize..7, arity in 1usize..4) {
        let g = graph_of(seed, n);
        let s = graph_of(seed ^ 3, n);
        // Two relations over one carrier, then forget one, then forget both.
        let both = {
            let vocab = fraisse_core::Vocabulary::new([("R", 2), ("S", 2)]).unwrap();
            let mut c = FinStructure::empty(std::sync::Arc::new(vocab), n);
            for t in g.tuples(0) {
                c.insert(0, &t).unwrap();
            }
            for t in s.tuples(0) {
                c.insert(1, &t).unwrap();
            }
            c
        };
        let only_r = both.reduct_to(&["R"]).unwrap();
        let none = both.reduct_to::<&str>(&[]).unwrap();
        prop_assert_eq!(partition_refines(&both, &both, arity).unwrap(), Refinement::Refines);
        prop_assert_eq!(partition_refines(&both, &only_r, arity).unwrap(), Refinement::Refines);
        prop_assert_eq!(partition_refines(&only_r, &none, arity).unwrap(), Refinement::Refines);
        prop_assert_eq!(partition_refines(&both, &none, arity).unwrap(), Refinement::Refines);
        // Going the other way, any counterexample is a genuine one.
        if let Refinement::Counterexample { a, b } = partition_refines(&none, &both, arity).unwrap() {
            prop_assert_eq!(none.type_of(&a), none.type_of(&b));
            prop_assert_ne!(both.type_of(&a), both.type_of(&b));
        }
    }

    #[test]
    fn unions_of_classes_are_definable(seed in any::<u64>(), n in 1usize..6, arity in 1usize..4, pick in any::<u64>()) {
        let g = graph_of(seed, n);
        let census = enumerate_types(&g, arity, &[], false).unwrap();
        let chosen: BTreeSet<_> = census
            .entries
            .iter()
            .enumerate()
            .filter(|(i, _)| pick >> (i % 64) & 1 == 1)
            .map(|(_, (t, _))| t.clone())
            .collect();
        let relation = union_of_classes(&g, arity, &chosen);
        prop_assert_eq!(definable_as_union(&g, arity, &relation).unwrap(), Some(chosen.clone()));
        // Removing one tuple from a non-singleton class breaks definability.
        if let Some(t) = relation.iter().find(|t| census.entries.iter().any(|(c, k)| *k > 1 && *c == tuple_type(&g, t).unwrap())) {
            let mut cut = relation.clone();
            cut.remove(&t.clone());
            prop_assert_eq!(definable_as_union(&g, arity, &cut).unwrap(), None);
        }
    }

    #[test]
    fn type_tables_round_trip(seed in any::<u64>(), n in 1usize..6) {
        let g = graph_of(seed, n);
        let text = write_type_table(&g, 3).unwrap();
        let t = parse_type_table(&text).unwrap();
        prop_assert_eq!(write_type_table(&t, 3).unwrap(), text);
        for k in 1..=3 {
            prop_assert_eq!(partition_refines(&t, &g, k).unwrap(), Refinement::Refines);
            prop_assert_eq!(partition_refines(&g, &t, k).unwrap(), Refinement::Refines);
        }
    }
}

#[test]
fn enumeration_matches_brute_force_counts() {
    // Unlabelled graphs on 0..=5 vertices.
    let p2 = P2Spec::random_graph();
    for (n, want) in [(0, 1), (1, 1), (2, 2), (3, 4), (4, 11), (5, 34)] {
        let perms = common::permutations(n);
        let naive: BTreeSet<Vec<bool>> = common::all_graphs(n).iter().map(|g| common::naive_canonical(g, &perms)).collect();
        assert_eq!(naive.len(), want);
        assert_eq!(enumerate_rp2(&p2, n).len(), want, "size {n}");
    }
}
