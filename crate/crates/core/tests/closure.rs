use std::collections::BTreeSet;

use fraisse_core::amalgamation::P2Spec;
use fraisse_core::doubled::{build_double_from_oracle, PairStructureApproximation};
use fraisse_core::generic::GenericOracle;
use fraisse_core::types::{
    acl_approx, check_degenerate_dependence, enumerate_types, AclVerdict, DegeneracyVerdict, OracleApproximation,
};

fn oracle(seed: u64, points: usize, level: usize) -> GenericOracle {
    let mut o = GenericOracle::new(P2Spec::random_graph(), seed).unwrap();
    o.grow(points).unwrap();
    assert!(o.saturate(level, 20_000).saturated);
    o
}

#[test]
fn census_support_is_stable_under_further_saturation() {
    for seed in [1, 2, 3] {
        let mut o = oracle(seed, 5, 3);
        let support = |o: &GenericOracle, n| -> BTreeSet<_> {
            enumerate_types(o.current(), n, &[], false).unwrap().entries.into_iter().map(|(t, _)| t).collect()
        };
        let before: Vec<_> = (1..=3).map(|n| support(&o, n)).collect();
        let counts_before = enumerate_types(o.current(), 2, &[], false).unwrap().total();
        o.saturate(3, 20_000);
        let after: Vec<_> = (1..=3).map(|n| support(&o, n)).collect();
        assert_eq!(before, after, "seed {seed}");
        assert!(enumerate_types(o.current(), 2, &[], false).unwrap().total() >= counts_before);
    }
}

#[test]
fn non_algebraic_verdicts_survive_growth() {
    let mut o = oracle(4, 6, 3);
    let base = [0, 1];
    let first = acl_approx(&mut OracleApproximation { oracle: &mut o }, &base, 5, 200, None).unwrap();
    o.grow(10).unwrap();
    let second = acl_approx(&mut OracleApproximation { oracle: &mut o }, &base, 5, 200, None).unwrap();
    for (a, b) in first.entries.iter().zip(&second.entries) {
        assert_eq!(a.element, b.element);
        if a.verdict == AclVerdict::NonAlgebraic {
            assert_eq!(b.verdict, AclVerdict::NonAlgebraic, "element {}", a.element);
        }
    }
}

#[test]
fn closure_is_idempotent() {
    let mut o = oracle(5, 6, 4);
    for base in [vec![0], vec![0, 1], vec![2, 4, 5]] {
        let r = acl_approx(&mut OracleApproximation { oracle: &mut o }, &base, 5, 500, None).unwrap();
        let closed: Vec<usize> = base.iter().copied().chain(r.algebraic()).collect::<BTreeSet<_>>().into_iter().collect();
        let again = acl_approx(&mut OracleApproximation { oracle: &mut o }, &closed, 5, 500, None).unwrap();
        assert!(r.algebraic().is_subset(&again.algebraic()));
        assert_eq!(again.algebraic(), closed.iter().copied().collect(), "base {base:?}");
    }
}

#[test]
fn pair_structure_dependence_is_one_degenerate() {
    let o = oracle(6, 4, 5);
    let d = build_double_from_oracle(&o).unwrap();
    let mut approx = PairStructureApproximation::new(&d).unwrap();
    let r = check_degenerate_dependence(&mut approx, 2, (2, 2, 2), 3, 0).unwrap();
    assert_eq!(r.verdict, DegeneracyVerdict::Degenerate { n: 1 }, "{r:?}");
    assert!(r.dependencies > 0);
    assert_eq!(r.inconclusive_entries, 0);
}
