//! Type censuses over finite parameter sets, determinacy of types by their
//! pairwise restrictions, and algebraic closure approximated by counting
//! realisations.

mod acl;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduct::{for_each_tuple, TypedUniverse};
use crate::structure::{Element, TypeId};

pub use acl::{
    acl_approx, check_degenerate_dependence, check_triviality, AclEntry, AclReport, AclVerdict, Approximation,
    DegeneracyReport, DegeneracyVerdict, FixedApproximation, OracleApproximation, TrivialityReport,
    TrivialityVerdict,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCensus {
    pub arity: usize,
    pub params: Vec<Element>,
    pub distinct: bool,
    /// Realised types over the parameters with their counts, sorted by type.
    pub entries: Vec<(TypeId, usize)>,
}

impl TypeCensus {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Counts the types of `params ⌢ t` over all `n`-tuples `t` of the
/// universe, or over tuples of distinct elements when `distinct` is set.
pub fn enumerate_types(u: &dyn TypedUniverse, n: usize, params: &[Element], distinct: bool) -> Result<TypeCensus> {
    if n == 0 {
        return Err(Error::input("census arity must be at least 1"));
    }
    let m = u.carrier_size();
    if let Some(&e) = params.iter().find(|&&e| e >= m) {
        return Err(Error::InvalidTuple { element: e, size: m });
    }
    if params.len() + n > u.max_arity() {
        return Err(Error::input(format!("types of length {} are not available", params.len() + n)));
    }
    let k = params.len();
    let chunks: Vec<HashMap<TypeId, usize>> = (0..m)
        .into_par_iter()
        .map(|x| {
            let mut counts = HashMap::new();
            let mut full = params.to_vec();
            full.resize(k + n, 0);
            for_each_tuple(m, n, &[x], |t| {
                if distinct && (1..t.len()).any(|i| t[..i].contains(&t[i])) {
                    return true;
                }
                full[k..].copy_from_slice(t);
                *counts.entry(u.type_of(&full)).or_insert(0) += 1;
                true
            });
            counts
        })
        .collect();
    let mut merged: HashMap<TypeId, usize> = HashMap::new();
    for c in chunks {
        for (t, n) in c {
            *merged.entry(t).or_insert(0) += n;
        }
    }
    let mut entries: Vec<(TypeId, usize)> = merged.into_iter().collect();
    entries.sort();
    Ok(TypeCensus { arity: n, params: params.to_vec(), distinct, entries })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairDeterminacy {
    Determined,
    /// All pairwise types agree but the full types differ.
    Counterexample { a: Vec<Element>, b: Vec<Element> },
}

/// Searches `n`-tuples of distinct elements for two with the same types on
/// every pair of coordinates but different `n`-types. `filter` restricts
/// the search to tuples the caller accepts.
pub fn types_determined_by_pairs(
    u: &dyn TypedUniverse,
    n: usize,
    filter: Option<&(dyn Fn(&[Element]) -> bool + Sync)>,
) -> Result<PairDeterminacy> {
    if n < 3 {
        return Err(Error::input("pair determinacy is only meaningful from arity 3"));
    }
    if n > u.max_arity() {
        return Err(Error::input(format!("types of length {n} are not available")));
    }
    let m = u.carrier_size();
    let mut seen: HashMap<Vec<TypeId>, (TypeId, Vec<Element>)> = HashMap::new();
    let mut found = None;
    for_each_tuple(m, n, &[], |t| {
        if (1..t.len()).any(|i| t[..i].contains(&t[i])) || !filter.map_or(true, |f| f(t)) {
            return true;
        }
        let mut key = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                key.push(u.type_of(&[t[i], t[j]]));
            }
        }
        let full = u.type_of(t);
        match seen.get(&key) {
            Some((other, first)) if *other != full => {
                found = Some((first.clone(), t.to_vec()));
                false
            }
            Some(_) => true,
            None => {
                seen.insert(key, (full, t.to_vec()));
                true
            }
        }
    });
    Ok(match found {
        Some((a, b)) => PairDeterminacy::Counterexample { a, b },
        None => PairDeterminacy::Determined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::P2Spec;
    use crate::generic::GenericOracle;
    use crate::structure::{graph, FinStructure};

    fn oracle(k: usize) -> GenericOracle {
        let mut o = GenericOracle::new(P2Spec::random_graph(), 17).unwrap();
        o.grow(3).unwrap();
        o.saturate_passes(k, 5000, 4);
        o
    }

    #[test]
    fn pairs_of_a_random_graph_have_two_types() {
        let o = oracle(2);
        let c = enumerate_types(o.current(), 2, &[], true).unwrap();
        assert_eq!(c.len(), 2);
        let n = o.size();
        assert_eq!(c.total(), n * (n - 1));
        let all = enumerate_types(o.current(), 2, &[], false).unwrap();
        assert_eq!(all.total(), n * n);
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn triples_of_a_saturated_random_graph_have_eight_types() {
        let o = oracle(2);
        assert_eq!(enumerate_types(o.current(), 3, &[], true).unwrap().len(), 8);
    }

    #[test]
    fn parameters_separate_every_element() {
        let s = graph("R", 5, &[(0, 1), (2, 3)]).unwrap();
        let params: Vec<Element> = (0..5).collect();
        let c = enumerate_types(&s, 1, &params, false).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.entries.iter().all(|(_, n)| *n == 1));
    }

    #[test]
    fn census_is_invariant_under_automorphisms() {
        let s: FinStructure = graph("R", 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let a = enumerate_types(&s, 2, &[0, 1], true).unwrap();
        let b = enumerate_types(&s, 2, &[2, 3], true).unwrap();
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn binary_structures_are_pair_determined() {
        let o = oracle(2);
        assert_eq!(types_determined_by_pairs(o.current(), 3, None).unwrap(), PairDeterminacy::Determined);
        let identical = |t: &[Element]| t == [0, 1, 2];
        assert_eq!(
            types_determined_by_pairs(o.current(), 3, Some(&identical)).unwrap(),
            PairDeterminacy::Determined
        );
    }
}
