//! Reduct checking by comparing type partitions of ordered tuples on a
//! shared carrier. A relation is treated as `∅`-definable when it is a
//! union of type classes, which is exact for homogeneous structures and an
//! approximation otherwise.

mod table;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::structure::{tuple_type_unchecked, Element, FinStructure, TypeId, Vocabulary};

pub use table::{parse_type_table, write_type_table, TypeTable};

/// A carrier `{0, .., carrier_size-1}` with a type function on ordered
/// tuples of length at most `max_arity`.
pub trait TypedUniverse: Sync {
    fn carrier_size(&self) -> usize;

    fn max_arity(&self) -> usize;

    /// Type of `tuple`; entries must lie in the carrier and repeats are
    /// allowed. Equal types imply equal equality patterns.
    fn type_of(&self, tuple: &[Element]) -> TypeId;
}

impl TypedUniverse for FinStructure {
    fn carrier_size(&self) -> usize {
        self.size()
    }

    fn max_arity(&self) -> usize {
        usize::MAX
    }

    fn type_of(&self, tuple: &[Element]) -> TypeId {
        tuple_type_unchecked(self, tuple)
    }
}

impl<T: TypedUniverse + ?Sized> TypedUniverse for &T {
    fn carrier_size(&self) -> usize {
        (**self).carrier_size()
    }

    fn max_arity(&self) -> usize {
        (**self).max_arity()
    }

    fn type_of(&self, tuple: &[Element]) -> TypeId {
        (**self).type_of(tuple)
    }
}

/// Calls `f` on every tuple in `{0..m}^n` in lexicographic order.
pub(crate) fn for_each_tuple(m: usize, n: usize, prefix: &[Element], mut f: impl FnMut(&[Element]) -> bool) {
    let mut t = prefix.to_vec();
    let start = t.len();
    if start > n || (m == 0 && start < n) {
        return;
    }
    t.resize(n, 0);
    loop {
        if !f(&t) {
            return;
        }
        let mut i = n;
        loop {
            if i == start {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < m {
                break;
            }
            t[i] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refinement {
    Refines,
    /// Two tuples with the same source type but different target types.
    Counterexample { a: Vec<Element>, b: Vec<Element> },
}

fn check_shared_carrier(source: &dyn TypedUniverse, target: &dyn TypedUniverse, n: usize) -> Result<()> {
    if source.carrier_size() != target.carrier_size() {
        return Err(Error::input(format!(
            "carrier sizes differ: {} vs {}",
            source.carrier_size(),
            target.carrier_size()
        )));
    }
    if n > source.max_arity() || n > target.max_arity() {
        return Err(Error::input(format!(
            "arity {n} exceeds the typed arities ({} and {})",
            source.max_arity(),
            target.max_arity()
        )));
    }
    Ok(())
}

type ClassMap = HashMap<TypeId, (TypeId, Vec<Element>)>;

/// Whether equal source types imply equal target types on `n`-tuples.
pub fn partition_refines(source: &dyn TypedUniverse, target: &dyn TypedUniverse, n: usize) -> Result<Refinement> {
    check_shared_carrier(source, target, n)?;
    let m = source.carrier_size();
    let scan = |prefix: &[Element]| -> (ClassMap, Option<(Vec<Element>, Vec<Element>)>) {
        let mut map = ClassMap::new();
        let mut bad = None;
        for_each_tuple(m, n, prefix, |t| {
            let s = source.type_of(t);
            let tt = target.type_of(t);
            match map.get(&s) {
                Some((seen, first)) if *seen != tt => {
                    bad = Some((first.clone(), t.to_vec()));
                    false
                }
                Some(_) => true,
                None => {
                    map.insert(s, (tt, t.to_vec()));
                    true
                }
            }
        });
        (map, bad)
    };
    let chunks: Vec<(ClassMap, Option<(Vec<Element>, Vec<Element>)>)> = if n == 0 {
        vec![scan(&[])]
    } else {
        (0..m).into_par_iter().map(|x| scan(&[x])).collect()
    };
    let mut global = ClassMap::new();
    for (map, bad) in chunks {
        // Check the chunk's classes against earlier chunks before its own
        // internal conflict so the reported pair does not depend on timing.
        let mut entries: Vec<_> = map.into_iter().collect();
        entries.sort_by(|x, y| x.1 .1.cmp(&y.1 .1));
        for (s, (tt, tuple)) in entries {
            match global.get(&s) {
                Some((seen, first)) if *seen != tt => {
                    return Ok(Refinement::Counterexample { a: first.clone(), b: tuple });
                }
                Some(_) => {}
                None => {
                    global.insert(s, (tt, tuple));
                }
            }
        }
        if let Some((a, b)) = bad {
            return Ok(Refinement::Counterexample { a, b });
        }
    }
    Ok(Refinement::Refines)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductReport {
    pub n_max: usize,
    /// `None` when every arity up to `n_max` refines.
    pub failing_arity: Option<usize>,
    pub counterexample: Option<(Vec<Element>, Vec<Element>)>,
}

impl ReductReport {
    pub fn holds(&self) -> bool {
        self.failing_arity.is_none()
    }
}

/// Whether every type-definable relation of `target` of arity at most
/// `n_max` is type-definable in `source`.
pub fn is_reduct(source: &dyn TypedUniverse, target: &dyn TypedUniverse, n_max: usize) -> Result<ReductReport> {
    check_shared_carrier(source, target, n_max)?;
    for n in 1..=n_max {
        if let Refinement::Counterexample { a, b } = partition_refines(source, target, n)? {
            return Ok(ReductReport { n_max, failing_arity: Some(n), counterexample: Some((a, b)) });
        }
    }
    Ok(ReductReport { n_max, failing_arity: None, counterexample: None })
}

/// The source types whose classes union to exactly `relation`, or `None`
/// if the relation splits a class. Every tuple in `relation` must have
/// length `n`.
pub fn definable_as_union(
    source: &dyn TypedUniverse,
    n: usize,
    relation: &BTreeSet<Vec<Element>>,
) -> Result<Option<BTreeSet<TypeId>>> {
    let m = source.carrier_size();
    if n > source.max_arity() {
        return Err(Error::input(format!("arity {n} exceeds the typed arity {}", source.max_arity())));
    }
    for t in relation {
        if t.len() != n {
            return Err(Error::input(format!("tuple {t:?} does not have length {n}")));
        }
        if let Some(&e) = t.iter().find(|&&e| e >= m) {
            return Err(Error::InvalidTuple { element: e, size: m });
        }
    }
    let classes: BTreeSet<TypeId> = relation.iter().map(|t| source.type_of(t)).collect();
    let mut exact = true;
    for_each_tuple(m, n, &[], |t| {
        if !relation.contains(t) && classes.contains(&source.type_of(t)) {
            exact = false;
        }
        exact
    });
    Ok(exact.then_some(classes))
}

/// All tuples of `{0..m}^n` whose type lies in `classes`.
pub fn union_of_classes(source: &dyn TypedUniverse, n: usize, classes: &BTreeSet<TypeId>) -> BTreeSet<Vec<Element>> {
    let mut out = BTreeSet::new();
    for_each_tuple(source.carrier_size(), n, &[], |t| {
        if classes.contains(&source.type_of(t)) {
            out.insert(t.to_vec());
        }
        true
    });
    out
}

/// The structure carrying one unary symbol per realised 1-type and one
/// binary symbol per realised type of a pair of distinct elements.
#[derive(Debug, Clone)]
pub struct BinaryFragment {
    pub structure: FinStructure,
    pub one_types: Vec<TypeId>,
    pub two_types: Vec<TypeId>,
}

pub fn binary_fragment(u: &dyn TypedUniverse) -> Result<BinaryFragment> {
    if u.max_arity() < 2 {
        return Err(Error::input("binary fragment needs types of pairs"));
    }
    let m = u.carrier_size();
    let ones: Vec<TypeId> = (0..m).map(|x| u.type_of(&[x])).collect();
    let mut twos: BTreeMap<(Element, Element), TypeId> = BTreeMap::new();
    for x in 0..m {
        for y in 0..m {
            if x != y {
                twos.insert((x, y), u.type_of(&[x, y]));
            }
        }
    }
    let one_types: Vec<TypeId> = ones.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let two_types: Vec<TypeId> = twos.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let names = one_types
        .iter()
        .enumerate()
        .map(|(i, _)| (format!("U{i}"), 1))
        .chain(two_types.iter().enumerate().map(|(i, _)| (format!("B{i}"), 2)));
    let vocab = Arc::new(Vocabulary::new(names)?);
    let mut s = FinStructure::empty(vocab, m);
    for (x, t) in ones.iter().enumerate() {
        let i = one_types.binary_search(t).expect("collected above");
        s.set_fact(i, &[x], true);
    }
    for (&(x, y), t) in &twos {
        let i = two_types.binary_search(t).expect("collected above");
        s.set_fact(one_types.len() + i, &[x, y], true);
    }
    Ok(BinaryFragment { structure: s, one_types, two_types })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::graph;

    fn c5() -> FinStructure {
        graph("R", 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap()
    }

    #[test]
    fn tuple_walk_is_lexicographic() {
        let mut seen = Vec::new();
        for_each_tuple(2, 2, &[], |t| {
            seen.push(t.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut count = 0;
        for_each_tuple(3, 2, &[1], |_| {
            count += 1;
            true
        });
        assert_eq!(count, 3);
    }

    #[test]
    fn structure_refines_itself() {
        let s = c5();
        for n in 1..=3 {
            assert_eq!(partition_refines(&s, &s, n).unwrap(), Refinement::Refines);
        }
        assert!(is_reduct(&s, &s, 3).unwrap().holds());
    }

    #[test]
    fn reduct_image_is_a_reduct() {
        let vocab = Arc::new(Vocabulary::new([("R", 2), ("P", 1)]).unwrap());
        let s = FinStructure::from_tuples(
            vocab,
            4,
            [("R", vec![vec![0, 1], vec![1, 0], vec![2, 3], vec![3, 2]]), ("P", vec![vec![0]])],
        )
        .unwrap();
        let r = s.reduct_to(&["R"]).unwrap();
        assert!(is_reduct(&s, &r, 3).unwrap().holds());
        let back = is_reduct(&r, &s, 3).unwrap();
        assert_eq!(back.failing_arity, Some(1));
        let (a, b) = back.counterexample.unwrap();
        assert_ne!(s.type_of(&a), s.type_of(&b));
        assert_eq!(r.type_of(&a), r.type_of(&b));
    }

    #[test]
    fn carrier_mismatch_is_an_input_error() {
        let a = c5();
        let b = graph("R", 4, &[]).unwrap();
        assert!(matches!(partition_refines(&a, &b, 2), Err(Error::Input(_))));
    }

    #[test]
    fn edges_are_one_class() {
        let s = c5();
        let edges: BTreeSet<Vec<Element>> = s.tuples(0).into_iter().collect();
        let classes = definable_as_union(&s, 2, &edges).unwrap().unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(union_of_classes(&s, 2, &classes), edges);
        let one: BTreeSet<Vec<Element>> = [vec![0, 1]].into_iter().collect();
        assert_eq!(definable_as_union(&s, 2, &one).unwrap(), None);
    }

    #[test]
    fn binary_fragment_of_a_graph() {
        let s = c5();
        let f = binary_fragment(&s).unwrap();
        assert_eq!(f.one_types.len(), 1);
        assert_eq!(f.two_types.len(), 2);
        assert!(is_reduct(&f.structure, &s, 3).unwrap().holds());
        assert!(is_reduct(&s, &f.structure, 3).unwrap().holds());
    }
}
