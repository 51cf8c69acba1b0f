//! Permitted 1- and 2-structures over a binary vocabulary, and the class of
//! finite structures all of whose small substructures are permitted.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structure::{canonical_form, Element, FinStructure, TypeId, Vocabulary};

/// The 1-type of a point over a binary vocabulary: bit `i` is set when
/// symbol `i` holds at the point (`P(x)` for unary, `R(x, x)` for binary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointType(pub u64);

/// The relations between an ordered pair `(x, y)` of distinct points: bit `i`
/// of `forward` is `R_i(x, y)`, bit `i` of `backward` is `R_i(y, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub forward: u64,
    pub backward: u64,
}

impl Link {
    pub const NONE: Link = Link { forward: 0, backward: 0 };

    pub fn reversed(self) -> Link {
        Link { forward: self.backward, backward: self.forward }
    }
}

pub fn point_type(s: &FinStructure, x: Element) -> PointType {
    let mut bits = 0;
    for sym in 0..s.vocab().len() {
        let holds = match s.vocab().arity(sym) {
            1 => s.holds(sym, &[x]),
            2 => s.holds(sym, &[x, x]),
            _ => false,
        };
        if holds {
            bits |= 1 << sym;
        }
    }
    PointType(bits)
}

pub fn link(s: &FinStructure, x: Element, y: Element) -> Link {
    let mut l = Link::NONE;
    for sym in 0..s.vocab().len() {
        if s.vocab().arity(sym) == 2 {
            if s.holds(sym, &[x, y]) {
                l.forward |= 1 << sym;
            }
            if s.holds(sym, &[y, x]) {
                l.backward |= 1 << sym;
            }
        }
    }
    l
}

/// Writes a point type onto element `x`.
pub(crate) fn apply_point_type(s: &mut FinStructure, x: Element, p: PointType) {
    for sym in 0..s.vocab().len() {
        let on = p.0 & (1 << sym) != 0;
        match s.vocab().arity(sym) {
            1 => s.set_fact(sym, &[x], on),
            2 => s.set_fact(sym, &[x, x], on),
            _ => {}
        }
    }
}

/// Writes the link of the ordered pair `(x, y)`.
pub(crate) fn apply_link(s: &mut FinStructure, x: Element, y: Element, l: Link) {
    for sym in 0..s.vocab().len() {
        if s.vocab().arity(sym) == 2 {
            s.set_fact(sym, &[x, y], l.forward & (1 << sym) != 0);
            s.set_fact(sym, &[y, x], l.backward & (1 << sym) != 0);
        }
    }
}

/// All point types and links expressible over `vocab`.
pub(crate) fn all_point_types(vocab: &Vocabulary) -> Vec<PointType> {
    (0..1u64 << vocab.len()).map(PointType).collect()
}

pub(crate) fn all_links(vocab: &Vocabulary) -> Vec<Link> {
    let binary: Vec<usize> = (0..vocab.len()).filter(|&i| vocab.arity(i) == 2).collect();
    let mut out = Vec::new();
    for mask in 0..1u64 << (2 * binary.len()) {
        let mut l = Link::NONE;
        for (k, &sym) in binary.iter().enumerate() {
            if mask & (1 << k) != 0 {
                l.forward |= 1 << sym;
            }
            if mask & (1 << (k + binary.len())) != 0 {
                l.backward |= 1 << sym;
            }
        }
        out.push(l);
    }
    out
}

/// A set of permitted structures of size at most two.
#[derive(Debug, Clone)]
pub struct P2Spec {
    vocab: Arc<Vocabulary>,
    members: Vec<FinStructure>,
    point_types: BTreeSet<PointType>,
    links: BTreeMap<(PointType, PointType), BTreeSet<Link>>,
}

impl P2Spec {
    pub fn new(members: Vec<FinStructure>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::input("P2 set has no members"))?;
        let vocab = first.vocab_arc().clone();
        if !vocab.is_binary() {
            return Err(Error::vocab("P2 sets need a binary vocabulary"));
        }
        if vocab.len() > 32 {
            return Err(Error::vocab("P2 vocabularies are limited to 32 symbols"));
        }
        let mut point_types = BTreeSet::new();
        let mut links: BTreeMap<(PointType, PointType), BTreeSet<Link>> = BTreeMap::new();
        for m in &members {
            if m.vocab() != &*vocab {
                return Err(Error::vocab("P2 members must share one vocabulary"));
            }
            match m.size() {
                0 => {}
                1 => {
                    point_types.insert(point_type(m, 0));
                }
                2 => {
                    for (x, y) in [(0, 1), (1, 0)] {
                        links.entry((point_type(m, x), point_type(m, y))).or_default().insert(link(m, x, y));
                    }
                }
                n => return Err(Error::input(format!("P2 member of size {n} (at most 2 allowed)"))),
            }
        }
        Ok(P2Spec { vocab, members, point_types, links })
    }

    /// The permitted set whose random structure is the random graph: the
    /// empty structure, a point, a non-edge and an undirected edge over one
    /// binary symbol `R`.
    pub fn random_graph() -> Self {
        let vocab = Arc::new(Vocabulary::graph("R"));
        let edge = FinStructure::from_tuples(vocab.clone(), 2, [("R", vec![vec![0, 1], vec![1, 0]])]).unwrap();
        P2Spec::new(vec![
            FinStructure::empty(vocab.clone(), 0),
            FinStructure::empty(vocab.clone(), 1),
            FinStructure::empty(vocab, 2),
            edge,
        ])
        .unwrap()
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn members(&self) -> &[FinStructure] {
        &self.members
    }

    pub fn point_types(&self) -> &BTreeSet<PointType> {
        &self.point_types
    }

    /// Permitted links for the ordered pair of point types `(p, q)`.
    pub fn links(&self, p: PointType, q: PointType) -> Vec<Link> {
        self.links.get(&(p, q)).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    pub fn permits_point(&self, p: PointType) -> bool {
        self.point_types.contains(&p)
    }

    pub fn permits_link(&self, p: PointType, q: PointType, l: Link) -> bool {
        self.links.get(&(p, q)).is_some_and(|s| s.contains(&l))
    }

    pub fn has_two_structure(&self) -> bool {
        self.members.iter().any(|m| m.size() == 2)
    }

    /// Membership in the class of structures whose 1- and 2-substructures
    /// are all isomorphic to members.
    pub fn in_rp2(&self, s: &FinStructure) -> Result<bool> {
        if s.vocab() != &*self.vocab {
            return Err(Error::vocab("structure is not over the P2 vocabulary"));
        }
        Ok(self.first_violation(s).is_none())
    }

    /// The first 1- or 2-element subset whose induced structure is not permitted.
    pub fn first_violation(&self, s: &FinStructure) -> Option<Vec<Element>> {
        let types: Vec<PointType> = (0..s.size()).map(|x| point_type(s, x)).collect();
        if let Some(x) = types.iter().position(|p| !self.permits_point(*p)) {
            return Some(vec![x]);
        }
        for x in 0..s.size() {
            for y in x + 1..s.size() {
                if !self.permits_link(types[x], types[y], link(s, x, y)) {
                    return Some(vec![x, y]);
                }
            }
        }
        None
    }
}

/// Outcome of the 1-adequacy check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdequacyReport {
    pub holds: bool,
    /// Member index and a substructure of it that is missing from the set.
    pub hp_violation: Option<(usize, Vec<Element>)>,
    /// Unordered pairs of permitted point types without a joint 2-structure.
    pub missing_pairs: Vec<(PointType, PointType)>,
    pub has_two_structure: bool,
    /// For each unordered pair of point types, the index of the member
    /// chosen to embed both.
    pub witnesses: Vec<((PointType, PointType), usize)>,
}

/// Checks that the set is closed under substructures and that any two
/// permitted 1-structures sit together inside a permitted 2-structure.
pub fn check_1_adequate(p2: &P2Spec) -> AdequacyReport {
    let keys: BTreeSet<(usize, TypeId)> = p2.members.iter().map(|m| (m.size(), canonical_form(m).0)).collect();
    let mut hp_violation = None;
    'members: for (i, m) in p2.members.iter().enumerate() {
        let subsets: Vec<Vec<Element>> = match m.size() {
            0 => vec![],
            1 => vec![vec![]],
            _ => vec![vec![], vec![0], vec![1]],
        };
        for sub in subsets {
            let r = m.restrict_unchecked(&sub);
            if !keys.contains(&(r.size(), canonical_form(&r).0)) {
                hp_violation = Some((i, sub));
                break 'members;
            }
        }
    }

    let types: Vec<PointType> = p2.point_types.iter().copied().collect();
    let mut missing_pairs = Vec::new();
    let mut witnesses = Vec::new();
    for (i, &p) in types.iter().enumerate() {
        for &q in &types[i..] {
            let found = p2.members.iter().position(|m| {
                m.size() == 2
                    && ((point_type(m, 0) == p && point_type(m, 1) == q)
                        || (point_type(m, 0) == q && point_type(m, 1) == p))
            });
            match found {
                Some(idx) => witnesses.push(((p, q), idx)),
                None => missing_pairs.push((p, q)),
            }
        }
    }
    let has_two_structure = p2.has_two_structure();
    AdequacyReport {
        holds: hp_violation.is_none() && missing_pairs.is_empty() && has_two_structure,
        hp_violation,
        missing_pairs,
        has_two_structure,
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary_p_spec() -> P2Spec {
        // 1-structures {P} and {not P}; the only 2-structure has both points in P.
        let vocab = Arc::new(Vocabulary::new([("P", 1)]).unwrap());
        let p = FinStructure::from_tuples(vocab.clone(), 1, [("P", vec![vec![0]])]).unwrap();
        let not_p = FinStructure::empty(vocab.clone(), 1);
        let both = FinStructure::from_tuples(vocab.clone(), 2, [("P", vec![vec![0], vec![1]])]).unwrap();
        P2Spec::new(vec![FinStructure::empty(vocab, 0), p, not_p, both]).unwrap()
    }

    #[test]
    fn random_graph_set_is_adequate() {
        let r = check_1_adequate(&P2Spec::random_graph());
        assert!(r.holds, "{r:?}");
        assert_eq!(r.witnesses.len(), 1);
    }

    #[test]
    fn missing_joint_embedding_fails() {
        let r = check_1_adequate(&unary_p_spec());
        assert!(!r.holds);
        assert!(r.hp_violation.is_none());
        // {not P} with {not P}, and {P} with {not P}.
        assert_eq!(r.missing_pairs.len(), 2);
        assert!(r.missing_pairs.contains(&(PointType(0), PointType(0))));
    }

    #[test]
    fn no_two_structure_fails() {
        let vocab = Arc::new(Vocabulary::graph("R"));
        let p2 = P2Spec::new(vec![FinStructure::empty(vocab.clone(), 0), FinStructure::empty(vocab, 1)]).unwrap();
        let r = check_1_adequate(&p2);
        assert!(!r.holds);
        assert!(!r.has_two_structure);
    }

    #[test]
    fn missing_empty_structure_is_an_hp_violation() {
        let vocab = Arc::new(Vocabulary::graph("R"));
        let p2 = P2Spec::new(vec![FinStructure::empty(vocab.clone(), 1), FinStructure::empty(vocab, 2)]).unwrap();
        let r = check_1_adequate(&p2);
        assert!(!r.holds);
        assert!(r.hp_violation.is_some());
    }

    #[test]
    fn rp2_membership() {
        let p2 = P2Spec::random_graph();
        let v = p2.vocab().clone();
        let path = FinStructure::from_tuples(v.clone(), 3, [("R", vec![vec![0, 1], vec![1, 0], vec![1, 2], vec![2, 1]])])
            .unwrap();
        assert!(p2.in_rp2(&path).unwrap());
        let one_way = FinStructure::from_tuples(v.clone(), 2, [("R", vec![vec![0, 1]])]).unwrap();
        assert!(!p2.in_rp2(&one_way).unwrap());
        assert_eq!(p2.first_violation(&one_way), Some(vec![0, 1]));
        let lp = FinStructure::from_tuples(v.clone(), 1, [("R", vec![vec![0, 0]])]).unwrap();
        assert!(!p2.in_rp2(&lp).unwrap());
        assert!(p2.in_rp2(&FinStructure::empty(v, 0)).unwrap());
        let other = crate::structure::graph("E", 2, &[]).unwrap();
        assert!(p2.in_rp2(&other).is_err());
    }

    #[test]
    fn rejects_large_members() {
        let vocab = Arc::new(Vocabulary::graph("R"));
        assert!(P2Spec::new(vec![FinStructure::empty(vocab, 3)]).is_err());
    }

    #[test]
    fn link_round_trip() {
        let p2 = P2Spec::random_graph();
        let all = all_links(p2.vocab());
        assert_eq!(all.len(), 4);
        let mut s = FinStructure::empty(p2.vocab().clone(), 2);
        for l in all {
            apply_link(&mut s, 0, 1, l);
            assert_eq!(link(&s, 0, 1), l);
            assert_eq!(link(&s, 1, 0), l.reversed());
        }
    }
}
