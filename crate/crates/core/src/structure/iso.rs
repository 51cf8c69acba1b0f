//! Embeddings, isomorphism testing and canonical forms.
//!
//! Isomorphism and canonical forms share one colour-refinement kernel: each
//! element starts with its 1-type and colours are refined by the multiset of
//! (neighbour colour, pair type) signatures until stable. Canonical forms
//! then individualise the first non-singleton cell and take the minimal
//! leaf certificate.

use std::collections::BTreeMap;

use super::type_id::tuple_type_unchecked;
use super::{Element, FinStructure, TypeId};
use crate::error::{Error, Result};

/// An injective map `source -> target` preserving and reflecting every relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    pub map: Vec<Element>,
}

impl Embedding {
    pub fn identity(n: usize) -> Self {
        Embedding { map: (0..n).collect() }
    }

    pub fn apply(&self, tuple: &[Element]) -> Vec<Element> {
        tuple.iter().map(|&e| self.map[e]).collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Embedding) -> Embedding {
        Embedding { map: self.map.iter().map(|&e| other.map[e]).collect() }
    }

    /// Checks the embedding conditions directly against both structures.
    pub fn is_embedding(&self, source: &FinStructure, target: &FinStructure) -> bool {
        if self.map.len() != source.size() || self.map.iter().any(|&e| e >= target.size()) {
            return false;
        }
        let mut seen = vec![false; target.size()];
        for &e in &self.map {
            if std::mem::replace(&mut seen[e], true) {
                return false;
            }
        }
        tuple_type_unchecked(source, &(0..source.size()).collect::<Vec<_>>())
            == tuple_type_unchecked(target, &self.map)
    }
}

fn check_vocab(a: &FinStructure, b: &FinStructure) -> Result<()> {
    if a.vocab() != b.vocab() {
        return Err(Error::vocab("structures are over different vocabularies"));
    }
    Ok(())
}

/// Whether extending the partial map `xs -> ys` by `x -> y` keeps it a
/// partial isomorphism. Assumes the existing map already is one.
pub(crate) fn consistent_extension(
    a: &FinStructure,
    b: &FinStructure,
    xs: &[Element],
    ys: &[Element],
    x: Element,
    y: Element,
) -> bool {
    let vocab = a.vocab();
    for sym in 0..vocab.len() {
        match vocab.arity(sym) {
            1 => {
                if a.holds(sym, &[x]) != b.holds(sym, &[y]) {
                    return false;
                }
            }
            2 => {
                if a.holds(sym, &[x, x]) != b.holds(sym, &[y, y]) {
                    return false;
                }
                for (&p, &q) in xs.iter().zip(ys) {
                    if a.holds(sym, &[x, p]) != b.holds(sym, &[y, q]) || a.holds(sym, &[p, x]) != b.holds(sym, &[q, y]) {
                        return false;
                    }
                }
            }
            r => {
                // Positions 0..k are the existing pairs, k is the new one.
                let k = xs.len();
                let mut idx = vec![0usize; r];
                let mut ta = vec![0; r];
                let mut tb = vec![0; r];
                'odometer: loop {
                    if idx.contains(&k) {
                        for (i, &p) in idx.iter().enumerate() {
                            ta[i] = if p == k { x } else { xs[p] };
                            tb[i] = if p == k { y } else { ys[p] };
                        }
                        if a.holds(sym, &ta) != b.holds(sym, &tb) {
                            return false;
                        }
                    }
                    for p in (0..r).rev() {
                        idx[p] += 1;
                        if idx[p] <= k {
                            continue 'odometer;
                        }
                        idx[p] = 0;
                    }
                    break;
                }
            }
        }
    }
    true
}

struct Search<'a> {
    a: &'a FinStructure,
    b: &'a FinStructure,
    fixed: Vec<Option<Element>>,
    used: Vec<bool>,
    xs: Vec<Element>,
    ys: Vec<Element>,
    limit: usize,
    out: Vec<Embedding>,
}

impl Search<'_> {
    fn run(&mut self, x: Element) {
        if self.out.len() >= self.limit {
            return;
        }
        if x == self.a.size() {
            self.out.push(Embedding { map: self.ys.clone() });
            return;
        }
        let candidates: Vec<Element> = match self.fixed[x] {
            Some(y) => vec![y],
            None => (0..self.b.size()).collect(),
        };
        for y in candidates {
            if self.used[y] || !consistent_extension(self.a, self.b, &self.xs, &self.ys, x, y) {
                continue;
            }
            self.used[y] = true;
            self.xs.push(x);
            self.ys.push(y);
            self.run(x + 1);
            self.xs.pop();
            self.ys.pop();
            self.used[y] = false;
            if self.out.len() >= self.limit {
                return;
            }
        }
    }
}

/// Up to `limit` embeddings of `a` into `b`, in lexicographic order of the map.
pub fn find_embeddings(a: &FinStructure, b: &FinStructure, limit: usize) -> Result<Vec<Embedding>> {
    find_embeddings_extending(a, b, &[], limit)
}

/// Embeddings of `a` into `b` that agree with the prescribed `(source, target)` pairs.
pub fn find_embeddings_extending(
    a: &FinStructure,
    b: &FinStructure,
    fixed: &[(Element, Element)],
    limit: usize,
) -> Result<Vec<Embedding>> {
    check_vocab(a, b)?;
    let mut pinned = vec![None; a.size()];
    for &(x, y) in fixed {
        if x >= a.size() {
            return Err(Error::InvalidSubset { element: x, size: a.size() });
        }
        if y >= b.size() {
            return Err(Error::InvalidSubset { element: y, size: b.size() });
        }
        pinned[x] = Some(y);
    }
    if a.size() > b.size() {
        return Ok(Vec::new());
    }
    let mut search = Search {
        a,
        b,
        fixed: pinned,
        used: vec![false; b.size()],
        xs: Vec::with_capacity(a.size()),
        ys: Vec::with_capacity(a.size()),
        limit,
        out: Vec::new(),
    };
    search.run(0);
    Ok(search.out)
}

/// Ranks signatures jointly across several structures so colours are comparable.
fn rank<S: Ord + Clone>(sigs: &[Vec<S>]) -> Vec<Vec<u32>> {
    let mut all: Vec<&S> = sigs.iter().flatten().collect();
    all.sort();
    all.dedup();
    let index: BTreeMap<&S, u32> = all.into_iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
    sigs.iter().map(|v| v.iter().map(|s| index[s]).collect()).collect()
}

fn distinct_colours(colours: &[Vec<u32>]) -> usize {
    let mut all: Vec<u32> = colours.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// Pair types, cached per structure for the refinement rounds.
struct PairCodes {
    ranks: Vec<u32>,
    n: usize,
}

impl PairCodes {
    fn build(structs: &[&FinStructure]) -> Vec<PairCodes> {
        let sigs: Vec<Vec<TypeId>> = structs
            .iter()
            .map(|s| {
                let n = s.size();
                let mut v = Vec::with_capacity(n * n);
                for x in 0..n {
                    for y in 0..n {
                        v.push(tuple_type_unchecked(s, &[x, y]));
                    }
                }
                v
            })
            .collect();
        rank(&sigs)
            .into_iter()
            .zip(structs)
            .map(|(ranks, s)| PairCodes { ranks, n: s.size() })
            .collect()
    }

    fn get(&self, x: Element, y: Element) -> u32 {
        self.ranks[x * self.n + y]
    }
}

fn refine(codes: &[PairCodes], mut colours: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let mut count = distinct_colours(&colours);
    loop {
        let sigs: Vec<Vec<(u32, Vec<(u32, u32)>)>> = codes
            .iter()
            .zip(&colours)
            .map(|(pc, col)| {
                (0..pc.n)
                    .map(|x| {
                        let mut nb: Vec<(u32, u32)> =
                            (0..pc.n).filter(|&y| y != x).map(|y| (col[y], pc.get(x, y))).collect();
                        nb.sort_unstable();
                        (col[x], nb)
                    })
                    .collect()
            })
            .collect();
        colours = rank(&sigs);
        let next = distinct_colours(&colours);
        if next == count {
            return colours;
        }
        count = next;
    }
}

fn initial_colours(structs: &[&FinStructure]) -> Vec<Vec<u32>> {
    let sigs: Vec<Vec<TypeId>> = structs
        .iter()
        .map(|s| (0..s.size()).map(|x| tuple_type_unchecked(s, &[x])).collect())
        .collect();
    rank(&sigs)
}

/// Returns a bijective embedding `a -> b` if the structures are isomorphic.
pub fn is_isomorphic(a: &FinStructure, b: &FinStructure) -> Result<Option<Embedding>> {
    check_vocab(a, b)?;
    if a.size() != b.size() {
        return Ok(None);
    }
    if (0..a.vocab().len()).any(|s| a.fact_count(s) != b.fact_count(s)) {
        return Ok(None);
    }
    let structs = [a, b];
    let codes = PairCodes::build(&structs);
    let colours = refine(&codes, initial_colours(&structs));
    let (ca, cb) = (&colours[0], &colours[1]);
    let mut hist_a = ca.clone();
    let mut hist_b = cb.clone();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return Ok(None);
    }
    // Map the most constrained cells first.
    let mut cell_size: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in ca {
        *cell_size.entry(c).or_default() += 1;
    }
    let mut order: Vec<Element> = (0..a.size()).collect();
    order.sort_by_key(|&x| (cell_size[&ca[x]], ca[x], x));

    fn go(
        a: &FinStructure,
        b: &FinStructure,
        ca: &[u32],
        cb: &[u32],
        order: &[Element],
        used: &mut [bool],
        xs: &mut Vec<Element>,
        ys: &mut Vec<Element>,
    ) -> bool {
        let Some(&x) = order.get(xs.len()) else {
            return true;
        };
        for y in 0..b.size() {
            if used[y] || cb[y] != ca[x] || !consistent_extension(a, b, xs, ys, x, y) {
                continue;
            }
            used[y] = true;
            xs.push(x);
            ys.push(y);
            if go(a, b, ca, cb, order, used, xs, ys) {
                return true;
            }
            xs.pop();
            ys.pop();
            used[y] = false;
        }
        false
    }

    let mut used = vec![false; b.size()];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    if !go(a, b, ca, cb, &order, &mut used, &mut xs, &mut ys) {
        return Ok(None);
    }
    let mut map = vec![0; a.size()];
    for (&x, &y) in xs.iter().zip(&ys) {
        map[x] = y;
    }
    Ok(Some(Embedding { map }))
}

/// Canonical form of a whole structure: the minimal certificate over all
/// leaves of the individualisation-refinement tree, with the ordering that
/// attains it. Isomorphic structures get identical certificates.
///
/// The search has no automorphism pruning, so very symmetric structures cost
/// up to `n!` leaves; it is meant for the small structures of ages and
/// enumerations.
pub fn canonical_form(s: &FinStructure) -> (TypeId, Vec<Element>) {
    let codes = PairCodes::build(&[s]);
    let colours = refine(&codes, initial_colours(&[s])).pop().unwrap();
    let mut best: Option<(TypeId, Vec<Element>)> = None;
    canon_search(s, &codes, colours, &mut best);
    best.expect("search visits at least one leaf")
}

fn canon_search(s: &FinStructure, codes: &[PairCodes], colours: Vec<u32>, best: &mut Option<(TypeId, Vec<Element>)>) {
    let n = s.size();
    let mut cells: BTreeMap<u32, Vec<Element>> = BTreeMap::new();
    for x in 0..n {
        cells.entry(colours[x]).or_default().push(x);
    }
    match cells.values().find(|c| c.len() > 1) {
        None => {
            let mut order: Vec<Element> = (0..n).collect();
            order.sort_by_key(|&x| colours[x]);
            let cert = tuple_type_unchecked(s, &order);
            if best.as_ref().map_or(true, |(b, _)| cert < *b) {
                *best = Some((cert, order));
            }
        }
        Some(cell) => {
            for &v in cell {
                let sig: Vec<(u32, bool)> = (0..n).map(|x| (colours[x], x != v)).collect();
                let ind = rank(&[sig]).pop().unwrap();
                let refined = refine(codes, vec![ind]).pop().unwrap();
                canon_search(s, codes, refined, best);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{graph, Vocabulary};
    use std::sync::Arc;

    fn path3() -> FinStructure {
        graph("E", 3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn triangle() -> FinStructure {
        graph("E", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn edge_into_triangle_has_six_embeddings() {
        let edge = graph("E", 2, &[(0, 1)]).unwrap();
        let embs = find_embeddings(&edge, &triangle(), usize::MAX).unwrap();
        assert_eq!(embs.len(), 6);
        let mut sorted = embs.clone();
        sorted.sort();
        assert_eq!(sorted, embs);
    }

    #[test]
    fn empty_structure_embeds_once() {
        let v = Arc::new(Vocabulary::graph("E"));
        let e = FinStructure::empty(v, 0);
        assert_eq!(find_embeddings(&e, &triangle(), 10).unwrap(), vec![Embedding { map: vec![] }]);
    }

    #[test]
    fn triangle_does_not_embed_in_path() {
        assert!(find_embeddings(&triangle(), &path3(), 10).unwrap().is_empty());
    }

    #[test]
    fn limit_is_respected() {
        let edge = graph("E", 2, &[(0, 1)]).unwrap();
        assert_eq!(find_embeddings(&edge, &triangle(), 2).unwrap().len(), 2);
    }

    #[test]
    fn vocabulary_mismatch_is_an_error() {
        let other = graph("F", 3, &[]).unwrap();
        assert!(find_embeddings(&triangle(), &other, 1).is_err());
        assert!(is_isomorphic(&triangle(), &other).is_err());
    }

    #[test]
    fn edge_and_non_edge_are_not_isomorphic() {
        let edge = graph("E", 2, &[(0, 1)]).unwrap();
        let none = graph("E", 2, &[]).unwrap();
        assert!(is_isomorphic(&edge, &none).unwrap().is_none());
        assert!(is_isomorphic(&none, &edge).unwrap().is_none());
    }

    #[test]
    fn self_isomorphism_found() {
        let t = triangle();
        let w = is_isomorphic(&t, &t).unwrap().unwrap();
        assert!(w.is_embedding(&t, &t));
    }

    #[test]
    fn relabelled_path_is_isomorphic() {
        let relabelled = graph("E", 3, &[(1, 0), (0, 2)]).unwrap();
        let w = is_isomorphic(&path3(), &relabelled).unwrap().unwrap();
        assert!(w.is_embedding(&path3(), &relabelled));
    }

    #[test]
    fn canonical_forms_agree_on_relabelling() {
        let relabelled = graph("E", 3, &[(1, 0), (0, 2)]).unwrap();
        assert_eq!(canonical_form(&path3()).0, canonical_form(&relabelled).0);
        assert_ne!(canonical_form(&path3()).0, canonical_form(&triangle()).0);
    }

    #[test]
    fn ternary_isomorphism() {
        let v = Arc::new(Vocabulary::new([("T", 3)]).unwrap());
        let a = FinStructure::from_tuples(v.clone(), 3, [("T", vec![vec![0, 1, 2]])]).unwrap();
        let b = FinStructure::from_tuples(v.clone(), 3, [("T", vec![vec![2, 0, 1]])]).unwrap();
        let c = FinStructure::from_tuples(v, 3, [("T", vec![vec![0, 0, 1]])]).unwrap();
        let w = is_isomorphic(&a, &b).unwrap().unwrap();
        assert!(w.is_embedding(&a, &b));
        assert!(is_isomorphic(&a, &c).unwrap().is_none());
        assert_eq!(canonical_form(&a).0, canonical_form(&b).0);
    }
}
