//! Finite relational structures over a fixed vocabulary.
//!
//! Universes are always `{0, .., n-1}`. Relations of arity one and two are
//! stored densely so that membership tests are constant time; higher arities
//! fall back to an ordered tuple set.

mod iso;
mod type_id;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use iso::{canonical_form, find_embeddings, find_embeddings_extending, is_isomorphic, Embedding};
pub use type_id::{tuple_type, TypeId};
pub(crate) use iso::consistent_extension;
pub(crate) use type_id::tuple_type_unchecked;

/// An element of a universe `{0, .., n-1}`.
pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
    rho: usize,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '*')
}

impl Vocabulary {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for (name, arity) in symbols {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(Error::vocab(format!("`{name}` is not a valid symbol name")));
            }
            if arity == 0 {
                return Err(Error::vocab(format!("symbol `{name}` must have positive arity")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::vocab(format!("duplicate symbol `{name}`")));
            }
            out.push(Symbol { name, arity });
        }
        let rho = out.iter().map(|s| s.arity).max().unwrap_or(0);
        Ok(Vocabulary { symbols: out, rho })
    }

    /// Vocabulary with one binary symbol, the usual graph signature.
    pub fn graph(symbol: &str) -> Self {
        Vocabulary::new([(symbol, 2)]).expect("valid graph symbol")
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Maximal arity of the vocabulary (0 for the empty vocabulary).
    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn is_binary(&self) -> bool {
        self.rho <= 2
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity(&self, symbol: usize) -> usize {
        self.symbols[symbol].arity
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Table {
    Unary(Vec<bool>),
    Binary(Vec<Vec<bool>>),
    Higher(usize, BTreeSet<Vec<Element>>),
}

impl Table {
    fn empty(arity: usize, size: usize) -> Self {
        match arity {
            1 => Table::Unary(vec![false; size]),
            2 => Table::Binary(vec![vec![false; size]; size]),
            a => Table::Higher(a, BTreeSet::new()),
        }
    }

    fn holds(&self, tuple: &[Element]) -> bool {
        match self {
            Table::Unary(v) => v[tuple[0]],
            Table::Binary(m) => m[tuple[0]][tuple[1]],
            Table::Higher(_, set) => set.contains(tuple),
        }
    }

    fn set(&mut self, tuple: &[Element], value: bool) {
        match self {
            Table::Unary(v) => v[tuple[0]] = value,
            Table::Binary(m) => m[tuple[0]][tuple[1]] = value,
            Table::Higher(_, set) => {
                if value {
                    set.insert(tuple.to_vec());
                } else {
                    set.remove(tuple);
                }
            }
        }
    }

    fn tuples(&self) -> Vec<Vec<Element>> {
        match self {
            Table::Unary(v) => v.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| vec![i]).collect(),
            Table::Binary(m) => {
                let mut out = Vec::new();
                for (i, row) in m.iter().enumerate() {
                    for (j, b) in row.iter().enumerate() {
                        if *b {
                            out.push(vec![i, j]);
                        }
                    }
                }
                out
            }
            Table::Higher(_, set) => set.iter().cloned().collect(),
        }
    }

    fn push_element(&mut self) {
        match self {
            Table::Unary(v) => v.push(false),
            Table::Binary(m) => {
                for row in m.iter_mut() {
                    row.push(false);
                }
                let n = m.len() + 1;
                m.push(vec![false; n]);
            }
            Table::Higher(..) => {}
        }
    }
}

/// A finite structure with universe `{0, .., size-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinStructure {
    vocab: Arc<Vocabulary>,
    size: usize,
    tables: Vec<Table>,
}

impl fmt::Debug for FinStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("FinStructure");
        d.field("size", &self.size);
        for (i, sym) in self.vocab.symbols.iter().enumerate() {
            d.field(&sym.name, &self.tables[i].tuples());
        }
        d.finish()
    }
}

impl FinStructure {
    pub fn empty(vocab: Arc<Vocabulary>, size: usize) -> Self {
        let tables = vocab.symbols.iter().map(|s| Table::empty(s.arity, size)).collect();
        FinStructure { vocab, size, tables }
    }

    /// Builds a structure from named tuple lists. Symbols not mentioned are
    /// interpreted as empty.
    pub fn from_tuples<'a, I, T>(vocab: Arc<Vocabulary>, size: usize, tables: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, T)>,
        T: IntoIterator<Item = Vec<Element>>,
    {
        let mut s = FinStructure::empty(vocab, size);
        for (name, tuples) in tables {
            let sym = s
                .vocab
                .index_of(name)
                .ok_or_else(|| Error::vocab(format!("unknown symbol `{name}`")))?;
            for t in tuples {
                s.insert(sym, &t)?;
            }
        }
        Ok(s)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_arc(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn holds(&self, symbol: usize, tuple: &[Element]) -> bool {
        debug_assert_eq!(tuple.len(), self.vocab.arity(symbol));
        self.tables[symbol].holds(tuple)
    }

    /// Adds a tuple to the table of `symbol`. Returns whether it was new.
    pub fn insert(&mut self, symbol: usize, tuple: &[Element]) -> Result<bool> {
        let arity = self.vocab.arity(symbol);
        if tuple.len() != arity {
            return Err(Error::vocab(format!(
                "symbol `{}` has arity {arity}, got a tuple of length {}",
                self.vocab.symbols[symbol].name,
                tuple.len()
            )));
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.size) {
            return Err(Error::InvalidTuple { element: e, size: self.size });
        }
        let fresh = !self.tables[symbol].holds(tuple);
        self.tables[symbol].set(tuple, true);
        Ok(fresh)
    }

    pub(crate) fn set_fact(&mut self, symbol: usize, tuple: &[Element], value: bool) {
        self.tables[symbol].set(tuple, value);
    }

    /// Appends a fresh element with no relations and returns it.
    pub(crate) fn push_element(&mut self) -> Element {
        for t in &mut self.tables {
            t.push_element();
        }
        self.size += 1;
        self.size - 1
    }

    /// Sorted tuples of a symbol's table.
    pub fn tuples(&self, symbol: usize) -> Vec<Vec<Element>> {
        self.tables[symbol].tuples()
    }

    pub fn tuples_named(&self, name: &str) -> Result<Vec<Vec<Element>>> {
        let sym = self
            .vocab
            .index_of(name)
            .ok_or_else(|| Error::vocab(format!("unknown symbol `{name}`")))?;
        Ok(self.tuples(sym))
    }

    pub fn fact_count(&self, symbol: usize) -> usize {
        match &self.tables[symbol] {
            Table::Unary(v) => v.iter().filter(|b| **b).count(),
            Table::Binary(m) => m.iter().map(|r| r.iter().filter(|b| **b).count()).sum(),
            Table::Higher(_, s) => s.len(),
        }
    }

    /// Induced substructure on `subset`, re-indexed in the given order.
    /// Returns the structure together with the index map `new -> old`.
    pub fn induced_substructure(&self, subset: &[Element]) -> Result<(FinStructure, Vec<Element>)> {
        let mut seen = BTreeSet::new();
        for &e in subset {
            if e >= self.size {
                return Err(Error::InvalidSubset { element: e, size: self.size });
            }
            if !seen.insert(e) {
                return Err(Error::input(format!("element {e} listed twice in subset")));
            }
        }
        Ok((self.restrict_unchecked(subset), subset.to_vec()))
    }

    /// Same as [`FinStructure::induced_substructure`] for a set, with elements
    /// re-indexed in increasing order.
    pub fn induced_on_set(&self, subset: &BTreeSet<Element>) -> Result<(FinStructure, Vec<Element>)> {
        let v: Vec<Element> = subset.iter().copied().collect();
        self.induced_substructure(&v)
    }

    pub(crate) fn restrict_unchecked(&self, subset: &[Element]) -> FinStructure {
        let n = subset.len();
        let mut out = FinStructure::empty(self.vocab.clone(), n);
        for (sym, table) in self.tables.iter().enumerate() {
            match table {
                Table::Unary(v) => {
                    for (i, &e) in subset.iter().enumerate() {
                        if v[e] {
                            out.set_fact(sym, &[i], true);
                        }
                    }
                }
                Table::Binary(m) => {
                    for (i, &a) in subset.iter().enumerate() {
                        for (j, &b) in subset.iter().enumerate() {
                            if m[a][b] {
                                out.set_fact(sym, &[i, j], true);
                            }
                        }
                    }
                }
                Table::Higher(_, set) => {
                    let pos: BTreeMap<Element, Element> = subset.iter().enumerate().map(|(i, &e)| (e, i)).collect();
                    for t in set {
                        let mapped: Option<Vec<Element>> = t.iter().map(|e| pos.get(e).copied()).collect();
                        if let Some(m) = mapped {
                            out.set_fact(sym, &m, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// The reduct to the symbols named in `keep` (original symbol order kept).
    pub fn reduct_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<FinStructure> {
        let mut wanted = BTreeSet::new();
        for name in keep {
            let name = name.as_ref();
            let idx = self
                .vocab
                .index_of(name)
                .ok_or_else(|| Error::vocab(format!("unknown symbol `{name}`")))?;
            wanted.insert(idx);
        }
        let symbols: Vec<(String, usize)> = self
            .vocab
            .symbols
            .iter()
            .enumerate()
            .filter(|(i, _)| wanted.contains(i))
            .map(|(_, s)| (s.name.clone(), s.arity))
            .collect();
        let vocab = Arc::new(Vocabulary::new(symbols)?);
        let tables = self
            .tables
            .iter()
            .enumerate()
            .filter(|(i, _)| wanted.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        Ok(FinStructure { vocab, size: self.size, tables })
    }

    /// Expansion by fresh unary symbols, each interpreted as the given set.
    pub fn expand_with_marks<S: AsRef<str>>(&self, marks: &[(S, BTreeSet<Element>)]) -> Result<FinStructure> {
        if marks.is_empty() {
            return Ok(self.clone());
        }
        let mut symbols: Vec<(String, usize)> =
            self.vocab.symbols.iter().map(|s| (s.name.clone(), s.arity)).collect();
        for (name, set) in marks {
            let name = name.as_ref();
            if self.vocab.index_of(name).is_some() {
                return Err(Error::vocab(format!("mark `{name}` clashes with an existing symbol")));
            }
            if let Some(&e) = set.iter().find(|&&e| e >= self.size) {
                return Err(Error::InvalidSubset { element: e, size: self.size });
            }
            symbols.push((name.to_string(), 1));
        }
        let vocab = Arc::new(Vocabulary::new(symbols)?);
        let mut tables = self.tables.clone();
        for (_, set) in marks {
            let mut v = vec![false; self.size];
            for &e in set {
                v[e] = true;
            }
            tables.push(Table::Unary(v));
        }
        Ok(FinStructure { vocab, size: self.size, tables })
    }

    /// Whether every binary table is symmetric and irreflexive.
    pub fn is_simple_graph(&self) -> bool {
        self.tables.iter().all(|t| match t {
            Table::Binary(m) => (0..self.size).all(|i| !m[i][i] && (0..self.size).all(|j| m[i][j] == m[j][i])),
            _ => true,
        })
    }
}

/// Convenience constructor for graphs over a single symmetric binary symbol.
pub fn graph(symbol: &str, size: usize, edges: &[(Element, Element)]) -> Result<FinStructure> {
    let vocab = Arc::new(Vocabulary::graph(symbol));
    let mut s = FinStructure::empty(vocab, size);
    for &(a, b) in edges {
        s.insert(0, &[a, b])?;
        s.insert(0, &[b, a])?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> FinStructure {
        graph("E", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn vocabulary_invariants() {
        let v = Vocabulary::new([("R", 2), ("P", 1)]).unwrap();
        assert_eq!(v.rho(), 2);
        assert!(v.is_binary());
        assert!(Vocabulary::new([("R", 2), ("R", 1)]).is_err());
        assert!(Vocabulary::new([("R", 0)]).is_err());
        assert!(!Vocabulary::new([("T", 3)]).unwrap().is_binary());
    }

    #[test]
    fn tuples_out_of_range_rejected() {
        let v = Arc::new(Vocabulary::graph("E"));
        let mut s = FinStructure::empty(v, 2);
        assert_eq!(s.insert(0, &[0, 2]), Err(Error::InvalidTuple { element: 2, size: 2 }));
    }

    #[test]
    fn induced_on_two_triangle_vertices_is_an_edge() {
        let t = triangle();
        let edge = graph("E", 2, &[(0, 1)]).unwrap();
        for pair in [[0, 1], [1, 2], [0, 2]] {
            let (sub, map) = t.induced_substructure(&pair).unwrap();
            assert_eq!(sub, edge);
            assert_eq!(map, pair.to_vec());
        }
    }

    #[test]
    fn induced_on_empty_subset_is_empty() {
        let (sub, map) = triangle().induced_substructure(&[]).unwrap();
        assert_eq!(sub.size(), 0);
        assert!(map.is_empty());
    }

    #[test]
    fn induced_rejects_out_of_range() {
        assert!(matches!(
            triangle().induced_substructure(&[0, 5]),
            Err(Error::InvalidSubset { element: 5, .. })
        ));
    }

    #[test]
    fn example_edge_member_restricts_to_itself() {
        let vocab = Arc::new(Vocabulary::graph("R"));
        let edge = FinStructure::from_tuples(vocab, 2, [("R", vec![vec![0, 1], vec![1, 0]])]).unwrap();
        let (sub, _) = edge.induced_substructure(&[1, 0]).unwrap();
        assert!(is_isomorphic(&sub, &edge).unwrap().is_some());
    }

    #[test]
    fn reduct_and_marks_are_inverse() {
        let t = triangle();
        let marked = t.expand_with_marks(&[("P", BTreeSet::from([0]))]).unwrap();
        assert_eq!(marked.vocab().len(), 2);
        assert_eq!(marked.tuples_named("P").unwrap(), vec![vec![0]]);
        assert_eq!(marked.reduct_to(&["E"]).unwrap(), t);
        assert_eq!(t.reduct_to(&["E"]).unwrap(), t);
        assert!(t.reduct_to(&["Q"]).is_err());
        assert_eq!(t.expand_with_marks::<&str>(&[]).unwrap(), t);
        assert!(t.expand_with_marks(&[("E", BTreeSet::new())]).is_err());
    }

    #[test]
    fn single_vertex_mark() {
        let v = Arc::new(Vocabulary::graph("E"));
        let s = FinStructure::empty(v, 1).expand_with_marks(&[("P", BTreeSet::from([0]))]).unwrap();
        assert!(s.holds(1, &[0]));
    }

    #[test]
    fn push_element_keeps_facts() {
        let mut t = triangle();
        let e = t.push_element();
        assert_eq!(e, 3);
        assert!(t.holds(0, &[0, 1]));
        assert!(!t.holds(0, &[3, 0]));
        assert_eq!(t.fact_count(0), 6);
    }
}
