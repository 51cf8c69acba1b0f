use std::fmt;

use super::{Element, FinStructure};
use crate::error::{Error, Result};

/// Canonical key of an ordered tuple's labelled induced substructure.
///
/// The key records the equality pattern of the tuple followed by one bit per
/// symbol and per tuple of distinct positions. Two tuples of the same
/// structure (or of structures over the same vocabulary) get equal keys iff
/// the position-wise map between them is an isomorphism of the induced
/// substructures.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(Box<[u32]>);

impl TypeId {
    pub fn from_words(words: Vec<u32>) -> Self {
        TypeId(words.into_boxed_slice())
    }

    pub fn words(&self) -> &[u32] {
        &self.0
    }

    /// Length of the typed tuple.
    pub fn arity(&self) -> usize {
        self.0.first().copied().unwrap_or(0) as usize
    }

    /// Compact hexadecimal rendering, stable across runs.
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|w| format!("{w:x}")).collect::<Vec<_>>().join(".")
    }
}

impl fmt::Debug for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeId({})", self.to_hex())
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

struct BitSink {
    words: Vec<u32>,
    bit: u32,
}

impl BitSink {
    fn push(&mut self, b: bool) {
        if self.bit == 32 {
            self.words.push(0);
            self.bit = 0;
        }
        if b {
            *self.words.last_mut().unwrap() |= 1 << self.bit;
        }
        self.bit += 1;
    }
}

/// Quantifier-free type of `tup` in `s`. Repeated entries are allowed.
pub fn tuple_type(s: &FinStructure, tup: &[Element]) -> Result<TypeId> {
    if let Some(&e) = tup.iter().find(|&&e| e >= s.size()) {
        return Err(Error::InvalidTuple { element: e, size: s.size() });
    }
    Ok(tuple_type_unchecked(s, tup))
}

pub(crate) fn tuple_type_unchecked(s: &FinStructure, tup: &[Element]) -> TypeId {
    let mut distinct: Vec<Element> = Vec::with_capacity(tup.len());
    let mut words = Vec::with_capacity(2 + tup.len());
    words.push(tup.len() as u32);
    for &e in tup {
        let idx = match distinct.iter().position(|&d| d == e) {
            Some(i) => i,
            None => {
                distinct.push(e);
                distinct.len() - 1
            }
        };
        words.push(idx as u32);
    }
    let mut sink = BitSink { words, bit: 32 };
    let k = distinct.len();
    let vocab = s.vocab();
    let mut scratch = Vec::new();
    for sym in 0..vocab.len() {
        match vocab.arity(sym) {
            1 => {
                for &x in &distinct {
                    sink.push(s.holds(sym, &[x]));
                }
            }
            2 => {
                for &x in &distinct {
                    for &y in &distinct {
                        sink.push(s.holds(sym, &[x, y]));
                    }
                }
            }
            a => {
                if k == 0 {
                    continue;
                }
                let mut idx = vec![0usize; a];
                'odometer: loop {
                    scratch.clear();
                    scratch.extend(idx.iter().map(|&i| distinct[i]));
                    sink.push(s.holds(sym, &scratch));
                    for p in (0..a).rev() {
                        idx[p] += 1;
                        if idx[p] < k {
                            continue 'odometer;
                        }
                        idx[p] = 0;
                    }
                    break;
                }
            }
        }
    }
    TypeId::from_words(sink.words)
}
