//! Explicit type tables.
//!
//! ```text
//! typed-universe 3 2
//! arity 1
//! 0 : 0
//! 1 : 0
//! 2 : 1
//! arity 2
//! 0 0 : 0
//! 0 1 : 1
//! ...
//! ```
//!
//! Keys are arbitrary non-negative integers naming the classes of each
//! arity. Every tuple of every arity up to the declared maximum must appear.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{for_each_tuple, TypedUniverse};
use crate::error::{Error, Result};
use crate::structure::{Element, TypeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeTable {
    carrier: usize,
    /// `keys[k - 1]` maps each `k`-tuple to its class key.
    keys: Vec<HashMap<Vec<Element>, u32>>,
}

impl TypedUniverse for TypeTable {
    fn carrier_size(&self) -> usize {
        self.carrier
    }

    fn max_arity(&self) -> usize {
        self.keys.len()
    }

    fn type_of(&self, tuple: &[Element]) -> TypeId {
        if tuple.is_empty() {
            return TypeId::from_words(vec![0]);
        }
        let key = self.keys[tuple.len() - 1][tuple];
        TypeId::from_words(vec![tuple.len() as u32, key])
    }
}

fn equality_pattern(t: &[Element]) -> Vec<usize> {
    t.iter().map(|e| t.iter().position(|x| x == e).unwrap()).collect()
}

/// Serialises the types of `u` up to arity `n_max`, numbering the classes
/// of each arity in order of first appearance.
pub fn write_type_table(u: &dyn TypedUniverse, n_max: usize) -> Result<String> {
    if n_max > u.max_arity() {
        return Err(Error::input(format!("arity {n_max} exceeds the typed arity {}", u.max_arity())));
    }
    let mut out = String::new();
    let _ = writeln!(out, "typed-universe {} {}", u.carrier_size(), n_max);
    for n in 1..=n_max {
        let _ = writeln!(out, "arity {n}");
        let mut names: HashMap<TypeId, usize> = HashMap::new();
        for_each_tuple(u.carrier_size(), n, &[], |t| {
            let next = names.len();
            let key = *names.entry(u.type_of(t)).or_insert(next);
            let tuple: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "{} : {key}", tuple.join(" "));
            true
        });
    }
    Ok(out)
}

pub fn parse_type_table(text: &str) -> Result<TypeTable> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::input("empty type table"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (carrier, n_max) = match parts[..] {
        ["typed-universe", c, n] => (
            c.parse::<usize>().map_err(|_| perr(hline, format!("bad carrier size `{c}`")))?,
            n.parse::<usize>().map_err(|_| perr(hline, format!("bad arity `{n}`")))?,
        ),
        _ => return Err(perr(hline, "expected `typed-universe <carrier> <max arity>`".into())),
    };
    let mut keys: Vec<HashMap<Vec<Element>, u32>> = vec![HashMap::new(); n_max];
    let mut current: Option<usize> = None;
    for (line, l) in lines {
        if let Some(rest) = l.strip_prefix("arity ") {
            let k: usize = rest.trim().parse().map_err(|_| perr(line, format!("bad arity `{rest}`")))?;
            if k == 0 || k > n_max {
                return Err(perr(line, format!("arity {k} outside 1..={n_max}")));
            }
            current = Some(k);
            continue;
        }
        let k = current.ok_or_else(|| perr(line, "tuple line before any `arity` line".into()))?;
        let (tuple, key) = l.split_once(':').ok_or_else(|| perr(line, "expected `<tuple> : <key>`".into()))?;
        let tuple: Vec<Element> = tuple
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| perr(line, format!("bad element `{x}`"))))
            .collect::<Result<_>>()?;
        if tuple.len() != k {
            return Err(perr(line, format!("tuple of length {} under arity {k}", tuple.len())));
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= carrier) {
            return Err(perr(line, format!("element {e} outside carrier of size {carrier}")));
        }
        let key: u32 = key.trim().parse().map_err(|_| perr(line, format!("bad key `{}`", key.trim())))?;
        if keys[k - 1].insert(tuple, key).is_some() {
            return Err(perr(line, "tuple listed twice".into()));
        }
    }
    for (i, map) in keys.iter().enumerate() {
        let k = i + 1;
        let expected = carrier.checked_pow(k as u32).unwrap_or(usize::MAX);
        if map.len() != expected {
            return Err(Error::input(format!("arity {k} lists {} tuples, expected {expected}", map.len())));
        }
        let mut patterns: HashMap<u32, Vec<usize>> = HashMap::new();
        for (t, &key) in map {
            let p = equality_pattern(t);
            if let Some(q) = patterns.get(&key) {
                if *q != p {
                    return Err(Error::input(format!("class {key} of arity {k} mixes equality patterns")));
                }
            } else {
                patterns.insert(key, p);
            }
        }
    }
    Ok(TypeTable { carrier, keys })
}
