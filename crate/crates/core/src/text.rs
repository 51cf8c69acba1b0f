//! Line-oriented text format for vocabularies, structures and P2 sets.
//!
//! ```text
//! # comment
//! vocab graph
//! rel R 2
//!
//! structure edge over graph
//! size 2
//! R: 0 1; 1 0
//! ```
//!
//! A line consisting of `p2` marks every following structure block as a
//! member of a permitted 1-/2-structure set. Any other top-level directive
//! is kept verbatim in [`Document::directives`] so that other file kinds can
//! layer on top of the format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structure::{FinStructure, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedStructure {
    pub name: String,
    pub vocab_name: String,
    pub structure: FinStructure,
    /// Whether the block appeared after a `p2` line.
    pub in_p2: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub vocabs: BTreeMap<String, Arc<Vocabulary>>,
    pub structures: Vec<NamedStructure>,
    /// Unrecognised top-level lines, as `(line number, keyword, rest)`.
    pub directives: Vec<(usize, String, String)>,
}

impl Document {
    pub fn structure(&self, name: &str) -> Option<&FinStructure> {
        self.structures.iter().find(|s| s.name == name).map(|s| &s.structure)
    }

    pub fn p2_members(&self) -> Vec<FinStructure> {
        self.structures.iter().filter(|s| s.in_p2).map(|s| s.structure.clone()).collect()
    }

    pub fn directive(&self, keyword: &str) -> Option<&str> {
        self.directives.iter().find(|(_, k, _)| k == keyword).map(|(_, _, r)| r.as_str())
    }
}

struct PendingVocab {
    name: String,
    symbols: Vec<(String, usize)>,
    line: usize,
}

struct PendingStructure {
    name: String,
    vocab_name: String,
    vocab: Arc<Vocabulary>,
    size: Option<usize>,
    facts: Vec<(usize, String, Vec<Vec<usize>>)>,
    in_p2: bool,
    line: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn finish_vocab(doc: &mut Document, v: PendingVocab) -> Result<()> {
    let vocab = Vocabulary::new(v.symbols).map_err(|e| parse_err(v.line, e.to_string()))?;
    if doc.vocabs.insert(v.name.clone(), Arc::new(vocab)).is_some() {
        return Err(parse_err(v.line, format!("vocabulary `{}` defined twice", v.name)));
    }
    Ok(())
}

fn finish_structure(doc: &mut Document, p: PendingStructure) -> Result<()> {
    let size = p.size.ok_or_else(|| parse_err(p.line, format!("structure `{}` has no size line", p.name)))?;
    let mut s = FinStructure::empty(p.vocab.clone(), size);
    for (line, sym, tuples) in p.facts {
        let idx = p
            .vocab
            .index_of(&sym)
            .ok_or_else(|| parse_err(line, format!("unknown symbol `{sym}` in vocabulary `{}`", p.vocab_name)))?;
        for t in tuples {
            s.insert(idx, &t).map_err(|e| parse_err(line, e.to_string()))?;
        }
    }
    doc.structures.push(NamedStructure { name: p.name, vocab_name: p.vocab_name, structure: s, in_p2: p.in_p2 });
    Ok(())
}

fn parse_tuples(line: usize, body: &str) -> Result<Vec<Vec<usize>>> {
    body.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.split_whitespace()
                .map(|x| x.parse::<usize>().map_err(|_| parse_err(line, format!("bad element `{x}`"))))
                .collect()
        })
        .collect()
}

enum Block {
    None,
    Vocab(PendingVocab),
    Structure(PendingStructure),
}

pub fn parse_document(text: &str) -> Result<Document> {
    let mut doc = Document::default();
    let mut block = Block::None;
    let mut in_p2 = false;

    fn close(doc: &mut Document, block: &mut Block) -> Result<()> {
        match std::mem::replace(block, Block::None) {
            Block::None => Ok(()),
            Block::Vocab(v) => finish_vocab(doc, v),
            Block::Structure(s) => finish_structure(doc, s),
        }
    }

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = match content.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (content, ""),
        };
        match keyword {
            "vocab" => {
                close(&mut doc, &mut block)?;
                if rest.is_empty() {
                    return Err(parse_err(line, "vocab needs a name"));
                }
                block = Block::Vocab(PendingVocab { name: rest.to_string(), symbols: Vec::new(), line });
            }
            "rel" => {
                let Block::Vocab(v) = &mut block else {
                    return Err(parse_err(line, "`rel` outside a vocab block"));
                };
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [name, arity] = parts[..] else {
                    return Err(parse_err(line, "expected `rel <symbol> <arity>`"));
                };
                let arity = arity.parse().map_err(|_| parse_err(line, format!("bad arity `{arity}`")))?;
                v.symbols.push((name.to_string(), arity));
            }
            "structure" => {
                close(&mut doc, &mut block)?;
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [name, "over", vocab_name] = parts[..] else {
                    return Err(parse_err(line, "expected `structure <name> over <vocab>`"));
                };
                let vocab = doc
                    .vocabs
                    .get(vocab_name)
                    .cloned()
                    .ok_or_else(|| parse_err(line, format!("unknown vocabulary `{vocab_name}`")))?;
                block = Block::Structure(PendingStructure {
                    name: name.to_string(),
                    vocab_name: vocab_name.to_string(),
                    vocab,
                    size: None,
                    facts: Vec::new(),
                    in_p2,
                    line,
                });
            }
            "size" => {
                let Block::Structure(s) = &mut block else {
                    return Err(parse_err(line, "`size` outside a structure block"));
                };
                s.size = Some(rest.parse().map_err(|_| parse_err(line, format!("bad size `{rest}`")))?);
            }
            "p2" => {
                close(&mut doc, &mut block)?;
                in_p2 = true;
            }
            _ if keyword.ends_with(':') || content.contains(':') && matches!(block, Block::Structure(_)) => {
                let Block::Structure(s) = &mut block else {
                    return Err(parse_err(line, format!("unexpected `{keyword}`")));
                };
                if s.size.is_none() {
                    return Err(parse_err(line, "relation line before `size`"));
                }
                let (sym, body) = content.split_once(':').expect("checked above");
                s.facts.push((line, sym.trim().to_string(), parse_tuples(line, body)?));
            }
            _ => {
                close(&mut doc, &mut block)?;
                doc.directives.push((line, keyword.to_string(), rest.to_string()));
            }
        }
    }
    close(&mut doc, &mut block)?;
    Ok(doc)
}

pub fn write_vocab(out: &mut String, name: &str, vocab: &Vocabulary) {
    let _ = writeln!(out, "vocab {name}");
    for s in vocab.symbols() {
        let _ = writeln!(out, "rel {} {}", s.name, s.arity);
    }
}

pub fn write_structure(out: &mut String, name: &str, vocab_name: &str, s: &FinStructure) {
    let _ = writeln!(out, "structure {name} over {vocab_name}");
    let _ = writeln!(out, "size {}", s.size());
    for (i, sym) in s.vocab().symbols().iter().enumerate() {
        let tuples = s.tuples(i);
        if tuples.is_empty() {
            continue;
        }
        let body: Vec<String> =
            tuples.iter().map(|t| t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")).collect();
        let _ = writeln!(out, "{}: {}", sym.name, body.join("; "));
    }
}

/// A complete document holding one vocabulary and one structure.
pub fn structure_to_text(name: &str, s: &FinStructure) -> String {
    let mut out = String::new();
    write_vocab(&mut out, "v", s.vocab());
    out.push('\n');
    write_structure(&mut out, name, "v", s);
    out
}

/// Parses a document and returns its only (or first) structure.
pub fn parse_structure(text: &str) -> Result<FinStructure> {
    let doc = parse_document(text)?;
    doc.structures
        .into_iter()
        .next()
        .map(|s| s.structure)
        .ok_or_else(|| Error::input("document contains no structure"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{graph, is_isomorphic};

    const P2: &str = "\
# the random graph
vocab graph
rel R 2

p2
structure empty over graph
size 0
structure point over graph
size 1
structure nonedge over graph
size 2
structure edge over graph
size 2
R: 0 1; 1 0
";

    #[test]
    fn parses_p2_file() {
        let doc = parse_document(P2).unwrap();
        let members = doc.p2_members();
        assert_eq!(members.len(), 4);
        assert_eq!(members[3].tuples(0), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn round_trip() {
        let g = graph("E", 4, &[(0, 1), (2, 3)]).unwrap();
        let text = structure_to_text("g", &g);
        let back = parse_structure(&text).unwrap();
        assert_eq!(back, g);
        assert!(is_isomorphic(&back, &g).unwrap().is_some());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "vocab v\nrel R 2\nstructure s over v\nsize 2\nR: 0 5\n";
        match parse_document(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        let unknown = "structure s over nope\n";
        assert!(matches!(parse_document(unknown), Err(Error::Parse { line: 1, .. })));
        let arity = "vocab v\nrel R x\n";
        assert!(matches!(parse_document(arity), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn unknown_directives_are_kept() {
        let doc = parse_document("vocab v\nrel R 2\nstructure s over v\nsize 2\npairs 0 1\n").unwrap();
        assert_eq!(doc.directive("pairs"), Some("0 1"));
    }
}
