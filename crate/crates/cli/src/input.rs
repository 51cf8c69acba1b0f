use std::path::Path;

use fraisse_core::amalgamation::{ClassSpec, P2Spec};
use fraisse_core::doubled::QuotientGeometry;
use fraisse_core::generic::Saturation;
use fraisse_core::reduct::{binary_fragment, parse_type_table, TypeTable, TypedUniverse};
use fraisse_core::text::{parse_document, Document};
use fraisse_core::{Element, FinStructure};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const RANDOM_GRAPH_P2: &str = include_str!("../../core/data/random_graph.p2");

/// A file read for a run, with the digest recorded in the report header.
#[derive(Debug, Clone)]
pub struct Input {
    pub role: String,
    pub path: String,
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read(role: &str, path: &Path) -> Result<(String, Input), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let input = Input { role: role.to_string(), path: path.display().to_string(), digest: digest(text.as_bytes()) };
    Ok((text, input))
}

fn parse(path: &Path, text: &str) -> Result<Document, CliError> {
    parse_document(text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// The P2 set in `path`, or the random graph's when `path` is `None`.
pub fn load_p2(path: Option<&Path>) -> Result<(P2Spec, Input), CliError> {
    let (text, input) = match path {
        Some(p) => read("p2", p)?,
        None => {
            let input =
                Input { role: "p2".into(), path: "builtin:random-graph".into(), digest: digest(RANDOM_GRAPH_P2.as_bytes()) };
            (RANDOM_GRAPH_P2.to_string(), input)
        }
    };
    let label = path.map_or("builtin".into(), |p| p.display().to_string());
    let doc = parse_document(&text).map_err(|e| CliError::Usage(format!("{label}: {e}")))?;
    let members = doc.p2_members();
    if members.is_empty() {
        return Err(CliError::Usage(format!("{label}: no structures after a `p2` line")));
    }
    Ok((P2Spec::new(members)?, input))
}

/// A class file: a P2 document gives the random class, any other document
/// the isomorphism closure of its structures.
pub fn load_class(path: &Path, size_bound: usize) -> Result<(ClassSpec, Input), CliError> {
    let (text, input) = read("class", path)?;
    let doc = parse(path, &text)?;
    let members = doc.p2_members();
    let spec = if !members.is_empty() {
        ClassSpec::Random { p2: P2Spec::new(members)?, size_bound }
    } else if !doc.structures.is_empty() {
        ClassSpec::Explicit { structures: doc.structures.into_iter().map(|s| s.structure).collect(), size_bound }
    } else {
        return Err(CliError::Usage(format!("{}: no structures", path.display())));
    };
    Ok((spec, input))
}

/// A structure file with an optional `saturation <level> <prefix>` line.
pub fn load_structure(path: &Path) -> Result<(FinStructure, Saturation, Input), CliError> {
    let (text, input) = read("structure", path)?;
    let doc = parse(path, &text)?;
    let s = doc
        .structures
        .first()
        .map(|s| s.structure.clone())
        .ok_or_else(|| CliError::Usage(format!("{}: no structure", path.display())))?;
    let saturation = match doc.directive("saturation") {
        None => Saturation::default(),
        Some(rest) => {
            let nums: Vec<usize> = parse_list(rest.split_whitespace())
                .map_err(|e| CliError::Usage(format!("{}: saturation line: {e}", path.display())))?;
            let [level, prefix] = nums[..] else {
                return Err(CliError::Usage(format!("{}: expected `saturation <level> <prefix>`", path.display())));
            };
            Saturation { level, prefix: prefix.min(s.size()) }
        }
    };
    Ok((s, saturation, input))
}

fn parse_list<'a>(items: impl Iterator<Item = &'a str>) -> Result<Vec<usize>, String> {
    items.map(|x| x.parse::<usize>().map_err(|_| format!("bad number `{x}`"))).collect()
}

/// Parses `a b; c d; ...` into pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<[Element; 2]>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let nums = parse_list(p.split_whitespace())?;
            match nums[..] {
                [a, b] => Ok([a, b]),
                _ => Err(format!("expected two elements in `{p}`")),
            }
        })
        .collect()
}

/// A quotient description: a structure, its pairing and whether the full
/// quotient types or only its binary fragment are meant.
pub fn quotient_text(name: &str, q: &QuotientGeometry, fragment: &str) -> String {
    let mut out = fraisse_core::text::structure_to_text(name, &q.m);
    let pairs: Vec<String> = q.classes.iter().map(|[a, b]| format!("{a} {b}")).collect();
    out.push_str(&format!("\npairs {}\nfragment {fragment}\n", pairs.join("; ")));
    out
}

pub enum Universe {
    Table(TypeTable),
    Structure(FinStructure),
    Quotient(QuotientGeometry),
}

impl Universe {
    pub fn as_dyn(&self) -> &dyn TypedUniverse {
        match self {
            Universe::Table(t) => t,
            Universe::Structure(s) => s,
            Universe::Quotient(q) => q,
        }
    }
}

/// A typed universe from a type table, a quotient description or a plain
/// structure.
pub fn load_universe(role: &str, path: &Path) -> Result<(Universe, Input), CliError> {
    let (text, input) = read(role, path)?;
    let first = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty());
    if first.is_some_and(|l| l.starts_with("typed-universe")) {
        let table = parse_type_table(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return Ok((Universe::Table(table), input));
    }
    let doc = parse(path, &text)?;
    let s = doc
        .structures
        .first()
        .map(|s| s.structure.clone())
        .ok_or_else(|| CliError::Usage(format!("{}: no structure or type table", path.display())))?;
    let Some(pairs) = doc.directive("pairs") else {
        return Ok((Universe::Structure(s), input));
    };
    let pairs = parse_pairs(pairs).map_err(|e| CliError::Usage(format!("{}: pairs line: {e}", path.display())))?;
    let mut pairing = vec![usize::MAX; s.size()];
    for [a, b] in pairs {
        if a >= s.size() || b >= s.size() {
            return Err(CliError::Usage(format!("{}: pair ({a}, {b}) outside the universe", path.display())));
        }
        pairing[a] = b;
        pairing[b] = a;
    }
    let q = QuotientGeometry::new(s, &pairing).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    match doc.directive("fragment").unwrap_or("full") {
        "full" => Ok((Universe::Quotient(q), input)),
        "binary" => Ok((Universe::Structure(binary_fragment(&q)?.structure), input)),
        other => Err(CliError::Usage(format!("{}: unknown fragment `{other}`", path.display()))),
    }
}
