//! Monte Carlo estimates of extension-axiom probabilities in uniformly
//! sampled members of a random class.
//!
//! Axioms are written in a small format resolved against a vocabulary:
//!
//! ```text
//! ext all 2            every compatible pattern over every 2 distinct points
//! ext 2: [R] [R]       a common neighbour of every 2 distinct points
//! ext 1: [R>] new [P]  a P-point with an R-edge towards every point
//! ```
//!
//! A link `[..]` lists binary symbols holding between the new point and the
//! corresponding base point: `S` in both directions, `S>` from the new point,
//! `S<` towards it. `[]` is no relation.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amalgamation::{apply_link, apply_point_type, check_1_adequate, link, point_type, Link, P2Spec, PointType};
use crate::error::{Error, Result};
use crate::generic::compatible_extensions;
use crate::structure::{Element, FinStructure, Vocabulary};

#[derive(Debug, Clone)]
pub enum AxiomSpec {
    /// Every `k` distinct points have a witness with this point type (any
    /// type when `None`) and these links to them.
    Pattern { k: usize, point: Option<PointType>, links: Vec<Link> },
    /// Every compatible one-point extension over every `k` distinct points
    /// is realised.
    All { k: usize, p2: P2Spec },
}

impl AxiomSpec {
    pub fn k(&self) -> usize {
        match self {
            AxiomSpec::Pattern { k, .. } | AxiomSpec::All { k, .. } => *k,
        }
    }

    /// Whether some assignment of permitted point types to the base points
    /// makes the pattern realisable in the class.
    pub fn compatible_with(&self, p2: &P2Spec) -> bool {
        match self {
            AxiomSpec::All { .. } => true,
            AxiomSpec::Pattern { point, links, .. } => p2.point_types().iter().any(|&p| {
                point.map_or(true, |q| q == p)
                    && links.iter().all(|&l| p2.point_types().iter().any(|&q| p2.permits_link(p, q, l)))
            }),
        }
    }
}

impl fmt::Display for AxiomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomSpec::All { k, .. } => write!(f, "ext all {k}"),
            AxiomSpec::Pattern { k, point, links } => {
                write!(f, "ext {k}:")?;
                for l in links {
                    write!(f, " [{:x}/{:x}]", l.forward, l.backward)?;
                }
                if let Some(p) = point {
                    write!(f, " new [{:x}]", p.0)?;
                }
                Ok(())
            }
        }
    }
}

fn parse_link(vocab: &Vocabulary, body: &str) -> Result<Link> {
    let mut l = Link::NONE;
    for item in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let (name, fwd, bwd) = if let Some(n) = item.strip_suffix('>') {
            (n, true, false)
        } else if let Some(n) = item.strip_suffix('<') {
            (n, false, true)
        } else {
            (item, true, true)
        };
        let sym = vocab.index_of(name).ok_or_else(|| Error::input(format!("unknown symbol `{name}` in axiom")))?;
        if vocab.arity(sym) != 2 {
            return Err(Error::input(format!("`{name}` is not binary")));
        }
        if fwd {
            l.forward |= 1 << sym;
        }
        if bwd {
            l.backward |= 1 << sym;
        }
    }
    Ok(l)
}

fn parse_point(vocab: &Vocabulary, body: &str) -> Result<PointType> {
    let mut p = 0u64;
    for name in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let sym = vocab.index_of(name).ok_or_else(|| Error::input(format!("unknown symbol `{name}` in axiom")))?;
        if vocab.arity(sym) > 2 {
            return Err(Error::input(format!("`{name}` has arity above 2")));
        }
        p |= 1 << sym;
    }
    Ok(PointType(p))
}

/// Splits `[a] [b c] ...` into bracket bodies.
fn brackets(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[').ok_or_else(|| Error::input(format!("expected `[` at `{rest}`")))?;
        let end = inner.find(']').ok_or_else(|| Error::input("unclosed `[` in axiom"))?;
        out.push(&inner[..end]);
        rest = inner[end + 1..].trim_start();
    }
    Ok(out)
}

/// Parses one axiom against the vocabulary of `p2`.
pub fn parse_axiom(text: &str, p2: &P2Spec) -> Result<AxiomSpec> {
    let vocab = p2.vocab();
    let t = text.trim();
    let rest = t.strip_prefix("ext").ok_or_else(|| Error::input(format!("axiom `{t}` must start with `ext`")))?.trim();
    if let Some(k) = rest.strip_prefix("all") {
        let k = k.trim().parse().map_err(|_| Error::input(format!("bad parameter count in `{t}`")))?;
        return Ok(AxiomSpec::All { k, p2: p2.clone() });
    }
    let (k, body) = rest.split_once(':').ok_or_else(|| Error::input(format!("expected `ext <k>: ...` in `{t}`")))?;
    let k: usize = k.trim().parse().map_err(|_| Error::input(format!("bad parameter count in `{t}`")))?;
    let (links, point) = match body.split_once("new") {
        Some((l, p)) => (l, Some(p)),
        None => (body, None),
    };
    let links = brackets(links)?.into_iter().map(|b| parse_link(vocab, b)).collect::<Result<Vec<_>>>()?;
    if links.len() != k {
        return Err(Error::input(format!("axiom declares {k} parameters but gives {} links", links.len())));
    }
    let point = match point {
        Some(p) => {
            let b = brackets(p)?;
            let [one] = b[..] else {
                return Err(Error::input("`new` takes exactly one bracketed point pattern"));
            };
            Some(parse_point(vocab, one)?)
        }
        None => None,
    };
    Ok(AxiomSpec::Pattern { k, point, links })
}

/// Calls `f` on every tuple of `k` distinct elements of `0..n`.
fn for_each_injective(n: usize, k: usize, mut f: impl FnMut(&[Element]) -> bool) -> bool {
    fn go(n: usize, k: usize, t: &mut Vec<Element>, f: &mut dyn FnMut(&[Element]) -> bool) -> bool {
        if t.len() == k {
            return f(t);
        }
        for x in 0..n {
            if t.contains(&x) {
                continue;
            }
            t.push(x);
            let ok = go(n, k, t, f);
            t.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    go(n, k, &mut Vec::with_capacity(k), &mut f)
}

/// Whether every `k` distinct points of `s` have the witnesses the axiom
/// demands.
pub fn axiom_holds(s: &FinStructure, ax: &AxiomSpec) -> bool {
    let n = s.size();
    let k = ax.k();
    for_each_injective(n, k, |base| {
        let mut wanted: HashSet<(PointType, Vec<Link>)> = match ax {
            AxiomSpec::Pattern { point: None, links, .. } => {
                // Any point type will do: look for the links alone.
                return (0..n).any(|w| !base.contains(&w) && base.iter().zip(links).all(|(&b, &l)| link(s, w, b) == l));
            }
            AxiomSpec::Pattern { point: Some(p), links, .. } => [(*p, links.clone())].into_iter().collect(),
            AxiomSpec::All { p2, .. } => {
                compatible_extensions(p2, s, base).into_iter().map(|t| (t.point, t.links)).collect()
            }
        };
        for w in 0..n {
            if wanted.is_empty() {
                break;
            }
            if base.contains(&w) {
                continue;
            }
            let key = (point_type(s, w), base.iter().map(|&b| link(s, w, b)).collect::<Vec<_>>());
            wanted.remove(&key);
        }
        wanted.is_empty()
    })
}

fn sample_with(p2: &P2Spec, n: usize, rng: &mut ChaCha8Rng) -> FinStructure {
    let types: Vec<PointType> = p2.point_types().iter().copied().collect();
    let mut s = FinStructure::empty(p2.vocab().clone(), n);
    let chosen: Vec<PointType> = (0..n).map(|_| types[rng.gen_range(0..types.len())]).collect();
    for (x, &p) in chosen.iter().enumerate() {
        apply_point_type(&mut s, x, p);
    }
    for x in 0..n {
        for y in x + 1..n {
            let options = p2.links(chosen[x], chosen[y]);
            apply_link(&mut s, x, y, options[rng.gen_range(0..options.len())]);
        }
    }
    s
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn require_adequate(p2: &P2Spec) -> Result<()> {
    let r = check_1_adequate(p2);
    if r.holds {
        Ok(())
    } else {
        Err(Error::Adequacy(format!("missing joint embeddings: {:?}", r.missing_pairs)))
    }
}

/// Draws each point type and then each unordered pair's link independently
/// and uniformly among the permitted options.
pub fn sample_uniform(p2: &P2Spec, n: usize, seed: u64) -> Result<FinStructure> {
    require_adequate(p2)?;
    Ok(sample_with(p2, n, &mut trial_rng(seed, 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbEstimate {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub seed: u64,
}

impl ProbEstimate {
    pub fn estimate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        let n = self.trials as f64;
        let p = self.estimate();
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

/// Fraction of `trials` uniform samples of size `n` satisfying every axiom.
/// Trial `i` uses stream `i` of the seed, so the result does not depend on
/// scheduling.
pub fn estimate_probability(p2: &P2Spec, axioms: &[AxiomSpec], n: usize, trials: usize, seed: u64) -> Result<ProbEstimate> {
    if trials == 0 {
        return Err(Error::input("at least one trial is needed"));
    }
    require_adequate(p2)?;
    let successes = (0..trials as u64)
        .into_par_iter()
        .filter(|&i| {
            let s = sample_with(p2, n, &mut trial_rng(seed, i));
            axioms.iter().all(|ax| axiom_holds(&s, ax))
        })
        .count();
    Ok(ProbEstimate { n, trials, successes, seed })
}

/// 97.5% quantile of the standard normal distribution.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub estimate: ProbEstimate,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Set when some axiom cannot be realised in the class; the rows are
    /// then all zero.
    pub incompatible: bool,
    /// Consecutive sizes whose estimates drop with disjoint intervals.
    pub non_monotone: Vec<(usize, usize)>,
}

impl ConvergenceReport {
    pub fn monotone(&self) -> bool {
        self.non_monotone.is_empty()
    }
}

pub fn convergence_report(
    p2: &P2Spec,
    axioms: &[AxiomSpec],
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if sizes.is_empty() {
        return Err(Error::input("at least one size is needed"));
    }
    if trials == 0 {
        return Err(Error::input("at least one trial is needed"));
    }
    require_adequate(p2)?;
    if !axioms.iter().all(|a| a.compatible_with(p2)) {
        let rows = sizes
            .iter()
            .map(|&n| ConvergenceRow { estimate: ProbEstimate { n, trials, successes: 0, seed }, lower: 0.0, upper: 0.0 })
            .collect();
        return Ok(ConvergenceReport { rows, incompatible: true, non_monotone: Vec::new() });
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut non_monotone = Vec::new();
    for &n in sizes {
        let estimate = estimate_probability(p2, axioms, n, trials, seed)?;
        let (lower, upper) = estimate.wilson(Z_95);
        if let Some(prev) = rows.last() {
            if estimate.estimate() < prev.estimate.estimate() && upper < prev.lower {
                non_monotone.push((prev.estimate.n, n));
            }
        }
        rows.push(ConvergenceRow { estimate, lower, upper });
    }
    Ok(ConvergenceReport { rows, incompatible: false, non_monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::graph;

    fn common_neighbour() -> AxiomSpec {
        parse_axiom("ext 2: [R] [R]", &P2Spec::random_graph()).unwrap()
    }

    #[test]
    fn parses_the_mini_format() {
        let p2 = P2Spec::random_graph();
        match parse_axiom("ext 2: [R] []", &p2).unwrap() {
            AxiomSpec::Pattern { k: 2, point: None, links } => {
                assert_eq!(links, vec![Link { forward: 1, backward: 1 }, Link::NONE]);
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_axiom("ext 1: [R>]", &p2).unwrap() {
            AxiomSpec::Pattern { links, .. } => assert_eq!(links, vec![Link { forward: 1, backward: 0 }]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_axiom("ext all 2", &p2).unwrap(), AxiomSpec::All { k: 2, .. }));
        assert!(parse_axiom("ext 2: [R]", &p2).is_err());
        assert!(parse_axiom("ext 1: [Q]", &p2).is_err());
        assert!(parse_axiom("ext 1: [R", &p2).is_err());
    }

    #[test]
    fn common_neighbour_in_triangle_and_path() {
        let triangle = graph("R", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let path = graph("R", 3, &[(0, 1), (1, 2)]).unwrap();
        assert!(axiom_holds(&triangle, &common_neighbour()));
        assert!(!axiom_holds(&path, &common_neighbour()));
        let empty = graph("R", 0, &[]).unwrap();
        assert!(axiom_holds(&empty, &common_neighbour()));
    }

    #[test]
    fn samples_are_deterministic_members() {
        let p2 = P2Spec::random_graph();
        let a = sample_uniform(&p2, 30, 9).unwrap();
        assert_eq!(a, sample_uniform(&p2, 30, 9).unwrap());
        assert!(p2.in_rp2(&a).unwrap());
        assert_eq!(sample_uniform(&p2, 0, 9).unwrap().size(), 0);
    }

    #[test]
    fn edge_density_is_one_half() {
        let p2 = P2Spec::random_graph();
        let n = 60;
        let pairs = (n * (n - 1) / 2) as f64 * 20.0;
        let mut edges = 0.0;
        for seed in 0..20 {
            edges += sample_uniform(&p2, n, seed).unwrap().fact_count(0) as f64 / 2.0;
        }
        let sigma = (pairs * 0.25).sqrt();
        assert!((edges - pairs / 2.0).abs() < 3.0 * sigma, "{edges} edges of {pairs}");
    }

    #[test]
    fn vacuous_axiom_on_empty_structures() {
        let p2 = P2Spec::random_graph();
        let e = estimate_probability(&p2, &[common_neighbour()], 0, 1, 3).unwrap();
        assert_eq!(e.estimate(), 1.0);
    }

    #[test]
    fn small_graphs_rarely_satisfy_all_pair_axioms() {
        let p2 = P2Spec::random_graph();
        let all = parse_axiom("ext all 2", &p2).unwrap();
        let e = estimate_probability(&p2, &[all], 4, 200, 1).unwrap();
        assert!(e.estimate() < 0.5);
    }

    #[test]
    fn incompatible_axioms_are_flagged() {
        let p2 = P2Spec::random_graph();
        let one_way = parse_axiom("ext 1: [R>]", &p2).unwrap();
        let r = convergence_report(&p2, &[one_way], &[5, 10], 10, 0).unwrap();
        assert!(r.incompatible);
        assert!(r.rows.iter().all(|row| row.estimate.successes == 0));
        let single = convergence_report(&p2, &[common_neighbour()], &[10], 10, 0).unwrap();
        assert_eq!(single.rows.len(), 1);
    }

    #[test]
    fn wilson_interval_contains_the_estimate() {
        let e = ProbEstimate { n: 1, trials: 200, successes: 199, seed: 0 };
        let (lo, hi) = e.wilson(Z_95);
        assert!(lo < e.estimate() && e.estimate() <= hi && hi <= 1.0);
    }
}
