use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amalgamation::{apply_link, apply_point_type, check_1_adequate, link, point_type, Link, P2Spec, PointType};
use crate::error::{Error, Result};
use crate::structure::{tuple_type, Element, FinStructure};

/// A one-point extension pattern over an ordered base: the point type of
/// the new element and its link to each base element (`forward` bits are
/// relations from the new element to the base element).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtensionType {
    pub base: Vec<Element>,
    pub point: PointType,
    pub links: Vec<Link>,
}

impl ExtensionType {
    /// The pattern `x` realises over `base` in `s`.
    pub fn realised_by(s: &FinStructure, base: &[Element], x: Element) -> Self {
        ExtensionType {
            base: base.to_vec(),
            point: point_type(s, x),
            links: base.iter().map(|&b| link(s, x, b)).collect(),
        }
    }
}

impl fmt::Display for ExtensionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base: Vec<String> = self.base.iter().map(|b| b.to_string()).collect();
        let links: Vec<String> = self.links.iter().map(|l| format!("{:x}/{:x}", l.forward, l.backward)).collect();
        write!(f, "base=[{}] point={:x} links=[{}]", base.join(","), self.point.0, links.join(","))
    }
}

/// One logged call of [`GenericOracle::extend_one_point`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionStep {
    pub element: Element,
    pub tau: ExtensionType,
}

impl fmt::Display for ExtensionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "extend {} {}", self.element, self.tau)
    }
}

impl ExtensionStep {
    /// Parses the line format written by `Display`.
    pub fn parse(line: &str) -> Result<Self> {
        let bad = || Error::input(format!("malformed extension step `{line}`"));
        let rest = line.trim().strip_prefix("extend ").ok_or_else(bad)?;
        let mut parts = rest.split_whitespace();
        let element = parts.next().and_then(|e| e.parse().ok()).ok_or_else(bad)?;
        let field = |p: Option<&str>, key: &str| -> Result<String> {
            p.and_then(|s| s.strip_prefix(key)).map(str::to_string).ok_or_else(bad)
        };
        let base = field(parts.next(), "base=")?;
        let point = field(parts.next(), "point=")?;
        let links = field(parts.next(), "links=")?;
        let list = |s: &str| -> Vec<String> {
            s.trim_start_matches('[').trim_end_matches(']').split(',').filter(|x| !x.is_empty()).map(str::to_string).collect()
        };
        let base = list(&base).iter().map(|b| b.parse().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        let point = PointType(u64::from_str_radix(&point, 16).map_err(|_| bad())?);
        let links = list(&links)
            .iter()
            .map(|l| {
                let (f, b) = l.split_once('/').ok_or_else(bad)?;
                Ok(Link {
                    forward: u64::from_str_radix(f, 16).map_err(|_| bad())?,
                    backward: u64::from_str_radix(b, 16).map_err(|_| bad())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExtensionStep { element, tau: ExtensionType { base, point, links } })
    }
}

/// The region over which a saturation pass has been verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Saturation {
    pub level: usize,
    /// Elements `0..prefix` formed the universe when the pass started.
    pub prefix: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationReport {
    pub level: usize,
    pub prefix: usize,
    pub points_added: usize,
    pub saturated: bool,
    /// The first pattern left unrealised when the budget ran out.
    pub missing: Option<ExtensionType>,
}

/// A seeded, growing finite approximation of the Fraïssé limit of the random
/// class of a 1-adequate P2 set over a binary vocabulary.
#[derive(Debug, Clone)]
pub struct GenericOracle {
    p2: P2Spec,
    current: FinStructure,
    seed: u64,
    rng: ChaCha8Rng,
    /// Separate stream for choices made by `grow`, so that replaying the
    /// logged extension types reproduces the link draws exactly.
    choice_rng: ChaCha8Rng,
    saturation: Saturation,
    log: Vec<ExtensionStep>,
}

impl GenericOracle {
    pub fn new(p2: P2Spec, seed: u64) -> Result<Self> {
        let report = check_1_adequate(&p2);
        if !report.holds {
            return Err(Error::Adequacy(format!(
                "hp violation: {:?}, missing joint embeddings: {:?}, has 2-structure: {}",
                report.hp_violation, report.missing_pairs, report.has_two_structure
            )));
        }
        let current = FinStructure::empty(p2.vocab().clone(), 0);
        let mut choice_rng = ChaCha8Rng::seed_from_u64(seed);
        choice_rng.set_stream(1);
        Ok(GenericOracle { p2, current, seed, rng: ChaCha8Rng::seed_from_u64(seed), choice_rng, saturation: Saturation::default(), log: Vec::new() })
    }

    /// Rebuilds an oracle by replaying a transcript.
    pub fn replay(p2: P2Spec, seed: u64, steps: &[ExtensionStep]) -> Result<Self> {
        let mut o = GenericOracle::new(p2, seed)?;
        for step in steps {
            let e = o.extend_one_point(&step.tau)?;
            if e != step.element {
                return Err(Error::input(format!("transcript expects element {}, replay produced {e}", step.element)));
            }
        }
        Ok(o)
    }

    pub fn p2(&self) -> &P2Spec {
        &self.p2
    }

    pub fn current(&self) -> &FinStructure {
        &self.current
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn size(&self) -> usize {
        self.current.size()
    }

    pub fn saturation(&self) -> Saturation {
        self.saturation
    }

    /// Whether every subset of the whole universe of size at most `k` has
    /// all its compatible one-point extensions realised.
    pub fn is_closed(&self, k: usize) -> bool {
        self.saturation.level >= k && self.saturation.prefix == self.size()
    }

    pub fn log(&self) -> &[ExtensionStep] {
        &self.log
    }

    pub fn transcript(&self) -> String {
        self.log.iter().map(|s| format!("{s}\n")).collect()
    }

    /// Whether `tau` is a legal one-point extension of the current structure.
    pub fn check_compatible(&self, tau: &ExtensionType) -> Result<()> {
        if tau.links.len() != tau.base.len() {
            return Err(Error::Extension("one link per base element required".into()));
        }
        let mut seen = HashSet::new();
        for &b in &tau.base {
            if b >= self.size() {
                return Err(Error::Extension(format!("base element {b} is not in the universe")));
            }
            if !seen.insert(b) {
                return Err(Error::Extension(format!("base element {b} repeated")));
            }
        }
        if !self.p2.permits_point(tau.point) {
            return Err(Error::Extension(format!("point type {:x} is not permitted", tau.point.0)));
        }
        for (&b, &l) in tau.base.iter().zip(&tau.links) {
            if !self.p2.permits_link(tau.point, point_type(&self.current, b), l) {
                return Err(Error::Extension(format!("link {:x}/{:x} to element {b} is not permitted", l.forward, l.backward)));
            }
        }
        Ok(())
    }

    /// Appends a fresh element realising `tau` over its base. Links to every
    /// other element are drawn uniformly from the permitted ones.
    pub fn extend_one_point(&mut self, tau: &ExtensionType) -> Result<Element> {
        self.check_compatible(tau)?;
        let n = self.size();
        let mut fixed: Vec<Option<Link>> = vec![None; n];
        for (&b, &l) in tau.base.iter().zip(&tau.links) {
            fixed[b] = Some(l);
        }
        let mut chosen = Vec::with_capacity(n);
        for (x, f) in fixed.iter().enumerate() {
            let l = match f {
                Some(l) => *l,
                None => {
                    let options = self.p2.links(tau.point, point_type(&self.current, x));
                    // 1-adequacy guarantees at least one option.
                    options[self.rng.gen_range(0..options.len())]
                }
            };
            chosen.push(l);
        }
        let v = self.current.push_element();
        apply_point_type(&mut self.current, v, tau.point);
        for (x, l) in chosen.into_iter().enumerate() {
            apply_link(&mut self.current, v, x, l);
        }
        debug_assert!(self.p2.first_violation(&self.current).is_none());
        self.log.push(ExtensionStep { element: v, tau: tau.clone() });
        Ok(v)
    }

    /// Adds `count` points with a uniformly chosen point type and no base.
    pub fn grow(&mut self, count: usize) -> Result<Vec<Element>> {
        let types: Vec<PointType> = self.p2.point_types().iter().copied().collect();
        (0..count)
            .map(|_| {
                let point = types[self.choice_rng.gen_range(0..types.len())];
                self.extend_one_point(&ExtensionType { base: vec![], point, links: vec![] })
            })
            .collect()
    }

    /// Every compatible one-point extension pattern over `base`.
    pub fn compatible_extensions(&self, base: &[Element]) -> Vec<ExtensionType> {
        compatible_extensions(&self.p2, &self.current, base)
    }

    /// One saturation pass: every compatible one-point extension over every
    /// subset of at most `k` elements of the current universe gets a
    /// witness, adding at most `budget` points.
    pub fn saturate(&mut self, k: usize, budget: usize) -> SaturationReport {
        let prefix = self.size();
        let mut added = 0;
        for base in subsets_of_size_at_most(prefix, k) {
            let realised: HashSet<ExtensionType> = (0..self.size())
                .filter(|x| !base.contains(x))
                .map(|x| ExtensionType::realised_by(&self.current, &base, x))
                .collect();
            for tau in self.compatible_extensions(&base) {
                if realised.contains(&tau) {
                    continue;
                }
                if added == budget {
                    return SaturationReport { level: k, prefix, points_added: added, saturated: false, missing: Some(tau) };
                }
                self.extend_one_point(&tau).expect("pattern enumerated as compatible");
                added += 1;
            }
        }
        self.saturation = Saturation { level: k, prefix };
        SaturationReport { level: k, prefix, points_added: added, saturated: true, missing: None }
    }

    /// Runs up to `passes` saturation passes, each over the universe left by
    /// the previous one. Stops early once a pass adds nothing, at which point
    /// the whole universe is saturated.
    pub fn saturate_passes(&mut self, k: usize, budget: usize, passes: usize) -> Vec<SaturationReport> {
        let mut reports = Vec::new();
        let mut left = budget;
        for _ in 0..passes {
            let r = self.saturate(k, left);
            left -= r.points_added;
            let done = !r.saturated || r.points_added == 0;
            reports.push(r);
            if done {
                break;
            }
        }
        reports
    }
}

/// Every one-point extension pattern over `base` in `s` that the
/// permitted set allows, in a fixed order.
pub fn compatible_extensions(p2: &P2Spec, s: &FinStructure, base: &[Element]) -> Vec<ExtensionType> {
    let base_types: Vec<PointType> = base.iter().map(|&b| point_type(s, b)).collect();
    let mut out = Vec::new();
    for &p in p2.point_types() {
        let options: Vec<Vec<Link>> = base_types.iter().map(|&q| p2.links(p, q)).collect();
        if options.iter().any(Vec::is_empty) {
            continue;
        }
        let mut choice = vec![0usize; base.len()];
        'choices: loop {
            out.push(ExtensionType {
                base: base.to_vec(),
                point: p,
                links: choice.iter().zip(&options).map(|(&c, o)| o[c]).collect(),
            });
            for i in (0..base.len()).rev() {
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    continue 'choices;
                }
                choice[i] = 0;
            }
            break;
        }
    }
    out
}

pub(crate) fn subsets_of_size_at_most(n: usize, k: usize) -> Vec<Vec<Element>> {
    let mut out = Vec::new();
    for size in 0..=k.min(n) {
        let mut cur: Vec<Element> = (0..size).collect();
        loop {
            out.push(cur.clone());
            // Advance to the next combination in lexicographic order.
            let mut i = size;
            while i > 0 && cur[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            cur[i - 1] += 1;
            for j in i..size {
                cur[j] = cur[j - 1] + 1;
            }
        }
    }
    out
}

/// Independent check of saturation: for every subset of `0..prefix` of size
/// at most `k` and every point type and link assignment whose one-point
/// extension stays in the random class, some element realises the same
/// quantifier-free type over the subset. Returns the first unrealised
/// pattern.
pub fn verify_saturation(s: &FinStructure, p2: &P2Spec, k: usize, prefix: usize) -> Option<ExtensionType> {
    let vocab = p2.vocab();
    let points = crate::amalgamation::all_point_types(vocab);
    let links = crate::amalgamation::all_links(vocab);
    for base in subsets_of_size_at_most(prefix.min(s.size()), k) {
        let (induced, _) = s.induced_substructure(&base).expect("base inside universe");
        let realised: HashSet<_> = (0..s.size())
            .filter(|x| !base.contains(x))
            .map(|x| {
                let mut t = base.clone();
                t.push(x);
                tuple_type(s, &t).expect("in range")
            })
            .collect();
        let target: Vec<Element> = (0..=base.len()).collect();
        for &p in &points {
            let mut choice = vec![0usize; base.len()];
            'choices: loop {
                let mut candidate = induced.clone();
                let v = candidate.push_element();
                apply_point_type(&mut candidate, v, p);
                for (i, &c) in choice.iter().enumerate() {
                    apply_link(&mut candidate, v, i, links[c]);
                }
                if p2.in_rp2(&candidate).unwrap_or(false) && !realised.contains(&tuple_type(&candidate, &target).unwrap()) {
                    return Some(ExtensionType {
                        base: base.clone(),
                        point: p,
                        links: choice.iter().map(|&c| links[c]).collect(),
                    });
                }
                for i in (0..base.len()).rev() {
                    choice[i] += 1;
                    if choice[i] < links.len() {
                        continue 'choices;
                    }
                    choice[i] = 0;
                }
                break;
            }
        }
    }
    None
}
