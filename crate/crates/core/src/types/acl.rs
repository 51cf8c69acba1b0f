use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::Result;
use crate::generic::{subsets_of_size_at_most, ExtensionType, GenericOracle};
use crate::reduct::TypedUniverse;
use crate::structure::{Element, TypeId};

/// A finite approximation on which algebraic closure is estimated.
pub trait Approximation {
    fn universe(&self) -> &dyn TypedUniverse;

    /// Elements `0..region` are those the saturation guarantee speaks about.
    fn region(&self) -> usize;

    fn saturation_level(&self) -> usize;

    /// Whether every one-point extension over `base` is known to be realised
    /// in the approximation. Required before an element is declared
    /// algebraic over `base`.
    fn guarantees(&self, base: &[Element]) -> bool {
        base.iter().all(|&b| b < self.region()) && base.len() < self.saturation_level()
    }

    fn can_grow(&self) -> bool {
        false
    }

    /// Adds a fresh element with the type of `witness` over `base`, if the
    /// approximation can grow.
    fn extend_like(&mut self, _base: &[Element], _witness: Element) -> Result<Option<Element>> {
        Ok(None)
    }
}

/// A fixed structure with a declared saturation level over `0..region`.
pub struct FixedApproximation<U> {
    pub universe: U,
    pub level: usize,
    pub region: usize,
}

impl<U: TypedUniverse> Approximation for FixedApproximation<U> {
    fn universe(&self) -> &dyn TypedUniverse {
        &self.universe
    }

    fn region(&self) -> usize {
        self.region
    }

    fn saturation_level(&self) -> usize {
        self.level
    }
}

/// A generic oracle that is grown on demand to exhibit realisations.
pub struct OracleApproximation<'a> {
    pub oracle: &'a mut GenericOracle,
}

impl Approximation for OracleApproximation<'_> {
    fn universe(&self) -> &dyn TypedUniverse {
        self.oracle.current()
    }

    fn region(&self) -> usize {
        self.oracle.saturation().prefix
    }

    fn saturation_level(&self) -> usize {
        self.oracle.saturation().level
    }

    fn can_grow(&self) -> bool {
        true
    }

    fn extend_like(&mut self, base: &[Element], witness: Element) -> Result<Option<Element>> {
        // Over a binary vocabulary the point type and the links to the base
        // determine the whole type of `base ⌢ witness`.
        let tau = ExtensionType::realised_by(self.oracle.current(), base, witness);
        self.oracle.extend_one_point(&tau).map(Some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AclVerdict {
    Algebraic,
    NonAlgebraic,
    Inconclusive,
}

impl fmt::Display for AclVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AclVerdict::Algebraic => "algebraic",
            AclVerdict::NonAlgebraic => "non-algebraic",
            AclVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AclEntry {
    pub element: Element,
    /// Realisations of the element's type over the base, itself included.
    pub count: usize,
    pub verdict: AclVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AclReport {
    pub base: Vec<Element>,
    pub d: usize,
    pub entries: Vec<AclEntry>,
    pub points_added: usize,
}

impl AclReport {
    pub fn algebraic(&self) -> BTreeSet<Element> {
        self.with_verdict(AclVerdict::Algebraic)
    }

    pub fn inconclusive(&self) -> BTreeSet<Element> {
        self.with_verdict(AclVerdict::Inconclusive)
    }

    fn with_verdict(&self, v: AclVerdict) -> BTreeSet<Element> {
        self.entries.iter().filter(|e| e.verdict == v).map(|e| e.element).collect()
    }
}

/// Classifies each candidate (by default every region element) as
/// algebraic over `base` when fewer than `d` elements share its type over
/// `base`. Short counts are topped up through `extend_like`, spending at
/// most `budget` new points; a short count that cannot be topped up is
/// only reported algebraic when the approximation guarantees `base`.
pub fn acl_approx(
    approx: &mut dyn Approximation,
    base: &[Element],
    d: usize,
    budget: usize,
    candidates: Option<&[Element]>,
) -> Result<AclReport> {
    let region: Vec<Element> = (0..approx.region()).collect();
    let candidates = candidates.unwrap_or(&region);
    let size = approx.universe().carrier_size();
    if let Some(&e) = base.iter().chain(candidates).find(|&&e| e >= size) {
        return Err(crate::Error::InvalidTuple { element: e, size });
    }
    let mut counts = type_counts(approx.universe(), base);
    let mut added = 0;
    let mut entries = Vec::with_capacity(candidates.len());
    for &a in candidates {
        if base.contains(&a) {
            entries.push(AclEntry { element: a, count: 1, verdict: AclVerdict::Algebraic });
            continue;
        }
        let t = type_over(approx.universe(), base, a);
        let mut count = counts[&t];
        while count < d && added < budget {
            match approx.extend_like(base, a)? {
                Some(_) => {
                    added += 1;
                    count += 1;
                }
                None => break,
            }
        }
        counts.insert(t, count);
        let verdict = if count >= d {
            AclVerdict::NonAlgebraic
        } else if !approx.can_grow() && approx.guarantees(base) {
            // A growable approximation stops short only when the budget is
            // spent, which says nothing about the limit.
            AclVerdict::Algebraic
        } else {
            AclVerdict::Inconclusive
        };
        entries.push(AclEntry { element: a, count, verdict });
    }
    Ok(AclReport { base: base.to_vec(), d, entries, points_added: added })
}

fn type_over(u: &dyn TypedUniverse, base: &[Element], a: Element) -> TypeId {
    let mut t = base.to_vec();
    t.push(a);
    u.type_of(&t)
}

fn type_counts(u: &dyn TypedUniverse, base: &[Element]) -> HashMap<TypeId, usize> {
    let mut counts = HashMap::new();
    for x in 0..u.carrier_size() {
        if !base.contains(&x) {
            *counts.entry(type_over(u, base, x)).or_insert(0) += 1;
        }
    }
    counts
}

/// Acl reports keyed by base set, sharing one extension budget.
struct AclCache<'a> {
    approx: &'a mut dyn Approximation,
    d: usize,
    budget: usize,
    added: usize,
    reports: BTreeMap<Vec<Element>, AclReport>,
}

impl<'a> AclCache<'a> {
    fn new(approx: &'a mut dyn Approximation, d: usize, budget: usize) -> Self {
        AclCache { approx, d, budget, added: 0, reports: BTreeMap::new() }
    }

    fn get(&mut self, base: &BTreeSet<Element>) -> Result<&AclReport> {
        let key: Vec<Element> = base.iter().copied().collect();
        if !self.reports.contains_key(&key) {
            let r = acl_approx(self.approx, &key, self.d, self.budget - self.added, None)?;
            self.added += r.points_added;
            self.reports.insert(key.clone(), r);
        }
        Ok(&self.reports[&key])
    }

    fn inconclusive_entries(&self) -> usize {
        self.reports.values().map(|r| r.inconclusive().len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrivialityVerdict {
    Trivial,
    /// `element` is algebraic over `base` but over no singleton of it and
    /// not over the empty set.
    Violation { element: Element, base: Vec<Element> },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivialityReport {
    pub verdict: TrivialityVerdict,
    pub bases_checked: usize,
    pub inconclusive_entries: usize,
    pub points_added: usize,
}

/// Checks that algebraic closure is trivial on the region: whatever is
/// algebraic over a base of at most `max_b` region elements is algebraic
/// over one of them (or over nothing).
pub fn check_triviality(
    approx: &mut dyn Approximation,
    max_b: usize,
    d: usize,
    budget: usize,
) -> Result<TrivialityReport> {
    let bases = subsets_of_size_at_most(approx.region(), max_b);
    let mut cache = AclCache::new(approx, d, budget);
    let mut violation = None;
    for base in &bases {
        let set: BTreeSet<Element> = base.iter().copied().collect();
        let algebraic = cache.get(&set)?.algebraic();
        let over_nothing = cache.get(&BTreeSet::new())?.algebraic();
        for a in algebraic.difference(&set) {
            if over_nothing.contains(a) {
                continue;
            }
            let mut witnessed = false;
            for &b in base {
                if cache.get(&BTreeSet::from([b]))?.algebraic().contains(a) {
                    witnessed = true;
                    break;
                }
            }
            if !witnessed && violation.is_none() {
                violation = Some(TrivialityVerdict::Violation { element: *a, base: base.clone() });
            }
        }
    }
    let inconclusive = cache.inconclusive_entries();
    let verdict = if inconclusive > 0 {
        TrivialityVerdict::Inconclusive
    } else {
        violation.unwrap_or(TrivialityVerdict::Trivial)
    };
    Ok(TrivialityReport { verdict, bases_checked: bases.len(), inconclusive_entries: inconclusive, points_added: cache.added })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegeneracyVerdict {
    /// Every dependence found is witnessed by at most `n` elements of `B`.
    Degenerate { n: usize },
    /// `a` depends on `b` over `c` but on no small subset of `b`.
    Violation { a: Vec<Element>, b: Vec<Element>, c: Vec<Element> },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyReport {
    pub verdict: DegeneracyVerdict,
    pub dependencies: usize,
    pub configurations: usize,
    pub inconclusive_entries: usize,
    pub points_added: usize,
}

fn dependent(cache: &mut AclCache<'_>, a: &[Element], b: &BTreeSet<Element>, c: &BTreeSet<Element>) -> Result<bool> {
    let over_c = cache.get(c)?.algebraic();
    let bc: BTreeSet<Element> = b.union(c).copied().collect();
    let over_bc = cache.get(&bc)?.algebraic();
    Ok(a.iter().any(|x| over_bc.contains(x) && !over_c.contains(x)))
}

/// Checks `(rho - 1)`-degenerate dependence on the region with the rank-1
/// reading of dependence: `A` depends on `B` over `C` when some element of
/// `A` is algebraic over `B ∪ C` but not over `C`. Set sizes are bounded by
/// `max_sizes = (|A|, |B|, |C|)`.
pub fn check_degenerate_dependence(
    approx: &mut dyn Approximation,
    rho: usize,
    max_sizes: (usize, usize, usize),
    d: usize,
    budget: usize,
) -> Result<DegeneracyReport> {
    let n = rho.saturating_sub(1);
    let region = approx.region();
    let (na, nb, nc) = max_sizes;
    let a_sets: Vec<Vec<Element>> = subsets_of_size_at_most(region, na).into_iter().filter(|s| !s.is_empty()).collect();
    let b_sets = subsets_of_size_at_most(region, nb);
    let c_sets = subsets_of_size_at_most(region, nc);
    let mut cache = AclCache::new(approx, d, budget);
    let (mut dependencies, mut configurations) = (0, 0);
    let mut violation = None;
    for c in &c_sets {
        let c: BTreeSet<Element> = c.iter().copied().collect();
        for b in &b_sets {
            let bset: BTreeSet<Element> = b.iter().copied().collect();
            for a in &a_sets {
                configurations += 1;
                if !dependent(&mut cache, a, &bset, &c)? {
                    continue;
                }
                dependencies += 1;
                let mut witnessed = false;
                for idx in subsets_of_size_at_most(b.len(), n) {
                    let b0: BTreeSet<Element> = idx.iter().map(|&i| b[i]).collect();
                    if dependent(&mut cache, a, &b0, &c)? {
                        witnessed = true;
                        break;
                    }
                }
                if !witnessed && violation.is_none() {
                    violation = Some(DegeneracyVerdict::Violation {
                        a: a.clone(),
                        b: b.clone(),
                        c: c.iter().copied().collect(),
                    });
                }
            }
        }
    }
    let inconclusive = cache.inconclusive_entries();
    let verdict = if inconclusive > 0 {
        DegeneracyVerdict::Inconclusive
    } else {
        violation.unwrap_or(DegeneracyVerdict::Degenerate { n })
    };
    Ok(DegeneracyReport { verdict, dependencies, configurations, inconclusive_entries: inconclusive, points_added: cache.added })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::P2Spec;
    use crate::structure::{graph, FinStructure};

    fn oracle() -> GenericOracle {
        let mut o = GenericOracle::new(P2Spec::random_graph(), 8).unwrap();
        o.grow(5).unwrap();
        assert!(o.saturate(3, 2000).saturated);
        o
    }

    #[test]
    fn acl_of_a_pair_in_the_random_graph_is_the_pair() {
        let mut o = oracle();
        let mut approx = OracleApproximation { oracle: &mut o };
        let r = acl_approx(&mut approx, &[0, 1], 5, 500, None).unwrap();
        assert_eq!(r.algebraic(), BTreeSet::from([0, 1]));
        assert!(r.inconclusive().is_empty());
        for e in &r.entries {
            if e.verdict == AclVerdict::NonAlgebraic {
                assert!(e.count >= 5);
            }
        }
        // Topped-up realisations are real: recount in the grown structure.
        let s = o.current();
        for e in &r.entries {
            if e.element > 1 {
                let t = type_over(s, &[0, 1], e.element);
                assert!((0..s.size()).filter(|&x| x > 1 && type_over(s, &[0, 1], x) == t).count() >= 5);
            }
        }
    }

    #[test]
    fn base_elements_are_algebraic_over_the_base() {
        let mut o = oracle();
        let mut approx = OracleApproximation { oracle: &mut o };
        let r = acl_approx(&mut approx, &[], 5, 0, Some(&[])).unwrap();
        assert!(r.entries.is_empty());
        let r = acl_approx(&mut approx, &[3], 5, 500, Some(&[3])).unwrap();
        assert_eq!(r.entries[0].verdict, AclVerdict::Algebraic);
    }

    #[test]
    fn exhausted_budget_is_inconclusive() {
        let mut o = GenericOracle::new(P2Spec::random_graph(), 8).unwrap();
        o.grow(2).unwrap();
        let mut approx = OracleApproximation { oracle: &mut o };
        let r = acl_approx(&mut approx, &[0], 5, 0, Some(&[1])).unwrap();
        assert_eq!(r.entries[0].verdict, AclVerdict::Inconclusive);
    }

    #[test]
    fn matching_partner_is_algebraic_in_a_fixed_structure() {
        // In a perfect matching the partner of a point is its only match.
        let edges: Vec<(usize, usize)> = (0..4).map(|i| (2 * i, 2 * i + 1)).collect();
        let s: FinStructure = graph("E", 8, &edges).unwrap();
        let mut approx = FixedApproximation { universe: s, level: 3, region: 8 };
        let r = acl_approx(&mut approx, &[0], 3, 0, None).unwrap();
        assert_eq!(r.algebraic(), BTreeSet::from([0, 1]));
        let t = check_triviality(&mut approx, 2, 3, 0).unwrap();
        assert_eq!(t.verdict, TrivialityVerdict::Trivial);
        let dep = check_degenerate_dependence(&mut approx, 2, (1, 1, 0), 3, 0).unwrap();
        assert_eq!(dep.verdict, DegeneracyVerdict::Degenerate { n: 1 });
        assert!(dep.dependencies > 0);
        let strict = check_degenerate_dependence(&mut approx, 1, (1, 1, 0), 3, 0).unwrap();
        assert!(matches!(strict.verdict, DegeneracyVerdict::Violation { .. }));
    }

    #[test]
    fn unguaranteed_short_counts_are_inconclusive() {
        let edges: Vec<(usize, usize)> = (0..4).map(|i| (2 * i, 2 * i + 1)).collect();
        let s: FinStructure = graph("E", 8, &edges).unwrap();
        let mut approx = FixedApproximation { universe: s, level: 1, region: 8 };
        let r = acl_approx(&mut approx, &[0], 3, 0, None).unwrap();
        assert_eq!(r.inconclusive(), BTreeSet::from([1]));
    }

    #[test]
    fn random_graph_closure_is_trivial() {
        let mut o = oracle();
        let mut approx = OracleApproximation { oracle: &mut o };
        let t = check_triviality(&mut approx, 2, 5, 500).unwrap();
        assert_eq!(t.verdict, TrivialityVerdict::Trivial);
        assert_eq!(t.inconclusive_entries, 0);
    }

    #[test]
    fn empty_base_dependence_is_vacuous() {
        let mut o = oracle();
        let mut approx = OracleApproximation { oracle: &mut o };
        let r = check_degenerate_dependence(&mut approx, 2, (2, 0, 2), 5, 500).unwrap();
        assert_eq!(r.dependencies, 0);
        assert_eq!(r.verdict, DegeneracyVerdict::Degenerate { n: 1 });
    }
}
