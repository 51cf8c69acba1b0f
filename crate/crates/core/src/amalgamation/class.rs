//! Classes of finite structures: ages, the hereditary property and bounded
//! amalgamation checks.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::p2::{apply_link, apply_point_type, link, point_type, P2Spec};
use crate::error::Result;
use crate::structure::{canonical_form, find_embeddings, find_embeddings_extending, Element, Embedding, FinStructure, TypeId};

/// A class of finite structures, closed under isomorphism.
#[derive(Debug, Clone)]
pub enum ClassSpec {
    /// The isomorphism closure of an explicit list. Checks only consider
    /// members up to `size_bound`.
    Explicit { structures: Vec<FinStructure>, size_bound: usize },
    /// The class of structures whose 1- and 2-substructures are permitted
    /// by `p2`, examined up to `size_bound`.
    Random { p2: P2Spec, size_bound: usize },
}

impl ClassSpec {
    pub fn size_bound(&self) -> usize {
        match self {
            ClassSpec::Explicit { size_bound, .. } | ClassSpec::Random { size_bound, .. } => *size_bound,
        }
    }

    /// Isomorphism-type representatives of all members of size at most `bound`.
    pub fn members_up_to(&self, bound: usize) -> Vec<FinStructure> {
        match self {
            ClassSpec::Explicit { structures, .. } => {
                let mut seen = BTreeMap::new();
                for s in structures.iter().filter(|s| s.size() <= bound) {
                    let (key, order) = canonical_form(s);
                    seen.entry((s.size(), key)).or_insert_with(|| s.restrict_unchecked(&order));
                }
                seen.into_values().collect()
            }
            ClassSpec::Random { p2, .. } => (0..=bound).flat_map(|n| enumerate_rp2(p2, n)).collect(),
        }
    }

    fn membership(&self) -> Membership<'_> {
        match self {
            ClassSpec::Explicit { structures, .. } => {
                Membership::Keys(structures.iter().map(|s| (s.size(), canonical_form(s).0)).collect())
            }
            ClassSpec::Random { p2, .. } => Membership::Random(p2),
        }
    }
}

enum Membership<'a> {
    Keys(BTreeSet<(usize, TypeId)>),
    Random(&'a P2Spec),
}

impl Membership<'_> {
    fn contains(&self, s: &FinStructure) -> bool {
        match self {
            Membership::Keys(keys) => keys.contains(&(s.size(), canonical_form(s).0)),
            Membership::Random(p2) => p2.first_violation(s).is_none() && s.vocab() == &**p2.vocab(),
        }
    }
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<Element>> {
    let mut out = vec![vec![]];
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<Element>, out: &mut Vec<Vec<Element>>) {
        if cur.len() == k {
            return;
        }
        for x in start..n {
            cur.push(x);
            out.push(cur.clone());
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Isomorphism types of the induced substructures of `s` of size at most
/// `k`, ordered by size and then canonical key.
pub fn age(s: &FinStructure, k: usize) -> Vec<FinStructure> {
    let mut seen = BTreeMap::new();
    for sub in subsets_up_to(s.size(), k) {
        let r = s.restrict_unchecked(&sub);
        let (key, order) = canonical_form(&r);
        seen.entry((r.size(), key)).or_insert_with(|| r.restrict_unchecked(&order));
    }
    seen.into_values().collect()
}

/// All size-`n` members of the random class of `p2` up to isomorphism, in
/// canonical-key order, each relabelled into canonical order.
pub fn enumerate_rp2(p2: &P2Spec, n: usize) -> Vec<FinStructure> {
    let mut level: Vec<FinStructure> = vec![FinStructure::empty(p2.vocab().clone(), 0)];
    for k in 0..n {
        let mut next: BTreeMap<TypeId, FinStructure> = BTreeMap::new();
        for base in &level {
            for &p in p2.point_types() {
                let options: Vec<Vec<_>> = (0..k).map(|x| p2.links(point_type(base, x), p)).collect();
                if options.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut choice = vec![0usize; k];
                'choices: loop {
                    let mut s = base.clone();
                    let v = s.push_element();
                    apply_point_type(&mut s, v, p);
                    for x in 0..k {
                        apply_link(&mut s, x, v, options[x][choice[x]]);
                    }
                    let (key, order) = canonical_form(&s);
                    next.entry(key).or_insert_with(|| s.restrict_unchecked(&order));
                    for x in (0..k).rev() {
                        choice[x] += 1;
                        if choice[x] < options[x].len() {
                            continue 'choices;
                        }
                        choice[x] = 0;
                    }
                    break;
                }
            }
        }
        level = next.into_values().collect();
    }
    level
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpViolation {
    pub member: FinStructure,
    pub subset: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpReport {
    pub holds: bool,
    pub violation: Option<HpViolation>,
    pub bound: usize,
    pub members_checked: usize,
}

/// Checks that every induced substructure of every member of size at most
/// `bound` is again a member.
pub fn check_hp(spec: &ClassSpec, bound: usize) -> HpReport {
    let members = spec.members_up_to(bound);
    let membership = spec.membership();
    for m in &members {
        for sub in subsets_up_to(m.size(), m.size()) {
            if sub.len() == m.size() {
                continue;
            }
            if !membership.contains(&m.restrict_unchecked(&sub)) {
                return HpReport {
                    holds: false,
                    violation: Some(HpViolation { member: m.clone(), subset: sub }),
                    bound,
                    members_checked: members.len(),
                };
            }
        }
    }
    HpReport { holds: true, violation: None, bound, members_checked: members.len() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApVerdict {
    Holds,
    Fails,
    Inconclusive,
}

/// A base triple with its two embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApTriple {
    pub a: FinStructure,
    pub b: FinStructure,
    pub c: FinStructure,
    pub f_b: Embedding,
    pub f_c: Embedding,
}

/// An amalgam `d` with embeddings agreeing on the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam {
    pub d: FinStructure,
    pub g_b: Embedding,
    pub g_c: Embedding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApReport {
    pub verdict: ApVerdict,
    /// On `Fails` (or `Inconclusive`), the first triple without an amalgam.
    pub counterexample: Option<ApTriple>,
    pub amalgam_bound: usize,
    pub size_bound: usize,
    pub triples_checked: usize,
}

enum TripleOutcome {
    Amalgamated,
    NoAmalgam(ApTriple, bool),
}

/// Bounded amalgamation check over all base triples within the class's size
/// bound. Amalgams may identify points of `B \ A` with points of `C \ A`.
/// Bases are visited from the largest down, so a reported counterexample has
/// a base as large as possible.
pub fn check_ap(spec: &ClassSpec, amalgam_bound: usize) -> ApReport {
    let members = spec.members_up_to(spec.size_bound());
    let candidates: Vec<FinStructure> = match spec {
        ClassSpec::Explicit { .. } => spec.members_up_to(amalgam_bound),
        ClassSpec::Random { .. } => Vec::new(),
    };
    let mut bases: Vec<usize> = (0..members.len()).collect();
    bases.sort_by_key(|&i| std::cmp::Reverse(members[i].size()));
    let mut triples = Vec::new();
    for &ai in &bases {
        for bi in 0..members.len() {
            for ci in 0..members.len() {
                if members[bi].size() >= members[ai].size() && members[ci].size() >= members[ai].size() {
                    triples.push((ai, bi, ci));
                }
            }
        }
    }

    let outcomes: Vec<(usize, Option<TripleOutcome>)> = triples
        .par_iter()
        .map(|&(ai, bi, ci)| {
            let (a, b, c) = (&members[ai], &members[bi], &members[ci]);
            let fbs = find_embeddings(a, b, usize::MAX).unwrap_or_default();
            let fcs = find_embeddings(a, c, usize::MAX).unwrap_or_default();
            let mut checked = 0;
            for f_b in &fbs {
                for f_c in &fcs {
                    checked += 1;
                    let found = match spec {
                        ClassSpec::Random { p2, .. } => random_amalgam(p2, a, b, c, f_b, f_c, amalgam_bound),
                        ClassSpec::Explicit { .. } => explicit_amalgam(&candidates, a, b, c, f_b, f_c),
                    };
                    if found.is_none() {
                        let searchable = amalgam_bound + a.size() >= b.size() + c.size();
                        let triple =
                            ApTriple { a: a.clone(), b: b.clone(), c: c.clone(), f_b: f_b.clone(), f_c: f_c.clone() };
                        return (checked, Some(TripleOutcome::NoAmalgam(triple, searchable)));
                    }
                }
            }
            (checked, Some(TripleOutcome::Amalgamated))
        })
        .collect();

    let triples_checked = outcomes.iter().map(|(n, _)| n).sum();
    let mut inconclusive = None;
    for (_, outcome) in outcomes {
        if let Some(TripleOutcome::NoAmalgam(t, searchable)) = outcome {
            if searchable {
                return ApReport {
                    verdict: ApVerdict::Fails,
                    counterexample: Some(t),
                    amalgam_bound,
                    size_bound: spec.size_bound(),
                    triples_checked,
                };
            }
            inconclusive.get_or_insert(t);
        }
    }
    ApReport {
        verdict: if inconclusive.is_some() { ApVerdict::Inconclusive } else { ApVerdict::Holds },
        counterexample: inconclusive,
        amalgam_bound,
        size_bound: spec.size_bound(),
        triples_checked,
    }
}

fn explicit_amalgam(
    candidates: &[FinStructure],
    a: &FinStructure,
    b: &FinStructure,
    c: &FinStructure,
    f_b: &Embedding,
    f_c: &Embedding,
) -> Option<Amalgam> {
    for d in candidates.iter().filter(|d| d.size() >= b.size().max(c.size())) {
        for g_b in find_embeddings(b, d, usize::MAX).ok()? {
            let fixed: Vec<(Element, Element)> = (0..a.size()).map(|x| (f_c.map[x], g_b.map[f_b.map[x]])).collect();
            if let Some(g_c) = find_embeddings_extending(c, d, &fixed, 1).ok()?.pop() {
                return Some(Amalgam { d: d.clone(), g_b, g_c });
            }
        }
    }
    None
}

/// Searches amalgams inside the random class of `p2`. Since the class is
/// hereditary, an amalgam exists within the bound iff one exists whose
/// universe is exactly the union of the two images; the search walks the
/// possible identifications of `B \ A` with `C \ A`, fewest first.
pub fn random_amalgam(
    p2: &P2Spec,
    a: &FinStructure,
    b: &FinStructure,
    c: &FinStructure,
    f_b: &Embedding,
    f_c: &Embedding,
    bound: usize,
) -> Option<Amalgam> {
    let b_rest: Vec<Element> = (0..b.size()).filter(|x| !f_b.map.contains(x)).collect();
    let c_rest: Vec<Element> = (0..c.size()).filter(|x| !f_c.map.contains(x)).collect();
    let free_size = a.size() + b_rest.len() + c_rest.len();
    let min_overlap = free_size.saturating_sub(bound);
    let max_overlap = b_rest.len().min(c_rest.len());
    for overlap in min_overlap..=max_overlap {
        let mut sigma = vec![None; b_rest.len()];
        let mut used = vec![false; c_rest.len()];
        if let Some(found) =
            identifications(p2, a, b, c, f_b, f_c, &b_rest, &c_rest, overlap, 0, &mut sigma, &mut used)
        {
            return Some(found);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn identifications(
    p2: &P2Spec,
    a: &FinStructure,
    b: &FinStructure,
    c: &FinStructure,
    f_b: &Embedding,
    f_c: &Embedding,
    b_rest: &[Element],
    c_rest: &[Element],
    remaining: usize,
    i: usize,
    sigma: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
) -> Option<Amalgam> {
    if remaining == 0 {
        return assemble(p2, a, b, c, f_b, f_c, b_rest, c_rest, sigma);
    }
    if b_rest.len() - i < remaining {
        return None;
    }
    for j in 0..c_rest.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        sigma[i] = Some(j);
        let r = identifications(p2, a, b, c, f_b, f_c, b_rest, c_rest, remaining - 1, i + 1, sigma, used);
        sigma[i] = None;
        used[j] = false;
        if r.is_some() {
            return r;
        }
    }
    identifications(p2, a, b, c, f_b, f_c, b_rest, c_rest, remaining, i + 1, sigma, used)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    p2: &P2Spec,
    a: &FinStructure,
    b: &FinStructure,
    c: &FinStructure,
    f_b: &Embedding,
    f_c: &Embedding,
    b_rest: &[Element],
    c_rest: &[Element],
    sigma: &[Option<usize>],
) -> Option<Amalgam> {
    let mut g_b = vec![usize::MAX; b.size()];
    let mut g_c = vec![usize::MAX; c.size()];
    for x in 0..a.size() {
        g_b[f_b.map[x]] = x;
        g_c[f_c.map[x]] = x;
    }
    let mut next = a.size();
    for (i, &y) in b_rest.iter().enumerate() {
        g_b[y] = next;
        if let Some(j) = sigma[i] {
            g_c[c_rest[j]] = next;
        }
        next += 1;
    }
    for &z in c_rest {
        if g_c[z] == usize::MAX {
            g_c[z] = next;
            next += 1;
        }
    }
    let mut d = FinStructure::empty(p2.vocab().clone(), next);
    let mut from_b = vec![false; next];
    for y in 0..b.size() {
        from_b[g_b[y]] = true;
        apply_point_type(&mut d, g_b[y], point_type(b, y));
        for y2 in y + 1..b.size() {
            apply_link(&mut d, g_b[y], g_b[y2], link(b, y, y2));
        }
    }
    for z in 0..c.size() {
        if from_b[g_c[z]] {
            if point_type(&d, g_c[z]) != point_type(c, z) {
                return None;
            }
        } else {
            apply_point_type(&mut d, g_c[z], point_type(c, z));
        }
        for z2 in z + 1..c.size() {
            let (u, v) = (g_c[z], g_c[z2]);
            if from_b[u] && from_b[v] {
                if link(&d, u, v) != link(c, z, z2) {
                    return None;
                }
            } else {
                apply_link(&mut d, u, v, link(c, z, z2));
            }
        }
    }
    // Pairs with one end only in B's image and the other only in C's image.
    let c_only: Vec<Element> = (0..next).filter(|&v| !from_b[v]).collect();
    for &u in b_rest.iter().map(|y| &g_b[*y]) {
        if g_c.contains(&u) {
            continue;
        }
        for &v in &c_only {
            let options = p2.links(point_type(&d, u), point_type(&d, v));
            apply_link(&mut d, u, v, *options.first()?);
        }
    }
    let g_b = Embedding { map: g_b };
    let g_c = Embedding { map: g_c };
    let commutes = f_b.then(&g_b) == f_c.then(&g_c);
    if commutes && p2.first_violation(&d).is_none() && g_b.is_embedding(b, &d) && g_c.is_embedding(c, &d) {
        Some(Amalgam { d, g_b, g_c })
    } else {
        None
    }
}

/// Result of searching one triple, exposed for callers that want to inspect
/// a specific amalgamation problem.
pub fn amalgamate(spec: &ClassSpec, triple: &ApTriple, amalgam_bound: usize) -> Result<Option<Amalgam>> {
    Ok(match spec {
        ClassSpec::Random { p2, .. } => {
            random_amalgam(p2, &triple.a, &triple.b, &triple.c, &triple.f_b, &triple.f_c, amalgam_bound)
        }
        ClassSpec::Explicit { .. } => explicit_amalgam(
            &spec.members_up_to(amalgam_bound),
            &triple.a,
            &triple.b,
            &triple.c,
            &triple.f_b,
            &triple.f_c,
        ),
    })
}
