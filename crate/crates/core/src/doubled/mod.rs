//! The doubled random graph: `M` on `F × {0,1}` where same-level pairs copy
//! the adjacency of `F` and cross-level pairs complement it, together with
//! its pairing `(a,i) ↦ (a,1-i)`, the quotient by the pairing, and the
//! expansion of `M` by a unary mark on level 0.

mod quotient;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generic::{GenericOracle, Saturation};
use crate::reduct::TypedUniverse;
use crate::structure::{consistent_extension, Element, FinStructure, Vocabulary};
use crate::types::Approximation;

pub use quotient::{
    three_type_separation, verify_claim3, Claim3Report, QuotientGeometry, SeparationWitness,
};

/// Index of `(a, i)` in `M`.
pub fn doubled_index(a: Element, i: usize) -> Element {
    2 * a + i
}

#[derive(Debug, Clone)]
pub struct DoubledStructure {
    pub base: FinStructure,
    pub m: FinStructure,
    /// The involution `u ↦ u'`.
    pub pairing: Vec<Element>,
    /// Saturation of `base` as recorded by the oracle that produced it.
    pub base_saturation: Saturation,
    pub seed: Option<u64>,
}

impl DoubledStructure {
    /// Elements `(a, i)` for fixed `i`.
    pub fn half(&self, i: usize) -> Vec<Element> {
        (0..self.base.size()).map(|a| doubled_index(a, i)).collect()
    }

    pub fn partner(&self, u: Element) -> Element {
        self.pairing[u]
    }

    /// The `F`-element under `u`.
    pub fn projection(&self, u: Element) -> Element {
        u / 2
    }
}

/// Builds `M` from a loop-free symmetric graph `f`.
pub fn build_double(f: &FinStructure) -> Result<DoubledStructure> {
    if !f.is_simple_graph() {
        return Err(Error::input("the doubled cover needs a loop-free symmetric graph with one binary symbol"));
    }
    let n = f.size();
    let mut m = FinStructure::empty(f.vocab_arc().clone(), 2 * n);
    for a in 0..n {
        for b in 0..n {
            // Same level copies F, cross level complements it; a ≁ a puts
            // every u next to u'.
            let adjacent = a != b && f.holds(0, &[a, b]);
            for i in 0..2 {
                let j = if adjacent { i } else { 1 - i };
                if a != b || i != j {
                    m.set_fact(0, &[doubled_index(a, i), doubled_index(b, j)], true);
                }
            }
        }
    }
    let pairing = (0..2 * n).map(|u| u ^ 1).collect();
    Ok(DoubledStructure { base: f.clone(), m, pairing, base_saturation: Saturation::default(), seed: None })
}

/// Builds `M` over the current structure of a random-graph oracle and
/// records its seed and saturation.
pub fn build_double_from_oracle(o: &GenericOracle) -> Result<DoubledStructure> {
    let mut d = build_double(o.current())?;
    d.base_saturation = o.saturation();
    d.seed = Some(o.seed());
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim1Report {
    pub pairs_checked: usize,
    /// First `(u, v)` breaking `u∼v ⟺ u'∼v' ⟺ u≁v' ⟺ u'≁v`.
    pub violation: Option<(Element, Element)>,
}

impl Claim1Report {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn verify_claim1(d: &DoubledStructure) -> Claim1Report {
    let m = &d.m;
    let adj = |x: Element, y: Element| m.holds(0, &[x, y]);
    let mut checked = 0;
    for u in 0..m.size() {
        for v in 0..m.size() {
            if u == v {
                continue;
            }
            checked += 1;
            let (u1, v1) = (d.partner(u), d.partner(v));
            let values = [adj(u, v), adj(u1, v1), !adj(u, v1), !adj(u1, v)];
            if values.iter().any(|&x| x != values[0]) {
                return Claim1Report { pairs_checked: checked, violation: Some((u, v)) };
            }
        }
    }
    Claim1Report { pairs_checked: checked, violation: None }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EDefinabilityReport {
    pub pairs_checked: usize,
    /// First pair on which the formula and the pairing disagree.
    pub mismatch: Option<(Element, Element)>,
}

impl EDefinabilityReport {
    pub fn definable_here(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Evaluates `x = y ∨ (x ≠ y ∧ ¬∃z (z ∼ x ∧ z ∼ y))` on every pair of `M`
/// and compares it with the pairing.
pub fn e_definability_check(d: &DoubledStructure) -> EDefinabilityReport {
    let m = &d.m;
    let n = m.size();
    let words = n.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..n)
        .map(|x| {
            let mut row = vec![0u64; words];
            for z in 0..n {
                if m.holds(0, &[x, z]) {
                    row[z / 64] |= 1 << (z % 64);
                }
            }
            row
        })
        .collect();
    let mut checked = 0;
    for x in 0..n {
        for y in x + 1..n {
            checked += 1;
            let common = rows[x].iter().zip(&rows[y]).any(|(a, b)| a & b != 0);
            if !common != (d.partner(x) == y) {
                return EDefinabilityReport { pairs_checked: checked, mismatch: Some((x, y)) };
            }
        }
    }
    EDefinabilityReport { pairs_checked: checked, mismatch: None }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim2Report {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    /// First failing trial as `(u_1..u_n, v_1..v_n, u_{n+1})`.
    pub failure: Option<(Vec<Element>, Vec<Element>, Element)>,
}

/// Whether adding `x ↦ y` and `x' ↦ y'` keeps the pair-closed map a
/// partial isomorphism of `M`; extends `xs`, `ys` on success.
fn extend_pair_closed(d: &DoubledStructure, xs: &mut Vec<Element>, ys: &mut Vec<Element>, x: Element, y: Element) -> bool {
    if let Some(i) = xs.iter().position(|&e| e == x) {
        return ys[i] == y;
    }
    if ys.contains(&y) || !consistent_extension(&d.m, &d.m, xs, ys, x, y) {
        return false;
    }
    xs.push(x);
    ys.push(y);
    let (x1, y1) = (d.partner(x), d.partner(y));
    if consistent_extension(&d.m, &d.m, xs, ys, x1, y1) {
        xs.push(x1);
        ys.push(y1);
        true
    } else {
        xs.pop();
        ys.pop();
        false
    }
}

/// Samples pair-closed partial isomorphisms `u_i ↦ v_i` on `n` level-0
/// points of the saturated region and a further level-0 point `u_{n+1}`,
/// then searches level 0 for `v_{n+1}` extending the map.
pub fn verify_claim2(d: &DoubledStructure, n: usize, trials: usize, seed: u64) -> Result<Claim2Report> {
    let sat = d.base_saturation;
    if sat.level < n + 1 || sat.prefix < n {
        return Err(Error::Refused(format!(
            "claim 2 at n = {n} needs the base saturated to level {} over at least {n} points; it has level {} over {}",
            n + 1,
            sat.level,
            sat.prefix
        )));
    }
    let region: Vec<Element> = (0..sat.prefix).map(|a| doubled_index(a, 0)).collect();
    let level0 = d.half(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Claim2Report { n, trials, successes: 0, failure: None };
    for _ in 0..trials {
        let us: Vec<Element> = region.choose_multiple(&mut rng, n).copied().collect();
        let vs = match_pairs(d, &us, &region, &mut rng).expect("the identity map is always available");
        let u_next = level0[rng.gen_range(0..level0.len())];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&u, &v) in us.iter().zip(&vs) {
            assert!(extend_pair_closed(d, &mut xs, &mut ys, u, v));
        }
        let found = level0.iter().any(|&v| {
            let (mut xs, mut ys) = (xs.clone(), ys.clone());
            extend_pair_closed(d, &mut xs, &mut ys, u_next, v)
        });
        if found {
            report.successes += 1;
        } else if report.failure.is_none() {
            report.failure = Some((us, vs, u_next));
        }
    }
    Ok(report)
}

/// Random-order backtracking for images of `us` in `region` forming a
/// pair-closed partial isomorphism.
fn match_pairs(d: &DoubledStructure, us: &[Element], region: &[Element], rng: &mut ChaCha8Rng) -> Option<Vec<Element>> {
    fn go(
        d: &DoubledStructure,
        us: &[Element],
        order: &[Vec<Element>],
        xs: &mut Vec<Element>,
        ys: &mut Vec<Element>,
        out: &mut Vec<Element>,
    ) -> bool {
        let i = out.len();
        if i == us.len() {
            return true;
        }
        for &v in &order[i] {
            let (lx, ly) = (xs.len(), ys.len());
            if extend_pair_closed(d, xs, ys, us[i], v) {
                out.push(v);
                if go(d, us, order, xs, ys, out) {
                    return true;
                }
                out.pop();
                xs.truncate(lx);
                ys.truncate(ly);
            }
        }
        false
    }
    let order: Vec<Vec<Element>> = us
        .iter()
        .map(|_| {
            let mut r = region.to_vec();
            r.shuffle(rng);
            r
        })
        .collect();
    let mut out = Vec::new();
    go(d, us, &order, &mut Vec::new(), &mut Vec::new(), &mut out).then_some(out)
}

/// `M*`: `M` expanded by the unary mark `M0` on level 0.
pub fn build_expansion_star(d: &DoubledStructure) -> Result<FinStructure> {
    let level0: BTreeSet<Element> = d.half(0).into_iter().collect();
    d.m.expand_with_marks(&[("M0", level0)])
}

/// `M` expanded by the pairing as a binary relation `E` (irreflexive).
pub fn pair_structure(d: &DoubledStructure) -> Result<FinStructure> {
    let sym = d.m.vocab().symbols()[0].name.clone();
    let vocab = Arc::new(Vocabulary::new([(sym.as_str(), 2), ("E", 2)])?);
    let mut s = FinStructure::empty(vocab, d.m.size());
    for t in d.m.tuples(0) {
        s.set_fact(0, &t, true);
    }
    for (u, &v) in d.pairing.iter().enumerate() {
        s.set_fact(1, &[u, v], true);
    }
    Ok(s)
}

/// The pair structure viewed as an approximation: an extension over a base
/// needs the base's projection to `F` to lie in the saturated region, so the
/// guarantee is measured on projections.
pub struct PairStructureApproximation {
    pub structure: FinStructure,
    pub base_saturation: Saturation,
}

impl PairStructureApproximation {
    pub fn new(d: &DoubledStructure) -> Result<Self> {
        Ok(PairStructureApproximation { structure: pair_structure(d)?, base_saturation: d.base_saturation })
    }
}

impl Approximation for PairStructureApproximation {
    fn universe(&self) -> &dyn TypedUniverse {
        &self.structure
    }

    fn region(&self) -> usize {
        2 * self.base_saturation.prefix
    }

    fn saturation_level(&self) -> usize {
        self.base_saturation.level
    }

    fn guarantees(&self, base: &[Element]) -> bool {
        let projection: BTreeSet<Element> = base.iter().map(|&u| u / 2).collect();
        base.iter().all(|&u| u < self.region()) && projection.len() < self.saturation_level()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{graph, is_isomorphic};

    fn edge(m: &FinStructure, x: Element, y: Element) -> bool {
        m.holds(0, &[x, y])
    }

    #[test]
    fn single_vertex_doubles_to_an_edge() {
        let d = build_double(&graph("R", 1, &[]).unwrap()).unwrap();
        assert_eq!(d.m.size(), 2);
        assert_eq!(d.m.tuples(0), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn single_edge_doubles_to_a_four_cycle() {
        let d = build_double(&graph("R", 2, &[(0, 1)]).unwrap()).unwrap();
        let (a0, a1, b0, b1) = (0, 1, 2, 3);
        for (x, y) in [(a0, b0), (a1, b1), (a0, a1), (b0, b1)] {
            assert!(edge(&d.m, x, y) && edge(&d.m, y, x));
        }
        assert!(!edge(&d.m, a0, b1) && !edge(&d.m, a1, b0));
        let c4 = graph("R", 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(is_isomorphic(&d.m, &c4).unwrap().is_some());
    }

    #[test]
    fn non_graphs_are_rejected() {
        let vocab = Arc::new(Vocabulary::new([("R", 2)]).unwrap());
        let directed = FinStructure::from_tuples(vocab, 2, [("R", vec![vec![0, 1]])]).unwrap();
        assert!(matches!(build_double(&directed), Err(Error::Input(_))));
    }

    #[test]
    fn levels_are_copies_of_the_base() {
        let f = graph("R", 5, &[(0, 1), (1, 2), (3, 4), (0, 4)]).unwrap();
        let d = build_double(&f).unwrap();
        for i in 0..2 {
            let (level, _) = d.m.induced_substructure(&d.half(i)).unwrap();
            assert_eq!(level, f);
        }
        assert!(d.pairing.iter().enumerate().all(|(u, &v)| v != u && d.pairing[v] == u && edge(&d.m, u, v)));
        assert!(d.m.is_simple_graph());
    }

    #[test]
    fn claim1_holds_and_detects_a_toggled_edge() {
        let f = graph("R", 4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut d = build_double(&f).unwrap();
        assert!(verify_claim1(&d).holds());
        d.m.set_fact(0, &[0, 2], false);
        d.m.set_fact(0, &[2, 0], false);
        assert!(verify_claim1(&d).violation.is_some());
        let empty = build_double(&graph("R", 0, &[]).unwrap()).unwrap();
        assert!(verify_claim1(&empty).holds());
    }

    #[test]
    fn e_definability_fails_over_two_isolated_vertices() {
        let d = build_double(&graph("R", 2, &[]).unwrap()).unwrap();
        // (a,0) and (b,1) are adjacent with no common neighbour.
        assert_eq!(e_definability_check(&d).mismatch, Some((0, 3)));
        let single = build_double(&graph("R", 1, &[]).unwrap()).unwrap();
        assert!(e_definability_check(&single).definable_here());
    }

    #[test]
    fn claim2_is_refused_without_saturation() {
        let d = build_double(&graph("R", 3, &[(0, 1)]).unwrap()).unwrap();
        assert!(matches!(verify_claim2(&d, 1, 5, 0), Err(Error::Refused(_))));
    }

    #[test]
    fn expansion_marks_level_zero() {
        let d = build_double(&graph("R", 3, &[(0, 1)]).unwrap()).unwrap();
        let star = build_expansion_star(&d).unwrap();
        assert_eq!(star.size(), d.m.size());
        assert_eq!(star.tuples_named("M0").unwrap().len(), 3);
        assert_eq!(star.reduct_to(&["R"]).unwrap(), d.m);
    }

    #[test]
    fn pair_structure_marks_partners() {
        let d = build_double(&graph("R", 2, &[(0, 1)]).unwrap()).unwrap();
        let p = pair_structure(&d).unwrap();
        assert_eq!(p.tuples_named("E").unwrap(), vec![vec![0, 1], vec![1, 0], vec![2, 3], vec![3, 2]]);
    }
}
