use crate::error::{Error, Result};
use crate::reduct::TypedUniverse;
use crate::structure::{tuple_type_unchecked, Element, FinStructure, TypeId};

use super::DoubledStructure;

/// The classes of a pairing on a structure, typed by the isomorphism type of
/// the union of the classes, up to swapping the two members of any class.
#[derive(Debug, Clone)]
pub struct QuotientGeometry {
    pub m: FinStructure,
    /// `classes[g] = [u, u']` where `u` is the designated member (the one on
    /// level 0 for a doubled structure).
    pub classes: Vec<[Element; 2]>,
}

impl QuotientGeometry {
    /// Validates that `pairing` is a fixed-point-free involution on `m`.
    /// Classes are listed by their least element, which is designated.
    pub fn new(m: FinStructure, pairing: &[Element]) -> Result<Self> {
        if pairing.len() != m.size() {
            return Err(Error::input(format!("pairing has {} entries for {} elements", pairing.len(), m.size())));
        }
        let mut classes = Vec::new();
        for (u, &v) in pairing.iter().enumerate() {
            if v >= m.size() || v == u || pairing[v] != u {
                return Err(Error::input(format!("pairing is not a fixed-point-free involution at {u}")));
            }
            if u < v {
                classes.push([u, v]);
            }
        }
        Ok(QuotientGeometry { m, classes })
    }

    pub fn of(d: &DoubledStructure) -> Self {
        QuotientGeometry::new(d.m.clone(), &d.pairing).expect("doubled structures carry a valid pairing")
    }

    /// The same pairing on another structure over the same universe, e.g.
    /// the expansion `M*`.
    pub fn with_structure(&self, m: FinStructure) -> Result<Self> {
        if m.size() != self.m.size() {
            return Err(Error::input("structure size differs from the paired universe"));
        }
        Ok(QuotientGeometry { m, classes: self.classes.clone() })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, u: Element) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&u))
    }

    /// Pair-respecting type of `(g_1, .., g_n)`: the least quantifier-free
    /// type of `(u_1, u_1', .., u_n, u_n')` over all choices of which
    /// member of each distinct class comes first.
    pub fn pair_type(&self, gs: &[usize]) -> TypeId {
        let mut distinct: Vec<usize> = Vec::new();
        for &g in gs {
            if !distinct.contains(&g) {
                distinct.push(g);
            }
        }
        let mut best: Option<TypeId> = None;
        let mut tuple = Vec::with_capacity(2 * gs.len());
        for mask in 0..1u64 << distinct.len() {
            tuple.clear();
            for &g in gs {
                let k = distinct.iter().position(|&x| x == g).unwrap();
                let [u, v] = self.classes[g];
                if mask & (1 << k) == 0 {
                    tuple.extend([u, v]);
                } else {
                    tuple.extend([v, u]);
                }
            }
            let t = tuple_type_unchecked(&self.m, &tuple);
            if best.as_ref().map_or(true, |b| t < *b) {
                best = Some(t);
            }
        }
        best.unwrap_or_else(|| tuple_type_unchecked(&self.m, &[]))
    }
}

impl TypedUniverse for QuotientGeometry {
    fn carrier_size(&self) -> usize {
        self.classes.len()
    }

    fn max_arity(&self) -> usize {
        // Each extra class doubles the cost of a type.
        16
    }

    fn type_of(&self, tuple: &[Element]) -> TypeId {
        self.pair_type(tuple)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim3Report {
    pub pairs_checked: usize,
    /// How many ordered pairs fell into each of the four adjacency cases
    /// relative to the reference pair.
    pub case_counts: [usize; 4],
    /// `((g1, g2), (h1, h2))` whose witness map fails or whose pair types
    /// differ; `(h1, h2)` is the reference pair.
    pub violation: Option<((usize, usize), (usize, usize))>,
}

impl Claim3Report {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Compares every ordered pair of distinct classes with the reference pair
/// `(0, 1)`. With designated members `u_i`, `v_i`: when `u_1 ∼ u_2` and
/// `v_1 ∼ v_2` agree the map `u_i ↦ v_i, u_i' ↦ v_i'` must be a partial
/// isomorphism, otherwise `u_1 ↦ v_1, u_1' ↦ v_1', u_2 ↦ v_2', u_2' ↦ v_2`
/// must be; in both cases the pair types must coincide.
pub fn verify_claim3(q: &QuotientGeometry) -> Claim3Report {
    let mut report = Claim3Report { pairs_checked: 0, case_counts: [0; 4], violation: None };
    if q.len() < 2 {
        return report;
    }
    let adj = |x: Element, y: Element| q.m.holds(0, &[x, y]);
    let [v1, v1p] = q.classes[0];
    let [v2, v2p] = q.classes[1];
    let reference = q.pair_type(&[0, 1]);
    for g1 in 0..q.len() {
        for g2 in 0..q.len() {
            if g1 == g2 {
                continue;
            }
            report.pairs_checked += 1;
            let [u1, u1p] = q.classes[g1];
            let [u2, u2p] = q.classes[g2];
            let case = match (adj(u1, u2), adj(v1, v2)) {
                (true, true) => 0,
                (false, false) => 1,
                (true, false) => 2,
                (false, true) => 3,
            };
            report.case_counts[case] += 1;
            let image = if case < 2 { [v1, v2, v1p, v2p] } else { [v1, v2p, v1p, v2] };
            let witness_ok = tuple_type_unchecked(&q.m, &[u1, u2, u1p, u2p]) == tuple_type_unchecked(&q.m, &image);
            if (!witness_ok || q.pair_type(&[g1, g2]) != reference) && report.violation.is_none() {
                report.violation = Some(((g1, g2), (0, 1)));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationWitness {
    /// Classes over an induced path `u1 ∼ u2, u1 ∼ u3, u2 ≁ u3`.
    pub g: [usize; 3],
    /// Classes over a triangle.
    pub h: [usize; 3],
}

/// Finds triples of classes whose designated members form an induced path
/// centred at the first and a triangle. The two triples agree on all pair
/// types and differ on the triple type.
pub fn three_type_separation(q: &QuotientGeometry) -> Result<SeparationWitness> {
    let n = q.len();
    let adj = |g: usize, h: usize| q.m.holds(0, &[q.classes[g][0], q.classes[h][0]]);
    let mut path = None;
    let mut triangle = None;
    'outer: for a in 0..n {
        for b in 0..n {
            for c in b + 1..n {
                if a == b || a == c || !adj(a, b) || !adj(a, c) {
                    continue;
                }
                if adj(b, c) {
                    triangle.get_or_insert([a, b, c]);
                } else {
                    path.get_or_insert([a, b, c]);
                }
                if path.is_some() && triangle.is_some() {
                    break 'outer;
                }
            }
        }
    }
    match (path, triangle) {
        (Some(g), Some(h)) => Ok(SeparationWitness { g, h }),
        (p, t) => {
            let mut missing = Vec::new();
            if p.is_none() {
                missing.push("induced path u1 ~ u2, u1 ~ u3, u2 !~ u3");
            }
            if t.is_none() {
                missing.push("triangle (3-cycle)");
            }
            Err(Error::NotFound(format!("no {} among designated class members", missing.join(" and no "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doubled::build_double;
    use crate::structure::graph;

    #[test]
    fn quotient_of_a_single_edge_has_two_classes() {
        let d = build_double(&graph("R", 2, &[(0, 1)]).unwrap()).unwrap();
        let q = QuotientGeometry::of(&d);
        assert_eq!(q.classes, vec![[0, 1], [2, 3]]);
        assert!(verify_claim3(&q).holds());
        assert_eq!(verify_claim3(&q).pairs_checked, 2);
        assert!(matches!(three_type_separation(&q), Err(Error::NotFound(_))));
    }

    #[test]
    fn pair_type_ignores_the_order_inside_classes() {
        let f = graph("R", 4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let d = build_double(&f).unwrap();
        let q = QuotientGeometry::of(&d);
        let mut swapped = q.clone();
        swapped.classes[1] = [swapped.classes[1][1], swapped.classes[1][0]];
        for gs in [vec![0, 1], vec![1, 2, 3], vec![1, 1, 0]] {
            assert_eq!(q.pair_type(&gs), swapped.pair_type(&gs));
        }
    }

    #[test]
    fn mislabelled_pairing_breaks_claim3() {
        let f = graph("R", 5, &[(0, 1), (1, 2), (2, 3), (0, 4)]).unwrap();
        let d = build_double(&f).unwrap();
        let mut pairing = d.pairing.clone();
        // Pair (0,0) with (1,1) and (0,1) with (1,0).
        pairing[0] = 3;
        pairing[3] = 0;
        pairing[1] = 2;
        pairing[2] = 1;
        let q = QuotientGeometry::new(d.m.clone(), &pairing).unwrap();
        assert!(!verify_claim3(&q).holds());
    }

    #[test]
    fn bad_pairings_are_rejected() {
        let d = build_double(&graph("R", 2, &[]).unwrap()).unwrap();
        assert!(QuotientGeometry::new(d.m.clone(), &[1, 0, 2, 3]).is_err());
        assert!(QuotientGeometry::new(d.m.clone(), &[1, 2, 0, 3]).is_err());
    }

    #[test]
    fn triangle_free_base_has_no_separation() {
        let f = graph("R", 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let q = QuotientGeometry::of(&build_double(&f).unwrap());
        match three_type_separation(&q) {
            Err(Error::NotFound(msg)) => assert!(msg.contains("triangle") && !msg.contains("path")),
            other => panic!("expected not-found, got {other:?}"),
        }
    }

    #[test]
    fn separation_in_a_small_base() {
        let f = graph("R", 4, &[(0, 1), (0, 2), (0, 3), (1, 3)]).unwrap();
        let q = QuotientGeometry::of(&build_double(&f).unwrap());
        let w = three_type_separation(&q).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(q.pair_type(&[w.g[i], w.g[j]]), q.pair_type(&[w.h[i], w.h[j]]));
        }
        assert_ne!(q.pair_type(&w.g), q.pair_type(&w.h));
    }
}
