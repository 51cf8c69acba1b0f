use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::oracle::GenericOracle;
use crate::error::{Error, Result};
use crate::structure::{consistent_extension, tuple_type_unchecked, Element, FinStructure, TypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A position of the game: the elements picked so far in each structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub left: Vec<Element>,
    pub right: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameVerdict {
    Equivalent { rounds: usize },
    /// The spoiler wins by picking `element` on `side` from the empty
    /// position. `position` is a line of play the duplicator cannot
    /// answer: either the picks stop being a partial isomorphism, or the
    /// one-point extension options of the final position differ.
    Distinguished { rounds: usize, side: Side, element: Element, position: Position },
}

impl GameVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, GameVerdict::Equivalent { .. })
    }
}

struct Game<'a> {
    a: &'a FinStructure,
    b: &'a FinStructure,
    options: [HashMap<Vec<Element>, BTreeSet<TypeId>>; 2],
}

impl Game<'_> {
    /// Quantifier-free types realised over `pos` by one more element.
    fn options(&mut self, side: usize, pos: &[Element]) -> &BTreeSet<TypeId> {
        let s = if side == 0 { self.a } else { self.b };
        self.options[side].entry(pos.to_vec()).or_insert_with(|| {
            let mut t = pos.to_vec();
            t.push(0);
            (0..s.size())
                .map(|z| {
                    *t.last_mut().unwrap() = z;
                    tuple_type_unchecked(s, &t)
                })
                .collect()
        })
    }

    /// Returns a losing line for the duplicator if the spoiler can win
    /// within `rounds` more picks from the partial isomorphism `xs -> ys`.
    fn spoiler_wins(&mut self, xs: &mut Vec<Element>, ys: &mut Vec<Element>, rounds: usize) -> Option<Position> {
        if rounds == 0 {
            let left = self.options(0, xs).clone();
            if &left != self.options(1, ys) {
                return Some(Position { left: xs.clone(), right: ys.clone() });
            }
            return None;
        }
        for side in [Side::Left, Side::Right] {
            let (n, m) = match side {
                Side::Left => (self.a.size(), self.b.size()),
                Side::Right => (self.b.size(), self.a.size()),
            };
            for x in 0..n {
                if let Some(p) = self.pick(side, xs, ys, x, m, rounds) {
                    return Some(p);
                }
            }
        }
        None
    }

    /// Plays spoiler move `x` on `side`; `Some` when no answer survives.
    fn pick(
        &mut self,
        side: Side,
        xs: &mut Vec<Element>,
        ys: &mut Vec<Element>,
        x: Element,
        m: usize,
        rounds: usize,
    ) -> Option<Position> {
        let (own, other) = match side {
            Side::Left => (&*xs, &*ys),
            Side::Right => (&*ys, &*xs),
        };
        if let Some(i) = own.iter().position(|&e| e == x) {
            // Repeating a pick is answered by repeating its partner.
            let y = other[i];
            return self.answer(side, xs, ys, x, y, rounds);
        }
        let mut last = None;
        for y in 0..m {
            let ok = match side {
                Side::Left => consistent_extension(self.a, self.b, xs, ys, x, y),
                Side::Right => consistent_extension(self.b, self.a, ys, xs, x, y),
            };
            if !ok {
                continue;
            }
            match self.answer(side, xs, ys, x, y, rounds) {
                None => return None,
                Some(p) => last = Some(p),
            }
        }
        Some(last.unwrap_or_else(|| {
            let mut p = Position { left: xs.clone(), right: ys.clone() };
            match side {
                Side::Left => p.left.push(x),
                Side::Right => p.right.push(x),
            }
            p
        }))
    }

    fn answer(
        &mut self,
        side: Side,
        xs: &mut Vec<Element>,
        ys: &mut Vec<Element>,
        x: Element,
        y: Element,
        rounds: usize,
    ) -> Option<Position> {
        let (l, r) = match side {
            Side::Left => (x, y),
            Side::Right => (y, x),
        };
        xs.push(l);
        ys.push(r);
        let out = self.spoiler_wins(xs, ys, rounds - 1);
        xs.pop();
        ys.pop();
        out
    }
}

/// Plays the `k`-round extension game between `a` and `b`. Each round the
/// spoiler picks an element in either structure and the duplicator answers
/// in the other, keeping the picks a partial isomorphism. After the last
/// round the duplicator must also match the one-point extension options of
/// the final position in both directions.
pub fn back_and_forth(a: &FinStructure, b: &FinStructure, k: usize) -> Result<GameVerdict> {
    if a.vocab() != b.vocab() {
        return Err(Error::vocab("back-and-forth needs a common vocabulary"));
    }
    let mut game = Game { a, b, options: [HashMap::new(), HashMap::new()] };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    if k == 0 {
        return Ok(match game.spoiler_wins(&mut xs, &mut ys, 0) {
            None => GameVerdict::Equivalent { rounds: 0 },
            Some(position) => {
                // The spoiler wins by picking an element whose type the
                // other side lacks.
                let (side, element) = first_unmatched_point(a, b);
                GameVerdict::Distinguished { rounds: 0, side, element, position }
            }
        });
    }
    for side in [Side::Left, Side::Right] {
        let (n, m) = match side {
            Side::Left => (a.size(), b.size()),
            Side::Right => (b.size(), a.size()),
        };
        for x in 0..n {
            if let Some(position) = game.pick(side, &mut xs, &mut ys, x, m, k) {
                return Ok(GameVerdict::Distinguished { rounds: k, side, element: x, position });
            }
        }
    }
    Ok(GameVerdict::Equivalent { rounds: k })
}

fn first_unmatched_point(a: &FinStructure, b: &FinStructure) -> (Side, Element) {
    let types = |s: &FinStructure| -> Vec<TypeId> { (0..s.size()).map(|x| tuple_type_unchecked(s, &[x])).collect() };
    let (ta, tb) = (types(a), types(b));
    if let Some(x) = ta.iter().position(|t| !tb.contains(t)) {
        return (Side::Left, x);
    }
    let y = tb.iter().position(|t| !ta.contains(t)).expect("option sets differ");
    (Side::Right, y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    /// The first sampled pair whose isomorphism failed to extend.
    pub failure: Option<(Vec<Element>, Vec<Element>)>,
}

impl ProbeReport {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Samples pairs of isomorphic `m`-tuples from the saturated region of the
/// oracle and checks that each isomorphism extends by one more point in
/// both directions within the current structure.
pub fn homogeneity_probe(o: &GenericOracle, m: usize, trials: usize) -> Result<ProbeReport> {
    let sat = o.saturation();
    if sat.level < m || sat.prefix < m {
        return Err(Error::Refused(format!(
            "probe at m = {m} needs saturation level >= {m}; oracle has level {} over {} elements",
            sat.level, sat.prefix
        )));
    }
    let s = o.current();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed() ^ 0x9e37_79b9_7f4a_7c15);
    let mut report = ProbeReport { m, trials, successes: 0, failure: None };
    for _ in 0..trials {
        let a: Vec<Element> = sample(&mut rng, sat.prefix, m).into_vec();
        let ta = tuple_type_unchecked(s, &a);
        let mut b = a.clone();
        for _ in 0..200 {
            let cand: Vec<Element> = sample(&mut rng, sat.prefix, m).into_vec();
            if tuple_type_unchecked(s, &cand) == ta {
                b = cand;
                break;
            }
        }
        if extends_both_ways(s, &a, &b) {
            report.successes += 1;
        } else if report.failure.is_none() {
            report.failure = Some((a, b));
        }
    }
    Ok(report)
}

fn extends_both_ways(s: &FinStructure, a: &[Element], b: &[Element]) -> bool {
    let over = |base: &[Element]| -> BTreeSet<TypeId> {
        let mut t = base.to_vec();
        t.push(0);
        (0..s.size())
            .map(|z| {
                *t.last_mut().unwrap() = z;
                tuple_type_unchecked(s, &t)
            })
            .collect()
    };
    over(a) == over(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::P2Spec;
    use crate::structure::graph;

    fn saturated(seed: u64, k: usize, passes: usize) -> GenericOracle {
        let mut o = GenericOracle::new(P2Spec::random_graph(), seed).unwrap();
        o.grow(k.max(1)).unwrap();
        let reports = o.saturate_passes(k, 10_000, passes);
        assert!(reports.iter().all(|r| r.saturated));
        o
    }

    #[test]
    fn triangle_and_path_differ_in_one_round() {
        let triangle = graph("R", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let path = graph("R", 3, &[(0, 1), (1, 2)]).unwrap();
        match back_and_forth(&triangle, &path, 1).unwrap() {
            GameVerdict::Distinguished { rounds: 1, position, .. } => {
                assert_eq!(position.left.len(), 1);
                assert_eq!(position.right.len(), 1);
            }
            v => panic!("expected a distinguishing position, got {v:?}"),
        }
    }

    #[test]
    fn structure_is_equivalent_to_itself() {
        let path = graph("R", 4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        for k in 0..3 {
            assert!(back_and_forth(&path, &path, k).unwrap().is_equivalent());
        }
    }

    #[test]
    fn zero_rounds_compare_point_types() {
        let looped = {
            let mut s = graph("R", 1, &[]).unwrap();
            s.insert(0, &[0, 0]).unwrap();
            s
        };
        let plain = graph("R", 1, &[]).unwrap();
        let v = back_and_forth(&looped, &plain, 0).unwrap();
        assert!(matches!(v, GameVerdict::Distinguished { side: Side::Left, element: 0, .. }));
    }

    #[test]
    fn independently_seeded_saturated_oracles_are_equivalent() {
        let a = saturated(1, 2, 20);
        let b = saturated(2, 2, 20);
        assert!(a.is_closed(2) && b.is_closed(2));
        assert!(back_and_forth(a.current(), b.current(), 2).unwrap().is_equivalent());
    }

    #[test]
    fn probe_succeeds_on_saturated_oracle() {
        let o = saturated(5, 3, 1);
        let r = homogeneity_probe(&o, 2, 50).unwrap();
        assert_eq!(r.successes, 50, "{:?}", r.failure);
        let r0 = homogeneity_probe(&o, 0, 5).unwrap();
        assert_eq!(r0.success_rate(), 1.0);
    }

    #[test]
    fn probe_refuses_unsaturated_oracle() {
        let mut o = GenericOracle::new(P2Spec::random_graph(), 5).unwrap();
        o.grow(4).unwrap();
        assert!(matches!(homogeneity_probe(&o, 1, 10), Err(Error::Refused(_))));
    }
}
