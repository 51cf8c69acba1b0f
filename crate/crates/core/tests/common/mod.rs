//! Brute-force reference implementations used to cross-check the library.
//! Nothing here calls into the library's search code.

#![allow(dead_code)]

use fraisse_core::structure::graph;
use fraisse_core::FinStructure;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn adjacency(s: &FinStructure) -> Vec<Vec<bool>> {
    let n = s.size();
    (0..n).map(|x| (0..n).map(|y| s.holds(0, &[x, y])).collect()).collect()
}

/// Every labelled simple graph on `n` vertices, in edge-mask order.
pub fn all_graphs(n: usize) -> Vec<FinStructure> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    (0..1u64 << pairs.len())
        .map(|mask| {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &p)| p).collect();
            graph("R", n, &edges).unwrap()
        })
        .collect()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> FinStructure {
    let p: f64 = rng.gen_range(0.1..0.9);
    let mut edges = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen_bool(p) {
                edges.push((x, y));
            }
        }
    }
    graph("R", n, &edges).unwrap()
}

/// `s` with vertex `x` renamed to `perm[x]`.
pub fn relabel(s: &FinStructure, perm: &[usize]) -> FinStructure {
    let adj = adjacency(s);
    let n = s.size();
    let mut edges = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if adj[x][y] {
                edges.push((perm[x], perm[y]));
            }
        }
    }
    graph("R", n, &edges).unwrap()
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in 0..n {
            if !cur.contains(&x) {
                cur.push(x);
                go(n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut out);
    out
}

/// Least relabelled upper-triangle adjacency string over all permutations.
pub fn naive_canonical(s: &FinStructure, perms: &[Vec<usize>]) -> Vec<bool> {
    let adj = adjacency(s);
    let n = s.size();
    perms
        .iter()
        .map(|p| {
            // Position i of the relabelled graph holds vertex p[i].
            let mut bits = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in i + 1..n {
                    bits.push(adj[p[i]][p[j]]);
                }
            }
            bits
        })
        .min()
        .unwrap_or_default()
}

/// Plain backtracking over injective maps, checking adjacency pairwise.
pub fn naive_isomorphism(a: &FinStructure, b: &FinStructure) -> Option<Vec<usize>> {
    if a.size() != b.size() {
        return None;
    }
    let (aa, bb) = (adjacency(a), adjacency(b));
    fn go(aa: &[Vec<bool>], bb: &[Vec<bool>], map: &mut Vec<usize>) -> bool {
        let x = map.len();
        if x == aa.len() {
            return true;
        }
        for y in 0..bb.len() {
            if map.contains(&y) || aa[x][x] != bb[y][y] {
                continue;
            }
            if (0..x).all(|z| aa[x][z] == bb[y][map[z]] && aa[z][x] == bb[map[z]][y]) {
                map.push(y);
                if go(aa, bb, map) {
                    return true;
                }
                map.pop();
            }
        }
        false
    }
    let mut map = Vec::new();
    go(&aa, &bb, &mut map).then_some(map)
}

/// All embeddings of `a` into `b` as maps, in lexicographic order.
pub fn naive_embeddings(a: &FinStructure, b: &FinStructure) -> Vec<Vec<usize>> {
    let (aa, bb) = (adjacency(a), adjacency(b));
    let mut out = Vec::new();
    fn go(aa: &[Vec<bool>], bb: &[Vec<bool>], map: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let x = map.len();
        if x == aa.len() {
            out.push(map.clone());
            return;
        }
        for y in 0..bb.len() {
            if map.contains(&y) {
                continue;
            }
            map.push(y);
            // Check the whole map each time; this is the slow reference.
            let ok = (0..=x).all(|i| (0..=x).all(|j| aa[i][j] == bb[map[i]][map[j]]));
            if ok {
                go(aa, bb, map, out);
            }
            map.pop();
        }
    }
    go(&aa, &bb, &mut Vec::new(), &mut out);
    out
}

/// Equality pattern of a tuple and the adjacency matrix of its positions.
pub fn naive_type_key(s: &FinStructure, t: &[usize]) -> (Vec<usize>, Vec<bool>) {
    let adj = adjacency(s);
    let eq = t.iter().map(|e| t.iter().position(|x| x == e).unwrap()).collect();
    let rel = t.iter().flat_map(|&x| t.iter().map(|&y| adj[x][y]).collect::<Vec<_>>()).collect();
    (eq, rel)
}

/// Whether every `k` distinct vertices have, for each adjacency pattern in
/// `patterns`, a vertex outside them with exactly that adjacency.
pub fn naive_axiom(s: &FinStructure, k: usize, patterns: &[Vec<bool>]) -> bool {
    let adj = adjacency(s);
    let n = s.size();
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &tuples {
            for x in 0..n {
                if !t.contains(&x) {
                    let mut u = t.clone();
                    u.push(x);
                    next.push(u);
                }
            }
        }
        tuples = next;
    }
    tuples.iter().all(|t| {
        patterns.iter().all(|p| (0..n).any(|w| !t.contains(&w) && t.iter().zip(p).all(|(&b, &want)| adj[w][b] == want)))
    })
}

/// All `2^k` adjacency patterns over `k` points.
pub fn all_patterns(k: usize) -> Vec<Vec<bool>> {
    (0..1u32 << k).map(|m| (0..k).map(|i| m & (1 << i) != 0).collect()).collect()
}
