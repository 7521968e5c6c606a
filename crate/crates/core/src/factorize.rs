//! Perfect matchings, 2-factorizations, and labelings of regular graphs as
//! Schreier graphs.
//!
//! A finite regular graph is a Schreier graph exactly when it splits into
//! disjoint 1-factors and 2-factors. For even degree `2k` Petersen's theorem
//! always gives `k` 2-factors; odd degree additionally needs a perfect matching.

use std::collections::VecDeque;

use thiserror::Error;

use crate::lgraph::{GraphBuilder, GraphError, LabeledGraph, PlainGraph, VertexId};
use crate::words::{Alphabet, Letter, OrderClass, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorError {
    #[error("graph is not regular")]
    NotRegular,
    #[error("degree {0} is not even")]
    OddDegree(usize),
    #[error("graph has degree zero")]
    DegreeZero,
    #[error("odd degree and no perfect matching: not a Schreier graph")]
    NotSchreier,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Maximum matching by Edmonds' blossom algorithm. Returns `mate[v]`.
pub fn maximum_matching(g: &PlainGraph) -> Vec<Option<VertexId>> {
    let n = g.vertices;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &g.edges {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    const NONE: usize = usize::MAX;
    let mut mate = vec![NONE; n];
    let mut parent = vec![NONE; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    let mut blossom = vec![false; n];

    fn lca(a0: usize, b0: usize, mate: &[usize], parent: &[usize], base: &[usize]) -> usize {
        let n = mate.len();
        let mut seen = vec![false; n];
        let mut a = a0;
        loop {
            a = base[a];
            seen[a] = true;
            if mate[a] == usize::MAX {
                break;
            }
            a = parent[mate[a]];
        }
        let mut b = b0;
        loop {
            b = base[b];
            if seen[b] {
                return b;
            }
            b = parent[mate[b]];
        }
    }

    fn mark_path(
        mut v: usize,
        b: usize,
        mut child: usize,
        mate: &[usize],
        parent: &mut [usize],
        base: &[usize],
        blossom: &mut [bool],
    ) {
        while base[v] != b {
            blossom[base[v]] = true;
            blossom[base[mate[v]]] = true;
            parent[v] = child;
            child = mate[v];
            v = parent[mate[v]];
        }
    }

    for root in 0..n {
        if mate[root] != NONE {
            continue;
        }
        used.iter_mut().for_each(|x| *x = false);
        parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in base.iter_mut().enumerate() {
            *b = i;
        }
        used[root] = true;
        let mut q = VecDeque::from([root]);
        let mut end = NONE;
        'search: while let Some(v) = q.pop_front() {
            for &to in &adj[v] {
                if base[v] == base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && parent[mate[to]] != NONE) {
                    let cur = lca(v, to, &mate, &parent, &base);
                    blossom.iter_mut().for_each(|x| *x = false);
                    mark_path(v, cur, to, &mate, &mut parent, &base, &mut blossom);
                    mark_path(to, cur, v, &mate, &mut parent, &base, &mut blossom);
                    for i in 0..n {
                        if blossom[base[i]] {
                            base[i] = cur;
                            if !used[i] {
                                used[i] = true;
                                q.push_back(i);
                            }
                        }
                    }
                } else if parent[to] == NONE {
                    parent[to] = v;
                    if mate[to] == NONE {
                        end = to;
                        break 'search;
                    }
                    used[mate[to]] = true;
                    q.push_back(mate[to]);
                }
            }
        }
        let mut v = end;
        while v != NONE {
            let pv = parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
    mate.into_iter().map(|m| (m != NONE).then_some(m)).collect()
}

/// A perfect matching as edge indices of `g`, sorted, or `None`.
pub fn perfect_matching(g: &PlainGraph) -> Option<Vec<usize>> {
    if g.vertices % 2 == 1 {
        return None;
    }
    let mate = maximum_matching(g);
    if mate.iter().any(Option::is_none) {
        return None;
    }
    let mut taken = vec![false; g.vertices];
    let mut out = Vec::with_capacity(g.vertices / 2);
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if u != v && mate[u] == Some(v) && !taken[u] {
            taken[u] = true;
            taken[v] = true;
            out.push(i);
        }
    }
    Some(out)
}

/// Exhaustive search for a perfect matching, used to cross-check the blossom
/// algorithm on small graphs.
pub fn perfect_matching_exhaustive(g: &PlainGraph) -> Option<Vec<usize>> {
    fn go(adj: &[Vec<(usize, usize)>], matched: &mut [bool], chosen: &mut Vec<usize>) -> bool {
        let Some(u) = matched.iter().position(|&m| !m) else { return true };
        matched[u] = true;
        for &(v, e) in &adj[u] {
            if v != u && !matched[v] {
                matched[v] = true;
                chosen.push(e);
                if go(adj, matched, chosen) {
                    return true;
                }
                chosen.pop();
                matched[v] = false;
            }
        }
        matched[u] = false;
        false
    }
    if g.vertices % 2 == 1 {
        return None;
    }
    let adj = g.adjacency();
    let mut matched = vec![false; g.vertices];
    let mut chosen = Vec::new();
    go(&adj, &mut matched, &mut chosen).then(|| {
        chosen.sort_unstable();
        chosen
    })
}

/// One 2-factor, oriented: `succ` is a permutation of the vertices and
/// `edge_of[v]` the input edge used for the step `v → succ[v]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoFactor {
    pub succ: Vec<VertexId>,
    pub edge_of: Vec<usize>,
}

impl TwoFactor {
    pub fn edges(&self) -> Vec<usize> {
        let mut e = self.edge_of.clone();
        e.sort_unstable();
        e
    }

    /// Reverses every cycle whose least vertex steps to the larger of its two
    /// cycle neighbours.
    fn canonicalize(&mut self) {
        let n = self.succ.len();
        let mut seen = vec![false; n];
        for m in 0..n {
            if seen[m] {
                continue;
            }
            let mut cyc = vec![m];
            seen[m] = true;
            let mut v = self.succ[m];
            while v != m {
                seen[v] = true;
                cyc.push(v);
                v = self.succ[v];
            }
            if cyc.len() >= 3 && cyc[cyc.len() - 1] < cyc[1] {
                let old_edge: Vec<usize> = cyc.iter().map(|&v| self.edge_of[v]).collect();
                let k = cyc.len();
                for i in 0..k {
                    let v = cyc[i];
                    let prev = cyc[(i + k - 1) % k];
                    self.succ[v] = prev;
                    self.edge_of[v] = old_edge[(i + k - 1) % k];
                }
            }
        }
    }
}

/// Orients every edge so that in-degree equals out-degree, by following Euler
/// circuits. Returns `(tail, head)` per edge.
fn euler_orientation(g: &PlainGraph) -> Vec<(VertexId, VertexId)> {
    let adj = g.adjacency();
    let mut used = vec![false; g.edges.len()];
    let mut ptr = vec![0; g.vertices];
    let mut orient = vec![(0, 0); g.edges.len()];
    for s in 0..g.vertices {
        // iterative Hierholzer: orient each edge in the direction it is first walked
        let mut stack = vec![s];
        while let Some(&v) = stack.last() {
            let mut advanced = false;
            while ptr[v] < adj[v].len() {
                let (w, e) = adj[v][ptr[v]];
                ptr[v] += 1;
                if !used[e] {
                    used[e] = true;
                    orient[e] = (v, w);
                    stack.push(w);
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                stack.pop();
            }
        }
    }
    orient
}

/// Perfect matching in a regular bipartite multigraph given as out-lists of
/// `(right vertex, edge id)`, by augmenting paths.
fn bipartite_perfect_matching(out: &[Vec<(usize, usize)>], n: usize) -> Option<Vec<(usize, usize)>> {
    fn augment(
        u: usize,
        out: &[Vec<(usize, usize)>],
        seen: &mut [bool],
        match_right: &mut [Option<(usize, usize)>],
    ) -> bool {
        for &(v, e) in &out[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if match_right[v].is_none_or(|(w, _)| augment(w, out, seen, match_right)) {
                match_right[v] = Some((u, e));
                return true;
            }
        }
        false
    }
    let mut match_right: Vec<Option<(usize, usize)>> = vec![None; n];
    for u in 0..n {
        let mut seen = vec![false; n];
        if !augment(u, out, &mut seen, &mut match_right) {
            return None;
        }
    }
    let mut succ = vec![(0, 0); n];
    for (v, m) in match_right.iter().enumerate() {
        let (u, e) = m.expect("perfect");
        succ[u] = (v, e);
    }
    Some(succ)
}

/// Splits a `2k`-regular multigraph into `k` spanning 2-regular subgraphs.
pub fn two_factorize(g: &PlainGraph) -> Result<Vec<TwoFactor>, FactorError> {
    let d = g.regular_degree().ok_or(FactorError::NotRegular)?;
    if d % 2 == 1 {
        return Err(FactorError::OddDegree(d));
    }
    let n = g.vertices;
    let orient = euler_orientation(g);
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(t, h)) in orient.iter().enumerate() {
        out[t].push((h, e));
    }
    let mut factors = Vec::with_capacity(d / 2);
    for _ in 0..d / 2 {
        let m = bipartite_perfect_matching(&out, n).expect("regular bipartite graphs have perfect matchings");
        for (u, &(_, e)) in m.iter().enumerate() {
            let pos = out[u].iter().position(|&(_, f)| f == e).unwrap();
            out[u].remove(pos);
        }
        let mut f = TwoFactor { succ: m.iter().map(|&(v, _)| v).collect(), edge_of: m.iter().map(|&(_, e)| e).collect() };
        f.canonicalize();
        factors.push(f);
    }
    Ok(factors)
}

/// Labels a regular multigraph as a Schreier graph, rooted at vertex 0.
///
/// Degree `2k` uses `k` infinite symbols (`x`, or `x1..xk`); odd degree adds a
/// perfect matching labeled by the order-two symbol `a`. Edge `i` of the input
/// becomes the oriented pair `(2i, 2i+1)` of the output.
pub fn schreierize(g: &PlainGraph) -> Result<LabeledGraph, FactorError> {
    let d = g.regular_degree().ok_or(FactorError::NotRegular)?;
    if d == 0 {
        return Err(FactorError::DegreeZero);
    }
    let matching = if d % 2 == 1 {
        Some(perfect_matching(g).ok_or(FactorError::NotSchreier)?)
    } else {
        None
    };
    let mut in_matching = vec![false; g.edges.len()];
    if let Some(m) = &matching {
        for &e in m {
            in_matching[e] = true;
        }
    }
    let rest_idx: Vec<usize> = (0..g.edges.len()).filter(|&e| !in_matching[e]).collect();
    let rest = PlainGraph { vertices: g.vertices, edges: rest_idx.iter().map(|&e| g.edges[e]).collect() };
    let factors = if d >= 2 { two_factorize(&rest)? } else { Vec::new() };

    let k = factors.len();
    let mut symbols: Vec<(String, OrderClass)> = if k == 1 {
        vec![("x".into(), OrderClass::Infinite)]
    } else {
        (1..=k).map(|i| (format!("x{i}"), OrderClass::Infinite)).collect()
    };
    if matching.is_some() {
        symbols.push(("a".into(), OrderClass::Order2));
    }
    let pairs: Vec<(&str, OrderClass)> = symbols.iter().map(|(s, o)| (s.as_str(), *o)).collect();
    let alphabet = Alphabet::from_pairs(&pairs)?;

    // (tail, head, letter) for each input edge
    let mut assign: Vec<Option<(VertexId, VertexId, Letter)>> = vec![None; g.edges.len()];
    for (s, f) in factors.iter().enumerate() {
        for v in 0..g.vertices {
            let e = rest_idx[f.edge_of[v]];
            assign[e] = Some((v, f.succ[v], Letter::pos(s)));
        }
    }
    if let Some(m) = &matching {
        for &e in m {
            let (u, v) = g.edges[e];
            assign[e] = Some((u, v, Letter::pos(k)));
        }
    }
    let mut b = GraphBuilder::new(Some(alphabet));
    b.add_vertices(g.vertices);
    for a in assign {
        let (u, v, l) = a.expect("every edge assigned");
        b.add_edge(u, v, Some(l));
    }
    if g.vertices > 0 {
        b.set_root(0);
    }
    Ok(b.build()?)
}

/// The 16-vertex cubic graph with three bridges and no perfect matching: a
/// centre joined to three gadgets, each a `K4` minus an edge `q1q2` whose ends
/// are joined to a common vertex `p`.
pub fn cubic_without_perfect_matching() -> PlainGraph {
    let mut edges = Vec::new();
    let centre = 0;
    for g in 0..3 {
        let base = 1 + 5 * g;
        let (p, q1, q2, r1, r2) = (base, base + 1, base + 2, base + 3, base + 4);
        edges.extend([(centre, p), (p, q1), (p, q2), (q1, r1), (q1, r2), (q2, r1), (q2, r2), (r1, r2)]);
    }
    PlainGraph { vertices: 16, edges }
}

/// The Petersen graph: outer 5-cycle `0..5`, inner pentagram `5..10`, spokes.
pub fn petersen_plain() -> PlainGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    PlainGraph { vertices: 10, edges }
}

/// Circulant graph on `n` vertices with connection set `{±s : s ∈ steps}`.
pub fn circulant(n: usize, steps: &[usize]) -> PlainGraph {
    let mut edges = Vec::new();
    for &s in steps {
        for i in 0..n {
            edges.push((i, (i + s) % n));
        }
    }
    PlainGraph { vertices: n, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_perfect(g: &PlainGraph, m: &[usize]) -> bool {
        let mut cov = vec![0; g.vertices];
        for &e in m {
            let (u, v) = g.edges[e];
            if u == v {
                return false;
            }
            cov[u] += 1;
            cov[v] += 1;
        }
        cov.iter().all(|&c| c == 1)
    }

    #[test]
    fn petersen_has_perfect_matching() {
        let g = petersen_plain();
        let m = perfect_matching(&g).unwrap();
        assert_eq!(m.len(), 5);
        assert!(is_perfect(&g, &m));
        assert!(perfect_matching_exhaustive(&g).is_some());
    }

    #[test]
    fn odd_order_has_none() {
        let g = circulant(5, &[1]);
        assert!(perfect_matching(&g).is_none());
        assert!(perfect_matching_exhaustive(&g).is_none());
    }

    #[test]
    fn bridged_cubic_has_none() {
        let g = cubic_without_perfect_matching();
        assert_eq!(g.regular_degree(), Some(3));
        assert!(g.is_connected());
        assert!(perfect_matching(&g).is_none());
        assert!(perfect_matching_exhaustive(&g).is_none());
        assert_eq!(schreierize(&g), Err(FactorError::NotSchreier));
    }

    #[test]
    fn circulant_two_factors() {
        let g = circulant(7, &[1, 2]);
        let fs = two_factorize(&g).unwrap();
        assert_eq!(fs.len(), 2);
        let mut all: Vec<usize> = fs.iter().flat_map(TwoFactor::edges).collect();
        all.sort_unstable();
        assert_eq!(all, (0..14).collect::<Vec<_>>());
        for f in &fs {
            let mut deg = vec![0; 7];
            for v in 0..7 {
                let (a, b) = g.edges[f.edge_of[v]];
                deg[a] += 1;
                deg[b] += 1;
                assert!((a, b) == (v, f.succ[v]) || (b, a) == (v, f.succ[v]));
            }
            assert!(deg.iter().all(|&d| d == 2));
        }
    }

    #[test]
    fn loops_split_one_per_factor() {
        let g = PlainGraph::new(1, vec![(0, 0), (0, 0)]).unwrap();
        let fs = two_factorize(&g).unwrap();
        assert_eq!(fs.len(), 2);
        assert_ne!(fs[0].edge_of[0], fs[1].edge_of[0]);
    }

    #[test]
    fn disjoint_union() {
        let g = PlainGraph::new(6, vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        let fs = two_factorize(&g).unwrap();
        assert_eq!(fs.len(), 1);
    }

    #[test]
    fn petersen_schreierizes() {
        let g = petersen_plain();
        let s = schreierize(&g).unwrap();
        assert!(s.check_wellformed().is_ok());
        assert!(s.is_complete().unwrap());
        assert!(s.is_deterministic().unwrap());
        assert_eq!(s.alphabet().unwrap().symbols().len(), 2);
        assert_eq!(s.strip_labels().unwrap().edge_multiset(), g.edge_multiset());
    }

    #[test]
    fn cycle_orientation_is_canonical() {
        let g = circulant(6, &[1]);
        let s = schreierize(&g).unwrap();
        let x = Letter::pos(0);
        assert_eq!(s.step(0, x), Some(1));
        assert_eq!(s.alphabet().unwrap().num_symbols(), 1);
    }

    #[test]
    fn blossom_matches_oracle_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=10);
            let m = rng.gen_range(0..=2 * n);
            let edges = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
            let g = PlainGraph::new(n, edges).unwrap();
            let fast = perfect_matching(&g);
            let slow = perfect_matching_exhaustive(&g);
            assert_eq!(fast.is_some(), slow.is_some(), "{g:?}");
            if let Some(m) = fast {
                assert!(is_perfect(&g, &m));
            }
        }
    }
}
