//! Built-in instances: the Petersen graph, the periodic fig-2 to fig-5
//! windows with their coverings, the alternating-group actions, generating
//! systems of finite groups, and random instance generators.
//!
//! Window widths count columns: a window of width `w` spans columns
//! `-w/2 ..= w/2` (or `0 ..= w/2` for the one-ended bases). Vertices missing
//! an edge because of the cut are marked as boundary.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cover::{CoverError, CoveringMap};
use crate::isoauto::{is_transitive, Isomorphism};
use crate::lgraph::{GraphError, LabeledGraph, PlainGraph, VertexId};
use crate::perms::{FiniteGroup, PermAction, PermError, Permutation};
use crate::schreier::{from_action, from_cosets, SchreierError};
use crate::words::{Alphabet, OrderClass};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("window width {0} is below 4")]
    WindowTooSmall(usize),
    #[error("n = {0} is outside the supported range")]
    OutOfRange(usize),
    #[error("group of order {0} exceeds the bound {1}")]
    BoundExceeded(usize, usize),
    #[error("the subgroup is the whole group")]
    WholeGroup,
    #[error("the given elements do not generate the group")]
    NotGenerating,
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Schreier(#[from] SchreierError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// A graph with a printable name per vertex.
#[derive(Debug, Clone)]
pub struct Window {
    pub graph: LabeledGraph,
    pub names: Vec<String>,
}

impl Window {
    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }
}

/// A covering between two windows.
#[derive(Debug, Clone)]
pub struct CoverPair {
    pub cover: Window,
    pub base: Window,
    pub phi: CoveringMap,
}

/// Accumulates named vertices and positive-letter transitions.
struct Sketch<K> {
    alphabet: Alphabet,
    ids: HashMap<K, VertexId>,
    names: Vec<String>,
    next: Vec<Vec<Option<VertexId>>>,
}

impl<K: std::hash::Hash + Eq + Copy + std::fmt::Debug> Sketch<K> {
    fn new(alphabet: Alphabet) -> Self {
        Sketch { alphabet, ids: HashMap::new(), names: Vec::new(), next: Vec::new() }
    }

    fn vertex(&mut self, k: K) -> VertexId {
        if let Some(&v) = self.ids.get(&k) {
            return v;
        }
        let v = self.names.len();
        self.ids.insert(k, v);
        self.names.push(format!("{k:?}").replace(' ', ""));
        self.next.push(vec![None; self.alphabet.num_symbols()]);
        v
    }

    fn arrow(&mut self, s: usize, from: K, to: K) {
        if let (Some(&u), Some(&v)) = (self.ids.get(&from), self.ids.get(&to)) {
            self.next[u][s] = Some(v);
            if self.alphabet.order(s) == OrderClass::Order2 {
                self.next[v][s] = Some(u);
            }
        }
    }

    fn build(self, root: K) -> Result<Window, GraphError> {
        let n = self.next.len();
        let k = self.alphabet.num_symbols();
        let mut has_in = vec![vec![false; k]; n];
        for row in &self.next {
            for (s, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    has_in[*t][s] = true;
                }
            }
        }
        let boundary: Vec<VertexId> = (0..n)
            .filter(|&v| (0..k).any(|s| self.next[v][s].is_none() || !has_in[v][s]))
            .collect();
        let root = self.ids[&root];
        let graph = LabeledGraph::from_transitions(self.alphabet, &self.next, Some(root), boundary)?;
        Ok(Window { graph, names: self.names })
    }
}

/// Label-preserving covering determined by a vertex map.
fn label_cover(src: &LabeledGraph, tgt: &LabeledGraph, vmap: Vec<VertexId>) -> Result<CoveringMap, CorpusError> {
    let mut emap = Vec::with_capacity(src.num_edges());
    for e in 0..src.num_edges() {
        let edge = src.edge(e);
        let label = edge.label.ok_or(GraphError::Unlabeled)?;
        let f = tgt
            .out_edge(vmap[edge.src], label)
            .ok_or_else(|| CoverError::Invalid(format!("edge {e} has no image")))?;
        emap.push(f);
    }
    Ok(CoveringMap::new(src, tgt, vmap, emap, true)?)
}

fn half(w: usize) -> Result<i64, CorpusError> {
    if w < 4 {
        return Err(CorpusError::WindowTooSmall(w));
    }
    Ok((w / 2) as i64)
}

/// The Petersen graph over `⟨x, a | a²⟩`. Vertices `v1..v5` are `0..5` and
/// `w1..w5` are `5..10`; root `v1`.
pub fn petersen_schreier() -> Window {
    let alphabet = Alphabet::parse_spec("x:inf,a:2").expect("static");
    let outer = [0, 2, 4, 1, 3];
    let mut next = vec![vec![None, None]; 10];
    for k in 0..5 {
        next[outer[k]][0] = Some(outer[(k + 1) % 5]);
        next[5 + k][0] = Some(5 + (k + 1) % 5);
        next[k][1] = Some(k + 5);
        next[k + 5][1] = Some(k);
    }
    let graph = LabeledGraph::from_transitions(alphabet, &next, Some(0), []).expect("static");
    let names = (1..=5).map(|i| format!("v{i}")).chain((1..=5).map(|i| format!("w{i}"))).collect();
    Window { graph, names }
}

/// The unlabeled automorphism of the Petersen graph exchanging `v1` and `w1`:
/// `v1↦w1, v2↦w3, v3↦w5, v4↦w2, v5↦w4` and `w1↦v1, w2↦v3, w3↦v5, w4↦v2, w5↦v4`.
pub fn petersen_beta(p: &Window) -> Option<Isomorphism> {
    let images = [5, 7, 9, 6, 8, 0, 2, 4, 1, 3];
    Isomorphism::from_vertex_map(&p.graph, &p.graph, images.iter().map(|&i| Some(i)).collect())
}

/// The fig-2 window over `⟨x, a | a²⟩`: an x-line of period three `P → B → C → P`
/// with a degenerate a-loop at each `P` and an a-edge `B – C`. Vertices are
/// named `("P"|"B"|"C", column)`; root `("B", 0)`.
pub fn fig2_window(w: usize) -> Result<Window, CorpusError> {
    let h = half(w)?;
    let mut s = Sketch::new(Alphabet::parse_spec("x:inf,a:2").expect("static"));
    for c in -h..=h {
        for t in ["P", "B", "C"] {
            s.vertex((t, c));
        }
    }
    for c in -h..=h {
        s.arrow(0, ("P", c), ("B", c));
        s.arrow(0, ("B", c), ("C", c));
        s.arrow(0, ("C", c), ("P", c + 1));
        s.arrow(1, ("P", c), ("P", c));
        s.arrow(1, ("B", c), ("C", c));
    }
    Ok(s.build(("B", 0))?)
}

/// The fig-3 window over the free group on `x, y`. Cover: two x-lines (rows 0 and 1)
/// with `x: (c, r) → (c-1, r)`, y-loops everywhere except column 0 where `y`
/// swaps the rows. Base: one x-line with y-loops. `φ(c, r) = c`.
pub fn fig3_pair(w: usize) -> Result<CoverPair, CorpusError> {
    let h = half(w)?;
    let a = Alphabet::free(&["x", "y"]);
    let mut s = Sketch::new(a.clone());
    for c in -h..=h {
        for r in 0..2 {
            s.vertex((c, r));
        }
    }
    for c in -h..=h {
        for r in 0..2 {
            s.arrow(0, (c, r), (c - 1, r));
            let t = if c == 0 { (c, 1 - r) } else { (c, r) };
            s.arrow(1, (c, r), t);
        }
    }
    let cover = s.build((0, 0))?;
    let mut b = Sketch::new(a);
    for c in -h..=h {
        b.vertex(c);
    }
    for c in -h..=h {
        b.arrow(0, c, c - 1);
        b.arrow(1, c, c);
    }
    let base = b.build(0)?;
    let vmap = (0..cover.names.len())
        .map(|v| {
            let (c, _) = key_of::<(i64, i64)>(&cover.names[v]);
            base.vertex(&c.to_string()).unwrap()
        })
        .collect();
    let phi = label_cover(&cover.graph, &base.graph, vmap)?;
    Ok(CoverPair { cover, base, phi })
}

/// The fig-4 window over `⟨x, a | a²⟩`. Cover: a ladder on columns `-w/2-1 ..= w/2`
/// with `x: (c, 0) → (c-1, 0)`, `x: (c-1, 1) → (c, 1)` and a-rungs. Base: the
/// half ladder on columns `0 ..= w/2` closed by `x: (0, 0) → (0, 1)`.
/// `φ(c, r) = (c, r)` for `c ≥ 0` and `(-1-c, 1-r)` otherwise.
pub fn fig4_pair(w: usize) -> Result<CoverPair, CorpusError> {
    let h = half(w)?;
    let a = Alphabet::parse_spec("x:inf,a:2").expect("static");
    let mut s = Sketch::new(a.clone());
    for c in -h - 1..=h {
        for r in 0..2 {
            s.vertex((c, r));
        }
    }
    for c in -h - 1..=h {
        s.arrow(0, (c, 0), (c - 1, 0));
        s.arrow(0, (c - 1, 1), (c, 1));
        s.arrow(1, (c, 0), (c, 1));
    }
    let cover = s.build((0, 0))?;
    let mut b = Sketch::new(a);
    for c in 0..=h {
        for r in 0..2 {
            b.vertex((c, r));
        }
    }
    for c in 0..=h {
        if c > 0 {
            b.arrow(0, (c, 0), (c - 1, 0));
            b.arrow(0, (c - 1, 1), (c, 1));
        }
        b.arrow(1, (c, 0), (c, 1));
    }
    b.arrow(0, (0, 0), (0, 1));
    let base = b.build((0, 0))?;
    let vmap = (0..cover.names.len())
        .map(|v| {
            let (c, r) = key_of::<(i64, i64)>(&cover.names[v]);
            let img = if c >= 0 { (c, r) } else { (-1 - c, 1 - r) };
            base.vertex(&format!("{img:?}").replace(' ', "")).unwrap()
        })
        .collect();
    let phi = label_cover(&cover.graph, &base.graph, vmap)?;
    Ok(CoverPair { cover, base, phi })
}

/// The fig-5 window over the free group on `x, y`. Each column `c` carries the
/// y-cycle `(c,0,0) → (c,0,1) → (c,1,1) → (c,1,0) → (c,0,0)`; the x-rows
/// `(·,0,0)` and `(·,1,0)` run right, `(·,0,1)` and `(·,1,1)` run left. The
/// cover spans columns `-w/2-1 ..= w/2`; the base spans `0 ..= w/2` and is
/// closed by `x: (0,1,1) → (0,0,0)` and `x: (0,0,1) → (0,1,0)`.
/// `φ(c,y,z) = (c,y,z)` for `c ≥ 0` and `(-1-c, 1-y, 1-z)` otherwise.
pub fn fig5_pair(w: usize) -> Result<CoverPair, CorpusError> {
    let h = half(w)?;
    let a = Alphabet::free(&["x", "y"]);
    let cells = [(0, 0), (0, 1), (1, 1), (1, 0)];
    let row_step = |y: i64, z: i64| if (y, z) == (0, 0) || (y, z) == (1, 0) { 1 } else { -1 };
    let columns = |s: &mut Sketch<(i64, i64, i64)>, lo: i64, hi: i64| {
        for c in lo..=hi {
            for &(y, z) in &cells {
                s.vertex((c, y, z));
            }
        }
        for c in lo..=hi {
            for k in 0..4 {
                let (y, z) = cells[k];
                let (y2, z2) = cells[(k + 1) % 4];
                s.arrow(1, (c, y, z), (c, y2, z2));
                let d = row_step(y, z);
                if (lo..=hi).contains(&(c + d)) {
                    s.arrow(0, (c, y, z), (c + d, y, z));
                }
            }
        }
    };
    let mut s = Sketch::new(a.clone());
    columns(&mut s, -h - 1, h);
    let cover = s.build((0, 0, 0))?;
    let mut b = Sketch::new(a);
    columns(&mut b, 0, h);
    b.arrow(0, (0, 1, 1), (0, 0, 0));
    b.arrow(0, (0, 0, 1), (0, 1, 0));
    let base = b.build((0, 0, 0))?;
    let vmap = (0..cover.names.len())
        .map(|v| {
            let (c, y, z) = key_of::<(i64, i64, i64)>(&cover.names[v]);
            let img = if c >= 0 { (c, y, z) } else { (-1 - c, 1 - y, 1 - z) };
            base.vertex(&format!("{img:?}").replace(' ', "")).unwrap()
        })
        .collect();
    let phi = label_cover(&cover.graph, &base.graph, vmap)?;
    Ok(CoverPair { cover, base, phi })
}

/// The map `(c, y, z) ↦ (c, 1-y, z)` on a fig-5 window, an automorphism of
/// both the cover and the base that reverses the y-cycles.
pub fn fig5_flip(win: &Window) -> Option<Isomorphism> {
    let map = (0..win.names.len())
        .map(|v| {
            let (c, y, z) = key_of::<(i64, i64, i64)>(&win.names[v]);
            win.vertex(&format!("{:?}", (c, 1 - y, z)).replace(' ', ""))
        })
        .collect();
    Isomorphism::from_vertex_map(&win.graph, &win.graph, map)
}

/// A bi-infinite x-line window on columns `-w/2 ..= w/2`, rooted at 0.
pub fn line_window(w: usize) -> Result<Window, CorpusError> {
    let h = half(w)?;
    let mut s = Sketch::new(Alphabet::free(&["x"]));
    for c in -h..=h {
        s.vertex(c);
    }
    for c in -h..=h {
        s.arrow(0, c, c + 1);
    }
    Ok(s.build(0)?)
}

trait Key: Sized {
    fn parse(s: &str) -> Option<Self>;
}

impl Key for (i64, i64) {
    fn parse(s: &str) -> Option<Self> {
        let v = ints(s)?;
        (v.len() == 2).then(|| (v[0], v[1]))
    }
}

impl Key for (i64, i64, i64) {
    fn parse(s: &str) -> Option<Self> {
        let v = ints(s)?;
        (v.len() == 3).then(|| (v[0], v[1], v[2]))
    }
}

fn ints(s: &str) -> Option<Vec<i64>> {
    s.trim_matches(|c| c == '(' || c == ')').split(',').map(|t| t.trim().parse().ok()).collect()
}

fn key_of<K: Key>(name: &str) -> K {
    K::parse(name).expect("window vertex names are tuples")
}

fn cycle_perm(n: usize, cycle: Vec<usize>) -> Result<Permutation, PermError> {
    Permutation::from_cycles(n, &[cycle])
}

/// `a_n = (1,3,4,…,n,2)` and `b_n = (2,4,…,n-1,1,n,n-2,…,3)` for odd `n`,
/// acting on `n` points. The Schreier graph is rooted at point `n`, whose
/// stabilizer is `H_n`.
pub fn an_hn(n: usize) -> Result<(PermAction, LabeledGraph), CorpusError> {
    if n.is_multiple_of(2) || !(5..=12).contains(&n) {
        return Err(CorpusError::OutOfRange(n));
    }
    let mut a = vec![1];
    a.extend(3..=n);
    a.push(2);
    let mut b: Vec<usize> = (2..n).step_by(2).collect();
    b.push(1);
    b.push(n);
    b.extend((3..=n - 2).rev().step_by(2));
    let alphabet = Alphabet::free(&["a", "b"]);
    let act = PermAction::new(alphabet, vec![cycle_perm(n, a)?, cycle_perm(n, b)?])?;
    let g = from_action(&act, n - 1)?;
    Ok((act, g))
}

/// The `n` generators `c_i = (1,2,…,î,…,n)` for even `n`, rooted at point `n`.
pub fn an_hn_even(n: usize) -> Result<(PermAction, LabeledGraph), CorpusError> {
    if n % 2 == 1 || !(6..=12).contains(&n) {
        return Err(CorpusError::OutOfRange(n));
    }
    let names: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let perms = (1..=n)
        .map(|i| cycle_perm(n, (1..=n).filter(|&j| j != i).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    let act = PermAction::new(Alphabet::free(&refs), perms)?;
    let g = from_action(&act, n - 1)?;
    Ok((act, g))
}

/// A generating system of every non-identity element up to inverses: all
/// involutions and one element of each pair `{g, g⁻¹}`, in index order.
pub fn full_generating_system(group: &FiniteGroup) -> Result<Vec<usize>, CorpusError> {
    if group.order() > 1000 {
        return Err(CorpusError::BoundExceeded(group.order(), 1000));
    }
    let mut taken = vec![false; group.order()];
    let mut out = Vec::new();
    for g in 1..group.order() {
        if taken[g] {
            continue;
        }
        taken[g] = true;
        taken[group.inv(g)] = true;
        out.push(g);
    }
    Ok(out)
}

/// The size of [`full_generating_system`]: involutions plus half the rest.
pub fn generating_degree(group: &FiniteGroup) -> usize {
    let inv = (1..group.order()).filter(|&g| group.is_involution(g)).count();
    inv + (group.order() - 1 - inv) / 2
}

/// Schreier graph of the cosets of `h` under `gens`, rooted at `H`.
pub fn coset_graph(group: &FiniteGroup, h: &[usize], gens: &[usize]) -> Result<LabeledGraph, CorpusError> {
    Ok(from_cosets(group, h, gens)?)
}

/// Rewrites a generating system so that it avoids a proper subgroup: with
/// members of `h` moved first and `x₀` the first non-member, returns the
/// elements from `x₀` on followed by `x·x₀` for each earlier `x`.
pub fn avoid_subgroup_gens(group: &FiniteGroup, x: &[usize], h: &[usize]) -> Result<Vec<usize>, CorpusError> {
    if h.len() >= group.order() {
        return Err(CorpusError::WholeGroup);
    }
    if !group.generates(x) {
        return Err(CorpusError::NotGenerating);
    }
    let (inside, outside): (Vec<usize>, Vec<usize>) = x.iter().partition(|g| h.contains(g));
    let x0 = *outside.first().ok_or(CorpusError::NotGenerating)?;
    let mut y = outside.clone();
    y.extend(inside.iter().map(|&g| group.mul(g, x0)));
    Ok(y)
}

/// Outcome of [`strong_simple_scan`] for one subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanEntry {
    pub subgroup: Vec<usize>,
    pub normal: bool,
    /// A generating system whose Schreier graph is transitive.
    pub transitive: Option<Vec<usize>>,
    /// A generating system whose Schreier graph is not transitive.
    pub non_transitive: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrongSimpleScan {
    pub systems_checked: usize,
    pub entries: Vec<ScanEntry>,
}

impl StrongSimpleScan {
    /// No proper nontrivial subgroup has a transitive Schreier graph.
    pub fn strongly_simple(&self) -> bool {
        self.entries.iter().all(|e| e.transitive.is_none())
    }
}

/// Tries every generating system of at most `max_gen_size` non-identity
/// elements against every proper nontrivial subgroup.
pub fn strong_simple_scan(group: &FiniteGroup, max_gen_size: usize) -> Result<StrongSimpleScan, CorpusError> {
    if group.order() > 60 {
        return Err(CorpusError::BoundExceeded(group.order(), 60));
    }
    let subgroups: Vec<Vec<usize>> =
        group.subgroups().into_iter().filter(|h| h.len() > 1 && h.len() < group.order()).collect();
    let mut entries: Vec<ScanEntry> = subgroups
        .iter()
        .map(|h| ScanEntry { subgroup: h.clone(), normal: group.is_normal(h), transitive: None, non_transitive: None })
        .collect();
    let mut systems = Vec::new();
    subsets(1, group.order(), max_gen_size, &mut Vec::new(), &mut systems);
    let mut checked = 0;
    for x in systems.iter().filter(|x| group.generates(x)) {
        checked += 1;
        for e in entries.iter_mut() {
            if e.transitive.is_some() && e.non_transitive.is_some() {
                continue;
            }
            let g = from_cosets(group, &e.subgroup, x)?;
            if is_transitive(&g).is_true() {
                e.transitive.get_or_insert_with(|| x.clone());
            } else {
                e.non_transitive.get_or_insert_with(|| x.clone());
            }
        }
    }
    Ok(StrongSimpleScan { systems_checked: checked, entries })
}

fn subsets(from: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if !cur.is_empty() {
        out.push(cur.clone());
    }
    if cur.len() == k {
        return;
    }
    for i in from..n {
        cur.push(i);
        subsets(i + 1, n, k, cur, out);
        cur.pop();
    }
}

/// A uniformly random involution with some fixed points.
fn random_involution<R: Rng>(rng: &mut R, n: usize) -> Permutation {
    let mut pts: Vec<usize> = (0..n).collect();
    pts.shuffle(rng);
    let mut images: Vec<usize> = (0..n).collect();
    let pairs = rng.gen_range(0..=n / 2);
    for k in 0..pairs {
        let (u, v) = (pts[2 * k], pts[2 * k + 1]);
        images[u] = v;
        images[v] = u;
    }
    Permutation::from_images(images).expect("involution")
}

/// Random action of the free product on `n` points: a random permutation per
/// infinite symbol and a random involution per order-two symbol.
pub fn random_action<R: Rng>(rng: &mut R, alphabet: &Alphabet, n: usize) -> PermAction {
    let perms = (0..alphabet.num_symbols())
        .map(|s| match alphabet.order(s) {
            OrderClass::Order2 => random_involution(rng, n),
            OrderClass::Infinite => {
                let mut images: Vec<usize> = (0..n).collect();
                images.shuffle(rng);
                Permutation::from_images(images).expect("bijection")
            }
        })
        .collect();
    PermAction::new(alphabet.clone(), perms).expect("valid action")
}

/// The root component of the Schreier graph of a random action on at most
/// `n` points, rooted at point 0.
pub fn random_schreier_graph<R: Rng>(rng: &mut R, alphabet: &Alphabet, n: usize) -> LabeledGraph {
    let points = rng.gen_range(1..=n.max(1));
    let act = random_action(rng, alphabet, points);
    let g = from_action(&act, 0).expect("basepoint in range");
    let dist = g.distances_from(0);
    let keep: Vec<VertexId> = (0..g.num_vertices()).filter(|&v| dist[v] != usize::MAX).collect();
    g.induced(&keep, Some(0)).0
}

/// Random connected 2k-regular multigraph on `n` vertices by pairing
/// half-edges uniformly; loops and parallel edges are allowed.
pub fn random_regular_multigraph<R: Rng>(rng: &mut R, n: usize, degree: usize) -> PlainGraph {
    assert!(degree.is_multiple_of(2) && n > 0, "even degree and at least one vertex");
    loop {
        let mut half: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
        half.shuffle(rng);
        let edges: Vec<(VertexId, VertexId)> = half.chunks(2).map(|p| (p[0], p[1])).collect();
        let g = PlainGraph { vertices: n, edges };
        if g.is_connected() {
            return g;
        }
    }
}
