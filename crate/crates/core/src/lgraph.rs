//! Labeled graphs with an edge involution.
//!
//! A graph is a vertex count plus a list of oriented edges. Each edge knows its
//! initial vertex and its inverse edge; the terminal vertex of `e` is the
//! initial vertex of `inv(e)`. An edge that is its own inverse is a degenerate
//! loop and contributes one to the degree of its vertex, a non-degenerate loop
//! pair contributes two.
//!
//! Graphs may carry a labeling by the letters of an [`Alphabet`], a root, and a
//! set of boundary vertices. Boundary vertices mark where a truncated window of
//! an infinite graph ends: their stars may be incomplete and every analysis
//! treats information beyond them as unknown.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Alphabet, Letter, OrderClass, Sign, Word, WordError};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} has source {src} outside 0..{n}")]
    SourceOutOfRange { edge: EdgeId, src: VertexId, n: usize },
    #[error("edge {edge} has inverse {inv} outside 0..{m}")]
    InverseOutOfRange { edge: EdgeId, inv: EdgeId, m: usize },
    #[error("edge {0} id does not match its position")]
    EdgeIdMismatch(EdgeId),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("graph is not deterministic")]
    Nondeterministic,
    #[error("graph carries no labeling")]
    Unlabeled,
    #[error("graph has no root")]
    NoRoot,
    #[error("inconsistent transition for letter {letter} at vertex {vertex}")]
    InconsistentTransition { vertex: VertexId, letter: String },
    #[error("graph is not complete")]
    Incomplete,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub label: Option<Letter>,
    pub inv: EdgeId,
}

/// A finite graph in the edge-involution model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    alphabet: Option<Alphabet>,
    num_vertices: usize,
    edges: Vec<Edge>,
    root: Option<VertexId>,
    boundary: Vec<bool>,
    stars: Vec<Vec<EdgeId>>,
    // out-edge per (vertex, letter index), present when labeled and deterministic
    delta: Option<Vec<Option<EdgeId>>>,
}

/// One invariant breach found by [`LabeledGraph::check_wellformed`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    InverseNotInvolutive { edge: EdgeId },
    DegenerateNotLoop { edge: EdgeId },
    DegenerateInfiniteLabel { edge: EdgeId },
    LabelNotInverse { edge: EdgeId },
    MissingLabel { edge: EdgeId },
    LabelWithoutAlphabet { edge: EdgeId },
    InvalidLabel { edge: EdgeId },
    RootOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WellFormedReport {
    pub violations: Vec<Violation>,
}

impl WellFormedReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LabeledGraph {
    /// Assembles a graph from raw parts. Only index-range problems are errors;
    /// every other invariant breach is left for [`Self::check_wellformed`].
    pub fn from_parts(
        alphabet: Option<Alphabet>,
        num_vertices: usize,
        edges: Vec<Edge>,
        root: Option<VertexId>,
        boundary: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, GraphError> {
        let m = edges.len();
        let mut stars = vec![Vec::new(); num_vertices];
        for (id, e) in edges.iter().enumerate() {
            if e.src >= num_vertices {
                return Err(GraphError::SourceOutOfRange { edge: id, src: e.src, n: num_vertices });
            }
            if e.inv >= m {
                return Err(GraphError::InverseOutOfRange { edge: id, inv: e.inv, m });
            }
            stars[e.src].push(id);
        }
        let mut bd = vec![false; num_vertices];
        for v in boundary {
            if v >= num_vertices {
                return Err(GraphError::VertexOutOfRange(v));
            }
            bd[v] = true;
        }
        let mut g = LabeledGraph {
            alphabet,
            num_vertices,
            edges,
            root,
            boundary: bd,
            stars,
            delta: None,
        };
        g.delta = g.build_delta();
        Ok(g)
    }

    fn build_delta(&self) -> Option<Vec<Option<EdgeId>>> {
        let a = self.alphabet.as_ref()?;
        let d = a.degree();
        let mut delta = vec![None; self.num_vertices * d];
        for (id, e) in self.edges.iter().enumerate() {
            let l = e.label?;
            if a.check_letter(l).is_err() {
                return None;
            }
            let slot = &mut delta[e.src * d + a.letter_index(l)];
            if slot.is_some() {
                return None;
            }
            *slot = Some(id);
        }
        Some(delta)
    }

    /// Builds the canonical Schreier-style graph of a partial action.
    ///
    /// `next[v][s]` is the image of vertex `v` under symbol `s` (positive
    /// letter). Infinite symbols must act injectively, order-two symbols as
    /// partial involutions. Edge ids follow `(vertex, letter index)` order, so
    /// the star of `v` lists its out-edges in letter order.
    pub fn from_transitions(
        alphabet: Alphabet,
        next: &[Vec<Option<VertexId>>],
        root: Option<VertexId>,
        boundary: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, GraphError> {
        let n = next.len();
        let k = alphabet.num_symbols();
        let d = alphabet.degree();
        // target[v][letter index]
        let mut target = vec![vec![None; d]; n];
        for v in 0..n {
            if next[v].len() != k {
                return Err(GraphError::InconsistentTransition { vertex: v, letter: "<arity>".into() });
            }
            for s in 0..k {
                let Some(t) = next[v][s] else { continue };
                if t >= n {
                    return Err(GraphError::VertexOutOfRange(t));
                }
                let l = Letter::pos(s);
                let li = alphabet.letter_index(l);
                target[v][li] = Some(t);
                let inv_i = alphabet.inverse_index(li);
                match alphabet.order(s) {
                    OrderClass::Infinite => {
                        if target[t][inv_i].is_some_and(|u| u != v) {
                            return Err(GraphError::InconsistentTransition {
                                vertex: t,
                                letter: alphabet.letter_name(alphabet.inverse(l)),
                            });
                        }
                        target[t][inv_i] = Some(v);
                    }
                    OrderClass::Order2 => {
                        if next[t][s].is_some_and(|u| u != v) || (next[t][s].is_none() && t != v) {
                            return Err(GraphError::InconsistentTransition {
                                vertex: t,
                                letter: alphabet.letter_name(l),
                            });
                        }
                    }
                }
            }
        }
        let mut id_of = vec![vec![usize::MAX; d]; n];
        let mut count = 0;
        for v in 0..n {
            for li in 0..d {
                if target[v][li].is_some() {
                    id_of[v][li] = count;
                    count += 1;
                }
            }
        }
        let mut edges = Vec::with_capacity(count);
        for v in 0..n {
            for li in 0..d {
                if let Some(t) = target[v][li] {
                    let inv = id_of[t][alphabet.inverse_index(li)];
                    debug_assert!(inv != usize::MAX);
                    edges.push(Edge { src: v, label: Some(alphabet.letter_at(li)), inv });
                }
            }
        }
        Self::from_parts(Some(alphabet), n, edges, root, boundary)
    }

    pub fn alphabet(&self) -> Option<&Alphabet> {
        self.alphabet.as_ref()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn root(&self) -> Option<VertexId> {
        self.root
    }

    pub fn with_root(mut self, root: VertexId) -> Self {
        self.root = Some(root);
        self
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v]
    }

    pub fn boundary(&self) -> Vec<VertexId> {
        (0..self.num_vertices).filter(|&v| self.boundary[v]).collect()
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.edges[self.edges[e].inv].src
    }

    pub fn inv(&self, e: EdgeId) -> EdgeId {
        self.edges[e].inv
    }

    pub fn is_degenerate(&self, e: EdgeId) -> bool {
        self.edges[e].inv == e
    }

    /// Outgoing edges of `v`.
    pub fn star(&self, v: VertexId) -> &[EdgeId] {
        &self.stars[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.stars[v].len()
    }

    /// `Some(d)` if every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.stars.first().map_or(0, Vec::len);
        self.stars.iter().all(|s| s.len() == d).then_some(d)
    }

    /// Unoriented edges, one representative per `{e, inv(e)}` (the lower id).
    pub fn unoriented_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| e <= self.edges[e].inv)
    }

    pub fn check_wellformed(&self) -> WellFormedReport {
        let mut violations = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            let inv = &self.edges[e.inv];
            if inv.inv != id {
                violations.push(Violation::InverseNotInvolutive { edge: id });
                continue;
            }
            if e.inv == id {
                // a self-inverse edge is a loop by construction of the target
                if self.target(id) != e.src {
                    violations.push(Violation::DegenerateNotLoop { edge: id });
                }
            }
            match (&self.alphabet, e.label) {
                (None, Some(_)) => violations.push(Violation::LabelWithoutAlphabet { edge: id }),
                (Some(_), None) => violations.push(Violation::MissingLabel { edge: id }),
                (Some(a), Some(l)) => {
                    if a.check_letter(l).is_err() {
                        violations.push(Violation::InvalidLabel { edge: id });
                        continue;
                    }
                    if e.inv == id && a.order(l.symbol) != OrderClass::Order2 {
                        violations.push(Violation::DegenerateInfiniteLabel { edge: id });
                    }
                    if inv.label != Some(a.inverse(l)) {
                        violations.push(Violation::LabelNotInverse { edge: id });
                    }
                }
                (None, None) => {}
            }
        }
        if self.root.is_some_and(|r| r >= self.num_vertices) {
            violations.push(Violation::RootOutOfRange);
        }
        WellFormedReport { violations }
    }

    /// At most one outgoing edge per letter at every vertex.
    pub fn is_deterministic(&self) -> Result<bool, GraphError> {
        if self.alphabet.is_none() {
            return Err(GraphError::Unlabeled);
        }
        Ok(self.delta.is_some())
    }

    /// Exactly one outgoing edge per letter at every vertex.
    pub fn is_complete(&self) -> Result<bool, GraphError> {
        self.complete_where(|_| true)
    }

    /// Exactly one outgoing edge per letter at every non-boundary vertex.
    pub fn is_complete_interior(&self) -> Result<bool, GraphError> {
        self.complete_where(|v| !self.boundary[v])
    }

    fn complete_where(&self, check: impl Fn(VertexId) -> bool) -> Result<bool, GraphError> {
        let a = self.alphabet.as_ref().ok_or(GraphError::Unlabeled)?;
        let d = a.degree();
        let Some(delta) = &self.delta else { return Ok(false) };
        Ok((0..self.num_vertices).all(|v| !check(v) || (0..d).all(|li| delta[v * d + li].is_some())))
    }

    /// Out-edge of `v` labeled `l`, for deterministic labeled graphs.
    pub fn out_edge(&self, v: VertexId, l: Letter) -> Option<EdgeId> {
        let a = self.alphabet.as_ref()?;
        let delta = self.delta.as_ref()?;
        delta[v * a.degree() + a.letter_index(l)]
    }

    /// Out-edge by dense letter index.
    pub fn out_edge_idx(&self, v: VertexId, li: usize) -> Option<EdgeId> {
        let a = self.alphabet.as_ref()?;
        self.delta.as_ref()?[v * a.degree() + li]
    }

    pub fn step(&self, v: VertexId, l: Letter) -> Option<VertexId> {
        self.out_edge(v, l).map(|e| self.target(e))
    }

    fn require_deterministic(&self) -> Result<(), GraphError> {
        if self.alphabet.is_none() {
            return Err(GraphError::Unlabeled);
        }
        if self.delta.is_none() {
            return Err(GraphError::Nondeterministic);
        }
        Ok(())
    }

    /// Walks `w` from `v`. `Ok(None)` when some letter has no edge.
    pub fn follow(&self, v: VertexId, w: &Word) -> Result<Option<VertexId>, GraphError> {
        self.require_deterministic()?;
        if v >= self.num_vertices {
            return Err(GraphError::VertexOutOfRange(v));
        }
        let mut cur = v;
        for &l in w.letters() {
            self.alphabet.as_ref().unwrap().check_letter(l)?;
            match self.step(cur, l) {
                Some(t) => cur = t,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    /// The edge path traced by `w` from `v`.
    pub fn walk_edges(&self, v: VertexId, w: &Word) -> Result<Option<Vec<EdgeId>>, GraphError> {
        self.require_deterministic()?;
        let mut cur = v;
        let mut path = Vec::with_capacity(w.len());
        for &l in w.letters() {
            match self.out_edge(cur, l) {
                Some(e) => {
                    path.push(e);
                    cur = self.target(e);
                }
                None => return Ok(None),
            }
        }
        Ok(Some(path))
    }

    /// Label sequence of an edge path.
    pub fn path_label(&self, path: &[EdgeId]) -> Option<Word> {
        path.iter().map(|&e| self.edges[e].label).collect::<Option<Vec<_>>>().map(Word)
    }

    /// Breadth-first distances from `v` (`usize::MAX` when unreachable).
    pub fn distances_from(&self, v: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices];
        let mut q = VecDeque::new();
        dist[v] = 0;
        q.push_back(v);
        while let Some(u) = q.pop_front() {
            for &e in &self.stars[u] {
                let t = self.target(e);
                if dist[t] == usize::MAX {
                    dist[t] = dist[u] + 1;
                    q.push_back(t);
                }
            }
        }
        dist
    }

    /// Distance from `v` to the nearest boundary vertex, `None` if there is none
    /// reachable.
    pub fn boundary_distance(&self, v: VertexId) -> Option<usize> {
        let dist = self.distances_from(v);
        (0..self.num_vertices)
            .filter(|&u| self.boundary[u] && dist[u] != usize::MAX)
            .map(|u| dist[u])
            .min()
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices == 0 || self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Connected component ids and component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut comp = vec![usize::MAX; self.num_vertices];
        let mut c = 0;
        for s in 0..self.num_vertices {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = c;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &e in &self.stars[u] {
                    let t = self.target(e);
                    if comp[t] == usize::MAX {
                        comp[t] = c;
                        stack.push(t);
                    }
                }
            }
            c += 1;
        }
        (comp, c)
    }

    /// Drops the labeling, keeping the unoriented multigraph. Degenerate loops
    /// have no plain counterpart and are reported as an error.
    pub fn strip_labels(&self) -> Result<PlainGraph, Vec<EdgeId>> {
        let degenerate: Vec<_> = (0..self.edges.len()).filter(|&e| self.is_degenerate(e)).collect();
        if !degenerate.is_empty() {
            return Err(degenerate);
        }
        let edges = self.unoriented_edges().map(|e| (self.edges[e].src, self.target(e))).collect();
        Ok(PlainGraph { vertices: self.num_vertices, edges })
    }

    /// Same graph without labels (degenerate loops kept).
    pub fn unlabeled(&self) -> LabeledGraph {
        let edges = self.edges.iter().map(|e| Edge { label: None, ..*e }).collect();
        LabeledGraph::from_parts(None, self.num_vertices, edges, self.root, self.boundary())
            .expect("same shape")
    }

    /// Breadth-first renumbering from `root` in letter order, as a transition
    /// table over letter indices. Two rooted deterministic graphs are
    /// X-isomorphic exactly when these tables coincide.
    pub fn canonical_table(&self, root: VertexId) -> Result<Vec<Vec<Option<usize>>>, GraphError> {
        self.require_deterministic()?;
        let d = self.alphabet.as_ref().unwrap().degree();
        let mut order = vec![usize::MAX; self.num_vertices];
        let mut seq = vec![root];
        order[root] = 0;
        let mut i = 0;
        while i < seq.len() {
            let v = seq[i];
            for li in 0..d {
                if let Some(e) = self.out_edge_idx(v, li) {
                    let t = self.target(e);
                    if order[t] == usize::MAX {
                        order[t] = seq.len();
                        seq.push(t);
                    }
                }
            }
            i += 1;
        }
        Ok(seq
            .iter()
            .map(|&v| {
                (0..d)
                    .map(|li| self.out_edge_idx(v, li).map(|e| order[self.target(e)]))
                    .collect()
            })
            .collect())
    }

    /// Graphviz rendering: order-two labels as undirected curves, infinite
    /// labels as arrows along the positive letter.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for v in 0..self.num_vertices {
            let mut attrs = vec![format!("label=\"{v}\"")];
            if self.root == Some(v) {
                attrs.push("style=filled".into());
                attrs.push("fillcolor=black".into());
                attrs.push("fontcolor=white".into());
            }
            if self.boundary[v] {
                attrs.push("shape=box".into());
            }
            let _ = writeln!(s, "  {v} [{}];", attrs.join(","));
        }
        for e in self.unoriented_edges() {
            let edge = &self.edges[e];
            let (u, t) = (edge.src, self.target(e));
            match (self.alphabet.as_ref(), edge.label) {
                (Some(a), Some(l)) => match a.order(l.symbol) {
                    OrderClass::Order2 => {
                        let _ = writeln!(s, "  {u} -> {t} [dir=none,label=\"{}\"];", a.symbols()[l.symbol].name);
                    }
                    OrderClass::Infinite => {
                        let (from, to) = if l.sign == Sign::Pos { (u, t) } else { (t, u) };
                        let _ = writeln!(s, "  {from} -> {to} [label=\"{}\"];", a.symbols()[l.symbol].name);
                    }
                },
                _ => {
                    let _ = writeln!(s, "  {u} -> {t} [dir=none];");
                }
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            alphabet: self.alphabet.clone(),
            vertices: self.num_vertices,
            root: self.root,
            boundary: self.boundary(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeJson {
                    id,
                    src: e.src,
                    label: e.label.map(|l| self.alphabet.as_ref().map(|a| a.letter_name(l)).unwrap_or_default()),
                    inv: e.inv,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(j.edges.len());
        for (pos, e) in j.edges.iter().enumerate() {
            if e.id != pos {
                return Err(GraphError::EdgeIdMismatch(e.id));
            }
            let label = match (&e.label, &j.alphabet) {
                (None, _) => None,
                (Some(s), Some(a)) => Some(a.parse_letter(s)?),
                (Some(s), None) => return Err(GraphError::Word(WordError::UnknownName(s.clone()))),
            };
            edges.push(Edge { src: e.src, label, inv: e.inv });
        }
        Self::from_parts(j.alphabet.clone(), j.vertices, edges, j.root, j.boundary.iter().copied())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let j: GraphJson = serde_json::from_str(s).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::from_json(&j)
    }

    /// Induced subgraph on the given vertices (kept in the given order).
    /// Vertices that lose an edge become boundary. Returns the graph and the
    /// old-to-new vertex map.
    pub fn induced(&self, keep: &[VertexId], root: Option<VertexId>) -> (LabeledGraph, Vec<Option<VertexId>>) {
        let mut new_id = vec![None; self.num_vertices];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = Some(i);
        }
        let mut edge_id = vec![None; self.edges.len()];
        let mut count = 0;
        for (id, e) in self.edges.iter().enumerate() {
            if new_id[e.src].is_some() && new_id[self.target(id)].is_some() {
                edge_id[id] = Some(count);
                count += 1;
            }
        }
        let mut boundary: BTreeSet<VertexId> =
            keep.iter().filter(|&&v| self.boundary[v]).map(|&v| new_id[v].unwrap()).collect();
        let mut edges = Vec::with_capacity(count);
        for (id, e) in self.edges.iter().enumerate() {
            match edge_id[id] {
                Some(_) => edges.push(Edge {
                    src: new_id[e.src].unwrap(),
                    label: e.label,
                    inv: edge_id[e.inv].unwrap(),
                }),
                None => {
                    if let Some(s) = new_id[e.src] {
                        boundary.insert(s);
                    }
                }
            }
        }
        let g = LabeledGraph::from_parts(
            self.alphabet.clone(),
            keep.len(),
            edges,
            root.and_then(|r| new_id[r]),
            boundary,
        )
        .expect("induced subgraph is well-indexed");
        (g, new_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: EdgeId,
    pub src: VertexId,
    pub label: Option<String>,
    pub inv: EdgeId,
}

/// Wire format of a labeled graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub alphabet: Option<Alphabet>,
    pub vertices: usize,
    pub root: Option<VertexId>,
    #[serde(default)]
    pub boundary: Vec<VertexId>,
    pub edges: Vec<EdgeJson>,
}

/// An unlabeled multigraph given by unoriented edges `[u, v]`; `[v, v]` is a
/// non-degenerate loop contributing two to the degree of `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlainGraph {
    pub vertices: usize,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl PlainGraph {
    pub fn new(vertices: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self, GraphError> {
        for &(u, v) in &edges {
            if u >= vertices {
                return Err(GraphError::VertexOutOfRange(u));
            }
            if v >= vertices {
                return Err(GraphError::VertexOutOfRange(v));
            }
        }
        Ok(PlainGraph { vertices, edges })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degrees();
        let first = d.first().copied().unwrap_or(0);
        d.iter().all(|&x| x == first).then_some(first)
    }

    /// Sorted multiset of unordered endpoint pairs.
    pub fn edge_multiset(&self) -> Vec<(VertexId, VertexId)> {
        let mut v: Vec<_> = self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        v.sort_unstable();
        v
    }

    pub fn to_graph(&self) -> LabeledGraph {
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for &(u, v) in &self.edges {
            let id = edges.len();
            edges.push(Edge { src: u, label: None, inv: id + 1 });
            edges.push(Edge { src: v, label: None, inv: id });
        }
        LabeledGraph::from_parts(None, self.vertices, edges, None, std::iter::empty())
            .expect("validated plain graph")
    }

    pub fn adjacency(&self) -> Vec<Vec<(VertexId, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, i));
            if u != v {
                adj[v].push((u, i));
            }
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        self.to_graph().is_connected()
    }
}

/// Incremental construction of labeled graphs.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    alphabet: Option<Alphabet>,
    num_vertices: usize,
    edges: Vec<Edge>,
    root: Option<VertexId>,
    boundary: BTreeSet<VertexId>,
}

impl GraphBuilder {
    pub fn new(alphabet: Option<Alphabet>) -> Self {
        GraphBuilder { alphabet, num_vertices: 0, edges: Vec::new(), root: None, boundary: BTreeSet::new() }
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.num_vertices += 1;
        self.num_vertices - 1
    }

    pub fn add_vertices(&mut self, k: usize) -> std::ops::Range<VertexId> {
        let s = self.num_vertices;
        self.num_vertices += k;
        s..self.num_vertices
    }

    /// Adds `e: u → v` with label `l` and its inverse `v → u` labeled `l⁻¹`.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, l: Option<Letter>) -> EdgeId {
        let inv_label = match (&self.alphabet, l) {
            (Some(a), Some(l)) => Some(a.inverse(l)),
            _ => l,
        };
        let id = self.edges.len();
        self.edges.push(Edge { src: u, label: l, inv: id + 1 });
        self.edges.push(Edge { src: v, label: inv_label, inv: id });
        id
    }

    /// Adds a self-inverse loop at `v`.
    pub fn add_degenerate_loop(&mut self, v: VertexId, l: Option<Letter>) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(Edge { src: v, label: l, inv: id });
        id
    }

    /// Pushes a raw edge record, for deliberately malformed inputs.
    pub fn push_raw(&mut self, e: Edge) -> EdgeId {
        self.edges.push(e);
        self.edges.len() - 1
    }

    pub fn set_root(&mut self, v: VertexId) {
        self.root = Some(v);
    }

    pub fn mark_boundary(&mut self, v: VertexId) {
        self.boundary.insert(v);
    }

    pub fn build(self) -> Result<LabeledGraph, GraphError> {
        LabeledGraph::from_parts(self.alphabet, self.num_vertices, self.edges, self.root, self.boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xa() -> Alphabet {
        Alphabet::parse_spec("x:inf,a:2").unwrap()
    }

    #[test]
    fn degenerate_loop_has_degree_one() {
        let mut b = GraphBuilder::new(Some(xa()));
        let v = b.add_vertex();
        b.add_degenerate_loop(v, Some(Letter::pos(1)));
        let g = b.build().unwrap();
        assert!(g.check_wellformed().is_ok());
        assert_eq!(g.degree(v), 1);
    }

    #[test]
    fn nondegenerate_loop_has_degree_two() {
        let mut b = GraphBuilder::new(Some(xa()));
        let v = b.add_vertex();
        b.add_edge(v, v, Some(Letter::pos(0)));
        let g = b.build().unwrap();
        assert!(g.check_wellformed().is_ok());
        assert_eq!(g.degree(v), 2);
    }

    #[test]
    fn label_mismatch_is_reported() {
        let mut b = GraphBuilder::new(Some(xa()));
        let (u, v) = (b.add_vertex(), b.add_vertex());
        b.push_raw(Edge { src: u, label: Some(Letter::pos(0)), inv: 1 });
        b.push_raw(Edge { src: v, label: Some(Letter::pos(0)), inv: 0 });
        let g = b.build().unwrap();
        let r = g.check_wellformed();
        assert!(r.violations.contains(&Violation::LabelNotInverse { edge: 0 }));
    }

    #[test]
    fn degenerate_edge_with_infinite_label_is_reported() {
        let mut b = GraphBuilder::new(Some(xa()));
        let v = b.add_vertex();
        b.add_degenerate_loop(v, Some(Letter::pos(0)));
        let r = b.build().unwrap().check_wellformed();
        assert!(r.violations.contains(&Violation::DegenerateInfiniteLabel { edge: 0 }));
    }

    #[test]
    fn broken_involution_is_reported() {
        let mut b = GraphBuilder::new(None);
        let (u, v) = (b.add_vertex(), b.add_vertex());
        b.push_raw(Edge { src: u, label: None, inv: 1 });
        b.push_raw(Edge { src: v, label: None, inv: 1 });
        let r = b.build().unwrap().check_wellformed();
        assert!(r.violations.contains(&Violation::InverseNotInvolutive { edge: 0 }));
    }

    #[test]
    fn determinism_and_completeness() {
        let a = xa();
        let mut b = GraphBuilder::new(Some(a.clone()));
        let v = b.add_vertex();
        let w = b.add_vertex();
        b.add_edge(v, w, Some(Letter::pos(0)));
        b.add_edge(v, w, Some(Letter::pos(0)));
        let g = b.build().unwrap();
        assert!(!g.is_deterministic().unwrap());
        assert!(matches!(g.follow(v, &Word::empty()), Err(GraphError::Nondeterministic)));
        assert!(g.unlabeled().is_deterministic().is_err());

        let g = LabeledGraph::from_transitions(a, &[vec![Some(0), Some(0)]], Some(0), []).unwrap();
        assert!(g.is_deterministic().unwrap());
        assert!(g.is_complete().unwrap());
        assert_eq!(g.follow(0, &Word::empty()).unwrap(), Some(0));
    }

    #[test]
    fn degree_sum_counts_oriented_edges() {
        let a = xa();
        let g = LabeledGraph::from_transitions(
            a,
            &[vec![Some(1), Some(0)], vec![Some(0), Some(2)], vec![Some(2), Some(1)]],
            Some(0),
            [],
        )
        .unwrap();
        let total: usize = (0..g.num_vertices()).map(|v| g.degree(v)).sum();
        assert_eq!(total, g.num_edges());
        assert!(g.check_wellformed().is_ok());
    }

    #[test]
    fn json_round_trip_and_dot() {
        let a = xa();
        let g = LabeledGraph::from_transitions(a, &[vec![Some(1), Some(1)], vec![Some(0), Some(0)]], Some(0), [1])
            .unwrap();
        let s = g.to_json_string();
        let h = LabeledGraph::from_json_str(&s).unwrap();
        assert_eq!(g, h);
        let dot = g.to_dot();
        assert!(dot.contains("dir=none,label=\"a\""));
        assert!(dot.contains("[label=\"x\"]"));
    }

    #[test]
    fn induced_marks_lost_edges() {
        // path 0 - 1 - 2 under x
        let a = Alphabet::free(&["x"]);
        let g = LabeledGraph::from_transitions(a, &[vec![Some(1)], vec![Some(2)], vec![None]], Some(0), [])
            .unwrap();
        let (h, map) = g.induced(&[0, 1], Some(0));
        assert_eq!(h.num_vertices(), 2);
        assert_eq!(h.boundary(), vec![1]);
        assert_eq!(map[2], None);
        assert!(h.check_wellformed().is_ok());
    }
}
