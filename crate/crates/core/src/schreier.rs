//! Schreier graphs from permutation actions, from subgroup generators, and by
//! truncation to balls.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lgraph::{GraphError, LabeledGraph, VertexId};
use crate::perms::{FiniteGroup, PermAction, PermError};
use crate::words::{Alphabet, Word, WordError};

pub const DEFAULT_MAX_VERTICES: usize = 100_000;

#[derive(Debug, Error)]
pub enum SchreierError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("basepoint {0} outside the {1} points of the action")]
    Basepoint(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("json: {0}")]
    Json(String),
}

/// Generators of a subgroup `H`, optionally conjugated to `g⁻¹Hg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupPresentation {
    pub alphabet: Alphabet,
    pub generators: Vec<Word>,
    pub conjugator: Option<Word>,
}

impl SubgroupPresentation {
    pub fn new(alphabet: Alphabet, generators: Vec<Word>) -> Self {
        SubgroupPresentation { alphabet, generators, conjugator: None }
    }

    pub fn parse(alphabet: Alphabet, gens: &[&str]) -> Result<Self, WordError> {
        let generators = gens.iter().map(|s| alphabet.parse_word(s)).collect::<Result<_, _>>()?;
        Ok(Self::new(alphabet, generators))
    }

    pub fn conjugated_by(mut self, g: Word) -> Self {
        self.conjugator = Some(g);
        self
    }

    /// Reduced generator words, conjugated if requested. Trivial words dropped.
    pub fn effective_generators(&self) -> Result<Vec<Word>, WordError> {
        let mut out = Vec::with_capacity(self.generators.len());
        for h in &self.generators {
            let w = match &self.conjugator {
                Some(g) => {
                    let gi = self.alphabet.invert(g);
                    self.alphabet.multiply(&self.alphabet.multiply(&gi, h)?, g)?
                }
                None => self.alphabet.normalize(h)?,
            };
            if !w.is_empty() {
                out.push(w);
            }
        }
        Ok(out)
    }
}

/// Schreier graph of a permutation action. `basepoint` is 0-based.
pub fn from_action(act: &PermAction, basepoint: usize) -> Result<LabeledGraph, SchreierError> {
    if basepoint >= act.points.max(1) || act.points == 0 {
        return Err(SchreierError::Basepoint(basepoint, act.points));
    }
    let next: Vec<Vec<Option<VertexId>>> =
        (0..act.points).map(|v| act.perms.iter().map(|p| Some(p.apply(v))).collect()).collect();
    Ok(LabeledGraph::from_transitions(act.alphabet.clone(), &next, Some(basepoint), [])?)
}

/// Schreier graph of the right cosets of `h` in a finite group under the
/// generators `gens`, rooted at the coset `H`.
pub fn from_cosets(group: &FiniteGroup, h: &[usize], gens: &[usize]) -> Result<LabeledGraph, SchreierError> {
    let names: Vec<String> = (0..gens.len()).map(|i| format!("g{i}")).collect();
    let act = group.coset_action(h, gens, &names)?;
    from_action(&act, 0)
}

/// Union-find backed partial transition table used while folding.
struct Folder {
    alphabet: Alphabet,
    table: Vec<Vec<Option<usize>>>,
    parent: Vec<usize>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new(alphabet: Alphabet) -> Self {
        let d = alphabet.degree();
        Folder { alphabet, table: vec![vec![None; d]], parent: vec![0], pending: Vec::new() }
    }

    fn add_vertex(&mut self) -> usize {
        self.table.push(vec![None; self.alphabet.degree()]);
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn set_half(&mut self, u: usize, li: usize, v: usize) {
        match self.table[u][li] {
            Some(w) => {
                let w = self.find(w);
                if w != v {
                    self.pending.push((w, v));
                }
            }
            None => self.table[u][li] = Some(v),
        }
    }

    fn add_edge(&mut self, u: usize, li: usize, v: usize) {
        let (u, v) = (self.find(u), self.find(v));
        self.set_half(u, li, v);
        let inv = self.alphabet.inverse_index(li);
        self.set_half(v, inv, u);
        self.drain();
    }

    fn drain(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (keep, gone) = (a.min(b), a.max(b));
            self.parent[gone] = keep;
            let row = std::mem::take(&mut self.table[gone]);
            for (li, t) in row.into_iter().enumerate() {
                if let Some(t) = t {
                    let t = self.find(t);
                    self.set_half(keep, li, t);
                    let inv = self.alphabet.inverse_index(li);
                    // the reverse half now resolves to `keep` through find
                    if let Some(back) = self.table[t][inv] {
                        let back = self.find(back);
                        if back != keep {
                            self.pending.push((back, keep));
                        }
                    } else {
                        self.table[t][inv] = Some(keep);
                    }
                }
            }
            self.table[gone] = vec![None; self.alphabet.degree()];
        }
    }

    fn add_petal(&mut self, w: &Word) {
        let mut cur = 0;
        for (i, &l) in w.letters().iter().enumerate() {
            let li = self.alphabet.letter_index(l);
            let cur_r = self.find(cur);
            let next = if i + 1 == w.len() {
                0
            } else {
                match self.table[cur_r][li] {
                    Some(t) => self.find(t),
                    None => self.add_vertex(),
                }
            };
            self.add_edge(cur_r, li, next);
            cur = next;
        }
    }

    /// Live vertices in breadth-first order from the root, with resolved rows.
    fn compact(mut self) -> (Alphabet, Vec<Vec<Option<usize>>>) {
        let d = self.alphabet.degree();
        let n = self.parent.len();
        let mut order = vec![usize::MAX; n];
        let root = self.find(0);
        let mut seq = vec![root];
        order[root] = 0;
        let mut i = 0;
        while i < seq.len() {
            let v = seq[i];
            for li in 0..d {
                if let Some(t) = self.table[v][li] {
                    let t = self.find(t);
                    if order[t] == usize::MAX {
                        order[t] = seq.len();
                        seq.push(t);
                    }
                }
            }
            i += 1;
        }
        let mut table = Vec::with_capacity(seq.len());
        for &v in &seq {
            let row: Vec<Option<usize>> = (0..d)
                .map(|li| self.table[v][li].map(|t| {
                    let t = self.find(t);
                    order[t]
                }))
                .collect();
            table.push(row);
        }
        (self.alphabet, table)
    }
}

/// The folded subgroup graph: the union of reduced closed paths at the root of
/// the Schreier graph. A reduced word lies in the subgroup exactly when it
/// traces a closed path at vertex 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedCore {
    pub alphabet: Alphabet,
    /// `table[v][letter index]`
    pub table: Vec<Vec<Option<usize>>>,
}

impl FoldedCore {
    pub fn build(h: &SubgroupPresentation) -> Result<Self, WordError> {
        let mut f = Folder::new(h.alphabet.clone());
        for w in h.effective_generators()? {
            f.add_petal(&w);
        }
        let (alphabet, table) = f.compact();
        Ok(FoldedCore { alphabet, table })
    }

    pub fn num_vertices(&self) -> usize {
        self.table.len()
    }

    /// Vertex reached from the root by the reduced form of `w`.
    pub fn trace(&self, w: &Word) -> Result<Option<usize>, WordError> {
        let w = self.alphabet.normalize(w)?;
        let mut cur = 0;
        for &l in w.letters() {
            match self.table[cur][self.alphabet.letter_index(l)] {
                Some(t) => cur = t,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    pub fn contains(&self, w: &Word) -> Result<bool, WordError> {
        Ok(self.trace(w)? == Some(0))
    }

    pub fn is_complete(&self) -> bool {
        self.table.iter().all(|r| r.iter().all(Option::is_some))
    }
}

/// A coset table, complete or truncated at the vertex budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    pub alphabet: Alphabet,
    /// `table[v][letter index]`, vertex 0 is the coset `H`.
    pub table: Vec<Vec<Option<usize>>>,
    pub complete: bool,
}

#[derive(Serialize, Deserialize)]
struct CosetTableJson {
    alphabet: Alphabet,
    table: Vec<Vec<Option<usize>>>,
    root: usize,
}

impl CosetTable {
    pub fn num_vertices(&self) -> usize {
        self.table.len()
    }

    pub fn to_graph(&self) -> Result<LabeledGraph, SchreierError> {
        let next: Vec<Vec<Option<usize>>> = self
            .table
            .iter()
            .map(|row| {
                (0..self.alphabet.num_symbols())
                    .map(|s| row[self.alphabet.letter_index(crate::words::Letter::pos(s))])
                    .collect()
            })
            .collect();
        let boundary: Vec<usize> =
            (0..self.table.len()).filter(|&v| self.table[v].iter().any(Option::is_none)).collect();
        Ok(LabeledGraph::from_transitions(self.alphabet.clone(), &next, Some(0), boundary)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&CosetTableJson { alphabet: self.alphabet.clone(), table: self.table.clone(), root: 0 })
            .expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self, SchreierError> {
        let j: CosetTableJson = serde_json::from_str(s).map_err(|e| SchreierError::Json(e.to_string()))?;
        let complete = j.table.iter().all(|r| r.iter().all(Option::is_some));
        Ok(CosetTable { alphabet: j.alphabet, table: j.table, complete })
    }

    /// Table of a deterministic labeled graph, renumbered breadth-first from
    /// `root`.
    pub fn from_graph(g: &LabeledGraph, root: VertexId) -> Result<Self, GraphError> {
        let table = g.canonical_table(root)?;
        let alphabet = g.alphabet().ok_or(GraphError::Unlabeled)?.clone();
        let complete = table.iter().all(|r| r.iter().all(Option::is_some));
        Ok(CosetTable { alphabet, table, complete })
    }
}

/// Coset enumeration for a subgroup of a free product of copies of ℤ and ℤ/2ℤ.
///
/// The generator petals are folded into the subgroup core, which is then
/// completed breadth-first with fresh cosets until every vertex is complete or
/// `max_vertices` is reached. Vertices are numbered breadth-first from the
/// root in letter order.
pub fn coset_closure(h: &SubgroupPresentation, max_vertices: usize) -> Result<CosetTable, WordError> {
    let core = FoldedCore::build(h)?;
    let alphabet = core.alphabet.clone();
    let d = alphabet.degree();
    let mut table = core.table;
    let mut complete = true;
    let mut i = 0;
    'outer: while i < table.len() {
        for li in 0..d {
            if table[i][li].is_none() {
                if table.len() >= max_vertices {
                    complete = false;
                    break 'outer;
                }
                let t = table.len();
                table.push(vec![None; d]);
                table[i][li] = Some(t);
                table[t][alphabet.inverse_index(li)] = Some(i);
            }
        }
        i += 1;
    }
    if complete {
        complete = table.iter().all(|r| r.iter().all(Option::is_some));
    }
    let mut ct = CosetTable { alphabet, table, complete };
    if ct.complete {
        let g = ct.to_graph().expect("complete table is a valid graph");
        ct.table = g.canonical_table(0).expect("deterministic");
    }
    Ok(ct)
}

/// The ball of radius `r` around `root`, as an induced subgraph rooted at the
/// image of `root`. Vertices that lose an edge are marked as boundary.
pub fn ball_truncate(g: &LabeledGraph, root: VertexId, r: usize) -> LabeledGraph {
    let dist = g.distances_from(root);
    let mut keep: Vec<VertexId> = (0..g.num_vertices()).filter(|&v| dist[v] <= r).collect();
    keep.sort_by_key(|&v| (dist[v], v));
    g.induced(&keep, Some(root)).0
}

/// Generator words for the subgroup of closed reduced paths at the root: one
/// per edge outside a breadth-first spanning tree.
pub fn reconstruct_subgroup(g: &LabeledGraph) -> Result<Vec<Word>, SchreierError> {
    let alphabet = g.alphabet().ok_or(GraphError::Unlabeled)?;
    if !g.is_deterministic()? {
        return Err(GraphError::Nondeterministic.into());
    }
    let root = g.root().ok_or(GraphError::NoRoot)?;
    let n = g.num_vertices();
    let mut path: Vec<Option<Word>> = vec![None; n];
    let mut tree_edge = vec![false; g.num_edges()];
    path[root] = Some(Word::empty());
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for li in 0..alphabet.degree() {
            let Some(e) = g.out_edge_idx(u, li) else { continue };
            let t = g.target(e);
            if path[t].is_none() {
                path[t] = Some(path[u].as_ref().unwrap().pushed(alphabet.letter_at(li)));
                tree_edge[e] = true;
                tree_edge[g.inv(e)] = true;
                q.push_back(t);
            }
        }
    }
    if path.iter().any(Option::is_none) {
        return Err(SchreierError::Disconnected);
    }
    let mut gens = Vec::new();
    for e in g.unoriented_edges() {
        if tree_edge[e] {
            continue;
        }
        let edge = g.edge(e);
        let l = edge.label.ok_or(GraphError::Unlabeled)?;
        let pu = path[edge.src].as_ref().unwrap();
        let pv = path[g.target(e)].as_ref().unwrap();
        let w = alphabet.multiply(&pu.pushed(l), &alphabet.invert(pv))?;
        gens.push(w);
    }
    Ok(gens)
}
