//! Rooted isomorphisms, orbits and transitivity.
//!
//! Every verdict on a graph with boundary marks is radius-limited: a map found
//! inside a window never yields a positive answer, only
//! [`Verdict::Unknown`] with the radius up to which no difference exists. A
//! difference found inside the window is definite.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::lgraph::{EdgeId, GraphError, LabeledGraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoError {
    #[error("graphs are labeled over different alphabets")]
    AlphabetMismatch,
    #[error("graph is not complete")]
    Incomplete,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Three-valued outcome of a test on possibly truncated graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    True,
    False,
    /// No counterexample within `radius` of the roots; the window ends there.
    Unknown { radius: usize },
}

impl Verdict {
    pub fn is_true(self) -> bool {
        self == Verdict::True
    }

    pub fn is_false(self) -> bool {
        self == Verdict::False
    }

    /// Conjunction: false dominates, then unknown (smallest radius), then true.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::Unknown { radius: a }, Verdict::Unknown { radius: b }) => Verdict::Unknown { radius: a.min(b) },
            (u @ Verdict::Unknown { .. }, _) | (_, u @ Verdict::Unknown { .. }) => u,
            _ => Verdict::True,
        }
    }

    pub fn as_json(self) -> serde_json::Value {
        match self {
            Verdict::True => serde_json::Value::Bool(true),
            Verdict::False => serde_json::Value::Bool(false),
            Verdict::Unknown { radius } => serde_json::json!({ "unknown_at_radius": radius }),
        }
    }
}

/// A vertex and edge bijection between the root components of two graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    pub vertex_map: Vec<Option<VertexId>>,
    pub edge_map: Vec<Option<EdgeId>>,
}

impl Isomorphism {
    pub fn identity(g: &LabeledGraph) -> Self {
        Isomorphism {
            vertex_map: (0..g.num_vertices()).map(Some).collect(),
            edge_map: (0..g.num_edges()).map(Some).collect(),
        }
    }

    /// Extends a vertex bijection to edges. Parallel edges between a pair of
    /// vertices are matched in id order, degenerate loops likewise, and
    /// non-degenerate loop pairs by their lower id. Returns `None` when edge
    /// counts disagree somewhere.
    pub fn from_vertex_map(g1: &LabeledGraph, g2: &LabeledGraph, vertex_map: Vec<Option<VertexId>>) -> Option<Self> {
        let mut edge_map = vec![None; g1.num_edges()];
        for u in 0..g1.num_vertices() {
            let Some(fu) = vertex_map[u] else { continue };
            // group out-edges of u by target, in id order
            let mut by_target: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
            let mut degenerate = Vec::new();
            let mut loop_reps = Vec::new();
            for &e in g1.star(u) {
                let t = g1.target(e);
                if g1.is_degenerate(e) {
                    degenerate.push(e);
                } else if t == u {
                    if e < g1.inv(e) {
                        loop_reps.push(e);
                    }
                } else if u < t {
                    by_target.entry(t).or_default().push(e);
                }
            }
            let mut by_target2: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
            let mut degenerate2 = Vec::new();
            let mut loop_reps2 = Vec::new();
            for &f in g2.star(fu) {
                let t = g2.target(f);
                if g2.is_degenerate(f) {
                    degenerate2.push(f);
                } else if t == fu {
                    if f < g2.inv(f) {
                        loop_reps2.push(f);
                    }
                } else {
                    by_target2.entry(t).or_default().push(f);
                }
            }
            if degenerate.len() != degenerate2.len() || loop_reps.len() != loop_reps2.len() {
                return None;
            }
            for (e, f) in degenerate.into_iter().zip(degenerate2) {
                edge_map[e] = Some(f);
            }
            for (e, f) in loop_reps.into_iter().zip(loop_reps2) {
                edge_map[e] = Some(f);
                edge_map[g1.inv(e)] = Some(g2.inv(f));
            }
            for (t, es) in by_target {
                let ft = vertex_map[t]?;
                let fs = by_target2.get(&ft)?;
                if fs.len() != es.len() {
                    return None;
                }
                for (&e, &f) in es.iter().zip(fs) {
                    edge_map[e] = Some(f);
                    edge_map[g1.inv(e)] = Some(g2.inv(f));
                }
            }
        }
        let iso = Isomorphism { vertex_map, edge_map };
        iso.verify(g1, g2).ok()?;
        Some(iso)
    }

    /// Checks the morphism identities, injectivity, and that every star of a
    /// mapped vertex is carried bijectively onto the star of its image.
    pub fn verify(&self, g1: &LabeledGraph, g2: &LabeledGraph) -> Result<(), String> {
        let mut vused = vec![false; g2.num_vertices()];
        for (v, m) in self.vertex_map.iter().enumerate() {
            let Some(w) = *m else { continue };
            if w >= g2.num_vertices() || vused[w] {
                return Err(format!("vertex map not injective at {v}"));
            }
            vused[w] = true;
            if g1.degree(v) != g2.degree(w) {
                return Err(format!("degree differs at {v}"));
            }
        }
        let mut eused = vec![false; g2.num_edges()];
        for v in 0..g1.num_vertices() {
            let Some(w) = self.vertex_map[v] else { continue };
            for &e in g1.star(v) {
                let f = self.edge_map[e].ok_or_else(|| format!("edge {e} unmapped"))?;
                if eused[f] {
                    return Err(format!("edge map not injective at {e}"));
                }
                eused[f] = true;
                if g2.edge(f).src != w {
                    return Err(format!("edge {e} source not preserved"));
                }
                if self.edge_map[g1.inv(e)] != Some(g2.inv(f)) {
                    return Err(format!("edge {e} inverse not preserved"));
                }
                if self.vertex_map[g1.target(e)] != Some(g2.target(f)) {
                    return Err(format!("edge {e} target not preserved"));
                }
            }
        }
        Ok(())
    }

    pub fn preserves_labels(&self, g1: &LabeledGraph, g2: &LabeledGraph) -> bool {
        self.edge_map
            .iter()
            .enumerate()
            .all(|(e, f)| f.is_none_or(|f| g1.edge(e).label == g2.edge(f).label))
    }

    pub fn apply(&self, v: VertexId) -> Option<VertexId> {
        self.vertex_map.get(v).copied().flatten()
    }
}

/// Outcome of an unlabeled rooted isomorphism test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoVerdict {
    Yes(Isomorphism),
    No,
    Unknown { radius: usize },
}

impl IsoVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            IsoVerdict::Yes(_) => Verdict::True,
            IsoVerdict::No => Verdict::False,
            IsoVerdict::Unknown { radius } => Verdict::Unknown { radius: *radius },
        }
    }

    pub fn iso(&self) -> Option<&Isomorphism> {
        match self {
            IsoVerdict::Yes(i) => Some(i),
            _ => None,
        }
    }
}

/// Outcome of a labeled rooted isomorphism test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XIsoVerdict {
    Iso(Vec<Option<VertexId>>),
    NotIso,
    RadiusLimited { radius: usize },
}

impl XIsoVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            XIsoVerdict::Iso(_) => Verdict::True,
            XIsoVerdict::NotIso => Verdict::False,
            XIsoVerdict::RadiusLimited { radius } => Verdict::Unknown { radius: *radius },
        }
    }
}

fn boundary_radius(g: &LabeledGraph, dist: &[usize]) -> Option<usize> {
    (0..g.num_vertices()).filter(|&v| g.is_boundary(v) && dist[v] != usize::MAX).map(|v| dist[v]).min()
}

/// Rooted X-isomorphism by simultaneous breadth-first pairing.
pub fn rooted_x_iso(g1: &LabeledGraph, r1: VertexId, g2: &LabeledGraph, r2: VertexId) -> Result<XIsoVerdict, IsoError> {
    let a = g1.alphabet().ok_or(GraphError::Unlabeled)?;
    if g2.alphabet() != Some(a) {
        return Err(IsoError::AlphabetMismatch);
    }
    if !g1.is_deterministic()? || !g2.is_deterministic()? {
        return Err(GraphError::Nondeterministic.into());
    }
    let d = a.degree();
    let mut fwd = vec![None; g1.num_vertices()];
    let mut back = vec![None; g2.num_vertices()];
    fwd[r1] = Some(r2);
    back[r2] = Some(r1);
    let mut q = VecDeque::from([(r1, r2)]);
    let mut limited = false;
    while let Some((v, w)) = q.pop_front() {
        for li in 0..d {
            match (g1.out_edge_idx(v, li), g2.out_edge_idx(w, li)) {
                (Some(e), Some(f)) => {
                    let (t, s) = (g1.target(e), g2.target(f));
                    match (fwd[t], back[s]) {
                        (None, None) => {
                            fwd[t] = Some(s);
                            back[s] = Some(t);
                            q.push_back((t, s));
                        }
                        (Some(s2), Some(t2)) if s2 == s && t2 == t => {}
                        _ => return Ok(XIsoVerdict::NotIso),
                    }
                }
                (None, None) => {
                    if g1.is_boundary(v) || g2.is_boundary(w) {
                        limited = true;
                    }
                }
                (None, Some(_)) if g1.is_boundary(v) => limited = true,
                (Some(_), None) if g2.is_boundary(w) => limited = true,
                _ => return Ok(XIsoVerdict::NotIso),
            }
        }
    }
    if limited {
        let rho1 = boundary_radius(g1, &g1.distances_from(r1));
        let rho2 = boundary_radius(g2, &g2.distances_from(r2));
        let radius = rho1.into_iter().chain(rho2).min().unwrap_or(0);
        return Ok(XIsoVerdict::RadiusLimited { radius });
    }
    Ok(XIsoVerdict::Iso(fwd))
}

/// Classes of vertices related by a root-moving X-automorphism.
///
/// Vertices are refined by loop signature and successor classes, then each
/// block is split by the breadth-first renumbered transition table seen from
/// each vertex; two vertices are X-equivalent exactly when those tables agree.
pub fn x_orbits(g: &LabeledGraph) -> Result<Vec<Vec<VertexId>>, IsoError> {
    let a = g.alphabet().ok_or(GraphError::Unlabeled)?;
    if !g.is_deterministic()? {
        return Err(GraphError::Nondeterministic.into());
    }
    if !g.is_complete()? {
        return Err(IsoError::Incomplete);
    }
    let d = a.degree();
    let n = g.num_vertices();
    let succ: Vec<Vec<VertexId>> =
        (0..n).map(|v| (0..d).map(|li| g.target(g.out_edge_idx(v, li).unwrap())).collect()).collect();
    let mut class: Vec<usize> = {
        let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
        (0..n)
            .map(|v| {
                let sig: Vec<bool> = succ[v].iter().map(|&t| t == v).collect();
                let k = ids.len();
                *ids.entry(sig).or_insert(k)
            })
            .collect()
    };
    let mut count = class.iter().max().map_or(0, |m| m + 1);
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|v| {
                let key = (class[v], succ[v].iter().map(|&t| class[t]).collect());
                let k = ids.len();
                *ids.entry(key).or_insert(k)
            })
            .collect();
        let new_count = ids.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut blocks: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for v in 0..n {
        blocks.entry(class[v]).or_default().push(v);
    }
    let mut out = Vec::new();
    for (_, block) in blocks {
        let mut by_table: Vec<(Vec<Vec<Option<usize>>>, Vec<VertexId>)> = Vec::new();
        for v in block {
            let t = g.canonical_table(v)?;
            match by_table.iter_mut().find(|(u, _)| *u == t) {
                Some((_, vs)) => vs.push(v),
                None => by_table.push((t, vec![v])),
            }
        }
        out.extend(by_table.into_iter().map(|(_, vs)| vs));
    }
    out.sort_by_key(|b| b[0]);
    Ok(out)
}

/// Local view used by the unlabeled search: kept vertices with multiplicities.
struct Local {
    verts: Vec<VertexId>,
    dist: Vec<usize>,
    adj: Vec<BTreeMap<usize, usize>>,
    degenerate: Vec<usize>,
    loops: Vec<usize>,
    degree: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl Local {
    fn new(g: &LabeledGraph, root: VertexId, dist_all: &[usize], rho: Option<usize>) -> Self {
        let keep_v = |v: VertexId| dist_all[v] != usize::MAX && rho.is_none_or(|r| dist_all[v] <= r);
        // breadth-first order of kept vertices
        let mut verts = vec![root];
        let mut pos = HashMap::from([(root, 0)]);
        let mut parent = vec![None];
        let mut i = 0;
        while i < verts.len() {
            let v = verts[i];
            for &e in g.star(v) {
                let t = g.target(e);
                if keep_v(t) && !pos.contains_key(&t) && Self::keep_e(dist_all, v, t, rho) {
                    pos.insert(t, verts.len());
                    verts.push(t);
                    parent.push(Some(i));
                }
            }
            i += 1;
        }
        let k = verts.len();
        let mut adj = vec![BTreeMap::new(); k];
        let mut degenerate = vec![0; k];
        let mut loops = vec![0; k];
        let mut degree = vec![0; k];
        for (i, &v) in verts.iter().enumerate() {
            for &e in g.star(v) {
                let t = g.target(e);
                if !keep_v(t) || !Self::keep_e(dist_all, v, t, rho) {
                    continue;
                }
                degree[i] += 1;
                if g.is_degenerate(e) {
                    degenerate[i] += 1;
                } else if t == v {
                    loops[i] += 1;
                } else {
                    *adj[i].entry(pos[&t]).or_insert(0) += 1;
                }
            }
        }
        let dist = verts.iter().map(|&v| dist_all[v]).collect();
        Local { verts, dist, adj, degenerate, loops, degree, parent }
    }

    fn keep_e(dist: &[usize], u: VertexId, v: VertexId, rho: Option<usize>) -> bool {
        rho.is_none_or(|r| dist[u].min(dist[v]) < r)
    }
}

/// Joint color refinement of two local views. Returns per-vertex colors.
fn refine(l1: &Local, l2: &Local) -> (Vec<usize>, Vec<usize>) {
    let init = |l: &Local, i: usize| (l.dist[i], l.degree[i], l.degenerate[i], l.loops[i]);
    let mut ids: BTreeMap<(usize, usize, usize, usize), usize> = BTreeMap::new();
    for l in [l1, l2] {
        for i in 0..l.verts.len() {
            let k = ids.len();
            ids.entry(init(l, i)).or_insert(k);
        }
    }
    let mut c1: Vec<usize> = (0..l1.verts.len()).map(|i| ids[&init(l1, i)]).collect();
    let mut c2: Vec<usize> = (0..l2.verts.len()).map(|i| ids[&init(l2, i)]).collect();
    let mut count = ids.len();
    loop {
        let key = |l: &Local, c: &[usize], i: usize| {
            let mut nb: Vec<(usize, usize)> = l.adj[i].iter().map(|(&j, &m)| (c[j], m)).collect();
            nb.sort_unstable();
            (c[i], nb)
        };
        let mut ids: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
        let k1: Vec<_> = (0..l1.verts.len()).map(|i| key(l1, &c1, i)).collect();
        let k2: Vec<_> = (0..l2.verts.len()).map(|i| key(l2, &c2, i)).collect();
        for k in k1.iter().chain(&k2) {
            let n = ids.len();
            ids.entry(k.clone()).or_insert(n);
        }
        c1 = k1.iter().map(|k| ids[k]).collect();
        c2 = k2.iter().map(|k| ids[k]).collect();
        if ids.len() == count {
            break;
        }
        count = ids.len();
    }
    (c1, c2)
}

fn histogram(c: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &x in c {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

/// Backtracking search for a root-preserving bijection of two local views.
fn search(l1: &Local, l2: &Local, c1: &[usize], c2: &[usize]) -> Option<Vec<usize>> {
    fn go(
        i: usize,
        l1: &Local,
        l2: &Local,
        c1: &[usize],
        c2: &[usize],
        fwd: &mut Vec<Option<usize>>,
        back: &mut Vec<Option<usize>>,
    ) -> bool {
        if i == l1.verts.len() {
            return true;
        }
        let candidates: Vec<usize> = match l1.parent[i] {
            None => vec![0],
            Some(p) => l2.adj[fwd[p].unwrap()].keys().copied().collect(),
        };
        for w in candidates {
            if back[w].is_some() || c2[w] != c1[i] {
                continue;
            }
            let ok = l1.adj[i].iter().all(|(&u, &m)| fwd[u].is_none_or(|fu| l2.adj[w].get(&fu) == Some(&m)))
                && l2.adj[w].iter().all(|(&u, &m)| back[u].is_none_or(|bu| l1.adj[i].get(&bu) == Some(&m)));
            if !ok {
                continue;
            }
            fwd[i] = Some(w);
            back[w] = Some(i);
            if go(i + 1, l1, l2, c1, c2, fwd, back) {
                return true;
            }
            fwd[i] = None;
            back[w] = None;
        }
        false
    }
    if c1[0] != c2[0] {
        return None;
    }
    let mut fwd = vec![None; l1.verts.len()];
    let mut back = vec![None; l2.verts.len()];
    go(0, l1, l2, c1, c2, &mut fwd, &mut back).then(|| fwd.into_iter().map(Option::unwrap).collect())
}

/// Rooted isomorphism ignoring labels.
///
/// Without boundary marks the root components are compared in full. With
/// boundary, the comparison covers the vertices within `ρ` of the roots,
/// where `ρ` is the least distance from either root to a boundary vertex, and
/// the edges with an endpoint closer than `ρ`; that part of both windows is
/// exact, so a mismatch there is definite.
pub fn rooted_iso(g1: &LabeledGraph, r1: VertexId, g2: &LabeledGraph, r2: VertexId) -> IsoVerdict {
    let d1 = g1.distances_from(r1);
    let d2 = g2.distances_from(r2);
    let rho = boundary_radius(g1, &d1).into_iter().chain(boundary_radius(g2, &d2)).min();
    let l1 = Local::new(g1, r1, &d1, rho);
    let l2 = Local::new(g2, r2, &d2, rho);
    if l1.verts.len() != l2.verts.len() {
        return IsoVerdict::No;
    }
    let (c1, c2) = refine(&l1, &l2);
    if histogram(&c1) != histogram(&c2) {
        return IsoVerdict::No;
    }
    let Some(map) = search(&l1, &l2, &c1, &c2) else { return IsoVerdict::No };
    match rho {
        Some(radius) => IsoVerdict::Unknown { radius },
        None => {
            let mut vmap = vec![None; g1.num_vertices()];
            for (i, &w) in map.iter().enumerate() {
                vmap[l1.verts[i]] = Some(l2.verts[w]);
            }
            match Isomorphism::from_vertex_map(g1, g2, vmap) {
                Some(iso) => IsoVerdict::Yes(iso),
                None => IsoVerdict::No,
            }
        }
    }
}

/// Orbit partition of the automorphism group (labels ignored), by pairwise
/// rooted isomorphism from a representative of each block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub blocks: Vec<Vec<VertexId>>,
    /// Some pairs were left apart only because the window could not decide them.
    pub radius_limited: bool,
}

pub fn orbit_partition(g: &LabeledGraph) -> OrbitPartition {
    let n = g.num_vertices();
    let mut assigned = vec![false; n];
    let mut blocks = Vec::new();
    let mut radius_limited = false;
    for v in 0..n {
        if assigned[v] {
            continue;
        }
        assigned[v] = true;
        let mut block = vec![v];
        for w in v + 1..n {
            if assigned[w] {
                continue;
            }
            match rooted_iso(g, v, g, w) {
                IsoVerdict::Yes(_) => {}
                IsoVerdict::Unknown { .. } => {
                    radius_limited = true;
                    continue;
                }
                IsoVerdict::No => continue,
            }
            assigned[w] = true;
            block.push(w);
        }
        blocks.push(block);
    }
    OrbitPartition { blocks, radius_limited }
}

/// Vertex-transitivity (labels ignored), tested from the root (or vertex 0)
/// against every vertex of its component.
pub fn is_transitive(g: &LabeledGraph) -> Verdict {
    if g.num_vertices() == 0 {
        return Verdict::True;
    }
    let r = g.root().unwrap_or(0);
    (0..g.num_vertices()).fold(Verdict::True, |acc, w| {
        if acc.is_false() {
            acc
        } else {
            acc.and(rooted_iso(g, r, g, w).verdict())
        }
    })
}

/// X-transitivity: every vertex is the image of the root under an
/// X-automorphism.
pub fn is_x_transitive(g: &LabeledGraph) -> Result<Verdict, IsoError> {
    let r = g.root().ok_or(GraphError::NoRoot)?;
    let mut acc = Verdict::True;
    for w in 0..g.num_vertices() {
        acc = acc.and(rooted_x_iso(g, r, g, w)?.verdict());
        if acc.is_false() {
            break;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthTransitivity {
    pub verdict: Verdict,
    /// Per letter with a neighbour of the root: the letter and the outcome.
    pub letters: Vec<(String, Verdict)>,
}

impl LengthTransitivity {
    pub fn failing(&self) -> Vec<&str> {
        self.letters.iter().filter(|(_, v)| v.is_false()).map(|(l, _)| l.as_str()).collect()
    }
}

/// Compares the root with each of its letter neighbours.
pub fn is_length_transitive(g: &LabeledGraph) -> Result<LengthTransitivity, IsoError> {
    let a = g.alphabet().ok_or(GraphError::Unlabeled)?;
    let r = g.root().ok_or(GraphError::NoRoot)?;
    if !g.is_deterministic()? {
        return Err(GraphError::Nondeterministic.into());
    }
    let mut verdict = Verdict::True;
    let mut letters = Vec::new();
    for &l in a.letters() {
        let Some(t) = g.step(r, l) else { continue };
        let v = rooted_iso(g, r, g, t).verdict();
        verdict = verdict.and(v);
        letters.push((a.letter_name(l), v));
    }
    Ok(LengthTransitivity { verdict, letters })
}
