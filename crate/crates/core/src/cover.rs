//! Coverings between Schreier graphs: search, fibers, quasi-isometry bounds,
//! ends of periodic windows and lifting of automorphisms.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::isoauto::Isomorphism;
use crate::lgraph::{EdgeId, GraphError, LabeledGraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("graphs are labeled over different alphabets")]
    AlphabetMismatch,
    #[error("not a covering: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph morphism that is bijective on the star of every vertex away from
/// window boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoveringMap {
    pub vertex_map: Vec<VertexId>,
    pub edge_map: Vec<EdgeId>,
    pub degree: usize,
}

impl CoveringMap {
    /// Checks a vertex and edge map and computes the degree. Stars at boundary
    /// vertices of either graph need only be mapped injectively.
    pub fn new(
        src: &LabeledGraph,
        tgt: &LabeledGraph,
        vertex_map: Vec<VertexId>,
        edge_map: Vec<EdgeId>,
        labeled: bool,
    ) -> Result<Self, CoverError> {
        let bad = |s: String| Err(CoverError::Invalid(s));
        if vertex_map.len() != src.num_vertices() || edge_map.len() != src.num_edges() {
            return bad("map sizes differ from the source graph".into());
        }
        if vertex_map.iter().any(|&w| w >= tgt.num_vertices()) || edge_map.iter().any(|&f| f >= tgt.num_edges()) {
            return bad("image out of range".into());
        }
        for (e, &f) in edge_map.iter().enumerate() {
            if tgt.edge(f).src != vertex_map[src.edge(e).src] {
                return bad(format!("edge {e}: source not preserved"));
            }
            if edge_map[src.inv(e)] != tgt.inv(f) {
                return bad(format!("edge {e}: inverse not preserved"));
            }
            if labeled && src.edge(e).label != tgt.edge(f).label {
                return bad(format!("edge {e}: label not preserved"));
            }
        }
        for v in 0..src.num_vertices() {
            let w = vertex_map[v];
            let mut seen: Vec<EdgeId> = src.star(v).iter().map(|&e| edge_map[e]).collect();
            seen.sort_unstable();
            let n = seen.len();
            seen.dedup();
            if seen.len() != n {
                return bad(format!("star of {v} not mapped injectively"));
            }
            if !src.is_boundary(v) && !tgt.is_boundary(w) && n != tgt.degree(w) {
                return bad(format!("star of {v} not mapped onto the star of {w}"));
            }
        }
        let mut counts = vec![0usize; tgt.num_vertices()];
        for &w in &vertex_map {
            counts[w] += 1;
        }
        let degree = counts.first().copied().unwrap_or(0);
        if counts.iter().any(|&c| c != degree) {
            return bad(format!("fiber sizes differ: {:?}", counts));
        }
        Ok(CoveringMap { vertex_map, edge_map, degree })
    }

    pub fn fibers(&self, tgt_vertices: usize) -> Vec<Vec<VertexId>> {
        let mut f = vec![Vec::new(); tgt_vertices];
        for (v, &w) in self.vertex_map.iter().enumerate() {
            f[w].push(v);
        }
        f
    }

    /// Largest source distance between two points of the fiber over `w`;
    /// `None` if the fiber is not connected within the source.
    pub fn fiber_diameter(&self, src: &LabeledGraph, w: VertexId) -> Option<usize> {
        let fiber: Vec<VertexId> = (0..self.vertex_map.len()).filter(|&v| self.vertex_map[v] == w).collect();
        let mut best = 0;
        for &v in &fiber {
            let d = src.distances_from(v);
            for &u in &fiber {
                if d[u] == usize::MAX {
                    return None;
                }
                best = best.max(d[u]);
            }
        }
        Some(best)
    }

    pub fn max_fiber_diameter(&self, src: &LabeledGraph, tgt: &LabeledGraph) -> Option<usize> {
        (0..tgt.num_vertices()).map(|w| self.fiber_diameter(src, w)).try_fold(0, |m, d| d.map(|d| m.max(d)))
    }
}

/// Label-preserving covering sending the root of `g1` to the first vertex of
/// `g2` (in id order) from which every word read at the root can be read.
pub fn x_cover_find(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<Option<CoveringMap>, CoverError> {
    Ok(x_cover_candidates(g1, g2)?.into_iter().next())
}

/// Every label-preserving covering, one per admissible root image.
pub fn x_cover_candidates(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<Vec<CoveringMap>, CoverError> {
    let a = g1.alphabet().ok_or(GraphError::Unlabeled)?;
    if g2.alphabet() != Some(a) {
        return Err(CoverError::AlphabetMismatch);
    }
    if !g1.is_deterministic()? || !g2.is_deterministic()? {
        return Err(GraphError::Nondeterministic.into());
    }
    let r1 = g1.root().ok_or(GraphError::NoRoot)?;
    let mut found = Vec::new();
    'candidates: for v0 in 0..g2.num_vertices() {
        let mut vmap = vec![usize::MAX; g1.num_vertices()];
        let mut emap = vec![usize::MAX; g1.num_edges()];
        vmap[r1] = v0;
        let mut q = VecDeque::from([r1]);
        while let Some(u) = q.pop_front() {
            for li in 0..a.degree() {
                let Some(e) = g1.out_edge_idx(u, li) else { continue };
                let Some(f) = g2.out_edge_idx(vmap[u], li) else {
                    if g1.is_boundary(u) || g2.is_boundary(vmap[u]) {
                        continue;
                    }
                    continue 'candidates;
                };
                emap[e] = f;
                let t = g1.target(e);
                if vmap[t] == usize::MAX {
                    vmap[t] = g2.target(f);
                    q.push_back(t);
                } else if vmap[t] != g2.target(f) {
                    continue 'candidates;
                }
            }
        }
        if vmap.contains(&usize::MAX) || emap.contains(&usize::MAX) {
            continue;
        }
        if let Ok(c) = CoveringMap::new(g1, g2, vmap, emap, true) {
            found.push(c);
        }
    }
    Ok(found)
}

/// Covering of finite graphs ignoring labels, by backtracking over star
/// bijections. Returns the first covering found, if any.
pub fn plain_cover_find(g1: &LabeledGraph, g2: &LabeledGraph) -> Option<CoveringMap> {
    if g1.num_vertices() == 0 || g2.num_vertices() == 0 || !g1.is_connected() || !g2.is_connected() {
        return None;
    }
    // oriented edges in breadth-first order of their sources
    let mut order = Vec::new();
    let dist = g1.distances_from(0);
    let mut verts: Vec<VertexId> = (0..g1.num_vertices()).collect();
    verts.sort_by_key(|&v| (dist[v], v));
    for &v in &verts {
        order.extend_from_slice(g1.star(v));
    }
    for v0 in 0..g2.num_vertices() {
        if g1.degree(0) != g2.degree(v0) {
            continue;
        }
        let mut s = PlainSearch {
            g1,
            g2,
            vmap: vec![None; g1.num_vertices()],
            emap: vec![None; g1.num_edges()],
            used: vec![Vec::new(); g1.num_vertices()],
            order: &order,
        };
        s.vmap[0] = Some(v0);
        if s.extend(0) {
            let vmap = s.vmap.into_iter().map(Option::unwrap).collect();
            let emap = s.emap.into_iter().map(Option::unwrap).collect();
            if let Ok(c) = CoveringMap::new(g1, g2, vmap, emap, false) {
                return Some(c);
            }
        }
    }
    None
}

struct PlainSearch<'a> {
    g1: &'a LabeledGraph,
    g2: &'a LabeledGraph,
    vmap: Vec<Option<VertexId>>,
    emap: Vec<Option<EdgeId>>,
    used: Vec<Vec<EdgeId>>,
    order: &'a [EdgeId],
}

impl PlainSearch<'_> {
    fn assign(&mut self, e: EdgeId, f: EdgeId) -> Option<Vec<(EdgeId, Option<VertexId>)>> {
        // returns an undo log of (edge, vertex newly mapped)
        let (g1, g2) = (self.g1, self.g2);
        let mut log = Vec::new();
        let t = g1.target(e);
        let ft = g2.target(f);
        let mut newv = None;
        match self.vmap[t] {
            Some(x) if x != ft => return None,
            Some(_) => {}
            None => {
                if g1.degree(t) != g2.degree(ft) {
                    return None;
                }
                self.vmap[t] = Some(ft);
                newv = Some(t);
            }
        }
        let ie = g1.inv(e);
        let fi = g2.inv(f);
        if g1.is_degenerate(e) && !g2.is_degenerate(f) {
            if let Some(v) = newv {
                self.vmap[v] = None;
            }
            return None;
        }
        self.emap[e] = Some(f);
        self.used[g1.edge(e).src].push(f);
        log.push((e, newv));
        if ie != e {
            match self.emap[ie] {
                Some(x) if x != fi => {
                    self.undo(log);
                    return None;
                }
                Some(_) => {}
                None => {
                    if self.used[t].contains(&fi) {
                        self.undo(log);
                        return None;
                    }
                    self.emap[ie] = Some(fi);
                    self.used[t].push(fi);
                    log.push((ie, None));
                }
            }
        }
        Some(log)
    }

    fn undo(&mut self, log: Vec<(EdgeId, Option<VertexId>)>) {
        for (e, v) in log.into_iter().rev() {
            self.emap[e] = None;
            self.used[self.g1.edge(e).src].pop();
            if let Some(v) = v {
                self.vmap[v] = None;
            }
        }
    }

    fn extend(&mut self, k: usize) -> bool {
        let Some(&e) = self.order.get(k) else { return true };
        if self.emap[e].is_some() {
            return self.extend(k + 1);
        }
        let u = self.g1.edge(e).src;
        let Some(w) = self.vmap[u] else { return false };
        let cands: Vec<EdgeId> = self.g2.star(w).iter().copied().filter(|f| !self.used[u].contains(f)).collect();
        for f in cands {
            if let Some(log) = self.assign(e, f) {
                if self.extend(k + 1) {
                    return true;
                }
                self.undo(log);
            }
        }
        false
    }
}

/// Quasi-isometry constants `(A, B, C)` of a covering with the measured
/// fiber bound, and the outcome of checking `d₂ ≤ d₁ ≤ d₂ + B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QiCertificate {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub pairs_checked: usize,
    pub violations: Vec<(VertexId, VertexId, usize, usize)>,
    pub radius_limited: bool,
}

impl QiCertificate {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `None` when some fiber is disconnected in the source.
pub fn qi_certificate(src: &LabeledGraph, tgt: &LabeledGraph, phi: &CoveringMap) -> Option<QiCertificate> {
    let b = phi.max_fiber_diameter(src, tgt)?;
    let windowed = src.has_boundary() || tgt.has_boundary();
    let bd1: Vec<usize> = bdist_all(src);
    let bd2: Vec<usize> = bdist_all(tgt);
    let d2: Vec<Vec<usize>> = (0..tgt.num_vertices()).map(|w| tgt.distances_from(w)).collect();
    let mut cert = QiCertificate { a: 1, b, c: 0, pairs_checked: 0, violations: Vec::new(), radius_limited: windowed };
    for v in 0..src.num_vertices() {
        let d1 = src.distances_from(v);
        for w in 0..src.num_vertices() {
            let (pv, pw) = (phi.vertex_map[v], phi.vertex_map[w]);
            let (x, y) = (d1[w], d2[pv][pw]);
            // pairs whose geodesics could leave the window are skipped
            if windowed && (bd1[v] < x || bd1[w] < x || bd2[pv] < x || bd2[pw] < x) {
                continue;
            }
            cert.pairs_checked += 1;
            if y > x || x > y + b {
                cert.violations.push((v, w, x, y));
            }
        }
    }
    Some(cert)
}

fn bdist_all(g: &LabeledGraph) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.num_vertices()];
    let mut q: VecDeque<VertexId> = g.boundary().into_iter().collect();
    for &v in &q {
        dist[v] = 0;
    }
    while let Some(u) = q.pop_front() {
        for &e in g.star(u) {
            let t = g.target(e);
            if dist[t] == usize::MAX {
                dist[t] = dist[u] + 1;
                q.push_back(t);
            }
        }
    }
    dist
}

/// Components of a window outside the closed ball of radius `r` around
/// `center` that reach the window boundary.
pub fn boundary_components(g: &LabeledGraph, center: VertexId, r: usize) -> usize {
    let dist = g.distances_from(center);
    let mut comp = vec![usize::MAX; g.num_vertices()];
    let mut count = 0;
    for s in 0..g.num_vertices() {
        if dist[s] <= r || comp[s] != usize::MAX {
            continue;
        }
        let mut touches = false;
        comp[s] = s;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            touches |= g.is_boundary(u);
            for &e in g.star(u) {
                let t = g.target(e);
                if dist[t] > r && comp[t] == usize::MAX {
                    comp[t] = s;
                    q.push_back(t);
                }
            }
        }
        if touches {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndsEstimate {
    /// Common count over all radii, if there is one.
    pub ends: Option<usize>,
    /// `(r, window width, count)` per radius.
    pub samples: Vec<(usize, usize, usize)>,
}

/// Counts boundary-reaching components outside the ball of radius `r`, in a
/// window of width `max(min_width, 6r)` produced by `family`, for each `r`.
pub fn ends_estimate<F>(family: F, radii: &[usize], min_width: usize) -> EndsEstimate
where
    F: Fn(usize) -> (LabeledGraph, VertexId),
{
    let mut samples = Vec::new();
    for &r in radii {
        let w = min_width.max(6 * r);
        let (g, c) = family(w);
        samples.push((r, w, boundary_components(&g, c, r)));
    }
    let first = samples.first().map(|s| s.2);
    let ends = first.filter(|&c| samples.iter().all(|s| s.2 == c));
    EndsEstimate { ends, samples }
}

/// An automorphism `ψ̃` of the source with `φ ∘ ψ̃ = ψ ∘ φ` on vertices and
/// edges. Once the image of one vertex is chosen, every edge image is forced
/// by star bijectivity, so each point of one fiber is tried in turn.
pub fn lift_automorphism(
    src: &LabeledGraph,
    tgt: &LabeledGraph,
    phi: &CoveringMap,
    psi: &Isomorphism,
) -> Option<Isomorphism> {
    if !tgt.has_boundary() && psi.verify(tgt, tgt).is_err() {
        return None;
    }
    if src.num_vertices() == 0 {
        return Some(Isomorphism { vertex_map: Vec::new(), edge_map: Vec::new() });
    }
    let v0 = 0;
    let target = psi.apply(phi.vertex_map[v0])?;
    'seeds: for s in (0..src.num_vertices()).filter(|&u| phi.vertex_map[u] == target) {
        let mut vmap: Vec<Option<VertexId>> = vec![None; src.num_vertices()];
        let mut emap: Vec<Option<EdgeId>> = vec![None; src.num_edges()];
        vmap[v0] = Some(s);
        let mut q = VecDeque::from([v0]);
        while let Some(u) = q.pop_front() {
            let iu = vmap[u].unwrap();
            for &e in src.star(u) {
                let Some(want) = psi.edge_map.get(phi.edge_map[e]).copied().flatten() else { continue 'seeds };
                let Some(&f) = src.star(iu).iter().find(|&&f| phi.edge_map[f] == want) else {
                    if src.is_boundary(u) || src.is_boundary(iu) {
                        continue;
                    }
                    continue 'seeds;
                };
                match emap[e] {
                    Some(g) if g != f => continue 'seeds,
                    _ => emap[e] = Some(f),
                }
                let (t, ft) = (src.target(e), src.target(f));
                match vmap[t] {
                    Some(x) if x != ft => continue 'seeds,
                    Some(_) => {}
                    None => {
                        vmap[t] = Some(ft);
                        q.push_back(t);
                    }
                }
            }
        }
        let iso = Isomorphism { vertex_map: vmap, edge_map: emap };
        if src.has_boundary() {
            // windows: accept a consistent injective partial lift
            let mut seen = vec![false; src.num_vertices()];
            if iso.vertex_map.iter().flatten().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                return Some(iso);
            }
        } else if iso.vertex_map.iter().all(Option::is_some) && iso.verify(src, src).is_ok() {
            return Some(iso);
        }
    }
    None
}
