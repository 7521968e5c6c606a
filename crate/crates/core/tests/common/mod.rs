#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use schreier_core::corpus::random_schreier_graph;
use schreier_core::isoauto::Isomorphism;
use schreier_core::lengthiso::{beta_from_gamma, gamma_extend};
use schreier_core::schreier::{coset_closure, reconstruct_subgroup, SubgroupPresentation};
use schreier_core::{Alphabet, LabeledGraph, Letter, OrderClass, VertexId, Word};

pub fn alphabets_by_degree() -> Vec<(usize, Vec<Alphabet>)> {
    let p = |s: &str| Alphabet::parse_spec(s).unwrap();
    vec![
        (2, vec![p("x:inf"), p("a:2,b:2")]),
        (3, vec![p("x:inf,a:2"), p("a:2,b:2,c:2")]),
        (4, vec![p("x:inf,y:inf"), p("x:inf,a:2,b:2"), p("a:2,b:2,c:2,d:2")]),
    ]
}

/// A finite Schreier graph rebuilt by coset enumeration from the subgroup of
/// a random action.
pub fn finite_schreier<R: Rng>(rng: &mut R, a: &Alphabet, max_points: usize) -> LabeledGraph {
    let g = random_schreier_graph(rng, a, max_points);
    normalize(&g)
}

pub fn normalize(g: &LabeledGraph) -> LabeledGraph {
    let a = g.alphabet().unwrap().clone();
    let gens = reconstruct_subgroup(g).unwrap();
    let ct = coset_closure(&SubgroupPresentation::new(a, gens), 10_000).unwrap();
    assert!(ct.complete);
    let out = ct.to_graph().unwrap();
    assert_eq!(out.num_vertices(), g.num_vertices());
    out
}

/// Every letter bijection from `a1` to `a2` commuting with inversion, as a
/// table indexed by the letter index of `a1`.
pub fn letter_bijections(a1: &Alphabet, a2: &Alphabet) -> Vec<Vec<Letter>> {
    let split = |a: &Alphabet| -> (Vec<usize>, Vec<usize>) {
        (0..a.num_symbols()).partition(|&s| a.order(s) == OrderClass::Order2)
    };
    let (inv1, inf1) = split(a1);
    let (inv2, inf2) = split(a2);
    if inv1.len() != inv2.len() || inf1.len() != inf2.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for p2 in permutations(inv2.len()) {
        for pi in permutations(inf2.len()) {
            for signs in 0..(1usize << inf1.len()) {
                let mut table = vec![Letter::pos(0); a1.degree()];
                for (k, &s) in inv1.iter().enumerate() {
                    table[a1.letter_index(Letter::pos(s))] = Letter::pos(inv2[p2[k]]);
                }
                for (k, &s) in inf1.iter().enumerate() {
                    let t = Letter::pos(inf2[pi[k]]);
                    let (pos, neg) = if signs >> k & 1 == 1 { (a2.inverse(t), t) } else { (t, a2.inverse(t)) };
                    table[a1.letter_index(Letter::pos(s))] = pos;
                    table[a1.letter_index(a1.inverse(Letter::pos(s)))] = neg;
                }
                out.push(table);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn apply_letters(a1: &Alphabet, table: &[Letter], w: &Word) -> Word {
    Word(w.letters().iter().map(|&l| table[a1.letter_index(l)]).collect())
}

/// α → γ → β. `Ok` only with a verified root-preserving isomorphism.
pub fn pipeline(g1: &LabeledGraph, g2: &LabeledGraph, alpha: &[(Word, Word)], radius: usize) -> Result<Isomorphism, String> {
    let (a1, a2) = (g1.alphabet().unwrap(), g2.alphabet().unwrap());
    let gamma = gamma_extend(alpha, a1, a2, radius).map_err(|e| e.to_string())?;
    let beta = beta_from_gamma(&gamma, g1, g2).map_err(|e| e.to_string())?;
    let iso = beta.iso.ok_or("no total map")?;
    iso.verify(g1, g2)?;
    if iso.apply(g1.root().unwrap()) != g2.root() {
        return Err("root not preserved".into());
    }
    Ok(iso)
}

/// A connected `k`-sheeted covering of a finite deterministic graph, rooted
/// over the base root. `None` if several attempts stay disconnected.
pub fn random_cover<R: Rng>(rng: &mut R, base: &LabeledGraph, k: usize) -> Option<LabeledGraph> {
    let a = base.alphabet().unwrap().clone();
    let n = base.num_vertices();
    let id = |v: usize, i: usize| v * k + i;
    for _ in 0..50 {
        let mut next = vec![vec![None; a.num_symbols()]; n * k];
        for s in 0..a.num_symbols() {
            for v in 0..n {
                let t = base.step(v, Letter::pos(s)).unwrap();
                let mut sigma: Vec<usize> = (0..k).collect();
                sigma.shuffle(rng);
                match a.order(s) {
                    OrderClass::Infinite => {
                        for i in 0..k {
                            next[id(v, i)][s] = Some(id(t, sigma[i]));
                        }
                    }
                    OrderClass::Order2 if v < t => {
                        for i in 0..k {
                            next[id(v, i)][s] = Some(id(t, sigma[i]));
                            next[id(t, sigma[i])][s] = Some(id(v, i));
                        }
                    }
                    OrderClass::Order2 if v == t => {
                        let pairs = rng.gen_range(0..=k / 2);
                        let mut fixed: Vec<usize> = sigma.clone();
                        for p in 0..pairs {
                            let (x, y) = (sigma[2 * p], sigma[2 * p + 1]);
                            next[id(v, x)][s] = Some(id(v, y));
                            next[id(v, y)][s] = Some(id(v, x));
                            fixed.retain(|&z| z != x && z != y);
                        }
                        for z in fixed {
                            next[id(v, z)][s] = Some(id(v, z));
                        }
                    }
                    OrderClass::Order2 => {}
                }
            }
        }
        let root = id(base.root().unwrap(), 0);
        let g = LabeledGraph::from_transitions(a.clone(), &next, Some(root), []).unwrap();
        if g.is_connected() {
            return Some(g);
        }
    }
    None
}

/// All-pairs breadth-first distances, computed independently of the library.
pub fn all_pairs(g: &LabeledGraph) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in 0..g.num_edges() {
        adj[g.edge(e).src].push(g.target(e));
    }
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut q = std::collections::VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &t in &adj[u] {
                    if d[t] == usize::MAX {
                        d[t] = d[u] + 1;
                        q.push_back(t);
                    }
                }
            }
            d
        })
        .collect()
}

pub fn rerooted(g: &LabeledGraph, v: VertexId) -> LabeledGraph {
    normalize(&g.clone().with_root(v))
}
