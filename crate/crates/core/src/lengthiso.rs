//! Length-preserving isomorphisms between subgroups and the rooted graph
//! isomorphisms they correspond to.
//!
//! [`alpha_from_beta`] reads a subgroup isomorphism off a rooted graph
//! isomorphism. [`gamma_extend`] extends a subgroup isomorphism `α` to a
//! bijection `γ` between the groups that preserves lengths and initial
//! segments, and [`beta_from_gamma`] turns `γ` back into a rooted graph map.
//!
//! `α` is given by its values on generators. The pairs `(h, α(h))` are folded
//! into a graph whose edges carry a letter of each alphabet; folding is driven
//! by the first letter. Reading the second letters along the closed reduced
//! path of `h` then gives `α(h)` for every `h` in the subgroup, and the set of
//! initial segments of the subgroup is exactly the set of words that trace a
//! path ending on an edge from which the root can be reached without
//! backtracking.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isoauto::Isomorphism;
use crate::lgraph::{GraphError, LabeledGraph, VertexId};
use crate::words::{Alphabet, Letter, Word, WordError};

/// Ball size above which property checks sample instead of enumerating.
pub const EXHAUSTIVE_LIMIT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LengthIsoError {
    #[error("alphabets have different degrees ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("alphabet does not match the graph")]
    AlphabetMismatch,
    #[error("α changes the length of {word}: {len1} vs {len2}")]
    LengthMismatch { word: String, len1: usize, len2: usize },
    #[error("α is not a length-preserving isomorphism: {reason} (witness {witness})")]
    NotLengthIso { witness: String, reason: String },
    #[error("word {0} does not trace a closed path at the root")]
    NotClosed(String),
    #[error("β is ill-defined: {w1} and {w2} reach the same source vertex but different target vertices")]
    IllDefined { w1: String, w2: String },
    #[error("β is not injective: {w1} and {w2} reach different source vertices but the same target vertex")]
    NotInjective { w1: String, w2: String },
    #[error("β is not an isomorphism: {0}")]
    NotIsomorphism(String),
    #[error("completion sets differ in size below {0}")]
    Unbalanced(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("json: {0}")]
    Json(String),
}

/// Reads `α(h)` as the label in `Γ₂` of the image under `β` of the closed path
/// of `h` at the root of `Γ₁`.
pub fn alpha_from_beta(
    beta: &Isomorphism,
    g1: &LabeledGraph,
    g2: &LabeledGraph,
    hgens: &[Word],
) -> Result<Vec<(Word, Word)>, LengthIsoError> {
    let a1 = g1.alphabet().ok_or(GraphError::Unlabeled)?;
    let r1 = g1.root().ok_or(GraphError::NoRoot)?;
    let r2 = g2.root().ok_or(GraphError::NoRoot)?;
    let mut out = Vec::with_capacity(hgens.len());
    for h in hgens {
        let h = a1.normalize(h)?;
        let path = g1
            .walk_edges(r1, &h)?
            .filter(|p| p.last().map_or(r1, |&e| g1.target(e)) == r1)
            .ok_or_else(|| LengthIsoError::NotClosed(a1.format_word(&h)))?;
        let image: Vec<usize> = path
            .iter()
            .map(|&e| beta.edge_map[e].ok_or_else(|| LengthIsoError::NotIsomorphism(format!("edge {e} unmapped"))))
            .collect::<Result<_, _>>()?;
        if image.last().map_or(r2, |&f| g2.target(f)) != r2 {
            return Err(LengthIsoError::NotIsomorphism("image path is not closed at the target root".into()));
        }
        let w = g2.path_label(&image).ok_or(GraphError::Unlabeled)?;
        out.push((h, w));
    }
    Ok(out)
}

/// Folded graph of the pairs `(h, α(h))`: `out[v][i] = (target, j)` for an
/// edge with first letter index `i` and second letter index `j`.
#[derive(Debug, Clone)]
struct PairCore {
    a1: Alphabet,
    a2: Alphabet,
    out: Vec<Vec<Option<(usize, usize)>>>,
    out2: Vec<Vec<Option<(usize, usize)>>>,
    /// `good[v][i]`: the oriented edge `(v, i)` continues to the root without
    /// backtracking.
    good: Vec<Vec<bool>>,
}

struct PairFolder<'a> {
    a1: &'a Alphabet,
    a2: &'a Alphabet,
    table: Vec<Vec<Option<(usize, usize)>>>,
    parent: Vec<usize>,
    pending: Vec<(usize, usize)>,
    conflict: Option<String>,
}

impl<'a> PairFolder<'a> {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn set_half(&mut self, u: usize, i: usize, v: usize, j: usize) {
        match self.table[u][i] {
            Some((w, j2)) => {
                if j2 != j && self.conflict.is_none() {
                    self.conflict = Some(format!(
                        "letter {} is sent to both {} and {}",
                        self.a1.letter_name(self.a1.letter_at(i)),
                        self.a2.letter_name(self.a2.letter_at(j2)),
                        self.a2.letter_name(self.a2.letter_at(j)),
                    ));
                }
                let w = self.find(w);
                if w != v {
                    self.pending.push((w, v));
                }
            }
            None => self.table[u][i] = Some((v, j)),
        }
    }

    fn add_edge(&mut self, u: usize, i: usize, v: usize, j: usize) {
        let (u, v) = (self.find(u), self.find(v));
        self.set_half(u, i, v, j);
        self.set_half(v, self.a1.inverse_index(i), u, self.a2.inverse_index(j));
        while let Some((a, b)) = self.pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (keep, gone) = (a.min(b), a.max(b));
            self.parent[gone] = keep;
            let row = std::mem::replace(&mut self.table[gone], vec![None; self.a1.degree()]);
            for (i, entry) in row.into_iter().enumerate() {
                if let Some((t, j)) = entry {
                    let t = self.find(t);
                    self.set_half(keep, i, t, j);
                }
            }
        }
    }

    fn add_vertex(&mut self) -> usize {
        self.table.push(vec![None; self.a1.degree()]);
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }
}

impl PairCore {
    fn build(a1: &Alphabet, a2: &Alphabet, pairs: &[(Word, Word)]) -> Result<Self, LengthIsoError> {
        let mut f = PairFolder {
            a1,
            a2,
            table: vec![vec![None; a1.degree()]],
            parent: vec![0],
            pending: Vec::new(),
            conflict: None,
        };
        for (h, img) in pairs {
            if h.is_empty() {
                continue;
            }
            let mut cur = 0;
            for (k, (&x, &y)) in h.letters().iter().zip(img.letters()).enumerate() {
                let (i, j) = (a1.letter_index(x), a2.letter_index(y));
                let c = f.find(cur);
                let next = if k + 1 == h.len() {
                    0
                } else {
                    match f.table[c][i] {
                        Some((t, _)) => f.find(t),
                        None => f.add_vertex(),
                    }
                };
                f.add_edge(c, i, next, j);
                cur = next;
            }
            if let Some(reason) = f.conflict.take() {
                return Err(LengthIsoError::NotLengthIso { witness: a1.format_word(h), reason });
            }
        }
        // breadth-first renumbering
        let d = a1.degree();
        let n = f.parent.len();
        let root = f.find(0);
        let mut order = vec![usize::MAX; n];
        order[root] = 0;
        let mut seq = vec![root];
        let mut k = 0;
        while k < seq.len() {
            let v = seq[k];
            for i in 0..d {
                if let Some((t, _)) = f.table[v][i] {
                    let t = f.find(t);
                    if order[t] == usize::MAX {
                        order[t] = seq.len();
                        seq.push(t);
                    }
                }
            }
            k += 1;
        }
        let mut out = Vec::with_capacity(seq.len());
        for &v in &seq {
            let row = (0..d)
                .map(|i| {
                    f.table[v][i].map(|(t, j)| {
                        let t = f.find(t);
                        (order[t], j)
                    })
                })
                .collect();
            out.push(row);
        }
        let mut core = PairCore { a1: a1.clone(), a2: a2.clone(), out, out2: Vec::new(), good: Vec::new() };
        core.index_second()?;
        core.compute_good();
        Ok(core)
    }

    fn index_second(&mut self) -> Result<(), LengthIsoError> {
        let d = self.a1.degree();
        self.out2 = vec![vec![None; d]; self.out.len()];
        for v in 0..self.out.len() {
            for i in 0..d {
                if let Some((t, j)) = self.out[v][i] {
                    if let Some((_, i2)) = self.out2[v][j] {
                        let w = self.path_to(v);
                        return Err(LengthIsoError::NotLengthIso {
                            witness: self.a1.format_word(&w),
                            reason: format!(
                                "letters {} and {} are both sent to {}",
                                self.a1.letter_name(self.a1.letter_at(i2)),
                                self.a1.letter_name(self.a1.letter_at(i)),
                                self.a2.letter_name(self.a2.letter_at(j)),
                            ),
                        });
                    }
                    self.out2[v][j] = Some((t, i));
                }
            }
        }
        Ok(())
    }

    fn compute_good(&mut self) {
        let d = self.a1.degree();
        let n = self.out.len();
        self.good = vec![vec![false; d]; n];
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..n {
                for i in 0..d {
                    let Some((t, _)) = self.out[v][i] else { continue };
                    if self.good[v][i] {
                        continue;
                    }
                    let back = self.a1.inverse_index(i);
                    let ok = t == 0 || (0..d).any(|k| k != back && self.out[t][k].is_some() && self.good[t][k]);
                    if ok {
                        self.good[v][i] = true;
                        changed = true;
                    }
                }
            }
        }
    }

    fn path_to(&self, target: usize) -> Word {
        let d = self.a1.degree();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.out.len()];
        let mut seen = vec![false; self.out.len()];
        seen[0] = true;
        let mut q = VecDeque::from([0]);
        while let Some(v) = q.pop_front() {
            for i in 0..d {
                if let Some((t, _)) = self.out[v][i] {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((v, i));
                        q.push_back(t);
                    }
                }
            }
        }
        let mut letters = Vec::new();
        let mut v = target;
        while let Some((p, i)) = prev[v] {
            letters.push(self.a1.letter_at(i));
            v = p;
        }
        letters.reverse();
        Word(letters)
    }

    /// Final vertex of a reduced word traced in the given coordinate.
    fn trace(&self, w: &Word, second: bool) -> Option<usize> {
        let (a, table) = if second { (&self.a2, &self.out2) } else { (&self.a1, &self.out) };
        let mut cur = 0;
        for &l in w.letters() {
            cur = table[cur][a.letter_index(l)]?.0;
        }
        Some(cur)
    }

    /// Whether a reduced word is an initial segment of a reduced subgroup
    /// element, in the given coordinate.
    fn is_segment(&self, w: &Word, second: bool) -> bool {
        let (a, table) = if second { (&self.a2, &self.out2) } else { (&self.a1, &self.out) };
        let mut cur = 0;
        let mut last = None;
        for &l in w.letters() {
            let idx = a.letter_index(l);
            match table[cur][idx] {
                Some((t, other)) => {
                    last = Some((cur, if second { other } else { idx }));
                    cur = t;
                }
                None => return false,
            }
        }
        last.is_none_or(|(v, i)| self.good[v][i])
    }
}

/// A recorded choice of the bijection between free completion sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBreak {
    pub parent: String,
    pub image: String,
    pub e: Vec<String>,
    pub f: Vec<String>,
}

/// The extended bijection `γ`, materialized on the ball of
/// radius `radius` and evaluable on any reduced word.
#[derive(Debug, Clone)]
pub struct PartialLengthBijection {
    radius: usize,
    core: PairCore,
    generators: Vec<(Word, Word)>,
    pairs: Vec<(Word, Word)>,
    forward: HashMap<Word, Word>,
    backward: HashMap<Word, Word>,
    tiebreaks: Vec<TieBreak>,
}

#[derive(Serialize, Deserialize)]
struct GammaJson {
    radius: usize,
    alphabets: (Alphabet, Alphabet),
    generators: Vec<(String, String)>,
    pairs: Vec<(String, String)>,
    tiebreaks: Vec<TieBreak>,
}

/// Where a traversal stands: inside the initial-segment set at a core vertex
/// (with the last first-letter index), or outside it.
#[derive(Clone, Copy)]
enum State {
    Inside(usize),
    Outside,
}

impl PartialLengthBijection {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alphabets(&self) -> (&Alphabet, &Alphabet) {
        (&self.core.a1, &self.core.a2)
    }

    pub fn generators(&self) -> &[(Word, Word)] {
        &self.generators
    }

    /// `(w, γ(w))` for every reduced `w` of length at most the radius, in
    /// shortlex order.
    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn tiebreaks(&self) -> &[TieBreak] {
        &self.tiebreaks
    }

    pub fn get(&self, w: &Word) -> Option<&Word> {
        self.forward.get(w)
    }

    pub fn get_inverse(&self, w: &Word) -> Option<&Word> {
        self.backward.get(w)
    }

    pub fn in_h1(&self, w: &Word) -> Result<bool, WordError> {
        let w = self.core.a1.normalize(w)?;
        Ok(self.core.trace(&w, false) == Some(0))
    }

    pub fn in_h2(&self, w: &Word) -> Result<bool, WordError> {
        let w = self.core.a2.normalize(w)?;
        Ok(self.core.trace(&w, true) == Some(0))
    }

    /// Membership in the set `C` of initial segments of subgroup elements.
    pub fn in_segments(&self, w: &Word) -> Result<bool, WordError> {
        let w = self.core.a1.normalize(w)?;
        Ok(self.core.is_segment(&w, false))
    }

    /// Letters extending `last`-ended words without cancellation, minus those
    /// whose extension stays inside the segment set.
    fn free_letters(&self, state: State, last: Option<Letter>, second: bool) -> Vec<usize> {
        let a = if second { &self.core.a2 } else { &self.core.a1 };
        let table = if second { &self.core.out2 } else { &self.core.out };
        (0..a.degree())
            .filter(|&k| last.is_none_or(|l| a.letter_at(k) != a.inverse(l)))
            .filter(|&k| match state {
                State::Outside => true,
                State::Inside(v) => match table[v][k] {
                    None => true,
                    Some((_, other)) => {
                        let i = if second { other } else { k };
                        !self.core.good[v][i]
                    }
                },
            })
            .collect()
    }

    fn walk(&self, w: &Word, inverse: bool, mut log: Option<&mut Vec<TieBreak>>) -> Word {
        let (src, dst) = if inverse { (&self.core.a2, &self.core.a1) } else { (&self.core.a1, &self.core.a2) };
        let table = if inverse { &self.core.out2 } else { &self.core.out };
        let mut state = State::Inside(0);
        let mut image: Vec<Letter> = Vec::with_capacity(w.len());
        for (k, &l) in w.letters().iter().enumerate() {
            let idx = src.letter_index(l);
            if let State::Inside(v) = state {
                if let Some((t, other)) = table[v][idx] {
                    let i1 = if inverse { other } else { idx };
                    if self.core.good[v][i1] {
                        image.push(dst.letter_at(other));
                        state = State::Inside(t);
                        continue;
                    }
                }
            }
            let e = self.free_letters(state, w.letters()[..k].last().copied(), inverse);
            let f = self.free_letters(state, image.last().copied(), !inverse);
            let pos = e.iter().position(|&x| x == idx).expect("letter extends the word freely");
            assert_eq!(e.len(), f.len(), "completion sets of equal size");
            image.push(dst.letter_at(f[pos]));
            if let Some(log) = log.as_deref_mut() {
                if e.len() > 1 && !inverse {
                    log.push(TieBreak {
                        parent: src.format_word(&w.prefix(k)),
                        image: dst.format_word(&Word(image[..k].to_vec())),
                        e: e.iter().map(|&x| src.letter_name(src.letter_at(x))).collect(),
                        f: f.iter().map(|&y| dst.letter_name(dst.letter_at(y))).collect(),
                    });
                }
            }
            state = State::Outside;
        }
        Word(image)
    }

    /// `γ(w)` for any word (reduced first).
    pub fn apply(&self, w: &Word) -> Result<Word, WordError> {
        let w = self.core.a1.normalize(w)?;
        if let Some(img) = self.forward.get(&w) {
            return Ok(img.clone());
        }
        Ok(self.walk(&w, false, None))
    }

    /// `γ⁻¹(w)` for any word (reduced first).
    pub fn apply_inverse(&self, w: &Word) -> Result<Word, WordError> {
        let w = self.core.a2.normalize(w)?;
        if let Some(img) = self.backward.get(&w) {
            return Ok(img.clone());
        }
        Ok(self.walk(&w, true, None))
    }

    /// Exchanges the images of two materialized words. Only useful to build
    /// negative controls for [`lemma_properties_check`].
    pub fn swap_images(&mut self, u: &Word, v: &Word) {
        let (Some(gu), Some(gv)) = (self.forward.get(u).cloned(), self.forward.get(v).cloned()) else { return };
        self.forward.insert(u.clone(), gv.clone());
        self.forward.insert(v.clone(), gu.clone());
        self.backward.insert(gv.clone(), u.clone());
        self.backward.insert(gu.clone(), v.clone());
        for p in &mut self.pairs {
            if &p.0 == u {
                p.1 = gv.clone();
            } else if &p.0 == v {
                p.1 = gu.clone();
            }
        }
    }

    pub fn to_json_string(&self) -> String {
        let (a1, a2) = (&self.core.a1, &self.core.a2);
        let j = GammaJson {
            radius: self.radius,
            alphabets: (a1.clone(), a2.clone()),
            generators: self.generators.iter().map(|(h, g)| (a1.format_word(h), a2.format_word(g))).collect(),
            pairs: self.pairs.iter().map(|(w, g)| (a1.format_word(w), a2.format_word(g))).collect(),
            tiebreaks: self.tiebreaks.clone(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    /// Rebuilds `γ` from its generators and checks the stored pairs.
    pub fn from_json_str(s: &str) -> Result<Self, LengthIsoError> {
        let j: GammaJson = serde_json::from_str(s).map_err(|e| LengthIsoError::Json(e.to_string()))?;
        let (a1, a2) = j.alphabets;
        let gens = j
            .generators
            .iter()
            .map(|(h, g)| Ok((a1.parse_word(h)?, a2.parse_word(g)?)))
            .collect::<Result<Vec<_>, WordError>>()?;
        let gamma = gamma_extend(&gens, &a1, &a2, j.radius)?;
        for (w, g) in &j.pairs {
            let (w, g) = (a1.parse_word(w)?, a2.parse_word(g)?);
            if gamma.get(&w) != Some(&g) {
                return Err(LengthIsoError::Json(format!("stored pair for {} disagrees", a1.format_word(&w))));
            }
        }
        Ok(gamma)
    }
}

/// Extends `α`, given on generators, to a length and initial-segment
/// preserving bijection, materialized on the ball of radius `radius`.
///
/// The folded pair graph certifies `α` on the whole subgroup: a generator
/// whose image has a different length, two images for one edge, or two edges
/// with one image all mean `α` is not a length-preserving isomorphism.
/// Outside the initial segments, free extensions are matched in letter order.
pub fn gamma_extend(
    alpha: &[(Word, Word)],
    a1: &Alphabet,
    a2: &Alphabet,
    radius: usize,
) -> Result<PartialLengthBijection, LengthIsoError> {
    if a1.degree() != a2.degree() {
        return Err(LengthIsoError::DegreeMismatch(a1.degree(), a2.degree()));
    }
    let mut generators = Vec::with_capacity(alpha.len());
    for (h, g) in alpha {
        let (h, g) = (a1.normalize(h)?, a2.normalize(g)?);
        if h.len() != g.len() {
            return Err(LengthIsoError::LengthMismatch { word: a1.format_word(&h), len1: h.len(), len2: g.len() });
        }
        generators.push((h, g));
    }
    let core = PairCore::build(a1, a2, &generators)?;
    let mut gamma = PartialLengthBijection {
        radius,
        core,
        generators,
        pairs: Vec::new(),
        forward: HashMap::new(),
        backward: HashMap::new(),
        tiebreaks: Vec::new(),
    };
    let mut log = Vec::new();
    let mut pairs = Vec::new();
    for w in a1.ball(radius) {
        // only the last step of each word can add a new choice
        let mut step_log = Vec::new();
        let img = gamma.walk(&w, false, Some(&mut step_log));
        if let Some(t) = step_log.pop() {
            if t.parent == a1.format_word(&w.prefix(w.len().saturating_sub(1))) && !log.contains(&t) {
                log.push(t);
            }
        }
        pairs.push((w, img));
    }
    gamma.forward = pairs.iter().cloned().collect();
    gamma.backward = pairs.iter().map(|(w, g)| (g.clone(), w.clone())).collect();
    if gamma.backward.len() != gamma.forward.len() {
        return Err(LengthIsoError::Unbalanced("materialized ball".into()));
    }
    gamma.pairs = pairs;
    gamma.tiebreaks = log;
    Ok(gamma)
}

/// Outcome of [`lemma_properties_check`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub words_checked: usize,
    pub identities_checked: usize,
    pub sampled: bool,
    pub violations: Vec<String>,
}

impl PropertyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks on the materialized ball: length and initial-segment preservation
/// of `γ` and `γ⁻¹`, bijectivity onto the target ball, `γ(H₁) = H₂`, and the
/// identities `γ(fg⁻¹) = γ(f)γ(g)⁻¹` on `H₁` and
/// `γ⁻¹(fg⁻¹) = γ⁻¹(f)γ⁻¹(g)⁻¹` on `H₂` for every reduced splitting.
///
/// Balls larger than [`EXHAUSTIVE_LIMIT`] are sampled with `sample` words
/// drawn with the given seed.
pub fn lemma_properties_check(gamma: &PartialLengthBijection, sample: usize, seed: u64) -> PropertyReport {
    let (a1, a2) = gamma.alphabets();
    let mut report = PropertyReport::default();
    let mut words: Vec<&(Word, Word)> = gamma.pairs.iter().collect();
    if words.len() > EXHAUSTIVE_LIMIT {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        words.shuffle(&mut rng);
        words.truncate(sample);
        report.sampled = true;
    }
    let v = &mut report.violations;

    if !report.sampled {
        let expected = a2.ball_size(gamma.radius);
        let images: HashSet<&Word> = gamma.pairs.iter().map(|(_, g)| g).collect();
        if images.len() != gamma.pairs.len() || images.len() != expected {
            v.push(format!("not a bijection onto the target ball: {} images, ball has {expected}", images.len()));
        }
    }

    for (w, g) in &words {
        report.words_checked += 1;
        let fw = |x: &Word| gamma.forward.get(x).cloned();
        if g.len() != w.len() || !a2.is_reduced(g) {
            v.push(format!("length of {} not preserved", a1.format_word(w)));
        }
        if !w.is_empty() && fw(&w.prefix(w.len() - 1)).is_none_or(|p| !p.is_prefix_of(g)) {
            v.push(format!("initial segment of {} not preserved", a1.format_word(w)));
        }
        if gamma.backward.get(g) != Some(w) {
            v.push(format!("inverse image of {} disagrees", a2.format_word(g)));
        }
        let in1 = gamma.core.trace(w, false) == Some(0);
        let in2 = gamma.core.trace(g, true) == Some(0);
        if in1 != in2 {
            v.push(format!("{} in H1 is {in1} but its image in H2 is {in2}", a1.format_word(w)));
        }
        if in1 {
            for k in 0..=w.len() {
                report.identities_checked += 1;
                let f = w.prefix(k);
                let gg = a1.invert(&Word(w.letters()[k..].to_vec()));
                match (fw(&f), fw(&gg)) {
                    (Some(cf), Some(cg)) => {
                        let mut rhs = cf.0.clone();
                        rhs.extend(a2.invert(&cg).0);
                        if Word(rhs) != *g {
                            v.push(format!("γ(fg⁻¹) ≠ γ(f)γ(g)⁻¹ for {} split at {k}", a1.format_word(w)));
                        }
                    }
                    _ => v.push(format!("split of {} leaves the ball", a1.format_word(w))),
                }
            }
        }
        // the same checks from the target side
        let bw = |x: &Word| gamma.backward.get(x).cloned();
        if !g.is_empty() && bw(&g.prefix(g.len() - 1)).is_none_or(|p| !p.is_prefix_of(w)) {
            v.push(format!("γ⁻¹ does not preserve the initial segment of {}", a2.format_word(g)));
        }
        if in2 {
            for k in 0..=g.len() {
                report.identities_checked += 1;
                let f = g.prefix(k);
                let gg = a2.invert(&Word(g.letters()[k..].to_vec()));
                match (bw(&f), bw(&gg)) {
                    (Some(cf), Some(cg)) => {
                        let mut rhs = cf.0.clone();
                        rhs.extend(a1.invert(&cg).0);
                        if Word(rhs) != *w {
                            v.push(format!("γ⁻¹(fg⁻¹) ≠ γ⁻¹(f)γ⁻¹(g)⁻¹ for {} split at {k}", a2.format_word(g)));
                        }
                    }
                    _ => v.push(format!("split of {} leaves the ball", a2.format_word(g))),
                }
            }
        }
    }
    report
}

/// The rooted map `Hf ↦ H₂γ(f)` between two Schreier graphs.
#[derive(Debug, Clone)]
pub struct BetaMap {
    pub vertex_map: Vec<Option<VertexId>>,
    /// Present when the source root component is finite, fully mapped, and the
    /// map extends to a verified isomorphism.
    pub iso: Option<Isomorphism>,
    pub words_checked: usize,
}

/// Builds `β(H₁f) = H₂γ(f)` from breadth-first tree words, every tree word
/// extended by one edge, and every materialized word of `γ`, reporting a
/// witness pair if the map is ill-defined or not injective.
pub fn beta_from_gamma(
    gamma: &PartialLengthBijection,
    g1: &LabeledGraph,
    g2: &LabeledGraph,
) -> Result<BetaMap, LengthIsoError> {
    let (a1, a2) = gamma.alphabets();
    if g1.alphabet() != Some(a1) || g2.alphabet() != Some(a2) {
        return Err(LengthIsoError::AlphabetMismatch);
    }
    let r1 = g1.root().ok_or(GraphError::NoRoot)?;
    let r2 = g2.root().ok_or(GraphError::NoRoot)?;
    if !g1.is_deterministic()? || !g2.is_deterministic()? {
        return Err(GraphError::Nondeterministic.into());
    }
    // breadth-first tree words
    let mut tree: Vec<Option<Word>> = vec![None; g1.num_vertices()];
    tree[r1] = Some(Word::empty());
    let mut q = VecDeque::from([r1]);
    let mut words = vec![Word::empty()];
    while let Some(v) = q.pop_front() {
        for li in 0..a1.degree() {
            let Some(e) = g1.out_edge_idx(v, li) else { continue };
            let t = g1.target(e);
            let w = a1.multiply(tree[v].as_ref().unwrap(), &Word(vec![a1.letter_at(li)]))?;
            if tree[t].is_none() {
                tree[t] = Some(w.clone());
                q.push_back(t);
            }
            words.push(w);
        }
    }
    words.extend(gamma.pairs.iter().map(|(w, _)| w.clone()));

    let mut fwd: Vec<Option<(VertexId, Word)>> = vec![None; g1.num_vertices()];
    let mut back: Vec<Option<(VertexId, Word)>> = vec![None; g2.num_vertices()];
    let mut checked = 0;
    for f in &words {
        let Some(v) = g1.follow(r1, f)? else { continue };
        let img = gamma.apply(f)?;
        let Some(u) = g2.follow(r2, &img)? else { continue };
        checked += 1;
        match &fwd[v] {
            Some((u2, w2)) if *u2 != u => {
                return Err(LengthIsoError::IllDefined { w1: a1.format_word(w2), w2: a1.format_word(f) })
            }
            Some(_) => {}
            None => fwd[v] = Some((u, f.clone())),
        }
        match &back[u] {
            Some((v2, w2)) if *v2 != v => {
                return Err(LengthIsoError::NotInjective { w1: a1.format_word(w2), w2: a1.format_word(f) })
            }
            Some(_) => {}
            None => back[u] = Some((v, f.clone())),
        }
    }
    let vertex_map: Vec<Option<VertexId>> = fwd.iter().map(|m| m.as_ref().map(|(u, _)| *u)).collect();
    let reach1 = g1.distances_from(r1);
    let reach2 = g2.distances_from(r2);
    let total = (0..g1.num_vertices()).all(|v| reach1[v] == usize::MAX || vertex_map[v].is_some());
    let iso = if !g1.has_boundary() && !g2.has_boundary() && total {
        let size1 = reach1.iter().filter(|&&d| d != usize::MAX).count();
        let size2 = reach2.iter().filter(|&&d| d != usize::MAX).count();
        if size1 != size2 {
            return Err(LengthIsoError::NotIsomorphism(format!("{size1} vertices onto {size2}")));
        }
        let iso = Isomorphism::from_vertex_map(g1, g2, vertex_map.clone())
            .ok_or_else(|| LengthIsoError::NotIsomorphism("edge multiplicities differ".into()))?;
        if iso.vertex_map[r1] != Some(r2) {
            return Err(LengthIsoError::NotIsomorphism("root not preserved".into()));
        }
        Some(iso)
    } else {
        None
    };
    Ok(BetaMap { vertex_map, iso, words_checked: checked })
}
