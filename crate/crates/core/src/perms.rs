//! Permutations acting on the right, and small finite permutation groups.
//!
//! Points are 1-based in cycle notation and 0-based in memory. The product
//! `p * q` applies `p` first, so a word `w = ℓ₁ℓ₂…ℓₖ` moves a point `i` to
//! `i·ℓ₁·ℓ₂·…·ℓₖ`, matching the right cosets `Hg ↦ Hgx` of a Schreier graph.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Alphabet, OrderClass, Sign, Word, WordError};

/// Upper bound on the size of any group enumerated by closure.
pub const DEFAULT_GROUP_LIMIT: usize = 50_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("malformed cycle notation: {0}")]
    Malformed(String),
    #[error("point {0} outside 1..={1}")]
    OutOfRange(usize, usize),
    #[error("image list is not a bijection")]
    NotBijective,
    #[error("permutations act on different point sets ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("enumeration bound {0} exceeded")]
    BoundExceeded(usize),
    #[error("symbol {0} has order two but its permutation is not an involution")]
    NotInvolution(String),
    #[error("expected {expected} permutations, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PermError;
    fn try_from(images: Vec<usize>) -> Result<Self, PermError> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// From 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(PermError::NotBijective);
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// From a list of cycles over 1-based points.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut moved = vec![false; n];
        for c in cycles {
            for &p in c {
                if p == 0 || p > n {
                    return Err(PermError::OutOfRange(p, n));
                }
                if moved[p - 1] {
                    return Err(PermError::Malformed(format!("point {p} repeated")));
                }
                moved[p - 1] = true;
            }
            for (i, &p) in c.iter().enumerate() {
                images[p - 1] = c[(i + 1) % c.len()] - 1;
            }
        }
        Ok(Permutation { images })
    }

    /// Parses cycle notation such as `"(1,3,4)(2,5)"` or `"()"`.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Self, PermError> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(PermError::Malformed(s));
        }
        let mut cycles = Vec::new();
        let mut rest = s.as_str();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| PermError::Malformed(rest.to_string()))?;
            let close = body.find(')').ok_or_else(|| PermError::Malformed(rest.to_string()))?;
            let inner = &body[..close];
            if !inner.is_empty() {
                let pts = inner
                    .split(',')
                    .map(|t| t.parse::<usize>().map_err(|_| PermError::Malformed(t.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                cycles.push(pts);
            }
            rest = &body[close + 1..];
        }
        Self::from_cycles(n, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 0-based point `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self` then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: self.images.iter().map(|&i| other.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    pub fn pow(&self, k: i64) -> Permutation {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Permutation::identity(self.degree());
        for _ in 0..k.unsigned_abs() {
            out = out.then(&base);
        }
        out
    }

    /// Nontrivial cycles over 1-based points, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.images[s] == s {
                continue;
            }
            let mut c = Vec::new();
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                c.push(i + 1);
                i = self.images[i];
            }
            out.push(c);
        }
        out
    }

    pub fn order(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        self.cycles().iter().fold(1, |acc, c| acc / gcd(acc, c.len()) * c.len())
    }

    pub fn is_involution(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| self.images[j] == i)
    }
}

impl std::ops::Mul for &Permutation {
    type Output = Permutation;
    fn mul(self, rhs: &Permutation) -> Permutation {
        self.then(rhs)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs = self.cycles();
        if cs.is_empty() {
            return f.write_str("()");
        }
        for c in cs {
            let body: Vec<String> = c.iter().map(ToString::to_string).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

/// Elements of `⟨gens⟩` in breadth-first order from the identity.
pub fn closure(gens: &[Permutation], n: usize, limit: usize) -> Result<Vec<Permutation>, PermError> {
    for g in gens {
        if g.degree() != n {
            return Err(PermError::DegreeMismatch(n, g.degree()));
        }
    }
    let id = Permutation::identity(n);
    let mut seen: HashMap<Permutation, ()> = HashMap::new();
    seen.insert(id.clone(), ());
    let mut out = vec![id.clone()];
    let mut q = VecDeque::from([id]);
    while let Some(p) = q.pop_front() {
        for g in gens {
            let r = p.then(g);
            if !seen.contains_key(&r) {
                if out.len() >= limit {
                    return Err(PermError::BoundExceeded(limit));
                }
                seen.insert(r.clone(), ());
                out.push(r.clone());
                q.push_back(r);
            }
        }
    }
    Ok(out)
}

/// Order of the group generated by `gens` on at most 12 points.
pub fn group_order(gens: &[Permutation]) -> Result<usize, PermError> {
    let n = gens.first().map_or(0, Permutation::degree);
    if n > 12 {
        return Err(PermError::BoundExceeded(12));
    }
    Ok(closure(gens, n, DEFAULT_GROUP_LIMIT.max(1))?.len())
}

/// A permutation for each symbol of an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermAction {
    pub alphabet: Alphabet,
    pub perms: Vec<Permutation>,
    pub points: usize,
}

impl PermAction {
    pub fn new(alphabet: Alphabet, perms: Vec<Permutation>) -> Result<Self, PermError> {
        if perms.len() != alphabet.num_symbols() {
            return Err(PermError::ArityMismatch { expected: alphabet.num_symbols(), got: perms.len() });
        }
        let points = perms.first().map_or(0, Permutation::degree);
        for (s, p) in perms.iter().enumerate() {
            if p.degree() != points {
                return Err(PermError::DegreeMismatch(points, p.degree()));
            }
            if alphabet.order(s) == OrderClass::Order2 && !p.is_involution() {
                return Err(PermError::NotInvolution(alphabet.symbols()[s].name.clone()));
            }
        }
        Ok(PermAction { alphabet, perms, points })
    }

    /// Evaluates a word as the product of its letters' permutations.
    pub fn evaluate(&self, w: &Word) -> Result<Permutation, PermError> {
        let mut out = Permutation::identity(self.points);
        for &l in w.letters() {
            self.alphabet.check_letter(l)?;
            let p = &self.perms[l.symbol];
            out = match l.sign {
                Sign::Pos => out.then(p),
                Sign::Neg => out.then(&p.inverse()),
            };
        }
        Ok(out)
    }

    pub fn group_order(&self) -> Result<usize, PermError> {
        group_order(&self.perms)
    }
}

/// Evaluates `expr` (in the syntax of [`Alphabet::parse_word`]) under `action`.
pub fn check_identity(expr: &str, action: &PermAction) -> Result<Permutation, PermError> {
    let w = action.alphabet.parse_word(expr)?;
    action.evaluate(&w)
}

/// The normalizer of `⟨subgens⟩` in `⟨groupgens⟩`, listed in closure order.
pub fn normalizer(subgens: &[Permutation], groupgens: &[Permutation]) -> Result<Vec<Permutation>, PermError> {
    let n = groupgens.first().or(subgens.first()).map_or(0, Permutation::degree);
    let a = closure(groupgens, n, 10_000)?;
    let k = closure(subgens, n, 10_000)?;
    let kset: std::collections::HashSet<&Permutation> = k.iter().collect();
    Ok(a.into_iter()
        .filter(|g| {
            let gi = g.inverse();
            k.iter().all(|h| kset.contains(&gi.then(h).then(g)))
        })
        .collect())
}

/// A finite group stored by its multiplication table.
///
/// Element `0` is the identity. Products follow the permutation convention:
/// `mul(a, b)` is `a` then `b`.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    table: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

impl FiniteGroup {
    pub fn generated_by(gens: &[Permutation], limit: usize) -> Result<Self, PermError> {
        let n = gens.first().map_or(0, Permutation::degree);
        let elements = closure(gens, n, limit)?;
        Ok(Self::from_elements(elements))
    }

    fn from_elements(elements: Vec<Permutation>) -> Self {
        let index: HashMap<Permutation, usize> =
            elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&a.then(b)]).collect())
            .collect();
        let inv = elements.iter().map(|a| index[&a.inverse()]).collect();
        FiniteGroup { elements, index, table, inv }
    }

    /// ℤ/n acting on itself by rotation; element `k` is rotation by `k`.
    pub fn cyclic(n: usize) -> Self {
        let elements = (0..n)
            .map(|k| Permutation { images: (0..n).map(|i| (i + k) % n).collect() })
            .collect();
        Self::from_elements(elements)
    }

    pub fn symmetric(n: usize) -> Self {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Permutation::from_cycles(n, &[vec![1, 2]]).unwrap());
            gens.push(Permutation::from_cycles(n, &[(1..=n).collect()]).unwrap());
        }
        Self::generated_by_or_trivial(&gens, n)
    }

    pub fn alternating(n: usize) -> Self {
        let gens: Vec<Permutation> =
            (3..=n).map(|k| Permutation::from_cycles(n, &[vec![1, 2, k]]).unwrap()).collect();
        Self::generated_by_or_trivial(&gens, n)
    }

    /// Dihedral group of order `2n` on `n` points.
    pub fn dihedral(n: usize) -> Self {
        let rot = Permutation::from_cycles(n, &[(1..=n).collect()]).unwrap();
        let refl = Permutation::from_images((0..n).map(|i| (n - i) % n).collect()).unwrap();
        Self::generated_by_or_trivial(&[rot, refl], n)
    }

    fn generated_by_or_trivial(gens: &[Permutation], n: usize) -> Self {
        if gens.is_empty() {
            return Self::from_elements(vec![Permutation::identity(n.max(1))]);
        }
        Self::generated_by(gens, DEFAULT_GROUP_LIMIT).expect("small standard group")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_involution(&self, a: usize) -> bool {
        a != 0 && self.mul(a, a) == 0
    }

    /// Sorted element indices of the subgroup generated by `gens`.
    pub fn generate(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut q = VecDeque::from([0]);
        while let Some(x) = q.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    q.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    pub fn generates(&self, gens: &[usize]) -> bool {
        self.generate(gens).len() == self.order()
    }

    /// Every subgroup, each as a sorted element list, ordered by size then
    /// content.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
        let cyclic: Vec<Vec<usize>> = (0..self.order()).map(|g| self.generate(&[g])).collect();
        for c in &cyclic {
            found.insert(c.clone());
        }
        let mut frontier: Vec<Vec<usize>> = found.iter().cloned().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                for c in &cyclic {
                    let mut gens = h.clone();
                    gens.extend(c.iter().copied());
                    let j = self.generate(&gens);
                    if found.insert(j.clone()) {
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// `g⁻¹ H g` as a sorted list.
    pub fn conjugate(&self, h: &[usize], g: usize) -> Vec<usize> {
        let gi = self.inv(g);
        let mut out: Vec<usize> = h.iter().map(|&x| self.mul(self.mul(gi, x), g)).collect();
        out.sort_unstable();
        out
    }

    pub fn normalizer(&self, h: &[usize]) -> Vec<usize> {
        let mut hs = h.to_vec();
        hs.sort_unstable();
        (0..self.order()).filter(|&g| self.conjugate(&hs, g) == hs).collect()
    }

    pub fn is_normal(&self, h: &[usize]) -> bool {
        self.normalizer(h).len() == self.order()
    }

    /// Right cosets `Hg`, each sorted, listed in order of first appearance
    /// when the elements are scanned by index. The coset of `H` comes first.
    pub fn right_cosets(&self, h: &[usize]) -> Vec<Vec<usize>> {
        let mut which = vec![usize::MAX; self.order()];
        let mut out = Vec::new();
        for g in 0..self.order() {
            if which[g] != usize::MAX {
                continue;
            }
            let mut c: Vec<usize> = h.iter().map(|&x| self.mul(x, g)).collect();
            c.sort_unstable();
            for &x in &c {
                which[x] = out.len();
            }
            out.push(c);
        }
        out
    }

    /// The right action of `gens` on the right cosets of `h`, with order-two
    /// classes for involutions. The coset `H` is point 0.
    pub fn coset_action(&self, h: &[usize], gens: &[usize], names: &[String]) -> Result<PermAction, PermError> {
        let cosets = self.right_cosets(h);
        let mut which = vec![0; self.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &x in c {
                which[x] = i;
            }
        }
        let mut symbols = Vec::with_capacity(gens.len());
        let mut perms = Vec::with_capacity(gens.len());
        for (k, &g) in gens.iter().enumerate() {
            let order = if self.is_involution(g) { OrderClass::Order2 } else { OrderClass::Infinite };
            symbols.push((names[k].as_str(), order));
            let images = cosets.iter().map(|c| which[self.mul(c[0], g)]).collect();
            perms.push(Permutation::from_images(images)?);
        }
        let alphabet = Alphabet::from_multiset(&symbols)?;
        PermAction::new(alphabet, perms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a7() -> Permutation {
        Permutation::parse_cycles("(1,3,4,5,6,7,2)", 7).unwrap()
    }

    fn b7() -> Permutation {
        Permutation::parse_cycles("(2,4,6,1,7,5,3)", 7).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let p = Permutation::parse_cycles("(4,3,6)", 7).unwrap();
        assert_eq!(p.apply(3), 2);
        assert_eq!(p.apply(2), 5);
        assert_eq!(p.apply(5), 3);
        assert_eq!(p.to_string(), "(3,6,4)");
        assert!(Permutation::parse_cycles("()", 5).unwrap().is_identity());
        assert_eq!(Permutation::parse_cycles(&a7().to_string(), 7).unwrap(), a7());
        assert!(Permutation::parse_cycles("(1,8)", 7).is_err());
        assert!(Permutation::parse_cycles("(1,2", 7).is_err());
        assert!(Permutation::parse_cycles("(1,1)", 7).is_err());
    }

    #[test]
    fn right_action_product() {
        let p = Permutation::parse_cycles("(1,2)", 3).unwrap();
        let q = Permutation::parse_cycles("(2,3)", 3).unwrap();
        // 1 -> 2 under p, then 2 -> 3 under q
        assert_eq!(p.then(&q).apply(0), 2);
    }

    #[test]
    fn a7_identities() {
        let alph = Alphabet::free(&["a", "b"]);
        let act = PermAction::new(alph, vec![a7(), b7()]).unwrap();
        let p = check_identity("b a^-2 b^-1 a^2", &act).unwrap();
        assert_eq!(p, Permutation::parse_cycles("(4,3,6)", 7).unwrap());
        assert_eq!(act.group_order().unwrap(), 2520);
    }

    #[test]
    fn small_orders() {
        let t = Permutation::parse_cycles("(1,2)", 3).unwrap();
        assert_eq!(group_order(&[t]).unwrap(), 2);
        let a5 = Permutation::parse_cycles("(1,3,4,5,2)", 5).unwrap();
        let b5 = Permutation::parse_cycles("(2,4,1,5,3)", 5).unwrap();
        assert_eq!(b5.then(&b5), a5);
        assert_eq!(group_order(&[a5.clone(), b5]).unwrap(), group_order(&[a5]).unwrap());
    }

    #[test]
    fn normalizers_in_s3() {
        let s3 = [
            Permutation::parse_cycles("(1,2)", 3).unwrap(),
            Permutation::parse_cycles("(1,2,3)", 3).unwrap(),
        ];
        let t = [Permutation::parse_cycles("(1,2)", 3).unwrap()];
        assert_eq!(normalizer(&t, &s3).unwrap().len(), 2);
        let c = [Permutation::parse_cycles("(1,2,3)", 3).unwrap()];
        assert_eq!(normalizer(&c, &s3).unwrap().len(), 6);
    }

    #[test]
    fn normalizer_matches_brute_force_conjugation() {
        let g = FiniteGroup::symmetric(4);
        for h in g.subgroups() {
            let n = g.normalizer(&h);
            let conjugates: std::collections::BTreeSet<Vec<usize>> =
                (0..g.order()).map(|x| g.conjugate(&h, x)).collect();
            assert_eq!(g.order(), n.len() * conjugates.len());
            assert!(h.iter().all(|x| n.contains(x)));
        }
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(FiniteGroup::symmetric(3).subgroups().len(), 6);
        assert_eq!(FiniteGroup::symmetric(4).subgroups().len(), 30);
        assert_eq!(FiniteGroup::alternating(4).subgroups().len(), 10);
        assert_eq!(FiniteGroup::cyclic(6).subgroups().len(), 4);
    }

    #[test]
    fn order_is_lcm_of_cycles() {
        let p = Permutation::parse_cycles("(1,2)(3,4,5)", 5).unwrap();
        assert_eq!(p.order(), 6);
        assert!(p.pow(6).is_identity());
        assert_eq!(p.pow(-1), p.inverse());
    }

    #[test]
    fn coset_action_has_index_points() {
        let g = FiniteGroup::symmetric(3);
        let h = g.generate(&[g.index_of(&Permutation::parse_cycles("(1,2)", 3).unwrap()).unwrap()]);
        let gens: Vec<usize> = (1..g.order()).collect();
        let names: Vec<String> = (0..gens.len()).map(|i| format!("g{i}")).collect();
        let act = g.coset_action(&h, &gens, &names).unwrap();
        assert_eq!(act.points, 3);
    }
}
