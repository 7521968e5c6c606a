//! Reduced words in free products of copies of ℤ and ℤ/2ℤ.
//!
//! An [`Alphabet`] lists the generators together with their order class.
//! Generators of order two are their own inverse, so a [`Letter`] over such a
//! symbol always carries [`Sign::Pos`]. With that convention the only
//! cancellations are adjacent `ℓ ℓ⁻¹` pairs, which makes free reduction a
//! single stack pass.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("symbol index {0} out of range for alphabet of {1} symbols")]
    InvalidSymbol(usize, usize),
    #[error("negative sign on order-two symbol {0}")]
    SignOnInvolution(String),
    #[error("unknown generator name {0:?}")]
    UnknownName(String),
    #[error("malformed token {0:?}")]
    MalformedToken(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
}

/// Order of a generator in the free product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderClass {
    #[serde(rename = "2")]
    Order2,
    #[serde(rename = "inf")]
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub order: OrderClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

/// A generator or the inverse of a generator.
///
/// Ordering is lexicographic on `(symbol, sign)` with `Pos < Neg`; this is the
/// global tie-break order used by every enumeration in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub symbol: usize,
    pub sign: Sign,
}

impl Letter {
    pub const fn pos(symbol: usize) -> Self {
        Letter { symbol, sign: Sign::Pos }
    }

    pub const fn neg(symbol: usize) -> Self {
        Letter { symbol, sign: Sign::Neg }
    }
}

/// A sequence of letters. Not necessarily reduced; see [`Alphabet::normalize`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Prefix of length `n` (clamped).
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn pushed(&self, l: Letter) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(l);
        Word(v)
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// Length-then-lexicographic comparison.
pub fn shortlex_cmp(u: &Word, v: &Word) -> Ordering {
    u.len().cmp(&v.len()).then_with(|| u.0.cmp(&v.0))
}

/// Generators of a group of the form `(∗ℤ) ∗ (∗ℤ/2ℤ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlphabetRepr", into = "AlphabetRepr")]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    // dense letter list in tie-break order, and each letter's position in it
    letters: Vec<Letter>,
    letter_pos: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct AlphabetRepr {
    symbols: Vec<Symbol>,
}

impl TryFrom<AlphabetRepr> for Alphabet {
    type Error = WordError;
    fn try_from(r: AlphabetRepr) -> Result<Self, WordError> {
        Alphabet::new(r.symbols)
    }
}

impl From<Alphabet> for AlphabetRepr {
    fn from(a: Alphabet) -> Self {
        AlphabetRepr { symbols: a.symbols }
    }
}

impl Alphabet {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, WordError> {
        let mut seen = HashSet::new();
        for s in &symbols {
            if s.name.is_empty() || s.name.contains(char::is_whitespace) || s.name.contains('^') {
                return Err(WordError::MalformedToken(s.name.clone()));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(WordError::DuplicateName(s.name.clone()));
            }
        }
        let mut letters = Vec::new();
        let mut letter_pos = Vec::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            let p = letters.len();
            letters.push(Letter::pos(i));
            match s.order {
                OrderClass::Order2 => letter_pos.push([p, p]),
                OrderClass::Infinite => {
                    letters.push(Letter::neg(i));
                    letter_pos.push([p, p + 1]);
                }
            }
        }
        Ok(Alphabet { symbols, letters, letter_pos })
    }

    /// Builds an alphabet from `(name, order)` pairs.
    pub fn from_pairs(pairs: &[(&str, OrderClass)]) -> Result<Self, WordError> {
        Self::new(
            pairs
                .iter()
                .map(|(n, o)| Symbol { name: n.to_string(), order: *o })
                .collect(),
        )
    }

    /// Free group on the given names.
    pub fn free(names: &[&str]) -> Self {
        Self::from_pairs(&names.iter().map(|n| (*n, OrderClass::Infinite)).collect::<Vec<_>>())
            .expect("valid free alphabet")
    }

    /// Parses the compact form `"x:inf,a:2"`.
    pub fn parse_spec(spec: &str) -> Result<Self, WordError> {
        let mut pairs = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, order) = part
                .split_once(':')
                .ok_or_else(|| WordError::MalformedToken(part.to_string()))?;
            let order = match order.trim() {
                "2" => OrderClass::Order2,
                "inf" => OrderClass::Infinite,
                _ => return Err(WordError::MalformedToken(part.to_string())),
            };
            pairs.push(Symbol { name: name.trim().to_string(), order });
        }
        Self::new(pairs)
    }

    /// Realizes a generating multiset: repeated display names get an ordinal
    /// suffix so that every symbol stays distinct.
    pub fn from_multiset(entries: &[(&str, OrderClass)]) -> Result<Self, WordError> {
        let mut count = std::collections::HashMap::<&str, usize>::new();
        for (n, _) in entries {
            *count.entry(n).or_default() += 1;
        }
        let mut seen = std::collections::HashMap::<&str, usize>::new();
        let symbols = entries
            .iter()
            .map(|(n, o)| {
                let name = if count[n] > 1 {
                    let k = seen.entry(n).or_default();
                    *k += 1;
                    format!("{n}#{k}")
                } else {
                    n.to_string()
                };
                Symbol { name, order: *o }
            })
            .collect();
        Self::new(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn order(&self, symbol: usize) -> OrderClass {
        self.symbols[symbol].order
    }

    /// Number of order-two symbols plus twice the number of infinite ones:
    /// the vertex degree of every Schreier graph over this alphabet.
    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    /// All letters `X±` in tie-break order.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Dense index of a letter in [`Self::letters`].
    pub fn letter_index(&self, l: Letter) -> usize {
        let p = self.letter_pos[l.symbol];
        match l.sign {
            Sign::Pos => p[0],
            Sign::Neg => p[1],
        }
    }

    pub fn letter_at(&self, idx: usize) -> Letter {
        self.letters[idx]
    }

    pub fn inverse(&self, l: Letter) -> Letter {
        match self.symbols[l.symbol].order {
            OrderClass::Order2 => l,
            OrderClass::Infinite => Letter {
                symbol: l.symbol,
                sign: match l.sign {
                    Sign::Pos => Sign::Neg,
                    Sign::Neg => Sign::Pos,
                },
            },
        }
    }

    /// Index of the inverse letter, for table-driven code.
    pub fn inverse_index(&self, idx: usize) -> usize {
        self.letter_index(self.inverse(self.letters[idx]))
    }

    pub fn check_letter(&self, l: Letter) -> Result<(), WordError> {
        let s = self
            .symbols
            .get(l.symbol)
            .ok_or(WordError::InvalidSymbol(l.symbol, self.symbols.len()))?;
        if s.order == OrderClass::Order2 && l.sign == Sign::Neg {
            return Err(WordError::SignOnInvolution(s.name.clone()));
        }
        Ok(())
    }

    pub fn is_reduced(&self, w: &Word) -> bool {
        w.0.windows(2).all(|p| p[1] != self.inverse(p[0]))
    }

    /// Free reduction. Deletes adjacent `ℓ ℓ⁻¹` pairs (including `a a` for
    /// order-two `a`) until none remain; the result is independent of the
    /// deletion order.
    pub fn normalize(&self, w: &Word) -> Result<Word, WordError> {
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        for &l in &w.0 {
            self.check_letter(l)?;
            if out.last().is_some_and(|&t| t == self.inverse(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word(out))
    }

    /// `normalize(u·v)`.
    pub fn multiply(&self, u: &Word, v: &Word) -> Result<Word, WordError> {
        let mut out = self.normalize(u)?.0;
        for &l in &v.0 {
            self.check_letter(l)?;
            if out.last().is_some_and(|&t| t == self.inverse(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word(out))
    }

    pub fn invert(&self, w: &Word) -> Word {
        Word(w.0.iter().rev().map(|&l| self.inverse(l)).collect())
    }

    /// Geodesic length `|w|_X`.
    pub fn length(&self, w: &Word) -> Result<usize, WordError> {
        Ok(self.normalize(w)?.len())
    }

    /// All reduced words of length at most `radius`, in shortlex order.
    pub fn ball(&self, radius: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut level_start = 0;
        for _ in 0..radius {
            let level_end = out.len();
            for i in level_start..level_end {
                let last = out[i].last();
                for &l in &self.letters {
                    if last.is_some_and(|t| self.inverse(t) == l) {
                        continue;
                    }
                    let w = out[i].pushed(l);
                    out.push(w);
                }
            }
            if out.len() == level_end {
                break;
            }
            level_start = level_end;
        }
        out
    }

    /// Number of reduced words of length at most `radius`.
    pub fn ball_size(&self, radius: usize) -> usize {
        let d = self.degree();
        if d == 0 {
            return 1;
        }
        let mut total = 1usize;
        let mut level = d;
        for n in 1..=radius {
            total += level;
            if n == 1 && d == 1 {
                break;
            }
            level *= d - 1;
            if level == 0 {
                break;
            }
        }
        total
    }

    pub fn letter_name(&self, l: Letter) -> String {
        let name = &self.symbols[l.symbol].name;
        match l.sign {
            Sign::Pos => name.clone(),
            Sign::Neg => format!("{name}^-1"),
        }
    }

    pub fn parse_letter(&self, tok: &str) -> Result<Letter, WordError> {
        let (name, neg) = match tok.strip_suffix("^-1") {
            Some(n) => (n, true),
            None => (tok, false),
        };
        let idx = self
            .symbols
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| WordError::UnknownName(name.to_string()))?;
        let l = if neg && self.symbols[idx].order == OrderClass::Infinite {
            Letter::neg(idx)
        } else {
            Letter::pos(idx)
        };
        Ok(l)
    }

    /// Parses whitespace-separated tokens `x`, `x^-1`, or `x^k` for a nonzero
    /// integer `k`. The empty string, `1` and `ε` denote the empty word. The
    /// result is not normalized.
    pub fn parse_word(&self, s: &str) -> Result<Word, WordError> {
        let s = s.trim();
        if s.is_empty() || s == "1" || s == "ε" {
            return Ok(Word::empty());
        }
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            match tok.split_once('^') {
                None => out.push(self.parse_letter(tok)?),
                Some((name, exp)) => {
                    let k: i64 = exp
                        .parse()
                        .map_err(|_| WordError::MalformedToken(tok.to_string()))?;
                    if k == 0 {
                        return Err(WordError::MalformedToken(tok.to_string()));
                    }
                    let base = self.parse_letter(name)?;
                    let l = if k < 0 { self.inverse(base) } else { base };
                    out.extend(std::iter::repeat_n(l, k.unsigned_abs() as usize));
                }
            }
        }
        Ok(Word(out))
    }

    /// Inverse of [`Self::parse_word`]; the empty word prints as `""`.
    pub fn format_word(&self, w: &Word) -> String {
        w.0.iter().map(|&l| self.letter_name(l)).collect::<Vec<_>>().join(" ")
    }

    pub fn display<'a>(&'a self, w: &'a Word) -> WordDisplay<'a> {
        WordDisplay { alphabet: self, word: w }
    }
}

pub struct WordDisplay<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            f.write_str("ε")
        } else {
            f.write_str(&self.alphabet.format_word(self.word))
        }
    }
}
