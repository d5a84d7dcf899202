//! Reduced words in the free group on `g` generators.
//!
//! Letters are written `a1, A1, a2, A2, …` where a capital letter is the
//! inverse generator, so `"a1A2a1"` is `γ₁γ₂⁻¹γ₁`. The alphabet is ordered
//! `a1 < A1 < a2 < A2 < …`; every enumeration below follows that order,
//! which groups words by their initial letter.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A generator `γ_index` or its inverse. `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    index: u32,
    inverse: bool,
}

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        assert!(index >= 1, "letters are 1-based");
        Self { index: index as u32, inverse }
    }

    pub fn generator(index: usize) -> Self {
        Self::new(index, false)
    }

    /// Position in the alphabet `a1, A1, a2, A2, …` (0-based).
    pub fn from_ordinal(k: usize) -> Self {
        Self::new(k / 2 + 1, k % 2 == 1)
    }

    pub fn ordinal(&self) -> usize {
        2 * (self.index as usize - 1) + self.inverse as usize
    }

    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn sign(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inv(&self) -> Self {
        Self { index: self.index, inverse: !self.inverse }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.inverse { 'A' } else { 'a' }, self.index)
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

/// Freely reduces a letter sequence.
pub fn reduce(seq: &[Letter]) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(seq.len());
    for &l in seq {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// The reduced word of a letter sequence.
    pub fn from_letters(seq: &[Letter]) -> Self {
        reduce(seq)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn generator(index: usize) -> Self {
        Word(vec![Letter::generator(index)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != w[0].inv())
    }

    /// Largest generator index used (0 for the identity).
    pub fn max_index(&self) -> usize {
        self.0.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    /// The reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut seq = self.0.clone();
        seq.extend_from_slice(&other.0);
        reduce(&seq)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// `γ_index^k` as a reduced word.
    pub fn power(index: usize, k: i64) -> Word {
        let l = Letter::new(index, k < 0);
        Word(vec![l; k.unsigned_abs() as usize])
    }

    /// Exponent sum of each generator, indices `1..=g`.
    pub fn exponent_sums(&self, g: usize) -> Vec<i64> {
        let mut v = vec![0; g];
        for l in &self.0 {
            v[l.index() - 1] += l.sign();
        }
        v
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses `a1A2…`; the empty string (or `"1"`) is the identity. The
    /// result is freely reduced.
    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let bytes = s.as_bytes();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let inverse = match bytes[i] {
                b'a' => false,
                b'A' => true,
                _ => return Err(Error::WordParse(s.to_string())),
            };
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let index: usize = s[start..i].parse().map_err(|_| Error::WordParse(s.to_string()))?;
            if index == 0 {
                return Err(Error::WordParse(s.to_string()));
            }
            letters.push(Letter::new(index, inverse));
        }
        Ok(reduce(&letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of reduced words of length `n` over `g` generators.
pub fn word_count(g: usize, n: usize) -> u128 {
    if n == 0 {
        1
    } else {
        2 * g as u128 * (2 * g as u128 - 1).pow(n as u32 - 1)
    }
}

/// Streams all reduced words of length exactly `n`, in alphabet order.
#[derive(Debug, Clone)]
pub struct WordIter {
    alphabet: usize,
    n: usize,
    current: Option<Vec<usize>>,
}

impl WordIter {
    fn smallest_after(&self, prev: Option<usize>, from: usize) -> Option<usize> {
        (from..self.alphabet).find(|&k| !prev.is_some_and(|p| k == (p ^ 1)))
    }

    fn fill_from(&self, word: &mut Vec<usize>, pos: usize) -> bool {
        word.truncate(pos);
        while word.len() < self.n {
            match self.smallest_after(word.last().copied(), 0) {
                Some(k) => word.push(k),
                None => return false,
            }
        }
        true
    }
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.take()?;
        let out = Word(cur.iter().map(|&k| Letter::from_ordinal(k)).collect());
        // advance the odometer
        let mut next = cur;
        let mut pos = next.len();
        let mut advanced = false;
        while pos > 0 {
            pos -= 1;
            let prev = if pos == 0 { None } else { Some(next[pos - 1]) };
            if let Some(k) = self.smallest_after(prev, next[pos] + 1) {
                next[pos] = k;
                advanced = self.fill_from(&mut next, pos + 1);
                break;
            }
        }
        if advanced {
            self.current = Some(next);
        }
        Some(out)
    }
}

/// All reduced words of length exactly `n` over `g ≥ 1` generators, grouped
/// by initial letter. There are `2g(2g-1)^(n-1)` of them for `n ≥ 1`.
pub fn enumerate_words(g: usize, n: usize) -> WordIter {
    let mut it = WordIter { alphabet: 2 * g, n, current: None };
    if g == 0 && n > 0 {
        return it;
    }
    let mut start = Vec::with_capacity(n);
    if it.fill_from(&mut start, 0) {
        it.current = Some(start);
    }
    it
}

/// Reduced words of length `0..=max_len`, shortest first.
pub fn words_up_to(g: usize, max_len: usize) -> impl Iterator<Item = Word> {
    (0..=max_len).flat_map(move |n| enumerate_words(g, n))
}

/// Runs `f` once per initial letter (in parallel) and returns the results in
/// alphabet order, so that combining them sequentially is deterministic.
pub fn map_initial_letters<T, F>(g: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Letter) -> T + Sync + Send,
{
    (0..2 * g).into_par_iter().map(|k| f(Letter::from_ordinal(k))).collect()
}

/// Depth-first walk over the nontrivial reduced words of length `1..=max_len`
/// that start with `first`, carrying a value along each prefix (for example
/// the Möbius map of the prefix). `visit` sees every word once.
pub fn walk_words_from<T, S, V>(g: usize, max_len: usize, first: Letter, root: &T, step: &S, visit: &mut V)
where
    S: Fn(&T, Letter) -> T,
    V: FnMut(&[Letter], &T),
{
    if max_len == 0 {
        return;
    }
    let mut prefix = vec![first];
    let value = step(root, first);
    walk_rec(g, max_len, &mut prefix, &value, step, visit);
}

fn walk_rec<T, S, V>(g: usize, max_len: usize, prefix: &mut Vec<Letter>, value: &T, step: &S, visit: &mut V)
where
    S: Fn(&T, Letter) -> T,
    V: FnMut(&[Letter], &T),
{
    visit(prefix, value);
    if prefix.len() == max_len {
        return;
    }
    let back = prefix.last().map(|l| l.inv());
    for k in 0..2 * g {
        let l = Letter::from_ordinal(k);
        if Some(l) == back {
            continue;
        }
        let next = step(value, l);
        prefix.push(l);
        walk_rec(g, max_len, prefix, &next, step, visit);
        prefix.pop();
    }
}

/// An ordered `g`-tuple of words used as a generating set.
///
/// `nielsen_verified` is true for bases produced from the standard basis by
/// Nielsen moves (and hence known to be free bases); bases assembled from
/// arbitrary words carry `false`. Equality and hashing ignore the flag.
#[derive(Debug, Clone, Serialize)]
pub struct Basis {
    pub elements: Vec<Word>,
    pub nielsen_verified: bool,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl Eq for Basis {}

impl Hash for Basis {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.elements.hash(state);
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, w) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "}}")
    }
}

impl Basis {
    pub fn standard(g: usize) -> Self {
        Self { elements: (1..=g).map(Word::generator).collect(), nielsen_verified: true }
    }

    /// A basis from arbitrary words (unverified).
    pub fn from_words(elements: Vec<Word>) -> Self {
        Self { elements, nielsen_verified: false }
    }

    pub fn genus(&self) -> usize {
        self.elements.len()
    }

    /// Rows are the exponent sums of each element.
    pub fn abelianization(&self) -> Vec<Vec<i64>> {
        let g = self.genus();
        self.elements.iter().map(|w| w.exponent_sums(g)).collect()
    }

    /// Determinant of the abelianization; `±1` for every free basis.
    pub fn abelian_determinant(&self) -> i64 {
        integer_determinant(&self.abelianization())
    }

    pub fn inverted(&self) -> Self {
        Self {
            elements: self.elements.iter().map(Word::inverse).collect(),
            nielsen_verified: self.nielsen_verified,
        }
    }

    pub fn apply(&self, mv: NielsenMove) -> Self {
        let mut e = self.elements.clone();
        match mv {
            NielsenMove::RightMultiply { target, by, inverse } => {
                let w = if inverse { e[by].inverse() } else { e[by].clone() };
                e[target] = e[target].concat(&w);
            }
            NielsenMove::LeftMultiply { target, by, inverse } => {
                let w = if inverse { e[by].inverse() } else { e[by].clone() };
                e[target] = w.concat(&e[target]);
            }
            NielsenMove::Invert(i) => e[i] = e[i].inverse(),
            NielsenMove::Swap(i, j) => e.swap(i, j),
        }
        Self { elements: e, nielsen_verified: self.nielsen_verified }
    }
}

/// Elementary Nielsen moves on positions of a basis (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NielsenMove {
    /// `γ_target -> γ_target · γ_by^{±1}`
    RightMultiply { target: usize, by: usize, inverse: bool },
    /// `γ_target -> γ_by^{±1} · γ_target`
    LeftMultiply { target: usize, by: usize, inverse: bool },
    Invert(usize),
    Swap(usize, usize),
}

/// Every elementary move available on a rank-`g` basis.
pub fn nielsen_moves(g: usize) -> Vec<NielsenMove> {
    let mut moves = Vec::new();
    for target in 0..g {
        for by in 0..g {
            if target == by {
                continue;
            }
            for inverse in [false, true] {
                moves.push(NielsenMove::RightMultiply { target, by, inverse });
                moves.push(NielsenMove::LeftMultiply { target, by, inverse });
            }
        }
    }
    moves.extend((0..g).map(NielsenMove::Invert));
    for i in 0..g {
        for j in i + 1..g {
            moves.push(NielsenMove::Swap(i, j));
        }
    }
    moves
}

/// The shifted basis: `α` kept in place and every other element `γ`
/// replaced by `γα`. `alpha_index` is 1-based.
pub fn shift_basis(basis: &Basis, alpha_index: usize) -> Result<Basis> {
    let g = basis.genus();
    if alpha_index == 0 || alpha_index > g {
        return Err(Error::InvalidArgument(format!("alpha index {alpha_index} not in 1..={g}")));
    }
    let alpha = &basis.elements[alpha_index - 1];
    let elements = basis
        .elements
        .iter()
        .enumerate()
        .map(|(i, w)| if i == alpha_index - 1 { w.clone() } else { w.concat(alpha) })
        .collect();
    Ok(Basis { elements, nielsen_verified: basis.nielsen_verified })
}

/// All bases reachable from the standard basis by at most `depth` elementary
/// moves, deduplicated by exact word equality, in breadth-first order.
pub fn enumerate_bases(g: usize, depth: usize) -> Vec<Basis> {
    let moves = nielsen_moves(g);
    let start = Basis::standard(g);
    let mut seen: HashSet<Basis> = HashSet::from([start.clone()]);
    let mut out = vec![start.clone()];
    let mut frontier = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for b in &frontier {
            for &mv in &moves {
                let nb = b.apply(mv);
                if seen.insert(nb.clone()) {
                    out.push(nb.clone());
                    next.push(nb);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Representatives of the double cosets `Γ_n \ Γ / Γ_m` of length at most
/// `max_len`: reduced words whose first letter is not `γ_n^{±1}` and whose
/// last letter is not `γ_m^{±1}`. The identity is included only when
/// `n != m`. Output is ordered by length, then alphabetically.
pub fn double_coset_reps(g: usize, n: usize, m: usize, max_len: usize) -> Vec<Word> {
    words_up_to(g, max_len)
        .filter(|w| match (w.first(), w.last()) {
            (Some(f), Some(l)) => f.index() != n && l.index() != m,
            _ => n != m,
        })
        .collect()
}

fn integer_determinant(rows: &[Vec<i64>]) -> i64 {
    // Bareiss fraction-free elimination
    let n = rows.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        let a = Letter::generator(1);
        let b = Letter::generator(2);
        assert_eq!(reduce(&[a, a.inv(), b]), Word::generator(2));
        assert_eq!(reduce(&[]), Word::identity());
        assert_eq!(reduce(&[a, b, b.inv(), a]), w("a1a1"));
        assert_eq!(reduce(&[a, b, b.inv(), a.inv()]), Word::identity());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("a1A2a1").to_string(), "a1A2a1");
        assert_eq!(w("a1A1a2").to_string(), "a2");
        assert_eq!(w("a12A3").letters(), &[Letter::generator(12), Letter::new(3, true)]);
        assert!("b1".parse::<Word>().is_err());
        assert!("a0".parse::<Word>().is_err());
        assert!("a".parse::<Word>().is_err());
        assert_eq!(w(""), Word::identity());
    }

    #[test]
    fn word_counts_small() {
        assert_eq!(enumerate_words(2, 1).count(), 4);
        assert_eq!(enumerate_words(2, 2).count(), 12);
        assert_eq!(enumerate_words(3, 3).count(), 150);
        assert_eq!(enumerate_words(2, 0).collect::<Vec<_>>(), vec![Word::identity()]);
        assert_eq!(enumerate_words(1, 5).count(), 2);
    }

    #[test]
    fn enumeration_is_grouped_by_initial_letter_and_reduced() {
        let words: Vec<Word> = enumerate_words(2, 3).collect();
        assert!(words.iter().all(|w| w.is_reduced() && w.len() == 3));
        let firsts: Vec<usize> = words.iter().map(|w| w.first().unwrap().ordinal()).collect();
        assert!(firsts.windows(2).all(|p| p[0] <= p[1]));
        let unique: HashSet<_> = words.iter().collect();
        assert_eq!(unique.len(), words.len());
    }

    #[test]
    fn walk_visits_every_word_once() {
        let mut seen = Vec::new();
        for k in 0..4 {
            walk_words_from(2, 3, Letter::from_ordinal(k), &0usize, &|d, _| d + 1, &mut |p: &[Letter], d: &usize| {
                assert_eq!(p.len(), *d);
                seen.push(Word(p.to_vec()));
            });
        }
        let expected: HashSet<Word> = (1..=3).flat_map(|n| enumerate_words(2, n)).collect();
        assert_eq!(seen.len(), expected.len());
        assert_eq!(seen.into_iter().collect::<HashSet<_>>(), expected);
    }

    #[test]
    fn shift_examples() {
        let ab = Basis::standard(2);
        assert_eq!(shift_basis(&ab, 1).unwrap().elements, vec![w("a1"), w("a2a1")]);
        let abc = Basis::standard(3);
        assert_eq!(shift_basis(&abc, 2).unwrap().elements, vec![w("a1a2"), w("a2"), w("a3a2")]);
        let twice = shift_basis(&shift_basis(&ab, 1).unwrap(), 1).unwrap();
        assert_eq!(twice.elements, vec![w("a1"), w("a2a1a1")]);
        assert!(shift_basis(&ab, 3).is_err());
    }

    #[test]
    fn bases_depth_examples() {
        assert_eq!(enumerate_bases(2, 0), vec![Basis::standard(2)]);
        let one = enumerate_bases(1, 5);
        assert_eq!(one.len(), 2);
        assert!(one.contains(&Basis::from_words(vec![w("A1")])));

        // brute force: distinct results of all single moves, plus the start
        let start = Basis::standard(2);
        let mut distinct: HashSet<Basis> = nielsen_moves(2).into_iter().map(|m| start.apply(m)).collect();
        distinct.insert(start);
        let depth1 = enumerate_bases(2, 1);
        assert_eq!(depth1.len(), distinct.len());
        assert_eq!(depth1.len(), 12);
        for expected in [vec![w("a1a2"), w("a2")], vec![w("a1"), w("a2a1")], vec![w("A1"), w("a2")], vec![w("a2"), w("a1")]] {
            assert!(depth1.contains(&Basis::from_words(expected)));
        }
    }

    #[test]
    fn abelian_determinants() {
        for b in enumerate_bases(3, 2) {
            assert_eq!(b.abelian_determinant().abs(), 1, "{b}");
        }
        assert_eq!(Basis::from_words(vec![w("a1a1"), w("a2")]).abelian_determinant(), 2);
    }

    #[test]
    fn double_coset_examples() {
        assert_eq!(double_coset_reps(2, 1, 2, 1), vec![Word::identity()]);
        assert_eq!(double_coset_reps(2, 1, 1, 1), vec![w("a2"), w("A2")]);
        assert_eq!(
            double_coset_reps(2, 1, 2, 2),
            vec![Word::identity(), w("a2a1"), w("a2A1"), w("A2a1"), w("A2A1")]
        );
        assert!(double_coset_reps(1, 1, 1, 6).is_empty());
    }
}
