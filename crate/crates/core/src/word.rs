//! Reduced words in a free group over an arbitrary ordered alphabet.
//!
//! The same machinery serves two alphabets: abstract basis letters (`u32`,
//! printed `a`, `b`, ... with uppercase inverses) used by the Stallings
//! code, and loop generators of an unfolded graph used by the mapping class
//! code.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A generator or its formal inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter<G> {
    pub gen: G,
    pub inverse: bool,
}

impl<G: Clone> Letter<G> {
    pub fn new(gen: G, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(&self) -> Self {
        Letter { gen: self.gen.clone(), inverse: !self.inverse }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word<G> {
    letters: Vec<Letter<G>>,
}

impl<G> Default for Word<G> {
    fn default() -> Self {
        Word { letters: Vec::new() }
    }
}

/// Basis words over `u32` letters.
pub type FWord = Word<u32>;

impl<G: Clone + Eq> Word<G> {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn gen(g: G) -> Self {
        Word { letters: vec![Letter::new(g, false)] }
    }

    pub fn gen_inv(g: G) -> Self {
        Word { letters: vec![Letter::new(g, true)] }
    }

    /// Builds a word from arbitrary letters, freely reducing.
    pub fn from_letters<I: IntoIterator<Item = Letter<G>>>(letters: I) -> Self {
        let mut out: Vec<Letter<G>> = Vec::new();
        for l in letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter<G>] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.letters.clone();
        for l in &other.letters {
            push_reduced(&mut out, l.clone());
        }
        Word { letters: out }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `v · self · v⁻¹`
    pub fn conjugate_by(&self, v: &Self) -> Self {
        v.mul(self).mul(&v.inverse())
    }

    /// Splits `self = p · c · p⁻¹` with `c` cyclically reduced.
    pub fn cyclic_split(&self) -> (Self, Self) {
        let n = self.letters.len();
        let mut i = 0;
        while 2 * i + 1 < n && self.letters[i] == self.letters[n - 1 - i].inv() {
            i += 1;
        }
        let prefix = Word { letters: self.letters[..i].to_vec() };
        let core = Word { letters: self.letters[i..n - i].to_vec() };
        (prefix, core)
    }

    pub fn cyclic_reduction(&self) -> Self {
        self.cyclic_split().1
    }

    /// Rotation `c[k..] c[..k]` of the letter sequence.
    fn rotate(&self, k: usize) -> Self {
        let mut v = self.letters[k..].to_vec();
        v.extend_from_slice(&self.letters[..k]);
        Word { letters: v }
    }

    /// Shortest `r` with `self = r^m`, for cyclically reduced `self`.
    fn primitive_root(&self) -> Self {
        let n = self.letters.len();
        for p in 1..=n {
            if n % p == 0 && (0..n).all(|i| self.letters[i] == self.letters[i % p]) {
                return Word { letters: self.letters[..p].to_vec() };
            }
        }
        self.clone()
    }

    /// True iff the two words are conjugate in the free group.
    pub fn is_conjugate(&self, other: &Self) -> bool {
        let a = self.cyclic_reduction();
        let b = other.cyclic_reduction();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        (0..a.len()).any(|k| a.rotate(k) == b)
    }

    /// Applies a substitution `g ↦ φ(g)` letterwise.
    pub fn substitute<H: Clone + Eq, F: FnMut(&G) -> Word<H>>(&self, mut phi: F) -> Word<H> {
        let mut out: Vec<Letter<H>> = Vec::new();
        for l in &self.letters {
            let img = phi(&l.gen);
            if l.inverse {
                for m in img.letters.iter().rev() {
                    push_reduced(&mut out, m.inv());
                }
            } else {
                for m in img.letters {
                    push_reduced(&mut out, m);
                }
            }
        }
        Word { letters: out }
    }

    pub fn generators(&self) -> impl Iterator<Item = &G> {
        self.letters.iter().map(|l| &l.gen)
    }
}

impl<G: Ord> Word<G> {
    /// Length first, then lexicographic.
    pub fn shortlex_cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

fn push_reduced<G: Clone + Eq>(out: &mut Vec<Letter<G>>, l: Letter<G>) {
    if let Some(last) = out.last() {
        if last.gen == l.gen && last.inverse != l.inverse {
            out.pop();
            return;
        }
    }
    out.push(l);
}

/// Solutions of `v · a · v⁻¹ = b` are `v₀ · z^k` for the returned `(v₀, z)`;
/// `z` is empty when `a` is trivial (then every `v` works).
fn conjugator_family<G: Clone + Eq>(a: &Word<G>, b: &Word<G>) -> Option<(Word<G>, Word<G>)> {
    let (p, c) = a.cyclic_split();
    let (q, d) = b.cyclic_split();
    if c.len() != d.len() {
        return None;
    }
    if c.is_empty() {
        return Some((Word::identity(), Word::identity()));
    }
    let k = (0..c.len()).find(|&k| c.rotate(k) == d)?;
    // s⁻¹ c s = d for s = c[..k]
    let s = Word { letters: c.letters[..k].to_vec() };
    let v0 = q.mul(&s.inverse()).mul(&p.inverse());
    let z = c.primitive_root().conjugate_by(&p);
    Some((v0, z))
}

/// Finds `v` with `v · aᵢ · v⁻¹ = bᵢ` for every pair.
///
/// The first nontrivial `aᵢ` fixes the solution set to a coset `v₀⟨z⟩`; its
/// powers are scanned while `|v| ≤ |v₀| + max(|aᵢ| + |bᵢ|) + 2`.
pub fn find_conjugator<G: Clone + Eq + Ord>(pairs: &[(Word<G>, Word<G>)]) -> Option<Word<G>> {
    for (a, b) in pairs {
        if a.cyclic_reduction().len() != b.cyclic_reduction().len() {
            return None;
        }
    }
    let pivot = pairs.iter().position(|(a, _)| !a.is_identity());
    let Some(pivot) = pivot else {
        return if pairs.iter().all(|(_, b)| b.is_identity()) {
            Some(Word::identity())
        } else {
            None
        };
    };
    let (v0, z) = conjugator_family(&pairs[pivot].0, &pairs[pivot].1)?;
    let bound = v0.len() + pairs.iter().map(|(a, b)| a.len() + b.len()).max().unwrap_or(0) + 2;
    let works = |v: &Word<G>| pairs.iter().all(|(a, b)| &a.conjugate_by(v) == b);
    if works(&v0) {
        return Some(v0);
    }
    // |v₀ zᵏ| grows linearly in k once past the cancellation zone.
    let k_max = (bound + v0.len() + z.len() + 2) as i64;
    for k in 1..=k_max {
        for kk in [k, -k] {
            let v = v0.mul(&z.pow(kk));
            if v.len() <= bound && works(&v) {
                return Some(v);
            }
        }
    }
    None
}

impl fmt::Display for Word<u32> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", basis_char(l.gen, l.inverse))?;
        }
        Ok(())
    }
}

/// `0 → a`, `1 → b`, ...; indices past 25 print as `x26` / `X26`.
pub fn basis_char(g: u32, inverse: bool) -> String {
    if g < 26 {
        let c = (b'a' + g as u8) as char;
        if inverse {
            c.to_ascii_uppercase().to_string()
        } else {
            c.to_string()
        }
    } else if inverse {
        format!("X{g}")
    } else {
        format!("x{g}")
    }
}

/// Parses `acBC`-style words: lowercase is a generator, uppercase its inverse.
/// `x12` / `X12` address generators past `z`. `1` or the empty string is the
/// identity.
pub fn parse_basis_word(s: &str) -> Result<FWord, String> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Word::identity());
    }
    let chars: Vec<char> = s.chars().collect();
    let mut letters = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if (c == 'x' || c == 'X') && i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let n: u32 = chars[i + 1..j].iter().collect::<String>().parse().map_err(|e| format!("{e}"))?;
            letters.push(Letter::new(n, c == 'X'));
            i = j;
        } else if c.is_ascii_lowercase() {
            letters.push(Letter::new((c as u8 - b'a') as u32, false));
            i += 1;
        } else if c.is_ascii_uppercase() {
            letters.push(Letter::new((c.to_ascii_lowercase() as u8 - b'a') as u32, true));
            i += 1;
        } else if c.is_whitespace() || c == '.' {
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?} in word {s:?}"));
        }
    }
    Ok(Word::from_letters(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FWord {
        parse_basis_word(s).unwrap()
    }

    #[test]
    fn reduction_and_inverse() {
        assert_eq!(w("aAb"), w("b"));
        assert_eq!(w("abBA"), FWord::identity());
        assert_eq!(w("ab").inverse(), w("BA"));
        assert_eq!(w("ab").mul(&w("Bc")), w("ac"));
        assert_eq!(w("acBC").to_string(), "acBC");
    }

    #[test]
    fn cyclic_split_roundtrip() {
        let x = w("abcBA");
        let (p, c) = x.cyclic_split();
        assert_eq!(c.conjugate_by(&p), x);
        assert_eq!(p, w("ab"));
        assert_eq!(c, w("c"));
    }

    #[test]
    fn conjugacy() {
        assert!(w("ab").is_conjugate(&w("ba")));
        assert!(w("aba").is_conjugate(&w("baa")));
        assert!(!w("ab").is_conjugate(&w("aB")));
        assert!(w("cAbaC").is_conjugate(&w("b")));
    }

    #[test]
    fn conjugator_search() {
        let v = w("ab");
        let pairs = vec![(w("a"), w("a").conjugate_by(&v)), (w("b"), w("b").conjugate_by(&v))];
        assert_eq!(find_conjugator(&pairs), Some(v));
        // only one generator: any element of v·⟨a⟩ works, the search returns one
        let pairs = vec![(w("a"), w("a").conjugate_by(&w("ba")))];
        let got = find_conjugator(&pairs).unwrap();
        assert_eq!(w("a").conjugate_by(&got), w("a").conjugate_by(&w("ba")));
        // swap is not inner
        let pairs = vec![(w("a"), w("b")), (w("b"), w("a"))];
        assert_eq!(find_conjugator(&pairs), None);
        // needs a nonzero power of the centralizer generator
        let v = w("aab");
        let pairs = vec![(w("a"), w("a").conjugate_by(&v)), (w("b"), w("b").conjugate_by(&v))];
        assert_eq!(find_conjugator(&pairs), Some(v));
    }

    #[test]
    fn substitution() {
        let phi = |g: &u32| if *g == 1 { w("ab") } else { Word::gen(*g) };
        assert_eq!(w("bA").substitute(phi), w("abA"));
        assert_eq!(w("B").substitute(phi), w("BA"));
    }

    #[test]
    fn big_indices_parse() {
        assert_eq!(w("x30X30"), FWord::identity());
        assert_eq!(w("x30").to_string(), "x30");
    }
}
