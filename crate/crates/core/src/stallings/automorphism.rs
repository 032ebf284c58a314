use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::word::{basis_char, find_conjugator, parse_basis_word, FWord};

/// An endomorphism of the free group on letters `0..rank`, given by the
/// images of the basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automorphism {
    pub images: Vec<FWord>,
}

impl Automorphism {
    pub fn identity(rank: usize) -> Self {
        Automorphism { images: (0..rank as u32).map(FWord::gen).collect() }
    }

    pub fn new(images: Vec<FWord>) -> Self {
        Automorphism { images }
    }

    /// `x ↦ w x w⁻¹`
    pub fn conjugation(rank: usize, w: &FWord) -> Self {
        Automorphism { images: (0..rank as u32).map(|x| FWord::gen(x).conjugate_by(w)).collect() }
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    /// Letters past the rank are left fixed.
    pub fn apply(&self, w: &FWord) -> FWord {
        w.substitute(|&g| self.images.get(g as usize).cloned().unwrap_or_else(|| FWord::gen(g)))
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        let n = self.rank().max(other.rank());
        Automorphism {
            images: (0..n as u32)
                .map(|x| self.apply(&other.images.get(x as usize).cloned().unwrap_or_else(|| FWord::gen(x))))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == FWord::gen(i as u32))
    }

    /// The inverse, computed by folding the wedge of image petals while
    /// tracking which basis element each edge came from. `None` when the
    /// map is not bijective.
    pub fn inverse(&self) -> Option<Automorphism> {
        let inv = invert(&self.images)?;
        let out = Automorphism { images: inv };
        debug_assert!(self.compose(&out).is_identity());
        Some(out)
    }

    /// `w` with `self(x) = w x w⁻¹` for every basis letter.
    pub fn is_inner(&self) -> Option<FWord> {
        let pairs: Vec<(FWord, FWord)> =
            self.images.iter().enumerate().map(|(i, w)| (FWord::gen(i as u32), w.clone())).collect();
        find_conjugator(&pairs)
    }

    /// Same outer class. `None` when `other` is not invertible.
    pub fn outer_equal(&self, other: &Automorphism) -> Option<bool> {
        let inv = other.inverse()?;
        Some(self.compose(&inv).is_inner().is_some())
    }

    /// Lines of the form `a -> ab`; unlisted letters below `rank` are fixed.
    pub fn parse(rank: usize, text: &str) -> Result<Self, ParseError> {
        let mut out = Automorphism::identity(rank);
        for (lineno, raw) in text.lines().flat_map(|l| l.split(';')).enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| ParseError::at(lineno + 1, "expected `x -> word`"))?;
            let x = parse_basis_word(lhs).map_err(|e| ParseError::at(lineno + 1, e))?;
            let [l] = x.letters() else {
                return Err(ParseError::at(lineno + 1, "left side must be one letter"));
            };
            if l.inverse || l.gen as usize >= rank {
                return Err(ParseError::at(lineno + 1, "left side must be a basis letter"));
            }
            out.images[l.gen as usize] = parse_basis_word(rhs).map_err(|e| ParseError::at(lineno + 1, e))?;
        }
        Ok(out)
    }
}

impl std::fmt::Display for Automorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> =
            self.images.iter().enumerate().map(|(i, w)| format!("{} -> {}", basis_char(i as u32, false), w)).collect();
        write!(f, "{}", parts.join("; "))
    }
}

struct TaggedEdge {
    from: usize,
    label: u32,
    to: usize,
    /// Word in the source basis carried by the edge.
    tag: FWord,
}

/// Gauge change at `v`: tags entering `v` get `·g`, tags leaving get `g⁻¹·`.
fn gauge(edges: &mut [TaggedEdge], v: usize, g: &FWord) {
    let gi = g.inverse();
    for e in edges.iter_mut() {
        if e.to == v {
            e.tag = e.tag.mul(g);
        }
        if e.from == v {
            e.tag = gi.mul(&e.tag);
        }
    }
}

fn invert(images: &[FWord]) -> Option<Vec<FWord>> {
    let n = images.len();
    let mut edges: Vec<TaggedEdge> = Vec::new();
    let mut vertex_count = 1;
    for (i, w) in images.iter().enumerate() {
        if w.is_empty() {
            return None;
        }
        let mut cur = 0;
        for (k, l) in w.letters().iter().enumerate() {
            let next = if k + 1 == w.len() {
                0
            } else {
                vertex_count += 1;
                vertex_count - 1
            };
            let tag = if k == 0 { FWord::gen(i as u32) } else { FWord::identity() };
            if l.inverse {
                edges.push(TaggedEdge { from: next, label: l.gen, to: cur, tag: tag.inverse() });
            } else {
                edges.push(TaggedEdge { from: cur, label: l.gen, to: next, tag });
            }
            cur = next;
        }
    }
    loop {
        let mut pair = None;
        'search: for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if edges[i].label == edges[j].label && (edges[i].from == edges[j].from || edges[i].to == edges[j].to) {
                    pair = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        let same_source = edges[i].from == edges[j].from;
        let (ends_i, ends_j) = if same_source { (edges[i].to, edges[j].to) } else { (edges[i].from, edges[j].from) };
        if ends_i == ends_j {
            if edges[i].tag != edges[j].tag {
                return None;
            }
            edges.remove(j);
            continue;
        }
        // gauge the endpoint that is not the basepoint so the tags agree
        let (keep, drop, keep_edge, drop_edge) = if ends_j != 0 { (ends_i, ends_j, i, j) } else { (ends_j, ends_i, j, i) };
        let (tk, td) = (edges[keep_edge].tag.clone(), edges[drop_edge].tag.clone());
        let g = if same_source { td.inverse().mul(&tk) } else { td.mul(&tk.inverse()) };
        gauge(&mut edges, drop, &g);
        debug_assert_eq!(edges[keep_edge].tag, edges[drop_edge].tag);
        edges.remove(drop_edge);
        for e in edges.iter_mut() {
            if e.from == drop {
                e.from = keep;
            }
            if e.to == drop {
                e.to = keep;
            }
        }
    }
    // prune hanging trees away from the basepoint
    loop {
        let mut deg = vec![0usize; vertex_count];
        for e in &edges {
            deg[e.from] += 1;
            deg[e.to] += 1;
        }
        let before = edges.len();
        edges.retain(|e| !((e.from != 0 && deg[e.from] == 1) || (e.to != 0 && deg[e.to] == 1)));
        if edges.len() == before {
            break;
        }
    }
    if edges.len() != n || edges.iter().any(|e| e.from != 0 || e.to != 0) {
        return None;
    }
    let mut out = vec![None; n];
    for e in edges {
        let slot = out.get_mut(e.label as usize)?;
        if slot.is_some() {
            return None;
        }
        *slot = Some(e.tag);
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn aut(rank: usize, s: &str) -> Automorphism {
        Automorphism::parse(rank, s).unwrap()
    }

    #[test]
    fn inverse_of_nielsen_moves() {
        let phi = aut(2, "a -> ab");
        let inv = phi.inverse().unwrap();
        assert_eq!(inv, aut(2, "a -> aB"));
        assert!(aut(2, "a -> b; b -> a").inverse().is_some());
        assert!(aut(2, "a -> aa").inverse().is_none());
        assert!(aut(2, "a -> ab; b -> ab").inverse().is_none());
        assert!(aut(2, "a -> aba").inverse().is_none());
    }

    #[test]
    fn random_products_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..5);
            let mut phi = Automorphism::identity(n);
            for _ in 0..rng.gen_range(1..8) {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                let mut images: Vec<FWord> = (0..n as u32).map(FWord::gen).collect();
                images[i] = match rng.gen_range(0..4) {
                    0 => FWord::gen(i as u32).mul(&FWord::gen(j as u32)),
                    1 => FWord::gen_inv(j as u32).mul(&FWord::gen(i as u32)),
                    2 => FWord::gen_inv(i as u32),
                    _ => FWord::gen(i as u32).conjugate_by(&FWord::gen(j as u32)),
                };
                phi = Automorphism::new(images).compose(&phi);
            }
            let inv = phi.inverse().expect("product of Nielsen moves");
            assert!(phi.compose(&inv).is_identity());
            assert!(inv.compose(&phi).is_identity());
        }
    }

    #[test]
    fn inner_and_outer() {
        assert_eq!(Automorphism::identity(2).is_inner(), Some(FWord::identity()));
        let ab = parse_basis_word("ab").unwrap();
        assert_eq!(Automorphism::conjugation(2, &ab).is_inner(), Some(ab.clone()));
        let swap = aut(2, "a -> b; b -> a");
        assert_eq!(swap.is_inner(), None);
        assert_eq!(swap.outer_equal(&Automorphism::identity(2)), Some(false));
        let c = Automorphism::conjugation(2, &ab);
        assert_eq!(c.compose(&swap).outer_equal(&swap), Some(true));
        assert_eq!(Automorphism::identity(2).outer_equal(&c), Some(true));
    }

    #[test]
    fn display_roundtrip() {
        let phi = aut(3, "a -> acB; c -> C");
        assert_eq!(aut(3, &phi.to_string()), phi);
    }
}
