use std::collections::BTreeSet;

use super::identity::probes;
use super::{is_properly_homotopic_to_identity, verify_proper_pair, LoopGen, LoopWord, MapError, ProperMapRep};
use crate::graph_model::{Automaton, VertexPath};
use crate::word::find_conjugator;

/// A finite connected subgraph of the unfolding containing the root, given
/// by its vertices (with all their loops).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    vertices: BTreeSet<VertexPath>,
}

impl Subgraph {
    pub fn new<I: IntoIterator<Item = VertexPath>>(ambient: &Automaton, vertices: I) -> Result<Self, MapError> {
        let vertices: BTreeSet<VertexPath> = vertices.into_iter().collect();
        for p in &vertices {
            if ambient.state_at(p).is_none() {
                return Err(MapError::InvalidMap(format!("{p} is not a vertex")));
            }
            if let Some(q) = p.parent() {
                if !vertices.contains(&q) {
                    return Err(MapError::InvalidMap(format!("subgraph is not connected at {p}")));
                }
            }
        }
        if !vertices.contains(&VertexPath::root()) {
            return Err(MapError::InvalidMap("subgraph must contain the root".into()));
        }
        Ok(Subgraph { vertices })
    }

    /// All vertices down to `depth`.
    pub fn ball(ambient: &Automaton, depth: usize) -> Self {
        let t = crate::graph_model::unfold(ambient, depth);
        Subgraph { vertices: t.vertices.into_iter().map(|v| v.path).collect() }
    }

    pub fn contains(&self, p: &VertexPath) -> bool {
        self.vertices.contains(p)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexPath> {
        self.vertices.iter()
    }

    pub fn depth(&self) -> usize {
        self.vertices.iter().map(|p| p.depth()).max().unwrap_or(0)
    }

    /// Vertices just outside, one for every complementary component.
    pub fn exits(&self, ambient: &Automaton) -> Vec<VertexPath> {
        let mut out = Vec::new();
        for p in &self.vertices {
            let s = ambient.state_at(p).unwrap();
            for i in 0..ambient.children(s).len() {
                let c = p.child(i as u32);
                if !self.vertices.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Whether the class conjugated by `c` is the identity on `k` and keeps
/// every complementary component in place together with the loops and
/// lines inside it. `f` must be described below the exits of `k`.
fn fixes_pieces(f: &ProperMapRep, k: &Subgraph, c: &LoopWord) -> bool {
    let a = f.ambient();
    let ci = c.inverse();
    for p in k.vertices() {
        for i in 0..a.loops(a.state_at(p).unwrap()) {
            let x = LoopGen::new(p.clone(), i);
            if f.image_of_gen(&x) != x.word().conjugate_by(c) {
                return false;
            }
        }
    }
    let loops: Vec<LoopGen> = f.generators().into_iter().chain(probes(f)).filter(|x| !k.contains(&x.at)).collect();
    let frontier = f.frontier();
    let inside = |w: &VertexPath, word: &LoopWord| word.generators().all(|x| w.is_prefix_of(&x.at));
    k.exits(a).iter().all(|w| {
        frontier.iter().filter(|z| w.is_prefix_of(z)).all(|z| {
            w.is_prefix_of(&f.vertex_image(z)) && inside(w, &ci.mul(&f.mark(z)))
        }) && loops
            .iter()
            .filter(|y| w.is_prefix_of(&y.at))
            .all(|y| inside(w, &ci.mul(&f.image_of_gen(y)).mul(c)))
    })
}

/// Some conjugate of `f` by a root loop satisfies `fixes_pieces`.
fn fixes_pieces_up_to_basepoint(f: &ProperMapRep, k: &Subgraph) -> bool {
    let a = f.ambient();
    let f = f.extend_support(k.depth() + 1);
    let core: Vec<LoopGen> = k
        .vertices()
        .flat_map(|p| (0..a.loops(a.state_at(p).unwrap())).map(move |i| LoopGen::new(p.clone(), i)))
        .collect();
    let pairs: Vec<(LoopWord, LoopWord)> = core.iter().map(|x| (x.word(), f.image_of_gen(x))).collect();
    let mut candidates = vec![LoopWord::identity()];
    if let Some(c0) = find_conjugator(&pairs) {
        candidates.push(c0.clone());
        // a cyclic or trivial group on K leaves room in the centralizer
        if let [x] = core.as_slice() {
            for e in [-2, -1, 1, 2] {
                candidates.push(c0.mul(&x.word().pow(e)));
            }
        }
    }
    if core.is_empty() {
        candidates.extend(k.vertices().chain(f.frontier().iter()).map(|p| f.mark(p)));
    }
    candidates.iter().any(|c| fixes_pieces(&f, k, c))
}

/// Membership of the class of `f` in the subgroup of classes that are the
/// identity on `k` and preserve every complementary component, with a
/// homotopy inverse doing the same. Banded maps are never certified.
pub fn uk_membership(f: &ProperMapRep, k: &Subgraph) -> bool {
    let Some(g) = f.inverse_candidate() else {
        return false;
    };
    if !verify_proper_pair(f, &g) {
        return false;
    }
    fixes_pieces_up_to_basepoint(f, k) && fixes_pieces_up_to_basepoint(&g, k)
}

/// Whether `maps` lie in `U_K` and lie in pairwise distinct cosets of `U_L`.
/// Distinctness is certified by the inverse of one composed with the other
/// failing membership and failing the identity test.
pub fn distinct_cosets(maps: &[ProperMapRep], k: &Subgraph, l: &Subgraph) -> bool {
    if !maps.iter().all(|f| uk_membership(f, k)) {
        return false;
    }
    let inverses: Option<Vec<ProperMapRep>> = maps.iter().map(|f| f.inverse_candidate()).collect();
    let Some(inverses) = inverses else {
        return false;
    };
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let Ok(q) = inverses[i].compose(&maps[j]) else {
                return false;
            };
            if uk_membership(&q, l) || is_properly_homotopic_to_identity(&q).is_yes() {
                return false;
            }
        }
    }
    true
}
