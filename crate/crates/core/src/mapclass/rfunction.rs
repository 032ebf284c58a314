use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::identity::{end_cylinders, free_cylinders, loop_pairs};
use super::rep::MapData;
use super::{parse_loop_word, LoopWord, MapError, ProperMapRep};
use crate::error::ParseError;
use crate::graph_model::{
    free_end_count, free_ends_compact, states_reaching_loops, states_with_free_ends, states_with_genus_ends,
    unfold, Automaton, VertexPath,
};
use crate::word::find_conjugator;

/// A locally constant function from the ends outside the genus closure to
/// the fundamental group, given on disjoint cylinders covering those ends.
///
/// Values are root-based words, identified with lines at the base end
/// `alpha0` through the tree ray from the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RFunction {
    pub alpha0: VertexPath,
    pub blocks: BTreeMap<VertexPath, LoopWord>,
}

/// Extends `p` along least children with free ends, or cuts it, to depth `d`.
fn least_free_extension(a: &Automaton, p: &VertexPath, d: usize) -> Option<VertexPath> {
    if p.depth() >= d {
        return Some(p.prefix(d));
    }
    let free = states_with_free_ends(a);
    let mut out = p.clone();
    let mut s = a.state_at(p)?;
    while out.depth() < d {
        let i = a.children(s).iter().position(|&c| free[c])?;
        s = a.children(s)[i];
        out = out.child(i as u32);
    }
    Some(out)
}

/// Depth-`d` vertices with free ends below them, in order.
fn free_level(a: &Automaton, d: usize) -> Vec<VertexPath> {
    let free = states_with_free_ends(a);
    let mut level = if free[a.root()] { vec![(VertexPath::root(), a.root())] } else { Vec::new() };
    for _ in 0..d {
        level = level
            .iter()
            .flat_map(|(p, s)| {
                a.children(*s)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| free[c])
                    .map(move |(i, &c)| (p.child(i as u32), c))
            })
            .collect();
    }
    level.into_iter().map(|(p, _)| p).collect()
}

impl RFunction {
    /// The constant function 1 based at the least free end.
    pub fn one(ambient: &Automaton) -> Result<Self, MapError> {
        let alpha0 = least_free_extension(ambient, &VertexPath::root(), 0)
            .filter(|_| states_with_free_ends(ambient)[ambient.root()])
            .ok_or_else(|| MapError::InvalidRFunction("every end is accumulated by genus".into()))?;
        Ok(RFunction { alpha0: alpha0.clone(), blocks: BTreeMap::from([(alpha0, LoopWord::identity())]) })
    }

    pub fn depth(&self) -> usize {
        self.blocks.keys().map(|p| p.depth()).max().unwrap_or(0)
    }

    /// Value on the block containing the cylinder `p`.
    pub fn value_at(&self, p: &VertexPath) -> Option<&LoopWord> {
        self.blocks.iter().find(|(k, _)| k.is_prefix_of(p)).map(|(_, w)| w)
    }

    /// Values on all free cylinders at depth `d ≥ self.depth()`.
    pub fn at_depth(&self, ambient: &Automaton, d: usize) -> Result<BTreeMap<VertexPath, LoopWord>, MapError> {
        free_level(ambient, d)
            .into_iter()
            .map(|p| match self.value_at(&p) {
                Some(w) => Ok((p, w.clone())),
                None => Err(MapError::InvalidRFunction(format!("no block covers {p}"))),
            })
            .collect()
    }

    /// Equal as functions on ends, with the same base end.
    pub fn same_as(&self, other: &RFunction, ambient: &Automaton) -> bool {
        let d = self.depth().max(other.depth()).max(self.alpha0.depth()).max(other.alpha0.depth());
        let base = |h: &RFunction| least_free_extension(ambient, &h.alpha0, d);
        base(self) == base(other)
            && matches!((self.at_depth(ambient, d), other.at_depth(ambient, d)), (Ok(a), Ok(b)) if a == b)
    }

    /// Coarsest block decomposition of the same function.
    pub fn canonical(&self, ambient: &Automaton) -> Result<RFunction, MapError> {
        let d = self.depth();
        let mut blocks = self.at_depth(ambient, d)?;
        let free = states_with_free_ends(ambient);
        for level in (1..=d).rev() {
            let mut parents: BTreeMap<VertexPath, Vec<VertexPath>> = BTreeMap::new();
            for p in blocks.keys().filter(|p| p.depth() == level) {
                parents.entry(p.parent().unwrap()).or_default().push(p.clone());
            }
            for (q, kids) in parents {
                let s = ambient.state_at(&q).unwrap();
                let wanted = ambient.children(s).iter().filter(|&&c| free[c]).count();
                let first = blocks[&kids[0]].clone();
                if kids.len() == wanted && kids.iter().all(|k| blocks[k] == first) {
                    for k in &kids {
                        blocks.remove(k);
                    }
                    blocks.insert(q, first);
                }
            }
        }
        Ok(RFunction { alpha0: self.alpha0.clone(), blocks })
    }

    pub fn inverse(&self) -> RFunction {
        RFunction {
            alpha0: self.alpha0.clone(),
            blocks: self.blocks.iter().map(|(p, w)| (p.clone(), w.inverse())).collect(),
        }
    }

    /// Applies `phi` to every value.
    pub fn map_values<F: Fn(&LoopWord) -> LoopWord>(&self, phi: F) -> RFunction {
        RFunction { alpha0: self.alpha0.clone(), blocks: self.blocks.iter().map(|(p, w)| (p.clone(), phi(w))).collect() }
    }

    /// Disjoint blocks with free ends, covering all free ends, trivial at
    /// the base end.
    pub fn check(&self, ambient: &Automaton) -> Result<(), MapError> {
        let free = states_with_free_ends(ambient);
        let keys: Vec<&VertexPath> = self.blocks.keys().collect();
        for (i, p) in keys.iter().enumerate() {
            if !ambient.state_at(p).is_some_and(|s| free[s]) {
                return Err(MapError::InvalidRFunction(format!("block {p} holds no free end")));
            }
            if keys[i + 1..].iter().any(|q| p.is_prefix_of(q)) {
                return Err(MapError::InvalidRFunction(format!("block {p} overlaps a smaller block")));
            }
        }
        self.at_depth(ambient, self.depth())?;
        let d = self.depth().max(self.alpha0.depth());
        let base = least_free_extension(ambient, &self.alpha0, d)
            .ok_or_else(|| MapError::InvalidRFunction(format!("{} is not a free end cylinder", self.alpha0)))?;
        if !self.value_at(&base).is_some_and(|w| w.is_identity()) {
            return Err(MapError::InvalidRFunction("value at the base end must be trivial".into()));
        }
        Ok(())
    }

    /// Blocks that also hold genus ends carry values made of loops inside
    /// the block.
    pub fn r2_certificate(&self, ambient: &Automaton) -> Result<(), MapError> {
        let genus = states_with_genus_ends(ambient);
        for (p, w) in &self.blocks {
            let mixed = ambient.state_at(p).is_some_and(|s| genus[s]);
            if mixed && !w.generators().all(|x| p.is_prefix_of(&x.at)) {
                return Err(MapError::R2Violation(p.clone()));
            }
        }
        Ok(())
    }

    /// Lines `alpha0 <path>` and `block <path> -> <word>`.
    pub fn parse(text: &str) -> Result<RFunction, MapError> {
        let mut alpha0 = None;
        let mut blocks = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| MapError::Parse(ParseError::at(lineno + 1, m));
            if let Some(rest) = line.strip_prefix("alpha0 ") {
                alpha0 = Some(rest.parse::<VertexPath>().map_err(|e| err(e.message))?);
            } else if let Some(rest) = line.strip_prefix("block ") {
                let (a, b) = rest.split_once("->").ok_or_else(|| err("expected `->`".into()))?;
                let p: VertexPath = a.parse().map_err(|e: ParseError| err(e.message))?;
                blocks.insert(p, parse_loop_word(b).map_err(err)?);
            } else {
                return Err(err(format!("unknown record {line:?}")));
            }
        }
        let alpha0 = alpha0.ok_or_else(|| MapError::Parse(ParseError::new("missing alpha0 line")))?;
        Ok(RFunction { alpha0, blocks })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("alpha0 {}\n", self.alpha0);
        for (p, w) in &self.blocks {
            writeln!(out, "block {p} -> {w}").unwrap();
        }
        out
    }
}

/// Pointwise product on the common refinement.
pub fn r_compose(h1: &RFunction, h2: &RFunction) -> Result<RFunction, MapError> {
    let alpha0 = if h1.alpha0.is_prefix_of(&h2.alpha0) {
        h2.alpha0.clone()
    } else if h2.alpha0.is_prefix_of(&h1.alpha0) {
        h1.alpha0.clone()
    } else {
        return Err(MapError::InvalidRFunction("factors use different base ends".into()));
    };
    let mut blocks = BTreeMap::new();
    for (p, a) in &h1.blocks {
        for (q, b) in &h2.blocks {
            let key = if p.is_prefix_of(q) {
                q
            } else if q.is_prefix_of(p) {
                p
            } else {
                continue;
            };
            blocks.insert(key.clone(), a.mul(b));
        }
    }
    Ok(RFunction { alpha0, blocks })
}

/// The function recording, for every free end `β`, the class of the line
/// `ℓ_β f(ℓ̄_β)` from the base end to `β` and back along its image.
pub fn phi_t(f: &ProperMapRep, alpha0: Option<&VertexPath>) -> Result<RFunction, MapError> {
    let a = f.ambient();
    let free = free_cylinders(f);
    if free.is_empty() {
        return Err(MapError::PreconditionFailed("every end is accumulated by genus".into()));
    }
    let v0 = match alpha0 {
        None => free[0].clone(),
        Some(p) => least_free_extension(a, p, f.support())
            .filter(|v| free.contains(v))
            .ok_or_else(|| MapError::PreconditionFailed(format!("{p} is not a free end cylinder")))?,
    };
    if let Some(z) = end_cylinders(f).into_iter().find(|z| f.vertex_image(z) != *z) {
        return Err(MapError::PreconditionFailed(format!("the end action moves {z}")));
    }
    let c = f.mark(&v0);
    if !free_ends_compact(a) {
        if !f.is_identity_outside() {
            return Err(MapError::PreconditionFailed("the loop action of a banded map cannot be certified".into()));
        }
        let ci = c.inverse();
        if let Some((x, _)) = loop_pairs(f).into_iter().find(|(x, w)| ci.mul(w).mul(&c) != x.word()) {
            return Err(MapError::PreconditionFailed(format!(
                "free ends are not compact and the action at the base end moves {x}"
            )));
        }
    }
    let blocks = free.iter().map(|z| (z.clone(), f.mark(z).inverse().mul(&c))).collect();
    RFunction { alpha0: v0, blocks }.canonical(a)
}

/// `Φ(g ∘ f) = Φ(g) · g₀(Φ(f))`, where `g₀` is the action of `g` at the base end.
pub fn r_cocycle_check(f: &ProperMapRep, g: &ProperMapRep) -> Result<bool, MapError> {
    let gf = g.compose(f)?;
    let h_gf = phi_t(&gf, None)?;
    let h_g = phi_t(g, None)?;
    let h_f = phi_t(f, None)?;
    let c = g.mark(&h_gf.alpha0);
    let ci = c.inverse();
    let pushed = h_f.map_values(|w| ci.mul(&g.push(w)).mul(&c));
    let rhs = r_compose(&h_g, &pushed)?;
    Ok(h_gf.same_as(&rhs, f.ambient()))
}

/// A map with `phi_t` equal to `h`: the identity on vertices and loops,
/// with marks changing only on the edge into the highest vertex of each
/// attached tree below which `h` is constant.
pub fn realize_r_function(ambient: &Automaton, h: &RFunction, support: usize) -> Result<ProperMapRep, MapError> {
    h.check(ambient)?;
    h.r2_certificate(ambient)?;
    let reaches = states_reaching_loops(ambient);
    let genus = states_with_genus_ends(ambient);
    let gen_depth = h.blocks.values().flat_map(|w| w.generators().map(|x| x.at.depth())).max().unwrap_or(0);
    let start = support.max(h.depth()).max(gen_depth).max(h.alpha0.depth());
    // deep enough that free cylinders holding loops hold infinitely many
    let depth = (start..=start + ambient.len() + 1)
        .find(|&d| {
            free_level(ambient, d).iter().all(|p| {
                let s = ambient.state_at(p).unwrap();
                !reaches[s] || genus[s]
            })
        })
        .unwrap_or(start + ambient.len() + 1);
    let values = h.at_depth(ambient, depth)?;
    let v0 = least_free_extension(ambient, &h.alpha0, depth).unwrap();
    for (p, w) in &values {
        let s = ambient.state_at(p).unwrap();
        if reaches[s] && !w.is_identity() {
            let block = h.blocks.keys().find(|k| k.is_prefix_of(p)).unwrap();
            return Err(MapError::NotFinitelySupported(block.clone()));
        }
    }
    let t = unfold(ambient, depth);
    let mut data = MapData::default();
    for tv in &t.vertices {
        if reaches[tv.state] || tv.path.is_prefix_of(&v0) {
            continue;
        }
        let mut below = values.iter().filter(|(p, _)| tv.path.is_prefix_of(p)).map(|(_, w)| w);
        if let Some(first) = below.next() {
            if below.all(|w| w == first) {
                data.marks.insert(tv.path.clone(), first.inverse());
            }
        }
    }
    ProperMapRep::new(ambient, depth, data)
}

/// For a core with one ray attached, the class `c(f)` with `f` acting at
/// the end of the ray as `s ↦ c s c⁻¹`, for `f` in the kernel of the outer
/// action.
pub fn c_of(f: &ProperMapRep) -> Result<LoopWord, MapError> {
    let a = f.ambient();
    if free_end_count(a) != Some(1) {
        return Err(MapError::PreconditionFailed("the graph must be a core with one ray attached".into()));
    }
    if let Some(z) = end_cylinders(f).into_iter().find(|z| f.vertex_image(z) != *z) {
        return Err(MapError::PreconditionFailed(format!("the end action moves {z}")));
    }
    if !f.is_identity_outside() {
        return Err(MapError::PreconditionFailed("the loop action of a banded map cannot be certified".into()));
    }
    let words: Vec<(LoopWord, LoopWord)> = loop_pairs(f).into_iter().map(|(x, w)| (x.word(), w)).collect();
    let inner = find_conjugator(&words)
        .ok_or_else(|| MapError::PreconditionFailed("the outer action is not trivial".into()))?;
    let v0 = free_cylinders(f).remove(0);
    Ok(f.mark(&v0).inverse().mul(&inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapclass::{is_properly_homotopic_to_identity, LoopGen};

    fn rose_with_trees() -> Automaton {
        "root r\nstate r loops=2 children=t,t\nstate t loops=0 children=t,t\n".parse().unwrap()
    }

    fn w(s: &str) -> LoopWord {
        parse_loop_word(s).unwrap()
    }

    #[test]
    fn identity_gives_one() {
        let a = rose_with_trees();
        let h = phi_t(&ProperMapRep::identity(&a, 3), None).unwrap();
        assert!(h.same_as(&RFunction::one(&a).unwrap(), &a));
        assert_eq!(h.blocks.len(), 1);
    }

    #[test]
    fn two_block_roundtrip() {
        let a = rose_with_trees();
        let h = RFunction::parse("alpha0 0\nblock 0 -> 1\nblock 1/0 -> .:0 .:1\nblock 1/1 -> ~.:1\n").unwrap();
        let f = realize_r_function(&a, &h, 0).unwrap();
        assert!(phi_t(&f, None).unwrap().same_as(&h, &a));
        assert!(matches!(is_properly_homotopic_to_identity(&f), crate::mapclass::IdentityVerdict::No(_)));
        let g = realize_r_function(&a, &h.inverse(), 0).unwrap();
        assert!(crate::mapclass::verify_proper_pair(&f, &g));
        assert!(r_cocycle_check(&f, &g).unwrap());
        assert_eq!(RFunction::parse(&h.to_text()).unwrap(), h);
    }

    #[test]
    fn one_modified_edge() {
        // the edge into vertex 1/1 runs around .:0 first
        let a = rose_with_trees();
        let mut data = MapData::default();
        for p in ["1/1", "1/1/0", "1/1/1"] {
            data.marks.insert(p.parse().unwrap(), w(".:0"));
        }
        let f = ProperMapRep::new(&a, 3, data).unwrap();
        let h = phi_t(&f, None).unwrap();
        assert_eq!(h.value_at(&"1/1/0".parse().unwrap()), Some(&w("~.:0")));
        assert_eq!(h.value_at(&"1/0/1".parse().unwrap()), Some(&LoopWord::identity()));
        assert_eq!(h.blocks.len(), 3);
    }

    #[test]
    fn invalid_functions() {
        let a = rose_with_trees();
        let bad_base = RFunction::parse("alpha0 0\nblock 0 -> .:0\nblock 1 -> 1\n").unwrap();
        assert!(matches!(realize_r_function(&a, &bad_base, 0), Err(MapError::InvalidRFunction(_))));
        let gap = RFunction::parse("alpha0 0\nblock 0 -> 1\nblock 1/0 -> 1\n").unwrap();
        assert!(gap.check(&a).is_err());
        // a loop ray with a tree at every vertex: blocks near the genus end
        let b: Automaton = "root s\nstate s loops=1 children=s,t\nstate t loops=0 children=t,t\n".parse().unwrap();
        let far = RFunction::parse("alpha0 1\nblock 1 -> 1\nblock 0 -> .:0\n").unwrap();
        assert!(matches!(realize_r_function(&b, &far, 0), Err(MapError::R2Violation(_))));
        let near = RFunction::parse("alpha0 1\nblock 1 -> 1\nblock 0 -> 0:0\n").unwrap();
        assert!(matches!(realize_r_function(&b, &near, 0), Err(MapError::NotFinitelySupported(_))));
        let tree = RFunction::parse("alpha0 1\nblock 1 -> 1\nblock 0/1 -> .:0\nblock 0/0 -> 1\n").unwrap();
        let f = realize_r_function(&b, &tree, 0).unwrap();
        assert!(phi_t(&f, Some(&tree.alpha0)).unwrap().same_as(&tree, &b));
    }

    #[test]
    fn c_of_on_rose_with_ray() {
        let a: Automaton = "root r\nstate r loops=2 children=t\nstate t loops=0 children=t\n".parse().unwrap();
        let id = ProperMapRep::identity(&a, 2);
        assert_eq!(c_of(&id).unwrap(), LoopWord::identity());
        let drag = |word: &str| {
            let mut data = MapData::default();
            for p in ["0", "0/0"] {
                data.marks.insert(p.parse().unwrap(), w(word).inverse());
            }
            ProperMapRep::new(&a, 2, data).unwrap()
        };
        let (f, g) = (drag(".:0 .:1"), drag("~.:0"));
        assert_eq!(c_of(&f).unwrap(), w(".:0 .:1"));
        assert_eq!(c_of(&g.compose(&f).unwrap()).unwrap(), c_of(&g).unwrap().mul(&c_of(&f).unwrap()));
        // inner automorphisms with the ray dragged along have trivial class
        let x = w(".:1");
        let mut data = MapData::default();
        for gen in id.generators() {
            data.loops.insert(gen.clone(), gen.word().conjugate_by(&x));
        }
        for p in ["0", "0/0"] {
            data.marks.insert(p.parse().unwrap(), x.clone());
        }
        let inner = ProperMapRep::new(&a, 2, data).unwrap();
        assert_eq!(c_of(&inner).unwrap(), LoopWord::identity());
        let _ = LoopGen::new(VertexPath::root(), 0);
    }
}
