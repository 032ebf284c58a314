use std::collections::VecDeque;

use serde::Serialize;

use super::NielsenError;
use crate::graph_model::FiniteGraph;
use crate::group::FiniteGroup;
use crate::stallings::{Automorphism, Subgroup};
use crate::union_find::UnionFind;
use crate::word::{FWord, Letter, Word};

/// Caps on the exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    /// Most edges added to the starting graph.
    pub max_edges: usize,
    /// Ranks above this only get the direct constructions.
    pub rank_bound: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_edges: 6, rank_bound: 3 }
    }
}

/// An automorphism of a finite graph: vertex images, and for every edge
/// its image edge and whether the orientation flips.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GraphMap {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, bool)>,
}

impl GraphMap {
    pub fn identity(vertices: usize, edges: usize) -> Self {
        GraphMap { vertices: (0..vertices).collect(), edges: (0..edges).map(|e| (e, false)).collect() }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &GraphMap) -> GraphMap {
        GraphMap {
            vertices: other.vertices.iter().map(|&v| self.vertices[v]).collect(),
            edges: other.edges.iter().map(|&(e, r)| (self.edges[e].0, r ^ self.edges[e].1)).collect(),
        }
    }
}

/// A finite graph with a group acting on it and every edge labelled by a
/// word of a free group; reading labels along loops at the basepoint marks
/// the fundamental group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizedGraph {
    pub vertex_count: usize,
    /// Oriented edges `(tail, head)`.
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<FWord>,
    /// One map per group element.
    pub action: Vec<GraphMap>,
    pub basepoint: usize,
}

type Step = (usize, bool);

impl RealizedGraph {
    pub fn empty(order: usize) -> Self {
        RealizedGraph {
            vertex_count: 0,
            edges: Vec::new(),
            labels: Vec::new(),
            action: vec![GraphMap::identity(0, 0); order],
            basepoint: 0,
        }
    }

    pub fn to_finite_graph(&self) -> FiniteGraph {
        FiniteGraph::new(self.vertex_count, self.edges.clone())
    }

    fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.classes()
    }

    pub fn is_connected(&self) -> bool {
        let c = self.components();
        c.iter().all(|&x| x == c[0])
    }

    pub fn rank(&self) -> usize {
        let mut c = self.components();
        c.sort_unstable();
        c.dedup();
        self.edges.len() + c.len() - self.vertex_count
    }

    /// Breadth-first tree from the basepoint: membership of each edge and
    /// the tree path to each reachable vertex.
    fn tree(&self) -> (Vec<bool>, Vec<Option<Vec<Step>>>) {
        let mut in_tree = vec![false; self.edges.len()];
        let mut paths: Vec<Option<Vec<Step>>> = vec![None; self.vertex_count];
        if self.vertex_count == 0 {
            return (in_tree, paths);
        }
        paths[self.basepoint] = Some(Vec::new());
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                for (from, to, rev) in [(a, b, false), (b, a, true)] {
                    if from == v && paths[to].is_none() {
                        let mut p = paths[v].clone().unwrap();
                        p.push((e, rev));
                        paths[to] = Some(p);
                        in_tree[e] = true;
                        queue.push_back(to);
                    }
                }
            }
        }
        (in_tree, paths)
    }

    fn endpoints(&self, (e, rev): Step) -> (usize, usize) {
        let (a, b) = self.edges[e];
        if rev {
            (b, a)
        } else {
            (a, b)
        }
    }

    /// Loops at the basepoint through each edge outside the tree, in edge
    /// order; they form a free basis of the fundamental group.
    pub fn fundamental_loops(&self) -> Vec<Vec<Step>> {
        let (in_tree, paths) = self.tree();
        (0..self.edges.len())
            .filter(|&e| !in_tree[e])
            .filter_map(|e| {
                let (a, b) = self.edges[e];
                let (pa, pb) = (paths[a].as_ref()?, paths[b].as_ref()?);
                let mut p = pa.clone();
                p.push((e, false));
                p.extend(pb.iter().rev().map(|&(f, r)| (f, !r)));
                Some(p)
            })
            .collect()
    }

    fn path_label(&self, p: &[Step]) -> FWord {
        p.iter().fold(FWord::identity(), |acc, &(e, r)| {
            acc.mul(&if r { self.labels[e].inverse() } else { self.labels[e].clone() })
        })
    }

    /// Labels read along the fundamental loops.
    pub fn marking(&self) -> Vec<FWord> {
        self.fundamental_loops().iter().map(|p| self.path_label(p)).collect()
    }

    /// Writes an edge path in the basis of fundamental loops.
    fn coordinates(&self, p: &[Step], in_tree: &[bool]) -> FWord {
        let index: Vec<Option<u32>> = {
            let mut next = 0;
            in_tree
                .iter()
                .map(|&t| {
                    (!t).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        Word::from_letters(p.iter().filter_map(|&(e, r)| index[e].map(|i| Letter::new(i, r))))
    }

    pub fn is_graph_map(&self, g: &GraphMap) -> bool {
        if g.vertices.len() != self.vertex_count || g.edges.len() != self.edges.len() {
            return false;
        }
        let mut seen = vec![false; self.edges.len()];
        for (e, &(f, r)) in g.edges.iter().enumerate() {
            if f >= self.edges.len() || std::mem::replace(&mut seen[f], true) {
                return false;
            }
            let (a, b) = self.edges[e];
            if self.endpoints((f, r)) != (g.vertices[a], g.vertices[b]) {
                return false;
            }
        }
        true
    }

    /// The automorphism of the fundamental group induced by `g`, in the
    /// basis of fundamental loops, after returning along the tree from the
    /// image of the basepoint.
    pub fn induced(&self, g: &GraphMap) -> Automorphism {
        let (in_tree, paths) = self.tree();
        let back = paths[g.vertices[self.basepoint]].clone().unwrap_or_default();
        let images = self
            .fundamental_loops()
            .iter()
            .map(|p| {
                let mut q = back.clone();
                q.extend(p.iter().map(|&(e, r)| (g.edges[e].0, r ^ g.edges[e].1)));
                q.extend(back.iter().rev().map(|&(f, r)| (f, !r)));
                self.coordinates(&q, &in_tree)
            })
            .collect();
        Automorphism::new(images)
    }

    /// Induced outer action in the coordinates of the labels, or `None`
    /// when the marking is not a free basis of `F_n`.
    pub fn outer_action(&self, n: usize) -> Option<Vec<Automorphism>> {
        let marking = self.marking();
        if marking.len() != n || !self.is_connected() {
            return None;
        }
        let m = Automorphism::new(marking);
        let mi = m.inverse()?;
        Some(self.action.iter().map(|g| m.compose(&self.induced(g)).compose(&mi)).collect())
    }

    /// The action is by graph automorphisms and multiplies like `group`.
    pub fn is_action_of(&self, group: &FiniteGroup) -> bool {
        self.action.len() == group.order()
            && self.action[0] == GraphMap::identity(self.vertex_count, self.edges.len())
            && self.action.iter().all(|g| self.is_graph_map(g))
            && group
                .elements()
                .all(|a| group.elements().all(|b| self.action[group.mul(a, b)] == self.action[a].compose(&self.action[b])))
    }

    /// A group action whose induced outer action is `targets`.
    pub fn realizes(&self, group: &FiniteGroup, targets: &[Automorphism]) -> bool {
        let n = targets.first().map_or(0, |t| t.rank());
        self.is_action_of(group)
            && self.outer_action(n).is_some_and(|outer| {
                outer.iter().zip(targets).all(|(a, t)| a.outer_equal(t) == Some(true))
            })
    }
}

/// Each basis letter goes to a conjugate of a letter or its inverse.
fn signed_permutation(phi: &Automorphism) -> Option<Vec<(usize, bool)>> {
    let n = phi.rank();
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for w in &phi.images {
        let c = w.cyclic_reduction();
        let [l] = c.letters() else {
            return None;
        };
        let g = l.gen as usize;
        if g >= n || std::mem::replace(&mut seen[g], true) {
            return None;
        }
        out.push((g, l.inverse));
    }
    Some(out)
}

fn rose(group: &FiniteGroup, targets: &[Automorphism], n: usize) -> Option<RealizedGraph> {
    let action: Option<Vec<GraphMap>> = targets
        .iter()
        .map(|t| signed_permutation(t).map(|sigma| GraphMap { vertices: vec![0], edges: sigma }))
        .collect();
    let g = RealizedGraph {
        vertex_count: 1,
        edges: vec![(0, 0); n],
        labels: (0..n as u32).map(FWord::gen).collect(),
        action: action?,
        basepoint: 0,
    };
    g.realizes(group, targets).then_some(g)
}

/// A small generating set: repeatedly add the least element not yet
/// generated.
fn generators(group: &FiniteGroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = vec![true];
    span.resize(group.order(), false);
    while let Some(x) = (0..group.order()).find(|&x| !span[x]) {
        gens.push(x);
        let mut frontier: Vec<usize> = (0..group.order()).filter(|&y| span[y]).collect();
        while let Some(y) = frontier.pop() {
            for &g in &gens {
                let z = group.mul(g, y);
                if !span[z] {
                    span[z] = true;
                    frontier.push(z);
                }
            }
        }
    }
    gens
}

/// Extends images of the generators to the whole group along shortest
/// words; `None` unless the result is an action.
fn extend_to_group(group: &FiniteGroup, gens: &[usize], images: &[GraphMap], graph: &RealizedGraph) -> Option<Vec<GraphMap>> {
    let mut out: Vec<Option<GraphMap>> = vec![None; group.order()];
    out[0] = Some(GraphMap::identity(graph.vertex_count, graph.edges.len()));
    let mut queue = VecDeque::from([0]);
    while let Some(y) = queue.pop_front() {
        for (k, &g) in gens.iter().enumerate() {
            let z = group.mul(g, y);
            if out[z].is_none() {
                out[z] = Some(images[k].compose(out[y].as_ref().unwrap()));
                queue.push_back(z);
            }
        }
    }
    let action: Vec<GraphMap> = out.into_iter().collect::<Option<_>>()?;
    let candidate = RealizedGraph { action, ..graph.clone() };
    candidate.is_action_of(group).then_some(candidate.action)
}

/// Graph automorphisms agreeing with `base` on the first `vb` vertices and
/// `eb` edges, which they must preserve.
fn extensions(g: &RealizedGraph, base: &GraphMap, vb: usize, eb: usize, cap: usize) -> Vec<GraphMap> {
    let new_v: Vec<usize> = (vb..g.vertex_count).collect();
    let mut out = Vec::new();
    let mut perm = new_v.clone();
    permutations(&mut perm, 0, &mut |p| {
        if out.len() >= cap {
            return;
        }
        let mut vertices: Vec<usize> = base.vertices.clone();
        vertices.extend_from_slice(p);
        let mut edges: Vec<(usize, bool)> = base.edges.clone();
        let mut used = vec![false; g.edges.len()];
        assign_edges(g, &vertices, eb, &mut edges, &mut used, &mut out, cap);
    });
    out
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

fn assign_edges(
    g: &RealizedGraph,
    vertices: &[usize],
    eb: usize,
    edges: &mut Vec<(usize, bool)>,
    used: &mut Vec<bool>,
    out: &mut Vec<GraphMap>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    let i = edges.len();
    if i == g.edges.len() {
        out.push(GraphMap { vertices: vertices.to_vec(), edges: edges.clone() });
        return;
    }
    let (a, b) = g.edges[i];
    let want = (vertices[a], vertices[b]);
    for j in eb..g.edges.len() {
        if used[j] {
            continue;
        }
        for rev in [false, true] {
            if rev && g.edges[j].0 == g.edges[j].1 && want.0 != want.1 {
                continue;
            }
            if g.endpoints((j, rev)) == want {
                used[j] = true;
                edges.push((j, rev));
                assign_edges(g, vertices, eb, edges, used, out, cap);
                edges.pop();
                used[j] = false;
            }
        }
    }
}

/// Multisets of size `k` from `0..m`, in lexicographic order.
fn multisets(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if cur.len() == k {
        return f(cur);
    }
    for x in start..m {
        cur.push(x);
        if multisets(m, k, x, cur, f) {
            return true;
        }
        cur.pop();
    }
    false
}

const ACTION_CAP: usize = 2000;

/// Exhaustive search for a graph containing `base` with at most
/// `bounds.max_edges` new edges, in order of the number of new vertices,
/// then the new edges, then labels drawn from the identity and the signed
/// basis letters.
fn search(
    group: &FiniteGroup,
    targets: &[Automorphism],
    n: usize,
    base: &RealizedGraph,
    bounds: SearchBounds,
) -> Option<RealizedGraph> {
    let (vb, eb) = (base.vertex_count, base.edges.len());
    let gens = generators(group);
    let alphabet: Vec<FWord> = std::iter::once(FWord::identity())
        .chain((0..n as u32).flat_map(|x| [FWord::gen(x), FWord::gen_inv(x)]))
        .collect();
    for add_v in 0..=bounds.max_edges {
        let vt = vb + add_v;
        if vt == 0 || n + vt < 1 + eb {
            continue;
        }
        let add_e = n + vt - 1 - eb;
        if add_e > bounds.max_edges {
            continue;
        }
        let pairs: Vec<(usize, usize)> = (0..vt).flat_map(|i| (i..vt).map(move |j| (i, j))).collect();
        let mut found = None;
        multisets(pairs.len(), add_e, 0, &mut Vec::new(), &mut |choice| {
            let mut g = RealizedGraph {
                vertex_count: vt,
                edges: base.edges.clone(),
                labels: base.labels.clone(),
                action: Vec::new(),
                basepoint: if vb > 0 { base.basepoint } else { 0 },
            };
            g.edges.extend(choice.iter().map(|&c| pairs[c]));
            let mut degree = vec![0; vt];
            for &(a, b) in &g.edges {
                degree[a] += 1;
                degree[b] += 1;
            }
            if (vt > 1 || n > 0) && degree.iter().any(|&d| d < 2) || !g.is_connected() {
                return false;
            }
            g.labels.resize(g.edges.len(), FWord::identity());
            let per_gen: Vec<Vec<GraphMap>> = gens
                .iter()
                .map(|&x| {
                    let b = base.action.get(x).cloned().unwrap_or_else(|| GraphMap::identity(0, 0));
                    extensions(&g, &b, vb, eb, ACTION_CAP)
                })
                .collect();
            let mut actions = Vec::new();
            let mut idx = vec![0; gens.len()];
            'combos: loop {
                if per_gen.iter().any(|c| c.is_empty()) {
                    break;
                }
                let images: Vec<GraphMap> = idx.iter().zip(&per_gen).map(|(&i, c)| c[i].clone()).collect();
                if let Some(a) = extend_to_group(group, &gens, &images, &g) {
                    actions.push(a);
                }
                for k in 0..idx.len() {
                    idx[k] += 1;
                    if idx[k] < per_gen[k].len() {
                        continue 'combos;
                    }
                    idx[k] = 0;
                }
                break;
            }
            if actions.is_empty() {
                return false;
            }
            let mut lab = vec![0usize; add_e];
            loop {
                for (k, &l) in lab.iter().enumerate() {
                    g.labels[eb + k] = alphabet[l].clone();
                }
                let marking = g.marking();
                if marking.len() == n && Automorphism::new(marking).inverse().is_some() {
                    for a in &actions {
                        let cand = RealizedGraph { action: a.clone(), ..g.clone() };
                        if cand.realizes(group, targets) {
                            found = Some(cand);
                            return true;
                        }
                    }
                }
                let mut k = 0;
                while k < add_e {
                    lab[k] += 1;
                    if lab[k] < alphabet.len() {
                        break;
                    }
                    lab[k] = 0;
                    k += 1;
                }
                if k == add_e {
                    return false;
                }
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// A graph of rank `n` with a simplicial action of `group` inducing
/// `targets` on the fundamental group, labels giving the marking. Roses
/// with signed petal permutations are tried first, then, for ranks within
/// the bound, an exhaustive search.
pub fn realize_finite_out(
    group: &FiniteGroup,
    targets: &[Automorphism],
    n: usize,
    bounds: SearchBounds,
) -> Result<RealizedGraph, NielsenError> {
    if targets.len() != group.order() || targets.iter().any(|t| t.rank() != n) {
        return Err(NielsenError::InvalidAction(format!("need {} automorphisms of rank {n}", group.order())));
    }
    if let Some(g) = rose(group, targets, n) {
        return Ok(g);
    }
    if n <= bounds.rank_bound {
        if let Some(g) = search(group, targets, n, &RealizedGraph::empty(group.order()), bounds) {
            return Ok(g);
        }
    }
    Err(NielsenError::NotFoundWithinBound(format!("rank {n}, at most {} edges", bounds.max_edges)))
}

/// Joins the components of `base` to a new fixed vertex, or to a fixed
/// vertex of `base` when connected, and adds petals there for the basis
/// letters not yet carried by `base`.
fn connect_and_petal(group: &FiniteGroup, targets: &[Automorphism], n: usize, base: &RealizedGraph) -> Option<RealizedGraph> {
    let comps = base.components();
    let mut reps: Vec<usize> = comps.clone();
    reps.sort_unstable();
    reps.dedup();
    let fixed = |v: usize| base.action.iter().all(|g| g.vertices[v] == v);
    let mut g = base.clone();
    let center = if reps.len() == 1 {
        (0..base.vertex_count).find(|&v| fixed(v))?
    } else {
        let c = base.vertex_count;
        g.vertex_count += 1;
        for &r in &reps {
            let v = (0..base.vertex_count).find(|&v| comps[v] == r && fixed(v))?;
            g.edges.push((c, v));
            g.labels.push(FWord::identity());
        }
        c
    };
    g.basepoint = center;
    let carried = Subgroup::from_generators(&g.marking());
    let letters: Vec<u32> = (0..n as u32).filter(|&x| carried.contains(&FWord::gen(x))).collect();
    if carried.rank() != letters.len() {
        return None;
    }
    let rest: Vec<u32> = (0..n as u32).filter(|x| !letters.contains(x)).collect();
    let first_petal = g.edges.len();
    for &x in &rest {
        g.edges.push((center, center));
        g.labels.push(FWord::gen(x));
    }
    let mut action = Vec::with_capacity(group.order());
    for (h, t) in targets.iter().enumerate() {
        let mut map = base.action[h].clone();
        if g.vertex_count > base.vertex_count {
            map.vertices.push(center);
        }
        for e in base.edges.len()..first_petal {
            map.edges.push((e, false));
        }
        for &x in &rest {
            let c = t.images[x as usize].cyclic_reduction();
            let [l] = c.letters() else {
                return None;
            };
            let j = rest.iter().position(|&y| y == l.gen)?;
            map.edges.push((first_petal + j, l.inverse));
        }
        action.push(map);
    }
    g.action = action;
    g.realizes(group, targets).then_some(g)
}

/// A graph containing `base` (as its first vertices and edges, with the
/// same labels and action) whose action induces `targets`.
pub fn realize_relative(
    group: &FiniteGroup,
    targets: &[Automorphism],
    n: usize,
    base: &RealizedGraph,
    bounds: SearchBounds,
) -> Result<RealizedGraph, NielsenError> {
    if base.vertex_count == 0 {
        return realize_finite_out(group, targets, n, bounds);
    }
    if !base.is_action_of(group) {
        return Err(NielsenError::InvalidAction("the starting graph does not carry an action".into()));
    }
    if base.is_connected() && base.rank() == n && base.realizes(group, targets) {
        return Ok(base.clone());
    }
    if let Some(g) = connect_and_petal(group, targets, n, base) {
        return Ok(g);
    }
    if n <= bounds.rank_bound {
        if let Some(g) = search(group, targets, n, base, bounds) {
            return Ok(g);
        }
    }
    Err(NielsenError::NotFoundWithinBound(format!(
        "rank {n} over a graph with {} edges, at most {} more",
        base.edges.len(),
        bounds.max_edges
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_basis_word;

    fn auto(text: &str, n: usize) -> Automorphism {
        Automorphism::parse(n, text).unwrap()
    }

    #[test]
    fn classic_roses() {
        let z2 = FiniteGroup::cyclic(2);
        let b = SearchBounds::default();
        let swap = realize_finite_out(&z2, &[Automorphism::identity(2), auto("a -> b; b -> a", 2)], 2, b).unwrap();
        assert_eq!((swap.vertex_count, swap.edges.len()), (1, 2));
        assert_eq!(swap.action[1].edges, vec![(1, false), (0, false)]);
        let inv = realize_finite_out(&z2, &[Automorphism::identity(2), auto("a -> A; b -> B", 2)], 2, b).unwrap();
        assert_eq!(inv.action[1].edges, vec![(0, true), (1, true)]);
        let triv = realize_finite_out(&FiniteGroup::trivial(), &[Automorphism::identity(3)], 3, b).unwrap();
        assert_eq!((triv.vertex_count, triv.edges.len()), (1, 3));
    }

    #[test]
    fn conjugated_targets_still_match() {
        // the swap followed by conjugation by a is the same outer class
        let z2 = FiniteGroup::cyclic(2);
        let a = parse_basis_word("a").unwrap();
        let t = Automorphism::new(auto("a -> b; b -> a", 2).images.iter().map(|w| w.conjugate_by(&a)).collect());
        let targets = [Automorphism::identity(2), t];
        let g = realize_finite_out(&z2, &targets, 2, SearchBounds::default()).unwrap();
        assert_eq!(g.action[1].edges, vec![(1, false), (0, false)]);
        assert!(g.realizes(&z2, &targets));
    }

    #[test]
    fn order_three_needs_a_theta() {
        // a -> b, b -> a⁻¹b⁻¹ has order three in Out(F_2) and rotates the
        // three edges of a theta graph
        let z3 = FiniteGroup::cyclic(3);
        let t = auto("a -> b; b -> AB", 2);
        let targets = vec![Automorphism::identity(2), t.clone(), t.compose(&t)];
        let g = realize_finite_out(&z3, &targets, 2, SearchBounds::default()).unwrap();
        assert_eq!((g.vertex_count, g.edges.len()), (2, 3));
        assert!(g.realizes(&z3, &targets));
    }

    #[test]
    fn relative_extensions() {
        let z2 = FiniteGroup::cyclic(2);
        let targets = vec![Automorphism::identity(2), auto("a -> b; b -> a", 2)];
        // an invariant circle through two vertices carrying a b⁻¹
        let base = RealizedGraph {
            vertex_count: 2,
            edges: vec![(0, 1), (0, 1)],
            labels: vec![FWord::gen(0), FWord::gen(1)],
            action: vec![
                GraphMap::identity(2, 2),
                GraphMap { vertices: vec![0, 1], edges: vec![(1, false), (0, false)] },
            ],
            basepoint: 0,
        };
        let g = realize_relative(&z2, &targets, 2, &base, SearchBounds::default()).unwrap();
        assert_eq!((g.vertex_count, g.edges.len()), (2, 3));
        assert_eq!(&g.edges[..2], &base.edges[..]);
        assert!(g.realizes(&z2, &targets));
        let again = realize_relative(&z2, &targets, 2, &g, SearchBounds::default()).unwrap();
        assert_eq!(again, g);
        let from_nothing = realize_relative(&z2, &targets, 2, &RealizedGraph::empty(2), SearchBounds::default()).unwrap();
        assert_eq!(from_nothing.vertex_count, 1);
    }

    #[test]
    fn petals_are_added_at_a_new_center() {
        let z2 = FiniteGroup::cyclic(2);
        let targets = vec![Automorphism::identity(3), auto("a -> A; b -> B; c -> C", 3)];
        let petal = |x: u32| RealizedGraph {
            vertex_count: 1,
            edges: vec![(0, 0)],
            labels: vec![FWord::gen(x)],
            action: vec![GraphMap::identity(1, 1), GraphMap { vertices: vec![0], edges: vec![(0, true)] }],
            basepoint: 0,
        };
        let (p, q) = (petal(0), petal(2));
        let base = RealizedGraph {
            vertex_count: 2,
            edges: vec![(0, 0), (1, 1)],
            labels: vec![p.labels[0].clone(), q.labels[0].clone()],
            action: vec![
                GraphMap::identity(2, 2),
                GraphMap { vertices: vec![0, 1], edges: vec![(0, true), (1, true)] },
            ],
            basepoint: 0,
        };
        let g = realize_relative(&z2, &targets, 3, &base, SearchBounds { max_edges: 2, rank_bound: 0 }).unwrap();
        assert_eq!(g.vertex_count, 3);
        assert_eq!(g.basepoint, 2);
        assert!(g.realizes(&z2, &targets));
    }

    #[test]
    fn bounds_are_reported() {
        let z3 = FiniteGroup::cyclic(3);
        let t = auto("a -> b; b -> AB", 2);
        let targets = vec![Automorphism::identity(2), t.clone(), t.compose(&t)];
        let err = realize_finite_out(&z3, &targets, 2, SearchBounds { max_edges: 2, rank_bound: 3 }).unwrap_err();
        assert!(matches!(err, NielsenError::NotFoundWithinBound(_)));
    }
}
