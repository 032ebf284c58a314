use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::union_find::UnionFind;
use crate::word::{FWord, Letter, Word};

/// A directed graph with edges labeled by basis letters.
///
/// Reading an edge backwards reads the inverse letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledGraph {
    pub vertex_count: usize,
    /// `(source, letter, target)`
    pub edges: Vec<(usize, u32, usize)>,
    pub basepoint: Option<usize>,
}

impl LabeledGraph {
    pub fn empty() -> Self {
        LabeledGraph { vertex_count: 0, edges: Vec::new(), basepoint: None }
    }

    /// Based rose with one petal per word, petals subdivided along the word.
    pub fn wedge_of_words(words: &[FWord]) -> Self {
        let mut g = LabeledGraph { vertex_count: 1, edges: Vec::new(), basepoint: Some(0) };
        for w in words {
            g.add_path(0, w, 0);
        }
        g
    }

    /// Appends a path spelling `w` from `from` to `to`, creating interior vertices.
    pub fn add_path(&mut self, from: usize, w: &FWord, to: usize) {
        let n = w.len();
        if n == 0 {
            assert_eq!(from, to, "an empty path cannot join distinct vertices");
            return;
        }
        let mut cur = from;
        for (i, l) in w.letters().iter().enumerate() {
            let next = if i + 1 == n {
                to
            } else {
                self.vertex_count += 1;
                self.vertex_count - 1
            };
            if l.inverse {
                self.edges.push((next, l.gen, cur));
            } else {
                self.edges.push((cur, l.gen, next));
            }
            cur = next;
        }
    }

    pub fn rank(&self) -> usize {
        if self.vertex_count == 0 {
            return 0;
        }
        let mut uf = UnionFind::new(self.vertex_count);
        for &(a, _, b) in &self.edges {
            uf.union(a, b);
        }
        let comps = uf.classes().into_iter().max().map_or(0, |m| m + 1);
        self.edges.len() + comps - self.vertex_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, _, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    pub fn letters(&self) -> BTreeSet<u32> {
        self.edges.iter().map(|e| e.1).collect()
    }

    /// No two edges with the same label share their source, or their target.
    pub fn is_folded(&self) -> bool {
        let mut out = BTreeSet::new();
        let mut inc = BTreeSet::new();
        self.edges.iter().all(|&(a, x, b)| out.insert((a, x)) && inc.insert((b, x)))
    }

    /// Outgoing step along a letter, in a folded graph.
    pub fn step(&self, v: usize, l: &Letter<u32>) -> Option<usize> {
        self.edges.iter().find_map(|&(a, x, b)| match (x == l.gen, l.inverse) {
            (true, false) if a == v => Some(b),
            (true, true) if b == v => Some(a),
            _ => None,
        })
    }

    /// Vertex reached by reading `w` from `v`.
    pub fn read(&self, v: usize, w: &FWord) -> Option<usize> {
        let nav = Navigator::new(self);
        nav.read(v, w)
    }

    /// Stallings folding. The result does not depend on the fold order.
    pub fn fold(&self) -> LabeledGraph {
        self.fold_in_order(&[])
    }

    /// Folds, starting with the edges at the positions listed in `order`.
    pub fn fold_in_order(&self, order: &[usize]) -> LabeledGraph {
        let mut uf = UnionFind::new(self.vertex_count);
        let mut sequence: Vec<usize> = order.iter().copied().filter(|&i| i < self.edges.len()).collect();
        let seen: BTreeSet<usize> = sequence.iter().copied().collect();
        sequence.extend((0..self.edges.len()).filter(|i| !seen.contains(i)));
        loop {
            let mut changed = false;
            let mut out: HashMap<(usize, u32), usize> = HashMap::new();
            let mut inc: HashMap<(usize, u32), usize> = HashMap::new();
            for &i in &sequence {
                let (a, x, b) = self.edges[i];
                let (ra, rb) = (uf.find(a), uf.find(b));
                match out.get(&(ra, x)) {
                    Some(&t) if uf.find(t) != rb => {
                        uf.union(t, rb);
                        changed = true;
                        continue;
                    }
                    Some(_) => {}
                    None => {
                        out.insert((ra, x), rb);
                    }
                }
                let (ra, rb) = (uf.find(a), uf.find(b));
                match inc.get(&(rb, x)) {
                    Some(&s) if uf.find(s) != ra => {
                        uf.union(s, ra);
                        changed = true;
                    }
                    Some(_) => {}
                    None => {
                        inc.insert((rb, x), ra);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let classes = uf.classes();
        let count = classes.iter().max().map_or(0, |m| m + 1);
        let edges: BTreeSet<(usize, u32, usize)> =
            self.edges.iter().map(|&(a, x, b)| (classes[a], x, classes[b])).collect();
        let g = LabeledGraph {
            vertex_count: count,
            edges: edges.into_iter().collect(),
            basepoint: self.basepoint.map(|b| classes[b]),
        };
        debug_assert!(g.is_folded());
        g
    }

    /// Repeatedly removes valence-one vertices other than the basepoint, then
    /// isolated vertices. Returns the empty graph when nothing with a
    /// cycle or basepoint remains.
    pub fn core(&self) -> LabeledGraph {
        self.core_with_map().0
    }

    /// The core together with the old index of each surviving vertex.
    pub fn core_with_map(&self) -> (LabeledGraph, Vec<usize>) {
        let mut alive = vec![true; self.vertex_count];
        let mut edge_alive = vec![true; self.edges.len()];
        let mut deg = vec![0usize; self.vertex_count];
        for &(a, _, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertex_count];
        for (i, &(a, _, b)) in self.edges.iter().enumerate() {
            incident[a].push(i);
            if b != a {
                incident[b].push(i);
            }
        }
        let mut queue: VecDeque<usize> = (0..self.vertex_count).filter(|&v| deg[v] <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] || Some(v) == self.basepoint || deg[v] > 1 {
                continue;
            }
            alive[v] = false;
            for &i in &incident[v] {
                if edge_alive[i] {
                    edge_alive[i] = false;
                    let (a, _, b) = self.edges[i];
                    let other = if a == v { b } else { a };
                    deg[other] -= 1;
                    deg[v] -= 1;
                    if deg[other] <= 1 {
                        queue.push_back(other);
                    }
                }
            }
        }
        let keep: Vec<usize> = (0..self.vertex_count).filter(|&v| alive[v]).collect();
        let renum: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges = self
            .edges
            .iter()
            .zip(&edge_alive)
            .filter(|(_, &a)| a)
            .map(|(&(a, x, b), _)| (renum[&a], x, renum[&b]))
            .collect();
        let g = LabeledGraph { vertex_count: keep.len(), edges, basepoint: self.basepoint.map(|b| renum[&b]) };
        (g, keep)
    }

    /// Connected components as separate graphs (basepoint dropped).
    pub fn components(&self) -> Vec<LabeledGraph> {
        let mut uf = UnionFind::new(self.vertex_count);
        for &(a, _, b) in &self.edges {
            uf.union(a, b);
        }
        let classes = uf.classes();
        let count = classes.iter().max().map_or(0, |m| m + 1);
        let mut local = vec![0usize; self.vertex_count];
        let mut sizes = vec![0usize; count];
        for v in 0..self.vertex_count {
            local[v] = sizes[classes[v]];
            sizes[classes[v]] += 1;
        }
        let mut out: Vec<LabeledGraph> = sizes
            .iter()
            .map(|&n| LabeledGraph { vertex_count: n, edges: Vec::new(), basepoint: None })
            .collect();
        for &(a, x, b) in &self.edges {
            out[classes[a]].edges.push((local[a], x, local[b]));
        }
        out
    }

    /// Fiber product over the rose. Only vertices met by an edge are kept.
    pub fn pullback(g1: &LabeledGraph, g2: &LabeledGraph) -> LabeledGraph {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        if let (Some(b1), Some(b2)) = (g1.basepoint, g2.basepoint) {
            ids.insert((b1, b2), 0);
        }
        let mut edges = Vec::new();
        let mut by_label: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
        for &(a, x, b) in &g2.edges {
            by_label.entry(x).or_default().push((a, b));
        }
        for &(a1, x, b1) in &g1.edges {
            if let Some(list) = by_label.get(&x) {
                for &(a2, b2) in list {
                    let mut id = |p: (usize, usize)| {
                        let n = ids.len();
                        *ids.entry(p).or_insert(n)
                    };
                    let s = id((a1, a2));
                    let t = id((b1, b2));
                    edges.push((s, x, t));
                }
            }
        }
        let basepoint = match (g1.basepoint, g2.basepoint) {
            (Some(b1), Some(b2)) => ids.get(&(b1, b2)).copied(),
            _ => None,
        };
        LabeledGraph { vertex_count: ids.len(), edges, basepoint }
    }

    /// Canonical encoding of a connected folded graph: breadth-first
    /// numbering from the basepoint, or the least such encoding over all
    /// start vertices when unbased.
    pub fn canonical_code(&self) -> Vec<u32> {
        let labels: Vec<u32> = self.letters().into_iter().collect();
        let nav = Navigator::new(self);
        let starts: Vec<usize> = match self.basepoint {
            Some(b) => vec![b],
            None => (0..self.vertex_count).collect(),
        };
        starts.into_iter().map(|s| nav.bfs_code(s, &labels)).min().unwrap_or_default()
    }

    /// Relabels the vertices by the canonical breadth-first order.
    pub fn canonical(&self) -> LabeledGraph {
        if self.vertex_count == 0 {
            return self.clone();
        }
        let labels: Vec<u32> = self.letters().into_iter().collect();
        let nav = Navigator::new(self);
        let start = match self.basepoint {
            Some(b) => b,
            None => (0..self.vertex_count).min_by_key(|&s| nav.bfs_code(s, &labels)).unwrap(),
        };
        let order = nav.bfs_order(start, &labels);
        let mut pos = vec![usize::MAX; self.vertex_count];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut edges: Vec<(usize, u32, usize)> = self.edges.iter().map(|&(a, x, b)| (pos[a], x, pos[b])).collect();
        edges.sort();
        LabeledGraph { vertex_count: order.len(), edges, basepoint: self.basepoint.map(|b| pos[b]) }
    }

    /// A label-preserving map sending `from` to `to`, if one exists.
    pub fn immersion_from(&self, target: &LabeledGraph, from: usize, to: usize) -> Option<Vec<usize>> {
        let src = Navigator::new(self);
        let dst = Navigator::new(target);
        let mut image = vec![usize::MAX; self.vertex_count];
        image[from] = to;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for (l, w) in src.neighbours(v) {
                let tw = dst.step(image[v], &l)?;
                if image[w] == usize::MAX {
                    image[w] = tw;
                    queue.push_back(w);
                } else if image[w] != tw {
                    return None;
                }
            }
        }
        Some(image)
    }

    /// Some label-preserving map into `target` exists (any start vertex).
    pub fn immerses_into(&self, target: &LabeledGraph) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        (0..target.vertex_count).any(|t| self.immersion_from(target, 0, t).is_some())
    }
}

/// Adjacency index for fast letter steps in a folded graph.
pub(crate) struct Navigator {
    next: HashMap<(usize, u32, bool), usize>,
    adj: Vec<Vec<(Letter<u32>, usize)>>,
}

impl Navigator {
    pub(crate) fn new(g: &LabeledGraph) -> Self {
        let mut next = HashMap::new();
        let mut adj = vec![Vec::new(); g.vertex_count];
        for &(a, x, b) in &g.edges {
            next.insert((a, x, false), b);
            next.insert((b, x, true), a);
            adj[a].push((Letter::new(x, false), b));
            adj[b].push((Letter::new(x, true), a));
        }
        for list in &mut adj {
            list.sort();
        }
        Navigator { next, adj }
    }

    pub(crate) fn step(&self, v: usize, l: &Letter<u32>) -> Option<usize> {
        self.next.get(&(v, l.gen, l.inverse)).copied()
    }

    pub(crate) fn read(&self, mut v: usize, w: &FWord) -> Option<usize> {
        for l in w.letters() {
            v = self.step(v, l)?;
        }
        Some(v)
    }

    pub(crate) fn neighbours(&self, v: usize) -> impl Iterator<Item = (Letter<u32>, usize)> + '_ {
        self.adj[v].iter().copied()
    }

    fn bfs_order(&self, start: usize, labels: &[u32]) -> Vec<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut order = vec![start];
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for &x in labels {
                for inv in [false, true] {
                    if let Some(w) = self.step(v, &Letter::new(x, inv)) {
                        if seen.insert(w) {
                            order.push(w);
                        }
                    }
                }
            }
            i += 1;
        }
        order
    }

    fn bfs_code(&self, start: usize, labels: &[u32]) -> Vec<u32> {
        let order = self.bfs_order(start, labels);
        let pos: HashMap<usize, u32> = order.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut code = vec![order.len() as u32];
        for &v in &order {
            for &x in labels {
                for inv in [false, true] {
                    code.push(self.step(v, &Letter::new(x, inv)).map_or(u32::MAX, |w| pos[&w]));
                }
            }
        }
        code
    }

    /// Spanning-tree words from `root` to every reachable vertex.
    pub(crate) fn tree_paths(&self, root: usize) -> HashMap<usize, FWord> {
        let mut paths = HashMap::from([(root, FWord::identity())]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (l, w) in self.neighbours(v) {
                if !paths.contains_key(&w) {
                    let p = paths[&v].mul(&Word::from_letters([l]));
                    paths.insert(w, p);
                    queue.push_back(w);
                }
            }
        }
        paths
    }
}

/// A finitely generated subgroup, held as its based folded Stallings graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    pub graph: LabeledGraph,
}

impl Subgroup {
    pub fn from_generators(words: &[FWord]) -> Self {
        let g = LabeledGraph::wedge_of_words(words).fold().core();
        Subgroup { graph: g.canonical() }
    }

    pub fn trivial() -> Self {
        Self::from_generators(&[])
    }

    pub fn contains(&self, w: &FWord) -> bool {
        let b = self.graph.basepoint.expect("subgroup graphs are based");
        self.graph.read(b, w) == Some(b)
    }

    pub fn rank(&self) -> usize {
        self.graph.rank()
    }

    fn spanning_tree(&self, nav: &Navigator) -> BTreeSet<(usize, u32, usize)> {
        let b = self.graph.basepoint.expect("subgroup graphs are based");
        let mut tree_edges = BTreeSet::new();
        let mut seen = BTreeSet::from([b]);
        let mut queue = VecDeque::from([b]);
        while let Some(v) = queue.pop_front() {
            for (l, w) in nav.neighbours(v) {
                if seen.insert(w) {
                    tree_edges.insert(if l.inverse { (w, l.gen, v) } else { (v, l.gen, w) });
                    queue.push_back(w);
                }
            }
        }
        tree_edges
    }

    /// Free basis read off a spanning tree.
    pub fn basis(&self) -> Vec<FWord> {
        let b = self.graph.basepoint.expect("subgroup graphs are based");
        let nav = Navigator::new(&self.graph);
        let paths = nav.tree_paths(b);
        let tree_edges = self.spanning_tree(&nav);
        let mut out = Vec::new();
        for &(a, x, c) in &self.graph.edges {
            if !tree_edges.contains(&(a, x, c)) {
                out.push(paths[&a].mul(&FWord::gen(x)).mul(&paths[&c].inverse()));
            }
        }
        out
    }

    /// `w` written in the letters of `basis()`, letter `i` standing for the
    /// `i`-th basis element. `None` when `w` is not in the subgroup.
    pub fn coordinates(&self, w: &FWord) -> Option<FWord> {
        let b = self.graph.basepoint.expect("subgroup graphs are based");
        let nav = Navigator::new(&self.graph);
        let tree_edges = self.spanning_tree(&nav);
        let index: HashMap<(usize, u32, usize), u32> = self
            .graph
            .edges
            .iter()
            .filter(|e| !tree_edges.contains(e))
            .enumerate()
            .map(|(i, &e)| (e, i as u32))
            .collect();
        let mut v = b;
        let mut out = Vec::new();
        for l in w.letters() {
            let next = nav.step(v, l)?;
            let edge = if l.inverse { (next, l.gen, v) } else { (v, l.gen, next) };
            if let Some(&i) = index.get(&edge) {
                out.push(Letter::new(i, l.inverse));
            }
            v = next;
        }
        (v == b).then(|| Word::from_letters(out))
    }

    /// `w · H · w⁻¹`
    pub fn conjugate(&self, w: &FWord) -> Subgroup {
        let gens: Vec<FWord> = self.basis().iter().map(|g| g.conjugate_by(w)).collect();
        Subgroup::from_generators(&gens)
    }

    /// `self ≤ other`
    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.basis().iter().all(|g| other.contains(g))
    }

    pub fn intersection(&self, other: &Subgroup) -> Subgroup {
        let p = LabeledGraph::pullback(&self.graph, &other.graph);
        let mut g = p.fold().core();
        if g.basepoint.is_none() {
            return Subgroup::trivial();
        }
        // keep only the basepoint component
        let comps = {
            let mut uf = UnionFind::new(g.vertex_count);
            for &(a, _, b) in &g.edges {
                uf.union(a, b);
            }
            uf.classes()
        };
        let b = g.basepoint.unwrap();
        g.edges.retain(|&(a, _, _)| comps[a] == comps[b]);
        Subgroup { graph: g.core().canonical() }
    }

    /// Core graph of the conjugacy class.
    pub fn conjugacy_class(&self) -> LabeledGraph {
        let mut g = self.graph.clone();
        g.basepoint = None;
        g.core().canonical()
    }

    /// `v` with `v · self · v⁻¹ ≤ other`, found by immersing the core of
    /// `self` into the graph of `other`.
    pub fn conjugator_into(&self, other: &Subgroup) -> Option<FWord> {
        let mut unbased = self.graph.clone();
        unbased.basepoint = None;
        let (core, old) = unbased.core_with_map();
        if core.vertex_count == 0 {
            return Some(FWord::identity());
        }
        let b = self.graph.basepoint.expect("based");
        let q = Navigator::new(&self.graph).tree_paths(b)[&old[0]].clone();
        let ob = other.graph.basepoint.expect("based");
        let p = Navigator::new(&other.graph).tree_paths(ob);
        (0..other.graph.vertex_count)
            .find(|&t| core.immersion_from(&other.graph, 0, t).is_some())
            .map(|t| p[&t].mul(&q.inverse()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_basis_word;

    fn w(s: &str) -> FWord {
        parse_basis_word(s).unwrap()
    }

    #[test]
    fn single_fold() {
        let g = LabeledGraph { vertex_count: 3, edges: vec![(0, 0, 1), (0, 0, 2)], basepoint: Some(0) };
        let f = g.fold();
        assert_eq!(f.vertex_count, 2);
        assert_eq!(f.edges.len(), 1);
        assert_eq!(f.fold(), f);
    }

    #[test]
    fn redundant_path_folds_onto_rose() {
        let s = Subgroup::from_generators(&[w("a"), w("b"), w("ab")]);
        assert_eq!(s.graph.vertex_count, 1);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn core_removes_hanging_paths() {
        let mut g = LabeledGraph::wedge_of_words(&[w("a"), w("b")]);
        g.add_path(0, &w("cc"), 0);
        g.edges.push((0, 2, 5));
        g.vertex_count = 6;
        g.basepoint = None;
        let c = g.core();
        assert_eq!(c.vertex_count, 2);
        assert_eq!(c.rank(), 3);
        let tree = LabeledGraph { vertex_count: 3, edges: vec![(0, 0, 1), (1, 1, 2)], basepoint: None };
        assert_eq!(tree.core().vertex_count, 0);
    }

    #[test]
    fn membership() {
        let s = Subgroup::from_generators(&[w("a"), w("cbC")]);
        assert!(s.contains(&w("acBCa")));
        assert!(!s.contains(&w("b")));
        assert!(!s.contains(&w("c")));
        assert_eq!(s.basis().len(), 2);
    }

    #[test]
    fn canonical_code_ignores_numbering() {
        let g1 = LabeledGraph { vertex_count: 2, edges: vec![(0, 0, 1), (1, 1, 0), (1, 2, 1)], basepoint: None };
        let g2 = LabeledGraph { vertex_count: 2, edges: vec![(1, 0, 0), (0, 1, 1), (0, 2, 0)], basepoint: None };
        assert_eq!(g1.canonical_code(), g2.canonical_code());
        assert_eq!(g1.canonical(), g2.canonical());
    }

    #[test]
    fn conjugator_into_finds_the_shift() {
        let small = Subgroup::from_generators(&[w("cbC")]);
        let big = Subgroup::from_generators(&[w("a"), w("b")]);
        let v = small.conjugator_into(&big).unwrap();
        assert!(small.conjugate(&v).is_subgroup_of(&big));
        assert!(Subgroup::from_generators(&[w("c")]).conjugator_into(&big).is_none());
    }

    #[test]
    fn coordinates_in_a_basis() {
        let s = Subgroup::from_generators(&[w("ab"), w("cbC")]);
        let basis = s.basis();
        for x in [w("abcBC"), w("cBCBA"), FWord::identity()] {
            let c = s.coordinates(&x).unwrap();
            assert_eq!(c.substitute(|&i| basis[i as usize].clone()), x);
        }
        assert!(s.coordinates(&w("a")).is_none());
    }

    #[test]
    fn intersections() {
        let a = Subgroup::from_generators(&[w("a"), w("b")]);
        let b = Subgroup::from_generators(&[w("a"), w("cbC")]);
        let i = a.intersection(&b);
        assert_eq!(i.rank(), 1);
        assert!(i.contains(&w("a")));
    }
}
