//! Clopen subsets of end spaces, prefix metrics and their averages over a
//! finite group, ε-path partitions, and the mapping telescope of a refining
//! sequence of partitions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ParseError;
use crate::graph_model::{states_with_ends, Automaton, VertexPath};
use crate::group::FiniteGroup;
use crate::union_find::UnionFind;

pub type Rational = Ratio<i128>;

/// Depth limit keeping dyadic distances and their averages inside `i128`.
pub const MAX_DEPTH: usize = 56;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndSpaceError {
    #[error("cylinder permutations do not form an action of the group")]
    NotAnAction,
    #[error("depth {depth} cannot separate cylinders at scale {eps}")]
    DepthTooShallow { depth: usize, eps: String },
    #[error("partition {0} does not refine its predecessor")]
    NotRefining(usize),
    #[error("partition at level {0} is not invariant under the action")]
    NotInvariant(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("depth {0} exceeds the supported maximum")]
    TooDeep(usize),
}

/// The depth-`D` cylinders of an end space, i.e. the depth-`D` vertices with
/// at least one end below them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CylinderSpace {
    pub automaton: Automaton,
    pub depth: usize,
    pub cylinders: Vec<VertexPath>,
    #[serde(skip)]
    index: HashMap<VertexPath, usize>,
}

impl CylinderSpace {
    pub fn new(automaton: &Automaton, depth: usize) -> Result<Self, EndSpaceError> {
        if depth > MAX_DEPTH {
            return Err(EndSpaceError::TooDeep(depth));
        }
        let ends = states_with_ends(automaton);
        let mut level: Vec<(VertexPath, usize)> = Vec::new();
        if ends[automaton.root()] {
            level.push((VertexPath::root(), automaton.root()));
        }
        for _ in 0..depth {
            let mut next = Vec::new();
            for (p, s) in &level {
                for (i, &c) in automaton.children(*s).iter().enumerate() {
                    if ends[c] {
                        next.push((p.child(i as u32), c));
                    }
                }
            }
            level = next;
        }
        let cylinders: Vec<VertexPath> = level.into_iter().map(|(p, _)| p).collect();
        let index = cylinders.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(CylinderSpace { automaton: automaton.clone(), depth, cylinders, index })
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn index_of(&self, p: &VertexPath) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Depth-`D` cylinders inside the shadow of `v`.
    pub fn below(&self, v: &VertexPath) -> Vec<usize> {
        (0..self.len()).filter(|&i| v.is_prefix_of(&self.cylinders[i])).collect()
    }

    /// Base distance between distinct cylinders, `2^-(common prefix)`.
    pub fn base_distance(&self, i: usize, j: usize) -> Rational {
        if i == j {
            return Rational::zero();
        }
        let k = self.cylinders[i].common_prefix_len(&self.cylinders[j]);
        Rational::new(1, 1i128 << k)
    }

    /// Coarsest non-nested cylinder list whose shadows union to `set`.
    pub fn normalize(&self, set: &BTreeSet<usize>) -> ClopenSet {
        let mut current: BTreeSet<VertexPath> = set.iter().map(|&i| self.cylinders[i].clone()).collect();
        for _ in 0..self.depth {
            let mut parents: BTreeMap<VertexPath, usize> = BTreeMap::new();
            for p in &current {
                if let Some(q) = p.parent() {
                    *parents.entry(q).or_default() += 1;
                }
            }
            let mut merged = false;
            for (q, count) in parents {
                let full = self.children_with_ends(&q);
                if full > 0 && count == full {
                    current.retain(|p| p.parent().as_ref() != Some(&q));
                    current.insert(q);
                    merged = true;
                }
            }
            if !merged {
                break;
            }
        }
        ClopenSet { cylinders: current.into_iter().collect(), reference_depth: self.depth }
    }

    fn children_with_ends(&self, q: &VertexPath) -> usize {
        let ends = states_with_ends(&self.automaton);
        match self.automaton.state_at(q) {
            Some(s) => self.automaton.children(s).iter().filter(|&&c| ends[c]).count(),
            None => 0,
        }
    }

    /// Cylinder indices covered by `set`.
    pub fn expand(&self, set: &ClopenSet) -> BTreeSet<usize> {
        (0..self.len()).filter(|&i| set.contains(&self.cylinders[i])).collect()
    }
}

/// A finite union of shadows of vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClopenSet {
    pub cylinders: Vec<VertexPath>,
    pub reference_depth: usize,
}

impl ClopenSet {
    /// True when the end through `p` lies in the set.
    pub fn contains(&self, p: &VertexPath) -> bool {
        self.cylinders.iter().any(|c| c.is_prefix_of(p))
    }
}

/// Action of a finite group by permutations of depth-`D` cylinders.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CylinderAction {
    pub group: FiniteGroup,
    pub perms: Vec<Vec<usize>>,
}

impl CylinderAction {
    pub fn new(group: FiniteGroup, perms: Vec<Vec<usize>>) -> Result<Self, EndSpaceError> {
        if !group.is_action(&perms) {
            return Err(EndSpaceError::NotAnAction);
        }
        Ok(CylinderAction { group, perms })
    }

    pub fn trivial(space: &CylinderSpace) -> Self {
        CylinderAction { group: FiniteGroup::trivial(), perms: vec![(0..space.len()).collect()] }
    }

    /// Builds the permutations from a map on cylinder paths.
    pub fn from_fn<F: Fn(usize, &VertexPath) -> VertexPath>(
        space: &CylinderSpace,
        group: FiniteGroup,
        f: F,
    ) -> Result<Self, EndSpaceError> {
        let mut perms = Vec::with_capacity(group.order());
        for g in group.elements() {
            let perm = space
                .cylinders
                .iter()
                .map(|p| space.index_of(&f(g, p)).ok_or(EndSpaceError::NotAnAction))
                .collect::<Result<Vec<_>, _>>()?;
            perms.push(perm);
        }
        Self::new(group, perms)
    }

    pub fn apply(&self, g: usize, i: usize) -> usize {
        self.perms[g][i]
    }
}

/// Pairwise distances between depth-`D` cylinders, exact.
#[derive(Clone, Debug)]
pub struct EndMetric {
    pub averaged: bool,
    pub depth: usize,
    matrix: Vec<Vec<Rational>>,
}

impl EndMetric {
    pub fn base(space: &CylinderSpace) -> Self {
        let n = space.len();
        let matrix = (0..n).map(|i| (0..n).map(|j| space.base_distance(i, j)).collect()).collect();
        EndMetric { averaged: false, depth: space.depth, matrix }
    }

    pub fn distance(&self, i: usize, j: usize) -> Rational {
        self.matrix[i][j]
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn is_invariant(&self, action: &CylinderAction) -> bool {
        let n = self.len();
        action.group.elements().all(|g| {
            (0..n).all(|i| (0..n).all(|j| self.matrix[action.apply(g, i)][action.apply(g, j)] == self.matrix[i][j]))
        })
    }
}

/// `d'(p, q) = (1/|H|) Σ_h d(hp, hq)`.
pub fn average_metric(d: &EndMetric, action: &CylinderAction) -> Result<EndMetric, EndSpaceError> {
    if !action.group.is_action(&action.perms) || action.perms[0].len() != d.len() {
        return Err(EndSpaceError::NotAnAction);
    }
    let n = d.len();
    let order = action.group.order() as i128;
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sum: Rational = action
                        .group
                        .elements()
                        .map(|h| d.distance(action.apply(h, i), action.apply(h, j)))
                        .fold(Rational::zero(), |a, b| a + b);
                    sum / Rational::from_integer(order)
                })
                .collect()
        })
        .collect();
    let out = EndMetric { averaged: true, depth: d.depth, matrix };
    debug_assert!(out.is_invariant(action));
    Ok(out)
}

/// A partition of the end space into clopen blocks, recorded on the cylinders
/// of one depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub level: usize,
    pub names: Vec<String>,
    pub blocks: Vec<ClopenSet>,
    /// Block index of every depth-`D` cylinder.
    pub block_of: Vec<usize>,
}

impl Partition {
    pub fn trivial(space: &CylinderSpace) -> Self {
        Self::from_labels(space, 0, &vec![0; space.len()])
    }

    /// Blocks numbered by their first cylinder.
    pub fn from_labels(space: &CylinderSpace, level: usize, labels: &[usize]) -> Self {
        let mut renum: BTreeMap<usize, usize> = BTreeMap::new();
        let block_of: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = renum.len();
                *renum.entry(*l).or_insert(next)
            })
            .collect();
        let count = renum.len();
        let mut members = vec![BTreeSet::new(); count];
        for (i, &b) in block_of.iter().enumerate() {
            members[b].insert(i);
        }
        let blocks = members.iter().map(|m| space.normalize(m)).collect();
        let names = (0..count).map(|b| format!("P{level}_{b}")).collect();
        Partition { level, names, blocks, block_of }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn members(&self, b: usize) -> Vec<usize> {
        (0..self.block_of.len()).filter(|&i| self.block_of[i] == b).collect()
    }

    /// Parses `block <name>: <path>,<path>,...` lines against `space`.
    pub fn parse(space: &CylinderSpace, level: usize, text: &str) -> Result<Self, ParseError> {
        let mut labels = vec![usize::MAX; space.len()];
        let mut names = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rest = line.strip_prefix("block").ok_or_else(|| ParseError::at(lineno + 1, "expected `block`"))?;
            let (name, paths) = rest.split_once(':').ok_or_else(|| ParseError::at(lineno + 1, "missing `:`"))?;
            let b = names.len();
            names.push(name.trim().to_string());
            for p in paths.split(',').filter(|p| !p.trim().is_empty()) {
                let v: VertexPath = p.parse().map_err(|e: ParseError| ParseError::at(lineno + 1, e.message))?;
                if v.depth() > space.depth {
                    return Err(ParseError::at(lineno + 1, format!("path {v} is deeper than {}", space.depth)));
                }
                for i in space.below(&v) {
                    if labels[i] != usize::MAX {
                        return Err(ParseError::at(lineno + 1, format!("blocks overlap at {}", space.cylinders[i])));
                    }
                    labels[i] = b;
                }
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(ParseError::new(format!("cylinder {} is not covered", space.cylinders[i])));
        }
        let mut p = Partition::from_labels(space, level, &labels);
        // from_labels renumbers by first cylinder; carry the names along
        let mut first: Vec<(usize, usize)> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            if !first.iter().any(|&(x, _)| x == l) {
                first.push((l, p.block_of[i]));
            }
        }
        for (orig, new) in first {
            p.names[new] = names[orig].clone();
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, b) in self.names.iter().zip(&self.blocks) {
            let paths: Vec<String> = b.cylinders.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "block {name}: {}", paths.join(","));
        }
        out
    }
}

/// ε-path components: union-find over cylinders joined at distance `< ε`.
pub fn epsilon_partition(
    space: &CylinderSpace,
    m: &EndMetric,
    eps: Rational,
    level: usize,
) -> Result<Partition, EndSpaceError> {
    let resolution = Rational::new(1, 1i128 << space.depth);
    if eps <= resolution {
        return Err(EndSpaceError::DepthTooShallow { depth: space.depth, eps: eps.to_string() });
    }
    let n = m.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if m.distance(i, j) < eps {
                uf.union(i, j);
            }
        }
    }
    Ok(Partition::from_labels(space, level, &uf.classes()))
}

/// Every block of `p` lies inside a block of `q`.
pub fn refines(p: &Partition, q: &Partition) -> bool {
    let mut image: Vec<Option<usize>> = vec![None; p.len()];
    for (i, &b) in p.block_of.iter().enumerate() {
        match image[b] {
            None => image[b] = Some(q.block_of[i]),
            Some(x) if x != q.block_of[i] => return false,
            _ => {}
        }
    }
    true
}

/// `ε_n = base^-n`, the default schedule being `base = 2`.
pub fn eps_schedule(base: i128, n: usize) -> Rational {
    Rational::new(1, base.pow(n as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TelescopeVertex {
    pub level: usize,
    pub block: usize,
}

/// Mapping telescope of a refining sequence of partitions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TelescopeTree {
    pub levels: Vec<Partition>,
    pub vertices: Vec<TelescopeVertex>,
    /// `(child, parent)`: block at level `n + 1` inside block at level `n`.
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
    /// Vertex id of each `(level, block)`.
    offsets: Vec<usize>,
}

pub fn telescope(seq: &[Partition]) -> Result<TelescopeTree, EndSpaceError> {
    if seq.first().map(|p| p.len()) != Some(1) {
        return Err(EndSpaceError::NotRefining(0));
    }
    let mut vertices = Vec::new();
    let mut offsets = Vec::new();
    for (n, p) in seq.iter().enumerate() {
        offsets.push(vertices.len());
        vertices.extend((0..p.len()).map(|b| TelescopeVertex { level: n, block: b }));
    }
    let mut edges = Vec::new();
    for n in 1..seq.len() {
        if !refines(&seq[n], &seq[n - 1]) {
            return Err(EndSpaceError::NotRefining(n));
        }
        for b in 0..seq[n].len() {
            let first = seq[n].members(b)[0];
            let parent = seq[n - 1].block_of[first];
            edges.push((offsets[n] + b, offsets[n - 1] + parent));
        }
    }
    Ok(TelescopeTree { levels: seq.to_vec(), vertices, edges, root: 0, offsets })
}

impl TelescopeTree {
    pub fn vertex_id(&self, level: usize, block: usize) -> usize {
        self.offsets[level] + block
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.edges.iter().find(|&&(c, _)| c == v).map(|&(_, p)| p)
    }

    /// Connected, acyclic, and every non-root vertex has a single parent one
    /// level up.
    pub fn is_tree(&self) -> bool {
        let n = self.vertices.len();
        if self.edges.len() + 1 != n {
            return false;
        }
        let mut uf = UnionFind::new(n);
        for &(c, p) in &self.edges {
            if self.vertices[c].level != self.vertices[p].level + 1 || !uf.union(c, p) {
                return false;
            }
        }
        let mut parents = vec![0usize; n];
        for &(c, _) in &self.edges {
            parents[c] += 1;
        }
        (0..n).all(|v| parents[v] == usize::from(v != self.root))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph telescope {\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  \"{}\";", self.levels[v.level].names[v.block]);
        }
        for &(c, p) in &self.edges {
            let (vc, vp) = (self.vertices[c], self.vertices[p]);
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\";",
                self.levels[vc.level].names[vc.block],
                self.levels[vp.level].names[vp.block]
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Correspondence between level-`n` vertices and the clopen sets they cut out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryMap {
    /// `per_level[n][b]` is the set of ends below vertex `(n, b)`.
    pub per_level: Vec<Vec<ClopenSet>>,
    /// The branch through each cylinder: its vertex id at every level.
    pub branch: Vec<Vec<usize>>,
}

pub fn boundary_map(t: &TelescopeTree) -> BoundaryMap {
    let per_level = t.levels.iter().map(|p| p.blocks.clone()).collect();
    let cylinders = t.levels.first().map_or(0, |p| p.block_of.len());
    let branch = (0..cylinders)
        .map(|i| t.levels.iter().enumerate().map(|(n, p)| t.vertex_id(n, p.block_of[i])).collect())
        .collect();
    BoundaryMap { per_level, branch }
}

impl BoundaryMap {
    /// Each level's vertices correspond bijectively to disjoint nonempty
    /// blocks covering every cylinder.
    pub fn is_bijective(&self, t: &TelescopeTree) -> bool {
        t.levels.iter().enumerate().all(|(n, p)| {
            let mut hit = vec![false; p.len()];
            for b in &self.branch {
                let v = t.vertices[b[n]];
                if v.level != n {
                    return false;
                }
                hit[v.block] = true;
            }
            hit.iter().all(|&h| h)
        })
    }

    /// `branch(h·c) = h·branch(c)` for every element and cylinder.
    pub fn is_equivariant(&self, cyl: &CylinderAction, tel: &TelescopeAction) -> bool {
        cyl.group.elements().all(|h| {
            (0..self.branch.len()).all(|i| {
                let image = &self.branch[cyl.apply(h, i)];
                self.branch[i].iter().zip(image).all(|(&v, &w)| tel.perms[h][v] == w)
            })
        })
    }
}

/// Simplicial action on the telescope induced by a cylinder action.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TelescopeAction {
    pub perms: Vec<Vec<usize>>,
}

pub fn induced_telescope_action(t: &TelescopeTree, action: &CylinderAction) -> Result<TelescopeAction, EndSpaceError> {
    let mut perms = Vec::with_capacity(action.group.order());
    for h in action.group.elements() {
        let mut perm = vec![usize::MAX; t.vertices.len()];
        for (n, p) in t.levels.iter().enumerate() {
            for b in 0..p.len() {
                let members = p.members(b);
                let target = p.block_of[action.apply(h, members[0])];
                let image: Vec<usize> = members.iter().map(|&i| action.apply(h, i)).collect();
                let mut expected = p.members(target);
                let mut got = image.clone();
                expected.sort();
                got.sort();
                if expected != got {
                    return Err(EndSpaceError::NotInvariant(n));
                }
                perm[t.vertex_id(n, b)] = t.vertex_id(n, target);
            }
        }
        perms.push(perm);
    }
    let out = TelescopeAction { perms };
    debug_assert!(out.is_simplicial(t));
    Ok(out)
}

impl TelescopeAction {
    /// Preserves levels and maps edges to edges.
    pub fn is_simplicial(&self, t: &TelescopeTree) -> bool {
        let edges: BTreeSet<(usize, usize)> = t.edges.iter().copied().collect();
        self.perms.iter().all(|perm| {
            (0..t.vertices.len()).all(|v| t.vertices[perm[v]].level == t.vertices[v].level)
                && t.edges.iter().all(|&(c, p)| edges.contains(&(perm[c], perm[p])))
        })
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }
}

/// Partitions at `ε_n = base^-n` for `n = 0..levels`, the first one trivial.
pub fn standard_sequence(
    space: &CylinderSpace,
    m: &EndMetric,
    levels: usize,
    base: i128,
) -> Result<Vec<Partition>, EndSpaceError> {
    let mut seq = vec![Partition::trivial(space)];
    for n in 1..levels {
        seq.push(epsilon_partition(space, m, eps_schedule(base, n), n)?);
    }
    Ok(seq)
}
