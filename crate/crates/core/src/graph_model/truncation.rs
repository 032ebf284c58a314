use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::automaton::{Automaton, VertexPath};
use crate::union_find::UnionFind;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncVertex {
    pub path: VertexPath,
    pub state: usize,
}

/// The unfolding of an automaton cut off at a fixed depth.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Truncation {
    pub depth: usize,
    /// Sorted by depth, then lexicographically.
    pub vertices: Vec<TruncVertex>,
    /// Parent to child, as vertex indices.
    pub tree_edges: Vec<(usize, usize)>,
    /// `(vertex, loop index)`
    pub loop_edges: Vec<(usize, u32)>,
    /// Depth-`depth` vertices that still have children in the unfolding.
    pub frontier: Vec<usize>,
    #[serde(skip)]
    index: HashMap<VertexPath, usize>,
}

/// Materializes the unfolding of `a` to the given depth.
pub fn unfold(a: &Automaton, depth: usize) -> Truncation {
    let mut vertices = vec![TruncVertex { path: VertexPath::root(), state: a.root() }];
    let mut tree_edges = Vec::new();
    let mut start = 0;
    for _ in 0..depth {
        let end = vertices.len();
        for v in start..end {
            let (path, state) = (vertices[v].path.clone(), vertices[v].state);
            for (i, &c) in a.children(state).iter().enumerate() {
                tree_edges.push((v, vertices.len()));
                vertices.push(TruncVertex { path: path.child(i as u32), state: c });
            }
        }
        start = end;
    }
    let loop_edges = vertices
        .iter()
        .enumerate()
        .flat_map(|(v, tv)| (0..a.loops(tv.state)).map(move |k| (v, k)))
        .collect();
    let frontier = (start..vertices.len()).filter(|&v| !a.children(vertices[v].state).is_empty()).collect();
    let index = vertices.iter().enumerate().map(|(i, v)| (v.path.clone(), i)).collect();
    Truncation { depth, vertices, tree_edges, loop_edges, frontier, index }
}

impl Truncation {
    pub fn index_of(&self, path: &VertexPath) -> Option<usize> {
        if self.index.is_empty() && !self.vertices.is_empty() {
            return self.vertices.iter().position(|v| &v.path == path);
        }
        self.index.get(path).copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn to_finite_graph(&self) -> FiniteGraph {
        let mut edges = self.tree_edges.clone();
        edges.extend(self.loop_edges.iter().map(|&(v, _)| (v, v)));
        FiniteGraph { vertex_count: self.vertices.len(), edges, basepoint: Some(0) }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph truncation {\n");
        for v in &self.vertices {
            out.push_str(&format!("  \"{}\";\n", v.path));
        }
        for &(p, c) in &self.tree_edges {
            out.push_str(&format!("  \"{}\" -- \"{}\";\n", self.vertices[p].path, self.vertices[c].path));
        }
        for &(v, k) in &self.loop_edges {
            let p = &self.vertices[v].path;
            out.push_str(&format!("  \"{p}\" -- \"{p}\" [label=\"{k}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// A finite multigraph; loops and parallel edges are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub basepoint: Option<usize>,
}

impl FiniteGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        FiniteGraph { vertex_count, edges, basepoint: None }
    }

    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.vertex_count);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.classes().into_iter().max().map_or(0, |m| m + 1)
    }

    /// E − V + #components.
    pub fn betti(&self) -> usize {
        self.edges.len() + self.component_count() - self.vertex_count
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count > 0 && self.component_count() == 1 && self.edges.len() + 1 == self.vertex_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.vertex_count {
            out.push_str(&format!("  v{v};\n"));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_loop_ray_depth_three() {
        let t = unfold(&Automaton::loop_ray(2), 3);
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(t.tree_edges.len(), 3);
        assert_eq!(t.loop_edges.len(), 8);
        assert_eq!(t.frontier.len(), 1);
        assert_eq!(t.to_finite_graph().betti(), 8);
    }

    #[test]
    fn depth_zero_is_root_with_loops() {
        let a = Automaton::from_named("r", &[("r", 3, vec!["t"]), ("t", 0, vec![])]).unwrap();
        let t = unfold(&a, 0);
        assert_eq!(t.vertex_count(), 1);
        assert_eq!(t.loop_edges.len(), 3);
        assert!(t.tree_edges.is_empty());
    }

    #[test]
    fn cantor_depth_two() {
        let t = unfold(&Automaton::cantor(), 2);
        assert_eq!(t.vertex_count(), 7);
        assert_eq!(t.tree_edges.len(), 6);
        assert!(t.to_finite_graph().is_tree());
        assert_eq!(t.index_of(&"1/0".parse().unwrap()), Some(5));
    }
}
