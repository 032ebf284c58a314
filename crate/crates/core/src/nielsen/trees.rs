use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use super::cover::{f_star_groups, interval_groups, CoreModel};
use super::NielsenError;
use crate::stallings::Subgroup;
use crate::word::FWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TreeKind {
    /// Built from the bands themselves.
    T,
    /// Built from the averaged free factor systems.
    TStar,
    /// Obtained from `TStar` by folding moves.
    TDoubleStar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeVertex {
    pub height: usize,
    pub group: Subgroup,
}

/// Joins a vertex at some height to one a level higher; the edge group is
/// a subgroup of both vertex groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeEdge {
    pub lower: usize,
    pub upper: usize,
    pub group: Subgroup,
}

/// A finite tree of free groups graded by height, with all inclusions based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeOfGroups {
    pub kind: TreeKind,
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<TreeEdge>,
}

fn join(a: &Subgroup, b: &Subgroup) -> Subgroup {
    let mut gens = a.basis();
    gens.extend(b.basis());
    Subgroup::from_generators(&gens)
}

fn conj_into(a: &Subgroup, b: &Subgroup) -> bool {
    a.conjugacy_class().immerses_into(&b.conjugacy_class())
}

fn same_group(a: &Subgroup, b: &Subgroup) -> bool {
    a.is_subgroup_of(b) && b.is_subgroup_of(a)
}

impl TreeOfGroups {
    /// `Σ rk G(v) − Σ rk G(e)`, the rank of the fundamental group.
    pub fn rank(&self) -> i64 {
        self.vertices.iter().map(|v| v.group.rank() as i64).sum::<i64>()
            - self.edges.iter().map(|e| e.group.rank() as i64).sum::<i64>()
    }

    pub fn max_height(&self) -> usize {
        self.vertices.iter().map(|v| v.height).max().unwrap_or(0)
    }

    /// Vertex counts by height.
    pub fn shape(&self) -> Vec<usize> {
        let mut out = vec![0; self.max_height() + 1];
        for v in &self.vertices {
            out[v.height] += 1;
        }
        out
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let edge = &self.edges[e];
        if edge.lower == v {
            edge.upper
        } else {
            edge.lower
        }
    }

    /// Checks the grading: a single vertex at height 0, edges joining
    /// consecutive heights, a tree, and every vertex above height 0 joined
    /// to one just below it.
    pub fn check_axioms(&self) -> Result<(), NielsenError> {
        let fail = |what: &str| Err(NielsenError::StructureViolation(what.to_string()));
        let n = self.vertices.len();
        if self.vertices.iter().filter(|v| v.height == 0).count() != 1 {
            return fail("unique root");
        }
        for e in &self.edges {
            if e.lower >= n || e.upper >= n || self.vertices[e.lower].height + 1 != self.vertices[e.upper].height {
                return fail("edges join consecutive heights");
            }
        }
        let mut uf = crate::union_find::UnionFind::new(n);
        for e in &self.edges {
            uf.union(e.lower, e.upper);
        }
        let classes = uf.classes();
        if self.edges.len() + 1 != n || classes.iter().any(|&c| c != classes[0]) {
            return fail("tree");
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.height > 0 && !self.edges.iter().any(|e| e.upper == i) {
                return fail("upward connectivity");
            }
        }
        Ok(())
    }

    /// Rebases groups along a breadth-first search from the root so that
    /// every edge group sits inside both of its vertex groups.
    fn normalize_basing(&mut self) -> Result<(), NielsenError> {
        let root = self.vertices.iter().position(|v| v.height == 0).unwrap();
        let mut seen = vec![false; self.vertices.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for e in 0..self.edges.len() {
                if self.edges[e].lower != x && self.edges[e].upper != x {
                    continue;
                }
                let y = self.other_end(e, x);
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                let gx = self.vertices[x].group.clone();
                let c = &self.edges[e].group;
                if !c.is_subgroup_of(&gx) {
                    let v = c.conjugator_into(&gx).ok_or_else(|| {
                        NielsenError::StructureViolation(format!("edge group {e} does not fit its vertex"))
                    })?;
                    self.edges[e].group = c.conjugate(&v);
                }
                let c = self.edges[e].group.clone();
                let gy = &self.vertices[y].group;
                if !c.is_subgroup_of(gy) {
                    let v = c.conjugator_into(gy).ok_or_else(|| {
                        NielsenError::StructureViolation(format!("edge group {e} does not fit its vertex"))
                    })?;
                    self.vertices[y].group = gy.conjugate(&v.inverse());
                }
                queue.push_back(y);
            }
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph tree_of_groups {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"h{} rk{}\"];", v.height, v.group.rank());
        }
        for e in &self.edges {
            let _ = writeln!(s, "  v{} -- v{} [label=\"rk{}\"];", e.lower, e.upper, e.group.rank());
        }
        s.push_str("}\n");
        s
    }
}

/// Builds `T` or `T*` from the cover of `model`: one vertex per component
/// at each interval and one edge per component at each overlap.
pub fn build_tree_of_groups(model: &CoreModel, kind: TreeKind) -> Result<TreeOfGroups, NielsenError> {
    let cover = &model.cover;
    let groups = |j| match kind {
        TreeKind::T => Ok(interval_groups(model, j)),
        TreeKind::TStar => f_star_groups(model, j),
        TreeKind::TDoubleStar => Err(NielsenError::StructureViolation("folded trees are not built directly".into())),
    };
    let mut vertices = Vec::new();
    for (n, &j) in cover.intervals.iter().enumerate() {
        vertices.extend(groups(j)?.into_iter().map(|group| TreeVertex { height: n, group }));
    }
    let mut edges = Vec::new();
    for n in 0..cover.intervals.len() - 1 {
        for group in groups(cover.overlap(n))? {
            let find = |h: usize| -> Result<usize, NielsenError> {
                let hits: Vec<usize> = (0..vertices.len())
                    .filter(|&i| vertices[i].height == h && conj_into(&group, &vertices[i].group))
                    .collect();
                match hits.as_slice() {
                    [i] => Ok(*i),
                    _ => Err(NielsenError::StructureViolation(format!(
                        "edge group at height {n} has {} candidate vertices at height {h}",
                        hits.len()
                    ))),
                }
            };
            let (lower, upper) = (find(n)?, find(n + 1)?);
            edges.push(TreeEdge { lower, upper, group });
        }
    }
    let mut t = TreeOfGroups { kind, vertices, edges };
    t.check_axioms()?;
    t.normalize_basing()?;
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Move {
    /// Fold two edges with a common lower vertex, identifying their upper
    /// vertices.
    FoldEdges { first: usize, second: usize },
    /// Pull a subgroup of a vertex group across an edge into the edge group
    /// and the vertex at the other end.
    Pull { vertex: usize, edge: usize, group: Subgroup },
}

fn check_rank(before: i64, after: &TreeOfGroups) -> Result<(), NielsenError> {
    if after.rank() != before {
        return Err(NielsenError::IllegalMove(format!("rank changes from {before} to {}", after.rank())));
    }
    Ok(())
}

pub fn fold_ia(t: &TreeOfGroups, first: usize, second: usize) -> Result<TreeOfGroups, NielsenError> {
    let (n, m) = (t.edges.len(), t.vertices.len());
    if first >= n || second >= n || first == second {
        return Err(NielsenError::IllegalMove(format!("cannot fold edges {first} and {second}")));
    }
    let (e1, e2) = (&t.edges[first], &t.edges[second]);
    if e1.lower != e2.lower || e1.upper == e2.upper {
        return Err(NielsenError::IllegalMove(format!("edges {first} and {second} do not share exactly the lower end")));
    }
    let (u1, u2) = (e1.upper, e2.upper);
    let mut out = t.clone();
    out.kind = TreeKind::TDoubleStar;
    out.edges[first].group = join(&e1.group, &e2.group);
    out.vertices[u1].group = join(&t.vertices[u1].group, &t.vertices[u2].group);
    out.edges.remove(second);
    out.vertices.remove(u2);
    let shift = |v: usize| if v == u2 { if u1 > u2 { u1 - 1 } else { u1 } } else if v > u2 { v - 1 } else { v };
    for e in &mut out.edges {
        e.lower = shift(e.lower);
        e.upper = shift(e.upper);
    }
    debug_assert!(out.vertices.len() == m - 1);
    check_rank(t.rank(), &out)?;
    Ok(out)
}

pub fn pull_iia(t: &TreeOfGroups, vertex: usize, edge: usize, group: &Subgroup) -> Result<TreeOfGroups, NielsenError> {
    if edge >= t.edges.len() || (t.edges[edge].lower != vertex && t.edges[edge].upper != vertex) {
        return Err(NielsenError::IllegalMove(format!("edge {edge} does not meet vertex {vertex}")));
    }
    if !group.is_subgroup_of(&t.vertices[vertex].group) {
        return Err(NielsenError::IllegalMove(format!("pulled group is not inside vertex {vertex}")));
    }
    let other = t.other_end(edge, vertex);
    let mut out = t.clone();
    out.kind = TreeKind::TDoubleStar;
    out.edges[edge].group = join(&t.edges[edge].group, group);
    out.vertices[other].group = join(&t.vertices[other].group, group);
    check_rank(t.rank(), &out)?;
    Ok(out)
}

pub fn replay(t: &TreeOfGroups, script: &[Move]) -> Result<TreeOfGroups, NielsenError> {
    let mut cur = t.clone();
    for mv in script {
        cur = match mv {
            Move::FoldEdges { first, second } => fold_ia(&cur, *first, *second)?,
            Move::Pull { vertex, edge, group } => pull_iia(&cur, *vertex, *edge, group)?,
        };
    }
    Ok(cur)
}

/// Image of each vertex and edge of `s` in `t`: the unique one at the same
/// height whose group contains it.
fn projection(s: &TreeOfGroups, t: &TreeOfGroups) -> Result<(Vec<usize>, Vec<usize>), NielsenError> {
    let pv: Result<Vec<usize>, NielsenError> = s
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| {
            (0..t.vertices.len())
                .find(|&k| t.vertices[k].height == v.height && v.group.is_subgroup_of(&t.vertices[k].group))
                .ok_or_else(|| NielsenError::NoScriptFound(format!("vertex {i} has no image")))
        })
        .collect();
    let pv = pv?;
    let pe: Result<Vec<usize>, NielsenError> = s
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            (0..t.edges.len())
                .find(|&k| {
                    t.edges[k].lower == pv[e.lower]
                        && t.edges[k].upper == pv[e.upper]
                        && e.group.is_subgroup_of(&t.edges[k].group)
                })
                .ok_or_else(|| NielsenError::NoScriptFound(format!("edge {i} has no image")))
        })
        .collect();
    Ok((pv, pe?))
}

/// A script of folds and pulls turning `tstar` into `t`: first every set
/// of edges over a single edge of `t` is folded together, then subgroups
/// are pulled across edges until every group reaches its image.
pub fn fold_to_t(tstar: &TreeOfGroups, t: &TreeOfGroups) -> Result<Vec<Move>, NielsenError> {
    let mut cur = tstar.clone();
    let mut script = Vec::new();
    'fold: loop {
        let (_, pe) = projection(&cur, t)?;
        for a in 0..cur.edges.len() {
            for b in a + 1..cur.edges.len() {
                if pe[a] == pe[b] && cur.edges[a].lower == cur.edges[b].lower {
                    cur = fold_ia(&cur, a, b)?;
                    script.push(Move::FoldEdges { first: a, second: b });
                    continue 'fold;
                }
            }
        }
        break;
    }
    let (pv, pe) = projection(&cur, t)?;
    if pv.iter().collect::<BTreeSet<_>>().len() != t.vertices.len() || cur.vertices.len() != t.vertices.len() {
        return Err(NielsenError::NoScriptFound("folding does not reach the shape of T".into()));
    }
    if pe.len() != t.edges.len() {
        return Err(NielsenError::NoScriptFound("folding leaves parallel edges".into()));
    }
    let limit = 4 * (cur.edges.len() + 1) * (t.rank().max(1) as usize + 1);
    for _ in 0..limit {
        let mut pulled = false;
        for e in 0..cur.edges.len() {
            for v in [cur.edges[e].lower, cur.edges[e].upper] {
                let w = cur.other_end(e, v);
                let s = cur.vertices[v].group.intersection(&t.edges[pe[e]].group);
                if s.rank() == 0 || (s.is_subgroup_of(&cur.edges[e].group) && s.is_subgroup_of(&cur.vertices[w].group)) {
                    continue;
                }
                cur = pull_iia(&cur, v, e, &s)?;
                script.push(Move::Pull { vertex: v, edge: e, group: s });
                pulled = true;
            }
        }
        if !pulled {
            break;
        }
    }
    let done = cur.vertices.iter().zip(&pv).all(|(v, &k)| same_group(&v.group, &t.vertices[k].group))
        && cur.edges.iter().zip(&pe).all(|(e, &k)| same_group(&e.group, &t.edges[k].group));
    if !done {
        return Err(NielsenError::NoScriptFound("pulling stops before every group reaches T".into()));
    }
    Ok(script)
}

/// `w` with `w · a · w⁻¹ = b`, if the two based subgroups are conjugate.
pub(crate) fn conjugating_word(a: &Subgroup, b: &Subgroup) -> Option<FWord> {
    let v = a.conjugator_into(b)?;
    same_group(&a.conjugate(&v), b).then_some(v)
}

#[cfg(test)]
mod tests {
    use super::super::cover::tests::flip_model;
    use super::*;

    fn sub(gens: &[u32]) -> Subgroup {
        Subgroup::from_generators(&gens.iter().map(|&g| FWord::gen(g)).collect::<Vec<_>>())
    }

    fn vertex(height: usize, gens: &[u32]) -> TreeVertex {
        TreeVertex { height, group: sub(gens) }
    }

    #[test]
    fn flip_trees_agree() {
        let m = flip_model();
        let t = build_tree_of_groups(&m, TreeKind::T).unwrap();
        let ts = build_tree_of_groups(&m, TreeKind::TStar).unwrap();
        assert_eq!(t.shape(), vec![1, 1, 1]);
        assert_eq!(t.rank(), 51);
        assert_eq!(ts.rank(), 51);
        let script = fold_to_t(&ts, &t).unwrap();
        assert!(script.is_empty());
        assert_eq!(replay(&ts, &script).unwrap().vertices, ts.vertices);
    }

    #[test]
    fn fold_then_pull() {
        // two edge groups over one edge of the target, and a vertex short of
        // its target group
        let target = TreeOfGroups {
            kind: TreeKind::T,
            vertices: vec![vertex(0, &[0, 1, 2]), vertex(1, &[1, 2, 3])],
            edges: vec![TreeEdge { lower: 0, upper: 1, group: sub(&[1, 2]) }],
        };
        let start = TreeOfGroups {
            kind: TreeKind::TStar,
            vertices: vec![vertex(0, &[0, 1, 2]), vertex(1, &[1, 3]), vertex(1, &[2])],
            edges: vec![
                TreeEdge { lower: 0, upper: 1, group: sub(&[1]) },
                TreeEdge { lower: 0, upper: 2, group: sub(&[2]) },
            ],
        };
        start.check_axioms().unwrap();
        let script = fold_to_t(&start, &target).unwrap();
        assert_eq!(script[0], Move::FoldEdges { first: 0, second: 1 });
        let end = replay(&start, &script).unwrap();
        assert_eq!(end.rank(), start.rank());
        assert!(same_group(&end.vertices[1].group, &target.vertices[1].group));
    }

    #[test]
    fn illegal_moves_are_refused() {
        let t = TreeOfGroups {
            kind: TreeKind::T,
            vertices: vec![vertex(0, &[0, 1]), vertex(1, &[1, 2])],
            edges: vec![TreeEdge { lower: 0, upper: 1, group: sub(&[1]) }],
        };
        assert!(matches!(pull_iia(&t, 0, 0, &sub(&[2])), Err(NielsenError::IllegalMove(_))));
        assert!(matches!(fold_ia(&t, 0, 0), Err(NielsenError::IllegalMove(_))));
        // pulling a generator the other vertex lacks keeps the rank only if
        // it enters the edge too
        let ok = pull_iia(&t, 0, 0, &sub(&[0])).unwrap();
        assert_eq!(ok.rank(), t.rank());
    }

    #[test]
    fn axioms_name_the_failure() {
        let two_roots = TreeOfGroups {
            kind: TreeKind::T,
            vertices: vec![vertex(0, &[0]), vertex(0, &[1])],
            edges: vec![],
        };
        assert_eq!(two_roots.check_axioms(), Err(NielsenError::StructureViolation("unique root".into())));
        let flat = TreeOfGroups {
            kind: TreeKind::T,
            vertices: vec![vertex(0, &[0]), vertex(1, &[1]), vertex(1, &[2])],
            edges: vec![
                TreeEdge { lower: 0, upper: 1, group: sub(&[]) },
                TreeEdge { lower: 1, upper: 2, group: sub(&[]) },
            ],
        };
        assert_eq!(flat.check_axioms(), Err(NielsenError::StructureViolation("edges join consecutive heights".into())));
    }
}
