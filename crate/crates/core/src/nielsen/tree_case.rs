use std::collections::BTreeSet;

use serde::Serialize;

use super::NielsenError;
use crate::end_space::{
    average_metric, boundary_map, induced_telescope_action, standard_sequence, telescope, CylinderAction,
    CylinderSpace, EndMetric, TelescopeAction, TelescopeTree,
};
use crate::graph_model::FiniteGraph;

#[derive(Clone, Debug, Serialize)]
pub struct TreeCaseReport {
    pub telescope: TelescopeTree,
    pub action: TelescopeAction,
    pub levels: usize,
}

/// Realizes an action on the ends of a tree by a simplicial action on the
/// mapping telescope of the ε-partitions of the averaged metric, with
/// `ε_n = eps_base^-n` for `n < levels`.
pub fn realize_tree_case(
    space: &CylinderSpace,
    action: &CylinderAction,
    levels: usize,
    eps_base: i128,
) -> Result<TreeCaseReport, NielsenError> {
    let avg = average_metric(&EndMetric::base(space), action)?;
    let seq = standard_sequence(space, &avg, levels, eps_base)?;
    let tel = telescope(&seq)?;
    let act = induced_telescope_action(&tel, action)?;
    let bm = boundary_map(&tel);
    if !tel.is_tree() {
        return Err(NielsenError::FinalCheckFailed("the telescope is not a tree".into()));
    }
    if !act.is_simplicial(&tel) {
        return Err(NielsenError::FinalCheckFailed("the induced action is not simplicial".into()));
    }
    if !bm.is_bijective(&tel) || !bm.is_equivariant(action, &act) {
        return Err(NielsenError::FinalCheckFailed("the boundary map is not an equivariant bijection".into()));
    }
    Ok(TreeCaseReport { telescope: tel, action: act, levels })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedPoint {
    Vertex(usize),
    /// Midpoint of the edge joining the two vertices; the group may swap them.
    EdgeMidpoint(usize, usize),
}

fn neighbours(t: &FiniteGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); t.vertex_count];
    for &(a, b) in &t.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// A point of a finite tree fixed by the given automorphisms: the center
/// of the subtree spanned by the orbit of vertex 0.
pub fn fixed_point_in_finite_tree(t: &FiniteGraph, perms: &[Vec<usize>]) -> Result<FixedPoint, NielsenError> {
    if t.vertex_count == 0 || !t.is_tree() {
        return Err(NielsenError::InvalidAction("not a finite tree".into()));
    }
    let edges: BTreeSet<(usize, usize)> = t.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    for p in perms {
        let bijective = p.len() == t.vertex_count && p.iter().collect::<BTreeSet<_>>().len() == p.len();
        if !bijective || !t.edges.iter().all(|&(a, b)| edges.contains(&(p[a].min(p[b]), p[a].max(p[b])))) {
            return Err(NielsenError::InvalidAction("permutation is not a tree automorphism".into()));
        }
    }
    let adj = neighbours(t);
    let orbit: BTreeSet<usize> = std::iter::once(0).chain(perms.iter().map(|p| p[0])).collect();
    let mut alive = vec![true; t.vertex_count];
    let degree = |alive: &[bool], v: usize| adj[v].iter().filter(|&&w| alive[w]).count();
    // hull of the orbit: strip leaves outside it
    loop {
        let strip: Vec<usize> =
            (0..t.vertex_count).filter(|&v| alive[v] && !orbit.contains(&v) && degree(&alive, v) <= 1).collect();
        if strip.is_empty() {
            break;
        }
        for v in strip {
            alive[v] = false;
        }
    }
    // then peel all leaves at once until one or two vertices remain
    loop {
        let left: Vec<usize> = (0..t.vertex_count).filter(|&v| alive[v]).collect();
        if left.len() <= 2 {
            let point = match left.as_slice() {
                [v] => FixedPoint::Vertex(*v),
                [u, v] => FixedPoint::EdgeMidpoint(*u, *v),
                _ => unreachable!("a nonempty tree keeps a vertex"),
            };
            let fixed = perms.iter().all(|p| match point {
                FixedPoint::Vertex(v) => p[v] == v,
                FixedPoint::EdgeMidpoint(u, v) => (p[u] == u && p[v] == v) || (p[u] == v && p[v] == u),
            });
            return if fixed {
                Ok(point)
            } else {
                Err(NielsenError::FinalCheckFailed("the hull center is moved".into()))
            };
        }
        let leaves: Vec<usize> = left.iter().copied().filter(|&v| degree(&alive, v) <= 1).collect();
        for v in leaves {
            alive[v] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::{Automaton, VertexPath};
    use crate::group::FiniteGroup;

    fn rotate_first(space: &CylinderSpace, n: usize) -> CylinderAction {
        CylinderAction::from_fn(space, FiniteGroup::cyclic(n), |g, p: &VertexPath| {
            let mut q = p.clone();
            q.0[0] = (q.0[0] + g as u32) % n as u32;
            q
        })
        .unwrap()
    }

    #[test]
    fn half_swap_on_the_cantor_set() {
        let s = CylinderSpace::new(&Automaton::cantor(), 4).unwrap();
        let r = realize_tree_case(&s, &rotate_first(&s, 2), 4, 2).unwrap();
        assert!(!r.action.is_identity());
        assert_eq!(r.action.perms[1][r.telescope.root], r.telescope.root);
    }

    #[test]
    fn rotation_of_the_ternary_tree() {
        let s = CylinderSpace::new(&Automaton::regular_tree(3, 0), 4).unwrap();
        let r = realize_tree_case(&s, &rotate_first(&s, 3), 4, 2).unwrap();
        assert!(r.telescope.is_tree());
        assert_eq!(r.action.perms.len(), 3);
    }

    #[test]
    fn centers_of_paths_and_stars() {
        // path 0 - 1 - 2 - 3 reversed: the middle edge
        let path = FiniteGraph::new(4, vec![(0, 1), (1, 2), (2, 3)]);
        let flip = vec![vec![0, 1, 2, 3], vec![3, 2, 1, 0]];
        assert_eq!(fixed_point_in_finite_tree(&path, &flip).unwrap(), FixedPoint::EdgeMidpoint(1, 2));
        // star with center 1 and leaves rotated
        let star = FiniteGraph::new(4, vec![(1, 0), (1, 2), (1, 3)]);
        let rot = vec![vec![0, 1, 2, 3], vec![2, 1, 3, 0], vec![3, 1, 0, 2]];
        assert_eq!(fixed_point_in_finite_tree(&star, &rot).unwrap(), FixedPoint::Vertex(1));
        let bad = vec![vec![1, 0, 2, 3]];
        assert!(fixed_point_in_finite_tree(&path, &bad).is_err());
    }
}
