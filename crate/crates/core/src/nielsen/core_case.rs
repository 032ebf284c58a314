use serde::Serialize;

use super::cover::{verify_displacement_bound, CoreModel, IntervalCover};
use super::graphs::{realize_finite_out, realize_relative, GraphMap, RealizedGraph, SearchBounds};
use super::trees::{build_tree_of_groups, conjugating_word, fold_to_t, Move, TreeKind, TreeOfGroups};
use super::{FiniteGroupAction, NielsenError};
use crate::graph_model::VertexPath;
use crate::mapclass::{is_properly_homotopic_to_identity, IdentityVerdict, MapData, ProperMapRep};
use crate::stallings::{Automorphism, Subgroup};
use crate::union_find::UnionFind;
use crate::word::FWord;

#[derive(Clone, Debug, Serialize)]
pub struct CoreCaseReport {
    pub cover: IntervalCover,
    pub tstar: TreeOfGroups,
    pub t: TreeOfGroups,
    pub script: Vec<Move>,
    /// The glued graph, labelled in the basis of the truncation group.
    pub graph: RealizedGraph,
    /// Identity verdict for `g ∘ h ∘ f ∘ h⁻¹`, one per element.
    pub verdicts: Vec<IdentityVerdict>,
}

/// `phi` restricted to a subgroup it preserves up to conjugacy, written in
/// the basis of the subgroup.
fn restrict(phi: &Automorphism, g: &Subgroup) -> Result<Automorphism, NielsenError> {
    let basis = g.basis();
    let images: Vec<FWord> = basis.iter().map(|b| phi.apply(b)).collect();
    let v = conjugating_word(&Subgroup::from_generators(&images), g)
        .ok_or_else(|| NielsenError::InvarianceFailed("a vertex or edge group is not preserved".into()))?;
    let coords: Option<Vec<FWord>> = images.iter().map(|w| g.coordinates(&w.conjugate_by(&v))).collect();
    Ok(Automorphism::new(coords.expect("conjugated images lie in the group")))
}

fn relabel(g: &RealizedGraph, f: impl Fn(&FWord) -> Option<FWord>) -> Option<RealizedGraph> {
    let labels: Option<Vec<FWord>> = g.labels.iter().map(f).collect();
    Some(RealizedGraph { labels: labels?, ..g.clone() })
}

fn in_basis(g: &RealizedGraph, basis: &[FWord]) -> RealizedGraph {
    relabel(g, |w| Some(w.substitute(|&i| basis[i as usize].clone()))).unwrap()
}

/// Disjoint union; vertex and edge offsets of each piece are returned.
fn disjoint_union(pieces: &[&RealizedGraph], order: usize) -> (RealizedGraph, Vec<(usize, usize)>) {
    let mut out = RealizedGraph::empty(order);
    let mut offsets = Vec::new();
    for p in pieces {
        let (ov, oe) = (out.vertex_count, out.edges.len());
        offsets.push((ov, oe));
        out.vertex_count += p.vertex_count;
        out.edges.extend(p.edges.iter().map(|&(a, b)| (a + ov, b + ov)));
        out.labels.extend(p.labels.iter().cloned());
        for (h, m) in p.action.iter().enumerate() {
            out.action[h].vertices.extend(m.vertices.iter().map(|&v| v + ov));
            out.action[h].edges.extend(m.edges.iter().map(|&(e, r)| (e + oe, r)));
        }
    }
    (out, offsets)
}

/// Every element must fix each vertex and edge of the tree of groups.
fn check_pointwise_fixed(model: &CoreModel, t: &TreeOfGroups) -> Result<(), NielsenError> {
    let moved = |g: &Subgroup| {
        let class = g.conjugacy_class();
        model.autos.iter().any(|phi| {
            let images: Vec<FWord> = g.basis().iter().map(|b| phi.apply(b)).collect();
            Subgroup::from_generators(&images).conjugacy_class() != class
        })
    };
    if t.vertices.iter().any(|v| moved(&v.group)) || t.edges.iter().any(|e| moved(&e.group)) {
        return Err(NielsenError::NotFoundWithinBound(
            "the group permutes pieces of the tree of groups; only pointwise fixed trees are assembled".into(),
        ));
    }
    Ok(())
}

/// Realizes the action of a finite group on a core graph, cut off at the
/// top radius of `cover`, by a simplicial action on a graph glued from
/// realizations of the edge and vertex groups of the averaged tree of
/// groups.
pub fn realize_core_case(
    action: &FiniteGroupAction,
    cover: IntervalCover,
    bounds: SearchBounds,
) -> Result<CoreCaseReport, NielsenError> {
    let model = CoreModel::new(action, cover)?;
    verify_displacement_bound(&model)?;
    let tstar = build_tree_of_groups(&model, TreeKind::TStar)?;
    let t = build_tree_of_groups(&model, TreeKind::T)?;
    let script = fold_to_t(&tstar, &t)?;
    check_pointwise_fixed(&model, &tstar)?;
    let group = &action.group;
    let order = group.order();

    let mut edge_graphs = Vec::new();
    for e in &tstar.edges {
        let targets: Result<Vec<Automorphism>, NielsenError> =
            model.autos.iter().map(|phi| restrict(phi, &e.group)).collect();
        let g = realize_finite_out(group, &targets?, e.group.rank(), bounds)?;
        edge_graphs.push(in_basis(&g, &e.group.basis()));
    }

    // each vertex graph starts from the graphs of its edges, lower ones first
    let mut vertex_graphs = Vec::new();
    let mut copies = vec![(None, None); tstar.edges.len()];
    for (w, v) in tstar.vertices.iter().enumerate() {
        let incident: Vec<usize> =
            (0..tstar.edges.len()).filter(|&e| tstar.edges[e].lower == w || tstar.edges[e].upper == w).collect();
        let pieces: Vec<&RealizedGraph> = incident.iter().map(|&e| &edge_graphs[e]).collect();
        let (base, offsets) = disjoint_union(&pieces, order);
        let base = relabel(&base, |x| v.group.coordinates(x))
            .ok_or_else(|| NielsenError::StructureViolation("edge group not based inside its vertex".into()))?;
        let targets: Result<Vec<Automorphism>, NielsenError> =
            model.autos.iter().map(|phi| restrict(phi, &v.group)).collect();
        let g = realize_relative(group, &targets?, v.group.rank(), &base, bounds)?;
        for (k, &e) in incident.iter().enumerate() {
            let slot = (w, offsets[k]);
            if tstar.edges[e].upper == w {
                copies[e].1 = Some(slot);
            } else {
                copies[e].0 = Some(slot);
            }
        }
        vertex_graphs.push(in_basis(&g, &v.group.basis()));
    }

    let (mut glued, offsets) = disjoint_union(&vertex_graphs.iter().collect::<Vec<_>>(), order);
    let root = tstar.vertices.iter().position(|v| v.height == 0).unwrap();
    glued.basepoint = offsets[root].0 + vertex_graphs[root].basepoint;
    let mut uf = UnionFind::new(glued.vertex_count);
    let mut edge_alias: Vec<usize> = (0..glued.edges.len()).collect();
    for (e, c) in copies.iter().enumerate() {
        let ((lw, (lv, le)), (uw, (uv, ue))) = (c.0.unwrap(), c.1.unwrap());
        let (lv, le) = (lv + offsets[lw].0, le + offsets[lw].1);
        let (uv, ue) = (uv + offsets[uw].0, ue + offsets[uw].1);
        for i in 0..edge_graphs[e].vertex_count {
            uf.union(lv + i, uv + i);
        }
        for i in 0..edge_graphs[e].edges.len() {
            edge_alias[ue + i] = le + i;
        }
    }
    let classes = uf.classes();
    let mut ids: Vec<usize> = classes.clone();
    ids.sort_unstable();
    ids.dedup();
    let vid = |v: usize| ids.binary_search(&classes[v]).unwrap();
    let kept: Vec<usize> = (0..glued.edges.len()).filter(|&e| edge_alias[e] == e).collect();
    let eid = |e: usize| kept.binary_search(&edge_alias[e]).unwrap();
    let y = RealizedGraph {
        vertex_count: ids.len(),
        edges: kept.iter().map(|&e| (vid(glued.edges[e].0), vid(glued.edges[e].1))).collect(),
        labels: kept.iter().map(|&e| glued.labels[e].clone()).collect(),
        action: glued
            .action
            .iter()
            .map(|m| {
                let mut vertices = vec![0; ids.len()];
                for v in 0..glued.vertex_count {
                    vertices[vid(v)] = vid(m.vertices[v]);
                }
                let edges = kept.iter().map(|&e| (eid(m.edges[e].0), m.edges[e].1)).collect();
                GraphMap { vertices, edges }
            })
            .collect(),
        basepoint: vid(glued.basepoint),
    };

    if !y.is_action_of(group) {
        return Err(NielsenError::FinalCheckFailed("the glued action is not a group action".into()));
    }
    let outer = y
        .outer_action(model.rank())
        .ok_or_else(|| NielsenError::FinalCheckFailed("the glued graph is not a marked graph of the truncation".into()))?;
    let mut verdicts = Vec::new();
    for (h, phi) in model.autos.iter().enumerate() {
        let c = outer[h].compose(&phi.inverse().expect("checked by the model"));
        let verdict = is_properly_homotopic_to_identity(&composite_map(&model, &c)?);
        if !verdict.is_yes() {
            return Err(NielsenError::FinalCheckFailed(format!("element {h} is not realized up to homotopy")));
        }
        verdicts.push(verdict);
    }
    Ok(CoreCaseReport { cover: model.cover.clone(), tstar, t, script, graph: y, verdicts })
}

/// The map of the core graph that is the identity on vertices and acts by
/// `c` on the truncation group, by conjugation beyond it when `c` is inner.
fn composite_map(model: &CoreModel, c: &Automorphism) -> Result<ProperMapRep, NielsenError> {
    let top = model.cover.top_radius();
    let conj = c.is_inner().map(|w| model.from_free(&w)).unwrap_or_default();
    let mut data = MapData::default();
    for (i, x) in model.gens.iter().enumerate() {
        data.loops.insert(x.clone(), model.from_free(&c.images[i]));
    }
    for p in model.reps[0].truncation().vertices.iter().map(|v| &v.path) {
        if *p != VertexPath::root() {
            data.marks.insert(p.clone(), conj.clone());
        }
    }
    Ok(ProperMapRep::new(&model.ambient, top, data)?)
}

#[cfg(test)]
mod tests {
    use super::super::cover::tests::inversion;
    use super::super::cover::Interval;
    use super::*;
    use crate::graph_model::Automaton;
    use crate::group::FiniteGroup;
    use crate::mapclass::LoopGen;

    fn three_bands(top: usize) -> IntervalCover {
        let m = top;
        IntervalCover::unit(m, vec![Interval::new(0, 24), Interval::new(2, m - 2), Interval::new(26, m)]).unwrap()
    }

    #[test]
    fn flip_on_the_loop_ray() {
        let a = Automaton::loop_ray(1);
        let action =
            FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), inversion(&a, 50)])
                .unwrap();
        let r = realize_core_case(&action, three_bands(50), SearchBounds::default()).unwrap();
        assert!(r.script.is_empty());
        assert_eq!(r.graph.rank(), 51);
        assert_eq!(r.verdicts.len(), 2);
        // every loop is flipped in place
        assert!(r.graph.action[1].edges.iter().filter(|(_, rev)| *rev).count() >= 51);
    }

    #[test]
    fn swapping_neighbouring_loops() {
        let a = Automaton::loop_ray(1);
        let mut data = MapData::default();
        let at = |d: usize| LoopGen::new(VertexPath(vec![0; d]), 0);
        for i in 0..26 {
            data.loops.insert(at(2 * i), at(2 * i + 1).word());
            data.loops.insert(at(2 * i + 1), at(2 * i).word());
        }
        let swap = ProperMapRep::new(&a, 51, data).unwrap();
        let action =
            FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), swap]).unwrap();
        let cover =
            IntervalCover::unit(51, vec![Interval::new(0, 25), Interval::new(2, 49), Interval::new(26, 51)]).unwrap();
        match realize_core_case(&action, cover, SearchBounds::default()) {
            Ok(r) => assert_eq!(r.graph.rank(), 52),
            Err(e) => panic!("{e}"),
        }
    }
}
