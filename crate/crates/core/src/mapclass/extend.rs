use std::collections::BTreeMap;

use super::rep::MapData;
use super::{MapError, ProperMapRep};
use crate::graph_model::{states_reaching_loops, states_with_ends, unfold, VertexPath};

/// Longest common prefix of a nonempty set of paths.
fn common_prefix<'a, I: IntoIterator<Item = &'a VertexPath>>(paths: I) -> Option<VertexPath> {
    let mut it = paths.into_iter();
    let first = it.next()?.clone();
    let len = it.fold(first.depth(), |n, p| n.min(first.common_prefix_len(p)));
    Some(first.prefix(len))
}

/// Vertex at distance `d` from `y` on the tree geodesic to `w`, or `w` if
/// the geodesic is shorter.
fn along(y: &VertexPath, w: &VertexPath, d: usize) -> VertexPath {
    let c = y.common_prefix_len(w);
    let up = y.depth() - c;
    if d <= up {
        y.prefix(y.depth() - d)
    } else {
        w.prefix((c + d - up).min(w.depth()))
    }
}

/// Extends `f` from the subgraph of vertices that lead to loops over the
/// attached trees, following `endmap` on the tree end cylinders at the
/// support depth of `f`.
///
/// A tree vertex `v` hanging off the core vertex `x` goes to the vertex at
/// distance `d(x, v)` from `f(x)` towards the common prefix of the images
/// of the end cylinders below `v`. Vertices with no ends below them
/// collapse onto the image of their lowest ancestor that has ends, except
/// at the frontier, where they stay put. Tree vertices inherit the mark of
/// their attachment point.
pub fn extend_over_trees(
    f: &ProperMapRep,
    endmap: &BTreeMap<VertexPath, VertexPath>,
) -> Result<ProperMapRep, MapError> {
    let a = f.ambient();
    let depth = f.support();
    let reaches = states_reaching_loops(a);
    let ends = states_with_ends(a);
    let t = unfold(a, depth);
    let tree_only = !reaches[a.root()];
    let is_core = |p: &VertexPath| p.depth() == 0 || reaches[a.state_at(p).unwrap()];
    let mut data = MapData::default();
    for tv in &t.vertices {
        let p = &tv.path;
        if tree_only && p.depth() == 0 {
            data.vmap.insert(p.clone(), p.clone());
            continue;
        }
        if is_core(p) && !tree_only {
            data.vmap.insert(p.clone(), f.vertex_image(p));
            data.marks.insert(p.clone(), f.mark(p));
            continue;
        }
        let x = (0..p.depth()).rev().map(|n| p.prefix(n)).find(|q| is_core(q)).unwrap();
        let (y, mark) = if tree_only { (VertexPath::root(), Default::default()) } else { (f.vertex_image(&x), f.mark(&x)) };
        data.marks.insert(p.clone(), mark);
        let image = if ends[tv.state] {
            let images: Vec<&VertexPath> = endmap
                .iter()
                .filter(|(k, _)| k.depth() == depth && p.is_prefix_of(k))
                .map(|(_, v)| v)
                .collect();
            if p.depth() == depth {
                match images.first() {
                    Some(&img) => img.clone(),
                    None => return Err(MapError::PreconditionFailed(format!("no end image given for {p}"))),
                }
            } else {
                let w = common_prefix(images.iter().copied())
                    .ok_or_else(|| MapError::PreconditionFailed(format!("no end image given below {p}")))?;
                along(&y, &w, p.depth() - x.depth())
            }
        } else if p.depth() == depth {
            p.clone()
        } else {
            let u = (0..p.depth()).rev().map(|n| p.prefix(n)).find(|q| ends[a.state_at(q).unwrap()]).unwrap();
            match data.vmap.get(&u) {
                Some(img) => img.clone(),
                None => u,
            }
        };
        data.vmap.insert(p.clone(), image);
    }
    for x in f.generators() {
        data.loops.insert(x.clone(), f.image_of_gen(&x));
    }
    ProperMapRep::new(a, depth, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::Automaton;
    use crate::mapclass::{is_properly_homotopic_to_identity, IdentityVerdict};

    fn paths(pairs: &[(&str, &str)]) -> BTreeMap<VertexPath, VertexPath> {
        pairs.iter().map(|(a, b)| (a.parse().unwrap(), b.parse().unwrap())).collect()
    }

    #[test]
    fn identity_extends_to_identity() {
        let a: Automaton = "root r\nstate r loops=2 children=r,t\nstate t loops=0 children=t,t\n".parse().unwrap();
        let id = ProperMapRep::identity(&a, 3);
        let cyl: BTreeMap<_, _> =
            id.frontier().into_iter().filter(|p| p.0.contains(&1)).map(|p| (p.clone(), p)).collect();
        let f = extend_over_trees(&id, &cyl).unwrap();
        assert_eq!(f, id);
    }

    #[test]
    fn binary_tree_swap() {
        let a = Automaton::cantor();
        let id = ProperMapRep::identity(&a, 3);
        let swap = |p: &str| -> String {
            let mut c: Vec<char> = p.chars().collect();
            c[0] = if c[0] == '0' { '1' } else { '0' };
            c.into_iter().collect()
        };
        let leaves = ["0/0/0", "0/0/1", "0/1/0", "0/1/1", "1/0/0", "1/0/1", "1/1/0", "1/1/1"];
        let owned: Vec<(String, String)> = leaves.iter().map(|p| (p.to_string(), swap(p))).collect();
        let pairs: Vec<(&str, &str)> = owned.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let f = extend_over_trees(&id, &paths(&pairs)).unwrap();
        assert_eq!(f.vertex_image(&"0".parse().unwrap()), "1".parse().unwrap());
        assert_eq!(f.vertex_image(&"1/0".parse().unwrap()), "0/0".parse().unwrap());
        assert_eq!(f.vertex_image(&VertexPath::root()), VertexPath::root());
        assert!(f.compose(&f).map(|g| is_properly_homotopic_to_identity(&g).is_yes()).unwrap());
    }

    #[test]
    fn ray_follows_end_map() {
        // a rose with two rays; the end map swaps the rays
        let a: Automaton = "root r\nstate r loops=2 children=t,t\nstate t loops=0 children=t\n".parse().unwrap();
        let core = ProperMapRep::identity(&a, 2);
        let f = extend_over_trees(&core, &paths(&[("0/0", "1/0"), ("1/0", "0/0")])).unwrap();
        assert_eq!(f.vertex_image(&"0".parse().unwrap()), "1".parse().unwrap());
        assert_eq!(f.vertex_image(&"1/0/0".parse().unwrap()), "0/0/0".parse().unwrap());
        assert!(matches!(is_properly_homotopic_to_identity(&f), IdentityVerdict::No(_)));
    }
}
