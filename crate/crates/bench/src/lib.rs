//! Inputs shared by the benchmarks.

use propermaps::end_space::{CylinderAction, CylinderSpace};
use propermaps::mapclass::{MapData, ProperMapRep};
use propermaps::nielsen::FiniteGroupAction;
use propermaps::stallings::FreeFactorSystem;
use propermaps::word::parse_basis_word;
use propermaps::{Automaton, FiniteGraph, FiniteGroup};

pub fn ffs(components: &[&[&str]]) -> FreeFactorSystem {
    let lists: Vec<_> = components.iter().map(|c| c.iter().map(|w| parse_basis_word(w).unwrap()).collect()).collect();
    FreeFactorSystem::from_generators(&lists)
}

/// The map x_n -> x_n x_{n-1} on the one-loop ray, written out to `depth`.
pub fn shift(depth: usize) -> ProperMapRep {
    let mut text = format!("support {depth}\n");
    let mut prev = ".".to_string();
    for n in 1..=depth {
        let v = vec!["0"; n].join("/");
        text.push_str(&format!("loop {v}:0 -> {v}:0 {prev}:0\n"));
        prev = v;
    }
    text.push_str("outside banded 1\nrule 0 -> @0:0 @-1:0\n");
    ProperMapRep::parse_with_ambient(&Automaton::loop_ray(1), &text).unwrap()
}

/// Z/2 inverting every loop of `a` up to `depth`.
pub fn inversion_action(a: &Automaton, depth: usize) -> FiniteGroupAction {
    let mut data = MapData::default();
    for x in ProperMapRep::identity(a, depth).generators() {
        data.loops.insert(x.clone(), x.word().inverse());
    }
    let flip = ProperMapRep::new(a, depth, data).unwrap();
    FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(a, 0), flip]).unwrap()
}

/// Z/n rotating the first letter of every cylinder.
pub fn rotation(space: &CylinderSpace, n: u32) -> CylinderAction {
    CylinderAction::from_fn(space, FiniteGroup::cyclic(n as usize), |g, p| {
        let mut q = p.clone();
        q.0[0] = (q.0[0] + g as u32) % n;
        q
    })
    .unwrap()
}

/// Complete binary tree in heap order with the swap of the two halves.
pub fn swapped_binary_tree(depth: u32) -> (FiniteGraph, Vec<Vec<usize>>) {
    let n = (1usize << (depth + 1)) - 1;
    let edges = (1..n).map(|v| ((v - 1) / 2, v)).collect();
    let swap = (0..n)
        .map(|v| {
            if v == 0 {
                return 0;
            }
            // flip the level-one ancestor, keep the rest of the path
            let level = usize::BITS - 1 - (v + 1).leading_zeros();
            ((v + 1) ^ (1usize << (level - 1))) - 1
        })
        .collect();
    (FiniteGraph::new(n, edges), vec![(0..n).collect(), swap])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_is_an_involution_of_the_tree() {
        let (t, perms) = swapped_binary_tree(4);
        let s = &perms[1];
        assert!((0..s.len()).all(|v| s[s[v]] == v));
        for &(a, b) in &t.edges {
            assert!(t.edges.contains(&(s[a], s[b])) || t.edges.contains(&(s[b], s[a])));
        }
        assert_eq!(s[1], 2);
    }
}
