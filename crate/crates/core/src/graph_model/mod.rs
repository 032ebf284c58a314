//! Locally finite graphs given as unfoldings of finite automata: a rooted
//! tree whose vertices carry one-edge loops.

mod automaton;
mod truncation;

pub use automaton::{Automaton, VertexPath};
pub use truncation::{unfold, FiniteGraph, TruncVertex, Truncation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Genus {
    Finite(u64),
    Infinite,
}

/// Homeomorphism type of a compact end space, as far as it is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndType {
    /// `n` points; `n = 0` is the empty space.
    Finite(u64),
    Cantor,
    /// A Cantor set together with `n ≥ 1` isolated points.
    CantorPlus(u64),
    /// Infinitely many isolated points; not classified further.
    Undecided,
}

impl EndType {
    pub fn is_empty(&self) -> bool {
        *self == EndType::Finite(0)
    }

    pub fn is_decided(&self) -> bool {
        *self != EndType::Undecided
    }

    /// Type of a disjoint union.
    pub fn sum(self, other: EndType) -> EndType {
        use EndType::*;
        match (self, other) {
            (Undecided, _) | (_, Undecided) => Undecided,
            (Finite(a), Finite(b)) => Finite(a + b),
            (Finite(0), x) | (x, Finite(0)) => x,
            (Finite(a), Cantor) | (Cantor, Finite(a)) => CantorPlus(a),
            (Finite(a), CantorPlus(b)) | (CantorPlus(b), Finite(a)) => CantorPlus(a + b),
            (Cantor, Cantor) => Cantor,
            (Cantor, CantorPlus(b)) | (CantorPlus(b), Cantor) => CantorPlus(b),
            (CantorPlus(a), CantorPlus(b)) => CantorPlus(a + b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    FiniteGenus { ends: EndType, genus: u64 },
    /// `split` is the type of the complement of the genus ends when that
    /// complement is clopen, `None` otherwise.
    InfiniteGenus { ends: EndType, genus_ends: EndType, split: Option<EndType> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacteristicData {
    /// Restriction to states with at least one end below them.
    pub end_space: Option<Automaton>,
    pub genus: Genus,
    /// Restriction to states from which a loop is reachable.
    pub genus_ends: Option<Automaton>,
    pub kind: PairKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphModelError {
    #[error("characteristic pair lies outside the classified family: {0:?}")]
    UnsupportedPair(PairKind),
}

/// Per-state facts shared by the invariants below.
struct Analysis {
    reaches_loop: Vec<bool>,
    has_end: Vec<bool>,
    on_cycle: Vec<bool>,
    reach: Vec<Vec<bool>>,
}

impl Analysis {
    fn new(a: &Automaton) -> Self {
        let reach = a.reachability();
        let n = a.len();
        let on_cycle = a.on_cycle(&reach);
        let reaches_loop = (0..n).map(|s| (0..n).any(|t| reach[s][t] && a.loops(t) > 0)).collect();
        let has_end = (0..n).map(|s| (0..n).any(|t| reach[s][t] && on_cycle[t])).collect();
        Analysis { reaches_loop, has_end, on_cycle, reach }
    }
}

/// `true` for states with at least one end below them.
pub fn states_with_ends(a: &Automaton) -> Vec<bool> {
    Analysis::new(a).has_end
}

/// `true` for states from which a loop-bearing state is reachable.
pub fn states_reaching_loops(a: &Automaton) -> Vec<bool> {
    Analysis::new(a).reaches_loop
}

/// `true` for states with an end below them that is not accumulated by genus.
pub fn states_with_free_ends(a: &Automaton) -> Vec<bool> {
    let an = Analysis::new(a);
    let n = a.len();
    (0..n).map(|s| (0..n).any(|t| an.reach[s][t] && an.has_end[t] && !an.reaches_loop[t])).collect()
}

/// `true` for states with an end below them that is accumulated by genus.
pub fn states_with_genus_ends(a: &Automaton) -> Vec<bool> {
    let an = Analysis::new(a);
    let n = a.len();
    (0..n).map(|s| (0..n).any(|q| an.reach[s][q] && an.on_cycle[q] && an.reaches_loop[q])).collect()
}

/// The ends not accumulated by genus form a closed, hence compact, set.
pub fn free_ends_compact(a: &Automaton) -> bool {
    let free = states_with_free_ends(a);
    let genus = states_with_genus_ends(a);
    let an = Analysis::new(a);
    !(0..a.len()).any(|q| an.reach[a.root()][q] && an.on_cycle[q] && free[q] && genus[q])
}

/// Number of ends not accumulated by genus, `None` when infinite.
pub fn free_end_count(a: &Automaton) -> Option<u64> {
    let free = states_with_free_ends(a);
    if !free[a.root()] {
        return Some(0);
    }
    if !free_ends_compact(a) {
        return None;
    }
    let sub = a.restrict(&free)?;
    match end_type(&sub) {
        EndType::Finite(k) => Some(k),
        _ => None,
    }
}

/// Number of ends below each state, `None` for infinitely many.
fn end_counts(a: &Automaton, an: &Analysis) -> Vec<Option<u64>> {
    let n = a.len();
    // A cycle state with a second edge into a state with ends yields infinitely many ends.
    let splitting: Vec<bool> = (0..n)
        .map(|q| an.on_cycle[q] && a.children(q).iter().filter(|&&c| an.has_end[c]).count() >= 2)
        .collect();
    let infinite: Vec<bool> = (0..n).map(|s| (0..n).any(|q| an.reach[s][q] && splitting[q])).collect();
    let mut memo: Vec<Option<Option<u64>>> = vec![None; n];
    fn go(a: &Automaton, an: &Analysis, inf: &[bool], memo: &mut Vec<Option<Option<u64>>>, s: usize) -> Option<u64> {
        if let Some(v) = memo[s] {
            return v;
        }
        let v = if inf[s] {
            None
        } else if !an.has_end[s] {
            Some(0)
        } else if an.on_cycle[s] {
            Some(1)
        } else {
            let mut total = 0u64;
            for &c in a.children(s) {
                total += go(a, an, inf, memo, c).expect("finite below a finite state");
            }
            Some(total)
        };
        memo[s] = Some(v);
        v
    }
    (0..n).map(|s| go(a, an, &infinite, &mut memo, s)).collect()
}

/// Classified end space type below each state.
fn end_types(a: &Automaton, an: &Analysis) -> Vec<EndType> {
    let n = a.len();
    let counts = end_counts(a, an);
    let isolated_source: Vec<bool> = (0..n).map(|f| matches!(counts[f], Some(k) if k >= 1)).collect();
    let reaches_isolated: Vec<bool> = (0..n).map(|s| (0..n).any(|f| an.reach[s][f] && isolated_source[f])).collect();
    // cycles running through states with infinitely many ends
    let inf_cycle: Vec<bool> = (0..n)
        .map(|q| counts[q].is_none() && a.children(q).iter().any(|&c| an.reach[c][q] && counts[c].is_none()))
        .collect();
    let isolated_infinite: Vec<bool> =
        (0..n).map(|s| (0..n).any(|q| an.reach[s][q] && inf_cycle[q] && reaches_isolated[q])).collect();
    let mut memo: Vec<Option<u64>> = vec![None; n];
    fn iso(
        a: &Automaton,
        counts: &[Option<u64>],
        reaches_isolated: &[bool],
        memo: &mut Vec<Option<u64>>,
        s: usize,
    ) -> u64 {
        if let Some(v) = memo[s] {
            return v;
        }
        let v = match counts[s] {
            Some(k) => k,
            None if !reaches_isolated[s] => 0,
            None => a.children(s).iter().map(|&c| iso(a, counts, reaches_isolated, memo, c)).sum(),
        };
        memo[s] = Some(v);
        v
    }
    (0..n)
        .map(|s| match counts[s] {
            Some(k) => EndType::Finite(k),
            None if isolated_infinite[s] => EndType::Undecided,
            None => match iso(a, &counts, &reaches_isolated, &mut memo, s) {
                0 => EndType::Cantor,
                k => EndType::CantorPlus(k),
            },
        })
        .collect()
}

/// Generator of the core: the smallest subgraph holding every loop.
///
/// Returns `None` when the unfolding is a tree. The result is canonical.
pub fn core(a: &Automaton) -> Option<Automaton> {
    let an = Analysis::new(a);
    if !an.reaches_loop[a.root()] {
        return None;
    }
    let loop_children = |s: usize| a.children(s).iter().filter(|&&c| an.reaches_loop[c]).count();
    // Descend from the root while the hull cannot contain the current vertex.
    let mut top = a.root();
    while a.loops(top) == 0 && loop_children(top) == 1 {
        top = *a.children(top).iter().find(|&&c| an.reaches_loop[c]).unwrap();
    }
    // Below `top`, a vertex lies in the hull exactly when its subtree holds a loop.
    let mut ids: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    let mut order = vec![top];
    ids.insert(top, 0);
    let mut i = 0;
    while i < order.len() {
        for &c in a.children(order[i]) {
            if an.reaches_loop[c] && !ids.contains_key(&c) {
                ids.insert(c, order.len());
                order.push(c);
            }
        }
        i += 1;
    }
    let rows = order
        .iter()
        .map(|&s| (a.loops(s), a.children(s).iter().filter(|&&c| an.reaches_loop[c]).map(|c| ids[c]).collect()))
        .collect();
    Some(Automaton::from_indexed(0, rows).canonical())
}

/// Total number of loops in the unfolding.
pub fn genus(a: &Automaton) -> Genus {
    let an = Analysis::new(a);
    if (0..a.len()).any(|s| an.on_cycle[s] && an.reaches_loop[s] && an.reach[a.root()][s]) {
        return Genus::Infinite;
    }
    fn count(a: &Automaton, an: &Analysis, memo: &mut Vec<Option<u64>>, s: usize) -> u64 {
        if !an.reaches_loop[s] {
            return 0;
        }
        if let Some(v) = memo[s] {
            return v;
        }
        let v = a.loops(s) as u64 + a.children(s).iter().map(|&c| count(a, an, memo, c)).sum::<u64>();
        memo[s] = Some(v);
        v
    }
    let mut memo = vec![None; a.len()];
    Genus::Finite(count(a, &an, &mut memo, a.root()))
}

/// Sub-automaton whose infinite paths are the ends accumulated by genus.
///
/// `None` when no such end exists.
pub fn genus_ends(a: &Automaton) -> Option<Automaton> {
    let an = Analysis::new(a);
    let sub = a.restrict(&an.reaches_loop)?;
    let sub_an = Analysis::new(&sub);
    if sub_an.has_end[sub.root()] {
        sub.restrict(&sub_an.has_end)
    } else {
        None
    }
}

/// Sub-automaton whose infinite paths are all ends.
pub fn end_space(a: &Automaton) -> Option<Automaton> {
    let an = Analysis::new(a);
    a.restrict(&an.has_end)
}

/// Type of the space of ends of `a`.
pub fn end_type(a: &Automaton) -> EndType {
    let an = Analysis::new(a);
    end_types(a, &an)[a.root()]
}

/// Type of the ends not accumulated by genus, when they form a clopen set.
fn split_type(a: &Automaton, an: &Analysis) -> Option<EndType> {
    let n = a.len();
    let types = end_types(a, an);
    // every end below `s` is accumulated by genus
    let pure: Vec<bool> =
        (0..n).map(|s| (0..n).all(|t| !an.reach[s][t] || !an.has_end[t] || an.reaches_loop[t])).collect();
    let mixed: Vec<bool> = (0..n).map(|s| an.reaches_loop[s] && !pure[s]).collect();
    // a cycle of mixed states carries a genus end with no pure neighbourhood
    if (0..n).any(|s| mixed[s] && an.reach[a.root()][s] && a.children(s).iter().any(|&c| mixed[c] && an.reach[c][s])) {
        return None;
    }
    fn go(a: &Automaton, an: &Analysis, types: &[EndType], pure: &[bool], s: usize) -> EndType {
        if !an.reaches_loop[s] {
            types[s]
        } else if pure[s] {
            EndType::Finite(0)
        } else {
            a.children(s).iter().fold(EndType::Finite(0), |acc, &c| acc.sum(go(a, an, types, pure, c)))
        }
    }
    Some(go(a, an, &types, &pure, a.root()))
}

pub fn characteristic_pair(a: &Automaton) -> CharacteristicData {
    let an = Analysis::new(a);
    let ends = end_types(a, &an)[a.root()];
    let g = genus(a);
    let ge = genus_ends(a);
    let kind = match g {
        Genus::Finite(k) => PairKind::FiniteGenus { ends, genus: k },
        Genus::Infinite => {
            let ge_type = ge.as_ref().map(end_type).unwrap_or(EndType::Finite(0));
            PairKind::InfiniteGenus { ends, genus_ends: ge_type, split: split_type(a, &an) }
        }
    };
    CharacteristicData { end_space: end_space(a), genus: g, genus_ends: ge, kind }
}

/// Decides proper homotopy equivalence within the classified family.
pub fn classify_equivalent(x: &Automaton, y: &Automaton) -> Answer {
    compare_kinds(&characteristic_pair(x).kind, &characteristic_pair(y).kind)
}

fn compare_types(a: EndType, b: EndType) -> Answer {
    match (a.is_decided(), b.is_decided()) {
        (true, true) if a == b => Answer::Yes,
        (false, false) => Answer::Unknown,
        _ => Answer::No,
    }
}

pub fn compare_kinds(a: &PairKind, b: &PairKind) -> Answer {
    use PairKind::*;
    match (a, b) {
        (FiniteGenus { ends: e1, genus: g1 }, FiniteGenus { ends: e2, genus: g2 }) => {
            if g1 != g2 {
                Answer::No
            } else {
                compare_types(*e1, *e2)
            }
        }
        (
            InfiniteGenus { ends: e1, genus_ends: b1, split: s1 },
            InfiniteGenus { ends: e2, genus_ends: b2, split: s2 },
        ) => {
            let verdicts = [compare_types(*e1, *e2), compare_types(*b1, *b2)];
            if verdicts.contains(&Answer::No) {
                return Answer::No;
            }
            match (s1, s2) {
                (Some(d1), Some(d2)) => match compare_types(*d1, *d2) {
                    Answer::Yes if !verdicts.contains(&Answer::Unknown) => Answer::Yes,
                    Answer::No => Answer::No,
                    _ => Answer::Unknown,
                },
                (Some(_), None) | (None, Some(_)) => Answer::No,
                (None, None) => Answer::Unknown,
            }
        }
        _ => Answer::No,
    }
}

fn tree_part(t: EndType, loops: u32, rows: &mut Vec<(u32, Vec<usize>)>) -> Vec<usize> {
    let mut add = |row: (u32, Vec<usize>)| {
        rows.push(row);
        rows.len() - 1
    };
    match t {
        EndType::Finite(k) => {
            let ray = add((loops, Vec::new()));
            rows[ray].1.push(ray);
            vec![ray; k as usize]
        }
        EndType::Cantor => {
            let c = add((loops, Vec::new()));
            rows[c].1 = vec![c, c];
            vec![c, c]
        }
        EndType::CantorPlus(k) => {
            let mut out = tree_part(EndType::Cantor, loops, rows);
            out.extend(tree_part(EndType::Finite(k), loops, rows));
            out
        }
        EndType::Undecided => unreachable!("checked by caller"),
    }
}

/// Canonical automaton realizing a characteristic pair.
pub fn standard_model(c: &PairKind) -> Result<Automaton, GraphModelError> {
    let mut rows: Vec<(u32, Vec<usize>)> = vec![(0, Vec::new())];
    match *c {
        PairKind::FiniteGenus { ends, genus } => {
            if !ends.is_decided() {
                return Err(GraphModelError::UnsupportedPair(*c));
            }
            let kids = tree_part(ends, 0, &mut rows);
            rows[0] = (genus as u32, kids);
        }
        PairKind::InfiniteGenus { genus_ends, split, .. } => {
            let Some(dx) = split else {
                return Err(GraphModelError::UnsupportedPair(*c));
            };
            if !genus_ends.is_decided() || !dx.is_decided() || genus_ends.is_empty() {
                return Err(GraphModelError::UnsupportedPair(*c));
            }
            let mut kids = tree_part(genus_ends, 1, &mut rows);
            kids.extend(tree_part(dx, 0, &mut rows));
            rows[0] = (1, kids);
        }
    }
    Ok(Automaton::from_indexed(0, rows).canonical())
}
