use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::core_case::{realize_core_case, CoreCaseReport};
use super::cover::IntervalCover;
use super::graphs::{GraphMap, RealizedGraph, SearchBounds};
use super::tree_case::{fixed_point_in_finite_tree, realize_tree_case, FixedPoint, TreeCaseReport};
use super::{FiniteGroupAction, NielsenError};
use crate::end_space::{
    average_metric, induced_telescope_action, standard_sequence, telescope, CylinderAction, CylinderSpace, EndMetric,
    Partition, TelescopeAction, TelescopeTree,
};
use crate::graph_model::{
    states_reaching_loops, states_with_free_ends, states_with_genus_ends, Automaton, FiniteGraph, VertexPath,
};
use crate::mapclass::{LoopGen, LoopWord, ProperMapRep};
use crate::word::{Letter, Word};

/// One edge of the universal cover, read from the vertex it leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Step {
    Down(u32),
    /// Up from child `i`.
    Up(u32),
    Loop(u32, bool),
}

impl Step {
    fn inverse(self) -> Step {
        match self {
            Step::Down(i) => Step::Up(i),
            Step::Up(i) => Step::Down(i),
            Step::Loop(k, s) => Step::Loop(k, !s),
        }
    }
}

/// Vertices of the universal cover are reduced step paths from the lift of
/// the root.
type CoverPath = Vec<Step>;

fn push_reduced(path: &mut CoverPath, step: Step) {
    if path.last() == Some(&step.inverse()) {
        path.pop();
    } else {
        path.push(step);
    }
}

fn descend(path: &mut CoverPath, v: &VertexPath) {
    for &i in &v.0 {
        push_reduced(path, Step::Down(i));
    }
}

fn ascend(path: &mut CoverPath, v: &VertexPath) {
    for &i in v.0.iter().rev() {
        push_reduced(path, Step::Up(i));
    }
}

/// The lift of `g · γ_v` starting at the lift of the root.
fn lift(g: &LoopWord, v: &VertexPath) -> CoverPath {
    let mut path = Vec::new();
    for l in g.letters() {
        descend(&mut path, &l.gen.at);
        push_reduced(&mut path, Step::Loop(l.gen.index, l.inverse));
        ascend(&mut path, &l.gen.at);
    }
    descend(&mut path, v);
    path
}

/// Inverse of [`lift`].
fn project(path: &CoverPath) -> (LoopWord, VertexPath) {
    let mut at = VertexPath::root();
    let mut letters = Vec::new();
    for &s in path {
        match s {
            Step::Down(i) => at = at.child(i),
            Step::Up(_) => at = at.parent().expect("reduced paths stay below the root"),
            Step::Loop(k, inv) => letters.push(Letter::new(LoopGen::new(at.clone(), k), inv)),
        }
    }
    (Word::from_letters(letters), at)
}

/// The ray chosen for a block of ends: from `rho` along the loop word `s`
/// (read at the root) and then down the tree to `toward`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NielsenRay {
    pub rho: VertexPath,
    pub toward: VertexPath,
    pub attachment: VertexPath,
    pub s: LoopWord,
    /// Vertices of the orbit hull in the universal cover.
    pub hull_size: usize,
}

impl NielsenRay {
    /// Based word of the image of the ray under `h`, with the endpoint
    /// moved to `h(toward)`.
    fn transported(&self, h: &ProperMapRep, end: &VertexPath) -> LoopWord {
        h.mark(&self.rho).inverse().mul(&h.push(&self.s)).mul(&h.mark(end))
    }
}

/// Deepest vertex on the way to `v` whose subtree carries loops.
fn attachment_of(a: &Automaton, core: &[bool], v: &VertexPath) -> VertexPath {
    (0..=v.depth())
        .rev()
        .map(|d| v.prefix(d))
        .find(|p| a.state_at(p).is_some_and(|s| core[s]))
        .unwrap_or_else(VertexPath::root)
}

/// A point of the core fixed by the stabilizer `stab` of the end through
/// `toward`, as the projection of the hull center of the lifted orbit of
/// the attachment point in the universal cover. Hull paths longer than
/// `radius` are refused.
pub fn nielsen_ray(
    action: &FiniteGroupAction,
    stab: &[usize],
    toward: &VertexPath,
    radius: usize,
) -> Result<NielsenRay, NielsenError> {
    let a = action.ambient();
    let core = states_reaching_loops(a);
    let p = attachment_of(a, &core, toward);
    for &h in stab {
        if action.reps[h].vertex_image(toward) != *toward {
            return Err(NielsenError::InvalidAction(format!("element {h} does not fix {toward}")));
        }
    }
    let lifted = |h: usize, c: &CoverPath| -> CoverPath {
        let r = &action.reps[h];
        let (g, v) = project(c);
        let word = r.mark(toward).inverse().mul(&r.push(&g)).mul(&r.mark(&v));
        lift(&word, &r.vertex_image(&v))
    };
    let base = lift(&LoopWord::identity(), &p);
    let orbit: BTreeSet<CoverPath> = stab.iter().map(|&h| lifted(h, &base)).chain([base.clone()]).collect();
    if orbit.iter().any(|o| o.len() > radius) {
        return Err(NielsenError::RadiusTooSmall(radius));
    }
    // the hull runs from each orbit point up to their common prefix
    let first = orbit.iter().next().unwrap();
    let meet = orbit.iter().map(|o| o.iter().zip(first).take_while(|(x, y)| x == y).count()).min().unwrap();
    let hull: BTreeSet<CoverPath> =
        orbit.iter().flat_map(|o| (meet..=o.len()).map(move |k| o[..k].to_vec())).collect();
    let hull: Vec<CoverPath> = hull.into_iter().collect();
    let index: BTreeMap<&CoverPath, usize> = hull.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let edges = hull
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > meet)
        .map(|(i, c)| (index[&c[..c.len() - 1].to_vec()], i))
        .collect();
    let mut perms = Vec::new();
    for &h in stab {
        let perm: Option<Vec<usize>> = hull.iter().map(|c| index.get(&lifted(h, c)).copied()).collect();
        perms.push(
            perm.ok_or_else(|| NielsenError::FinalCheckFailed("the lifted stabilizer does not preserve the hull".into()))?,
        );
    }
    let center = match fixed_point_in_finite_tree(&FiniteGraph::new(hull.len(), edges), &perms)? {
        FixedPoint::Vertex(v) => v,
        // only a loop edge flipped onto itself can land here; either end
        // then projects to the same core vertex
        FixedPoint::EdgeMidpoint(u, v) if project(&hull[u]).1 == project(&hull[v]).1 => u.min(v),
        FixedPoint::EdgeMidpoint(..) => {
            return Err(NielsenError::FinalCheckFailed("the stabilizer flips an edge of the cover".into()))
        }
    };
    let (g, rho) = project(&hull[center]);
    let ray = NielsenRay { rho, toward: toward.clone(), attachment: p, s: g.inverse(), hull_size: hull.len() };
    for &h in stab {
        let r = &action.reps[h];
        if r.vertex_image(&ray.rho) != ray.rho || ray.transported(r, toward) != ray.s {
            return Err(NielsenError::FinalCheckFailed(format!("element {h} moves the ray to {}", ray.rho)));
        }
    }
    Ok(ray)
}

fn lcp(paths: &[VertexPath]) -> VertexPath {
    let first = &paths[0];
    let len = paths.iter().map(|p| p.common_prefix_len(first)).min().unwrap_or(0);
    first.prefix(len)
}

/// A block of some level whose orbit is kept.
#[derive(Clone, Debug, Serialize)]
pub struct GoodBlock {
    pub level: usize,
    pub block: usize,
    pub cylinders: Vec<VertexPath>,
    pub attachment: VertexPath,
    pub stabilizer: Vec<usize>,
    pub ray: NielsenRay,
}

/// Why a block is good, or the first reason it is not.
fn judge(
    action: &FiniteGroupAction,
    space: &CylinderSpace,
    cyl: &CylinderAction,
    part: &Partition,
    b: usize,
    radius: usize,
) -> Result<Option<GoodBlock>, NielsenError> {
    let a = action.ambient();
    let genus = states_with_genus_ends(a);
    let core = states_reaching_loops(a);
    let members = part.members(b);
    let cylinders: Vec<VertexPath> = members.iter().map(|&i| space.cylinders[i].clone()).collect();
    if cylinders.iter().any(|c| genus[a.state_at(c).unwrap()]) {
        return Ok(None);
    }
    let attachment = attachment_of(a, &core, &cylinders[0]);
    if cylinders.iter().any(|c| attachment_of(a, &core, c) != attachment) {
        return Ok(None);
    }
    let set: BTreeSet<usize> = members.iter().copied().collect();
    let stabilizer: Vec<usize> =
        action.group.elements().filter(|&h| members.iter().all(|&i| set.contains(&cyl.apply(h, i)))).collect();
    let top = lcp(&cylinders);
    for &h in &stabilizer {
        let r = &action.reps[h];
        let m = r.mark(&cylinders[0]);
        if cylinders.iter().any(|c| r.mark(c) != m) || r.vertex_image(&top) != top {
            return Ok(None);
        }
    }
    let ray = nielsen_ray(action, &stabilizer, &top, radius)?;
    // the ray must leave the ball of radius `level` through the exit the
    // block hangs from
    if attachment.depth() > part.level && !attachment.prefix(part.level + 1).is_prefix_of(&ray.rho) {
        return Ok(None);
    }
    Ok(Some(GoodBlock { level: part.level, block: b, cylinders, attachment, stabilizer, ray }))
}

/// Scans the levels upward and keeps every orbit of good blocks not already
/// covered. Every end outside the closure of the genus ends must be covered.
pub fn good_filter(
    action: &FiniteGroupAction,
    space: &CylinderSpace,
    cyl: &CylinderAction,
    levels: &[Partition],
    radius: usize,
) -> Result<Vec<GoodBlock>, NielsenError> {
    let mut covered = vec![false; space.len()];
    let mut kept = Vec::new();
    for part in levels {
        let mut done = vec![false; part.len()];
        for b in 0..part.len() {
            if done[b] || part.members(b).iter().all(|&i| covered[i]) {
                continue;
            }
            let rep = part.members(b)[0];
            let orbit: BTreeSet<usize> = action.group.elements().map(|h| part.block_of[cyl.apply(h, rep)]).collect();
            let mut judged = Vec::new();
            for &o in &orbit {
                done[o] = true;
                judged.push(judge(action, space, cyl, part, o, radius)?);
            }
            if judged.iter().all(Option::is_some) {
                for g in judged.into_iter().flatten() {
                    for &i in &part.members(g.block) {
                        covered[i] = true;
                    }
                    kept.push(g);
                }
            }
        }
    }
    let free = states_with_free_ends(action.ambient());
    let genus = states_with_genus_ends(action.ambient());
    if let Some(i) = (0..space.len()).find(|&i| {
        let s = action.ambient().state_at(&space.cylinders[i]).unwrap();
        free[s] && !genus[s] && !covered[i]
    }) {
        return Err(NielsenError::NoGoodLevel(space.cylinders[i].clone()));
    }
    Ok(kept)
}

#[derive(Clone, Debug)]
pub struct GeneralCaseParams {
    pub depth: usize,
    pub levels: usize,
    pub eps_base: i128,
    pub radius: usize,
    /// Needed only when every end is accumulated by genus.
    pub cover: Option<IntervalCover>,
    pub bounds: SearchBounds,
}

#[derive(Clone, Debug, Serialize)]
pub enum GeneralCaseReport {
    Tree(TreeCaseReport),
    Core(CoreCaseReport),
    Mixed(MixedReport),
}

/// The core truncated at the cylinder depth, with the kept telescope
/// subtrees hung from their rays.
#[derive(Clone, Debug, Serialize)]
pub struct MixedReport {
    pub telescope: TelescopeTree,
    pub telescope_action: TelescopeAction,
    pub blocks: Vec<GoodBlock>,
    pub graph: RealizedGraph,
    /// Loop generators of the truncated core, in label order.
    pub generators: Vec<LoopGen>,
}

pub fn realize_general_case(
    action: &FiniteGroupAction,
    params: &GeneralCaseParams,
) -> Result<GeneralCaseReport, NielsenError> {
    let a = action.ambient();
    let core = states_reaching_loops(a);
    let space = CylinderSpace::new(a, params.depth)?;
    let cyl = action.on_cylinders(&space)?;
    if !core[a.root()] {
        return Ok(GeneralCaseReport::Tree(realize_tree_case(&space, &cyl, params.levels, params.eps_base)?));
    }
    let free = states_with_free_ends(a);
    let genus = states_with_genus_ends(a);
    let has_tree_ends = space.cylinders.iter().any(|c| {
        let s = a.state_at(c).unwrap();
        free[s] && !genus[s]
    });
    if !has_tree_ends {
        let cover = params.cover.clone().ok_or_else(|| {
            NielsenError::InvalidCover("every end is accumulated by genus and no cover was given".into())
        })?;
        return Ok(GeneralCaseReport::Core(realize_core_case(action, cover, params.bounds)?));
    }
    let avg = average_metric(&EndMetric::base(&space), &cyl)?;
    let seq = standard_sequence(&space, &avg, params.levels, params.eps_base)?;
    let tel = telescope(&seq)?;
    let tact = induced_telescope_action(&tel, &cyl)?;
    let blocks = good_filter(action, &space, &cyl, &seq, params.radius)?;
    let (graph, generators) = assemble(action, params.depth, &tel, &tact, &blocks)?;
    check_rays(action, &space, &cyl, &seq, &blocks)?;
    Ok(GeneralCaseReport::Mixed(MixedReport { telescope: tel, telescope_action: tact, blocks, graph, generators }))
}

/// Builds `Y` with its action and compares its outer action with the one
/// the representatives induce on the truncated core.
fn assemble(
    action: &FiniteGroupAction,
    depth: usize,
    tel: &TelescopeTree,
    tact: &TelescopeAction,
    blocks: &[GoodBlock],
) -> Result<(RealizedGraph, Vec<LoopGen>), NielsenError> {
    let a = action.ambient();
    let core = states_reaching_loops(a);
    let fail = |m: &str| NielsenError::FinalCheckFailed(m.into());
    // core vertices down to `depth`, breadth first
    let mut verts = vec![VertexPath::root()];
    let mut i = 0;
    while i < verts.len() {
        let v = verts[i].clone();
        let s = a.state_at(&v).unwrap();
        if v.depth() < depth {
            for (c, &t) in a.children(s).iter().enumerate() {
                if core[t] {
                    verts.push(v.child(c as u32));
                }
            }
        }
        i += 1;
    }
    let vindex: BTreeMap<VertexPath, usize> = verts.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let mut gens = Vec::new();
    for v in &verts {
        gens.extend((0..a.loops(a.state_at(v).unwrap())).map(|k| LoopGen::new(v.clone(), k)));
    }
    let gindex: BTreeMap<LoopGen, usize> = gens.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
    let mut y = RealizedGraph::empty(action.group.order());
    y.vertex_count = verts.len();
    let mut tree_edge = BTreeMap::new();
    for (i, v) in verts.iter().enumerate().skip(1) {
        tree_edge.insert(i, y.edges.len());
        y.edges.push((vindex[&v.parent().unwrap()], i));
        y.labels.push(Word::identity());
    }
    let loop_base = y.edges.len();
    for x in &gens {
        y.edges.push((vindex[&x.at], vindex[&x.at]));
        y.labels.push(Word::gen(gindex[x] as u32));
    }
    // kept telescope vertices, and the edge hanging each block from its ray
    let roots: BTreeMap<usize, &GoodBlock> = blocks.iter().map(|g| (tel.vertex_id(g.level, g.block), g)).collect();
    let kept: Vec<usize> = (0..tel.vertices.len())
        .filter(|&t| {
            let mut u = Some(t);
            while let Some(w) = u {
                if roots.contains_key(&w) {
                    return true;
                }
                u = tel.parent(w);
            }
            false
        })
        .collect();
    let tindex: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &t)| (t, verts.len() + i)).collect();
    y.vertex_count += kept.len();
    let mut tel_edge = BTreeMap::new();
    for &t in &kept {
        tel_edge.insert(t, y.edges.len());
        let lower = match roots.get(&t) {
            Some(g) => *vindex.get(&g.ray.rho).ok_or_else(|| fail("a ray starts below the truncation"))?,
            None => tindex[&tel.parent(t).unwrap()],
        };
        y.edges.push((lower, tindex[&t]));
        y.labels.push(Word::identity());
    }
    for h in action.group.elements() {
        let r = &action.reps[h];
        let mut vertices = vec![0; y.vertex_count];
        for (i, v) in verts.iter().enumerate() {
            vertices[i] = *vindex.get(&r.vertex_image(v)).ok_or_else(|| fail("the core action leaves the truncation"))?;
        }
        for &t in &kept {
            vertices[tindex[&t]] = *tindex.get(&tact.perms[h][t]).ok_or_else(|| fail("kept subtrees are not invariant"))?;
        }
        let mut edges = vec![(0, false); y.edges.len()];
        for (&i, &e) in &tree_edge {
            edges[e] = (tree_edge[&vertices[i]], false);
        }
        for (j, x) in gens.iter().enumerate() {
            if !r.mark(&x.at).is_identity() {
                return Err(fail("the core action is not simplicial"));
            }
            let img = r.image_of_gen(x);
            match img.letters() {
                [l] if gindex.contains_key(&l.gen) => edges[loop_base + j] = (loop_base + gindex[&l.gen], l.inverse),
                _ => return Err(fail("the core action is not simplicial")),
            }
        }
        for (&t, &e) in &tel_edge {
            edges[e] = (tel_edge[&tact.perms[h][t]], false);
        }
        y.action[h] = GraphMap { vertices, edges };
    }
    if !y.is_action_of(&action.group) {
        return Err(fail("the assembled maps are not an action"));
    }
    let outer = y.outer_action(gens.len()).ok_or_else(|| fail("the assembled graph is not marked"))?;
    for h in action.group.elements() {
        let r = &action.reps[h];
        let images = gens
            .iter()
            .map(|x| r.image_of_gen(x).substitute(|z| Word::gen(gindex[z] as u32)))
            .collect();
        let target = crate::stallings::Automorphism::new(images);
        if outer[h].outer_equal(&target) != Some(true) {
            return Err(fail("the outer action on the core differs"));
        }
    }
    Ok((y, gens))
}

/// `h` carries the ray of every kept block onto the ray of its image.
fn check_rays(
    action: &FiniteGroupAction,
    space: &CylinderSpace,
    cyl: &CylinderAction,
    seq: &[Partition],
    blocks: &[GoodBlock],
) -> Result<(), NielsenError> {
    let by_id: BTreeMap<(usize, usize), &GoodBlock> = blocks.iter().map(|g| ((g.level, g.block), g)).collect();
    for g in blocks {
        let part = &seq[g.level];
        for h in action.group.elements() {
            let r = &action.reps[h];
            let members = part.members(g.block);
            let image = by_id[&(g.level, part.block_of[cyl.apply(h, members[0])])];
            if r.vertex_image(&g.ray.rho) != image.ray.rho {
                return Err(NielsenError::FinalCheckFailed(format!("element {h} does not carry {} to {}", g.ray.rho, image.ray.rho)));
            }
            for &i in &members {
                let x = &space.cylinders[i];
                // the ray to `x` is the ray to the block top followed by tree edges
                let moved = g.ray.transported(r, x);
                if moved != image.ray.s {
                    return Err(NielsenError::FinalCheckFailed(format!(
                        "element {h} sends the ray through {x} to {moved}, not {}",
                        image.ray.s
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapclass::MapData;
    use crate::group::FiniteGroup;

    /// Rose on two loops with a ray; `h` swaps the loops and marks the ray
    /// by `a b⁻¹`.
    fn twisted_rose() -> FiniteGroupAction {
        let a = Automaton::from_named("r", &[("r", 2, vec!["t"]), ("t", 0, vec!["t"])]).unwrap();
        let (x, y) = (LoopGen::new(VertexPath::root(), 0), LoopGen::new(VertexPath::root(), 1));
        let mut data = MapData::default();
        data.loops.insert(x.clone(), y.word());
        data.loops.insert(y.clone(), x.word());
        data.marks.insert(VertexPath::root().child(0), x.word().mul(&y.word().inverse()));
        let h = ProperMapRep::new(&a, 1, data).unwrap();
        FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 1), h]).unwrap()
    }

    #[test]
    fn cover_paths_round_trip() {
        let g = LoopGen::new(VertexPath::root().child(0), 1).word().mul(&LoopGen::new(VertexPath::root(), 0).word().inverse());
        let v = VertexPath::root().child(1).child(0);
        assert_eq!(project(&lift(&g, &v)), (g, v));
    }

    #[test]
    fn twisted_stabilizer_moves_the_ray_around_a_loop() {
        let act = twisted_rose();
        let toward = VertexPath::root().child(0).child(0);
        let ray = nielsen_ray(&act, &[1], &toward, 8).unwrap();
        let b = LoopGen::new(VertexPath::root(), 1);
        assert_eq!(ray.rho, VertexPath::root());
        assert_eq!(ray.s, b.word().inverse());
        assert_eq!(ray.hull_size, 3);
        assert!(matches!(nielsen_ray(&act, &[1], &toward, 1), Err(NielsenError::RadiusTooSmall(1))));
        let trivial = nielsen_ray(&act, &[], &toward, 8).unwrap();
        assert!(trivial.s.is_identity());
    }

    #[test]
    fn loop_flip_keeps_the_attachment_point() {
        let a = Automaton::from_named("r", &[("r", 1, vec!["r", "t"]), ("t", 0, vec!["t"])]).unwrap();
        let flip = super::super::action::tests::inversion(&a, 3);
        let act = FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 3), flip]).unwrap();
        let toward = VertexPath(vec![0, 1, 0, 0]);
        let ray = nielsen_ray(&act, &[1], &toward, 12).unwrap();
        assert_eq!(ray.rho, VertexPath(vec![0]));
        assert!(ray.s.is_identity());
    }

    /// Loop ray with a Cantor tree hung from the root; `h` swaps its halves.
    fn branch_swap() -> FiniteGroupAction {
        let a = Automaton::from_named(
            "r",
            &[("r", 1, vec!["s", "c"]), ("s", 1, vec!["s"]), ("c", 0, vec!["c", "c"])],
        )
        .unwrap();
        let mut data = MapData::default();
        data.vmap.insert(VertexPath(vec![1, 0]), VertexPath(vec![1, 1]));
        data.vmap.insert(VertexPath(vec![1, 1]), VertexPath(vec![1, 0]));
        let h = ProperMapRep::new(&a, 2, data).unwrap();
        FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 2), h]).unwrap()
    }

    fn params(depth: usize) -> GeneralCaseParams {
        GeneralCaseParams { depth, levels: 4, eps_base: 2, radius: 16, cover: None, bounds: SearchBounds::default() }
    }

    #[test]
    fn branch_swap_hangs_a_telescope_from_the_core() {
        let act = branch_swap();
        let GeneralCaseReport::Mixed(r) = realize_general_case(&act, &params(4)).unwrap() else {
            panic!("expected the mixed case");
        };
        assert!(r.blocks.iter().all(|g| g.ray.rho == VertexPath::root()));
        assert_eq!(r.generators.len(), 5);
        assert_eq!(r.graph.rank(), 5);
        assert!(r.graph.is_action_of(&act.group));
    }

    #[test]
    fn blocks_straddling_two_attachments_are_refused() {
        // ends hang from the root and from its core child
        let a = Automaton::from_named("r", &[("r", 1, vec!["s", "t"]), ("s", 1, vec!["s", "t"]), ("t", 0, vec!["t"])])
            .unwrap();
        let act = FiniteGroupAction::trivial(&a);
        let space = CylinderSpace::new(&a, 4).unwrap();
        let cyl = act.on_cylinders(&space).unwrap();
        let only_trivial = vec![Partition::trivial(&space)];
        assert!(matches!(good_filter(&act, &space, &cyl, &only_trivial, 16), Err(NielsenError::NoGoodLevel(_))));
        let blocks = good_filter(&act, &space, &cyl, &standard_sequence(&space, &EndMetric::base(&space), 4, 2).unwrap(), 16)
            .unwrap();
        let attachments: BTreeSet<&VertexPath> = blocks.iter().map(|g| &g.attachment).collect();
        assert!(attachments.len() >= 2);
        assert!(blocks.iter().all(|g| g.cylinders.iter().all(|c| g.attachment.is_prefix_of(c))));
    }

    #[test]
    fn pure_cases_are_delegated() {
        let tree = Automaton::cantor();
        let act = FiniteGroupAction::trivial(&tree);
        assert!(matches!(realize_general_case(&act, &params(4)).unwrap(), GeneralCaseReport::Tree(_)));
        let ray = Automaton::loop_ray(1);
        let act = FiniteGroupAction::trivial(&ray);
        assert!(matches!(realize_general_case(&act, &params(4)), Err(NielsenError::InvalidCover(_))));
    }
}
