use std::collections::BTreeMap;

use super::{FiniteGroupAction, NielsenError};
use crate::graph_model::{states_reaching_loops, unfold, Automaton, VertexPath};
use crate::mapclass::{LoopGen, LoopWord, ProperMapRep};
use crate::stallings::{contained_in, intersect_ffs, push_forward, Automorphism, FreeFactorSystem, Subgroup};
use crate::word::{FWord, Letter, Word};

/// Consecutive intervals must share at least this many radii.
pub const MIN_OVERLAP: usize = 22;

/// A closed range `[a, b]` of indices into the radii of a cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Interval {
    pub a: usize,
    pub b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Self {
        Interval { a, b }
    }

    pub fn len(&self) -> usize {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.a == self.b
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Radii `r_0 = 0 < r_1 < ... < r_m` of the depth function together with
/// a chain of overlapping index intervals covering `[0, m]`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct IntervalCover {
    pub r: Vec<usize>,
    pub intervals: Vec<Interval>,
}

impl IntervalCover {
    pub fn new(r: Vec<usize>, intervals: Vec<Interval>) -> Result<Self, NielsenError> {
        let bad = |m: String| Err(NielsenError::InvalidCover(m));
        if r.first() != Some(&0) || r.windows(2).any(|w| w[0] >= w[1]) {
            return bad("radii must start at 0 and increase".into());
        }
        let m = r.len() - 1;
        if intervals.is_empty() || intervals[0].a != 0 || intervals.last().unwrap().b != m {
            return bad(format!("intervals must cover [0, {m}]"));
        }
        if intervals.iter().any(|j| j.a > j.b || j.b > m) {
            return bad("interval out of range".into());
        }
        for (i, w) in intervals.windows(2).enumerate() {
            if w[1].a <= w[0].a || w[1].b <= w[0].b {
                return bad(format!("intervals {i} and {} are out of order", i + 1));
            }
            if w[0].b < w[1].a + MIN_OVERLAP {
                return bad(format!("intervals {i} and {} overlap by less than {MIN_OVERLAP}", i + 1));
            }
        }
        for (i, w) in intervals.windows(3).enumerate() {
            if w[0].b >= w[2].a {
                return bad(format!("intervals {i} and {} meet", i + 2));
            }
        }
        Ok(IntervalCover { r, intervals })
    }

    /// `r_i = i` up to `top`.
    pub fn unit(top: usize, intervals: Vec<Interval>) -> Result<Self, NielsenError> {
        Self::new((0..=top).collect(), intervals)
    }

    pub fn top_index(&self) -> usize {
        self.r.len() - 1
    }

    pub fn top_radius(&self) -> usize {
        *self.r.last().unwrap()
    }

    /// The overlap of intervals `n` and `n + 1`.
    pub fn overlap(&self, n: usize) -> Interval {
        Interval::new(self.intervals[n + 1].a, self.intervals[n].b)
    }

    /// Widened by two on each side, clamped to the cover.
    pub fn plus(&self, j: Interval) -> Interval {
        Interval::new(j.a.saturating_sub(2), (j.b + 2).min(self.top_index()))
    }

    /// Shrunk by two on each side, except at the two ends of the cover.
    /// `None` when nothing is left.
    pub fn minus(&self, j: Interval) -> Option<Interval> {
        let a = if j.a == 0 { 0 } else { j.a + 2 };
        let b = if j.b == self.top_index() { j.b } else { j.b.checked_sub(2)? };
        (a <= b).then(|| Interval::new(a, b))
    }
}

/// A core graph cut off at the top radius of a cover, with the group
/// acting on the fundamental group of the truncation.
#[derive(Clone, Debug)]
pub struct CoreModel {
    pub ambient: Automaton,
    pub cover: IntervalCover,
    /// Basis of the truncation group; letter `i` is `gens[i]`.
    pub gens: Vec<LoopGen>,
    index: BTreeMap<LoopGen, u32>,
    pub action: FiniteGroupAction,
    /// Representatives described down to the top radius.
    pub reps: Vec<ProperMapRep>,
    pub autos: Vec<Automorphism>,
}

impl CoreModel {
    pub fn new(action: &FiniteGroupAction, cover: IntervalCover) -> Result<Self, NielsenError> {
        let ambient = action.ambient().clone();
        if states_reaching_loops(&ambient).iter().any(|&r| !r) {
            return Err(NielsenError::NotCoreGraph);
        }
        let top = cover.top_radius();
        let t = unfold(&ambient, top);
        let mut gens: Vec<LoopGen> =
            t.loop_edges.iter().map(|&(v, k)| LoopGen::new(t.vertices[v].path.clone(), k)).collect();
        gens.sort();
        let index = gens.iter().enumerate().map(|(i, x)| (x.clone(), i as u32)).collect();
        let mut reps = Vec::new();
        let mut autos = Vec::new();
        for (h, rep) in action.reps.iter().enumerate() {
            let rep = rep.extend_support(top);
            let (g, auto) = rep
                .support_automorphism()
                .ok_or_else(|| NielsenError::InvalidAction(format!("element {h} leaves the truncation")))?;
            if g != gens || auto.inverse().is_none() {
                return Err(NielsenError::InvalidAction(format!(
                    "element {h} does not restrict to an automorphism of the truncation"
                )));
            }
            reps.push(rep);
            autos.push(auto);
        }
        Ok(CoreModel { ambient, cover, gens, index, action: action.clone(), reps, autos })
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn letter(&self, x: &LoopGen) -> Option<u32> {
        self.index.get(x).copied()
    }

    pub fn to_free(&self, w: &LoopWord) -> Option<FWord> {
        let letters: Option<Vec<Letter<u32>>> =
            w.letters().iter().map(|l| self.letter(&l.gen).map(|i| Letter::new(i, l.inverse))).collect();
        Some(Word::from_letters(letters?))
    }

    pub fn from_free(&self, w: &FWord) -> LoopWord {
        w.substitute(|&i| self.gens[i as usize].word())
    }

    /// Depth range `[r_a, r_b]` of an interval.
    pub fn radii(&self, j: Interval) -> (usize, usize) {
        (self.cover.r[j.a], self.cover.r[j.b])
    }
}

/// Saturating depth of each vertex of a tree path visiting `points` in
/// order: the minimum over consecutive common ancestors and the maximum
/// over the points.
fn path_depths(points: &[VertexPath]) -> (usize, usize) {
    let lo = points.windows(2).map(|w| w[0].common_prefix_len(&w[1])).min().unwrap_or(points[0].depth());
    let hi = points.iter().map(|p| p.depth()).max().unwrap();
    (lo.min(points.iter().map(|p| p.depth()).min().unwrap()), hi)
}

fn word_points(from: &VertexPath, w: &LoopWord, to: &VertexPath) -> Vec<VertexPath> {
    let mut pts = vec![from.clone()];
    pts.extend(w.letters().iter().map(|l| l.gen.at.clone()));
    pts.push(to.clone());
    pts
}

/// Checks that every representative moves vertices, loops and edges of
/// annulus `i` (depths `[r_i, r_{i+1}]`) within depths `[r_{i-1}, r_{i+2}]`.
pub fn verify_displacement_bound(model: &CoreModel) -> Result<(), NielsenError> {
    let r = &model.cover.r;
    let m = model.cover.top_index();
    let t = unfold(&model.ambient, model.cover.top_radius());
    for (h, rep) in model.reps.iter().enumerate() {
        let within = |v: &VertexPath, range: (usize, usize)| -> bool {
            let d = v.depth();
            let i = (0..m).rev().find(|&i| r[i] <= d).unwrap_or(0);
            let lo = r[i.saturating_sub(1)];
            let hi = r[(i + 2).min(m)];
            lo <= range.0 && range.1 <= hi
        };
        for tv in &t.vertices {
            let v = &tv.path;
            let fv = rep.vertex_image(v);
            if !within(v, (fv.depth(), fv.depth())) {
                return Err(NielsenError::DisplacementBound(h));
            }
            for k in 0..model.ambient.loops(tv.state) {
                let x = LoopGen::new(v.clone(), k);
                let core = rep.mark(v).inverse().mul(&rep.image_of_gen(&x)).mul(&rep.mark(v));
                if !within(v, path_depths(&word_points(&fv, &core, &fv))) {
                    return Err(NielsenError::DisplacementBound(h));
                }
            }
        }
        for &(p, c) in &t.tree_edges {
            let (p, c) = (&t.vertices[p].path, &t.vertices[c].path);
            let w = rep.mark(p).inverse().mul(&rep.mark(c));
            if !within(p, path_depths(&word_points(&rep.vertex_image(p), &w, &rep.vertex_image(c)))) {
                return Err(NielsenError::DisplacementBound(h));
            }
        }
    }
    Ok(())
}

/// Based subgroups carried by the components of the band of depths
/// `[r_a, r_b]`, one for each vertex at depth `r_a` with loops below it.
pub fn interval_groups(model: &CoreModel, j: Interval) -> Vec<Subgroup> {
    let (lo, hi) = model.radii(j);
    let t = unfold(&model.ambient, lo);
    t.vertices
        .iter()
        .filter(|v| v.path.depth() == lo)
        .filter_map(|w| {
            let gens: Vec<FWord> = model
                .gens
                .iter()
                .enumerate()
                .filter(|(_, x)| w.path.is_prefix_of(&x.at) && x.at.depth() <= hi)
                .map(|(i, _)| FWord::gen(i as u32))
                .collect();
            (!gens.is_empty()).then(|| Subgroup::from_generators(&gens))
        })
        .collect()
}

pub fn ffs_of_interval(model: &CoreModel, j: Interval) -> FreeFactorSystem {
    FreeFactorSystem::new(interval_groups(model, j).into_iter().map(|s| s.graph).collect())
}

/// Intersection of the translates of `F(J)` under the group.
pub fn f_prime(model: &CoreModel, j: Interval) -> FreeFactorSystem {
    let f = ffs_of_interval(model, j);
    model.autos.iter().fold(f.clone(), |acc, phi| intersect_ffs(&acc, &push_forward(phi, &f)))
}

/// The components of `F'(J)` that contain a component of `F(J⁻)`.
/// Checks `F(J⁻) ⊑ F*(J) ⊑ F(J⁺)`, and invariance once `J` is long enough.
pub fn f_star(model: &CoreModel, j: Interval) -> Result<FreeFactorSystem, NielsenError> {
    let minus = model
        .cover
        .minus(j)
        .ok_or_else(|| NielsenError::InvalidCover(format!("interval {j} is too short to shrink")))?;
    let inner = ffs_of_interval(model, minus);
    let fp = f_prime(model, j);
    let kept: Vec<_> = fp
        .components
        .into_iter()
        .filter(|c| inner.components.iter().any(|b| b.immerses_into(c)))
        .collect();
    let fs = FreeFactorSystem::new(kept);
    let outer = ffs_of_interval(model, model.cover.plus(j));
    if !contained_in(&inner, &fs) {
        return Err(NielsenError::SandwichFailed(format!("F({minus}) is not carried by F*({j})")));
    }
    if !contained_in(&fs, &outer) {
        return Err(NielsenError::SandwichFailed(format!("F*({j}) is not carried by F({})", model.cover.plus(j))));
    }
    if j.len() >= 8 {
        for (h, phi) in model.autos.iter().enumerate() {
            if push_forward(phi, &fs) != fs {
                return Err(NielsenError::InvarianceFailed(format!("element {h} moves F*({j})")));
            }
        }
    }
    Ok(fs)
}

/// Based representatives of the components of `F*(J)`, each chosen to
/// contain a component of `F(J⁻)`.
pub fn f_star_groups(model: &CoreModel, j: Interval) -> Result<Vec<Subgroup>, NielsenError> {
    let fs = f_star(model, j)?;
    let inner = interval_groups(model, model.cover.minus(j).expect("checked by f_star"));
    let mut out = Vec::new();
    for c in fs.representatives() {
        let b = inner
            .iter()
            .find(|b| b.conjugacy_class().immerses_into(&c.conjugacy_class()))
            .expect("kept components contain an inner component");
        let v = b.conjugator_into(&c).expect("immersion gives a conjugator");
        out.push(c.conjugate(&v.inverse()));
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::mapclass::MapData;

    pub(crate) fn inversion(a: &Automaton, depth: usize) -> ProperMapRep {
        let mut data = MapData::default();
        for x in ProperMapRep::identity(a, depth).generators() {
            data.loops.insert(x.clone(), x.word().inverse());
        }
        ProperMapRep::new(a, depth, data).unwrap()
    }

    pub(crate) fn flip_model() -> CoreModel {
        let a = Automaton::loop_ray(1);
        let action =
            FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), inversion(&a, 50)])
                .unwrap();
        let cover =
            IntervalCover::unit(50, vec![Interval::new(0, 24), Interval::new(2, 48), Interval::new(26, 50)]).unwrap();
        CoreModel::new(&action, cover).unwrap()
    }

    #[test]
    fn cover_validation() {
        let j = |a, b| Interval::new(a, b);
        assert!(IntervalCover::unit(50, vec![j(0, 24), j(2, 48), j(26, 50)]).is_ok());
        assert!(IntervalCover::unit(50, vec![j(0, 24), j(4, 48), j(26, 50)]).is_err());
        assert!(IntervalCover::unit(50, vec![j(0, 30), j(2, 48), j(26, 50)]).is_err());
        assert!(IntervalCover::unit(50, vec![j(0, 24), j(2, 49)]).is_err());
        assert!(IntervalCover::new(vec![0, 2, 2], vec![j(0, 2)]).is_err());
        let c = IntervalCover::unit(50, vec![j(0, 24), j(2, 48), j(26, 50)]).unwrap();
        assert_eq!(c.minus(j(2, 48)), Some(j(4, 46)));
        assert_eq!(c.minus(j(0, 24)), Some(j(0, 22)));
        assert_eq!(c.minus(j(26, 50)), Some(j(28, 50)));
        assert_eq!(c.plus(j(2, 48)), j(0, 50));
    }

    #[test]
    fn flip_bands_are_invariant() {
        let m = flip_model();
        assert_eq!(m.rank(), 51);
        verify_displacement_bound(&m).unwrap();
        for j in m.cover.intervals.clone() {
            let fs = f_star(&m, j).unwrap();
            assert_eq!(fs, ffs_of_interval(&m, j));
            assert_eq!(fs.ranks(), vec![j.b - j.a + 1]);
        }
        let gs = f_star_groups(&m, Interval::new(2, 48)).unwrap();
        assert_eq!(gs.len(), 1);
        assert!(gs[0].contains(&FWord::gen(2)) && !gs[0].contains(&FWord::gen(1)));
    }

    #[test]
    fn shift_breaks_the_displacement_bound() {
        // a map that pulls loop 10 up to the root
        let a = Automaton::loop_ray(1);
        let mut data = MapData::default();
        let root = LoopGen::new(VertexPath::root(), 0);
        let far = LoopGen::new(VertexPath(vec![0; 10]), 0);
        data.loops.insert(root.clone(), far.word());
        data.loops.insert(far, root.word());
        let swap = ProperMapRep::new(&a, 10, data).unwrap();
        let action =
            FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), swap]).unwrap();
        let cover = IntervalCover::unit(50, vec![Interval::new(0, 24), Interval::new(2, 48), Interval::new(26, 50)])
            .unwrap();
        let m = CoreModel::new(&action, cover).unwrap();
        assert_eq!(verify_displacement_bound(&m), Err(NielsenError::DisplacementBound(1)));
    }

    #[test]
    fn trees_are_not_core_graphs() {
        let a = Automaton::cantor();
        let cover = IntervalCover::unit(50, vec![Interval::new(0, 24), Interval::new(2, 48), Interval::new(26, 50)])
            .unwrap();
        let err = CoreModel::new(&FiniteGroupAction::trivial(&a), cover).unwrap_err();
        assert_eq!(err, NielsenError::NotCoreGraph);
    }
}
