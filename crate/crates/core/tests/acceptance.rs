//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL
//! line; the process fails if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

use propermaps::end_space::{boundary_map, CylinderAction, CylinderSpace};
use propermaps::graph_model::{classify_equivalent, Answer};
use propermaps::mapclass::{
    distinct_cosets, is_properly_homotopic_to_identity, phi_t, r_cocycle_check,
    realize_r_function, verify_proper_pair, IdentityVerdict, LoopGen, LoopWord, MapData, ProperMapRep, RFunction,
    Subgraph,
};
use propermaps::nielsen::{
    f_prime, f_star, ffs_of_interval, fixed_point_in_finite_tree, realize_core_case, realize_finite_out,
    realize_tree_case, replay, CoreModel, FiniteGroupAction, FixedPoint, Interval, IntervalCover, SearchBounds,
};
use propermaps::stallings::{contained_in, intersect_ffs, Automorphism, FreeFactorSystem};
use propermaps::word::parse_basis_word;
use propermaps::{Automaton, FiniteGraph, FiniteGroup, VertexPath, Word};

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn words(list: &[&str]) -> Vec<propermaps::FWord> {
    list.iter().map(|s| parse_basis_word(s).unwrap()).collect()
}

fn free_factor_intersection() -> Outcome {
    let ab = FreeFactorSystem::from_generators(&[words(&["a", "b"])]);
    let conj = FreeFactorSystem::from_generators(&[words(&["a", "cbC"])]);
    let c = FreeFactorSystem::from_generators(&[words(&["c"])]);
    let meet = intersect_ffs(&ab, &conj);
    let expected = FreeFactorSystem::from_generators(&[words(&["a"]), words(&["b"])]);
    ensure(meet == expected, format!("got {}", meet.to_text()))?;
    ensure(meet.ranks() == vec![1, 1], format!("ranks {:?}", meet.ranks()))?;
    let empty = intersect_ffs(&ab, &c);
    ensure(empty.is_empty(), format!("expected no components, got {}", empty.len()))?;
    Ok("ranks (1,1) and 0 components".into())
}

fn shift(depth: usize) -> ProperMapRep {
    let ray = Automaton::loop_ray(1);
    let mut text = format!("support {depth}\n");
    for n in 1..=depth {
        let v = VertexPath(vec![0; n]);
        let u = VertexPath(vec![0; n - 1]);
        text.push_str(&format!("loop {v}:0 -> {v}:0 {u}:0\n"));
    }
    text.push_str("outside banded 1\nrule 0 -> @0:0 @-1:0\n");
    ProperMapRep::parse_with_ambient(&ray, &text).unwrap()
}

fn ray_loop(n: usize) -> LoopGen {
    LoopGen::new(VertexPath(vec![0; n]), 0)
}

/// Identity-outside maps on the loop ray with support `d`: loop `n` goes to
/// itself with its lower neighbour attached on either side and with either
/// sign, or to the truncated formal inverse of the shift.
fn candidate_inverses(d: usize) -> Vec<ProperMapRep> {
    let a = Automaton::loop_ray(1);
    let choices = |n: usize| -> Vec<LoopWord> {
        let x = ray_loop(n).word();
        if n == 0 {
            return vec![x];
        }
        let y = ray_loop(n - 1).word();
        vec![x.clone(), x.mul(&y), x.mul(&y.inverse()), y.mul(&x), y.inverse().mul(&x)]
    };
    let mut images: Vec<Vec<LoopWord>> = vec![Vec::new()];
    for n in 0..=d {
        images = images
            .into_iter()
            .flat_map(|prefix| {
                choices(n).into_iter().map(move |w| {
                    let mut next = prefix.clone();
                    next.push(w);
                    next
                })
            })
            .collect();
    }
    // x_n ↦ x_n g(x_{n-1})⁻¹ inverts the shift on the support
    let mut formal = vec![ray_loop(0).word()];
    for n in 1..=d {
        let prev = formal[n - 1].clone();
        formal.push(ray_loop(n).word().mul(&prev.inverse()));
    }
    images.push(formal);
    images
        .into_iter()
        .map(|imgs| {
            let mut data = MapData::default();
            for (n, w) in imgs.into_iter().enumerate() {
                data.loops.insert(ray_loop(n), w);
            }
            ProperMapRep::new(&a, d, data).unwrap()
        })
        .collect()
}

fn shift_is_not_proper() -> Outcome {
    let f = shift(6);
    let v = is_properly_homotopic_to_identity(&f);
    let IdentityVerdict::No(witness) = v else {
        return Err(format!("checkId gave {v:?}"));
    };
    let mut tried = 0;
    for d in 0..=6 {
        let candidates = candidate_inverses(d);
        tried += candidates.len();
        candidates.par_iter().try_for_each(|g| {
            ensure(!verify_proper_pair(&f, g), format!("a support-{d} candidate passed"))?;
            // one of the composites must be refuted outright, not just left open
            let refuted = [f.compose(g), g.compose(&f)]
                .into_iter()
                .any(|c| c.is_ok_and(|c| matches!(is_properly_homotopic_to_identity(&c), IdentityVerdict::No(_))));
            ensure(refuted, format!("no composite with a support-{d} candidate is refuted"))
        })?;
    }
    Ok(format!("witness: {witness}; {tried} candidates refuted"))
}

fn classification() -> Outcome {
    let two = Automaton::loop_ray(2);
    let three = Automaton::loop_ray(3);
    ensure(classify_equivalent(&two, &three) == Answer::Yes, "loop rays with 2 and 3 loops")?;
    ensure(classify_equivalent(&Automaton::ray(), &Automaton::cantor()) == Answer::No, "ray against Cantor tree")?;
    Ok("YES and NO".into())
}

fn random_r_function(rng: &mut ChaCha8Rng, alpha0: &VertexPath) -> RFunction {
    let mut blocks = BTreeMap::new();
    let mut open: Vec<VertexPath> = vec![VertexPath(vec![0]), VertexPath(vec![1])];
    while let Some(p) = open.pop() {
        if p.depth() < 5 && rng.gen_bool(0.5) {
            open.push(p.child(0));
            open.push(p.child(1));
            continue;
        }
        let value = if p.is_prefix_of(alpha0) {
            LoopWord::identity()
        } else {
            let len = rng.gen_range(0..=6);
            Word::from_letters((0..len).map(|_| {
                propermaps::Letter::new(LoopGen::new(VertexPath::root(), rng.gen_range(0..2)), rng.gen_bool(0.5))
            }))
        };
        blocks.insert(p, value);
    }
    RFunction { alpha0: alpha0.clone(), blocks }
}

fn phi_t_round_trip() -> Outcome {
    let a: Automaton = "root r\nstate r loops=2 children=t,t\nstate t loops=0 children=t,t\n".parse().unwrap();
    let alpha0 = VertexPath(vec![0; 5]);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut maps = Vec::new();
    for i in 0..100 {
        let h = random_r_function(&mut rng, &alpha0);
        let f = realize_r_function(&a, &h, 0).map_err(|e| format!("function {i}: {e}"))?;
        let back = phi_t(&f, Some(&alpha0)).map_err(|e| format!("function {i}: {e}"))?;
        ensure(back.same_as(&h, &a), format!("function {i} came back as {}", back.to_text()))?;
        maps.push(f);
    }
    let mut pairs = 0;
    for f in &maps {
        for g in &maps {
            ensure(r_cocycle_check(f, g).map_err(|e| e.to_string())?, "cocycle identity fails")?;
            pairs += 1;
        }
    }
    Ok(format!("100 functions, {pairs} pairs"))
}

fn tree_pipeline() -> Outcome {
    for (aut, n) in [(Automaton::cantor(), 2u32), (Automaton::regular_tree(3, 0), 3)] {
        let space = CylinderSpace::new(&aut, 4).map_err(|e| e.to_string())?;
        let action = CylinderAction::from_fn(&space, FiniteGroup::cyclic(n as usize), |g, p| {
            let mut q = p.clone();
            q.0[0] = (q.0[0] + g as u32) % n;
            q
        })
        .map_err(|e| e.to_string())?;
        let r = realize_tree_case(&space, &action, 4, 2).map_err(|e| e.to_string())?;
        let bm = boundary_map(&r.telescope);
        ensure(r.telescope.is_tree(), "telescope is not a tree")?;
        ensure(r.action.is_simplicial(&r.telescope), "action is not simplicial")?;
        ensure(bm.is_bijective(&r.telescope) && bm.is_equivariant(&action, &r.action), "boundary map")?;
        ensure(!r.action.is_identity(), "the action should be nontrivial")?;
    }
    Ok("Z/2 half-swap and Z/3 rotation at depth 4".into())
}

fn inversion(a: &Automaton, depth: usize) -> ProperMapRep {
    let mut data = MapData::default();
    for x in ProperMapRep::identity(a, depth).generators() {
        data.loops.insert(x.clone(), x.word().inverse());
    }
    ProperMapRep::new(a, depth, data).unwrap()
}

fn core_pipeline() -> Outcome {
    let a = Automaton::loop_ray(1);
    let action = FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), inversion(&a, 50)])
        .map_err(|e| e.to_string())?;
    let cover = IntervalCover::unit(50, vec![Interval::new(0, 24), Interval::new(2, 48), Interval::new(26, 50)])
        .map_err(|e| e.to_string())?;
    let model = CoreModel::new(&action, cover.clone()).map_err(|e| e.to_string())?;
    for &j in &cover.intervals {
        let fs = f_star(&model, j).map_err(|e| e.to_string())?;
        let inner = ffs_of_interval(&model, cover.minus(j).unwrap());
        ensure(contained_in(&inner, &fs) && contained_in(&fs, &f_prime(&model, j)), format!("sandwich at {j}"))?;
        ensure(contained_in(&fs, &ffs_of_interval(&model, cover.plus(j))), format!("upper bound at {j}"))?;
    }
    let r = realize_core_case(&action, cover, SearchBounds::default()).map_err(|e| e.to_string())?;
    r.tstar.check_axioms().map_err(|e| e.to_string())?;
    for k in 0..=r.script.len() {
        let t = replay(&r.tstar, &r.script[..k]).map_err(|e| e.to_string())?;
        ensure(t.rank() == r.tstar.rank(), format!("rank changes after move {k}"))?;
    }
    ensure(replay(&r.tstar, &r.script).map_err(|e| e.to_string())?.shape() == r.t.shape(), "script does not reach T")?;
    ensure(r.verdicts.iter().all(IdentityVerdict::is_yes), format!("verdicts {:?}", r.verdicts))?;
    Ok(format!("rank {} graph, {} moves", r.graph.rank(), r.script.len()))
}

fn auto(text: &str) -> Automorphism {
    Automorphism::parse(2, text).unwrap()
}

fn finite_out() -> Outcome {
    let z2 = FiniteGroup::cyclic(2);
    let bounds = SearchBounds { max_edges: 6, ..SearchBounds::default() };
    for (name, t) in [("swap", auto("a -> b; b -> a")), ("double inversion", auto("a -> A; b -> B"))] {
        let targets = [Automorphism::identity(2), t];
        let g = realize_finite_out(&z2, &targets, 2, bounds).map_err(|e| format!("{name}: {e}"))?;
        ensure(g.vertex_count == 1 && g.edges.len() == 2, format!("{name}: not the rose"))?;
        let outer = g.outer_action(2).ok_or(format!("{name}: unmarked"))?;
        for (h, target) in targets.iter().enumerate() {
            ensure(outer[h].outer_equal(target) == Some(true), format!("{name}: element {h} differs"))?;
        }
    }
    let triv = realize_finite_out(&FiniteGroup::trivial(), &[Automorphism::identity(2)], 2, bounds)
        .map_err(|e| e.to_string())?;
    ensure(triv.vertex_count == 1 && triv.edges.len() == 2, "trivial group does not give the rose")?;
    Ok("swap, double inversion, trivial".into())
}

/// Rooted random tree with vertices in random order; returns edges as
/// (parent, child) and the root.
fn random_tree(rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=40);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    // a few templates get duplicated so that symmetric siblings are common
    let mut edges = Vec::new();
    let mut built = 1;
    while built < n {
        let parent = order[rng.gen_range(0..built)];
        let width = rng.gen_range(1..=3).min((n - built) / 2).max(1);
        let pair = built + 2 * width <= n && rng.gen_bool(0.6);
        if pair {
            // two copies of a path hanging from `parent`
            for copy in 0..2 {
                let mut last = parent;
                for k in 0..width {
                    let v = order[built + copy * width + k];
                    edges.push((last, v));
                    last = v;
                }
            }
            built += 2 * width;
        } else {
            edges.push((parent, order[built]));
            built += 1;
        }
    }
    (order[0], edges)
}

fn children(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for &(p, c) in edges {
        out[p].push(c);
    }
    out
}

fn code(v: usize, kids: &[Vec<usize>], memo: &mut BTreeMap<usize, String>) -> String {
    if let Some(c) = memo.get(&v) {
        return c.clone();
    }
    let mut parts: Vec<String> = kids[v].iter().map(|&c| code(c, kids, memo)).collect();
    parts.sort();
    let c = format!("({})", parts.concat());
    memo.insert(v, c.clone());
    c
}

/// An isomorphism of the subtree at `u` onto the subtree at `v`.
fn match_subtrees(u: usize, v: usize, kids: &[Vec<usize>], memo: &mut BTreeMap<usize, String>, out: &mut Vec<usize>) {
    out[u] = v;
    let mut ku: Vec<usize> = kids[u].clone();
    let mut kv: Vec<usize> = kids[v].clone();
    ku.sort_by_key(|&c| code(c, kids, memo));
    kv.sort_by_key(|&c| code(c, kids, memo));
    for (a, b) in ku.into_iter().zip(kv) {
        match_subtrees(a, b, kids, memo, out);
    }
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

fn closure(n: usize, gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let id: Vec<usize> = (0..n).collect();
    let mut seen: BTreeSet<Vec<usize>> = [id.clone()].into_iter().collect();
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = compose(g, &p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen.into_iter().collect()
}

fn path_between(adj: &[Vec<usize>], a: usize, b: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[a] = a;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![b];
    while *path.last().unwrap() != a {
        path.push(prev[*path.last().unwrap()]);
    }
    path
}

fn fixed_points() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut nontrivial = 0;
    for trial in 0..500 {
        let (_, edges) = random_tree(&mut rng);
        let n = edges.len() + 1;
        let kids = children(n, &edges);
        let mut memo = BTreeMap::new();
        let mut gens = Vec::new();
        for v in 0..n {
            for i in 0..kids[v].len() {
                for j in i + 1..kids[v].len() {
                    let (a, b) = (kids[v][i], kids[v][j]);
                    if code(a, &kids, &mut memo) == code(b, &kids, &mut memo) && rng.gen_bool(0.5) {
                        let mut perm: Vec<usize> = (0..n).collect();
                        match_subtrees(a, b, &kids, &mut memo, &mut perm);
                        match_subtrees(b, a, &kids, &mut memo, &mut perm);
                        gens.push(perm);
                    }
                }
            }
        }
        gens.truncate(4);
        let group = closure(n, &gens);
        nontrivial += usize::from(group.len() > 1);
        let tree = FiniteGraph::new(n, edges.clone());
        let point = fixed_point_in_finite_tree(&tree, &group).map_err(|e| format!("tree {trial}: {e}"))?;
        let fixed = group.iter().all(|p| match point {
            FixedPoint::Vertex(v) => p[v] == v,
            FixedPoint::EdgeMidpoint(u, v) => (p[u] == u && p[v] == v) || (p[u] == v && p[v] == u),
        });
        ensure(fixed, format!("tree {trial}: {point:?} is moved"))?;
        // the point lies on a path between two points of the orbit of 0
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let orbit: BTreeSet<usize> = group.iter().map(|p| p[0]).collect();
        let on_hull = |x: usize| {
            orbit.iter().any(|&a| orbit.iter().any(|&b| path_between(&adj, a, b).contains(&x)))
        };
        let inside = match point {
            FixedPoint::Vertex(v) => on_hull(v),
            FixedPoint::EdgeMidpoint(u, v) => on_hull(u) && on_hull(v),
        };
        ensure(inside, format!("tree {trial}: {point:?} is outside the orbit hull"))?;
    }
    Ok(format!("500 trees, {nontrivial} with nontrivial groups"))
}

fn transvection(a: &Automaton, at: &str, power: i64) -> ProperMapRep {
    let v: VertexPath = at.parse().unwrap();
    let (x, y) = (LoopGen::new(v.clone(), 0), LoopGen::new(v.clone(), 1));
    let mut data = MapData::default();
    data.loops.insert(x.clone(), x.word().mul(&y.word().pow(power)));
    ProperMapRep::new(a, v.depth(), data).unwrap()
}

fn infinitely_many_cosets() -> Outcome {
    let a = Automaton::loop_ray(2);
    let k = Subgraph::new(&a, [VertexPath::root()]).map_err(|e| e.to_string())?;
    let l = Subgraph::new(&a, [VertexPath::root(), "0".parse().unwrap()]).map_err(|e| e.to_string())?;
    let maps: Vec<ProperMapRep> = (0..20).map(|n| transvection(&a, "0", n)).collect();
    ensure(distinct_cosets(&maps, &k, &l), "cosets are not certified distinct")?;
    Ok("20 distinct cosets".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("free factor intersection", free_factor_intersection, Duration::from_secs(1)),
        ("shift map has no proper inverse", shift_is_not_proper, Duration::from_secs(10)),
        ("classification", classification, Duration::from_secs(1)),
        ("R-function round trip", phi_t_round_trip, Duration::from_secs(60)),
        ("tree pipeline", tree_pipeline, Duration::from_secs(10)),
        ("core pipeline", core_pipeline, Duration::from_secs(300)),
        ("finite subgroups of Out(F2)", finite_out, Duration::from_secs(30)),
        ("fixed points in finite trees", fixed_points, Duration::from_secs(30)),
        ("distinct cosets", infinitely_many_cosets, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) if took <= *budget => println!("PASS {} {name}: {detail} ({took:.2?})", i + 1),
            Ok(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}, but took {took:.2?} (budget {budget:?})", i + 1);
            }
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
