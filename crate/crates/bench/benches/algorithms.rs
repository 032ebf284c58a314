use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use propermaps::end_space::CylinderSpace;
use propermaps::graph_model::{classify_equivalent, unfold};
use propermaps::mapclass::is_properly_homotopic_to_identity;
use propermaps::nielsen::{
    fixed_point_in_finite_tree, realize_core_case, realize_finite_out, realize_tree_case, Interval, IntervalCover,
    SearchBounds,
};
use propermaps::stallings::{intersect_ffs, Automorphism};
use propermaps::{Automaton, FiniteGroup};
use propermaps_bench::{ffs, inversion_action, rotation, shift, swapped_binary_tree};

fn graph_model(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_model");
    for depth in [6, 10] {
        let a = Automaton::regular_tree(2, 1);
        group.bench_with_input(BenchmarkId::new("unfold", depth), &depth, |b, &d| b.iter(|| unfold(&a, d)));
    }
    let (x, y) = (Automaton::loop_ray(2), Automaton::loop_ray(3));
    group.bench_function("classify", |b| b.iter(|| classify_equivalent(black_box(&x), black_box(&y))));
    group.finish();
}

fn stallings(c: &mut Criterion) {
    let first = ffs(&[&["ab", "cbC"], &["dd", "eD"]]);
    let second = ffs(&[&["a", "cbC", "dEd"], &["bab"]]);
    c.bench_function("stallings/intersect", |b| b.iter(|| intersect_ffs(black_box(&first), black_box(&second))));
}

fn mapclass(c: &mut Criterion) {
    let mut group = c.benchmark_group("mapclass");
    for depth in [8, 32] {
        let f = shift(depth);
        group.bench_with_input(BenchmarkId::new("check_id", depth), &f, |b, f| {
            b.iter(|| is_properly_homotopic_to_identity(f))
        });
    }
    group.finish();
}

fn nielsen(c: &mut Criterion) {
    let mut group = c.benchmark_group("nielsen");
    let (tree, perms) = swapped_binary_tree(6);
    group.bench_function("fixed_point", |b| b.iter(|| fixed_point_in_finite_tree(&tree, &perms).unwrap()));

    let space = CylinderSpace::new(&Automaton::cantor(), 5).unwrap();
    let action = rotation(&space, 2);
    group.bench_function("tree_case", |b| b.iter(|| realize_tree_case(&space, &action, 4, 2).unwrap()));

    let swap = Automorphism::parse(2, "a -> b; b -> a").unwrap();
    let targets = [Automorphism::identity(2), swap];
    let bounds = SearchBounds { max_edges: 4, ..SearchBounds::default() };
    group.bench_function("finite_out", |b| {
        b.iter(|| realize_finite_out(&FiniteGroup::cyclic(2), &targets, 2, bounds).unwrap())
    });

    let flip = inversion_action(&Automaton::loop_ray(1), 50);
    let cover = IntervalCover::unit(50, vec![Interval::new(0, 24), Interval::new(2, 48), Interval::new(26, 50)]).unwrap();
    group.sample_size(10);
    group.bench_function("core_case", |b| {
        b.iter(|| realize_core_case(&flip, cover.clone(), SearchBounds::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, graph_model, stallings, mapclass, nielsen);
criterion_main!(benches);
