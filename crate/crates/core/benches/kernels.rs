//! Single-threaded kernels under the trial loops.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use treeaut::experiments::{slice_tuple, Slice};
use treeaut::nielsen::{stabilizer_image, DensityParams};
use treeaut::rooted::{uniform_rooted, PermGroup};
use treeaut::{Aut, RootedAut, RootedShape, TreeParams, Vertex};

fn apply(c: &mut Criterion) {
    let p = TreeParams::default();
    let g = Aut::random_stabilizer(p, 1)
        .compose(&Aut::left_mult_str(p, "01").unwrap())
        .compose(&Aut::random_stabilizer(p, 2).inverse());
    let ball = p.ball(&Vertex::root(), 6);
    c.bench_function("apply_ball6", |b| {
        b.iter(|| ball.iter().map(|v| g.apply(black_box(v)).len()).sum::<usize>())
    });
    let h = Aut::random_stabilizer(p, 3);
    c.bench_function("ball_action_depth4", |b| {
        b.iter(|| h.ball_action(black_box(&Vertex::root()), 4).unwrap())
    });
}

fn schreier_sims(c: &mut Criterion) {
    let s = RootedShape::new(vec![3, 2, 2, 2]).unwrap();
    let gens: Vec<_> = (0..3).map(|i| uniform_rooted(&s, i).leaf_permutation()).collect();
    c.bench_function("permgroup_depth4", |b| {
        b.iter(|| PermGroup::new(s.leaf_count(), black_box(gens.clone())).order())
    });
    let x: Vec<RootedAut> = (0..64).map(|i| uniform_rooted(&s, i)).collect();
    c.bench_function("rooted_compose_depth4", |b| {
        b.iter(|| x.iter().fold(RootedAut::identity(&s), |acc, y| acc.compose(y)))
    });
}

fn probe(c: &mut Criterion) {
    let t = slice_tuple(Slice::Mixed, TreeParams::default(), 42);
    let mut group = c.benchmark_group("stabilizer_image");
    group.sample_size(10);
    for depth in [2, 3] {
        let params = DensityParams {
            depth,
            ..DensityParams::default()
        };
        group.bench_function(format!("depth{depth}"), |b| {
            b.iter(|| stabilizer_image(&t, &Vertex::root(), params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, apply, schreier_sims, probe);
criterion_main!(benches);
