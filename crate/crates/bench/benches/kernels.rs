use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use dirreg::cones::{minimal_time, DirectionSet, PolyhedralCone, Region};
use dirreg::ekeland::{directional_ekeland, EkelandInstance};
use dirreg::polyhedron::Polyhedron;
use dirreg::wellposed::catalog;
use dirreg::wellposed::{check_openness, RateFunction};

fn hexagon() -> Region {
    let verts: Vec<Vec<f64>> = (0..6)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 6.0;
            vec![1.0 + 0.5 * a.cos(), 0.5 * a.sin()]
        })
        .collect();
    Region::from_polytopes(2, vec![Polyhedron::from_vrep(2, &verts, &[])])
}

fn minimal_time_bench(c: &mut Criterion) {
    let omega = hexagon();
    let full = DirectionSet::full_sphere(2);
    let cap =
        DirectionSet::cap(PolyhedralCone::from_generators(2, vec![vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap()).unwrap();
    let x = [-0.3, 0.2];
    c.bench_function("minimal_time/full_sphere", |b| b.iter(|| minimal_time(&full, black_box(&x), &omega).unwrap()));
    c.bench_function("minimal_time/cap", |b| b.iter(|| minimal_time(&cap, black_box(&x), &omega).unwrap()));
}

fn openness_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_openness");
    g.sample_size(10);
    for inst in [catalog::linear_2x(), catalog::square_up(), catalog::diag_2_1()] {
        let phi = RateFunction::power(0.9, 2.0).unwrap();
        g.bench_function(inst.name, |b| {
            b.iter(|| check_openness(&inst.map, &inst.base, &inst.l, &inst.m, &phi, &inst.spec).unwrap())
        });
    }
    g.finish();
}

fn ekeland_bench(c: &mut Criterion) {
    let points: Vec<Vec<f64>> = (0..50)
        .map(|k| {
            let s = k as f64 * 0.37;
            vec![s.sin(), s.cos(), (2.0 * s).sin(), (3.0 * s).cos()]
        })
        .collect();
    let values = (0..50).map(|k| ((k * 17) % 23) as f64 * 0.1).collect();
    let quadrant = DirectionSet::cap(PolyhedralCone::orthant(2)).unwrap();
    let inst = EkelandInstance { points, n: 2, values, start: 0, epsilon: 0.1, l: quadrant.clone(), m: quadrant };
    c.bench_function("directional_ekeland/50", |b| b.iter(|| directional_ekeland(black_box(&inst)).unwrap()));
}

criterion_group!(benches, minimal_time_bench, openness_bench, ekeland_bench);
criterion_main!(benches);
