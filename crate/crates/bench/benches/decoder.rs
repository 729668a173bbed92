use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use majcolor::build_code;
use majcolor::decoder::{blossom, Decoder, Weighting};
use majcolor::noisesim::{build_schedule, simulate_shot, ErrorParams, RandomFaults};

fn bench_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_code");
    for d in [9usize, 17] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| b.iter(|| build_code(black_box(d)).unwrap()));
    }
    g.finish();
}

fn bench_blossom(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 40;
    let edges: Vec<(usize, usize, i64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, rng.gen_range(1..1000)))
        .collect();
    c.bench_function("blossom/complete_40", |b| {
        b.iter(|| blossom::min_weight_perfect_matching(n, black_box(&edges)).unwrap())
    });
}

fn bench_shot(c: &mut Criterion) {
    let eps = 0.0016;
    let mut g = c.benchmark_group("shot");
    for d in [5usize, 9, 13] {
        let layout = build_code(d).unwrap();
        let sched = build_schedule(&layout);
        let dec = Decoder::new(&layout, d, &ErrorParams::new(eps).unwrap(), Weighting::Probability);
        let matcher = dec.matcher();
        g.bench_with_input(BenchmarkId::new("simulate", d), &d, |b, &d| {
            let mut i = 0;
            b.iter(|| {
                i += 1;
                simulate_shot(&sched, d, &mut RandomFaults::new(eps, 5, i))
            })
        });
        let shots: Vec<_> = (0..64).map(|i| simulate_shot(&sched, d, &mut RandomFaults::new(eps, 6, i))).collect();
        g.bench_with_input(BenchmarkId::new("decode", d), &d, |b, _| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % shots.len();
                dec.decode_with(&matcher, &shots[i]).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_build, bench_blossom, bench_shot);
criterion_main!(benches);
