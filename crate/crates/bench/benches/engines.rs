use std::hint::black_box;

use couplab_core::markov::transition_distribution;
use couplab_core::padded::block_norms;
use couplab_core::qcc::{run_complement_branch, Engine};
use couplab_core::{stream_for, QccParams, Subset};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn complement_engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("complement_trial");
    for &(n, k) in &[(20usize, 18usize), (100, 98)] {
        let params = QccParams::new(n, k, 0.1).unwrap();
        let s = Subset::new(n, 0..k).unwrap();
        let ell = 4 * k;
        for (name, engine) in [("categorical", Engine::Categorical), ("statevec", Engine::StateVector)] {
            group.bench_with_input(BenchmarkId::new(name, n), &engine, |b, &engine| {
                let mut idx = 0;
                b.iter(|| {
                    idx += 1;
                    let mut rng = stream_for(1, idx);
                    black_box(run_complement_branch(&params, &s, ell, engine, &mut rng).unwrap())
                })
            });
        }
    }
    group.finish();
}

fn blocks(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_norms");
    for &(k, t, p) in &[(3usize, 3usize, 3u32), (4, 4, 5)] {
        let s = Subset::new(k + 1, 0..k).unwrap();
        group.bench_function(format!("k{k}_t{t}_p{p}"), |b| {
            b.iter(|| black_box(block_norms(&s, t, p, k + 1).unwrap()))
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    c.bench_function("transition_distribution", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for j in 0..=50 {
                for l in 0..=5 {
                    acc += transition_distribution(black_box(50), j, l).unwrap().no_op;
                }
            }
            acc
        })
    });
}

criterion_group!(benches, complement_engines, blocks, oracle);
criterion_main!(benches);
