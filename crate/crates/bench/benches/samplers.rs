use bienayme::dist::load_spec;
use bienayme::paths::{decode, encode};
use bienayme::rng::stream;
use bienayme::sample::{sample_tn_exact, sample_tn_prime};
use bienayme::scaling::h_n;
use bienayme::Order;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const REFERENCE: &str = r#"{"kind":"cauchy_A","beta":1,"c":1,"cutoff":4}"#;

fn samplers(c: &mut Criterion) {
    let d = load_spec(REFERENCE).unwrap();
    let mut g = c.benchmark_group("tprime");
    for n in [1_000usize, 100_000] {
        let mut rng = stream(1, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| sample_tn_prime(&d, n, &mut rng).unwrap())
        });
    }
    g.finish();

    let geo = load_spec(r#"{"kind":"geometric"}"#).unwrap();
    let mut g = c.benchmark_group("exact");
    for n in [100usize, 1_000] {
        let mut rng = stream(2, n as u64);
        g.bench_with_input(BenchmarkId::new("geometric", n), &n, |b, &n| {
            b.iter(|| sample_tn_exact(&geo, n, &mut rng, 1 << 32).unwrap())
        });
    }
    g.finish();
}

fn codecs(c: &mut Criterion) {
    let d = load_spec(REFERENCE).unwrap();
    let tree = sample_tn_prime(&d, 100_000, &mut stream(3, 0))
        .unwrap()
        .tree;
    for order in [Order::Lex, Order::Bfs] {
        let path = encode(&tree, order);
        c.bench_function(&format!("encode/{order:?}"), |b| {
            b.iter(|| encode(&tree, order))
        });
        c.bench_function(&format!("decode/{order:?}"), |b| {
            b.iter(|| decode(&path, order).unwrap())
        });
    }
    c.bench_function("height+width", |b| b.iter(|| (tree.height(), tree.width())));
}

fn scaling(c: &mut Criterion) {
    let d = load_spec(REFERENCE).unwrap();
    c.bench_function("h_n/1e6", |b| b.iter(|| h_n(&d, 1_000_000).unwrap()));
}

criterion_group!(benches, samplers, codecs, scaling);
criterion_main!(benches);
