use std::path::Path;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use kypher_core::harness::usecases::FIRST_NAMES;
use kypher_core::harness::{generate_scale_file, run_engine, Layout};
use kypher_core::{
    assemble_query, bind_graphs, compile, ExecOptions, GraphCache, InputSpec, JoinStrategy, PlanOptions, QueryText,
};

const SCALE_QUERY: QueryText<'static> = QueryText {
    match_text: "g: (p)-[:P31]->(:Q5), g: (p)-[:P735]->(n), g: (n)-[:label]->(l)",
    optional: Vec::new(),
    where_text: None,
    return_text: Some("distinct n as node1, count(n) as node2, l as `node1;label`"),
    order_text: Some("node2 desc"),
    limit: None,
};

fn parse(c: &mut Criterion) {
    let layout = Layout::single(Path::new("/corpus"));
    c.bench_function("assemble first-names query", |b| b.iter(|| FIRST_NAMES.spec(&layout).unwrap()));
}

fn import(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.tsv");
    generate_scale_file(&file, 20_000, 1).unwrap();
    c.bench_function("import 20k edges", |b| {
        b.iter_batched(
            || {
                let cache = dir.path().join("import.sqlite3");
                let _ = std::fs::remove_file(&cache);
                GraphCache::open(cache).unwrap()
            },
            |mut cache| cache.import_graph(&file, Some("g")).unwrap(),
            BatchSize::PerIteration,
        )
    });
}

fn query(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.tsv");
    generate_scale_file(&file, 100_000, 1).unwrap();
    let spec = assemble_query(vec![InputSpec::new(file.to_string_lossy(), Some("g"))], &SCALE_QUERY).unwrap();
    let mut cache = GraphCache::open(dir.path().join("query.sqlite3")).unwrap();
    run_engine(&mut cache, &spec, &PlanOptions::default(), &ExecOptions::default()).unwrap();
    c.bench_function("compile first-names shape", |b| {
        b.iter(|| compile(&bind_graphs(&spec, &cache).unwrap(), &PlanOptions::default()).unwrap())
    });
    let mut group = c.benchmark_group("warm 3-way join over 100k edges");
    group.sample_size(10);
    for (name, join) in [
        ("auto", JoinStrategy::Auto),
        ("hash", JoinStrategy::Hash),
        ("index", JoinStrategy::IndexNestedLoop),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| run_engine(&mut cache, &spec, &PlanOptions::default(), &ExecOptions { join }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, parse, import, query);
criterion_main!(benches);
