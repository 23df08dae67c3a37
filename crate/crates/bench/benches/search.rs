use criterion::{criterion_group, criterion_main, Criterion};

use endomorph_core::corpus::{arrow, eq2, m1p};
use endomorph_core::definability::Definer;
use endomorph_core::maps::{end_monoid, polymorphisms};
use endomorph_core::{Fragment, TupleSet};

fn monoids(c: &mut Criterion) {
    let a = eq2(2, 3).unwrap();
    c.bench_function("end_monoid EQ2(2,3)", |b| b.iter(|| end_monoid(&a).unwrap().len()));
    let r = arrow().unwrap();
    c.bench_function("polymorphisms ARROW 3", |b| b.iter(|| polymorphisms(&r, 3).unwrap().len()));
}

fn definability(c: &mut Criterion) {
    let a = m1p(4, 3).unwrap();
    let x = TupleSet::parse("{(4),(5),(6),(7),(8),(9)}", None, a.size()).unwrap();
    c.bench_function("PEX check M1P(4,3)", |b| {
        b.iter(|| Definer::new(&a).check(&x, Fragment::PEX).unwrap().definable)
    });
    let e = eq2(1, 1).unwrap();
    let y = TupleSet::parse("{(0 0),(1 1),(2 2),(1 2),(2 1)}", None, e.size()).unwrap();
    c.bench_function("PP check EQ2(1,1)", |b| b.iter(|| Definer::new(&e).check(&y, Fragment::PP).unwrap().definable));
}

criterion_group!(benches, monoids, definability);
criterion_main!(benches);
