use criterion::{criterion_group, criterion_main, Criterion};
use folchar_core::classes::{bott_rep, verify_prop31};
use folchar_core::models::S3Family;
use folchar_core::numeric::{class_coefficient, ParamManifold, QuadratureSpec};
use num_complex::Complex64;

fn s3_classes(c: &mut Criterion) {
    let f = S3Family::new().unwrap();
    let man = ParamManifold::s3().with_parameter("lambda", Complex64::new(2.0, 0.0));
    let bott = bott_rep(&f.chart);
    let mut group = c.benchmark_group("s3");
    group.sample_size(10);
    for n in [16, 48] {
        let quad = QuadratureSpec::uniform(3, n).unwrap();
        group.bench_function(format!("bott {n}^3"), |b| b.iter(|| class_coefficient(&bott, &man, &quad).unwrap()));
    }
    let fiber = verify_prop31(&f.chart, &f.deformation, 1, "t", None).unwrap().flk_fiber;
    let quad = QuadratureSpec::reference(3);
    group.bench_function("twisted fiber class 48^3", |b| b.iter(|| class_coefficient(&fiber, &man, &quad).unwrap()));
    group.bench_function("twist symbolic m=1", |b| {
        b.iter(|| verify_prop31(&f.chart, &f.deformation, 1, "t", None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, s3_classes);
criterion_main!(benches);
