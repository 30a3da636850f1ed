use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wavesamp::kernels::{kernel_disk, kernel_ellipse, kernel_oracle};
use wavesamp::lattice::nyquist_for;
use wavesamp::statfield::acf_numeric;
use wavesamp::{EllipseShape, Position, ScatteringScenario, SpectralSupport, Wavenumber};

fn kernels(c: &mut Criterion) {
    let kn = Wavenumber::from_lambda(1.0).unwrap();
    let shape = EllipseShape::new(0.8, 0.4, 0.3).unwrap();
    let disk = kernel_disk(kn);
    let ellipse = kernel_ellipse(kn, shape).unwrap();
    let points: Vec<Position> = (0..1024)
        .map(|i| Position::new(0.013 * i as f64, -0.007 * i as f64))
        .collect();

    c.bench_function("kernel_disk/1024", |b| {
        b.iter(|| points.iter().map(|&r| disk.eval(black_box(r))).sum::<f64>())
    });
    c.bench_function("kernel_ellipse/1024", |b| {
        b.iter(|| points.iter().map(|&r| ellipse.eval(black_box(r))).sum::<f64>())
    });

    let support = SpectralSupport::Ellipse(kn, shape);
    let q = nyquist_for(&support);
    c.bench_function("kernel_oracle/ellipse", |b| {
        b.iter(|| kernel_oracle(&support, &q, black_box(Position::new(1.7, -0.4))).unwrap())
    });

    let s = ScatteringScenario::single(kn, 0.2, 0.5, 40.0).unwrap();
    c.bench_function("acf_numeric/alpha40", |b| {
        b.iter(|| acf_numeric(&s, black_box(Position::new(1.1, 0.3))).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
