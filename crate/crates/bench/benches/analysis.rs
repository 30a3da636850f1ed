use criterion::{criterion_group, criterion_main, Criterion};
use wavesamp::analysis::{build_autocorr_matrix, eigen_spectrum, mse_experiment, MseOptions};
use wavesamp::lattice::{enumerate_lattice, nyquist_hex};
use wavesamp::{Acf, Kernel, Region, ScatteringScenario, SpectralSupport, Wavenumber};

fn analysis(c: &mut Criterion) {
    let kn = Wavenumber::from_lambda(1.0).unwrap();
    let region = Region::new(10.0).unwrap();
    let set = enumerate_lattice(&nyquist_hex(kn), &region);

    let mut g = c.benchmark_group("analysis");
    g.sample_size(10);
    g.bench_function("eigs/hex-L10-clarke", |b| {
        b.iter(|| eigen_spectrum(&build_autocorr_matrix(&set, &Acf::Clarke(kn)).unwrap()).unwrap())
    });

    let s = ScatteringScenario::single(kn, 0.0, 0.0, 40.0).unwrap();
    g.bench_function("support_fit/alpha40", |b| b.iter(|| s.support_fit(-20.0).unwrap()));

    let kern = Kernel::for_support(SpectralSupport::Disk(kn));
    let eval = Region::new(5.0).unwrap();
    g.bench_function("mse/hex-L10-32-realizations", |b| {
        b.iter(|| {
            mse_experiment(
                &s,
                &nyquist_hex(kn),
                &kern,
                &region,
                &eval,
                32,
                42,
                &MseOptions::default(),
            )
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, analysis);
criterion_main!(benches);
