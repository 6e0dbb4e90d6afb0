use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lensmimo_bench::Fixture;
use lensmimo_core::transceivers::hybrid_rate_with_codebook;
use lensmimo_core::{build_codebook, lens_sc_pdm_rate, ofdm_digital_rate, SchemeConfig};

fn bench_schemes(c: &mut Criterion) {
    let fx = Fixture::new(1);
    let ch = &fx.channels[0];
    let snr = vec![0.0, 10.0, 20.0];

    let lens = SchemeConfig::lens(16).with_snr(snr.clone());
    c.bench_function("lens_sc_pdm/16", |b| b.iter(|| lens_sc_pdm_rate(black_box(ch), &fx.lens, &fx.ms, &lens).unwrap()));

    let digital = SchemeConfig::digital(fx.upa.len()).with_snr(snr.clone());
    c.bench_function("ofdm_digital/400", |b| b.iter(|| ofdm_digital_rate(black_box(ch), &fx.upa, &fx.ms, &digital).unwrap()));

    let hybrid = SchemeConfig::hybrid(16).with_snr(snr);
    let codebook = build_codebook(hybrid.codebook_size, hybrid.codebook_azimuth, hybrid.codebook_elevation, &fx.upa).unwrap();
    c.bench_function("hybrid_ofdm/16", |b| {
        b.iter(|| hybrid_rate_with_codebook(black_box(ch), &fx.upa, &fx.ms, &hybrid, &codebook).unwrap())
    });
}

criterion_group!(benches, bench_schemes);
criterion_main!(benches);
