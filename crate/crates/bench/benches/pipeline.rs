use criterion::{black_box, criterion_group, criterion_main, Criterion};

use blockline_core::{
    block_delay_dist, build_rfmc, run_simulation, solve_fixed_point, steady_state, DelayOptions,
    FixedPointOptions, NetworkConfig, NodeParams, Pmf, SimConfig,
};

fn bench_pmf(c: &mut Criterion) {
    let mut group = c.benchmark_group("pmf");
    let short = Pmf::geometric(0.5, 1e-9).unwrap();
    let long = Pmf::geometric(0.97, 1e-12).unwrap();
    group.bench_function("convolve_direct", |b| {
        b.iter(|| black_box(&short).convolve(black_box(&short)))
    });
    group.bench_function("convolve_fft", |b| {
        b.iter(|| black_box(&long).convolve(black_box(&long)))
    });
    group.bench_function("convolve_n_20", |b| {
        b.iter(|| black_box(&short).convolve_n(20))
    });
    group.finish();
}

fn bench_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain");
    let params = NodeParams {
        arrival_rate: 0.85,
        erasure_out: 0.1,
        blocking_next: 0.05,
        m_blocks: 10,
        block_size: 5,
    };
    group.bench_function("build_rfmc_m10_k5", |b| {
        b.iter(|| build_rfmc(black_box(&params)).unwrap())
    });
    let matrix = build_rfmc(&params).unwrap();
    group.bench_function("steady_state_245_states", |b| {
        b.iter(|| steady_state(black_box(&matrix), 1e-12).unwrap())
    });
    group.finish();
}

fn bench_estimator(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimator");
    group.sample_size(10);
    let small = NetworkConfig::new(vec![0.1; 4], vec![2; 3], 2).unwrap();
    let large = NetworkConfig::from_packets(vec![0.1; 8], vec![50; 7], 5).unwrap();
    group.bench_function("fixed_point_h4", |b| {
        b.iter(|| solve_fixed_point(black_box(&small), &FixedPointOptions::default()).unwrap())
    });
    group.bench_function("fixed_point_h8_m50", |b| {
        b.iter(|| solve_fixed_point(black_box(&large), &FixedPointOptions::default()).unwrap())
    });
    let sol = solve_fixed_point(&large, &FixedPointOptions::default()).unwrap();
    group.bench_function("block_delay_h8_m50", |b| {
        b.iter(|| block_delay_dist(black_box(&sol), &DelayOptions::default()).unwrap())
    });
    group.finish();
}

fn bench_simulator(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulator");
    group.sample_size(10);
    let net = NetworkConfig::from_packets(vec![0.1; 8], vec![20; 7], 5).unwrap();
    let sim = SimConfig {
        epochs: 100_000,
        warmup_blocks: 200,
        seed: 1,
        replications: 1,
        record_samples: false,
    };
    group.bench_function("run_100k_epochs_h8", |b| {
        b.iter(|| run_simulation(black_box(&net), black_box(&sim)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_pmf, bench_chain, bench_estimator, bench_simulator);
criterion_main!(benches);
