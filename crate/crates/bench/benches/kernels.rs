//! Microbenchmarks for the kernels that dominate a simulation step: the
//! weighted norm sum, the two product paths, the advective term, and one
//! full integrator step.

use criterion::{criterion_group, criterion_main, Criterion};
use sqg_core::{
    convolve_padded, dealiased_product, etd_step, nonlinear_term, random_below_cutoff, xnorm,
    Alpha, Grid,
};
use std::f64::consts::TAU;

fn bench_kernels(c: &mut Criterion) {
    let alpha = Alpha::new(0.75).expect("benchmark exponent is admissible");
    let sigma = alpha.sigma_critical();
    for n in [64usize, 128] {
        let grid = Grid::new(n, TAU).expect("benchmark grid is valid");
        let f = random_below_cutoff(grid, 1);
        let g = random_below_cutoff(grid, 2);
        let dt = 1e-3;
        let mut group = c.benchmark_group(format!("{n}x{n}"));
        group.bench_function("xnorm_critical", |b| {
            b.iter(|| xnorm(&f, sigma).expect("norm is finite").value)
        });
        group.bench_function("dealiased_product", |b| {
            b.iter(|| dealiased_product(&f, &g).expect("grids match"))
        });
        group.bench_function("convolve_padded", |b| {
            b.iter(|| convolve_padded(&f, &g).expect("band-limited factors fit"))
        });
        group.bench_function("nonlinear_term", |b| {
            b.iter(|| nonlinear_term(&f).expect("advective term evaluates"))
        });
        group.bench_function("etd_step", |b| {
            b.iter(|| etd_step(&f, dt, alpha).expect("step completes"))
        });
        group.finish();
    }
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
