use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use summa::equation::parse_spec;
use summa::par::Execution;
use summa::resum::{borel_sum_solution, pde_residual, summed_solution, SumOptions};

const SPEC: &str = r#"{"k":1,"a":"x","b":"1/3","c":"1","nonlinear":[{"i":0,"j":2,"alpha":0,"coeff":"x"}],"trunc":[6,12]}"#;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn grid(n: usize) -> Vec<(Complex64, Complex64)> {
    (0..n)
        .map(|i| {
            let r = 0.05 + 0.25 * i as f64 / n as f64;
            (Complex64::new(0.1, 0.0), Complex64::from_polar(r, PI))
        })
        .collect()
}

fn grid_summation(c: &mut Criterion) {
    let eq = parse_spec(SPEC, false).unwrap();
    let pts = grid(48);
    let mut g = c.benchmark_group("borel_sum_solution_48pts");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SumOptions { exec, ..SumOptions::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, o| {
            b.iter(|| borel_sum_solution(&eq, PI, black_box(&pts), o).unwrap())
        });
    }
    g.finish();
}

fn residual_grid(c: &mut Criterion) {
    let eq = parse_spec(SPEC, false).unwrap();
    let sum = summed_solution(&eq, PI, &SumOptions::default()).unwrap();
    let u = |t: Complex64, x: Complex64| sum.eval(t, x);
    let pts = grid(128);
    let mut g = c.benchmark_group("pde_residual_128pts");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| pde_residual(&eq, &u, black_box(&pts), 1e-3, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, grid_summation, residual_grid);
criterion_main!(benches);
