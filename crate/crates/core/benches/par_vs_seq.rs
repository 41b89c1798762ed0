use std::time::Duration;

use complex_sturm::boundary::{classify, BoundaryFunctional, BoundarySpec, TailOptions};
use complex_sturm::greens::apply_kernel_many;
use complex_sturm::ivp::Source;
use complex_sturm::par::Exec;
use complex_sturm::potential::{parse_potential, Endpoint, Interval, Potential};
use complex_sturm::spectra::{find_eigenvalues_with, resolvent_kernel, Realization, Region, SearchBudget};
use complex_sturm::weyl::trichotomy_many;
use complex_sturm::Complex64 as C;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("auto", Exec::Auto), ("sequential", Exec::Sequential)];

fn pot(src: &str, a: f64, b: f64) -> Potential {
    parse_potential(src, Interval::new(a, b).unwrap()).unwrap()
}

fn dirichlet(p: Potential) -> Realization {
    let spec = BoundarySpec::new(
        Some(BoundaryFunctional::dirichlet(&p, Endpoint::A).unwrap()),
        Some(BoundaryFunctional::dirichlet(&p, Endpoint::B).unwrap()),
    )
    .unwrap();
    Realization::new(p, spec).unwrap()
}

fn eigenvalues(c: &mut Criterion) {
    let r = dirichlet(pot("1i*x + x^2", 0.0, 1.0));
    let region = Region::new(0.0, 200.0, -3.0, 3.0).unwrap();
    let mut g = c.benchmark_group("find_eigenvalues");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| find_eigenvalues_with(&r, region, SearchBudget::default(), exec).unwrap()));
    }
    g.finish();
}

fn classification(c: &mut Criterion) {
    let p = pot("sin(x)", 0.0, f64::INFINITY);
    let opts = TailOptions::default();
    let mut g = c.benchmark_group("classify");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| classify(&p, C::new(0.0, 1.0), &opts, exec).unwrap()));
    }
    g.finish();
}

fn weyl_traces(c: &mut Criterion) {
    let p = pot("x^2", 0.0, f64::INFINITY);
    let lambdas: Vec<C> = (1..=8).map(|k| C::new(k as f64, 1.0)).collect();
    let opts = TailOptions::default();
    let mut g = c.benchmark_group("trichotomy_many");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| trichotomy_many(&p, &lambdas, &opts, exec)));
    }
    g.finish();
}

fn kernel_application(c: &mut Criterion) {
    let k = resolvent_kernel(&dirichlet(pot("(1-2i)*x^3", 0.0, 1.0)), C::new(-2.0, 1.0)).unwrap();
    let g = Source::compact(|x| C::new((5.0 * x).cos(), x * x), 0.0, 1.0);
    let xs: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
    let mut grp = c.benchmark_group("apply_kernel_many");
    for (name, exec) in MODES {
        grp.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| apply_kernel_many(&k, &g, &xs, exec).unwrap()));
    }
    grp.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3)).warm_up_time(Duration::from_millis(500));
    targets = eigenvalues, classification, weyl_traces, kernel_application
}
criterion_main!(benches);
