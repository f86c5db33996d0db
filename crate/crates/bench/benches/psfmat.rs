use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psfmat::contour::discrete_sum_apply;
use psfmat::fourier::{assemble_fourier_approx, plan_fourier_with_kernel};
use psfmat::operators::{dirac_operator, gradient_stack};
use psfmat::{eig, AccessMode, ContourPlan, FunctionSpec, GridSpec, InstanceGenerator, SpectralProfile, TimeKernel};

fn kernel_mesh(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_mesh");
    for alpha in [0.75, 1.0, 1.5] {
        let profile = SpectralProfile::new(alpha, 1.0, AccessMode::Root).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &profile, |b, p| {
            // Fresh kernel per iteration so the mesh cache does not hide the build.
            b.iter(|| TimeKernel::new(*p).mesh_exact(40.0))
        });
    }
    group.finish();
}

fn plan_fourier(c: &mut Criterion) {
    let mut plans = c.benchmark_group("plan_fourier");
    let mut coefficients = Vec::new();
    for (alpha, eps) in [(1.0, 1e-8), (0.75, 1e-3)] {
        let profile = SpectralProfile::new(alpha, 1.0, AccessMode::Root).unwrap();
        let kern = TimeKernel::new(profile);
        let name = format!("alpha={alpha},eps={eps:e}");
        plans.bench_function(&name, |b| b.iter(|| plan_fourier_with_kernel(&profile, 1.0, eps, &kern).unwrap()));
        coefficients.push((name, plan_fourier_with_kernel(&profile, 1.0, eps, &kern).unwrap(), kern));
    }
    plans.finish();

    // Mesh is built on the first call and cached, so this times the grid sum.
    let mut group = c.benchmark_group("lcu_coefficients");
    group.sample_size(10);
    for (name, plan, kern) in coefficients {
        group.bench_function(name, |b| b.iter(|| plan.clone().with_coefficients(&kern).unwrap()));
    }
    group.finish();
}

fn fourier_assembly(c: &mut Criterion) {
    let profile = SpectralProfile::new(1.0, 1.0, AccessMode::Root).unwrap();
    let kern = TimeKernel::new(profile);
    let plan = plan_fourier_with_kernel(&profile, 1.0, 1e-8, &kern).unwrap().with_coefficients(&kern).unwrap();
    let mut group = c.benchmark_group("fourier_assembly");
    for n in [16, 64] {
        let h = InstanceGenerator::new(1).psd_with_norm(n, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| assemble_fourier_approx(&plan, h).unwrap())
        });
    }
    group.finish();
}

fn contour_sum(c: &mut Criterion) {
    let f = FunctionSpec::ExpNeg;
    let mut gen = InstanceGenerator::new(2);
    let a = gen.normal_with_radius(32, 0.5);
    let psi = gen.state(32);
    let mut group = c.benchmark_group("contour_sum");
    for m in [8, 32] {
        let plan = ContourPlan::new(&a, f.as_fn(), 1.0, 2.0, m, None).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &plan, |b, plan| {
            b.iter(|| discrete_sum_apply(&a, f.as_fn(), plan, &psi).unwrap())
        });
    }
    group.finish();
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig");
    let mut gen = InstanceGenerator::new(3);
    let herm = gen.hermitian(64);
    let normal = gen.normal_with_radius(64, 1.0);
    group.bench_function("hermitian_64", |b| b.iter(|| eig(&herm, true).unwrap()));
    group.bench_function("general_64", |b| b.iter(|| eig(&normal, false).unwrap()));
    group.finish();
}

fn dirac(c: &mut Criterion) {
    let g = GridSpec::new(2, 8, None).unwrap();
    c.bench_function("dirac_2d_n8", |b| b.iter(|| dirac_operator(&gradient_stack(&g)).unwrap()));
}

criterion_group!(benches, kernel_mesh, plan_fourier, fourier_assembly, contour_sum, eigensolver, dirac);
criterion_main!(benches);
