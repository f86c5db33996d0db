//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use psfmat::contour::{decompose_error, discrete_sum_apply, optimize_radius, ContourPlan};
use psfmat::costmodel::{m_increment_per_halving, path_a_cost, path_b_cost};
use psfmat::fourier::{
    assemble_fourier_approx, kernel_value, l1_norm_estimate, plan_fourier, scalar_psf_residual,
};
use psfmat::operators::{dirac_operator, gradient_stack, laplacian, shifted_encoding_stats, GridSpec};
use psfmat::spectral::matfun;
use psfmat::{AccessMode, DenseMatrix, FunctionSpec, InstanceGenerator, SpectralProfile, StateVector, TimeKernel};

/// Errors below this are roundoff, not contour error, and are left out of slope fits.
const FLOOR: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn dense(a: &DenseMatrix) -> DMatrix<Complex64> {
    a.as_matrix().clone()
}

fn vector(v: &StateVector) -> DVector<Complex64> {
    v.entries().clone()
}

/// Least-squares slope of y against x.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 4.0] {
        let gauss = TimeKernel::new(SpectralProfile::new(1.0, t, AccessMode::Root).unwrap());
        let cauchy = TimeKernel::new(SpectralProfile::new(0.5, t, AccessMode::Root).unwrap());
        for i in 0..50 {
            let x = 20.0 * i as f64 / 49.0;
            let g = (PI / t).sqrt() * (-PI * PI * x * x / t).exp();
            let l = 2.0 * t / (t * t + 4.0 * PI * PI * x * x);
            worst = worst
                .max((kernel_value(&gauss, x) - g).abs())
                .max((kernel_value(&cauchy, x) - l).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max |f - closed form| = {worst:.2e} (tol 1e-10)"))
}

fn criterion_2() -> Outcome {
    let kern = TimeKernel::new(SpectralProfile::new(1.0, 1.0, AccessMode::Root).unwrap());
    let r = scalar_psf_residual(&kern, 6.0, 0.3, 64, 4).unwrap();
    outcome(r <= 1e-10, format!("residual = {r:.2e} (tol 1e-10)"))
}

fn criterion_3() -> Outcome {
    let h = InstanceGenerator::new(2024).psd_with_norm(8, 1.0);
    let mut errors = Vec::new();
    for (alpha, mode) in [(1.0, AccessMode::Root), (2.0, AccessMode::Direct)] {
        let pr = SpectralProfile::new(alpha, 1.0, mode).unwrap();
        let kern = TimeKernel::new(pr);
        let plan = plan_fourier(&pr, 1.0, 1e-6).unwrap().with_coefficients(&kern).unwrap();
        let approx = assemble_fourier_approx(&plan, &h).unwrap();
        let exact = matfun(&h, |z| (-z.powf(alpha)).exp()).unwrap();
        errors.push((&approx - &exact).spectral_norm());
    }
    let pass = errors.iter().all(|&e| e <= 2e-6);
    outcome(
        pass,
        format!("alpha=1 root {:.2e}, alpha=2 direct {:.2e} (tol 2e-6)", errors[0], errors[1]),
    )
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in [0.75, 1.25] {
        let pr = SpectralProfile::new(alpha, 1.0, AccessMode::Root).unwrap();
        let kern = TimeKernel::new(pr);
        let points: Vec<(f64, f64)> = (0..41)
            .map(|i| {
                let x = 10.0 * 10f64.powf(i as f64 / 40.0);
                (x.ln(), kernel_value(&kern, x).abs().ln())
            })
            .collect();
        let s = slope(&points);
        let target = -(pr.p() + 1.0);
        pass &= (s - target).abs() <= 0.15;
        parts.push(format!("p={}: slope {s:.4} vs {target}", pr.p()));
    }
    outcome(pass, format!("{} (tol 0.15)", parts.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut unit_dev = 0.0f64;
    for alpha in [0.5, 0.75, 1.0] {
        let est = l1_norm_estimate(&TimeKernel::new(SpectralProfile::new(alpha, 1.0, AccessMode::Root).unwrap()));
        unit_dev = unit_dev.max((est.value - 1.0).abs());
    }
    pass &= unit_dev <= 1e-6;
    let norms: Vec<f64> = [8.0, 32.0, 128.0]
        .iter()
        .map(|&a| l1_norm_estimate(&TimeKernel::new(SpectralProfile::new(a, 1.0, AccessMode::Root).unwrap())).value)
        .collect();
    let target = 4.0 / (PI * PI);
    let slopes: Vec<f64> = norms.windows(2).map(|w| (w[1] - w[0]) / 4f64.ln()).collect();
    pass &= slopes.iter().all(|s| ((s - target) / target).abs() <= 0.25);
    outcome(
        pass,
        format!(
            "p<=2 max |norm-1| {unit_dev:.2e}; norms {:.4}/{:.4}/{:.4}; slopes {:.4}, {:.4} vs {target:.4} (25%)",
            norms[0], norms[1], norms[2], slopes[0], slopes[1]
        ),
    )
}

fn criterion_6() -> Outcome {
    let f = FunctionSpec::Poly {
        coeffs: vec![1.0, 2.0, 0.0, 3.0],
    };
    let (m, r1) = (8usize, 1.0);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut g = InstanceGenerator::new(600 + seed);
        let a = g.normal_with_radius(6, 0.6);
        let psi = g.state(6);
        let plan = ContourPlan::new(&a, f.as_fn(), r1, 2.0, m, None).unwrap();
        let got = vector(&discrete_sum_apply(&a, f.as_fn(), &plan, &psi).unwrap());

        // Dense oracle: f(A) R1^m (R1^m I - A^m)^{-1} ψ by LU and Horner.
        let am = dense(&a);
        let n = am.nrows();
        let r1m = r1.powi(m as i32);
        let shifted = DMatrix::<Complex64>::identity(n, n) * c(r1m) - am.pow(m as u32);
        let x = shifted.lu().solve(&vector(&psi)).unwrap() * c(r1m);
        let fx = &x * c(1.0) + &am * &x * c(2.0) + am.pow(3) * &x * c(3.0);
        worst = worst.max((got - fx).norm());
    }
    outcome(worst <= 1e-12, format!("max deviation over 10 instances {worst:.2e} (tol 1e-12)"))
}

fn criterion_7() -> Outcome {
    let mut g = InstanceGenerator::new(700);
    let a = g.normal_with_radius(6, 0.6);
    let psi = g.state(6);
    let mut pass = true;
    let mut parts = Vec::new();
    for f in [FunctionSpec::ExpNeg, FunctionSpec::InvShift { c: 2.0 }] {
        let mut worst = 0.0f64;
        for m in [4, 8, 16] {
            let plan = ContourPlan::new(&a, f.as_fn(), 1.0, 2.0, m, Some(2048)).unwrap();
            let r = decompose_error(&a, f.as_fn(), &plan, &psi).unwrap().residual();
            worst = worst.max(if r.is_finite() { r } else { f64::INFINITY });
        }
        pass &= worst <= 1e-8;
        let note = if f.holomorphic_near_circle(2.0, 1e-12) {
            ""
        } else {
            " [pole of f lies on |z| = R2]"
        };
        parts.push(format!("{f}: max residual {worst:.2e}{note}"));
    }
    outcome(pass, format!("{} (tol 1e-8)", parts.join("; ")))
}

fn criterion_8() -> Outcome {
    let f = FunctionSpec::ExpNeg;
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (rho, r1, r2)) in [(0.5, 1.0, 2.0), (0.3, 1.0, 4.0)].into_iter().enumerate() {
        let mut g = InstanceGenerator::new(800 + k as u64);
        let a = g.normal_with_radius(6, rho);
        let psi = g.state(6);
        let exact = (dense(&a) * c(-1.0)).exp() * vector(&psi);
        let points: Vec<(f64, f64)> = (8..=48)
            .step_by(4)
            .filter_map(|m| {
                let plan = ContourPlan::new(&a, f.as_fn(), r1, r2, m, None).unwrap();
                let got = vector(&discrete_sum_apply(&a, f.as_fn(), &plan, &psi).unwrap());
                let err = (got - &exact).norm();
                (err >= FLOOR).then_some((m as f64, err.log10()))
            })
            .collect();
        let s = slope(&points);
        let target = (rho / r1).max(r1 / r2).log10();
        pass &= points.len() >= 3 && ((s - target) / target).abs() <= 0.10;
        parts.push(format!("({rho},{r1},{r2}): slope {s:.4} vs {target:.4}"));
    }

    let eps = 1e-8;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let (rho, r1, r2) = if seed % 2 == 0 { (0.5, 1.0, 2.0) } else { (0.3, 1.0, 4.0) };
        let mut g = InstanceGenerator::new(850 + seed);
        let a = g.normal_with_radius(6, rho);
        let psi = g.state(6);
        let plan = ContourPlan::planned(&a, f.as_fn(), &psi, eps, r1, r2).unwrap();
        let got = vector(&discrete_sum_apply(&a, f.as_fn(), &plan, &psi).unwrap());
        let exact = (dense(&a) * c(-1.0)).exp() * vector(&psi);
        worst = worst.max((got - &exact).norm() / exact.norm());
    }
    pass &= worst <= eps;
    outcome(
        pass,
        format!("{}; planned m worst relative error {worst:.2e} over 20 (tol {eps:e})", parts.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2usize, 3, 5] {
        let mut coeffs = vec![0.0; d + 1];
        coeffs[d] = 1.0;
        let f = FunctionSpec::Poly { coeffs };
        let choice = optimize_radius(|r| f.sup_bound(r), 1.0, 16.0).unwrap();
        let target = (d as f64 + 1.0) / (d as f64 - 1.0);
        let rel = (choice.r2 - target).abs() / target;
        pass &= rel <= 0.01 && !choice.at_boundary;
        parts.push(format!("d={d}: {:.5} vs {target:.5}", choice.r2));
    }
    outcome(pass, format!("{} (1%)", parts.join(", ")))
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, n) in [(1, 8), (2, 4)] {
        let g = GridSpec::new(d, n, None).unwrap();
        match dirac_operator(&gradient_stack(&g)) {
            Ok(dirac) => {
                let r = dirac.residuals;
                pass &= r.hermitian <= 1e-12 && r.square <= 1e-12 && r.fourth <= 1e-12;
                parts.push(format!(
                    "({d},{n}) herm {:.1e} H2 {:.1e} H4 {:.1e}",
                    r.hermitian, r.square, r.fourth
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("({d},{n}) {e}"));
            }
        }
        let s = shifted_encoding_stats(&laplacian(&g), &g).unwrap();
        let row_ok = s
            .interior_row_l1
            .is_some_and(|(lo, hi)| (lo - 1.0).abs() <= 1e-14 && (hi - 1.0).abs() <= 1e-14);
        pass &= s.diag_max <= 1e-14 && row_ok;
        parts.push(format!("diag {:.1e} rows {:?}", s.diag_max, s.interior_row_l1));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_11() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 2.0, 0.75, 1.25] {
        let pr = SpectralProfile::new(alpha, 1.0, AccessMode::Root).unwrap();
        let base = path_a_cost(&pr, 2.0, 1.0, 1e-6, 1.5).unwrap();
        let long = path_a_cost(&pr, 2.0, 16.0, 1e-6, 1.5).unwrap();
        let t_ratio = long.dominant_term / base.dominant_term;
        let t_target = 16f64.powf(1.0 / (2.0 * alpha));
        pass &= (t_ratio - t_target).abs() <= 1e-9;
        if pr.regime() == psfmat::Regime::Fractional {
            let fine = path_a_cost(&pr, 2.0, 1.0, 1e-6 / 16.0, 1.5).unwrap();
            let e_ratio = fine.dominant_term / base.dominant_term;
            pass &= (e_ratio - t_target).abs() <= 1e-9;
            parts.push(format!("alpha={alpha}: T {t_ratio:.6}, eps {e_ratio:.6} vs {t_target:.6}"));
        } else {
            parts.push(format!("alpha={alpha}: T {t_ratio:.6} vs {t_target:.6}"));
        }
    }
    for r2 in [2.0, 4.0] {
        let expected = m_increment_per_halving(1.0, r2).ceil();
        let plan = ContourPlan::from_parts(1.0, r2, 8, 0.3, 1.0, 1.0, 1.0, 256).unwrap();
        let terms: Vec<f64> = (0..12)
            .map(|k| {
                let eps = 1e-4 / 2f64.powi(k);
                path_b_cost(&plan, 1.0, 1.0, 1.0, 1.0, eps).unwrap().lcu_terms
            })
            .collect();
        let steps: Vec<f64> = terms.windows(2).map(|w| w[1] - w[0]).collect();
        pass &= steps.iter().all(|s| (s - expected).abs() <= 1.0);
        parts.push(format!("R2/R1={r2}: m increments {steps:?} vs {expected}±1"));
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, f64, fn() -> Outcome); 11] = [
        (1, "kernel closed forms", 5.0, criterion_1),
        (2, "scalar PSF identity", 1.0, criterion_2),
        (3, "Fourier path end-to-end", 10.0, criterion_3),
        (4, "fractional tail slope", 30.0, criterion_4),
        (5, "L1 regimes", 60.0, criterion_5),
        (6, "contour exactness", 5.0, criterion_6),
        (7, "four-term closure", 10.0, criterion_7),
        (8, "geometric convergence", 30.0, criterion_8),
        (9, "radius optimizer", 1.0, criterion_9),
        (10, "operator structure", 5.0, criterion_10),
        (11, "cost-model exponents", 1.0, criterion_11),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed().as_secs_f64();
        let in_time = elapsed < limit;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {:<4} {name}: {} [{elapsed:.2}s / {limit}s{}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            if in_time { "" } else { " exceeded" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
