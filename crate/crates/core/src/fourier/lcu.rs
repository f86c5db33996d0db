//! Coefficients c_k = f(k/a)/a and the cosine-sum operator they define.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::TimeKernel;
use super::plan::{spectral_scale, FourierPlan};
use super::AccessMode;
use crate::error::{PsfError, Result};
use crate::spectral::{eig, psd_eig, DenseMatrix};

/// c_0..c_K. Negative indices follow from evenness.
pub fn lcu_coefficients(plan: &FourierPlan, kern: &TimeKernel) -> Result<Vec<f64>> {
    if kern.profile != plan.profile {
        return Err(PsfError::PlanMismatch("kernel built for another profile".into()));
    }
    let values = kern.values_on_grid(0.0, 1.0 / plan.a, plan.k_max + 1);
    Ok(values.into_iter().map(|f| f / plan.a).collect())
}

/// Σ_{|k|<=K} c_k cos(2π k s / a), the scalar the LCU applies at spectral
/// coordinate s.
pub fn fourier_scalar(plan: &FourierPlan, s: f64) -> f64 {
    let theta = 2.0 * PI * s / plan.a;
    let mut sum = plan.coefficients.first().copied().unwrap_or(0.0);
    for (k, c) in plan.coefficients.iter().enumerate().skip(1) {
        sum += 2.0 * c * (theta * k as f64).cos();
    }
    sum
}

/// Σ_k c_k cos((2πk/a) √H) in root mode, Σ_k c_k cos((2πk/a) H) in direct mode.
pub fn assemble_fourier_approx(plan: &FourierPlan, h: &DenseMatrix) -> Result<DenseMatrix> {
    if plan.coefficients.len() != plan.k_max + 1 {
        return Err(PsfError::PlanMismatch(format!(
            "plan holds {} coefficients, expected K + 1 = {}",
            plan.coefficients.len(),
            plan.k_max + 1
        )));
    }
    let dec = match plan.profile.mode {
        AccessMode::Root => psd_eig(h)?,
        AccessMode::Direct => eig(h, true)?,
    };
    let spectral_radius = dec.spectral_radius();
    let tol = 1e-12 * plan.h_norm.max(1.0);
    if spectral_radius > plan.h_norm + tol {
        return Err(PsfError::PlanMismatch(format!(
            "plan built for ||H|| = {}, operator has {}",
            plan.h_norm, spectral_radius
        )));
    }
    let scale = spectral_scale(plan.profile.mode, plan.h_norm);
    if !(plan.a > scale) {
        return Err(PsfError::PlanMismatch(format!(
            "sampling scale a = {} does not exceed the spectral scale {scale}",
            plan.a
        )));
    }
    let values: Vec<Complex64> = dec
        .eigenvalues
        .iter()
        .map(|l| {
            let s = match plan.profile.mode {
                AccessMode::Root => l.re.max(0.0).sqrt(),
                AccessMode::Direct => l.re,
            };
            Complex64::new(fourier_scalar(plan, s), 0.0)
        })
        .collect();
    Ok(dec.compose(&values))
}

/// |(1/a) Σ_{|k|<=K} f(k/a) e^{-2πikδ/a} - Σ_{|n|<=N} f̂(an + δ)|.
pub fn scalar_psf_residual(kern: &TimeKernel, a: f64, delta: f64, k_max: usize, n_alias: usize) -> Result<f64> {
    if !(a > 0.0) {
        return Err(PsfError::invalid("a", "must be positive"));
    }
    let f = kern.values_on_grid(0.0, 1.0 / a, k_max + 1);
    let mut sampled = Complex64::new(0.0, 0.0);
    for k in -(k_max as i64)..=(k_max as i64) {
        let phase = Complex64::from_polar(1.0, -2.0 * PI * k as f64 * delta / a);
        sampled += f[k.unsigned_abs() as usize] * phase;
    }
    sampled /= a;
    let profile = kern.profile;
    let images: f64 = (-(n_alias as i64)..=(n_alias as i64))
        .map(|n| profile.transform(a * n as f64 + delta))
        .sum();
    Ok((sampled - images).norm())
}
