//! Planner for the sampling scale a and cutoff K, with the envelope and
//! error-bound formulas it is built on.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::kernel::TimeKernel;
use super::{AccessMode, Regime, SpectralProfile};
use crate::error::{PsfError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierPlan {
    #[serde(flatten)]
    pub profile: SpectralProfile,
    /// ‖H‖ the plan was built for.
    pub h_norm: f64,
    pub a: f64,
    #[serde(rename = "K")]
    pub k_max: usize,
    pub eps_internal: f64,
    pub regime: Regime,
    /// c_0..c_K; c_{-k} = c_k. Empty until [`FourierPlan::with_coefficients`].
    #[serde(rename = "c")]
    pub coefficients: Vec<f64>,
}

impl FourierPlan {
    pub fn k_over_a(&self) -> f64 {
        self.k_max as f64 / self.a
    }

    pub fn with_coefficients(mut self, kern: &TimeKernel) -> Result<Self> {
        self.coefficients = super::lcu_coefficients(&self, kern)?;
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| PsfError::Parse(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBounds {
    pub truncation: f64,
    pub aliasing: f64,
}

impl ErrorBounds {
    pub fn total(&self) -> f64 {
        self.truncation + self.aliasing
    }
}

/// √‖H‖ in root mode, ‖H‖ in direct mode.
pub(crate) fn spectral_scale(mode: AccessMode, h_norm: f64) -> f64 {
    match mode {
        AccessMode::Root => h_norm.sqrt(),
        AccessMode::Direct => h_norm,
    }
}

/// (T/π) Γ(p+1) |sin(πp/2)|, the heavy-tail constant of the planning formulas.
pub fn c_alpha_t(profile: &SpectralProfile) -> f64 {
    let p = profile.p();
    profile.t / PI * gamma(p + 1.0) * (PI * p / 2.0).sin().abs()
}

/// Leading coefficient of the true tail f(x) ~ C / x^{p+1}.
///
/// Equals [`c_alpha_t`] / (2π)^p under the e^{2πixξ} convention, so the
/// planning constant overestimates the tail.
pub fn stable_tail_constant(profile: &SpectralProfile) -> f64 {
    c_alpha_t(profile) / (2.0 * PI).powf(profile.p())
}

/// (λ, β) of the analytic envelope e^{-λ |x|^β}.
///
/// β = p/(p-1). The rate is the real part of the saddle-point exponent,
/// (p-1) sin(π/(2(p-1))) (π/(α_eff T^{1/p}))^β; the sine factor is 1 at
/// p = 2 and shrinks for higher orders, where the saddle leaves the
/// imaginary axis.
pub fn analytic_decay_rate(profile: &SpectralProfile) -> (f64, f64) {
    let p = profile.p();
    let beta = p / (p - 1.0);
    let base = PI / (profile.alpha_eff() * profile.t.powf(1.0 / p));
    let lambda = (p - 1.0) * (PI / (2.0 * (p - 1.0))).sin() * base.powf(beta);
    (lambda, beta)
}

/// f(0) = 2 Γ(1 + 1/p) / T^{1/p}, the kernel's maximum.
pub(crate) fn kernel_peak(profile: &SpectralProfile) -> f64 {
    let p = profile.p();
    2.0 * gamma(1.0 + 1.0 / p) / profile.t.powf(1.0 / p)
}

pub fn decay_envelope(profile: &SpectralProfile, x: f64) -> Result<f64> {
    match profile.regime() {
        Regime::Analytic => {
            let (lambda, beta) = analytic_decay_rate(profile);
            Ok((-lambda * x.abs().powf(beta)).exp())
        }
        Regime::Fractional => {
            if x == 0.0 {
                return Err(PsfError::invalid("x", "fractional envelope is singular at 0"));
            }
            Ok(c_alpha_t(profile) / x.abs().powf(profile.p() + 1.0))
        }
    }
}

/// Bound on Σ_{|k|>K} |c_k| for cutoff X = K/a.
pub fn truncation_bound(profile: &SpectralProfile, x_cut: f64) -> f64 {
    if !(x_cut > 0.0) {
        return f64::INFINITY;
    }
    match profile.regime() {
        Regime::Analytic => {
            let (lambda, beta) = analytic_decay_rate(profile);
            let tail = (-lambda * x_cut.powf(beta)).exp() / (lambda * beta * x_cut.powf(beta - 1.0));
            2.0 * kernel_peak(profile) * tail
        }
        Regime::Fractional => c_alpha_t(profile) / (profile.alpha_eff() * x_cut.powf(profile.p())),
    }
}

/// Bound on Σ_{n≠0} e^{-T|an + s|^p} over the spectral interval |s| <= scale.
pub fn aliasing_bound(profile: &SpectralProfile, a: f64, h_norm: f64, eps_internal: f64) -> f64 {
    let (t, p) = (profile.t, profile.p());
    let gap = a - spectral_scale(profile.mode, h_norm);
    if !(gap > 0.0) {
        return f64::INFINITY;
    }
    let first = (-t * gap.powf(p)).exp();
    // Images beyond the nearest decay at least geometrically for p >= 1.
    let ratio = (-t * ((gap + a).powf(p) - gap.powf(p))).exp();
    let geometric = 2.0 / (1.0 - ratio);
    let constant = match profile.regime() {
        Regime::Analytic => geometric,
        Regime::Fractional => {
            let c_alpha = 2.0 * (1.0 + 1.0 / (p * (1.0 / eps_internal).ln()));
            c_alpha.max(geometric)
        }
    };
    constant * first
}

pub fn error_bounds(plan: &FourierPlan, h_norm: f64) -> ErrorBounds {
    ErrorBounds {
        truncation: truncation_bound(&plan.profile, plan.k_over_a()),
        aliasing: aliasing_bound(&plan.profile, plan.a, h_norm, plan.eps_internal),
    }
}

/// Chooses (a, K) so that both error budgets are at most ε'/2.
pub fn plan_fourier(profile: &SpectralProfile, h_norm: f64, eps_internal: f64) -> Result<FourierPlan> {
    plan_fourier_with_kernel(profile, h_norm, eps_internal, &TimeKernel::new(*profile))
}

/// [`plan_fourier`] reusing the caller's kernel cache.
pub fn plan_fourier_with_kernel(
    profile: &SpectralProfile,
    h_norm: f64,
    eps_internal: f64,
    kern: &TimeKernel,
) -> Result<FourierPlan> {
    if !(eps_internal > 0.0 && eps_internal < 1.0) {
        return Err(PsfError::invalid("eps", format!("must lie in (0, 1), got {eps_internal}")));
    }
    if !(h_norm >= 0.0 && h_norm.is_finite()) {
        return Err(PsfError::invalid("H_norm", format!("must be finite and >= 0, got {h_norm}")));
    }
    if kern.profile != *profile {
        return Err(PsfError::PlanMismatch("kernel built for another profile".into()));
    }
    let (t, p) = (profile.t, profile.p());
    let regime = profile.regime();
    if regime == Regime::Fractional && p < 1.0 {
        return Err(PsfError::Unsupported(format!(
            "fractional regime needs p >= 1 (alpha >= 0.5 in root mode), got p = {p}"
        )));
    }
    let budget = 0.5 * eps_internal;

    let (k_over_a, gap) = match regime {
        Regime::Analytic => {
            let ka = p / (2.0 * PI)
                * t.powf(1.0 / p)
                * ((2.0 / eps_internal).ln() / (p - 1.0)).powf(1.0 - 1.0 / p);
            (ka, ((4.0 / eps_internal).ln() / t).powf(1.0 / p))
        }
        Regime::Fractional => {
            let c = c_alpha_t(profile);
            let ka = (2.0 * c / (profile.alpha_eff() * eps_internal)).powf(1.0 / p);
            let c_alpha = 2.0 * (1.0 + 1.0 / (p * (1.0 / eps_internal).ln()));
            (ka, ((2.0 * c_alpha / eps_internal).ln() / t).powf(1.0 / p))
        }
    };

    let scale = spectral_scale(profile.mode, h_norm);
    let mut a = scale + gap;
    let mut nudge = 1e-12 * a.max(1.0);
    while aliasing_bound(profile, a, h_norm, eps_internal) > budget {
        a += nudge;
        nudge *= 2.0;
    }

    let mut k_max = (k_over_a * a).ceil().max(1.0) as usize;
    while truncation_bound(profile, k_max as f64 / a) > budget {
        k_max += 1;
    }
    if regime == Regime::Analytic {
        // The envelope carries an unknown polynomial prefactor for p > 2;
        // confirm against the quadrature tail as well.
        while measured_tail(kern, a, k_max) > budget {
            k_max += (k_max / 16).max(1);
        }
    }

    Ok(FourierPlan {
        profile: *profile,
        h_norm,
        a,
        k_max,
        eps_internal,
        regime,
        coefficients: Vec::new(),
    })
}

/// (2/a) Σ_{k>K} |f(k/a)|, summed until the analytic tail is negligible.
pub(crate) fn measured_tail(kern: &TimeKernel, a: f64, k_max: usize) -> f64 {
    let count = 4 * k_max + 64;
    let values = kern.values_on_grid((k_max + 1) as f64 / a, 1.0 / a, count);
    2.0 / a * values.iter().map(|v| v.abs()).sum::<f64>()
}
