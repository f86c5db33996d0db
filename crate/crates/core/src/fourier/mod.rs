//! Fourier-sampled LCU approximation of e^{-T H^α}.

mod kernel;
mod l1;
mod lcu;
mod plan;

use serde::{Deserialize, Serialize};

use crate::error::{PsfError, Result};

pub use kernel::{gauss_legendre, kernel_value, KernelMesh, TimeKernel, DEFAULT_PANEL_TOLERANCE, TAIL_EPS};
pub(crate) use l1::l1_model;
pub use l1::{l1_norm_estimate, L1Estimate, L1Regime};
pub use lcu::{assemble_fourier_approx, fourier_scalar, lcu_coefficients, scalar_psf_residual};
pub use plan::{
    aliasing_bound, analytic_decay_rate, c_alpha_t, decay_envelope, error_bounds, plan_fourier, plan_fourier_with_kernel,
    stable_tail_constant, truncation_bound, ErrorBounds, FourierPlan,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    /// cos(θ √H), exponent p = 2α.
    Root,
    /// cos(θ H), exponent p = α.
    Direct,
}

impl std::str::FromStr for AccessMode {
    type Err = PsfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "root" => Ok(AccessMode::Root),
            "direct" => Ok(AccessMode::Direct),
            other => Err(PsfError::Parse(format!("mode `{other}`: expected root or direct"))),
        }
    }
}

impl std::fmt::Display for AccessMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AccessMode::Root => "root",
            AccessMode::Direct => "direct",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// p is an even positive integer: f decays faster than exponentially.
    Analytic,
    /// Algebraic tail C/|x|^{p+1}.
    Fractional,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Analytic => "analytic",
            Regime::Fractional => "fractional",
        })
    }
}

/// Decay law e^{-T |ξ|^p} of the target operator function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub mode: AccessMode,
}

impl SpectralProfile {
    pub fn new(alpha: f64, t: f64, mode: AccessMode) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(PsfError::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(PsfError::invalid("T", format!("must be positive, got {t}")));
        }
        if mode == AccessMode::Root && alpha < 0.5 {
            return Err(PsfError::Unsupported(format!(
                "root mode needs alpha >= 0.5, got {alpha}"
            )));
        }
        Ok(SpectralProfile { alpha, t, mode })
    }

    pub fn p(&self) -> f64 {
        match self.mode {
            AccessMode::Root => 2.0 * self.alpha,
            AccessMode::Direct => self.alpha,
        }
    }

    /// p / 2, the order the planning formulas are written in.
    pub fn alpha_eff(&self) -> f64 {
        0.5 * self.p()
    }

    pub fn regime(&self) -> Regime {
        let p = self.p();
        let r = p.round();
        if (p - r).abs() < 1e-12 && r >= 2.0 && (r as u64) % 2 == 0 {
            Regime::Analytic
        } else {
            Regime::Fractional
        }
    }

    /// e^{-T s^p} at spectral coordinate s (√λ in root mode, λ in direct mode).
    pub fn transform(&self, s: f64) -> f64 {
        (-self.t * s.abs().powf(self.p())).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_and_regime() {
        let p = SpectralProfile::new(1.0, 1.0, AccessMode::Root).unwrap();
        assert_eq!((p.p(), p.regime()), (2.0, Regime::Analytic));
        let p = SpectralProfile::new(0.75, 1.0, AccessMode::Root).unwrap();
        assert_eq!((p.p(), p.regime()), (1.5, Regime::Fractional));
        let p = SpectralProfile::new(2.0, 1.0, AccessMode::Direct).unwrap();
        assert_eq!((p.p(), p.regime()), (2.0, Regime::Analytic));
        let p = SpectralProfile::new(3.0, 1.0, AccessMode::Direct).unwrap();
        assert_eq!(p.regime(), Regime::Fractional);
        let p = SpectralProfile::new(1.5, 1.0, AccessMode::Root).unwrap();
        assert_eq!((p.p(), p.regime()), (3.0, Regime::Fractional));
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(SpectralProfile::new(0.4, 1.0, AccessMode::Root).is_err());
        assert!(SpectralProfile::new(1.0, 0.0, AccessMode::Root).is_err());
        assert!(SpectralProfile::new(-1.0, 1.0, AccessMode::Direct).is_err());
        assert!(SpectralProfile::new(0.4, 1.0, AccessMode::Direct).is_ok());
    }
}
