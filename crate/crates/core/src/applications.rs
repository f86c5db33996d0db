//! End-to-end drivers on grid operators, each checked against a dense oracle.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{contour_error_bounds, default_radii, discrete_sum_apply, optimize_radius, ContourPlan};
use crate::error::{PsfError, Result};
use crate::fourier::{
    assemble_fourier_approx, error_bounds, plan_fourier_with_kernel, AccessMode, SpectralProfile, TimeKernel,
};
use crate::functions::FunctionSpec;
use crate::operators::{dirac_operator, gradient_stack, laplacian, shifted_encoding, GridSpec};
use crate::spectral::{eig, exact_evolution, DenseMatrix, StateVector};

/// Outer-radius search cap as a multiple of R1.
pub const R2_CAP_FACTOR: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Application {
    /// e^{-T(-Δ)}, direct α = 2 on the Dirac operator.
    Heat,
    /// e^{-T(-Δ)²}, direct α = 4 on the Dirac operator.
    Biharmonic,
    /// e^{-T(-Δ)^{3/4}}, root α = 3/4 on L†L.
    Levy,
    /// f(A)ψ for f = 1 + 2z + 3z³ on the shifted Laplacian, by the contour sum.
    MatrixPoly,
}

impl Application {
    pub const ALL: [Application; 4] = [
        Application::Heat,
        Application::Biharmonic,
        Application::Levy,
        Application::MatrixPoly,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Application::Heat => "heat",
            Application::Biharmonic => "biharmonic",
            Application::Levy => "levy",
            Application::MatrixPoly => "matrix_poly",
        }
    }

    /// Operator dimension an initial state must have.
    pub fn state_dims(&self, g: &GridSpec) -> Vec<usize> {
        let top = g.points();
        match self {
            Application::Heat | Application::Biharmonic => {
                vec![top, top + g.d * (g.n + 1) * g.n.pow(g.d as u32 - 1)]
            }
            _ => vec![top],
        }
    }
}

impl fmt::Display for Application {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Application {
    type Err = PsfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "heat" => Ok(Application::Heat),
            "biharmonic" => Ok(Application::Biharmonic),
            "levy" => Ok(Application::Levy),
            "matrix_poly" => Ok(Application::MatrixPoly),
            other => Err(PsfError::Parse(format!("unknown application `{other}`"))),
        }
    }
}

pub fn matrix_poly_function() -> FunctionSpec {
    FunctionSpec::Poly {
        coeffs: vec![1.0, 2.0, 0.0, 3.0],
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AppOptions {
    /// Contour node count; planned from eps when absent.
    pub m: Option<usize>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub timing: bool,
}

/// One row of a convergence table. Errors are relative to ‖u0‖ on the
/// Fourier path and to ‖f(A)ψ‖ on the contour path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub app: Application,
    pub d: usize,
    pub n: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    pub mode: Option<AccessMode>,
    pub p: Option<f64>,
    pub a: Option<f64>,
    #[serde(rename = "K")]
    pub k_max: Option<usize>,
    pub eps_internal: Option<f64>,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
    pub m: Option<usize>,
    pub identity_residual: f64,
    pub error_measured: f64,
    pub error_bound: f64,
    pub wall_time_ms: Option<f64>,
}

impl ConvergenceRecord {
    pub const CSV_HEADER: [&'static str; 18] = [
        "app",
        "d",
        "n",
        "h",
        "T",
        "eps",
        "mode",
        "p",
        "a",
        "K",
        "eps_internal",
        "R1",
        "R2",
        "m",
        "identity_residual",
        "error_measured",
        "error_bound",
        "wall_time_ms",
    ];

    /// Fields in [`Self::CSV_HEADER`] order; absent values are empty.
    pub fn csv_fields(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.app.to_string(),
            self.d.to_string(),
            self.n.to_string(),
            self.h.to_string(),
            self.t.to_string(),
            self.eps.to_string(),
            opt(self.mode),
            opt(self.p),
            opt(self.a),
            opt(self.k_max),
            opt(self.eps_internal),
            opt(self.r1),
            opt(self.r2),
            opt(self.m),
            self.identity_residual.to_string(),
            self.error_measured.to_string(),
            self.error_bound.to_string(),
            opt(self.wall_time_ms),
        ]
    }
}

/// Deterministic normalized start state: a smooth bump on the grid, zero
/// in the edge block of the Dirac space.
pub fn default_state(g: &GridSpec) -> StateVector {
    let top = g.points();
    let mut v = vec![0.0; top];
    for (i, x) in v.iter_mut().enumerate() {
        *x = g
            .coordinates(i)
            .iter()
            .map(|&c| (std::f64::consts::PI * (c + 1) as f64 * g.h).sin() + 0.25 * ((c % 3) as f64 - 1.0))
            .product();
    }
    let u = StateVector::from_real(&v).normalized();
    if u.norm() == 0.0 {
        return StateVector::from_real(&vec![1.0 / (top as f64).sqrt(); top]);
    }
    u
}

pub fn run_application(
    app: Application,
    g: &GridSpec,
    t: f64,
    eps: f64,
    u0: &StateVector,
    opts: &AppOptions,
) -> Result<ConvergenceRecord> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PsfError::invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(PsfError::invalid("T", format!("must be finite and >= 0, got {t}")));
    }
    if u0.norm() == 0.0 {
        return Err(PsfError::invalid("u0", "must be nonzero"));
    }
    let start = Instant::now();
    let mut record = match app {
        Application::Heat | Application::Biharmonic => run_dirac(app, g, t, eps, u0)?,
        Application::Levy => run_levy(g, t, eps, u0)?,
        Application::MatrixPoly => run_matrix_poly(g, t, eps, u0, opts)?,
    };
    if opts.timing {
        record.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(record)
}

fn blank_record(app: Application, g: &GridSpec, t: f64, eps: f64) -> ConvergenceRecord {
    ConvergenceRecord {
        app,
        d: g.d,
        n: g.n,
        h: g.h,
        t,
        eps,
        mode: None,
        p: None,
        a: None,
        k_max: None,
        eps_internal: None,
        r1: None,
        r2: None,
        m: None,
        identity_residual: 0.0,
        error_measured: 0.0,
        error_bound: 0.0,
        wall_time_ms: None,
    }
}

fn check_dim(u0: &StateVector, allowed: &[usize]) -> Result<()> {
    if allowed.contains(&u0.len()) {
        Ok(())
    } else {
        Err(PsfError::DimensionMismatch {
            expected: allowed[0],
            actual: u0.len(),
        })
    }
}

/// Runs the Fourier path for e^{-T H^α} and fills the plan columns.
fn fourier_run(
    record: &mut ConvergenceRecord,
    h: &DenseMatrix,
    profile: SpectralProfile,
    eps: f64,
    u0: &StateVector,
    oracle: &StateVector,
) -> Result<()> {
    let h_norm = h.spectral_norm();
    let kern = TimeKernel::new(profile);
    let plan = plan_fourier_with_kernel(&profile, h_norm, eps, &kern)?.with_coefficients(&kern)?;
    let approx = assemble_fourier_approx(&plan, h)?.apply(u0);
    let u_norm = u0.norm();
    record.mode = Some(profile.mode);
    record.p = Some(profile.p());
    record.a = Some(plan.a);
    record.k_max = Some(plan.k_max);
    record.eps_internal = Some(plan.eps_internal);
    record.error_measured = approx.distance(oracle) / u_norm;
    record.error_bound = error_bounds(&plan, h_norm).total();
    Ok(())
}

fn run_dirac(app: Application, g: &GridSpec, t: f64, eps: f64, u0: &StateVector) -> Result<ConvergenceRecord> {
    check_dim(u0, &app.state_dims(g))?;
    let dirac = dirac_operator(&gradient_stack(g))?;
    let full = dirac.h.rows();
    let u = if u0.len() == full {
        u0.clone()
    } else {
        let mut v = u0.to_vec();
        v.resize(full, Complex64::new(0.0, 0.0));
        StateVector::from_complex(v)
    };
    let (alpha, power) = match app {
        Application::Heat => (2.0, 1.0),
        _ => (4.0, 2.0),
    };
    let profile = SpectralProfile::new(alpha, t, AccessMode::Direct)?;
    let oracle = exact_evolution(&dirac.square(), power, t, &u)?;
    let mut record = blank_record(app, g, t, eps);
    record.identity_residual = dirac.residuals.square.max(dirac.residuals.fourth);
    fourier_run(&mut record, &dirac.h, profile, eps, &u, &oracle)?;
    Ok(record)
}

fn run_levy(g: &GridSpec, t: f64, eps: f64, u0: &StateVector) -> Result<ConvergenceRecord> {
    check_dim(u0, &[g.points()])?;
    let h = laplacian(g);
    let profile = SpectralProfile::new(0.75, t, AccessMode::Root)?;
    let oracle = exact_evolution(&h, 0.75, t, u0)?;
    let mut record = blank_record(Application::Levy, g, t, eps);
    record.identity_residual = h.hermitian_residual();
    fourier_run(&mut record, &h, profile, eps, u0, &oracle)?;
    Ok(record)
}

fn run_matrix_poly(
    g: &GridSpec,
    t: f64,
    eps: f64,
    psi: &StateVector,
    opts: &AppOptions,
) -> Result<ConvergenceRecord> {
    check_dim(psi, &[g.points()])?;
    let a = shifted_encoding(&laplacian(g), g)?;
    let dec = eig(&a, true)?;
    let rho = dec.spectral_radius();
    let f = matrix_poly_function();
    let r1 = opts.r1.unwrap_or_else(|| default_radii(rho).0);
    let r2 = match opts.r2 {
        Some(r2) => r2,
        None => optimize_radius(|r| f.sup_bound(r), r1, R2_CAP_FACTOR * r1)?.r2,
    };
    let f_psi = dec.apply_fn_to(f.as_fn(), psi)?;
    let plan = match opts.m {
        Some(m) => ContourPlan::from_decomposition(&dec, f.as_fn(), r1, r2, m, None)?,
        None => ContourPlan::planned(&a, f.as_fn(), psi, eps, r1, r2)?,
    };
    let discrete = discrete_sum_apply(&a, f.as_fn(), &plan, psi)?;

    // Exact for deg f < m: the sum equals f(A) R1^m (R1^m - A^m)^{-1} ψ.
    let r1m = r1.powi(plan.m as i32);
    let identity = dec.apply_fn_to(|z| f.eval(z) * r1m / (r1m - z.powi(plan.m as i32)), psi)?;

    let f_norm = f_psi.norm();
    let bounds = contour_error_bounds(&plan, f_norm, psi.norm());
    let mut record = blank_record(Application::MatrixPoly, g, t, eps);
    record.r1 = Some(plan.r1);
    record.r2 = Some(plan.r2);
    record.m = Some(plan.m);
    record.identity_residual = discrete.distance(&identity) / psi.norm();
    record.error_measured = discrete.distance(&f_psi) / f_norm;
    record.error_bound = (bounds.aliasing + bounds.truncation) / f_norm;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(app: Application, d: usize, n: usize, t: f64, eps: f64, opts: AppOptions) -> ConvergenceRecord {
        let g = GridSpec::new(d, n, None).unwrap();
        run_application(app, &g, t, eps, &default_state(&g), &opts).unwrap()
    }

    #[test]
    fn heat_within_twice_eps() {
        let r = run(Application::Heat, 1, 8, 0.01, 1e-6, AppOptions::default());
        assert!(r.error_measured <= 2e-6, "{r:?}");
        assert!(r.identity_residual <= 1e-12);
        assert_eq!(r.mode, Some(AccessMode::Direct));
        assert_eq!(r.p, Some(2.0));
    }

    #[test]
    fn biharmonic_within_twice_eps() {
        let r = run(Application::Biharmonic, 1, 6, 1e-4, 1e-6, AppOptions::default());
        assert!(r.error_measured <= 2e-6, "{r:?}");
        assert_eq!(r.p, Some(4.0));
    }

    #[test]
    fn levy_within_twice_eps() {
        let r = run(Application::Levy, 1, 8, 0.05, 1e-4, AppOptions::default());
        assert!(r.error_measured <= 2e-4, "{r:?}");
        assert_eq!(r.mode, Some(AccessMode::Root));
        assert_eq!(r.p, Some(1.5));
    }

    #[test]
    fn matrix_poly_exact_identity() {
        let opts = AppOptions {
            m: Some(8),
            ..Default::default()
        };
        let r = run(Application::MatrixPoly, 1, 8, 1.0, 1e-6, opts);
        assert!(r.identity_residual <= 1e-12, "{r:?}");
        assert_eq!(r.m, Some(8));
    }

    #[test]
    fn matrix_poly_planned_meets_eps() {
        let r = run(Application::MatrixPoly, 2, 4, 1.0, 1e-6, AppOptions::default());
        assert!(r.error_measured <= 1e-6, "{r:?}");
        assert!(r.error_measured <= r.error_bound * (1.0 + 1e-9) + 1e-14);
    }

    #[test]
    fn full_dirac_state_accepted() {
        let g = GridSpec::new(1, 4, None).unwrap();
        let full = Application::Heat.state_dims(&g)[1];
        let u = StateVector::from_real(&vec![1.0; full]).normalized();
        assert!(run_application(Application::Heat, &g, 0.01, 1e-4, &u, &AppOptions::default()).is_ok());
        let bad = StateVector::from_real(&[1.0; 3]);
        assert!(matches!(
            run_application(Application::Heat, &g, 0.01, 1e-4, &bad, &AppOptions::default()),
            Err(PsfError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn csv_row_shape() {
        let r = run(Application::Levy, 1, 4, 0.1, 1e-3, AppOptions {
            timing: true,
            ..Default::default()
        });
        let fields = r.csv_fields();
        assert_eq!(fields.len(), ConvergenceRecord::CSV_HEADER.len());
        assert_eq!(fields[0], "levy");
        assert_eq!(fields[6], "root");
        assert!(fields[11].is_empty());
        assert!(!fields[17].is_empty());
        assert_eq!("matrix-poly".parse::<Application>().unwrap(), Application::MatrixPoly);
    }
}
