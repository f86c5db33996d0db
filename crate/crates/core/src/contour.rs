//! Discrete resolvent sums on the circle |z| = R1 and their error terms.
//!
//! For nodes w_k = R1 e^{2πik/m},
//!
//! (1/m) Σ_k w_k f(w_k) (w_k - A)^{-1} ψ
//!     = f(A)ψ - f(A) g(A) ψ + (1/2πi) ∮_{|z|=R2} R1^m/(z^m - R1^m) f(z) (z - A)^{-1} ψ dz
//!
//! with g(z) = z^m / (z^m - R1^m). The outer integral is evaluated with the
//! trapezoid rule on quad_n equispaced angles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PsfError, Result};
use crate::functions::{sampled_sup, SUP_SAMPLES};
use crate::spectral::{eig, resolvent_apply, DenseMatrix, SpectralDecomposition, StateVector};

pub const MIN_QUAD_N: usize = 256;
/// Default inner-radius margin over the spectral radius.
pub const R1_MARGIN: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourPlan {
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub m: usize,
    pub mu: f64,
    pub quad_n: usize,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "kappa_S")]
    pub kappa_s: f64,
    pub rho: f64,
}

impl ContourPlan {
    /// Plan for a given operator and node count. B1 and B2 are sampled.
    pub fn new<F>(a: &DenseMatrix, f: F, r1: f64, r2: f64, m: usize, quad_n: Option<usize>) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let dec = decompose(a)?;
        Self::from_decomposition(&dec, f, r1, r2, m, quad_n)
    }

    pub fn from_decomposition<F>(
        dec: &SpectralDecomposition,
        f: F,
        r1: f64,
        r2: f64,
        m: usize,
        quad_n: Option<usize>,
    ) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let rho = dec.spectral_radius();
        let quad_n = quad_n.unwrap_or_else(|| default_quad_n(m));
        let mut plan = Self::from_parts(r1, r2, m, rho, dec.kappa_s, 0.0, 0.0, quad_n)?;
        plan.b1 = sampled_sup(&f, r1, SUP_SAMPLES).max(
            make_nodes(r1, m)
                .nodes
                .iter()
                .map(|&w| f(w).norm())
                .fold(0.0, f64::max),
        );
        plan.b2 = sampled_sup(&f, r2, SUP_SAMPLES);
        if !(plan.b1.is_finite() && plan.b2.is_finite()) {
            return Err(PsfError::NonFinite {
                at: Complex64::new(if plan.b1.is_finite() { r2 } else { r1 }, 0.0),
            });
        }
        Ok(plan)
    }

    /// Plan from known quantities, validated.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        r1: f64,
        r2: f64,
        m: usize,
        rho: f64,
        kappa_s: f64,
        b1: f64,
        b2: f64,
        quad_n: usize,
    ) -> Result<Self> {
        if !(r1 > 0.0 && r1.is_finite()) {
            return Err(PsfError::invalid("R1", format!("must be positive, got {r1}")));
        }
        if !(r2 > r1 && r2.is_finite()) {
            return Err(PsfError::invalid("R2", format!("must exceed R1 = {r1}, got {r2}")));
        }
        if m == 0 {
            return Err(PsfError::invalid("m", "must be at least 1"));
        }
        if quad_n < 8 * m {
            return Err(PsfError::invalid("quad_n", format!("must be at least 8m = {}", 8 * m)));
        }
        if !(rho < r1) {
            return Err(PsfError::SpectrumNotEnclosed { modulus: rho, radius: r1 });
        }
        Ok(ContourPlan {
            r1,
            r2,
            m,
            mu: r1 / r2,
            quad_n,
            b1,
            b2,
            kappa_s,
            rho,
        })
    }

    /// Plan with m chosen by [`plan_m`] for relative accuracy eps on f(A)ψ.
    pub fn planned<F>(a: &DenseMatrix, f: F, psi: &StateVector, eps: f64, r1: f64, r2: f64) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let dec = decompose(a)?;
        let f_psi_norm = dec.apply_fn_to(&f, psi)?.norm();
        let b2 = sampled_sup(&f, r2, SUP_SAMPLES);
        let m = plan_m(eps, r1, r2, b2, dec.kappa_s, f_psi_norm, psi.norm(), dec.spectral_radius())?;
        Self::from_decomposition(&dec, f, r1, r2, m, None)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

pub fn default_quad_n(m: usize) -> usize {
    (8 * m).max(MIN_QUAD_N)
}

/// R1 = 1.1 ρ (1 when ρ = 0) and R2 = 2 R1.
pub fn default_radii(rho: f64) -> (f64, f64) {
    let r1 = if rho > 0.0 { R1_MARGIN * rho } else { 1.0 };
    (r1, 2.0 * r1)
}

fn decompose(a: &DenseMatrix) -> Result<SpectralDecomposition> {
    eig(a, a.is_square() && a.is_hermitian())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContourNodes {
    pub r1: f64,
    pub nodes: Vec<Complex64>,
}

/// w_k = R1 e^{2πik/m}, k = 1..m.
pub fn make_nodes(r1: f64, m: usize) -> ContourNodes {
    let nodes = (1..=m)
        .map(|k| Complex64::from_polar(r1, 2.0 * PI * (k % m) as f64 / m as f64))
        .collect();
    ContourNodes { r1, nodes }
}

fn check_dims(a: &DenseMatrix, psi: &StateVector) -> Result<()> {
    if !a.is_square() {
        return Err(PsfError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != psi.len() {
        return Err(PsfError::DimensionMismatch {
            expected: a.rows(),
            actual: psi.len(),
        });
    }
    Ok(())
}

fn finite(z: Complex64, at: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(PsfError::NonFinite { at })
    }
}

/// Sums vectors in the given order.
fn ordered_sum(n: usize, terms: Vec<StateVector>) -> StateVector {
    terms.iter().fold(StateVector::zeros(n), |acc, t| acc.add(t))
}

/// (1/m) Σ_k w_k f(w_k) (w_k - A)^{-1} ψ.
pub fn discrete_sum_apply<F>(a: &DenseMatrix, f: F, plan: &ContourPlan, psi: &StateVector) -> Result<StateVector>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    check_dims(a, psi)?;
    let nodes = make_nodes(plan.r1, plan.m);
    let terms = nodes
        .nodes
        .par_iter()
        .map(|&w| {
            let weight = finite(w * f(w), w)?;
            Ok(resolvent_apply(a, w, psi)?.scale(weight))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ordered_sum(psi.len(), terms).scale(Complex64::new(1.0 / plan.m as f64, 0.0)))
}

/// z^m / (z^m - R1^m), written in z / R1 to avoid overflow.
pub fn filter_kernel(z: Complex64, r1: f64, m: usize) -> Complex64 {
    let q = (z / r1).powu(m as u32);
    q / (q - 1.0)
}

/// f(A) g(A) ψ.
pub fn aliasing_term<F>(a: &DenseMatrix, f: F, plan: &ContourPlan, psi: &StateVector) -> Result<StateVector>
where
    F: Fn(Complex64) -> Complex64,
{
    check_dims(a, psi)?;
    let dec = decompose(a)?;
    for &lambda in &dec.eigenvalues {
        let q = (lambda / plan.r1).powu(plan.m as u32);
        if (q - 1.0).norm() < 1e-14 {
            return Err(PsfError::NonFinite { at: lambda });
        }
    }
    dec.apply_fn_to(|z| f(z) * filter_kernel(z, plan.r1, plan.m), psi)
}

/// (1/2πi) ∮_{|z|=R2} R1^m/(z^m - R1^m) f(z) (z - A)^{-1} ψ dz by the
/// trapezoid rule on quad_n nodes.
pub fn truncation_integral<F>(a: &DenseMatrix, f: F, plan: &ContourPlan, psi: &StateVector) -> Result<StateVector>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    check_dims(a, psi)?;
    let n = plan.quad_n;
    let terms = (0..n)
        .into_par_iter()
        .map(|j| {
            let z = Complex64::from_polar(plan.r2, 2.0 * PI * j as f64 / n as f64);
            let outer = 1.0 / ((z / plan.r1).powu(plan.m as u32) - 1.0);
            let weight = finite(z * outer * f(z), z)?;
            Ok(resolvent_apply(a, z, psi)?.scale(weight))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ordered_sum(psi.len(), terms).scale(Complex64::new(1.0 / n as f64, 0.0)))
}

/// The four terms of the decomposition and the closure residual.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub discrete: StateVector,
    pub target: StateVector,
    pub aliasing: StateVector,
    pub truncation: StateVector,
}

impl Decomposition {
    /// ‖discrete - target + aliasing - truncation‖
    pub fn residual(&self) -> f64 {
        self.discrete
            .sub(&self.target)
            .add(&self.aliasing)
            .sub(&self.truncation)
            .norm()
    }
}

pub fn decompose_error<F>(a: &DenseMatrix, f: F, plan: &ContourPlan, psi: &StateVector) -> Result<Decomposition>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    Ok(Decomposition {
        discrete: discrete_sum_apply(a, &f, plan, psi)?,
        target: decompose(a)?.apply_fn_to(&f, psi)?,
        aliasing: aliasing_term(a, &f, plan, psi)?,
        truncation: truncation_integral(a, &f, plan, psi)?,
    })
}

/// Smallest m with both geometric error budgets met:
///
/// (i)  κ_S (ρ/R1)^m / (1 - (ρ/R1)^m) <= eps/4
/// (ii) μ^m / (1 - μ^m) <= eps ‖f(A)ψ‖ (R2 - R1) / (4 R2 B2 κ_S ‖ψ‖)
#[allow(clippy::too_many_arguments)]
pub fn plan_m(
    eps: f64,
    r1: f64,
    r2: f64,
    b2: f64,
    kappa_s: f64,
    f_psi_norm: f64,
    psi_norm: f64,
    rho: f64,
) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PsfError::invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(rho >= 0.0 && rho < r1 && r1 < r2) {
        return Err(PsfError::invalid("radii", format!("need rho < R1 < R2, got {rho}, {r1}, {r2}")));
    }
    if !(f_psi_norm > 0.0 && psi_norm > 0.0 && b2 > 0.0 && kappa_s >= 1.0 - 1e-9) {
        return Err(PsfError::invalid(
            "norms",
            "f_psi_norm, psi_norm and B2 must be positive, kappa_S >= 1",
        ));
    }
    let aliasing_rhs = eps / (4.0 * kappa_s);
    let truncation_rhs = eps * f_psi_norm * (r2 - r1) / (4.0 * r2 * b2 * kappa_s * psi_norm);
    let m1 = geometric_count(rho / r1, aliasing_rhs);
    let m2 = geometric_count(r1 / r2, truncation_rhs);
    Ok(m1.max(m2))
}

/// Smallest m >= 1 with x^m / (1 - x^m) <= rhs, for 0 <= x < 1.
pub fn geometric_count(x: f64, rhs: f64) -> usize {
    let holds = |m: usize| {
        let xm = x.powi(m as i32);
        xm / (1.0 - xm) <= rhs
    };
    if x == 0.0 {
        return 1;
    }
    let guess = ((rhs / (1.0 + rhs)).ln() / x.ln()).ceil().max(1.0) as usize;
    let mut m = guess.saturating_sub(2).max(1);
    while !holds(m) {
        m += 1;
    }
    m
}

/// Analytic bounds on the two error terms at the plan's m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourBounds {
    pub aliasing: f64,
    pub truncation: f64,
}

pub fn contour_error_bounds(plan: &ContourPlan, f_psi_norm: f64, psi_norm: f64) -> ContourBounds {
    let q = (plan.rho / plan.r1).powi(plan.m as i32);
    let mu_m = plan.mu.powi(plan.m as i32);
    ContourBounds {
        aliasing: plan.kappa_s * q / (1.0 - q) * f_psi_norm,
        truncation: plan.r2 * plan.b2 * plan.kappa_s * mu_m / ((1.0 - mu_m) * (plan.r2 - plan.r1)) * psi_norm,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusChoice {
    pub r2: f64,
    pub objective: f64,
    /// The minimizer sits at the cap and the objective was still decreasing.
    pub at_boundary: bool,
}

const GOLDEN_TOL: f64 = 1e-6;
const GRID: usize = 96;

/// Minimizes f_sup(R2) R2 / (R2 - R1)^2 over (R1, cap] with golden-section
/// refinement of the three best grid brackets.
pub fn optimize_radius<S>(f_sup: S, r1: f64, r2_cap: f64) -> Result<RadiusChoice>
where
    S: Fn(f64) -> f64,
{
    if !(r1 > 0.0 && r2_cap > r1) {
        return Err(PsfError::invalid("R2_cap", format!("must exceed R1 = {r1}, got {r2_cap}")));
    }
    let objective = |r: f64| f_sup(r) * r / ((r - r1) * (r - r1));
    // Geometric grid in R2 - R1 so the pole at R1 is resolved.
    let span = r2_cap - r1;
    let lo = span * 1e-6;
    let grid: Vec<f64> = (0..GRID)
        .map(|i| r1 + lo * (span / lo).powf(i as f64 / (GRID - 1) as f64))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| objective(r)).collect();

    let mut minima: Vec<usize> = (0..GRID)
        .filter(|&i| {
            let left = i == 0 || values[i] <= values[i - 1];
            let right = i == GRID - 1 || values[i] <= values[i + 1];
            left && right
        })
        .collect();
    minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    minima.truncate(3);

    let mut best = RadiusChoice {
        r2: r2_cap,
        objective: objective(r2_cap),
        at_boundary: true,
    };
    for &i in &minima {
        if i == GRID - 1 {
            continue;
        }
        let a = grid[i.saturating_sub(1)];
        let b = grid[i + 1];
        let r = golden_section(&objective, a, b);
        let v = objective(r);
        if v < best.objective {
            best = RadiusChoice {
                r2: r,
                objective: v,
                at_boundary: false,
            };
        }
    }
    if !best.at_boundary && (r2_cap - best.r2) <= GOLDEN_TOL * r2_cap {
        best.at_boundary = true;
    }
    Ok(best)
}

fn golden_section<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while (b - a) > GOLDEN_TOL * 0.5 * (a + b).abs() {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplification {
    /// γ (1/m) Σ |w_k f(w_k)| / ‖f(A)ψ‖
    pub discrete: f64,
    /// γ R1 B1 / ‖f(A)ψ‖
    pub bound: f64,
}

pub fn amplification_factor<F>(plan: &ContourPlan, f: F, gamma: f64, f_psi_norm: f64) -> Result<Amplification>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(f_psi_norm > 0.0) {
        return Err(PsfError::invalid("f_psi_norm", "must be positive"));
    }
    let nodes = make_nodes(plan.r1, plan.m);
    let mean = nodes.nodes.iter().map(|&w| (w * f(w)).norm()).sum::<f64>() / plan.m as f64;
    Ok(Amplification {
        discrete: gamma * mean / f_psi_norm,
        bound: gamma * plan.r1 * plan.b1 / f_psi_norm,
    })
}
