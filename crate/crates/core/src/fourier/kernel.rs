//! Time-domain kernel f(x) = 2 ∫_0^Ξ e^{-T ξ^p} cos(2π x ξ) dξ.
//!
//! The integral is evaluated on a precomputed mesh of 15-point
//! Gauss-Legendre panels. Panels never exceed 1/(8 (x_max + 1)) in width and
//! are bisected until a panel and its two halves agree at both x = 0 and
//! x = x_max. Near ξ = 0 this grades the mesh geometrically, which is what
//! resolves the algebraic tails of fractional profiles.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::SpectralProfile;

/// Neglected tail mass: e^{-T Ξ^p} = TAIL_EPS.
pub const TAIL_EPS: f64 = 1e-18;
pub const DEFAULT_PANEL_TOLERANCE: f64 = 1e-13;
const GL_POINTS: usize = 15;
const MAX_DEPTH: u32 = 60;
/// Rotation recurrences are resynchronised with an exact cis() this often.
const RESYNC: usize = 256;
const NODE_CHUNK: usize = 4096;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// Quadrature nodes ξ_j with weights 2 e^{-T ξ_j^p} w_j.
#[derive(Debug)]
pub struct KernelMesh {
    pub x_max: f64,
    pub xi: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
}

impl KernelMesh {
    pub fn build(profile: &SpectralProfile, xi_max: f64, x_max: f64, tolerance: f64) -> Self {
        let (t, p) = (profile.t, profile.p());
        let (gx, gw) = gl15();
        let density = |xi: f64| 2.0 * (-t * xi.powf(p)).exp();
        // (integral, integral of |integrand|)
        let panel = |a: f64, b: f64, x: f64| -> (f64, f64) {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let (mut s, mut s_abs) = (0.0, 0.0);
            for (u, w) in gx.iter().zip(gw) {
                let xi = mid + half * u;
                let d = w * density(xi);
                s += d * (2.0 * PI * x * xi).cos();
                s_abs += d;
            }
            (s * half, s_abs * half)
        };

        let width = 1.0 / (8.0 * (x_max + 1.0));
        let base = (xi_max / width).ceil().max(1.0) as usize;
        let step = xi_max / base as f64;
        let mut accepted: Vec<(f64, f64)> = Vec::new();
        for i in 0..base {
            let (a0, b0) = (i as f64 * step, ((i + 1) as f64 * step).min(xi_max));
            let mut stack = vec![(a0, b0, 0u32)];
            while let Some((a, b, depth)) = stack.pop() {
                let m = 0.5 * (a + b);
                let mut excess: f64 = f64::NEG_INFINITY;
                for x in [0.0, x_max] {
                    let (whole, mass) = panel(a, b, x);
                    let halves = panel(a, m, x).0 + panel(m, b, x).0;
                    // Rounding of the phase 2πxξ sets a floor no bisection can beat.
                    let floor = 64.0 * f64::EPSILON * (1.0 + 2.0 * PI * x * b) * mass;
                    let allowed = (tolerance * (b - a) / xi_max).max(floor);
                    excess = excess.max((whole - halves).abs() - allowed);
                }
                if excess <= 0.0 || depth >= MAX_DEPTH {
                    accepted.push((a, b));
                } else {
                    stack.push((m, b, depth + 1));
                    stack.push((a, m, depth + 1));
                }
            }
        }

        let mut xi = Vec::with_capacity(accepted.len() * GL_POINTS);
        let mut weights = Vec::with_capacity(accepted.len() * GL_POINTS);
        for &(a, b) in &accepted {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (u, w) in gx.iter().zip(gw) {
                let node = mid + half * u;
                let weight = w * half * density(node);
                if weight > 0.0 {
                    xi.push(node);
                    weights.push(weight);
                }
            }
        }
        KernelMesh {
            x_max,
            xi,
            weights,
            panels: accepted.len(),
        }
    }

    /// f(x) with compensated summation.
    pub fn value(&self, x: f64) -> f64 {
        let omega = 2.0 * PI * x.abs();
        neumaier(self.xi.iter().zip(&self.weights).map(|(xi, w)| w * (omega * xi).cos()))
    }

    /// F(x) = ∫_0^x f, from the sine transform of the weights.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let omega = 2.0 * PI * x;
        neumaier(
            self.xi
                .iter()
                .zip(&self.weights)
                .map(|(xi, w)| w * (omega * xi).sin() / (2.0 * PI * xi)),
        )
    }

    /// f and F on the grid x0 + k dx, k < count.
    ///
    /// Node chunks are reduced in a fixed order so the result does not depend
    /// on the thread count.
    pub fn grid(&self, x0: f64, dx: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
        let partials: Vec<(Vec<f64>, Vec<f64>)> = self
            .xi
            .par_chunks(NODE_CHUNK)
            .zip(self.weights.par_chunks(NODE_CHUNK))
            .map(|(xis, ws)| {
                let mut f = vec![0.0; count];
                let mut big_f = vec![0.0; count];
                for (&xi, &w) in xis.iter().zip(ws) {
                    let step = Complex64::from_polar(1.0, 2.0 * PI * dx * xi);
                    let w_anti = w / (2.0 * PI * xi);
                    let mut c = Complex64::from_polar(1.0, 2.0 * PI * x0 * xi);
                    for k in 0..count {
                        if k % RESYNC == 0 && k > 0 {
                            c = Complex64::from_polar(1.0, 2.0 * PI * (x0 + k as f64 * dx) * xi);
                        }
                        f[k] += w * c.re;
                        big_f[k] += w_anti * c.im;
                        c *= step;
                    }
                }
                (f, big_f)
            })
            .collect();
        let mut f = vec![0.0; count];
        let mut big_f = vec![0.0; count];
        for (pf, pbig) in partials {
            for k in 0..count {
                f[k] += pf[k];
                big_f[k] += pbig[k];
            }
        }
        (f, big_f)
    }
}

fn neumaier<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Quadrature state for one profile. Meshes are cached and grown on demand,
/// so clones share the cache.
#[derive(Clone, Debug)]
pub struct TimeKernel {
    pub profile: SpectralProfile,
    pub tail_cutoff: f64,
    pub panel_tolerance: f64,
    cache: Arc<Mutex<Option<Arc<KernelMesh>>>>,
}

impl TimeKernel {
    pub fn new(profile: SpectralProfile) -> Self {
        Self::with_tolerance(profile, DEFAULT_PANEL_TOLERANCE)
    }

    pub fn with_tolerance(profile: SpectralProfile, panel_tolerance: f64) -> Self {
        let tail_cutoff = ((1.0 / TAIL_EPS).ln() / profile.t).powf(1.0 / profile.p());
        TimeKernel {
            profile,
            tail_cutoff,
            panel_tolerance,
            cache: Arc::new(Mutex::new(None)),
        }
    }

    /// Mesh valid for |x| <= x_max. Cached meshes are reused when large enough;
    /// new ones are sized to the next power of two to limit rebuilds.
    pub fn mesh(&self, x_max: f64) -> Arc<KernelMesh> {
        let x_max = x_max.abs();
        let mut guard = self.cache.lock().expect("kernel cache poisoned");
        if let Some(mesh) = guard.as_ref() {
            if mesh.x_max >= x_max {
                return Arc::clone(mesh);
            }
        }
        let target = (x_max + 1.0).log2().ceil().exp2().max(4.0);
        let mesh = Arc::new(KernelMesh::build(
            &self.profile,
            self.tail_cutoff,
            target,
            self.panel_tolerance,
        ));
        *guard = Some(Arc::clone(&mesh));
        mesh
    }

    /// Mesh sized for exactly x_max, bypassing the cache.
    pub fn mesh_exact(&self, x_max: f64) -> KernelMesh {
        KernelMesh::build(&self.profile, self.tail_cutoff, x_max.abs(), self.panel_tolerance)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.mesh(x).value(x)
    }

    /// f(x0 + k dx) for k < count.
    pub fn values_on_grid(&self, x0: f64, dx: f64, count: usize) -> Vec<f64> {
        if count == 0 {
            return Vec::new();
        }
        let end = x0.abs().max((x0 + (count - 1) as f64 * dx).abs());
        self.mesh(end).grid(x0, dx, count).0
    }
}

pub fn kernel_value(kern: &TimeKernel, x: f64) -> f64 {
    kern.value(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::AccessMode;

    fn kernel(alpha: f64, t: f64, mode: AccessMode) -> TimeKernel {
        TimeKernel::new(SpectralProfile::new(alpha, t, mode).unwrap())
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 28 is exact for a 15-point rule
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(28)).sum();
        assert!((s - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_and_cauchy_spot_values() {
        let g = kernel(1.0, 1.0, AccessMode::Root);
        assert!((g.value(0.0) - PI.sqrt()).abs() < 1e-12);
        assert!((g.value(0.5) - PI.sqrt() * (-PI * PI / 4.0).exp()).abs() < 1e-12);
        let c = kernel(0.5, 1.0, AccessMode::Root);
        assert!((c.value(1.0) - 2.0 / (1.0 + 4.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn grid_matches_pointwise() {
        let k = kernel(0.75, 1.0, AccessMode::Root);
        let grid = k.values_on_grid(0.25, 0.37, 600);
        for (i, v) in grid.iter().enumerate().step_by(37) {
            let x = 0.25 + i as f64 * 0.37;
            assert!((v - k.value(x)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn antiderivative_of_gaussian() {
        // ∫_0^x √π e^{-π² s²} ds = erf(π x) / 2, reference from 30-digit arithmetic
        let k = kernel(1.0, 1.0, AccessMode::Root);
        let mesh = k.mesh(2.0);
        let erf_half = 0.408_711_925_448_806_6;
        let got = mesh.antiderivative(0.3);
        assert!((got - erf_half).abs() < 1e-12, "{got} vs {erf_half}");
    }
}
