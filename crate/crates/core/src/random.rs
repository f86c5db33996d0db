//! Seeded random instances.
//!
//! The generator is ChaCha8 seeded with `seed_from_u64`. Gaussians come from
//! `rand_distr::StandardNormal`, unitaries from the QR factorization of a
//! complex Gaussian matrix with the phases of R's diagonal folded into Q.
//! Identical seeds reproduce identical instances bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectral::{DenseMatrix, StateVector};

pub struct InstanceGenerator {
    rng: ChaCha8Rng,
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        InstanceGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn gaussian(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn complex_gaussian(&mut self, n: usize) -> DenseMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| self.gaussian());
        DenseMatrix::from_matrix(m).expect("gaussian entries are finite")
    }

    /// Haar-distributed unitary.
    pub fn unitary(&mut self, n: usize) -> DenseMatrix {
        let g = self.complex_gaussian(n).into_matrix();
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        DenseMatrix::from_matrix(q).expect("finite")
    }

    /// U diag(values) U^H with a Haar unitary U.
    pub fn with_spectrum(&mut self, values: &[Complex64]) -> DenseMatrix {
        let u = self.unitary(values.len());
        let d = DenseMatrix::from_diagonal(values);
        &(&u * &d) * &u.adjoint()
    }

    pub fn hermitian(&mut self, n: usize) -> DenseMatrix {
        let g = self.complex_gaussian(n);
        let h = (&g + &g.adjoint()).scale(Complex64::new(0.5, 0.0));
        symmetrize(&h)
    }

    /// Hermitian PSD matrix with spectrum in [0, norm] and largest eigenvalue exactly `norm`.
    pub fn psd_with_norm(&mut self, n: usize, norm: f64) -> DenseMatrix {
        let mut values: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(self.uniform(0.0, norm), 0.0))
            .collect();
        values[0] = Complex64::new(norm, 0.0);
        symmetrize(&self.with_spectrum(&values))
    }

    /// Hermitian matrix with spectrum in [-norm, norm] touching one end.
    pub fn hermitian_with_norm(&mut self, n: usize, norm: f64) -> DenseMatrix {
        let mut values: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(self.uniform(-norm, norm), 0.0))
            .collect();
        values[0] = Complex64::new(if self.rng.random::<bool>() { norm } else { -norm }, 0.0);
        symmetrize(&self.with_spectrum(&values))
    }

    /// Normal matrix whose eigenvalues lie in the closed disk of radius `rho`,
    /// one of them on its boundary.
    pub fn normal_with_radius(&mut self, n: usize, rho: f64) -> DenseMatrix {
        let values = self.disk_spectrum(n, rho);
        self.with_spectrum(&values)
    }

    pub fn disk_spectrum(&mut self, n: usize, rho: f64) -> Vec<Complex64> {
        let mut values: Vec<Complex64> = (0..n)
            .map(|_| {
                let r = rho * self.rng.random::<f64>().sqrt();
                let theta = self.uniform(0.0, 2.0 * std::f64::consts::PI);
                Complex64::from_polar(r, theta)
            })
            .collect();
        if let Some(first) = values.first_mut() {
            let theta = self.uniform(0.0, 2.0 * std::f64::consts::PI);
            *first = Complex64::from_polar(rho, theta);
        }
        values
    }

    /// Unit-norm complex Gaussian vector.
    pub fn state(&mut self, n: usize) -> StateVector {
        let v: Vec<Complex64> = (0..n).map(|_| self.gaussian()).collect();
        StateVector::from_complex(v).normalized()
    }
}

/// (M + M^H) / 2, removing rounding asymmetry.
pub fn symmetrize(m: &DenseMatrix) -> DenseMatrix {
    (m + &m.adjoint()).scale(Complex64::new(0.5, 0.0))
}
