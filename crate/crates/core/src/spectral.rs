//! Dense linear algebra oracle: eigendecompositions, matrix functions through
//! the spectral mapping, resolvent solves and norms.
//!
//! Everything here is deliberately direct (no Krylov, no sparsity). The rest
//! of the crate is verified against these routines.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{PsfError, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_CLAMP_TOL: f64 = 1e-12;
const RECONSTRUCTION_TOL: f64 = 1e-10;
const RESOLVENT_PIVOT_TOL: f64 = 1e-13;

/// Complex dense matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix(DMatrix<Complex64>);

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(PsfError::invalid("rows/cols", "dimensions must be positive"));
        }
        if rows * cols != entries.len() {
            return Err(PsfError::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if let Some(bad) = m.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(PsfError::NonFinite { at: *bad });
        }
        Ok(DenseMatrix(m))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        DenseMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        DenseMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        DenseMatrix(&self.0 * s)
    }

    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> Self {
        DenseMatrix(self.0.view((row, col), (nrows, ncols)).into_owned())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.max_abs() == 0.0 {
            return 0.0;
        }
        let svd = nalgebra::linalg::SVD::new(self.0.clone(), false, false);
        svd.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Ratio of extreme singular values; infinite for singular input.
    pub fn condition_number(&self) -> f64 {
        let svd = nalgebra::linalg::SVD::new(self.0.clone(), false, false);
        let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// max |M - M^H| entrywise.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_residual() <= HERMITIAN_TOL * self.max_abs().max(1.0)
    }

    /// ||A A^H - A^H A||_F relative to ||A||_F^2.
    pub fn normality_residual(&self) -> f64 {
        let a = &self.0;
        let comm = a * a.adjoint() - a.adjoint() * a;
        let scale = self.frobenius_norm().powi(2);
        if scale == 0.0 {
            0.0
        } else {
            comm.norm() / scale
        }
    }

    pub fn is_normal(&self) -> bool {
        self.normality_residual() <= 1e-10
    }

    /// A^k by repeated squaring.
    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.0.clone();
        let mut acc = DMatrix::identity(self.rows(), self.cols());
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        DenseMatrix(acc)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector::from_vector(&self.0 * &v.entries)
    }

    pub fn kron(&self, other: &DenseMatrix) -> Self {
        DenseMatrix(self.0.kronecker(&other.0))
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<&StateVector> for &DenseMatrix {
    type Output = StateVector;
    fn mul(self, rhs: &StateVector) -> StateVector {
        self.apply(rhs)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 - &rhs.0)
    }
}

/// Complex vector with its Euclidean norm cached.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    entries: DVector<Complex64>,
    norm: f64,
}

impl StateVector {
    pub fn from_vector(entries: DVector<Complex64>) -> Self {
        let norm = entries.norm();
        StateVector { entries, norm }
    }

    pub fn from_complex(entries: Vec<Complex64>) -> Self {
        Self::from_vector(DVector::from_vec(entries))
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::from_complex(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_vector(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn to_vec(&self) -> Vec<Complex64> {
        self.entries.iter().copied().collect()
    }

    pub fn normalized(&self) -> Self {
        if self.norm == 0.0 {
            return self.clone();
        }
        Self::from_vector(&self.entries / Complex64::new(self.norm, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_vector(&self.entries * s)
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        (&self.entries - &other.entries).norm()
    }

    pub fn add(&self, other: &StateVector) -> Self {
        Self::from_vector(&self.entries + &other.entries)
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        Self::from_vector(&self.entries - &other.entries)
    }
}

/// Eigenvalues, eigenvector basis (columns) and the basis condition number.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub basis: DenseMatrix,
    pub kappa_s: f64,
    basis_inv: DMatrix<Complex64>,
    unitary: bool,
}

impl SpectralDecomposition {
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn basis_inverse(&self) -> &DMatrix<Complex64> {
        &self.basis_inv
    }

    /// basis * diag(values) * basis^-1
    pub fn compose(&self, values: &[Complex64]) -> DenseMatrix {
        let mut scaled = self.basis.0.clone();
        for (j, &v) in values.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= v;
            }
        }
        DenseMatrix(scaled * &self.basis_inv)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.compose(&self.eigenvalues)
    }

    /// Evaluates `f` at every eigenvalue, failing on non-finite values.
    pub fn map_eigenvalues<F>(&self, f: F) -> Result<Vec<Complex64>>
    where
        F: Fn(Complex64) -> Complex64,
    {
        self.eigenvalues
            .iter()
            .map(|&lambda| {
                let v = f(lambda);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(PsfError::NonFinite { at: lambda })
                }
            })
            .collect()
    }

    pub fn apply_fn<F>(&self, f: F) -> Result<DenseMatrix>
    where
        F: Fn(Complex64) -> Complex64,
    {
        Ok(self.compose(&self.map_eigenvalues(f)?))
    }

    /// f(M) v without forming f(M).
    pub fn apply_fn_to<F>(&self, f: F, v: &StateVector) -> Result<StateVector>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let values = self.map_eigenvalues(f)?;
        let mut coeffs = &self.basis_inv * &v.entries;
        for (c, val) in coeffs.iter_mut().zip(values) {
            *c *= val;
        }
        Ok(StateVector::from_vector(&self.basis.0 * coeffs))
    }
}

/// Eigendecomposition of a square matrix.
///
/// With `hermitian_hint` the input must be Hermitian to 1e-12 and the
/// Hermitian solver is used (real eigenvalues, unitary basis). Otherwise a
/// complex Schur form is computed and eigenvectors are recovered by
/// back-substitution.
pub fn eig(m: &DenseMatrix, hermitian_hint: bool) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(PsfError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let decomposition = if hermitian_hint {
        let residual = m.hermitian_residual();
        if residual > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(PsfError::NotHermitian { residual });
        }
        hermitian_eig(m)
    } else {
        general_eig(m)?
    };

    let residual = (&decomposition.reconstruct() - m).frobenius_norm();
    if residual > RECONSTRUCTION_TOL * m.frobenius_norm() {
        return Err(PsfError::InvariantViolation {
            what: "eigendecomposition reconstruction",
            residual,
        });
    }
    Ok(decomposition)
}

/// Chooses the Hermitian path automatically when the input qualifies.
pub fn eig_auto(m: &DenseMatrix) -> Result<SpectralDecomposition> {
    eig(m, m.is_square() && m.is_hermitian())
}

fn hermitian_eig(m: &DenseMatrix) -> SpectralDecomposition {
    let sym = (&m.0 + m.0.adjoint()) * Complex64::new(0.5, 0.0);
    let se = nalgebra::linalg::SymmetricEigen::new(sym);
    let eigenvalues = se.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let basis = DenseMatrix(se.eigenvectors);
    let basis_inv = basis.0.adjoint();
    let kappa_s = basis.condition_number();
    SpectralDecomposition {
        eigenvalues,
        basis,
        kappa_s,
        basis_inv,
        unitary: true,
    }
}

fn general_eig(m: &DenseMatrix) -> Result<SpectralDecomposition> {
    let n = m.rows();
    let (q, t) = complex_schur(m.0.clone())?;
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut basis = q * y;
    for mut col in basis.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col.unscale_mut(nrm);
        }
    }
    let basis = DenseMatrix(basis);
    let basis_inv = basis
        .0
        .clone()
        .lu()
        .try_inverse()
        .ok_or(PsfError::InvariantViolation {
            what: "eigenvector basis invertible",
            residual: f64::INFINITY,
        })?;
    let kappa_s = basis.condition_number();
    Ok(SpectralDecomposition {
        eigenvalues,
        basis,
        kappa_s,
        basis_inv,
        unitary: false,
    })
}

/// Givens rotation [[c, s], [-conj(s), c]] mapping (a, b) to (r, 0).
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a == Complex64::new(0.0, 0.0) {
        return (0.0, b.conj() / b.norm());
    }
    let na = a.norm();
    let nrm = na.hypot(b.norm());
    (na / nrm, (a / na) * b.conj() / nrm)
}

/// Complex Schur decomposition A = Q T Q^H by Hessenberg reduction followed
/// by single-shift QR sweeps with Wilkinson shifts.
fn complex_schur(a: DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    if n == 1 {
        return Ok((DMatrix::identity(1, 1), a));
    }
    let (mut q, mut h) = nalgebra::linalg::Hessenberg::new(a).unpack();
    for j in 0..n {
        for i in (j + 2)..n {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    let fro = h.norm();
    if fro == 0.0 {
        return Ok((q, h));
    }

    let max_iterations = 100 * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].l1_norm() + h[(lo, lo)].l1_norm();
            if s == 0.0 {
                s = fro;
            }
            if h[(lo, lo - 1)].l1_norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > max_iterations {
            return Err(PsfError::EigenNoConvergence { iterations: total });
        }

        let shift = if since_deflation % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        rot.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rot.push((c, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rot[idx];
            let last = (k + 1).min(hi);
            for i in 0..=last {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = q[(i, k)];
                let y = q[(i, k + 1)];
                q[(i, k)] = x * c + y * s.conj();
                q[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok((q, h))
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Returns basis * diag(scalar_fn(lambda_i)) * basis^-1.
pub fn matfun<F>(m: &DenseMatrix, scalar_fn: F) -> Result<DenseMatrix>
where
    F: Fn(Complex64) -> Complex64,
{
    eig_auto(m)?.apply_fn(scalar_fn)
}

/// Solves (zI - A) x = b by LU with partial pivoting.
pub fn resolvent_apply(a: &DenseMatrix, z: Complex64, b: &StateVector) -> Result<StateVector> {
    if !a.is_square() {
        return Err(PsfError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.len() != a.rows() {
        return Err(PsfError::DimensionMismatch {
            expected: a.rows(),
            actual: b.len(),
        });
    }
    let n = a.rows();
    let mut shifted = -a.0.clone();
    for i in 0..n {
        shifted[(i, i)] += z;
    }
    let lu = shifted.clone().lu();
    let threshold = RESOLVENT_PIVOT_TOL * a.frobenius_norm();
    let u = lu.u();
    if (0..n).any(|i| u[(i, i)].norm() <= threshold) {
        return Err(PsfError::SingularResolvent { z });
    }
    let x = lu.solve(&b.entries).ok_or(PsfError::SingularResolvent { z })?;
    let residual = (&shifted * &x - &b.entries).norm();
    if residual > RECONSTRUCTION_TOL * b.norm().max(f64::MIN_POSITIVE) && b.norm() > 0.0 {
        return Err(PsfError::SingularResolvent { z });
    }
    Ok(StateVector::from_vector(x))
}

/// Eigenvalues of a Hermitian operator with nominal PSD clamping applied.
pub(crate) fn clamp_psd(eigenvalues: &[Complex64]) -> Result<Vec<f64>> {
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    eigenvalues
        .iter()
        .map(|z| {
            let x = z.re;
            if x >= 0.0 {
                Ok(x)
            } else if x >= -PSD_CLAMP_TOL * scale {
                Ok(0.0)
            } else {
                Err(PsfError::NotPositiveSemidefinite { eigenvalue: x })
            }
        })
        .collect()
}

/// Hermitian decomposition of a nominally PSD operator, eigenvalues clamped.
pub fn psd_eig(h: &DenseMatrix) -> Result<SpectralDecomposition> {
    let mut dec = eig(h, true)?;
    let clamped = clamp_psd(&dec.eigenvalues)?;
    dec.eigenvalues = clamped.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    Ok(dec)
}

/// e^{-T H^alpha} u0 for Hermitian PSD H.
pub fn exact_evolution(h: &DenseMatrix, alpha: f64, t: f64, u0: &StateVector) -> Result<StateVector> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PsfError::invalid("alpha", "must be positive"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(PsfError::invalid("T", "must be nonnegative"));
    }
    if u0.len() != h.rows() {
        return Err(PsfError::DimensionMismatch {
            expected: h.rows(),
            actual: u0.len(),
        });
    }
    let dec = psd_eig(h)?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    dec.apply_fn_to(|l| Complex64::new((-t * l.re.powf(alpha)).exp(), 0.0), u0)
}

/// Supremum of the resolvent norm on |z| = R.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventSup {
    pub value: f64,
    /// False when `value` is the kappa_S / distance upper bound of a non-normal input.
    pub exact: bool,
}

pub fn resolvent_sup_on_circle(a: &DenseMatrix, radius: f64) -> Result<ResolventSup> {
    if !(radius > 0.0) {
        return Err(PsfError::invalid("R", "must be positive"));
    }
    let normal = a.is_normal();
    let dec = if normal && a.is_hermitian() {
        eig(a, true)?
    } else {
        eig(a, false)?
    };
    let mut dist = f64::INFINITY;
    for &lambda in &dec.eigenvalues {
        let d = (radius - lambda.norm()).abs();
        if d <= 1e-13 * radius.max(lambda.norm()) {
            return Err(PsfError::EigenvalueOnCircle {
                eigenvalue: lambda,
                radius,
            });
        }
        dist = dist.min(d);
    }
    if normal {
        Ok(ResolventSup {
            value: 1.0 / dist,
            exact: true,
        })
    } else {
        Ok(ResolventSup {
            value: dec.kappa_s / dist,
            exact: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::InstanceGenerator;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_eigenvalues_and_kappa() {
        let dec = eig(&DenseMatrix::identity(3), false).unwrap();
        for l in &dec.eigenvalues {
            assert_abs_diff_eq!(l.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(l.im, 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(dec.kappa_s, 1.0, epsilon = 1e-12);
        let dec = eig(&DenseMatrix::identity(3), true).unwrap();
        assert_abs_diff_eq!(dec.kappa_s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = DenseMatrix::from_real_row_major(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        for hint in [true, false] {
            let dec = eig(&x, hint).unwrap();
            let mut re: Vec<f64> = dec.eigenvalues.iter().map(|z| z.re).collect();
            re.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_abs_diff_eq!(re[0], -1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(re[1], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut gen = InstanceGenerator::new(11);
        let h = gen.hermitian(6);
        let dec = eig(&h, true).unwrap();
        let residual = (&dec.reconstruct() - &h).spectral_norm();
        assert!(residual <= 1e-10 * h.spectral_norm(), "{residual}");
        assert!((dec.kappa_s - 1.0).abs() < 1e-8);
        assert!(dec.eigenvalues.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn random_general_reconstructs() {
        let mut gen = InstanceGenerator::new(12);
        for n in [2, 3, 6, 9, 16] {
            let a = gen.complex_gaussian(n);
            let dec = eig(&a, false).unwrap();
            let residual = (&dec.reconstruct() - &a).spectral_norm();
            assert!(residual <= 1e-10 * a.spectral_norm(), "n={n} residual={residual}");
        }
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(eig(&m, false), Err(PsfError::NonSquare { .. })));
        let m = DenseMatrix::from_real_row_major(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap();
        assert!(matches!(eig(&m, true), Err(PsfError::NotHermitian { .. })));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let r = DenseMatrix::from_real_row_major(1, 1, &[f64::NAN]);
        assert!(matches!(r, Err(PsfError::NonFinite { .. })));
    }

    #[test]
    fn matfun_closed_forms() {
        let z = DenseMatrix::zeros(3, 3);
        let e = matfun(&z, |x| x.exp()).unwrap();
        assert!((&e - &DenseMatrix::identity(3)).max_abs() < 1e-15);

        let d = DenseMatrix::from_real_diagonal(&[1.0, 2.0]);
        let sq = matfun(&d, |x| x * x).unwrap();
        assert_abs_diff_eq!(sq.get(0, 0).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sq.get(1, 1).re, 4.0, epsilon = 1e-14);

        let ex = matfun(&d, |x| (-x).exp()).unwrap();
        assert_abs_diff_eq!(ex.get(0, 0).re, 0.367_879_441_171_442_3, epsilon = 1e-14);
        assert_abs_diff_eq!(ex.get(1, 1).re, 0.135_335_283_236_612_7, epsilon = 1e-14);
        assert_abs_diff_eq!(ex.get(0, 1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn matfun_reports_non_finite_values() {
        let d = DenseMatrix::from_real_diagonal(&[0.0, 2.0]);
        let r = matfun(&d, |x| Complex64::new(1.0, 0.0) / x);
        assert!(matches!(r, Err(PsfError::NonFinite { .. })));
    }

    #[test]
    fn resolvent_trivial_cases() {
        let b = StateVector::from_complex(vec![c(1.0, 2.0), c(-0.5, 0.0)]);
        let x = resolvent_apply(&DenseMatrix::zeros(2, 2), c(1.0, 0.0), &b).unwrap();
        assert!(x.distance(&b) < 1e-15);

        let a = DenseMatrix::from_real_diagonal(&[2.0]);
        let x = resolvent_apply(&a, c(3.0, 0.0), &StateVector::from_real(&[1.0])).unwrap();
        assert_abs_diff_eq!(x.entries()[0].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn resolvent_matches_spectral_oracle() {
        let mut gen = InstanceGenerator::new(5);
        let a = gen.complex_gaussian(4);
        let z = c(3.1, -2.7);
        let b = gen.state(4);
        let x = resolvent_apply(&a, z, &b).unwrap();
        let oracle = matfun(&a, |l| Complex64::new(1.0, 0.0) / (z - l)).unwrap().apply(&b);
        assert!(x.distance(&oracle) <= 1e-10 * oracle.norm().max(1.0));
    }

    #[test]
    fn resolvent_on_spectrum_is_singular() {
        let a = DenseMatrix::from_real_diagonal(&[0.5, 2.0]);
        let r = resolvent_apply(&a, c(2.0, 0.0), &StateVector::from_real(&[1.0, 1.0]));
        assert!(matches!(r, Err(PsfError::SingularResolvent { .. })));
    }

    #[test]
    fn exact_evolution_cases() {
        let u0 = StateVector::from_real(&[1.0]);
        let h = DenseMatrix::from_real_diagonal(&[1.0]);
        let u = exact_evolution(&h, 2.0, 0.0, &u0).unwrap();
        assert_eq!(u, u0);
        let u = exact_evolution(&h, 2.0, 1.0, &u0).unwrap();
        assert_abs_diff_eq!(u.entries()[0].re, (-1.0f64).exp(), epsilon = 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = DenseMatrix::from_real_diagonal(&[0.0, 1.0]);
        let u = exact_evolution(&h, 0.75, 2.0, &StateVector::from_real(&[s, s])).unwrap();
        assert_abs_diff_eq!(u.entries()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(u.entries()[1].re, s * (-2.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn exact_evolution_psd_clamp_and_domain() {
        let tiny = DenseMatrix::from_real_diagonal(&[-1e-14, 1.0]);
        assert!(exact_evolution(&tiny, 0.5, 1.0, &StateVector::from_real(&[1.0, 0.0])).is_ok());
        let neg = DenseMatrix::from_real_diagonal(&[-1e-3, 1.0]);
        assert!(matches!(
            exact_evolution(&neg, 0.5, 1.0, &StateVector::from_real(&[1.0, 0.0])),
            Err(PsfError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn resolvent_sup_cases() {
        let s = resolvent_sup_on_circle(&DenseMatrix::zeros(2, 2), 1.0).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-14);
        assert!(s.exact);
        let s = resolvent_sup_on_circle(&DenseMatrix::from_real_diagonal(&[0.5]), 1.0).unwrap();
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-14);
        let d = DenseMatrix::from_diagonal(&[c(0.3, 0.0), c(0.0, 0.8)]);
        let s = resolvent_sup_on_circle(&d, 1.0).unwrap();
        assert_abs_diff_eq!(s.value, 5.0, epsilon = 1e-12);

        let on = DenseMatrix::from_diagonal(&[c(0.0, 1.0)]);
        assert!(matches!(
            resolvent_sup_on_circle(&on, 1.0),
            Err(PsfError::EigenvalueOnCircle { .. })
        ));
    }

    #[test]
    fn non_normal_sup_is_tagged_bound() {
        let a = DenseMatrix::from_real_row_major(2, 2, &[0.1, 0.5, 0.0, 0.2]).unwrap();
        let s = resolvent_sup_on_circle(&a, 1.0).unwrap();
        assert!(!s.exact);
        // the bound dominates the sampled true supremum
        let mut sampled = 0.0f64;
        for k in 0..512 {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 512.0);
            let r = matfun(&a, |l| Complex64::new(1.0, 0.0) / (z - l)).unwrap();
            sampled = sampled.max(r.spectral_norm());
        }
        assert!(s.value >= sampled * (1.0 - 1e-9));
    }
}
