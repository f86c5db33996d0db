//! Staggered difference operators on Dirichlet grids and the Dirac-like
//! root operator built from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PsfError, Result};
use crate::spectral::DenseMatrix;

/// Largest interior grid size handled densely.
pub const MAX_GRID_POINTS: usize = 4096;
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    pub h: f64,
}

impl GridSpec {
    /// Mesh size defaults to 1/(n+1), the unit interval with Dirichlet ends.
    pub fn new(d: usize, n: usize, h: Option<f64>) -> Result<Self> {
        if d == 0 {
            return Err(PsfError::invalid("d", "must be at least 1"));
        }
        if n == 0 {
            return Err(PsfError::invalid("n", "must be at least 1"));
        }
        let points = (n as f64).powi(d as i32);
        if points > MAX_GRID_POINTS as f64 {
            return Err(PsfError::invalid(
                "grid",
                format!("n^d = {points} exceeds {MAX_GRID_POINTS}"),
            ));
        }
        let h = h.unwrap_or(1.0 / (n as f64 + 1.0));
        if !(h > 0.0 && h.is_finite()) {
            return Err(PsfError::invalid("h", format!("must be positive, got {h}")));
        }
        Ok(GridSpec { d, n, h })
    }

    pub fn points(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Nominal spectral-norm proxy 4d/h² of the Laplacian.
    pub fn laplacian_scale(&self) -> f64 {
        4.0 * self.d as f64 / (self.h * self.h)
    }

    /// Multi-index of a flat grid index, most significant axis first.
    pub fn coordinates(&self, mut index: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        for axis in (0..self.d).rev() {
            c[axis] = index % self.n;
            index /= self.n;
        }
        c
    }
}

/// (n+1)×n matrix with -1/h on the diagonal and +1/h on the subdiagonal.
pub fn difference_operator(n: usize, h: f64) -> DenseMatrix {
    let mut entries = vec![0.0; (n + 1) * n];
    for j in 0..n {
        entries[j * n + j] = -1.0 / h;
        entries[(j + 1) * n + j] = 1.0 / h;
    }
    DenseMatrix::from_real_row_major(n + 1, n, &entries).expect("finite stencil")
}

/// Vertical stack of I ⊗ .. ⊗ L' ⊗ .. ⊗ I, one block per axis.
pub fn gradient_stack(g: &GridSpec) -> DenseMatrix {
    let lp = difference_operator(g.n, g.h);
    let eye = DenseMatrix::identity(g.n);
    let blocks: Vec<DenseMatrix> = (0..g.d)
        .map(|axis| {
            let mut acc: Option<DenseMatrix> = None;
            for k in 0..g.d {
                let factor = if k == axis { &lp } else { &eye };
                acc = Some(match acc {
                    None => factor.clone(),
                    Some(m) => m.kron(factor),
                });
            }
            acc.expect("d >= 1")
        })
        .collect();
    let rows: usize = blocks.iter().map(|b| b.rows()).sum();
    let cols = g.points();
    let mut out = nalgebra::DMatrix::<Complex64>::zeros(rows, cols);
    let mut offset = 0;
    for b in &blocks {
        out.view_mut((offset, 0), (b.rows(), cols)).copy_from(b.as_matrix());
        offset += b.rows();
    }
    DenseMatrix::from_matrix(out).expect("finite")
}

/// L†L, the Dirichlet Laplacian -Δ.
pub fn laplacian(g: &GridSpec) -> DenseMatrix {
    let l = gradient_stack(g);
    &l.adjoint() * &l
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracResiduals {
    pub hermitian: f64,
    /// H² against blockdiag(L†L, LL†).
    pub square: f64,
    /// Top-left block of H⁴ against (L†L)².
    pub fourth: f64,
}

#[derive(Clone, Debug)]
pub struct DiracOperator {
    pub l: DenseMatrix,
    pub h: DenseMatrix,
    pub residuals: DiracResiduals,
}

impl DiracOperator {
    /// Columns of L, the size of the top block.
    pub fn top_dim(&self) -> usize {
        self.l.cols()
    }

    pub fn square(&self) -> DenseMatrix {
        &self.h * &self.h
    }
}

fn relative_gap(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1.0)
}

/// H = [[0, -i L†], [i L, 0]], with its structural identities checked.
pub fn dirac_operator(l: &DenseMatrix) -> Result<DiracOperator> {
    let (r, c) = (l.rows(), l.cols());
    let n = r + c;
    let i = Complex64::i();
    let mut h = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    h.view_mut((0, c), (c, r)).copy_from(l.adjoint().scale(-i).as_matrix());
    h.view_mut((c, 0), (r, c)).copy_from(l.scale(i).as_matrix());
    let h = DenseMatrix::from_matrix(h)?;

    let ltl = &l.adjoint() * l;
    let llt = l * &l.adjoint();
    let h2 = &h * &h;
    let mut expected = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    expected.view_mut((0, 0), (c, c)).copy_from(ltl.as_matrix());
    expected.view_mut((c, c), (r, r)).copy_from(llt.as_matrix());
    let expected = DenseMatrix::from_matrix(expected)?;
    let h4 = &h2 * &h2;
    let residuals = DiracResiduals {
        hermitian: h.hermitian_residual(),
        square: relative_gap(&h2, &expected),
        fourth: relative_gap(&h4.block(0, 0, c, c), &(&ltl * &ltl)),
    };
    for (what, value) in [
        ("Dirac operator is Hermitian", residuals.hermitian),
        ("H^2 = blockdiag(L^H L, L L^H)", residuals.square),
        ("top block of H^4 = (L^H L)^2", residuals.fourth),
    ] {
        if value > STRUCTURE_TOL {
            return Err(PsfError::InvariantViolation { what, residual: value });
        }
    }
    Ok(DiracOperator {
        l: l.clone(),
        h,
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingStats {
    /// max |A_ii| of A = 2H/(4d/h²) - I.
    pub diag_max: f64,
    /// Smallest and largest row 1-norm over interior grid points.
    pub interior_row_l1: Option<(f64, f64)>,
    pub boundary_row_l1_max: Option<f64>,
    pub interior_rows: usize,
    pub boundary_rows: usize,
}

/// The shifted encoding A = 2H/(4d/h²) - I.
pub fn shifted_encoding(h: &DenseMatrix, g: &GridSpec) -> Result<DenseMatrix> {
    if h.rows() != g.points() || !h.is_square() {
        return Err(PsfError::DimensionMismatch {
            expected: g.points(),
            actual: h.rows(),
        });
    }
    let scaled = h.scale(Complex64::new(2.0 / g.laplacian_scale(), 0.0));
    Ok(&scaled - &DenseMatrix::identity(h.rows()))
}

pub fn shifted_encoding_stats(h: &DenseMatrix, g: &GridSpec) -> Result<EncodingStats> {
    let a = shifted_encoding(h, g)?;
    let n = a.rows();
    let diag_max = (0..n).map(|i| a.get(i, i).norm()).fold(0.0, f64::max);
    let (mut interior, mut boundary) = (Vec::new(), Vec::new());
    for i in 0..n {
        let l1: f64 = (0..n).map(|j| a.get(i, j).norm()).sum();
        let inside = g.coordinates(i).iter().all(|&c| c > 0 && c + 1 < g.n);
        if inside {
            interior.push(l1);
        } else {
            boundary.push(l1);
        }
    }
    let range = |v: &[f64]| {
        (!v.is_empty()).then(|| {
            (
                v.iter().copied().fold(f64::INFINITY, f64::min),
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        })
    };
    Ok(EncodingStats {
        diag_max,
        interior_row_l1: range(&interior),
        boundary_row_l1_max: range(&boundary).map(|r| r.1),
        interior_rows: interior.len(),
        boundary_rows: boundary.len(),
    })
}
