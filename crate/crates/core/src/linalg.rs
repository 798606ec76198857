//! Dense complex kernels used by the pencil: truncated SVD, least squares
//! and eigenvalues of small square matrices.
//!
//! Matrices are nalgebra values; the factorizations run in faer, whose
//! complex SVD stays accurate when singular values cluster.
//!
//! Tolerances are relative to the largest singular value of the operand.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type MatrixC = DMatrix<Complex64>;
pub type VectorC = DVector<Complex64>;

/// Condition number above which amplitude solves are flagged.
pub const ILL_CONDITIONED: f64 = 1e8;

/// `r` dominant singular triplets, singular values nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdTruncation {
    /// rows x r, orthonormal columns.
    pub left_vectors: MatrixC,
    pub singular_values: Vec<f64>,
    /// cols x r, orthonormal columns (the matrix V of A = U S V^H).
    pub right_vectors: MatrixC,
}

fn check_finite(a: &MatrixC) -> Result<()> {
    if a.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

fn to_faer(a: &MatrixC) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD `A = U diag(s) V^H`, singular values nonincreasing.
fn thin_svd(a: &MatrixC) -> Result<(MatrixC, Vec<f64>, MatrixC)> {
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::invalid(format!("SVD did not converge: {e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    Ok((
        MatrixC::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
        (0..s.nrows()).map(|i| s[i].re).collect(),
        MatrixC::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
    ))
}

/// Full singular spectrum, nonincreasing.
pub fn singular_values(a: &MatrixC) -> Result<Vec<f64>> {
    check_finite(a)?;
    if a.is_empty() {
        return Err(Error::invalid("empty matrix"));
    }
    to_faer(a)
        .singular_values()
        .map_err(|e| Error::invalid(format!("SVD did not converge: {e:?}")))
}

/// Thin decomposition, truncated to rank `r`.
pub fn svd_truncated(a: &MatrixC, r: usize) -> Result<SvdTruncation> {
    check_finite(a)?;
    let k = a.nrows().min(a.ncols());
    if r == 0 || r > k {
        return Err(Error::invalid(format!(
            "truncation rank {r} outside 1..={k} for a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let (u, s, v) = thin_svd(a)?;
    Ok(SvdTruncation {
        left_vectors: u.columns(0, r).into_owned(),
        singular_values: s[..r].to_vec(),
        right_vectors: v.columns(0, r).into_owned(),
    })
}

/// Minimum-norm least-squares solution with conditioning diagnostics.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: MatrixC,
    /// `sigma_max / sigma_min` over all singular values of A (infinite when
    /// A is rank deficient in exact arithmetic).
    pub condition: f64,
    pub rank: usize,
}

impl LstsqSolution {
    pub fn rank_deficient(&self, cols: usize) -> bool {
        self.rank < cols
    }

    pub fn ill_conditioned(&self) -> bool {
        self.condition > ILL_CONDITIONED
    }

    pub fn column(&self, j: usize) -> VectorC {
        self.x.column(j).into_owned()
    }
}

/// Solves `min ||A X - B||_F` column by column through the SVD of A.
/// Singular values below `max(rows, cols) * eps * sigma_max` are treated as
/// zero, giving the minimum-norm solution.
pub fn lstsq_multi(a: &MatrixC, b: &MatrixC) -> Result<LstsqSolution> {
    check_finite(a)?;
    check_finite(b)?;
    if a.is_empty() {
        return Err(Error::invalid("empty system matrix"));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::invalid(format!(
            "row mismatch: A has {} rows, B has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let (u, s, v) = thin_svd(a)?;
    let smax = s[0];
    if smax == 0.0 {
        return Ok(LstsqSolution {
            x: MatrixC::zeros(a.ncols(), b.ncols()),
            condition: f64::INFINITY,
            rank: 0,
        });
    }
    let smin = s[s.len() - 1];
    let cutoff = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax;

    // x = V diag(1/s) U^H b over retained singular values.
    let mut ub = u.adjoint() * b;
    let mut rank = 0;
    for (i, &si) in s.iter().enumerate() {
        let inv = if si > cutoff {
            rank += 1;
            1.0 / si
        } else {
            0.0
        };
        ub.row_mut(i).scale_mut(inv);
    }
    let x = v * ub;
    let condition = if a.nrows() < a.ncols() || smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    };
    Ok(LstsqSolution { x, condition, rank })
}

pub fn lstsq(a: &MatrixC, b: &VectorC) -> Result<LstsqSolution> {
    let bm = MatrixC::from_column_slice(b.len(), 1, b.as_slice());
    lstsq_multi(a, &bm)
}

/// All eigenvalues of a square complex matrix, unordered.
pub fn eig_square(a: &MatrixC) -> Result<Vec<Complex64>> {
    if !a.is_square() || a.is_empty() {
        return Err(Error::invalid(format!(
            "eigenvalues need a nonempty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    check_finite(a)?;
    if a.nrows() == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    to_faer(a)
        .eigenvalues()
        .map_err(|e| Error::invalid(format!("eigenvalue iteration did not converge: {e:?}")))
}
