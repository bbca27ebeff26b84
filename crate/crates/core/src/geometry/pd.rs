use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::params::TAU_LIN;

/// Symmetric positive definite matrix with a cached lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct PdMatrix {
    matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
}

impl PartialEq for PdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl PdMatrix {
    /// Validates symmetry (relative to the largest entry) and factorizes.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("matrix has non-finite entries".into()));
        }
        let scale = matrix.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > TAU_LIN * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Self::factor(symmetrize(matrix))
            .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))
    }

    /// Like [`PdMatrix::new`] but adds diagonal jitter `1e-12 * trace / k`
    /// (growing tenfold per attempt) when the factorization fails. Returns
    /// whether jitter was needed.
    pub fn new_with_jitter(matrix: DMatrix<f64>) -> Result<(Self, bool)> {
        let matrix = symmetrize(matrix);
        if let Some(pd) = Self::factor(matrix.clone()) {
            return Ok((pd, false));
        }
        let k = matrix.nrows().max(1) as f64;
        let mut jitter = 1e-12 * matrix.trace().abs().max(f64::MIN_POSITIVE) / k;
        for _ in 0..8 {
            let mut m = matrix.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += jitter;
            }
            if let Some(pd) = Self::factor(m) {
                log::warn!("shape matrix needed diagonal jitter {jitter:e}");
                return Ok((pd, true));
            }
            jitter *= 10.0;
        }
        Err(Error::Numeric(
            "shape matrix lost positive definiteness".into(),
        ))
    }

    fn factor(matrix: DMatrix<f64>) -> Option<Self> {
        let chol = nalgebra::Cholesky::new(matrix.clone())?;
        let lower = chol.l();
        if lower
            .diagonal()
            .iter()
            .any(|&p| !(p > 0.0) || !p.is_finite())
        {
            return None;
        }
        Some(PdMatrix { matrix, lower })
    }

    pub fn identity(k: usize) -> Self {
        Self::scaled_identity(k, 1.0)
    }

    pub fn scaled_identity(k: usize, s: f64) -> Self {
        let m = DMatrix::from_diagonal_element(k, k, s);
        let l = DMatrix::from_diagonal_element(k, k, s.sqrt());
        PdMatrix {
            matrix: m,
            lower: l,
        }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn from_rows(k: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != k * k {
            return Err(Error::Dimension {
                expected: k * k,
                got: row_major.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(k, k, row_major))
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// `A^{-1} v`.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        let y = self
            .lower
            .solve_lower_triangular(v)
            .expect("cholesky factor has positive pivots");
        self.lower
            .tr_solve_lower_triangular(&y)
            .expect("cholesky factor has positive pivots")
    }

    /// `v^T A^{-1} v`, the squared norm defined by `A`.
    pub fn inv_quad(&self, v: &DVector<f64>) -> f64 {
        let y = self
            .lower
            .solve_lower_triangular(v)
            .expect("cholesky factor has positive pivots");
        y.norm_squared()
    }

    /// `v^T A v`.
    pub fn quad(&self, v: &DVector<f64>) -> f64 {
        (self.lower.transpose() * v).norm_squared()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let k = self.order();
        let mut inv = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut e = DVector::zeros(k);
            e[j] = 1.0;
            inv.set_column(j, &self.solve(&e));
        }
        symmetrize(inv)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|p| p.ln()).sum::<f64>()
    }

    /// Leading `n x n` principal submatrix.
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.order() {
            return Err(Error::InvalidInput(format!(
                "leading block of order {n} requested from order {}",
                self.order()
            )));
        }
        // The leading block of L is the Cholesky factor of the leading block of A.
        Ok(PdMatrix {
            matrix: self.matrix.view((0, 0), (n, n)).into_owned(),
            lower: self.lower.view((0, 0), (n, n)).into_owned(),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        assert!(s > 0.0);
        PdMatrix {
            matrix: &self.matrix * s,
            lower: &self.lower * s.sqrt(),
        }
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        assert!(PdMatrix::from_rows(2, &[1.0, 0.5, 0.0, 1.0]).is_err());
        assert!(PdMatrix::from_rows(2, &[1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(PdMatrix::from_rows(2, &[2.0, 1.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn quadratic_forms_agree_with_dense_inverse() {
        let a = PdMatrix::from_rows(3, &[4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0]).unwrap();
        let v = DVector::from_vec(vec![0.3, -1.2, 2.0]);
        let inv = a.matrix().clone().try_inverse().unwrap();
        let direct = (v.transpose() * &inv * &v)[0];
        assert!((a.inv_quad(&v) - direct).abs() < 1e-12);
        assert!((a.quad(&v) - (v.transpose() * a.matrix() * &v)[0]).abs() < 1e-12);
        assert!((a.log_det() - a.matrix().determinant().ln()).abs() < 1e-12);
        assert!((a.inverse() - inv).amax() < 1e-12);
    }

    #[test]
    fn leading_block_factor_is_consistent() {
        let a = PdMatrix::from_rows(3, &[4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0]).unwrap();
        let b = a.leading(2).unwrap();
        let fresh = PdMatrix::from_rows(2, &[4.0, 1.0, 1.0, 3.0]).unwrap();
        assert!((b.lower() - fresh.lower()).amax() < 1e-12);
        assert!(a.leading(0).is_err());
        assert!(a.leading(4).is_err());
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (pd, jittered) = PdMatrix::new_with_jitter(m).unwrap();
        assert!(jittered);
        assert!(pd.log_det().is_finite());
    }
}
