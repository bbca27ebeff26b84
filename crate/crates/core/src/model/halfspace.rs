use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::params::TAU_LIN;

/// The closed halfspace `{z : <normal, z> <= offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: DVector<f64>, offset: f64) -> Result<Self> {
        if normal.amax() <= TAU_LIN || normal.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "halfspace normal must be nonzero and finite".into(),
            ));
        }
        if offset.is_nan() {
            return Err(Error::InvalidInput("halfspace offset is NaN".into()));
        }
        Ok(Halfspace { normal, offset })
    }

    pub fn from_slice(normal: &[f64], offset: f64) -> Result<Self> {
        Self::new(DVector::from_column_slice(normal), offset)
    }

    /// A halfspace that contains nothing of interest: `z_1 <= -inf`.
    ///
    /// Returned by oracles whose set is certified empty; every point violates it.
    pub fn empty(dim: usize) -> Self {
        let mut normal = DVector::zeros(dim);
        normal[0] = 1.0;
        Halfspace {
            normal,
            offset: f64::NEG_INFINITY,
        }
    }

    pub fn is_empty_certificate(&self) -> bool {
        self.offset == f64::NEG_INFINITY
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Scales to a unit Euclidean normal.
    pub fn normalized(self) -> Self {
        let norm = self.normal.norm();
        if self.is_empty_certificate() || norm == 0.0 {
            return self;
        }
        Halfspace {
            normal: self.normal / norm,
            offset: self.offset / norm,
        }
    }

    /// `<normal, z> - offset`; positive means violated.
    pub fn excess(&self, z: &DVector<f64>) -> f64 {
        self.normal.dot(z) - self.offset
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.excess(z) <= tol
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_normal_rejected() {
        assert!(Halfspace::from_slice(&[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn normalization_preserves_the_set() {
        let h = Halfspace::from_slice(&[3.0, 4.0], 10.0)
            .unwrap()
            .normalized();
        assert!((h.normal.norm() - 1.0).abs() < 1e-15);
        assert!((h.offset - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_certificate_excludes_everything() {
        let h = Halfspace::empty(3);
        assert!(!h.contains(&DVector::from_vec(vec![-1e300, 0.0, 0.0]), 0.0));
        assert!(h.clone().normalized().is_empty_certificate());
    }
}
