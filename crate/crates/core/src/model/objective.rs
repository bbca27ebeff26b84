use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::model::oracle::FirstOrderAnswer;
use crate::model::params::TAU_LIN;

/// Built-in convex objectives.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Linear(DVector<f64>),
    /// `max_i <a_i, z> + b_i`.
    MaxAffine(Vec<(DVector<f64>, f64)>),
    /// `1/2 z^T Q z + <q, z> + r` with `Q` symmetric positive semidefinite.
    Quadratic {
        q_mat: DMatrix<f64>,
        q: DVector<f64>,
        r: f64,
    },
    Constant {
        value: f64,
        dim: usize,
    },
}

impl Objective {
    pub fn linear(c: &[f64]) -> Self {
        Objective::Linear(DVector::from_column_slice(c))
    }

    pub fn max_affine(pieces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let o = Objective::MaxAffine(
            pieces
                .into_iter()
                .map(|(a, b)| (DVector::from_vec(a), b))
                .collect(),
        );
        o.validate()?;
        Ok(o)
    }

    pub fn quadratic(q_mat: DMatrix<f64>, q: DVector<f64>) -> Result<Self> {
        let o = Objective::Quadratic { q_mat, q, r: 0.0 };
        o.validate()?;
        Ok(o)
    }

    /// `1/2 (z - c)^T Q (z - c)`.
    pub fn centered_quadratic(q_mat: DMatrix<f64>, center: &[f64]) -> Result<Self> {
        let c = DVector::from_column_slice(center);
        let q = -(&q_mat * &c);
        let r = 0.5 * c.dot(&(&q_mat * &c));
        let o = Objective::Quadratic { q_mat, q, r };
        o.validate()?;
        Ok(o)
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Objective::Constant { value, dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Objective::Linear(c) => c.len(),
            Objective::MaxAffine(p) => p.first().map_or(0, |(a, _)| a.len()),
            Objective::Quadratic { q, .. } => q.len(),
            Objective::Constant { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Objective::Linear(c) => {
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("non-finite linear objective".into()));
                }
            }
            Objective::MaxAffine(pieces) => {
                if pieces.is_empty() {
                    return Err(Error::InvalidInput(
                        "max-affine objective needs a piece".into(),
                    ));
                }
                let k = pieces[0].0.len();
                for (a, b) in pieces {
                    check_dim(k, a.len())?;
                    if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidInput("non-finite max-affine piece".into()));
                    }
                }
            }
            Objective::Quadratic { q_mat, q, r } => {
                let k = q.len();
                if q_mat.nrows() != k || q_mat.ncols() != k {
                    return Err(Error::Dimension {
                        expected: k,
                        got: q_mat.nrows(),
                    });
                }
                let scale = q_mat.amax().max(1.0);
                if !r.is_finite() {
                    return Err(Error::InvalidInput("non-finite quadratic offset".into()));
                }
                if (q_mat - q_mat.transpose()).amax() > TAU_LIN * scale {
                    return Err(Error::InvalidInput(
                        "quadratic matrix is not symmetric".into(),
                    ));
                }
                let eig = SymmetricEigen::new(q_mat.clone());
                if eig.eigenvalues.iter().any(|&l| l < -TAU_LIN * scale) {
                    return Err(Error::InvalidInput(
                        "quadratic matrix is not positive semidefinite".into(),
                    ));
                }
            }
            Objective::Constant { value, dim } => {
                if !value.is_finite() || *dim == 0 {
                    return Err(Error::InvalidInput("bad constant objective".into()));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, z: &DVector<f64>) -> Result<f64> {
        Ok(self.first_order(z)?.value)
    }

    pub fn first_order(&self, z: &DVector<f64>) -> Result<FirstOrderAnswer> {
        check_dim(self.dim(), z.len())?;
        Ok(match self {
            Objective::Linear(c) => FirstOrderAnswer {
                value: c.dot(z),
                subgradient: c.clone(),
            },
            Objective::MaxAffine(pieces) => {
                // lowest index among the maximizers
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, (a, b)) in pieces.iter().enumerate() {
                    let v = a.dot(z) + b;
                    if v > best_val {
                        best_val = v;
                        best = i;
                    }
                }
                FirstOrderAnswer {
                    value: best_val,
                    subgradient: pieces[best].0.clone(),
                }
            }
            Objective::Quadratic { q_mat, q, r } => {
                let qz = q_mat * z;
                FirstOrderAnswer {
                    value: 0.5 * z.dot(&qz) + q.dot(z) + r,
                    subgradient: qz + q,
                }
            }
            Objective::Constant { value, dim } => FirstOrderAnswer {
                value: *value,
                subgradient: DVector::zeros(*dim),
            },
        })
    }

    /// A Lipschitz constant over the Euclidean ball of the given radius.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        match self {
            Objective::Linear(c) => c.norm(),
            Objective::MaxAffine(p) => p.iter().map(|(a, _)| a.norm()).fold(0.0, f64::max),
            Objective::Quadratic { q_mat, q, .. } => {
                let spec = SymmetricEigen::new(q_mat.clone())
                    .eigenvalues
                    .iter()
                    .fold(0.0_f64, |m, l| m.max(l.abs()));
                spec * radius + q.norm()
            }
            Objective::Constant { .. } => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn linear_first_order() {
        let a = Objective::linear(&[1.0, 2.0])
            .first_order(&v(&[3.0, 4.0]))
            .unwrap();
        assert_eq!(a.value, 11.0);
        assert_eq!(a.subgradient, v(&[1.0, 2.0]));
    }

    #[test]
    fn max_affine_ties_take_first_piece() {
        let o = Objective::max_affine(vec![(vec![1.0], 0.0), (vec![-1.0], 0.0)]).unwrap();
        let a = o.first_order(&v(&[0.0])).unwrap();
        assert_eq!(a.value, 0.0);
        assert_eq!(a.subgradient, v(&[1.0]));
    }

    #[test]
    fn quadratic_convention() {
        let o = Objective::quadratic(DMatrix::from_element(1, 1, 2.0), v(&[0.0])).unwrap();
        let a = o.first_order(&v(&[2.0])).unwrap();
        assert_eq!(a.value, 4.0);
        assert_eq!(a.subgradient, v(&[4.0]));
    }

    #[test]
    fn rejects_indefinite_quadratic_and_empty_max() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(Objective::quadratic(m, v(&[0.0, 0.0])).is_err());
        assert!(Objective::max_affine(vec![]).is_err());
    }

    #[test]
    fn dimension_checked() {
        assert!(Objective::linear(&[1.0])
            .first_order(&v(&[1.0, 2.0]))
            .is_err());
    }
}
