use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::halfspace::Halfspace;

/// Finite intersection of halfspaces in a fixed dimension.
///
/// An empty row list is the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("polyhedron of dimension 0".into()));
        }
        for r in &rows {
            r.check_dim(dim)?;
        }
        Ok(Polyhedron { dim, rows })
    }

    /// `{z : A z <= b}` from dense row-major rows.
    pub fn from_rows(dim: usize, rows: &[(Vec<f64>, f64)]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|(a, b)| {
                check_dim(dim, a.len())?;
                Halfspace::from_slice(a, *b)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, rows)
    }

    /// The box `lower <= z <= upper` as rows `z_i <= u_i`, `-z_i <= -l_i`.
    pub fn from_box(lower: &DVector<f64>, upper: &DVector<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        let k = lower.len();
        let mut rows = Vec::with_capacity(2 * k);
        for i in 0..k {
            let mut e = DVector::zeros(k);
            e[i] = 1.0;
            rows.push(Halfspace::new(e.clone(), upper[i])?);
            rows.push(Halfspace::new(-e, -lower[i])?);
        }
        Self::new(k, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Halfspace) -> Result<()> {
        row.check_dim(self.dim)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn with_row(mut self, row: Halfspace) -> Result<Self> {
        self.push(row)?;
        Ok(self)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Self::new(self.dim, rows)
    }

    /// Row with the largest violation measured in Euclidean distance, or
    /// `None` when every row holds within `tol`. Ties go to the lowest index.
    pub fn most_violated(&self, z: &DVector<f64>, tol: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.rows.iter().enumerate() {
            let dist = if r.is_empty_certificate() {
                f64::INFINITY
            } else {
                r.excess(z) / r.normal.norm()
            };
            if dist > tol && best.map_or(true, |(_, b)| dist > b) {
                best = Some((i, dist));
            }
        }
        best
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.most_violated(z, tol).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rows_and_violation_order() {
        let p = Polyhedron::from_box(
            &DVector::from_vec(vec![-1.0, -1.0]),
            &DVector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(p.len(), 4);
        let z = DVector::from_vec(vec![2.0, 2.0]);
        // equal violations: lowest index wins
        assert_eq!(p.most_violated(&z, 0.0).unwrap().0, 0);
        let z = DVector::from_vec(vec![2.0, -3.0]);
        assert_eq!(p.most_violated(&z, 0.0).unwrap().0, 3);
        assert!(p.contains(&DVector::from_vec(vec![0.5, -0.5]), 0.0));
    }
}
