use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::{Halfspace, Polyhedron};

/// A finite union of polyhedra covering every mixed-integer point.
#[derive(Debug, Clone, PartialEq)]
pub struct Disjunction {
    pub terms: Vec<Polyhedron>,
}

impl Disjunction {
    /// `{x_i <= pi0} ∪ {x_i >= pi0 + 1}`.
    pub fn variable(dim: usize, n: usize, i: usize, pi0: i64) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidInput(format!(
                "variable disjunction on coordinate {i}, but only {n} are integer"
            )));
        }
        let mut pi = vec![0; n];
        pi[i] = 1;
        Self::split(dim, &pi, pi0)
    }

    /// `{<pi, x> <= pi0} ∪ {<pi, x> >= pi0 + 1}` with `pi` on the integer
    /// coordinates.
    pub fn split(dim: usize, pi: &[i64], pi0: i64) -> Result<Self> {
        if pi.len() > dim || pi.iter().all(|&v| v == 0) {
            return Err(Error::InvalidInput(
                "split direction must be a nonzero integer vector on the integer coordinates"
                    .into(),
            ));
        }
        let mut a = DVector::zeros(dim);
        for (j, &v) in pi.iter().enumerate() {
            a[j] = v as f64;
        }
        let left = Polyhedron::new(dim, vec![Halfspace::new(a.clone(), pi0 as f64)?])?;
        let right = Polyhedron::new(dim, vec![Halfspace::new(-a, -(pi0 as f64 + 1.0))?])?;
        Ok(Disjunction {
            terms: vec![left, right],
        })
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.terms.iter().any(|t| t.contains(z, tol))
    }
}

/// A halfspace valid for `conv ∪_t (P ∩ Q_t)` and violated by `zhat`, or
/// `None` when `zhat` lies in that hull.
///
/// Solves the cut-generating LP: maximize `<alpha, zhat> - beta` over
/// `alpha = A_t^T u_t`, `beta >= b_t^T u_t`, `u_t >= 0`, `sum u <= 1`.
pub fn disjunctive_cut(
    poly: &Polyhedron,
    disj: &Disjunction,
    zhat: &DVector<f64>,
) -> Result<Option<Halfspace>> {
    let k = poly.dim();
    crate::error::check_dim(k, zhat.len())?;
    if disj.contains(zhat, 0.0) {
        return Err(Error::InvalidInput(
            "the point already satisfies a term of the disjunction".into(),
        ));
    }
    let systems: Vec<Vec<&Halfspace>> = disj
        .terms
        .iter()
        .map(|t| poly.rows().iter().chain(t.rows()).collect())
        .collect();
    // variables: alpha (k, free), beta (1, free), then every u_t
    let nu: usize = systems.iter().map(|s| s.len()).sum();
    let nvar = k + 1 + nu;
    let mut lp = LinearProgram::new(nvar);
    for j in 0..=k {
        lp.set_free(j);
    }
    let mut obj = vec![0.0; nvar];
    for j in 0..k {
        obj[j] = -zhat[j];
    }
    obj[k] = 1.0;
    lp.set_objective(&obj)?;
    let mut base = k + 1;
    for sys in &systems {
        for j in 0..k {
            let mut row = vec![0.0; nvar];
            row[j] = 1.0;
            for (l, h) in sys.iter().enumerate() {
                row[base + l] = -h.normal[j];
            }
            lp.add_row(&row, Relation::Eq, 0.0)?;
        }
        let mut row = vec![0.0; nvar];
        row[k] = -1.0;
        for (l, h) in sys.iter().enumerate() {
            if !h.offset.is_finite() {
                return Err(Error::InvalidInput("infinite row offset".into()));
            }
            row[base + l] = h.offset;
        }
        lp.add_row(&row, Relation::Le, 0.0)?;
        base += sys.len();
    }
    let mut row = vec![0.0; nvar];
    for v in row.iter_mut().skip(k + 1) {
        *v = 1.0;
    }
    lp.add_row(&row, Relation::Le, 1.0)?;
    let sol = match lp.solve()? {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return Err(Error::Numeric("cut LP infeasible".into())),
        LpOutcome::Unbounded => return Err(Error::Numeric("cut LP unbounded".into())),
    };
    if -sol.value <= 1e-7 {
        return Ok(None);
    }
    let alpha = DVector::from_column_slice(&sol.x[..k]);
    if alpha.amax() <= 1e-9 {
        // every term is empty on P: nothing survives
        return Ok(Some(Halfspace::empty(k)));
    }
    Ok(Some(
        Halfspace {
            normal: alpha,
            offset: sol.x[k],
        }
        .normalized(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branchcut::instances::{hidden_triangle_instance, solve_lp};

    #[test]
    fn unit_square_needs_no_cut() {
        let poly = Polyhedron::from_box(
            &DVector::from_column_slice(&[0.0, 0.0]),
            &DVector::from_column_slice(&[1.0, 1.0]),
        )
        .unwrap();
        let d = Disjunction::variable(2, 2, 0, 0).unwrap();
        let z = DVector::from_column_slice(&[0.5, 1.0]);
        assert_eq!(disjunctive_cut(&poly, &d, &z).unwrap(), None);
    }

    #[test]
    fn point_in_disjunction_rejected() {
        let poly = Polyhedron::from_box(
            &DVector::from_column_slice(&[0.0, 0.0]),
            &DVector::from_column_slice(&[1.0, 1.0]),
        )
        .unwrap();
        let d = Disjunction::variable(2, 2, 0, 0).unwrap();
        let z = DVector::from_column_slice(&[0.0, 0.5]);
        assert!(matches!(
            disjunctive_cut(&poly, &d, &z),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn triangle_split_cut() {
        let h = 5;
        let inst = hidden_triangle_instance(h).unwrap();
        let d = Disjunction::split(2, &[1, 0], 0).unwrap();
        let z = DVector::from_column_slice(&[0.5, h as f64]);
        let cut = disjunctive_cut(&inst.poly, &d, &z).unwrap().unwrap();
        assert!(cut.excess(&z) > 0.0);
        for p in [[0.0, 0.0], [1.0, 0.0]] {
            assert!(cut.excess(&DVector::from_column_slice(&p)) <= 1e-9);
        }
        let poly = inst.poly.clone().with_row(cut).unwrap();
        let v = -solve_lp(&poly, &inst.c).unwrap().optimal().unwrap().value;
        assert!(v < h as f64 - 1e-6);
    }
}
