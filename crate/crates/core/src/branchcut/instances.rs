use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::Polyhedron;

/// `min <c, z>` over `poly ∩ (Z^n x R^d)`.
///
/// `maximize` only affects reporting: the stored objective is already negated
/// for maximization problems.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance {
    pub name: String,
    pub poly: Polyhedron,
    pub c: DVector<f64>,
    pub n: usize,
    pub d: usize,
    pub maximize: bool,
}

impl MilpInstance {
    pub fn new(poly: Polyhedron, c: DVector<f64>, n: usize, d: usize) -> Result<Self> {
        crate::error::check_dim(n + d, poly.dim())?;
        crate::error::check_dim(n + d, c.len())?;
        Ok(MilpInstance {
            name: "milp".into(),
            poly,
            c,
            n,
            d,
            maximize: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.n + self.d
    }

    /// Objective value in the problem's own sense.
    pub fn reported(&self, min_value: f64) -> f64 {
        if self.maximize {
            -min_value
        } else {
            min_value
        }
    }
}

/// `min <c, z>` over a polyhedron with free variables.
pub fn solve_lp(poly: &Polyhedron, c: &DVector<f64>) -> Result<LpOutcome> {
    let k = poly.dim();
    let mut lp = LinearProgram::new(k);
    lp.set_all_free();
    lp.set_objective(c.as_slice())?;
    for r in poly.rows() {
        if r.is_empty_certificate() {
            return Ok(LpOutcome::Infeasible);
        }
        lp.add_row(r.normal.as_slice(), Relation::Le, r.offset)?;
    }
    lp.solve()
}

/// `max sum x_i` s.t. `sum x_i <= n/2`, `0 <= x <= 1`, `x` integral.
pub fn jeroslow_instance(n: usize) -> Result<MilpInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("Jeroslow instances need n >= 2, got {n}"),
        });
    }
    let mut rows = vec![(vec![1.0; n], n as f64 / 2.0)];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e.clone(), 1.0));
        e[i] = -1.0;
        rows.push((e, 0.0));
    }
    let poly = Polyhedron::from_rows(n, &rows)?;
    let mut inst = MilpInstance::new(poly, DVector::from_element(n, -1.0), n, 0)?;
    inst.name = format!("jeroslow-{n}");
    inst.maximize = true;
    Ok(inst)
}

/// `max x_2` over the triangle `conv{(0,0), (1,0), (1/2, h)}`, `x` integral.
pub fn hidden_triangle_instance(h: u32) -> Result<MilpInstance> {
    if h < 1 {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: "the triangle height must be at least 1".into(),
        });
    }
    let hf = h as f64;
    let poly = Polyhedron::from_rows(
        2,
        &[
            (vec![-2.0 * hf, 1.0], 0.0),
            (vec![2.0 * hf, 1.0], 2.0 * hf),
            (vec![0.0, -1.0], 0.0),
        ],
    )?;
    let mut inst = MilpInstance::new(poly, DVector::from_column_slice(&[0.0, -1.0]), 2, 0)?;
    inst.name = format!("triangle-{h}");
    inst.maximize = true;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_value(inst: &MilpInstance) -> f64 {
        inst.reported(
            solve_lp(&inst.poly, &inst.c)
                .unwrap()
                .optimal()
                .unwrap()
                .value,
        )
    }

    #[test]
    fn jeroslow_lp_bounds() {
        assert!((lp_value(&jeroslow_instance(4).unwrap()) - 2.0).abs() < 1e-9);
        assert!((lp_value(&jeroslow_instance(5).unwrap()) - 2.5).abs() < 1e-9);
    }

    #[test]
    fn triangle_lp_bound() {
        assert!((lp_value(&hidden_triangle_instance(1).unwrap()) - 1.0).abs() < 1e-9);
        assert!((lp_value(&hidden_triangle_instance(8).unwrap()) - 8.0).abs() < 1e-9);
    }
}
