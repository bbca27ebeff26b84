//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Small and deterministic; intended for LP relaxations with a few dozen
//! variables and rows.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `minimize <c, x>` subject to rows `<a, x> (<=|>=|=) b`; each variable is
/// either nonnegative (default) or free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    free: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            objective: vec![0.0; n],
            rows: Vec::new(),
            free: vec![false; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, c: &[f64]) -> Result<()> {
        crate::error::check_dim(self.n, c.len())?;
        self.objective = c.to_vec();
        Ok(())
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn set_all_free(&mut self) {
        self.free.iter_mut().for_each(|f| *f = true);
    }

    pub fn add_row(&mut self, a: &[f64], rel: Relation, b: f64) -> Result<()> {
        crate::error::check_dim(self.n, a.len())?;
        if a.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(Error::InvalidInput("non-finite LP row".into()));
        }
        self.rows.push((a.to_vec(), rel, b));
        Ok(())
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    // m rows of width cols + 1; the last entry is the right-hand side
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    // column layout: structural columns first, then slacks, then artificials
    structural: usize,
    first_artificial: usize,
    // for each original variable: (positive column, optional negative column)
    var_cols: Vec<(usize, Option<usize>)>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.n);
        let mut structural = 0;
        for j in 0..lp.n {
            if lp.free[j] {
                var_cols.push((structural, Some(structural + 1)));
                structural += 2;
            } else {
                var_cols.push((structural, None));
                structural += 1;
            }
        }
        // normalize rows to nonnegative right-hand sides
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|(a, rel, b)| {
                if *b < 0.0 {
                    let rel = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (a.iter().map(|v| -v).collect(), rel, -b)
                } else {
                    (a.clone(), *rel, *b)
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = structural + slacks;
        let cols = first_artificial + artificials;
        let m = rows.len();
        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut art) = (structural, first_artificial);
        for (i, (a, rel, b)) in rows.iter().enumerate() {
            for (j, &v) in a.iter().enumerate() {
                let (p, neg) = var_cols[j];
                t[i][p] = v;
                if let Some(q) = neg {
                    t[i][q] = -v;
                }
            }
            t[i][cols] = *b;
            match rel {
                Relation::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    t[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            t,
            basis,
            cols,
            structural,
            first_artificial,
            var_cols,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let width = self.cols + 1;
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..width {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for j in 0..width {
                cost[j] -= f * prow[j];
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule simplex on the reduced-cost row `cost` (last entry holds
    /// minus the objective value). Returns false when unbounded.
    fn simplex(&mut self, cost: &mut [f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| cost[j] < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][self.cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((l, best)) => {
                            if ratio < best - PIVOT_TOL
                                || (ratio <= best + PIVOT_TOL && self.basis[i] < self.basis[l])
                            {
                                Some((i, ratio))
                            } else {
                                Some((l, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, enter, cost);
        }
        Err(Error::Numeric("simplex pivot limit reached".into()))
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpOutcome> {
        let width = self.cols + 1;
        // phase 1: minimize the sum of artificials
        if self.first_artificial < self.cols {
            let mut cost = vec![0.0; width];
            for j in self.first_artificial..self.cols {
                cost[j] = 1.0;
            }
            for i in 0..self.t.len() {
                if self.basis[i] >= self.first_artificial {
                    for j in 0..width {
                        cost[j] -= self.t[i][j];
                    }
                }
            }
            self.simplex(&mut cost, self.cols)?;
            let infeas = -cost[self.cols];
            let scale = 1.0 + lp.rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
            if infeas > 1e-7 * scale {
                return Ok(LpOutcome::Infeasible);
            }
            // drive remaining artificials out of the basis
            let mut i = 0;
            while i < self.t.len() {
                if self.basis[i] >= self.first_artificial {
                    let col = (0..self.first_artificial).find(|&j| self.t[i][j].abs() > PIVOT_TOL);
                    match col {
                        Some(c) => {
                            let mut dummy = vec![0.0; width];
                            self.pivot(i, c, &mut dummy);
                            i += 1;
                        }
                        None => {
                            self.t.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        // phase 2
        let mut cost = vec![0.0; width];
        for (j, &(p, neg)) in self.var_cols.iter().enumerate() {
            cost[p] = lp.objective[j];
            if let Some(q) = neg {
                cost[q] = -lp.objective[j];
            }
        }
        for i in 0..self.t.len() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..width {
                    cost[j] -= cb * self.t[i][j];
                }
            }
        }
        if !self.simplex(&mut cost, self.first_artificial)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut col_val = vec![0.0; self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                col_val[b] = self.t[i][self.cols];
            }
        }
        let x: Vec<f64> = self
            .var_cols
            .iter()
            .map(|&(p, neg)| col_val[p] - neg.map_or(0.0, |q| col_val[q]))
            .collect();
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal(LpSolution { x, value }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[-3.0, -5.0]).unwrap();
        lp.add_row(&[1.0, 0.0], Relation::Le, 4.0).unwrap();
        lp.add_row(&[0.0, 2.0], Relation::Le, 12.0).unwrap();
        lp.add_row(&[3.0, 2.0], Relation::Le, 18.0).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert!((s.value + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + y st x - y = -3, x >= -5 with both free -> x = -5, y = -2
        let mut lp = LinearProgram::new(2);
        lp.set_all_free();
        lp.set_objective(&[1.0, 1.0]).unwrap();
        lp.add_row(&[1.0, -1.0], Relation::Eq, -3.0).unwrap();
        lp.add_row(&[1.0, 0.0], Relation::Ge, -5.0).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert!((s.x[0] + 5.0).abs() < 1e-9 && (s.x[1] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(&[1.0], Relation::Ge, 2.0).unwrap();
        lp.add_row(&[1.0], Relation::Le, 1.0).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1);
        lp.set_objective(&[-1.0]).unwrap();
        lp.add_row(&[1.0], Relation::Ge, 2.0).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 2.0]).unwrap();
        lp.add_row(&[1.0, 1.0], Relation::Eq, 1.0).unwrap();
        lp.add_row(&[2.0, 2.0], Relation::Eq, 2.0).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
    }
}
