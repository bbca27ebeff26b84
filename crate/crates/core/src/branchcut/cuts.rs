//! Chvátal–Gomory cuts and the round-based closure approximation.

use nalgebra::{DMatrix, DVector};

use crate::branchcut::instances::{solve_lp, MilpInstance};
use crate::error::{Error, Result};
use crate::lp::LpOutcome;
use crate::model::{Halfspace, Polyhedron};

const INT_TOL: f64 = 1e-9;
/// Minimum violation (in distance) for a cut to count as separating.
pub const CUT_VIOLATION: f64 = 1e-6;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn integer_normal(h: &Halfspace, n: usize) -> Result<Vec<i64>> {
    if h.normal.iter().skip(n).any(|v| v.abs() > INT_TOL) {
        return Err(Error::InvalidInput(
            "CG rounding needs a zero continuous part".into(),
        ));
    }
    h.normal
        .iter()
        .take(n)
        .map(|&v| {
            let r = v.round();
            if (v - r).abs() > INT_TOL * v.abs().max(1.0) || r.abs() > 1e15 {
                Err(Error::InvalidInput(format!(
                    "normal entry {v} is not an integer"
                )))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

/// `<a/g, x> <= floor(b/g)` for `g = gcd(a)`; the input is returned unchanged
/// when `b/g` is already integral.
pub fn cg_cut(h: &Halfspace, n: usize) -> Result<Halfspace> {
    let a = integer_normal(h, n)?;
    let g = a.iter().fold(0, |acc, &v| gcd(acc, v));
    if g == 0 {
        return Err(Error::InvalidInput(
            "CG rounding needs a nonzero normal".into(),
        ));
    }
    let q = h.offset / g as f64;
    if (q - q.round()).abs() <= INT_TOL * q.abs().max(1.0) {
        return Ok(h.clone());
    }
    let mut normal = DVector::zeros(h.dim());
    for (i, &v) in a.iter().enumerate() {
        normal[i] = (v / g) as f64;
    }
    Ok(Halfspace {
        normal,
        offset: q.floor(),
    })
}

fn is_integer_row(h: &Halfspace, n: usize) -> bool {
    !h.is_empty_certificate() && integer_normal(h, n).is_ok()
}

fn violation(h: &Halfspace, x: &DVector<f64>) -> f64 {
    h.excess(x) / h.normal.norm()
}

/// Rows at `x` forming a square nonsingular system, chosen greedily in row
/// order, with the inverse of that system.
fn active_basis(poly: &Polyhedron, x: &DVector<f64>) -> Option<(Vec<usize>, DMatrix<f64>)> {
    let k = poly.dim();
    let mut chosen = Vec::new();
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for (i, r) in poly.rows().iter().enumerate() {
        let scale = r.normal.norm().max(r.offset.abs()).max(1.0);
        if r.excess(x).abs() > 1e-7 * scale {
            continue;
        }
        let mut v = r.normal.clone();
        for q in &ortho {
            let c = q.dot(&v);
            v -= q * c;
        }
        if v.norm() > 1e-9 * r.normal.norm() {
            ortho.push(v.normalize());
            chosen.push(i);
            if chosen.len() == k {
                break;
            }
        }
    }
    if chosen.len() < k {
        return None;
    }
    let a = DMatrix::from_fn(k, k, |r, c| poly.rows()[chosen[r]].normal[c]);
    a.try_inverse().map(|inv| (chosen, inv))
}

fn frac(v: f64) -> f64 {
    let f = v - v.floor();
    if f < INT_TOL || f > 1.0 - INT_TOL {
        0.0
    } else {
        f
    }
}

/// Gomory fractional cuts in CG form: for a fractional coordinate `x_i` of
/// the vertex, multipliers `frac(±e_i^T A_B^{-1})` on the active rows.
fn gomory_cuts(poly: &Polyhedron, n: usize, x: &DVector<f64>) -> Vec<Halfspace> {
    let Some((rows, inv)) = active_basis(poly, x) else {
        return Vec::new();
    };
    if rows.iter().any(|&i| !is_integer_row(&poly.rows()[i], n)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..n {
        if frac(x[i]).min(1.0 - frac(x[i])) <= 1e-6 || frac(x[i]) == 0.0 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let u: Vec<f64> = (0..rows.len()).map(|j| frac(sign * inv[(i, j)])).collect();
            if u.iter().all(|&v| v == 0.0) {
                continue;
            }
            let mut normal = DVector::zeros(poly.dim());
            let mut offset = 0.0;
            for (j, &r) in rows.iter().enumerate() {
                normal += &poly.rows()[r].normal * u[j];
                offset += u[j] * poly.rows()[r].offset;
            }
            let rounded = normal.map(|v| v.round());
            if (&normal - &rounded).amax() > 1e-6 || rounded.amax() == 0.0 {
                continue;
            }
            if let Ok(h) = Halfspace::new(rounded, offset).and_then(|h| cg_cut(&h, n)) {
                out.push(h);
            }
        }
    }
    out
}

/// CG cuts violated by `x` from the generator set: single rows, pairs of rows
/// with multipliers in `1..=3`, and Gomory multipliers at the vertex `x`.
pub fn cg_candidates(poly: &Polyhedron, n: usize, x: &DVector<f64>) -> Vec<Halfspace> {
    // a CG cut from multipliers u >= 1 is violated only if the weighted slack
    // sum u^T (b - A x) is below 1, so rows with slack >= 1 cannot take part
    let rows: Vec<&Halfspace> = poly
        .rows()
        .iter()
        .filter(|r| is_integer_row(r, n) && -r.excess(x) < 1.0)
        .collect();
    let mut raw: Vec<Halfspace> = Vec::new();
    for r in &rows {
        raw.push((*r).clone());
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            for u1 in 1..=3i64 {
                for u2 in 1..=3i64 {
                    if gcd(u1, u2) != 1 {
                        continue;
                    }
                    let normal = &rows[i].normal * u1 as f64 + &rows[j].normal * u2 as f64;
                    if normal.amax() == 0.0 {
                        continue;
                    }
                    raw.push(Halfspace {
                        normal,
                        offset: u1 as f64 * rows[i].offset + u2 as f64 * rows[j].offset,
                    });
                }
            }
        }
    }
    let mut out: Vec<Halfspace> = Vec::new();
    let push = |h: Halfspace, out: &mut Vec<Halfspace>| {
        if violation(&h, x) > CUT_VIOLATION && !out.iter().any(|o| same_cut(o, &h)) {
            out.push(h);
        }
    };
    for h in raw {
        if let Ok(c) = cg_cut(&h, n) {
            push(c, &mut out);
        }
    }
    for c in gomory_cuts(poly, n, x) {
        push(c, &mut out);
    }
    out
}

fn same_cut(a: &Halfspace, b: &Halfspace) -> bool {
    a.offset == b.offset && a.normal == b.normal
}

/// Index of the cut maximizing efficacy plus parallelism with `c`.
pub fn select_cut(cuts: &[Halfspace], x: &DVector<f64>, c: &DVector<f64>) -> Option<usize> {
    let cn = c.norm();
    let mut best: Option<(usize, f64)> = None;
    for (i, h) in cuts.iter().enumerate() {
        let an = h.normal.norm();
        let parallel = if cn > 0.0 {
            h.normal.dot(c).abs() / (an * cn)
        } else {
            0.0
        };
        let score = violation(h, x) + parallel;
        if best.map_or(true, |(_, s)| score > s + 1e-12) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn is_integral(x: &DVector<f64>, n: usize) -> bool {
    x.iter()
        .take(n)
        .all(|v| (v - v.round()).abs() <= crate::model::TAU_INT)
}

fn lp_point(poly: &Polyhedron, c: &DVector<f64>) -> Result<Option<(DVector<f64>, f64)>> {
    match solve_lp(poly, c)? {
        LpOutcome::Optimal(s) => Ok(Some((DVector::from_vec(s.x), s.value))),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Instance("LP relaxation is unbounded".into())),
    }
}

/// Appends `cuts`, keeping only the tightest row per normal vector.
fn merge_parallel(poly: &Polyhedron, cuts: Vec<Halfspace>) -> Result<Polyhedron> {
    let mut rows: Vec<Halfspace> = poly.rows().to_vec();
    for h in cuts {
        match rows.iter_mut().find(|r| r.normal == h.normal) {
            Some(r) => r.offset = r.offset.min(h.offset),
            None => rows.push(h),
        }
    }
    Polyhedron::new(poly.dim(), rows)
}

/// Adds every violated generator-set CG cut per round while the LP bound
/// improves; returns the strengthened polyhedron and the number of rounds
/// that raised the bound.
pub fn cg_round_closure(inst: &MilpInstance, max_rounds: usize) -> Result<(Polyhedron, usize)> {
    let mut poly = inst.poly.clone();
    let Some((mut x, mut bound)) = lp_point(&poly, &inst.c)? else {
        return Ok((poly, 0));
    };
    let mut rounds = 0;
    for _ in 0..max_rounds {
        if is_integral(&x, inst.n) {
            break;
        }
        let cuts = cg_candidates(&poly, inst.n, &x);
        if cuts.is_empty() {
            break;
        }
        poly = merge_parallel(&poly, cuts)?;
        let Some((nx, nb)) = lp_point(&poly, &inst.c)? else {
            rounds += 1;
            break;
        };
        if nb <= bound + 1e-9 {
            break;
        }
        rounds += 1;
        x = nx;
        bound = nb;
    }
    Ok((poly, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branchcut::instances::{hidden_triangle_instance, jeroslow_instance};

    #[test]
    fn cg_examples() {
        let h = Halfspace::from_slice(&[1.0; 5], 2.5).unwrap();
        let c = cg_cut(&h, 5).unwrap();
        assert_eq!(c.offset, 2.0);
        let h = Halfspace::from_slice(&[2.0, 4.0], 5.0).unwrap();
        let c = cg_cut(&h, 2).unwrap();
        assert_eq!(c.normal.as_slice(), &[1.0, 2.0]);
        assert_eq!(c.offset, 2.0);
        let h = Halfspace::from_slice(&[1.0, 0.0], 3.0).unwrap();
        assert_eq!(cg_cut(&h, 2).unwrap(), h);
        let h = Halfspace::from_slice(&[1.0, 0.5], 3.0).unwrap();
        assert!(cg_cut(&h, 1).is_err());
    }

    #[test]
    fn jeroslow_closure() {
        let (_, r) = cg_round_closure(&jeroslow_instance(5).unwrap(), 10).unwrap();
        assert_eq!(r, 1);
    }

    #[test]
    fn integral_box_needs_no_round() {
        let poly = Polyhedron::from_box(
            &DVector::from_column_slice(&[0.0, 0.0]),
            &DVector::from_column_slice(&[2.0, 3.0]),
        )
        .unwrap();
        let inst = MilpInstance::new(poly, DVector::from_column_slice(&[1.0, -1.0]), 2, 0).unwrap();
        assert_eq!(cg_round_closure(&inst, 10).unwrap().1, 0);
    }

    #[test]
    fn triangle_rounds_grow() {
        let rounds: Vec<usize> = [2, 4, 8]
            .iter()
            .map(|&h| {
                cg_round_closure(&hidden_triangle_instance(h).unwrap(), 1000)
                    .unwrap()
                    .1
            })
            .collect();
        assert!(rounds[0] < rounds[1] && rounds[1] < rounds[2], "{rounds:?}");
    }
}
