//! Exhaustive reference answers: enumerate integer fibers, then solve each
//! fiber in closed form (balls, boxes) or with a small LP (polyhedra).

use mico_core::lp::{LinearProgram, LpOutcome, Relation};
use mico_core::model::{ConvexBody, NormTag, Objective, TAU_FEAS};
use mico_core::{Error, Result};
use nalgebra::DVector;

/// Integer points of the box `[lo, hi]` in the first `n` coordinates.
pub fn lattice_points(lo: &[f64], hi: &[f64], n: usize) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> = (0..n)
        .map(|i| ((lo[i] - 1e-9).ceil() as i64, (hi[i] + 1e-9).floor() as i64))
        .collect();
    let mut out = vec![Vec::new()];
    for &(a, b) in &ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for v in a..=b {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn fibers(body: &ConvexBody, n: usize) -> Result<Vec<Vec<i64>>> {
    let (lo, hi) = body.bounding_box()?;
    Ok(lattice_points(lo.as_slice(), hi.as_slice(), n))
}

fn point(x: &[i64], y: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        x.len() + y.len(),
        x.iter().map(|&v| v as f64).chain(y.iter().copied()),
    )
}

/// Radius of the largest Euclidean ball in `body` centred on the fiber over
/// `x`; negative or `-inf` when the fiber is empty.
pub fn fiber_depth(body: &ConvexBody, x: &[i64], d: usize) -> Result<f64> {
    let n = x.len();
    match body {
        ConvexBody::Ball {
            center,
            radius,
            norm: NormTag::Euclidean,
        } => {
            let off: f64 = (0..n).map(|i| (x[i] as f64 - center[i]).powi(2)).sum();
            Ok(radius - off.sqrt())
        }
        ConvexBody::Box { lower, upper } => {
            let mut t = f64::INFINITY;
            for i in 0..n {
                let v = x[i] as f64;
                t = t.min(v - lower[i]).min(upper[i] - v);
            }
            for j in n..n + d {
                t = t.min(0.5 * (upper[j] - lower[j]));
            }
            Ok(t)
        }
        ConvexBody::Polyhedron(poly) => {
            let shifted: Vec<(Vec<f64>, f64, f64)> = poly
                .rows()
                .iter()
                .map(|r| {
                    let ax: f64 = (0..n).map(|i| r.normal[i] * x[i] as f64).sum();
                    (
                        r.normal.as_slice()[n..].to_vec(),
                        r.offset - ax,
                        r.normal.norm(),
                    )
                })
                .collect();
            if d == 0 {
                return Ok(shifted
                    .iter()
                    .map(|(_, b, a)| b / a)
                    .fold(f64::INFINITY, f64::min));
            }
            // variables (y, t), maximize t
            let mut lp = LinearProgram::new(d + 1);
            lp.set_all_free();
            let mut obj = vec![0.0; d + 1];
            obj[d] = -1.0;
            lp.set_objective(&obj)?;
            for (ay, b, a) in &shifted {
                let mut row = ay.clone();
                row.push(*a);
                lp.add_row(&row, Relation::Le, *b)?;
            }
            match lp.solve()? {
                LpOutcome::Optimal(s) => Ok(-s.value),
                LpOutcome::Infeasible => Ok(f64::NEG_INFINITY),
                LpOutcome::Unbounded => Err(Error::Instance("unbounded polyhedron".into())),
            }
        }
        _ => Err(Error::Capability(
            "fiber depth needs a ball, box or polyhedron".into(),
        )),
    }
}

/// Largest fiber depth over all integer fibers and the fiber attaining it.
pub fn deepest_fiber(body: &ConvexBody, n: usize, d: usize) -> Result<Option<(Vec<i64>, f64)>> {
    let mut best: Option<(Vec<i64>, f64)> = None;
    for x in fibers(body, n)? {
        let t = fiber_depth(body, &x, d)?;
        if best.as_ref().map_or(true, |b| t > b.1) {
            best = Some((x, t));
        }
    }
    Ok(best)
}

/// `min <c, (x, y)>` over the fiber of `body` at `x`.
pub fn fiber_linear_min(
    body: &ConvexBody,
    c: &DVector<f64>,
    x: &[i64],
    d: usize,
) -> Result<Option<f64>> {
    let n = x.len();
    let cx: f64 = (0..n).map(|i| c[i] * x[i] as f64).sum();
    match body {
        ConvexBody::Ball {
            center,
            radius,
            norm: NormTag::Euclidean,
        } => {
            let off: f64 = (0..n).map(|i| (x[i] as f64 - center[i]).powi(2)).sum();
            let rem = radius * radius - off;
            if rem < 0.0 {
                return Ok(None);
            }
            let cy = c.rows(n, d);
            let cc: f64 = (0..d).map(|j| c[n + j] * center[n + j]).sum();
            Ok(Some(cx + cc - cy.norm() * rem.sqrt()))
        }
        ConvexBody::Box { lower, upper } => {
            if (0..n).any(|i| (x[i] as f64) < lower[i] || (x[i] as f64) > upper[i]) {
                return Ok(None);
            }
            let cy: f64 = (n..n + d)
                .map(|j| (c[j] * lower[j]).min(c[j] * upper[j]))
                .sum();
            Ok(Some(cx + cy))
        }
        ConvexBody::Polyhedron(poly) => {
            if d == 0 {
                return Ok(poly.contains(&point(x, &[]), TAU_FEAS).then_some(cx));
            }
            let mut lp = LinearProgram::new(d);
            lp.set_all_free();
            lp.set_objective(&c.as_slice()[n..])?;
            for r in poly.rows() {
                let ax: f64 = (0..n).map(|i| r.normal[i] * x[i] as f64).sum();
                lp.add_row(&r.normal.as_slice()[n..], Relation::Le, r.offset - ax)?;
            }
            match lp.solve()? {
                LpOutcome::Optimal(s) => Ok(Some(cx + s.value)),
                LpOutcome::Infeasible => Ok(None),
                LpOutcome::Unbounded => Err(Error::Instance("unbounded polyhedron".into())),
            }
        }
        _ => Err(Error::Capability(
            "fiber minimum needs a ball, box or polyhedron".into(),
        )),
    }
}

/// Mixed-integer minimum of a linear objective and its fiber.
pub fn linear_optimum(
    body: &ConvexBody,
    c: &DVector<f64>,
    n: usize,
    d: usize,
) -> Result<Option<(Vec<i64>, f64)>> {
    let mut best: Option<(Vec<i64>, f64)> = None;
    for x in fibers(body, n)? {
        if let Some(v) = fiber_linear_min(body, c, &x, d)? {
            if best.as_ref().map_or(true, |b| v < b.1) {
                best = Some((x, v));
            }
        }
    }
    Ok(best)
}

/// Minimum of `obj` over `body ∩ Z^n` by enumeration, with the oracles'
/// membership tolerance.
pub fn integer_optimum(body: &ConvexBody, obj: &Objective, n: usize) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for x in fibers(body, n)? {
        let z = point(&x, &[]);
        if body.contains(&z, TAU_FEAS)? {
            let v = obj.value(&z)?;
            if best.map_or(true, |b| v < b) {
                best = Some(v);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mico_core::model::Polyhedron;

    #[test]
    fn box_lattice() {
        assert_eq!(lattice_points(&[-0.5, 0.0], &[1.2, 0.0], 2).len(), 2);
    }

    #[test]
    fn depths_agree_across_representations() {
        let bx = ConvexBody::cube(&[-1.0, -2.0, 0.0], &[2.5, 1.0, 0.6]);
        let poly = ConvexBody::Polyhedron(bx.as_polyhedron().unwrap());
        for x in lattice_points(&[-2.0, -2.0], &[3.0, 2.0], 2) {
            let a = fiber_depth(&bx, &x, 1).unwrap();
            let b = fiber_depth(&poly, &x, 1).unwrap();
            if a >= 0.0 {
                assert!((a - b).abs() < 1e-9, "{x:?} {a} {b}");
            }
        }
    }

    #[test]
    fn linear_over_triangle() {
        let tri = Polyhedron::from_rows(
            2,
            &[
                (vec![-1.0, 0.0], 0.0),
                (vec![0.0, -1.0], 0.0),
                (vec![1.0, 1.0], 2.5),
            ],
        )
        .unwrap();
        let c = DVector::from_vec(vec![-1.0, -1.0]);
        let (_, v) = linear_optimum(&ConvexBody::Polyhedron(tri), &c, 1, 1)
            .unwrap()
            .unwrap();
        assert!((v + 2.5).abs() < 1e-9);
    }
}
