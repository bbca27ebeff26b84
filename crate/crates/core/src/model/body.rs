use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::geometry::ellipsoid::Ellipsoid;
use crate::infolab::adversary::AdversaryHandle;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::halfspace::Halfspace;
use crate::model::oracle::OracleAnswer;
use crate::model::params::{NormTag, TAU_FEAS};
use crate::model::polyhedron::Polyhedron;

/// Built-in convex bodies with separation oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Ball {
        center: DVector<f64>,
        radius: f64,
        norm: NormTag,
    },
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    Polyhedron(Polyhedron),
    Ellipsoid(Ellipsoid),
    /// Nonempty; separation reports the first violated constituent.
    Intersection(Vec<ConvexBody>),
    /// Convex hull of finitely many points; separated with a small LP.
    Hull(Vec<DVector<f64>>),
    /// Live adversary; every query mutates its state.
    Adversary(AdversaryHandle),
}

impl ConvexBody {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        ConvexBody::Ball {
            center: DVector::from_column_slice(center),
            radius,
            norm: NormTag::Euclidean,
        }
    }

    pub fn cube(lower: &[f64], upper: &[f64]) -> Self {
        ConvexBody::Box {
            lower: DVector::from_column_slice(lower),
            upper: DVector::from_column_slice(upper),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Box { lower, .. } => lower.len(),
            ConvexBody::Polyhedron(p) => p.dim(),
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::Intersection(parts) => parts.first().map_or(0, |p| p.dim()),
            ConvexBody::Hull(points) => points.first().map_or(0, |p| p.len()),
            ConvexBody::Adversary(h) => h.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::Ball { center, radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(format!("bad ball radius {radius}")));
                }
            }
            ConvexBody::Box { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                if lower
                    .iter()
                    .zip(upper.iter())
                    .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
                {
                    return Err(Error::InvalidInput(
                        "box needs finite lower <= upper".into(),
                    ));
                }
            }
            ConvexBody::Polyhedron(_) | ConvexBody::Ellipsoid(_) | ConvexBody::Adversary(_) => {}
            ConvexBody::Intersection(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidInput("empty intersection list".into()));
                }
                let k = parts[0].dim();
                for p in parts {
                    check_dim(k, p.dim())?;
                    p.validate()?;
                }
            }
            ConvexBody::Hull(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidInput("hull of no points".into()));
                }
                for p in points {
                    check_dim(points[0].len(), p.len())?;
                }
            }
        }
        if self.dim() == 0 {
            return Err(Error::InvalidInput("body of dimension 0".into()));
        }
        Ok(())
    }

    pub fn separate(&self, z: &DVector<f64>) -> Result<OracleAnswer> {
        self.separate_tol(z, TAU_FEAS)
    }

    /// Separation with membership tolerance `tol`. Returned normals have unit
    /// Euclidean length.
    pub fn separate_tol(&self, z: &DVector<f64>, tol: f64) -> Result<OracleAnswer> {
        check_dim(self.dim(), z.len())?;
        let sep = |h: Halfspace| Ok(OracleAnswer::Separator(h.normalized()));
        match self {
            ConvexBody::Ball {
                center,
                radius,
                norm: NormTag::Euclidean,
            } => {
                let diff = z - center;
                let dist = diff.norm();
                if dist <= radius + tol {
                    return Ok(OracleAnswer::Inside);
                }
                let normal = diff / dist;
                let offset = normal.dot(center) + radius;
                sep(Halfspace::new(normal, offset)?)
            }
            ConvexBody::Ball {
                center,
                radius,
                norm: NormTag::Sup,
            } => box_separate(
                &center.add_scalar(-radius),
                &center.add_scalar(*radius),
                z,
                tol,
            ),
            ConvexBody::Box { lower, upper } => box_separate(lower, upper, z, tol),
            ConvexBody::Polyhedron(p) => match p.most_violated(z, tol) {
                None => Ok(OracleAnswer::Inside),
                Some((i, _)) => sep(p.rows()[i].clone()),
            },
            ConvexBody::Ellipsoid(e) => {
                if e.norm_of_offset(z) <= 1.0 + tol {
                    return Ok(OracleAnswer::Inside);
                }
                let g = e.shape.solve(&(z - &e.center));
                let offset = e.support(&g);
                sep(Halfspace::new(g, offset)?)
            }
            ConvexBody::Intersection(parts) => {
                for p in parts {
                    if let OracleAnswer::Separator(h) = p.separate_tol(z, tol)? {
                        return Ok(OracleAnswer::Separator(h));
                    }
                }
                Ok(OracleAnswer::Inside)
            }
            ConvexBody::Hull(points) => hull_separate(points, z, tol),
            ConvexBody::Adversary(h) => h.answer(z),
        }
    }

    /// Membership without side effects. The adversary reports membership in
    /// its current outer set.
    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> Result<bool> {
        match self {
            ConvexBody::Adversary(h) => Ok(h.current_set_contains(z, tol)),
            _ => Ok(self.separate_tol(z, tol)?.is_inside()),
        }
    }

    /// The body as an explicit polyhedron, when it is one.
    pub fn as_polyhedron(&self) -> Option<Polyhedron> {
        match self {
            ConvexBody::Polyhedron(p) => Some(p.clone()),
            ConvexBody::Box { lower, upper } => Polyhedron::from_box(lower, upper).ok(),
            ConvexBody::Ball {
                center,
                radius,
                norm: NormTag::Sup,
            } => {
                Polyhedron::from_box(&center.add_scalar(-radius), &center.add_scalar(*radius)).ok()
            }
            ConvexBody::Intersection(parts) => {
                let mut acc = parts.first()?.as_polyhedron()?;
                for p in &parts[1..] {
                    acc = acc.intersect(&p.as_polyhedron()?).ok()?;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// `{t : p + t u in body}` as a closed interval, `None` when empty.
    pub fn chord(&self, p: &DVector<f64>, u: &DVector<f64>) -> Result<Option<(f64, f64)>> {
        check_dim(self.dim(), p.len())?;
        check_dim(self.dim(), u.len())?;
        let full = Some((f64::NEG_INFINITY, f64::INFINITY));
        Ok(match self {
            ConvexBody::Ball {
                center,
                radius,
                norm: NormTag::Euclidean,
            } => quadratic_chord(
                u.norm_squared(),
                2.0 * u.dot(&(p - center)),
                (p - center).norm_squared() - radius * radius,
            ),
            ConvexBody::Ball {
                center,
                radius,
                norm: NormTag::Sup,
            } => box_chord(
                &center.add_scalar(-radius),
                &center.add_scalar(*radius),
                p,
                u,
            ),
            ConvexBody::Box { lower, upper } => box_chord(lower, upper, p, u),
            ConvexBody::Polyhedron(poly) => {
                let mut iv = full;
                for h in poly.rows() {
                    iv = intersect_interval(
                        iv,
                        linear_chord(h.normal.dot(u), h.offset - h.normal.dot(p)),
                    );
                }
                iv
            }
            ConvexBody::Ellipsoid(e) => {
                let w = p - &e.center;
                let ainv_u = e.shape.solve(u);
                quadratic_chord(
                    u.dot(&ainv_u),
                    2.0 * w.dot(&ainv_u),
                    e.shape.inv_quad(&w) - 1.0,
                )
            }
            ConvexBody::Intersection(parts) => {
                let mut iv = full;
                for part in parts {
                    iv = intersect_interval(iv, part.chord(p, u)?);
                }
                iv
            }
            ConvexBody::Hull(_) | ConvexBody::Adversary(_) => {
                return Err(Error::Capability(
                    "chords are not available for this body".into(),
                ))
            }
        })
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        match self {
            ConvexBody::Ball { center, radius, .. } => {
                Ok((center.add_scalar(-radius), center.add_scalar(*radius)))
            }
            ConvexBody::Box { lower, upper } => Ok((lower.clone(), upper.clone())),
            ConvexBody::Ellipsoid(e) => {
                let half = e.shape.matrix().diagonal().map(|v| v.sqrt());
                Ok((&e.center - &half, &e.center + &half))
            }
            ConvexBody::Polyhedron(p) => polyhedron_bounds(p, None),
            ConvexBody::Intersection(parts) => {
                let k = self.dim();
                let mut bounds: Option<(DVector<f64>, DVector<f64>)> = None;
                let mut poly_rows = Vec::new();
                for part in parts {
                    match part {
                        ConvexBody::Polyhedron(p) => poly_rows.extend(p.rows().iter().cloned()),
                        _ => {
                            let (l, u) = part.bounding_box()?;
                            bounds = Some(match bounds {
                                None => (l, u),
                                Some((bl, bu)) => (bl.sup(&l), bu.inf(&u)),
                            });
                        }
                    }
                }
                if poly_rows.is_empty() {
                    return bounds.ok_or_else(|| Error::InvalidInput("unbounded body".into()));
                }
                polyhedron_bounds(&Polyhedron::new(k, poly_rows)?, bounds.as_ref())
            }
            ConvexBody::Hull(points) => {
                let mut l = points[0].clone();
                let mut u = points[0].clone();
                for p in points {
                    l = l.inf(p);
                    u = u.sup(p);
                }
                Ok((l, u))
            }
            ConvexBody::Adversary(h) => Ok(h.ambient_box()),
        }
    }
}

fn box_separate(
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    z: &DVector<f64>,
    tol: f64,
) -> Result<OracleAnswer> {
    let mut best: Option<(usize, bool, f64)> = None;
    for i in 0..z.len() {
        let up = z[i] - upper[i];
        if up > tol && best.map_or(true, |b| up > b.2) {
            best = Some((i, true, up));
        }
        let lo = lower[i] - z[i];
        if lo > tol && best.map_or(true, |b| lo > b.2) {
            best = Some((i, false, lo));
        }
    }
    Ok(match best {
        None => OracleAnswer::Inside,
        Some((i, is_upper, _)) => {
            let mut e = DVector::zeros(z.len());
            if is_upper {
                e[i] = 1.0;
                OracleAnswer::Separator(Halfspace::new(e, upper[i])?)
            } else {
                e[i] = -1.0;
                OracleAnswer::Separator(Halfspace::new(e, -lower[i])?)
            }
        }
    })
}

/// Finds `(a, b)` with `|a|_inf <= 1` maximizing `<a, z> - b` subject to
/// `<a, p> <= b` for all hull points.
fn hull_separate(points: &[DVector<f64>], z: &DVector<f64>, tol: f64) -> Result<OracleAnswer> {
    let k = z.len();
    let mut lp = LinearProgram::new(k + 1);
    lp.set_all_free();
    let mut c: Vec<f64> = z.iter().map(|v| -v).collect();
    c.push(1.0);
    lp.set_objective(&c)?;
    for p in points {
        let mut row: Vec<f64> = p.iter().copied().collect();
        row.push(-1.0);
        lp.add_row(&row, Relation::Le, 0.0)?;
    }
    for j in 0..k {
        let mut row = vec![0.0; k + 1];
        row[j] = 1.0;
        lp.add_row(&row, Relation::Le, 1.0)?;
        lp.add_row(&row, Relation::Ge, -1.0)?;
    }
    let sol = match lp.solve()? {
        LpOutcome::Optimal(s) => s,
        _ => return Err(Error::Numeric("hull separation LP failed".into())),
    };
    if -sol.value <= tol {
        return Ok(OracleAnswer::Inside);
    }
    let normal = DVector::from_column_slice(&sol.x[..k]);
    Ok(OracleAnswer::Separator(
        Halfspace::new(normal, sol.x[k])?.normalized(),
    ))
}

fn polyhedron_bounds(
    p: &Polyhedron,
    extra: Option<&(DVector<f64>, DVector<f64>)>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let k = p.dim();
    let mut base = LinearProgram::new(k);
    base.set_all_free();
    for h in p.rows() {
        base.add_row(h.normal.as_slice(), Relation::Le, h.offset)?;
    }
    if let Some((l, u)) = extra {
        for j in 0..k {
            let mut row = vec![0.0; k];
            row[j] = 1.0;
            base.add_row(&row, Relation::Le, u[j])?;
            base.add_row(&row, Relation::Ge, l[j])?;
        }
    }
    let mut lower = DVector::zeros(k);
    let mut upper = DVector::zeros(k);
    for j in 0..k {
        for sign in [1.0, -1.0] {
            let mut lp = base.clone();
            let mut c = vec![0.0; k];
            c[j] = sign;
            lp.set_objective(&c)?;
            match lp.solve()? {
                LpOutcome::Optimal(s) => {
                    if sign > 0.0 {
                        lower[j] = s.value;
                    } else {
                        upper[j] = -s.value;
                    }
                }
                LpOutcome::Unbounded => return Err(Error::InvalidInput("unbounded body".into())),
                LpOutcome::Infeasible => {
                    return Err(Error::InvalidInput("empty polyhedron".into()))
                }
            }
        }
    }
    Ok((lower, upper))
}

fn intersect_interval(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    let (a, b) = (a?, b?);
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi).then_some((lo, hi))
}

/// `{t : s t <= r}`.
fn linear_chord(s: f64, r: f64) -> Option<(f64, f64)> {
    if s.abs() < 1e-300 {
        (r >= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY))
    } else if s > 0.0 {
        Some((f64::NEG_INFINITY, r / s))
    } else {
        Some((r / s, f64::INFINITY))
    }
}

/// `{t : a t^2 + b t + c <= 0}` for `a > 0`.
fn quadratic_chord(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || a <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // numerically stable roots
    let q = -0.5 * (b + b.signum() * s);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((r1.min(r2), r1.max(r2)))
}

fn box_chord(
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    p: &DVector<f64>,
    u: &DVector<f64>,
) -> Option<(f64, f64)> {
    let mut iv = Some((f64::NEG_INFINITY, f64::INFINITY));
    for i in 0..p.len() {
        iv = intersect_interval(iv, linear_chord(u[i], upper[i] - p[i]));
        iv = intersect_interval(iv, linear_chord(-u[i], p[i] - lower[i]));
    }
    iv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pd::PdMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn ball_examples() {
        let b = ConvexBody::ball(&[0.0, 0.0], 1.0);
        assert_eq!(b.separate(&v(&[0.0, 0.0])).unwrap(), OracleAnswer::Inside);
        match b.separate(&v(&[2.0, 0.0])).unwrap() {
            OracleAnswer::Separator(h) => {
                assert_eq!(h.normal, v(&[1.0, 0.0]));
                assert_eq!(h.offset, 1.0);
            }
            _ => panic!(),
        }
        assert!(b.separate(&v(&[1.0])).is_err());
    }

    #[test]
    fn polyhedron_row_is_returned_normalized() {
        let p = Polyhedron::from_rows(2, &[(vec![1.0, 1.0], 1.0)]).unwrap();
        let body = ConvexBody::Polyhedron(p);
        match body.separate(&v(&[1.0, 1.0])).unwrap() {
            OracleAnswer::Separator(h) => {
                let s = 0.5f64.sqrt();
                assert!((h.normal - v(&[s, s])).amax() < 1e-15);
                assert!((h.offset - s).abs() < 1e-15);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn hull_separation_is_valid() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let body = ConvexBody::Hull(pts.clone());
        assert!(body.separate(&v(&[0.2, 0.2])).unwrap().is_inside());
        match body.separate(&v(&[1.0, 1.0])).unwrap() {
            OracleAnswer::Separator(h) => {
                assert!(h.excess(&v(&[1.0, 1.0])) > 0.0);
                for p in &pts {
                    assert!(h.excess(p) <= 1e-9);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn chords_match_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bodies = vec![
            ConvexBody::ball(&[0.1, -0.2], 1.3),
            ConvexBody::cube(&[-1.0, -0.5], &[1.0, 2.0]),
            ConvexBody::Ellipsoid(
                Ellipsoid::new(
                    v(&[0.3, 0.0]),
                    PdMatrix::from_rows(2, &[2.0, 0.5, 0.5, 1.0]).unwrap(),
                )
                .unwrap(),
            ),
            ConvexBody::Intersection(vec![
                ConvexBody::ball(&[0.0, 0.0], 1.5),
                ConvexBody::Polyhedron(Polyhedron::from_rows(2, &[(vec![1.0, 2.0], 0.5)]).unwrap()),
            ]),
        ];
        for b in &bodies {
            for _ in 0..200 {
                let p = v(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                let u = v(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
                let iv = b.chord(&p, &u).unwrap();
                for t in [-3.0, -1.0, -0.3, 0.0, 0.4, 1.2, 2.5] {
                    let inside = b.contains(&(&p + &u * t), 1e-9).unwrap();
                    let in_chord = iv.map_or(false, |(lo, hi)| t >= lo - 1e-9 && t <= hi + 1e-9);
                    assert_eq!(inside, in_chord, "{b:?} {p} {u} {t}");
                }
            }
        }
    }

    #[test]
    fn bounding_boxes() {
        let b = ConvexBody::Intersection(vec![
            ConvexBody::Polyhedron(
                Polyhedron::from_rows(
                    2,
                    &[
                        (vec![1.0, 1.0], 3.0),
                        (vec![-1.0, 0.0], 0.0),
                        (vec![0.0, -1.0], 0.0),
                    ],
                )
                .unwrap(),
            ),
            ConvexBody::ball(&[0.0, 0.0], 10.0),
        ]);
        let (l, u) = b.bounding_box().unwrap();
        assert!((l - v(&[0.0, 0.0])).amax() < 1e-9);
        assert!((u - v(&[3.0, 3.0])).amax() < 1e-9);
        let open =
            ConvexBody::Polyhedron(Polyhedron::from_rows(2, &[(vec![1.0, 0.0], 1.0)]).unwrap());
        assert!(open.bounding_box().is_err());
    }
}
