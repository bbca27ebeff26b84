//! Mixed-integer volume, computed fiber by fiber.
//!
//! A bounded set `S ⊆ Z^n x R^d` is stored as its nonempty fiber slices. Slices
//! of polyhedra are exact (intervals, polygons, 3-polytopes); slices of curved
//! bodies are exact chords for `d = 1` and inscribed polygons for `d = 2`.

use nalgebra::{DVector, Matrix3, Vector3};

use crate::error::{check_dim, Error, Result};
use crate::model::{ConvexBody, Halfspace, Polyhedron, TAU_FEAS};

/// Fibers enumerated before giving up.
pub const MAX_FIBERS: usize = 200_000;
/// Rays used to inscribe a polygon in a curved two-dimensional slice.
pub const SLICE_RAYS: usize = 720;
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FiberShape {
    /// `d = 0`: the fiber is a single lattice point.
    Point,
    Interval(f64, f64),
    /// Counterclockwise vertices.
    Polygon(Vec<[f64; 2]>),
    /// `{y : <a, y> <= b}` for the listed rows; bounded.
    Polytope(Vec<([f64; 3], f64)>),
}

impl FiberShape {
    pub fn dim(&self) -> usize {
        match self {
            FiberShape::Point => 0,
            FiberShape::Interval(..) => 1,
            FiberShape::Polygon(_) => 2,
            FiberShape::Polytope(_) => 3,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            FiberShape::Point => 1.0,
            FiberShape::Interval(lo, hi) => (hi - lo).max(0.0),
            FiberShape::Polygon(p) => polygon_area(p),
            FiberShape::Polytope(rows) => polytope_volume(rows),
        }
    }

    /// Intersection with `{y : <a, y> <= b}`; `None` when nothing of positive
    /// measure (or, for points, nothing at all) is left.
    pub fn cut(&self, a: &[f64], b: f64) -> Option<FiberShape> {
        let flat = a.iter().all(|v| v.abs() <= 1e-12);
        if flat {
            return (b >= -TOL).then(|| self.clone());
        }
        match self {
            FiberShape::Point => unreachable!("points have no continuous part"),
            FiberShape::Interval(lo, hi) => {
                let (mut lo, mut hi) = (*lo, *hi);
                if a[0] > 0.0 {
                    hi = hi.min(b / a[0]);
                } else {
                    lo = lo.max(b / a[0]);
                }
                (hi > lo).then_some(FiberShape::Interval(lo, hi))
            }
            FiberShape::Polygon(p) => {
                let q = clip_polygon(p, [a[0], a[1]], b);
                (q.len() >= 3 && polygon_area(&q) > 0.0).then_some(FiberShape::Polygon(q))
            }
            FiberShape::Polytope(rows) => {
                let mut rows = rows.clone();
                rows.push(([a[0], a[1], a[2]], b));
                (polytope_volume(&rows) > 0.0).then_some(FiberShape::Polytope(rows))
            }
        }
    }

    /// `volume(cut(a, b))` without keeping the result.
    pub fn volume_below(&self, a: &[f64], b: f64) -> f64 {
        match self {
            FiberShape::Polygon(p) if a.iter().any(|v| v.abs() > 1e-12) => {
                polygon_area(&clip_polygon(p, [a[0], a[1]], b))
            }
            _ => self.cut(a, b).map_or(0.0, |s| s.volume()),
        }
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        match self {
            FiberShape::Point => true,
            FiberShape::Interval(lo, hi) => y[0] >= lo - tol && y[0] <= hi + tol,
            FiberShape::Polygon(p) => (0..p.len()).all(|i| {
                let (u, v) = (p[i], p[(i + 1) % p.len()]);
                // left of every counterclockwise edge
                (v[0] - u[0]) * (y[1] - u[1]) - (v[1] - u[1]) * (y[0] - u[0]) >= -tol
            }),
            FiberShape::Polytope(rows) => rows
                .iter()
                .all(|(a, b)| a[0] * y[0] + a[1] * y[1] + a[2] * y[2] <= b + tol),
        }
    }

    /// A point of the slice: midpoint, area centroid, or vertex average.
    pub fn centroid(&self) -> Vec<f64> {
        match self {
            FiberShape::Point => Vec::new(),
            FiberShape::Interval(lo, hi) => vec![0.5 * (lo + hi)],
            FiberShape::Polygon(p) => {
                let a = signed_area(p);
                if a.abs() < 1e-300 {
                    let m = p.len() as f64;
                    return vec![
                        p.iter().map(|v| v[0]).sum::<f64>() / m,
                        p.iter().map(|v| v[1]).sum::<f64>() / m,
                    ];
                }
                let (mut cx, mut cy) = (0.0, 0.0);
                for i in 0..p.len() {
                    let (u, v) = (p[i], p[(i + 1) % p.len()]);
                    let cr = u[0] * v[1] - v[0] * u[1];
                    cx += (u[0] + v[0]) * cr;
                    cy += (u[1] + v[1]) * cr;
                }
                vec![cx / (6.0 * a), cy / (6.0 * a)]
            }
            FiberShape::Polytope(rows) => {
                let vs = polytope_vertices(rows);
                let m = vs.len().max(1) as f64;
                let s = vs.iter().fold(Vector3::zeros(), |acc, v| acc + v);
                vec![s[0] / m, s[1] / m, s[2] / m]
            }
        }
    }

    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            FiberShape::Point => (Vec::new(), Vec::new()),
            FiberShape::Interval(lo, hi) => (vec![*lo], vec![*hi]),
            FiberShape::Polygon(p) => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in p {
                    for j in 0..2 {
                        lo[j] = lo[j].min(v[j]);
                        hi[j] = hi[j].max(v[j]);
                    }
                }
                (lo, hi)
            }
            FiberShape::Polytope(rows) => {
                let mut lo = vec![f64::INFINITY; 3];
                let mut hi = vec![f64::NEG_INFINITY; 3];
                for v in polytope_vertices(rows) {
                    for j in 0..3 {
                        lo[j] = lo[j].min(v[j]);
                        hi[j] = hi[j].max(v[j]);
                    }
                }
                (lo, hi)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub x: Vec<i64>,
    pub shape: FiberShape,
}

/// `S = C ∩ (Z^n x R^d)` as a list of nonempty fibers in lexicographic order
/// of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedRegion {
    pub n: usize,
    pub d: usize,
    pub fibers: Vec<Fiber>,
}

fn integer_points(lo: &[f64], hi: &[f64]) -> Result<Vec<Vec<i64>>> {
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| ((l - TOL).ceil() as i64, (h + TOL).floor() as i64))
        .collect();
    let mut count: usize = 1;
    for &(a, b) in &ranges {
        if b < a {
            return Ok(Vec::new());
        }
        count = count.saturating_mul((b - a + 1) as usize);
    }
    if count > MAX_FIBERS {
        return Err(Error::Capability(format!(
            "{count} fibers exceed the limit {MAX_FIBERS}"
        )));
    }
    let mut out = vec![Vec::new()];
    for &(a, b) in &ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                (a..=b).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

fn full_point(x: &[i64], y: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        x.len() + y.len(),
        x.iter().map(|&v| v as f64).chain(y.iter().copied()),
    )
}

fn box_shape(lo: &[f64], hi: &[f64]) -> Result<FiberShape> {
    Ok(match lo.len() {
        0 => FiberShape::Point,
        1 => FiberShape::Interval(lo[0], hi[0]),
        2 => FiberShape::Polygon(vec![
            [lo[0], lo[1]],
            [hi[0], lo[1]],
            [hi[0], hi[1]],
            [lo[0], hi[1]],
        ]),
        3 => {
            let mut rows = Vec::new();
            for j in 0..3 {
                let mut e = [0.0; 3];
                e[j] = 1.0;
                rows.push((e, hi[j]));
                e[j] = -1.0;
                rows.push((e, -lo[j]));
            }
            FiberShape::Polytope(rows)
        }
        d => {
            return Err(Error::Capability(format!(
                "fiber slices of dimension {d} are not supported"
            )))
        }
    })
}

impl MixedRegion {
    pub fn dim(&self) -> usize {
        self.n + self.d
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    /// Fibers of a bounded polyhedron.
    pub fn from_polyhedron(poly: &Polyhedron, n: usize, d: usize) -> Result<Self> {
        check_dim(n + d, poly.dim())?;
        if poly.rows().iter().any(|r| r.is_empty_certificate()) {
            return Ok(MixedRegion {
                n,
                d,
                fibers: Vec::new(),
            });
        }
        let (lo, hi) = match ConvexBody::Polyhedron(poly.clone()).bounding_box() {
            Ok(b) => b,
            Err(Error::InvalidInput(m)) if m.contains("empty") => {
                return Ok(MixedRegion {
                    n,
                    d,
                    fibers: Vec::new(),
                })
            }
            Err(e) => return Err(e),
        };
        Self::from_rows_in_box(poly.rows(), n, d, lo.as_slice(), hi.as_slice())
    }

    fn from_rows_in_box(
        rows: &[Halfspace],
        n: usize,
        d: usize,
        lo: &[f64],
        hi: &[f64],
    ) -> Result<Self> {
        let mut fibers = Vec::new();
        for x in integer_points(&lo[..n], &hi[..n])? {
            let mut shape = Some(box_shape(&lo[n..], &hi[n..])?);
            for r in rows {
                let Some(s) = shape else { break };
                let shift: f64 = (0..n).map(|i| r.normal[i] * x[i] as f64).sum();
                let a: Vec<f64> = r.normal.iter().skip(n).copied().collect();
                shape = s.cut(&a, r.offset - shift);
            }
            if let Some(shape) = shape {
                fibers.push(Fiber { x, shape });
            }
        }
        Ok(MixedRegion { n, d, fibers })
    }

    /// Fibers of a bounded convex body.
    ///
    /// Polyhedral bodies are handled exactly. Other bodies need `d <= 2`;
    /// their two-dimensional slices are replaced by inscribed polygons with
    /// [`SLICE_RAYS`] vertices.
    pub fn from_body(body: &ConvexBody, n: usize, d: usize) -> Result<Self> {
        check_dim(n + d, body.dim())?;
        if let Some(poly) = body.as_polyhedron() {
            return Self::from_polyhedron(&poly, n, d);
        }
        let (lo, hi) = body.bounding_box()?;
        let mut fibers = Vec::new();
        for x in integer_points(&lo.as_slice()[..n], &hi.as_slice()[..n])? {
            let shape = match d {
                0 => body
                    .contains(&full_point(&x, &[]), TAU_FEAS)?
                    .then_some(FiberShape::Point),
                1 => {
                    let mut u = DVector::zeros(n + 1);
                    u[n] = 1.0;
                    body.chord(&full_point(&x, &[0.0]), &u)?.and_then(|(a, b)| {
                        let (a, b) = (a.max(lo[n]), b.min(hi[n]));
                        (b > a).then_some(FiberShape::Interval(a, b))
                    })
                }
                2 => curved_slice(body, &x, &lo.as_slice()[n..], &hi.as_slice()[n..])?,
                _ => {
                    return Err(Error::Capability(
                        "curved bodies need d <= 2 for slice volumes".into(),
                    ))
                }
            };
            if let Some(shape) = shape {
                fibers.push(Fiber { x, shape });
            }
        }
        Ok(MixedRegion { n, d, fibers })
    }

    pub fn volume(&self) -> f64 {
        self.fibers.iter().map(|f| f.shape.volume()).sum()
    }

    /// `nu(S ∩ {z : <a, z> <= b})`.
    pub fn volume_below(&self, a: &[f64], b: f64) -> f64 {
        let n = self.n;
        self.fibers
            .iter()
            .map(|f| {
                let shift: f64 = (0..n).map(|i| a[i] * f.x[i] as f64).sum();
                f.shape.volume_below(&a[n..], b - shift)
            })
            .sum()
    }

    pub fn volume_in(&self, h: &Halfspace) -> f64 {
        if h.is_empty_certificate() {
            return 0.0;
        }
        self.volume_below(h.normal.as_slice(), h.offset)
    }

    pub fn cut(&self, h: &Halfspace) -> Self {
        let n = self.n;
        let fibers = if h.is_empty_certificate() {
            Vec::new()
        } else {
            self.fibers
                .iter()
                .filter_map(|f| {
                    let shift: f64 = (0..n).map(|i| h.normal[i] * f.x[i] as f64).sum();
                    let a: Vec<f64> = h.normal.iter().skip(n).copied().collect();
                    f.shape.cut(&a, h.offset - shift).map(|shape| Fiber {
                        x: f.x.clone(),
                        shape,
                    })
                })
                .collect()
        };
        MixedRegion {
            n,
            d: self.d,
            fibers,
        }
    }

    /// Drops the fiber over `x`.
    pub fn remove_fiber(&mut self, x: &[i64]) {
        self.fibers.retain(|f| f.x != x);
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        let n = self.n;
        if (0..n).any(|i| (z[i] - z[i].round()).abs() > tol) {
            return false;
        }
        let x: Vec<i64> = (0..n).map(|i| z[i].round() as i64).collect();
        self.fibers
            .iter()
            .find(|f| f.x == x)
            .is_some_and(|f| f.shape.contains(&z.as_slice()[n..], tol))
    }

    pub fn point(&self, fiber: usize, y: &[f64]) -> DVector<f64> {
        full_point(&self.fibers[fiber].x, y)
    }
}

/// Inscribed polygon of the slice of a curved body over `x`.
fn curved_slice(
    body: &ConvexBody,
    x: &[i64],
    lo: &[f64],
    hi: &[f64],
) -> Result<Option<FiberShape>> {
    let n = x.len();
    let mut e1 = DVector::zeros(n + 2);
    e1[n] = 1.0;
    // interior point: midpoint of the longest horizontal chord on a scan
    let scans = 257;
    let mut best: Option<(f64, [f64; 2])> = None;
    for i in 0..scans {
        let y2 = lo[1] + (hi[1] - lo[1]) * (i as f64 + 0.5) / scans as f64;
        if let Some((a, b)) = body.chord(&full_point(x, &[0.0, y2]), &e1)? {
            if b > a && best.map_or(true, |(len, _)| b - a > len) {
                best = Some((b - a, [0.5 * (a + b), y2]));
            }
        }
    }
    let Some((_, c)) = best else { return Ok(None) };
    let p = full_point(x, &c);
    let mut poly = Vec::with_capacity(SLICE_RAYS);
    for k in 0..SLICE_RAYS {
        let t = 2.0 * std::f64::consts::PI * k as f64 / SLICE_RAYS as f64;
        let mut u = DVector::zeros(n + 2);
        u[n] = t.cos();
        u[n + 1] = t.sin();
        let Some((_, s)) = body.chord(&p, &u)? else {
            continue;
        };
        let s = s.max(0.0);
        poly.push([c[0] + s * t.cos(), c[1] + s * t.sin()]);
    }
    Ok((poly.len() >= 3 && polygon_area(&poly) > 0.0).then_some(FiberShape::Polygon(poly)))
}

/// `nu(C ∩ (Z^n x R^d))`: summed `d`-volumes of fiber slices, or the lattice
/// point count when `d = 0`.
pub fn mixed_integer_volume(body: &ConvexBody, n: usize, d: usize) -> Result<f64> {
    Ok(MixedRegion::from_body(body, n, d)?.volume())
}

fn signed_area(p: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let (u, v) = (p[i], p[(i + 1) % p.len()]);
        s += u[0] * v[1] - v[0] * u[1];
    }
    0.5 * s
}

fn polygon_area(p: &[[f64; 2]]) -> f64 {
    if p.len() < 3 {
        0.0
    } else {
        signed_area(p).abs()
    }
}

/// Sutherland–Hodgman step against `<a, y> <= b`.
fn clip_polygon(p: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(p.len() + 1);
    for i in 0..p.len() {
        let (u, v) = (p[i], p[(i + 1) % p.len()]);
        let su = a[0] * u[0] + a[1] * u[1] - b;
        let sv = a[0] * v[0] + a[1] * v[1] - b;
        if su <= 0.0 {
            out.push(u);
        }
        if (su < 0.0 && sv > 0.0) || (su > 0.0 && sv < 0.0) {
            let t = su / (su - sv);
            out.push([u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1])]);
        }
    }
    out
}

/// Counterclockwise convex hull (monotone chain); collinear points dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// The convex polygon spanned by `points` as a polyhedron in `R^2`.
pub fn convex_polygon(points: &[[f64; 2]]) -> Result<Polyhedron> {
    let hull = convex_hull_2d(points);
    if hull.len() < 3 {
        return Err(Error::InvalidInput(
            "polygon needs three affinely independent points".into(),
        ));
    }
    let mut rows = Vec::new();
    for i in 0..hull.len() {
        let (u, v) = (hull[i], hull[(i + 1) % hull.len()]);
        // outward normal of a counterclockwise edge
        let a = vec![v[1] - u[1], u[0] - v[0]];
        let b = a[0] * u[0] + a[1] * u[1];
        rows.push((a, b));
    }
    Polyhedron::from_rows(2, &rows)
}

fn polytope_vertices(rows: &[([f64; 3], f64)]) -> Vec<Vector3<f64>> {
    let m = rows.len();
    let mut out: Vec<Vector3<f64>> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let a = Matrix3::from_rows(&[
                    Vector3::from(rows[i].0).transpose(),
                    Vector3::from(rows[j].0).transpose(),
                    Vector3::from(rows[k].0).transpose(),
                ]);
                let Some(inv) = a.try_inverse() else { continue };
                let v = inv * Vector3::new(rows[i].1, rows[j].1, rows[k].1);
                if !v.iter().all(|c| c.is_finite()) {
                    continue;
                }
                let ok = rows.iter().all(|(r, b)| {
                    let s = Vector3::from(*r).norm().max(1.0);
                    Vector3::from(*r).dot(&v) <= b + 1e-9 * s * v.amax().max(1.0)
                });
                if ok
                    && !out
                        .iter()
                        .any(|w| (w - v).amax() <= 1e-10 * v.amax().max(1.0))
                {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Exact volume: the cross-sectional area in `y_1` is quadratic between
/// consecutive vertex heights, so three Gauss points per piece suffice.
fn polytope_volume(rows: &[([f64; 3], f64)]) -> f64 {
    let vs = polytope_vertices(rows);
    if vs.len() < 4 {
        return 0.0;
    }
    let mut heights: Vec<f64> = vs.iter().map(|v| v[0]).collect();
    heights.sort_by(f64::total_cmp);
    heights.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &vs {
        for j in 0..2 {
            lo[j] = lo[j].min(v[j + 1]);
            hi[j] = hi[j].max(v[j + 1]);
        }
    }
    let frame = vec![
        [lo[0] - 1.0, lo[1] - 1.0],
        [hi[0] + 1.0, lo[1] - 1.0],
        [hi[0] + 1.0, hi[1] + 1.0],
        [lo[0] - 1.0, hi[1] + 1.0],
    ];
    let area = |t: f64| {
        let mut p = frame.clone();
        for (a, b) in rows {
            p = clip_polygon(&p, [a[1], a[2]], b - a[0] * t);
            if p.len() < 3 {
                return 0.0;
            }
        }
        polygon_area(&p)
    };
    let gauss = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    let mut vol = 0.0;
    for w in heights.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        vol += half
            * gauss
                .iter()
                .map(|&(s, wt)| wt * area(mid + half * s))
                .sum::<f64>();
    }
    vol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_unit_segments() {
        let body = ConvexBody::cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert!((mixed_integer_volume(&body, 1, 1).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_point_count() {
        let body = ConvexBody::cube(&[-1.5, -1.5], &[1.5, 1.5]);
        assert_eq!(mixed_integer_volume(&body, 2, 0).unwrap(), 9.0);
    }

    #[test]
    fn ball_chords() {
        let body = ConvexBody::ball(&[0.0, 0.0], 1.2);
        let chord = 2.0 * (1.44f64 - 1.0).sqrt();
        let expect = 2.0 * chord + 2.4;
        assert!((mixed_integer_volume(&body, 1, 1).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn disk_area() {
        let body = ConvexBody::ball(&[0.2, -0.1], 1.0);
        let v = mixed_integer_volume(&body, 0, 2).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-3, "{v}");
    }

    #[test]
    fn cube_and_simplex_volumes() {
        let cube = ConvexBody::cube(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]);
        assert!((mixed_integer_volume(&cube, 0, 3).unwrap() - 6.0).abs() < 1e-9);
        let simplex = Polyhedron::from_rows(
            3,
            &[
                (vec![-1.0, 0.0, 0.0], 0.0),
                (vec![0.0, -1.0, 0.0], 0.0),
                (vec![0.0, 0.0, -1.0], 0.0),
                (vec![1.0, 1.0, 1.0], 1.0),
            ],
        )
        .unwrap();
        let v = mixed_integer_volume(&ConvexBody::Polyhedron(simplex), 0, 3).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn triangle_polygon() {
        let p = convex_polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]]).unwrap();
        assert_eq!(p.len(), 3);
        let r = MixedRegion::from_polyhedron(&p, 0, 2).unwrap();
        assert!((r.volume() - 0.5).abs() < 1e-12);
        let half = r.volume_below(&[1.0, 0.0], 0.5);
        assert!((half - 0.375).abs() < 1e-12);
    }
}
