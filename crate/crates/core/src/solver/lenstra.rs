//! Recursion on the integer dimension.
//!
//! A node lives on an affine lattice slice `x = x0 + B u`, `y` free, and
//! carries an ellipsoid in the local coordinates `(u, y)` containing the part
//! of the feasible region on that slice. While the ellipsoid is large the
//! node either queries its center (no integer part left), queries the fiber
//! minimizer over the closest lattice point (when that point is deep inside),
//! or slices along a flat integer direction and recurses.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    log_unit_ball_volume, min_norm_over_fiber, project_to_integer_coordinates, shallow_cut_update,
    CutOutcome, Ellipsoid, PdMatrix,
};
use crate::lattice::{cvp, flatness_direction, kernel_slice_basis, IntVec};
use crate::model::{
    ConvexBody, Halfspace, OracleAnswer, Point, ProblemParameters, SeparationOracle,
};

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult {
    FoundPoint(Point),
    NoDeepPoint,
}

impl FeasibilityResult {
    pub fn point(&self) -> Option<&Point> {
        match self {
            FeasibilityResult::FoundPoint(z) => Some(z),
            FeasibilityResult::NoDeepPoint => None,
        }
    }
}

/// One accepted ellipsoid update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    pub k: usize,
    pub beta: f64,
    /// `log vol(E') - log vol(E)`, negative.
    pub delta_log_volume: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub separation_queries: usize,
    pub first_order_queries: usize,
    pub updates: usize,
    pub nodes: usize,
    /// Feasibility runs made by a binary search, not counting the initial one.
    pub feasibility_calls: usize,
    /// Largest number of separation queries issued by a single node.
    pub max_node_queries: usize,
    pub wall_ms: f64,
    pub update_log: Vec<UpdateRecord>,
}

impl SolveStats {
    pub(crate) fn absorb(&mut self, other: SolveStats) {
        self.separation_queries += other.separation_queries;
        self.first_order_queries += other.first_order_queries;
        self.updates += other.updates;
        self.nodes += other.nodes;
        self.feasibility_calls += other.feasibility_calls;
        self.max_node_queries = self.max_node_queries.max(other.max_node_queries);
        self.wall_ms += other.wall_ms;
        self.update_log.extend(other.update_log);
    }
}

/// `ceil(5k(k+1)^2 * k ln(R/delta)) + 1` with `k = n + d`: queries one node may
/// issue before its ellipsoid is too small to hold a `delta`-ball.
pub fn node_query_bound(p: &ProblemParameters) -> usize {
    let k = p.dim() as f64;
    let iters = 5.0 * k * (k + 1.0).powi(2) * k * (p.radius / p.delta).ln().max(0.0);
    iters.ceil() as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StopRule {
    /// Give up on a node once its ellipsoid is smaller than a `delta`-ball.
    Deep { delta: f64 },
    /// Pure integer: below volume `1/n!` all lattice points of the ellipsoid
    /// lie on one hyperplane, so slice exactly instead of stopping.
    Exact,
}

struct Node {
    x0: IntVec,
    /// Columns of `B`, each of length `n`.
    basis: Vec<IntVec>,
    /// `None` for a node that is a single point.
    ellipsoid: Option<Ellipsoid>,
    threshold: f64,
}

impl Node {
    fn n_loc(&self) -> usize {
        self.basis.len()
    }

    fn global(&self, local: &DVector<f64>, d: usize) -> Point {
        let n = self.x0.len();
        let nl = self.n_loc();
        let mut z = DVector::zeros(n + d);
        for i in 0..n {
            z[i] = self.x0[i] as f64
                + (0..nl)
                    .map(|j| self.basis[j][i] as f64 * local[j])
                    .sum::<f64>();
        }
        for j in 0..d {
            z[n + j] = local[nl + j];
        }
        z
    }

    /// Global point whose integer part is computed exactly.
    fn global_int(&self, u: &[i64], y: &[f64]) -> Result<Point> {
        let n = self.x0.len();
        let mut z = DVector::zeros(n + y.len());
        for i in 0..n {
            let mut acc = self.x0[i];
            for (j, &uj) in u.iter().enumerate() {
                acc = self.basis[j][i]
                    .checked_mul(uj)
                    .and_then(|v| v.checked_add(acc))
                    .ok_or_else(overflow)?;
            }
            z[i] = acc as f64;
        }
        for (j, &v) in y.iter().enumerate() {
            z[n + j] = v;
        }
        Ok(z)
    }

    /// The global halfspace in local coordinates; `None` when it is constant
    /// on the slice, which then lies entirely on the violated side.
    fn pullback(&self, h: &Halfspace) -> Option<Halfspace> {
        if h.is_empty_certificate() {
            return None;
        }
        let n = self.x0.len();
        let nl = self.n_loc();
        let d = h.dim() - n;
        let mut normal = DVector::zeros(nl + d);
        for j in 0..nl {
            normal[j] = (0..n).map(|i| self.basis[j][i] as f64 * h.normal[i]).sum();
        }
        for j in 0..d {
            normal[nl + j] = h.normal[n + j];
        }
        let shift: f64 = (0..n).map(|i| self.x0[i] as f64 * h.normal[i]).sum();
        if normal.amax() <= 1e-12 * h.normal.amax() {
            return None;
        }
        Some(
            Halfspace {
                normal,
                offset: h.offset - shift,
            }
            .normalized(),
        )
    }
}

fn overflow() -> Error {
    Error::Capability("integer overflow in slice coordinates".into())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `{v : t + M v in E}` as an ellipsoid in `v`, or `None` when the affine
/// subspace misses the interior of `E`.
pub(crate) fn slice_ellipsoid(
    e: &Ellipsoid,
    t: &DVector<f64>,
    m: &DMatrix<f64>,
) -> Result<Option<Ellipsoid>> {
    let mut ainv_m = DMatrix::zeros(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        ainv_m.set_column(c, &e.shape.solve(&m.column(c).into_owned()));
    }
    let p = m.transpose() * &ainv_m;
    let r = t - &e.center;
    let g = ainv_m.transpose() * &r;
    let (pd, _) = PdMatrix::new_with_jitter(p)?;
    let q = -pd.solve(&g);
    let r0 = e.shape.inv_quad(&r) + g.dot(&q);
    if !(r0 < 1.0 - 1e-12) {
        return Ok(None);
    }
    let (shape, _) = PdMatrix::new_with_jitter(pd.inverse() * (1.0 - r0))?;
    Ok(Some(Ellipsoid::new(q, shape)?))
}

enum Query {
    Inside(Point),
    Separator(Halfspace),
}

pub(crate) struct Engine<'a> {
    oracle: &'a dyn SeparationOracle,
    n: usize,
    d: usize,
    radius: f64,
    rule: StopRule,
    pub(crate) stats: SolveStats,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        oracle: &'a dyn SeparationOracle,
        n: usize,
        d: usize,
        radius: f64,
        rule: StopRule,
    ) -> Result<Self> {
        crate::error::check_dim(n + d, oracle.dim())?;
        if rule == StopRule::Exact && d != 0 {
            return Err(Error::InvalidInput("exact slicing needs d = 0".into()));
        }
        Ok(Engine {
            oracle,
            n,
            d,
            radius,
            rule,
            stats: SolveStats::default(),
        })
    }

    fn threshold(&self, k: usize, n_loc: usize, log_det_gram: f64) -> f64 {
        match self.rule {
            StopRule::Deep { delta } => {
                log_unit_ball_volume(k) + k as f64 * delta.ln() - 0.5 * log_det_gram
            }
            StopRule::Exact => -ln_factorial(n_loc),
        }
    }

    pub(crate) fn run(&mut self) -> Result<Option<Point>> {
        let start = Instant::now();
        let k = self.n + self.d;
        let root = Node {
            x0: vec![0; self.n],
            basis: (0..self.n)
                .map(|j| (0..self.n).map(|i| (i == j) as i64).collect())
                .collect(),
            ellipsoid: Some(Ellipsoid::ball(DVector::zeros(k), self.radius)),
            threshold: self.threshold(k, self.n, 0.0),
        };
        let out = self.solve_node(root);
        self.stats.wall_ms += start.elapsed().as_secs_f64() * 1e3;
        out
    }

    fn query(&mut self, z: &Point) -> Result<Query> {
        self.stats.separation_queries += 1;
        match self.oracle.separate(z)? {
            OracleAnswer::Inside => Ok(Query::Inside(z.clone())),
            OracleAnswer::Separator(h) => {
                if !(h.excess(z) > 0.0) {
                    return Err(Error::Instance(format!(
                        "separator does not cut off its query point (excess {:e})",
                        h.excess(z)
                    )));
                }
                Ok(Query::Separator(h))
            }
        }
    }

    /// Applies a cut; `None` when the node's region is empty.
    fn cut(&mut self, e: &Ellipsoid, h: &Halfspace, beta: f64) -> Result<Option<Ellipsoid>> {
        match shallow_cut_update(e, h, beta)? {
            CutOutcome::Updated(next) => {
                self.stats.updates += 1;
                self.stats.update_log.push(UpdateRecord {
                    k: e.dim(),
                    beta,
                    delta_log_volume: next.log_volume() - e.log_volume(),
                });
                Ok(Some(next))
            }
            CutOutcome::Empty => Ok(None),
            CutOutcome::NoCutNeeded if beta == 0.0 => {
                // the query was the center, so only rounding can land here
                let central = Halfspace {
                    offset: h.normal.dot(&e.center),
                    normal: h.normal.clone(),
                };
                match shallow_cut_update(e, &central, 0.0)? {
                    CutOutcome::Updated(_) => self.cut(e, &central, 0.0),
                    _ => Err(Error::Numeric("central cut rejected".into())),
                }
            }
            CutOutcome::NoCutNeeded => Err(Error::Numeric(
                "separator misses the core of the current ellipsoid".into(),
            )),
        }
    }

    fn solve_node(&mut self, node: Node) -> Result<Option<Point>> {
        self.stats.nodes += 1;
        let q0 = self.stats.separation_queries;
        let Some(mut e) = node.ellipsoid.clone() else {
            let z = node.global_int(&[], &[])?;
            let out = match self.query(&z)? {
                Query::Inside(z) => Some(z),
                Query::Separator(_) => None,
            };
            self.note_node_queries(q0);
            return Ok(out);
        };
        let k = e.dim();
        let n_loc = node.n_loc();
        loop {
            let small = e.log_volume() < node.threshold;
            if small && matches!(self.rule, StopRule::Deep { .. }) {
                self.note_node_queries(q0);
                return Ok(None);
            }
            if n_loc == 0 {
                let z = node.global(&e.center, self.d);
                let h = match self.query(&z)? {
                    Query::Inside(z) => {
                        self.note_node_queries(q0);
                        return Ok(Some(z));
                    }
                    Query::Separator(h) => h,
                };
                let Some(hl) = node.pullback(&h) else {
                    self.note_node_queries(q0);
                    return Ok(None);
                };
                match self.cut(&e, &hl, 0.0)? {
                    Some(next) => e = next,
                    None => {
                        self.note_node_queries(q0);
                        return Ok(None);
                    }
                }
                continue;
            }
            let proj = project_to_integer_coordinates(&e, n_loc)?;
            if !small {
                let beta = 1.0 / (k as f64 + 1.0);
                let xhat = cvp(&proj.shape, &proj.center)?;
                let xf = DVector::from_iterator(n_loc, xhat.iter().map(|&v| v as f64));
                if proj.norm_of_offset(&xf) < beta - 1e-12 {
                    let zl = min_norm_over_fiber(&e, &xf)?;
                    let y: Vec<f64> = zl.iter().skip(n_loc).copied().collect();
                    let z = node.global_int(&xhat, &y)?;
                    let h = match self.query(&z)? {
                        Query::Inside(z) => {
                            self.note_node_queries(q0);
                            return Ok(Some(z));
                        }
                        Query::Separator(h) => h,
                    };
                    let Some(hl) = node.pullback(&h) else {
                        self.note_node_queries(q0);
                        return Ok(None);
                    };
                    match self.cut(&e, &hl, beta)? {
                        Some(next) => e = next,
                        None => {
                            self.note_node_queries(q0);
                            return Ok(None);
                        }
                    }
                    continue;
                }
            }
            let (w, width) = flatness_direction(&proj.shape)?;
            if !small {
                let limit = (n_loc * (k + 1)) as f64 + 1e-6;
                if width > limit {
                    return Err(Error::Numeric(format!(
                        "flatness width {width} exceeds {limit} on a lattice-free core"
                    )));
                }
            }
            self.note_node_queries(q0);
            return self.slices(&node, &e, &proj, &w, width);
        }
    }

    fn note_node_queries(&mut self, q0: usize) {
        let used = self.stats.separation_queries - q0;
        self.stats.max_node_queries = self.stats.max_node_queries.max(used);
    }

    fn slices(
        &mut self,
        node: &Node,
        e: &Ellipsoid,
        proj: &Ellipsoid,
        w: &[i64],
        width: f64,
    ) -> Result<Option<Point>> {
        let wf = DVector::from_iterator(w.len(), w.iter().map(|&v| v as f64));
        let center = wf.dot(&proj.center);
        let lo = (center - 0.5 * width).ceil() as i64;
        let hi = (center + 0.5 * width).floor() as i64;
        let mut ms: Vec<i64> = (lo..=hi).collect();
        ms.sort_by(|a, b| {
            let da = (*a as f64 - center).abs();
            let db = (*b as f64 - center).abs();
            da.total_cmp(&db).then(a.cmp(b))
        });
        for m in ms {
            if let Some(child) = self.child(node, e, w, m)? {
                if let Some(z) = self.solve_node(child)? {
                    return Ok(Some(z));
                }
            }
        }
        Ok(None)
    }

    fn child(&self, node: &Node, e: &Ellipsoid, w: &[i64], m: i64) -> Result<Option<Node>> {
        let Some(sb) = kernel_slice_basis(w, m)? else {
            return Ok(None);
        };
        let n = self.n;
        let d = self.d;
        let n_loc = node.n_loc();
        let n_c = n_loc - 1;
        let k_c = n_c + d;
        let combine = |coef: &[i64]| -> Result<IntVec> {
            (0..n)
                .map(|i| {
                    let mut acc: i64 = 0;
                    for (j, &c) in coef.iter().enumerate() {
                        acc = node.basis[j][i]
                            .checked_mul(c)
                            .and_then(|v| v.checked_add(acc))
                            .ok_or_else(overflow)?;
                    }
                    Ok(acc)
                })
                .collect()
        };
        let shift = combine(&sb.x0)?;
        let x0: IntVec = node
            .x0
            .iter()
            .zip(&shift)
            .map(|(a, b)| a.checked_add(*b).ok_or_else(overflow))
            .collect::<Result<_>>()?;
        let basis: Vec<IntVec> = sb.basis.iter().map(|c| combine(c)).collect::<Result<_>>()?;

        let t_loc = DVector::from_fn(
            n_loc + d,
            |i, _| if i < n_loc { sb.x0[i] as f64 } else { 0.0 },
        );
        if k_c == 0 {
            let xg = DVector::from_iterator(n, x0.iter().map(|&v| v as f64));
            if !(e.shape.inv_quad(&(&t_loc - &e.center)) < 1.0) || xg.norm() > self.radius {
                return Ok(None);
            }
            return Ok(Some(Node {
                x0,
                basis,
                ellipsoid: None,
                threshold: 0.0,
            }));
        }
        let m_loc = DMatrix::from_fn(n_loc + d, k_c, |r, c| {
            if r < n_loc && c < n_c {
                sb.basis[c][r] as f64
            } else if r >= n_loc && c >= n_c && r - n_loc == c - n_c {
                1.0
            } else {
                0.0
            }
        });
        let m_glob = DMatrix::from_fn(n + d, k_c, |r, c| {
            if r < n && c < n_c {
                basis[c][r] as f64
            } else if r >= n && c >= n_c && r - n == c - n_c {
                1.0
            } else {
                0.0
            }
        });
        let t_glob = DVector::from_fn(n + d, |i, _| if i < n { x0[i] as f64 } else { 0.0 });
        let Some(from_parent) = slice_ellipsoid(e, &t_loc, &m_loc)? else {
            return Ok(None);
        };
        let ball = Ellipsoid::ball(DVector::zeros(n + d), self.radius);
        let Some(from_ball) = slice_ellipsoid(&ball, &t_glob, &m_glob)? else {
            return Ok(None);
        };
        let ellipsoid = if from_ball.log_volume() < from_parent.log_volume() {
            from_ball
        } else {
            from_parent
        };
        let b = m_glob.view((0, 0), (n, n_c)).into_owned();
        let log_det_gram = if n_c == 0 {
            0.0
        } else {
            PdMatrix::new_with_jitter(b.transpose() * &b)?.0.log_det()
        };
        Ok(Some(Node {
            x0,
            basis,
            ellipsoid: Some(ellipsoid),
            threshold: self.threshold(k_c, n_c, log_det_gram),
        }))
    }
}

/// Finds a point of `body ∩ (Z^n x R^d)` or reports that none is `delta`-deep.
///
/// The body must lie in the Euclidean ball of radius `p.radius` about the
/// origin.
pub fn feasibility(body: &ConvexBody, p: &ProblemParameters) -> Result<FeasibilityResult> {
    Ok(feasibility_with_stats(body, p)?.0)
}

pub fn feasibility_with_stats(
    oracle: &dyn SeparationOracle,
    p: &ProblemParameters,
) -> Result<(FeasibilityResult, SolveStats)> {
    p.validate()?;
    let mut engine = Engine::new(
        oracle,
        p.n,
        p.d,
        p.radius,
        StopRule::Deep { delta: p.delta },
    )?;
    let found = engine.run()?;
    let result = match found {
        Some(z) => FeasibilityResult::FoundPoint(z),
        None => FeasibilityResult::NoDeepPoint,
    };
    Ok((result, engine.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, d: usize, r: f64, delta: f64) -> ProblemParameters {
        ProblemParameters::new(n, d, r).with_delta(delta)
    }

    #[test]
    fn off_fiber_ball_has_no_deep_point() {
        let body = ConvexBody::ball(&[0.5, 0.0], 0.4);
        let r = feasibility(&body, &params(1, 1, 1.0, 0.05)).unwrap();
        assert_eq!(r, FeasibilityResult::NoDeepPoint);
    }

    #[test]
    fn box_finds_lattice_point() {
        let body = ConvexBody::cube(&[-1.2, -1.2], &[1.2, 1.2]);
        let r = feasibility(&body, &params(2, 0, 1.7, 0.01)).unwrap();
        let z = r.point().unwrap();
        for v in z.iter() {
            assert!([-1.0, 0.0, 1.0].contains(v));
        }
    }

    #[test]
    fn large_ball() {
        let body = ConvexBody::ball(&[0.0; 4], 10.0);
        let r = feasibility(&body, &params(2, 2, 10.0, 0.1)).unwrap();
        let z = r.point().unwrap();
        assert!(body.contains(z, 1e-9).unwrap());
        assert_eq!(z[0].fract(), 0.0);
        assert_eq!(z[1].fract(), 0.0);
    }

    #[test]
    fn thin_slab_is_sliced() {
        // 0.3 <= x1 + 2 x2 + 0.1 y <= 1.05 contains (1, 0, *) only near y small
        let body = ConvexBody::Polyhedron(
            crate::model::Polyhedron::from_rows(
                3,
                &[
                    (vec![1.0, 2.0, 0.1], 1.05),
                    (vec![-1.0, -2.0, -0.1], -0.3),
                    (vec![1.0, 0.0, 0.0], 3.0),
                    (vec![-1.0, 0.0, 0.0], 3.0),
                    (vec![0.0, 1.0, 0.0], 3.0),
                    (vec![0.0, -1.0, 0.0], 3.0),
                    (vec![0.0, 0.0, 1.0], 1.0),
                    (vec![0.0, 0.0, -1.0], 1.0),
                ],
            )
            .unwrap(),
        );
        let (r, stats) = feasibility_with_stats(&body, &params(2, 1, 6.0, 0.01)).unwrap();
        let z = r.point().unwrap().clone();
        assert!(body.contains(&z, 1e-9).unwrap());
        assert!(stats.nodes >= 1);
    }

    #[test]
    fn slice_of_unit_ball() {
        let e = Ellipsoid::ball(DVector::zeros(2), 1.0);
        let t = DVector::from_column_slice(&[0.6, 0.0]);
        let m = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let s = slice_ellipsoid(&e, &t, &m).unwrap().unwrap();
        assert!((s.shape.matrix()[(0, 0)] - 0.64).abs() < 1e-12);
        assert!(s.center[0].abs() < 1e-12);
        let t = DVector::from_column_slice(&[1.0, 0.0]);
        assert!(slice_ellipsoid(&e, &t, &m).unwrap().is_none());
    }
}
