//! Resisting separation oracle on `X0 = [0,1]^n x [0,R]^d`.
//!
//! Every in-box query on an integer fiber either halves that fiber's box in
//! one continuous coordinate (with a hyperplane tilted so that no other fiber
//! and no earlier inside point is touched) or, once the fiber's counter is
//! saturated, cuts the whole fiber away. Queries with a fractional integer
//! part are answered "inside". Two instances that agree with every answer but
//! share no mixed-integer point can then be read off the surviving boxes.

use std::sync::{Arc, Mutex, MutexGuard};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::body::ConvexBody;
use crate::model::halfspace::Halfspace;
use crate::model::oracle::OracleAnswer;
use crate::model::params::TAU_INT;
use crate::model::transcript::{Answer, Transcript, TranscriptEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerKind {
    Outside,
    Inside,
    Halving,
    Kill,
}

impl AnswerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnswerKind::Outside => "outside",
            AnswerKind::Inside => "inside",
            AnswerKind::Halving => "halving",
            AnswerKind::Kill => "kill",
        }
    }
}

/// One row of the match log.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchLogRow {
    pub query_index: usize,
    pub fiber: Option<usize>,
    pub counter: usize,
    pub kind: AnswerKind,
    pub max_live_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberState {
    pub x: Vec<i64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counter: usize,
    pub killed: bool,
}

impl FiberState {
    /// Smallest side length of the fiber box.
    pub fn width(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryState {
    pub n: usize,
    pub d: usize,
    pub radius: f64,
    pub rho: f64,
    pub fibers: Vec<FiberState>,
    /// Halfspaces answered so far; the current set is `X0` cut by all of them.
    pub cuts: Vec<Halfspace>,
    pub inside_points: Vec<DVector<f64>>,
    pub transcript: Transcript,
    pub in_box_queries: usize,
    pub log: Vec<MatchLogRow>,
}

/// The two indistinguishable instances produced after a short match.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub fiber: usize,
    pub box1: (Vec<f64>, Vec<f64>),
    pub box2: (Vec<f64>, Vec<f64>),
    pub points1: Vec<DVector<f64>>,
    pub points2: Vec<DVector<f64>>,
}

impl Certificate {
    pub fn bodies(&self) -> (ConvexBody, ConvexBody) {
        (
            ConvexBody::Hull(self.points1.clone()),
            ConvexBody::Hull(self.points2.clone()),
        )
    }

    /// The two fiber boxes share no point (exact coordinate comparison).
    pub fn boxes_disjoint(&self) -> bool {
        let (l1, u1) = &self.box1;
        let (l2, u2) = &self.box2;
        (0..l1.len()).any(|j| u1[j] < l2[j] || u2[j] < l1[j])
    }

    /// Whether both instances are consistent with every recorded answer:
    /// inside points belong to both hulls and every returned halfspace
    /// contains both hulls while cutting off its query.
    pub fn replays(&self, transcript: &Transcript) -> Result<bool> {
        for points in [&self.points1, &self.points2] {
            let hull = ConvexBody::Hull(points.clone());
            for e in transcript.entries() {
                match &e.answer {
                    Answer::Separation(OracleAnswer::Inside) => {
                        if !hull.separate_tol(&e.point, 1e-9)?.is_inside() {
                            return Ok(false);
                        }
                    }
                    Answer::Separation(OracleAnswer::Separator(h)) => {
                        if h.excess(&e.point) <= 0.0 || points.iter().any(|p| h.excess(p) > 1e-9) {
                            return Ok(false);
                        }
                    }
                    Answer::FirstOrder(_) => {}
                }
            }
        }
        Ok(true)
    }
}

impl AdversaryState {
    pub fn new(n: usize, d: usize, radius: f64, rho: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "the adversary needs at least one continuous variable".into(),
            });
        }
        if n > 16 {
            return Err(Error::Capability(format!("2^{n} fibers is too many")));
        }
        if !(radius > 0.0 && rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("need R > 0 and 0 < rho <= 1, got R = {radius}, rho = {rho}"),
            });
        }
        let fibers = (0..1usize << n)
            .map(|idx| FiberState {
                x: (0..n).map(|l| ((idx >> l) & 1) as i64).collect(),
                lower: vec![0.0; d],
                upper: vec![radius; d],
                counter: 0,
                killed: false,
            })
            .collect();
        Ok(AdversaryState {
            n,
            d,
            radius,
            rho,
            fibers,
            cuts: Vec::new(),
            inside_points: Vec::new(),
            transcript: Transcript::new(),
            in_box_queries: 0,
            log: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n + self.d
    }

    /// `d log2(R / (3 rho))`: counter value at which a fiber is cut away.
    pub fn saturation(&self) -> f64 {
        self.d as f64 * (self.radius / (3.0 * self.rho)).log2()
    }

    /// `d 2^n log2(R / (3 rho))`: in-box queries below which a certificate exists.
    pub fn query_budget(&self) -> f64 {
        self.saturation() * (1u64 << self.n) as f64
    }

    pub fn ambient_box(&self) -> (DVector<f64>, DVector<f64>) {
        let k = self.dim();
        let lower = DVector::zeros(k);
        let upper = DVector::from_fn(k, |i, _| if i < self.n { 1.0 } else { self.radius });
        (lower, upper)
    }

    pub fn max_live_width(&self) -> f64 {
        self.fibers
            .iter()
            .filter(|f| !f.killed)
            .map(|f| f.width())
            .fold(0.0, f64::max)
    }

    fn fiber_index(&self, x: &[i64]) -> usize {
        x.iter().enumerate().map(|(l, &v)| (v as usize) << l).sum()
    }

    pub fn current_set_contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        let (lo, hi) = self.ambient_box();
        (0..z.len()).all(|i| z[i] >= lo[i] - tol && z[i] <= hi[i] + tol)
            && self.cuts.iter().all(|h| h.excess(z) <= tol)
    }

    /// `sigma_l = 2 x_l - 1`, so that `<sigma, x - x_i> = -|x - x_i|_1` on the cube.
    fn sigma(x: &[i64]) -> Vec<f64> {
        x.iter().map(|&v| 2.0 * v as f64 - 1.0).collect()
    }

    fn l1_to_vertex(&self, p: &DVector<f64>, x: &[i64]) -> f64 {
        (0..self.n).map(|l| (p[l] - x[l] as f64).abs()).sum()
    }

    pub fn answer(&mut self, z: &DVector<f64>) -> Result<OracleAnswer> {
        check_dim(self.dim(), z.len())?;
        let index = self.transcript.len();
        let (answer, fiber, kind) = self.decide(z)?;
        let counter = fiber.map_or(0, |f| self.fibers[f].counter);
        self.transcript
            .push(TranscriptEntry::separation(z.clone(), answer.clone()))?;
        self.log.push(MatchLogRow {
            query_index: index,
            fiber,
            counter,
            kind,
            max_live_width: self.max_live_width(),
        });
        Ok(answer)
    }

    fn decide(&mut self, z: &DVector<f64>) -> Result<(OracleAnswer, Option<usize>, AnswerKind)> {
        let k = self.dim();
        let (lo, hi) = self.ambient_box();
        // outside X0: the most violated face
        let mut worst: Option<(usize, bool, f64)> = None;
        for i in 0..k {
            if z[i] > hi[i] && worst.map_or(true, |w| z[i] - hi[i] > w.2) {
                worst = Some((i, true, z[i] - hi[i]));
            }
            if z[i] < lo[i] && worst.map_or(true, |w| lo[i] - z[i] > w.2) {
                worst = Some((i, false, lo[i] - z[i]));
            }
        }
        if let Some((i, up, _)) = worst {
            let mut e = DVector::zeros(k);
            let h = if up {
                e[i] = 1.0;
                Halfspace::new(e, hi[i])?
            } else {
                e[i] = -1.0;
                Halfspace::new(e, -lo[i])?
            };
            return Ok((OracleAnswer::Separator(h), None, AnswerKind::Outside));
        }
        if let Some(h) = self.cuts.iter().find(|h| h.excess(z) > 0.0) {
            return Ok((
                OracleAnswer::Separator(h.clone()),
                None,
                AnswerKind::Outside,
            ));
        }
        let fractional = (0..self.n).any(|l| (z[l] - z[l].round()).abs() > TAU_INT);
        if fractional {
            self.inside_points.push(z.clone());
            return Ok((OracleAnswer::Inside, None, AnswerKind::Inside));
        }
        let x: Vec<i64> = (0..self.n).map(|l| z[l].round() as i64).collect();
        let f = self.fiber_index(&x);
        self.in_box_queries += 1;
        let sigma = Self::sigma(&x);
        let sigma_x: f64 = sigma.iter().zip(&x).map(|(s, &v)| s * v as f64).sum();

        let saturated = self.n > 0 && self.fibers[f].counter as f64 >= self.saturation();
        if saturated || self.fibers[f].killed {
            // <sigma, x> <= <sigma, x_i> - tau keeps every other vertex and inside point
            let min_inside = self
                .inside_points
                .iter()
                .map(|p| self.l1_to_vertex(p, &x))
                .fold(f64::INFINITY, f64::min);
            let tau = (0.5f64).min(0.5 * min_inside);
            let mut normal = DVector::zeros(k);
            for l in 0..self.n {
                normal[l] = sigma[l];
            }
            let h = Halfspace::new(normal, sigma_x - tau)?.normalized();
            if h.excess(z) <= 0.0 {
                return Err(Error::Instance(
                    "fiber cut does not separate the query".into(),
                ));
            }
            self.cuts.push(h.clone());
            let fiber = &mut self.fibers[f];
            fiber.counter += 1;
            fiber.killed = true;
            return Ok((OracleAnswer::Separator(h), Some(f), AnswerKind::Kill));
        }

        let j = self.fibers[f].counter % self.d;
        let q = z[self.n + j];
        let eta = 1e-9 * self.radius;
        let (l, u) = (self.fibers[f].lower[j], self.fibers[f].upper[j]);
        let keep_lower = (q - eta - l) >= (u - q - eta);
        let t = if keep_lower { q - eta } else { q + eta };
        // lambda keeps earlier inside points on the feasible side
        let mut lambda = 4.0 * self.radius;
        for p in &self.inside_points {
            let s = self.l1_to_vertex(p, &x);
            let need = if keep_lower {
                p[self.n + j] - t
            } else {
                t - p[self.n + j]
            };
            if need > 0.0 {
                lambda = lambda.max(need / s * (1.0 + 1e-6) + 1e-9);
            }
        }
        // keep lower: y_j + lambda <sigma, x> <= t + lambda <sigma, x_i>
        // keep upper: -y_j + lambda <sigma, x> <= -t + lambda <sigma, x_i>
        let sign = if keep_lower { 1.0 } else { -1.0 };
        let mut normal = DVector::zeros(k);
        for l in 0..self.n {
            normal[l] = lambda * sigma[l];
        }
        normal[self.n + j] = sign;
        let h = Halfspace::new(normal, sign * t + lambda * sigma_x)?.normalized();
        let fiber = &mut self.fibers[f];
        if keep_lower {
            fiber.upper[j] = t;
        } else {
            fiber.lower[j] = t;
        }
        fiber.counter += 1;
        self.cuts.push(h.clone());
        Ok((OracleAnswer::Separator(h), Some(f), AnswerKind::Halving))
    }

    /// Two instances consistent with the transcript whose mixed-integer parts
    /// are two disjoint width-`rho` boxes in the widest surviving fiber box.
    pub fn certificate(&self, eps: f64) -> Result<Certificate> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "must be nonnegative".into(),
            });
        }
        if self.in_box_queries as f64 >= self.query_budget() {
            return Err(Error::CertificateUnavailable(format!(
                "{} in-box queries reach the budget {:.3}",
                self.in_box_queries,
                self.query_budget()
            )));
        }
        let (f, fiber) = self
            .fibers
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.killed)
            .fold(None::<(usize, &FiberState)>, |best, (i, f)| match best {
                Some((_, b)) if b.width() >= f.width() => best,
                _ => Some((i, f)),
            })
            .ok_or_else(|| Error::CertificateUnavailable("every fiber was cut away".into()))?;
        if fiber.width() < 3.0 * self.rho {
            return Err(Error::CertificateUnavailable(format!(
                "widest fiber box has width {} < 3 rho",
                fiber.width()
            )));
        }
        let box1: (Vec<f64>, Vec<f64>) = (
            fiber.lower.clone(),
            fiber.lower.iter().map(|l| l + self.rho).collect(),
        );
        let box2: (Vec<f64>, Vec<f64>) = (
            fiber.upper.iter().map(|u| u - self.rho).collect(),
            fiber.upper.clone(),
        );
        let corners = |(lo, hi): &(Vec<f64>, Vec<f64>)| -> Vec<DVector<f64>> {
            (0..1usize << self.d)
                .map(|mask| {
                    DVector::from_fn(self.dim(), |i, _| {
                        if i < self.n {
                            fiber.x[i] as f64
                        } else {
                            let j = i - self.n;
                            if (mask >> j) & 1 == 1 {
                                hi[j]
                            } else {
                                lo[j]
                            }
                        }
                    })
                })
                .collect()
        };
        let mut points1 = corners(&box1);
        let mut points2 = corners(&box2);
        points1.extend(self.inside_points.iter().cloned());
        points2.extend(self.inside_points.iter().cloned());
        Ok(Certificate {
            fiber: f,
            box1,
            box2,
            points1,
            points2,
        })
    }
}

/// Shared handle so the adversary can sit inside a [`ConvexBody`].
#[derive(Debug, Clone)]
pub struct AdversaryHandle(Arc<Mutex<AdversaryState>>);

impl PartialEq for AdversaryHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl AdversaryHandle {
    pub fn new(n: usize, d: usize, radius: f64, rho: f64) -> Result<Self> {
        Ok(AdversaryHandle(Arc::new(Mutex::new(AdversaryState::new(
            n, d, radius, rho,
        )?))))
    }

    pub fn state(&self) -> MutexGuard<'_, AdversaryState> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn dim(&self) -> usize {
        self.state().dim()
    }

    pub fn answer(&self, z: &DVector<f64>) -> Result<OracleAnswer> {
        self.state().answer(z)
    }

    pub fn ambient_box(&self) -> (DVector<f64>, DVector<f64>) {
        self.state().ambient_box()
    }

    pub fn current_set_contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.state().current_set_contains(z, tol)
    }

    pub fn body(&self) -> ConvexBody {
        ConvexBody::Adversary(self.clone())
    }
}

/// `adversary_answer`: one query against the adversary.
pub fn adversary_answer(state: &mut AdversaryState, z: &DVector<f64>) -> Result<OracleAnswer> {
    state.answer(z)
}

/// `adversary_certificate`.
pub fn adversary_certificate(state: &AdversaryState, eps: f64) -> Result<Certificate> {
    state.certificate(eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn fractional_query_is_inside() {
        let mut s = AdversaryState::new(1, 1, 8.0, 1.0).unwrap();
        assert_eq!(s.answer(&v(&[0.5, 3.0])).unwrap(), OracleAnswer::Inside);
        assert_eq!(s.in_box_queries, 0);
    }

    #[test]
    fn first_halving_keeps_half() {
        let mut s = AdversaryState::new(1, 1, 8.0, 1.0).unwrap();
        let a = s.answer(&v(&[0.0, 4.0])).unwrap();
        let OracleAnswer::Separator(h) = a else {
            panic!()
        };
        assert!(h.excess(&v(&[0.0, 4.0])) > 0.0);
        let f = &s.fibers[0];
        assert!(f.upper[0] - f.lower[0] >= 4.0 - 1e-6);
        // the other fiber is untouched and on the feasible side
        assert_eq!(s.fibers[1].lower, vec![0.0]);
        assert_eq!(s.fibers[1].upper, vec![8.0]);
        for y in [0.0, 8.0] {
            assert!(h.excess(&v(&[1.0, y])) < 0.0);
        }
    }

    #[test]
    fn outside_query_leaves_boxes() {
        let mut s = AdversaryState::new(1, 1, 8.0, 1.0).unwrap();
        let before = s.fibers.clone();
        let a = s.answer(&v(&[0.0, 9.0])).unwrap();
        assert!(matches!(a, OracleAnswer::Separator(_)));
        assert_eq!(s.fibers, before);
        assert_eq!(s.in_box_queries, 0);
    }

    #[test]
    fn untouched_certificate() {
        let s = AdversaryState::new(1, 1, 8.0, 1.0).unwrap();
        let c = s.certificate(0.01).unwrap();
        assert!(c.boxes_disjoint());
        assert_eq!(c.box1.1[0] - c.box1.0[0], 1.0);
        assert_eq!(c.box2.1[0] - c.box2.0[0], 1.0);
    }

    #[test]
    fn saturated_fiber_is_cut_away() {
        let mut s = AdversaryState::new(1, 1, 8.0, 1.0).unwrap();
        let sat = s.saturation().ceil() as usize;
        for _ in 0..sat {
            let f = &s.fibers[0];
            let mid = 0.5 * (f.lower[0] + f.upper[0]);
            s.answer(&v(&[0.0, mid])).unwrap();
        }
        let f = &s.fibers[0];
        let mid = 0.5 * (f.lower[0] + f.upper[0]);
        s.answer(&v(&[0.0, mid])).unwrap();
        assert!(s.fibers[0].killed);
        assert_eq!(s.log.last().unwrap().kind, AnswerKind::Kill);
    }
}
