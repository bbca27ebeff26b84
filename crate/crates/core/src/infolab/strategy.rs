//! Query strategies: matches against the adversary and the centerpoint
//! optimization scheme.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::infolab::adversary::AdversaryState;
use crate::infolab::centerpoint::region_centerpoint;
use crate::infolab::volume::{FiberShape, MixedRegion};
use crate::model::{ConvexBody, Halfspace, Objective, OracleAnswer, Polyhedron, ProblemParameters};
use crate::solver::{OptimizeOutcome, OptimizeResult, SolveStats};

/// Picks the next query from the current search region (never empty).
pub trait QueryStrategy {
    fn name(&self) -> &'static str;
    fn next_query(&mut self, region: &MixedRegion) -> Result<DVector<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Centerpoint,
    Bisection,
    Random,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Centerpoint,
        StrategyKind::Bisection,
        StrategyKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Centerpoint => "centerpoint",
            StrategyKind::Bisection => "bisection",
            StrategyKind::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "centerpoint" | "center" => Some(StrategyKind::Centerpoint),
            "bisection" | "bisect" => Some(StrategyKind::Bisection),
            "random" => Some(StrategyKind::Random),
            _ => None,
        }
    }

    pub fn build(self, seed: u64, grid_res: usize) -> Box<dyn QueryStrategy> {
        match self {
            StrategyKind::Centerpoint => Box::new(CenterpointStrategy { grid_res }),
            StrategyKind::Bisection => Box::new(BisectionStrategy::default()),
            StrategyKind::Random => Box::new(RandomStrategy::new(seed)),
        }
    }
}

/// Queries an approximate centerpoint of the region.
#[derive(Debug, Clone)]
pub struct CenterpointStrategy {
    pub grid_res: usize,
}

impl QueryStrategy for CenterpointStrategy {
    fn name(&self) -> &'static str {
        "centerpoint"
    }

    fn next_query(&mut self, region: &MixedRegion) -> Result<DVector<f64>> {
        Ok(region_centerpoint(region, self.grid_res)?.point)
    }
}

/// Visits the fibers round-robin and queries the centroid of the slice.
#[derive(Debug, Clone, Default)]
pub struct BisectionStrategy {
    turn: usize,
}

impl QueryStrategy for BisectionStrategy {
    fn name(&self) -> &'static str {
        "bisection"
    }

    fn next_query(&mut self, region: &MixedRegion) -> Result<DVector<f64>> {
        let fi = self.turn % region.fibers.len();
        self.turn += 1;
        Ok(region.point(fi, &region.fibers[fi].shape.centroid()))
    }
}

/// A uniformly random fiber and a random point of its slice.
#[derive(Debug, Clone)]
pub struct RandomStrategy {
    rng: ChaCha8Rng,
}

impl RandomStrategy {
    pub fn new(seed: u64) -> Self {
        RandomStrategy {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl QueryStrategy for RandomStrategy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn next_query(&mut self, region: &MixedRegion) -> Result<DVector<f64>> {
        let fi = self.rng.gen_range(0..region.fibers.len());
        let shape = &region.fibers[fi].shape;
        let y = match shape {
            FiberShape::Point => Vec::new(),
            _ => {
                let (lo, hi) = shape.bounds();
                let mut pick = None;
                for _ in 0..64 {
                    let y: Vec<f64> = lo
                        .iter()
                        .zip(&hi)
                        .map(|(&l, &h)| if h > l { self.rng.gen_range(l..h) } else { l })
                        .collect();
                    if shape.contains(&y, 0.0) {
                        pick = Some(y);
                        break;
                    }
                }
                pick.unwrap_or_else(|| shape.centroid())
            }
        };
        Ok(region.point(fi, &y))
    }
}

/// The adversary's current set `X0 ∩ cuts` restricted to `Z^n x R^d`.
pub fn adversary_region(state: &AdversaryState) -> Result<MixedRegion> {
    let (lo, hi) = state.ambient_box();
    let mut poly = Polyhedron::from_box(&lo, &hi)?;
    for h in &state.cuts {
        poly.push(h.clone())?;
    }
    MixedRegion::from_polyhedron(&poly, state.n, state.d)
}

/// Plays `strategy` against a fresh adversary until `in_box_limit` in-box
/// queries have been answered or the search region is empty.
pub fn run_adversary_match(
    n: usize,
    d: usize,
    radius: f64,
    rho: f64,
    strategy: &mut dyn QueryStrategy,
    in_box_limit: usize,
) -> Result<AdversaryState> {
    let mut state = AdversaryState::new(n, d, radius, rho)?;
    let guard = 20 * (in_box_limit + 1) + 100;
    while state.in_box_queries < in_box_limit {
        let region = adversary_region(&state)?;
        if region.is_empty() {
            break;
        }
        let q = strategy.next_query(&region)?;
        state.answer(&q)?;
        if state.transcript.len() > guard {
            return Err(Error::Instance(format!(
                "strategy {} made {} queries without reaching {in_box_limit} in-box queries",
                strategy.name(),
                state.transcript.len()
            )));
        }
    }
    Ok(state)
}

/// Match log as CSV.
pub fn match_log_csv(state: &AdversaryState) -> String {
    let mut s = String::from("query_index,fiber,counter,answer,max_live_width\n");
    for r in &state.log {
        let fiber = r.fiber.map_or(String::new(), |f| f.to_string());
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.query_index,
            fiber,
            r.counter,
            r.kind.as_str(),
            r.max_live_width
        );
    }
    s
}

/// `b = 2^n (d+1) / (2^n (d+1) - 1)`.
pub fn contraction_base(n: usize, d: usize) -> f64 {
    let t = (1u64 << n) as f64 * (d as f64 + 1.0);
    t / (t - 1.0)
}

/// Query count after which the centerpoint scheme has an eps-solution:
/// `2 (n+d) ln(M (2R+1)^2 / (rho eps)) / ln b`, with the objective term
/// clamped at zero when `M (2R+1) < eps`.
pub fn centerpoint_query_bound(p: &ProblemParameters) -> f64 {
    let k = p.dim() as f64;
    let span = 2.0 * p.radius + 1.0;
    let rho = if p.d == 0 { 1.0 } else { p.rho };
    let obj_term = if p.eps > 0.0 {
        (p.lipschitz * span / p.eps).ln().max(0.0)
    } else {
        f64::INFINITY
    };
    2.0 * k * ((span / rho).ln() + obj_term) / contraction_base(p.n, p.d).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSource {
    Separator,
    Subgradient,
}

/// Mixed-integer volume of the search region around one effective query.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionStep {
    pub query: usize,
    pub source: CutSource,
    pub before: f64,
    pub after: f64,
}

impl ContractionStep {
    pub fn ratio(&self) -> f64 {
        if self.before > 0.0 {
            self.after / self.before
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterpointRun {
    pub result: OptimizeResult,
    pub queries: usize,
    pub query_bound: f64,
    pub steps: Vec<ContractionStep>,
}

/// The centerpoint scheme: query a centerpoint of the search polyhedron's
/// mixed-integer points, ask the first-order oracle when it is feasible, and
/// cut with the returned separator or subgradient.
///
/// Stops at the query bound, on an empty region, on a zero subgradient, or
/// once a feasible point is known and the region's mixed-integer volume
/// drops below `(eps rho / (2 M R))^d`.
pub fn centerpoint_strategy_run(
    body: &ConvexBody,
    obj: &Objective,
    p: &ProblemParameters,
    grid_res: usize,
) -> Result<CenterpointRun> {
    p.validate()?;
    check_dim(p.dim(), body.dim())?;
    check_dim(p.dim(), obj.dim())?;
    let start = Instant::now();
    let k = p.dim();
    let r = p.radius;
    let poly = Polyhedron::from_box(&DVector::from_element(k, -r), &DVector::from_element(k, r))?;
    let mut region = MixedRegion::from_polyhedron(&poly, p.n, p.d)?;
    let bound = centerpoint_query_bound(p);
    let threshold = if p.d == 0 || p.lipschitz == 0.0 {
        0.0
    } else {
        (p.eps * p.rho / (2.0 * p.lipschitz * r))
            .min(1.0)
            .powi(p.d as i32)
    };
    let mut stats = SolveStats::default();
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut steps = Vec::new();
    let mut queries = 0;
    while (queries as f64) < bound {
        if region.is_empty() {
            break;
        }
        let before = region.volume();
        if best.is_some() && before < threshold {
            break;
        }
        let z = region_centerpoint(&region, grid_res)?.point;
        queries += 1;
        stats.separation_queries += 1;
        let (h, source) = match body.separate(&z)? {
            OracleAnswer::Separator(h) => (h, CutSource::Separator),
            OracleAnswer::Inside => {
                queries += 1;
                stats.first_order_queries += 1;
                let fo = obj.first_order(&z)?;
                if best.as_ref().map_or(true, |(_, v)| fo.value < *v) {
                    best = Some((z.clone(), fo.value));
                }
                if fo.subgradient.amax() == 0.0 {
                    break;
                }
                let offset = fo.subgradient.dot(&z);
                (
                    Halfspace::new(fo.subgradient, offset)?,
                    CutSource::Subgradient,
                )
            }
        };
        region = region.cut(&h);
        if p.d == 0 && source == CutSource::Subgradient {
            let x: Vec<i64> = z.iter().map(|v| v.round() as i64).collect();
            region.remove_fiber(&x);
        }
        steps.push(ContractionStep {
            query: queries,
            source,
            before,
            after: region.volume(),
        });
    }
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let outcome = match best {
        Some((point, value)) => OptimizeOutcome::EpsOptimal { point, value },
        None => OptimizeOutcome::NoDeepOptimum,
    };
    Ok(CenterpointRun {
        result: OptimizeResult { outcome, stats },
        queries,
        query_bound: bound,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_run_is_bisection_like() {
        let body = ConvexBody::cube(&[-8.0], &[8.0]);
        let obj = Objective::linear(&[1.0]);
        let p = ProblemParameters::new(0, 1, 8.0)
            .with_eps(0.5)
            .with_rho(1.0)
            .with_lipschitz(1.0);
        let run = centerpoint_strategy_run(&body, &obj, &p, 16).unwrap();
        let bound = 2.0 * (289.0f64 / 0.5).ln() / 2.0f64.ln() + 2.0;
        assert!((run.queries as f64) <= bound, "{} > {bound}", run.queries);
        assert!(run.result.value().unwrap() <= -8.0 + 0.5);
    }

    #[test]
    fn constant_objective_stops_at_first_inside() {
        let body = ConvexBody::ball(&[0.0, 0.0], 3.0);
        let obj = Objective::constant(1.0, 2);
        let p = ProblemParameters::new(1, 1, 4.0)
            .with_lipschitz(0.0)
            .with_rho(1.0);
        let run = centerpoint_strategy_run(&body, &obj, &p, 8).unwrap();
        assert_eq!(run.queries, 2);
        assert!(run.result.point().is_some());
    }

    #[test]
    fn separators_contract_volume() {
        let body = ConvexBody::ball(&[3.0, 2.5], 1.0);
        let obj = Objective::constant(0.0, 2);
        let p = ProblemParameters::new(1, 1, 4.0)
            .with_lipschitz(0.0)
            .with_rho(1.0);
        let run = centerpoint_strategy_run(&body, &obj, &p, 12).unwrap();
        assert!(run.result.point().is_some());
        assert!(!run.steps.is_empty());
        for s in &run.steps {
            assert!(s.ratio() <= 1.0 - 0.25 + 0.02, "{s:?}");
        }
    }

    #[test]
    fn match_reaches_limit() {
        for kind in StrategyKind::ALL {
            let mut s = kind.build(7, 8);
            let st = run_adversary_match(1, 1, 8.0, 0.125, s.as_mut(), 7).unwrap();
            assert_eq!(st.in_box_queries, 7, "{}", kind.as_str());
            assert!(st.certificate(0.01).is_ok());
        }
    }
}
