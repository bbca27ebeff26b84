//! Optimization on top of the feasibility recursion.

use std::cell::{Cell, RefCell};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::{
    ConvexBody, FirstOrderOracle, Halfspace, Objective, OracleAnswer, Point, ProblemParameters,
    SeparationOracle,
};
use crate::solver::lenstra::{
    feasibility_with_stats, Engine, FeasibilityResult, SolveStats, StopRule,
};

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizeOutcome {
    EpsOptimal { point: Point, value: f64 },
    NoDeepOptimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub outcome: OptimizeOutcome,
    pub stats: SolveStats,
}

impl OptimizeResult {
    pub fn value(&self) -> Option<f64> {
        match &self.outcome {
            OptimizeOutcome::EpsOptimal { value, .. } => Some(*value),
            OptimizeOutcome::NoDeepOptimum => None,
        }
    }

    pub fn point(&self) -> Option<&Point> {
        match &self.outcome {
            OptimizeOutcome::EpsOptimal { point, .. } => Some(point),
            OptimizeOutcome::NoDeepOptimum => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Level {
    Fixed(f64),
    /// Best value seen so far minus a margin; only a zero subgradient is
    /// answered "inside".
    Dynamic(f64),
}

/// Separation for `body ∩ {f <= level}` using first-order information.
///
/// Body separators take precedence; at a body point with `f(z) > level` the
/// answer is the linearization cut `f(z) + <g, w - z> <= level`.
pub struct LevelSetOracle<'a> {
    body: &'a dyn SeparationOracle,
    obj: &'a dyn FirstOrderOracle,
    level: Cell<Level>,
    best: RefCell<Option<(Point, f64)>>,
    fo_queries: Cell<usize>,
}

impl<'a> LevelSetOracle<'a> {
    pub fn fixed(
        body: &'a dyn SeparationOracle,
        obj: &'a dyn FirstOrderOracle,
        level: f64,
    ) -> Self {
        Self::with_level(body, obj, Level::Fixed(level))
    }

    pub fn dynamic(
        body: &'a dyn SeparationOracle,
        obj: &'a dyn FirstOrderOracle,
        margin: f64,
    ) -> Self {
        Self::with_level(body, obj, Level::Dynamic(margin))
    }

    fn with_level(
        body: &'a dyn SeparationOracle,
        obj: &'a dyn FirstOrderOracle,
        level: Level,
    ) -> Self {
        LevelSetOracle {
            body,
            obj,
            level: Cell::new(level),
            best: RefCell::new(None),
            fo_queries: Cell::new(0),
        }
    }

    pub fn set_level(&self, level: f64) {
        self.level.set(Level::Fixed(level));
    }

    pub fn best(&self) -> Option<(Point, f64)> {
        self.best.borrow().clone()
    }

    pub fn first_order_queries(&self) -> usize {
        self.fo_queries.get()
    }
}

impl SeparationOracle for LevelSetOracle<'_> {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn separate(&self, z: &DVector<f64>) -> Result<OracleAnswer> {
        if let OracleAnswer::Separator(h) = self.body.separate(z)? {
            return Ok(OracleAnswer::Separator(h));
        }
        self.fo_queries.set(self.fo_queries.get() + 1);
        let fo = self.obj.first_order(z)?;
        {
            let mut best = self.best.borrow_mut();
            if best.as_ref().map_or(true, |(_, v)| fo.value < *v) {
                *best = Some((z.clone(), fo.value));
            }
        }
        let zero_grad = fo.subgradient.iter().all(|&g| g == 0.0);
        let level = match self.level.get() {
            Level::Fixed(gamma) => {
                if fo.value <= gamma {
                    return Ok(OracleAnswer::Inside);
                }
                gamma
            }
            Level::Dynamic(margin) => {
                if zero_grad {
                    return Ok(OracleAnswer::Inside);
                }
                self.best
                    .borrow()
                    .as_ref()
                    .map(|(_, v)| *v)
                    .unwrap_or(fo.value)
                    - margin
            }
        };
        if zero_grad {
            // z minimizes f everywhere, so the level set is empty
            return Ok(OracleAnswer::Separator(Halfspace::empty(z.len())));
        }
        let g = fo.subgradient;
        let offset = g.dot(z) - (fo.value - level);
        Ok(OracleAnswer::Separator(
            Halfspace { normal: g, offset }.normalized(),
        ))
    }
}

fn check_instance(body: &ConvexBody, obj: &Objective, p: &ProblemParameters) -> Result<()> {
    p.validate()?;
    body.validate()?;
    obj.validate()?;
    check_dim(p.dim(), body.dim())?;
    check_dim(p.dim(), obj.dim())
}

/// Binary search on the objective level with one feasibility run per guess.
///
/// An initial run with `delta = rho / 2` finds some point `z0`; the bracket
/// `[f(z0) - 2MR, f(z0)]` is then halved until its width is at most `eps/2`,
/// each guess `gamma` tested on `body ∩ {f <= gamma}` with
/// `delta = eps rho / (4 M R)`.
pub fn optimize(
    body: &ConvexBody,
    obj: &Objective,
    p: &ProblemParameters,
) -> Result<OptimizeResult> {
    check_instance(body, obj, p)?;
    if !(p.eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: "binary search needs eps > 0".into(),
        });
    }
    let mut stats = SolveStats::default();
    let first = feasibility_with_stats(body, &p.clone().with_delta(0.5 * p.rho))?;
    stats.absorb(first.1);
    let FeasibilityResult::FoundPoint(z0) = first.0 else {
        return Ok(OptimizeResult {
            outcome: OptimizeOutcome::NoDeepOptimum,
            stats,
        });
    };
    stats.first_order_queries += 1;
    let v0 = obj.value(&z0)?;
    let (mut best, mut hi) = (z0, v0);
    let spread = 2.0 * p.lipschitz * p.radius;
    let mut lo = v0 - spread;
    if spread > 0.0 {
        let delta = p.eps * p.rho / (4.0 * p.lipschitz * p.radius);
        let q = p.clone().with_delta(delta);
        while hi - lo > 0.5 * p.eps {
            let gamma = 0.5 * (lo + hi);
            let level = LevelSetOracle::fixed(body, obj, gamma);
            let (r, s) = feasibility_with_stats(&level, &q)?;
            stats.absorb(s);
            stats.first_order_queries += level.first_order_queries();
            stats.feasibility_calls += 1;
            match r {
                FeasibilityResult::FoundPoint(z) => {
                    stats.first_order_queries += 1;
                    hi = obj.value(&z)?;
                    best = z;
                }
                FeasibilityResult::NoDeepPoint => lo = gamma,
            }
        }
    }
    let value = obj.value(&best)?;
    Ok(OptimizeResult {
        outcome: OptimizeOutcome::EpsOptimal { point: best, value },
        stats,
    })
}

/// One feasibility run whose level follows the best point seen; the best
/// point is returned once the run reports no deep point below
/// `best - eps/2`.
pub fn optimize_single_pass(
    body: &ConvexBody,
    obj: &Objective,
    p: &ProblemParameters,
) -> Result<OptimizeResult> {
    check_instance(body, obj, p)?;
    if !(p.eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: "single pass needs eps > 0".into(),
        });
    }
    let delta = if p.lipschitz > 0.0 {
        p.eps * p.rho / (4.0 * p.lipschitz * p.radius)
    } else {
        0.5 * p.rho
    };
    let level = LevelSetOracle::dynamic(body, obj, 0.5 * p.eps);
    let mut engine = Engine::new(&level, p.n, p.d, p.radius, StopRule::Deep { delta })?;
    engine.run()?;
    let mut stats = engine.stats;
    stats.first_order_queries += level.first_order_queries();
    Ok(OptimizeResult {
        outcome: match level.best() {
            Some((point, value)) => OptimizeOutcome::EpsOptimal { point, value },
            None => OptimizeOutcome::NoDeepOptimum,
        },
        stats,
    })
}

/// Exact optimum over `body ∩ Z^n` (`d = 0`).
///
/// Instead of stopping at a deep-point volume, a node whose ellipsoid has
/// volume below `1/n!` is sliced over every lattice hyperplane it meets. The
/// objective enters through linearization cuts at the best point seen, which
/// demand an improvement of `1e-9`. `NoDeepOptimum` means the body holds no
/// lattice point.
pub fn pure_integer_optimize(
    body: &ConvexBody,
    obj: &Objective,
    p: &ProblemParameters,
) -> Result<OptimizeResult> {
    check_instance(body, obj, p)?;
    if p.d != 0 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: "pure integer optimization needs d = 0".into(),
        });
    }
    let level = LevelSetOracle::dynamic(body, obj, 1e-9);
    let mut engine = Engine::new(&level, p.n, 0, p.radius, StopRule::Exact)?;
    engine.run()?;
    let mut stats = engine.stats;
    stats.first_order_queries += level.first_order_queries();
    Ok(OptimizeResult {
        outcome: match level.best() {
            Some((point, value)) => OptimizeOutcome::EpsOptimal { point, value },
            None => OptimizeOutcome::NoDeepOptimum,
        },
        stats,
    })
}

/// Exact lattice-point feasibility (`d = 0`).
pub fn pure_integer_feasibility(
    body: &ConvexBody,
    p: &ProblemParameters,
) -> Result<(FeasibilityResult, SolveStats)> {
    p.validate()?;
    let mut engine = Engine::new(body, p.n, 0, p.radius, StopRule::Exact)?;
    let found = engine.run()?;
    Ok((
        match found {
            Some(z) => FeasibilityResult::FoundPoint(z),
            None => FeasibilityResult::NoDeepPoint,
        },
        engine.stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Polyhedron;

    #[test]
    fn continuous_linear_over_ball() {
        let body = ConvexBody::ball(&[0.0, 0.0], 2.0);
        let obj = Objective::linear(&[3.0, 4.0]);
        let p = ProblemParameters::new(0, 2, 2.0)
            .with_lipschitz(5.0)
            .with_eps(1e-2);
        let r = optimize(&body, &obj, &p).unwrap();
        assert!((r.value().unwrap() + 10.0).abs() <= 1e-2);
        let bound = (4.0 * 5.0 * 2.0 / 1e-2f64).log2().ceil() as usize;
        assert!(r.stats.feasibility_calls <= bound);
    }

    #[test]
    fn integer_disk() {
        let body = ConvexBody::ball(&[0.0, 0.0], 1.6);
        let obj = Objective::linear(&[-1.0, -1.0]);
        let p = ProblemParameters::new(2, 0, 1.6)
            .with_lipschitz(2f64.sqrt())
            .with_eps(1e-3)
            .with_rho(0.1);
        let r = optimize(&body, &obj, &p).unwrap();
        assert_eq!(r.value().unwrap(), -2.0);
        let s = optimize_single_pass(&body, &obj, &p).unwrap();
        assert_eq!(s.value().unwrap(), -2.0);
    }

    #[test]
    fn mixed_minimize_y() {
        let body = ConvexBody::ball(&[0.0, 0.0], 1.5);
        let obj = Objective::linear(&[0.0, 1.0]);
        let p = ProblemParameters::new(1, 1, 1.5)
            .with_eps(1e-3)
            .with_rho(0.5);
        let r = optimize(&body, &obj, &p).unwrap();
        let z = r.point().unwrap();
        assert_eq!(z[0], 0.0);
        assert!((z[1] + 1.5).abs() <= 1e-3);
        let s = optimize_single_pass(&body, &obj, &p).unwrap();
        assert!((s.value().unwrap() + 1.5).abs() <= 1e-3);
    }

    #[test]
    fn constant_objective_returns_first_point() {
        let body = ConvexBody::ball(&[0.0, 0.0], 3.0);
        let obj = Objective::constant(1.0, 2);
        let p = ProblemParameters::new(1, 1, 3.0).with_eps(1e-3);
        let r = optimize_single_pass(&body, &obj, &p).unwrap();
        assert_eq!(r.value(), Some(1.0));
        assert_eq!(r.stats.first_order_queries, 1);
    }

    #[test]
    fn pure_integer_examples() {
        let p = ProblemParameters::new(2, 0, 10.0);
        let empty = ConvexBody::ball(&[0.5, 0.5], 0.3);
        let r = pure_integer_optimize(&empty, &Objective::linear(&[1.0, 0.0]), &p).unwrap();
        assert_eq!(r.outcome, OptimizeOutcome::NoDeepOptimum);

        let poly = ConvexBody::Intersection(vec![
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
        let r = pure_integer_optimize(&poly, &Objective::linear(&[-1.0, -2.0]), &p).unwrap();
        assert_eq!(r.value(), Some(-6.0));
        let z = r.point().unwrap();
        assert_eq!((z[0], z[1]), (0.0, 3.0));

        let cube = ConvexBody::cube(&[-2.5, -2.5], &[2.5, 2.5]);
        let r = pure_integer_optimize(&cube, &Objective::constant(0.0, 2), &p).unwrap();
        let z = r.point().unwrap();
        assert!(z.iter().all(|v| v.fract() == 0.0 && v.abs() <= 2.0));
    }
}
