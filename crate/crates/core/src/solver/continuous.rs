//! Classical central-cut ellipsoid method for `n = 0`.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    log_unit_ball_volume, shallow_cut_update, volume_decrease_bound, CutOutcome, Ellipsoid,
};
use crate::model::{ConvexBody, Halfspace, Objective, OracleAnswer, ProblemParameters};
use crate::solver::lenstra::{SolveStats, UpdateRecord};
use crate::solver::optimize::{OptimizeOutcome, OptimizeResult};

/// Iterations after which the volume rule has certainly fired:
/// `ceil(5d * d ln(R / r)) + 1` with `r = eps rho / (2 M R)`.
pub fn continuous_iteration_bound(p: &ProblemParameters) -> usize {
    let d = p.d as f64;
    let r = stop_radius(p);
    (5.0 * d * d * (p.radius / r).ln().max(0.0)).ceil() as usize + 1
}

fn stop_radius(p: &ProblemParameters) -> f64 {
    if p.lipschitz > 0.0 && p.eps > 0.0 {
        (p.eps * p.rho / (2.0 * p.lipschitz * p.radius)).min(p.rho)
    } else {
        p.rho
    }
}

/// Minimizes over a body in `R^d` with central cuts.
///
/// Stops when the best value is certified within `eps` of the lower bound
/// `max_i f(c_i) - ||g_i||_{A_i}`, or when the ellipsoid is smaller than the
/// ball of radius `eps rho / (2 M R)` that the sublevel set must contain.
pub fn ellipsoid_continuous(
    body: &ConvexBody,
    obj: &Objective,
    p: &ProblemParameters,
) -> Result<OptimizeResult> {
    p.validate()?;
    if p.n != 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "the continuous ellipsoid method needs n = 0".into(),
        });
    }
    check_dim(p.d, body.dim())?;
    check_dim(p.d, obj.dim())?;
    let start = Instant::now();
    let d = p.d;
    let mut stats = SolveStats {
        nodes: 1,
        ..Default::default()
    };
    let mut e = Ellipsoid::ball(DVector::zeros(d), p.radius);
    let stop_log_volume = log_unit_ball_volume(d) + d as f64 * stop_radius(p).ln();
    let cap = continuous_iteration_bound(p);
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut lower = f64::NEG_INFINITY;
    for _ in 0..cap {
        if e.log_volume() < stop_log_volume {
            break;
        }
        if let Some((_, v)) = &best {
            if v - lower <= p.eps {
                break;
            }
        }
        let c = e.center.clone();
        stats.separation_queries += 1;
        let h = match body.separate(&c)? {
            OracleAnswer::Separator(h) => h,
            OracleAnswer::Inside => {
                stats.first_order_queries += 1;
                let fo = obj.first_order(&c)?;
                if best.as_ref().map_or(true, |(_, v)| fo.value < *v) {
                    best = Some((c.clone(), fo.value));
                }
                if fo.subgradient.iter().all(|&g| g == 0.0) {
                    break;
                }
                lower = lower.max(fo.value - e.half_width(&fo.subgradient));
                let normal = fo.subgradient.normalize();
                let offset = normal.dot(&c);
                Halfspace { normal, offset }
            }
        };
        match shallow_cut_update(&e, &h, 0.0)? {
            CutOutcome::Updated(next) => {
                stats.updates += 1;
                stats.update_log.push(UpdateRecord {
                    k: d,
                    beta: 0.0,
                    delta_log_volume: next.log_volume() - e.log_volume(),
                });
                debug_assert!(
                    e.log_volume() - next.log_volume() >= volume_decrease_bound(d, 0.0) - 1e-9
                );
                e = next;
            }
            CutOutcome::Empty => break,
            CutOutcome::NoCutNeeded => {
                return Err(Error::Numeric("central cut rejected".into()));
            }
        }
    }
    stats.max_node_queries = stats.separation_queries;
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(OptimizeResult {
        outcome: match best {
            Some((point, value)) => OptimizeOutcome::EpsOptimal { point, value },
            None => OptimizeOutcome::NoDeepOptimum,
        },
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn linear_over_disk() {
        let body = ConvexBody::ball(&[0.0, 0.0], 1.0);
        let obj = Objective::linear(&[3.0, 4.0]);
        let p = ProblemParameters::new(0, 2, 1.0)
            .with_lipschitz(5.0)
            .with_eps(1e-3);
        let r = ellipsoid_continuous(&body, &obj, &p).unwrap();
        assert!((r.value().unwrap() + 5.0).abs() <= 1e-3);
    }

    #[test]
    fn l1_norm_over_box() {
        let body = ConvexBody::cube(&[-1.0, -1.0], &[1.0, 1.0]);
        let obj = Objective::max_affine(vec![
            (vec![1.0, 1.0], 0.0),
            (vec![1.0, -1.0], 0.0),
            (vec![-1.0, 1.0], 0.0),
            (vec![-1.0, -1.0], 0.0),
        ])
        .unwrap();
        let p = ProblemParameters::new(0, 2, 2f64.sqrt())
            .with_lipschitz(2f64.sqrt())
            .with_eps(1e-3);
        let r = ellipsoid_continuous(&body, &obj, &p).unwrap();
        assert!(r.value().unwrap().abs() <= 1e-3);
    }

    #[test]
    fn quadratic_inside_ball() {
        let body = ConvexBody::ball(&[0.0, 0.0], 2.0);
        let obj = Objective::centered_quadratic(DMatrix::identity(2, 2), &[0.3, 0.7]).unwrap();
        let p = ProblemParameters::new(0, 2, 2.0)
            .with_lipschitz(4.0)
            .with_eps(1e-3);
        let r = ellipsoid_continuous(&body, &obj, &p).unwrap();
        assert!(r.value().unwrap().abs() <= 1e-3);
    }
}
