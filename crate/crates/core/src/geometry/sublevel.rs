//! Balls guaranteed inside sublevel sets of Lipschitz functions over bodies
//! with a known inner ball.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// Ball `(center, radius)` inside `{z in C : f(z) <= f(z_star) + eps}`.
///
/// `C` must contain the ball of radius `rho` around `a` and lie in the ball of
/// radius `radius` around the origin; `f` is `lipschitz`-Lipschitz there. The
/// returned ball is the image of the inner ball under the homothety about
/// `z_star` with ratio `eps / (2 M R)`.
pub fn sublevel_ball(
    z_star: &DVector<f64>,
    a: &DVector<f64>,
    rho: f64,
    eps: f64,
    lipschitz: f64,
    radius: f64,
) -> Result<(DVector<f64>, f64)> {
    check_dim(z_star.len(), a.len())?;
    if !(eps > 0.0 && rho > 0.0 && radius > 0.0 && lipschitz > 0.0) {
        return Err(Error::InvalidInput(
            "sublevel ball needs positive eps, rho, M, R".into(),
        ));
    }
    let t = eps / (2.0 * lipschitz * radius);
    if t > 1.0 {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("must be at most 2MR = {}", 2.0 * lipschitz * radius),
        });
    }
    Ok((z_star + (a - z_star) * t, t * rho))
}
