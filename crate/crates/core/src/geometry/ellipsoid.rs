//! Ellipsoids `c + E_A = {z : (z - c)^T A^{-1} (z - c) <= 1}` and the
//! operations the Lenstra-style algorithm performs on them.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::geometry::pd::PdMatrix;
use crate::model::halfspace::Halfspace;

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub shape: PdMatrix,
}

/// Result of a shallow-cut update.
#[derive(Debug, Clone, PartialEq)]
pub enum CutOutcome {
    Updated(Ellipsoid),
    /// The halfspace contains the `beta`-scaled copy of the ellipsoid; keep it.
    NoCutNeeded,
    /// The ellipsoid and the halfspace meet in at most one boundary point.
    Empty,
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, shape: PdMatrix) -> Result<Self> {
        check_dim(shape.order(), center.len())?;
        Ok(Ellipsoid { center, shape })
    }

    /// Euclidean ball of the given radius.
    pub fn ball(center: DVector<f64>, radius: f64) -> Self {
        let k = center.len();
        Ellipsoid {
            center,
            shape: PdMatrix::scaled_identity(k, radius * radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `||z - c||_A`.
    pub fn norm_of_offset(&self, z: &DVector<f64>) -> f64 {
        self.shape.inv_quad(&(z - &self.center)).sqrt()
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.shape.inv_quad(&(z - &self.center)) <= 1.0 + tol
    }

    /// `max_{z in E} <a, z - c>`.
    pub fn half_width(&self, a: &DVector<f64>) -> f64 {
        self.shape.quad(a).sqrt()
    }

    /// `max_{z in E} <a, z>`.
    pub fn support(&self, a: &DVector<f64>) -> f64 {
        a.dot(&self.center) + self.half_width(a)
    }

    pub fn log_volume(&self) -> f64 {
        log_unit_ball_volume(self.dim()) + 0.5 * self.shape.log_det()
    }
}

/// `ln` of the volume of the Euclidean unit ball in dimension `k`.
pub fn log_unit_ball_volume(k: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_k = V_{k-2} * 2 pi / k
    let mut acc = if k % 2 == 0 { 0.0 } else { 2f64.ln() };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        acc += (2.0 * std::f64::consts::PI / j as f64).ln();
        j += 2;
    }
    acc
}

/// Guaranteed log-volume decrease for an update with parameter `beta`.
pub fn volume_decrease_bound(k: usize, beta: f64) -> f64 {
    let k = k as f64;
    (1.0 - beta * k).powi(2) / (5.0 * k)
}

/// Replaces `E` by an ellipsoid containing `E ∩ H` whose volume shrinks by at
/// least `exp(-(1 - beta k)^2 / (5k))`.
///
/// Uses the deep/shallow-cut family: with `alpha` the signed depth of the cut
/// in units of the half-width of `E` along the normal, the update is valid for
/// `-1/k <= alpha < 1`. The cut is rejected with [`CutOutcome::NoCutNeeded`]
/// when `H` contains `c + beta E`, i.e. `alpha < -beta`.
pub fn shallow_cut_update(e: &Ellipsoid, h: &Halfspace, beta: f64) -> Result<CutOutcome> {
    let k = e.dim();
    h.check_dim(k)?;
    if k == 0 {
        return Err(Error::InvalidInput("zero-dimensional ellipsoid".into()));
    }
    if !(beta >= 0.0 && beta * (k as f64) < 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must satisfy 0 <= beta < 1/{k}, got {beta}"),
        });
    }
    let a = &h.normal;
    let aa = e.shape.matrix() * a;
    let s = a.dot(&aa).sqrt();
    if !(s > 0.0) {
        return Err(Error::Numeric("degenerate cut normal".into()));
    }
    let alpha = (a.dot(&e.center) - h.offset) / s;
    if alpha.is_nan() {
        return Err(Error::Numeric("cut depth is NaN".into()));
    }
    if alpha >= 1.0 {
        return Ok(CutOutcome::Empty);
    }
    if alpha < -beta || alpha <= -1.0 {
        return Ok(CutOutcome::NoCutNeeded);
    }

    let updated = if k == 1 {
        let r = e.shape.matrix()[(0, 0)].sqrt();
        let c = e.center[0];
        let (mut lo, mut hi) = (c - r, c + r);
        let bound = h.offset / a[0];
        if a[0] > 0.0 {
            hi = hi.min(bound);
        } else {
            lo = lo.max(bound);
        }
        let half = 0.5 * (hi - lo);
        Ellipsoid {
            center: DVector::from_element(1, 0.5 * (lo + hi)),
            shape: PdMatrix::new_with_jitter(nalgebra::DMatrix::from_element(1, 1, half * half))?.0,
        }
    } else {
        let kf = k as f64;
        let b = &aa / s;
        let tau = (1.0 + kf * alpha) / (kf + 1.0);
        let sigma = 2.0 * (1.0 + kf * alpha) / ((kf + 1.0) * (1.0 + alpha));
        let dilation = kf * kf * (1.0 - alpha * alpha) / (kf * kf - 1.0);
        let center = &e.center - &b * tau;
        let shape = (e.shape.matrix() - (&b * b.transpose()) * sigma) * dilation;
        Ellipsoid {
            center,
            shape: PdMatrix::new_with_jitter(shape)?.0,
        }
    };

    let drop = e.log_volume() - updated.log_volume();
    let required = volume_decrease_bound(k, beta);
    if drop < required - 1e-9 {
        return Err(Error::Numeric(format!(
            "shallow cut decreased log-volume by {drop:e}, below the guaranteed {required:e}"
        )));
    }
    Ok(CutOutcome::Updated(updated))
}

/// Orthogonal projection onto the first `n` coordinates.
pub fn project_to_integer_coordinates(e: &Ellipsoid, n: usize) -> Result<Ellipsoid> {
    if n == 0 || n > e.dim() {
        return Err(Error::InvalidInput(format!(
            "cannot project a {}-dimensional ellipsoid onto {n} coordinates",
            e.dim()
        )));
    }
    Ok(Ellipsoid {
        center: e.center.rows(0, n).into_owned(),
        shape: e.shape.leading(n)?,
    })
}

/// Minimizes `||(xhat, y) - c||_A` over the continuous block `y`.
///
/// The minimizer is `y = c_y + A_yx A_xx^{-1} (xhat - c_x)`.
pub fn min_norm_over_fiber(e: &Ellipsoid, xhat: &DVector<f64>) -> Result<DVector<f64>> {
    let k = e.dim();
    let n = xhat.len();
    if n > k {
        return Err(Error::Dimension {
            expected: k,
            got: n,
        });
    }
    if n == 0 {
        return Ok(e.center.clone());
    }
    let mut z = e.center.clone();
    z.rows_mut(0, n).copy_from(xhat);
    if n == k {
        return Ok(z);
    }
    let dx = xhat - e.center.rows(0, n);
    let u = e.shape.leading(n)?.solve(&dx);
    let a_yx = e.shape.matrix().view((n, 0), (k - n, n));
    let y = e.center.rows(n, k - n) + a_yx * u;
    z.rows_mut(n, k - n).copy_from(&y);
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((log_unit_ball_volume(1) - 2f64.ln()).abs() < 1e-15);
        assert!((log_unit_ball_volume(2) - std::f64::consts::PI.ln()).abs() < 1e-15);
        let v3 = 4.0 / 3.0 * std::f64::consts::PI;
        assert!((log_unit_ball_volume(3) - v3.ln()).abs() < 1e-14);
        assert_eq!(log_unit_ball_volume(0), 0.0);
    }

    #[test]
    fn log_volume_examples() {
        let disk = Ellipsoid::ball(v(&[0.0, 0.0]), 1.0);
        assert!((disk.log_volume() - std::f64::consts::PI.ln()).abs() < 1e-14);
        let big = Ellipsoid::new(v(&[0.0, 0.0]), PdMatrix::diagonal(&[4.0, 4.0]).unwrap()).unwrap();
        assert!((big.log_volume() - (4.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn log_volume_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = PdMatrix::from_rows(3, &[2.0, 0.4, -0.3, 0.4, 1.0, 0.2, -0.3, 0.2, 0.7]).unwrap();
        let e = Ellipsoid::new(v(&[0.5, -1.0, 2.0]), a).unwrap();
        let half: Vec<f64> = (0..3).map(|i| e.shape.matrix()[(i, i)].sqrt()).collect();
        let samples = 400_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let z = DVector::from_fn(3, |i, _| e.center[i] + half[i] * rng.gen_range(-1.0..1.0));
            if e.contains(&z, 0.0) {
                hits += 1;
            }
        }
        let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
        let mc = box_vol * hits as f64 / samples as f64;
        let exact = e.log_volume().exp();
        assert!((mc - exact).abs() / exact < 0.02, "mc {mc} exact {exact}");
    }

    #[test]
    fn one_dimensional_central_cut() {
        let e = Ellipsoid::ball(v(&[0.0]), 1.0);
        let h = Halfspace::from_slice(&[1.0], 0.0).unwrap();
        let CutOutcome::Updated(next) = shallow_cut_update(&e, &h, 0.0).unwrap() else {
            panic!("expected update");
        };
        assert!((next.center[0] + 0.5).abs() < 1e-15);
        assert!((next.shape.matrix()[(0, 0)] - 0.25).abs() < 1e-15);
        let ratio = (next.log_volume() - e.log_volume()).exp();
        assert!((ratio - 0.5).abs() < 1e-12);
        assert!(ratio <= (-0.2f64).exp());
    }

    #[test]
    fn disk_central_cut_contains_half_disk() {
        let e = Ellipsoid::ball(v(&[0.0, 0.0]), 1.0);
        let h = Halfspace::from_slice(&[1.0, 0.0], 0.0).unwrap();
        let CutOutcome::Updated(next) = shallow_cut_update(&e, &h, 0.0).unwrap() else {
            panic!("expected update");
        };
        assert!(next.log_volume() - e.log_volume() <= -0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 10_000 {
            let z = v(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            if e.contains(&z, 0.0) && h.contains(&z, 0.0) {
                assert!(next.contains(&z, 1e-7), "{z}");
                checked += 1;
            }
        }
    }

    #[test]
    fn containing_halfspace_needs_no_cut() {
        let e = Ellipsoid::ball(v(&[0.0, 0.0]), 1.0);
        let h = Halfspace::from_slice(&[1.0, 1.0], 5.0).unwrap();
        assert_eq!(
            shallow_cut_update(&e, &h, 0.0).unwrap(),
            CutOutcome::NoCutNeeded
        );
        // misses the 0.2-core but still cuts the ellipsoid
        let h = Halfspace::from_slice(&[1.0, 0.0], 0.3).unwrap();
        assert_eq!(
            shallow_cut_update(&e, &h, 0.2).unwrap(),
            CutOutcome::NoCutNeeded
        );
        assert!(matches!(
            shallow_cut_update(&e, &h, 0.4).unwrap(),
            CutOutcome::Updated(_)
        ));
    }

    #[test]
    fn disjoint_halfspace_is_empty_and_beta_checked() {
        let e = Ellipsoid::ball(v(&[0.0, 0.0]), 1.0);
        let h = Halfspace::from_slice(&[1.0, 0.0], -2.0).unwrap();
        assert_eq!(shallow_cut_update(&e, &h, 0.0).unwrap(), CutOutcome::Empty);
        assert_eq!(
            shallow_cut_update(&e, &Halfspace::empty(2), 0.0).unwrap(),
            CutOutcome::Empty
        );
        assert!(shallow_cut_update(&e, &h, 0.5).is_err());
        assert!(shallow_cut_update(&e, &h, -0.1).is_err());
    }

    #[test]
    fn projection_examples() {
        let e = Ellipsoid::new(v(&[1.0, 2.0]), PdMatrix::diagonal(&[4.0, 9.0]).unwrap()).unwrap();
        let p = project_to_integer_coordinates(&e, 1).unwrap();
        assert_eq!(p.center[0], 1.0);
        assert!((p.half_width(&v(&[1.0])) - 2.0).abs() < 1e-15);
        assert_eq!(project_to_integer_coordinates(&e, 2).unwrap(), e);
        assert!(project_to_integer_coordinates(&e, 3).is_err());
        assert!(project_to_integer_coordinates(&e, 0).is_err());
    }

    #[test]
    fn correlated_projection_matches_boundary_extremes() {
        let e = Ellipsoid::new(
            v(&[0.0, 0.0]),
            PdMatrix::from_rows(2, &[2.0, 1.0, 1.0, 2.0]).unwrap(),
        )
        .unwrap();
        let p = project_to_integer_coordinates(&e, 1).unwrap();
        let half = p.half_width(&v(&[1.0]));
        assert!((half - 2f64.sqrt()).abs() < 1e-14);
        // boundary points c + L u with |u| = 1
        let l = e.shape.lower().clone();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..10_000 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 10_000.0;
            let z = &l * v(&[t.cos(), t.sin()]);
            lo = lo.min(z[0]);
            hi = hi.max(z[0]);
        }
        assert!((hi - half).abs() < 1e-6 && (lo + half).abs() < 1e-6);
    }

    #[test]
    fn fiber_minimizer_examples() {
        let e = Ellipsoid::ball(v(&[0.0, 0.0]), 1.0);
        assert_eq!(min_norm_over_fiber(&e, &v(&[1.0])).unwrap(), v(&[1.0, 0.0]));

        let e = Ellipsoid::new(v(&[0.0, 3.0]), PdMatrix::diagonal(&[1.0, 4.0]).unwrap()).unwrap();
        assert_eq!(min_norm_over_fiber(&e, &v(&[2.0])).unwrap(), v(&[2.0, 3.0]));
    }

    #[test]
    fn correlated_fiber_minimizer_matches_grid_search() {
        let e = Ellipsoid::new(
            v(&[0.0, 0.0]),
            PdMatrix::from_rows(2, &[2.0, 1.0, 1.0, 2.0]).unwrap(),
        )
        .unwrap();
        // oracle: scan y on a fine grid under the A^{-1} norm
        let mut best = (f64::INFINITY, 0.0);
        for i in -40_000..=40_000 {
            let y = i as f64 * 1e-4;
            let val = e.norm_of_offset(&v(&[1.0, y]));
            if val < best.0 {
                best = (val, y);
            }
        }
        assert!((best.1 - 0.5).abs() < 1e-4);
        let z = min_norm_over_fiber(&e, &v(&[1.0])).unwrap();
        assert!((z[1] - 0.5).abs() < 1e-12);
    }
}
