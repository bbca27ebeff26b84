//! Brute-force centerpoints at tiny dimension.
//!
//! `h_S(z)` is the smallest mixed-integer volume of `S` on a closed halfspace
//! through `z`. It is estimated as a minimum over a fixed direction set, so the
//! reported value can exceed the true `h_S(z)`; the drop observed when the
//! direction set is refined once is reported as `direction_gap`.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::infolab::volume::{FiberShape, MixedRegion};
use crate::model::ConvexBody;

/// Largest `n + d` handled.
pub const MAX_CENTERPOINT_DIM: usize = 4;

/// Candidates keep this distance (relative to the slice extent) from the
/// slice boundary, so a query never sits on a cut it has already been
/// answered with.
const INTERIOR_MARGIN: f64 = 1e-9;

fn margin(lo: &[f64], hi: &[f64]) -> f64 {
    let extent = lo.iter().zip(hi).map(|(l, h)| h - l).fold(1.0, f64::max);
    INTERIOR_MARGIN * extent * extent
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterpointEstimate {
    pub point: DVector<f64>,
    /// Worst halfspace mass at `point` over the refined direction set.
    pub h: f64,
    pub nu: f64,
    pub grid_res: usize,
    /// Size of the search direction set.
    pub directions: usize,
    pub direction_gap: f64,
}

impl CenterpointEstimate {
    pub fn ratio(&self) -> f64 {
        if self.nu > 0.0 {
            self.h / self.nu
        } else {
            0.0
        }
    }
}

/// `(d/(d+1))^d` for `n = 0`, `1/(2^n (d+1))` otherwise.
pub fn centerpoint_bound(n: usize, d: usize) -> f64 {
    if n == 0 {
        let d = d as f64;
        (d / (d + 1.0)).powf(d)
    } else {
        1.0 / ((1u64 << n) as f64 * (d as f64 + 1.0))
    }
}

/// Angular steps per half turn: `pi/64` in the plane, coarser above.
pub fn default_angular_resolution(k: usize) -> usize {
    match k {
        0..=2 => 64,
        3 => 16,
        _ => 8,
    }
}

/// Unit directions on a spherical grid with angular step `pi/m`, plus the
/// coordinate axes.
pub fn sphere_directions(k: usize, m: usize) -> Vec<DVector<f64>> {
    let mut out = grid(k, m.max(1));
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(k);
            e[i] = s;
            out.push(e);
        }
    }
    out
}

fn grid(k: usize, m: usize) -> Vec<DVector<f64>> {
    match k {
        0 => Vec::new(),
        1 => vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -1.0),
        ],
        2 => (0..2 * m)
            .map(|i| {
                let t = PI * i as f64 / m as f64;
                DVector::from_column_slice(&[t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..=m {
                let t = PI * i as f64 / m as f64;
                let (c, s) = (t.cos(), t.sin());
                let ring = (m as f64 * s).round() as usize;
                if ring == 0 {
                    let mut e = DVector::zeros(k);
                    e[0] = c.signum();
                    out.push(e);
                    continue;
                }
                for v in grid(k - 1, ring) {
                    let mut e = DVector::zeros(k);
                    e[0] = c;
                    for j in 0..k - 1 {
                        e[j + 1] = s * v[j];
                    }
                    out.push(e);
                }
            }
            out
        }
    }
}

/// `min_u nu(S ∩ {w : <u, w> >= <u, z>})`, stopping early once below `floor`.
pub fn halfspace_depth(
    region: &MixedRegion,
    z: &DVector<f64>,
    dirs: &[DVector<f64>],
    floor: f64,
) -> f64 {
    let mut best = f64::INFINITY;
    let mut neg = vec![0.0; region.dim()];
    for u in dirs {
        for (j, v) in neg.iter_mut().enumerate() {
            *v = -u[j];
        }
        let mass = region.volume_below(&neg, -u.dot(z) + 1e-12);
        if mass < best {
            best = mass;
            if best <= floor {
                break;
            }
        }
    }
    best
}

fn cell_candidates(shape: &FiberShape, res: usize) -> Vec<Vec<f64>> {
    let mut out = vec![shape.centroid()];
    if matches!(shape, FiberShape::Point) {
        return out;
    }
    let (lo, hi) = shape.bounds();
    let d = lo.len();
    let gap = margin(&lo, &hi);
    let total = res.pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let y: Vec<f64> = (0..d)
            .map(|j| {
                let i = rem % res;
                rem /= res;
                lo[j] + (hi[j] - lo[j]) * (i as f64 + 0.5) / res as f64
            })
            .collect();
        if shape.contains(&y, -gap) {
            out.push(y);
        }
    }
    out
}

/// Grid search for a centerpoint of a region, refined twice around the best
/// candidate. Ties keep the first candidate in fiber order.
pub fn region_centerpoint(region: &MixedRegion, grid_res: usize) -> Result<CenterpointEstimate> {
    let k = region.dim();
    if k > MAX_CENTERPOINT_DIM {
        return Err(Error::Capability(format!(
            "centerpoints are brute-forced only for n + d <= {MAX_CENTERPOINT_DIM}, got {k}"
        )));
    }
    if grid_res == 0 {
        return Err(Error::InvalidParameter {
            name: "grid_res",
            reason: "must be at least 1".into(),
        });
    }
    if region.is_empty() {
        return Err(Error::InvalidInput(
            "an empty set has no centerpoint".into(),
        ));
    }
    let m = default_angular_resolution(k);
    let dirs = sphere_directions(k, m);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let consider = |fi: usize, y: Vec<f64>, best: &mut Option<(f64, usize, Vec<f64>)>| {
        let floor = best.as_ref().map_or(-1.0, |b| b.0);
        let h = halfspace_depth(region, &region.point(fi, &y), &dirs, floor);
        if h > floor {
            *best = Some((h, fi, y));
        }
    };
    for (fi, f) in region.fibers.iter().enumerate() {
        for y in cell_candidates(&f.shape, grid_res) {
            consider(fi, y, &mut best);
        }
    }
    let (_, fi, _) = best.clone().expect("nonempty region");
    let shape = &region.fibers[fi].shape;
    let (lo, hi) = shape.bounds();
    let d = lo.len();
    let gap = margin(&lo, &hi);
    let mut step: Vec<f64> = (0..d).map(|j| (hi[j] - lo[j]) / grid_res as f64).collect();
    for _ in 0..2 {
        step.iter_mut().for_each(|s| *s /= 4.0);
        let center = best.as_ref().unwrap().2.clone();
        let side = 5usize;
        for idx in 0..side.pow(d as u32) {
            let mut rem = idx;
            let y: Vec<f64> = (0..d)
                .map(|j| {
                    let o = (rem % side) as f64 - 2.0;
                    rem /= side;
                    center[j] + o * step[j]
                })
                .collect();
            if shape.contains(&y, -gap) {
                consider(fi, y, &mut best);
            }
        }
    }
    let (h, fi, y) = best.expect("nonempty region");
    let point = region.point(fi, &y);
    let fine = halfspace_depth(region, &point, &sphere_directions(k, 2 * m), -1.0);
    let h_fine = fine.min(h);
    Ok(CenterpointEstimate {
        point,
        h: h_fine,
        nu: region.volume(),
        grid_res,
        directions: dirs.len(),
        direction_gap: h - h_fine,
    })
}

/// Approximate centerpoint of `body ∩ (Z^n x R^d)`.
pub fn approx_centerpoint(
    body: &ConvexBody,
    n: usize,
    d: usize,
    grid_res: usize,
) -> Result<CenterpointEstimate> {
    if n + d > MAX_CENTERPOINT_DIM {
        return Err(Error::Capability(format!(
            "centerpoints are brute-forced only for n + d <= {MAX_CENTERPOINT_DIM}, got {}",
            n + d
        )));
    }
    region_centerpoint(&MixedRegion::from_body(body, n, d)?, grid_res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infolab::volume::convex_polygon;

    #[test]
    fn interval_midpoint() {
        let c = approx_centerpoint(&ConvexBody::cube(&[0.0], &[1.0]), 0, 1, 20).unwrap();
        assert!((c.point[0] - 0.5).abs() < 1e-9);
        assert!((c.h - 0.5).abs() < 1e-9);
    }

    #[test]
    fn triangle_grunbaum() {
        let tri = convex_polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = approx_centerpoint(&ConvexBody::Polyhedron(tri), 0, 2, 24).unwrap();
        assert!(c.h >= (4.0 / 9.0 - 0.02) * c.nu, "{c:?}");
        assert!((c.point[0] - 1.0 / 3.0).abs() < 0.05 && (c.point[1] - 1.0 / 3.0).abs() < 0.05);
    }

    #[test]
    fn two_segments() {
        let c = approx_centerpoint(&ConvexBody::cube(&[0.0, 0.0], &[1.0, 1.0]), 1, 1, 20).unwrap();
        assert!(c.h >= 0.5 - 1e-9, "{c:?}");
        assert!(c.h <= c.nu);
    }

    #[test]
    fn too_many_dimensions() {
        let body = ConvexBody::cube(&[0.0; 5], &[1.0; 5]);
        assert!(matches!(
            approx_centerpoint(&body, 1, 4, 4),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn direction_counts() {
        assert_eq!(sphere_directions(2, 64).len(), 128 + 4);
        for u in sphere_directions(3, 8) {
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
    }
}
