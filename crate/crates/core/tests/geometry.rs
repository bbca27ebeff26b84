use mico_core::geometry::{
    shallow_cut_update, sublevel_ball, volume_decrease_bound, CutOutcome, Ellipsoid, PdMatrix,
};
use mico_core::model::Halfspace;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn ellipsoid(k: usize) -> impl Strategy<Value = Ellipsoid> {
    (
        prop::collection::vec(-1.0f64..1.0, k * k),
        prop::collection::vec(-3.0f64..3.0, k),
    )
        .prop_map(move |(b, c)| {
            let b = DMatrix::from_vec(k, k, b);
            let a = &b * b.transpose() + DMatrix::identity(k, k) * 0.1;
            Ellipsoid::new(DVector::from_vec(c), PdMatrix::new(a).unwrap()).unwrap()
        })
}

fn unit_ball_point(u: Vec<f64>) -> DVector<f64> {
    let u = DVector::from_vec(u);
    let n = u.norm();
    if n > 1.0 {
        u / n
    } else {
        u
    }
}

fn cut_case() -> impl Strategy<Value = (Ellipsoid, DVector<f64>, f64, f64)> {
    (1usize..6).prop_flat_map(|k| {
        (
            ellipsoid(k),
            prop::collection::vec(-1.0f64..1.0, k)
                .prop_filter("nonzero", |a| a.iter().any(|v| v.abs() > 1e-2)),
            0.0f64..0.95,
            -1.0f64..0.98,
        )
            .prop_map(move |(e, a, bfrac, s)| {
                let beta = bfrac / k as f64;
                (e, DVector::from_vec(a), beta, s)
            })
    })
}

proptest! {
    // An accepted cut shrinks the log-volume by at least the law and keeps E ∩ H.
    #[test]
    fn shallow_cut_law_and_containment(
        (e, a, beta, s) in cut_case(),
        samples in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 200),
    ) {
        let k = e.dim();
        // <a, z> <= <a, c> - s * half_width: s is the depth of the cut
        let offset = a.dot(&e.center) - s * e.half_width(&a);
        let h = Halfspace::new(a.clone(), offset).unwrap();
        match shallow_cut_update(&e, &h, beta).unwrap() {
            CutOutcome::Updated(next) => {
                prop_assert!(s >= -beta - 1e-9);
                let drop = next.log_volume() - e.log_volume();
                prop_assert!(drop <= -volume_decrease_bound(k, beta) + 1e-9, "drop {drop}");
                for u in samples {
                    let z = &e.center + e.shape.lower() * unit_ball_point(u[..k].to_vec());
                    if h.contains(&z, 0.0) {
                        prop_assert!(next.contains(&z, 1e-7));
                    }
                }
            }
            CutOutcome::NoCutNeeded => prop_assert!(s <= -beta + 1e-9),
            CutOutcome::Empty => prop_assert!(s >= 1.0 - 1e-9),
        }
    }

    // Every point of the returned ball has value at most f(z*) + eps when f is M-Lipschitz.
    #[test]
    fn sublevel_ball_is_in_sublevel_set(
        k in 1usize..4,
        seed in prop::collection::vec(-1.0f64..1.0, 12),
        rho in 0.05f64..1.0,
        eps in 1e-3f64..0.5,
        u in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let radius = 4.0;
        let lipschitz = 1.0;
        let z_star = DVector::from_vec(seed[..k].iter().map(|v| v * 1.5).collect());
        let a = DVector::from_vec(seed[4..4 + k].iter().map(|v| v * 1.5).collect());
        let (c, r) = sublevel_ball(&z_star, &a, rho, eps, lipschitz, radius).unwrap();
        prop_assert!(r > 0.0);
        // worst 1-Lipschitz f with minimum at z*: f(z) - f(z*) <= |z - z*|
        let z = &c + unit_ball_point(u[..k].to_vec()) * r;
        prop_assert!((&z - &z_star).norm() * lipschitz <= eps + 1e-9);
    }
}
