use mico_core::model::{ConvexBody, Objective, OracleAnswer, Polyhedron};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const K: usize = 3;

fn point(k: usize, s: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-s..s, k)
}

fn body() -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        (point(K, 2.0), 0.2f64..2.0).prop_map(|(c, r)| ConvexBody::ball(&c, r)),
        (point(K, 2.0), point(K, 1.0)).prop_map(|(lo, w)| {
            let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| l + w.abs() + 0.1).collect();
            ConvexBody::cube(&lo, &hi)
        }),
        prop::collection::vec((point(K, 1.0), 0.5f64..2.0), 1..6).prop_map(|rows| {
            let mut all: Vec<(Vec<f64>, f64)> = (0..K)
                .flat_map(|i| {
                    let mut e = vec![0.0; K];
                    e[i] = 1.0;
                    let mut m = e.clone();
                    m[i] = -1.0;
                    [(e, 3.0), (m, 3.0)]
                })
                .collect();
            all.extend(
                rows.into_iter()
                    .filter(|(a, _)| a.iter().any(|v| v.abs() > 1e-3)),
            );
            ConvexBody::Polyhedron(Polyhedron::from_rows(K, &all).unwrap())
        }),
    ]
}

fn objective() -> impl Strategy<Value = Objective> {
    prop_oneof![
        point(K, 3.0).prop_map(|c| Objective::linear(&c)),
        prop::collection::vec((point(K, 3.0), -2.0f64..2.0), 1..5)
            .prop_map(|p| Objective::max_affine(p).unwrap()),
        (prop::collection::vec(-1.0f64..1.0, K * K), point(K, 2.0)).prop_map(|(b, q)| {
            let b = DMatrix::from_vec(K, K, b);
            let q_mat = &b * b.transpose() + DMatrix::identity(K, K) * 0.05;
            Objective::quadratic(q_mat, DVector::from_vec(q)).unwrap()
        }),
    ]
}

proptest! {
    // Every separator keeps the whole body and cuts off the query point.
    #[test]
    fn separators_are_sound(body in body(), z in point(K, 4.0), probes in prop::collection::vec(point(K, 4.0), 64)) {
        let z = DVector::from_vec(z);
        match body.separate(&z).unwrap() {
            OracleAnswer::Inside => prop_assert!(body.contains(&z, 1e-9).unwrap()),
            OracleAnswer::Separator(h) => {
                prop_assert!(h.excess(&z) >= -1e-9 * h.normal.norm());
                for y in probes {
                    let y = DVector::from_vec(y);
                    if body.contains(&y, 0.0).unwrap() {
                        prop_assert!(h.contains(&y, 1e-9 * h.normal.norm().max(1.0)));
                    }
                }
            }
        }
    }

    #[test]
    fn subgradient_inequality(f in objective(), z in point(K, 3.0), ys in prop::collection::vec(point(K, 3.0), 16)) {
        let z = DVector::from_vec(z);
        let a = f.first_order(&z).unwrap();
        prop_assert!((a.value - f.value(&z).unwrap()).abs() <= 1e-9 * a.value.abs().max(1.0));
        for y in ys {
            let y = DVector::from_vec(y);
            let lin = a.value + a.subgradient.dot(&(&y - &z));
            let fy = f.value(&y).unwrap();
            prop_assert!(fy >= lin - 1e-9 * fy.abs().max(1.0), "f(y) = {fy} below {lin}");
        }
    }
}
