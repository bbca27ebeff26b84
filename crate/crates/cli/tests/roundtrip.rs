use mico_cli::{parse_instance, print_instance, Instance};
use mico_core::model::{ConvexBody, NormTag, Objective, Polyhedron, ProblemParameters};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn coords(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, k)
}

fn body(k: usize) -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        (coords(k), 0.1f64..3.0).prop_map(|(c, r)| ConvexBody::ball(&c, r)),
        (coords(k), prop::collection::vec(0.1f64..2.0, k)).prop_map(|(lo, w)| {
            let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
            ConvexBody::cube(&lo, &hi)
        }),
        prop::collection::vec((coords(k), 0.5f64..4.0), 1..6).prop_map(move |rows| {
            let rows: Vec<(Vec<f64>, f64)> = rows
                .into_iter()
                .map(|(mut a, b)| {
                    a[0] += 7.0;
                    (a, b)
                })
                .collect();
            ConvexBody::Polyhedron(Polyhedron::from_rows(k, &rows).unwrap())
        }),
    ]
}

fn objective(k: usize) -> impl Strategy<Value = Option<Objective>> {
    prop_oneof![
        Just(None),
        coords(k).prop_map(|c| Some(Objective::linear(&c))),
        (-3.0f64..3.0).prop_map(move |v| Some(Objective::constant(v, k))),
        (coords(k), coords(k), -2.0f64..2.0).prop_map(move |(d, q, r)| {
            let diag: Vec<f64> = d.iter().map(|v| v.abs() + 0.1).collect();
            Some(Objective::Quadratic {
                q_mat: DMatrix::from_diagonal(&DVector::from_vec(diag)),
                q: DVector::from_vec(q),
                r,
            })
        }),
        prop::collection::vec((coords(k), -2.0f64..2.0), 1..4)
            .prop_map(|p| Some(Objective::max_affine(p).unwrap())),
    ]
}

fn instance() -> impl Strategy<Value = Instance> {
    (0usize..3, 0usize..3)
        .prop_filter("nonempty", |(n, d)| n + d > 0)
        .prop_flat_map(|(n, d)| {
            let k = n + d;
            (
                body(k),
                objective(k),
                0.5f64..10.0,
                0.01f64..1.0,
                1e-4f64..0.1,
                any::<bool>(),
            )
                .prop_map(move |(body, objective, radius, rho, eps, sup)| {
                    let mut params = ProblemParameters::new(n, d, radius)
                        .with_rho(rho)
                        .with_eps(eps);
                    if sup {
                        params.norm = NormTag::Sup;
                    }
                    let maximize = matches!(
                        objective,
                        Some(Objective::Linear(_)) | Some(Objective::Constant { .. })
                    ) && sup;
                    Instance {
                        name: format!("case-{n}-{d}"),
                        body,
                        objective,
                        params,
                        maximize,
                    }
                })
        })
}

proptest! {
    #[test]
    fn parse_print_round_trip(inst in instance()) {
        let text = print_instance(&inst).unwrap();
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(back, inst);
    }
}
