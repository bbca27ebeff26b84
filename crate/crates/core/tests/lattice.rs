use mico_core::geometry::PdMatrix;
use mico_core::lattice::{cvp, kernel_slice_basis, svp};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn pd(k: usize) -> impl Strategy<Value = PdMatrix> {
    prop::collection::vec(-1.0f64..1.0, k * k).prop_map(move |b| {
        let b = DMatrix::from_vec(k, k, b);
        PdMatrix::new(&b * b.transpose() + DMatrix::identity(k, k) * 0.2).unwrap()
    })
}

fn as_vec(w: &[i64]) -> DVector<f64> {
    DVector::from_iterator(w.len(), w.iter().map(|&v| v as f64))
}

/// Every integer vector in the box `|w_i - c_i| <= bound_i`.
fn box_points(c: &DVector<f64>, bound: &[f64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for (i, b) in bound.iter().enumerate() {
        let lo = (c[i] - b).floor() as i64;
        let hi = (c[i] + b).ceil() as i64;
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #[test]
    fn svp_matches_enumeration(a in (1usize..4).prop_flat_map(pd)) {
        let k = a.order();
        let w = svp(&a).unwrap();
        prop_assert!(w.iter().any(|&v| v != 0));
        let best = a.inv_quad(&as_vec(&w));
        // any v with v' A^-1 v <= t has |v_i| <= sqrt(t A_ii)
        let bound: Vec<f64> = (0..k).map(|i| (best * a.matrix()[(i, i)]).sqrt() + 1e-9).collect();
        for v in box_points(&DVector::zeros(k), &bound) {
            if v.iter().any(|&x| x != 0) {
                prop_assert!(a.inv_quad(&as_vec(&v)) >= best - 1e-9 * best.max(1.0));
            }
        }
    }

    #[test]
    fn cvp_matches_enumeration(
        a in (1usize..4).prop_flat_map(pd),
        c in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let k = a.order();
        let c = DVector::from_vec(c[..k].to_vec());
        let v = cvp(&a, &c).unwrap();
        let best = a.inv_quad(&(as_vec(&v) - &c));
        let bound: Vec<f64> = (0..k).map(|i| (best * a.matrix()[(i, i)]).sqrt() + 1e-9).collect();
        for u in box_points(&c, &bound) {
            prop_assert!(a.inv_quad(&(as_vec(&u) - &c)) >= best - 1e-9 * best.max(1.0));
        }
    }

    // Points built from the basis solve the equation, and small kernel
    // vectors have integer coordinates in the basis.
    #[test]
    fn slice_round_trip(
        w in prop::collection::vec(-6i64..=6, 1..5).prop_filter("nonzero", |w| w.iter().any(|&v| v != 0)),
        m in -20i64..=20,
        t in prop::collection::vec(-3i64..=3, 4),
    ) {
        let n = w.len();
        let g = w.iter().fold(0, |acc, &v| gcd(acc, v));
        let slice = kernel_slice_basis(&w, m).unwrap();
        if m % g != 0 {
            prop_assert!(slice.is_none());
            return Ok(());
        }
        let slice = slice.unwrap();
        prop_assert_eq!(slice.basis.len(), n - 1);
        let dot = |x: &[i64]| x.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>();
        prop_assert_eq!(dot(&slice.x0), m);
        let mut x = slice.x0.clone();
        for (b, ti) in slice.basis.iter().zip(&t) {
            prop_assert_eq!(dot(b), 0);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += ti * bi;
            }
        }
        prop_assert_eq!(dot(&x), m);
        if n > 1 {
            let basis = DMatrix::from_fn(n, n - 1, |i, j| slice.basis[j][i] as f64);
            let svd = basis.clone().svd(true, true);
            for y in box_points(&DVector::zeros(n), &vec![2.0; n]) {
                if dot(&y) != 0 {
                    continue;
                }
                let coeffs = svd.solve(&as_vec(&y), 1e-12).unwrap();
                for c in coeffs.iter() {
                    prop_assert!((c - c.round()).abs() < 1e-6, "kernel vector {y:?} not spanned");
                }
            }
        }
    }
}
