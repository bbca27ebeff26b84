//! Exact shortest/closest lattice vectors of `Z^k` under `||w||_A = sqrt(w^T A^{-1} w)`.
//!
//! LLL on the Gram matrix, then Fincke-Pohst depth-first enumeration with
//! Schnorr-Euchner ordering.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::pd::{symmetrize, PdMatrix};

/// Largest lattice dimension accepted.
pub const K_MAX: usize = 8;

pub type IntVec = Vec<i64>;

fn overflow() -> Error {
    Error::Capability("integer overflow in lattice arithmetic".into())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInput("lattice of dimension 0".into()));
    }
    if k > K_MAX {
        return Err(Error::Capability(format!(
            "lattice dimension {k} exceeds the enumeration limit {K_MAX}"
        )));
    }
    Ok(())
}

/// Unimodular change of basis `U` (columns) with its inverse, and the reduced
/// Gram matrix `U^T G U`.
pub(crate) struct Reduced {
    pub gram: DMatrix<f64>,
    pub u: DMatrix<i64>,
    pub u_inv: DMatrix<i64>,
}

fn gram_of(g: &DMatrix<f64>, u: &DMatrix<i64>) -> DMatrix<f64> {
    let uf = u.map(|v| v as f64);
    symmetrize(uf.transpose() * g * uf)
}

/// Gram-Schmidt coefficients `mu` and squared lengths `b` from a Gram matrix.
fn gso(g: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let k = g.nrows();
    let mut mu = DMatrix::zeros(k, k);
    let mut b = vec![0.0; k];
    for i in 0..k {
        for j in 0..i {
            let mut s = g[(i, j)];
            for l in 0..j {
                s -= mu[(j, l)] * mu[(i, l)] * b[l];
            }
            mu[(i, j)] = s / b[j];
        }
        let mut s = g[(i, i)];
        for l in 0..i {
            s -= mu[(i, l)] * mu[(i, l)] * b[l];
        }
        b[i] = s;
    }
    (mu, b)
}

pub(crate) fn lll(g: &DMatrix<f64>) -> Result<Reduced> {
    let k = g.nrows();
    let mut u = DMatrix::<i64>::identity(k, k);
    let mut u_inv = DMatrix::<i64>::identity(k, k);
    let mut gram = g.clone();
    let mut i = 1;
    let mut guard = 0usize;
    while i < k {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Numeric("LLL did not terminate".into()));
        }
        for j in (0..i).rev() {
            let (mu, _) = gso(&gram);
            let q = mu[(i, j)].round();
            if q != 0.0 {
                if !q.is_finite() || q.abs() > 1e15 {
                    return Err(overflow());
                }
                let q = q as i64;
                // column i -= q column j; row j of the inverse += q row i
                for r in 0..k {
                    let v = u[(r, j)].checked_mul(q).ok_or_else(overflow)?;
                    u[(r, i)] = u[(r, i)].checked_sub(v).ok_or_else(overflow)?;
                    let w = u_inv[(i, r)].checked_mul(q).ok_or_else(overflow)?;
                    u_inv[(j, r)] = u_inv[(j, r)].checked_add(w).ok_or_else(overflow)?;
                }
                gram = gram_of(g, &u);
            }
        }
        let (mu, b) = gso(&gram);
        let m = mu[(i, i - 1)];
        if b[i] < (0.75 - m * m) * b[i - 1] {
            u.swap_columns(i, i - 1);
            u_inv.swap_rows(i, i - 1);
            gram = gram_of(g, &u);
            i = (i - 1).max(1);
        } else {
            i += 1;
        }
    }
    Ok(Reduced { gram, u, u_inv })
}

/// Depth-first search for the integer `v` minimizing `(v - t)^T G (v - t)`,
/// excluding `v = 0` when `nonzero`. `bound` is an inclusive initial radius
/// squared that some vector is known to attain.
fn fincke_pohst(
    g: &DMatrix<f64>,
    t: &DVector<f64>,
    nonzero: bool,
    bound: f64,
) -> Result<(Vec<i64>, f64)> {
    let k = g.nrows();
    let l = nalgebra::Cholesky::new(g.clone())
        .ok_or_else(|| Error::Numeric("Gram matrix not positive definite".into()))?
        .l();
    let r = l.transpose();
    struct Search<'a> {
        r: &'a DMatrix<f64>,
        t: &'a DVector<f64>,
        nonzero: bool,
        bound: f64,
        best: Option<(Vec<i64>, f64)>,
        cur: Vec<i64>,
        nodes: usize,
    }
    impl Search<'_> {
        fn visit(&mut self, i: usize, partial: f64) -> Result<()> {
            self.nodes += 1;
            if self.nodes > 50_000_000 {
                return Err(Error::Capability(
                    "lattice enumeration budget exhausted".into(),
                ));
            }
            let k = self.cur.len();
            let rii = self.r[(i, i)];
            let mut c = self.t[i];
            for j in i + 1..k {
                c -= self.r[(i, j)] / rii * (self.cur[j] as f64 - self.t[j]);
            }
            let limit = self.best.as_ref().map_or(self.bound, |b| b.1);
            let room = limit - partial;
            if room < 0.0 {
                return Ok(());
            }
            let span = (room.max(0.0)).sqrt() / rii;
            if !span.is_finite() || span > 1e12 {
                return Err(Error::Capability("enumeration radius too large".into()));
            }
            let lo = (c - span - 1e-9).ceil() as i64;
            let hi = (c + span + 1e-9).floor() as i64;
            let mut xs: Vec<i64> = (lo..=hi).collect();
            // Schnorr-Euchner order: nearest to the center first
            xs.sort_by(|a, b| {
                let da = (*a as f64 - c).abs();
                let db = (*b as f64 - c).abs();
                da.partial_cmp(&db).unwrap().then(a.cmp(b))
            });
            for x in xs {
                let diff = x as f64 - c;
                let val = partial + rii * rii * diff * diff;
                let limit = self.best.as_ref().map_or(self.bound, |b| b.1);
                if val > limit {
                    break;
                }
                self.cur[i] = x;
                if i == 0 {
                    if self.nonzero && self.cur.iter().all(|&v| v == 0) {
                        continue;
                    }
                    if self.best.as_ref().map_or(true, |(_, b)| val < *b) {
                        self.best = Some((self.cur.clone(), val));
                    }
                } else {
                    self.visit(i - 1, val)?;
                }
            }
            self.cur[i] = 0;
            Ok(())
        }
    }
    let mut s = Search {
        r: &r,
        t,
        nonzero,
        bound,
        best: None,
        cur: vec![0; k],
        nodes: 0,
    };
    s.visit(k - 1, 0.0)?;
    s.best
        .ok_or_else(|| Error::Numeric("enumeration found no vector inside its radius".into()))
}

fn to_original(u: &DMatrix<i64>, v: &[i64]) -> Result<IntVec> {
    let k = v.len();
    let mut out = vec![0i64; k];
    for r in 0..k {
        let mut acc: i64 = 0;
        for c in 0..k {
            let p = u[(r, c)].checked_mul(v[c]).ok_or_else(overflow)?;
            acc = acc.checked_add(p).ok_or_else(overflow)?;
        }
        out[r] = acc;
    }
    Ok(out)
}

fn normalize_sign(mut w: IntVec) -> IntVec {
    if let Some(&first) = w.iter().find(|&&v| v != 0) {
        if first < 0 {
            w.iter_mut().for_each(|v| *v = -*v);
        }
    }
    w
}

/// Shortest nonzero vector of `Z^k` for the quadratic form `gram`.
pub(crate) fn svp_gram(gram: &DMatrix<f64>) -> Result<(IntVec, f64)> {
    let k = gram.nrows();
    check_k(k)?;
    let red = lll(gram)?;
    let bound = (0..k)
        .map(|i| red.gram[(i, i)])
        .fold(f64::INFINITY, f64::min);
    let (v, val) = fincke_pohst(
        &red.gram,
        &DVector::zeros(k),
        true,
        bound * (1.0 + 1e-9) + 1e-300,
    )?;
    Ok((normalize_sign(to_original(&red.u, &v)?), val))
}

/// Closest vector of `Z^k` to `target` for the quadratic form `gram`.
pub(crate) fn cvp_gram(gram: &DMatrix<f64>, target: &DVector<f64>) -> Result<(IntVec, f64)> {
    let k = gram.nrows();
    check_k(k)?;
    let red = lll(gram)?;
    let t = red.u_inv.map(|v| v as f64) * target;
    // nearest-plane candidate gives the initial radius
    let r = nalgebra::Cholesky::new(red.gram.clone())
        .ok_or_else(|| Error::Numeric("Gram matrix not positive definite".into()))?
        .l()
        .transpose();
    let mut babai = vec![0i64; k];
    let mut val = 0.0;
    for i in (0..k).rev() {
        let rii = r[(i, i)];
        let mut c = t[i];
        for j in i + 1..k {
            c -= r[(i, j)] / rii * (babai[j] as f64 - t[j]);
        }
        babai[i] = c.round() as i64;
        val += rii * rii * (babai[i] as f64 - c).powi(2);
    }
    let (v, val) = fincke_pohst(&red.gram, &t, false, val * (1.0 + 1e-9) + 1e-12)?;
    Ok((to_original(&red.u, &v)?, val))
}

/// `||w||_A`.
pub fn lattice_norm(a: &PdMatrix, w: &[i64]) -> f64 {
    let v = DVector::from_iterator(w.len(), w.iter().map(|&x| x as f64));
    a.inv_quad(&v).sqrt()
}

/// A nonzero `w` in `Z^k` minimizing `||w||_A`; first nonzero entry positive.
pub fn svp(a: &PdMatrix) -> Result<IntVec> {
    Ok(svp_gram(&a.inverse())?.0)
}

/// `v` in `Z^k` minimizing `||v - c||_A`.
pub fn cvp(a: &PdMatrix, c: &DVector<f64>) -> Result<IntVec> {
    crate::error::check_dim(a.order(), c.len())?;
    Ok(cvp_gram(&a.inverse(), c)?.0)
}

/// Integer direction of minimum width of the ellipsoid with shape `aproj`,
/// together with that width `max <w, x> - min <w, x> = 2 sqrt(w^T A w)`.
///
/// This is the shortest vector for `A~ = A^{-1} / 4`, whose norm is
/// `sqrt(w^T 4A w)`, so the enumeration runs on the Gram matrix `4A` directly.
pub fn flatness_direction(aproj: &PdMatrix) -> Result<(IntVec, f64)> {
    let (w, val) = svp_gram(&(aproj.matrix() * 4.0))?;
    Ok((w, val.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_svp_is_unit() {
        let w = svp(&PdMatrix::identity(3)).unwrap();
        assert_eq!(w.iter().map(|v| v.abs()).sum::<i64>(), 1);
    }

    #[test]
    fn diagonal_svp() {
        let a = PdMatrix::diagonal(&[1.0, 0.01]).unwrap();
        assert_eq!(svp(&a).unwrap(), vec![1, 0]);
    }

    #[test]
    fn cvp_rounding_and_integral() {
        let c = DVector::from_vec(vec![0.4, 0.7]);
        assert_eq!(cvp(&PdMatrix::identity(2), &c).unwrap(), vec![0, 1]);
        let c = DVector::from_vec(vec![3.0, -2.0, 5.0]);
        assert_eq!(cvp(&PdMatrix::identity(3), &c).unwrap(), vec![3, -2, 5]);
    }

    #[test]
    fn lll_keeps_unimodular_pair() {
        let g = DMatrix::from_row_slice(3, 3, &[10.0, 9.0, 1.0, 9.0, 10.0, 2.0, 1.0, 2.0, 5.0]);
        let red = lll(&g).unwrap();
        let prod = &red.u * &red.u_inv;
        assert_eq!(prod, DMatrix::<i64>::identity(3, 3));
    }

    #[test]
    fn dimension_limit() {
        assert!(matches!(
            svp(&PdMatrix::identity(9)),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn flatness_examples() {
        let (w, width) = flatness_direction(&PdMatrix::diagonal(&[100.0, 0.01]).unwrap()).unwrap();
        assert_eq!(w, vec![0, 1]);
        assert!((width - 0.2).abs() < 1e-12);
        let (_, width) = flatness_direction(&PdMatrix::identity(2)).unwrap();
        assert!((width - 2.0).abs() < 1e-12);
    }
}
