use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::enumerate::{lll, IntVec};

/// Integer parametrization `x = x0 + sum_i t_i b_i` of `{x in Z^n : <w, x> = m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceBasis {
    pub x0: IntVec,
    pub basis: Vec<IntVec>,
}

fn overflow() -> Error {
    Error::Capability("integer overflow in slice basis".into())
}

fn dot(a: &[i64], b: &[i64]) -> Result<i64> {
    let mut acc: i64 = 0;
    for (x, y) in a.iter().zip(b) {
        acc = acc
            .checked_add(x.checked_mul(*y).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
    }
    Ok(acc)
}

/// Particular solution and primitive kernel basis of `<w, x> = m`, or `None`
/// when `gcd(w)` does not divide `m`.
///
/// Column operations of the extended Euclidean algorithm bring `w` to
/// `(g, 0, ..., 0)` with a unimodular `U`; the first column of `U` scaled by
/// `m / g` solves the equation and the remaining columns span the kernel.
pub fn kernel_slice_basis(w: &[i64], m: i64) -> Result<Option<SliceBasis>> {
    let n = w.len();
    if n == 0 || w.iter().all(|&v| v == 0) {
        return Err(Error::InvalidInput(
            "slice direction must be nonzero".into(),
        ));
    }
    let mut row = w.to_vec();
    // columns of U
    let mut cols: Vec<IntVec> = (0..n)
        .map(|j| {
            let mut e = vec![0; n];
            e[j] = 1;
            e
        })
        .collect();
    loop {
        let nonzero: Vec<usize> = (0..n).filter(|&j| row[j] != 0).collect();
        if nonzero.len() <= 1 {
            break;
        }
        let p = *nonzero
            .iter()
            .min_by_key(|&&j| (row[j].unsigned_abs(), j))
            .unwrap();
        for &j in &nonzero {
            if j == p {
                continue;
            }
            let q = row[j] / row[p];
            if q != 0 {
                row[j] -= q * row[p];
                for r in 0..n {
                    let v = cols[p][r].checked_mul(q).ok_or_else(overflow)?;
                    cols[j][r] = cols[j][r].checked_sub(v).ok_or_else(overflow)?;
                }
            }
        }
    }
    let p = (0..n).find(|&j| row[j] != 0).unwrap();
    let mut g = row[p];
    let mut lead = cols.remove(p);
    if g < 0 {
        g = -g;
        lead.iter_mut().for_each(|v| *v = -*v);
    }
    if m % g != 0 {
        return Ok(None);
    }
    let scale = m / g;
    let mut x0: IntVec = lead
        .iter()
        .map(|v| v.checked_mul(scale).ok_or_else(overflow))
        .collect::<Result<_>>()?;
    let mut basis = cols;

    if basis.len() > 1 {
        basis = reduce_basis(&basis)?;
    }
    if !basis.is_empty() {
        x0 = reduce_offset(&x0, &basis)?;
    }
    for b in basis.iter_mut() {
        if let Some(&first) = b.iter().find(|&&v| v != 0) {
            if first < 0 {
                b.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
    debug_assert_eq!(dot(w, &x0)?, m);
    Ok(Some(SliceBasis { x0, basis }))
}

/// LLL-reduces the kernel basis for the standard inner product.
fn reduce_basis(basis: &[IntVec]) -> Result<Vec<IntVec>> {
    let n = basis[0].len();
    let k = basis.len();
    let b = DMatrix::from_fn(n, k, |r, c| basis[c][r] as f64);
    let red = lll(&(b.transpose() * &b))?;
    let mut out = vec![vec![0i64; n]; k];
    for c in 0..k {
        for r in 0..n {
            let mut acc: i64 = 0;
            for l in 0..k {
                let p = basis[l][r]
                    .checked_mul(red.u[(l, c)])
                    .ok_or_else(overflow)?;
                acc = acc.checked_add(p).ok_or_else(overflow)?;
            }
            out[c][r] = acc;
        }
    }
    Ok(out)
}

/// Shifts `x0` by a kernel vector so that it sits near the origin.
fn reduce_offset(x0: &[i64], basis: &[IntVec]) -> Result<IntVec> {
    let n = x0.len();
    let k = basis.len();
    let b = DMatrix::from_fn(n, k, |r, c| basis[c][r] as f64);
    let x = DVector::from_iterator(n, x0.iter().map(|&v| v as f64));
    let coef = (b.transpose() * &b)
        .lu()
        .solve(&(b.transpose() * x))
        .ok_or_else(|| Error::Numeric("singular kernel basis".into()))?;
    let mut out = x0.to_vec();
    for c in 0..k {
        let t = coef[c].round();
        if t.abs() > 1e15 {
            return Err(overflow());
        }
        let t = t as i64;
        for r in 0..n {
            let v = basis[c][r].checked_mul(t).ok_or_else(overflow)?;
            out[r] = out[r].checked_sub(v).ok_or_else(overflow)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = kernel_slice_basis(&[1, 0], 3).unwrap().unwrap();
        assert_eq!(s.x0, vec![3, 0]);
        assert_eq!(s.basis, vec![vec![0, 1]]);
        assert_eq!(kernel_slice_basis(&[2, 4], 3).unwrap(), None);
        let s = kernel_slice_basis(&[2, 3], 1).unwrap().unwrap();
        assert_eq!(s.x0, vec![-1, 1]);
        assert_eq!(s.basis, vec![vec![3, -2]]);
    }

    #[test]
    fn one_dimensional() {
        let s = kernel_slice_basis(&[-3], 6).unwrap().unwrap();
        assert_eq!(s.x0, vec![-2]);
        assert!(s.basis.is_empty());
        assert_eq!(kernel_slice_basis(&[3], 4).unwrap(), None);
        assert!(kernel_slice_basis(&[0, 0], 1).is_err());
    }
}
