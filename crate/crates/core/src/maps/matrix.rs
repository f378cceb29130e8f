use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A square integer matrix of determinant exactly `+1`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct UnimodularMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl UnimodularMatrix {
    /// Builds a matrix from rows, verifying squareness and `det = 1` exactly.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::usage("matrix must be square and non-empty"));
        }
        let m = UnimodularMatrix { dim, entries: rows.into_iter().flatten().collect() };
        let det = m.determinant()?;
        if det != 1 {
            return Err(Error::usage(format!("determinant is {det}, not 1")));
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        UnimodularMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn trace(&self) -> i64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j);
            }
        }
        UnimodularMatrix { dim: d, entries }
    }

    /// Product `self * other` with overflow checks.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i64 = 0;
                for k in 0..d {
                    acc = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .and_then(|p| acc.checked_add(p))
                        .ok_or_else(|| Error::Overflow("matrix product".into()))?;
                }
                entries[i * d + j] = acc;
            }
        }
        Ok(UnimodularMatrix { dim: d, entries })
    }

    /// Integer inverse (the adjugate, since `det = 1`).
    pub fn inverse(&self) -> Self {
        let d = self.dim;
        if d == 1 {
            return self.clone();
        }
        if d == 2 {
            let (a, b, c, e) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
            return UnimodularMatrix { dim: 2, entries: vec![e, -b, -c, a] };
        }
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let minor = self.minor(j, i);
                let cof = bareiss_det(&minor, d - 1).expect("cofactor of a unimodular matrix fits in i64");
                entries[i * d + j] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        UnimodularMatrix { dim: d, entries }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Vec<i128> {
        let mut out = Vec::with_capacity((self.dim - 1).pow(2));
        for i in (0..self.dim).filter(|&i| i != skip_row) {
            for j in (0..self.dim).filter(|&j| j != skip_col) {
                out.push(self.get(i, j) as i128);
            }
        }
        out
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> Result<i64> {
        let m: Vec<i128> = self.entries.iter().map(|&x| x as i128).collect();
        bareiss_det(&m, self.dim)
    }

    /// Largest singular value. Closed form for `2 x 2`, SVD otherwise.
    pub fn op_norm(&self) -> f64 {
        if self.dim == 1 {
            return self.get(0, 0).abs() as f64;
        }
        if self.dim == 2 {
            return op_norm_2x2(self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
        }
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j) as f64);
        m.singular_values().max()
    }

    /// Places a `2 x 2` matrix on coordinates `(p, q)` (0-based, `p < q`) of `d`
    /// dimensions, identity elsewhere.
    pub fn embed_in_plane(s: &UnimodularMatrix, p: usize, q: usize, d: usize) -> Result<Self> {
        if s.dim != 2 {
            return Err(Error::usage("only 2 x 2 blocks can be embedded in a plane"));
        }
        if !(p < q && q < d) {
            return Err(Error::usage(format!("invalid plane ({p}, {q}) in dimension {d}")));
        }
        let mut m = Self::identity(d);
        let idx = [p, q];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.entries[i * d + j] = s.get(a, b);
            }
        }
        Ok(m)
    }
}

/// Largest singular value of `[[a, b], [c, d]]`.
pub fn op_norm_2x2(a: i64, b: i64, c: i64, d: i64) -> f64 {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let frob = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((frob + (frob * frob - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

fn bareiss_det(m: &[i128], n: usize) -> Result<i64> {
    if n == 0 {
        return Ok(1);
    }
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                Some(r) => {
                    for j in 0..n {
                        a.swap(k * n + j, r * n + j);
                    }
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i * n + j]
                    .checked_mul(a[k * n + k])
                    .zip(a[i * n + k].checked_mul(a[k * n + j]))
                    .and_then(|(x, y)| x.checked_sub(y))
                    .ok_or_else(|| Error::Overflow("determinant".into()))?;
                a[i * n + j] = num / prev;
            }
        }
        prev = a[k * n + k];
    }
    i64::try_from(sign * a[n * n - 1]).map_err(|_| Error::Overflow("determinant".into()))
}

impl fmt::Debug for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl TryFrom<Vec<Vec<i64>>> for UnimodularMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<UnimodularMatrix> for Vec<Vec<i64>> {
    fn from(m: UnimodularMatrix) -> Self {
        m.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> UnimodularMatrix {
        UnimodularMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(UnimodularMatrix::new(vec![vec![2, 0], vec![0, 1]]).is_err());
        assert!(UnimodularMatrix::new(vec![vec![1, 0, 0], vec![0, 1]]).is_err());
        assert!(UnimodularMatrix::new(vec![vec![0, 1], vec![-1, 0]]).is_ok());
    }

    #[test]
    fn inverse_is_integral() {
        let a = m(&[&[2, 1, 0], &[1, 1, 0], &[3, 5, 1]]);
        assert!(a.checked_mul(&a.inverse()).unwrap().is_identity());
        let b = m(&[&[2, 1], &[1, 1]]);
        assert!(b.inverse().checked_mul(&b).unwrap().is_identity());
    }

    /// Power iteration on `A^T A` as an independent check of the closed form.
    fn power_norm(a: &UnimodularMatrix) -> f64 {
        let d = a.dim();
        let mut x = vec![1.0; d];
        let mut lambda = 0.0;
        for _ in 0..500 {
            let ax: Vec<f64> = (0..d).map(|i| (0..d).map(|j| a.get(i, j) as f64 * x[j]).sum()).collect();
            let atax: Vec<f64> = (0..d).map(|j| (0..d).map(|i| a.get(i, j) as f64 * ax[i]).sum()).collect();
            let norm = atax.iter().map(|v| v * v).sum::<f64>().sqrt();
            lambda = norm;
            x = atax.iter().map(|v| v / norm).collect();
        }
        lambda.sqrt()
    }

    #[test]
    fn op_norm_of_cat_map() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((a.op_norm() - golden_sq).abs() < 1e-12);
        assert!((power_norm(&a) - golden_sq).abs() < 1e-9);
        assert!((a.op_norm() - 2.6180).abs() < 1e-4);
        let e = UnimodularMatrix::embed_in_plane(&a, 0, 2, 4).unwrap();
        assert!((e.op_norm() - golden_sq).abs() < 1e-9);
    }

    #[test]
    fn plane_embedding() {
        let s = m(&[&[3, 2], &[1, 1]]);
        assert_eq!(UnimodularMatrix::embed_in_plane(&s, 0, 1, 2).unwrap(), s);
        let e = UnimodularMatrix::embed_in_plane(&s, 0, 2, 3).unwrap();
        assert_eq!(e.rows(), vec![vec![3, 0, 2], vec![0, 1, 0], vec![1, 0, 1]]);
        let einv = UnimodularMatrix::embed_in_plane(&s.inverse(), 0, 2, 3).unwrap();
        assert_eq!(einv, e.inverse());
        assert!(UnimodularMatrix::embed_in_plane(&s, 2, 1, 3).is_err());
        assert!(UnimodularMatrix::embed_in_plane(&s, 1, 3, 3).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = m(&[&[1, i64::MAX / 2], &[0, 1]]);
        assert!(big.checked_mul(&big).is_ok());
        let sq = big.checked_mul(&big).unwrap();
        assert!(matches!(sq.checked_mul(&big), Err(Error::Overflow(_))));
    }
}
