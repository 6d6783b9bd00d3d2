//! Dense real matrices of fixed small size (at most 16 in each dimension).
//!
//! Everything downstream works with 2x2 factors and their 4x4 Kronecker
//! lifts, so the algorithms here trade asymptotic speed for robustness and
//! reproducibility: scaling-and-squaring with a fixed-order rational core for
//! the exponential, an exact quadratic formula plus a shifted QR iteration
//! for eigenvalues, and one-sided Jacobi on the Gram matrix for singular
//! values. No external linear-algebra backend is involved.

mod expm;
mod spectrum;

pub use spectrum::{multiset_max_distance, Spectrum};
pub(crate) use spectrum::eigenbasis_condition;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on rows and columns.
pub const MAX_DIM: usize = 16;

/// Row-major dense matrix, 1..=16 rows and columns, finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct SmallMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Wire form: `{"rows": r, "cols": c, "data": [row-major entries]}`.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for SmallMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        SmallMatrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl From<SmallMatrix> for RawMatrix {
    fn from(m: SmallMatrix) -> Self {
        RawMatrix { rows: m.rows, cols: m.cols, data: m.data }
    }
}

impl std::fmt::Debug for SmallMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "SmallMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>22.15e}", self[(i, j)])?;
                if j + 1 < self.cols {
                    write!(f, ", ")?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl SmallMatrix {
    /// Validating constructor; `data` is row-major of length `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::Size { rows, cols, max: MAX_DIM });
        }
        if data.len() != rows * cols {
            return Err(Error::Input(format!(
                "data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SmallMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Input("ragged row lengths".into()));
        }
        SmallMatrix::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        SmallMatrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = SmallMatrix::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        Ok(m)
    }

    pub fn column_vector(entries: &[f64]) -> Result<Self> {
        SmallMatrix::new(entries.len(), 1, entries.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn require_same_shape(&self, other: &SmallMatrix) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }

    pub fn add(&self, other: &SmallMatrix) -> Result<SmallMatrix> {
        self.require_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(SmallMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &SmallMatrix) -> Result<SmallMatrix> {
        self.require_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(SmallMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: f64) -> SmallMatrix {
        let data = self.data.iter().map(|a| a * s).collect();
        SmallMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, other: &SmallMatrix) -> Result<SmallMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = SmallMatrix::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * x[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn transpose(&self) -> SmallMatrix {
        let mut out = SmallMatrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![0.0; self.data.len()],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Kronecker product in block layout: entry `(i1*r2+i2, j1*c2+j2)` equals
    /// `self[i1,j1] * other[i2,j2]`.
    pub fn kron(&self, other: &SmallMatrix) -> Result<SmallMatrix> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::Size { rows, cols, max: MAX_DIM });
        }
        let mut out = SmallMatrix::zeros(rows, cols)?;
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum; drives the exponential scaling choice.
    pub fn l1_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Euclidean operator norm, i.e. the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        // Gram route: eigenvalues of A^T A via cyclic Jacobi. The matrices
        // here are tiny and far from overflow, so squaring is harmless.
        let (small, large) = if self.rows <= self.cols {
            (self.rows, false)
        } else {
            (self.cols, true)
        };
        let mut gram = vec![vec![0.0; small]; small];
        for p in 0..small {
            for q in 0..small {
                let mut acc = 0.0;
                if large {
                    // A A^T when rows > cols would be larger; use A^T A sized cols.
                    for k in 0..self.rows {
                        acc += self[(k, p)] * self[(k, q)];
                    }
                } else {
                    for k in 0..self.cols {
                        acc += self[(p, k)] * self[(q, k)];
                    }
                }
                gram[p][q] = acc;
            }
        }
        let eigs = spectrum::jacobi_sym_eigenvalues(gram);
        eigs.into_iter().fold(0.0f64, f64::max).max(0.0).sqrt()
    }

    /// Smallest singular value; used for numeric rank decisions.
    pub fn smallest_singular_value(&self) -> f64 {
        let (small, large) = if self.rows <= self.cols {
            (self.rows, false)
        } else {
            (self.cols, true)
        };
        let mut gram = vec![vec![0.0; small]; small];
        for p in 0..small {
            for q in 0..small {
                let mut acc = 0.0;
                if large {
                    for k in 0..self.rows {
                        acc += self[(k, p)] * self[(k, q)];
                    }
                } else {
                    for k in 0..self.cols {
                        acc += self[(p, k)] * self[(q, k)];
                    }
                }
                gram[p][q] = acc;
            }
        }
        let eigs = spectrum::jacobi_sym_eigenvalues(gram);
        eigs.into_iter().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
    }

    pub fn trace(&self) -> Result<f64> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> Result<f64> {
        let n = self.require_square()?;
        let mut lu = self.clone();
        let mut sign = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(piv, k)].abs() {
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            if pivot == 0.0 {
                return Ok(0.0);
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        let mut det = sign;
        for k in 0..n {
            det *= lu[(k, k)];
        }
        Ok(det)
    }

    /// Solves `self * x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.require_square()?;
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "system is {n}x{n}, right-hand side has length {}",
                b.len()
            )));
        }
        let mut lu = self.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(piv, k)].abs() {
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                x.swap(k, piv);
            }
            let pivot = lu[(k, k)];
            if pivot.abs() < f64::MIN_POSITIVE {
                return Err(Error::Singular(pivot));
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..n {
                acc -= lu[(k, j)] * x[j];
            }
            x[k] = acc / lu[(k, k)];
        }
        Ok(x)
    }

    /// Matrix exponential; see `expm` for the algorithm contract.
    pub fn expm(&self) -> Result<SmallMatrix> {
        expm::expm(self)
    }

    /// Eigenvalues and spectral radius; see `spectrum` for the contract.
    pub fn spectrum(&self) -> Result<Spectrum> {
        spectrum::spectrum(self)
    }
}

impl std::ops::Index<(usize, usize)> for SmallMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product of two vectors: `out[i*b.len()+j] = a[i]*b[j]`.
pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        for &bj in b {
            out.push(ai * bj);
        }
    }
    out
}

/// Euclidean norm of a vector.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(SmallMatrix::new(0, 1, vec![]).is_err());
        assert!(SmallMatrix::new(17, 1, vec![0.0; 17]).is_err());
        assert!(SmallMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(SmallMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(SmallMatrix::new(16, 16, vec![0.0; 256]).is_ok());
    }

    #[test]
    fn kron_block_layout() {
        let a = SmallMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = SmallMatrix::from_rows(&[&[0.0, 5.0], &[6.0, 7.0]]).unwrap();
        let k = a.kron(&b).unwrap();
        // top-left block is 1*b, top-right block is 2*b
        assert_eq!(k[(0, 0)], 0.0);
        assert_eq!(k[(0, 1)], 5.0);
        assert_eq!(k[(0, 2)], 0.0);
        assert_eq!(k[(0, 3)], 10.0);
        assert_eq!(k[(1, 0)], 6.0);
        assert_eq!(k[(3, 3)], 4.0 * 7.0);
    }

    #[test]
    fn kron_rejects_oversized_product() {
        let a = SmallMatrix::identity(5).unwrap();
        let b = SmallMatrix::identity(4).unwrap();
        assert!(a.kron(&b).is_err());
    }

    #[test]
    fn kron_with_identity_keeps_norm() {
        let a = SmallMatrix::from_rows(&[&[1.0, -2.0], &[0.5, 3.0]]).unwrap();
        let i = SmallMatrix::identity(2).unwrap();
        let k = a.kron(&i).unwrap();
        assert!((k.operator_norm() - a.operator_norm()).abs() < 1e-12);
    }

    #[test]
    fn matvec_and_matmul_agree() {
        let a = SmallMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let x = vec![5.0, -1.0];
        let xs = SmallMatrix::column_vector(&x).unwrap();
        let via_mat = a.matmul(&xs).unwrap();
        let via_vec = a.matvec(&x).unwrap();
        assert_eq!(via_mat.data(), via_vec.as_slice());
    }

    #[test]
    fn det_and_solve_roundtrip() {
        let a = SmallMatrix::from_rows(&[&[4.0, 1.0, 0.0], &[2.0, -3.0, 1.0], &[0.0, 5.0, 2.0]])
            .unwrap();
        // cofactor expansion by hand: 4*(-6-5) - 1*(4-0) + 0 = -48
        assert!((a.det().unwrap() + 48.0).abs() < 1e-12);
        let b = vec![1.0, 2.0, 3.0];
        let x = a.solve(&b).unwrap();
        let back = a.matvec(&x).unwrap();
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_norm_matches_known_values() {
        let i4 = SmallMatrix::identity(4).unwrap();
        assert!((i4.operator_norm() - 1.0).abs() < 1e-14);
        let d = SmallMatrix::from_rows(&[&[3.0, 0.0], &[0.0, -5.0]]).unwrap();
        assert!((d.operator_norm() - 5.0).abs() < 1e-13);
        // rank-one column vector: norm is the Euclidean norm
        let v = SmallMatrix::column_vector(&[3.0, 4.0]).unwrap();
        assert!((v.operator_norm() - 5.0).abs() < 1e-13);
    }

    #[test]
    fn serde_roundtrip_and_validation() {
        let a = SmallMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"rows\":2"));
        let back: SmallMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);

        let bad: std::result::Result<SmallMatrix, _> =
            serde_json::from_str("{\"rows\":2,\"cols\":2,\"data\":[1.0,2.0,3.0]}");
        assert!(bad.is_err());
        let bad: std::result::Result<SmallMatrix, _> =
            serde_json::from_str("{\"rows\":17,\"cols\":17,\"data\":[]}");
        assert!(bad.is_err());
    }

    #[test]
    fn kron_vec_layout() {
        let y = kron_vec(&[2.0, 3.0], &[5.0, 7.0]);
        assert_eq!(y, vec![10.0, 14.0, 15.0, 21.0]);
    }
}
