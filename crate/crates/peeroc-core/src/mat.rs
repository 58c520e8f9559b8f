//! Small dense matrices over exact or floating-point scalars.
//!
//! Coefficient derivations run over `BigRational` so that rationally
//! constructed method families stay exact end to end; the numerical
//! solvers instantiate the same code over `f64`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Signed;
use thiserror::Error;

/// Scalar requirements shared by the exact and floating-point paths.
/// `Signed` supplies `abs`, which drives pivot selection.
pub trait Scalar: Clone + fmt::Debug + Signed + PartialOrd {}
impl<T> Scalar for T where T: Clone + fmt::Debug + Signed + PartialOrd {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearError {
    #[error("matrix is singular (rank deficiency at column {0})")]
    Singular(usize),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn column(v: &[T]) -> Self {
        Mat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|x| x.clone() * k.clone())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Mat::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)].clone()
                * other[(i % other.rows, j % other.cols)].clone()
        })
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.rows {
            let s = self.row(i).iter().fold(T::zero(), |acc, x| acc + x.abs());
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| {
            let a = x.abs();
            if a > acc {
                a
            } else {
                acc
            }
        })
    }

    /// Solve `self * X = rhs` by Gauss-Jordan elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self, LinearError> {
        if self.rows != self.cols {
            return Err(LinearError::Shape(format!("{}x{} not square", self.rows, self.cols)));
        }
        if rhs.rows != self.rows {
            return Err(LinearError::Shape(format!(
                "rhs has {} rows, expected {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut x = rhs.clone();
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[(i, k)].abs() > a[(piv, k)].abs() {
                    piv = i;
                }
            }
            if a[(piv, k)].is_zero() {
                return Err(LinearError::Singular(k));
            }
            if piv != k {
                a.swap_rows(piv, k);
                x.swap_rows(piv, k);
            }
            let d = a[(k, k)].clone();
            for j in k..n {
                a[(k, j)] = a[(k, j)].clone() / d.clone();
            }
            for j in 0..x.cols {
                x[(k, j)] = x[(k, j)].clone() / d.clone();
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in k..n {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                }
                for j in 0..x.cols {
                    x[(i, j)] = x[(i, j)].clone() - f.clone() * x[(k, j)].clone();
                }
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self, LinearError> {
        self.solve(&Self::identity(self.rows))
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "det of non-square");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[(i, k)].abs() > a[(piv, k)].abs() {
                    piv = i;
                }
            }
            if a[(piv, k)].is_zero() {
                return T::zero();
            }
            if piv != k {
                a.swap_rows(piv, k);
                det = -det;
            }
            det = det * a[(k, k)].clone();
            for i in k + 1..n {
                let f = a[(i, k)].clone() / a[(k, k)].clone();
                for j in k..n {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(i * self.cols + k, j * self.cols + k);
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape");
        let mut out: Mat<T> = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + rhs[(i, j)].clone())
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - rhs[(i, j)].clone())
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|x| -x.clone())
    }
}

/// Dot product.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Infinity norm of a vector.
pub fn vec_inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| {
        let a = x.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn solve_exact_rational_system() {
        // Hilbert-like system solved exactly, then verified by residual.
        let a = Mat::from_fn(4, 4, |i, j| rat(1, (i + j + 1) as i64));
        let b = Mat::from_fn(4, 1, |i, _| rat(1, (i + 1) as i64));
        let x = a.solve(&b).unwrap();
        let r = &(&a * &x) - &b;
        assert!(r.max_abs().is_zero());
    }

    #[test]
    fn inverse_roundtrip_f64() {
        let a = Mat::from_rows(vec![
            vec![4.0, -2.0, 1.0],
            vec![0.5, 3.0, -1.0],
            vec![2.0, 0.0, 5.0],
        ]);
        let inv = a.inverse().unwrap();
        let id = &a * &inv;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![7.0, 4.0]]);
        assert!((a.det() - 1.0).abs() < 1e-15);
        let singular = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(singular.det(), 0.0);
        assert!(singular.solve(&Mat::identity(2)).is_err());
    }

    #[test]
    fn kron_block_structure() {
        let a = Mat::from_rows(vec![vec![rat(1, 1), rat(2, 1)], vec![rat(0, 1), rat(3, 1)]]);
        let id = Mat::identity(2);
        let k = a.kron(&id);
        assert_eq!(k.nrows(), 4);
        assert_eq!(k[(0, 0)], rat(1, 1));
        assert_eq!(k[(0, 2)], rat(2, 1));
        assert_eq!(k[(1, 3)], rat(2, 1));
        assert_eq!(k[(2, 0)], rat(0, 1));
        assert_eq!(k[(3, 3)], rat(3, 1));
    }

    #[test]
    fn inf_norm_is_max_row_sum() {
        let a = Mat::from_rows(vec![vec![1.0, -2.0], vec![-3.0, 0.5]]);
        assert_eq!(a.inf_norm(), 3.5);
    }
}
