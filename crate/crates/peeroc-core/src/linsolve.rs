//! Direct linear solvers: dense LU with partial pivoting and a block
//! tridiagonal factorization.
//!
//! The Newton step of the coupled solver produces a matrix that is block
//! tridiagonal once unknowns are grouped per time step, so a block Thomas
//! sweep with dense pivoted LU on each (modified) diagonal block is an
//! exact structured factorization, not an approximation.

use crate::mat::{LinearError, Mat};

/// LU decomposition with partial pivoting, PA = LU.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Mat<f64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Mat<f64>) -> Result<Self, LinearError> {
        if a.nrows() != a.ncols() {
            return Err(LinearError::Shape(format!("{}x{} not square", a.nrows(), a.ncols())));
        }
        let n = a.nrows();
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            if lu[(p, k)] == 0.0 {
                return Err(LinearError::Singular(k));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        Ok(Lu { lu, piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.lu.nrows();
        assert_eq!(b.len(), n, "rhs length");
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            for i in k + 1..n {
                b[i] -= self.lu[(i, k)] * b[k];
            }
        }
        for k in (0..n).rev() {
            b[k] /= self.lu[(k, k)];
            for i in 0..k {
                b[i] -= self.lu[(i, k)] * b[k];
            }
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &Mat<f64>) -> Mat<f64> {
        let n = self.lu.nrows();
        let mut out = Mat::zeros(n, b.ncols());
        let mut col = vec![0.0; n];
        for j in 0..b.ncols() {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Block tridiagonal system with uniform block size.
///
/// Row block n couples to blocks n-1 (through `sub[n]`), n (`diag[n]`),
/// and n+1 (`sup[n]`); `sub[0]` and `sup[last]` are ignored.
pub struct BlockTriDiag {
    pub bs: usize,
    pub sub: Vec<Mat<f64>>,
    pub diag: Vec<Mat<f64>>,
    pub sup: Vec<Mat<f64>>,
}

impl BlockTriDiag {
    pub fn new(nblocks: usize, bs: usize) -> Self {
        BlockTriDiag {
            bs,
            sub: vec![Mat::zeros(bs, bs); nblocks],
            diag: vec![Mat::zeros(bs, bs); nblocks],
            sup: vec![Mat::zeros(bs, bs); nblocks],
        }
    }

    pub fn nblocks(&self) -> usize {
        self.diag.len()
    }

    /// Solve in place by a block Thomas sweep (block LU without inter-block
    /// pivoting; each Schur-complement diagonal block is factored with
    /// partial pivoting).
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>, LinearError> {
        let nb = self.nblocks();
        let bs = self.bs;
        assert_eq!(rhs.len(), nb * bs, "rhs length");
        let mut x = rhs.to_vec();
        let mut factors: Vec<Lu> = Vec::with_capacity(nb);
        factors.push(Lu::factor(&self.diag[0])?);
        for n in 1..nb {
            // W = sub[n] * diag[n-1]^{-1}; then eliminate the sub block.
            let winv = factors[n - 1].solve_mat(&self.sup[n - 1]);
            let w_rhs = factors[n - 1].solve_vec(&x[(n - 1) * bs..n * bs]);
            let schur = &self.diag[n] - &(&self.sub[n] * &winv);
            let corr = self.sub[n].matvec(&w_rhs);
            for i in 0..bs {
                x[n * bs + i] -= corr[i];
            }
            self.diag[n] = schur;
            factors.push(Lu::factor(&self.diag[n])?);
        }
        // Back substitution.
        let (head, tail) = x.split_at_mut(nb * bs - bs);
        factors[nb - 1].solve_in_place(tail);
        let mut upper: Vec<f64> = tail.to_vec();
        let _ = head;
        for n in (0..nb - 1).rev() {
            let corr = self.sup[n].matvec(&upper);
            let seg = &mut x[n * bs..(n + 1) * bs];
            for i in 0..bs {
                seg[i] -= corr[i];
            }
            factors[n].solve_in_place(seg);
            upper = seg.to_vec();
        }
        Ok(x)
    }
}
