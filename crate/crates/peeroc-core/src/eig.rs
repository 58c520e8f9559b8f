//! Eigenvalues of small dense matrices via complex Hessenberg reduction
//! followed by shifted QR iteration.
//!
//! The stability analysis needs spectra of general real and complex
//! matrices of order at most a few dozen. Everything here is
//! deterministic: identical input bits give identical output bits, which
//! the command-line layer relies on for reproducible reports.

use num_complex::Complex64;
use thiserror::Error;

use crate::mat::Mat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EigError {
    #[error("QR iteration failed to deflate within the iteration budget")]
    NoConvergence,
}

/// Eigenvalues of a real square matrix, sorted by descending modulus,
/// ties broken by ascending argument.
pub fn eigenvalues_real(a: &Mat<f64>) -> Result<Vec<Complex64>, EigError> {
    let n = a.nrows();
    let d: Vec<Complex64> = (0..n * n)
        .map(|k| Complex64::new(a[(k / n, k % n)], 0.0))
        .collect();
    eig_flat(d, n)
}

/// Eigenvalues of a complex square matrix in row-major flat storage.
pub fn eigenvalues_complex(data: Vec<Complex64>, n: usize) -> Result<Vec<Complex64>, EigError> {
    assert_eq!(data.len(), n * n, "flat storage must be n*n");
    eig_flat(data, n)
}

/// Largest eigenvalue modulus of a real matrix.
pub fn spectral_radius(a: &Mat<f64>) -> Result<f64, EigError> {
    Ok(eigenvalues_real(a)?.first().map_or(0.0, |l| l.norm()))
}

fn eig_flat(mut h: Vec<Complex64>, n: usize) -> Result<Vec<Complex64>, EigError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![h[0]]);
    }
    hessenberg(&mut h, n);
    let mut eigs = qr_eigenvalues(&mut h, n)?;
    eigs.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(a.arg().partial_cmp(&b.arg()).unwrap())
    });
    Ok(eigs)
}

#[inline]
fn at(h: &[Complex64], n: usize, i: usize, j: usize) -> Complex64 {
    h[i * n + j]
}

/// Reduce to upper Hessenberg form by complex Householder similarity.
fn hessenberg(h: &mut [Complex64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal.
        let mut xnorm2 = 0.0;
        for i in k + 1..n {
            xnorm2 += at(h, n, i, k).norm_sqr();
        }
        if xnorm2 == 0.0 {
            continue;
        }
        let x0 = at(h, n, k + 1, k);
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm2.sqrt();
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| at(h, n, i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Left: H <- (I - beta v v^H) H on rows k+1.., all columns.
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (vi, i) in (k + 1..n).enumerate() {
                s += v[vi].conj() * at(h, n, i, j);
            }
            s *= beta;
            for (vi, i) in (k + 1..n).enumerate() {
                h[i * n + j] -= v[vi] * s;
            }
        }
        // Right: H <- H (I - beta v v^H) on columns k+1.., all rows.
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (vj, j) in (k + 1..n).enumerate() {
                s += at(h, n, i, j) * v[vj];
            }
            s *= beta;
            for (vj, j) in (k + 1..n).enumerate() {
                h[i * n + j] -= s * v[vj].conj();
            }
        }
        // Exact zeros below the subdiagonal keep later deflation tests clean.
        for i in k + 2..n {
            h[i * n + k] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Complex Givens rotation G = [[c, conj(s)], [-s, c]] with real c >= 0
/// such that G [f; g] = [r; 0].
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g.norm_sqr() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if f.norm_sqr() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let rho = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / rho;
    let s = c * (g / f);
    (c, s)
}

fn qr_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>, EigError> {
    let eps = f64::EPSILON;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols [lo, hi)
    let mut stuck = 0usize;
    while hi > 0 {
        // Deflate any negligible subdiagonal entries from the bottom.
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = at(h, n, lo, lo - 1).norm();
            let scale = at(h, n, lo - 1, lo - 1).norm() + at(h, n, lo, lo).norm();
            if sub <= eps * scale.max(f64::MIN_POSITIVE) {
                h[lo * n + lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(at(h, n, hi - 1, hi - 1));
            hi -= 1;
            stuck = 0;
            continue;
        }
        if stuck > 20 * n + 100 {
            return Err(EigError::NoConvergence);
        }
        // Wilkinson shift from the trailing 2x2 of the active block, with a
        // deterministic exceptional shift when progress stalls.
        let a = at(h, n, hi - 2, hi - 2);
        let b = at(h, n, hi - 2, hi - 1);
        let c2 = at(h, n, hi - 1, hi - 2);
        let d = at(h, n, hi - 1, hi - 1);
        let mu = if stuck > 0 && stuck % 12 == 0 {
            d + Complex64::new(1.5 * c2.norm(), 0.0)
        } else {
            let tr = a + d;
            let det = a * d - b * c2;
            let disc = (tr * tr - 4.0 * det).sqrt();
            let m1 = 0.5 * (tr + disc);
            let m2 = 0.5 * (tr - disc);
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        stuck += 1;
        // Explicit shifted QR sweep on [lo, hi): H - mu I = QR, H <- RQ + mu I.
        for i in lo..hi {
            h[i * n + i] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let (c, s) = givens(at(h, n, i, i), at(h, n, i + 1, i));
            for j in i..hi {
                let x = at(h, n, i, j);
                let y = at(h, n, i + 1, j);
                h[i * n + j] = c * x + s.conj() * y;
                h[(i + 1) * n + j] = -s * x + c * y;
            }
            rots.push((c, s));
        }
        for (ri, i) in (lo..hi - 1).enumerate() {
            let (c, s) = rots[ri];
            // Right-multiply by G^H on columns i, i+1, rows lo..=i+1.
            for r in lo..(i + 2).min(hi) {
                let x = at(h, n, r, i);
                let y = at(h, n, r, i + 1);
                h[r * n + i] = c * x + s * y;
                h[r * n + i + 1] = -s.conj() * x + c * y;
            }
        }
        for i in lo..hi {
            h[i * n + i] += mu;
        }
    }
    Ok(eigs)
}
