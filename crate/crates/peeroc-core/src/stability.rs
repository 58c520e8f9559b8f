//! Zero stability, boundary locus, stability angle, and boundary-method
//! indicators of a peer triplet.

use num_complex::Complex64;

use crate::eig::{eigenvalues_complex, eigenvalues_real, spectral_radius};
use crate::mat::{LinearError, Mat};
use crate::triplets::PeerTriplet;
use crate::CoreError;

/// One sweep point of the boundary locus: the s complex roots z at which the
/// stability matrix has an eigenvalue on the unit circle at angle theta.
#[derive(Debug, Clone)]
pub struct LocusSample {
    pub theta: f64,
    pub z: Vec<Complex64>,
}

/// Stability indicators of a triplet; one row of the summary tables.
///
/// The leading eigenvalue of the stability matrix is 1 for preconsistent
/// methods; `alpha_deg` lies in [0, 90] and equals 90 exactly when the
/// numerical A-stability evidence holds.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Eigenvalues of the zero-stability matrix, descending modulus.
    pub spectrum: Vec<Complex64>,
    /// Damping factor: modulus of the second-largest eigenvalue.
    pub lambda2: f64,
    /// Row-sum norm of the zero-stability matrix.
    pub inf_norm: f64,
    /// Largest sector half-angle (degrees) free of locus points.
    pub alpha_deg: f64,
    /// Numerical evidence only: locus sweep plus spot checks along rays.
    pub a_stable: bool,
    /// Smallest real part over the starting method's implicit spectrum.
    pub mu0: f64,
    /// Smallest real part over the end method's implicit spectrum.
    pub mu_end: f64,
    /// Spectral radius of the end method's own propagation matrix.
    pub rho_end: f64,
    /// Spectral radius of the standard-to-starting handover matrix.
    pub rho_start: f64,
    /// Spectral radius of the end-to-standard handover matrix.
    pub rho_mixed: f64,
}

/// Relative half-width of the strip around the imaginary axis whose locus
/// points are not counted as left-half-plane: the consistency root at the
/// origin must not destroy the angle.
pub const AXIS_MARGIN: f64 = 1e-9;

/// Eigenvalues of the zero-stability matrix, sorted by descending modulus.
pub fn zero_stability(a: &Mat<f64>, b: &Mat<f64>) -> Result<Vec<Complex64>, CoreError> {
    let ab = a.solve(b)?;
    Ok(eigenvalues_real(&ab)?)
}

/// Sweeps the unit circle with `samples` equispaced angles and collects, per
/// angle, all s generalized roots z of the pencil.
pub fn boundary_locus(
    a: &Mat<f64>,
    b: &Mat<f64>,
    k: &Mat<f64>,
    samples: usize,
) -> Result<Vec<LocusSample>, CoreError> {
    assert!(samples >= 8, "locus sweep needs at least 8 samples");
    let s = a.nrows();
    let kia = k.solve(a)?;
    let kib = k.solve(b)?;
    let mut out = Vec::with_capacity(samples);
    for idx in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * idx as f64 / samples as f64;
        let lam_inv = Complex64::from_polar(1.0, -theta);
        let mut data = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                data.push(Complex64::new(kia[(i, j)], 0.0) - lam_inv * kib[(i, j)]);
            }
        }
        let z = eigenvalues_complex(data, s)?;
        out.push(LocusSample { theta, z });
    }
    Ok(out)
}

fn complex_gauss_solve(
    mut a: Vec<Complex64>,
    mut b: Vec<Complex64>,
    n: usize,
    m: usize,
) -> Result<Vec<Complex64>, CoreError> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| a[r1 * n + col].norm().total_cmp(&a[r2 * n + col].norm()))
            .expect("non-empty pivot range");
        if a[piv * n + col].norm() == 0.0 {
            return Err(LinearError::Singular(col).into());
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            for j in 0..m {
                b.swap(col * m + j, piv * m + j);
            }
        }
        let d = a[col * n + col];
        for r in 0..n {
            if r == col || a[r * n + col].norm() == 0.0 {
                continue;
            }
            let f = a[r * n + col] / d;
            for j in col..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
            for j in 0..m {
                let v = b[col * m + j];
                b[r * m + j] -= f * v;
            }
        }
    }
    for i in 0..n {
        let d = a[i * n + i];
        for j in 0..m {
            b[i * m + j] /= d;
        }
    }
    Ok(b)
}

/// Spectral radius of the stability matrix at a complex step-scaled argument.
pub fn stability_matrix_radius(
    a: &Mat<f64>,
    b: &Mat<f64>,
    k: &Mat<f64>,
    z: Complex64,
) -> Result<f64, CoreError> {
    let s = a.nrows();
    let mut lhs = Vec::with_capacity(s * s);
    let mut rhs = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            lhs.push(Complex64::new(a[(i, j)], 0.0) - z * k[(i, j)]);
            rhs.push(Complex64::new(b[(i, j)], 0.0));
        }
    }
    let m = complex_gauss_solve(lhs, rhs, s, s)?;
    let ev = eigenvalues_complex(m, s)?;
    Ok(ev.first().map(|e| e.norm()).unwrap_or(0.0))
}

/// Spot-samples the stability-matrix radius along three rays into the left
/// half-plane; all radii must stay within 1e-8 of one for the A-stability
/// evidence to hold.
fn rays_contractive(a: &Mat<f64>, b: &Mat<f64>, k: &Mat<f64>) -> Result<bool, CoreError> {
    for arg_deg in [0.0_f64, 45.0, 89.0] {
        let phi = arg_deg.to_radians();
        for i in 0..40 {
            let r = 10f64.powf(-3.0 + 9.0 * i as f64 / 39.0);
            let z = -Complex64::from_polar(r, phi);
            if stability_matrix_radius(a, b, k, z)? > 1.0 + 1e-8 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest sector half-angle (degrees) around the negative real axis that is
/// free of locus points, plus the numerical A-stability flag. Locus points
/// within the relative axis margin count as imaginary-axis points.
pub fn stability_angle(
    a: &Mat<f64>,
    b: &Mat<f64>,
    k: &Mat<f64>,
    samples: usize,
    margin: f64,
) -> Result<(f64, bool), CoreError> {
    let locus = boundary_locus(a, b, k, samples)?;
    let mut alpha = 90.0_f64;
    let mut left_points = false;
    for sample in &locus {
        for z in &sample.z {
            if z.re < -margin * (1.0 + z.norm()) {
                left_points = true;
                let ang = (-z).arg().abs().to_degrees();
                if ang < alpha {
                    alpha = ang;
                }
            }
        }
    }
    let a_stable = !left_points && rays_contractive(a, b, k)?;
    Ok((alpha, a_stable))
}

/// Boundary-method indicators: the two implicit-spectrum margins and the
/// three handover spectral radii.
pub fn boundary_method_indicators(
    t: &PeerTriplet,
) -> Result<(f64, f64, f64, f64, f64), CoreError> {
    let co = &t.coeffs;
    let min_re = |num: &Mat<f64>, den: &Mat<f64>| -> Result<f64, CoreError> {
        let m = den.solve(num)?;
        let ev = eigenvalues_real(&m)?;
        Ok(ev.iter().map(|e| e.re).fold(f64::INFINITY, f64::min))
    };
    let mu0 = min_re(&co.start.a0, &co.start.k0)?;
    let mu_end = min_re(&co.end.a, &co.end.k)?;
    let rho_end = spectral_radius(&co.end.a.solve(&co.end.b)?)?;
    let rho_start = spectral_radius(
        &co.start
            .a0
            .transpose()
            .solve(&co.standard.b.transpose())?
            .transpose(),
    )?;
    let rho_mixed = spectral_radius(
        &co.standard
            .a
            .transpose()
            .solve(&co.end.b.transpose())?
            .transpose(),
    )?;
    Ok((mu0, mu_end, rho_end, rho_start, rho_mixed))
}

/// Assembles the full indicator row for one triplet at the given locus
/// resolution.
pub fn stability_report(t: &PeerTriplet, samples: usize) -> Result<StabilityReport, CoreError> {
    let co = &t.coeffs;
    let spectrum = zero_stability(&co.standard.a, &co.standard.b)?;
    let lambda2 = spectrum.get(1).map(|e| e.norm()).unwrap_or(0.0);
    let inf_norm = co.standard.a.solve(&co.standard.b)?.inf_norm();
    let (alpha_deg, a_stable) = stability_angle(
        &co.standard.a,
        &co.standard.b,
        &co.standard.k,
        samples,
        AXIS_MARGIN,
    )?;
    let (mu0, mu_end, rho_end, rho_start, rho_mixed) = boundary_method_indicators(t)?;
    Ok(StabilityReport {
        spectrum,
        lambda2,
        inf_norm,
        alpha_deg,
        a_stable,
        mu0,
        mu_end,
        rho_end,
        rho_start,
        rho_mixed,
    })
}
