//! Benchmark boundary value problems, reference oracles, and cost evaluation.
//!
//! Each problem is the first-order optimality system of an optimal control
//! problem after the control has been eliminated: state dynamics
//! `y' = g(y, p)` with `y(t0) = y0`, adjoint dynamics `p' = phi(y, p)` with
//! the terminal condition `p(T) = r(y(T))`.  All three built-in problems
//! have two state and two adjoint components.

use crate::mat::Mat;
use std::f64::consts::PI;

/// Errors raised by the reference oracles and the cost evaluator.
#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("shooting did not converge (residual {residual:.3e} with {segments} segments)")]
    ShootingFailed { residual: f64, segments: usize },
    #[error("cannot slice {want} intervals out of a {have}-interval trajectory")]
    GridMismatch { have: usize, want: usize },
    #[error("quadrature needs at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("quadrature grid is not uniform")]
    NonUniformGrid,
}

#[derive(Clone, Debug)]
enum Kind {
    Rayleigh,
    Motion { nu: f64, alpha: f64, y_f: [f64; 2] },
    Wave { omega: f64 },
}

/// Two-point boundary value problem `y' = g(y,p)`, `p' = phi(y,p)`,
/// `y(t0) = y0`, `p(T) = r(y(T))`, together with the cost functional it
/// came from.
#[derive(Clone, Debug)]
pub struct BvpProblem {
    pub name: &'static str,
    /// Number of state components m; the adjoint has the same dimension.
    pub dim: usize,
    pub t0: f64,
    pub t_end: f64,
    pub y0: Vec<f64>,
    kind: Kind,
}

/// Tunnel-diode oscillator steering problem: minimize the integral of
/// `u^2 + y1^2` over [0, 2.5] subject to a Rayleigh-type oscillator driven
/// through `4u`.  Stationarity of the Hamiltonian gives `u = -2 p2`.
pub fn rayleigh() -> BvpProblem {
    BvpProblem {
        name: "rayleigh",
        dim: 2,
        t0: 0.0,
        t_end: 2.5,
        y0: vec![-5.0, -5.0],
        kind: Kind::Rayleigh,
    }
}

/// Damped oscillator steered through a double-well potential toward the
/// target position `y_f`: minimize `alpha/2 ||y(6) - y_f||^2 + 1/2 int u^2`
/// with the control acting on the velocity, `u = -p2`.
pub fn controlled_motion(nu: f64, alpha: f64, y_f: [f64; 2]) -> BvpProblem {
    BvpProblem {
        name: "motion",
        dim: 2,
        t0: 0.0,
        t_end: 6.0,
        y0: vec![-1.0, 0.0],
        kind: Kind::Motion { nu, alpha, y_f },
    }
}

/// Harmonic oscillator with frequency `2 pi kappa` and a known closed-form
/// optimal trajectory; minimizes `1/2 int u^2` with `u = -p2`.  The large
/// imaginary eigenvalues make it a stiffness stress test.
pub fn wave(kappa: f64) -> BvpProblem {
    BvpProblem {
        name: "wave",
        dim: 2,
        t0: 0.0,
        t_end: 1.0,
        y0: vec![0.0, 0.0],
        kind: Kind::Wave { omega: 2.0 * PI * kappa },
    }
}

/// Looks up a built-in problem by name with its default parameters.
pub fn problem_by_name(name: &str) -> Option<BvpProblem> {
    match name {
        "rayleigh" => Some(rayleigh()),
        "motion" => Some(controlled_motion(1.0, 10.0, [1.0, 0.0])),
        "wave" => Some(wave(16.0)),
        _ => None,
    }
}

impl BvpProblem {
    /// State dynamics g(y, p).
    pub fn g(&self, y: &[f64], p: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Rayleigh => vec![
                y[1],
                -y[0] + y[1] * (1.4 - 0.14 * y[1] * y[1]) - 8.0 * p[1],
            ],
            Kind::Motion { nu, .. } => {
                vec![y[1], y[0] - y[0] * y[0] * y[0] - nu * y[1] - p[1]]
            }
            Kind::Wave { omega } => vec![y[1], -omega * omega * y[0] - p[1]],
        }
    }

    /// Adjoint dynamics phi(y, p); affine in p for every built-in problem.
    pub fn phi(&self, y: &[f64], p: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Rayleigh => vec![
                p[1] - 2.0 * y[0],
                -p[0] - (1.4 - 0.42 * y[1] * y[1]) * p[1],
            ],
            Kind::Motion { nu, .. } => {
                vec![(3.0 * y[0] * y[0] - 1.0) * p[1], -p[0] + nu * p[1]]
            }
            Kind::Wave { omega } => vec![omega * omega * p[1], -p[0]],
        }
    }

    /// Terminal adjoint map: the boundary condition is p(T) = r(y(T)).
    pub fn r(&self, y_end: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Rayleigh => vec![0.0, 0.0],
            Kind::Motion { alpha, y_f, .. } => {
                vec![alpha * (y_end[0] - y_f[0]), alpha * (y_end[1] - y_f[1])]
            }
            Kind::Wave { .. } => vec![1.0, 0.0],
        }
    }

    pub fn g_y(&self, y: &[f64], _p: &[f64]) -> Mat<f64> {
        match &self.kind {
            Kind::Rayleigh => Mat::from_rows(vec![
                vec![0.0, 1.0],
                vec![-1.0, 1.4 - 0.42 * y[1] * y[1]],
            ]),
            Kind::Motion { nu, .. } => Mat::from_rows(vec![
                vec![0.0, 1.0],
                vec![1.0 - 3.0 * y[0] * y[0], -nu],
            ]),
            Kind::Wave { omega } => {
                Mat::from_rows(vec![vec![0.0, 1.0], vec![-omega * omega, 0.0]])
            }
        }
    }

    pub fn g_p(&self, _y: &[f64], _p: &[f64]) -> Mat<f64> {
        let fill = match &self.kind {
            Kind::Rayleigh => -8.0,
            Kind::Motion { .. } | Kind::Wave { .. } => -1.0,
        };
        Mat::from_rows(vec![vec![0.0, 0.0], vec![0.0, fill]])
    }

    pub fn phi_y(&self, y: &[f64], p: &[f64]) -> Mat<f64> {
        match &self.kind {
            Kind::Rayleigh => Mat::from_rows(vec![
                vec![-2.0, 0.0],
                vec![0.0, 0.84 * y[1] * p[1]],
            ]),
            Kind::Motion { .. } => Mat::from_rows(vec![
                vec![6.0 * y[0] * p[1], 0.0],
                vec![0.0, 0.0],
            ]),
            Kind::Wave { .. } => Mat::zeros(2, 2),
        }
    }

    pub fn phi_p(&self, y: &[f64], _p: &[f64]) -> Mat<f64> {
        match &self.kind {
            Kind::Rayleigh => Mat::from_rows(vec![
                vec![0.0, 1.0],
                vec![-1.0, -(1.4 - 0.42 * y[1] * y[1])],
            ]),
            Kind::Motion { nu, .. } => Mat::from_rows(vec![
                vec![0.0, 3.0 * y[0] * y[0] - 1.0],
                vec![-1.0, *nu],
            ]),
            Kind::Wave { omega } => {
                Mat::from_rows(vec![vec![0.0, omega * omega], vec![-1.0, 0.0]])
            }
        }
    }

    pub fn r_y(&self, _y_end: &[f64]) -> Mat<f64> {
        match &self.kind {
            Kind::Motion { alpha, .. } => Mat::identity(2).scale(alpha),
            Kind::Rayleigh | Kind::Wave { .. } => Mat::zeros(2, 2),
        }
    }

    /// Running-cost integrand in eliminated variables, including any
    /// one-half factors, so that the total cost is
    /// `terminal_cost(y(T)) + int integrand dt`.
    pub fn running_cost(&self, y: &[f64], p: &[f64]) -> f64 {
        match &self.kind {
            // u = -2 p2 recovers the control from 2u + 4 p2 = 0.
            Kind::Rayleigh => y[0] * y[0] + 4.0 * p[1] * p[1],
            // u = -p2; the objective carries a 1/2 on the integral.
            Kind::Motion { .. } | Kind::Wave { .. } => 0.5 * p[1] * p[1],
        }
    }

    pub fn terminal_cost(&self, y_end: &[f64]) -> f64 {
        match &self.kind {
            Kind::Motion { alpha, y_f, .. } => {
                let d0 = y_end[0] - y_f[0];
                let d1 = y_end[1] - y_f[1];
                0.5 * alpha * (d0 * d0 + d1 * d1)
            }
            Kind::Rayleigh | Kind::Wave { .. } => 0.0,
        }
    }

    /// Closed-form solution (y, p) at time t, if the problem has one.
    pub fn exact(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            Kind::Wave { omega } => {
                let w = *omega;
                let s = (w * t).sin();
                let c = (w * t).cos();
                let y = vec![
                    s / (2.0 * w * w * w) - t * c / (2.0 * w * w),
                    t * s / (2.0 * w),
                ];
                let p = vec![c, -s / w];
                Some((y, p))
            }
            _ => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        matches!(self.kind, Kind::Wave { .. })
    }

    /// Terminal state target for problems that steer toward a fixed point;
    /// used to seed solvers with a straight-line transfer guess.
    pub fn transfer_target(&self) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Motion { y_f, .. } => Some(y_f.to_vec()),
            _ => None,
        }
    }

    /// Stacked right-hand side (g, phi) of the coupled 2m-dimensional system.
    pub fn coupled_rhs(&self, z: &[f64]) -> Vec<f64> {
        let (y, p) = z.split_at(self.dim);
        let mut out = self.g(y, p);
        out.extend(self.phi(y, p));
        out
    }
}

// ---------------------------------------------------------------- references

/// How a reference trajectory was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    Exact,
    ShootingRk4,
}

/// Dense (y, p) samples on a uniform time grid covering [t0, T].
#[derive(Clone, Debug)]
pub struct ReferenceTrajectory {
    pub times: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl ReferenceTrajectory {
    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    /// Coarsens to `n_grid` intervals by slicing; `n_grid` must divide the
    /// stored interval count so grid points match exactly.
    pub fn subsample(&self, n_grid: usize) -> Result<ReferenceTrajectory, ProblemError> {
        let have = self.intervals();
        if n_grid == 0 || have % n_grid != 0 {
            return Err(ProblemError::GridMismatch { have, want: n_grid });
        }
        let k = have / n_grid;
        let take = |v: &[Vec<f64>]| v.iter().step_by(k).cloned().collect::<Vec<_>>();
        Ok(ReferenceTrajectory {
            times: self.times.iter().copied().step_by(k).collect(),
            y: take(&self.y),
            p: take(&self.p),
            provenance: self.provenance,
        })
    }

    /// Reference states y(t_{n+1}) for n = 0..N on an (N+1)-interval grid.
    pub fn state_targets(&self) -> &[Vec<f64>] {
        &self.y[1..]
    }

    /// Reference adjoints p(t_n) for n = 0..N.
    pub fn adjoint_targets(&self) -> &[Vec<f64>] {
        &self.p[..self.p.len() - 1]
    }
}

/// Samples the closed-form solution on an `n_grid`-interval uniform grid.
pub fn exact_reference(prob: &BvpProblem, n_grid: usize) -> Option<ReferenceTrajectory> {
    if !prob.has_exact() {
        return None;
    }
    let times = uniform_grid(prob.t0, prob.t_end, n_grid);
    let (y, p) = times
        .iter()
        .map(|&t| prob.exact(t).expect("closed form available"))
        .unzip();
    Some(ReferenceTrajectory {
        times,
        y,
        p,
        provenance: Provenance::Exact,
    })
}

/// Reference oracle: single shooting on the unknown initial adjoint with
/// classical RK4 transcription, escalating to multiple shooting (4 to 64
/// segments) when the initial value problem is too unstable for a single
/// sweep.  Output is dense on the `n_steps`-interval uniform grid.
pub fn shooting_reference(
    prob: &BvpProblem,
    n_steps: usize,
) -> Result<ReferenceTrajectory, ProblemError> {
    assert!(n_steps >= 64, "oracle needs at least 64 integration steps");
    if let Some(xi) = single_shooting(prob, n_steps) {
        let mut z0 = prob.y0.clone();
        z0.extend_from_slice(&xi);
        let path = rk4_path(prob, &z0, n_steps, None);
        return Ok(trajectory_from_path(prob, &path));
    }
    let mut n_seg = 4;
    loop {
        match multiple_shooting(prob, n_steps, n_seg) {
            Ok(unknowns) => {
                return Ok(stitched_trajectory(prob, &unknowns, n_seg, n_steps))
            }
            Err(residual) => {
                if n_seg >= 64 {
                    return Err(ProblemError::ShootingFailed {
                        residual,
                        segments: n_seg,
                    });
                }
                n_seg *= 2;
            }
        }
    }
}

/// Total cost `terminal_cost(y(T)) + int running_cost dt` by composite
/// Simpson quadrature on the trajectory's uniform grid.
pub fn evaluate_cost(
    prob: &BvpProblem,
    traj: &ReferenceTrajectory,
) -> Result<f64, ProblemError> {
    cost_from_samples(prob, &traj.times, &traj.y, &traj.p)
}

/// Cost quadrature over arbitrary uniform (y, p) samples, e.g. the stage
/// union of a discrete solve.  Odd interval counts get a 3/8 head so no
/// refinement of the input is needed.
pub fn cost_from_samples(
    prob: &BvpProblem,
    times: &[f64],
    y: &[Vec<f64>],
    p: &[Vec<f64>],
) -> Result<f64, ProblemError> {
    let n = times.len().saturating_sub(1);
    if n < 2 {
        return Err(ProblemError::InsufficientSamples {
            need: 3,
            got: times.len(),
        });
    }
    let h = (times[n] - times[0]) / n as f64;
    let span = (times[n] - times[0]).abs();
    for (i, pair) in times.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - h).abs() > 1e-9 * span {
            let _ = i;
            return Err(ProblemError::NonUniformGrid);
        }
    }
    let vals: Vec<f64> = (0..=n).map(|i| prob.running_cost(&y[i], &p[i])).collect();
    Ok(prob.terminal_cost(&y[n]) + composite_simpson(&vals, h))
}

/// Composite Simpson rule; an odd interval count is handled by a single
/// Simpson 3/8 panel at the head, keeping fourth-order accuracy.
pub fn composite_simpson(vals: &[f64], h: f64) -> f64 {
    let n = vals.len() - 1;
    assert!(n >= 2, "Simpson needs at least two intervals");
    let (head, start) = if n % 2 == 0 {
        (0.0, 0)
    } else {
        (
            3.0 * h / 8.0 * (vals[0] + 3.0 * vals[1] + 3.0 * vals[2] + vals[3]),
            3,
        )
    };
    if start == n {
        return head;
    }
    let mut acc = vals[start] + vals[n];
    let mut i = start + 1;
    while i < n {
        acc += 4.0 * vals[i];
        if i + 1 < n {
            acc += 2.0 * vals[i + 1];
        }
        i += 2;
    }
    head + h / 3.0 * acc
}

// ---------------------------------------------------------------- guesses

/// Iterated forward-backward relaxation on the continuous problem: integrate
/// the state forward along the current adjoint path, the adjoint backward
/// along the new state path, and relax.  Returns dense (y, p) paths on a
/// uniform `nf`-interval grid; they seed solvers near the right basin even
/// when crude.
pub fn sweep_paths(
    prob: &BvpProblem,
    nf: usize,
    iters: usize,
    relax: f64,
    dtol: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = prob.dim;
    let hf = (prob.t_end - prob.t0) / nf as f64;
    let cap = 1e6;
    let mut p_path = vec![vec![0.0; m]; nf + 1];
    let mut ys = vec![vec![0.0; m]; nf + 1];
    for _ in 0..iters {
        ys[0] = prob.y0.clone();
        for j in 0..nf {
            let pj = p_path[j].clone();
            let pj1 = p_path[j + 1].clone();
            let pm = lin_comb(&pj, &pj1, 0.5, 0.5);
            let y = ys[j].clone();
            let k1 = prob.g(&y, &pj);
            let k2 = prob.g(&lin_comb(&y, &k1, 1.0, hf / 2.0), &pm);
            let k3 = prob.g(&lin_comb(&y, &k2, 1.0, hf / 2.0), &pm);
            let k4 = prob.g(&lin_comb(&y, &k3, 1.0, hf), &pj1);
            let mut next = rk4_update(&y, &k1, &k2, &k3, &k4, hf);
            for v in next.iter_mut() {
                *v = if v.is_nan() { cap } else { v.clamp(-cap, cap) };
            }
            ys[j + 1] = next;
        }
        let mut pn = vec![vec![0.0; m]; nf + 1];
        pn[nf] = prob.r(&ys[nf]);
        for j in (1..=nf).rev() {
            let pcur = pn[j].clone();
            let ymid = lin_comb(&ys[j], &ys[j - 1], 0.5, 0.5);
            let k1 = prob.phi(&ys[j], &pcur);
            let k2 = prob.phi(&ymid, &lin_comb(&pcur, &k1, 1.0, -hf / 2.0));
            let k3 = prob.phi(&ymid, &lin_comb(&pcur, &k2, 1.0, -hf / 2.0));
            let k4 = prob.phi(&ys[j - 1], &lin_comb(&pcur, &k3, 1.0, -hf));
            pn[j - 1] = rk4_update(&pcur, &k1, &k2, &k3, &k4, -hf);
        }
        let mut delta = 0.0f64;
        for j in 0..=nf {
            for i in 0..m {
                delta = delta.max((pn[j][i] - p_path[j][i]).abs());
                p_path[j][i] = relax * pn[j][i] + (1.0 - relax) * p_path[j][i];
            }
        }
        if delta < dtol {
            break;
        }
    }
    (ys, p_path)
}

/// Straight-line state path from y0 to the transfer target with zero
/// adjoint; the crudest guess that still starts in the correct basin for
/// steering problems.  None when the problem has no terminal target.
pub fn line_paths(prob: &BvpProblem, nf: usize) -> Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let target = prob.transfer_target()?;
    let m = prob.dim;
    let ys = (0..=nf)
        .map(|i| {
            let th = i as f64 / nf as f64;
            (0..m)
                .map(|k| (1.0 - th) * prob.y0[k] + th * target[k])
                .collect()
        })
        .collect();
    Some((ys, vec![vec![0.0; m]; nf + 1]))
}

// ---------------------------------------------------------------- shooting

const SHOOT_TOL: f64 = 1e-10;

fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| t0 + (t1 - t0) * i as f64 / n as f64)
        .collect()
}

fn lin_comb(a: &[f64], b: &[f64], ca: f64, cb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect()
}

fn rk4_update(z: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64], h: f64) -> Vec<f64> {
    (0..z.len())
        .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn rk4_step(prob: &BvpProblem, z: &[f64], h: f64) -> Vec<f64> {
    let k1 = prob.coupled_rhs(z);
    let k2 = prob.coupled_rhs(&lin_comb(z, &k1, 1.0, h / 2.0));
    let k3 = prob.coupled_rhs(&lin_comb(z, &k2, 1.0, h / 2.0));
    let k4 = prob.coupled_rhs(&lin_comb(z, &k3, 1.0, h));
    rk4_update(z, &k1, &k2, &k3, &k4, h)
}

fn saturation_bound(prob: &BvpProblem) -> f64 {
    let scale = prob.y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e4 * (1.0 + scale)
}

/// RK4 path over the whole horizon.  With a clamp, the state saturates once
/// it leaves the box, keeping trial integrations finite so Newton can reject
/// them.
fn rk4_path(prob: &BvpProblem, z0: &[f64], n_steps: usize, clamp: Option<f64>) -> Vec<Vec<f64>> {
    let h = (prob.t_end - prob.t0) / n_steps as f64;
    let mut z = z0.to_vec();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(z.clone());
    let mut saturated = false;
    for _ in 0..n_steps {
        if saturated {
            out.push(z.clone());
            continue;
        }
        z = rk4_step(prob, &z, h);
        if let Some(c) = clamp {
            for v in z.iter_mut() {
                *v = if v.is_nan() { c } else { v.clamp(-c, c) };
            }
            saturated = z.iter().any(|v| v.abs() >= c);
        }
        out.push(z.clone());
    }
    out
}

fn rk4_span(prob: &BvpProblem, z0: &[f64], t0: f64, t1: f64, n_sub: usize, clamp: Option<f64>) -> Vec<f64> {
    let h = (t1 - t0) / n_sub as f64;
    let mut z = z0.to_vec();
    for _ in 0..n_sub {
        z = rk4_step(prob, &z, h);
        if let Some(c) = clamp {
            for v in z.iter_mut() {
                *v = v.clamp(-c, c);
            }
        }
    }
    z
}

fn shoot_residual(prob: &BvpProblem, xi: &[f64], n_steps: usize, clamp: f64) -> Vec<f64> {
    let m = prob.dim;
    let mut z0 = prob.y0.clone();
    z0.extend_from_slice(xi);
    let z_end = rk4_path(prob, &z0, n_steps, Some(clamp))
        .pop()
        .expect("nonempty path");
    let r = prob.r(&z_end[..m]);
    (0..m).map(|i| z_end[m + i] - r[i]).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton on a finite-difference Jacobian; shared by both shooting
/// variants.  Returns the solution when the residual norm reaches tol.
fn fd_newton(
    mut x: Vec<f64>,
    residual: &dyn Fn(&[f64]) -> Vec<f64>,
    tol: f64,
    maxit: usize,
    max_halvings: usize,
) -> Result<Vec<f64>, f64> {
    let n = x.len();
    let mut res = residual(&x);
    let mut rn = inf_norm(&res);
    for _ in 0..maxit {
        if rn <= tol {
            return Ok(x);
        }
        let mut jac = Mat::zeros(n, n);
        for i in 0..n {
            let d = f64::EPSILON.sqrt() * (1.0 + x[i].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += d;
            xm[i] -= d;
            let rp = residual(&xp);
            let rm = residual(&xm);
            for k in 0..n {
                jac[(k, i)] = (rp[k] - rm[k]) / (2.0 * d);
            }
        }
        let rhs = Mat::column(&res.iter().map(|v| -v).collect::<Vec<_>>());
        let step = match jac.solve(&rhs) {
            Ok(s) => s,
            Err(_) => return Err(rn),
        };
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..max_halvings {
            let xt: Vec<f64> = (0..n).map(|i| x[i] + lam * step[(i, 0)]).collect();
            let rt = residual(&xt);
            let rtn = inf_norm(&rt);
            if rtn.is_finite() && rtn < rn {
                x = xt;
                res = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            return Err(rn);
        }
    }
    if rn <= tol {
        Ok(x)
    } else {
        Err(rn)
    }
}

fn single_shooting(prob: &BvpProblem, n_steps: usize) -> Option<Vec<f64>> {
    let clamp = saturation_bound(prob);
    let residual = |xi: &[f64]| shoot_residual(prob, xi, n_steps, clamp);
    fd_newton(vec![0.0; prob.dim], &residual, SHOOT_TOL, 25, 15).ok()
}

/// Multiple shooting unknowns: the initial adjoint followed by the full
/// (y, p) state at each interior segment boundary.
fn multiple_shooting(
    prob: &BvpProblem,
    n_steps: usize,
    n_seg: usize,
) -> Result<Vec<f64>, f64> {
    let m = prob.dim;
    let t0 = prob.t0;
    let t_end = prob.t_end;
    let taus = uniform_grid(t0, t_end, n_seg);
    let per = (n_steps / n_seg).max(1);
    let clamp = saturation_bound(prob);

    let residual = |x: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(m + (n_seg - 1) * 2 * m);
        let mut z = prob.y0.clone();
        z.extend_from_slice(&x[..m]);
        for k in 0..n_seg {
            let z_end = rk4_span(prob, &z, taus[k], taus[k + 1], per, Some(clamp));
            if k < n_seg - 1 {
                let znext = &x[m + k * 2 * m..m + (k + 1) * 2 * m];
                out.extend((0..2 * m).map(|i| z_end[i] - znext[i]));
                z = znext.to_vec();
            } else {
                let r = prob.r(&z_end[..m]);
                out.extend((0..m).map(|i| z_end[m + i] - r[i]));
            }
        }
        out
    };

    let x0 = shooting_seed(prob, n_seg, per);
    fd_newton(x0, &residual, SHOOT_TOL, 60, 30)
}

/// Seed for the multiple-shooting unknowns: a straight-line transfer when
/// the problem has a terminal state target, otherwise one forward sweep of
/// the state with zero adjoint followed by one backward adjoint sweep.
fn shooting_seed(prob: &BvpProblem, n_seg: usize, per: usize) -> Vec<f64> {
    let m = prob.dim;
    let nun = m + (n_seg - 1) * 2 * m;
    let mut x = vec![0.0; nun];
    if let Some((line_y, line_p)) = line_paths(prob, n_seg) {
        for k in 0..n_seg - 1 {
            x[m + k * 2 * m..m + k * 2 * m + m].copy_from_slice(&line_y[k + 1]);
            x[m + k * 2 * m + m..m + (k + 1) * 2 * m].copy_from_slice(&line_p[k + 1]);
        }
        return x;
    }
    let nf = n_seg * per;
    let hf = (prob.t_end - prob.t0) / nf as f64;
    let zero = vec![0.0; m];
    let mut ys = vec![prob.y0.clone()];
    for j in 0..nf {
        let y = &ys[j];
        let k1 = prob.g(y, &zero);
        let k2 = prob.g(&lin_comb(y, &k1, 1.0, hf / 2.0), &zero);
        let k3 = prob.g(&lin_comb(y, &k2, 1.0, hf / 2.0), &zero);
        let k4 = prob.g(&lin_comb(y, &k3, 1.0, hf), &zero);
        ys.push(rk4_update(y, &k1, &k2, &k3, &k4, hf));
    }
    let mut ps = vec![vec![0.0; m]; nf + 1];
    ps[nf] = prob.r(&ys[nf]);
    for j in (1..=nf).rev() {
        let p = ps[j].clone();
        let ymid = lin_comb(&ys[j], &ys[j - 1], 0.5, 0.5);
        let k1 = prob.phi(&ys[j], &p);
        let k2 = prob.phi(&ymid, &lin_comb(&p, &k1, 1.0, -hf / 2.0));
        let k3 = prob.phi(&ymid, &lin_comb(&p, &k2, 1.0, -hf / 2.0));
        let k4 = prob.phi(&ys[j - 1], &lin_comb(&p, &k3, 1.0, -hf));
        ps[j - 1] = rk4_update(&p, &k1, &k2, &k3, &k4, -hf);
    }
    x[..m].copy_from_slice(&ps[0]);
    for k in 0..n_seg - 1 {
        let j = (k + 1) * per;
        x[m + k * 2 * m..m + k * 2 * m + m].copy_from_slice(&ys[j]);
        x[m + k * 2 * m + m..m + (k + 1) * 2 * m].copy_from_slice(&ps[j]);
    }
    x
}

fn trajectory_from_path(prob: &BvpProblem, path: &[Vec<f64>]) -> ReferenceTrajectory {
    let m = prob.dim;
    ReferenceTrajectory {
        times: uniform_grid(prob.t0, prob.t_end, path.len() - 1),
        y: path.iter().map(|z| z[..m].to_vec()).collect(),
        p: path.iter().map(|z| z[m..].to_vec()).collect(),
        provenance: Provenance::ShootingRk4,
    }
}

/// Dense output from converged multiple-shooting unknowns: walk the
/// requested grid, re-integrating inside each segment with steps aligned to
/// the grid spacing.
fn stitched_trajectory(
    prob: &BvpProblem,
    unknowns: &[f64],
    n_seg: usize,
    n_steps: usize,
) -> ReferenceTrajectory {
    let m = prob.dim;
    let t0 = prob.t0;
    let t_end = prob.t_end;
    let span = t_end - t0;
    let taus = uniform_grid(t0, t_end, n_seg);
    let grid = uniform_grid(t0, t_end, n_steps);
    let hsub = span / n_steps as f64;
    let mut seg_starts = Vec::with_capacity(n_seg);
    let mut z0 = prob.y0.clone();
    z0.extend_from_slice(&unknowns[..m]);
    seg_starts.push(z0);
    for k in 0..n_seg - 1 {
        seg_starts.push(unknowns[m + k * 2 * m..m + (k + 1) * 2 * m].to_vec());
    }
    let mut y = Vec::with_capacity(n_steps + 1);
    let mut p = Vec::with_capacity(n_steps + 1);
    let mut gi = 0usize;
    for k in 0..n_seg {
        let mut z = seg_starts[k].clone();
        let mut t_cur = taus[k];
        while gi <= n_steps && grid[gi] < taus[k + 1] + 1e-12 * span {
            let d = grid[gi] - t_cur;
            if d > 1e-14 * span {
                let n_sub = ((d / hsub).round() as usize).max(1);
                z = rk4_span(prob, &z, t_cur, grid[gi], n_sub, None);
            }
            t_cur = grid[gi];
            y.push(z[..m].to_vec());
            p.push(z[m..].to_vec());
            gi += 1;
        }
        if gi > n_steps {
            break;
        }
    }
    ReferenceTrajectory {
        times: grid,
        y,
        p,
        provenance: Provenance::ShootingRk4,
    }
}
