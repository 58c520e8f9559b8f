//! Monolithic Newton solver for the coupled discrete state/adjoint
//! optimality system.
//!
//! The unknown vector stacks all forward stage values, then all adjoint
//! stage values, each step-major and stage-major: `Z = (Y_0..Y_N, P_0..P_N)`
//! with `Y_n = (Y_n1..Y_ns)` and each stage an m-vector.  The residual is
//! ordered `(F_0..F_N, G_N..G_0)`.  Grouping the unknowns of one step as
//! `(Y_n, P_n)` makes the Jacobian block tridiagonal, which the solver
//! exploits with a block Thomas factorization.

use crate::linsolve::BlockTriDiag;
use crate::mat::Mat;
use crate::problems::{line_paths, sweep_paths, BvpProblem, ReferenceTrajectory};
use crate::triplets::{PeerTriplet, StageMethod};
use std::io::{self, Write};

/// Errors from assembling or solving the coupled system.
#[derive(Debug, thiserror::Error)]
pub enum KktError {
    #[error("Newton stalled after {} iterations (residual {:.3e})",
            .solution.iterations, .solution.residual_norm)]
    Stalled { solution: Box<KktSolution> },
    #[error("Jacobian factorization failed at Newton iteration {0}")]
    SingularJacobian(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// How the Newton matrix is formed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum JacobianMode {
    /// Block assembly from the problem's Jacobian callbacks.
    Analytic,
    /// Dense central differences of the residual; for verification and
    /// small grids only.
    FiniteDifference,
}

/// Initial iterate for the Newton solve.
#[derive(Clone, Debug)]
pub enum GuessMode {
    /// Y stages at y0, P stages at r(y0).  Reproduces coarse-grid failure
    /// modes instead of masking them.
    Constant,
    /// Iterated forward-backward relaxation paths sampled at stage times.
    Sweep,
    /// Straight line from y0 to the problem's terminal target with zero
    /// adjoint; falls back to Sweep when the problem has no target.
    Transfer,
    /// Linear interpolation of caller-supplied dense paths on a uniform
    /// grid over the horizon, e.g. a coarse solution for continuation.
    Path { y: Vec<Vec<f64>>, p: Vec<Vec<f64>> },
}

/// Newton iteration controls.
#[derive(Clone, Debug)]
pub struct NewtonOptions {
    /// Convergence threshold on the residual infinity norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Armijo backtracking on the residual norm, factor 1/2, at most 8
    /// halvings; disabled means full steps are always taken.
    pub damping: bool,
    pub jacobian: JacobianMode,
    pub guess: GuessMode,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: 1e-12,
            max_iterations: 30,
            damping: true,
            jacobian: JacobianMode::Analytic,
            guess: GuessMode::Constant,
        }
    }
}

/// Converged (or final) iterate of a coupled solve with diagnostics.
#[derive(Clone, Debug)]
pub struct KktSolution {
    pub method: String,
    pub problem: String,
    /// Step count N+1; steps are indexed n = 0..=N.
    pub n_steps: usize,
    pub h: f64,
    pub t0: f64,
    pub nodes: Vec<f64>,
    /// stage_y[n][j] is the j-th forward stage of step n, an m-vector.
    pub stage_y: Vec<Vec<Vec<f64>>>,
    pub stage_p: Vec<Vec<Vec<f64>>>,
    /// w-combination of the last forward stages: the state at T.
    pub y_end: Vec<f64>,
    /// v-combination of the first adjoint stages: the adjoint at t0.
    pub p_start: Vec<f64>,
    /// Terminal adjoint r(y_h(T)).
    pub p_end: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

impl KktSolution {
    /// State outputs y_h(t_{n+1}) = w-combination of Y_n, n = 0..N.
    pub fn state_outputs(&self, w: &[f64]) -> Vec<Vec<f64>> {
        self.stage_y.iter().map(|yn| combine(w, yn)).collect()
    }

    /// Adjoint outputs p_h(t_n) = v-combination of P_n, n = 0..N.
    pub fn adjoint_outputs(&self, v: &[f64]) -> Vec<Vec<f64>> {
        self.stage_p.iter().map(|pn| combine(v, pn)).collect()
    }

    /// Writes stage data as CSV (n, j, t_nj, state, adjoint components)
    /// followed by a summary comment line.  Stage times are genuine
    /// t0 + (n + c_j) h values; extended nodes may exceed T.
    pub fn dump_csv(&self, out: &mut impl Write) -> io::Result<()> {
        let m = self.y_end.len();
        let mut header = String::from("n,j,t_nj");
        for k in 0..m {
            header.push_str(&format!(",y{}", k + 1));
        }
        for k in 0..m {
            header.push_str(&format!(",p{}", k + 1));
        }
        writeln!(out, "{header}")?;
        for n in 0..self.n_steps {
            for j in 0..self.nodes.len() {
                let t = self.t0 + (n as f64 + self.nodes[j]) * self.h;
                let mut line = format!("{n},{},{:.17e}", j + 1, t);
                for k in 0..m {
                    line.push_str(&format!(",{:.17e}", self.stage_y[n][j][k]));
                }
                for k in 0..m {
                    line.push_str(&format!(",{:.17e}", self.stage_p[n][j][k]));
                }
                writeln!(out, "{line}")?;
            }
        }
        writeln!(
            out,
            "# y_end={} p_start={} iterations={} residual={:.3e}",
            fmt_vec(&self.y_end),
            fmt_vec(&self.p_start),
            self.iterations,
            self.residual_norm
        )
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let body: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
    format!("[{}]", body.join(";"))
}

fn combine(weights: &[f64], stages: &[Vec<f64>]) -> Vec<f64> {
    let m = stages[0].len();
    let mut out = vec![0.0; m];
    for (j, stage) in stages.iter().enumerate() {
        for k in 0..m {
            out[k] += weights[j] * stage[k];
        }
    }
    out
}

/// Maximal output errors against a reference on the same grid: the state
/// error compares w-combinations with y(t_{n+1}), the adjoint error
/// compares v-combinations with p(t_n).
pub fn extract_errors(
    trip: &PeerTriplet,
    sol: &KktSolution,
    traj: &ReferenceTrajectory,
) -> Result<(f64, f64), KktError> {
    if traj.intervals() != sol.n_steps {
        return Err(KktError::Dimension(format!(
            "reference has {} intervals, solution has {} steps",
            traj.intervals(),
            sol.n_steps
        )));
    }
    let states = sol.state_outputs(&trip.coeffs.w);
    let adjoints = sol.adjoint_outputs(&trip.coeffs.v);
    let mut es = 0.0f64;
    let mut ea = 0.0f64;
    for n in 0..sol.n_steps {
        let yr = &traj.state_targets()[n];
        let pr = &traj.adjoint_targets()[n];
        for k in 0..yr.len() {
            es = es.max((states[n][k] - yr[k]).abs());
            ea = ea.max((adjoints[n][k] - pr[k]).abs());
        }
    }
    Ok((es, ea))
}

/// Assembled view of one coupled system: triplet, problem, and grid.
pub struct KktSystem<'a> {
    pub trip: &'a PeerTriplet,
    pub prob: &'a BvpProblem,
    /// Last step index N; the grid has N+1 steps.
    pub n_last: usize,
    pub h: f64,
}

impl<'a> KktSystem<'a> {
    pub fn new(trip: &'a PeerTriplet, prob: &'a BvpProblem, n_last: usize) -> Self {
        assert!(n_last >= 1, "need at least two steps");
        let h = (prob.t_end - prob.t0) / (n_last + 1) as f64;
        KktSystem { trip, prob, n_last, h }
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_last + 1) * self.trip.s * self.prob.dim
    }

    fn sm(&self) -> usize {
        self.trip.s * self.prob.dim
    }

    fn y_off(&self, n: usize) -> usize {
        n * self.sm()
    }

    fn p_off(&self, n: usize) -> usize {
        (self.n_last + 1 + n) * self.sm()
    }

    fn f_row(&self, n: usize) -> usize {
        n * self.sm()
    }

    fn g_row(&self, n: usize) -> usize {
        (self.n_last + 1 + (self.n_last - n)) * self.sm()
    }

    fn forward_mats(&self, n: usize) -> &StageMethod<f64> {
        if n == self.n_last {
            &self.trip.coeffs.end
        } else {
            &self.trip.coeffs.standard
        }
    }

    /// (A_n, K_n) entering the adjoint block of step n.
    fn adjoint_mats(&self, n: usize) -> (&Mat<f64>, &Mat<f64>) {
        if n == self.n_last {
            (&self.trip.coeffs.end.a, &self.trip.coeffs.end.k)
        } else if n == 0 {
            (&self.trip.coeffs.start.a0, &self.trip.coeffs.start.k0)
        } else {
            (&self.trip.coeffs.standard.a, &self.trip.coeffs.standard.k)
        }
    }

    fn b_next(&self, n: usize) -> &Mat<f64> {
        if n + 1 == self.n_last {
            &self.trip.coeffs.end.b
        } else {
            &self.trip.coeffs.standard.b
        }
    }

    /// Stage-block product out[i] = sum_j mat[i,j] x[j] over m-vectors.
    fn stage_mul(&self, mat: &Mat<f64>, x: &[f64]) -> Vec<f64> {
        let (s, m) = (self.trip.s, self.prob.dim);
        let mut out = vec![0.0; s * m];
        for i in 0..s {
            for j in 0..s {
                let c = mat[(i, j)];
                for k in 0..m {
                    out[i * m + k] += c * x[j * m + k];
                }
            }
        }
        out
    }

    /// Transposed stage-block product out[i] = sum_j mat[j,i] x[j].
    fn stage_mul_t(&self, mat: &Mat<f64>, x: &[f64]) -> Vec<f64> {
        let (s, m) = (self.trip.s, self.prob.dim);
        let mut out = vec![0.0; s * m];
        for i in 0..s {
            for j in 0..s {
                let c = mat[(j, i)];
                for k in 0..m {
                    out[i * m + k] += c * x[j * m + k];
                }
            }
        }
        out
    }

    fn weight_comb(&self, weights: &[f64], x: &[f64]) -> Vec<f64> {
        let m = self.prob.dim;
        let mut out = vec![0.0; m];
        for (j, wj) in weights.iter().enumerate() {
            for k in 0..m {
                out[k] += wj * x[j * m + k];
            }
        }
        out
    }

    fn stage_slopes(&self, yn: &[f64], pn: &[f64]) -> Vec<f64> {
        let m = self.prob.dim;
        let mut out = Vec::with_capacity(yn.len());
        for j in 0..self.trip.s {
            out.extend(self.prob.g(&yn[j * m..(j + 1) * m], &pn[j * m..(j + 1) * m]));
        }
        out
    }

    /// Column sums of K_n: the weights sigma in the adjoint source term.
    fn column_sums(mat: &Mat<f64>) -> Vec<f64> {
        (0..mat.ncols())
            .map(|i| (0..mat.nrows()).map(|j| mat[(j, i)]).sum())
            .collect()
    }

    /// Adjoint source Phi: phi evaluated on the K-combination of the
    /// adjoint stages, with the p-independent part reweighted by the
    /// K column sum so the affine offset enters once per unit weight.
    fn stage_phi(&self, yn: &[f64], w_comb: &[f64], sig: &[f64]) -> Vec<f64> {
        let m = self.prob.dim;
        let zero = vec![0.0; m];
        let mut out = Vec::with_capacity(yn.len());
        for i in 0..self.trip.s {
            let yi = &yn[i * m..(i + 1) * m];
            let base = self.prob.phi(yi, &w_comb[i * m..(i + 1) * m]);
            let off = self.prob.phi(yi, &zero);
            out.extend((0..m).map(|k| base[k] + (sig[i] - 1.0) * off[k]));
        }
        out
    }

    /// Forward and adjoint residual blocks for every step.  `hb` is the
    /// factor on the start block's interpolated-slope term; the production
    /// value is h (passing 1 exposes the O(1) defect of the unscaled form).
    fn residual_blocks(&self, z: &[f64], hb: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let co = &self.trip.coeffs;
        let (s, m) = (self.trip.s, self.prob.dim);
        let sm = s * m;
        let n_last = self.n_last;
        let h = self.h;
        let mut f_blocks = Vec::with_capacity(n_last + 1);
        let mut g_blocks = vec![vec![0.0; sm]; n_last + 1];

        let y_at = |n: usize| &z[self.y_off(n)..self.y_off(n) + sm];
        let p_at = |n: usize| &z[self.p_off(n)..self.p_off(n) + sm];

        let ph0 = self.weight_comb(&co.v, p_at(0));
        let g0 = self.prob.g(&self.prob.y0, &ph0);
        let slopes0 = self.stage_slopes(y_at(0), p_at(0));
        let k_slopes0 = self.stage_mul(&co.start.k0, &slopes0);
        let a_y0 = self.stage_mul(&co.start.a0, y_at(0));
        let mut f0 = vec![0.0; sm];
        for i in 0..s {
            for k in 0..m {
                f0[i * m + k] = a_y0[i * m + k]
                    - co.start.a[i] * self.prob.y0[k]
                    - hb * co.start.b[i] * g0[k]
                    - h * k_slopes0[i * m + k];
            }
        }
        f_blocks.push(f0);

        for n in 1..=n_last {
            let mats = self.forward_mats(n);
            let slopes = self.stage_slopes(y_at(n), p_at(n));
            let a_y = self.stage_mul(&mats.a, y_at(n));
            let b_y = self.stage_mul(&mats.b, y_at(n - 1));
            let k_s = self.stage_mul(&mats.k, &slopes);
            f_blocks.push(
                (0..sm)
                    .map(|t| a_y[t] - b_y[t] - h * k_s[t])
                    .collect(),
            );
        }

        let y_end = self.weight_comb(&co.w, y_at(n_last));
        let r_end = self.prob.r(&y_end);
        for n in (0..=n_last).rev() {
            let (a_n, k_n) = self.adjoint_mats(n);
            let w_comb = self.stage_mul_t(k_n, p_at(n));
            let sig = Self::column_sums(k_n);
            let phi = self.stage_phi(y_at(n), &w_comb, &sig);
            let at_p = self.stage_mul_t(a_n, p_at(n));
            let mut gn = vec![0.0; sm];
            if n == n_last {
                for i in 0..s {
                    for k in 0..m {
                        gn[i * m + k] =
                            at_p[i * m + k] - co.w[i] * r_end[k] + h * phi[i * m + k];
                    }
                }
            } else {
                let bt_p = self.stage_mul_t(self.b_next(n), p_at(n + 1));
                for t in 0..sm {
                    gn[t] = at_p[t] - bt_p[t] + h * phi[t];
                }
            }
            g_blocks[n] = gn;
        }
        (f_blocks, g_blocks)
    }

    /// Residual in specification order (F_0..F_N, G_N..G_0).
    pub fn assemble_residual(&self, z: &[f64]) -> Result<Vec<f64>, KktError> {
        if z.len() != self.dim() {
            return Err(KktError::Dimension(format!(
                "unknown vector has length {}, expected {}",
                z.len(),
                self.dim()
            )));
        }
        let (f, g) = self.residual_blocks(z, self.h);
        let mut out = Vec::with_capacity(self.dim());
        for block in &f {
            out.extend_from_slice(block);
        }
        for block in g.iter().rev() {
            out.extend_from_slice(block);
        }
        Ok(out)
    }

    #[cfg(test)]
    fn residual_with_unscaled_start_slope(&self, z: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.residual_blocks(z, 1.0)
    }

    /// Block tridiagonal Newton matrix over per-step unknowns (Y_n, P_n).
    fn jacobian_blocks(&self, z: &[f64]) -> BlockTriDiag {
        let co = &self.trip.coeffs;
        let (s, m) = (self.trip.s, self.prob.dim);
        let sm = s * m;
        let bs = 2 * sm;
        let n_last = self.n_last;
        let h = self.h;
        let mut sys = BlockTriDiag::new(n_last + 1, bs);
        let zero_m = vec![0.0; m];

        let y_at = |n: usize| &z[self.y_off(n)..self.y_off(n) + sm];
        let p_at = |n: usize| &z[self.p_off(n)..self.p_off(n) + sm];

        let add_block = |dst: &mut Mat<f64>, r0: usize, c0: usize, scale: f64, blk: &Mat<f64>| {
            for r in 0..blk.nrows() {
                for c in 0..blk.ncols() {
                    dst[(r0 + r, c0 + c)] += scale * blk[(r, c)];
                }
            }
        };
        let add_identity = |dst: &mut Mat<f64>, r0: usize, c0: usize, scale: f64| {
            for k in 0..m {
                dst[(r0 + k, c0 + k)] += scale;
            }
        };

        for n in 0..=n_last {
            let yn = y_at(n);
            let pn = p_at(n);
            let mut diag = Mat::zeros(bs, bs);

            // Forward rows F_n.
            let (a_f, k_f, b_used) = if n == 0 {
                (&co.start.a0, &co.start.k0, false)
            } else {
                let mats = self.forward_mats(n);
                (&mats.a, &mats.k, true)
            };
            for j in 0..s {
                let yj = &yn[j * m..(j + 1) * m];
                let pj = &pn[j * m..(j + 1) * m];
                let gy = self.prob.g_y(yj, pj);
                let gp = self.prob.g_p(yj, pj);
                for i in 0..s {
                    add_identity(&mut diag, i * m, j * m, a_f[(i, j)]);
                    add_block(&mut diag, i * m, j * m, -h * k_f[(i, j)], &gy);
                    add_block(&mut diag, i * m, sm + j * m, -h * k_f[(i, j)], &gp);
                }
            }
            if n == 0 {
                let ph0 = self.weight_comb(&co.v, pn);
                let gp0 = self.prob.g_p(&self.prob.y0, &ph0);
                for i in 0..s {
                    for j in 0..s {
                        add_block(
                            &mut diag,
                            i * m,
                            sm + j * m,
                            -h * co.start.b[i] * co.v[j],
                            &gp0,
                        );
                    }
                }
            }
            if b_used {
                let mats = self.forward_mats(n);
                let mut sub = Mat::zeros(bs, bs);
                for i in 0..s {
                    for j in 0..s {
                        add_identity(&mut sub, i * m, j * m, -mats.b[(i, j)]);
                    }
                }
                sys.sub[n] = sub;
            }

            // Adjoint rows G_n.
            let (a_a, k_a) = self.adjoint_mats(n);
            let w_comb = self.stage_mul_t(k_a, pn);
            let sig = Self::column_sums(k_a);
            for i in 0..s {
                let yi = &yn[i * m..(i + 1) * m];
                let wi = &w_comb[i * m..(i + 1) * m];
                let mut phy = self.prob.phi_y(yi, wi);
                let phy0 = self.prob.phi_y(yi, &zero_m);
                for r in 0..m {
                    for c in 0..m {
                        phy[(r, c)] += (sig[i] - 1.0) * phy0[(r, c)];
                    }
                }
                let php = self.prob.phi_p(yi, wi);
                add_block(&mut diag, sm + i * m, i * m, h, &phy);
                for j in 0..s {
                    add_identity(&mut diag, sm + i * m, sm + j * m, a_a[(j, i)]);
                    add_block(&mut diag, sm + i * m, sm + j * m, h * k_a[(j, i)], &php);
                }
            }
            if n == n_last {
                let y_end = self.weight_comb(&co.w, yn);
                let ry = self.prob.r_y(&y_end);
                for i in 0..s {
                    for j in 0..s {
                        add_block(&mut diag, sm + i * m, j * m, -co.w[i] * co.w[j], &ry);
                    }
                }
            } else {
                let b1 = self.b_next(n);
                let mut sup = Mat::zeros(bs, bs);
                for i in 0..s {
                    for j in 0..s {
                        add_identity(&mut sup, sm + i * m, sm + j * m, -b1[(j, i)]);
                    }
                }
                sys.sup[n] = sup;
            }
            sys.diag[n] = diag;
        }
        sys
    }

    /// Dense Jacobian in specification ordering, for verification; the
    /// solver itself works on the block tridiagonal form.
    pub fn assemble_jacobian(&self, z: &[f64], mode: JacobianMode) -> Result<Mat<f64>, KktError> {
        if z.len() != self.dim() {
            return Err(KktError::Dimension(format!(
                "unknown vector has length {}, expected {}",
                z.len(),
                self.dim()
            )));
        }
        match mode {
            JacobianMode::FiniteDifference => {
                let dim = self.dim();
                let mut jac = Mat::zeros(dim, dim);
                let mut zp = z.to_vec();
                for i in 0..dim {
                    // Cube-root step: balances cancellation against the
                    // second-order truncation of the central difference.
                    let d = f64::EPSILON.cbrt() * (1.0 + z[i].abs());
                    zp[i] = z[i] + d;
                    let rp = self.assemble_residual(&zp)?;
                    zp[i] = z[i] - d;
                    let rm = self.assemble_residual(&zp)?;
                    zp[i] = z[i];
                    for k in 0..dim {
                        jac[(k, i)] = (rp[k] - rm[k]) / (2.0 * d);
                    }
                }
                Ok(jac)
            }
            JacobianMode::Analytic => {
                let sm = self.sm();
                let blocks = self.jacobian_blocks(z);
                let dim = self.dim();
                let mut jac = Mat::zeros(dim, dim);
                let mut scatter = |r0: usize, c0: usize, blk: &Mat<f64>, br: usize, bc: usize| {
                    for r in 0..sm {
                        for c in 0..sm {
                            jac[(r0 + r, c0 + c)] += blk[(br * sm + r, bc * sm + c)];
                        }
                    }
                };
                for n in 0..=self.n_last {
                    scatter(self.f_row(n), self.y_off(n), &blocks.diag[n], 0, 0);
                    scatter(self.f_row(n), self.p_off(n), &blocks.diag[n], 0, 1);
                    scatter(self.g_row(n), self.y_off(n), &blocks.diag[n], 1, 0);
                    scatter(self.g_row(n), self.p_off(n), &blocks.diag[n], 1, 1);
                    if n > 0 {
                        scatter(self.f_row(n), self.y_off(n - 1), &blocks.sub[n], 0, 0);
                    }
                    if n < self.n_last {
                        scatter(self.g_row(n), self.p_off(n + 1), &blocks.sup[n], 1, 1);
                    }
                }
                Ok(jac)
            }
        }
    }

    /// Builds the initial unknown vector for a guess mode.
    pub fn initial_guess(&self, mode: &GuessMode) -> Vec<f64> {
        match mode {
            GuessMode::Constant => {
                let r0 = self.prob.r(&self.prob.y0);
                let mut z = vec![0.0; self.dim()];
                for n in 0..=self.n_last {
                    for j in 0..self.trip.s {
                        for k in 0..self.prob.dim {
                            z[self.y_off(n) + j * self.prob.dim + k] = self.prob.y0[k];
                            z[self.p_off(n) + j * self.prob.dim + k] = r0[k];
                        }
                    }
                }
                z
            }
            GuessMode::Sweep => {
                let (ys, ps) = sweep_paths(self.prob, 1280, 80, 0.3, 1e-8);
                self.guess_from_paths(&ys, &ps)
            }
            GuessMode::Transfer => match line_paths(self.prob, 256) {
                Some((ys, ps)) => self.guess_from_paths(&ys, &ps),
                None => self.initial_guess(&GuessMode::Sweep),
            },
            GuessMode::Path { y, p } => self.guess_from_paths(y, p),
        }
    }

    /// Samples dense uniform paths at the stage times, clamping sample
    /// times into the horizon (extended nodes reach past T; the guess just
    /// reuses the boundary value there).
    fn guess_from_paths(&self, ys: &[Vec<f64>], ps: &[Vec<f64>]) -> Vec<f64> {
        let nf = ys.len() - 1;
        let (t0, t1) = (self.prob.t0, self.prob.t_end);
        let m = self.prob.dim;
        let interp = |arr: &[Vec<f64>], t: f64, k: usize| -> f64 {
            let x = (t - t0) / (t1 - t0) * nf as f64;
            let j = (x.floor() as usize).min(nf - 1);
            let th = x - j as f64;
            (1.0 - th) * arr[j][k] + th * arr[j + 1][k]
        };
        let mut z = vec![0.0; self.dim()];
        for n in 0..=self.n_last {
            for j in 0..self.trip.s {
                let t = (t0 + (n as f64 + self.trip.coeffs.c[j]) * self.h).clamp(t0, t1);
                for k in 0..m {
                    z[self.y_off(n) + j * m + k] = interp(ys, t, k);
                    z[self.p_off(n) + j * m + k] = interp(ps, t, k);
                }
            }
        }
        z
    }

    fn inf_norm_blocks(f: &[Vec<f64>], g: &[Vec<f64>]) -> f64 {
        let fold = |acc: f64, b: &Vec<f64>| b.iter().fold(acc, |a, v| a.max(v.abs()));
        g.iter().fold(f.iter().fold(0.0, fold), fold)
    }

    /// Damped Newton iteration from the configured guess.
    pub fn solve(&self, opts: &NewtonOptions) -> Result<KktSolution, KktError> {
        assert!(opts.tolerance > 0.0, "tolerance must be positive");
        assert!(opts.max_iterations >= 1, "need at least one iteration");
        let sm = self.sm();
        let mut z = self.initial_guess(&opts.guess);
        let (mut fb, mut gb) = self.residual_blocks(&z, self.h);
        let mut rn = Self::inf_norm_blocks(&fb, &gb);
        let mut iterations = 0usize;
        while rn > opts.tolerance && iterations < opts.max_iterations {
            let dz = match opts.jacobian {
                JacobianMode::Analytic => {
                    let sys = self.jacobian_blocks(&z);
                    let mut rhs = vec![0.0; self.dim()];
                    for n in 0..=self.n_last {
                        for t in 0..sm {
                            rhs[n * 2 * sm + t] = -fb[n][t];
                            rhs[n * 2 * sm + sm + t] = -gb[n][t];
                        }
                    }
                    let sol = sys
                        .solve(&rhs)
                        .map_err(|_| KktError::SingularJacobian(iterations))?;
                    let mut dz = vec![0.0; self.dim()];
                    for n in 0..=self.n_last {
                        for t in 0..sm {
                            dz[self.y_off(n) + t] = sol[n * 2 * sm + t];
                            dz[self.p_off(n) + t] = sol[n * 2 * sm + sm + t];
                        }
                    }
                    dz
                }
                JacobianMode::FiniteDifference => {
                    let jac = self.assemble_jacobian(&z, JacobianMode::FiniteDifference)?;
                    let res = self.assemble_residual(&z)?;
                    let lu = crate::linsolve::Lu::factor(&jac)
                        .map_err(|_| KktError::SingularJacobian(iterations))?;
                    lu.solve_vec(&res.iter().map(|v| -v).collect::<Vec<_>>())
                }
            };
            if dz.iter().any(|v| !v.is_finite()) {
                return Err(KktError::SingularJacobian(iterations));
            }
            let mut lambda = 1.0;
            let mut accepted = false;
            let trials = if opts.damping { 9 } else { 1 };
            for _ in 0..trials {
                let zt: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a + lambda * d).collect();
                let (ft, gt) = self.residual_blocks(&zt, self.h);
                let rtn = Self::inf_norm_blocks(&ft, &gt);
                if !opts.damping || (rtn.is_finite() && (rtn < rn || rtn < opts.tolerance)) {
                    z = zt;
                    fb = ft;
                    gb = gt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            iterations += 1;
            if !accepted {
                return Err(KktError::Stalled {
                    solution: Box::new(self.package(&z, iterations, rn, false)),
                });
            }
        }
        let converged = rn <= opts.tolerance;
        let sol = self.package(&z, iterations, rn, converged);
        if converged {
            Ok(sol)
        } else {
            Err(KktError::Stalled { solution: Box::new(sol) })
        }
    }

    fn package(&self, z: &[f64], iterations: usize, rn: f64, converged: bool) -> KktSolution {
        let (s, m) = (self.trip.s, self.prob.dim);
        let stage = |off: usize| -> Vec<Vec<f64>> {
            (0..s)
                .map(|j| z[off + j * m..off + (j + 1) * m].to_vec())
                .collect()
        };
        let stage_y: Vec<_> = (0..=self.n_last).map(|n| stage(self.y_off(n))).collect();
        let stage_p: Vec<_> = (0..=self.n_last).map(|n| stage(self.p_off(n))).collect();
        let y_end = combine(&self.trip.coeffs.w, &stage_y[self.n_last]);
        let p_start = combine(&self.trip.coeffs.v, &stage_p[0]);
        let p_end = self.prob.r(&y_end);
        KktSolution {
            method: self.trip.name.clone(),
            problem: self.prob.name.to_string(),
            n_steps: self.n_last + 1,
            h: self.h,
            t0: self.prob.t0,
            nodes: self.trip.coeffs.c.clone(),
            stage_y,
            stage_p,
            y_end,
            p_start,
            p_end,
            iterations,
            residual_norm: rn,
            converged,
        }
    }

    /// Solves the adjoint subsystem with the forward stages frozen and an
    /// explicit terminal vector in place of r(y_h(T)).  The subsystem is
    /// affine in P, so one linear solve is exact.
    pub fn adjoint_solve_frozen(
        &self,
        stage_y: &[Vec<f64>],
        terminal: &[f64],
    ) -> Result<Vec<Vec<f64>>, KktError> {
        let co = &self.trip.coeffs;
        let (s, m) = (self.trip.s, self.prob.dim);
        let sm = s * m;
        if stage_y.len() != self.n_last + 1 || stage_y.iter().any(|b| b.len() != sm) {
            return Err(KktError::Dimension("frozen stage shape".into()));
        }
        let h = self.h;
        let zero_m = vec![0.0; m];
        let mut sys = BlockTriDiag::new(self.n_last + 1, sm);
        let mut rhs = vec![0.0; (self.n_last + 1) * sm];
        for n in 0..=self.n_last {
            let (a_a, k_a) = self.adjoint_mats(n);
            let sig = Self::column_sums(k_a);
            let mut diag = Mat::zeros(sm, sm);
            for i in 0..s {
                let yi = &stage_y[n][i * m..(i + 1) * m];
                let php = self.prob.phi_p(yi, &zero_m);
                for j in 0..s {
                    for k in 0..m {
                        diag[(i * m + k, j * m + k)] += a_a[(j, i)];
                    }
                    for r in 0..m {
                        for c in 0..m {
                            diag[(i * m + r, j * m + c)] += h * k_a[(j, i)] * php[(r, c)];
                        }
                    }
                }
                // Residual at P = 0: the affine offset and the terminal data.
                let off = self.prob.phi(yi, &zero_m);
                for k in 0..m {
                    let mut v = h * sig[i] * off[k];
                    if n == self.n_last {
                        v -= co.w[i] * terminal[k];
                    }
                    rhs[n * sm + i * m + k] = -v;
                }
            }
            sys.diag[n] = diag;
            if n < self.n_last {
                let b1 = self.b_next(n);
                let mut sup = Mat::zeros(sm, sm);
                for i in 0..s {
                    for j in 0..s {
                        for k in 0..m {
                            sup[(i * m + k, j * m + k)] = -b1[(j, i)];
                        }
                    }
                }
                sys.sup[n] = sup;
            }
        }
        let sol = sys
            .solve(&rhs)
            .map_err(|_| KktError::SingularJacobian(0))?;
        Ok((0..=self.n_last)
            .map(|n| sol[n * sm..(n + 1) * sm].to_vec())
            .collect())
    }
}

/// One-call interface: build the system for N+1 = n_last+1 steps and solve.
pub fn solve_kkt(
    trip: &PeerTriplet,
    prob: &BvpProblem,
    n_last: usize,
    opts: &NewtonOptions,
) -> Result<KktSolution, KktError> {
    KktSystem::new(trip, prob, n_last).solve(opts)
}
