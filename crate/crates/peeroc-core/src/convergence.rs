//! Error tables over halved step sizes with observed-order estimates.

use crate::kkt::{extract_errors, solve_kkt, GuessMode, KktError, NewtonOptions};
use crate::problems::{
    exact_reference, shooting_reference, BvpProblem, ProblemError, ReferenceTrajectory,
};
use crate::triplets::PeerTriplet;
use crate::CoreError;
use serde::Serialize;

/// One grid resolution: step count N+1 and maximal output errors.  Failed
/// solves are recorded as NaN so a sweep continues past them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceCell {
    pub n_steps: usize,
    pub state_error: f64,
    pub adjoint_error: f64,
}

/// Errors of one method on one problem over a doubling sequence of grids.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub method: String,
    pub problem: String,
    pub cells: Vec<ConvergenceCell>,
}

impl ConvergenceTable {
    /// Observed (state, adjoint) orders between consecutive rows,
    /// log2 of the error ratio under halving; NaN cells propagate.
    pub fn observed_orders(&self) -> Vec<(f64, f64)> {
        self.cells
            .windows(2)
            .map(|w| {
                (
                    (w[0].state_error / w[1].state_error).log2(),
                    (w[0].adjoint_error / w[1].adjoint_error).log2(),
                )
            })
            .collect()
    }
}

/// Where cell references come from: closed-form samples per grid, or one
/// dense oracle trajectory subsampled onto each grid.
pub enum ReferenceSource {
    Exact,
    Dense(ReferenceTrajectory),
}

/// Picks the exact solution when the problem has one, otherwise runs the
/// shooting oracle once at the given resolution.
pub fn reference_source(
    prob: &BvpProblem,
    oracle_steps: usize,
) -> Result<ReferenceSource, ProblemError> {
    if prob.has_exact() {
        Ok(ReferenceSource::Exact)
    } else {
        Ok(ReferenceSource::Dense(shooting_reference(prob, oracle_steps)?))
    }
}

impl ReferenceSource {
    fn on_grid(&self, prob: &BvpProblem, n_grid: usize) -> Result<ReferenceTrajectory, ProblemError> {
        match self {
            ReferenceSource::Exact => Ok(exact_reference(prob, n_grid)
                .expect("exact source chosen for a problem without an exact solution")),
            ReferenceSource::Dense(traj) => traj.subsample(n_grid),
        }
    }
}

/// Initial guess that suits the problem: the linear oscillation is guess
/// independent, a transfer target makes the straight line a good start,
/// and everything else gets the relaxation sweep.
pub fn default_guess(prob: &BvpProblem) -> GuessMode {
    if prob.has_exact() {
        GuessMode::Constant
    } else if prob.transfer_target().is_some() {
        GuessMode::Transfer
    } else {
        GuessMode::Sweep
    }
}

/// Runs one method over a doubling step sequence and collects output
/// errors.  Stalled or singular solves leave NaN cells; structural errors
/// (bad reference grids) abort.
pub fn convergence_table(
    trip: &PeerTriplet,
    prob: &BvpProblem,
    steps: &[usize],
    opts: &NewtonOptions,
    source: &ReferenceSource,
) -> Result<ConvergenceTable, CoreError> {
    assert!(!steps.is_empty(), "need at least one step count");
    assert!(steps[0] >= 2, "need at least two steps per grid");
    assert!(
        steps.windows(2).all(|w| w[1] == 2 * w[0]),
        "step counts must double: {steps:?}"
    );
    let mut cells = Vec::with_capacity(steps.len());
    for &n in steps {
        let cell = match solve_kkt(trip, prob, n - 1, opts) {
            Ok(sol) => {
                let traj = source.on_grid(prob, n)?;
                let (es, ea) = extract_errors(trip, &sol, &traj)?;
                ConvergenceCell { n_steps: n, state_error: es, adjoint_error: ea }
            }
            Err(KktError::Stalled { .. }) | Err(KktError::SingularJacobian(_)) => {
                ConvergenceCell { n_steps: n, state_error: f64::NAN, adjoint_error: f64::NAN }
            }
            Err(other) => return Err(other.into()),
        };
        cells.push(cell);
    }
    Ok(ConvergenceTable {
        method: trip.name.clone(),
        problem: prob.name.to_string(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{controlled_motion, rayleigh, wave};
    use crate::triplets::load_triplet;

    #[test]
    fn observed_orders_are_log2_error_ratios() {
        let table = ConvergenceTable {
            method: "x".into(),
            problem: "y".into(),
            cells: vec![
                ConvergenceCell { n_steps: 10, state_error: 8.0, adjoint_error: f64::NAN },
                ConvergenceCell { n_steps: 20, state_error: 1.0, adjoint_error: 4.0 },
                ConvergenceCell { n_steps: 40, state_error: 0.25, adjoint_error: 1.0 },
            ],
        };
        let orders = table.observed_orders();
        assert_eq!(orders.len(), 2);
        assert_eq!(orders[0].0, 3.0);
        assert!(orders[0].1.is_nan());
        assert_eq!(orders[1], (2.0, 2.0));
    }

    #[test]
    #[should_panic(expected = "must double")]
    fn non_doubling_step_lists_are_rejected() {
        let trip = load_triplet("AP4o43bdf").unwrap();
        let prob = wave(16.0);
        let _ = convergence_table(
            &trip,
            &prob,
            &[20, 50],
            &NewtonOptions::default(),
            &ReferenceSource::Exact,
        );
    }

    #[test]
    fn default_guess_follows_problem_structure() {
        assert!(matches!(default_guess(&wave(16.0)), GuessMode::Constant));
        assert!(matches!(default_guess(&rayleigh()), GuessMode::Sweep));
        assert!(matches!(
            default_guess(&controlled_motion(1.0, 10.0, [1.0, 0.0])),
            GuessMode::Transfer
        ));
    }

    #[test]
    fn gentle_oscillation_shows_fourth_order_state_errors() {
        let trip = load_triplet("AP4o43die").unwrap();
        let prob = wave(4.0);
        let source = reference_source(&prob, 0).unwrap();
        let table = convergence_table(
            &trip,
            &prob,
            &[20, 40, 80],
            &NewtonOptions::default(),
            &source,
        )
        .unwrap();
        assert!(table.cells.iter().all(|c| c.state_error.is_finite()));
        assert!(table
            .cells
            .windows(2)
            .all(|w| w[1].state_error < w[0].state_error));
        let (os, oa) = *table.observed_orders().last().unwrap();
        assert!((3.0..5.0).contains(&os), "state order {os}");
        assert!((2.2..4.6).contains(&oa), "adjoint order {oa}");
    }

    #[test]
    fn relaxation_oscillator_cells_match_frozen_oracle_values() {
        let trip = load_triplet("AP4o43bdf").unwrap();
        let prob = rayleigh();
        let source = reference_source(&prob, 1280).unwrap();
        let opts = NewtonOptions {
            tolerance: 1e-10,
            guess: default_guess(&prob),
            ..NewtonOptions::default()
        };
        let table = convergence_table(&trip, &prob, &[20, 40], &opts, &source).unwrap();
        let e20 = table.cells[0].state_error;
        let e40 = table.cells[1].state_error;
        assert!((e20 - 1.647e-2).abs() < 0.2 * 1.647e-2, "error at 20: {e20:e}");
        assert!((e40 - 4.281e-4).abs() < 0.2 * 4.281e-4, "error at 40: {e40:e}");
    }

    #[test]
    fn failed_cells_are_nan_and_the_sweep_continues() {
        let trip = load_triplet("AP3o32f").unwrap();
        let prob = controlled_motion(1.0, 10.0, [1.0, 0.0]);
        let source = reference_source(&prob, 1280).unwrap();
        let opts = NewtonOptions {
            tolerance: 1e-10,
            guess: default_guess(&prob),
            ..NewtonOptions::default()
        };
        let table = convergence_table(&trip, &prob, &[10, 20, 40], &opts, &source).unwrap();
        assert!(table.cells[0].state_error.is_nan());
        assert!(table.cells[2].state_error.is_finite());
        let orders = table.observed_orders();
        assert!(orders[0].0.is_nan());
        assert!(orders[1].0.is_finite());
    }
}
