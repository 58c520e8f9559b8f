//! Implicit two-step peer triplets for optimal control: coefficient handling,
//! order-condition verification, stability indicators, and a monolithic Newton
//! solver for the coupled state/adjoint boundary value system.

pub mod analysis;
pub mod convergence;
mod builtin;
pub mod eig;
pub mod kkt;
pub mod linsolve;
pub mod mat;
pub mod problems;
pub mod stability;
pub mod triplets;

pub use analysis::{condition_report, verify_triplet, ConditionResidual, MethodReport};
pub use convergence::{
    convergence_table, default_guess, reference_source, ConvergenceCell, ConvergenceTable,
    ReferenceSource,
};
pub use eig::EigError;
pub use kkt::{
    extract_errors, solve_kkt, GuessMode, JacobianMode, KktError, KktSolution, KktSystem,
    NewtonOptions,
};
pub use mat::{LinearError, Mat, Scalar};
pub use problems::{
    controlled_motion, evaluate_cost, exact_reference, problem_by_name, rayleigh,
    shooting_reference, wave, BvpProblem, ProblemError, Provenance, ReferenceTrajectory,
};
pub use stability::StabilityReport;
pub use triplets::{builtin_names, load_triplet, parse_triplet, PeerTriplet, TripletError};

/// Unified error type for operations that mix linear algebra, eigenvalue
/// computation, and coefficient handling.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Triplet(#[from] TripletError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Kkt(#[from] kkt::KktError),
}

#[cfg(test)]
pub(crate) mod testutil {
    /// SplitMix64 generator: deterministic, dependency-free randomness for
    /// unit tests.
    pub struct Rng(u64);

    impl Rng {
        pub fn new(seed: u64) -> Self {
            Rng(seed)
        }

        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }

        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            lo + (hi - lo) * u
        }
    }
}
