//! Randomized invariants of the solver stack: Jacobian consistency,
//! exact affinity of the adjoint source, locus symmetry, and Newton
//! convergence guarantees on the linear problem.

use peeroc_core::convergence::default_guess;
use peeroc_core::kkt::{solve_kkt, JacobianMode, KktSolution, KktSystem, NewtonOptions};
use peeroc_core::problems::{controlled_motion, rayleigh, wave, BvpProblem};
use peeroc_core::stability::boundary_locus;
use peeroc_core::triplets::{builtin_names, load_triplet};
use proptest::prelude::*;
use proptest::sample::select;

fn pick_problem(which: usize) -> BvpProblem {
    match which {
        0 => rayleigh(),
        1 => controlled_motion(1.0, 10.0, [1.0, 0.0]),
        _ => wave(1.0),
    }
}

/// Unknown vector in module layout: forward stages then adjoint stages,
/// step-major, stage-major.
fn flatten(sol: &KktSolution) -> Vec<f64> {
    let mut z = Vec::new();
    for yn in &sol.stage_y {
        for yj in yn {
            z.extend_from_slice(yj);
        }
    }
    for pn in &sol.stage_p {
        for pj in pn {
            z.extend_from_slice(pj);
        }
    }
    z
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn analytic_jacobian_entries_stay_within_the_difference_gate(
        name in select(builtin_names()),
        which in 0usize..3,
        n_last in 2usize..5,
        noise in prop::collection::vec(-0.4f64..0.4, 200),
    ) {
        let trip = load_triplet(name).unwrap();
        let prob = pick_problem(which);
        let sys = KktSystem::new(&trip, &prob, n_last);
        let mut z = sys.initial_guess(&peeroc_core::kkt::GuessMode::Constant);
        for (v, d) in z.iter_mut().zip(&noise) {
            *v += *d;
        }
        let ja = sys.assemble_jacobian(&z, JacobianMode::Analytic).unwrap();
        let jf = sys.assemble_jacobian(&z, JacobianMode::FiniteDifference).unwrap();
        for r in 0..z.len() {
            for c in 0..z.len() {
                let diff = (ja[(r, c)] - jf[(r, c)]).abs();
                prop_assert!(
                    diff < 1e-6 * (1.0 + ja[(r, c)].abs()),
                    "{name} problem {which} entry ({r},{c}): {} vs {}",
                    ja[(r, c)], jf[(r, c)]
                );
            }
        }
    }
}

proptest! {
    // Inputs on a bounded fixed-point grid (multiples of 2^-20): every
    // intermediate sum below is exactly representable, so the doubling
    // defect must cancel to zero bitwise, not merely to rounding size.
    #[test]
    fn adjoint_source_is_exactly_affine_in_the_adjoint_argument(
        which in 0usize..3,
        yi in prop::collection::vec(-(32i64 << 20)..(32i64 << 20), 2),
        pi in prop::collection::vec(-(32i64 << 20)..(32i64 << 20), 2),
    ) {
        let scale = 1.0 / (1u64 << 20) as f64;
        let y: Vec<f64> = yi.iter().map(|&i| i as f64 * scale).collect();
        let p: Vec<f64> = pi.iter().map(|&i| i as f64 * scale).collect();
        let p2: Vec<f64> = p.iter().map(|v| 2.0 * v).collect();
        let zero = vec![0.0; 2];
        let prob = pick_problem(which);
        let fa = prob.phi(&y, &p2);
        let fb = prob.phi(&y, &p);
        let fc = prob.phi(&y, &zero);
        for k in 0..2 {
            let defect = fa[k] - 2.0 * fb[k] + fc[k];
            prop_assert!(defect == 0.0, "component {k}: defect {defect:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn boundary_locus_is_conjugate_symmetric(
        name in select(builtin_names()),
        samples in select(vec![120usize, 360]),
    ) {
        let trip = load_triplet(name).unwrap();
        let st = &trip.coeffs.standard;
        let locus = boundary_locus(&st.a, &st.b, &st.k, samples).unwrap();
        for k in 1..samples {
            let (s1, s2) = (&locus[k].z, &locus[samples - k].z);
            for z in s1 {
                let best = s2
                    .iter()
                    .map(|w| (w.conj() - z).norm())
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(
                    best < 1e-7 * (1.0 + z.norm()),
                    "{name}: root {z} at sample {k} has no conjugate partner (gap {best:e})"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn converged_solves_satisfy_their_tolerance(
        name in select(builtin_names()),
        which in 0usize..3,
        n in select(vec![10usize, 20, 40]),
        tol in select(vec![1e-8f64, 1e-10]),
    ) {
        let trip = load_triplet(name).unwrap();
        let prob = pick_problem(which);
        let opts = NewtonOptions {
            tolerance: tol,
            guess: default_guess(&prob),
            ..NewtonOptions::default()
        };
        // Coarse failures are legitimate; the property binds converged runs.
        if let Ok(sol) = solve_kkt(&trip, &prob, n - 1, &opts) {
            prop_assert!(sol.converged);
            prop_assert!(sol.residual_norm <= tol);
            let sys = KktSystem::new(&trip, &prob, n - 1);
            let res = sys.assemble_residual(&flatten(&sol)).unwrap();
            let rn = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            prop_assert!(rn <= tol, "{name} problem {which} N+1={n}: reassembled {rn:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn linear_dynamics_need_at_most_two_newton_iterations(
        name in select(builtin_names()),
        n in select(vec![20usize, 40, 80]),
        kappa in select(vec![1.0f64, 4.0]),
    ) {
        let trip = load_triplet(name).unwrap();
        let prob = wave(kappa);
        let sol = solve_kkt(&trip, &prob, n - 1, &NewtonOptions::default()).unwrap();
        prop_assert!(sol.iterations <= 2, "{name} at N+1={n}: {} iterations", sol.iterations);
        prop_assert!(sol.residual_norm <= 1e-12);
    }
}
