//! Algebraic order and solvability conditions for peer triplets.
//!
//! Every check is phrased as a residual that must vanish. Residuals are
//! evaluated in exact rational arithmetic whenever the triplet stores rational
//! coefficients, otherwise in f64. The aggregate report also carries the
//! error constant and the stability indicators.

use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};

use crate::mat::{dot, Mat, Scalar};
use crate::stability::{stability_report, StabilityReport};
use crate::triplets::{nilpotent_shift, pascal, vandermonde, PeerTriplet, StageMethod, TripletCoeffs};
use crate::CoreError;

/// Residual of a single algebraic condition.
///
/// `pass` holds exactly when `max_abs <= tol`. `exact` marks evaluation in
/// rational arithmetic; for such conditions a true zero is reported as 0.0.
/// Non-gating entries are informational and do not enter the aggregate flag.
#[derive(Debug, Clone)]
pub struct ConditionResidual {
    pub id: &'static str,
    pub values: Vec<f64>,
    pub max_abs: f64,
    pub tol: f64,
    pub pass: bool,
    pub exact: bool,
    pub gating: bool,
}

/// Full verification record for one triplet: every condition residual, the
/// error constant of the standard method, and all stability indicators.
#[derive(Debug, Clone)]
pub struct MethodReport {
    pub name: String,
    pub conditions: Vec<ConditionResidual>,
    pub err_s: f64,
    pub stability: StabilityReport,
    pub pass: bool,
}

impl MethodReport {
    pub fn condition(&self, id: &str) -> Option<&ConditionResidual> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardPart {
    Start,
    Standard,
    End,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointPart {
    Interpolation,
    Start,
    Standard,
    /// Standard stage condition of the last interior step, which propagates
    /// from the end method's coefficient matrix instead of the standard one.
    LastInterior,
    End,
}

fn ones<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

fn unit<T: Scalar>(n: usize, k: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[k] = T::one();
    e
}

fn powv<T: Scalar>(c: &[T], k: usize) -> Vec<T> {
    c.iter()
        .map(|x| {
            let mut p = T::one();
            for _ in 0..k {
                p = p * x.clone();
            }
            p
        })
        .collect()
}

fn shiftv<T: Scalar>(c: &[T], up: bool) -> Vec<T> {
    c.iter()
        .map(|x| {
            if up {
                x.clone() + T::one()
            } else {
                x.clone() - T::one()
            }
        })
        .collect()
}

fn outer<T: Scalar>(u: &[T], v: &[T]) -> Mat<T> {
    Mat::from_fn(u.len(), v.len(), |i, j| u[i].clone() * v[j].clone())
}

fn flat<T: Scalar>(m: &Mat<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].clone());
        }
    }
    out
}

fn is_diagonal<T: Scalar>(m: &Mat<T>) -> bool {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && !m[(i, j)].is_zero() {
                return false;
            }
        }
    }
    true
}

/// Inverse of the lower-triangular pascal matrix: the same binomials with
/// alternating signs. Right-multiplying a node Vandermonde matrix by it
/// re-expands the polynomial basis around the previous grid point.
pub fn pascal_inverse<T: Scalar + FromPrimitive>(q: usize) -> Mat<T> {
    let p: Mat<T> = pascal(q);
    Mat::from_fn(q, q, |i, j| {
        if (i + j) % 2 == 0 {
            p[(i, j)].clone()
        } else {
            -p[(i, j)].clone()
        }
    })
}

/// Residual of the forward (state) stage order conditions up to degree q1 - 1.
pub fn forward_order_residual<T: Scalar + FromPrimitive>(
    part: ForwardPart,
    co: &TripletCoeffs<T>,
    q1: usize,
) -> Mat<T> {
    let v = vandermonde(&co.c, q1);
    let e = nilpotent_shift::<T>(q1);
    match part {
        ForwardPart::Start => {
            let t1 = &co.start.a0 * &v;
            let t2 = outer(&co.start.a, &unit(q1, 0));
            let t3 = outer(&co.start.b, &unit(q1, 1));
            let t4 = &co.start.k0 * &(&v * &e);
            &(&(&t1 - &t2) - &t3) - &t4
        }
        ForwardPart::Standard | ForwardPart::End => {
            let m = if part == ForwardPart::Standard {
                &co.standard
            } else {
                &co.end
            };
            let pinv = pascal_inverse::<T>(q1);
            let t1 = &m.a * &v;
            let t2 = &m.b * &(&v * &pinv);
            let t3 = &m.k * &(&v * &e);
            &(&t1 - &t2) - &t3
        }
        ForwardPart::Output => Mat::from_fn(1, q1, |_, j| dot(&co.w, &v.col(j)) - T::one()),
    }
}

/// Residual of the adjoint stage order conditions up to degree q2 - 1.
/// Boundary matrices enter transposed; this matches the diagonal form
/// whenever the weight matrix is diagonal.
pub fn adjoint_order_residual<T: Scalar + FromPrimitive>(
    part: AdjointPart,
    co: &TripletCoeffs<T>,
    q2: usize,
) -> Mat<T> {
    let v = vandermonde(&co.c, q2);
    let p = pascal::<T>(q2);
    let e = nilpotent_shift::<T>(q2);
    let transposed = |am: &Mat<T>, bm: &Mat<T>, km: &Mat<T>| {
        let t1 = &am.transpose() * &v;
        let t2 = &bm.transpose() * &(&v * &p);
        let t3 = &km.transpose() * &(&v * &e);
        &(&t1 - &t2) + &t3
    };
    match part {
        AdjointPart::Interpolation => Mat::from_fn(1, q2, |_, j| {
            let target = if j == 0 { T::one() } else { T::zero() };
            dot(&co.v, &v.col(j)) - target
        }),
        AdjointPart::Start => transposed(&co.start.a0, &co.standard.b, &co.start.k0),
        AdjointPart::Standard => transposed(&co.standard.a, &co.standard.b, &co.standard.k),
        AdjointPart::LastInterior => transposed(&co.standard.a, &co.end.b, &co.standard.k),
        AdjointPart::End => {
            let t1 = &co.end.a.transpose() * &v;
            let t2 = &co.end.k.transpose() * &(&v * &e);
            let t3 = outer(&co.w, &ones(q2));
            &(&t1 + &t2) - &t3
        }
    }
}

/// End adjoint condition with the weight matrix left untransposed. For full
/// end weight matrices this differs from the transposed form and does not
/// vanish; it is reported for information only.
pub fn adjoint_end_untransposed_residual<T: Scalar + FromPrimitive>(
    co: &TripletCoeffs<T>,
    q2: usize,
) -> Mat<T> {
    let v = vandermonde(&co.c, q2);
    let e = nilpotent_shift::<T>(q2);
    let t1 = &co.end.a.transpose() * &v;
    let t2 = &co.end.k * &(&v * &e);
    let t3 = outer(&co.w, &ones(q2));
    &(&t1 + &t2) - &t3
}

/// One-leg coupling condition for a boundary weight matrix. Component j sums
/// (c_i - c_j) * k_ij down column j; diagonal matrices satisfy it trivially.
/// The column orientation is the one that vanishes for all built-in boundary
/// matrices; a regression test pins it.
pub fn one_leg_residual<T: Scalar>(k_beta: &Mat<T>, c: &[T]) -> Vec<T> {
    let s = c.len();
    (0..s)
        .map(|j| {
            let mut acc = T::zero();
            for i in 0..s {
                acc = acc + (c[i].clone() - c[j].clone()) * k_beta[(i, j)].clone();
            }
            acc
        })
        .collect()
}

/// Scalar residual pair whose vanishing lifts the global order of the
/// standard method from s to s despite local order s (left eigenvector
/// annihilation of the leading error term), for state and adjoint.
pub fn superconvergence_residuals<T: Scalar + FromPrimitive>(
    std_m: &StageMethod<T>,
    c: &[T],
    s: usize,
) -> (T, T) {
    assert!(s >= 2, "superconvergence needs at least two stages");
    let sf = T::from_usize(s).expect("stage count fits");
    let sf1 = T::from_usize(s - 1).expect("stage count fits");
    let a_cs = std_m.a.matvec(&powv(c, s));
    let b_cm = std_m.b.matvec(&powv(&shiftv(c, false), s));
    let k_ck = std_m.k.matvec(&powv(c, s - 1));
    let mut r1 = T::zero();
    for i in 0..c.len() {
        r1 = r1 + a_cs[i].clone() - b_cm[i].clone() - sf.clone() * k_ck[i].clone();
    }
    let at_cs = std_m.a.transpose().matvec(&powv(c, s - 1));
    let bt_cp = std_m.b.transpose().matvec(&powv(&shiftv(c, true), s - 1));
    let k_ck2 = std_m.k.matvec(&powv(c, s - 2));
    let mut r2 = T::zero();
    for i in 0..c.len() {
        r2 = r2 + at_cs[i].clone() - bt_cp[i].clone() + sf1.clone() * k_ck2[i].clone();
    }
    (r1, r2)
}

/// Moment compatibility residuals of the standard coefficient matrix:
/// normalization, first moment, second moment. Three-stage methods only
/// need the first two; the second moment is reported but not gated there.
pub fn compatibility_residuals<T: Scalar + FromPrimitive>(a: &Mat<T>, c: &[T]) -> [T; 3] {
    let one = ones(c.len());
    let a1 = a.matvec(&one);
    let ac = a.matvec(c);
    let ac2 = a.matvec(&powv(c, 2));
    let two = T::one() + T::one();
    let r1 = dot(&one, &a1) - T::one();
    let r2 = dot(&one, &ac) - dot(c, &a1) - T::one();
    let r3 = dot(&one, &ac2) - two * dot(c, &ac) + dot(&powv(c, 2), &a1);
    [r1, r2, r3]
}

/// Leading error constant of the standard method: the scaled max-norm of the
/// defect of the degree-s monomial.
pub fn error_constant<T: Scalar + FromPrimitive>(
    std_m: &StageMethod<T>,
    c: &[T],
    s: usize,
) -> Result<T, CoreError> {
    let sf = T::from_usize(s).expect("stage count fits");
    let a_cs = std_m.a.matvec(&powv(c, s));
    let b_cm = std_m.b.matvec(&powv(&shiftv(c, false), s));
    let k_ck = std_m.k.matvec(&powv(c, s - 1));
    let rhs: Vec<T> = (0..c.len())
        .map(|i| a_cs[i].clone() - b_cm[i].clone() - sf.clone() * k_ck[i].clone())
        .collect();
    let x = std_m.a.solve(&Mat::column(&rhs))?;
    let mut m = T::zero();
    for i in 0..c.len() {
        let ai = x[(i, 0)].abs();
        if ai > m {
            m = ai;
        }
    }
    let mut fact = T::one();
    for k in 2..=s {
        fact = fact * T::from_usize(k).expect("factorial term fits");
    }
    Ok(m / fact)
}

/// Combined forward/adjoint Sylvester identity of the standard method for
/// orders (q1, q2); holds whenever both stage order condition sets hold.
pub fn sylvester_residual<T: Scalar + FromPrimitive>(
    std_m: &StageMethod<T>,
    c: &[T],
    q1: usize,
    q2: usize,
) -> Mat<T> {
    let v1 = vandermonde(c, q1);
    let v2 = vandermonde(c, q2);
    let v1p = &v1 * &pascal::<T>(q1);
    let v2p = &v2 * &pascal::<T>(q2);
    let e1 = nilpotent_shift::<T>(q1);
    let e2 = nilpotent_shift::<T>(q2);
    let lhs = &(&v2p.transpose() * &(&std_m.a * &v1p)) - &(&v2.transpose() * &(&std_m.a * &v1));
    let rhs = &(&v2p.transpose() * &(&std_m.k * &(&v1p * &e1)))
        + &(&(&v2 * &e2).transpose() * &(&std_m.k * &v1));
    &lhs - &rhs
}

/// Necessary condition for solvability of the end method's order system
/// (only the four-stage, order-three adjoint case arises). Returns the
/// defect of the structured Sylvester-type equation plus the three Fredholm
/// pairings of its right-hand side against the kernel basis of the adjoint
/// operator; the pairings restate the moment compatibility conditions.
pub fn end_solvability_residual<T: Scalar + FromPrimitive>(
    b: &Mat<T>,
    k_n: &Mat<T>,
    c: &[T],
    q: usize,
    s: usize,
) -> (Mat<T>, Vec<T>) {
    assert!(q == 3 && s == 4, "end solvability analysis covers q = 3, s = 4 only");
    let vq = vandermonde(c, q);
    let vs = vandermonde(c, s);
    let eq = nilpotent_shift::<T>(q);
    let es = nilpotent_shift::<T>(s);
    let x = &vq.transpose() * &(k_n * &vs);
    let lx = &(&eq.transpose() * &x) + &(&x * &es);
    let bv = &vq.transpose() * &(b * &vs);
    let all_ones = outer(&ones(q), &ones(s));
    let resid = &lx - &(&all_ones - &(&bv * &pascal_inverse::<T>(s)));
    let pt_one = pascal::<T>(s).transpose().matvec(&ones(s));
    let r = &outer(&ones(q), &pt_one) - &bv;
    let two = T::one() + T::one();
    let pairings = vec![
        r[(0, 0)].clone(),
        r[(0, 1)].clone() - r[(1, 0)].clone(),
        r[(0, 2)].clone() - two * r[(1, 1)].clone() + r[(2, 0)].clone(),
    ];
    (resid, pairings)
}

/// Necessary condition for solvability of the starting method's order
/// system, restricted to the columns not fixed by preconsistency.
pub fn start_solvability_residual<T: Scalar + FromPrimitive>(
    b: &Mat<T>,
    k0: &Mat<T>,
    c: &[T],
    q: usize,
    s: usize,
) -> Mat<T> {
    let vq = vandermonde(c, q);
    let vs = vandermonde(c, s);
    let eq = nilpotent_shift::<T>(q);
    let es = nilpotent_shift::<T>(s);
    let x0 = &vq.transpose() * &(k0 * &vs);
    let y = &pascal_inverse::<T>(q).transpose() * &x0;
    let l0 = &(&eq.transpose() * &y) + &(&y * &es);
    let resid = &l0 - &(&vq.transpose() * &(b * &vs));
    Mat::from_fn(q, s, |i, j| {
        if j < 2 {
            T::zero()
        } else {
            resid[(i, j)].clone()
        }
    })
}

/// Maximum spread along anti-diagonals of the moment matrix of a stage
/// weight matrix; zero exactly when that matrix is Hankel, which holds for
/// every diagonal weight matrix.
pub fn hankel_defect<T: Scalar + FromPrimitive>(k: &Mat<T>, c: &[T], q: usize, s: usize) -> T {
    let x = &vandermonde(c, q).transpose() * &(k * &vandermonde(c, s));
    let mut defect = T::zero();
    for i in 0..q {
        for j in 0..s {
            for i2 in 0..q {
                for j2 in 0..s {
                    if i + j == i2 + j2 {
                        let d = (x[(i, j)].clone() - x[(i2, j2)].clone()).abs();
                        if d > defect {
                            defect = d;
                        }
                    }
                }
            }
        }
    }
    defect
}

/// Floating tolerance suited to a triplet's coefficient precision: rational
/// data evaluates exactly, and all decimal tables are accurate to 1e-10
/// except the singly-implicit one, whose diagonal parameter is a root printed
/// to finite precision.
pub fn recommended_tolerance(t: &PeerTriplet) -> f64 {
    if t.name == "AP4o43sil" {
        1e-8
    } else {
        1e-10
    }
}

fn rational_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

type Schedule<T> = Vec<(&'static str, Vec<T>, bool)>;

fn schedule<T: Scalar + FromPrimitive>(
    co: &TripletCoeffs<T>,
    s: usize,
    q1: usize,
    q2: usize,
) -> Schedule<T> {
    let c = &co.c;
    let mut out: Schedule<T> = Vec::new();
    out.push((
        "forward-start",
        flat(&forward_order_residual(ForwardPart::Start, co, q1)),
        true,
    ));
    out.push((
        "forward-standard",
        flat(&forward_order_residual(ForwardPart::Standard, co, q1)),
        true,
    ));
    out.push((
        "forward-end",
        flat(&forward_order_residual(ForwardPart::End, co, q1)),
        true,
    ));
    out.push((
        "forward-output",
        flat(&forward_order_residual(ForwardPart::Output, co, q1)),
        true,
    ));
    out.push((
        "adjoint-interpolation",
        flat(&adjoint_order_residual(AdjointPart::Interpolation, co, q2)),
        true,
    ));
    out.push((
        "adjoint-start",
        flat(&adjoint_order_residual(AdjointPart::Start, co, q2)),
        true,
    ));
    out.push((
        "adjoint-standard",
        flat(&adjoint_order_residual(AdjointPart::Standard, co, q2)),
        true,
    ));
    out.push((
        "adjoint-last-interior",
        flat(&adjoint_order_residual(AdjointPart::LastInterior, co, q2)),
        true,
    ));
    out.push((
        "adjoint-end",
        flat(&adjoint_order_residual(AdjointPart::End, co, q2)),
        true,
    ));
    out.push((
        "adjoint-end-untransposed",
        flat(&adjoint_end_untransposed_residual(co, q2)),
        false,
    ));
    out.push(("one-leg-start", one_leg_residual(&co.start.k0, c), true));
    out.push(("one-leg-end", one_leg_residual(&co.end.k, c), true));
    let (sup_f, sup_a) = superconvergence_residuals(&co.standard, c, s);
    out.push(("superconvergence-forward", vec![sup_f], true));
    out.push(("superconvergence-adjoint", vec![sup_a], true));
    let [c1, c2, c3] = compatibility_residuals(&co.standard.a, c);
    out.push(("compatibility-normalization", vec![c1], true));
    out.push(("compatibility-first-moment", vec![c2], true));
    out.push(("compatibility-second-moment", vec![c3], s == 4));
    out.push((
        "sylvester-combined",
        flat(&sylvester_residual(&co.standard, c, q1, q2)),
        true,
    ));
    let diag_k = is_diagonal(&co.standard.k);
    out.push((
        "hankel-standard",
        vec![hankel_defect(&co.standard.k, c, q2, s)],
        diag_k,
    ));
    if s == 4 && q2 == 3 {
        let (er, pairings) = end_solvability_residual(&co.standard.b, &co.end.k, c, 3, 4);
        out.push(("end-solvability", flat(&er), true));
        out.push(("end-fredholm-pairings", pairings, true));
    }
    out.push((
        "start-solvability",
        flat(&start_solvability_residual(&co.standard.b, &co.start.k0, c, q2, s)),
        true,
    ));
    out
}

fn build_conditions(raw: Vec<(&'static str, Vec<f64>, bool)>, tol: f64, exact: bool) -> Vec<ConditionResidual> {
    raw.into_iter()
        .map(|(id, values, gating)| {
            let max_abs = values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            ConditionResidual {
                id,
                max_abs,
                tol,
                pass: max_abs <= tol,
                exact,
                gating,
                values,
            }
        })
        .collect()
}

/// Runs the complete condition schedule on a triplet at the given floating
/// tolerance and aggregates the result with the error constant and the
/// stability indicators. Exact-arithmetic triplets are checked exactly; a
/// true zero residual then reports as 0.0 regardless of the tolerance.
/// Evaluates the full condition schedule plus the error constant, without
/// any locus sweep.  Rational coefficient sets are checked in exact
/// arithmetic and marked as such.
pub fn condition_report(
    t: &PeerTriplet,
    tol: f64,
) -> Result<(Vec<ConditionResidual>, f64), CoreError> {
    let (s, q1, q2) = (t.s, t.q_forward, t.q_adjoint);
    match &t.exact {
        Some(co) => {
            let raw = schedule(co, s, q1, q2)
                .into_iter()
                .map(|(id, vals, gating)| {
                    (id, vals.iter().map(rational_f64).collect::<Vec<_>>(), gating)
                })
                .collect();
            let err = error_constant(&co.standard, &co.c, s)?;
            Ok((build_conditions(raw, tol, true), rational_f64(&err)))
        }
        None => {
            let co = &t.coeffs;
            let raw = schedule(co, s, q1, q2);
            let err = error_constant(&co.standard, &co.c, s)?;
            Ok((build_conditions(raw, tol, false), err))
        }
    }
}

pub fn verify_triplet(t: &PeerTriplet, tol: f64) -> Result<MethodReport, CoreError> {
    let (conditions, err_s) = condition_report(t, tol)?;
    let stability = stability_report(t, 3600)?;
    let pass = conditions.iter().filter(|c| c.gating).all(|c| c.pass);
    Ok(MethodReport {
        name: t.name.clone(),
        conditions,
        err_s,
        stability,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triplets::{builtin_names, load_triplet};
    use num_bigint::BigInt;
    use num_traits::Zero;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn exact_coeffs(name: &str) -> TripletCoeffs<BigRational> {
        load_triplet(name).unwrap().exact.expect("rational triplet")
    }

    #[test]
    fn rational_triplets_satisfy_all_gating_conditions_exactly() {
        for name in ["AP4o43bdf", "AP4o43die", "AP3o32f"] {
            let t = load_triplet(name).unwrap();
            let co = t.exact.as_ref().expect("rational triplet");
            for (id, vals, gating) in schedule(co, t.s, t.q_forward, t.q_adjoint) {
                if gating {
                    for v in &vals {
                        assert!(v.is_zero(), "{name}/{id} residual {v} not exactly zero");
                    }
                }
            }
        }
    }

    #[test]
    fn floating_triplets_pass_within_coefficient_precision() {
        for name in builtin_names() {
            let t = load_triplet(name).unwrap();
            let rep = verify_triplet(&t, recommended_tolerance(&t)).unwrap();
            assert!(rep.pass, "{name} failed verification");
            for c in rep.conditions.iter().filter(|c| c.gating) {
                assert!(c.max_abs < 1e-8, "{name}/{} = {}", c.id, c.max_abs);
            }
        }
    }

    #[test]
    fn three_stage_second_moment_is_reported_but_not_gated() {
        let t = load_triplet("AP3o32f").unwrap();
        let rep = verify_triplet(&t, 1e-10).unwrap();
        let c = rep.condition("compatibility-second-moment").unwrap();
        assert!(!c.gating);
        assert!(c.exact);
        assert!((c.max_abs - 0.1263).abs() < 1e-3, "spread {}", c.max_abs);
        assert!(rep.pass);
    }

    #[test]
    fn untransposed_end_form_differs_for_full_end_weights() {
        let t = load_triplet("AP4o43bdf").unwrap();
        let rep = verify_triplet(&t, 1e-10).unwrap();
        let c = rep.condition("adjoint-end-untransposed").unwrap();
        assert!(!c.gating);
        assert!(c.max_abs > 1.0, "expected a visible defect, got {}", c.max_abs);
    }

    #[test]
    fn one_leg_orientation_is_the_column_sum() {
        let co = exact_coeffs("AP4o43bdf");
        for r in one_leg_residual(&co.end.k, &co.c) {
            assert!(r.is_zero());
        }
        let flipped = one_leg_residual(&co.end.k.transpose(), &co.c);
        let max = flipped.iter().map(|x| rational_f64(x).abs()).fold(0.0, f64::max);
        assert!((max - 0.8307).abs() < 1e-3, "row orientation spread {max}");
    }

    #[test]
    fn bdf_standard_method_holds_one_extra_forward_order() {
        let co = exact_coeffs("AP4o43bdf");
        let r = forward_order_residual(ForwardPart::Standard, &co, 5);
        for v in flat(&r) {
            assert!(v.is_zero());
        }
    }

    #[test]
    fn error_constants_match_reported_values() {
        let die = exact_coeffs("AP4o43die");
        let err = error_constant(&die.standard, &die.c, 4).unwrap();
        assert_eq!(err, rat(6_808_179_948, 503_896_186_453));

        let bdf = exact_coeffs("AP4o43bdf");
        let err = error_constant(&bdf.standard, &bdf.c, 4).unwrap();
        assert!(err.is_zero());

        let dif = load_triplet("AP4o43dif").unwrap();
        let err = error_constant(&dif.coeffs.standard, &dif.coeffs.c, 4).unwrap();
        assert!((err - 0.002538737).abs() < 1e-8);
    }

    #[test]
    fn error_constant_is_invariant_under_common_scaling() {
        let co = exact_coeffs("AP4o43die");
        let base = error_constant(&co.standard, &co.c, 4).unwrap();
        let alpha = rat(7, 3);
        let scaled = StageMethod {
            a: co.standard.a.scale(&alpha),
            b: co.standard.b.scale(&alpha),
            k: co.standard.k.scale(&alpha),
        };
        assert_eq!(error_constant(&scaled, &co.c, 4).unwrap(), base);
    }

    #[test]
    fn identity_compatibility_values() {
        let a: Mat<f64> = Mat::identity(4);
        let c = vec![0.0; 4];
        let [r1, r2, r3] = compatibility_residuals(&a, &c);
        assert_eq!((r1, r2, r3), (3.0, -1.0, 0.0));
    }

    #[test]
    fn hankel_defect_flags_off_diagonal_weights() {
        let co = exact_coeffs("AP4o43bdf");
        assert!(hankel_defect(&co.standard.k, &co.c, 3, 4).is_zero());
        let mut k = co.standard.k.clone();
        k[(0, 2)] = rat(1, 1);
        let d = hankel_defect(&k, &co.c, 3, 4);
        assert!(rational_f64(&d) > 0.01);
    }

    #[test]
    fn fredholm_pairing_restates_normalization() {
        let co = exact_coeffs("AP4o43bdf");
        let (_, pairings) = end_solvability_residual(&co.standard.b, &co.end.k, &co.c, 3, 4);
        for p in &pairings {
            assert!(p.is_zero());
        }
        let mut b = co.standard.b.clone();
        b[(0, 0)] = b[(0, 0)].clone() + rat(1, 10);
        let (_, perturbed) = end_solvability_residual(&b, &co.end.k, &co.c, 3, 4);
        assert_eq!(perturbed[0], rat(-1, 10));
    }

    #[test]
    fn output_condition_rejects_a_wrong_weight_vector() {
        let t = load_triplet("AP4o43bdf").unwrap();
        let mut co = t.coeffs.clone();
        co.w = vec![1.0, 0.0, 0.0, 0.0];
        let r = forward_order_residual(ForwardPart::Output, &co, 4);
        assert!(r.max_abs() > 0.1);
    }

    #[test]
    fn sil_tolerance_accounts_for_printed_root_precision() {
        let sil = load_triplet("AP4o43sil").unwrap();
        assert_eq!(recommended_tolerance(&sil), 1e-8);
        let bdf = load_triplet("AP4o43bdf").unwrap();
        assert_eq!(recommended_tolerance(&bdf), 1e-10);
    }
}
