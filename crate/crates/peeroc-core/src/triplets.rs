//! Peer triplet coefficient sets: special matrices, derivation of the
//! dependent parameters, the built-in methods, and a text format.
//!
//! A triplet bundles a starting method (A0, K0, a, b), a standard method
//! (A, B, K), and an end method (A_N, B_N, K_N) over shared nodes c.
//! Only (c, A, K, A0, K0, A_N, K_N) are stored; everything else is
//! derived:
//!
//!   B_n = (A_n V - K_n V E) P V^{-1},  a = A0 1,  b = A0 c - K0 1,
//!   w = V^{-T} 1,  v = V^{-T} e1,
//!
//! with V the s-column Vandermonde of c, P the Pascal matrix, and E the
//! nilpotent differentiation matrix. Derivations run in exact rational
//! arithmetic whenever every stored entry is rational, so that methods
//! constructed over the rationals keep identically-zero residuals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builtin;
use crate::mat::{LinearError, Mat, Scalar};

#[derive(Debug, Error)]
pub enum TripletError {
    #[error("unknown method name {0:?}")]
    UnknownName(String),
    #[error("malformed document: {0}")]
    Document(#[from] serde_json::Error),
    #[error("field {field}: cannot parse entry {entry:?} as rational or decimal")]
    Entry { field: &'static str, entry: String },
    #[error("field {field}: expected {expected} entries, found {found}")]
    Dimension { field: &'static str, expected: usize, found: usize },
    #[error("nodes must be pairwise distinct")]
    DuplicateNodes,
    #[error("derivation failed: {0}")]
    Linear(#[from] LinearError),
}

/// A coefficient entry: exact rational or a decimal literal.
///
/// Rationals round-trip exactly through the text format; decimals
/// round-trip through the shortest representation of their `f64` value.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactScalar {
    Rational(BigRational),
    Decimal(f64),
}

impl ExactScalar {
    pub fn parse(s: &str, field: &'static str) -> Result<Self, TripletError> {
        let err = || TripletError::Entry { field, entry: s.to_string() };
        if let Some((num, den)) = s.split_once('/') {
            let n = BigInt::from_str(num.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(den.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(ExactScalar::Rational(BigRational::new(n, d)));
        }
        if let Ok(n) = BigInt::from_str(s.trim()) {
            return Ok(ExactScalar::Rational(BigRational::from_integer(n)));
        }
        let v = f64::from_str(s.trim()).map_err(|_| err())?;
        if !v.is_finite() {
            return Err(err());
        }
        Ok(ExactScalar::Decimal(v))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactScalar::Rational(r) => r.to_f64().expect("rational out of f64 range"),
            ExactScalar::Decimal(d) => *d,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactScalar::Rational(r) => Some(r),
            ExactScalar::Decimal(_) => None,
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactScalar::Rational(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            ExactScalar::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            ExactScalar::Decimal(d) => write!(f, "{d}"),
        }
    }
}

/// One member of a triplet written as A Y_n = B Y_{n-1} + h K (stage slopes).
#[derive(Clone, Debug)]
pub struct StageMethod<T> {
    pub a: Mat<T>,
    pub b: Mat<T>,
    pub k: Mat<T>,
}

/// The starting method A0 Y_0 = a y_0 + h b g_0 + h K0 (stage slopes).
#[derive(Clone, Debug)]
pub struct StartMethod<T> {
    pub a0: Mat<T>,
    pub k0: Mat<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

/// All coefficients of one triplet over scalar type `T`.
#[derive(Clone, Debug)]
pub struct TripletCoeffs<T> {
    pub c: Vec<T>,
    pub start: StartMethod<T>,
    pub standard: StageMethod<T>,
    pub end: StageMethod<T>,
    pub w: Vec<T>,
    pub v: Vec<T>,
}

/// A named Peer triplet with float coefficients, plus the exact rational
/// mirror when every stored entry is rational.
pub struct PeerTriplet {
    pub name: String,
    pub s: usize,
    /// Local order of the forward stage equations.
    pub q_forward: usize,
    /// Local order of the adjoint stage equations.
    pub q_adjoint: usize,
    pub coeffs: TripletCoeffs<f64>,
    pub exact: Option<TripletCoeffs<BigRational>>,
    doc: TripletDoc,
}

impl fmt::Debug for PeerTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeerTriplet")
            .field("name", &self.name)
            .field("s", &self.s)
            .field("q_forward", &self.q_forward)
            .field("q_adjoint", &self.q_adjoint)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct TripletDoc {
    name: String,
    s: usize,
    q1: usize,
    q2: usize,
    c: Vec<String>,
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
    #[serde(rename = "K")]
    k: Vec<Vec<String>>,
    #[serde(rename = "A0")]
    a0: Vec<Vec<String>>,
    #[serde(rename = "K0")]
    k0: Vec<Vec<String>>,
    #[serde(rename = "AN")]
    an: Vec<Vec<String>>,
    #[serde(rename = "KN")]
    kn: Vec<Vec<String>>,
}

/// Names of the built-in triplets, in presentation order.
pub fn builtin_names() -> Vec<&'static str> {
    builtin::ALL.iter().map(|(n, _)| *n).collect()
}

/// Load a built-in triplet by name.
pub fn load_triplet(name: &str) -> Result<PeerTriplet, TripletError> {
    for (n, text) in builtin::ALL {
        if n == name {
            return parse_triplet(text);
        }
    }
    Err(TripletError::UnknownName(name.to_string()))
}

/// Parse a triplet document, deriving all dependent parameters.
pub fn parse_triplet(text: &str) -> Result<PeerTriplet, TripletError> {
    let doc: TripletDoc = serde_json::from_str(text)?;
    let s = doc.s;
    let c = parse_vec(&doc.c, "c", s)?;
    let a = parse_mat(&doc.a, "A", s)?;
    let k = parse_mat(&doc.k, "K", s)?;
    let a0 = parse_mat(&doc.a0, "A0", s)?;
    let k0 = parse_mat(&doc.k0, "K0", s)?;
    let an = parse_mat(&doc.an, "AN", s)?;
    let kn = parse_mat(&doc.kn, "KN", s)?;
    for i in 0..s {
        for j in 0..i {
            if c[i] == c[j] {
                return Err(TripletError::DuplicateNodes);
            }
        }
    }

    let all_rational = c
        .iter()
        .chain(a.iter())
        .chain(k.iter())
        .chain(a0.iter())
        .chain(k0.iter())
        .chain(an.iter())
        .chain(kn.iter())
        .all(|e| e.as_rational().is_some());

    let to_f64 = |v: &[ExactScalar]| -> Vec<f64> { v.iter().map(ExactScalar::to_f64).collect() };
    let mat_f64 = |v: &[ExactScalar]| Mat::from_fn(s, s, |i, j| v[i * s + j].to_f64());
    let coeffs = derive_all(
        to_f64(&c),
        mat_f64(&a0),
        mat_f64(&k0),
        mat_f64(&a),
        mat_f64(&k),
        mat_f64(&an),
        mat_f64(&kn),
    )?;

    let exact = if all_rational {
        let to_rat = |v: &[ExactScalar]| -> Vec<BigRational> {
            v.iter().map(|e| e.as_rational().unwrap().clone()).collect()
        };
        let mat_rat =
            |v: &[ExactScalar]| Mat::from_fn(s, s, |i, j| v[i * s + j].as_rational().unwrap().clone());
        Some(derive_all(
            to_rat(&c),
            mat_rat(&a0),
            mat_rat(&k0),
            mat_rat(&a),
            mat_rat(&k),
            mat_rat(&an),
            mat_rat(&kn),
        )?)
    } else {
        None
    };

    Ok(PeerTriplet {
        name: doc.name.clone(),
        s,
        q_forward: doc.q1,
        q_adjoint: doc.q2,
        coeffs,
        exact,
        doc,
    })
}

/// Serialize a triplet back to its text document. Derived fields are
/// recomputed on parse, never stored.
pub fn triplet_to_text(t: &PeerTriplet) -> String {
    serde_json::to_string_pretty(&t.doc).expect("document serialization cannot fail")
}

fn parse_vec(src: &[String], field: &'static str, s: usize) -> Result<Vec<ExactScalar>, TripletError> {
    if src.len() != s {
        return Err(TripletError::Dimension { field, expected: s, found: src.len() });
    }
    src.iter().map(|e| ExactScalar::parse(e, field)).collect()
}

fn parse_mat(
    src: &[Vec<String>],
    field: &'static str,
    s: usize,
) -> Result<Vec<ExactScalar>, TripletError> {
    if src.len() != s {
        return Err(TripletError::Dimension { field, expected: s, found: src.len() });
    }
    let mut out = Vec::with_capacity(s * s);
    for row in src {
        if row.len() != s {
            return Err(TripletError::Dimension { field, expected: s, found: row.len() });
        }
        for e in row {
            out.push(ExactScalar::parse(e, field)?);
        }
    }
    Ok(out)
}

fn derive_all<T: Scalar + FromPrimitive>(
    c: Vec<T>,
    a0: Mat<T>,
    k0: Mat<T>,
    a: Mat<T>,
    k: Mat<T>,
    an: Mat<T>,
    kn: Mat<T>,
) -> Result<TripletCoeffs<T>, TripletError> {
    let b = derive_b(&a, &k, &c)?;
    let bn = derive_b(&an, &kn, &c)?;
    let (sa, sb) = derive_start_vectors(&a0, &k0, &c);
    let (w, v) = derive_output_vectors(&c)?;
    Ok(TripletCoeffs {
        c,
        start: StartMethod { a0, k0, a: sa, b: sb },
        standard: StageMethod { a, b, k },
        end: StageMethod { a: an, b: bn, k: kn },
        w,
        v,
    })
}

/// Vandermonde matrix with q columns: column j is c elementwise to the
/// power j (zero-based), so column 0 is all ones.
pub fn vandermonde<T: Scalar>(c: &[T], q: usize) -> Mat<T> {
    Mat::from_fn(c.len(), q, |i, j| {
        let mut p = T::one();
        for _ in 0..j {
            p = p * c[i].clone();
        }
        p
    })
}

/// Pascal matrix: entry (i, j) is binomial(j, i) (zero-based), upper
/// triangular with unit diagonal.
pub fn pascal<T: Scalar + FromPrimitive>(q: usize) -> Mat<T> {
    let mut binom = vec![vec![0u64; q]; q];
    for j in 0..q {
        binom[0][j] = 1;
        for i in 1..=j {
            binom[i][j] = binom[i - 1][j - 1] + if i <= j - 1 { binom[i][j - 1] } else { 0 };
        }
    }
    Mat::from_fn(q, q, |i, j| T::from_u64(binom[i][j]).unwrap())
}

/// Nilpotent differentiation matrix: entry (i, i+1) = i+1 (zero-based),
/// the image of d/dx on the monomial basis. Satisfies pascal = exp(E).
pub fn nilpotent_shift<T: Scalar + FromPrimitive>(q: usize) -> Mat<T> {
    Mat::from_fn(q, q, |i, j| {
        if j == i + 1 {
            T::from_usize(j).unwrap()
        } else {
            T::zero()
        }
    })
}

/// Derive the propagation matrix B from (A, K, c):
/// B = (A V - K V E) P V^{-1}.
pub fn derive_b<T: Scalar + FromPrimitive>(
    a: &Mat<T>,
    k: &Mat<T>,
    c: &[T],
) -> Result<Mat<T>, LinearError> {
    let s = c.len();
    let v = vandermonde(c, s);
    let e = nilpotent_shift::<T>(s);
    let p = pascal::<T>(s);
    let lhs = &(&(a * &v) - &(k * &(&v * &e))) * &p;
    // Solve X V = lhs via V^T X^T = lhs^T.
    let xt = v.transpose().solve(&lhs.transpose())?;
    Ok(xt.transpose())
}

/// Starting vectors a = A0 1 and b = A0 c - K0 1.
pub fn derive_start_vectors<T: Scalar>(a0: &Mat<T>, k0: &Mat<T>, c: &[T]) -> (Vec<T>, Vec<T>) {
    let s = c.len();
    let ones = vec![T::one(); s];
    let a = a0.matvec(&ones);
    let a0c = a0.matvec(c);
    let k01 = k0.matvec(&ones);
    let b = a0c.into_iter().zip(k01).map(|(x, y)| x - y).collect();
    (a, b)
}

/// Output vectors w, v solving V^T w = 1 and V^T v = e1; they read the
/// step solution y(t_{n+1}) and the adjoint value p(t_n) off the stages.
pub fn derive_output_vectors<T: Scalar>(c: &[T]) -> Result<(Vec<T>, Vec<T>), LinearError> {
    let s = c.len();
    let vt = vandermonde(c, s).transpose();
    let ones = Mat::from_fn(s, 1, |_, _| T::one());
    let e1 = Mat::from_fn(s, 1, |i, _| if i == 0 { T::one() } else { T::zero() });
    let w = vt.solve(&ones)?;
    let v = vt.solve(&e1)?;
    Ok((w.col(0), v.col(0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn quarter_nodes() -> Vec<BigRational> {
        vec![rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)]
    }

    #[test]
    fn vandermonde_first_columns() {
        let v = vandermonde(&quarter_nodes(), 2);
        for i in 0..4 {
            assert_eq!(v[(i, 0)], rat(1, 1));
        }
        assert_eq!(v[(1, 1)], rat(1, 2));
        assert_eq!(v[(3, 1)], rat(1, 1));

        let single = vandermonde(&[rat(0, 1)], 3);
        assert_eq!(single.row(0), &[rat(1, 1), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn vandermonde_determinant_quarter_grid() {
        // Product of pairwise node differences for c = (1/4, 1/2, 3/4, 1).
        let v = vandermonde(&quarter_nodes(), 4);
        assert_eq!(v.det(), rat(3, 1024));
    }

    #[test]
    fn pascal_matches_binomials() {
        let p = pascal::<BigRational>(3);
        let expect = Mat::from_rows(vec![
            vec![rat(1, 1), rat(1, 1), rat(1, 1)],
            vec![rat(0, 1), rat(1, 1), rat(2, 1)],
            vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        ]);
        assert_eq!(p, expect);

        // Column sums are powers of two.
        let p4 = pascal::<BigRational>(4);
        let ones = vec![rat(1, 1); 4];
        let sums = p4.transpose().matvec(&ones);
        assert_eq!(sums, vec![rat(1, 1), rat(2, 1), rat(4, 1), rat(8, 1)]);
    }

    #[test]
    fn shift_commutes_with_pascal() {
        let e = nilpotent_shift::<BigRational>(3);
        let p = pascal::<BigRational>(3);
        assert_eq!(&e * &p, &p * &e);
    }

    #[test]
    fn pascal_is_exponential_of_shift() {
        // exp(E) terminates: sum E^k / k! for k < q.
        let q = 5;
        let e = nilpotent_shift::<BigRational>(q);
        let mut term = Mat::<BigRational>::identity(q);
        let mut sum = Mat::<BigRational>::zeros(q, q);
        for kf in 0..q {
            sum = &sum + &term;
            let factor = rat(1, (kf + 1) as i64);
            term = (&term * &e).scale(&factor);
        }
        assert_eq!(sum, pascal::<BigRational>(q));
    }

    #[test]
    fn output_vectors_interpolate_powers() {
        let (w, v) = derive_output_vectors(&quarter_nodes()).unwrap();
        // w = e4 for these nodes since c_4 = 1.
        assert_eq!(w, vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)]);
        // v^T c^k = [k = 0]
        let c = quarter_nodes();
        for k in 0..4 {
            let mut acc = rat(0, 1);
            for i in 0..4 {
                let mut p = rat(1, 1);
                for _ in 0..k {
                    p = p * c[i].clone();
                }
                acc = acc + v[i].clone() * p;
            }
            assert_eq!(acc, if k == 0 { rat(1, 1) } else { rat(0, 1) });
        }
    }

    #[test]
    fn degenerate_a_gives_zero_b() {
        // A = K V E V^{-1} forces B = 0.
        let c = quarter_nodes();
        let v = vandermonde(&c, 4);
        let e = nilpotent_shift::<BigRational>(4);
        let k = Mat::<BigRational>::identity(4);
        let ve = &v * &e;
        let a_t = v.transpose().solve(&ve.transpose()).unwrap();
        let a = a_t.transpose();
        let b = derive_b(&a, &k, &c).unwrap();
        assert!(b.max_abs().is_zero());
    }

    #[test]
    fn builtin_names_resolve() {
        for name in builtin_names() {
            let t = load_triplet(name).unwrap();
            assert_eq!(t.name, name);
            assert!(t.s == 3 || t.s == 4);
            assert_eq!(t.coeffs.c.len(), t.s);
        }
        assert!(load_triplet("nope").is_err());
    }

    #[test]
    fn bdf_family_loads_rational() {
        let t = load_triplet("AP4o43bdf").unwrap();
        assert!(t.exact.is_some());
        let ex = t.exact.as_ref().unwrap();
        assert_eq!(ex.c, quarter_nodes());
        for i in 0..4 {
            assert_eq!(ex.standard.k[(i, i)], rat(1, 4));
        }
    }

    #[test]
    fn three_stage_loads_rational() {
        let t = load_triplet("AP3o32f").unwrap();
        let ex = t.exact.as_ref().expect("all entries rational");
        assert_eq!(ex.standard.k[(0, 0)], rat(-93, 50));
        assert_eq!(ex.standard.k[(1, 1)], rat(44, 25));
        assert_eq!(ex.standard.k[(2, 2)], rat(11, 10));
        assert_eq!(t.q_forward, 3);
        assert_eq!(t.q_adjoint, 2);
    }

    #[test]
    fn singly_implicit_diagonal_ratio() {
        // diag(K^{-1} A) is constant and solves the stored cubic.
        let t = load_triplet("AP4o43sil").unwrap();
        let std = &t.coeffs.standard;
        let theta = 3.34552931287687520_f64;
        for i in 0..4 {
            let ratio = std.a[(i, i)] / std.k[(i, i)];
            assert!((ratio - theta).abs() < 1e-13, "stage {i}: {ratio}");
        }
        let p = 112673616.0 * theta.powi(3) + 106686908.0 * theta.powi(2)
            - 2102637319.0 * theta
            + 1621264295.0;
        let scale = 2102637319.0 * theta;
        assert!((p / scale).abs() < 1e-6);
    }

    #[test]
    fn text_roundtrip_is_identity() {
        for name in builtin_names() {
            let t = load_triplet(name).unwrap();
            let text = triplet_to_text(&t);
            let t2 = parse_triplet(&text).unwrap();
            assert_eq!(t.name, t2.name);
            assert_eq!(t.coeffs.standard.b.max_abs(), t2.coeffs.standard.b.max_abs());
            for i in 0..t.s {
                assert_eq!(t.coeffs.c[i], t2.coeffs.c[i]);
                assert_eq!(t.coeffs.w[i], t2.coeffs.w[i]);
                for j in 0..t.s {
                    assert_eq!(t.coeffs.standard.a[(i, j)], t2.coeffs.standard.a[(i, j)]);
                    assert_eq!(t.coeffs.end.k[(i, j)], t2.coeffs.end.k[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let t = load_triplet("AP3o32f").unwrap();
        let text = triplet_to_text(&t).replace("\"s\": 3", "\"s\": 4");
        match parse_triplet(&text) {
            Err(TripletError::Dimension { .. }) => {}
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn rational_entry_parses_exactly() {
        let e = ExactScalar::parse("41/85", "c").unwrap();
        assert_eq!(e.as_rational(), Some(&rat(41, 85)));
        assert_eq!(e.to_string(), "41/85");
        let d = ExactScalar::parse("3.34552931287687520", "A").unwrap();
        assert!(d.as_rational().is_none());
        let rt = ExactScalar::parse(&d.to_string(), "A").unwrap();
        assert_eq!(d, rt);
    }

    #[test]
    fn implicit_diagonal_products_positive() {
        // a_ii * k_ii > 0 for the standard member of every built-in.
        for name in builtin_names() {
            let t = load_triplet(name).unwrap();
            let std = &t.coeffs.standard;
            for i in 0..t.s {
                assert!(std.a[(i, i)] * std.k[(i, i)] > 0.0, "{name} stage {i}");
            }
        }
    }
}
