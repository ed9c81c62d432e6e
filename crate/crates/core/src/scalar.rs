//! Scalar backends.
//!
//! Every algebraic construction in the crate is generic over [`Scalar`]. Two
//! backends exist: [`Complex64`] (numeric) and [`RatFunc`] (exact rational
//! functions in `q, u, v, w, x, y`). [`AnyScalar`] is the backend-tagged
//! value used at the JSON/CLI boundary.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::{RatFunc, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Numeric,
    Exact,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Numeric => write!(f, "numeric"),
            Backend::Exact => write!(f, "exact"),
        }
    }
}

/// Below this modulus a numeric divisor is treated as zero.
pub const UNDERFLOW_GUARD: f64 = 1e-300;

/// Outcome of comparing two operator-valued expressions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Residual {
    /// Relative Frobenius residual.
    Numeric(f64),
    ExactZero,
    /// Number of entries that differ.
    ExactNonzero(usize),
}

impl Residual {
    pub fn passes(&self, tol: f64) -> bool {
        match *self {
            Residual::Numeric(r) => r < tol,
            Residual::ExactZero => true,
            Residual::ExactNonzero(_) => false,
        }
    }

    /// Numeric value, with exact outcomes mapped to 0 / +inf.
    pub fn value(&self) -> f64 {
        match *self {
            Residual::Numeric(r) => r,
            Residual::ExactZero => 0.0,
            Residual::ExactNonzero(_) => f64::INFINITY,
        }
    }

    /// The larger of two residuals, treating any exact mismatch as dominant.
    pub fn max(self, other: Residual) -> Residual {
        match (self, other) {
            (Residual::ExactNonzero(a), Residual::ExactNonzero(b)) => Residual::ExactNonzero(a + b),
            (r @ Residual::ExactNonzero(_), _) | (_, r @ Residual::ExactNonzero(_)) => r,
            (Residual::Numeric(a), Residual::Numeric(b)) => Residual::Numeric(a.max(b)),
            (r @ Residual::Numeric(_), Residual::ExactZero)
            | (Residual::ExactZero, r @ Residual::Numeric(_)) => r,
            (Residual::ExactZero, Residual::ExactZero) => Residual::ExactZero,
        }
    }

    pub fn to_json(&self) -> Value {
        match *self {
            Residual::Numeric(r) if r.is_finite() => json!(r),
            Residual::Numeric(_) => json!("non-finite"),
            Residual::ExactZero => json!("exact-zero"),
            Residual::ExactNonzero(k) => json!(format!("exact-nonzero:{k}")),
        }
    }
}

impl Serialize for Residual {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// A field element usable by every construction in the crate.
pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self>;

    /// Structural zero (exact) or bitwise zero (numeric).
    fn is_zero(&self) -> bool;

    /// Pivot preference: larger is better. Numeric: modulus. Exact: favors
    /// short expressions among the nonzero candidates.
    fn magnitude(&self) -> f64;

    /// Whether a pivot candidate should be treated as zero given an absolute
    /// threshold. The exact backend ignores the threshold.
    fn negligible(&self, threshold: f64) -> bool;

    fn equals(&self, rhs: &Self) -> bool;

    fn to_json(&self) -> Value;

    /// Compares two equally sized entry lists. `floor` is a lower bound for
    /// the normalizing scale of the numeric residual.
    fn compare(lhs: &[Self], rhs: &[Self], floor: f64) -> Residual;

    fn inv(&self) -> Result<Self> {
        Self::one().try_div(self)
    }

    fn powi(&self, k: i32) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

impl Scalar for Complex64 {
    const BACKEND: Backend = Backend::Numeric;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.norm() <= UNDERFLOW_GUARD {
            return Err(Error::DivisionByZero);
        }
        Ok(self / rhs)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn negligible(&self, threshold: f64) -> bool {
        self.norm() <= threshold
    }
    fn equals(&self, rhs: &Self) -> bool {
        self == rhs
    }
    fn to_json(&self) -> Value {
        json!({ "re": self.re, "im": self.im })
    }
    fn compare(lhs: &[Self], rhs: &[Self], floor: f64) -> Residual {
        debug_assert_eq!(lhs.len(), rhs.len());
        let (mut d, mut nl, mut nr) = (0.0, 0.0, 0.0);
        for (a, b) in lhs.iter().zip(rhs) {
            d += (a - b).norm_sqr();
            nl += a.norm_sqr();
            nr += b.norm_sqr();
        }
        let scale = nl.sqrt().max(nr.sqrt()).max(floor);
        if scale == 0.0 {
            return Residual::Numeric(0.0);
        }
        Residual::Numeric(d.sqrt() / scale)
    }
}

impl Scalar for RatFunc {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        RatFunc::constant(0)
    }
    fn one() -> Self {
        RatFunc::constant(1)
    }
    fn from_int(n: i64) -> Self {
        RatFunc::constant(n)
    }
    fn add(&self, rhs: &Self) -> Self {
        RatFunc::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        RatFunc::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        RatFunc::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.div(rhs)
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + self.term_count() as f64)
        }
    }
    fn negligible(&self, _threshold: f64) -> bool {
        RatFunc::is_zero(self)
    }
    fn equals(&self, rhs: &Self) -> bool {
        RatFunc::equals(self, rhs)
    }
    fn to_json(&self) -> Value {
        RatFunc::to_json(self)
    }
    fn compare(lhs: &[Self], rhs: &[Self], _floor: f64) -> Residual {
        debug_assert_eq!(lhs.len(), rhs.len());
        let bad = lhs.iter().zip(rhs).filter(|(a, b)| !a.equals(b)).count();
        if bad == 0 {
            Residual::ExactZero
        } else {
            Residual::ExactNonzero(bad)
        }
    }
}

/// The deformation parameter `q` together with its inverse.
///
/// In the exact backend `q^-1` is the monomial `q^-1`; numerically it is `1/q`.
#[derive(Clone, Debug)]
pub struct QParam<S> {
    pub q: S,
    pub q_inv: S,
}

impl<S: Scalar> QParam<S> {
    pub fn new(q: S) -> Result<Self> {
        let q_inv = q.inv()?;
        Ok(QParam { q, q_inv })
    }

    pub fn pow(&self, k: i32) -> S {
        let base = if k < 0 { &self.q_inv } else { &self.q };
        let mut acc = S::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(base);
        }
        acc
    }

    /// `q - q^-1`
    pub fn q_minus_inv(&self) -> S {
        self.q.sub(&self.q_inv)
    }
}

impl QParam<RatFunc> {
    pub fn symbolic() -> Self {
        QParam {
            q: RatFunc::var(Var::Q),
            q_inv: RatFunc::q_pow(-1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A backend-tagged scalar.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyScalar {
    Numeric(Complex64),
    Exact(RatFunc),
}

impl AnyScalar {
    pub fn backend(&self) -> Backend {
        match self {
            AnyScalar::Numeric(_) => Backend::Numeric,
            AnyScalar::Exact(_) => Backend::Exact,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyScalar::Numeric(z) => Scalar::to_json(z),
            AnyScalar::Exact(f) => f.to_json(),
        }
    }
}

fn apply<S: Scalar>(a: &S, b: &S, op: ArithOp) -> Result<S> {
    Ok(match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.try_div(b)?,
    })
}

/// Field operation on tagged scalars; mixing backends is an error.
pub fn arith(a: &AnyScalar, b: &AnyScalar, op: ArithOp) -> Result<AnyScalar> {
    match (a, b) {
        (AnyScalar::Numeric(x), AnyScalar::Numeric(y)) => Ok(AnyScalar::Numeric(apply(x, y, op)?)),
        (AnyScalar::Exact(x), AnyScalar::Exact(y)) => Ok(AnyScalar::Exact(apply(x, y, op)?)),
        _ => Err(Error::BackendMismatch(a.backend(), b.backend())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mismatched_backends_are_rejected() {
        let a = AnyScalar::Numeric(c(1.0, 0.0));
        let b = AnyScalar::Exact(RatFunc::var(Var::Q));
        assert_eq!(
            arith(&a, &b, ArithOp::Add).unwrap_err(),
            Error::BackendMismatch(Backend::Numeric, Backend::Exact)
        );
    }

    #[test]
    fn division_by_zero_both_backends() {
        let z = AnyScalar::Numeric(c(0.0, 0.0));
        let one = AnyScalar::Numeric(c(1.0, 0.0));
        assert_eq!(arith(&one, &z, ArithOp::Div).unwrap_err(), Error::DivisionByZero);
        let q = AnyScalar::Exact(RatFunc::var(Var::Q));
        let zero = AnyScalar::Exact(RatFunc::constant(0));
        assert_eq!(arith(&q, &zero, ArithOp::Div).unwrap_err(), Error::DivisionByZero);
    }

    #[test]
    fn q_minus_q_is_zero() {
        let q = AnyScalar::Exact(RatFunc::var(Var::Q));
        match arith(&q, &q, ArithOp::Sub).unwrap() {
            AnyScalar::Exact(f) => assert!(f.is_zero()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn qparam_powers() {
        let qp = QParam::new(c(2.0, 0.0)).unwrap();
        assert_eq!(qp.pow(-2), c(0.25, 0.0));
        assert_eq!(qp.pow(3), c(8.0, 0.0));
        let qs = QParam::<RatFunc>::symbolic();
        assert!(qs.pow(2).mul(&qs.pow(-2)).equals(&RatFunc::constant(1)));
    }

    #[test]
    fn exact_residual_counts_mismatches() {
        let a = vec![RatFunc::var(Var::X), RatFunc::constant(1)];
        let b = vec![RatFunc::var(Var::X), RatFunc::constant(2)];
        assert_eq!(RatFunc::compare(&a, &a, 0.0), Residual::ExactZero);
        assert_eq!(RatFunc::compare(&a, &b, 0.0), Residual::ExactNonzero(1));
    }

    fn small_ratfunc() -> impl Strategy<Value = RatFunc> {
        let var = prop_oneof![Just(Var::Q), Just(Var::U), Just(Var::X)];
        (var, -3i64..=3, 0i32..3, -2i64..=2).prop_map(|(v, a, k, b)| {
            RatFunc::var(v)
                .powi(k)
                .unwrap()
                .scale_int(a)
                .add(&RatFunc::constant(b))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_field_axioms(a in small_ratfunc(), b in small_ratfunc(), c in small_ratfunc()) {
            prop_assert!(a.mul(&b).mul(&c).equals(&a.mul(&b.mul(&c))));
            prop_assert!(a.add(&b).add(&c).equals(&a.add(&b.add(&c))));
            prop_assert!(a.mul(&b.add(&c)).equals(&a.mul(&b).add(&a.mul(&c))));
            if !b.is_zero() {
                prop_assert!(a.try_div(&b).unwrap().mul(&b).equals(&a));
            }
        }

        #[test]
        fn cross_multiplication_is_an_equivalence(a in small_ratfunc(), b in small_ratfunc()) {
            prop_assume!(!b.is_zero());
            // a*b/b ~ a, and the relation is symmetric and transitive through it
            let ab = a.mul(&b);
            let x = ab.try_div(&b).unwrap();
            prop_assert!(x.equals(&x));
            prop_assert!(x.equals(&a) && a.equals(&x));
            let y = a.mul(&b).mul(&b).try_div(&b.mul(&b)).unwrap();
            prop_assert!(x.equals(&y) && y.equals(&a));
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in small_ratfunc(), b in small_ratfunc(),
                                        re in 0.5f64..2.0, im in -0.5f64..0.5) {
            let mut pt = [c(1.1, 0.2); crate::poly::NVARS];
            pt[Var::Q.index()] = c(re, im);
            pt[Var::U.index()] = c(im + 0.7, re);
            pt[Var::X.index()] = c(-re, 0.3);
            let ea = a.eval(&pt).unwrap();
            let eb = b.eval(&pt).unwrap();
            let prod = a.mul(&b).eval(&pt).unwrap();
            let sum = a.add(&b).eval(&pt).unwrap();
            let tol = 1e-9 * (1.0 + ea.norm() * eb.norm() + ea.norm() + eb.norm());
            prop_assert!((prod - ea * eb).norm() < tol);
            prop_assert!((sum - (ea + eb)).norm() < tol);
        }
    }
}
