//! Exact multivariate polynomials and unreduced rational functions.
//!
//! Polynomials live in `Z[q, q^-1, u, v, w, x, y]`: the exponent of `q` may be
//! negative, so `q * q^-1 = 1` is applied every time two monomials are
//! multiplied. Rational functions are stored as an unreduced `num / den` pair.
//! No multivariate gcd is ever taken; only the monomial content, the integer
//! content and the sign of the denominator are normalized. Equality is decided
//! by cross-multiplication.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Number of indeterminates.
pub const NVARS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Q,
    U,
    V,
    W,
    X,
    Y,
}

impl Var {
    pub const ALL: [Var; NVARS] = [Var::Q, Var::U, Var::V, Var::W, Var::X, Var::Y];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Q => "q",
            Var::U => "u",
            Var::V => "v",
            Var::W => "w",
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

pub type Exponents = [i32; NVARS];

/// A sparse polynomial with arbitrary-precision integer coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Exponents, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Poly::monomial([0; NVARS], BigInt::from(c))
    }

    pub fn monomial(exps: Exponents, coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        Poly { terms }
    }

    pub fn var(v: Var) -> Self {
        Poly::var_pow(v, 1)
    }

    /// `v^k`. Negative `k` is only meaningful for `q`; other variables are
    /// polynomial, so asking for a negative power of them is a logic error.
    pub fn var_pow(v: Var, k: i32) -> Self {
        assert!(k >= 0 || v == Var::Q, "only q may carry a negative exponent");
        let mut e = [0; NVARS];
        e[v.index()] = k;
        Poly::monomial(e, BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(e, c)| e.iter().all(|&k| k == 0) && c.is_one())
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    fn accumulate(terms: &mut BTreeMap<Exponents, BigInt>, e: Exponents, c: BigInt) {
        use std::collections::btree_map::Entry;
        match terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut terms = big.terms.clone();
        for (e, c) in &small.terms {
            Poly::accumulate(&mut terms, *e, c.clone());
        }
        Poly { terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            Poly::accumulate(&mut terms, *e, -c);
        }
        Poly { terms }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = *ea;
                for k in 0..NVARS {
                    e[k] += eb[k];
                }
                Poly::accumulate(&mut terms, e, ca * cb);
            }
        }
        Poly { terms }
    }

    fn scale_int(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    fn div_int_exact(&self, c: &BigInt) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, k)| (*e, k / c)).collect(),
        }
    }

    fn shift(&self, by: &Exponents) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut s = *e;
                    for k in 0..NVARS {
                        s[k] += by[k];
                    }
                    (s, c.clone())
                })
                .collect(),
        }
    }

    fn min_exponents(&self) -> Option<Exponents> {
        let mut it = self.terms.keys();
        let mut m = *it.next()?;
        for e in it {
            for k in 0..NVARS {
                m[k] = m[k].min(e[k]);
            }
        }
        Some(m)
    }

    fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    fn leading_sign_negative(&self) -> bool {
        self.terms
            .values()
            .next_back()
            .map(|c| c.is_negative())
            .unwrap_or(false)
    }

    /// Substitute an integer for one variable. Negative powers (only of `q`)
    /// are accepted for `value = ±1`.
    pub fn substitute(&self, var: Var, value: i64) -> Result<Poly> {
        let mut out = Poly::zero();
        let base = BigInt::from(value);
        for (e, c) in &self.terms {
            let k = e[var.index()];
            if k < 0 && value.abs() != 1 {
                return Err(if value == 0 {
                    Error::DivisionByZero
                } else {
                    Error::Unsupported(format!("non-unit substitution into {}^{k}", var.name()))
                });
            }
            let mut rest = *e;
            rest[var.index()] = 0;
            let factor = num_traits::pow(base.clone(), k.unsigned_abs() as usize);
            Poly::accumulate(&mut out.terms, rest, c * factor);
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Complex64; NVARS]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (k, &p) in e.iter().enumerate() {
                if p != 0 {
                    t *= point[k].powi(p);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| json!({ "exp": e.to_vec(), "coeff": c.to_string() }))
                .collect(),
        )
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for v in Var::ALL {
                match e[v.index()] {
                    0 => {}
                    1 => write!(f, "*{}", v.name())?,
                    k => write!(f, "*{}^{}", v.name(), k)?,
                }
            }
        }
        Ok(())
    }
}

/// `num / den` with `den != 0`, kept unreduced apart from content and sign.
#[derive(Clone)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc { num, den }.normalized())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn var(v: Var) -> Self {
        RatFunc::from_poly(Poly::var(v))
    }

    pub fn q_pow(k: i32) -> Self {
        RatFunc::from_poly(Poly::var_pow(Var::Q, k))
    }

    pub fn constant(c: i64) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn term_count(&self) -> usize {
        self.num.term_count() + self.den.term_count()
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.den = Poly::one();
            return self;
        }
        if self.den.is_one() {
            return self;
        }
        // common monomial factor (q may shift freely since it is a unit)
        let mn = self.num.min_exponents().expect("nonzero");
        let md = self.den.min_exponents().expect("nonzero");
        let mut shift = [0; NVARS];
        for k in 0..NVARS {
            shift[k] = -mn[k].min(md[k]);
        }
        shift[Var::Q.index()] = -md[Var::Q.index()];
        if shift.iter().any(|&s| s != 0) {
            self.num = self.num.shift(&shift);
            self.den = self.den.shift(&shift);
        }
        let g = self.num.content().gcd(&self.den.content());
        let g = if self.den.leading_sign_negative() { -g } else { g };
        if !g.is_one() {
            self.num = self.num.div_int_exact(&g);
            self.den = self.den.div_int_exact(&g);
        }
        self
    }

    pub fn add(&self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc {
                num: self.num.add(&rhs.num),
                den: self.den.clone(),
            }
            .normalized();
        }
        RatFunc {
            num: self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            den: self.den.mul(&rhs.den),
        }
        .normalized()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, rhs: &RatFunc) -> RatFunc {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::constant(0);
        }
        let den = if self.den.is_one() {
            rhs.den.clone()
        } else if rhs.den.is_one() {
            self.den.clone()
        } else {
            self.den.mul(&rhs.den)
        };
        RatFunc {
            num: self.num.mul(&rhs.num),
            den,
        }
        .normalized()
    }

    pub fn div(&self, rhs: &RatFunc) -> Result<RatFunc> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }

    pub fn scale_int(&self, c: i64) -> RatFunc {
        RatFunc {
            num: self.num.scale_int(&BigInt::from(c)),
            den: self.den.clone(),
        }
        .normalized()
    }

    /// Cross-multiplication equality.
    pub fn equals(&self, rhs: &RatFunc) -> bool {
        if self.den == rhs.den {
            return self.num == rhs.num;
        }
        self.num.mul(&rhs.den) == rhs.num.mul(&self.den)
    }

    pub fn substitute(&self, var: Var, value: i64) -> Result<RatFunc> {
        RatFunc::new(self.num.substitute(var, value)?, self.den.substitute(var, value)?)
    }

    /// Evaluation homomorphism into the numeric backend.
    pub fn eval(&self, point: &[Complex64; NVARS]) -> Result<Complex64> {
        let d = self.den.eval(point);
        if d.norm() == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval(point) / d)
    }

    pub fn to_json(&self) -> Value {
        json!({ "num": self.num.to_json(), "den": self.den.to_json() })
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> RatFunc {
        RatFunc::var(Var::Q)
    }

    #[test]
    fn q_times_q_inverse_collapses() {
        let p = Poly::var(Var::Q).mul(&Poly::var_pow(Var::Q, -1));
        assert!(p.is_one());
    }

    #[test]
    fn additive_inverse() {
        assert!(q().sub(&q()).is_zero());
    }

    #[test]
    fn quotient_equals_by_cross_multiplication() {
        let q2m1 = q().mul(&q()).sub(&RatFunc::constant(1));
        let lhs = q2m1.div(&q().sub(&RatFunc::constant(1))).unwrap();
        let rhs = q().add(&RatFunc::constant(1));
        assert_eq!(lhs, rhs);
        assert!(!lhs.is_polynomial());
    }

    #[test]
    fn evaluate_q2_minus_qm2() {
        let f = RatFunc::q_pow(2).sub(&RatFunc::q_pow(-2));
        let mut pt = [Complex64::new(1.0, 0.0); NVARS];
        pt[Var::Q.index()] = Complex64::new(2.0, 0.0);
        let z = f.eval(&pt).unwrap();
        assert!((z - Complex64::new(3.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(q().div(&RatFunc::constant(0)).unwrap_err(), Error::DivisionByZero);
        assert_eq!(
            RatFunc::new(Poly::one(), Poly::zero()).unwrap_err(),
            Error::DivisionByZero
        );
    }

    #[test]
    fn content_and_sign_are_normalized() {
        let x = Poly::var(Var::X);
        let f = RatFunc::new(
            x.scale_int(&BigInt::from(6)),
            x.mul(&x).scale_int(&BigInt::from(-4)),
        )
        .unwrap();
        // 6x / (-4x^2) = -3 / (2x)
        assert_eq!(f.numer(), &Poly::constant(-3));
        assert_eq!(f.denom(), &x.scale_int(&BigInt::from(2)));
    }

    #[test]
    fn q_laurent_denominator_is_cleared() {
        let f = RatFunc::new(Poly::one(), Poly::var_pow(Var::Q, -1)).unwrap();
        assert!(f.is_polynomial());
        assert_eq!(f, q());
    }

    #[test]
    fn substitution_at_q_one() {
        let f = RatFunc::q_pow(2).sub(&RatFunc::q_pow(-1));
        let g = f.substitute(Var::Q, 1).unwrap();
        assert!(g.is_zero());
    }
}
