//! Weight lattice, bilinear form, simple roots, parities and Cartan matrix of
//! the affine diagram A(1,1)^(1) used throughout the crate. Everything is
//! computed from the bilinear form on `ε_0..ε_4`.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Coefficients over `ε_0, …, ε_4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightVector(pub [Rational64; 5]);

/// `(ε_i, ε_i)` for `i = 0..4`.
const NORMS: [i64; 5] = [0, 1, 1, -1, -1];

impl WeightVector {
    pub fn from_ints(c: [i64; 5]) -> Self {
        WeightVector(c.map(Rational64::from_integer))
    }

    pub fn epsilon(i: usize) -> Self {
        let mut c = [0; 5];
        c[i] = 1;
        WeightVector::from_ints(c)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        WeightVector(c)
    }
}

pub fn bilinear(a: &WeightVector, b: &WeightVector) -> Rational64 {
    a.0.iter()
        .zip(b.0.iter())
        .zip(NORMS)
        .fold(Rational64::zero(), |acc, ((x, y), n)| acc + x * y * n)
}

/// Simple root `α_i`, `i = 0..3`.
pub fn alpha(i: usize) -> WeightVector {
    match i {
        0 => WeightVector::from_ints([1, -1, 0, 0, 1]),
        1..=3 => WeightVector::epsilon(i).sub(&WeightVector::epsilon(i + 1)),
        _ => panic!("simple root index {i} out of range 0..=3"),
    }
}

fn as_int(r: Rational64, what: &str) -> Result<i64> {
    if !r.is_integer() {
        return Err(Error::Consistency(format!("{what} = {r} is not an integer")));
    }
    Ok(r.to_integer())
}

/// `p(α_i) = (4 - (α_i, α_i)^2) / 4`.
pub fn parity(i: usize) -> Result<u8> {
    let n = bilinear(&alpha(i), &alpha(i));
    let p = as_int((Rational64::from_integer(4) - n * n) / 4, "parity")?;
    match p {
        0 | 1 => Ok(p as u8),
        _ => Err(Error::Consistency(format!("parity of α_{i} is {p}"))),
    }
}

/// `θ(i) = (1 - (ε_i, ε_i)) / 2` for `i = 1..4`.
pub fn theta(i: usize) -> u8 {
    assert!((1..=4).contains(&i), "θ is defined on 1..=4");
    let e = WeightVector::epsilon(i);
    ((Rational64::from_integer(1) - bilinear(&e, &e)) / 2)
        .to_u8()
        .expect("θ is 0 or 1")
}

/// `(α_i, ε_j)` as an integer exponent, `j = 1..4`.
pub fn weight_exponent(i: usize, j: usize) -> i32 {
    bilinear(&alpha(i), &WeightVector::epsilon(j))
        .to_integer()
        .to_i32()
        .expect("small")
}

/// `(α_i, α_j)` as an integer.
pub fn root_pairing(i: usize, j: usize) -> i32 {
    bilinear(&alpha(i), &alpha(j))
        .to_integer()
        .to_i32()
        .expect("small")
}

/// `a_ij = 2(α_i, α_j) / ((α_i, α_i) + 2 p(α_i))`.
pub fn cartan_matrix() -> Result<[[i64; 4]; 4]> {
    let mut a = [[0; 4]; 4];
    for (i, row) in a.iter_mut().enumerate() {
        let denom = bilinear(&alpha(i), &alpha(i)) + Rational64::from_integer(2 * parity(i)? as i64);
        for (j, entry) in row.iter_mut().enumerate() {
            let num = bilinear(&alpha(i), &alpha(j)) * 2;
            *entry = as_int(num / denom, "Cartan entry")?;
        }
    }
    Ok(a)
}

#[derive(Clone, Debug, Serialize)]
pub struct CartanDump {
    pub cartan_matrix: [[i64; 4]; 4],
    pub parity: [u8; 4],
    pub theta: [u8; 4],
}

pub fn cartan_dump() -> Result<CartanDump> {
    Ok(CartanDump {
        cartan_matrix: cartan_matrix()?,
        parity: [parity(0)?, parity(1)?, parity(2)?, parity(3)?],
        theta: [theta(1), theta(2), theta(3), theta(4)],
    })
}
