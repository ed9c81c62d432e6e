//! The R-matrix on `C^4 ⊗ C^4`, built from the spectral projectors and from
//! its explicit entries, with the intertwining check and a twisted
//! Yang–Baxter checker shared by every R-matrix in the crate.

use std::time::Instant;

use crate::cartan::theta;
use crate::error::Result;
use crate::linalg::{apply_at_leg, inverse, kron, Operator};
use crate::params::Point;
use crate::rep::{lemma1_bases, Generator, TensorRep};
use crate::report::CheckReport;
use crate::scalar::{QParam, Residual, Scalar};

fn e2<S: Scalar>(i: usize, j: usize, k: usize, l: usize) -> Operator<S> {
    kron(&Operator::elementary(4, i, j), &Operator::elementary(4, k, l))
}

/// Complementary projectors of `C^4 ⊗ C^4` onto the two submodules of
/// `V_x ⊗ V_{qx}`.
pub fn projectors<S: Scalar>(q: &QParam<S>, x: &S) -> Result<(Operator<S>, Operator<S>)> {
    let (v1, v2) = lemma1_bases(q, x, &q.q.mul(x))?;
    let columns: Vec<Vec<S>> = (0..8)
        .map(|c| v1.columns().column(c))
        .chain((0..8).map(|c| v2.columns().column(c)))
        .collect();
    let basis = Operator::from_columns(&[4, 4], &columns);
    let inv = inverse(&basis)?;
    let select = |first: bool| {
        let mask: Vec<S> = (0..16)
            .map(|k| if (k < 8) == first { S::one() } else { S::zero() })
            .collect();
        basis
            .matmul(&Operator::diag(mask))
            .matmul(&inv)
            .with_legs(&[4, 4])
    };
    Ok((select(true)?, select(false)?))
}

/// `(q²u − v) P1 + (q²v − u) P2`
pub fn rbox_spectral<S: Scalar>(q: &QParam<S>, u: &S, v: &S, x: &S) -> Result<Operator<S>> {
    let (p1, p2) = projectors(q, x)?;
    let q2 = q.pow(2);
    Ok(p1.scale(&q2.mul(u).sub(v)).add(&p2.scale(&q2.mul(v).sub(u))))
}

/// The same matrix assembled entry by entry.
pub fn rbox_explicit<S: Scalar>(q: &QParam<S>, u: &S, v: &S, x: &S) -> Operator<S> {
    let q2 = q.pow(2);
    let q2m1 = q2.sub(&S::one());
    let umv = u.sub(v);
    let mut r = Operator::square_zeros(&[4, 4]);
    for i in 1..=4 {
        let c = if i <= 2 {
            q2.mul(v).sub(u)
        } else {
            q2.mul(u).sub(v)
        };
        r = r.add(&e2(i, i, i, i).scale(&c));
    }
    for i in 1..=4 {
        for j in i + 1..=4 {
            r = r
                .add(&e2(i, i, j, j).scale(&q2m1.mul(v)))
                .add(&e2(j, j, i, i).scale(&q2m1.mul(u)));
        }
    }
    for i in 1..=4 {
        for j in 1..=4 {
            if i == j {
                continue;
            }
            let sign = if theta(i) * theta(j) == 1 {
                S::one()
            } else {
                S::from_int(-1)
            };
            r = r.add(&e2(i, j, j, i).scale(&sign.mul(&q.q).mul(&umv)));
        }
    }
    let xc = x.mul(&q2m1).mul(&umv);
    let mixed = e2(3, 1, 4, 2)
        .scale(&q.q)
        .sub(&e2(3, 2, 4, 1).scale(&q2))
        .sub(&e2(4, 1, 3, 2))
        .add(&e2(4, 2, 3, 1).scale(&q.q));
    r.add(&mixed.scale(&xc))
}

/// Entrywise agreement of the two constructions.
pub fn check_equal<S: Scalar>(pt: &Point<S>, tol: f64) -> Result<CheckReport> {
    let start = Instant::now();
    let a = rbox_spectral(&pt.q, &pt.u, &pt.v, &pt.x)?;
    let b = rbox_explicit(&pt.q, &pt.u, &pt.v, &pt.x);
    Ok(CheckReport::new("rbox-equal", S::BACKEND, a.compare(&b), tol).since(start))
}

/// Residual of `R·A(g) = B(g)·R` for each generator, maximized.
pub fn check_intertwine<S: Scalar>(
    r: &Operator<S>,
    rep_a: &TensorRep<S>,
    rep_b: &TensorRep<S>,
    gens: &[Generator],
    tol: f64,
) -> CheckReport {
    let start = Instant::now();
    let mut worst = Residual::ExactZero;
    let mut failing = Vec::new();
    let rn = r.frobenius();
    for (k, &g) in gens.iter().enumerate() {
        let a = rep_a.image(g);
        let b = rep_b.image(g);
        let floor = rn * a.frobenius().max(b.frobenius());
        let res = r.matmul(&a).compare_with_floor(&b.matmul(r), floor);
        if !res.passes(tol) {
            failing.push(g.to_string());
        }
        worst = if k == 0 { res } else { worst.max(res) };
    }
    CheckReport::new("intertwine", S::BACKEND, worst, tol)
        .detail("generators", gens.len())
        .detail("failing", failing)
        .since(start)
}

/// A family `R(u, v; x)` on `W ⊗ W` together with the integer shift of the
/// middle leg in its twisted Yang–Baxter equation.
pub trait RBuilder<S: Scalar> {
    /// `dim W`
    fn local_dim(&self) -> usize;
    fn shift(&self) -> i32;
    fn q(&self) -> &QParam<S>;
    fn build(&self, u: &S, v: &S, x: &S) -> Result<Operator<S>>;
}

/// The explicit vector-representation R-matrix with a chosen shift.
#[derive(Clone, Debug)]
pub struct BoxBuilder<S> {
    pub q: QParam<S>,
    pub shift: i32,
}

impl<S: Scalar> RBuilder<S> for BoxBuilder<S> {
    fn local_dim(&self) -> usize {
        4
    }
    fn shift(&self) -> i32 {
        self.shift
    }
    fn q(&self) -> &QParam<S> {
        &self.q
    }
    fn build(&self, u: &S, v: &S, x: &S) -> Result<Operator<S>> {
        Ok(rbox_explicit(&self.q, u, v, x))
    }
}

/// The six factors of a twisted Yang–Baxter equation on `W1 ⊗ W2 ⊗ W3`:
/// `lhs = l1 · l2 · l3` and `rhs = r1 · r2 · r3`, each factor acting on the
/// legs recorded next to it (1-based, first leg of its support).
#[derive(Clone, Debug)]
pub struct YbeOperands<S> {
    pub legs: Vec<usize>,
    pub lhs: [(Operator<S>, usize); 3],
    pub rhs: [(Operator<S>, usize); 3],
}

impl<S: Scalar> YbeOperands<S> {
    /// `LHS = R(v,w;x)_{12} R(u,w;q^m x)_{23} R(u,v;x)_{12}` and
    /// `RHS = R(u,v;q^m x)_{23} R(u,w;x)_{12} R(v,w;q^m x)_{23}`.
    pub fn from_builder<B: RBuilder<S>>(b: &B, u: &S, v: &S, w: &S, x: &S) -> Result<Self> {
        let d = b.local_dim();
        let xs = b.q().pow(b.shift()).mul(x);
        Ok(YbeOperands {
            legs: vec![d, d, d],
            lhs: [
                (b.build(v, w, x)?, 1),
                (b.build(u, w, &xs)?, 2),
                (b.build(u, v, x)?, 1),
            ],
            rhs: [
                (b.build(u, v, &xs)?, 2),
                (b.build(u, w, x)?, 1),
                (b.build(v, w, &xs)?, 2),
            ],
        })
    }

    fn product(&self, side: &[(Operator<S>, usize); 3]) -> Result<Operator<S>> {
        let mut acc = Operator::identity(&self.legs);
        for (m, leg) in side.iter().rev() {
            acc = apply_at_leg(m, *leg, &self.legs, &acc)?;
        }
        Ok(acc)
    }

    /// Both sides multiplied out.
    pub fn sides(&self) -> Result<(Operator<S>, Operator<S>)> {
        Ok((self.product(&self.lhs)?, self.product(&self.rhs)?))
    }

    /// Relative residual; the floor is the largest product of factor norms.
    pub fn residual(&self) -> Result<Residual> {
        let (l, r) = self.sides()?;
        let norms = |side: &[(Operator<S>, usize); 3]| -> f64 {
            let d: f64 = self.legs.iter().product::<usize>() as f64;
            side.iter()
                .map(|(m, _)| m.frobenius() / (m.rows() as f64).sqrt())
                .product::<f64>()
                * d.sqrt()
        };
        let floor = norms(&self.lhs).max(norms(&self.rhs));
        Ok(l.compare_with_floor(&r, floor))
    }

    /// Whether the sides agree entry for entry with no tolerance.
    pub fn bitwise_equal(&self, other: &Self) -> bool
    where
        S: PartialEq,
    {
        let same = |a: &[(Operator<S>, usize); 3], b: &[(Operator<S>, usize); 3]| {
            a.iter()
                .zip(b)
                .all(|((m, i), (n, j))| i == j && m.legs() == n.legs() && m.entries() == n.entries())
        };
        self.legs == other.legs && same(&self.lhs, &other.lhs) && same(&self.rhs, &other.rhs)
    }
}

pub fn check_twisted_ybe<S: Scalar, B: RBuilder<S>>(
    b: &B,
    u: &S,
    v: &S,
    w: &S,
    x: &S,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let ops = YbeOperands::from_builder(b, u, v, w, x)?;
    let res = ops.residual()?;
    Ok(CheckReport::new("twisted-ybe", S::BACKEND, res, tol)
        .detail("shift", b.shift())
        .detail("local_dim", b.local_dim())
        .since(start))
}

/// `Ř(v,u;x)·Ř(u,v;x) = (q²u − v)(q²v − u)·I`
pub fn unitarity_residual<S: Scalar>(q: &QParam<S>, u: &S, v: &S, x: &S) -> Residual {
    let q2 = q.pow(2);
    let c = q2.mul(u).sub(v).mul(&q2.mul(v).sub(u));
    let lhs = rbox_explicit(q, v, u, x).matmul(&rbox_explicit(q, u, v, x));
    lhs.compare(&Operator::identity(&[4, 4]).scale(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{flat_index, rank};
    use crate::params::sample_params;
    use crate::poly::RatFunc;
    use crate::rep::rho_tuple;
    use num_complex::Complex64;

    type C = Complex64;

    fn point(seed: u64) -> Point<C> {
        sample_params(seed).unwrap().point()
    }

    fn entry(r: &Operator<C>, out: [usize; 2], inp: [usize; 2]) -> C {
        *r.get(flat_index(&[4, 4], &out), flat_index(&[4, 4], &inp))
    }

    #[test]
    fn projector_identities() {
        let p = point(1);
        let (p1, p2) = projectors(&p.q, &p.x).unwrap();
        let id = Operator::identity(&[4, 4]);
        assert!(p1.add(&p2).compare(&id).passes(1e-12));
        assert!(p1
            .matmul(&p2)
            .compare_with_floor(&Operator::square_zeros(&[4, 4]), 1.0)
            .passes(1e-12));
        assert!(p1.matmul(&p1).compare(&p1).passes(1e-12));
        let e33 = Operator::<C>::basis_vector(&[4, 4], &[3, 3]);
        assert!(p1.matmul(&e33).compare(&e33).passes(1e-12));
        let e11 = Operator::<C>::basis_vector(&[4, 4], &[1, 1]);
        assert!(p2.matmul(&e11).compare(&e11).passes(1e-12));
    }

    #[test]
    fn explicit_entries() {
        let p = point(2);
        let (q, u, v, x) = (p.q.q, p.u, p.v, p.x);
        let r = rbox_explicit(&p.q, &u, &v, &x);
        assert!((entry(&r, [1, 1], [1, 1]) - (q * q * v - u)).norm() < 1e-14);
        let c = (q * q - 1.0) * (u - v);
        assert!((entry(&r, [3, 4], [2, 1]) + x * q * q * c).norm() < 1e-13);
        assert!((entry(&r, [3, 4], [1, 2]) - x * q * c).norm() < 1e-13);
        assert!((entry(&r, [4, 3], [1, 2]) + x * c).norm() < 1e-13);
        assert!((entry(&r, [4, 3], [2, 1]) - x * q * c).norm() < 1e-13);
        let r0 = rbox_explicit(&p.q, &u, &v, &C::new(0.0, 0.0));
        for (a, b) in [
            ([3, 4], [2, 1]),
            ([3, 4], [1, 2]),
            ([4, 3], [1, 2]),
            ([4, 3], [2, 1]),
        ] {
            assert_eq!(entry(&r0, a, b), C::new(0.0, 0.0));
        }
    }

    #[test]
    fn spectral_matches_explicit() {
        for seed in 0..20 {
            let p = point(seed);
            assert!(check_equal(&p, 1e-10).unwrap().pass, "seed {seed}");
        }
        let p0 = point(3).with_x(C::new(0.0, 0.0));
        assert!(check_equal(&p0, 1e-10).unwrap().pass);
    }

    #[test]
    fn spectral_matches_explicit_exactly() {
        let rep = check_equal(&Point::<RatFunc>::symbolic(), 0.0).unwrap();
        assert_eq!(rep.residual, Residual::ExactZero);
    }

    #[test]
    fn spectrum_and_degenerate_point() {
        let p = point(4);
        let q2 = p.q.q * p.q.q;
        let r = rbox_spectral(&p.q, &p.u, &p.v, &p.x).unwrap();
        let id = Operator::identity(&[4, 4]);
        for lambda in [q2 * p.u - p.v, q2 * p.v - p.u] {
            assert_eq!(rank(&r.sub(&id.scale(&lambda)), 1e-9), 8);
        }
        let ruu = rbox_spectral(&p.q, &p.u, &p.u, &p.x).unwrap();
        assert!(ruu.compare(&id.scale(&(p.u * (q2 - 1.0)))).passes(1e-12));
        assert!(unitarity_residual(&p.q, &p.u, &p.v, &p.x).passes(1e-12));
    }

    #[test]
    fn intertwines_all_generators() {
        let mut pts: Vec<Point<C>> = (0..20).map(point).collect();
        pts[0] = pts[0].clone().with_x(C::new(0.0, 0.0));
        pts[1] = pts[1].clone().with_x(C::new(0.0, 0.8));
        let gens: Vec<Generator> = Generator::primary().collect();
        for p in pts {
            let r = rbox_explicit(&p.q, &p.u, &p.v, &p.x);
            let a = rho_tuple(&p.q, &[p.u, p.v], &p.x).unwrap();
            let b = rho_tuple(&p.q, &[p.v, p.u], &p.x).unwrap();
            let rep = check_intertwine(&r, &a, &b, &gens, 1e-11);
            assert!(rep.pass, "{:?}", rep.details);
        }
    }

    #[test]
    fn identity_does_not_intertwine() {
        let p = point(5);
        let a = rho_tuple(&p.q, &[p.u, p.v], &p.x).unwrap();
        let b = rho_tuple(&p.q, &[p.v, p.u], &p.x).unwrap();
        let id = Operator::identity(&[4, 4]);
        // the twists only enter through E0 and F0
        assert!(check_intertwine(&id, &a, &b, &[Generator::E(1)], 1e-12).pass);
        let rep = check_intertwine(&id, &a, &b, &[Generator::E(0), Generator::F(0)], 1e-9);
        assert!(!rep.pass);
        assert_eq!(rep.details["failing"], serde_json::json!(["E0", "F0"]));
    }

    #[test]
    fn twisted_ybe_needs_the_shift() {
        let p = point(6);
        let good = BoxBuilder {
            q: p.q.clone(),
            shift: 1,
        };
        assert!(
            check_twisted_ybe(&good, &p.u, &p.v, &p.w, &p.x, 1e-10)
                .unwrap()
                .pass
        );
        let bad = BoxBuilder {
            q: p.q.clone(),
            shift: 0,
        };
        let rep = check_twisted_ybe(&bad, &p.u, &p.v, &p.w, &p.x, 1e-9).unwrap();
        assert!(!rep.pass && rep.residual.value() > 1e-3);
    }

    #[test]
    fn twisted_ybe_exact() {
        let p = Point::<RatFunc>::symbolic();
        let b = BoxBuilder {
            q: p.q.clone(),
            shift: 1,
        };
        let rep = check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, 0.0).unwrap();
        assert_eq!(rep.residual, Residual::ExactZero);
    }
}
