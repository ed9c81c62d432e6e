//! The algebra acting on `C^4`: generator images under `ρ_x`, the spectral
//! twist `χ_u`, iterated coproducts evaluated against lists of local
//! representations, relation checking, the two-factor submodules of `V_x ⊗ V_y`
//! and the classical limit.
//!
//! The coproduct is never stored as an element of a tensor-square algebra. It
//! is evaluated recursively: the first tensor factor is read off the first
//! local representation and the remaining factors come from the recursive
//! evaluation of the right-hand element. Brackets such as `[E_2, F_0]` are
//! themselves evaluated through the coproduct, since `Δ` is an algebra map.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cartan::{parity, root_pairing, theta, weight_exponent};
use crate::error::{Error, Result};
use crate::linalg::{commutant_dimension, kron, restrict_image, Operator, SubspaceBasis};
use crate::poly::{RatFunc, Var, NVARS};
use crate::report::CheckReport;
use crate::scalar::{QParam, Residual, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    S,
    K(u8),
    KInv(u8),
    E(u8),
    F(u8),
}

impl Generator {
    /// All 17 generators: `s`, `K_i`, `K_i^-1`, `E_i`, `F_i`.
    pub const ALL: [Generator; 17] = [
        Generator::S,
        Generator::K(0),
        Generator::K(1),
        Generator::K(2),
        Generator::K(3),
        Generator::KInv(0),
        Generator::KInv(1),
        Generator::KInv(2),
        Generator::KInv(3),
        Generator::E(0),
        Generator::E(1),
        Generator::E(2),
        Generator::E(3),
        Generator::F(0),
        Generator::F(1),
        Generator::F(2),
        Generator::F(3),
    ];

    /// The 13 defining generators `s, K_i, E_i, F_i`.
    pub fn primary() -> impl Iterator<Item = Generator> {
        Generator::ALL
            .into_iter()
            .filter(|g| !matches!(g, Generator::KInv(_)))
    }

    /// Generators of the finite subalgebra: `s` and `K_i^±, E_i, F_i` for `i = 1..3`.
    pub fn finite() -> impl Iterator<Item = Generator> {
        Generator::ALL.into_iter().filter(|g| match g {
            Generator::S => true,
            Generator::K(i) | Generator::KInv(i) | Generator::E(i) | Generator::F(i) => *i != 0,
        })
    }

    pub fn index(self) -> usize {
        match self {
            Generator::S => 0,
            Generator::K(i) => 1 + i as usize,
            Generator::KInv(i) => 5 + i as usize,
            Generator::E(i) => 9 + i as usize,
            Generator::F(i) => 13 + i as usize,
        }
    }

    /// Z/2 degree: `p(α_i)` for `E_i, F_i`, zero otherwise.
    pub fn parity(self) -> u8 {
        match self {
            Generator::E(i) | Generator::F(i) => parity(i as usize).expect("valid root"),
            _ => 0,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::S => write!(f, "s"),
            Generator::K(i) => write!(f, "K{i}"),
            Generator::KInv(i) => write!(f, "K{i}^-1"),
            Generator::E(i) => write!(f, "E{i}"),
            Generator::F(i) => write!(f, "F{i}"),
        }
    }
}

/// The two brackets appearing in the coproduct.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bracket {
    /// `[E_0, F_2]`
    E0F2,
    /// `[E_2, F_0]`
    E2F0,
}

impl Bracket {
    fn indices(self) -> (u8, u8) {
        match self {
            Bracket::E0F2 => (0, 2),
            Bracket::E2F0 => (2, 0),
        }
    }
}

/// `[A, B] = AB - (-1)^{pa·pb} BA`
pub fn super_bracket<S: Scalar>(a: &Operator<S>, b: &Operator<S>, pa: u8, pb: u8) -> Operator<S> {
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    if pa * pb == 1 {
        ab.add(&ba)
    } else {
        ab.sub(&ba)
    }
}

fn ef_bracket<S: Scalar>(e: &Operator<S>, f: &Operator<S>, i: u8, j: u8) -> Operator<S> {
    super_bracket(e, f, Generator::E(i).parity(), Generator::F(j).parity())
}

/// An assignment of a square matrix to each generator.
#[derive(Clone, Debug)]
pub struct LocalRep<S> {
    images: Vec<Operator<S>>,
    brackets: [Operator<S>; 2],
}

impl<S: Scalar> LocalRep<S> {
    /// `images` in [`Generator::ALL`] order.
    pub fn from_images(images: Vec<Operator<S>>) -> Result<Self> {
        if images.len() != Generator::ALL.len() {
            return Err(Error::Dimension(format!(
                "{} generator images, expected 17",
                images.len()
            )));
        }
        let d = images[0].rows();
        if images.iter().any(|m| m.rows() != d || m.cols() != d) {
            return Err(Error::Dimension("generator images differ in shape".into()));
        }
        let idx = |g: Generator| &images[g.index()];
        let brackets = [Bracket::E0F2, Bracket::E2F0].map(|b| {
            let (i, j) = b.indices();
            ef_bracket(idx(Generator::E(i)), idx(Generator::F(j)), i, j)
        });
        Ok(LocalRep { images, brackets })
    }

    pub fn dim(&self) -> usize {
        self.images[0].rows()
    }

    pub fn image(&self, g: Generator) -> &Operator<S> {
        &self.images[g.index()]
    }

    pub fn bracket(&self, which: Bracket) -> &Operator<S> {
        match which {
            Bracket::E0F2 => &self.brackets[0],
            Bracket::E2F0 => &self.brackets[1],
        }
    }

    /// Precomposition with `χ_u`: `E_0 ↦ u^-1 E_0`, `F_0 ↦ u F_0`.
    pub fn twist(&self, u: &S) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::ZeroTwist);
        }
        let u_inv = u.inv()?;
        let mut images = self.images.clone();
        images[Generator::E(0).index()] = images[Generator::E(0).index()].scale(&u_inv);
        images[Generator::F(0).index()] = images[Generator::F(0).index()].scale(u);
        LocalRep::from_images(images)
    }

    /// Restricts every image to an invariant subspace.
    pub fn restrict(&self, basis: &SubspaceBasis<S>, tol: f64) -> Result<Self> {
        let images = self
            .images
            .iter()
            .map(|m| crate::linalg::restrict(m, basis, tol))
            .collect::<Result<Vec<_>>>()?;
        LocalRep::from_images(images)
    }

    /// Replaces one image (used for negative controls).
    pub fn with_image(&self, g: Generator, m: Operator<S>) -> Result<Self> {
        let mut images = self.images.clone();
        images[g.index()] = m;
        LocalRep::from_images(images)
    }
}

/// `ρ_x` on `C^4`.
pub fn rho<S: Scalar>(q: &QParam<S>, x: &S) -> LocalRep<S> {
    let e = |i, j| Operator::<S>::elementary(4, i, j);
    let diag = |f: &dyn Fn(usize) -> S| Operator::diag((1..=4).map(f).collect());
    let mut images = Vec::with_capacity(17);
    for g in Generator::ALL {
        let m = match g {
            Generator::S => diag(&|j| if theta(j) == 1 { S::from_int(-1) } else { S::one() }),
            Generator::K(i) => diag(&|j| q.pow(weight_exponent(i as usize, j))),
            Generator::KInv(i) => diag(&|j| q.pow(-weight_exponent(i as usize, j))),
            Generator::E(0) => e(4, 1),
            Generator::E(1) => e(1, 2),
            Generator::E(2) => e(2, 3).add(&e(4, 1).scale(x)),
            Generator::E(3) => e(3, 4),
            Generator::F(0) => e(1, 4).neg().sub(&e(3, 2).scale(&x.mul(&q.q_inv))),
            Generator::F(1) => e(2, 1),
            Generator::F(2) => e(3, 2),
            Generator::F(3) => e(4, 3).neg(),
            _ => unreachable!("generator index out of range"),
        };
        images.push(m);
    }
    LocalRep::from_images(images).expect("17 images of size 4")
}

pub fn bracket_image<S: Scalar>(rep: &LocalRep<S>, which: Bracket) -> Operator<S> {
    rep.bracket(which).clone()
}

#[derive(Clone, Copy, Debug)]
enum Element {
    Gen(Generator),
    Bracket(Bracket),
}

fn s_power<S: Scalar>(rep: &LocalRep<S>, p: u8) -> Operator<S> {
    if p == 1 {
        rep.image(Generator::S).clone()
    } else {
        Operator::identity(&[rep.dim()])
    }
}

fn eval_element<S: Scalar>(el: Element, reps: &[LocalRep<S>], q: &QParam<S>) -> Operator<S> {
    let head = &reps[0];
    if reps.len() == 1 {
        return match el {
            Element::Gen(g) => head.image(g).clone(),
            Element::Bracket(b) => head.bracket(b).clone(),
        };
    }
    let tail = &reps[1..];
    let g = match el {
        Element::Bracket(b) => {
            let (i, j) = b.indices();
            let e = eval_element(Element::Gen(Generator::E(i)), reps, q);
            let f = eval_element(Element::Gen(Generator::F(j)), reps, q);
            return ef_bracket(&e, &f, i, j);
        }
        Element::Gen(g) => g,
    };
    let rest = |el: Element| eval_element(el, tail, q);
    let tail_dim: usize = tail.iter().map(LocalRep::dim).product();
    let tail_id = || Operator::identity(&[tail_dim]);
    match g {
        Generator::S | Generator::K(_) | Generator::KInv(_) => kron(head.image(g), &rest(Element::Gen(g))),
        Generator::E(i) => {
            let p = g.parity();
            let mut t = kron(head.image(g), &tail_id()).add(&kron(
                &head.image(Generator::K(i)).matmul(&s_power(head, p)),
                &rest(Element::Gen(g)),
            ));
            if i == 0 {
                let local = head.image(Generator::S).matmul(head.bracket(Bracket::E0F2));
                let corr = kron(&local, &rest(Element::Gen(Generator::E(2))));
                t = t.add(&corr.scale(&q.q_minus_inv()));
            }
            t
        }
        Generator::F(i) => {
            let p = g.parity();
            let mut t = kron(head.image(g), &rest(Element::Gen(Generator::KInv(i))))
                .add(&kron(&s_power(head, p), &rest(Element::Gen(g))));
            if i == 0 {
                let corr = kron(
                    head.image(Generator::F(2)),
                    &rest(Element::Bracket(Bracket::E2F0)),
                );
                t = t.sub(&corr.scale(&q.q_minus_inv()));
            }
            t
        }
    }
}

/// Image of `g` under `(reps[0] ⊗ … ⊗ reps[n-1]) ∘ Δ^{(n-1)}`.
pub fn coproduct_rep<S: Scalar>(g: Generator, reps: &[LocalRep<S>], q: &QParam<S>) -> Result<Operator<S>> {
    if reps.is_empty() {
        return Err(Error::Dimension("coproduct needs at least one factor".into()));
    }
    let legs: Vec<usize> = reps.iter().map(LocalRep::dim).collect();
    eval_element(Element::Gen(g), reps, q).with_legs(&legs)
}

/// A tensor product of local representations, evaluated through the coproduct.
#[derive(Clone, Debug)]
pub struct TensorRep<S> {
    pub factors: Vec<LocalRep<S>>,
    pub q: QParam<S>,
}

impl<S: Scalar> TensorRep<S> {
    pub fn new(factors: Vec<LocalRep<S>>, q: QParam<S>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("empty tensor product".into()));
        }
        Ok(TensorRep { factors, q })
    }

    pub fn image(&self, g: Generator) -> Operator<S> {
        coproduct_rep(g, &self.factors, &self.q).expect("nonempty")
    }

    pub fn legs(&self) -> Vec<usize> {
        self.factors.iter().map(LocalRep::dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.legs().iter().product()
    }

    /// All 17 images as a single local representation on the product space.
    pub fn collapse(&self) -> Result<LocalRep<S>> {
        LocalRep::from_images(Generator::ALL.iter().map(|&g| self.image(g)).collect())
    }
}

/// `ρ_{a,x} = (ρ_x ⊗ ρ_{qx} ⊗ … ) ∘ (χ_{a_1} ⊗ …) ∘ Δ^{(n-1)}`.
pub fn rho_tuple<S: Scalar>(q: &QParam<S>, a: &[S], x: &S) -> Result<TensorRep<S>> {
    let factors = a
        .iter()
        .enumerate()
        .map(|(k, ak)| rho(q, &q.pow(k as i32).mul(x)).twist(ak))
        .collect::<Result<Vec<_>>>()?;
    TensorRep::new(factors, q.clone())
}

struct RelationLog {
    worst: Residual,
    failures: Vec<String>,
    count: usize,
    tol: f64,
}

impl RelationLog {
    fn new(tol: f64) -> Self {
        RelationLog {
            worst: Residual::Numeric(0.0),
            failures: Vec::new(),
            count: 0,
            tol,
        }
    }

    fn record(&mut self, name: String, r: Residual) {
        self.count += 1;
        if !r.passes(self.tol) {
            self.failures.push(name);
        }
        self.worst = if self.count == 1 { r } else { self.worst.max(r) };
    }
}

fn norms<S: Scalar>(ops: &[&Operator<S>]) -> f64 {
    ops.iter().map(|m| m.frobenius()).product()
}

/// Checks every defining relation on the images of `rep`, including the two
/// centrality conditions. Central elements must commute with every generator
/// image and be a scalar multiple of the identity; both scalars are recorded.
pub fn check_relations<S: Scalar>(rep: &LocalRep<S>, q: &QParam<S>, tol: f64) -> CheckReport {
    let start = Instant::now();
    let d = rep.dim();
    let id = Operator::<S>::identity(&[d]);
    let img = |g| rep.image(g);
    let s = img(Generator::S);
    let mut log = RelationLog::new(tol);

    log.record("s^2=1".into(), s.matmul(s).compare(&id));
    for i in 0..4u8 {
        let k = img(Generator::K(i));
        let ki = img(Generator::KInv(i));
        log.record(
            format!("sK{i}s=K{i}"),
            s.matmul(k).matmul(s).compare_with_floor(k, norms(&[k])),
        );
        for (g, name) in [(Generator::E(i), "E"), (Generator::F(i), "F")] {
            let m = img(g);
            let sign = if g.parity() == 1 {
                S::from_int(-1)
            } else {
                S::one()
            };
            log.record(
                format!("s{name}{i}s=±{name}{i}"),
                s.matmul(m)
                    .matmul(s)
                    .compare_with_floor(&m.scale(&sign), norms(&[m])),
            );
        }
        log.record(format!("K{i}K{i}^-1=1"), k.matmul(ki).compare(&id));
        log.record(format!("K{i}^-1K{i}=1"), ki.matmul(k).compare(&id));
        for j in 0..4u8 {
            let kj = img(Generator::K(j));
            log.record(
                format!("K{i}K{j}=K{j}K{i}"),
                k.matmul(kj).compare_with_floor(&kj.matmul(k), norms(&[k, kj])),
            );
            let a = root_pairing(i as usize, j as usize);
            let e = img(Generator::E(j));
            let f = img(Generator::F(j));
            log.record(
                format!("K{i}E{j}K{i}^-1"),
                k.matmul(e)
                    .matmul(ki)
                    .compare_with_floor(&e.scale(&q.pow(a)), norms(&[k, e, ki])),
            );
            log.record(
                format!("K{i}F{j}K{i}^-1"),
                k.matmul(f)
                    .matmul(ki)
                    .compare_with_floor(&f.scale(&q.pow(-a)), norms(&[k, f, ki])),
            );
        }
    }
    let denom = q.q_minus_inv();
    for i in 0..4u8 {
        for j in 0..4u8 {
            if (i, j) == (2, 0) || (i, j) == (0, 2) {
                continue;
            }
            let e = img(Generator::E(i));
            let f = img(Generator::F(j));
            let lhs = ef_bracket(e, f, i, j);
            let rhs = if i == j {
                img(Generator::K(i))
                    .sub(img(Generator::KInv(i)))
                    .try_map(|z| z.try_div(&denom))
                    .expect("q - q^-1 is nonzero for generic q")
            } else {
                Operator::square_zeros(&[d])
            };
            log.record(
                format!("[E{i},F{j}]"),
                lhs.compare_with_floor(&rhs, norms(&[e, f])),
            );
        }
    }

    let mut central = Vec::new();
    for (label, k, b) in [
        ("K2[E2,F0]", Generator::K(2), Bracket::E2F0),
        ("K2^-1[E0,F2]", Generator::KInv(2), Bracket::E0F2),
    ] {
        let (i, j) = b.indices();
        let floor = norms(&[img(k), img(Generator::E(i)), img(Generator::F(j))]);
        let z = img(k).matmul(rep.bracket(b));
        for g in Generator::ALL {
            let m = img(g);
            log.record(
                format!("{label} commutes with {g}"),
                z.matmul(m)
                    .compare_with_floor(&m.matmul(&z), floor * m.frobenius()),
            );
        }
        let c = z.get(0, 0).clone();
        log.record(
            format!("{label} is scalar"),
            z.compare_with_floor(&id.scale(&c), floor),
        );
        central.push(c.to_json());
    }

    CheckReport::new("relations", S::BACKEND, log.worst, tol)
        .detail("relations_checked", log.count)
        .detail("failing", Value::from(log.failures))
        .detail("central_scalars", Value::from(central))
        .since(start)
}

/// The two candidate submodules of `V_x ⊗ V_y`. Column order: for `V1`,
/// `e3⊗e3, e4⊗e4` then the `i<j` vectors; for `V2`, `e1⊗e1, e2⊗e2` then the
/// `i<j` vectors.
pub fn lemma1_bases<S: Scalar>(q: &QParam<S>, x: &S, y: &S) -> Result<(SubspaceBasis<S>, SubspaceBasis<S>)> {
    let legs = [4, 4];
    let e = |i, j| Operator::<S>::basis_vector(&legs, &[i, j]);
    let mut v1 = vec![e(3, 3), e(4, 4)];
    let mut v2 = vec![e(1, 1), e(2, 2)];
    for i in 1..=4 {
        for j in i + 1..=4 {
            let sign = if theta(i) * theta(j) == 1 {
                S::from_int(-1)
            } else {
                S::one()
            };
            let mut a = e(i, j).sub(&e(j, i).scale(&sign.mul(&q.q)));
            if (i, j) == (1, 2) {
                a = a.add(&e(3, 4).scale(&q.pow(2).mul(y))).add(&e(4, 3).scale(x));
            }
            v1.push(a);
            v2.push(e(i, j).add(&e(j, i).scale(&sign.mul(&q.q_inv))));
        }
    }
    let cols = |vs: Vec<Operator<S>>| {
        let columns: Vec<Vec<S>> = vs.iter().map(|v| v.column(0)).collect();
        Operator::from_columns(&legs, &columns)
    };
    Ok((
        SubspaceBasis::new(cols(v1), crate::linalg::DEFAULT_TOL)?,
        SubspaceBasis::new(cols(v2), crate::linalg::DEFAULT_TOL)?,
    ))
}

fn invariance<S: Scalar>(
    rep: &TensorRep<S>,
    basis: &SubspaceBasis<S>,
) -> Result<(Residual, Vec<Operator<S>>)> {
    let mut worst = Residual::Numeric(0.0);
    let mut restricted = Vec::new();
    for (k, g) in Generator::finite().enumerate() {
        let fit = restrict_image(&rep.image(g).matmul(basis.columns()), basis)?;
        worst = if k == 0 {
            fit.residual
        } else {
            worst.max(fit.residual)
        };
        restricted.push(fit.matrix);
    }
    Ok((worst, restricted))
}

/// Invariance of both spans under the finite subalgebra acting on `V_x ⊗ V_y`.
pub fn check_lemma1<S: Scalar>(q: &QParam<S>, x: &S, y: &S, tol: f64) -> Result<CheckReport> {
    let start = Instant::now();
    let (v1, v2) = lemma1_bases(q, x, y)?;
    let rep = TensorRep::new(vec![rho(q, x), rho(q, y)], q.clone())?;
    let (r1, _) = invariance(&rep, &v1)?;
    let (r2, _) = invariance(&rep, &v2)?;
    let joint = Operator::from_columns(
        &[4, 4],
        &(0..8)
            .map(|c| v1.columns().column(c))
            .chain((0..8).map(|c| v2.columns().column(c)))
            .collect::<Vec<_>>(),
    );
    let rank = crate::linalg::rank(&joint, crate::linalg::DEFAULT_TOL);
    Ok(CheckReport::new("lemma1", S::BACKEND, r1.max(r2), tol)
        .detail("v1_residual", r1.to_json())
        .detail("v2_residual", r2.to_json())
        .detail("v1_invariant", r1.passes(tol))
        .detail("v2_invariant", r2.passes(tol))
        .detail("joint_rank", rank)
        .since(start))
}

/// Commutant dimensions of the finite subalgebra restricted to `V1` and `V2`
/// at `y = qx`.
pub fn lemma1_commutants<S: Scalar>(q: &QParam<S>, x: &S, tol: f64) -> Result<(usize, usize)> {
    let y = q.q.mul(x);
    let (v1, v2) = lemma1_bases(q, x, &y)?;
    let rep = TensorRep::new(vec![rho(q, x), rho(q, &y)], q.clone())?;
    let (r1, m1) = invariance(&rep, &v1)?;
    let (r2, m2) = invariance(&rep, &v2)?;
    if !r1.passes(tol) || !r2.passes(tol) {
        return Err(Error::NotInvariant {
            column: 0,
            residual: r1.max(r2).value(),
        });
    }
    Ok((commutant_dimension(&m1, tol), commutant_dimension(&m2, tol)))
}

/// Images of the classical Chevalley generators at `(q, x) → (1, 0)`.
#[derive(Clone, Debug)]
pub struct ClassicalLimit {
    pub e: Vec<Operator<Complex64>>,
    pub f: Vec<Operator<Complex64>>,
    pub h: Vec<Operator<Complex64>>,
    /// Residual of `ψ_u(F_0) = u ψ_1(F_0)` and `ψ_u(E_0) = u^-1 ψ_1(E_0)`.
    pub scaling_residual: Residual,
}

fn at_classical_point(m: &Operator<RatFunc>) -> Result<Operator<Complex64>> {
    let origin = [Complex64::new(0.0, 0.0); NVARS];
    m.try_map(|z| z.substitute(Var::Q, 1)?.substitute(Var::X, 0)?.eval(&origin))
}

/// `E'_i, F'_i` by substituting `q = 1, x = 0` into `ρ_x ∘ χ_u`; `H'_i` as the
/// closed-form limit `diag((α_i, ε_j))`.
pub fn classical_limit(u: Complex64) -> Result<ClassicalLimit> {
    let q = QParam::<RatFunc>::symbolic();
    let base = rho(&q, &RatFunc::var(Var::X));
    let numeric = LocalRep::from_images(
        Generator::ALL
            .iter()
            .map(|&g| at_classical_point(base.image(g)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let twisted = numeric.twist(&u)?;
    let pick = |rep: &LocalRep<Complex64>, f: fn(u8) -> Generator| -> Vec<Operator<Complex64>> {
        (0..4).map(|i| rep.image(f(i)).clone()).collect()
    };
    let h = (0..4)
        .map(|i| {
            Operator::diag(
                (1..=4)
                    .map(|j| Complex64::new(weight_exponent(i, j) as f64, 0.0))
                    .collect(),
            )
        })
        .collect();
    let f0 = twisted
        .image(Generator::F(0))
        .compare(&numeric.image(Generator::F(0)).scale(&u));
    let e0 = twisted
        .image(Generator::E(0))
        .compare(&numeric.image(Generator::E(0)).scale(&Scalar::inv(&u)?));
    Ok(ClassicalLimit {
        e: pick(&twisted, Generator::E),
        f: pick(&twisted, Generator::F),
        h,
        scaling_residual: f0.max(e0),
    })
}

/// JSON dump of all generator images.
pub fn rep_to_json<S: Scalar>(rep: &LocalRep<S>) -> Value {
    let mut map = serde_json::Map::new();
    for g in Generator::ALL {
        map.insert(g.to_string(), rep.image(g).to_json());
    }
    json!(map)
}
