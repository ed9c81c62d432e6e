//! The fused R-matrices read as dynamical R-matrices `Ř″(u, v, λ) = Ř^{±,(n)}(u, v; e^{aλ})`
//! with `e^a = q`, and a dynamical Yang–Baxter checker over arbitrary weight
//! decompositions of the one-dimensional Cartan part.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fusion::{fused_r, fused_space, FusedBuilder};
use crate::hecke::Sign;
use crate::linalg::{inverse, kron, Operator, SubspaceBasis, DEFAULT_TOL};
use crate::rbox::YbeOperands;
use crate::report::CheckReport;
use crate::scalar::{Backend, QParam, Residual, Scalar};

type C = Complex64;

/// `V = ⊕ V_μ`, each weight given by its value `μ(1)`.
#[derive(Clone, Debug)]
pub struct WeightedSpace {
    dim: usize,
    weights: Vec<C>,
    /// Projector onto each `V_μ` along the others.
    projectors: Vec<Operator<C>>,
}

impl WeightedSpace {
    pub fn new(dim: usize, blocks: Vec<(C, SubspaceBasis<C>)>) -> Result<Self> {
        let columns: Vec<Vec<C>> = blocks
            .iter()
            .flat_map(|(_, b)| (0..b.dim()).map(move |c| b.columns().column(c)))
            .collect();
        if columns.len() != dim || blocks.iter().any(|(_, b)| b.ambient() != dim) {
            return Err(Error::Dimension(format!(
                "weight blocks supply {} vectors for a space of dimension {dim}",
                columns.len()
            )));
        }
        let basis = Operator::from_columns(&[dim], &columns);
        let inv =
            inverse(&basis).map_err(|_| Error::Consistency("weight blocks are not independent".into()))?;
        let mut start = 0;
        let mut projectors = Vec::with_capacity(blocks.len());
        for (_, b) in &blocks {
            let mask = (0..dim)
                .map(|k| {
                    C::new(
                        if (start..start + b.dim()).contains(&k) {
                            1.0
                        } else {
                            0.0
                        },
                        0.0,
                    )
                })
                .collect();
            projectors.push(basis.matmul(&Operator::diag(mask)).matmul(&inv));
            start += b.dim();
        }
        Ok(WeightedSpace {
            dim,
            weights: blocks.iter().map(|(w, _)| *w).collect(),
            projectors,
        })
    }

    /// All of `C^dim` with one weight.
    pub fn single(dim: usize, weight: C) -> Self {
        WeightedSpace {
            dim,
            weights: vec![weight],
            projectors: vec![Operator::identity(&[dim])],
        }
    }

    /// One weight per standard basis vector.
    pub fn diagonal(weights: &[C]) -> Result<Self> {
        let d = weights.len();
        let blocks = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let e =
                    Operator::from_columns(&[d], &[Operator::<C>::basis_vector(&[d], &[k + 1]).column(0)]);
                Ok((w, SubspaceBasis::new(e, DEFAULT_TOL)?))
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedSpace::new(d, blocks)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[C] {
        &self.weights
    }
}

/// A family `Ř′(u, v, λ)` on `V ⊗ V`.
pub trait DynamicalFamily {
    fn dim(&self) -> usize;
    fn build(&self, u: C, v: C, lambda: C) -> Result<Operator<C>>;
}

/// `log q` on the branch `principal + 2πik`.
pub fn log_q(q: C, branch: i64) -> C {
    q.ln() + C::new(0.0, TAU * branch as f64)
}

/// `Ř″(u, v, λ) = Ř^{±,(n)}(u, v; e^{aλ})`.
#[derive(Clone, Debug)]
pub struct DynamicalR {
    pub q: QParam<C>,
    pub n: usize,
    pub sign: Sign,
    pub a: C,
    pub branch: i64,
    dim: usize,
}

impl DynamicalR {
    /// Requires `|e^a − q| ≤ tol·|q|`.
    pub fn new(q: &QParam<C>, n: usize, sign: Sign, a: C, tol: f64) -> Result<Self> {
        if (a.exp() - q.q).norm() > tol * q.q.norm() {
            return Err(Error::Consistency(format!(
                "e^a = {} differs from q = {}",
                a.exp(),
                q.q
            )));
        }
        let branch = ((a - q.q.ln()).im / TAU).round() as i64;
        let dim = fused_space(q, n, &C::new(1.0, 0.0), sign)?.dim();
        Ok(DynamicalR {
            q: q.clone(),
            n,
            sign,
            a,
            branch,
            dim,
        })
    }

    pub fn on_branch(q: &QParam<C>, n: usize, sign: Sign, branch: i64) -> Result<Self> {
        DynamicalR::new(q, n, sign, log_q(q.q, branch), 1e-12)
    }

    /// `e^{aλ}`
    pub fn x_of(&self, lambda: C) -> C {
        (self.a * lambda).exp()
    }

    /// The weight `μ(1) = −n` of the whole fused space.
    pub fn weight(&self) -> C {
        C::new(-(self.n as f64), 0.0)
    }

    pub fn space(&self) -> WeightedSpace {
        WeightedSpace::single(self.dim, self.weight())
    }
}

impl DynamicalFamily for DynamicalR {
    fn dim(&self) -> usize {
        self.dim
    }
    fn build(&self, u: C, v: C, lambda: C) -> Result<Operator<C>> {
        fused_r(&self.q, self.n, &u, &v, &self.x_of(lambda), self.sign)
    }
}

/// `Ř′_{23}(u, v, λ − h^{(1)})`: on `V_μ ⊗ V ⊗ V` it is `I ⊗ Ř′(u, v, λ − μ)`.
/// A single weight needs no projector and stays a two-leg factor on legs 2, 3.
fn shifted_factor<F: DynamicalFamily>(
    f: &F,
    space: &WeightedSpace,
    u: C,
    v: C,
    lambda: C,
) -> Result<(Operator<C>, usize)> {
    let d = space.dim();
    if space.weights.len() == 1 {
        return Ok((f.build(u, v, lambda - space.weights[0])?, 2));
    }
    let mut total = Operator::square_zeros(&[d, d, d]);
    for (mu, p) in space.weights.iter().zip(&space.projectors) {
        total = total.add(&kron(p, &f.build(u, v, lambda - mu)?));
    }
    Ok((total.with_legs(&[d, d, d])?, 1))
}

/// The six factors of the dynamical Yang–Baxter equation.
pub fn dynamical_operands<F: DynamicalFamily>(
    f: &F,
    space: &WeightedSpace,
    u: C,
    v: C,
    w: C,
    lambda: C,
) -> Result<YbeOperands<C>> {
    let d = f.dim();
    if space.dim() != d {
        return Err(Error::Dimension(format!(
            "weighted space of dimension {} for an R-matrix on {d}",
            space.dim()
        )));
    }
    Ok(YbeOperands {
        legs: vec![d, d, d],
        lhs: [
            (f.build(v, w, lambda)?, 1),
            shifted_factor(f, space, u, w, lambda)?,
            (f.build(u, v, lambda)?, 1),
        ],
        rhs: [
            shifted_factor(f, space, u, v, lambda)?,
            (f.build(u, w, lambda)?, 1),
            shifted_factor(f, space, v, w, lambda)?,
        ],
    })
}

/// Checks the dynamical equation on a given weight decomposition.
pub fn check_dynamical_family<F: DynamicalFamily>(
    f: &F,
    space: &WeightedSpace,
    u: C,
    v: C,
    w: C,
    lambda: C,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let ops = dynamical_operands(f, space, u, v, w, lambda)?;
    Ok(
        CheckReport::new("dynamical-ybe", Backend::Numeric, ops.residual()?, tol)
            .detail("weights", space.weights().len())
            .since(start),
    )
}

/// The dynamical equation for `Ř″` with weight `μ(1) = −n` (or `weight`),
/// compared with the twisted equation of shift `n` at `x = e^{aλ}`.
///
/// Besides the dynamical residual the report records the twisted residual
/// from independently built operands, the largest difference between the two
/// operand sets, and whether the twisted evaluation of the dynamical operands
/// reproduces the dynamical residual bit for bit.
#[allow(clippy::too_many_arguments)]
pub fn check_dynamical_ybe(
    dr: &DynamicalR,
    u: C,
    v: C,
    w: C,
    lambda: C,
    weight: Option<C>,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let space = WeightedSpace::single(dr.dim, weight.unwrap_or_else(|| dr.weight()));
    let ops = dynamical_operands(dr, &space, u, v, w, lambda)?;
    let residual = ops.residual()?;

    let x = dr.x_of(lambda);
    let builder = FusedBuilder::new(&dr.q, dr.n, dr.sign, &x)?;
    let twisted = YbeOperands::from_builder(&builder, &u, &v, &w, &x)?;
    let twisted_residual = twisted.residual()?;
    let operand_gap = ops
        .lhs
        .iter()
        .chain(&ops.rhs)
        .zip(twisted.lhs.iter().chain(&twisted.rhs))
        .map(|((a, _), (b, _))| a.compare(b))
        .fold(Residual::Numeric(0.0), Residual::max);
    let replay = YbeOperands {
        legs: ops.legs.clone(),
        lhs: ops.lhs.clone(),
        rhs: ops.rhs.clone(),
    }
    .residual()?;
    let bitwise = replay.value().to_bits() == residual.value().to_bits();

    Ok(CheckReport::new(
        format!("dynamical-ybe-n{}-{}", dr.n, dr.sign.name()),
        Backend::Numeric,
        residual,
        tol,
    )
    .detail("weight", Scalar::to_json(&space.weights()[0]))
    .detail("lambda", Scalar::to_json(&lambda))
    .detail("log_q", Scalar::to_json(&dr.a))
    .detail("branch", dr.branch)
    .detail("twisted_residual", twisted_residual.to_json())
    .detail("operand_gap", operand_gap.to_json())
    .detail("same_operands_bitwise", bitwise)
    .since(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::sample_params;
    use crate::rbox::rbox_explicit;

    struct BoxAtZero(QParam<C>);

    impl DynamicalFamily for BoxAtZero {
        fn dim(&self) -> usize {
            4
        }
        fn build(&self, u: C, v: C, _lambda: C) -> Result<Operator<C>> {
            Ok(rbox_explicit(&self.0, &u, &v, &C::new(0.0, 0.0)))
        }
    }

    struct BoxDynamical(QParam<C>, C);

    impl DynamicalFamily for BoxDynamical {
        fn dim(&self) -> usize {
            4
        }
        fn build(&self, u: C, v: C, lambda: C) -> Result<Operator<C>> {
            Ok(rbox_explicit(&self.0, &u, &v, &(self.1 * lambda).exp()))
        }
    }

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn setup(seed: u64) -> (QParam<C>, crate::params::ParamSet) {
        let p = sample_params(seed).unwrap();
        (QParam::new(p.q).unwrap(), p)
    }

    #[test]
    fn exponent_must_match_q() {
        let (q, _) = setup(1);
        assert!(DynamicalR::new(&q, 2, Sign::Plus, q.q.ln() + 0.1, 1e-12).is_err());
        let dr = DynamicalR::on_branch(&q, 2, Sign::Plus, 0).unwrap();
        assert_eq!(dr.dim(), 8);
    }

    #[test]
    fn substitution_and_periodicity() {
        let (q, p) = setup(2);
        let dr = DynamicalR::on_branch(&q, 2, Sign::Plus, 0).unwrap();
        let lambda = p.x.ln() / dr.a;
        assert!((dr.x_of(lambda) - p.x).norm() < 1e-12);
        let direct = fused_r(&q, 2, &p.u, &p.v, &p.x, Sign::Plus).unwrap();
        assert!(dr.build(p.u, p.v, lambda).unwrap().compare(&direct).passes(1e-10));
        let period = C::new(0.0, TAU) / dr.a;
        let shifted = dr.build(p.u, p.v, lambda + period).unwrap();
        assert!(shifted.compare(&direct).passes(1e-10));
        assert!((dr.x_of(lambda + 2.0) - q.pow(2) * dr.x_of(lambda)).norm() < 1e-12);
    }

    #[test]
    fn branch_choice_is_a_reparametrization() {
        let (q, p) = setup(3);
        let a0 = DynamicalR::on_branch(&q, 2, Sign::Minus, 0).unwrap();
        let a1 = DynamicalR::on_branch(&q, 2, Sign::Minus, 1).unwrap();
        assert_eq!(a1.branch, 1);
        let lambda = C::new(0.3, -0.2);
        let moved = a0.a * lambda / a1.a;
        assert!((a1.x_of(moved) - a0.x_of(lambda)).norm() < 1e-12);
        let r0 = a0.build(p.u, p.v, lambda).unwrap();
        let r1 = a1.build(p.u, p.v, moved).unwrap();
        assert!(r0.compare(&r1).passes(1e-10));
    }

    #[test]
    fn weight_independent_family_accepts_any_weights() {
        let (q, p) = setup(4);
        let space = WeightedSpace::diagonal(&[c(0.0), c(1.0), c(2.0), c(3.0)]).unwrap();
        let r =
            check_dynamical_family(&BoxAtZero(q), &space, p.u, p.v, p.w, C::new(0.2, 0.1), 1e-10).unwrap();
        assert!(r.pass, "{:?}", r.residual);
    }

    #[test]
    fn multi_block_path_matches_single_block() {
        let (q, p) = setup(5);
        let a = q.q.ln();
        let family = BoxDynamical(q, a);
        let lambda = C::new(0.4, 0.3);
        let one = WeightedSpace::single(4, c(-1.0));
        let split = WeightedSpace::diagonal(&[c(-1.0); 4]).unwrap();
        let r1 = check_dynamical_family(&family, &one, p.u, p.v, p.w, lambda, 1e-10).unwrap();
        let r2 = check_dynamical_family(&family, &split, p.u, p.v, p.w, lambda, 1e-10).unwrap();
        assert!(r1.pass && r2.pass, "{:?} {:?}", r1.residual, r2.residual);
        let mixed = WeightedSpace::diagonal(&[c(-1.0), c(0.0), c(-1.0), c(-2.0)]).unwrap();
        let r3 = check_dynamical_family(&family, &mixed, p.u, p.v, p.w, lambda, 1e-9).unwrap();
        assert!(!r3.pass);
    }

    #[test]
    fn dependent_blocks_are_rejected() {
        let e = Operator::from_columns(&[2], &[vec![c(1.0), c(0.0)]]);
        let b = SubspaceBasis::new(e, DEFAULT_TOL).unwrap();
        assert!(WeightedSpace::new(2, vec![(c(0.0), b.clone()), (c(1.0), b)]).is_err());
    }

    #[test]
    fn fused_dynamical_equation() {
        let (q, p) = setup(6);
        let dr = DynamicalR::on_branch(&q, 2, Sign::Plus, 0).unwrap();
        let lambda = C::new(0.35, -0.6);
        let r = check_dynamical_ybe(&dr, p.u, p.v, p.w, lambda, None, 1e-8).unwrap();
        assert!(r.pass, "{:?}", r.details);
        assert_eq!(r.details["same_operands_bitwise"], true);
        assert!(r.details["operand_gap"].as_f64().unwrap() < 1e-10);
        assert!(r.details["twisted_residual"].as_f64().unwrap() < 1e-8);
        let fake = check_dynamical_ybe(&dr, p.u, p.v, p.w, lambda, Some(c(-3.0)), 1e-8).unwrap();
        assert!(!fake.pass && fake.residual.value() > 1e-3);
    }
}
