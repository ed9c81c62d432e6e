//! Fused spaces `V_{±,x} = π(e_±) W_x^{(n)}`, the fused R-matrices acting on
//! `V_{±,x} ⊗ V_{±,q^n x}`, and the checks tying them to the algebra action.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::hecke::{
    apply_chain, chain_r, chain_scale, symmetrizer, HeckeRep, Sign, Symmetrizer, INTERNAL_TOL,
};
use crate::linalg::{
    column_space, commutant_dimension, kron, restrict_image, restrict_image_with_floor, Operator,
    SubspaceBasis,
};
use crate::perm::{concat, Permutation};
use crate::rbox::{check_intertwine, RBuilder};
use crate::rep::{rho_tuple, Generator, LocalRep, TensorRep};
use crate::report::CheckReport;
use crate::scalar::{QParam, Residual, Scalar};

/// The image of the normalized symmetrizer in `W_x^{(n)}`.
#[derive(Clone, Debug)]
pub struct FusedSpace<S> {
    pub sign: Sign,
    pub n: usize,
    pub x: S,
    pub symmetrizer: Symmetrizer<S>,
    pub basis: SubspaceBasis<S>,
}

impl<S: Scalar> FusedSpace<S> {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

pub fn fused_space<S: Scalar>(q: &QParam<S>, n: usize, x: &S, sign: Sign) -> Result<FusedSpace<S>> {
    let hecke = HeckeRep::new(q, n, x)?;
    let sym = symmetrizer(&hecke, sign)?;
    let mut basis = column_space(&sym.idempotent, INTERNAL_TOL);
    if basis.dim() == 0 {
        return Err(Error::Consistency("symmetrizer has zero image".into()));
    }
    let fit = restrict_image(&sym.idempotent.matmul(basis.columns()), &basis)?;
    let id = Operator::identity(&[basis.dim()]);
    let res = fit.matrix.compare(&id);
    if !res.passes(INTERNAL_TOL) {
        return Err(Error::Consistency(format!(
            "symmetrizer is not the identity on its image (residual {})",
            res.to_json()
        )));
    }
    basis = SubspaceBasis::new(basis.columns().clone().with_legs(&vec![4; n])?, INTERNAL_TOL)?;
    Ok(FusedSpace {
        sign,
        n,
        x: x.clone(),
        symmetrizer: sym,
        basis,
    })
}

/// `γ_n[u p_±]`
pub fn fused_tuple<S: Scalar>(q: &QParam<S>, n: usize, u: &S, sign: Sign) -> Vec<S> {
    let a: Vec<S> = sign.spectral_pattern(q, n).iter().map(|p| p.mul(u)).collect();
    Permutation::reversal(n).act_on_tuple(&a)
}

/// `γ_n[u p_±] ∪ γ_n[v p_±]`
pub fn fused_pair_tuple<S: Scalar>(q: &QParam<S>, n: usize, u: &S, v: &S, sign: Sign) -> Vec<S> {
    concat(&fused_tuple(q, n, u, sign), &fused_tuple(q, n, v, sign))
}

/// The fused R-matrix built against explicit fused spaces for `x` and `q^n x`,
/// together with the invariance residual of the restriction.
pub fn fused_r_on<S: Scalar>(
    q: &QParam<S>,
    u: &S,
    v: &S,
    first: &FusedSpace<S>,
    second: &FusedSpace<S>,
) -> Result<(Operator<S>, Residual)> {
    let n = first.n;
    let basis = first.basis.tensor(&second.basis);
    let a = fused_pair_tuple(q, n, u, v, first.sign);
    let tau = Permutation::block_swap(n);
    let image = apply_chain(q, &a, &first.x, tau.reduced_word(), basis.columns())?;
    let floor = chain_scale(q, &a, &first.x, tau.reduced_word()) * basis.columns().frobenius();
    let fit = restrict_image_with_floor(&image, &basis, floor)?;
    let d = first.dim();
    Ok((fit.matrix.with_legs(&[d, second.dim()])?, fit.residual))
}

/// `Ř^{±,(n)}(u, v; x)` on `V_{±,x} ⊗ V_{±,q^n x}`.
pub fn fused_r<S: Scalar>(q: &QParam<S>, n: usize, u: &S, v: &S, x: &S, sign: Sign) -> Result<Operator<S>> {
    let first = fused_space(q, n, x, sign)?;
    let second = fused_space(q, n, &q.pow(n as i32).mul(x), sign)?;
    let (r, res) = fused_r_on(q, u, v, &first, &second)?;
    if !res.passes(INTERNAL_TOL) {
        return Err(Error::NotInvariant {
            column: 0,
            residual: res.value(),
        });
    }
    Ok(r)
}

/// [`RBuilder`] for the fused R-matrices.
#[derive(Clone, Debug)]
pub struct FusedBuilder<S> {
    pub q: QParam<S>,
    pub n: usize,
    pub sign: Sign,
    pub shift: i32,
    dim: usize,
}

impl<S: Scalar> FusedBuilder<S> {
    /// Shift defaults to `n`; the fused dimension is measured once at `x`.
    pub fn new(q: &QParam<S>, n: usize, sign: Sign, x: &S) -> Result<Self> {
        let dim = fused_space(q, n, x, sign)?.dim();
        Ok(FusedBuilder {
            q: q.clone(),
            n,
            sign,
            shift: n as i32,
            dim,
        })
    }

    pub fn with_shift(mut self, shift: i32) -> Self {
        self.shift = shift;
        self
    }
}

impl<S: Scalar> RBuilder<S> for FusedBuilder<S> {
    fn local_dim(&self) -> usize {
        self.dim
    }
    fn shift(&self) -> i32 {
        self.shift
    }
    fn q(&self) -> &QParam<S> {
        &self.q
    }
    fn build(&self, u: &S, v: &S, x: &S) -> Result<Operator<S>> {
        fused_r(&self.q, self.n, u, v, x, self.sign)
    }
}

/// `Ř(γ_n[up]∪γ_n[vp]; x | τ)·(E ⊗ E') = (E ⊗ E')·Ř(up∪vp; x | τ)`, where `E`
/// and `E'` are the idempotents on `W_x^{(n)}` and `W_{q^m x}^{(n)}`. The
/// second block sits at `q^n x` unless `shift` overrides the exponent.
#[allow(clippy::too_many_arguments)]
pub fn check_projector_commutation<S: Scalar>(
    q: &QParam<S>,
    n: usize,
    u: &S,
    v: &S,
    x: &S,
    sign: Sign,
    shift: Option<i32>,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let m = shift.unwrap_or(n as i32);
    let e1 = symmetrizer(&HeckeRep::new(q, n, x)?, sign)?.idempotent;
    let e2 = symmetrizer(&HeckeRep::new(q, n, &q.pow(m).mul(x))?, sign)?.idempotent;
    let proj = kron(&e1, &e2);
    let tau = Permutation::block_swap(n);
    let reversed = fused_pair_tuple(q, n, u, v, sign);
    let pattern = |w: &S| -> Vec<S> { sign.spectral_pattern(q, n).iter().map(|p| p.mul(w)).collect() };
    let plain = concat(&pattern(u), &pattern(v));
    let left = chain_r(q, &reversed, x, &tau)?;
    let right = chain_r(q, &plain, x, &tau)?;
    let lhs = left.matmul(&proj);
    let rhs = proj.matmul(&right);
    let floor = left.frobenius().max(right.frobenius()) * proj.frobenius();
    let res = lhs.compare_with_floor(&rhs, floor);
    Ok(CheckReport::new(
        format!("projector-commutation-n{n}-{}", sign.name()),
        S::BACKEND,
        res,
        tol,
    )
    .detail("shift", m)
    .since(start))
}

/// `ρ^{±,(n)}_{u,x}`: the `n`-fold representation restricted to `V_{±,x}`.
pub fn fused_rep<S: Scalar>(q: &QParam<S>, space: &FusedSpace<S>, u: &S, tol: f64) -> Result<LocalRep<S>> {
    let a = fused_tuple(q, space.n, u, space.sign);
    let full = rho_tuple(q, &a, &space.x)?.collapse()?;
    full.restrict(&space.basis, tol)
}

/// Compares `ρ^{±,(n)}_{u,x}` with `ρ^{±,(n)}_{1,x} ∘ χ_u` on `E_0` and `F_0`.
pub fn check_fused_twist<S: Scalar>(
    q: &QParam<S>,
    space: &FusedSpace<S>,
    u: &S,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let direct = fused_rep(q, space, u, tol)?;
    let twisted = fused_rep(q, space, &S::one(), tol)?.twist(u)?;
    let res = [Generator::E(0), Generator::F(0)]
        .iter()
        .map(|&g| direct.image(g).compare(twisted.image(g)))
        .fold(Residual::ExactZero, Residual::max);
    Ok(CheckReport::new(
        format!("fused-twist-n{}-{}", space.n, space.sign.name()),
        S::BACKEND,
        res,
        tol,
    )
    .since(start))
}

/// Commutant dimension of all generator images of `ρ^{±,(n)}_{u,x}`.
pub fn fused_commutant<S: Scalar>(q: &QParam<S>, space: &FusedSpace<S>, u: &S, tol: f64) -> Result<usize> {
    let rep = fused_rep(q, space, u, tol)?;
    let ops: Vec<_> = Generator::ALL.iter().map(|&g| rep.image(g).clone()).collect();
    Ok(commutant_dimension(&ops, tol))
}

/// Intertwining of the fused R-matrix between `ρ^{±,(n)}_{u,v}` and
/// `ρ^{±,(n)}_{v,u}`, the representations evaluated through the coproduct of
/// the two fused factors. Also compares each with the restriction of the
/// `2n`-fold representation. `r_override` replaces the R-matrix (negative controls).
#[allow(clippy::too_many_arguments)]
pub fn check_fused_intertwine<S: Scalar>(
    q: &QParam<S>,
    n: usize,
    u: &S,
    v: &S,
    x: &S,
    sign: Sign,
    r_override: Option<Operator<S>>,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let qn = q.pow(n as i32);
    let first = fused_space(q, n, x, sign)?;
    let second = fused_space(q, n, &qn.mul(x), sign)?;
    let (r, invariance) = fused_r_on(q, u, v, &first, &second)?;
    let r = r_override.unwrap_or(r);

    let pair = |a: &S, b: &S| -> Result<TensorRep<S>> {
        TensorRep::new(
            vec![fused_rep(q, &first, a, tol)?, fused_rep(q, &second, b, tol)?],
            q.clone(),
        )
    };
    let rep_uv = pair(u, v)?;
    let rep_vu = pair(v, u)?;

    // the same representation as a restriction of the 2n-fold one
    let big = rho_tuple(q, &fused_pair_tuple(q, n, u, v, sign), x)?;
    let basis = first.basis.tensor(&second.basis);
    let mut restriction = Residual::ExactZero;
    for g in Generator::primary() {
        let fit = restrict_image(&big.image(g).matmul(basis.columns()), &basis)?;
        restriction = restriction.max(fit.residual);
        restriction = restriction.max(fit.matrix.compare(&rep_uv.image(g)));
    }

    let gens: Vec<Generator> = Generator::primary().collect();
    let report = check_intertwine(&r, &rep_uv, &rep_vu, &gens, tol);
    let residual = report.residual.max(restriction);
    Ok(CheckReport::new(
        format!("fused-intertwine-n{n}-{}", sign.name()),
        S::BACKEND,
        residual,
        tol,
    )
    .detail("intertwine_residual", report.residual.to_json())
    .detail("restriction_residual", restriction.to_json())
    .detail("invariance_residual", invariance.to_json())
    .detail("failing", report.details["failing"].clone())
    .since(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::sample_params;
    use crate::rbox::{check_twisted_ybe, rbox_explicit};
    use num_complex::Complex64;

    type C = Complex64;

    fn setup(seed: u64) -> (QParam<C>, crate::params::ParamSet) {
        let p = sample_params(seed).unwrap();
        (QParam::new(p.q).unwrap(), p)
    }

    #[test]
    fn fused_dimensions() {
        for seed in [1, 2] {
            let (q, p) = setup(seed);
            for sign in [Sign::Plus, Sign::Minus] {
                assert_eq!(fused_space(&q, 2, &p.x, sign).unwrap().dim(), 8);
                assert_eq!(fused_space(&q, 3, &p.x, sign).unwrap().dim(), 12);
            }
        }
    }

    #[test]
    fn single_factor_is_the_box_matrix() {
        let (q, p) = setup(3);
        let r = fused_r(&q, 1, &p.u, &p.v, &p.x, Sign::Plus).unwrap();
        let rb = rbox_explicit(&q, &p.u, &p.v, &p.x);
        // the n = 1 fused space is all of C^4 with the standard basis
        assert!(r.compare(&rb).passes(1e-12));
    }

    #[test]
    fn equal_spectral_parameters_give_zero() {
        let (q, p) = setup(4);
        for sign in [Sign::Plus, Sign::Minus] {
            let generic = fused_r(&q, 2, &p.u, &p.v, &p.x, sign).unwrap();
            let r = fused_r(&q, 2, &p.u, &p.u, &p.x, sign).unwrap();
            assert!(r.max_magnitude() < 1e-12 * generic.max_magnitude(), "{sign:?}");
        }
    }

    #[test]
    fn inherited_unitarity() {
        let (q, p) = setup(5);
        let a = fused_r(&q, 2, &p.u, &p.v, &p.x, Sign::Plus).unwrap();
        let b = fused_r(&q, 2, &p.v, &p.u, &p.x, Sign::Plus).unwrap();
        let prod = b.matmul(&a);
        let c = *prod.get(0, 0);
        assert!(prod.compare(&Operator::identity(&[64]).scale(&c)).passes(1e-10));
    }

    #[test]
    fn projector_commutation() {
        let (q, p) = setup(6);
        for sign in [Sign::Plus, Sign::Minus] {
            let r = check_projector_commutation(&q, 2, &p.u, &p.v, &p.x, sign, None, 1e-9).unwrap();
            assert!(r.pass, "{sign:?} {:?}", r.residual);
        }
        let bad = check_projector_commutation(&q, 2, &p.u, &p.v, &p.x, Sign::Plus, Some(3), 1e-9).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn fused_representation() {
        let (q, p) = setup(7);
        let space = fused_space(&q, 2, &p.x, Sign::Plus).unwrap();
        let rep = fused_rep(&q, &space, &p.u, 1e-9).unwrap();
        let k1 = rep.image(Generator::K(1));
        let off: f64 = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| k1.get(i, j).norm())
            .sum();
        assert!(off < 1e-9, "K1 not diagonal in the extracted basis");
        assert!(check_fused_twist(&q, &space, &p.u, 1e-10).unwrap().pass);
        assert_eq!(fused_commutant(&q, &space, &p.u, 1e-9).unwrap(), 1);
    }

    #[test]
    fn fused_intertwining() {
        let (q, p) = setup(8);
        let r = check_fused_intertwine(&q, 2, &p.u, &p.v, &p.x, Sign::Plus, None, 1e-9).unwrap();
        assert!(r.pass, "{:?}", r.details);
        let zero = C::new(0.0, 0.0);
        let r = check_fused_intertwine(&q, 2, &p.u, &p.v, &zero, Sign::Minus, None, 1e-9).unwrap();
        assert!(r.pass, "{:?}", r.details);
        let id = Operator::identity(&[8, 8]);
        let r = check_fused_intertwine(&q, 2, &p.u, &p.v, &p.x, Sign::Plus, Some(id), 1e-9).unwrap();
        assert!(!r.pass);
        // the spectral twists only reach E0 and F0
        assert_eq!(r.details["failing"], serde_json::json!(["E0", "F0"]));
    }

    #[test]
    fn fused_ybe_two_factors() {
        let (q, p) = setup(9);
        for sign in [Sign::Plus, Sign::Minus] {
            let b = FusedBuilder::new(&q, 2, sign, &p.x).unwrap();
            let r = check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, 1e-8).unwrap();
            assert!(r.pass, "{sign:?} {:?}", r.residual);
        }
        let b = FusedBuilder::new(&q, 2, Sign::Plus, &p.x).unwrap().with_shift(1);
        let r = check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, 1e-8).unwrap();
        assert!(!r.pass && r.residual.value() > 1e-3);
    }
}
