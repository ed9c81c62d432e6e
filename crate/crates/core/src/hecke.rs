//! The Hecke algebra `H_n(q²)` acting on `W_x^{(n)} = V_x ⊗ V_{qx} ⊗ … ⊗ V_{q^{n-1}x}`,
//! its full symmetrizers, and products of R-matrices along reduced words.

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{apply_at_leg, Operator};
use crate::perm::Permutation;
use crate::rbox::rbox_explicit;
use crate::report::CheckReport;
use crate::scalar::{QParam, Residual, Scalar};

/// Largest `n` for which symmetrizers are built by enumerating `S_n`.
pub const MAX_SYMMETRIZER_DEGREE: usize = 6;

/// Tolerance for the internal consistency checks of this module.
pub const INTERNAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }

    /// `(1, q^{∓2}, …, q^{∓2(n-1)})`
    pub fn spectral_pattern<S: Scalar>(self, q: &QParam<S>, n: usize) -> Vec<S> {
        let step = match self {
            Sign::Plus => -2,
            Sign::Minus => 2,
        };
        (0..n).map(|k| q.pow(step * k as i32)).collect()
    }

    /// Coefficient of `h(σ)` in `e_±` for `ℓ(σ) = len`.
    fn coefficient<S: Scalar>(self, q: &QParam<S>, len: usize) -> S {
        match self {
            Sign::Plus => S::one(),
            Sign::Minus => {
                let m = q.pow(-2 * len as i32);
                if len % 2 == 1 {
                    m.neg()
                } else {
                    m
                }
            }
        }
    }

    /// Eigenvalue of each `h_i` on the image of `e_±`.
    fn eigenvalue<S: Scalar>(self, q: &QParam<S>) -> S {
        match self {
            Sign::Plus => q.pow(2),
            Sign::Minus => S::from_int(-1),
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::Unsupported(format!("sign {other:?}"))),
        }
    }
}

/// `Ř_i(u, v; x)` for the pair of legs `i, i+1` of `W_x^{(n)}`: the 16×16
/// local matrix at deformation parameter `q^{i-1} x`.
pub fn local_r<S: Scalar>(q: &QParam<S>, i: usize, u: &S, v: &S, x: &S) -> Operator<S> {
    rbox_explicit(q, u, v, &q.pow(i as i32 - 1).mul(x))
}

/// `π_x^{(n)}(h_i)` for `i = 1..n-1`, stored as local 16×16 matrices on legs `i, i+1`.
#[derive(Clone, Debug)]
pub struct HeckeRep<S> {
    pub n: usize,
    pub q: QParam<S>,
    pub x: S,
    pub local: Vec<Operator<S>>,
}

fn h_from_probe<S: Scalar>(q: &QParam<S>, i: usize, x: &S, u: i64, v: i64) -> Result<Operator<S>> {
    let (us, vs) = (S::from_int(u), S::from_int(v));
    let r = local_r(q, i, &us, &vs, x);
    let shift = vs.mul(&q.pow(2).sub(&S::one()));
    let scale = S::one().try_div(&us.sub(&vs))?;
    Ok(r.sub(&Operator::identity(&[4, 4]).scale(&shift)).scale(&scale))
}

impl<S: Scalar> HeckeRep<S> {
    /// Solves `Ř_i(u,v;x) = u·h_i − v q² h_i⁻¹` for `h_i` at two probe pairs
    /// and requires the answers to agree.
    pub fn new(q: &QParam<S>, n: usize, x: &S) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("n must be positive".into()));
        }
        let mut local = Vec::with_capacity(n.saturating_sub(1));
        for i in 1..n {
            let a = h_from_probe(q, i, x, 2, 3)?;
            let b = h_from_probe(q, i, x, 5, 7)?;
            let res = a.compare(&b);
            if !res.passes(INTERNAL_TOL) {
                return Err(Error::Consistency(format!(
                    "Hecke generator {i} depends on the probe pair (residual {})",
                    res.to_json()
                )));
            }
            local.push(a);
        }
        Ok(HeckeRep {
            n,
            q: q.clone(),
            x: x.clone(),
            local,
        })
    }

    pub fn legs(&self) -> Vec<usize> {
        vec![4; self.n]
    }

    pub fn dim(&self) -> usize {
        4usize.pow(self.n as u32)
    }

    /// `π(h_i)·target`
    pub fn apply(&self, i: usize, target: &Operator<S>) -> Result<Operator<S>> {
        apply_at_leg(&self.local[i - 1], i, &self.legs(), target)
    }

    /// The full `4^n × 4^n` image of `h_i`.
    pub fn generator(&self, i: usize) -> Result<Operator<S>> {
        self.apply(i, &Operator::identity(&self.legs()))
    }

    /// `π(h(σ)) = π(h_{w_1}) ⋯ π(h_{w_k})` along the canonical reduced word.
    pub fn image(&self, sigma: &Permutation) -> Result<Operator<S>> {
        let mut acc = Operator::identity(&self.legs());
        for &i in sigma.reduced_word().iter().rev() {
            acc = self.apply(i, &acc)?;
        }
        Ok(acc)
    }

    /// Quadratic, braid and far-commutation relations.
    pub fn check_relations(&self, tol: f64) -> Result<CheckReport> {
        let start = Instant::now();
        let id = Operator::identity(&self.legs());
        let q2 = self.q.pow(2);
        let gens = (1..self.n)
            .map(|i| self.generator(i))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = Residual::ExactZero;
        let mut count = 0usize;
        let mut push = |r: Residual| {
            worst = if count == 0 { r } else { worst.max(r) };
            count += 1;
        };
        for (k, h) in gens.iter().enumerate() {
            let lhs = h.sub(&id.scale(&q2)).matmul(&h.add(&id));
            let floor = h.frobenius().powi(2) + id.frobenius();
            push(lhs.compare_with_floor(&Operator::square_zeros(&self.legs()), floor));
            for (l, g) in gens.iter().enumerate().skip(k + 1) {
                let floor = (h.frobenius() * h.frobenius() * g.frobenius()).max(1.0);
                if l == k + 1 {
                    let a = h.matmul(g).matmul(h);
                    let b = g.matmul(h).matmul(g);
                    push(a.compare_with_floor(&b, floor));
                } else {
                    push(h.matmul(g).compare_with_floor(&g.matmul(h), floor));
                }
            }
        }
        Ok(
            CheckReport::new(format!("hecke-relations-n{}", self.n), S::BACKEND, worst, tol)
                .detail("n", self.n)
                .detail("relations_checked", count)
                .since(start),
        )
    }
}

/// `π(e_±)` with `e_+ = Σ h(σ)` and `e_− = Σ (−q⁻²)^{ℓ(σ)} h(σ)`, the constant
/// `c_± = Σ q^{±2ℓ(σ)}` with `π(e_±)² = c_± π(e_±)`, and the idempotent `π(e_±)/c_±`.
#[derive(Clone, Debug)]
pub struct Symmetrizer<S> {
    pub sign: Sign,
    pub raw: Operator<S>,
    pub constant: S,
    pub idempotent: Operator<S>,
    /// Largest residual among the eigen-relations and the square relation.
    pub residual: Residual,
}

/// Builds every `π(h(σ))` by extending shorter permutations one generator
/// at a time, then sums with the sign-dependent coefficients.
pub fn symmetrizer<S: Scalar>(rep: &HeckeRep<S>, sign: Sign) -> Result<Symmetrizer<S>> {
    let n = rep.n;
    if n > MAX_SYMMETRIZER_DEGREE {
        return Err(Error::Unsupported(format!(
            "symmetrizers are enumerated only up to n = {MAX_SYMMETRIZER_DEGREE}"
        )));
    }
    let mut perms = Permutation::all(n);
    perms.sort_by_key(Permutation::length);
    let mut images: HashMap<Vec<usize>, Operator<S>> = HashMap::new();
    let q = &rep.q;
    let mut raw = Operator::square_zeros(&rep.legs());
    let mut constant = S::zero();
    let exponent = match sign {
        Sign::Plus => 2,
        Sign::Minus => -2,
    };
    for sigma in &perms {
        let image = match sigma.reduced_word().first() {
            None => Operator::identity(&rep.legs()),
            Some(&i) => {
                let rest = Permutation::simple(n, i)?.compose(sigma);
                rep.apply(i, &images[rest.one_line()])?
            }
        };
        let len = sigma.length();
        raw = raw.add(&image.scale(&sign.coefficient(q, len)));
        constant = constant.add(&q.pow(exponent * len as i32));
        images.insert(sigma.one_line().to_vec(), image);
    }
    let lambda = sign.eigenvalue(q);
    let mut residual = raw.matmul(&raw).compare(&raw.scale(&constant));
    for i in 1..n {
        let r = rep.apply(i, &raw)?.compare(&raw.scale(&lambda));
        residual = residual.max(r);
    }
    if !residual.passes(INTERNAL_TOL) {
        return Err(Error::Consistency(format!(
            "symmetrizer relations fail (residual {})",
            residual.to_json()
        )));
    }
    let idempotent = raw.scale(&constant.inv()?);
    Ok(Symmetrizer {
        sign,
        raw,
        constant,
        idempotent,
        residual,
    })
}

/// `Ř(a; x | σ)·target`, composed right to left along the reduced word with
/// the spectral tuple permuted after each factor.
pub fn apply_chain<S: Scalar>(
    q: &QParam<S>,
    a: &[S],
    x: &S,
    word: &[usize],
    target: &Operator<S>,
) -> Result<Operator<S>> {
    let n = a.len();
    let legs = vec![4; n];
    let mut params = a.to_vec();
    let mut acc = target.clone();
    for &i in word.iter().rev() {
        if i == 0 || i >= n {
            return Err(Error::InvalidPermutation(word.to_vec()));
        }
        let r = local_r(q, i, &params[i - 1], &params[i], x);
        acc = apply_at_leg(&r, i, &legs, &acc)?;
        params.swap(i - 1, i);
    }
    Ok(acc)
}

/// `Π ‖Ř_k‖_F / 4` over the factors of the chain: a size estimate of the
/// product, used as a residual floor when the product may vanish.
pub fn chain_scale<S: Scalar>(q: &QParam<S>, a: &[S], x: &S, word: &[usize]) -> f64 {
    let mut params = a.to_vec();
    let mut scale = 1.0;
    for &i in word.iter().rev() {
        scale *= local_r(q, i, &params[i - 1], &params[i], x).frobenius() / 4.0;
        params.swap(i - 1, i);
    }
    scale
}

/// `Ř(a; x | σ)` on `W_x^{(n)}`.
pub fn chain_r<S: Scalar>(q: &QParam<S>, a: &[S], x: &S, sigma: &Permutation) -> Result<Operator<S>> {
    chain_r_word(q, a, x, sigma.reduced_word())
}

/// The same product along an arbitrary word.
pub fn chain_r_word<S: Scalar>(q: &QParam<S>, a: &[S], x: &S, word: &[usize]) -> Result<Operator<S>> {
    apply_chain(q, a, x, word, &Operator::identity(&vec![4; a.len()]))
}

/// Outcome of the proportionality `Ř(u p_±; x | γ_n) = u^{ℓ(γ_n)} a_± π(e_±)`.
#[derive(Clone, Debug)]
pub struct Lemma2Fit {
    pub constant: Complex64,
    pub residual: Residual,
}

fn proportional_fit(m: &Operator<Complex64>, basis: &Operator<Complex64>) -> (Complex64, Residual) {
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for (a, b) in basis.entries().iter().zip(m.entries()) {
        num += a.conj() * b;
        den += a.norm_sqr();
    }
    let ratio = num / den;
    (ratio, m.compare(&basis.scale(&ratio)))
}

pub fn lemma2_fit(
    q: &QParam<Complex64>,
    n: usize,
    u: Complex64,
    x: Complex64,
    sign: Sign,
) -> Result<Lemma2Fit> {
    let rep = HeckeRep::new(q, n, &x)?;
    let sym = symmetrizer(&rep, sign)?;
    let a: Vec<Complex64> = sign.spectral_pattern(q, n).iter().map(|p| p * u).collect();
    let gamma = Permutation::reversal(n);
    let chain = chain_r(q, &a, &x, &gamma)?;
    let (ratio, residual) = proportional_fit(&chain, &sym.raw);
    Ok(Lemma2Fit {
        constant: ratio / u.powi(gamma.length() as i32),
        residual,
    })
}

/// `a_±(q)` with probes at `(u, x)`, `(2u, x)` and `(u, x + 1)`.
pub fn lemma2_constant(
    q: &QParam<Complex64>,
    n: usize,
    u: Complex64,
    x: Complex64,
    sign: Sign,
    tol: f64,
) -> Result<(Complex64, CheckReport)> {
    let start = Instant::now();
    let probes = [(u, x), (u * 2.0, x), (u, x + 1.0)];
    let fits = probes
        .iter()
        .map(|&(u, x)| lemma2_fit(q, n, u, x, sign))
        .collect::<Result<Vec<_>>>()?;
    let a = fits[0].constant;
    let proportional = fits
        .iter()
        .map(|f| f.residual)
        .fold(Residual::Numeric(0.0), Residual::max);
    let spread = fits
        .iter()
        .map(|f| (f.constant - a).norm() / a.norm())
        .fold(0.0, f64::max);
    if !proportional.passes(tol) {
        return Err(Error::Consistency(format!(
            "chain product not proportional to the symmetrizer (residual {})",
            proportional.to_json()
        )));
    }
    let report = CheckReport::new(
        format!("lemma2-n{n}-{}", sign.name()),
        crate::scalar::Backend::Numeric,
        proportional.max(Residual::Numeric(spread)),
        tol,
    )
    .detail("a", Scalar::to_json(&a))
    .detail("proportionality_residual", proportional.to_json())
    .detail("probe_spread", spread)
    .since(start);
    Ok((a, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;
    use crate::params::sample_params;
    use crate::rbox::projectors;

    type C = Complex64;

    fn setup(seed: u64) -> (QParam<C>, C, C) {
        let p = sample_params(seed).unwrap();
        (QParam::new(p.q).unwrap(), p.x, p.u)
    }

    #[test]
    fn hecke_relations_n2_to_n4() {
        for seed in 0..3 {
            let (q, x, _) = setup(seed);
            for n in 2..=4 {
                let rep = HeckeRep::new(&q, n, &x).unwrap();
                let r = rep.check_relations(1e-10).unwrap();
                assert!(r.pass, "seed {seed} n {n}: {:?}", r.residual);
            }
        }
    }

    #[test]
    fn generator_is_projector_combination() {
        let (q, x, _) = setup(1);
        let rep = HeckeRep::new(&q, 2, &x).unwrap();
        let (p1, p2) = projectors(&q, &x).unwrap();
        let expect = p1.scale(&q.pow(2)).sub(&p2);
        assert!(rep.local[0].compare(&expect).passes(1e-12));
    }

    #[test]
    fn symmetrizers_for_two_factors() {
        let (q, x, _) = setup(2);
        let rep = HeckeRep::new(&q, 2, &x).unwrap();
        let (p1, p2) = projectors(&q, &x).unwrap();
        let plus = symmetrizer(&rep, Sign::Plus).unwrap();
        assert!((plus.constant - (q.pow(2) + 1.0)).norm() < 1e-14);
        assert!(plus.raw.compare(&p1.scale(&(q.pow(2) + 1.0))).passes(1e-12));
        let minus = symmetrizer(&rep, Sign::Minus).unwrap();
        assert!(minus.raw.compare(&p2.scale(&(q.pow(-2) + 1.0))).passes(1e-12));
    }

    #[test]
    fn symmetrizer_constants_and_ranks() {
        let (q, x, _) = setup(3);
        for (n, d) in [(2, 8), (3, 12)] {
            let rep = HeckeRep::new(&q, n, &x).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                let s = symmetrizer(&rep, sign).unwrap();
                let e = if sign == Sign::Plus { 2 } else { -2 };
                let c: C = Permutation::all(n)
                    .iter()
                    .map(|p| q.pow(e * p.length() as i32))
                    .sum();
                assert!((s.constant - c).norm() < 1e-12);
                assert_eq!(rank(&s.raw, 1e-9), d, "n {n} {sign:?}");
            }
        }
        let rep = HeckeRep::new(&q, 7, &x);
        assert!(matches!(
            rep.and_then(|r| symmetrizer(&r, Sign::Plus)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn chain_base_cases() {
        let (q, x, u) = setup(4);
        let v = u * C::new(0.3, 1.1);
        let id = chain_r(&q, &[u, v, u], &x, &Permutation::identity(3)).unwrap();
        assert!(id.compare(&Operator::identity(&[4, 4, 4])).passes(1e-15));
        let s1 = chain_r(&q, &[u, v], &x, &Permutation::simple(2, 1).unwrap()).unwrap();
        assert!(s1.compare(&rbox_explicit(&q, &u, &v, &x)).passes(1e-15));
    }

    #[test]
    fn chain_independent_of_reduced_word() {
        let p = sample_params(5).unwrap();
        let q = QParam::new(p.q).unwrap();
        for n in [3, 4] {
            let a: Vec<C> = [p.u, p.v, p.w, p.u * p.v].into_iter().take(n).collect();
            let words = Permutation::reversal(n).all_reduced_words();
            let first = chain_r_word(&q, &a, &p.x, &words[0]).unwrap();
            for w in &words[1..] {
                let other = chain_r_word(&q, &a, &p.x, w).unwrap();
                assert!(first.compare(&other).passes(1e-10), "n {n} word {w:?}");
            }
        }
    }

    #[test]
    fn lemma2_two_factors() {
        let (q, x, u) = setup(6);
        let (ap, rep) = lemma2_constant(&q, 2, u, x, Sign::Plus, 1e-10).unwrap();
        assert!(rep.pass, "{:?}", rep.details);
        assert!((ap - (1.0 - q.pow(-2))).norm() < 1e-10);
        let (am, rep) = lemma2_constant(&q, 2, u, x, Sign::Minus, 1e-10).unwrap();
        assert!(rep.pass);
        assert!((am - q.pow(2) * (q.pow(2) - 1.0)).norm() < 1e-10);
    }

    #[test]
    fn lemma2_three_factors() {
        let (q, x, u) = setup(7);
        for sign in [Sign::Plus, Sign::Minus] {
            let (a, rep) = lemma2_constant(&q, 3, u, x, sign, 1e-9).unwrap();
            assert!(rep.pass, "{sign:?}: {:?}", rep.details);
            assert!(a.norm() > 1e-6);
        }
    }
}
