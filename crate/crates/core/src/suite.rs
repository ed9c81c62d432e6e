//! Batch verification across seeds, streamed as [`CheckReport`]s.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use crate::dynamical::{check_dynamical_ybe, DynamicalR};
use crate::error::{Error, Result};
use crate::fusion::{
    check_fused_intertwine, check_fused_twist, check_projector_commutation, fused_commutant, fused_space,
    FusedBuilder,
};
use crate::hecke::{lemma2_constant, symmetrizer, HeckeRep, Sign};
use crate::linalg::{commutant_dimension, Operator};
use crate::params::{sample_params, ParamSet, Point};
use crate::poly::RatFunc;
use crate::rbox::{check_equal, check_intertwine, check_twisted_ybe, rbox_explicit, BoxBuilder};
use crate::rep::{check_lemma1, check_relations, lemma1_commutants, rho, rho_tuple, Generator};
use crate::report::CheckReport;
use crate::scalar::{Backend, QParam, Residual, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Relations,
    Lemma1,
    BoxYbe,
    Hecke,
    Lemma2,
    Fusion,
    FusedYbe,
    Dynamical,
    All,
}

impl Level {
    pub const NAMES: [&'static str; 9] = [
        "relations",
        "lemma1",
        "box-ybe",
        "hecke",
        "lemma2",
        "fusion",
        "fused-ybe",
        "dynamical",
        "all",
    ];

    fn expand(self) -> Vec<Level> {
        match self {
            Level::All => vec![
                Level::Relations,
                Level::Lemma1,
                Level::BoxYbe,
                Level::Hecke,
                Level::Lemma2,
                Level::Fusion,
                Level::FusedYbe,
                Level::Dynamical,
            ],
            other => vec![other],
        }
    }

    fn supports_exact(self) -> bool {
        matches!(self, Level::Relations | Level::Lemma1 | Level::BoxYbe)
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "relations" => Level::Relations,
            "lemma1" => Level::Lemma1,
            "box-ybe" | "box" => Level::BoxYbe,
            "hecke" => Level::Hecke,
            "lemma2" => Level::Lemma2,
            "fusion" => Level::Fusion,
            "fused-ybe" | "fused" => Level::FusedYbe,
            "dynamical" => Level::Dynamical,
            "all" => Level::All,
            other => return Err(Error::Unsupported(format!("unknown level {other:?}"))),
        })
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = Level::expand(Level::All)
            .iter()
            .position(|l| l == self)
            .unwrap_or(8);
        f.write_str(Level::NAMES[i])
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub level: Level,
    pub backend: Backend,
    /// Overrides every default tolerance when set.
    pub tol: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Fusion degree for the fusion, fused-ybe and dynamical levels.
    pub n: Option<usize>,
    /// Restricts fused checks to one sign.
    pub sign: Option<Sign>,
    pub negative_controls: bool,
    pub single_thread: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            level: Level::All,
            backend: Backend::Numeric,
            tol: None,
            seed: 0,
            samples: 1,
            n: None,
            sign: None,
            negative_controls: false,
            single_thread: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.backend == Backend::Exact && !self.level.expand().iter().all(|l| l.supports_exact()) {
            return Err(Error::Unsupported(format!(
                "level {} is numeric only; the exact backend covers relations, lemma1 and box-ybe",
                self.level
            )));
        }
        if self.samples == 0 && self.backend == Backend::Numeric {
            return Err(Error::Unsupported("samples must be positive".into()));
        }
        if let Some(n) = self.n {
            if !(1..=3).contains(&n) {
                return Err(Error::Unsupported(format!("fusion degree {n} outside 1..=3")));
            }
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Unsupported(format!("tolerance {t}")));
            }
        }
        Ok(())
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn signs(&self) -> Vec<Sign> {
        match self.sign {
            Some(s) => vec![s],
            None => vec![Sign::Plus, Sign::Minus],
        }
    }
}

/// Default tolerances per level.
pub mod tolerances {
    pub const RELATIONS: f64 = 1e-12;
    pub const LEMMA1: f64 = 1e-10;
    pub const LEMMA1_BREAK: f64 = 1e-3;
    pub const RBOX_EQUAL: f64 = 1e-12;
    pub const INTERTWINE: f64 = 1e-10;
    pub const BOX_YBE: f64 = 1e-9;
    pub const HECKE: f64 = 1e-10;
    pub const LEMMA2: f64 = 1e-10;
    pub const FUSION: f64 = 1e-9;
    pub const FUSED_YBE_2: f64 = 1e-8;
    pub const FUSED_YBE_3: f64 = 1e-7;
    pub const COMMUTANT: f64 = 1e-9;
    pub const NEGATIVE: f64 = 1e-3;
}

use tolerances as tols;

fn params_json(p: &ParamSet) -> serde_json::Value {
    serde_json::to_value(p).expect("parameters serialize")
}

/// A report whose residual is the distance of an observed integer from an expected one.
fn count_report(name: &str, observed: usize, expected: usize) -> CheckReport {
    let r = if observed == expected {
        Residual::Numeric(0.0)
    } else {
        Residual::Numeric(1.0)
    };
    CheckReport::new(name, Backend::Numeric, r, 0.5)
        .detail("observed", observed)
        .detail("expected", expected)
}

/// Checks whose deliberately broken input must be detected: `pass` means the
/// residual exceeded `tol`.
fn negative(report: CheckReport) -> CheckReport {
    report.expect_failure()
}

/// The two forms of the tensor-square R-matrix compared at the given point,
/// at `x = 0` and at `u = v`.
fn equal_reports<S: Scalar>(pt: &Point<S>, tol: f64) -> Result<Vec<CheckReport>> {
    let specializations = [
        ("generic", pt.clone()),
        ("x=0", pt.clone().with_x(S::zero())),
        ("u=v", pt.clone().with_uv(pt.u.clone(), pt.u.clone())),
    ];
    specializations
        .into_iter()
        .map(|(name, at)| Ok(check_equal(&at, tol)?.detail("specialization", name)))
        .collect()
}

struct Runner<'a> {
    config: &'a SuiteConfig,
    sink: &'a mut (dyn FnMut(&CheckReport) + Send),
    reports: Vec<CheckReport>,
}

impl Runner<'_> {
    fn emit(&mut self, report: CheckReport, params: Option<&ParamSet>) {
        let report = match params {
            Some(p) => report.with_params(params_json(p), Some(p.seed)),
            None => report,
        };
        (self.sink)(&report);
        self.reports.push(report);
    }

    fn exact(&mut self, level: Level) -> Result<()> {
        let pt = Point::<RatFunc>::symbolic();
        match level {
            Level::Relations => {
                let r = check_relations(&rho(&pt.q, &pt.x), &pt.q, 0.0);
                self.emit(r, None);
            }
            Level::Lemma1 => {
                let y = pt.q.q.mul(&pt.x);
                let r = check_lemma1(&pt.q, &pt.x, &y, 0.0)?;
                self.emit(r, None);
            }
            Level::BoxYbe => {
                for r in equal_reports(&pt, 0.0)? {
                    self.emit(r, None);
                }
                let b = BoxBuilder {
                    q: pt.q.clone(),
                    shift: 1,
                };
                self.emit(check_twisted_ybe(&b, &pt.u, &pt.v, &pt.w, &pt.x, 0.0)?, None);
            }
            _ => unreachable!("validated"),
        }
        Ok(())
    }

    fn numeric(&mut self, level: Level, p: &ParamSet) -> Result<()> {
        let c = self.config;
        let neg = c.negative_controls;
        let q = QParam::new(p.q)?;
        let pt = p.point();
        match level {
            Level::Relations => {
                let rep = rho(&q, &p.x);
                self.emit(check_relations(&rep, &q, c.tol(tols::RELATIONS)), Some(p));
                let ops: Vec<_> = Generator::ALL.iter().map(|&g| rep.image(g).clone()).collect();
                let dim = commutant_dimension(&ops, tols::COMMUTANT);
                self.emit(count_report("rho-commutant", dim, 1), Some(p));
                if neg {
                    let bumped = rep
                        .image(Generator::E(1))
                        .add(&Operator::elementary(4, 3, 3).scale(&Complex64::new(1e-3, 0.0)));
                    let bad = rep.with_image(Generator::E(1), bumped)?;
                    self.emit(
                        negative(check_relations(&bad, &q, c.tol(tols::RELATIONS))),
                        Some(p),
                    );
                }
            }
            Level::Lemma1 => {
                let y = q.q * p.x;
                self.emit(check_lemma1(&q, &p.x, &y, c.tol(tols::LEMMA1))?, Some(p));
                let off = check_lemma1(&q, &p.x, &p.y, c.tol(tols::LEMMA1))?;
                let v2 = Residual::Numeric(off.details["v2_residual"].as_f64().unwrap_or(0.0));
                let r = CheckReport::new("lemma1-y-not-qx", Backend::Numeric, v2, tols::LEMMA1_BREAK)
                    .expect_failure()
                    .detail("y", Scalar::to_json(&p.y));
                self.emit(r, Some(p));
                let (d1, d2) = lemma1_commutants(&q, &p.x, tols::COMMUTANT)?;
                self.emit(count_report("lemma1-commutant-v1", d1, 1), Some(p));
                self.emit(count_report("lemma1-commutant-v2", d2, 1), Some(p));
            }
            Level::BoxYbe => {
                for r in equal_reports(&pt, c.tol(tols::RBOX_EQUAL))? {
                    self.emit(r, Some(p));
                }
                let r = rbox_explicit(&q, &p.u, &p.v, &p.x);
                let a = rho_tuple(&q, &[p.u, p.v], &p.x)?;
                let b = rho_tuple(&q, &[p.v, p.u], &p.x)?;
                let gens: Vec<Generator> = Generator::primary().collect();
                self.emit(
                    check_intertwine(&r, &a, &b, &gens, c.tol(tols::INTERTWINE)),
                    Some(p),
                );
                let good = BoxBuilder {
                    q: q.clone(),
                    shift: 1,
                };
                self.emit(
                    check_twisted_ybe(&good, &p.u, &p.v, &p.w, &p.x, c.tol(tols::BOX_YBE))?,
                    Some(p),
                );
                if neg {
                    let bad = BoxBuilder {
                        q: q.clone(),
                        shift: 0,
                    };
                    let r = check_twisted_ybe(&bad, &p.u, &p.v, &p.w, &p.x, tols::NEGATIVE)?;
                    self.emit(negative(r), Some(p));
                    let id = Operator::identity(&[4, 4]);
                    let r = check_intertwine(&id, &a, &b, &[Generator::E(0)], c.tol(tols::INTERTWINE));
                    self.emit(negative(r), Some(p));
                }
            }
            Level::Hecke => {
                for n in 2..=4 {
                    let rep = HeckeRep::new(&q, n, &p.x)?;
                    self.emit(rep.check_relations(c.tol(tols::HECKE))?, Some(p));
                    for sign in [Sign::Plus, Sign::Minus] {
                        let start = Instant::now();
                        let s = symmetrizer(&rep, sign)?;
                        let r = CheckReport::new(
                            format!("symmetrizer-n{n}-{}", sign.name()),
                            Backend::Numeric,
                            s.residual,
                            c.tol(tols::HECKE),
                        )
                        .detail("constant", Scalar::to_json(&s.constant))
                        .since(start);
                        self.emit(r, Some(p));
                    }
                }
            }
            Level::Lemma2 => {
                for n in [2, 3] {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let (a, r) = lemma2_constant(&q, n, p.u, p.x, sign, c.tol(tols::LEMMA2))?;
                        self.emit(r, Some(p));
                        if n == 2 {
                            let expected = match sign {
                                Sign::Plus => 1.0 - q.pow(-2),
                                Sign::Minus => q.pow(2) * (q.pow(2) - 1.0),
                            };
                            let res = Residual::Numeric((a - expected).norm() / expected.norm());
                            let r = CheckReport::new(
                                format!("lemma2-closed-form-{}", sign.name()),
                                Backend::Numeric,
                                res,
                                c.tol(tols::LEMMA2),
                            );
                            self.emit(r, Some(p));
                        }
                    }
                }
            }
            Level::Fusion => {
                let n = c.n.unwrap_or(2);
                for sign in c.signs() {
                    let space = fused_space(&q, n, &p.x, sign)?;
                    let expected = match n {
                        1 => 4,
                        2 => 8,
                        _ => 12,
                    };
                    self.emit(
                        count_report(&format!("fused-dim-n{n}-{}", sign.name()), space.dim(), expected),
                        Some(p),
                    );
                    let tol = c.tol(tols::FUSION);
                    self.emit(
                        check_projector_commutation(&q, n, &p.u, &p.v, &p.x, sign, None, tol)?,
                        Some(p),
                    );
                    self.emit(
                        check_fused_intertwine(&q, n, &p.u, &p.v, &p.x, sign, None, tol)?,
                        Some(p),
                    );
                    self.emit(check_fused_twist(&q, &space, &p.u, tol)?, Some(p));
                    let dim = fused_commutant(&q, &space, &p.u, tols::COMMUTANT)?;
                    self.emit(
                        count_report(&format!("fused-commutant-n{n}-{}", sign.name()), dim, 1),
                        Some(p),
                    );
                    if neg {
                        let wrong = Some(n as i32 + 1);
                        let r = check_projector_commutation(&q, n, &p.u, &p.v, &p.x, sign, wrong, tol)?;
                        self.emit(negative(r), Some(p));
                    }
                }
            }
            Level::FusedYbe => {
                let n = c.n.unwrap_or(2);
                let default = if n >= 3 {
                    tols::FUSED_YBE_3
                } else {
                    tols::FUSED_YBE_2
                };
                for sign in c.signs() {
                    let b = FusedBuilder::new(&q, n, sign, &p.x)?;
                    let r = check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, c.tol(default))?;
                    self.emit(r.detail("n", n).detail("sign", sign.name()), Some(p));
                    if neg && n > 1 {
                        let bad = b.clone().with_shift(1);
                        let r = check_twisted_ybe(&bad, &p.u, &p.v, &p.w, &p.x, tols::NEGATIVE)?;
                        self.emit(negative(r.detail("n", n).detail("sign", sign.name())), Some(p));
                    }
                }
            }
            Level::Dynamical => {
                let n = c.n.unwrap_or(2);
                let default = if n >= 3 {
                    tols::FUSED_YBE_3
                } else {
                    tols::FUSED_YBE_2
                };
                for sign in c.signs() {
                    let dr = DynamicalR::on_branch(&q, n, sign, 0)?;
                    let lambda = p.x.ln() / dr.a;
                    let r = check_dynamical_ybe(&dr, p.u, p.v, p.w, lambda, None, c.tol(default))?;
                    self.emit(r, Some(p));
                    if neg {
                        let fake = Some(Complex64::new(-(n as f64) - 1.0, 0.0));
                        let r = check_dynamical_ybe(&dr, p.u, p.v, p.w, lambda, fake, tols::NEGATIVE)?;
                        self.emit(negative(r), Some(p));
                    }
                }
            }
            Level::All => unreachable!("expanded"),
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        let c = self.config;
        for level in c.level.expand() {
            match c.backend {
                Backend::Exact => self.exact(level)?,
                Backend::Numeric => {
                    for k in 0..c.samples as u64 {
                        let p = sample_params(c.seed.wrapping_add(k))?;
                        self.numeric(level, &p)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the configured checks, handing each report to `sink` as soon as it
/// is produced. Errors from invalid configuration are returned before any
/// check runs.
pub fn run_suite(
    config: &SuiteConfig,
    sink: &mut (dyn FnMut(&CheckReport) + Send),
) -> Result<Vec<CheckReport>> {
    config.validate()?;
    let mut runner = Runner {
        config,
        sink,
        reports: Vec::new(),
    };
    if config.single_thread {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::Unsupported(e.to_string()))?;
        pool.install(|| runner.run())?;
    } else {
        runner.run()?;
    }
    Ok(runner.reports)
}

/// Summary line for a finished run.
pub fn summary(reports: &[CheckReport]) -> serde_json::Value {
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    json!({
        "summary": {
            "checks": reports.len(),
            "failed": failed.len(),
            "failing": failed,
            "pass": failed.is_empty(),
        }
    })
}
