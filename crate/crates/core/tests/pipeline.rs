use num_complex::Complex64;
use proptest::prelude::*;

use xrmat::fusion::{fused_r, FusedBuilder};
use xrmat::hecke::{HeckeRep, Sign};
use xrmat::rbox::{check_twisted_ybe, rbox_spectral, BoxBuilder};
use xrmat::rep::{check_relations, rho};
use xrmat::suite::{run_suite, Level, SuiteConfig};
use xrmat::{sample_params, Backend, Error, QParam};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relations_hold_for_any_seed(seed in any::<u64>()) {
        let p = sample_params(seed).unwrap();
        let q = QParam::new(p.q).unwrap();
        let r = check_relations(&rho(&q, &p.x), &q, 1e-12);
        prop_assert!(r.pass, "{:?}", r.details);
    }

    #[test]
    fn box_ybe_holds_for_any_seed(seed in any::<u64>()) {
        let p = sample_params(seed).unwrap();
        let b = BoxBuilder { q: QParam::new(p.q).unwrap(), shift: 1 };
        let r = check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, 1e-9).unwrap();
        prop_assert!(r.pass, "residual {:?}", r.residual);
    }

    #[test]
    fn hecke_relations_for_any_seed(seed in any::<u64>()) {
        let p = sample_params(seed).unwrap();
        let rep = HeckeRep::new(&QParam::new(p.q).unwrap(), 3, &p.x).unwrap();
        prop_assert!(rep.check_relations(1e-10).unwrap().pass);
    }

    #[test]
    fn rbox_is_linear_in_x(seed in any::<u64>(), t in 0.1f64..2.0) {
        // Only the four x-weighted entries move with x.
        let p = sample_params(seed).unwrap();
        let q = QParam::new(p.q).unwrap();
        let at = |x: Complex64| rbox_spectral(&q, &p.u, &p.v, &x).unwrap();
        let (r0, r1, rt) = (at(Complex64::new(0.0, 0.0)), at(p.x), at(p.x * t));
        let blended = r0.scale(&Complex64::new(1.0 - t, 0.0)).add(&r1.scale(&Complex64::new(t, 0.0)));
        prop_assert!(rt.compare(&blended).passes(1e-12));
    }
}

#[test]
fn degree_one_fusion_satisfies_the_shift_one_equation() {
    let p = sample_params(21).unwrap();
    let q = QParam::new(p.q).unwrap();
    for sign in [Sign::Plus, Sign::Minus] {
        let b = FusedBuilder::new(&q, 1, sign, &p.x).unwrap();
        let r = check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, 1e-9).unwrap();
        assert!(r.pass, "{sign:?}: {:?}", r.residual);
    }
}

#[test]
fn fused_r_depends_on_both_parameters() {
    let p = sample_params(8).unwrap();
    let q = QParam::new(p.q).unwrap();
    let a = fused_r(&q, 2, &p.u, &p.v, &p.x, Sign::Plus).unwrap();
    let b = fused_r(&q, 2, &p.u, &p.w, &p.x, Sign::Plus).unwrap();
    assert!(!a.compare(&b).passes(1e-3));
}

#[test]
fn suite_streams_every_report() {
    let config = SuiteConfig {
        level: Level::Lemma2,
        samples: 2,
        seed: 40,
        ..SuiteConfig::default()
    };
    let mut streamed = Vec::new();
    let reports = run_suite(&config, &mut |r| streamed.push(r.check.clone())).unwrap();
    assert_eq!(streamed.len(), reports.len());
    assert!(reports.iter().all(|r| r.pass && r.backend == Backend::Numeric));
}

#[test]
fn suite_negative_controls_all_detected() {
    let config = SuiteConfig {
        level: Level::All,
        seed: 13,
        negative_controls: true,
        ..SuiteConfig::default()
    };
    let reports = run_suite(&config, &mut |_| {}).unwrap();
    let controls: Vec<_> = reports
        .iter()
        .filter(|r| r.check.starts_with("negative-control:"))
        .collect();
    assert!(controls.len() >= 6, "{}", controls.len());
    let failing: Vec<_> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.clone())
        .collect();
    assert!(failing.is_empty(), "{failing:?}");
}

#[test]
fn exact_suite_is_symbolic() {
    for level in [Level::Relations, Level::Lemma1, Level::BoxYbe] {
        let config = SuiteConfig {
            level,
            backend: Backend::Exact,
            ..SuiteConfig::default()
        };
        let reports = run_suite(&config, &mut |_| {}).unwrap();
        assert!(
            reports.iter().all(|r| r.pass && r.params == "symbolic"),
            "{level}"
        );
    }
}

#[test]
fn invalid_degree_is_a_config_error() {
    let config = SuiteConfig {
        level: Level::Fusion,
        n: Some(7),
        ..SuiteConfig::default()
    };
    assert!(matches!(
        run_suite(&config, &mut |_| {}),
        Err(Error::Unsupported(_))
    ));
}
