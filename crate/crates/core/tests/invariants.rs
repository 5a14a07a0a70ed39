mod common;

use common::{dist, extended_zoo, zoo};
use pastvar::dist::{LinearTransform, MonotoneMap, MonotonicTransform, Prhr};
use pastvar::mc::{self, MCConfig};
use pastvar::measures::{
    cumulative_reversed_hazard, reversed_hazard, Measure, MeasureConfig, PastContext,
};
use pastvar::properties::{self, VerifyConfig};
use pastvar::quadrature::{integrate, QuadratureConfig};
use pastvar::{DistRef, Distribution, Execution};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = DistRef> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|b| dist("uniform", &[b])),
        (0.2f64..5.0).prop_map(|l| dist("exponential", &[l])),
        (0.3f64..6.0).prop_map(|k| dist("power", &[k])),
        (0.4f64..4.0, 0.5f64..3.0).prop_map(|(k, s)| dist("weibull", &[k, s])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, c in 0.1f64..4.0) {
        let cfg = QuadratureConfig::default();
        let g1 = |x: f64| (-c * x).exp();
        let g2 = |x: f64| x.sqrt() * (1.0 + x).ln();
        let i1 = integrate(g1, 0.0, 2.0, &cfg).unwrap();
        let i2 = integrate(g2, 0.0, 2.0, &cfg).unwrap();
        let both = integrate(|x| alpha * g1(x) + beta * g2(x), 0.0, 2.0, &cfg).unwrap();
        let slack = alpha.abs() * i1.error_estimate + beta.abs() * i2.error_estimate + both.error_estimate;
        prop_assert!((both.value - alpha * i1.value - beta * i2.value).abs() <= slack + 1e-15);
    }

    #[test]
    fn quadrature_is_additive(split in 0.05f64..2.95, c in 0.2f64..3.0) {
        let cfg = QuadratureConfig::default();
        let g = |x: f64| (c * x).sin().powi(2) / x.sqrt();
        let all = integrate(g, 0.0, 3.0, &cfg).unwrap();
        let left = integrate(g, 0.0, split, &cfg).unwrap();
        let right = integrate(g, split, 3.0, &cfg).unwrap();
        let slack = all.error_estimate + left.error_estimate + right.error_estimate;
        prop_assert!((all.value - left.value - right.value).abs() <= slack + 1e-15);
    }

    #[test]
    fn quadrature_is_deterministic(c in 0.1f64..5.0) {
        let cfg = QuadratureConfig::default();
        let a = integrate(|x| (-c * x).exp() * x.ln().abs(), 0.0, f64::INFINITY, &cfg).unwrap();
        let b = integrate(|x| (-c * x).exp() * x.ln().abs(), 0.0, f64::INFINITY, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn quantile_cdf_round_trip(d in family(), p in 0.001f64..0.999) {
        let x = d.quantile(p);
        prop_assert!((d.quantile(d.cdf(x)) - x).abs() <= 1e-8 * (1.0 + x.abs()));
    }

    #[test]
    fn prhr_reversed_hazards_are_proportional(d in family(), a in 0.2f64..6.0, p in 0.02f64..0.98) {
        let t = d.quantile(p);
        let fam = Prhr::new(d.clone(), a).unwrap();
        let q = reversed_hazard(&*d, t).unwrap();
        let qa = reversed_hazard(&fam, t).unwrap();
        prop_assert!((qa / q / a - 1.0).abs() <= 1e-8);
        let l = cumulative_reversed_hazard(&*d, t).unwrap();
        let la = cumulative_reversed_hazard(&fam, t).unwrap();
        prop_assert!((la / (a * l) - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn linear_cdf_is_forwarded(d in family(), a in 0.1f64..10.0, b in 0.0f64..5.0, p in 0.0f64..1.0) {
        let tr = LinearTransform::new(d.clone(), a, b).unwrap();
        let x = d.quantile(p.clamp(1e-6, 1.0 - 1e-6));
        let y = a * x + b;
        prop_assert_eq!(tr.cdf(y), d.cdf(tr.to_base(y)));
        prop_assert!((tr.cdf(y) - d.cdf(x)).abs() <= 1e-12);
    }

    #[test]
    fn linear_transform_keeps_past_varentropy(d in family(), a in 0.2f64..5.0, b in 0.0f64..3.0, p in 0.05f64..0.95) {
        let s = d.quantile(p);
        let tr = LinearTransform::new(d.clone(), a, b).unwrap();
        let cfg = MeasureConfig::default().numerical_only();
        let base = PastContext::new(&*d, s).unwrap();
        let moved = PastContext::new(&tr, a * s + b).unwrap();
        let dv = moved.past_varentropy(&cfg).unwrap().value - base.past_varentropy(&cfg).unwrap().value;
        let dh = moved.past_entropy(&cfg).unwrap().value - base.past_entropy(&cfg).unwrap().value - a.ln();
        prop_assert!(dv.abs() < 1e-7 && dh.abs() < 1e-7, "{} {}", dv, dh);
    }

    #[test]
    fn past_varentropy_nonnegative_and_entropy_below_log_length(d in family(), p in 0.01f64..0.99) {
        let t = d.quantile(p);
        let ctx = PastContext::new(&*d, t).unwrap();
        let cfg = MeasureConfig::default().numerical_only();
        prop_assert!(ctx.past_varentropy_definition(&cfg).unwrap().value >= -1e-9);
        // The uniform law maximizes entropy on an interval.
        let h = ctx.past_entropy(&cfg).unwrap().value;
        prop_assert!(h <= (t - d.support().lower).ln() + 1e-9);
    }

    #[test]
    fn derivative_identities_hold_for_exponentials(l in 0.2f64..4.0, p in 0.05f64..0.95) {
        let d = dist("exponential", &[l]);
        let t = d.quantile(p);
        let cfg = VerifyConfig::default();
        let (h, v) = properties::check_derivative_identities(&*d, &[t], &cfg).unwrap();
        prop_assert!(h.passed() && v.passed(), "{:?} {:?}", h, v);
    }

    #[test]
    fn measures_never_return_nan(d in family(), name_ix in 0usize..15, t in -1.0f64..8.0) {
        let name = Measure::NAMES[name_ix];
        let m = Measure::parse(name, 0.5).unwrap();
        let fam = Prhr::new(d.clone(), 2.0).unwrap();
        if let Ok(v) = m.evaluate(&fam, Some(&fam), t, &MeasureConfig::default()) {
            prop_assert!(v.value.is_finite() && v.numerical_error.is_finite());
        }
    }
}

#[test]
fn densities_integrate_to_one() {
    let cfg = QuadratureConfig::default();
    let mut all: Vec<(String, DistRef)> = extended_zoo()
        .into_iter()
        .map(|(n, d)| (n.to_string(), d))
        .collect();
    let e = dist("exponential", &[1.5]);
    all.push(("linear".into(), std::sync::Arc::new(LinearTransform::new(e.clone(), 2.0, 1.0).unwrap())));
    all.push(("prhr".into(), std::sync::Arc::new(Prhr::new(e.clone(), 0.5).unwrap())));
    all.push((
        "reciprocal".into(),
        std::sync::Arc::new(MonotonicTransform::new(e.clone(), MonotoneMap::reciprocal()).unwrap()),
    ));
    all.push((
        "square".into(),
        std::sync::Arc::new(MonotonicTransform::new(e, MonotoneMap::power(2.0)).unwrap()),
    ));
    for (name, d) in all {
        let s = d.support();
        let r = integrate(|x| d.pdf(x), s.lower, s.upper_value(), &cfg).unwrap();
        assert!((r.value - 1.0).abs() <= 10.0 * cfg.target(1.0), "{name}: {}", r.value);
    }
}

#[test]
fn limits_near_the_top_of_the_support() {
    let cfg = VerifyConfig::default();
    for (name, d) in zoo() {
        // Entropy converges within 1e-4 already at F(t) = 1 - 1e-6.
        let r = properties::check_limits(&*d, 1.0 - 1e-6, 1e-4, &cfg).unwrap();
        assert!(r.residuals[0].abs() <= 1e-4, "{name}: {r:?}");
        // Varentropy needs F(t) = 1 - 1e-8 for 1e-4 on the exponential tail.
        let r = properties::check_limits(&*d, 1.0 - 1e-8, 1e-4, &cfg).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
    }
}

#[test]
fn route_and_consistency_checks_on_zoo() {
    let cfg = VerifyConfig::default();
    for (name, d) in extended_zoo() {
        let grid = properties::quantile_grid(&*d, 0.05, 0.95, 10);
        let (h, v) = properties::check_quadrature_routes(&*d, &grid, &cfg).unwrap();
        assert!(h.passed() && v.passed(), "{name}: {h:?} {v:?}");
        let (a, b) = properties::check_reversed_hazard_consistency(&*d, &grid, &cfg).unwrap();
        assert!(a.passed() && b.passed(), "{name}: {a:?} {b:?}");
        let i = properties::check_inactivity_equivalence(&d, &grid, &cfg).unwrap();
        assert!(!i.applicability.is_applicable() || i.passed(), "{name}: {i:?}");
    }
}

#[test]
fn prhr_dual_route_across_powers() {
    let cfg = VerifyConfig::default();
    for (name, d) in zoo() {
        for a in [0.5, 1.0, 2.0, 3.0] {
            let fam = Prhr::new(d.clone(), a).unwrap();
            let grid = properties::quantile_grid(&fam, 0.1, 0.9, 5);
            let r = properties::check_prhr_dual_route(&fam, &grid, &cfg).unwrap();
            assert!(r.passed(), "{name} a={a}: {r:?}");
        }
    }
}

#[test]
fn decreasing_monotone_map_agrees_with_direct_route() {
    let cfg = VerifyConfig::default();
    for (name, d) in zoo() {
        let tr = MonotonicTransform::new(d.clone(), MonotoneMap::reciprocal()).unwrap();
        let grid = properties::quantile_grid(&tr, 0.1, 0.9, 5);
        let r = properties::check_monotonic_transform(&tr, &grid, &cfg).unwrap();
        assert!(r.max_residual() <= 1e-5, "{name}: {r:?}");
    }
}

#[test]
fn power_family_satisfies_the_constant_shift_form() {
    let cfg = VerifyConfig::default();
    for k in [1.0, 2.0, 3.0, 5.0] {
        let d = dist("power", &[k]);
        let grid: Vec<f64> = (0..9).map(|i| 0.1 + 0.1 * i as f64).collect();
        let c = properties::entropy_shift_values(&*d, &grid[..1], &cfg).unwrap()[0];
        let r = properties::check_constant_shift_form(&*d, c, &grid, &cfg).unwrap();
        assert!(r.passed(), "k={k}: {r:?}");
    }
}

#[test]
fn checks_report_falsification_as_data() {
    let cfg = VerifyConfig::default();
    let e = dist("exponential", &[1.0]);
    let r = properties::check_q1mc_constancy_equivalence(&*e, 0.3, &[0.5, 1.0, 2.0], &cfg).unwrap();
    assert!(!r.hazard_side_holds && !r.entropy_side_holds && r.passed());
    let r = properties::check_constant_shift_form(&*e, 0.3, &[0.5, 1.0], &cfg).unwrap();
    assert!(!r.applicability.is_applicable());
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let d = dist("weibull", &[2.0, 1.0]);
    let ctx = PastContext::new(&*d, 0.9).unwrap();
    let base = MCConfig { n_samples: 30_000, seed: 99, batch: 1000, execution: Execution::Parallel };
    let a = mc::mc_past_entropy(&ctx, &base).unwrap();
    let b = mc::mc_past_entropy(&ctx, &MCConfig { execution: Execution::Sequential, ..base }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.mean.to_bits(), mc::mc_past_entropy(&ctx, &base).unwrap().mean.to_bits());
}

#[test]
fn two_oracle_rule_on_zoo() {
    let cfg = MeasureConfig::default().numerical_only();
    let mc_cfg = MCConfig { n_samples: 200_000, ..MCConfig::default() };
    let measures = [
        Measure::PastEntropy,
        Measure::PastVarentropy,
        Measure::MeanInactivityTime,
        Measure::VarianceInactivityTime,
        Measure::ResidualEntropy,
        Measure::ResidualVarentropy,
    ];
    let mut flagged = Vec::new();
    for (name, d) in extended_zoo() {
        for t in properties::quantile_grid(&*d, 0.2, 0.8, 3) {
            for m in measures {
                let q = m.evaluate(&*d, None, t, &cfg).unwrap().value;
                let est = mc::mc_measure(m, &*d, t, &mc_cfg).unwrap();
                match mc::Agreement::classify(&est, q) {
                    mc::Agreement::Agree => {}
                    mc::Agreement::Flagged => flagged.push(format!("{name} {} t={t}", m.name())),
                    mc::Agreement::Disagree => {
                        panic!("{name} {} t={t}: quadrature {q}, MC {est:?}", m.name())
                    }
                }
            }
        }
    }
    if !flagged.is_empty() {
        eprintln!("flagged at 3-4 standard errors: {flagged:?}");
    }
}
