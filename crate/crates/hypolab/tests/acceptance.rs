//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (run with `--nocapture` to see them on success).
//!
//! Tolerances and thresholds are pinned here, in code; run times are
//! asserted against the stated budgets.

use std::time::Instant;

use hypolab::measure::Observable;
use hypolab::oplab::{self, DiscreteOperatorSet};
use hypolab::potential::Potential;
use hypolab::rates::{
    fit_asymptotics_ln, C1Second, DecayClass, ExampleCase, RateFunction, XiMode, XiSchedule,
};
use hypolab::rng::run_with_threads;
use hypolab::sde::{
    classify_variance_decay, decay_curve, decay_curve_multi, stationarity_check, EnsembleParams,
    McClass, SdeSystem,
};

fn battery() -> Vec<(&'static str, SdeSystem)> {
    vec![
        (
            "quadratic/gaussian",
            SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap(),
        ),
        (
            "power(1,1)/gaussian",
            SdeSystem::scalar(1.0, Potential::power(1, 1.0, 1.0).unwrap(), Potential::gaussian(1))
                .unwrap(),
        ),
        (
            "log_power(4)/gaussian",
            SdeSystem::scalar(1.0, Potential::log_power(1, 4.0).unwrap(), Potential::gaussian(1))
                .unwrap(),
        ),
    ]
}

fn gap_constant(ops: &DiscreteOperatorSet, component: usize) -> f64 {
    match oplab::discrete_wpi(ops, component).unwrap().alpha {
        RateFunction::Constant { c } => c,
        other => panic!("expected a constant rate, got {other:?}"),
    }
}

/// Criterion 1: exact operator algebra on the battery at 64^2: the norm
/// bounds on B and AB over range(pi_2), the cross bound against L on 1e3
/// random states, and the structural identities to 1e-12.  Under a minute
/// per system.
#[test]
fn criterion_1_operator_algebra() {
    for (name, sys) in battery() {
        let start = Instant::now();
        let ops = DiscreteOperatorSet::build(&sys, 64, None).unwrap();
        let structure = oplab::verify_structure(&ops, 64, 11).unwrap();
        assert!(structure.pass, "structural identities failed for {name}: {structure:?}");
        assert!(structure.get("s_pi1_norm").unwrap().value <= 1e-12);
        assert!(structure.get("pi1_a_pi1_norm").unwrap().value <= 1e-12);

        let bounds = oplab::verify_mixed_bounds(&ops, 1000, 13).unwrap();
        let b_norm = bounds.get("b_norm_on_pi2").unwrap().value;
        let ab_norm = bounds.get("ab_norm_on_pi2").unwrap().value;
        let cross = bounds.get("worst_margin_cross").unwrap().value;
        assert!(b_norm <= 0.5 + 1e-10, "{name}: |B| = {b_norm}");
        assert!(ab_norm <= 1.0 + 1e-10, "{name}: |AB| = {ab_norm}");
        assert!(cross >= -1e-10, "{name}: cross-bound margin {cross}");
        assert!(bounds.pass, "{name}: {bounds:?}");

        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 60.0, "{name}: took {elapsed:.1}s (budget 60s)");
        println!(
            "criterion 1 [{name}]: PASS (|B| = {b_norm:.12}, |AB| = {ab_norm:.12}, {elapsed:.1}s)"
        );
    }
}

/// Criterion 2: commutation/averaging residuals at most 0.05 at 64^2 and
/// shrinking by >= 1.8 at 128^2; the empirical multiplier of the radial
/// relation is -1 for Gaussian profiles up to stencil error.
#[test]
fn criterion_2_refinement_residuals() {
    for (name, sys) in battery() {
        let coarse = DiscreteOperatorSet::build(&sys, 64, None).unwrap();
        let fine = DiscreteOperatorSet::build(&sys, 128, None).unwrap();

        let sa64 = oplab::check_sa_relation(&coarse, 2).unwrap();
        let sa128 = oplab::check_sa_relation(&fine, 2).unwrap();
        let r64 = sa64.get("relative_residual").unwrap().value;
        let r128 = sa128.get("relative_residual").unwrap().value;
        assert!(r64 <= 0.05, "{name}: radial-relation residual {r64} at 64^2");
        assert!(r64 / r128 >= 1.8, "{name}: refinement ratio {}", r64 / r128);

        // Gaussian profile: the multiplier K is identically -1; the fitted
        // per-column value agrees up to stencil error, at stencil order.
        let k64 = sa64.get("k_max_deviation").unwrap().value;
        let k128 = sa128.get("k_max_deviation").unwrap().value;
        assert!(k64 <= 0.2, "{name}: K deviation {k64} at 64^2");
        assert!(k64 / k128 >= 1.8, "{name}: K deviation ratio {}", k64 / k128);

        if name == "quadratic/gaussian" {
            let g64 = oplab::check_g_formula(&coarse).unwrap();
            let g128 = oplab::check_g_formula(&fine).unwrap();
            let f64v = g64.get("relative_frobenius").unwrap().value;
            let f128v = g128.get("relative_frobenius").unwrap().value;
            assert!(f64v <= 0.05, "{name}: averaged-operator residual {f64v} at 64^2");
            assert!(f64v / f128v >= 1.8, "{name}: ratio {}", f64v / f128v);
            let fitted = g64.get("fitted_constant_ratio").unwrap().value;
            assert!((fitted - 1.0).abs() <= 0.02, "{name}: fitted constant ratio {fitted}");
            println!(
                "criterion 2 [{name}]: PASS (sa {r64:.4} -> {r128:.4}, g {f64v:.4} -> {f128v:.4}, K dev {k64:.3} -> {k128:.3})"
            );
        } else {
            println!(
                "criterion 2 [{name}]: PASS (sa {r64:.4} -> {r128:.4}, K dev {k64:.3} -> {k128:.3})"
            );
        }
    }
}

/// Criterion 3: the Gronwall decay bound with discrete constants holds
/// along 20 random trajectories over [0, 20/kappa] at 64^2, within five
/// minutes.
#[test]
fn criterion_3_decay_instantiation() {
    let start = Instant::now();
    let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
    let ops = DiscreteOperatorSet::build(&sys, 64, None).unwrap();
    let alpha1 = gap_constant(&ops, 1);
    let alpha2 = gap_constant(&ops, 2);
    let report = oplab::hypocoercive_decay(&ops, alpha1, alpha2, 20, 29, None).unwrap();
    assert!(report.pass, "{report:?}");
    let margin = report.get("worst_bound_margin").unwrap().value;
    let kappa = report.get("kappa").unwrap().value;
    assert!(margin >= 0.0, "bound margin {margin}");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1}s (budget 300s)");
    println!(
        "criterion 3: PASS (kappa = {kappa:.3e}, worst margin {margin:.3}, 20 states, {elapsed:.1}s)"
    );
}

/// Criterion 4: for every example case, two parameter settings each, the
/// numeric inversion matches the closed form in decay class with fitted
/// exponents within 10%; the purely exponential setting fits 1.00 +- 0.05.
/// Budget: 10 seconds.
#[test]
fn criterion_4_rate_calculus() {
    let start = Instant::now();
    struct Setting {
        case: ExampleCase,
        k1: (f64, f64),
        k2: (f64, f64),
    }
    let one = (1.0, 1.0);
    // The closed-form envelopes hold for *some* positive constants; where a
    // case only reaches its asymptotic regime deep past the window, the
    // rate-function constants are chosen so the regime is visible over
    // t in [1e2, 1e8].
    let settings = vec![
        Setting { case: ExampleCase::A1 { delta: 1.0, epsilon: 1.0 }, k1: one, k2: one },
        Setting { case: ExampleCase::A1 { delta: 1.0, epsilon: 0.5 }, k1: one, k2: one },
        Setting { case: ExampleCase::A2 { delta: 1.0, p: 1.0, d2: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::A2 { delta: 2.0, p: 2.0, d2: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::A3 { delta: 1.0, p: 2.0 }, k1: one, k2: one },
        Setting { case: ExampleCase::A3 { delta: 1.0, p: 3.0 }, k1: one, k2: (1.0, 1.5) },
        Setting { case: ExampleCase::B1 { q: 1.0, epsilon: 1.0, d1: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::B1 { q: 2.0, epsilon: 2.0, d1: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::B2 { q: 1.0, p: 1.0, d1: 1, d2: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::B2 { q: 2.0, p: 2.0, d1: 1, d2: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::B3 { q: 1.0, p: 2.0, d1: 1 }, k1: one, k2: one },
        Setting { case: ExampleCase::B3 { q: 2.0, p: 3.0, d1: 1 }, k1: one, k2: one },
        Setting {
            case: ExampleCase::C1 { q: 2.0, second: C1Second::Power { epsilon: 1.0 }, d1: 1 },
            k1: one,
            k2: one,
        },
        Setting {
            case: ExampleCase::C1 { q: 3.0, second: C1Second::Power { epsilon: 1.0 }, d1: 1 },
            k1: one,
            k2: one,
        },
        Setting {
            case: ExampleCase::C2 { q: 1.5, p: 2.0, d1: 1, d2: 1 },
            k1: (1.0, 0.02),
            k2: (1.0, 0.001),
        },
        Setting {
            case: ExampleCase::C2 { q: 2.0, p: 2.0, d1: 1, d2: 1 },
            k1: (1.0, 0.02),
            k2: (1.0, 0.01),
        },
    ];
    let ts: Vec<f64> = (0..48).map(|i| 1e2 * 10.0_f64.powf(i as f64 * 6.0 / 47.0)).collect();
    for s in &settings {
        s.case.validate().unwrap();
        let (alpha1, alpha2) = s.case.alphas(s.k1, s.k2);
        let implicit = XiSchedule { c1: 1.0, c2: 1.0, mode: XiMode::Implicit { alpha1, alpha2 } };
        let closed = XiSchedule { c1: 1.0, c2: 1.0, mode: XiMode::ClosedForm(s.case) };
        let inv: Vec<(f64, f64)> = ts.iter().map(|&t| (t, implicit.ln_eval(t))).collect();
        let cf: Vec<(f64, f64)> = ts.iter().map(|&t| (t, closed.ln_eval(t))).collect();
        let fit_inv = fit_asymptotics_ln(&inv).unwrap();
        let fit_cf = fit_asymptotics_ln(&cf).unwrap();
        assert_eq!(
            fit_inv.class,
            fit_cf.class,
            "{:?}: inversion {:?} vs closed form {:?}",
            s.case,
            fit_inv.class,
            fit_cf.class
        );
        assert_eq!(fit_cf.class, s.case.expected_class(), "{:?}", s.case);
        let rel = (fit_inv.exponent - fit_cf.exponent).abs() / fit_cf.exponent.abs();
        assert!(
            rel <= 0.10,
            "{:?}: exponents {:.4} vs {:.4} (rel {rel:.3})",
            s.case,
            fit_inv.exponent,
            fit_cf.exponent
        );
        if matches!(s.case, ExampleCase::A1 { delta, epsilon } if delta == 1.0 && epsilon == 1.0) {
            assert_eq!(fit_inv.class, DecayClass::Exponential);
            assert!(
                (fit_inv.exponent - 1.0).abs() <= 0.05,
                "pure exponential exponent {:.4}",
                fit_inv.exponent
            );
        }
        println!(
            "criterion 4 [{} {:?}]: PASS ({} exp {:.4} vs {:.4})",
            s.case.tag(),
            s.case,
            fit_inv.class.label(),
            fit_inv.exponent,
            fit_cf.exponent
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.1}s (budget 10s)");
    println!("criterion 4: PASS (16 settings, {elapsed:.1}s)");
}

/// Criterion 5: the subordination inequality with `phi(s) = s/(1+s)` over
/// 1e3 random `(f, r)` pairs, using the exact discrete gap rate.  Budget:
/// 30 seconds.
#[test]
fn criterion_5_subordination() {
    let start = Instant::now();
    let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
    let ops = DiscreteOperatorSet::build(&sys, 64, None).unwrap();
    let alpha = oplab::discrete_wpi(&ops, 1).unwrap().alpha;
    // 80 states x 13 defect values per state > 1e3 pairs.
    let report = oplab::subordination_check(&ops, &alpha, 80, 31).unwrap();
    assert!(report.pass, "{report:?}");
    let margin = report.get("worst_margin").unwrap().value;
    assert!(margin >= -1e-10, "worst margin {margin}");
    let eq = report.get("gap_vector_equality_residual").unwrap().value;
    assert!(eq <= 1e-3, "gap-vector equality residual {eq}");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1}s (budget 30s)");
    println!("criterion 5: PASS (worst margin {margin:.2e}, equality residual {eq:.2e}, {elapsed:.1}s)");
}

/// Criterion 6: the two-copy estimator classifies the quadratic system as
/// exponential (three bounded observables, rate > 0 at 3 SE) and the
/// heavy-tailed system as sub-exponential at matched cost.  Budget: 15
/// minutes.
#[test]
fn criterion_6_sde_decay_classes() {
    let start = Instant::now();
    let params = EnsembleParams { paths: 100_000, h: Some(1e-3), seed: 2024 };

    let quadratic = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
    let observables =
        [Observable::tanh_x(1.0), Observable::smoothed_indicator_x(0.5, 0.5), Observable::tanh_product(1.0)];
    let times: Vec<f64> = (1..=12).map(|k| 0.4 * k as f64).collect();
    let curves = decay_curve_multi(&quadratic, &observables, &times, &params).unwrap();
    for (f, curve) in observables.iter().zip(&curves) {
        let fit = classify_variance_decay(curve).unwrap();
        assert_eq!(fit.class, McClass::Exponential, "{}: {fit:?}", f.tag);
        assert!(
            fit.rate > 3.0 * fit.rate_se,
            "{}: rate {:.4} not 3 SE above zero (se {:.4})",
            f.tag,
            fit.rate,
            fit.rate_se
        );
        println!(
            "criterion 6 [quadratic, {}]: PASS (exponential, rate {:.3} +- {:.3})",
            f.tag, fit.rate, fit.rate_se
        );
    }

    // Matched cost: same paths and step, total step count matched to the
    // three-observable quadratic ensemble (12 x 0.4 x 3 = 14.4 time units).
    let heavy =
        SdeSystem::scalar(1.0, Potential::log_power(1, 2.0).unwrap(), Potential::gaussian(1)).unwrap();
    let heavy_times: Vec<f64> = (1..=12).map(|k| 1.2 * k as f64).collect();
    let curve = decay_curve(&heavy, &Observable::tanh_x(1.0), &heavy_times, &params).unwrap();
    let fit = classify_variance_decay(&curve).unwrap();
    assert_eq!(fit.class, McClass::SubExponential, "heavy tail: {fit:?}");
    assert!(
        fit.poly_chi2 < fit.exp_chi2,
        "heavy tail should prefer the algebraic model: {fit:?}"
    );
    println!(
        "criterion 6 [log_power(2), tanh_x]: PASS (sub-exponential, chi2 poly {:.2} < exp {:.2})",
        fit.poly_chi2, fit.exp_chi2
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 900.0, "took {elapsed:.1}s (budget 900s)");
    println!("criterion 6: PASS ({elapsed:.1}s)");
}

/// Criterion 7: stationarity of tracked moments (4 SE) for the quadratic
/// system at 1e5 paths over [0, 10].
#[test]
fn criterion_7_invariance() {
    let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
    let params = EnsembleParams { paths: 100_000, h: Some(1e-3), seed: 77 };
    let moments = [Observable::x2(), Observable::y2(), Observable::tanh_x(1.0)];
    let report = stationarity_check(&sys, &moments, 10.0, &params).unwrap();
    assert!(report.pass, "{report:?}");
    let x2_t0 = report.get("x2_t0").unwrap().value;
    println!("criterion 7: PASS (E[X^2] at t=0: {x2_t0:.4}, all moments within 4 SE to T=10)");
}

/// Criterion 8: bitwise determinism under seed reuse and thread-count
/// changes, for the sampler, the decay estimator, and a full experiment
/// run.
#[test]
fn criterion_8_determinism() {
    use hypolab::config::{ExperimentConfig, ExperimentSpec, RatesConfig};
    use hypolab::measure::ProductMeasure;

    // Sampler: same seed, different pool sizes.
    let mu = ProductMeasure::new(Potential::gaussian(1), Potential::log_power(1, 4.0).unwrap()).unwrap();
    let a = run_with_threads(Some(1), || mu.sample(50_000, 99));
    let b = run_with_threads(Some(2), || mu.sample(50_000, 99));
    assert_eq!(a, b, "sampler output depends on thread count");

    // Decay estimator: same seed, different pool sizes, bitwise equality.
    let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
    let f = Observable::tanh_x(1.0);
    let params = EnsembleParams { paths: 2000, h: Some(1e-2), seed: 5 };
    let c1 = run_with_threads(Some(1), || decay_curve(&sys, &f, &[0.2, 0.5], &params).unwrap());
    let c2 = run_with_threads(Some(2), || decay_curve(&sys, &f, &[0.2, 0.5], &params).unwrap());
    for (p, q) in c1.iter().zip(&c2) {
        assert_eq!(p.var_hat.to_bits(), q.var_hat.to_bits());
        assert_eq!(p.se.to_bits(), q.se.to_bits());
    }

    // Full experiment: identical output documents across runs and pools.
    let config = ExperimentConfig {
        seed: 3,
        out: None,
        experiment: ExperimentSpec::Rates(RatesConfig {
            case: ExampleCase::A2 { delta: 1.0, p: 1.0, d2: 1 },
            c1: 1.0,
            c2: 1.0,
            alpha1_c: 1.0,
            alpha1_c_inner: 1.0,
            alpha2_c: 1.0,
            alpha2_c_inner: 1.0,
            t_min: 1e2,
            t_max: 1e8,
            points: 24,
        }),
    };
    let r1 = run_with_threads(Some(1), || hypolab::experiment::run(&config).unwrap());
    let r2 = run_with_threads(Some(2), || hypolab::experiment::run(&config).unwrap());
    assert_eq!(r1.files, r2.files, "experiment CSV output depends on thread count");
    println!("criterion 8: PASS (sampler, estimator, and experiment outputs bitwise stable)");
}
