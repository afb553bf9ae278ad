//! Experiment orchestration: dispatch a validated config to the owning
//! module, collect check reports, and render the CSV/JSON outputs.

use crate::config::{
    hash_json, CheckAssumptionsConfig, ExperimentConfig, ExperimentSpec, OperatorLabConfig,
    RatesConfig, SimulateConfig,
};
use crate::error::Result;
use crate::oplab;
use crate::potential;
use crate::rates::{self, RateFunction, XiMode, XiSchedule};
use crate::report::{write_csv, CheckReport, ExperimentReport, Measurement};
use crate::sde::{self, EnsembleParams, McClass, SdeSystem};

pub const RATES_CSV_SCHEMA: &str = "hypolab.rates.v1";
pub const SIMULATE_CSV_SCHEMA: &str = "hypolab.simulate.v1";
pub const SAMPLES_CSV_SCHEMA: &str = "hypolab.samples.v1";
pub const ARTIFACT_CSV_SCHEMA: &str = "hypolab.failure-artifact.v1";

/// Everything a run produces: the structured report plus named output
/// documents (CSV tables, failure artifacts) for the caller to persist.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub files: Vec<(String, String)>,
}

/// Run one experiment.  Deterministic given `(config, seed, version)`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut report = ExperimentReport::new(config.kind(), config.hash(), config.seed);
    let mut files = Vec::new();
    match &config.experiment {
        ExperimentSpec::Rates(c) => run_rates(c, &mut report, &mut files)?,
        ExperimentSpec::Simulate(c) => run_simulate(c, config.seed, &mut report, &mut files)?,
        ExperimentSpec::OperatorLab(c) => run_operator_lab(c, config.seed, &mut report, &mut files)?,
        ExperimentSpec::CheckAssumptions(c) => run_check_assumptions(c, &mut report)?,
    }
    report.finish();
    Ok(RunOutput { report, files })
}

fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    let l0 = t_min.ln();
    let l1 = t_max.ln();
    (0..points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn run_rates(c: &RatesConfig, report: &mut ExperimentReport, files: &mut Vec<(String, String)>) -> Result<()> {
    let (alpha1, alpha2) = c.case.alphas(
        (c.alpha1_c, c.alpha1_c_inner),
        (c.alpha2_c, c.alpha2_c_inner),
    );
    let implicit = XiSchedule {
        c1: c.c1,
        c2: c.c2,
        mode: XiMode::Implicit { alpha1, alpha2 },
    };
    let closed = XiSchedule { c1: c.c1, c2: c.c2, mode: XiMode::ClosedForm(c.case) };
    let hw = XiSchedule { c1: c.c1, c2: c.c2, mode: XiMode::ImplicitHw { alpha1 } };

    let params_hash = hash_json(&serde_json::to_string(&c.case)?);
    let ts = log_grid(c.t_min, c.t_max, c.points);
    let mut rows = Vec::with_capacity(ts.len());
    let mut inv_samples = Vec::with_capacity(ts.len());
    let mut closed_samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        let xi_inv = implicit.ln_eval(t);
        let xi_cf = closed.ln_eval(t);
        let xi_hw = hw.ln_eval(t);
        inv_samples.push((t, xi_inv));
        closed_samples.push((t, xi_cf));
        rows.push(format!(
            "{t:.9e},{:.9e},{:.9e},{:.9e},{},{params_hash}",
            xi_inv.exp(),
            xi_cf.exp(),
            xi_hw.exp(),
            c.case.tag()
        ));
    }
    files.push((
        "rates.csv".into(),
        write_csv(RATES_CSV_SCHEMA, "t,xi_implicit,xi_closed_form,xi_hw,case,params_hash", &rows),
    ));

    let mut check = CheckReport::new("decay_class_match", true);
    check.context("case", c.case.tag().into());
    check.context("params_hash", params_hash);
    match (rates::fit_asymptotics_ln(&inv_samples), rates::fit_asymptotics_ln(&closed_samples)) {
        (Ok(fit_inv), Ok(fit_cf)) => {
            check.context("inversion_class", fit_inv.class.label().into());
            check.context("closed_form_class", fit_cf.class.label().into());
            check.push(Measurement::measured("inversion_exponent", fit_inv.exponent).with_tolerance(1e-9));
            check.push(Measurement::theory("closed_form_exponent", fit_cf.exponent));
            check.push(Measurement::measured("inversion_residual", fit_inv.residual).with_tolerance(1e-9));
            let class_ok = fit_inv.class == fit_cf.class;
            let exp_ok = (fit_inv.exponent - fit_cf.exponent).abs() <= 0.1 * fit_cf.exponent.abs();
            check.pass = class_ok && exp_ok;
        }
        (inv, cf) => {
            check.pass = false;
            if let Err(e) = inv {
                check.context("inversion_fit_error", e.to_string());
            }
            if let Err(e) = cf {
                check.context("closed_form_fit_error", e.to_string());
            }
        }
    }
    report.push(check);
    Ok(())
}

fn run_simulate(
    c: &SimulateConfig,
    seed: u64,
    report: &mut ExperimentReport,
    files: &mut Vec<(String, String)>,
) -> Result<()> {
    let sys = SdeSystem::scalar(c.q, c.v1.build()?, c.v2.build()?)?;
    let params = EnsembleParams { paths: c.paths, h: c.h, seed };
    let h = c.h.unwrap_or_else(|| sys.default_step());
    let system_hash = hash_json(&serde_json::to_string(&(c.q, &c.v1, &c.v2))?);
    if let Some(count) = c.dump_samples {
        let mu = crate::measure::ProductMeasure::new(sys.v1.clone(), sys.v2.clone())?;
        files.push(("samples.csv".into(), samples_csv(&mu.sample(count.max(1), seed))));
    }
    let points = sde::decay_curve(&sys, &c.observable, &c.times, &params)?;
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            format!(
                "{:.9e},{:.9e},{:.9e},{},{h:.9e},{seed},{system_hash}",
                p.t, p.var_hat, p.se, c.paths
            )
        })
        .collect();
    files.push((
        "simulate.csv".into(),
        write_csv(SIMULATE_CSV_SCHEMA, "t,var_hat,se,n,h,seed,system_hash", &rows),
    ));

    let mut check = CheckReport::new("variance_decay", true);
    check.context("observable", c.observable.tag.clone());
    check.context("system_hash", system_hash);
    match sde::classify_variance_decay(&points) {
        Ok(fit) => {
            check.context(
                "class",
                match fit.class {
                    McClass::Exponential => "exponential".into(),
                    McClass::SubExponential => "sub_exponential".into(),
                },
            );
            check.push(Measurement::measured("rate", fit.rate).with_tolerance(4.0 * fit.rate_se));
            check.push(Measurement::measured("rate_se", fit.rate_se).with_tolerance(fit.rate_se));
            check.push(Measurement::measured("exp_chi2", fit.exp_chi2).with_tolerance(f64::INFINITY));
            check.push(Measurement::measured("poly_chi2", fit.poly_chi2).with_tolerance(f64::INFINITY));
        }
        Err(e) => {
            check.pass = false;
            check.context("fit_error", e.to_string());
        }
    }
    report.push(check);
    Ok(())
}

fn run_operator_lab(
    c: &OperatorLabConfig,
    seed: u64,
    report: &mut ExperimentReport,
    files: &mut Vec<(String, String)>,
) -> Result<()> {
    let sys = SdeSystem::scalar(c.q, c.v1.build()?, c.v2.build()?)?;
    let ops = oplab::DiscreteOperatorSet::build(&sys, c.resolution, None)?;

    let mut checks = vec![
        oplab::verify_structure(&ops, c.trials.min(64), seed)?,
        oplab::verify_mixed_bounds(&ops, c.trials, seed)?,
        oplab::check_sa_relation(&ops, 2)?,
        oplab::check_g_formula(&ops)?,
        oplab::check_m_constant(&ops)?,
    ];
    let wpi1 = oplab::discrete_wpi(&ops, 1)?;
    let wpi2 = oplab::discrete_wpi(&ops, 2)?;
    let mut gaps = CheckReport::new("marginal_gaps", true);
    gaps.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    gaps.push(Measurement::measured("gap_x", wpi1.gap).with_tolerance(1e-6).refinement_sensitive());
    gaps.push(Measurement::measured("gap_y", wpi2.gap).with_tolerance(1e-6).refinement_sensitive());
    checks.push(gaps);
    checks.push(oplab::subordination_check(&ops, &wpi1.alpha, c.trials, seed + 9)?);
    let (a1, a2) = (constant_of(&wpi1.alpha), constant_of(&wpi2.alpha));
    checks.push(oplab::hypocoercive_decay(&ops, a1, a2, c.decay_states, seed + 17, None)?);

    if c.refine {
        let fine = oplab::DiscreteOperatorSet::build(&sys, 2 * c.resolution, None)?;
        let coarse_sa = checks[2].get("relative_residual").map(|m| m.value).unwrap_or(f64::NAN);
        let coarse_g = checks[3].get("relative_frobenius").map(|m| m.value).unwrap_or(f64::NAN);
        let mut fine_sa_report = oplab::check_sa_relation(&fine, 2)?;
        let mut fine_g_report = oplab::check_g_formula(&fine)?;
        fine_sa_report.check = "radial_commutation_refined".into();
        fine_g_report.check = "averaged_operator_formula_refined".into();
        let fine_sa = fine_sa_report.get("relative_residual").map(|m| m.value).unwrap_or(f64::NAN);
        let fine_g = fine_g_report.get("relative_frobenius").map(|m| m.value).unwrap_or(f64::NAN);
        let mut refine = CheckReport::new("refinement_ratios", true);
        refine.context("resolutions", format!("{} -> {}", c.resolution, 2 * c.resolution));
        refine.push(Measurement::measured("sa_ratio", coarse_sa / fine_sa).with_tolerance(1e-6).refinement_sensitive());
        refine.push(Measurement::measured("g_ratio", coarse_g / fine_g).with_tolerance(1e-6).refinement_sensitive());
        refine.pass = coarse_sa / fine_sa >= 1.8 && coarse_g / fine_g >= 1.8;
        checks.push(refine);
        checks.push(fine_sa_report);
        checks.push(fine_g_report);
    }

    for check in checks {
        if let Some(artifact) = &check.failure {
            let rows: Vec<String> = artifact.data.iter().map(|v| format!("{v:.17e}")).collect();
            files.push((
                format!("artifact_{}.csv", check.check),
                write_csv(ARTIFACT_CSV_SCHEMA, "value", &rows),
            ));
        }
        report.push(check);
    }
    Ok(())
}

fn constant_of(alpha: &RateFunction) -> f64 {
    match alpha {
        RateFunction::Constant { c } => *c,
        _ => 1.0,
    }
}

fn run_check_assumptions(c: &CheckAssumptionsConfig, report: &mut ExperimentReport) -> Result<()> {
    for (idx, spec) in c.potentials.iter().enumerate() {
        let pot = spec.build()?;
        let mut growth = potential::check_growth(&pot, c.tau, c.m_candidate, c.samples, c.radius)?;
        growth.check = format!("growth_bound_{idx}");
        report.push(growth);

        let grid = potential::log_grid(1e-3, 1e6, 300);
        let mut vv3 = potential::check_vv3(pot.profile(), pot.dim, &grid)?;
        vv3.check = format!("profile_h_bounded_{idx}");
        report.push(vv3);

        let mut moments = CheckReport::new(&format!("gradient_moments_{idx}"), true);
        moments.context("family", format!("{:?}", pot.family));
        for &power in &c.moment_powers {
            match potential::moment_check(&pot, power) {
                Ok(value) => {
                    moments.push(
                        Measurement::measured(&format!("moment_{power}"), value).with_tolerance(1e-8 * value.abs()),
                    );
                }
                Err(e) => {
                    moments.pass = false;
                    moments.context(&format!("moment_{power}_error"), e.to_string());
                }
            }
        }
        report.push(moments);
    }
    Ok(())
}

/// Dump a sample batch as CSV (component index then coordinates).
pub fn samples_csv(batch: &crate::measure::Batch) -> String {
    let mut rows = Vec::with_capacity(batch.n);
    for i in 0..batch.n {
        let xs: Vec<String> = batch.x(i).iter().map(|v| format!("{v:.9e}")).collect();
        let ys: Vec<String> = batch.y(i).iter().map(|v| format!("{v:.9e}")).collect();
        rows.push(format!("{i},{},{}", xs.join(","), ys.join(",")));
    }
    write_csv(SAMPLES_CSV_SCHEMA, "index,x...,y...", &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, ExperimentSpec, RatesConfig};
    use crate::rates::ExampleCase;

    fn rates_config(case: ExampleCase) -> ExperimentConfig {
        ExperimentConfig {
            seed: 1,
            out: None,
            experiment: ExperimentSpec::Rates(RatesConfig {
                case,
                c1: 1.0,
                c2: 1.0,
                alpha1_c: 1.0,
                alpha1_c_inner: 1.0,
                alpha2_c: 1.0,
                alpha2_c_inner: 1.0,
                t_min: 1e2,
                t_max: 1e8,
                points: 40,
            }),
        }
    }

    #[test]
    fn rates_a1_produces_exponential_class() {
        let out = run(&rates_config(ExampleCase::A1 { delta: 1.0, epsilon: 1.0 })).unwrap();
        assert!(out.report.pass, "{:?}", out.report);
        let check = &out.report.checks[0];
        assert_eq!(check.context["inversion_class"], "exponential");
        let (name, csv) = &out.files[0];
        assert_eq!(name, "rates.csv");
        assert!(csv.starts_with("# schema=hypolab.rates.v1"));
    }

    #[test]
    fn runs_are_deterministic_for_same_config() {
        let config = rates_config(ExampleCase::A2 { delta: 1.0, p: 1.0, d2: 1 });
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.files, b.files);
    }

    #[test]
    fn seed_change_only_drifts_within_error_bands() {
        use crate::config::{PotentialSpec, SimulateConfig};
        use crate::measure::Observable;
        use crate::potential::Family;
        use crate::report::compare;

        let spec = |seed| ExperimentConfig {
            seed,
            out: None,
            experiment: ExperimentSpec::Simulate(SimulateConfig {
                q: 1.0,
                v1: PotentialSpec {
                    family: Family::Radial(crate::potential::RadialProfile::gaussian()),
                    dim: 1,
                },
                v2: PotentialSpec {
                    family: Family::Radial(crate::potential::RadialProfile::gaussian()),
                    dim: 1,
                },
                observable: Observable::tanh_x(1.0),
                times: (1..=8).map(|k| 0.5 * k as f64).collect(),
                paths: 4000,
                h: Some(1e-2),
                dump_samples: None,
            }),
        };
        let a = run(&spec(1)).unwrap();
        let b = run(&spec(2)).unwrap();
        // Stochastic measurements carry standard-error tolerances, so a
        // seed change must only produce drift inside those bands.
        let diff = compare(&a.report, &b.report).unwrap();
        let unexpected: Vec<_> = diff
            .entries
            .iter()
            .filter(|e| e.kind != crate::report::DriftKind::ExpectedDrift)
            .collect();
        assert!(unexpected.is_empty(), "cross-seed drift beyond tolerances: {unexpected:?}");
    }
}
