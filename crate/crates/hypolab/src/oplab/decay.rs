//! Trajectory-level decay check: the Gronwall bound with discrete
//! constants, the modified-functional sandwich, and monotonicity.
//!
//! With constant rate functions `alpha1, alpha2` from the discrete spectral
//! gaps and the constant estimate `n_hat`, the modified functional
//! `I_eps(f) = ||f||^2/2 + eps <Bf, f>` with
//!
//! ```text
//! eps   = 1 / (2 n_hat^2 (alpha1 + 1) alpha2)        (<= 1/4)
//! kappa = 1 / (6 n_hat^4 alpha2 (alpha1 + 1)^2)
//! ```
//!
//! satisfies `dI/dt <= -kappa I` along `f' = L f`, which yields
//! `||f_t||^2 <= 3 e^{-kappa t} ||f_0||^2` after converting through the
//! sandwich `(1 - eps)/2 ||f||^2 <= I_eps(f) <= (1 + eps)/2 ||f||^2`.
//!
//! Since `d||f_t||^2/dt = 2 <S f_t, f_t> <= 0`, the squared norm is
//! non-increasing; once it falls below the bound's terminal value the rest
//! of the horizon is certified by contraction and integration stops early.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::oplab::ode::{integrate, DopriOptions};
use crate::oplab::operators::DiscreteOperatorSet;
use crate::report::{CheckReport, FailureArtifact, Measurement};

/// `(eps, kappa)` from the constant estimate and the two constant rates.
pub fn decay_constants(n_hat: f64, alpha1: f64, alpha2: f64) -> (f64, f64) {
    let eps = 1.0 / (2.0 * n_hat * n_hat * (alpha1 + 1.0) * alpha2);
    let kappa = 1.0 / (6.0 * n_hat.powi(4) * alpha2 * (alpha1 + 1.0).powi(2));
    (eps, kappa)
}

/// The modified functional `I_eps(f) = ||f||^2 / 2 + eps <Bf, f>`.
pub fn i_eps(ops: &DiscreteOperatorSet, eps: f64, f: &DMatrix<f64>) -> Result<f64> {
    let norm2 = ops.inner(f, f);
    if eps == 0.0 {
        return Ok(0.5 * norm2);
    }
    let bf = ops.apply_b(f)?;
    Ok(0.5 * norm2 + eps * ops.inner(&bf, f))
}

/// Evolve random mean-zero initial states and check the decay bound, the
/// sandwich, and monotonicity of both `||f_t||^2` and `I_eps(f_t)`.
///
/// `horizon` defaults to `20 / kappa`; integration stops as soon as the
/// squared norm drops below half the bound's terminal value, after which
/// contraction certifies the remainder.
pub fn hypocoercive_decay(
    ops: &DiscreteOperatorSet,
    alpha1: f64,
    alpha2: f64,
    f0_count: usize,
    seed: u64,
    horizon: Option<f64>,
) -> Result<CheckReport> {
    let (eps, kappa) = decay_constants(ops.n_hat, alpha1, alpha2);
    let t_end = horizon.unwrap_or(20.0 / kappa);
    let rel_slack = 1e-8;

    let mut report = CheckReport::new("hypocoercive_decay", true);
    report.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    report.context("f0_count", format!("{f0_count}"));
    report.context("horizon", format!("{t_end:.6e}"));
    report.push(Measurement::theory("epsilon", eps));
    report.push(Measurement::theory("kappa", kappa));
    report.push(Measurement::theory("n_hat", ops.n_hat));
    report.push(Measurement::theory("alpha1", alpha1));
    report.push(Measurement::theory("alpha2", alpha2));

    struct TrajectoryOutcome {
        bound_margin: f64,
        sandwich: f64,
        norm_monotone: f64,
        ieps_monotone: f64,
        exit_time: f64,
        violation: Option<Vec<f64>>,
    }

    let outcomes: Vec<crate::error::Result<TrajectoryOutcome>> =
        crate::rng::maybe_par_map(f0_count, |k| {
            let f0 = ops.random_state(seed, 10_000 + k as u64);
            let f0n2 = ops.inner(&f0, &f0);
            let terminal = 3.0 * (-kappa * t_end).exp() * f0n2;
            let mut prev_norm2 = f0n2;
            let mut prev_ieps = i_eps(ops, eps, &f0)?;
            let mut trace: Vec<(f64, f64, f64)> = vec![(0.0, f0n2, 3.0 * f0n2)];
            let mut violated = false;
            let mut out = TrajectoryOutcome {
                bound_margin: f64::INFINITY,
                sandwich: f64::INFINITY,
                norm_monotone: f64::INFINITY,
                ieps_monotone: f64::INFINITY,
                exit_time: 0.0,
                violation: None,
            };

            let opts =
                DopriOptions { rtol: 1e-10, atol: 1e-13 * f0n2.sqrt(), h0: 1e-4, max_steps: 4_000_000 };
            let (t_exit, _) = integrate(
                |f| ops.apply_l(f),
                f0.clone(),
                t_end,
                &opts,
                |t, f| {
                    let norm2 = ops.inner(f, f);
                    let bound = 3.0 * (-kappa * t).exp() * f0n2;
                    trace.push((t, norm2, bound));
                    if trace.len() > 4096 {
                        trace.remove(1);
                    }
                    let margin = (bound * (1.0 + rel_slack) - norm2) / bound;
                    out.bound_margin = out.bound_margin.min(margin);
                    if margin < 0.0 {
                        violated = true;
                    }
                    let ieps = i_eps(ops, eps, f)?;
                    let lo = 0.5 * (1.0 - eps) * norm2;
                    let hi = 0.5 * (1.0 + eps) * norm2;
                    let tol = 1e-12 * norm2 + 1e-300;
                    out.sandwich = out.sandwich.min((ieps - lo + tol).min(hi - ieps + tol));
                    out.norm_monotone =
                        out.norm_monotone.min(prev_norm2 * (1.0 + 1e-9) - norm2 + 1e-15 * f0n2);
                    out.ieps_monotone =
                        out.ieps_monotone.min(prev_ieps * (1.0 + 1e-9) - ieps + 1e-15 * f0n2);
                    prev_norm2 = norm2;
                    prev_ieps = ieps;
                    // Early exit once contraction certifies the rest.
                    Ok(!(violated || norm2 <= 0.5 * terminal))
                },
            )?;
            out.exit_time = t_exit;
            if violated {
                out.violation = Some(trace.iter().flat_map(|&(t, n, b)| [t, n, b]).collect());
            }
            Ok(out)
        });

    let mut worst_bound_margin = f64::INFINITY;
    let mut worst_sandwich = f64::INFINITY;
    let mut worst_norm_monotone = f64::INFINITY;
    let mut worst_ieps_monotone = f64::INFINITY;
    let mut exit_times = Vec::with_capacity(f0_count);
    let mut failure: Option<FailureArtifact> = None;
    for (k, outcome) in outcomes.into_iter().enumerate() {
        let out = outcome?;
        worst_bound_margin = worst_bound_margin.min(out.bound_margin);
        worst_sandwich = worst_sandwich.min(out.sandwich);
        worst_norm_monotone = worst_norm_monotone.min(out.norm_monotone);
        worst_ieps_monotone = worst_ieps_monotone.min(out.ieps_monotone);
        exit_times.push(out.exit_time);
        if let Some(data) = out.violation {
            report.pass = false;
            if failure.is_none() {
                failure = Some(FailureArtifact { label: format!("decay_violation_f0_{k}"), data });
            }
        }
    }

    let mean_exit = exit_times.iter().sum::<f64>() / exit_times.len().max(1) as f64;
    report.push(Measurement::measured("worst_bound_margin", worst_bound_margin).with_tolerance(1e-9));
    report.push(Measurement::measured("worst_sandwich_margin", worst_sandwich).with_tolerance(1e-9));
    report.push(
        Measurement::measured("worst_norm_monotonicity", worst_norm_monotone).with_tolerance(1e-9),
    );
    report.push(
        Measurement::measured("worst_ieps_monotonicity", worst_ieps_monotone).with_tolerance(1e-9),
    );
    report.push(Measurement::measured("mean_exit_time", mean_exit).with_tolerance(1e-6));
    if worst_bound_margin < 0.0
        || worst_sandwich < 0.0
        || worst_norm_monotone < 0.0
        || worst_ieps_monotone < 0.0
    {
        report.pass = false;
    }
    report.failure = failure;
    Ok(report)
}
