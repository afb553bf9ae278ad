//! Weak-Poincaré rate calculus.
//!
//! A rate function `alpha: (0, inf) -> [1, inf)` is decreasing and encodes
//! how badly a Poincaré inequality degenerates as the defect parameter
//! `r -> 0`.  A pair `(alpha1, alpha2)` is turned into a decay envelope by
//! the implicit inversion
//!
//! ```text
//! xi(t) = c1 * inf { r > 0 : c2 t >= alpha1(r)^2 alpha2(r / alpha1(r)^2) log(1/r) }
//! ```
//!
//! Evaluation is done in the variable `u = log(1/r)`, where the criterion is
//! non-decreasing and stays representable even when `xi` itself underflows;
//! `ln xi` is always available alongside the clamped plain value.
//!
//! All constants default to 1.  The envelopes are existential up to
//! constants, so cross-checks in this crate compare decay classes and
//! fitted exponents, never absolute values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Family, RadialProfile};

// ---------------------------------------------------------------------------
// Rate functions
// ---------------------------------------------------------------------------

/// Closed-form decreasing rate function, clamped below at 1.
///
/// Values follow the direct convention in which the inversion criterion is
/// `alpha1(r)^2 alpha2(...) log(1/r)`; no extra factor of `r` multiplies the
/// energy term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rate", rename_all = "snake_case")]
pub enum RateFunction {
    /// `alpha(r) = max(c, 1)`.
    Constant { c: f64 },
    /// `alpha(r) = c (log(1 + 1/r))^exponent`.
    LogPower { c: f64, exponent: f64 },
    /// `alpha(r) = c r^{-theta}`.
    PolyInverse { c: f64, theta: f64 },
    /// `alpha(r) = c1 exp(c2 r^{-s})`, with `s = 1/(p-1)` for the barely
    /// normalizable family.
    ExpInverse { c1: f64, c2: f64, s: f64 },
}

impl RateFunction {
    /// `ln alpha(e^{-u})`, stable for arbitrarily large `u` (may be `+inf`).
    pub fn ln_eval_neg_log(&self, u: f64) -> f64 {
        let raw = match *self {
            RateFunction::Constant { c } => c.ln(),
            RateFunction::LogPower { c, exponent } => {
                // log(1 + e^u) without overflow.
                let base = if u > 0.0 {
                    u + (-u).exp().ln_1p()
                } else {
                    u.exp().ln_1p()
                };
                c.ln() + exponent * base.ln()
            }
            RateFunction::PolyInverse { c, theta } => c.ln() + theta * u,
            RateFunction::ExpInverse { c1, c2, s } => c1.ln() + c2 * (s * u).exp(),
        };
        // Clamp alpha >= 1.
        raw.max(0.0)
    }

    /// `alpha(r)`, clamped below at 1.
    pub fn eval(&self, r: f64) -> f64 {
        assert!(r > 0.0, "rate functions are defined for r > 0");
        self.ln_eval_neg_log(-r.ln()).exp()
    }
}

/// `theta(p) = (d + p + 2)/p  min  (4p + 4 + 2d)/((p^2 - 4 - 2d - 2p)^+)`.
///
/// A zero positive-part denominator makes the second branch `+inf`; the
/// branch is then never selected unless both are infinite.
pub fn theta(p: f64, d: usize) -> f64 {
    assert!(p > 0.0, "theta requires p > 0");
    let df = d as f64;
    let first = (df + p + 2.0) / p;
    let den = p * p - 4.0 - 2.0 * df - 2.0 * p;
    let second = if den > 0.0 {
        (4.0 * p + 4.0 + 2.0 * df) / den
    } else {
        f64::INFINITY
    };
    first.min(second)
}

/// Rate function matching a potential family on `R^d`, with leading
/// constant `c` (a second constant of 1 is used where the family needs two).
pub fn alpha_for(family: &Family, d: usize, c: f64) -> Result<RateFunction> {
    let from_delta = |delta: f64| -> Result<RateFunction> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power-family rate needs delta > 0 (got {delta})"
            )));
        }
        let exponent = 4.0 * (1.0 - delta).max(0.0) / delta;
        if exponent == 0.0 {
            Ok(RateFunction::Constant { c })
        } else {
            Ok(RateFunction::LogPower { c, exponent })
        }
    };
    let from_log_p = |p: f64| -> Result<RateFunction> {
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "log-power rate needs p > 0 (got {p})"
            )));
        }
        Ok(RateFunction::PolyInverse { c, theta: theta(p, d) })
    };
    let from_loglog_p = |p: f64| -> Result<RateFunction> {
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "log-log rate needs p > 1 (got {p})"
            )));
        }
        Ok(RateFunction::ExpInverse { c1: c, c2: 1.0, s: 1.0 / (p - 1.0) })
    };
    match *family {
        Family::Power { delta, .. } => from_delta(delta),
        Family::LogPower { p } => from_log_p(p),
        Family::LogLog { p } => from_loglog_p(p),
        Family::Radial(profile) => match profile {
            RadialProfile::Monomial { m, .. } => from_delta(2.0 * m),
            RadialProfile::PowerLaw { delta, .. } => from_delta(delta),
            RadialProfile::LogPoly { c: coeff } => from_log_p(2.0 * coeff - d as f64),
            RadialProfile::LogLogPoly { p, .. } => from_loglog_p(p),
            // Super-Gaussian growth: a spectral gap holds, constant rate.
            RadialProfile::ExpGrowth { .. } => Ok(RateFunction::Constant { c }),
        },
    }
}

// ---------------------------------------------------------------------------
// Implicit inversion
// ---------------------------------------------------------------------------

/// Result of an envelope inversion.
#[derive(Debug, Clone, Copy)]
pub struct XiValue {
    /// `c1 * r_star` (underflows to 0 for extreme `t`; `ln_value` does not).
    pub value: f64,
    /// `ln(c1) - u_star`.
    pub ln_value: f64,
    /// The infimum point `r_star = e^{-u_star}`.
    pub r_star: f64,
    /// Set when the infimum fell outside the search bracket and the result
    /// was clamped to the bracket edge.
    pub clamped: bool,
}

/// Largest `u` in `[0, u_hi]` with `ln_g(u) <= ln_rhs`, assuming the
/// criterion is non-decreasing; falls back to a 512-point grid scan refined
/// by local bisection when the monotonicity pre-check fails (clamping can
/// flatten the criterion, never legitimately invert it).
fn invert_criterion<F: Fn(f64) -> f64>(ln_g: F, ln_rhs: f64, u_hi: f64) -> (f64, bool) {
    if ln_g(u_hi) <= ln_rhs {
        return (u_hi, true);
    }
    let bisect = |mut lo: f64, mut hi: f64| -> f64 {
        // Relative tolerance 1e-9 on r, i.e. absolute 1e-9 on u = log(1/r).
        while hi - lo > 1e-9 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if ln_g(mid) <= ln_rhs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let monotone = {
        let mut ok = true;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=64 {
            let v = ln_g(u_hi * i as f64 / 64.0);
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                ok = false;
                break;
            }
            prev = v;
        }
        ok
    };
    if monotone {
        (bisect(0.0, u_hi), false)
    } else {
        // Infimum over r = supremum over u of the satisfied set.
        let n = 512;
        let mut k_sat = None;
        for k in (1..=n).rev() {
            let u = u_hi * k as f64 / n as f64;
            if ln_g(u) <= ln_rhs {
                k_sat = Some(k);
                break;
            }
        }
        match k_sat {
            Some(k) if k == n => (u_hi, true),
            Some(k) => (
                bisect(u_hi * k as f64 / n as f64, u_hi * (k + 1) as f64 / n as f64),
                false,
            ),
            None => (bisect(0.0, u_hi / n as f64), false),
        }
    }
}

fn wp_criterion<'a>(alpha1: &'a RateFunction, alpha2: &'a RateFunction) -> impl Fn(f64) -> f64 + 'a {
    move |u: f64| {
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let la1 = alpha1.ln_eval_neg_log(u);
        let u2 = u + 2.0 * la1;
        2.0 * la1 + alpha2.ln_eval_neg_log(u2) + u.ln()
    }
}

/// Envelope from the two-rate criterion over the bracket `r in [1e-16, 1]`.
///
/// When even the bracket floor satisfies the criterion the result is clamped
/// there and flagged; [`xi_implicit_ln`] searches an unbounded bracket for
/// asymptotic work.
pub fn xi_implicit(alpha1: &RateFunction, alpha2: &RateFunction, c1: f64, c2: f64, t: f64) -> XiValue {
    assert!(t > 0.0 && c1 > 0.0 && c2 > 0.0);
    let u_hi = 16.0 * std::f64::consts::LN_10;
    let (u, clamped) = invert_criterion(wp_criterion(alpha1, alpha2), (c2 * t).ln(), u_hi);
    XiValue {
        value: c1 * (-u).exp(),
        ln_value: c1.ln() - u,
        r_star: (-u).exp(),
        clamped,
    }
}

/// Log-domain envelope with an expanding bracket; usable far past f64
/// underflow of `xi` itself.
pub fn xi_implicit_ln(alpha1: &RateFunction, alpha2: &RateFunction, c1: f64, c2: f64, t: f64) -> XiValue {
    assert!(t > 0.0 && c1 > 0.0 && c2 > 0.0);
    let crit = wp_criterion(alpha1, alpha2);
    let ln_rhs = (c2 * t).ln();
    let mut u_hi = 64.0;
    while crit(u_hi) <= ln_rhs && u_hi < 1e15 {
        u_hi *= 2.0;
    }
    let (u, clamped) = invert_criterion(crit, ln_rhs, u_hi);
    XiValue {
        value: c1 * (-u).exp(),
        ln_value: c1.ln() - u,
        r_star: (-u).exp(),
        clamped,
    }
}

/// Closed-form envelope of an example case with constants `(c1, c2)`.
pub fn xi_closed_form(case: &ExampleCase, c1: f64, c2: f64, t: f64) -> Result<XiValue> {
    case.validate()?;
    let ln = case.ln_xi(c1, c2, t);
    Ok(XiValue { value: ln.exp(), ln_value: ln, r_star: f64::NAN, clamped: false })
}

/// Envelope from the single-rate criterion `c2 t >= alpha1(r) log(1/r)`.
pub fn xi_hw(alpha1: &RateFunction, c2: f64, t: f64) -> XiValue {
    assert!(t > 0.0 && c2 > 0.0);
    let crit = move |u: f64| {
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        alpha1.ln_eval_neg_log(u) + u.ln()
    };
    let u_hi = 16.0 * std::f64::consts::LN_10;
    let (u, clamped) = invert_criterion(crit, (c2 * t).ln(), u_hi);
    XiValue {
        value: (-u).exp(),
        ln_value: -u,
        r_star: (-u).exp(),
        clamped,
    }
}

// ---------------------------------------------------------------------------
// Closed-form envelopes for the example families
// ---------------------------------------------------------------------------

/// Second marginal choice in case C1 (both yield the same envelope).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum C1Second {
    Power { epsilon: f64 },
    LogPower { p: f64, d2: usize },
}

/// Potential-family pairing with a displayed closed-form envelope.
///
/// `V1` families: power growth `delta`/`epsilon`, polynomial tails
/// (`log_power p/q`), or barely-normalizable log-log tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ExampleCase {
    A1 { delta: f64, epsilon: f64 },
    A2 { delta: f64, p: f64, d2: usize },
    A3 { delta: f64, p: f64 },
    B1 { q: f64, epsilon: f64, d1: usize },
    B2 { q: f64, p: f64, d1: usize, d2: usize },
    B3 { q: f64, p: f64, d1: usize },
    C1 { q: f64, second: C1Second, d1: usize },
    C2 { q: f64, p: f64, d1: usize, d2: usize },
}

impl ExampleCase {
    pub fn tag(&self) -> &'static str {
        match self {
            ExampleCase::A1 { .. } => "A1",
            ExampleCase::A2 { .. } => "A2",
            ExampleCase::A3 { .. } => "A3",
            ExampleCase::B1 { .. } => "B1",
            ExampleCase::B2 { .. } => "B2",
            ExampleCase::B3 { .. } => "B3",
            ExampleCase::C1 { .. } => "C1",
            ExampleCase::C2 { .. } => "C2",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            ExampleCase::A1 { delta, epsilon } => {
                if delta > 0.0 && epsilon > 0.0 {
                    Ok(())
                } else {
                    bad(format!("A1 needs delta, epsilon > 0 (got {delta}, {epsilon})"))
                }
            }
            ExampleCase::A2 { delta, p, .. } => {
                if delta > 0.0 && p > 0.0 {
                    Ok(())
                } else {
                    bad(format!("A2 needs delta > 0, p > 0 (got {delta}, {p})"))
                }
            }
            ExampleCase::A3 { delta, p } => {
                if delta > 0.0 && p > 1.0 {
                    Ok(())
                } else {
                    bad(format!("A3 needs delta > 0, p > 1 (got {delta}, {p})"))
                }
            }
            ExampleCase::B1 { q, epsilon, .. } => {
                if q > 0.0 && epsilon > 0.0 {
                    Ok(())
                } else {
                    bad(format!("B1 needs q, epsilon > 0 (got {q}, {epsilon})"))
                }
            }
            ExampleCase::B2 { q, p, .. } => {
                if q > 0.0 && p > 0.0 {
                    Ok(())
                } else {
                    bad(format!("B2 needs q, p > 0 (got {q}, {p})"))
                }
            }
            ExampleCase::B3 { q, p, .. } => {
                if q > 0.0 && p > 1.0 {
                    Ok(())
                } else {
                    bad(format!("B3 needs q > 0, p > 1 (got {q}, {p})"))
                }
            }
            ExampleCase::C1 { q, second, .. } => {
                let second_ok = match second {
                    C1Second::Power { epsilon } => epsilon > 0.0,
                    C1Second::LogPower { p, .. } => p > 0.0,
                };
                if q > 1.0 && second_ok {
                    Ok(())
                } else {
                    bad(format!("C1 needs q > 1 and a valid second marginal (q = {q})"))
                }
            }
            ExampleCase::C2 { q, p, .. } => {
                if q > 1.0 && p > 1.0 {
                    Ok(())
                } else {
                    bad(format!("C2 needs q > 1, p > 1 (got {q}, {p})"))
                }
            }
        }
    }

    /// `ln xi(t)` of the displayed envelope with constants `(c1, c2)`;
    /// `c2` only enters the exponential case A1.
    pub fn ln_xi(&self, c1: f64, c2: f64, t: f64) -> f64 {
        let e = std::f64::consts::E;
        let lnln = |t: f64| (e + t).ln().ln();
        let lnlnln = |t: f64| (e * e + t).ln().ln().ln();
        match *self {
            ExampleCase::A1 { delta, epsilon } => {
                let pos = |x: f64| x.max(0.0);
                let power = epsilon * delta
                    / (epsilon * delta + 8.0 * epsilon * pos(1.0 - delta) + 4.0 * delta * pos(1.0 - epsilon));
                c1.ln() - c2 * t.powf(power)
            }
            ExampleCase::A2 { delta, p, d2 } => {
                let th = theta(p, d2);
                let pos = (1.0 - delta).max(0.0);
                let log_pow = (8.0 * (th + 1.0) * pos + delta) / (th * delta);
                c1.ln() - (1.0 + t).ln() / th + log_pow * lnln(t)
            }
            ExampleCase::A3 { delta, p } => {
                let pos = (1.0 - delta).max(0.0);
                c1.ln() + (1.0 - p) * lnln(t) + (8.0 * pos / delta) * lnlnln(t)
            }
            ExampleCase::B1 { q, epsilon, d1 } => {
                let th = theta(q, d1);
                let pos = (1.0 - epsilon).max(0.0);
                let log_pow = (4.0 * pos + epsilon) / (2.0 * epsilon * th);
                c1.ln() - (1.0 + t).ln() / (2.0 * th) + log_pow * lnln(t)
            }
            ExampleCase::B2 { q, p, d1, d2 } => {
                let tq = theta(q, d1);
                let tp = theta(p, d2);
                let s = 2.0 * tq + tp + 2.0 * tp * tq;
                c1.ln() - (1.0 + t).ln() / s + lnln(t) / s
            }
            ExampleCase::B3 { q, p, d1 } => {
                let tq = theta(q, d1);
                c1.ln() - (p - 1.0) / (1.0 + 2.0 * tq) * lnln(t)
            }
            ExampleCase::C1 { q, .. } => c1.ln() - (q - 1.0) * lnln(t),
            ExampleCase::C2 { q, .. } => c1.ln() - (q - 1.0) * lnlnln(t),
        }
    }

    /// The matching rate-function pair, with per-side constants
    /// `(c, c_inner)`; `c_inner` is the exponential constant of the
    /// log-log families and is ignored elsewhere.
    pub fn alphas(&self, k1: (f64, f64), k2: (f64, f64)) -> (RateFunction, RateFunction) {
        let power = |delta: f64, k: (f64, f64)| {
            let expn = 4.0 * (1.0 - delta).max(0.0) / delta;
            if expn == 0.0 {
                RateFunction::Constant { c: k.0 }
            } else {
                RateFunction::LogPower { c: k.0, exponent: expn }
            }
        };
        let poly = |p: f64, d: usize, k: (f64, f64)| RateFunction::PolyInverse { c: k.0, theta: theta(p, d) };
        let expinv = |p: f64, k: (f64, f64)| RateFunction::ExpInverse { c1: k.0, c2: k.1, s: 1.0 / (p - 1.0) };
        match *self {
            ExampleCase::A1 { delta, epsilon } => (power(delta, k1), power(epsilon, k2)),
            ExampleCase::A2 { delta, p, d2 } => (power(delta, k1), poly(p, d2, k2)),
            ExampleCase::A3 { delta, p } => (power(delta, k1), expinv(p, k2)),
            ExampleCase::B1 { q, epsilon, d1 } => (poly(q, d1, k1), power(epsilon, k2)),
            ExampleCase::B2 { q, p, d1, d2 } => (poly(q, d1, k1), poly(p, d2, k2)),
            ExampleCase::B3 { q, p, d1 } => (poly(q, d1, k1), expinv(p, k2)),
            ExampleCase::C1 { q, second, d1: _ } => {
                let a2 = match second {
                    C1Second::Power { epsilon } => power(epsilon, k2),
                    C1Second::LogPower { p, d2 } => poly(p, d2, k2),
                };
                (expinv(q, k1), a2)
            }
            ExampleCase::C2 { q, p, d1, d2 } => {
                let _ = (d1, d2);
                (expinv(q, k1), expinv(p, k2))
            }
        }
    }

    /// Expected decay class of the displayed envelope.
    pub fn expected_class(&self) -> DecayClass {
        match *self {
            ExampleCase::A1 { delta, epsilon } => {
                if delta >= 1.0 && epsilon >= 1.0 {
                    DecayClass::Exponential
                } else {
                    DecayClass::StretchedExponential
                }
            }
            ExampleCase::A2 { .. } | ExampleCase::B1 { .. } | ExampleCase::B2 { .. } => DecayClass::Polynomial,
            ExampleCase::A3 { .. } | ExampleCase::B3 { .. } | ExampleCase::C1 { .. } => DecayClass::Logarithmic,
            ExampleCase::C2 { .. } => DecayClass::LogLogarithmic,
        }
    }
}

/// Decay envelope with constants and an evaluation mode.
#[derive(Debug, Clone)]
pub struct XiSchedule {
    pub c1: f64,
    pub c2: f64,
    pub mode: XiMode,
}

#[derive(Debug, Clone)]
pub enum XiMode {
    Implicit { alpha1: RateFunction, alpha2: RateFunction },
    ImplicitHw { alpha1: RateFunction },
    ClosedForm(ExampleCase),
}

impl XiSchedule {
    pub fn eval(&self, t: f64) -> XiValue {
        match &self.mode {
            XiMode::Implicit { alpha1, alpha2 } => xi_implicit(alpha1, alpha2, self.c1, self.c2, t),
            XiMode::ImplicitHw { alpha1 } => xi_hw(alpha1, self.c2, t),
            XiMode::ClosedForm(case) => {
                let ln = case.ln_xi(self.c1, self.c2, t);
                XiValue { value: ln.exp(), ln_value: ln, r_star: f64::NAN, clamped: false }
            }
        }
    }

    /// `ln xi(t)` using the expanding bracket for the implicit modes.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match &self.mode {
            XiMode::Implicit { alpha1, alpha2 } => xi_implicit_ln(alpha1, alpha2, self.c1, self.c2, t).ln_value,
            XiMode::ImplicitHw { alpha1 } => xi_hw(alpha1, self.c2, t).ln_value,
            XiMode::ClosedForm(case) => case.ln_xi(self.c1, self.c2, t),
        }
    }
}

// ---------------------------------------------------------------------------
// Asymptotic classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Exponential,
    StretchedExponential,
    Polynomial,
    Logarithmic,
    LogLogarithmic,
}

impl DecayClass {
    pub fn label(&self) -> &'static str {
        match self {
            DecayClass::Exponential => "exponential",
            DecayClass::StretchedExponential => "stretched_exponential",
            DecayClass::Polynomial => "polynomial",
            DecayClass::Logarithmic => "logarithmic",
            DecayClass::LogLogarithmic => "log_logarithmic",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticFit {
    pub class: DecayClass,
    /// Leading exponent in the class coordinate: the power of `t` inside the
    /// exponential, or the power of `t` / `log t` / `log log t` for the
    /// algebraic classes.
    pub exponent: f64,
    /// Normalized RMS residual of the winning linear model.
    pub residual: f64,
}

/// Classify decay samples `(t, xi)`; requires >= 10 samples spanning at
/// least three decades of `t`.
pub fn fit_asymptotics(samples: &[(f64, f64)]) -> Result<AsymptoticFit> {
    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, x)| *t > 0.0 && *x > 0.0)
        .map(|&(t, x)| (t, x.ln()))
        .collect();
    if logs.len() < samples.len() {
        return Err(Error::InconclusiveFit(
            "samples must have t > 0 and xi > 0; use fit_asymptotics_ln for log-domain data".into(),
        ));
    }
    fit_asymptotics_ln(&logs)
}

/// Classify decay samples given as `(t, ln xi)`.
pub fn fit_asymptotics_ln(samples: &[(f64, f64)]) -> Result<AsymptoticFit> {
    if samples.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 samples (got {})",
            samples.len()
        )));
    }
    let (tmin, tmax) = samples
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &(t, _)| (lo.min(t), hi.max(t)));
    if !(tmax / tmin >= 1e3) {
        return Err(Error::InvalidParameter(format!(
            "samples must span >= 3 decades of t (got {:.2})",
            tmax / tmin
        )));
    }

    let e = std::f64::consts::E;
    struct Candidate {
        coords: Vec<(f64, f64)>,
        valid: bool,
    }
    // Exponential / stretched: ln(-ln xi) against ln t.
    let exp_pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, y)| *y < -1e-9)
        .map(|&(t, y)| (t.ln(), (-y).ln()))
        .collect();
    let candidates = [
        Candidate { valid: exp_pts.len() >= samples.len() * 7 / 10 && exp_pts.len() >= 8, coords: exp_pts },
        Candidate {
            valid: true,
            coords: samples.iter().map(|&(t, y)| (t.ln(), y)).collect(),
        },
        Candidate {
            valid: true,
            coords: samples.iter().map(|&(t, y)| ((e + t).ln().ln(), y)).collect(),
        },
        Candidate {
            valid: true,
            coords: samples.iter().map(|&(t, y)| ((e * e + t).ln().ln().ln(), y)).collect(),
        },
    ];

    let mut best: Option<(usize, f64, f64)> = None; // (index, slope, residual)
    for (idx, cand) in candidates.iter().enumerate() {
        if !cand.valid {
            continue;
        }
        let Some((slope, res)) = linear_fit(&cand.coords) else {
            continue;
        };
        // Algebraic candidates must actually decay; the exponential
        // candidate needs a positive stretch exponent.
        let decays = if idx == 0 { slope > 0.0 } else { slope < 0.0 };
        if !decays {
            continue;
        }
        if best.is_none_or(|(_, _, r)| res < r) {
            best = Some((idx, slope, res));
        }
    }
    let Some((idx, slope, residual)) = best else {
        return Err(Error::InconclusiveFit("no decaying model fits the samples".into()));
    };
    if residual > 0.25 {
        return Err(Error::InconclusiveFit(format!(
            "best model residual {residual:.3} too large"
        )));
    }
    let (class, exponent) = match idx {
        0 => {
            if slope >= 0.9 {
                (DecayClass::Exponential, slope)
            } else {
                (DecayClass::StretchedExponential, slope)
            }
        }
        1 => (DecayClass::Polynomial, -slope),
        2 => (DecayClass::Logarithmic, -slope),
        _ => (DecayClass::LogLogarithmic, -slope),
    };
    Ok(AsymptoticFit { class, exponent, residual })
}

/// Least-squares slope plus normalized residual; `None` when degenerate.
fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx < 1e-12 || syy < 1e-18 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let pred = my + slope * (p.0 - mx);
            (p.1 - pred).powi(2)
        })
        .sum();
    Some((slope, (ss_res / syy).sqrt()))
}
