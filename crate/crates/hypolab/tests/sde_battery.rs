//! Class agreement between the simulated variance decay and the envelope
//! calculus, over the standard potential battery.  Class match only; the
//! envelope constants are existential.

use hypolab::measure::Observable;
use hypolab::potential::Potential;
use hypolab::rates::DecayClass;
use hypolab::sde::{classify_variance_decay, decay_curve, EnsembleParams, McClass, SdeSystem};

fn expected_mc_class(envelope: DecayClass) -> McClass {
    match envelope {
        DecayClass::Exponential => McClass::Exponential,
        _ => McClass::SubExponential,
    }
}

#[test]
fn decay_classes_match_the_envelope_battery() {
    // (system, envelope class of the matching family pairing, horizon)
    let battery: Vec<(&str, SdeSystem, DecayClass, f64)> = vec![
        (
            "quadratic/quadratic",
            SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap(),
            // power growth with delta, epsilon >= 1: exponential envelope
            DecayClass::Exponential,
            4.8,
        ),
        (
            "power(1,1)/gaussian",
            SdeSystem::scalar(1.0, Potential::power(1, 1.0, 1.0).unwrap(), Potential::gaussian(1))
                .unwrap(),
            DecayClass::Exponential,
            7.2,
        ),
        (
            "log_power(2)/gaussian",
            SdeSystem::scalar(1.0, Potential::log_power(1, 2.0).unwrap(), Potential::gaussian(1))
                .unwrap(),
            // polynomial-tail first marginal: sub-exponential envelope
            DecayClass::Polynomial,
            14.4,
        ),
    ];
    let f = Observable::tanh_x(1.0);
    for (name, sys, envelope, horizon) in battery {
        let times: Vec<f64> = (1..=12).map(|k| horizon * k as f64 / 12.0).collect();
        let params = EnsembleParams { paths: 20_000, h: Some(1e-3), seed: 99 };
        let curve = decay_curve(&sys, &f, &times, &params).unwrap();
        let fit = classify_variance_decay(&curve).unwrap();
        assert_eq!(
            fit.class,
            expected_mc_class(envelope),
            "{name}: fitted {:?} (rate {:.3}, chi2 exp {:.2} / poly {:.2})",
            fit.class,
            fit.rate,
            fit.exp_chi2,
            fit.poly_chi2
        );
    }
}
