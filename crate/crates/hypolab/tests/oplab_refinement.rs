//! Refinement trends across the potential battery: both identity
//! residuals must drop at second order (ratio <= 0.5 within 20%) from
//! 64^2 to 128^2, whatever the marginal tails.

use hypolab::oplab::{check_g_formula, check_sa_relation, DiscreteOperatorSet};
use hypolab::potential::Potential;
use hypolab::sde::SdeSystem;

#[test]
fn residuals_shrink_at_stencil_order() {
    let battery = vec![
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
    ];
    for (name, sys) in battery {
        let coarse = DiscreteOperatorSet::build(&sys, 64, None).unwrap();
        let fine = DiscreteOperatorSet::build(&sys, 128, None).unwrap();
        let sa_c = check_sa_relation(&coarse, 2).unwrap().get("relative_residual").unwrap().value;
        let sa_f = check_sa_relation(&fine, 2).unwrap().get("relative_residual").unwrap().value;
        assert!(
            sa_f / sa_c <= 0.6,
            "{name}: radial-relation residual ratio {} (coarse {sa_c:.3e}, fine {sa_f:.3e})",
            sa_f / sa_c
        );
        let g_c = check_g_formula(&coarse).unwrap().get("relative_frobenius").unwrap().value;
        let g_f = check_g_formula(&fine).unwrap().get("relative_frobenius").unwrap().value;
        assert!(
            g_f / g_c <= 0.6,
            "{name}: averaged-operator residual ratio {} (coarse {g_c:.3e}, fine {g_f:.3e})",
            g_f / g_c
        );
    }
}
