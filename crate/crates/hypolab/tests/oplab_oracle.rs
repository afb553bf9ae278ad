//! Dense matrix-exponential cross-checks at 32^2: the adaptive integrator
//! agrees with `exp(tL)` applied directly, and the decay bound holds along
//! the exactly-evolved semigroup.

use nalgebra::{DMatrix, DVector};

use hypolab::linalg::expm;
use hypolab::oplab::{self, decay_constants, DiscreteOperatorSet};
use hypolab::oplab::ode::{integrate, DopriOptions};
use hypolab::potential::Potential;
use hypolab::rates::RateFunction;
use hypolab::sde::SdeSystem;

fn ops32() -> DiscreteOperatorSet {
    let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
    DiscreteOperatorSet::build(&sys, 32, None).unwrap()
}

fn unflatten(ops: &DiscreteOperatorSet, v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(ops.n1(), ops.n2(), |i, j| v[i * ops.n2() + j])
}

#[test]
fn integrator_matches_dense_exponential() {
    let ops = ops32();
    let l = ops.l_matrix();
    let f0 = ops.random_state(3, 0);
    let f0_flat = ops.flatten(&f0);
    for &t in &[0.5, 2.0] {
        let exact_flat = expm(&(&l * t)) * &f0_flat;
        let exact = unflatten(&ops, &exact_flat);
        let (_, approx) = integrate(
            |f| ops.apply_l(f),
            f0.clone(),
            t,
            &DopriOptions::default(),
            |_, _| Ok(true),
        )
        .unwrap();
        let diff = &approx - &exact;
        let rel = ops.norm(&diff) / ops.norm(&exact).max(1e-30);
        assert!(rel <= 1e-6, "t = {t}: integrator vs expm relative error {rel:.3e}");
    }
}

#[test]
fn decay_bound_along_dense_semigroup() {
    let ops = ops32();
    let alpha = |component| match oplab::discrete_wpi(&ops, component).unwrap().alpha {
        RateFunction::Constant { c } => c,
        other => panic!("unexpected {other:?}"),
    };
    let (_, kappa) = decay_constants(ops.n_hat, alpha(1), alpha(2));
    let l = ops.l_matrix();
    // Exact semigroup at a dyadic time grid by repeated squaring.
    let dt = 0.5;
    let step = expm(&(&l * dt));
    for k in 0..6 {
        let f0 = ops.random_state(4, k);
        let mut flat = ops.flatten(&f0);
        let f0n2 = ops.inner(&f0, &f0);
        for j in 1..=40 {
            flat = &step * &flat;
            let t = dt * j as f64;
            let state = unflatten(&ops, &flat);
            let n2 = ops.inner(&state, &state);
            let bound = 3.0 * (-kappa * t).exp() * f0n2;
            assert!(
                n2 <= bound * (1.0 + 1e-8),
                "state {k} violates the bound at t = {t}: {n2:.3e} > {bound:.3e}"
            );
        }
    }
}
