//! Adaptive Dormand-Prince 5(4) integration for the linear semigroup
//! `f' = L f` on matrix states.
//!
//! The generator is dissipative, so trajectories decay; the controller runs
//! against a mixed absolute/relative tolerance and supports an early-exit
//! callback (used when the decay bound is certified by contraction from
//! some time onward).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub struct DopriOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for DopriOptions {
    fn default() -> Self {
        DopriOptions { rtol: 1e-10, atol: 1e-13, h0: 1e-4, max_steps: 4_000_000 }
    }
}

/// Integrate `y' = deriv(y)` from 0 to `t_end`.
///
/// `on_step(t, y)` runs after every accepted step; returning `false` stops
/// the integration early (the final state is returned with its time).
pub fn integrate<F, C>(
    deriv: F,
    y0: DMatrix<f64>,
    t_end: f64,
    opts: &DopriOptions,
    mut on_step: C,
) -> Result<(f64, DMatrix<f64>)>
where
    F: Fn(&DMatrix<f64>) -> DMatrix<f64>,
    C: FnMut(f64, &DMatrix<f64>) -> Result<bool>,
{
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
    const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
    const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
    const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
    const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
    const E7: f64 = -1.0 / 40.0;

    let mut t = 0.0;
    let mut y = y0;
    let mut h = opts.h0.min(t_end.max(1e-12));
    let mut k1 = deriv(&y);
    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok((t, y));
        }
        h = h.min(t_end - t);
        let k2 = deriv(&(&y + &k1 * (A21 * h)));
        let k3 = deriv(&(&y + &k1 * (A31 * h) + &k2 * (A32 * h)));
        let k4 = deriv(&(&y + &k1 * (A41 * h) + &k2 * (A42 * h) + &k3 * (A43 * h)));
        let k5 = deriv(&(&y + &k1 * (A51 * h) + &k2 * (A52 * h) + &k3 * (A53 * h) + &k4 * (A54 * h)));
        let k6 = deriv(
            &(&y + &k1 * (A61 * h) + &k2 * (A62 * h) + &k3 * (A63 * h) + &k4 * (A64 * h) + &k5 * (A65 * h)),
        );
        let ynew = &y + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h;
        let k7 = deriv(&ynew);
        let err_mat = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;

        let mut err_acc = 0.0;
        for (e, (a, b)) in err_mat.iter().zip(y.iter().zip(ynew.iter())) {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            let q = e / sc;
            err_acc += q * q;
        }
        let err = (err_acc / err_mat.len() as f64).sqrt();

        if !err.is_finite() {
            return Err(Error::BlowUp {
                step: 0,
                path: 0,
                state: vec![t, h],
            });
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
            k1 = k7; // first-same-as-last
            if !on_step(t, &y)? {
                return Ok((t, y));
            }
        }
        let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h *= factor;
        if h < 1e-14 {
            return Err(Error::SolveFailed(format!(
                "step size underflow at t = {t:.6e} (err {err:.3e})"
            )));
        }
    }
    Err(Error::SolveFailed(format!(
        "step budget exhausted at t = {t:.6e} of {t_end:.6e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;
    use approx::assert_relative_eq;

    #[test]
    fn matches_matrix_exponential_on_a_stiffish_block() {
        let l = DMatrix::from_row_slice(2, 2, &[-20.0, 4.0, 1.0, -0.5]);
        let y0 = DMatrix::from_row_slice(2, 1, &[1.0, -0.3]);
        let t_end = 2.0;
        let (t, y) = integrate(
            |y| &l * y,
            y0.clone(),
            t_end,
            &DopriOptions::default(),
            |_, _| Ok(true),
        )
        .unwrap();
        assert_relative_eq!(t, t_end, max_relative = 1e-12);
        let exact = expm(&(&l * t_end)) * y0;
        for i in 0..2 {
            assert_relative_eq!(y[(i, 0)], exact[(i, 0)], max_relative = 1e-8, epsilon = 1e-12);
        }
    }

    #[test]
    fn early_exit_reports_partial_time() {
        let l = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let y0 = DMatrix::from_row_slice(1, 1, &[1.0]);
        let (t, y) = integrate(
            |y| &l * y,
            y0,
            50.0,
            &DopriOptions::default(),
            |_, y| Ok(y[(0, 0)] > 0.5),
        )
        .unwrap();
        assert!(t < 1.0, "stopped at {t}");
        assert!(y[(0, 0)] <= 0.5);
    }
}
