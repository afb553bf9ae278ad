//! Euler-Maruyama integration of the degenerate SDE
//!
//! ```text
//! dX = Q grad V2(Y) dt
//! dY = sqrt(2) dB - (Q^T grad V1(X) + grad V2(Y)) dt
//! ```
//!
//! and Monte Carlo estimation of the decay of `Var(P_t f)`.
//!
//! The variance of the evolved observable is estimated with two
//! independent-noise copies per start: for copies `Z^1, Z^2` driven from the
//! same `z`, `E[f(Z_t^1) f(Z_t^2)] = (P_t f)(z)^2`, so averaging the product
//! over exact invariant-measure starts gives `mu((P_t f)^2)` without nested
//! Monte Carlo.  Starts are exact samples, so no burn-in is needed.
//!
//! Each path owns ChaCha streams `(2i, 2i+1)` keyed by the ensemble seed;
//! reduction order is fixed, so results are bitwise reproducible for any
//! thread count.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measure::{Batch, Observable, ProductMeasure};
use crate::potential::Potential;
use crate::report::{CheckReport, Measurement};
use crate::rng::{maybe_par_map, substream};

/// The degenerate system: coupling matrix `Q` and the two potentials.
#[derive(Debug, Clone)]
pub struct SdeSystem {
    pub q: DMatrix<f64>,
    pub v1: Potential,
    pub v2: Potential,
}

impl SdeSystem {
    /// Build and validate: `Q Q^*` must be invertible (smallest singular
    /// value above 1e-12) and the drift finite at the mode.
    pub fn new(q: DMatrix<f64>, v1: Potential, v2: Potential) -> Result<Self> {
        if q.nrows() != v1.dim || q.ncols() != v2.dim {
            return Err(Error::InvalidParameter(format!(
                "Q must be d1 x d2 = {} x {} (got {} x {})",
                v1.dim,
                v2.dim,
                q.nrows(),
                q.ncols()
            )));
        }
        let svd = q.clone().svd(false, false);
        let min_sv = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_sv > 1e-12) || q.nrows() > q.ncols() {
            return Err(Error::InvalidParameter(format!(
                "QQ* is not invertible (smallest singular value {min_sv:.3e})"
            )));
        }
        let sys = SdeSystem { q, v1, v2 };
        let mode = (vec![0.0; sys.v1.dim], vec![0.0; sys.v2.dim]);
        let (dx, dy) = sys.drift(&mode.0, &mode.1);
        if dx.iter().chain(dy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "drift at the mode".into(),
                point: vec![0.0; sys.v1.dim + sys.v2.dim],
            });
        }
        Ok(sys)
    }

    /// Convenience constructor for the scalar (`d1 = d2 = 1`) system.
    pub fn scalar(q: f64, v1: Potential, v2: Potential) -> Result<Self> {
        SdeSystem::new(DMatrix::from_element(1, 1, q), v1, v2)
    }

    pub fn is_scalar(&self) -> bool {
        self.v1.dim == 1 && self.v2.dim == 1
    }

    /// Drift of the pair `(X, Y)`.
    pub fn drift(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g1 = self.v1.gradient(x);
        let g2 = self.v2.gradient(y);
        let mut dx = vec![0.0; self.v1.dim];
        for (i, slot) in dx.iter_mut().enumerate() {
            *slot = (0..self.v2.dim).map(|j| self.q[(i, j)] * g2[j]).sum();
        }
        let mut dy = vec![0.0; self.v2.dim];
        for (j, slot) in dy.iter_mut().enumerate() {
            let qg1: f64 = (0..self.v1.dim).map(|i| self.q[(i, j)] * g1[i]).sum();
            *slot = -(qg1 + g2[j]);
        }
        (dx, dy)
    }

    /// Default Euler step: `1e-3` shrunk by the stiffness scale (largest
    /// Hessian eigenvalue of either potential at the mode).
    pub fn default_step(&self) -> f64 {
        let origin1 = vec![0.0; self.v1.dim];
        let origin2 = vec![0.0; self.v2.dim];
        let stiff = self
            .v1
            .hessian_norm(&origin1)
            .max(self.v2.hessian_norm(&origin2))
            .max(1.0);
        1e-3 / stiff
    }
}

/// One explicit Euler-Maruyama step.
///
/// `noise` is the standard normal increment for the `y` component; the `x`
/// update carries no noise.
pub fn em_step(
    sys: &SdeSystem,
    x: &[f64],
    y: &[f64],
    h: f64,
    noise: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(h > 0.0, "step size must be positive");
    assert_eq!(noise.len(), sys.v2.dim);
    let (dx, dy) = sys.drift(x, y);
    let root = (2.0 * h).sqrt();
    let nx: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + h * di).collect();
    let ny: Vec<f64> = y
        .iter()
        .zip(&dy)
        .zip(noise)
        .map(|((yi, di), xi)| yi + root * xi + h * di)
        .collect();
    if nx.iter().chain(ny.iter()).any(|v| !v.is_finite()) {
        let mut state: Vec<f64> = x.to_vec();
        state.extend_from_slice(y);
        return Err(Error::BlowUp { step: 0, path: 0, state });
    }
    Ok((nx, ny))
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn em_step_scalar(
    q: f64,
    v1: &Potential,
    v2: &Potential,
    x: f64,
    y: f64,
    h: f64,
    root: f64,
    xi: f64,
) -> (f64, f64) {
    let g2 = v2.gradient_1d(y);
    let nx = x + h * q * g2;
    let ny = y + root * xi - h * (q * v1.gradient_1d(x) + g2);
    (nx, ny)
}

/// Ensemble parameters: path count, optional step override, and master seed.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleParams {
    pub paths: usize,
    pub h: Option<f64>,
    pub seed: u64,
}

/// One estimated point of the variance decay curve.
#[derive(Debug, Clone, Copy)]
pub struct DecayPoint {
    pub t: f64,
    pub var_hat: f64,
    pub se: f64,
}

/// Two-copy Monte Carlo estimate of `t -> Var(P_t f)` at the given times.
///
/// For each invariant-measure start `z_i`, two copies run with independent
/// noise; `Var_hat(t) = mean_i f(Z^1_t) f(Z^2_t) - (mean_i f(z_i))^2`, with
/// a delete-one jackknife standard error per time.
pub fn decay_curve(
    sys: &SdeSystem,
    f: &Observable,
    times: &[f64],
    params: &EnsembleParams,
) -> Result<Vec<DecayPoint>> {
    let mut curves = decay_curve_multi(sys, std::slice::from_ref(f), times, params)?;
    Ok(curves.pop().expect("one observable"))
}

/// [`decay_curve`] for several observables over one shared path ensemble.
pub fn decay_curve_multi(
    sys: &SdeSystem,
    fs: &[Observable],
    times: &[f64],
    params: &EnsembleParams,
) -> Result<Vec<Vec<DecayPoint>>> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "times must be increasing and non-negative".into(),
        ));
    }
    if params.paths < 1000 {
        return Err(Error::InvalidParameter("decay_curve needs at least 1e3 paths".into()));
    }
    for f in fs {
        if !f.is_bounded() {
            return Err(Error::InvalidParameter(format!(
                "decay observables must be bounded (got {})",
                f.tag
            )));
        }
    }
    let h = params.h.unwrap_or_else(|| sys.default_step());
    let steps: Vec<usize> = times.iter().map(|t| (t / h).round() as usize).collect();
    let mu = ProductMeasure::new(sys.v1.clone(), sys.v2.clone())?;
    let starts = mu.sample(params.paths, params.seed);
    let n = params.paths;
    let n_t = times.len();
    let n_f = fs.len();

    // Per path: the products f(Z^1) f(Z^2), observable-major per checkpoint.
    let per_path: Vec<Result<Vec<f64>>> = if sys.is_scalar() {
        let q = sys.q[(0, 0)];
        let root = (2.0 * h).sqrt();
        maybe_par_map(n, |i| {
            let mut rng1 = substream(params.seed, 2 * i as u64);
            let mut rng2 = substream(params.seed, 2 * i as u64 + 1);
            let (mut x1, mut y1) = (starts.x(i)[0], starts.y(i)[0]);
            let (mut x2, mut y2) = (x1, y1);
            let mut products = Vec::with_capacity(n_t * n_f);
            let mut step = 0usize;
            for &target in &steps {
                while step < target {
                    let xi1: f64 = rng1.sample(StandardNormal);
                    let xi2: f64 = rng2.sample(StandardNormal);
                    (x1, y1) = em_step_scalar(q, &sys.v1, &sys.v2, x1, y1, h, root, xi1);
                    (x2, y2) = em_step_scalar(q, &sys.v1, &sys.v2, x2, y2, h, root, xi2);
                    step += 1;
                }
                if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
                    return Err(Error::BlowUp { step, path: i, state: vec![x1, y1, x2, y2] });
                }
                for f in fs {
                    products.push(f.eval(&[x1], &[y1]) * f.eval(&[x2], &[y2]));
                }
            }
            Ok(products)
        })
    } else {
        maybe_par_map(n, |i| {
            let mut rng1 = substream(params.seed, 2 * i as u64);
            let mut rng2 = substream(params.seed, 2 * i as u64 + 1);
            let mut s1 = (starts.x(i).to_vec(), starts.y(i).to_vec());
            let mut s2 = s1.clone();
            let mut products = Vec::with_capacity(n_t * n_f);
            let mut step = 0usize;
            let d2 = sys.v2.dim;
            let mut noise = vec![0.0; d2];
            for &target in &steps {
                while step < target {
                    for slot in noise.iter_mut() {
                        *slot = rng1.sample(StandardNormal);
                    }
                    s1 = em_step(sys, &s1.0, &s1.1, h, &noise).map_err(|e| at_path(e, i, step))?;
                    for slot in noise.iter_mut() {
                        *slot = rng2.sample(StandardNormal);
                    }
                    s2 = em_step(sys, &s2.0, &s2.1, h, &noise).map_err(|e| at_path(e, i, step))?;
                    step += 1;
                }
                for f in fs {
                    products.push(f.eval(&s1.0, &s1.1) * f.eval(&s2.0, &s2.1));
                }
            }
            Ok(products)
        })
    };

    // Ordered reduction: deterministic sums independent of the schedule.
    let mut g = vec![vec![0.0; n]; n_t * n_f];
    for (i, res) in per_path.into_iter().enumerate() {
        let products = res?;
        for (slot, p) in products.into_iter().enumerate() {
            g[slot][i] = p;
        }
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n_f);
    for (fi, f) in fs.iter().enumerate() {
        let f0: Vec<f64> = (0..n).map(|i| f.eval(starts.x(i), starts.y(i))).collect();
        let sh: f64 = f0.iter().sum();
        let mean_f = sh / nf;
        let mut curve = Vec::with_capacity(n_t);
        for (j, &t) in times.iter().enumerate() {
            let gj = &g[j * n_f + fi];
            let sg: f64 = gj.iter().sum();
            let var_hat = sg / nf - mean_f * mean_f;
            // Delete-one jackknife of mean(g) - mean(f0)^2.
            let mut jack_mean = 0.0;
            let mut jacks = Vec::with_capacity(n);
            for i in 0..n {
                let mg = (sg - gj[i]) / (nf - 1.0);
                let mh = (sh - f0[i]) / (nf - 1.0);
                let v = mg - mh * mh;
                jacks.push(v);
                jack_mean += v;
            }
            jack_mean /= nf;
            let se =
                ((nf - 1.0) / nf * jacks.iter().map(|v| (v - jack_mean).powi(2)).sum::<f64>()).sqrt();
            curve.push(DecayPoint { t, var_hat, se });
        }
        out.push(curve);
    }
    Ok(out)
}

fn at_path(e: Error, path: usize, step: usize) -> Error {
    match e {
        Error::BlowUp { state, .. } => Error::BlowUp { step, path, state },
        other => other,
    }
}

/// Evolve an ensemble of starts and return the states at the requested
/// checkpoints.
pub fn evolve_ensemble(
    sys: &SdeSystem,
    starts: &Batch,
    checkpoints: &[f64],
    h: f64,
    seed: u64,
) -> Result<Vec<Batch>> {
    assert!(sys.is_scalar(), "ensemble evolution currently targets the scalar system");
    let q = sys.q[(0, 0)];
    let root = (2.0 * h).sqrt();
    let steps: Vec<usize> = checkpoints.iter().map(|t| (t / h).round() as usize).collect();
    let n = starts.n;
    let rows: Vec<Result<Vec<(f64, f64)>>> = maybe_par_map(n, |i| {
        let mut rng = substream(seed, i as u64);
        let (mut x, mut y) = (starts.x(i)[0], starts.y(i)[0]);
        let mut states = Vec::with_capacity(steps.len());
        let mut step = 0usize;
        for &target in &steps {
            while step < target {
                let xi: f64 = rng.sample(StandardNormal);
                (x, y) = em_step_scalar(q, &sys.v1, &sys.v2, x, y, h, root, xi);
                step += 1;
            }
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::BlowUp { step, path: i, state: vec![x, y] });
            }
            states.push((x, y));
        }
        Ok(states)
    });
    let mut batches: Vec<Batch> = steps
        .iter()
        .map(|_| Batch { data: vec![0.0; 2 * n], n, d1: 1, d2: 1 })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        let states = row?;
        for (k, (x, y)) in states.into_iter().enumerate() {
            batches[k].data[2 * i] = x;
            batches[k].data[2 * i + 1] = y;
        }
    }
    Ok(batches)
}

/// Invariance check: tracked moments must stay within 4 standard errors of
/// their `t = 0` value at `T/4`, `T/2`, `T`, starting from exact samples.
pub fn stationarity_check(
    sys: &SdeSystem,
    moments: &[Observable],
    t_end: f64,
    params: &EnsembleParams,
) -> Result<CheckReport> {
    let mu = ProductMeasure::new(sys.v1.clone(), sys.v2.clone())?;
    // Integrability gate: the radial tables certify finite mass; second
    // moments are checked by quadrature for the unbounded trackers.
    for m in moments {
        if !m.is_bounded() {
            let mom = mu.m1.radial_moment(2).max(mu.m2.radial_moment(2));
            if !mom.is_finite() {
                return Err(Error::AssumptionViolated(format!(
                    "moment {} is not integrable under mu",
                    m.tag
                )));
            }
        }
    }
    let h = params.h.unwrap_or_else(|| sys.default_step());
    let starts = mu.sample(params.paths, params.seed);
    let checkpoints = [0.25 * t_end, 0.5 * t_end, t_end];
    let batches = evolve_ensemble(sys, &starts, &checkpoints, h, params.seed)?;
    let nf = params.paths as f64;

    let mean_se = |batch: &Batch, f: &Observable| -> (f64, f64) {
        let vals: Vec<f64> = (0..batch.n).map(|i| f.eval(batch.x(i), batch.y(i))).collect();
        let mean = vals.iter().sum::<f64>() / nf;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        (mean, (var / nf).sqrt())
    };

    let mut report = CheckReport::new("stationarity", true);
    report.context("t_end", format!("{t_end}"));
    report.context("h", format!("{h}"));
    report.context("paths", format!("{}", params.paths));
    for f in moments {
        let (m0, se0) = mean_se(&starts, f);
        report.push(Measurement::measured(&format!("{}_t0", f.tag), m0).with_tolerance(4.0 * se0));
        for (k, batch) in batches.iter().enumerate() {
            let (mt, set) = mean_se(batch, f);
            let tol = 4.0 * (se0 * se0 + set * set).sqrt();
            if (mt - m0).abs() > tol {
                report.pass = false;
            }
            report.push(Measurement::measured(&format!("{}_t{}", f.tag, k + 1), mt).with_tolerance(tol));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Decay classification for noisy Monte Carlo curves
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McClass {
    Exponential,
    SubExponential,
}

#[derive(Debug, Clone, Copy)]
pub struct McDecayFit {
    pub class: McClass,
    /// Fitted exponential rate (slope of `-ln Var` against `t`).
    pub rate: f64,
    pub rate_se: f64,
    pub exp_chi2: f64,
    pub poly_chi2: f64,
}

/// Classify a Monte Carlo decay curve as exponential or sub-exponential by
/// weighted least squares of `ln V` against `t` versus against `ln t`.
///
/// Points below three standard errors are noise floor and are dropped.
pub fn classify_variance_decay(points: &[DecayPoint]) -> Result<McDecayFit> {
    let usable: Vec<&DecayPoint> = points
        .iter()
        .filter(|p| p.t > 0.0 && p.var_hat > 3.0 * p.se && p.var_hat > 0.0)
        .collect();
    if usable.len() < 5 {
        return Err(Error::InconclusiveFit(format!(
            "only {} usable points above the noise floor",
            usable.len()
        )));
    }
    let ys: Vec<f64> = usable.iter().map(|p| p.var_hat.ln()).collect();
    let ws: Vec<f64> = usable.iter().map(|p| (p.var_hat / p.se).powi(2)).collect();
    let weighted = |xs: &[f64]| -> (f64, f64, f64) {
        let sw: f64 = ws.iter().sum();
        let mx = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / sw;
        let my = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
        let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(&ys)
            .zip(&ws)
            .map(|((x, y), w)| w * (x - mx) * (y - my))
            .sum();
        let slope = sxy / sxx;
        let dof = (usable.len() - 2).max(1) as f64;
        let chi2: f64 = xs
            .iter()
            .zip(&ys)
            .zip(&ws)
            .map(|((x, y), w)| {
                let pred = my + slope * (x - mx);
                w * (y - pred) * (y - pred)
            })
            .sum::<f64>()
            / dof;
        (slope, (1.0 / sxx).sqrt(), chi2)
    };
    let ts: Vec<f64> = usable.iter().map(|p| p.t).collect();
    let lnts: Vec<f64> = usable.iter().map(|p| p.t.ln()).collect();
    let (slope_exp, se_exp, exp_chi2) = weighted(&ts);
    let (_poly_slope, _poly_se, poly_chi2) = weighted(&lnts);
    let rate = -slope_exp;
    let class = if exp_chi2 <= poly_chi2 && rate > 0.0 {
        McClass::Exponential
    } else {
        McClass::SubExponential
    };
    Ok(McDecayFit { class, rate, rate_se: se_exp, exp_chi2, poly_chi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quadratic_system() -> SdeSystem {
        SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap()
    }

    #[test]
    fn em_step_hand_value() {
        let sys = quadratic_system();
        let (x, y) = em_step(&sys, &[1.0], &[1.0], 0.01, &[0.0]).unwrap();
        assert_relative_eq!(x[0], 1.01, max_relative = 1e-15);
        assert_relative_eq!(y[0], 0.98, max_relative = 1e-15);
    }

    #[test]
    fn em_step_fixed_point_at_origin() {
        let sys = quadratic_system();
        let (x, y) = em_step(&sys, &[0.0], &[0.0], 0.01, &[0.0]).unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!(y[0], 0.0);
    }

    #[test]
    fn x_update_is_noise_free() {
        let sys = quadratic_system();
        let mut rng = substream(5, 0);
        for _ in 0..200 {
            let x0: f64 = rng.sample(StandardNormal);
            let y0: f64 = rng.sample(StandardNormal);
            let xi: f64 = rng.sample(StandardNormal);
            let (xp, _) = em_step(&sys, &[x0], &[y0], 0.01, &[xi]).unwrap();
            let (xm, _) = em_step(&sys, &[x0], &[y0], 0.01, &[-xi]).unwrap();
            assert_eq!(xp[0].to_bits(), xm[0].to_bits());
        }
    }

    #[test]
    fn qq_star_must_be_invertible() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let err = SdeSystem::new(q, Potential::gaussian(2), Potential::gaussian(2)).unwrap_err();
        match err {
            Error::InvalidParameter(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decay_curve_at_zero_is_plain_variance() {
        let sys = quadratic_system();
        let f = Observable::tanh_x(1.0);
        let params = EnsembleParams { paths: 5000, h: Some(1e-3), seed: 3 };
        let pts = decay_curve(&sys, &f, &[0.0, 0.1], &params).unwrap();
        let mu = ProductMeasure::new(sys.v1.clone(), sys.v2.clone()).unwrap();
        let batch = mu.sample(5000, 3);
        let plain = {
            let vals: Vec<f64> = (0..batch.n).map(|i| f.eval(batch.x(i), batch.y(i))).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64 - mean * mean
        };
        assert_relative_eq!(pts[0].var_hat, plain, max_relative = 1e-12);
        assert!(pts[1].var_hat < pts[0].var_hat * 1.05);
    }

    #[test]
    fn decay_curve_is_deterministic() {
        let sys = quadratic_system();
        let f = Observable::tanh_x(1.0);
        let params = EnsembleParams { paths: 2000, h: Some(1e-2), seed: 8 };
        let a = decay_curve(&sys, &f, &[0.5, 1.0], &params).unwrap();
        let b = decay_curve(&sys, &f, &[0.5, 1.0], &params).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.var_hat.to_bits(), pb.var_hat.to_bits());
            assert_eq!(pa.se.to_bits(), pb.se.to_bits());
        }
    }

    #[test]
    fn unbounded_observable_is_rejected() {
        let sys = quadratic_system();
        let params = EnsembleParams { paths: 2000, h: Some(1e-2), seed: 8 };
        assert!(decay_curve(&sys, &Observable::x2(), &[1.0], &params).is_err());
    }

    /// Stationary covariance of the linearized Euler chain, derived by hand
    /// from `Sigma = M Sigma M^T + diag(0, 2h)` with `M = [[1, h], [-h, 1-h]]`:
    /// `E[y^2] = 1 / (1 - 3h/2 + 3h^2/4 - h^3/4)`,
    /// `E[x^2] = E[y^2] (1 - h/2 + h^2/2)`.
    fn em_stationary_x2(h: f64) -> f64 {
        let c = 1.0 / (1.0 - 1.5 * h + 0.75 * h * h - 0.25 * h * h * h);
        c * (1.0 - 0.5 * h + 0.5 * h * h)
    }

    #[test]
    fn em_bias_halves_with_step() {
        // Weak order one: the stationary moment bias scales linearly in h.
        let h = 0.05;
        let bias_h = em_stationary_x2(h) - 1.0;
        let bias_h2 = em_stationary_x2(0.5 * h) - 1.0;
        let ratio = bias_h / bias_h2;
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");

        // The simulated chain matches the hand-derived stationary moment.
        let sys = quadratic_system();
        let mu = ProductMeasure::new(sys.v1.clone(), sys.v2.clone()).unwrap();
        let n = 200_000;
        let starts = mu.sample(n, 17);
        let batches = evolve_ensemble(&sys, &starts, &[30.0], h, 17).unwrap();
        let m: f64 = (0..n).map(|i| batches[0].x(i)[0].powi(2)).sum::<f64>() / n as f64;
        let expect = em_stationary_x2(h);
        let se = (2.0 * expect * expect / n as f64).sqrt();
        assert!(
            (m - expect).abs() < 4.0 * se,
            "simulated {m} vs analytic {expect} (se {se})"
        );
    }

    #[test]
    fn stationarity_on_quadratic_system() {
        let sys = quadratic_system();
        let params = EnsembleParams { paths: 20_000, h: Some(1e-3), seed: 23 };
        let moments = [Observable::x2(), Observable::tanh_x(1.0)];
        let report = stationarity_check(&sys, &moments, 2.0, &params).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn classify_synthetic_curves() {
        let exp_points: Vec<DecayPoint> = (1..=12)
            .map(|k| {
                let t = 0.5 * k as f64;
                DecayPoint { t, var_hat: 0.4 * (-0.8 * t).exp(), se: 1e-4 }
            })
            .collect();
        let fit = classify_variance_decay(&exp_points).unwrap();
        assert_eq!(fit.class, McClass::Exponential);
        assert!((fit.rate - 0.8).abs() < 0.05);
        assert!(fit.rate > 3.0 * fit.rate_se);

        let poly_points: Vec<DecayPoint> = (1..=12)
            .map(|k| {
                let t = 2.0 * k as f64;
                DecayPoint { t, var_hat: 0.4 * (1.0 + t).powf(-0.5), se: 1e-4 }
            })
            .collect();
        let fit = classify_variance_decay(&poly_points).unwrap();
        assert_eq!(fit.class, McClass::SubExponential);
    }
}
