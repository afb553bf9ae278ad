//! Confining potential families and their numerical growth certificates.
//!
//! Every supported potential is radial in a canonical frame: `V(x) =
//! phi(|x|^2)` for a profile `phi` with closed-form derivatives up to third
//! order.  Offsets and linear frames are normalized away at construction, so
//! downstream code only ever sees the canonical radial representative.
//!
//! The growth checks in this module are sample- or quadrature-based
//! certificates over explicit finite ranges, not proofs; every report records
//! the range it covered so a failure is reproducible.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_half_line, TailCertified};
use crate::report::{CheckReport, Measurement};

/// Scalar radial profile `phi` on `[0, inf)` with three closed-form
/// derivatives.  The potential on R^d is `V(x) = phi(|x|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `phi(r) = a r^m`.  The standard Gaussian is `a = 1/2, m = 1`.
    Monomial { a: f64, m: f64 },
    /// `phi(r) = k (1 + r)^{delta/2}`.
    PowerLaw { k: f64, delta: f64 },
    /// `phi(r) = c ln(1 + r)`.
    LogPoly { c: f64 },
    /// `phi(r) = (d/2) ln(1 + r) + p ln ln(e + r)`.
    LogLogPoly { half_d: f64, p: f64 },
    /// `phi(r) = a e^r`.  Super-Gaussian growth; used as a counterexample
    /// in growth-condition tests.
    ExpGrowth { a: f64 },
}

impl RadialProfile {
    pub fn gaussian() -> Self {
        RadialProfile::Monomial { a: 0.5, m: 1.0 }
    }

    pub fn phi(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Monomial { a, m } => a * r.powf(m),
            RadialProfile::PowerLaw { k, delta } => k * (1.0 + r).powf(0.5 * delta),
            RadialProfile::LogPoly { c } => c * (1.0 + r).ln(),
            RadialProfile::LogLogPoly { half_d, p } => {
                half_d * (1.0 + r).ln() + p * (std::f64::consts::E + r).ln().ln()
            }
            RadialProfile::ExpGrowth { a } => a * r.exp(),
        }
    }

    pub fn dphi(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Monomial { a, m } => {
                if m == 1.0 {
                    a
                } else {
                    a * m * r.powf(m - 1.0)
                }
            }
            RadialProfile::PowerLaw { k, delta } => {
                0.5 * k * delta * (1.0 + r).powf(0.5 * delta - 1.0)
            }
            RadialProfile::LogPoly { c } => c / (1.0 + r),
            RadialProfile::LogLogPoly { half_d, p } => {
                let e = std::f64::consts::E;
                let l = (e + r).ln();
                half_d / (1.0 + r) + p / ((e + r) * l)
            }
            RadialProfile::ExpGrowth { a } => a * r.exp(),
        }
    }

    pub fn d2phi(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Monomial { a, m } => {
                if m == 1.0 {
                    0.0
                } else {
                    a * m * (m - 1.0) * r.powf(m - 2.0)
                }
            }
            RadialProfile::PowerLaw { k, delta } => {
                let s = 0.5 * delta;
                k * s * (s - 1.0) * (1.0 + r).powf(s - 2.0)
            }
            RadialProfile::LogPoly { c } => -c / ((1.0 + r) * (1.0 + r)),
            RadialProfile::LogLogPoly { half_d, p } => {
                let e = std::f64::consts::E;
                let l = (e + r).ln();
                let er = e + r;
                -half_d / ((1.0 + r) * (1.0 + r)) - p * (l + 1.0) / (er * er * l * l)
            }
            RadialProfile::ExpGrowth { a } => a * r.exp(),
        }
    }

    pub fn d3phi(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Monomial { a, m } => {
                if m == 1.0 || m == 2.0 {
                    0.0
                } else {
                    a * m * (m - 1.0) * (m - 2.0) * r.powf(m - 3.0)
                }
            }
            RadialProfile::PowerLaw { k, delta } => {
                let s = 0.5 * delta;
                k * s * (s - 1.0) * (s - 2.0) * (1.0 + r).powf(s - 3.0)
            }
            RadialProfile::LogPoly { c } => 2.0 * c / (1.0 + r).powi(3),
            RadialProfile::LogLogPoly { half_d, p } => {
                let e = std::f64::consts::E;
                let l = (e + r).ln();
                let er = e + r;
                2.0 * half_d / (1.0 + r).powi(3)
                    + p * (2.0 * l * l + 3.0 * l + 2.0) / (er.powi(3) * l.powi(3))
            }
            RadialProfile::ExpGrowth { a } => a * r.exp(),
        }
    }

    /// `H(r) = (2 r phi''' + (d2 + 2) phi'') / phi' - phi' - 2 r phi''`.
    ///
    /// This is the radial quantity whose boundedness the growth assumption
    /// demands; for the Gaussian profile it is the constant `-1/2`.
    pub fn h(&self, d2: usize, r: f64) -> Result<f64> {
        let p1 = self.dphi(r);
        if !(p1 > 0.0) || !p1.is_finite() {
            return Err(Error::SingularProfile { r, value: p1 });
        }
        let p2 = self.d2phi(r);
        let p3 = self.d3phi(r);
        Ok((2.0 * r * p3 + (d2 as f64 + 2.0) * p2) / p1 - p1 - 2.0 * r * p2)
    }
}

/// Named potential family, mirroring the admissible cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    /// `V ~ k (1 + |x|^2)^{delta/2}`.
    Power { k: f64, delta: f64 },
    /// `V = ((d + p)/2) ln(1 + |x|^2)`; polynomial tails of order `p`.
    LogPower { p: f64 },
    /// `V = (d/2) ln(1 + |x|^2) + p ln ln(e + |x|^2)`; barely normalizable
    /// for `p > 1`.
    LogLog { p: f64 },
    /// Direct radial profile.
    Radial(RadialProfile),
}

/// A confining potential `V(x) = phi(|x|^2)` on R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub family: Family,
    pub dim: usize,
    profile: RadialProfile,
}

impl Potential {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let profile = match family {
            Family::Power { k, delta } => {
                if !(k > 0.0) || !(delta > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power family needs k > 0, delta > 0 (got k={k}, delta={delta})"
                    )));
                }
                RadialProfile::PowerLaw { k, delta }
            }
            Family::LogPower { p } => {
                if !p.is_finite() {
                    return Err(Error::InvalidParameter("log-power exponent must be finite".into()));
                }
                RadialProfile::LogPoly {
                    c: 0.5 * (dim as f64 + p),
                }
            }
            Family::LogLog { p } => RadialProfile::LogLogPoly {
                half_d: 0.5 * dim as f64,
                p,
            },
            Family::Radial(profile) => profile,
        };
        Ok(Potential { family, dim, profile })
    }

    /// Standard Gaussian potential `V(x) = |x|^2 / 2`.
    pub fn gaussian(dim: usize) -> Self {
        Potential::new(Family::Radial(RadialProfile::gaussian()), dim).expect("valid")
    }

    pub fn power(dim: usize, k: f64, delta: f64) -> Result<Self> {
        Potential::new(Family::Power { k, delta }, dim)
    }

    pub fn log_power(dim: usize, p: f64) -> Result<Self> {
        Potential::new(Family::LogPower { p }, dim)
    }

    pub fn log_log(dim: usize, p: f64) -> Result<Self> {
        Potential::new(Family::LogLog { p }, dim)
    }

    /// Construct from a potential stated in a shifted/scaled frame
    /// `V(y) = phi(|sigma y - b|^2)`.
    ///
    /// The invertible frame is absorbed by the change of variables
    /// `y -> sigma y - b`, so only the canonical radial representative is
    /// stored.  `sigma` must be invertible.
    pub fn canonicalized(family: Family, dim: usize, b: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<Self> {
        if b.len() != dim || sigma.nrows() != dim || sigma.ncols() != dim {
            return Err(Error::InvalidParameter(
                "frame dimensions do not match the potential dimension".into(),
            ));
        }
        let svd = sigma.clone().svd(false, false);
        let min_sv = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_sv > 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "frame matrix is numerically singular (smallest singular value {min_sv:.3e})"
            )));
        }
        Potential::new(family, dim)
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.profile.phi(sq_norm(x))
    }

    /// `grad V(x) = 2 phi'(|x|^2) x`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = 2.0 * self.profile.dphi(sq_norm(x));
        x.iter().map(|&xi| s * xi).collect()
    }

    /// Scalar gradient for 1-d potentials (hot path for simulation).
    #[inline]
    pub fn gradient_1d(&self, x: f64) -> f64 {
        2.0 * self.profile.dphi(x * x) * x
    }

    /// `hess V(x) = 2 phi' I + 4 phi'' x x^T`.
    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let r = sq_norm(x);
        let p1 = self.profile.dphi(r);
        let p2 = self.profile.d2phi(r);
        let d = x.len();
        DMatrix::from_fn(d, d, |i, j| {
            let diag = if i == j { 2.0 * p1 } else { 0.0 };
            diag + 4.0 * p2 * x[i] * x[j]
        })
    }

    /// Spectral norm of the Hessian.  The eigenvalues of
    /// `2 phi' I + 4 phi'' x x^T` are `2 phi'` (tangential, absent in
    /// dimension 1) and `2 phi' + 4 phi'' |x|^2` (radial), so no eigensolver
    /// is needed.
    pub fn hessian_norm(&self, x: &[f64]) -> f64 {
        let r = sq_norm(x);
        let p1 = self.profile.dphi(r);
        let p2 = self.profile.d2phi(r);
        let radial = (2.0 * p1 + 4.0 * p2 * r).abs();
        if x.len() >= 2 {
            (2.0 * p1).abs().max(radial)
        } else {
            radial
        }
    }

    /// Whether `int e^{-V} dx` is finite, decided from the analytic tail
    /// exponent of the family (quadrature then certifies the value).
    pub fn is_normalizable(&self) -> bool {
        match self.family {
            Family::Power { k, delta } => k > 0.0 && delta > 0.0,
            Family::LogPower { p } => p > 0.0,
            Family::LogLog { p } => p > 1.0,
            Family::Radial(profile) => match profile {
                RadialProfile::Monomial { a, m } => a > 0.0 && m > 0.0,
                RadialProfile::PowerLaw { k, delta } => k > 0.0 && delta > 0.0,
                RadialProfile::LogPoly { c } => 2.0 * c > self.dim as f64,
                RadialProfile::LogLogPoly { half_d, p } => {
                    2.0 * half_d >= self.dim as f64 && p > 1.0
                }
                RadialProfile::ExpGrowth { a } => a > 0.0,
            },
        }
    }

    /// Radial density `r^{d-1} e^{-V(r)}` (no surface factor).
    pub fn radial_density(&self, r: f64) -> f64 {
        let d = self.dim as f64;
        let v = self.profile.phi(r * r);
        if d == 1.0 {
            (-v).exp()
        } else {
            r.powf(d - 1.0) * (-v).exp()
        }
    }

    /// Certified radial normalizer `int_0^inf r^{d-1} e^{-V} dr`.
    pub fn radial_mass(&self, rel_tol: f64) -> Result<TailCertified> {
        if !self.is_normalizable() {
            return Err(Error::DivergentIntegral(format!(
                "{:?} is not normalizable",
                self.family
            )));
        }
        integrate_half_line(&|r| self.radial_density(r), 1.0, rel_tol, "radial mass")
    }

    /// Normalizing constant `Z(V) = int_{R^d} e^{-V} dx`.
    pub fn z_constant(&self, rel_tol: f64) -> Result<f64> {
        let radial = self.radial_mass(rel_tol)?;
        Ok(surface_area(self.dim) * radial.value)
    }
}

#[inline]
fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Surface area of the unit sphere in R^d: `2 pi^{d/2} / Gamma(d/2)`.
pub fn surface_area(d: usize) -> f64 {
    // Gamma at integer/half-integer arguments by recursion.
    fn gamma_half(two_a: usize) -> f64 {
        match two_a {
            1 => std::f64::consts::PI.sqrt(),
            2 => 1.0,
            n => (n as f64 / 2.0 - 1.0) * gamma_half(n - 2),
        }
    }
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d)
}

// ---------------------------------------------------------------------------
// Growth-condition certificates
// ---------------------------------------------------------------------------

/// Deterministic low-discrepancy points in the ball of radius `radius`.
///
/// Kronecker sequence (generalized golden ratio) on the cube, thinned to the
/// ball; fully deterministic, so every failure is reproducible.
pub fn ball_points(dim: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    // Generalized golden ratio: unique positive root of x^{d+1} = x + 1.
    let mut phi = 1.5_f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=dim).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count && i < 1_000_000 {
        let u: Vec<f64> = alphas.iter().map(|a| (0.5 + a * i as f64).fract()).collect();
        let y: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
        if sq_norm(&y) <= 1.0 {
            out.push(y.iter().map(|v| v * radius).collect());
        }
        i += 1;
    }
    out
}

/// Certify the growth bound `|hess V| <= M (1 + |grad V|^tau)` by sampling.
///
/// Reports the maximum of `|hess V| / (1 + |grad V|^tau)` over a
/// deterministic point set in the ball of the given radius; passes iff the
/// maximum stays at or below `m_candidate`.
pub fn check_growth(
    v: &Potential,
    tau: f64,
    m_candidate: f64,
    sample_count: usize,
    radius: f64,
) -> Result<CheckReport> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be > 0".into()));
    }
    if !(1.0..2.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in [1, 2) (got {tau})"
        )));
    }
    let points = ball_points(v.dim, radius, sample_count);
    let mut worst = 0.0_f64;
    let mut worst_point = vec![0.0; v.dim];
    for x in &points {
        let h = v.hessian_norm(x);
        let g: f64 = sq_norm(&v.gradient(x)).sqrt();
        let ratio = h / (1.0 + g.powf(tau));
        if !ratio.is_finite() {
            return Err(Error::NonFinite {
                what: "growth ratio".into(),
                point: x.clone(),
            });
        }
        if ratio > worst {
            worst = ratio;
            worst_point = x.clone();
        }
    }
    let pass = worst <= m_candidate;
    let mut report = CheckReport::new("growth_bound", pass);
    report.context("family", format!("{:?}", v.family));
    report.context("radius", format!("{radius}"));
    report.context("samples", format!("{}", points.len()));
    report.context("tau", format!("{tau}"));
    report.context("worst_point", format!("{worst_point:?}"));
    report.push(Measurement::measured("max_ratio", worst).with_tolerance(m_candidate));
    Ok(report)
}

/// `H(r)` for a radial profile; errors if `phi'(r)` vanishes.
pub fn profile_h(profile: &RadialProfile, d2: usize, r: f64) -> Result<f64> {
    profile.h(d2, r)
}

/// Sweep `|H|` over a log-spaced grid, reporting the sup and the slope of
/// the last decade in log-log coordinates (a positive slope flags growth).
pub fn profile_h_sweep(
    profile: &RadialProfile,
    d2: usize,
    r_min: f64,
    r_max: f64,
    n: usize,
) -> Result<(f64, f64)> {
    assert!(n >= 8 && r_max > r_min && r_min > 0.0);
    let mut rs = Vec::with_capacity(n);
    let lmin = r_min.ln();
    let lmax = r_max.ln();
    for i in 0..n {
        rs.push((lmin + (lmax - lmin) * i as f64 / (n - 1) as f64).exp());
    }
    let mut sup = 0.0_f64;
    let mut tail: Vec<(f64, f64)> = Vec::new();
    for &r in &rs {
        let h = profile.h(d2, r)?.abs();
        if !h.is_finite() {
            return Err(Error::NonFinite {
                what: "H(r)".into(),
                point: vec![r],
            });
        }
        sup = sup.max(h);
        if r >= r_max / 10.0 {
            tail.push((r.ln(), h.max(1e-300).ln()));
        }
    }
    // Least-squares slope of ln|H| against ln r over the last decade.
    let slope = ls_slope(&tail);
    Ok((sup, slope))
}

/// Certify the boundedness of `H(r)` on a grid: finite sup and a
/// non-increasing tail trend.
pub fn check_vv3(profile: &RadialProfile, d2: usize, grid: &[f64]) -> Result<CheckReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid must be non-empty".into()));
    }
    let r_max = grid.iter().cloned().fold(0.0_f64, f64::max);
    let mut sup = 0.0_f64;
    let mut tail: Vec<(f64, f64)> = Vec::new();
    for &r in grid {
        let h = profile.h(d2, r)?.abs();
        if !h.is_finite() {
            return Err(Error::NonFinite {
                what: "H(r)".into(),
                point: vec![r],
            });
        }
        sup = sup.max(h);
        if r >= r_max / 10.0 && r > 0.0 {
            tail.push((r.ln(), h.max(1e-300).ln()));
        }
    }
    let slope = ls_slope(&tail);
    let pass = sup.is_finite() && slope <= 0.05;
    let mut report = CheckReport::new("profile_h_bounded", pass);
    report.context("grid_max", format!("{r_max}"));
    report.context("grid_points", format!("{}", grid.len()));
    report.push(Measurement::measured("sup_abs_h", sup));
    report.push(Measurement::measured("tail_loglog_slope", slope).with_tolerance(0.05));
    Ok(report)
}

/// Quadrature estimate of `mu(|grad V|^power)` with a certified tail.
pub fn moment_check(v: &Potential, power: u32) -> Result<f64> {
    if power != 2 && power != 4 {
        return Err(Error::InvalidParameter(format!(
            "power must be 2 or 4 (got {power})"
        )));
    }
    let mass = v.radial_mass(1e-10)?;
    let integrand = |r: f64| {
        let g = (2.0 * v.profile.dphi(r * r) * r).abs();
        v.radial_density(r) * g.powi(power as i32)
    };
    let num = integrate_half_line(&integrand, 1.0, 1e-10, "gradient moment")?;
    // Relative truncation error certified below 1e-8 of the estimate.
    let value = num.value / mass.value;
    if num.tail_bound > 1e-8 * num.value {
        return Err(Error::TailNotCertifiable(format!(
            "moment tail bound {:.3e} above 1e-8 of the estimate",
            num.tail_bound / num.value
        )));
    }
    Ok(value)
}

/// Log-spaced grid helper used by the certificate sweeps.
pub fn log_grid(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    let lmin = r_min.ln();
    let lmax = r_max.ln();
    (0..n)
        .map(|i| (lmin + (lmax - lmin) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
