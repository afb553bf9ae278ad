//! One-dimensional quadrature with certified tail truncation.
//!
//! Integrands here are radial densities and their moments: smooth, positive,
//! eventually decaying.  Finite panels use adaptive Simpson; the half-line is
//! handled by doubling slabs `[R, 2R], [2R, 4R], ...` until the slab sequence
//! certifies a geometric tail, which bounds the discarded mass.

use crate::error::{Error, Result};

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if depth == 0 || err.abs() <= 15.0 * tol {
            left + right + err / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Result of a half-line integration with a certified truncation point.
#[derive(Debug, Clone, Copy)]
pub struct TailCertified {
    /// Estimate of the full integral over `[0, inf)`.
    pub value: f64,
    /// Point beyond which the remaining mass is below `tail_bound`.
    pub r_cut: f64,
    /// Certified bound on the mass beyond `r_cut`.
    pub tail_bound: f64,
}

/// Integrate `f >= 0` over `[0, inf)` with relative tail tolerance `rel_tol`.
///
/// Slabs `[r0 2^k, r0 2^{k+1}]` are accumulated until two consecutive slab
/// ratios certify a geometric tail whose remainder is below
/// `rel_tol * value`.  A slab sequence that refuses to shrink is reported as
/// a divergent trend; one that shrinks too slowly to certify within the
/// doubling budget is reported as not certifiable.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: &F,
    r0: f64,
    rel_tol: f64,
    what: &str,
) -> Result<TailCertified> {
    const MAX_DOUBLINGS: u32 = 64;
    let panel_tol = |acc: f64| (rel_tol * acc.max(1e-300)).max(1e-300) * 1e-2;

    let mut total = adaptive_simpson(f, 0.0, r0, panel_tol(1.0));
    if !total.is_finite() {
        return Err(Error::NonFinite {
            what: format!("integral of {what} on [0, {r0}]"),
            point: vec![r0],
        });
    }
    let mut lo = r0;
    let mut prev_slab = f64::INFINITY;
    let mut grow_count = 0u32;
    for _ in 0..MAX_DOUBLINGS {
        let hi = 2.0 * lo;
        let slab = adaptive_simpson(f, lo, hi, panel_tol(total));
        if !slab.is_finite() {
            return Err(Error::NonFinite {
                what: format!("integral of {what} on [{lo}, {hi}]"),
                point: vec![lo],
            });
        }
        total += slab;
        let ratio = if prev_slab > 0.0 { slab / prev_slab } else { 0.0 };
        if ratio >= 1.0 {
            grow_count += 1;
            if grow_count >= 4 {
                return Err(Error::DivergentIntegral(format!(
                    "{what}: slab mass non-decreasing over {grow_count} doublings near r = {hi:.3e}"
                )));
            }
        } else {
            grow_count = 0;
        }
        // Geometric certificate: remaining tail <= slab * rho / (1 - rho).
        if prev_slab.is_finite() && ratio < 0.95 {
            let rho = ratio.max(1e-16);
            let bound = slab * rho / (1.0 - rho);
            if bound <= rel_tol * total {
                return Ok(TailCertified {
                    value: total,
                    r_cut: hi,
                    tail_bound: bound,
                });
            }
        }
        prev_slab = slab;
        lo = hi;
    }
    Err(Error::TailNotCertifiable(format!(
        "{what}: tail still above tolerance after {MAX_DOUBLINGS} doublings (last slab near r = {lo:.3e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_is_exact() {
        let f = |x: f64| 3.0 * x * x;
        let v = adaptive_simpson(&f, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_half_line() {
        let f = |x: f64| (-0.5 * x * x).exp();
        let out = integrate_half_line(&f, 1.0, 1e-12, "gaussian").unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((out.value - exact).abs() < 1e-10, "got {}", out.value);
        assert!(out.tail_bound <= 1e-12 * out.value);
    }

    #[test]
    fn heavy_tail_converges() {
        // (1 + x^2)^{-5/2} integrates to 2/3 on the half line.
        let f = |x: f64| (1.0 + x * x).powf(-2.5);
        let out = integrate_half_line(&f, 1.0, 1e-10, "heavy").unwrap();
        assert!((out.value - 2.0 / 3.0).abs() < 1e-8, "got {}", out.value);
    }

    #[test]
    fn divergent_tail_is_reported() {
        let f = |x: f64| 1.0 / (1.0 + x);
        let err = integrate_half_line(&f, 1.0, 1e-10, "log-divergent").unwrap_err();
        match err {
            Error::DivergentIntegral(_) | Error::TailNotCertifiable(_) => {}
            other => panic!("unexpected error {other:?}"),
        }
    }
}
