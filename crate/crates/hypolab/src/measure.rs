//! Exact sampling and quadrature for the invariant product measure
//! `mu = mu_1 x mu_2`, plus oscillation and variance estimators.
//!
//! Sampling is radial inverse-CDF: the law of `|x|` under a radial marginal
//! has density proportional to `r^{d-1} e^{-V(r)}`, which is tabulated on a
//! certified truncation range and inverted by monotone interpolation.  The
//! direction is uniform on the sphere.  Batches are split into fixed-size
//! chunks, one ChaCha stream per chunk, so output is identical for any
//! worker count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::adaptive_simpson;
use crate::rng::{maybe_par_map, substream, SAMPLER_STREAM_BASE};

/// Samples per RNG stream; fixed so the stream layout is independent of the
/// scheduler.
const CHUNK: usize = 8192;

/// Tabulated CDF of the radial law with a certified Kolmogorov bound.
#[derive(Debug, Clone)]
pub struct RadialCdfTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    /// Certified bound on the Kolmogorov distance between the sampled law
    /// (piecewise-linear CDF) and the true radial law.
    pub kolmogorov_bound: f64,
    /// Normalizer of the truncated radial density.
    pub mass: f64,
}

impl RadialCdfTable {
    fn build(pot: &Potential) -> Result<Self> {
        let tail = pot.radial_mass(1e-10)?;
        let r_cut = tail.r_cut;
        let density = |r: f64| pot.radial_density(r);
        // Heavy tails put r_cut orders of magnitude past the bulk; nodes are
        // uniform over the radius holding 90% of the mass and geometric
        // beyond it.
        let r_split = {
            let target = 0.1 * tail.value;
            let (mut lo, mut hi) = (0.0, r_cut);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let tail_mass = adaptive_simpson(&density, mid, r_cut, 1e-4 * target);
                if tail_mass > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi.max(r_cut * 1e-9)
        };
        let mut n_cells = 4096usize;
        loop {
            let nodes = if r_cut / r_split < 2.0 {
                let h = r_cut / n_cells as f64;
                (0..=n_cells).map(|i| i as f64 * h).collect::<Vec<f64>>()
            } else {
                let bulk = n_cells / 2;
                let h = r_split / bulk as f64;
                let ratio = (r_cut / r_split).powf(1.0 / (n_cells - bulk) as f64);
                let mut nodes: Vec<f64> = (0..=bulk).map(|i| i as f64 * h).collect();
                let mut r = r_split;
                for _ in bulk + 1..=n_cells {
                    r *= ratio;
                    nodes.push(r);
                }
                nodes
            };
            let mut cdf = Vec::with_capacity(n_cells + 1);
            cdf.push(0.0);
            let mut acc = 0.0;
            let mut err_sum = 0.0;
            let mut interp_dev: f64 = 0.0;
            for i in 0..n_cells {
                let a = nodes[i];
                let b = nodes[i + 1];
                let h = b - a;
                let m = 0.5 * (a + b);
                let coarse = h / 6.0 * (density(a) + 4.0 * density(m) + density(b));
                let left = h / 12.0 * (density(a) + 4.0 * density(0.25 * (3.0 * a + b)) + density(m));
                let right = h / 12.0 * (density(m) + 4.0 * density(0.25 * (a + 3.0 * b)) + density(b));
                let fine = left + right;
                err_sum += (fine - coarse).abs() / 15.0;
                interp_dev = interp_dev.max((left - 0.5 * fine).abs());
                acc += fine;
                cdf.push(acc);
            }
            let mass = acc;
            let bound = (err_sum + interp_dev + tail.tail_bound) / mass;
            if bound <= 1e-6 || n_cells >= 1 << 20 {
                if bound > 1e-6 {
                    return Err(Error::TailNotCertifiable(format!(
                        "radial CDF table cannot reach Kolmogorov 1e-6 (best {bound:.2e})"
                    )));
                }
                for c in cdf.iter_mut() {
                    *c /= mass;
                }
                return Ok(RadialCdfTable { nodes, cdf, kolmogorov_bound: bound, mass });
            }
            n_cells *= 2;
        }
    }

    /// Invert the tabulated CDF at `u` in `[0, 1)`.
    pub fn invert(&self, u: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx == 0 {
            return self.nodes[0];
        }
        if idx >= self.cdf.len() {
            return *self.nodes.last().unwrap();
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (r0, r1) = (self.nodes[idx - 1], self.nodes[idx]);
        if c1 > c0 {
            r0 + (u - c0) / (c1 - c0) * (r1 - r0)
        } else {
            0.5 * (r0 + r1)
        }
    }
}

/// One radial marginal with its sampler table.
#[derive(Debug, Clone)]
pub struct Marginal {
    pub potential: Potential,
    pub table: RadialCdfTable,
}

impl Marginal {
    pub fn new(potential: Potential) -> Result<Self> {
        if !potential.is_normalizable() {
            return Err(Error::DivergentIntegral(format!(
                "marginal potential {:?} is not normalizable",
                potential.family
            )));
        }
        let table = RadialCdfTable::build(&potential)?;
        Ok(Marginal { potential, table })
    }

    pub fn dim(&self) -> usize {
        self.potential.dim
    }

    /// Moment `E[|x|^k]` of the radial law by quadrature on the table range.
    pub fn radial_moment(&self, k: u32) -> f64 {
        let r_cut = *self.table.nodes.last().unwrap();
        let num = adaptive_simpson(
            &|r: f64| r.powi(k as i32) * self.potential.radial_density(r),
            0.0,
            r_cut,
            1e-12 * self.table.mass,
        );
        num / self.table.mass
    }

    /// Probability of `|x| > r` under the truncated radial law.
    pub fn radial_tail(&self, r: f64) -> f64 {
        let r_cut = *self.table.nodes.last().unwrap();
        if r >= r_cut {
            return 0.0;
        }
        adaptive_simpson(
            &|s: f64| self.potential.radial_density(s),
            r,
            r_cut,
            1e-12 * self.table.mass,
        ) / self.table.mass
    }

    fn draw(&self, rng: &mut rand_chacha::ChaCha8Rng, out: &mut [f64]) {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let u: f64 = rng.random();
        let r = self.table.invert(u);
        let d = self.dim();
        if d == 1 {
            let s: f64 = rng.random();
            out[0] = if s < 0.5 { -r } else { r };
        } else {
            loop {
                let mut norm2 = 0.0;
                for slot in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *slot = g;
                    norm2 += g * g;
                }
                if norm2 > 1e-24 {
                    let scale = r / norm2.sqrt();
                    for slot in out.iter_mut() {
                        *slot *= scale;
                    }
                    break;
                }
            }
        }
    }
}

/// The product measure `mu_1 x mu_2`.
#[derive(Debug, Clone)]
pub struct ProductMeasure {
    pub m1: Marginal,
    pub m2: Marginal,
}

/// A batch of samples, stored row-major as `(x, y)` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub data: Vec<f64>,
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
}

impl Batch {
    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        let w = self.d1 + self.d2;
        &self.data[i * w..i * w + self.d1]
    }

    #[inline]
    pub fn y(&self, i: usize) -> &[f64] {
        let w = self.d1 + self.d2;
        &self.data[i * w + self.d1..(i + 1) * w]
    }
}

impl ProductMeasure {
    pub fn new(v1: Potential, v2: Potential) -> Result<Self> {
        Ok(ProductMeasure {
            m1: Marginal::new(v1)?,
            m2: Marginal::new(v2)?,
        })
    }

    /// Draw `n` i.i.d. samples; bitwise deterministic given `seed`,
    /// regardless of thread count.
    pub fn sample(&self, n: usize, seed: u64) -> Batch {
        assert!(n >= 1);
        let width = self.m1.dim() + self.m2.dim();
        let chunks = n.div_ceil(CHUNK);
        let parts: Vec<Vec<f64>> = maybe_par_map(chunks, |c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut rng = substream(seed, SAMPLER_STREAM_BASE + c as u64);
            let mut out = vec![0.0; (hi - lo) * width];
            for k in 0..(hi - lo) {
                let row = &mut out[k * width..(k + 1) * width];
                let (xs, ys) = row.split_at_mut(self.m1.dim());
                self.m1.draw(&mut rng, xs);
                self.m2.draw(&mut rng, ys);
            }
            out
        });
        let mut data = Vec::with_capacity(n * width);
        for part in parts {
            data.extend_from_slice(&part);
        }
        Batch { data, n, d1: self.m1.dim(), d2: self.m2.dim() }
    }
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// Named observable on `R^{d1+d2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    /// `tanh(scale * x_1)`; oscillation bound 2.
    TanhX { scale: f64 },
    /// `tanh(scale * y_1)`; oscillation bound 2.
    TanhY { scale: f64 },
    /// Smoothed indicator `tanh((x_1 - threshold)/width) / 2`;
    /// oscillation bound 1.
    SmoothedIndicatorX { threshold: f64, width: f64 },
    /// `1_{x_1 > 0} - 1/2`; oscillation bound 1.
    CenteredSignX,
    /// `tanh(scale x_1) tanh(scale y_1)`; oscillation bound 2.
    TanhProduct { scale: f64 },
    /// `x_1^2` (unbounded; only for invariance tracking).
    X2,
    /// `y_1^2` (unbounded; only for invariance tracking).
    Y2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub kind: ObservableKind,
    /// Declared oscillation bound; consumers of the envelope certificates
    /// use this value, never the empirical range.
    pub declared_osc: f64,
    pub tag: String,
}

impl Observable {
    pub fn tanh_x(scale: f64) -> Self {
        Observable { kind: ObservableKind::TanhX { scale }, declared_osc: 2.0, tag: "tanh_x".into() }
    }

    pub fn tanh_y(scale: f64) -> Self {
        Observable { kind: ObservableKind::TanhY { scale }, declared_osc: 2.0, tag: "tanh_y".into() }
    }

    pub fn smoothed_indicator_x(threshold: f64, width: f64) -> Self {
        Observable {
            kind: ObservableKind::SmoothedIndicatorX { threshold, width },
            declared_osc: 1.0,
            tag: "smoothed_indicator_x".into(),
        }
    }

    pub fn centered_sign_x() -> Self {
        Observable { kind: ObservableKind::CenteredSignX, declared_osc: 1.0, tag: "centered_sign_x".into() }
    }

    pub fn tanh_product(scale: f64) -> Self {
        Observable { kind: ObservableKind::TanhProduct { scale }, declared_osc: 2.0, tag: "tanh_product".into() }
    }

    pub fn x2() -> Self {
        Observable { kind: ObservableKind::X2, declared_osc: f64::INFINITY, tag: "x2".into() }
    }

    pub fn y2() -> Self {
        Observable { kind: ObservableKind::Y2, declared_osc: f64::INFINITY, tag: "y2".into() }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            ObservableKind::TanhX { scale } => (scale * x[0]).tanh(),
            ObservableKind::TanhY { scale } => (scale * y[0]).tanh(),
            ObservableKind::SmoothedIndicatorX { threshold, width } => {
                0.5 * ((x[0] - threshold) / width).tanh()
            }
            ObservableKind::CenteredSignX => {
                if x[0] > 0.0 {
                    0.5
                } else {
                    -0.5
                }
            }
            ObservableKind::TanhProduct { scale } => (scale * x[0]).tanh() * (scale * y[0]).tanh(),
            ObservableKind::X2 => x[0] * x[0],
            ObservableKind::Y2 => y[0] * y[0],
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.declared_osc.is_finite()
    }

    /// Check `|f| <= declared_osc` over a batch.
    pub fn validate(&self, batch: &Batch) -> Result<()> {
        let mut worst = 0.0_f64;
        for i in 0..batch.n {
            worst = worst.max(self.eval(batch.x(i), batch.y(i)).abs());
        }
        if worst > self.declared_osc {
            return Err(Error::ObservableContract { empirical: worst, declared: self.declared_osc });
        }
        Ok(())
    }
}

/// Unbiased sample variance with a delete-one jackknife standard error.
#[derive(Debug, Clone, Copy)]
pub struct VarEstimate {
    pub value: f64,
    pub se: f64,
}

pub fn variance(f: &Observable, batch: &Batch) -> VarEstimate {
    let n = batch.n;
    assert!(n >= 3, "variance needs at least three samples");
    // Welford, exact for constant observables.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let v = f.eval(batch.x(i), batch.y(i));
        values.push(v);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    // Jackknife over centered sums.
    let nf = n as f64;
    let s1c: f64 = values.iter().map(|v| v - mean).sum();
    let s2c: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let mut jack_mean = 0.0;
    let mut jack = Vec::with_capacity(n);
    for v in &values {
        let d = v - mean;
        let rest1 = s1c - d;
        let rest2 = s2c - d * d;
        let var_i = (rest2 - rest1 * rest1 / (nf - 1.0)) / (nf - 2.0);
        jack.push(var_i);
        jack_mean += var_i;
    }
    jack_mean /= nf;
    let se = ((nf - 1.0) / nf * jack.iter().map(|j| (j - jack_mean).powi(2)).sum::<f64>()).sqrt();
    VarEstimate { value: var, se }
}

/// Empirical oscillation (max - min) next to the declared bound.
///
/// The empirical value is a lower estimate; certificates use the declared
/// one.  An empirical value above the declaration is a contract violation.
pub fn osc(f: &Observable, batch: &Batch) -> Result<(f64, f64)> {
    assert!(batch.n >= 1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..batch.n {
        let v = f.eval(batch.x(i), batch.y(i));
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let empirical = hi - lo;
    if empirical > f.declared_osc {
        return Err(Error::ObservableContract { empirical, declared: f.declared_osc });
    }
    Ok((empirical, f.declared_osc))
}
