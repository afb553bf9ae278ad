//! Symmetric weighted 1-d grids and the tensor-product grid measure.
//!
//! Grids are symmetric about 0 by construction at the bit level: the right
//! half is built first and the left half is its exact negation, and node
//! weights are computed once per mirror pair.  Odd summands (like the
//! gradient of an even potential) then cancel pair by pair to exactly 0.0,
//! which is what makes the discrete projection identities exact.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::adaptive_simpson;

/// A symmetric 1-d grid with normalized `e^{-V}` node weights.
#[derive(Debug, Clone)]
pub struct Grid1d {
    pub potential: Potential,
    pub nodes: Vec<f64>,
    /// Normalized node weights (sum exactly handled by pair summation).
    pub w: Vec<f64>,
    pub h: f64,
    pub half_width: f64,
}

impl Grid1d {
    /// Build an `n`-point grid on `[-r, r]`.  With `half_width = None` the
    /// box is sized so the truncated tail mass is below `1e-8`; an explicit
    /// box is refused (with a suggestion) when the boundary nodes carry
    /// more than `1e-8` of the weight.
    pub fn build(potential: Potential, n: usize, half_width: Option<f64>) -> Result<Self> {
        if potential.dim != 1 {
            return Err(Error::GridRejected("grids are one-dimensional".into()));
        }
        if n < 8 {
            return Err(Error::GridRejected("need at least 8 nodes".into()));
        }
        let auto = auto_half_width(&potential, 1e-9)?;
        let r = half_width.unwrap_or(auto);
        let h = 2.0 * r / (n - 1) as f64;

        let mut nodes = vec![0.0; n];
        let mut w = vec![0.0; n];
        let half = n / 2;
        for i in 0..half {
            let u = r - i as f64 * h;
            nodes[i] = -u;
            nodes[n - 1 - i] = u;
            let weight = (-potential.profile().phi(u * u)).exp();
            w[i] = weight;
            w[n - 1 - i] = weight;
        }
        if n % 2 == 1 {
            nodes[half] = 0.0;
            w[half] = (-potential.profile().phi(0.0)).exp();
        }
        // Pairwise normalization keeps mirror weights bitwise equal.
        let mut sum = 0.0;
        for weight in w.iter().take(half) {
            sum += 2.0 * weight;
        }
        if n % 2 == 1 {
            sum += w[half];
        }
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::GridRejected("weights degenerate on this box".into()));
        }
        for weight in w.iter_mut() {
            *weight /= sum;
        }
        let boundary = w[0] + w[n - 1];
        if boundary > 1e-8 {
            return Err(Error::GridRejected(format!(
                "boundary weight mass {boundary:.2e} above 1e-8; increase half_width to at least {auto:.3}"
            )));
        }
        Ok(Grid1d { potential, nodes, w, h, half_width: r })
    }

    /// Pair-ordered sum of `w_i f(node_i)`; exactly zero for odd `f`.
    pub fn weighted_sum_paired<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let n = self.nodes.len();
        let half = n / 2;
        let mut sum = 0.0;
        for i in 0..half {
            sum += self.w[i] * f(self.nodes[i]) + self.w[n - 1 - i] * f(self.nodes[n - 1 - i]);
        }
        if n % 2 == 1 {
            sum += self.w[half] * f(self.nodes[half]);
        }
        sum
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Smallest half-width whose relative tail mass is below `tail_rel`.
fn auto_half_width(potential: &Potential, tail_rel: f64) -> Result<f64> {
    let mass = potential.radial_mass(1e-12)?;
    let tail = |r: f64| -> f64 {
        if r >= mass.r_cut {
            return 0.0;
        }
        adaptive_simpson(
            &|s| potential.radial_density(s),
            r,
            mass.r_cut,
            1e-13 * mass.value,
        ) / mass.value
    };
    let (mut lo, mut hi) = (0.0, mass.r_cut);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > tail_rel {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Tensor grid with the product weights `w1 (x) w2`.
#[derive(Debug, Clone)]
pub struct GridMeasure {
    pub x: Grid1d,
    pub y: Grid1d,
}

impl GridMeasure {
    pub fn n1(&self) -> usize {
        self.x.len()
    }

    pub fn n2(&self) -> usize {
        self.y.len()
    }

    /// `<F, G> = sum_ij w1_i w2_j F_ij G_ij`.
    pub fn inner(&self, f: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n1() {
            let mut row = 0.0;
            for j in 0..self.n2() {
                row += self.y.w[j] * f[(i, j)] * g[(i, j)];
            }
            acc += self.x.w[i] * row;
        }
        acc
    }

    pub fn norm(&self, f: &DMatrix<f64>) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    /// Weighted mean `<F, 1>`.
    pub fn mean(&self, f: &DMatrix<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n1() {
            let mut row = 0.0;
            for j in 0..self.n2() {
                row += self.y.w[j] * f[(i, j)];
            }
            acc += self.x.w[i] * row;
        }
        acc
    }

    /// Marginal inner product on x-space vectors.
    pub fn inner_x(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.x.w)
            .map(|((u, v), w)| w * u * v)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_bitwise_symmetric() {
        let g = Grid1d::build(Potential::gaussian(1), 64, None).unwrap();
        let n = g.len();
        for i in 0..n / 2 {
            assert_eq!(g.nodes[i].to_bits(), (-g.nodes[n - 1 - i]).to_bits());
            assert_eq!(g.w[i].to_bits(), g.w[n - 1 - i].to_bits());
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for pot in [
            Potential::gaussian(1),
            Potential::power(1, 1.0, 1.0).unwrap(),
            Potential::log_power(1, 4.0).unwrap(),
        ] {
            let g = Grid1d::build(pot, 64, None).unwrap();
            let total: f64 = g.weighted_sum_paired(|_| 1.0);
            assert!((total - 1.0).abs() < 1e-14, "sum {total}");
        }
    }

    #[test]
    fn odd_summand_cancels_exactly() {
        let g = Grid1d::build(Potential::gaussian(1), 64, None).unwrap();
        let pot = g.potential.clone();
        let mean_grad = g.weighted_sum_paired(|x| pot.gradient_1d(x));
        assert_eq!(mean_grad, 0.0);
        let mean_x3 = g.weighted_sum_paired(|x| x * x * x);
        assert_eq!(mean_x3, 0.0);
    }

    #[test]
    fn too_small_box_is_refused_with_suggestion() {
        let err = Grid1d::build(Potential::gaussian(1), 64, Some(2.0)).unwrap_err();
        match err {
            Error::GridRejected(msg) => assert!(msg.contains("increase half_width"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn auto_width_scales_with_tails() {
        let light = Grid1d::build(Potential::gaussian(1), 64, None).unwrap();
        let heavy = Grid1d::build(Potential::log_power(1, 4.0).unwrap(), 64, None).unwrap();
        assert!(light.half_width < 8.0, "gaussian box {}", light.half_width);
        assert!(heavy.half_width > 30.0, "heavy box {}", heavy.half_width);
    }

    #[test]
    fn gaussian_grid_second_moment() {
        // Uniform-grid Riemann weights of a Gaussian are spectrally accurate;
        // the discrete second moment reproduces 1 to truncation error.
        let g = Grid1d::build(Potential::gaussian(1), 64, None).unwrap();
        let m2 = g.weighted_sum_paired(|x| x * x);
        assert!((m2 - 1.0).abs() < 1e-6, "m2 = {m2}");
    }
}
