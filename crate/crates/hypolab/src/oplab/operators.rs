//! Discrete generator `L = S - A` on the tensor grid, the auxiliary
//! operator `B`, and the constant estimates they induce.
//!
//! States are `n1 x n2` matrices (rows follow x, columns follow y).  The
//! structural identities are enforced by construction rather than hoped for:
//!
//! * `S` is assembled in divergence form (edge weights from `e^{-V2}` at
//!   midpoints) and applied edge-wise, so it is exactly self-adjoint in the
//!   weighted inner product, negative semidefinite, and kills constants in y
//!   bit-exactly.
//! * `A` starts from centered differences of its two first-order terms and
//!   is then antisymmetrized exactly in the weighted inner product,
//!   `A <- (A - A^+)/2`.
//! * The mean-zero subspace is handled by explicit deflation; `A` is
//!   conjugated by the deflation so the evolved semigroup stays inside it.
//!
//! `B = (I + (A pi_1)^+ (A pi_1))^{-1} (A pi_1)^+` collapses, over the
//! tensor structure, to an `n1 x n1` symmetric positive definite solve: for
//! functions of x alone the operator `G = (A pi_1)^+ (A pi_1)` acts as a
//! weighted 1-d matrix `G_X`, and
//!
//! ```text
//! B f   = embed( (I + G_X)^{-1} (A pi_1)^+ f )
//! B^+ f = (A pi_1) ( (I + G_X)^{-1} restrict(f) )
//! ```
//!
//! which keeps every check cheap enough to run under refinement.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oplab::grid::{Grid1d, GridMeasure};
use crate::rng::substream;
use crate::sde::SdeSystem;

/// Discretized operator family on a tensor grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperatorSet {
    pub grid: GridMeasure,
    pub q: f64,
    /// `V1'` at the x-nodes (bitwise antisymmetric).
    pub v1p: Vec<f64>,
    /// `V2'` at the y-nodes (bitwise antisymmetric).
    pub v2p: Vec<f64>,
    cx: DMatrix<f64>,
    cy_t: DMatrix<f64>,
    /// Divergence-form edge weights in y: `e^{-V2}` at midpoints.
    rho_mid_y: Vec<f64>,
    rho_node_y: Vec<f64>,
    /// Dense copy of the y-generator for spectra.
    sy: DMatrix<f64>,
    /// Divergence-form x-generator (for the 1-d comparison operator).
    tx: DMatrix<f64>,
    cy_one: Vec<f64>,
    w2_cy_one: DVector<f64>,
    w2_v2p: DVector<f64>,
    /// `(A pi_1)^+ (A pi_1)` as an `n1 x n1` matrix, symmetrized in the
    /// weighted inner product.
    pub g_x: DMatrix<f64>,
    ig_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    ig: DMatrix<f64>,
    /// Discrete `N(V2) = mu_2(|V2'|^2) / d2`.
    pub n_v2: f64,
    /// `K = 2 H(y^2)` on the y-nodes.
    pub k_values: Vec<f64>,
    /// Constant estimate for the mixed bounds: max of the K-route and the
    /// `(BA)^+` operator-norm route, clamped below at 1.
    pub n_hat: f64,
    pub n_hat_k_route: f64,
    pub n_hat_ba_route: f64,
}

fn deriv_matrix(g: &Grid1d) -> DMatrix<f64> {
    let n = g.len();
    let h = g.h;
    let mut d = DMatrix::zeros(n, n);
    d[(0, 0)] = -1.0 / h;
    d[(0, 1)] = 1.0 / h;
    for i in 1..n - 1 {
        d[(i, i - 1)] = -0.5 / h;
        d[(i, i + 1)] = 0.5 / h;
    }
    d[(n - 1, n - 2)] = -1.0 / h;
    d[(n - 1, n - 1)] = 1.0 / h;
    d
}

fn weighted_adjoint(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| w[j] * m[(j, i)] / w[i])
}

fn antisymmetrized(d: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    (d - weighted_adjoint(d, w)) * 0.5
}

/// Divergence-form generator `f -> e^{V}(e^{-V} f')'` with zero-flux ends.
fn divergence_form(g: &Grid1d) -> (Vec<f64>, Vec<f64>, DMatrix<f64>) {
    let n = g.len();
    let h = g.h;
    let phi = |r: f64| g.potential.profile().phi(r);
    let rho_node: Vec<f64> = g.nodes.iter().map(|&x| (-phi(x * x)).exp()).collect();
    let rho_mid: Vec<f64> = (0..n - 1)
        .map(|i| {
            let mid = 0.5 * (g.nodes[i] + g.nodes[i + 1]);
            (-phi(mid * mid)).exp()
        })
        .collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        let up = if i + 1 < n { rho_mid[i] } else { 0.0 };
        let down = if i > 0 { rho_mid[i - 1] } else { 0.0 };
        let scale = h * h * rho_node[i];
        if i + 1 < n {
            s[(i, i + 1)] = up / scale;
        }
        if i > 0 {
            s[(i, i - 1)] = down / scale;
        }
        s[(i, i)] = -(up + down) / scale;
    }
    (rho_mid, rho_node, s)
}

impl DiscreteOperatorSet {
    /// Assemble the operator set for a scalar system at resolution
    /// `n x n` (explicit half-widths override the automatic box sizing).
    pub fn build(system: &SdeSystem, n: usize, half_widths: Option<(f64, f64)>) -> Result<Self> {
        if !system.is_scalar() {
            return Err(Error::InvalidParameter(
                "the operator lab runs the scalar (d1 = d2 = 1) system".into(),
            ));
        }
        let (hx, hy) = match half_widths {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let gx = Grid1d::build(system.v1.clone(), n, hx)?;
        let gy = Grid1d::build(system.v2.clone(), n, hy)?;
        Self::from_grids(GridMeasure { x: gx, y: gy }, system.q[(0, 0)])
    }

    pub fn from_grids(grid: GridMeasure, q: f64) -> Result<Self> {
        let n1 = grid.n1();
        let n2 = grid.n2();
        let antisym_grad = |g: &Grid1d| -> Vec<f64> {
            let n = g.len();
            let mut out = vec![0.0; n];
            for i in 0..n / 2 {
                let gp = g.potential.gradient_1d(g.nodes[n - 1 - i]);
                out[n - 1 - i] = gp;
                out[i] = -gp;
            }
            if n % 2 == 1 {
                out[n / 2] = 0.0;
            }
            out
        };
        let v1p = antisym_grad(&grid.x);
        let v2p = antisym_grad(&grid.y);

        let dx = deriv_matrix(&grid.x);
        let dy = deriv_matrix(&grid.y);
        let cx = antisymmetrized(&dx, &grid.x.w);
        let cy = antisymmetrized(&dy, &grid.y.w);
        let cy_t = cy.transpose();

        let (rho_mid_y, rho_node_y, sy) = divergence_form(&grid.y);
        let (_, _, tx) = divergence_form(&grid.x);

        let ones = DVector::from_element(n2, 1.0);
        let cy_one_v = &cy * &ones;
        let cy_one: Vec<f64> = cy_one_v.iter().cloned().collect();
        let w2_cy_one = DVector::from_iterator(n2, (0..n2).map(|j| grid.y.w[j] * cy_one[j]));
        let w2_v2p = DVector::from_iterator(n2, (0..n2).map(|j| grid.y.w[j] * v2p[j]));

        let n_v2 = {
            // Even summand; pair order for symmetry, value is a plain moment.
            grid.y.weighted_sum_paired(|y| {
                let g = grid.y.potential.gradient_1d(y);
                g * g
            })
        };

        let k_values: Vec<f64> = grid
            .y
            .nodes
            .iter()
            .map(|&y| grid.y.potential.profile().h(1, (y * y).max(1e-300)).map(|h| 2.0 * h))
            .collect::<Result<_>>()?;

        let mut ops = DiscreteOperatorSet {
            grid,
            q,
            v1p,
            v2p,
            cx,
            cy_t,
            rho_mid_y,
            rho_node_y,
            sy,
            tx,
            cy_one,
            w2_cy_one,
            w2_v2p,
            g_x: DMatrix::zeros(n1, n1),
            ig_lu: nalgebra::LU::new(DMatrix::identity(n1, n1)),
            ig: DMatrix::identity(n1, n1),
            n_v2,
            k_values,
            n_hat: 1.0,
            n_hat_k_route: 1.0,
            n_hat_ba_route: 1.0,
        };

        // Assemble G_X column by column and symmetrize in the weighted
        // inner product.
        let mut g_x = DMatrix::zeros(n1, n1);
        for k in 0..n1 {
            let mut e = DVector::zeros(n1);
            e[k] = 1.0;
            let field = ops.a_bar(&e);
            let col = ops.a_dag_bar(&field);
            g_x.set_column(k, &col);
        }
        let g_adj = weighted_adjoint(&g_x, &ops.grid.x.w);
        ops.g_x = (&g_x + &g_adj) * 0.5;
        ops.ig = DMatrix::identity(n1, n1) + &ops.g_x;
        ops.ig_lu = nalgebra::LU::new(ops.ig.clone());

        ops.estimate_n()?;
        Ok(ops)
    }

    // -- state helpers ------------------------------------------------------

    pub fn n1(&self) -> usize {
        self.grid.n1()
    }

    pub fn n2(&self) -> usize {
        self.grid.n2()
    }

    pub fn inner(&self, f: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
        self.grid.inner(f, g)
    }

    pub fn norm(&self, f: &DMatrix<f64>) -> f64 {
        self.grid.norm(f)
    }

    /// Subtract the weighted mean.
    pub fn deflate(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let mean = self.grid.mean(f);
        f.map(|v| v - mean)
    }

    /// `restrict(F)(x) = sum_j F(x, y_j) w2_j`.
    pub fn restrict(&self, f: &DMatrix<f64>) -> DVector<f64> {
        let w2 = DVector::from_column_slice(&self.grid.y.w);
        f * w2
    }

    /// Embed an x-function as a state constant in y.
    pub fn embed(&self, z: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.n1(), self.n2(), |i, _| z[i])
    }

    /// Conditional expectation onto functions of x.
    pub fn pi1(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        self.embed(&self.restrict(f))
    }

    pub fn pi2(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        f - self.pi1(f)
    }

    // -- generator pieces ----------------------------------------------------

    /// Symmetric part, applied edge-wise in y (exactly zero on states
    /// constant in y, exact zero-flux at the box ends).
    pub fn apply_s(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let n1 = self.n1();
        let n2 = self.n2();
        let h2 = self.grid.y.h * self.grid.y.h;
        let mut out = DMatrix::zeros(n1, n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let up = if j + 1 < n2 {
                    self.rho_mid_y[j] * (f[(i, j + 1)] - f[(i, j)])
                } else {
                    0.0
                };
                let down = if j > 0 {
                    self.rho_mid_y[j - 1] * (f[(i, j)] - f[(i, j - 1)])
                } else {
                    0.0
                };
                out[(i, j)] = (up - down) / (h2 * self.rho_node_y[j]);
            }
        }
        out
    }

    /// Antisymmetric part, conjugated by the mean deflation.
    pub fn apply_a(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let fd = self.deflate(f);
        let mut term1 = &fd * &self.cy_t;
        for i in 0..self.n1() {
            for j in 0..self.n2() {
                term1[(i, j)] *= self.v1p[i];
            }
        }
        let mut term2 = &self.cx * &fd;
        for i in 0..self.n1() {
            for j in 0..self.n2() {
                term2[(i, j)] *= self.v2p[j];
            }
        }
        self.deflate(&((term1 - term2) * self.q))
    }

    /// Full generator `L = S - A`.
    pub fn apply_l(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        self.apply_s(f) - self.apply_a(f)
    }

    /// `A pi_1` applied to an x-function (the result is a full state).
    pub fn a_bar(&self, g: &DVector<f64>) -> DMatrix<f64> {
        let n1 = self.n1();
        let n2 = self.n2();
        let cxg = &self.cx * g;
        let mut out = DMatrix::zeros(n1, n2);
        for i in 0..n1 {
            let a = self.v1p[i] * g[i];
            let b = cxg[i];
            for j in 0..n2 {
                out[(i, j)] = self.q * (a * self.cy_one[j] - b * self.v2p[j]);
            }
        }
        self.deflate(&out)
    }

    /// `(A pi_1)^+` applied to a state (returns an x-function).
    pub fn a_dag_bar(&self, f: &DMatrix<f64>) -> DVector<f64> {
        let fd = self.deflate(f);
        let t1 = &fd * &self.w2_cy_one;
        let t2 = &fd * &self.w2_v2p;
        let mut out = &self.cx * t2;
        for i in 0..self.n1() {
            out[i] = self.q * (self.v1p[i] * t1[i] + out[i]);
        }
        out
    }

    /// Solve `(I + G_X) z = v` with a residual gate of 1e-12.
    pub fn solve_ig(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let mut z = self
            .ig_lu
            .solve(v)
            .ok_or_else(|| Error::SolveFailed("(I + G) factorization is singular".into()))?;
        // One step of iterative refinement, then the gate.
        let resid = v - &self.ig * &z;
        if let Some(corr) = self.ig_lu.solve(&resid) {
            z += corr;
        }
        let rel = (v - &self.ig * &z).norm() / v.norm().max(1e-300);
        if rel > 1e-12 {
            return Err(Error::SolveFailed(format!(
                "(I + G) solve residual {rel:.2e} above 1e-12"
            )));
        }
        Ok(z)
    }

    /// `B f = (I + (A pi_1)^+ A pi_1)^{-1} (A pi_1)^+ f`.
    pub fn apply_b(&self, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let rhs = self.a_dag_bar(f);
        Ok(self.embed(&self.solve_ig(&rhs)?))
    }

    /// `B^+ f = (A pi_1) (I + G)^{-1} f` (restricted through the tensor
    /// structure).
    pub fn apply_b_dag(&self, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let z = self.solve_ig(&self.restrict(f))?;
        Ok(self.a_bar(&z))
    }

    /// `<(1 + G)^{-1} G pi_1 f, pi_1 f>`, the defect term of the mixed
    /// inequality.
    pub fn g_defect_term(&self, f: &DMatrix<f64>) -> Result<f64> {
        let r = self.restrict(f);
        let z = self.solve_ig(&(&self.g_x * &r))?;
        Ok(self.grid.inner_x(z.as_slice(), r.as_slice()))
    }

    /// Dense y-generator (for spectra).
    pub fn sy_matrix(&self) -> &DMatrix<f64> {
        &self.sy
    }

    /// Dense divergence-form x-generator (for the 1-d comparison).
    pub fn tx_matrix(&self) -> &DMatrix<f64> {
        &self.tx
    }

    /// Flatten the whole generator to a dense matrix (oracle use only).
    pub fn l_matrix(&self) -> DMatrix<f64> {
        let n = self.n1() * self.n2();
        let mut l = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut e = DMatrix::zeros(self.n1(), self.n2());
            e[(k / self.n2(), k % self.n2())] = 1.0;
            let col = self.apply_l(&e);
            for i in 0..self.n1() {
                for j in 0..self.n2() {
                    l[(i * self.n2() + j, k)] = col[(i, j)];
                }
            }
        }
        l
    }

    pub fn flatten(&self, f: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n1() * self.n2(),
            (0..self.n1()).flat_map(|i| (0..self.n2()).map(move |j| (i, j))).map(|(i, j)| f[(i, j)]),
        )
    }

    /// Seeded random mean-zero state with unit norm.
    pub fn random_state(&self, seed: u64, stream: u64) -> DMatrix<f64> {
        let mut rng = substream(seed, stream);
        let raw = DMatrix::from_fn(self.n1(), self.n2(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let d = self.deflate(&raw);
        let norm = self.norm(&d);
        d / norm
    }

    /// Power iteration for the top eigenvalue of a self-adjoint positive
    /// semidefinite composite in the weighted inner product.
    pub fn operator_norm_sq<F>(&self, apply: F, seed: u64, max_iters: usize) -> Result<f64>
    where
        F: Fn(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    {
        let mut v = self.random_state(seed, 7_777);
        let mut lambda_prev = 0.0;
        for _ in 0..max_iters {
            let w = apply(&v)?;
            let lambda = self.inner(&w, &v);
            let norm = self.norm(&w);
            if norm < 1e-300 {
                return Ok(0.0);
            }
            v = w / norm;
            if (lambda - lambda_prev).abs() <= 1e-13 * lambda.abs().max(1e-30) {
                return Ok(lambda.max(0.0));
            }
            lambda_prev = lambda;
        }
        Ok(lambda_prev.max(0.0))
    }

    /// The two constant routes for the mixed bounds: `2 ||K||_inf` from the
    /// radial commutation relation, and the `(BA)^+` operator norm from the
    /// elliptic route; their max is the stored estimate.
    fn estimate_n(&mut self) -> Result<()> {
        // Trend gate: |H| must not grow along the grid.
        let r_max = self.grid.y.half_width.powi(2);
        let (sup_h, slope) = crate::potential::profile_h_sweep(
            self.grid.y.potential.profile(),
            1,
            (1e-6 * r_max).max(1e-12),
            r_max,
            256,
        )?;
        if slope > 0.1 {
            return Err(Error::AssumptionViolated(format!(
                "|H| grows along the grid (log-log slope {slope:.3}, sup {sup_h:.3e})"
            )));
        }
        let k_inf = self.k_values.iter().cloned().map(f64::abs).fold(0.0, f64::max);
        self.n_hat_k_route = 2.0 * k_inf;
        let ba_sq = self.operator_norm_sq(
            |f| {
                let bf = self.apply_b_dag(f)?;
                let a1 = self.apply_a(&bf);
                let a2 = self.apply_a(&a1);
                let out = self.apply_b(&a2)?;
                Ok(-out)
            },
            424_242,
            400,
        )?;
        self.n_hat_ba_route = ba_sq.max(0.0).sqrt();
        self.n_hat = self.n_hat_k_route.max(self.n_hat_ba_route).max(1.0);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn quadratic_ops(n: usize) -> DiscreteOperatorSet {
        let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap();
        DiscreteOperatorSet::build(&sys, n, None).unwrap()
    }

    #[test]
    fn s_kills_constants_exactly() {
        let ops = quadratic_ops(32);
        let c = DMatrix::from_element(32, 32, 3.25);
        let sc = ops.apply_s(&c);
        assert!(sc.iter().all(|&v| v == 0.0));
        // And states constant in y (the range of pi_1).
        let g = DVector::from_fn(32, |i, _| (i as f64 * 0.1).sin());
        let sg = ops.apply_s(&ops.embed(&g));
        assert!(sg.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn s_is_weighted_self_adjoint_and_nsd() {
        let ops = quadratic_ops(32);
        for k in 0..6 {
            let f = ops.random_state(1, k);
            let g = ops.random_state(2, k);
            let a = ops.inner(&ops.apply_s(&f), &g);
            let b = ops.inner(&f, &ops.apply_s(&g));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "asym {}", (a - b).abs());
            assert!(ops.inner(&ops.apply_s(&f), &f) <= 1e-12);
        }
    }

    #[test]
    fn a_is_weighted_antisymmetric() {
        let ops = quadratic_ops(32);
        for k in 0..6 {
            let f = ops.random_state(3, k);
            let g = ops.random_state(4, k);
            let a = ops.inner(&ops.apply_a(&f), &g);
            let b = ops.inner(&f, &ops.apply_a(&g));
            assert!((a + b).abs() <= 1e-12, "defect {}", (a + b).abs());
            assert!(ops.inner(&ops.apply_a(&f), &f).abs() <= 1e-12);
        }
    }

    #[test]
    fn pi1_is_an_orthogonal_projection() {
        let ops = quadratic_ops(32);
        let f = ops.random_state(5, 0);
        let g = ops.random_state(5, 1);
        let p = ops.pi1(&f);
        let pp = ops.pi1(&p);
        let mut dev = 0.0_f64;
        for i in 0..32 {
            for j in 0..32 {
                dev = dev.max((pp[(i, j)] - p[(i, j)]).abs());
            }
        }
        assert!(dev <= 1e-12, "pi1 not idempotent: {dev}");
        let a = ops.inner(&ops.pi1(&f), &g);
        let b = ops.inner(&f, &ops.pi1(&g));
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn pi1_a_pi1_vanishes() {
        let ops = quadratic_ops(64);
        for k in 0..4 {
            let f = ops.random_state(6, k);
            let v = ops.pi1(&ops.apply_a(&ops.pi1(&f)));
            assert!(ops.norm(&v) <= 1e-12, "pi1 A pi1 = {}", ops.norm(&v));
        }
    }

    #[test]
    fn mean_of_gradient_vanishes_exactly() {
        let ops = quadratic_ops(64);
        let pot = ops.grid.y.potential.clone();
        let m = ops.grid.y.weighted_sum_paired(|y| pot.gradient_1d(y));
        assert_eq!(m, 0.0);
    }

    #[test]
    fn b_annihilates_functions_of_x() {
        let ops = quadratic_ops(64);
        let g = DVector::from_fn(64, |i, _| (0.3 * ops.grid.x.nodes[i]).sin());
        let f = ops.deflate(&ops.embed(&g));
        let bf = ops.apply_b(&f).unwrap();
        assert!(ops.norm(&bf) <= 1e-12 * ops.norm(&f).max(1.0), "|Bf| = {}", ops.norm(&bf));
    }

    #[test]
    fn l_preserves_the_mean_zero_subspace() {
        let ops = quadratic_ops(32);
        let f = ops.random_state(9, 2);
        let lf = ops.apply_l(&f);
        assert!(ops.grid.mean(&lf).abs() <= 1e-13);
        // Dissipativity: <Lf, f> = <Sf, f> <= 0.
        assert!(ops.inner(&lf, &f) <= 1e-12);
    }

    #[test]
    fn n_v2_is_one_for_gaussian() {
        let ops = quadratic_ops(64);
        assert!((ops.n_v2 - 1.0).abs() < 1e-6, "N(V2) = {}", ops.n_v2);
    }

    #[test]
    fn gaussian_k_route_is_two() {
        // K = 2H = -1 identically: the K-route contributes 2 * ||K|| = 2.
        let ops = quadratic_ops(64);
        assert!((ops.n_hat_k_route - 2.0).abs() < 1e-12, "{}", ops.n_hat_k_route);
        assert!(ops.n_hat >= 1.0);
    }

    #[test]
    fn n_hat_is_stable_under_refinement() {
        let a = quadratic_ops(48);
        let b = quadratic_ops(96);
        let rel = (a.n_hat - b.n_hat).abs() / b.n_hat;
        assert!(rel < 0.05, "n_hat {} vs {}", a.n_hat, b.n_hat);
    }

    #[test]
    fn exp_profile_fails_the_trend_gate() {
        use crate::potential::{Family, RadialProfile};
        let v2 = Potential::new(Family::Radial(RadialProfile::Monomial { a: 1.0, m: 2.0 }), 1).unwrap();
        let sys = SdeSystem::scalar(1.0, Potential::gaussian(1), v2).unwrap();
        match DiscreteOperatorSet::build(&sys, 32, None) {
            Err(Error::AssumptionViolated(_)) => {}
            other => panic!("expected assumption violation, got {other:?}"),
        }
    }
}
