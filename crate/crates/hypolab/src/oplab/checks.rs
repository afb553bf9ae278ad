//! Verification of the operator inequalities and identities on the grid.
//!
//! The mixed bounds on `B` are Hilbert-space algebra over exact
//! symmetry/antisymmetry, so on this discretization they hold to solver
//! tolerance at every resolution; the commutation and averaging identities
//! hold only in the refinement limit and are reported with their residuals.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{weighted_sym_eigen, weighted_sym_eigenvalues};
use crate::oplab::operators::DiscreteOperatorSet;
use crate::rates::RateFunction;
use crate::report::{CheckReport, FailureArtifact, Measurement};

const SLACK: f64 = 1e-10;

/// Smooth mean-zero x-basis used by the residual checks: sine modes pinned
/// at the box ends, deflated against the marginal weights.
fn sine_basis(ops: &DiscreteOperatorSet, count: usize) -> Vec<DVector<f64>> {
    let n = ops.n1();
    let r = ops.grid.x.half_width;
    (1..=count)
        .map(|k| {
            let mut g = DVector::from_fn(n, |i, _| {
                (k as f64 * std::f64::consts::PI * (ops.grid.x.nodes[i] + r) / (2.0 * r)).sin()
            });
            let mean = ops.grid.inner_x(g.as_slice(), &vec![1.0; n]);
            g.add_scalar_mut(-mean);
            g
        })
        .collect()
}

/// Check the four mixed bounds: the operator-norm bounds on `B` and `AB`
/// over the complement of the x-block, the cross term against `L`, and the
/// mixed inequality with the constant estimate `n_hat`.
pub fn verify_mixed_bounds(ops: &DiscreteOperatorSet, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("mixed_bounds", true);
    report.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    report.context("trials", format!("{trials}"));
    let mut worst: Option<(String, DMatrix<f64>)> = None;

    // Worst case over range(pi_2) by power iteration.
    let b_norm_sq = ops.operator_norm_sq(
        |f| {
            let p = ops.pi2(f);
            let bp = ops.apply_b(&p)?;
            Ok(ops.pi2(&ops.apply_b_dag(&bp)?))
        },
        seed,
        400,
    )?;
    let b_norm = b_norm_sq.sqrt();
    let ok1 = b_norm <= 0.5 + SLACK;
    report.push(Measurement::measured("b_norm_on_pi2", b_norm).with_tolerance(1e-12));

    let ab_norm_sq = ops.operator_norm_sq(
        |f| {
            let p = ops.pi2(f);
            let abp = ops.apply_a(&ops.apply_b(&p)?);
            Ok(-ops.pi2(&ops.apply_b_dag(&ops.apply_a(&abp))?))
        },
        seed + 1,
        400,
    )?;
    let ab_norm = ab_norm_sq.sqrt();
    let ok2 = ab_norm <= 1.0 + SLACK;
    report.push(Measurement::measured("ab_norm_on_pi2", ab_norm).with_tolerance(1e-12));

    // Random-vector margins for all four bounds.
    let mut margin_b = f64::INFINITY;
    let mut margin_ab = f64::INFINITY;
    let mut margin_cross = f64::INFINITY;
    let mut margin_mixed = f64::INFINITY;
    for t in 0..trials {
        let f = ops.random_state(seed + 2, t as u64);
        let p1 = ops.pi1(&f);
        let p2 = ops.pi2(&f);
        let (n1, n2) = (ops.norm(&p1), ops.norm(&p2));
        let bf = ops.apply_b(&f)?;
        margin_b = margin_b.min(0.5 * n2 - ops.norm(&bf));
        let abf = ops.apply_a(&bf);
        margin_ab = margin_ab.min(n2 - ops.norm(&abf));
        let lf = ops.apply_l(&f);
        let cross = ops.inner(&bf, &lf).abs();
        margin_cross = margin_cross.min(n2 * ops.norm(&f) - cross);
        let blf = ops.apply_b(&lf)?;
        let mixed_lhs = ops.inner(&blf, &f);
        let mixed_rhs = ops.n_hat * n1 * n2 - ops.g_defect_term(&f)?;
        margin_mixed = margin_mixed.min(mixed_rhs - mixed_lhs);
        if (mixed_rhs - mixed_lhs) < -SLACK && worst.is_none() {
            worst = Some(("mixed_inequality".into(), f.clone()));
        }
    }

    // B annihilates functions of x.
    let g = sine_basis(ops, 1).pop().unwrap();
    let fx = ops.deflate(&ops.embed(&g));
    let b_on_x = ops.norm(&ops.apply_b(&fx)?) / ops.norm(&fx);
    report.push(Measurement::measured("b_on_x_functions", b_on_x).with_tolerance(1e-12));

    let ok3 = margin_cross >= -SLACK;
    let ok4 = margin_mixed >= -SLACK;
    let ok_spot = margin_b >= -SLACK && margin_ab >= -SLACK;
    let ok5 = b_on_x <= 1e-12;
    report.push(Measurement::measured("worst_margin_b", margin_b).with_tolerance(1e-12));
    report.push(Measurement::measured("worst_margin_ab", margin_ab).with_tolerance(1e-12));
    report.push(Measurement::measured("worst_margin_cross", margin_cross).with_tolerance(1e-12));
    report.push(Measurement::measured("worst_margin_mixed", margin_mixed).with_tolerance(1e-12));
    report.push(Measurement::theory("n_hat", ops.n_hat));

    report.pass = ok1 && ok2 && ok3 && ok4 && ok_spot && ok5;
    if !report.pass {
        if let Some((label, f)) = worst {
            report.failure = Some(FailureArtifact {
                label,
                data: ops.flatten(&f).iter().cloned().collect(),
            });
        }
    }
    Ok(report)
}

/// Structural identities that must hold to near machine precision at every
/// resolution.
pub fn verify_structure(ops: &DiscreteOperatorSet, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("structural_identities", true);
    report.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    let mut s_sym: f64 = 0.0;
    let mut a_antisym: f64 = 0.0;
    let mut s_pi1: f64 = 0.0;
    let mut pi1_a_pi1: f64 = 0.0;
    let mut pi1_proj: f64 = 0.0;
    let mut pi1_b: f64 = 0.0;
    for t in 0..trials {
        let f = ops.random_state(seed, 2 * t as u64);
        let g = ops.random_state(seed, 2 * t as u64 + 1);
        s_sym = s_sym.max((ops.inner(&ops.apply_s(&f), &g) - ops.inner(&f, &ops.apply_s(&g))).abs());
        a_antisym =
            a_antisym.max((ops.inner(&ops.apply_a(&f), &g) + ops.inner(&f, &ops.apply_a(&g))).abs());
        s_pi1 = s_pi1.max(ops.norm(&ops.apply_s(&ops.pi1(&f))));
        pi1_a_pi1 = pi1_a_pi1.max(ops.norm(&ops.pi1(&ops.apply_a(&ops.pi1(&f)))));
        let p = ops.pi1(&f);
        pi1_proj = pi1_proj.max(ops.norm(&(ops.pi1(&p) - &p)));
        let bf = ops.apply_b(&f)?;
        pi1_b = pi1_b.max(ops.norm(&(ops.pi1(&bf) - &bf)));
    }
    report.push(Measurement::measured("s_symmetry_defect", s_sym).with_tolerance(1e-12));
    report.push(Measurement::measured("a_antisymmetry_defect", a_antisym).with_tolerance(1e-12));
    report.push(Measurement::measured("s_pi1_norm", s_pi1).with_tolerance(1e-12));
    report.push(Measurement::measured("pi1_a_pi1_norm", pi1_a_pi1).with_tolerance(1e-12));
    report.push(Measurement::measured("pi1_projection_defect", pi1_proj).with_tolerance(1e-12));
    report.push(Measurement::measured("pi1_b_defect", pi1_b).with_tolerance(1e-12));
    report.pass = s_sym <= 1e-12
        && a_antisym <= 1e-12
        && s_pi1 <= 1e-12
        && pi1_a_pi1 <= 1e-12
        && pi1_proj <= 1e-12
        && pi1_b <= 1e-12;
    Ok(report)
}

/// Residual of the radial commutation relation `S (A pi_1 f) = K (A pi_1 f)`
/// with `K = 2 H(y^2)`, over interior nodes (stencil-order convergent).
pub fn check_sa_relation(ops: &DiscreteOperatorSet, margin: usize) -> Result<CheckReport> {
    let basis = sine_basis(ops, 6);
    let mut max_residual = 0.0_f64;
    let mut k_dev = 0.0_f64;
    for g in &basis {
        let field = ops.a_bar(g);
        let lhs = ops.apply_s(&field);
        let mut num = 0.0;
        let mut den = 0.0;
        // Per-column least squares: the multiplier acts column-wise, so
        // K_hat(y_j) = <lhs_j, field_j> / <field_j, field_j> over interior
        // rows; this stays finite across nodal lines of the field.  Columns
        // are admitted by their measure-weighted energy, which keeps the
        // check on nodes where the invariant measure actually lives.
        let mut col_den_max = 0.0_f64;
        let mut col_stats = Vec::with_capacity(ops.n2());
        for j in margin..ops.n2() - margin {
            let mut cn = 0.0;
            let mut cd = 0.0;
            for i in margin..ops.n1() - margin {
                let w = ops.grid.x.w[i] * ops.grid.y.w[j];
                let resid = lhs[(i, j)] - ops.k_values[j] * field[(i, j)];
                num += w * resid * resid;
                den += w * field[(i, j)] * field[(i, j)];
                cn += ops.grid.x.w[i] * lhs[(i, j)] * field[(i, j)];
                cd += ops.grid.x.w[i] * field[(i, j)] * field[(i, j)];
            }
            col_stats.push((j, cn, cd * ops.grid.y.w[j], cd));
            col_den_max = col_den_max.max(cd * ops.grid.y.w[j]);
        }
        for (j, cn, weighted_cd, cd) in col_stats {
            if weighted_cd > 1e-3 * col_den_max {
                k_dev = k_dev.max((cn / cd - ops.k_values[j]).abs());
            }
        }
        if den > 0.0 {
            max_residual = max_residual.max((num / den).sqrt());
        }
    }
    let mut report = CheckReport::new("radial_commutation", true);
    report.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    report.context("interior_margin", format!("{margin}"));
    report.push(
        Measurement::measured("relative_residual", max_residual)
            .with_tolerance(1e-6)
            .refinement_sensitive(),
    );
    report.push(
        Measurement::measured("k_max_deviation", k_dev)
            .with_tolerance(1e-6)
            .refinement_sensitive(),
    );
    Ok(report)
}

/// Compare the averaged operator `G` against `-N(V2) T` for the
/// divergence-form 1-d operator `T`, over a smooth basis (a raw matrix
/// comparison would be dominated by grid-scale modes, where a composition
/// of first-derivative stencils and a divergence-form second derivative
/// legitimately differ), plus a least-squares fit of the scaling constant.
pub fn check_g_formula(ops: &DiscreteOperatorSet) -> Result<CheckReport> {
    let n1 = ops.n1();
    let q2 = ops.q * ops.q;

    // Relative Frobenius discrepancy of the stacked basis images.
    let basis = sine_basis(ops, 6);
    let mut num_f = 0.0;
    let mut den_f = 0.0;
    for g in &basis {
        let gg = &ops.g_x * g;
        let tg = ops.tx_matrix() * g * (-ops.n_v2 * q2);
        let diff = &gg - &tg;
        num_f += ops.grid.inner_x(diff.as_slice(), diff.as_slice());
        den_f += ops.grid.inner_x(gg.as_slice(), gg.as_slice());
    }
    let rel_frob = (num_f / den_f).sqrt();

    // Regress G g against T g over the smoothest modes.
    let mut num = 0.0;
    let mut den = 0.0;
    for g in &basis[..3] {
        let gg = &ops.g_x * g;
        let tg = ops.tx_matrix() * g * q2;
        num += ops.grid.inner_x(gg.as_slice(), tg.as_slice());
        den += ops.grid.inner_x(tg.as_slice(), tg.as_slice());
    }
    let fitted = num / den;
    let fitted_ratio = -fitted / ops.n_v2;

    let mut report = CheckReport::new("averaged_operator_formula", true);
    report.context("resolution", format!("{n1}x{}", ops.n2()));
    report.push(
        Measurement::measured("relative_frobenius", rel_frob)
            .with_tolerance(1e-6)
            .refinement_sensitive(),
    );
    report.push(Measurement::theory("n_v2", ops.n_v2));
    report.push(
        Measurement::measured("fitted_constant_ratio", fitted_ratio)
            .with_tolerance(1e-6)
            .refinement_sensitive(),
    );
    Ok(report)
}

/// Discrete weak-Poincaré data for one marginal component.
#[derive(Debug, Clone)]
pub struct DiscreteWpi {
    /// Spectral gap of the weighted 1-d operator on the mean-zero subspace.
    pub gap: f64,
    /// Exact constant rate function `max(1, 1/gap)`.
    pub alpha: RateFunction,
    /// Sampled finite-r structure: for each r, the sup over a tanh cutoff
    /// family of `(Var f - r osc(f)^2) / E(f, f)`.
    pub curve: Vec<(f64, f64)>,
}

/// Spectral-gap rate function for component 1 (the averaged x-operator
/// `G_X`) or component 2 (the y-generator `-S_y`).
pub fn discrete_wpi(ops: &DiscreteOperatorSet, component: usize) -> Result<DiscreteWpi> {
    let (vals, grid_nodes, weights): (Vec<f64>, &[f64], &[f64]) = match component {
        1 => {
            let m = deflated_gx(ops);
            (
                weighted_sym_eigenvalues(&m, &ops.grid.x.w)?,
                &ops.grid.x.nodes,
                &ops.grid.x.w,
            )
        }
        2 => {
            let m = -ops.sy_matrix();
            (
                weighted_sym_eigenvalues(&m, &ops.grid.y.w)?,
                &ops.grid.y.nodes,
                &ops.grid.y.w,
            )
        }
        _ => return Err(Error::InvalidParameter("component must be 1 or 2".into())),
    };
    if vals[0].abs() > 1e-8 * vals[1].abs().max(1e-12) {
        return Err(Error::EigenFailed(format!(
            "kernel eigenvalue {:.3e} not separated from the gap {:.3e}",
            vals[0], vals[1]
        )));
    }
    let gap = vals[1];
    let alpha = RateFunction::Constant { c: (1.0 / gap).max(1.0) };

    // Finite-r structure from a tanh cutoff family.
    let energy = |f: &DVector<f64>| -> f64 {
        match component {
            1 => {
                let g = &ops.g_x * f;
                ops.grid.inner_x(g.as_slice(), f.as_slice())
            }
            _ => {
                let g = -(ops.sy_matrix() * f);
                f.iter().zip(g.iter()).zip(weights).map(|((a, b), w)| w * a * b).sum()
            }
        }
    };
    let n = grid_nodes.len();
    let mut family: Vec<DVector<f64>> = Vec::new();
    for ci in 1..10 {
        let c = grid_nodes[ci * n / 10];
        for width in [0.25, 0.5, 1.0, 2.0] {
            let mut f = DVector::from_fn(n, |i, _| ((grid_nodes[i] - c) / width).tanh());
            let mean: f64 = f.iter().zip(weights).map(|(v, w)| v * w).sum();
            f.add_scalar_mut(-mean);
            family.push(f);
        }
    }
    let mut curve = Vec::new();
    for k in 0..16 {
        let r = 1e-6 * 10.0_f64.powf(k as f64 * 0.4);
        let mut best = f64::NEG_INFINITY;
        for f in &family {
            let var: f64 = f.iter().zip(weights).map(|(v, w)| w * v * v).sum();
            let osc = f.max() - f.min();
            let e = energy(f);
            if e > 1e-14 {
                best = best.max((var - r * osc * osc) / e);
            }
        }
        curve.push((r, best));
    }
    Ok(DiscreteWpi { gap, alpha, curve })
}

fn deflated_gx(ops: &DiscreteOperatorSet) -> DMatrix<f64> {
    let n = ops.n1();
    let mut p = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] -= ops.grid.x.w[j];
        }
    }
    &p * &ops.g_x * &p
}

/// Norm-equivalence constant between `||A pi_1 f||^2` and the weighted
/// Dirichlet energy of the x-derivative: the ratio is `q^2 mu_2(|V2'|^2)`
/// up to stencil error, uniformly over the smooth basis.
pub fn check_m_constant(ops: &DiscreteOperatorSet) -> Result<CheckReport> {
    let basis = sine_basis(ops, 6);
    let expect = ops.q * ops.q * ops.n_v2;
    let mut worst = 0.0_f64;
    let dx = ops.grid.x.h;
    for g in &basis {
        let field = ops.a_bar(g);
        let num = ops.inner(&field, &field);
        // Centered derivative of g against the marginal weights.
        let n = g.len();
        let mut den = 0.0;
        for i in 0..n {
            let d = if i == 0 {
                (g[1] - g[0]) / dx
            } else if i == n - 1 {
                (g[n - 1] - g[n - 2]) / dx
            } else {
                (g[i + 1] - g[i - 1]) / (2.0 * dx)
            };
            den += ops.grid.x.w[i] * d * d;
        }
        worst = worst.max((num / den / expect - 1.0).abs());
    }
    let mut report = CheckReport::new("norm_equivalence_constant", true);
    report.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    report.push(
        Measurement::measured("max_ratio_deviation", worst)
            .with_tolerance(1e-6)
            .refinement_sensitive(),
    );
    report.push(Measurement::theory("expected_constant", expect));
    report.pass = worst <= 0.02;
    Ok(report)
}

/// Subordination inequality for `phi(s) = s/(1+s)`:
/// `||f||^2 <= (1 + alpha(r)) <(1+G)^{-1} G f, f> + r osc(f)^2` on the
/// x-block, with `alpha` a valid rate for the quadratic form of `G`.
pub fn subordination_check(
    ops: &DiscreteOperatorSet,
    alpha: &RateFunction,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let n = ops.n1();
    let phi_term = |f: &DVector<f64>| -> Result<f64> {
        let z = ops.solve_ig(&(&ops.g_x * f))?;
        Ok(ops.grid.inner_x(z.as_slice(), f.as_slice()))
    };
    let mut report = CheckReport::new("subordination", true);
    report.context("resolution", format!("{}x{}", ops.n1(), ops.n2()));
    report.context("trials", format!("{trials}"));
    let mut worst_margin = f64::INFINITY;
    let mut failure: Option<FailureArtifact> = None;
    for trial in 0..trials {
        let mut rng = crate::rng::substream(seed, trial as u64);
        use rand::Rng;
        let mut f = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let mean: f64 = f.iter().zip(&ops.grid.x.w).map(|(v, w)| v * w).sum();
        f.add_scalar_mut(-mean);
        let norm2 = ops.grid.inner_x(f.as_slice(), f.as_slice());
        if norm2 < 1e-20 {
            continue;
        }
        let osc = f.max() - f.min();
        let phi = phi_term(&f)?;
        let mut rs: Vec<f64> = (0..12).map(|k| 1e-8 * 10.0_f64.powf(k as f64 * 0.73)).collect();
        rs.push(norm2 / (osc * osc) * 1.000_001);
        for r in rs {
            let rhs = (1.0 + alpha.eval(r)) * phi + r * osc * osc;
            let margin = rhs - norm2;
            worst_margin = worst_margin.min(margin);
            if margin < -SLACK && failure.is_none() {
                report.pass = false;
                let mut data: Vec<f64> = f.iter().cloned().collect();
                data.push(r);
                failure = Some(FailureArtifact { label: "subordination_violation".into(), data });
            }
        }
    }

    // Gap eigenvector: equality in the r -> 0 limit.
    let m = deflated_gx(ops);
    let (vals, vecs) = weighted_sym_eigen(&m, &ops.grid.x.w)?;
    let gap = vals[1];
    let v = DVector::from_column_slice(vecs.column(1).as_slice());
    let vnorm2 = ops.grid.inner_x(v.as_slice(), v.as_slice());
    let phi_v = phi_term(&v)?;
    let alpha_gap = (1.0 / gap).max(1.0);
    let eq_residual = ((1.0 + alpha_gap) * phi_v - vnorm2).abs() / vnorm2;
    report.push(Measurement::measured("worst_margin", worst_margin).with_tolerance(1e-12));
    report.push(
        Measurement::measured("gap_vector_equality_residual", eq_residual).with_tolerance(1e-3),
    );
    report.push(Measurement::theory("gap", gap));
    if worst_margin < -SLACK {
        report.pass = false;
    }
    report.failure = failure;
    Ok(report)
}
