//! Print the discrete lab constants (boxes, gaps, constant estimates,
//! residuals) for the standard potential battery at two resolutions.
//!
//! Run with `cargo run --release --example lab_constants`.

use hypolab::oplab::{self, DiscreteOperatorSet};
use hypolab::potential::Potential;
use hypolab::sde::SdeSystem;

fn main() {
    let systems = vec![
        ("quadratic/gaussian", SdeSystem::scalar(1.0, Potential::gaussian(1), Potential::gaussian(1)).unwrap()),
        (
            "power(1,1)/gaussian",
            SdeSystem::scalar(1.0, Potential::power(1, 1.0, 1.0).unwrap(), Potential::gaussian(1)).unwrap(),
        ),
        (
            "log_power(4)/gaussian",
            SdeSystem::scalar(1.0, Potential::log_power(1, 4.0).unwrap(), Potential::gaussian(1)).unwrap(),
        ),
    ];
    for (name, sys) in &systems {
        for n in [64usize, 128] {
            let t0 = std::time::Instant::now();
            let ops = DiscreteOperatorSet::build(sys, n, None).unwrap();
            let build_t = t0.elapsed().as_secs_f64();
            let wpi1 = oplab::discrete_wpi(&ops, 1).unwrap();
            let wpi2 = oplab::discrete_wpi(&ops, 2).unwrap();
            let sa = oplab::check_sa_relation(&ops, 2).unwrap();
            let gf = oplab::check_g_formula(&ops).unwrap();
            let mc = oplab::check_m_constant(&ops).unwrap();
            let bounds = oplab::verify_mixed_bounds(&ops, 100, 7).unwrap();
            println!(
                "{name} n={n} (build {build_t:.2}s): box=({:.2},{:.2}) n_hat={:.4} (k {:.4}, ba {:.4}) n_v2={:.6}",
                ops.grid.x.half_width, ops.grid.y.half_width, ops.n_hat, ops.n_hat_k_route, ops.n_hat_ba_route, ops.n_v2
            );
            println!(
                "  gaps: x {:.6}, y {:.6} | sa_resid {:.4e} k_dev {:.4e} | g_frob {:.4e} fit_ratio {:.6} | m_dev {:.4e}",
                wpi1.gap,
                wpi2.gap,
                sa.get("relative_residual").unwrap().value,
                sa.get("k_max_deviation").unwrap().value,
                gf.get("relative_frobenius").unwrap().value,
                gf.get("fitted_constant_ratio").unwrap().value,
                mc.get("max_ratio_deviation").unwrap().value,
            );
            println!(
                "  bounds: b_norm {:.12} ab_norm {:.12} margins b {:.2e} ab {:.2e} cross {:.2e} mixed {:.2e} pass={}",
                bounds.get("b_norm_on_pi2").unwrap().value,
                bounds.get("ab_norm_on_pi2").unwrap().value,
                bounds.get("worst_margin_b").unwrap().value,
                bounds.get("worst_margin_ab").unwrap().value,
                bounds.get("worst_margin_cross").unwrap().value,
                bounds.get("worst_margin_mixed").unwrap().value,
                bounds.pass
            );
            if n == 64 {
                let (a1, a2) = (1.0_f64.max(1.0 / wpi1.gap), 1.0_f64.max(1.0 / wpi2.gap));
                let (eps, kappa) = oplab::decay_constants(ops.n_hat, a1, a2);
                println!("  decay: alpha1 {a1:.4} alpha2 {a2:.4} eps {eps:.6} kappa {kappa:.6e} horizon {:.1}", 20.0 / kappa);
            }
        }
    }
}
