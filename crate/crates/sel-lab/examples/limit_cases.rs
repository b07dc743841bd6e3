//! The two pump-to-zero limit solutions and their reference constants, plus
//! the convergence of the full fifth-order equation to the strong-coupling
//! limit as the rates are scaled down together.
//!
//! Run with: cargo run --example limit_cases

use sel_lab::quasiprob::{
    limit_ode_residual, limit_solutions, ode5_coefficients, ode5_residual, q2_normalization,
};

fn main() {
    let (q1, q2) = limit_solutions();

    println!("vacuum limit:          Q1(0) = {}, <n> = {}", q1.eval(0.0), q1.moment(1) - 1.0);
    println!("strong-coupling limit: Q2(0) = {:.10}", q2.eval(0.0));
    println!("  normalization 1 + sqrt(2 e pi) erf(1/sqrt2) = {:.12}", q2_normalization());
    println!("  <n>  = {:.10}  (reference 0.630843)", q2.moment(1) - 1.0);
    println!(
        "  <n2> - 3<n> - 2 = {:.10}  (reference 1)",
        q2.moment(2) - 3.0 * (q2.moment(1) - 1.0) - 2.0
    );

    println!(
        "limit equations: case 1 residual {:.1e}, case 2 residual {:.1e}",
        limit_ode_residual(1, &q1).max_abs,
        limit_ode_residual(2, &q2).max_abs
    );

    println!("\nfifth-order equation at omega = tau = eps, eta = 0, applied to Q2:");
    for eps in [1e-2, 1e-3, 1e-4] {
        let coeffs = ode5_coefficients(eps, 0.0, eps);
        let rep = ode5_residual(q2.series(), &coeffs).unwrap();
        println!("  eps = {eps:>6}: normalized residual {:.3e}", rep.normalized);
    }
}
