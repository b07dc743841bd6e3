//! Compare the closed analytic moment system against the full stationary
//! solve along a pump sweep, reproducing the agreement the analytic theory
//! claims in the few-photon regime.
//!
//! Run with: cargo run --example moments_vs_numeric

use sel_lab::liouvillian::{observables, steady_state_symmetric_adaptive, LaserParams, TAIL_TOL};
use sel_lab::moments::solve_moments;

fn main() {
    let eta = 0.5;
    println!("tau = omega, eta = {eta}");
    println!(
        "{:>6} {:>14} {:>14} {:>12} {:>12} {:>12}",
        "omega", "<n> analytic", "<n> numeric", "rel err", "Q analytic", "Q numeric"
    );
    for j in 1..=15 {
        let omega = 0.1 * j as f64;
        let analytic = solve_moments(omega, eta, omega).expect("moment system");
        let params = LaserParams::from_dimensionless(omega, eta, omega).unwrap();
        let (rho, trunc) = steady_state_symmetric_adaptive(&params, 16, TAIL_TOL).unwrap();
        let numeric = observables(&rho, trunc);
        println!(
            "{omega:>6.2} {:>14.8} {:>14.8} {:>12.2e} {:>12.6} {:>12.6}",
            analytic.mean_n,
            numeric.mean_n,
            (analytic.mean_n - numeric.mean_n).abs() / numeric.mean_n,
            analytic.mandel_q.unwrap_or(f64::NAN),
            numeric.mandel_q.unwrap_or(f64::NAN),
        );
    }
}
