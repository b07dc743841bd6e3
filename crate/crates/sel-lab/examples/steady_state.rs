//! Solve the stationary density matrix at one parameter point and print the
//! basic observables and the photon number distribution.
//!
//! Run with: cargo run --example steady_state

use sel_lab::liouvillian::{observables, steady_state_symmetric_adaptive, LaserParams, TAIL_TOL};

fn main() {
    let (omega, eta, tau) = (0.3, 0.5, 0.3);
    let params = LaserParams::from_dimensionless(omega, eta, tau).expect("valid rates");
    let (rho, trunc) =
        steady_state_symmetric_adaptive(&params, 16, TAIL_TOL).expect("stationary solve");
    let obs = observables(&rho, trunc);

    println!("omega = {omega}, eta = {eta}, tau = {tau} (n_max = {})", trunc.n_max());
    println!("mean photon number  <n>  = {:.12}", obs.mean_n);
    println!("second moment       <n2> = {:.12}", obs.mean_n2);
    match obs.mandel_q {
        Some(q) => println!("Mandel Q                 = {q:.12}"),
        None => println!("Mandel Q                 = undefined (no photons)"),
    }
    println!("inversion           <sz> = {:.12}", obs.sigma_z_mean);
    println!();
    println!("photon distribution:");
    for (n, p) in obs.photon_dist.iter().enumerate().take(10) {
        println!("  p_{n} = {p:.3e}  {}", "#".repeat((p * 120.0) as usize));
    }
}
