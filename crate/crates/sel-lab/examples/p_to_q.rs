//! Reconstruct the strong-coupling Q-function from its singular P-function
//! through the Hadamard finite-part transform, and compare against the closed
//! form.
//!
//! The P-function here is supported on I' ∈ [0, 1/2] with a (1-2I')^(-3/2)
//! endpoint singularity; the smoothing kernel of the antinormal ordering
//! turns it back into the perfectly regular Q₂.
//!
//! Run with: cargo run --example p_to_q

use sel_lab::numerics::QuadratureSpec;
use sel_lab::quasiprob::{limit_solutions, p_to_q_transform, C0Mode};

fn main() {
    let grid: Vec<f64> = (0..=16).map(|j| 0.25 * j as f64).collect();
    let spec = QuadratureSpec::default();
    let (values, c0) =
        p_to_q_transform(C0Mode::Normalize, &grid, &spec).expect("finite-part transform");
    let (_, q2) = limit_solutions();

    println!("normalization constant C0 = {c0:.12}");
    println!("{:>6} {:>16} {:>16} {:>10}", "I", "reconstructed", "closed form", "|diff|");
    for (v, &i) in values.iter().zip(&grid) {
        let exact = q2.eval(i);
        println!("{i:>6.2} {v:>16.10} {exact:>16.10} {:>10.2e}", (v - exact).abs());
    }
}
