//! Run a parameter sweep from an inline config and print the resulting CSV
//! (the same machinery behind `sel-lab sweep`), plus the gnuplot script that
//! `--plot` would write next to it.
//!
//! Run with: cargo run --example sweep_csv

use sel_lab::sweep::{parse_config, render_csv, render_plot_script, run_sweep};

const CONFIG: &str = "\
[params]
omega_grid = 0.1:0.1:1.0
tau_rule = double
eta = 0.1

[solver]
n_max_initial = 16
tail_tol = 1e-10

[output]
columns = mean_n, mandel_q, residuals
plot = true
";

fn main() {
    let spec = parse_config(CONFIG).expect("valid config");
    let rows = run_sweep(&spec);
    print!("{}", render_csv(&spec, &rows));
    eprintln!("--- gnuplot script (written by `sel-lab sweep --plot`) ---");
    eprint!("{}", render_plot_script(&spec, "sweep.csv"));
}
