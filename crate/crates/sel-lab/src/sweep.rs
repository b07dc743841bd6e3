//! Parameter sweeps over the pump strength, CSV emission, and gnuplot script
//! generation — the machinery behind `sel-lab sweep` and `sel-lab qfunc`.
//!
//! Output is deterministic: rows appear in grid order regardless of how the
//! worker pool schedules them, and floats are printed with 17 significant
//! digits so that identical configs produce byte-identical files.

use rayon::prelude::*;
use thiserror::Error;

use crate::liouvillian::{
    observables, steady_state_symmetric_adaptive, LaserParams, LiouvillianError,
};
use crate::moments::{solve_moments, MomentsError};
use crate::numerics::QuadratureSpec;
use crate::quasiprob::{
    husimi_radial, limit_solutions, p_to_q_transform, relation_eq3_residual, C0Mode,
    QuasiProbError,
};

/// CSV schema version stamped into every emitted file.
pub const CSV_SCHEMA: &str = "# schema: v1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("unknown key `{key}` in section [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: &'static str, reason: String },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] LiouvillianError),
    #[error(transparent)]
    QuasiProb(#[from] QuasiProbError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Rule fixing τ from each grid ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    /// τ = ω
    Equal,
    /// τ = 2ω
    Double,
    Fixed(f64),
}

impl TauRule {
    pub fn tau(&self, omega: f64) -> f64 {
        match *self {
            TauRule::Equal => omega,
            TauRule::Double => 2.0 * omega,
            TauRule::Fixed(v) => v,
        }
    }
}

/// Optional column groups of the sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputColumn {
    MeanN,
    MandelQ,
    SigmaZ,
    Residuals,
}

/// A fully validated sweep configuration.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub omega_grid: Vec<f64>,
    pub tau_rule: TauRule,
    pub eta: f64,
    pub n_max_initial: usize,
    pub tail_tol: f64,
    pub outputs: Vec<OutputColumn>,
    pub plot: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            omega_grid: Vec::new(),
            tau_rule: TauRule::Equal,
            eta: 0.0,
            n_max_initial: 16,
            tail_tol: crate::liouvillian::TAIL_TOL,
            outputs: vec![
                OutputColumn::MeanN,
                OutputColumn::MandelQ,
                OutputColumn::Residuals,
            ],
            plot: false,
        }
    }
}

/// A numeric CSV cell that may instead carry a sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    /// The quantity has no definition at this point (e.g. Mandel Q at ⟨n⟩ = 0).
    Undefined,
    /// The solver or the analytic system failed at this point.
    OutOfRegime,
}

impl Cell {
    pub fn from_option(v: Option<f64>) -> Cell {
        match v {
            Some(x) if x.is_finite() => Cell::Value(x),
            Some(_) => Cell::OutOfRegime,
            None => Cell::Undefined,
        }
    }

    pub fn render(&self) -> String {
        match *self {
            Cell::Value(v) => format!("{v:.16e}"),
            Cell::Undefined => "undefined".to_string(),
            Cell::OutOfRegime => "out-of-regime".to_string(),
        }
    }
}

/// One row of the sweep output.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub omega: f64,
    pub eta: f64,
    pub tau: f64,
    pub mean_n_analytic: Cell,
    pub mean_n_numeric: Cell,
    pub mandel_q_analytic: Cell,
    pub mandel_q_numeric: Cell,
    pub sigma_z_numeric: Cell,
    pub delta_det: Cell,
    pub truncation_used: Option<usize>,
    pub eq3_residual: Cell,
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

/// Parse the flat `key = value` config with `[section]` headers. Unknown
/// sections or keys are hard errors; there are no defaults for `[params]`.
pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let mut spec = SweepSpec::default();
    let mut section = String::new();
    let mut saw_grid = false;
    let mut saw_eta = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if !matches!(section.as_str(), "params" | "solver" | "output") {
                return Err(ConfigError::UnknownSection(section));
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::Malformed(lineno + 1, format!("expected `key = value`, got `{line}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match (section.as_str(), key) {
            ("params", "omega_grid") => {
                spec.omega_grid = parse_value_grid(value, "omega_grid")?;
                saw_grid = true;
            }
            ("params", "tau_rule") => {
                spec.tau_rule = match value {
                    "equal" => TauRule::Equal,
                    "double" => TauRule::Double,
                    other => match other.strip_prefix("fixed:") {
                        Some(v) => TauRule::Fixed(parse_f64(v, "tau_rule")?),
                        None => {
                            return Err(ConfigError::InvalidValue {
                                key: "tau_rule",
                                reason: format!(
                                    "`{other}` is not one of equal, double, fixed:<value>"
                                ),
                            })
                        }
                    },
                };
            }
            ("params", "eta") => {
                spec.eta = parse_f64(value, "eta")?;
                saw_eta = true;
            }
            ("solver", "n_max_initial") => {
                spec.n_max_initial = value.parse().map_err(|_| ConfigError::InvalidValue {
                    key: "n_max_initial",
                    reason: format!("`{value}` is not a positive integer"),
                })?;
            }
            ("solver", "tail_tol") => {
                spec.tail_tol = parse_f64(value, "tail_tol")?;
            }
            ("output", "columns") => {
                spec.outputs = value
                    .split(',')
                    .map(|c| match c.trim() {
                        "mean_n" => Ok(OutputColumn::MeanN),
                        "mandel_q" => Ok(OutputColumn::MandelQ),
                        "sigma_z" => Ok(OutputColumn::SigmaZ),
                        "residuals" => Ok(OutputColumn::Residuals),
                        other => Err(ConfigError::InvalidValue {
                            key: "columns",
                            reason: format!("unknown column group `{other}`"),
                        }),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
            }
            ("output", "plot") => {
                spec.plot = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            key: "plot",
                            reason: format!("`{other}` is not true/false"),
                        })
                    }
                };
            }
            (sec, k) => {
                return Err(ConfigError::UnknownKey {
                    section: sec.to_string(),
                    key: k.to_string(),
                })
            }
        }
    }
    if !saw_grid {
        return Err(ConfigError::MissingKey("omega_grid"));
    }
    if !saw_eta {
        return Err(ConfigError::MissingKey("eta"));
    }
    validate_spec(&spec)?;
    Ok(spec)
}

fn validate_spec(spec: &SweepSpec) -> Result<(), ConfigError> {
    if spec.omega_grid.is_empty() {
        return Err(ConfigError::InvalidValue {
            key: "omega_grid",
            reason: "empty grid".into(),
        });
    }
    for w in &spec.omega_grid {
        if !w.is_finite() || *w < 0.0 {
            return Err(ConfigError::InvalidValue {
                key: "omega_grid",
                reason: format!("grid value {w} is negative or non-finite"),
            });
        }
    }
    if spec.omega_grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(ConfigError::InvalidValue {
            key: "omega_grid",
            reason: "grid must be strictly increasing".into(),
        });
    }
    if !spec.eta.is_finite() || spec.eta < 0.0 {
        return Err(ConfigError::InvalidValue {
            key: "eta",
            reason: format!("{} must be a finite value >= 0", spec.eta),
        });
    }
    if let TauRule::Fixed(v) = spec.tau_rule {
        if !v.is_finite() || v < 0.0 {
            return Err(ConfigError::InvalidValue {
                key: "tau_rule",
                reason: format!("fixed value {v} must be >= 0"),
            });
        }
    }
    if spec.n_max_initial < 2 {
        return Err(ConfigError::InvalidValue {
            key: "n_max_initial",
            reason: "must be at least 2".into(),
        });
    }
    if !(spec.tail_tol > 0.0) {
        return Err(ConfigError::InvalidValue {
            key: "tail_tol",
            reason: "must be positive".into(),
        });
    }
    Ok(())
}

fn parse_f64(s: &str, key: &'static str) -> Result<f64, ConfigError> {
    s.trim().parse().map_err(|_| ConfigError::InvalidValue {
        key,
        reason: format!("`{s}` is not a number"),
    })
}

/// Accept either a comma-separated list or a `start:step:end` range.
pub fn parse_value_grid(value: &str, key: &'static str) -> Result<Vec<f64>, ConfigError> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError::InvalidValue {
                key,
                reason: format!("range `{value}` must be start:step:end"),
            });
        }
        let start = parse_f64(parts[0], key)?;
        let step = parse_f64(parts[1], key)?;
        let end = parse_f64(parts[2], key)?;
        if !(step > 0.0) || end < start {
            return Err(ConfigError::InvalidValue {
                key,
                reason: format!("range `{value}` is empty or has non-positive step"),
            });
        }
        let count = ((end - start) / step + 0.5).floor() as usize + 1;
        Ok((0..count).map(|j| start + step * j as f64).collect())
    } else {
        value
            .split(',')
            .map(|v| parse_f64(v, key))
            .collect::<Result<Vec<_>, _>>()
    }
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

/// Compute a single sweep point. Never panics on solver failure; failed
/// quantities come back as [`Cell::OutOfRegime`].
pub fn sweep_point(spec: &SweepSpec, omega: f64) -> SweepRow {
    let eta = spec.eta;
    let tau = spec.tau_rule.tau(omega);

    // analytic moment system; at ω = 0 the pump is off and all photon
    // moments vanish without solving (the coefficient table divides by τ)
    let (mn_a, mq_a, det) = if omega == 0.0 {
        (Cell::Value(0.0), Cell::Undefined, Cell::Undefined)
    } else {
        match solve_moments(omega, eta, tau) {
            Ok(sol) if !sol.out_of_regime => (
                Cell::Value(sol.mean_n),
                Cell::from_option(sol.mandel_q),
                Cell::Value(sol.det_delta),
            ),
            Ok(sol) => (Cell::OutOfRegime, Cell::OutOfRegime, Cell::Value(sol.det_delta)),
            Err(MomentsError::DegenerateParams { .. })
            | Err(MomentsError::NearSingularSystem { .. }) => {
                (Cell::OutOfRegime, Cell::OutOfRegime, Cell::OutOfRegime)
            }
        }
    };

    let params = LaserParams::from_dimensionless(omega, eta, tau);
    let numeric = params
        .ok_or(())
        .and_then(|p| {
            steady_state_symmetric_adaptive(&p, spec.n_max_initial, spec.tail_tol)
                .map(|st| (p, st))
                .map_err(|_| ())
        })
        .ok();
    let (mn_n, mq_n, sz_n, trunc_used, eq3) = match numeric {
        Some((p, (rho, trunc))) => {
            let obs = observables(&rho, trunc);
            let eq3 = husimi_radial(&rho, trunc)
                .and_then(|set| relation_eq3_residual(&set, &p))
                .map(|r| Cell::Value(r.max_abs))
                .unwrap_or(Cell::OutOfRegime);
            (
                Cell::Value(obs.mean_n),
                Cell::from_option(obs.mandel_q),
                Cell::Value(obs.sigma_z_mean),
                Some(trunc.n_max()),
                eq3,
            )
        }
        None => (
            Cell::OutOfRegime,
            Cell::OutOfRegime,
            Cell::OutOfRegime,
            None,
            Cell::OutOfRegime,
        ),
    };

    SweepRow {
        omega,
        eta,
        tau,
        mean_n_analytic: mn_a,
        mean_n_numeric: mn_n,
        mandel_q_analytic: mq_a,
        mandel_q_numeric: mq_n,
        sigma_z_numeric: sz_n,
        delta_det: det,
        truncation_used: trunc_used,
        eq3_residual: eq3,
    }
}

/// Run the sweep in parallel with ordered collection.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    spec.omega_grid
        .par_iter()
        .map(|&w| sweep_point(spec, w))
        .collect()
}

/// CSV column names for the selected output groups, in schema order.
pub fn csv_header(outputs: &[OutputColumn]) -> Vec<&'static str> {
    let mut cols = vec!["omega", "eta", "tau"];
    if outputs.contains(&OutputColumn::MeanN) {
        cols.extend(["mean_n_analytic", "mean_n_numeric"]);
    }
    if outputs.contains(&OutputColumn::MandelQ) {
        cols.extend(["mandel_q_analytic", "mandel_q_numeric"]);
    }
    cols.extend(["delta_det", "truncation_used"]);
    if outputs.contains(&OutputColumn::Residuals) {
        cols.push("eq3_residual");
    }
    if outputs.contains(&OutputColumn::SigmaZ) {
        cols.push("sigma_z_numeric");
    }
    cols
}

/// Render rows to the versioned CSV format (LF line endings, 17 significant
/// digits, sentinel strings for undefined cells).
pub fn render_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let header = csv_header(&spec.outputs);
    let mut out = String::new();
    out.push_str(CSV_SCHEMA);
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut cells = vec![
            Cell::Value(row.omega).render(),
            Cell::Value(row.eta).render(),
            Cell::Value(row.tau).render(),
        ];
        if spec.outputs.contains(&OutputColumn::MeanN) {
            cells.push(row.mean_n_analytic.render());
            cells.push(row.mean_n_numeric.render());
        }
        if spec.outputs.contains(&OutputColumn::MandelQ) {
            cells.push(row.mandel_q_analytic.render());
            cells.push(row.mandel_q_numeric.render());
        }
        cells.push(row.delta_det.render());
        cells.push(
            row.truncation_used
                .map(|n| n.to_string())
                .unwrap_or_else(|| "out-of-regime".to_string()),
        );
        if spec.outputs.contains(&OutputColumn::Residuals) {
            cells.push(row.eq3_residual.render());
        }
        if spec.outputs.contains(&OutputColumn::SigmaZ) {
            cells.push(row.sigma_z_numeric.render());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Emit a gnuplot script plotting the analytic and numeric curves of the
/// sweep CSV at `csv_path`.
pub fn render_plot_script(spec: &SweepSpec, csv_path: &str) -> String {
    let header = csv_header(&spec.outputs);
    let col = |name: &str| header.iter().position(|&h| h == name).map(|i| i + 1);
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile missing 'undefined'\n");
    s.push_str("set key left top\nset xlabel 'omega'\n");
    if let (Some(a), Some(n)) = (col("mean_n_analytic"), col("mean_n_numeric")) {
        s.push_str("set terminal pngcairo size 900,600\nset output 'mean_n.png'\n");
        s.push_str(&format!(
            "plot '{csv_path}' skip 2 using 1:{a} with lines title 'mean n (analytic)', \\\n     '{csv_path}' skip 2 using 1:{n} with points title 'mean n (numeric)'\n",
        ));
    }
    if let (Some(a), Some(n)) = (col("mandel_q_analytic"), col("mandel_q_numeric")) {
        s.push_str("set output 'mandel_q.png'\n");
        s.push_str(&format!(
            "plot '{csv_path}' skip 2 using 1:{a} with lines title 'Mandel Q (analytic)', \\\n     '{csv_path}' skip 2 using 1:{n} with points title 'Mandel Q (numeric)'\n",
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// Radial function report
// ---------------------------------------------------------------------------

/// What `qfunc_report` tabulates.
#[derive(Debug, Clone, Copy)]
pub enum QfuncSource {
    Params { omega: f64, eta: f64, tau: f64 },
    /// 1 = vacuum limit, 2 = strong-coupling limit.
    Limit(u8),
}

/// Tabulate Q(I), D(I), ρΣ(I) (or a limit solution with its reconstruction)
/// on the given grid, as versioned CSV.
pub fn qfunc_report(
    source: &QfuncSource,
    grid: &[f64],
    n_max_initial: usize,
) -> Result<String, SweepError> {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA);
    out.push('\n');
    match *source {
        QfuncSource::Params { omega, eta, tau } => {
            let params = LaserParams::from_dimensionless(omega, eta, tau).ok_or_else(|| {
                ConfigError::InvalidValue {
                    key: "params",
                    reason: "omega, eta, tau must be finite and >= 0".into(),
                }
            })?;
            let (rho, trunc) =
                steady_state_symmetric_adaptive(&params, n_max_initial, crate::liouvillian::TAIL_TOL)?;
            let set = husimi_radial(&rho, trunc)?;
            let eq3 = relation_eq3_residual(&set, &params)?;
            out.push_str("i,q,d,rho_sigma,eq3_residual\n");
            for &i in grid {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    i,
                    set.q.eval(i),
                    set.d.eval(i),
                    set.rho_sigma.eval(i),
                    eq3.residual.eval(i).abs(),
                ));
            }
        }
        QfuncSource::Limit(case @ (1 | 2)) => {
            let (q1, q2) = limit_solutions();
            let f = if case == 1 { &q1 } else { &q2 };
            let recon = if case == 2 {
                let spec = QuadratureSpec::default();
                Some(p_to_q_transform(C0Mode::Normalize, grid, &spec)?.0)
            } else {
                None
            };
            if recon.is_some() {
                out.push_str("i,q_closed_form,ode_residual,q_reconstructed,recon_abs_diff\n");
            } else {
                out.push_str("i,q_closed_form,ode_residual\n");
            }
            for (j, &i) in grid.iter().enumerate() {
                let q = f.eval(i);
                let (d1, d2) = (f.deriv1(i), f.deriv2(i));
                let resid = if case == 1 {
                    d1 + q
                } else {
                    2.0 * i * (1.0 - i) * d2
                        + (3.0 + 3.0 * i - 4.0 * i * i) * d1
                        + (1.0 + 2.0 * i - 2.0 * i * i) * q
                };
                match &recon {
                    Some(r) => out.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        i,
                        q,
                        resid.abs(),
                        r[j],
                        (r[j] - q).abs(),
                    )),
                    None => out.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e}\n",
                        i,
                        q,
                        resid.abs()
                    )),
                }
            }
        }
        QfuncSource::Limit(other) => {
            return Err(ConfigError::InvalidValue {
                key: "limit",
                reason: format!("limit case {other} (must be 1 or 2)"),
            }
            .into())
        }
    }
    Ok(out)
}
