//! Single-emitter laser toolkit.
//!
//! A two-level emitter incoherently pumped at rate Γ/2 couples with strength
//! g to a single damped cavity mode (loss κ/2, spontaneous emission γ/2). In
//! the few-photon regime this crate provides, all against each other:
//!
//! - the exact Lindblad steady state on a truncated Fock space
//!   ([`liouvillian`]), with a phase-symmetric sector reduction that makes
//!   parameter sweeps cheap;
//! - the closed analytic 3×3 moment system for ⟨n⟩, ⟨n²⟩, ⟨n³⟩ and the
//!   Mandel Q parameter ([`moments`]);
//! - phase-averaged quasi-probabilities Q(I), D(I), ρΣ(I) extracted exactly
//!   as exponential polynomials, the stationary relations they satisfy, the
//!   fifth-order radial equation, the pump-to-zero limit solutions, and the
//!   singular P→Q reconstruction ([`quasiprob`]);
//! - a deterministic sweep/CSV/gnuplot front end ([`sweep`]) and a
//!   self-contained validation suite ([`validate`]) exposed through the
//!   `sel-lab` binary.
//!
//! Everything is in the dimensionless rates ω = Γ/2g, η = γ/2g, τ = κ/2g.
//! The `examples/` directory exercises each capability end to end.

pub mod hilbert;
pub mod liouvillian;
pub mod moments;
pub mod numerics;
pub mod quasiprob;
pub mod sweep;
pub mod validate;

pub use hilbert::{build_operators, FockTruncation, OperatorSet};
pub use liouvillian::{
    build_liouvillian, observables, steady_state, steady_state_adaptive, steady_state_symmetric,
    steady_state_symmetric_adaptive, LaserParams, LiouvillianError, ObservableSet, Superoperator,
};
pub use moments::{coefficient_table, solve_moments, MomentSolution, MomentsError};
pub use quasiprob::{
    husimi_radial, limit_solutions, ode5_coefficients, ode5_residual, p_to_q_transform,
    relation_eq3_residual, system_eq4_residual, C0Mode, ExpPoly, QuasiProbError, RadialQuasiSet,
};
pub use sweep::{parse_config, qfunc_report, render_csv, run_sweep, SweepError, SweepSpec};
pub use validate::{run_validation, Level, ValidationReport};
