//! Truncated atom ⊗ field Hilbert space and the operators appearing in the
//! master equation.
//!
//! Basis ordering is fixed: `|i, n⟩` with the atomic index `i ∈ {1, 2}` slow
//! and the Fock index `n` fast, so the composite index is
//! `(i - 1) * (n_max + 1) + n`. This makes the partial trace over the atom a
//! block sum with stride `n_max + 1`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("n_max must be at least 1, got {0}")]
    TruncationTooSmall(usize),
}

/// Highest retained Fock state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self, HilbertError> {
        if n_max < 1 {
            return Err(HilbertError::TruncationTooSmall(n_max));
        }
        Ok(FockTruncation { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of retained Fock states, `n_max + 1`.
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Composite dimension `2 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Composite index of `|i, n⟩` for atomic level `i ∈ {1, 2}`.
    pub fn index(&self, atom: usize, n: usize) -> usize {
        debug_assert!(atom == 1 || atom == 2);
        debug_assert!(n <= self.n_max);
        (atom - 1) * self.fock_dim() + n
    }
}

/// Default Fock truncation used when none is requested explicitly.
pub const DEFAULT_N_MAX: usize = 40;

/// The operators of the model on the composite basis.
pub struct OperatorSet {
    pub trunc: FockTruncation,
    pub a: Array2<C64>,
    pub a_dag: Array2<C64>,
    pub sigma: Array2<C64>,
    pub sigma_dag: Array2<C64>,
    pub sigma_z: Array2<C64>,
    pub n_op: Array2<C64>,
    pub identity: Array2<C64>,
}

/// Build annihilation, polarization and derived operators on the truncated
/// composite space. `σ = |1⟩⟨2|` lowers the atom; `a |i, n⟩ = √n |i, n-1⟩`.
pub fn build_operators(trunc: FockTruncation) -> OperatorSet {
    let nf = trunc.fock_dim();
    let d = trunc.dim();
    let zero = || Array2::<C64>::zeros((d, d));

    let mut a = zero();
    for atom in 1..=2 {
        for n in 1..nf {
            a[(trunc.index(atom, n - 1), trunc.index(atom, n))] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    let mut sigma = zero();
    for n in 0..nf {
        sigma[(trunc.index(1, n), trunc.index(2, n))] = C64::new(1.0, 0.0);
    }
    let a_dag = dagger(&a);
    let sigma_dag = dagger(&sigma);
    let n_op = a_dag.dot(&a);
    let sigma_z = sigma_dag.dot(&sigma) - sigma.dot(&sigma_dag);
    let identity = Array2::eye(d).mapv(|v: f64| C64::new(v, 0.0));
    OperatorSet {
        trunc,
        a,
        a_dag,
        sigma,
        sigma_dag,
        sigma_z,
        n_op,
        identity,
    }
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// `tr(op · rho)`, computed entrywise without forming the product.
pub fn expectation(rho: &Array2<C64>, op: &Array2<C64>) -> Result<C64, HilbertError> {
    if rho.dim() != op.dim() || rho.nrows() != rho.ncols() {
        return Err(HilbertError::DimensionMismatch(format!(
            "rho is {:?}, op is {:?}",
            rho.dim(),
            op.dim()
        )));
    }
    let n = rho.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += op[(i, k)] * rho[(k, i)];
        }
    }
    Ok(acc)
}

/// Projector `|i, n⟩⟨i, n|` as a density matrix.
pub fn basis_projector(trunc: FockTruncation, atom: usize, n: usize) -> Array2<C64> {
    let mut rho = Array2::<C64>::zeros((trunc.dim(), trunc.dim()));
    let idx = trunc.index(atom, n);
    rho[(idx, idx)] = C64::new(1.0, 0.0);
    rho
}
