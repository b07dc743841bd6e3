//! Reduced moment system for the photon statistics: the closed 3×3 linear
//! system in ⟨n⟩, ⟨n²⟩, ⟨n³⟩ with coefficients that are explicit functions of
//! the dimensionless rates (ω, η, τ).
//!
//! The system is solved directly by pivoted elimination; the closed
//! determinant-ratio expressions are kept only as a cross-check diagnostic.

use thiserror::Error;

use crate::numerics::solve_linear_real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentsError {
    #[error("degenerate parameters: need omega + eta > 0 and tau > 0 (got omega={omega}, eta={eta}, tau={tau})")]
    DegenerateParams { omega: f64, eta: f64, tau: f64 },
    #[error("moment system near-singular: |det| = {det:.3e} below {threshold:.3e}")]
    NearSingularSystem { det: f64, threshold: f64 },
}

/// Coefficients of the reduced system, all functions of (ω, η, τ).
#[derive(Debug, Clone, Copy)]
pub struct CoefficientTable {
    pub a02: f64,
    pub a03: f64,
    pub a10: f64,
    pub a11: f64,
    pub a12: f64,
    pub a20: f64,
    pub a21: f64,
    pub a22: f64,
    /// c11, also written A.
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
    pub c23: f64,
    pub c31: f64,
    pub c32: f64,
    pub c33: f64,
    pub b: f64,
}

/// Evaluate the coefficient table at (ω, η, τ).
pub fn coefficient_table(omega: f64, eta: f64, tau: f64) -> Result<CoefficientTable, MomentsError> {
    if !(omega + eta > 0.0) || !(tau > 0.0) {
        return Err(MomentsError::DegenerateParams { omega, eta, tau });
    }
    let (w, e, t) = (omega, eta, tau);
    let a02 = t.powi(3) / 2.0 * (t - w - e);
    let a03 = t.powi(4);
    let a10 = w / 4.0 * (t - w - e);
    let a11 = t / 4.0
        * (3.0 * e * e * t + 9.0 * t.powi(3) + 4.0 * w - 12.0 * t * t * w
            + e * (2.0 - 12.0 * t * t + 6.0 * t * w)
            + t * (3.0 * w * w - 2.0));
    let a12 = t * t / 2.0 * (7.0 * t * t - 3.0 * t * e - 3.0 * t * w - 2.0);
    let a20 = 0.25
        * (6.0 * t.powi(4) + w * w - e.powi(3) * t - 11.0 * t.powi(3) * w - t * w.powi(3)
            + e * e * (6.0 * t * t - 3.0 * t * w - 1.0)
            + e * t * (12.0 * t * w + 4.0 - 11.0 * t * t - 3.0 * w * w)
            + t * t * (6.0 * w * w - 3.0));
    let a21 = t / 2.0
        * (e * e * t + 3.0 * t.powi(3) - 2.0 * w - 4.0 * t * t * w + t * w * w
            + 2.0 * e * t * (w - 2.0 * t));
    let a22 = t * t;

    // A, parenthesized exactly as printed
    let c11 = (w + e + t) / (2.0 * (w + e)) - ((w - e + t) / (2.0 * t) - (w + e + t).powi(2) / 2.0);
    let c12 = 1.0;
    let b = w * (w + e + t) / (2.0 * t * (w + e));
    let c21 = 6.0 * a02 - 12.0 * a03 - 2.0 * a11 + 3.0 * a12 + a20 - a21 + 2.0 * a22;
    let c22 = 12.0 * a03 - 3.0 * a12 + a21 - 3.0 * a22;
    let c23 = a22;
    let c31 = 40.0 * a03 + 3.0 * a11 - 8.0 * a12 - a20 + 2.0 * a21 - 12.0 * a02 - 2.0 * a10;
    let c32 = -60.0 * a03 - 3.0 * a11 + 12.0 * a12 + a20 - 3.0 * a21 + 12.0 * a02;
    let c33 = 20.0 * a03 - 4.0 * a12 + a21;

    Ok(CoefficientTable {
        a02,
        a03,
        a10,
        a11,
        a12,
        a20,
        a21,
        a22,
        c11,
        c12,
        c21,
        c22,
        c23,
        c31,
        c32,
        c33,
        b,
    })
}

impl CoefficientTable {
    /// The 3×3 system matrix.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.c11, self.c12, 0.0],
            [self.c21, self.c22, self.c23],
            [self.c31, self.c32, self.c33],
        ]
    }

    /// Right-hand side (B, a10, 0).
    pub fn rhs(&self) -> [f64; 3] {
        [self.b, self.a10, 0.0]
    }

    pub fn det(&self) -> f64 {
        let m = self.matrix();
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Solution of the reduced system.
#[derive(Debug, Clone, Copy)]
pub struct MomentSolution {
    pub mean_n: f64,
    pub mean_n2: f64,
    pub mean_n3: f64,
    /// `None` when ⟨n⟩ is numerically zero.
    pub mandel_q: Option<f64>,
    pub det_delta: f64,
    /// Set when the solution violates ⟨n⟩ ≥ 0 or nonnegative variance; the
    /// raw numbers are still returned, since the reduced system is an
    /// approximation that degrades away from ω ≈ τ.
    pub out_of_regime: bool,
}

/// Mandel Q parameter `(⟨n²⟩ - ⟨n⟩²)/⟨n⟩ - 1`, `None` for vanishing ⟨n⟩.
pub fn mandel_q(mean_n: f64, mean_n2: f64) -> Option<f64> {
    if mean_n < 1e-12 {
        None
    } else {
        Some((mean_n2 - mean_n * mean_n) / mean_n - 1.0)
    }
}

/// Solve the reduced moment system at (ω, η, τ) by direct elimination.
pub fn solve_moments(omega: f64, eta: f64, tau: f64) -> Result<MomentSolution, MomentsError> {
    let table = coefficient_table(omega, eta, tau)?;
    let m = table.matrix();
    let det = table.det();
    let norm = m
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let threshold = 1e-12 * norm.powi(3);
    if det.abs() < threshold {
        return Err(MomentsError::NearSingularSystem {
            det: det.abs(),
            threshold,
        });
    }
    let rows: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
    let x = solve_linear_real(&rows, &table.rhs()).map_err(|_| MomentsError::NearSingularSystem {
        det: det.abs(),
        threshold,
    })?;
    let (mean_n, mean_n2, mean_n3) = (x[0], x[1], x[2]);
    let variance = mean_n2 - mean_n * mean_n;
    let out_of_regime = mean_n < -1e-12 || variance < -1e-12;
    Ok(MomentSolution {
        mean_n,
        mean_n2,
        mean_n3,
        mandel_q: mandel_q(mean_n, mean_n2),
        det_delta: det,
        out_of_regime,
    })
}

/// Relative disagreement between the direct solve and the printed
/// determinant-ratio expansions. Reported by the validation harness as a
/// transcription diagnostic; never used in place of the direct solve.
pub fn cramer_diagnostic(omega: f64, eta: f64, tau: f64) -> Result<f64, MomentsError> {
    let t = coefficient_table(omega, eta, tau)?;
    let sol = solve_moments(omega, eta, tau)?;
    let delta = sol.det_delta;
    let n1 = (t.b * (t.c22 * t.c33 - t.c23 * t.c32) - t.a10 * t.c33) / delta;
    let n2 = (t.b * (t.c23 * t.c31 - t.c21 * t.c33) + t.a10 * t.c11 * t.c33) / delta;
    let n3 = (t.b * (t.c21 * t.c32 - t.c22 * t.c31) + t.a10 * (t.c31 - t.c11 * t.c32)) / delta;
    let scale = sol.mean_n.abs().max(sol.mean_n2.abs()).max(sol.mean_n3.abs()).max(1e-30);
    let worst = (n1 - sol.mean_n)
        .abs()
        .max((n2 - sol.mean_n2).abs())
        .max((n3 - sol.mean_n3).abs());
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table_fixed_points() {
        let t = coefficient_table(0.3, 0.2, 0.5).unwrap();
        assert_relative_eq!(t.a03, 0.0625);
        assert_relative_eq!(t.a22, 0.25);
        assert_relative_eq!(t.c23, t.a22);
        assert_relative_eq!(t.c12, 1.0);

        let t = coefficient_table(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(t.b, 0.75);

        let t = coefficient_table(0.0, 0.4, 0.6).unwrap();
        assert_eq!(t.b, 0.0);
        assert_eq!(t.a10, 0.0);
    }

    #[test]
    fn degenerate_params_rejected() {
        assert!(matches!(
            coefficient_table(0.0, 0.0, 0.5),
            Err(MomentsError::DegenerateParams { .. })
        ));
        assert!(matches!(
            coefficient_table(0.3, 0.2, 0.0),
            Err(MomentsError::DegenerateParams { .. })
        ));
    }

    #[test]
    fn no_pump_means_no_photons() {
        let sol = solve_moments(0.0, 0.4, 0.3).unwrap();
        assert_relative_eq!(sol.mean_n, 0.0, epsilon = 1e-14);
        assert_relative_eq!(sol.mean_n2, 0.0, epsilon = 1e-14);
        assert_relative_eq!(sol.mean_n3, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn antibunching_regime() {
        let sol = solve_moments(0.4, 0.1, 0.2).unwrap();
        assert!(sol.mandel_q.unwrap() < 0.0);
    }

    #[test]
    fn mandel_arithmetic() {
        // Poissonian
        assert_relative_eq!(mandel_q(0.7, 0.7 * 0.7 + 0.7).unwrap(), 0.0, epsilon = 1e-14);
        // strong-coupling limit pair
        assert_relative_eq!(
            mandel_q(0.630843, 1.0).unwrap(),
            -0.04566253512997698,
            max_relative = 1e-10
        );
        // number state
        assert_relative_eq!(mandel_q(1.0, 1.0).unwrap(), -1.0);
        // vacuum: undefined
        assert!(mandel_q(0.0, 0.0).is_none());
    }

    #[test]
    fn cramer_expansions_agree_with_direct_solve() {
        for &(w, e, t) in &[(0.3, 0.5, 0.3), (0.5, 0.1, 1.0), (1.2, 0.5, 2.4), (0.05, 0.1, 0.05)] {
            let diff = cramer_diagnostic(w, e, t).unwrap();
            assert!(diff < 1e-10, "cramer mismatch {diff} at ({w},{e},{t})");
        }
    }

    #[test]
    fn continuous_at_eta_zero() {
        for &w in &[0.2, 0.5, 1.0] {
            let base = solve_moments(w, 0.0, w).unwrap();
            let near = solve_moments(w, 1e-9, w).unwrap();
            assert!(base.mean_n.is_finite());
            assert_relative_eq!(base.mean_n, near.mean_n, max_relative = 1e-6);
            assert_relative_eq!(base.mean_n2, near.mean_n2, max_relative = 1e-6);
        }
    }
}
