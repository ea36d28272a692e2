//! Independent numerical oracles for the continuum response integrals.
//!
//! Both oracles evaluate R_jk from its integral definition at a finite AI
//! splitting DeltaE = E2 - E1 > 0 and extrapolate the ladder of splittings to
//! the degenerate limit:
//!
//! * [`residue::r_jk_residue`]: writes the integrand as an exact rational
//!   function, solves for the two upper-half-plane denominator roots in
//!   closed form and sums residues; machine-precision per rung.
//! * [`quadrature::r_jk_quadrature`]: adaptive Gauss-Kronrod evaluation of
//!   the principal-value integral after an exact Sokhotski-Plemelj split of
//!   the eta -> 0+ limit, with the domain tails mapped to finite intervals
//!   and integrated exactly rather than bounded.
//!
//! The two methods share no code beyond polynomial assembly, so agreement at
//! equal DeltaE is strong evidence that both implement the defining
//! integral. [`certify::certify_analytic`] compares the closed forms against
//! both over a detuning grid and reports deviations as data.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod certify;
pub mod extrapolate;
pub mod quadrature;
pub mod residue;

pub use certify::{certify_analytic, CertificationReport, LimitOrderCheck, PairReport};
pub use extrapolate::r_jk_certified;
pub use quadrature::r_jk_quadrature;
pub use residue::r_jk_residue;

/// Order in which the joint limit eta -> 0+, DeltaE -> 0+ is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitOrder {
    /// eta -> 0+ removed exactly per rung (principal value plus half
    /// residue), then the splitting ladder is extrapolated. Default.
    PlemeljFirst,
    /// The splitting ladder is extrapolated at each finite eta in a fixed
    /// eta ladder, then eta is extrapolated to zero. Retained for
    /// falsification tests of the limit-order contract.
    FiniteEtaFirst,
}

/// Configuration for the quadrature oracle and the certification harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// AI-level splittings DeltaE = E2 - E1 (atomic units), strictly
    /// decreasing, all positive.
    pub delta_e_ladder: Vec<f64>,
    /// Half-width of the central integration domain (atomic units);
    /// must be at least 1e3 Gamma. The region beyond it is not discarded:
    /// it is mapped through u -> 1/u and integrated exactly.
    pub truncation_l: f64,
    /// Absolute tolerance per rung on the dimensionless (Gamma-unit,
    /// unit-dipole) integral value.
    pub abs_tol: f64,
    /// Relative consistency scale: extrapolation self-consistency and
    /// truncation-doubling robustness are judged against it.
    pub rel_tol: f64,
    /// Minimum node spacing near sharp features (atomic units). Refinement
    /// below it with an unsatisfied tolerance is reported as
    /// non-convergence.
    pub refinement_floor: f64,
    /// Which limit is taken first.
    pub limit_order: LimitOrder,
}

impl OracleConfig {
    /// Defaults scaled to the total AI width: ladder
    /// {Gamma, Gamma/2, Gamma/4, Gamma/8, Gamma/16}, domain half-width
    /// 1e4 Gamma, floor 1e-9 Gamma.
    pub fn default_for(gamma: f64) -> Self {
        OracleConfig {
            delta_e_ladder: alloc::vec![
                gamma,
                0.5 * gamma,
                0.25 * gamma,
                0.125 * gamma,
                0.0625 * gamma,
            ],
            truncation_l: 1e4 * gamma,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            refinement_floor: 1e-9 * gamma,
            limit_order: LimitOrder::PlemeljFirst,
        }
    }

    /// Validates the configuration against the width it will be used with.
    pub fn validate(&self, gamma: f64) -> Result<(), OracleError> {
        if self.delta_e_ladder.is_empty() {
            return Err(OracleError::InvalidConfig(String::from(
                "delta_e_ladder must not be empty",
            )));
        }
        for &d in &self.delta_e_ladder {
            if !(d > 0.0) || !d.is_finite() {
                return Err(OracleError::InvalidConfig(String::from(
                    "delta_e_ladder entries must be positive and finite",
                )));
            }
        }
        for pair in self.delta_e_ladder.windows(2) {
            if !(pair[1] < pair[0]) {
                return Err(OracleError::InvalidConfig(String::from(
                    "delta_e_ladder must be strictly decreasing",
                )));
            }
        }
        if !(self.truncation_l >= 1e3 * gamma) {
            return Err(OracleError::InvalidConfig(String::from(
                "truncation_l must be at least 1e3 Gamma",
            )));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || !(self.refinement_floor > 0.0) {
            return Err(OracleError::InvalidConfig(String::from(
                "abs_tol, rel_tol and refinement_floor must be positive",
            )));
        }
        Ok(())
    }
}

/// Ladder values and their extrapolation to the degenerate limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    /// R at each ladder splitting, in ladder order.
    pub values_at_ladder: Vec<Complex64>,
    /// Richardson/Neville extrapolation to DeltaE = 0.
    pub extrapolated: Complex64,
    /// Absolute extrapolation error estimate. The extrapolated value is
    /// within 10x this residual of the last ladder value by construction.
    pub residual: f64,
}

/// Oracle failure modes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid oracle config: {0}")]
    InvalidConfig(String),
    #[error("root finding failed: non-finite denominator roots at delta_e = {delta_e_over_gamma} Gamma")]
    RootFinderFailure { delta_e_over_gamma: f64 },
    #[error("near-degenerate denominator roots (separation {separation_over_gamma:e} Gamma < 1e-6 Gamma); use the quadrature oracle")]
    NearDegenerateRoots { separation_over_gamma: f64 },
    #[error("adaptive refinement hit the floor or budget before reaching tolerance; completed ladder values attached (inspect the last two)")]
    QuadratureNonConvergence { completed: Vec<Complex64> },
    #[error("real pole at omega = {omega_over_gamma} Gamma collides with the bound-state resonance at {bic_over_gamma} Gamma")]
    PoleCollision {
        omega_over_gamma: f64,
        bic_over_gamma: f64,
    },
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
}
