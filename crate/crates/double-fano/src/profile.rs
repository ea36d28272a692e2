//! The double Fano profile: ratio between the dressed and bare continuum
//! dipole matrix elements for one lower level coupled to two autoionizing
//! levels sharing a flat continuum.
//!
//! In coordinates centered on the mean AI energy E0 = (E1+E2)/2 with
//! y = E - E0 and half-splitting delta = (E2-E1)/2 the ratio is
//!
//! ```text
//! F(y) = 1 + Gamma*[(Q + i)*y + delta*(Q21 + i*Gamma21)] / D(y),
//! D(y) = y^2 - i*Gamma*y - delta^2 - i*delta*Gamma*Gamma21,
//! ```
//!
//! algebraically identical to the ratio of the two quadratics in E but free
//! of cancellation in the far wings. For exactly degenerate levels the common
//! root y = 0 of numerator and denominator is removed analytically, giving
//! the cancelled form (y + Q*Gamma) / (y - i*Gamma).

use num_complex::Complex64;
use thiserror::Error;

/// Errors from evaluating the uncancelled profile at its removable point.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    /// Degenerate levels evaluated at the common root of numerator and
    /// denominator; the cancelled form is finite there.
    #[error("removable singularity; use cancelled form")]
    RemovableSingularity,
}

/// Effective combinations entering the centered profile.
#[derive(Debug, Clone, Copy)]
struct Centered {
    e0: f64,
    delta: f64,
    gamma: f64,
    gamma21: f64,
    q: f64,
    q21: f64,
}

fn centered(e1: f64, e2: f64, gamma1: f64, gamma2: f64, q1: f64, q2: f64) -> Centered {
    let gamma = gamma1 + gamma2;
    Centered {
        e0: 0.5 * (e1 + e2),
        delta: 0.5 * (e2 - e1),
        gamma,
        gamma21: (gamma2 - gamma1) / gamma,
        q: (q1 * gamma1 + q2 * gamma2) / gamma,
        q21: (q2 * gamma2 - q1 * gamma1) / gamma,
    }
}

/// Uncancelled profile. Exactly degenerate input evaluated at the common
/// energy root returns the removable-singularity error.
pub fn fano_ratio_general(
    e: f64,
    e1: f64,
    e2: f64,
    gamma1: f64,
    gamma2: f64,
    q1: f64,
    q2: f64,
) -> Result<Complex64, ProfileError> {
    let c = centered(e1, e2, gamma1, gamma2, q1, q2);
    let y = e - c.e0;
    let den = Complex64::new(
        y * y - c.delta * c.delta,
        -c.gamma * y - c.delta * c.gamma * c.gamma21,
    );
    if den == Complex64::new(0.0, 0.0) {
        return Err(ProfileError::RemovableSingularity);
    }
    let num = c.gamma
        * Complex64::new(
            c.q * y + c.delta * c.q21,
            y + c.delta * c.gamma21,
        );
    Ok(Complex64::new(1.0, 0.0) + num / den)
}

/// Cancelled degenerate profile (y + Q*Gamma) / (y - i*Gamma), finite at
/// y = 0 where it equals i*Q.
pub fn fano_ratio_degenerate(y: f64, gamma: f64, q: f64) -> Complex64 {
    Complex64::new(y + q * gamma, 0.0) / Complex64::new(y, -gamma)
}

/// Profile dispatcher: uses the cancelled form for exactly degenerate input
/// and the uncancelled form otherwise.
pub fn fano_ratio(
    e: f64,
    e1: f64,
    e2: f64,
    gamma1: f64,
    gamma2: f64,
    q1: f64,
    q2: f64,
) -> Complex64 {
    if e1 == e2 {
        let gamma = gamma1 + gamma2;
        let q = (q1 * gamma1 + q2 * gamma2) / gamma;
        fano_ratio_degenerate(e - e1, gamma, q)
    } else {
        // Off the degenerate case the uncancelled form has no real-axis
        // singularity: Im D = 0 forces y = -delta*Gamma21, where
        // Re D = delta^2*(Gamma21^2 - 1) < 0.
        fano_ratio_general(e, e1, e2, gamma1, gamma2, q1, q2)
            .expect("non-degenerate profile is finite on the real axis")
    }
}
