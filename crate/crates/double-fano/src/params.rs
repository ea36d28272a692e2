//! Model parameters: microscopic inputs and the derived effective quantities.
//!
//! The microscopic description carries the two autoionization widths, four
//! Fano asymmetry parameters (one per AI level per lower state), the
//! flat-continuum dipole moments, the coherence decay and the medium density.
//! All closed-form response expressions depend only on six effective
//! combinations (Q_b, Q_c, Q_b21, Q_c21, Gamma, Gamma21); both directions of
//! the mapping are provided.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Medium density of 0.33e12 cm^-3 converted to atomic units via the Bohr
/// radius cube: N_au = 0.33e12 * (0.52917721067e-8 cm)^3.
pub const DENSITY_N_AU: f64 = 4.890095478581374e-14;

/// Microscopic system parameters in atomic units (hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Autoionization width of AI level 1 (> 0).
    pub gamma1: f64,
    /// Autoionization width of AI level 2 (> 0).
    pub gamma2: f64,
    /// Fano asymmetry of AI level 1 seen from ground state b.
    pub q1b: f64,
    /// Fano asymmetry of AI level 2 seen from ground state b.
    pub q2b: f64,
    /// Fano asymmetry of AI level 1 seen from metastable state c.
    pub q1c: f64,
    /// Fano asymmetry of AI level 2 seen from metastable state c.
    pub q2c: f64,
    /// Flat-continuum dipole matrix element from b.
    pub d_b: f64,
    /// Flat-continuum dipole matrix element from c.
    pub d_c: f64,
    /// Phenomenological decay of the rho_cb coherence (>= 0).
    pub gamma_cb: f64,
    /// Medium number density (>= 0).
    pub density_n: f64,
}

/// Field parameters in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    /// Probe amplitude; cancels in chi, used only by the dynamics module.
    pub eps1: f64,
    /// Control amplitude (>= 0).
    pub eps2: f64,
    /// Control detuning from the AI level (0 = resonant).
    pub delta_c: f64,
}

/// Effective parameters entering every closed-form response expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// Q_b = (q1b*gamma1 + q2b*gamma2) / Gamma.
    pub q_b: f64,
    /// Q_c = (q1c*gamma1 + q2c*gamma2) / Gamma.
    pub q_c: f64,
    /// Q_b21 = (q2b*gamma2 - q1b*gamma1) / Gamma.
    pub q_b21: f64,
    /// Q_c21 = (q2c*gamma2 - q1c*gamma1) / Gamma.
    pub q_c21: f64,
    /// Total autoionization width Gamma = gamma1 + gamma2.
    pub gamma: f64,
    /// Width asymmetry Gamma21 = (gamma2 - gamma1) / Gamma, |Gamma21| < 1.
    pub gamma21: f64,
}

/// Validation failures for parameter records.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    /// A field violated its sign constraint; carries the field name.
    #[error("parameter `{field}` must be {requirement}, got {value}")]
    OutOfRange {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    /// A field was not a finite number; carries the field name.
    #[error("parameter `{field}` must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    /// Effective parameters cannot be realized by positive widths.
    #[error("effective `gamma21` must satisfy |gamma21| < 1, got {0}")]
    Gamma21OutOfRange(f64),
}

fn require_finite(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonFinite { field, value })
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<(), ParamError> {
    require_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            field,
            requirement: "> 0",
            value,
        })
    }
}

fn require_non_negative(field: &'static str, value: f64) -> Result<(), ParamError> {
    require_finite(field, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            field,
            requirement: ">= 0",
            value,
        })
    }
}

impl SystemParams {
    /// Checks sign constraints and finiteness, naming the offending field.
    pub fn validate(&self) -> Result<(), ParamError> {
        require_positive("gamma1", self.gamma1)?;
        require_positive("gamma2", self.gamma2)?;
        require_finite("q1b", self.q1b)?;
        require_finite("q2b", self.q2b)?;
        require_finite("q1c", self.q1c)?;
        require_finite("q2c", self.q2c)?;
        require_finite("d_b", self.d_b)?;
        require_finite("d_c", self.d_c)?;
        require_non_negative("gamma_cb", self.gamma_cb)?;
        require_non_negative("density_n", self.density_n)?;
        Ok(())
    }

    /// Total autoionization width Gamma = gamma1 + gamma2.
    pub fn total_gamma(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    /// Reconstructs microscopic parameters realizing the given effective set,
    /// taking dipoles, coherence decay and density from `template`.
    ///
    /// The inverse mapping is gamma1 = Gamma(1 - Gamma21)/2,
    /// gamma2 = Gamma(1 + Gamma21)/2, q1j = (Q_j - Q_j21)/(1 - Gamma21),
    /// q2j = (Q_j + Q_j21)/(1 + Gamma21); it requires |Gamma21| < 1.
    pub fn from_effective(eff: &EffectiveParams, template: &SystemParams) -> Result<Self, ParamError> {
        if !(libm::fabs(eff.gamma21) < 1.0) {
            return Err(ParamError::Gamma21OutOfRange(eff.gamma21));
        }
        require_positive("gamma", eff.gamma)?;
        let gamma1 = 0.5 * eff.gamma * (1.0 - eff.gamma21);
        let gamma2 = 0.5 * eff.gamma * (1.0 + eff.gamma21);
        let p = SystemParams {
            gamma1,
            gamma2,
            q1b: (eff.q_b - eff.q_b21) / (1.0 - eff.gamma21),
            q2b: (eff.q_b + eff.q_b21) / (1.0 + eff.gamma21),
            q1c: (eff.q_c - eff.q_c21) / (1.0 - eff.gamma21),
            q2c: (eff.q_c + eff.q_c21) / (1.0 + eff.gamma21),
            ..*template
        };
        p.validate()?;
        Ok(p)
    }
}

impl Default for SystemParams {
    /// Figure-scale defaults: Gamma = 1e-9 a.u. split evenly, symmetric
    /// asymmetry parameters Q_b = Q_c = 20 with zero cross terms.
    fn default() -> Self {
        SystemParams {
            gamma1: 0.5e-9,
            gamma2: 0.5e-9,
            q1b: 20.0,
            q2b: 20.0,
            q1c: 20.0,
            q2c: 20.0,
            d_b: 2.0,
            d_c: 3.0,
            gamma_cb: 1e-12,
            density_n: DENSITY_N_AU,
        }
    }
}

impl FieldParams {
    /// Checks sign constraints and finiteness, naming the offending field.
    pub fn validate(&self) -> Result<(), ParamError> {
        require_finite("eps1", self.eps1)?;
        require_non_negative("eps2", self.eps2)?;
        require_finite("delta_c", self.delta_c)?;
        Ok(())
    }
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            eps1: 1e-12,
            eps2: 4e-7,
            delta_c: 0.0,
        }
    }
}

impl EffectiveParams {
    /// BIC coupling strength for channel b: K_b = Q_b21 - Gamma21 * Q_b.
    /// The bound state decouples from b exactly when this vanishes.
    pub fn k_b(&self) -> f64 {
        self.q_b21 - self.gamma21 * self.q_b
    }

    /// BIC coupling strength for channel c: K_c = Q_c21 - Gamma21 * Q_c.
    pub fn k_c(&self) -> f64 {
        self.q_c21 - self.gamma21 * self.q_c
    }
}

/// Maps microscopic parameters to the effective set.
///
/// Errors when gamma1 + gamma2 is not positive.
pub fn effective_params(p: &SystemParams) -> Result<EffectiveParams, ParamError> {
    let gamma = p.gamma1 + p.gamma2;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ParamError::OutOfRange {
            field: "gamma1 + gamma2",
            requirement: "> 0",
            value: gamma,
        });
    }
    Ok(EffectiveParams {
        q_b: (p.q1b * p.gamma1 + p.q2b * p.gamma2) / gamma,
        q_c: (p.q1c * p.gamma1 + p.q2c * p.gamma2) / gamma,
        q_b21: (p.q2b * p.gamma2 - p.q1b * p.gamma1) / gamma,
        q_c21: (p.q2c * p.gamma2 - p.q1c * p.gamma1) / gamma,
        gamma,
        gamma21: (p.gamma2 - p.gamma1) / gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_degenerate_case() {
        let p = SystemParams {
            q1b: 7.0,
            q2b: 7.0,
            q1c: 3.0,
            q2c: 3.0,
            ..SystemParams::default()
        };
        let eff = effective_params(&p).unwrap();
        assert_eq!(eff.gamma21, 0.0);
        assert_eq!(eff.q_b21, 0.0);
        assert_eq!(eff.q_c21, 0.0);
        assert_eq!(eff.q_b, 7.0);
        assert_eq!(eff.q_c, 3.0);
        assert_eq!(eff.gamma, 1e-9);
    }

    #[test]
    fn width_asymmetry_direct() {
        let p = SystemParams {
            gamma1: 0.3e-9,
            gamma2: 0.7e-9,
            ..SystemParams::default()
        };
        let eff = effective_params(&p).unwrap();
        assert_relative_eq!(eff.gamma21, 0.4, max_relative = 1e-15);
    }

    #[test]
    fn hand_inverted_qb20_qb21_1() {
        let p = SystemParams {
            gamma1: 0.5e-9,
            gamma2: 0.5e-9,
            q1b: 19.0,
            q2b: 21.0,
            ..SystemParams::default()
        };
        let eff = effective_params(&p).unwrap();
        assert_relative_eq!(eff.q_b, 20.0, max_relative = 1e-15);
        assert_relative_eq!(eff.q_b21, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn from_effective_round_trips() {
        let eff = EffectiveParams {
            q_b: 15.0,
            q_c: 20.0,
            q_b21: 1.0,
            q_c21: 6.0,
            gamma: 1e-9,
            gamma21: 0.4,
        };
        let p = SystemParams::from_effective(&eff, &SystemParams::default()).unwrap();
        let back = effective_params(&p).unwrap();
        assert_relative_eq!(back.q_b, eff.q_b, max_relative = 1e-14);
        assert_relative_eq!(back.q_c, eff.q_c, max_relative = 1e-14);
        assert_relative_eq!(back.q_b21, eff.q_b21, max_relative = 1e-13);
        assert_relative_eq!(back.q_c21, eff.q_c21, max_relative = 1e-13);
        assert_relative_eq!(back.gamma, eff.gamma, max_relative = 1e-15);
        assert_relative_eq!(back.gamma21, eff.gamma21, max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_width() {
        let p = SystemParams {
            gamma1: -1.0,
            ..SystemParams::default()
        };
        let err = p.validate().unwrap_err();
        match err {
            ParamError::OutOfRange { field, .. } => assert_eq!(field, "gamma1"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_gamma21_at_unity() {
        let eff = EffectiveParams {
            q_b: 1.0,
            q_c: 1.0,
            q_b21: 0.0,
            q_c21: 0.0,
            gamma: 1e-9,
            gamma21: 1.0,
        };
        assert!(matches!(
            SystemParams::from_effective(&eff, &SystemParams::default()),
            Err(ParamError::Gamma21OutOfRange(_))
        ));
    }

    #[test]
    fn bic_coupling_vanishes_for_identical_asymmetries() {
        // Identical q's per channel make the bound state dark regardless of
        // the width asymmetry.
        for &g21 in &[0.0, 0.2, 0.4, -0.3] {
            let eff = EffectiveParams {
                q_b: 15.0,
                q_c: 20.0,
                q_b21: g21 * 15.0,
                q_c21: g21 * 20.0,
                gamma: 1e-9,
                gamma21: g21,
            };
            assert_eq!(eff.k_b(), 0.0);
            assert_eq!(eff.k_c(), 0.0);
            let p = SystemParams::from_effective(&eff, &SystemParams::default()).unwrap();
            assert_relative_eq!(p.q1b, p.q2b, max_relative = 1e-12);
            assert_relative_eq!(p.q1c, p.q2c, max_relative = 1e-12);
        }
    }

    #[test]
    fn effective_identities_hold() {
        let p = SystemParams {
            gamma1: 0.37e-9,
            gamma2: 0.81e-9,
            q1b: -3.2,
            q2b: 11.5,
            q1c: 4.4,
            q2c: -0.7,
            ..SystemParams::default()
        };
        let eff = effective_params(&p).unwrap();
        let gamma = p.gamma1 + p.gamma2;
        assert_relative_eq!(eff.q_b * gamma, p.q1b * p.gamma1 + p.q2b * p.gamma2, max_relative = 1e-15);
        assert_relative_eq!(eff.q_b21 * gamma, p.q2b * p.gamma2 - p.q1b * p.gamma1, max_relative = 1e-15);
        assert_relative_eq!(eff.q_c * gamma, p.q1c * p.gamma1 + p.q2c * p.gamma2, max_relative = 1e-15);
        assert_relative_eq!(eff.q_c21 * gamma, p.q2c * p.gamma2 - p.q1c * p.gamma1, max_relative = 1e-15);
        assert!(libm::fabs(eff.gamma21) < 1.0);
    }
}
