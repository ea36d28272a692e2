//! Closed-form continuum response integrals R_jk in the degenerate limit.
//!
//! R_jk is the principal-value-plus-pole integral of
//! D_j D_k F_j(E) conj(F_k(E)) / (omega - y + i*0+) over the continuum, with
//! F the double Fano profile. In the degenerate limit it collapses to
//!
//! ```text
//! R_jk = pi D_j D_k (Q_j + i)(Q_k - i) * (s1 + s2 + s3 + s4 + s5)
//! s1 = -i / [(Q_j+i)(Q_k-i)]
//! s2 = -2i / [(Q_j+i)(w+i)]          w = omega / Gamma
//! s3 = -2i / (w^2 + 1)
//! s4 = 1 / (w - i)
//! s5 = K_j K_k / [(1-Gamma21^2)(Q_jQ_k + 1 - i(Q_j-Q_k)) w]
//! K_j = Q_j21 - Gamma21 Q_j
//! ```
//!
//! The 1/w term is a genuine pole: the degenerate pair supports a bound
//! state in the continuum whose coupling to level j is proportional to K_j.
//! A commonly printed variant of the fifth summand uses
//! K+_j = Q_j21 + Gamma21 Q_j (equivalently, the cross terms enter with the
//! opposite sign); that transcription disagrees with the integral oracles
//! whenever Gamma21 and the Q_j21 are simultaneously nonzero and is provided
//! as [`r_jk_transcribed`] so certification can demonstrate the discrepancy.

use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{EffectiveParams, SystemParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Lower-level label selecting the (Q_j, Q_j21) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Ground state, probed by the weak field.
    B,
    /// Metastable state, driven by the control field.
    C,
}

impl Level {
    /// (Q_j, Q_j21) for this level.
    pub fn q_pair(self, eff: &EffectiveParams) -> (f64, f64) {
        match self {
            Level::B => (eff.q_b, eff.q_b21),
            Level::C => (eff.q_c, eff.q_c21),
        }
    }

    /// BIC coupling K_j = Q_j21 - Gamma21 Q_j.
    pub fn k(self, eff: &EffectiveParams) -> f64 {
        match self {
            Level::B => eff.k_b(),
            Level::C => eff.k_c(),
        }
    }

    /// Reduced dipole moment of this level's bound-continuum transition.
    pub fn dipole(self, p: &SystemParams) -> f64 {
        match self {
            Level::B => p.d_b,
            Level::C => p.d_c,
        }
    }
}

/// How an R value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Quadrature,
    Residue,
    Dynamics,
}

/// A single R_jk evaluation with provenance and an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RValue {
    pub value: Complex64,
    pub method: Method,
    /// Absolute error estimate; exactly 0 for the analytic method.
    pub error_estimate: f64,
}

/// Failures of the closed forms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    /// omega = 0 with a nonzero bound-state numerator: genuine 1/omega pole.
    #[error("bound-state pole at omega = 0 (nonzero 1/omega numerator); exclude omega = 0 from evaluation grids")]
    PoleAtOmegaZero,
    /// |Gamma21| >= 1 cannot arise from positive widths and makes the
    /// 1/(1 - Gamma21^2) prefactor singular or negative.
    #[error("singular prefactor: |gamma21| must be < 1, got {0}")]
    SingularGammaRatio(f64),
}

/// Sum of the four bound-state-free summands, in Gamma units.
fn sum4(q_j: f64, q_k: f64, w: f64) -> Complex64 {
    let jp = Complex64::new(q_j, 1.0);
    let s1 = -I / (jp * Complex64::new(q_k, -1.0));
    let s2 = -2.0 * I / (jp * Complex64::new(w, 1.0));
    let s3 = -2.0 * I / (w * w + 1.0);
    let s4 = Complex64::new(1.0, 0.0) / Complex64::new(w, -1.0);
    s1 + s2 + s3 + s4
}

fn assemble(d_j: f64, d_k: f64, q_j: f64, q_k: f64, sum: Complex64) -> Complex64 {
    PI * d_j * d_k * Complex64::new(q_j, 1.0) * Complex64::new(q_k, -1.0) * sum
}

fn r_jk_with_couplings(
    j: Level,
    k: Level,
    omega: f64,
    eff: &EffectiveParams,
    d_j: f64,
    d_k: f64,
    k_j: f64,
    k_k: f64,
) -> Result<RValue, ResponseError> {
    if !(libm::fabs(eff.gamma21) < 1.0) {
        return Err(ResponseError::SingularGammaRatio(eff.gamma21));
    }
    let q_j = j.q_pair(eff).0;
    let q_k = k.q_pair(eff).0;
    let w = omega / eff.gamma;
    let coupling = k_j * k_k;
    let sum = if coupling == 0.0 {
        sum4(q_j, q_k, w)
    } else {
        if omega == 0.0 {
            return Err(ResponseError::PoleAtOmegaZero);
        }
        let jpkm = Complex64::new(q_j, 1.0) * Complex64::new(q_k, -1.0);
        let s5 = coupling / ((1.0 - eff.gamma21 * eff.gamma21) * w) / jpkm;
        sum4(q_j, q_k, w) + s5
    };
    Ok(RValue {
        value: assemble(d_j, d_k, q_j, q_k, sum),
        method: Method::Analytic,
        error_estimate: 0.0,
    })
}

/// Degenerate-limit R_jk, bound-state term included with couplings
/// K_j = Q_j21 - Gamma21 Q_j.
pub fn r_jk_analytic(
    j: Level,
    k: Level,
    omega: f64,
    eff: &EffectiveParams,
    d_j: f64,
    d_k: f64,
) -> Result<RValue, ResponseError> {
    r_jk_with_couplings(j, k, omega, eff, d_j, d_k, j.k(eff), k.k(eff))
}

/// The literal printed transcription with bound-state couplings
/// K+_j = Q_j21 + Gamma21 Q_j. Disagrees with the integral oracles when
/// Gamma21 != 0 and the cross asymmetries are nonzero; retained as evidence.
pub fn r_jk_transcribed(
    j: Level,
    k: Level,
    omega: f64,
    eff: &EffectiveParams,
    d_j: f64,
    d_k: f64,
) -> Result<RValue, ResponseError> {
    let (q_j, q_j21) = j.q_pair(eff);
    let (q_k, q_k21) = k.q_pair(eff);
    let kp_j = q_j21 + eff.gamma21 * q_j;
    let kp_k = q_k21 + eff.gamma21 * q_k;
    r_jk_with_couplings(j, k, omega, eff, d_j, d_k, kp_j, kp_k)
}

/// Four-summand reduction: the response of a single effective AI level,
/// exactly what the full form collapses to when the bound state decouples.
pub fn r_jk_reduced(
    j: Level,
    k: Level,
    omega: f64,
    eff: &EffectiveParams,
    d_j: f64,
    d_k: f64,
) -> Result<RValue, ResponseError> {
    if !(libm::fabs(eff.gamma21) < 1.0) {
        return Err(ResponseError::SingularGammaRatio(eff.gamma21));
    }
    let (q_j, _) = j.q_pair(eff);
    let (q_k, _) = k.q_pair(eff);
    let w = omega / eff.gamma;
    Ok(RValue {
        value: assemble(d_j, d_k, q_j, q_k, sum4(q_j, q_k, w)),
        method: Method::Analytic,
        error_estimate: 0.0,
    })
}

/// Compact algebraic rearrangement of the same five summands, used as an
/// internal consistency check:
/// pi D_j D_k { -i + (Q_j-i)(Q_k-i)/(w+i) + K_j K_k / [(1-Gamma21^2) w] }.
#[doc(hidden)]
pub fn r_jk_compact(
    j: Level,
    k: Level,
    omega: f64,
    eff: &EffectiveParams,
    d_j: f64,
    d_k: f64,
) -> Result<Complex64, ResponseError> {
    if !(libm::fabs(eff.gamma21) < 1.0) {
        return Err(ResponseError::SingularGammaRatio(eff.gamma21));
    }
    let (q_j, _) = j.q_pair(eff);
    let (q_k, _) = k.q_pair(eff);
    let w = omega / eff.gamma;
    let coupling = j.k(eff) * k.k(eff);
    let mut sum = -I
        + Complex64::new(q_j, -1.0) * Complex64::new(q_k, -1.0) / Complex64::new(w, 1.0);
    if coupling != 0.0 {
        if omega == 0.0 {
            return Err(ResponseError::PoleAtOmegaZero);
        }
        sum += Complex64::new(coupling / ((1.0 - eff.gamma21 * eff.gamma21) * w), 0.0);
    }
    Ok(PI * d_j * d_k * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GAMMA: f64 = 1e-9;

    fn eff(q_b: f64, q_b21: f64, q_c: f64, q_c21: f64, gamma21: f64) -> EffectiveParams {
        EffectiveParams {
            q_b,
            q_c,
            q_b21,
            q_c21,
            gamma: GAMMA,
            gamma21,
        }
    }

    fn assert_c64(actual: Complex64, expected: Complex64, tol: f64) {
        let dev = (actual - expected).norm() / expected.norm();
        assert!(
            dev <= tol,
            "got {actual}, expected {expected}, rel dev {dev:.3e}"
        );
    }

    // Frozen anchors: independently evaluated with 50-digit arithmetic from
    // the five-summand form; unit dipoles, values in units of D_j D_k.

    #[test]
    fn anchor_bc_symmetric_widths() {
        let e = eff(20.0, 1.0, 20.0, 8.0, 0.0);
        let r = r_jk_analytic(Level::B, Level::C, 2.0 * GAMMA, &e, 1.0, 1.0).unwrap();
        assert_c64(
            r.value,
            Complex64::new(488.8318168985718, -304.106168867492),
            5e-14,
        );
        assert_eq!(r.method, Method::Analytic);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn anchor_bc_asymmetric_widths() {
        let e = eff(15.0, 1.0, 20.0, 6.0, 0.4);
        let r = r_jk_analytic(Level::B, Level::C, 2.0 * GAMMA, &e, 1.0, 1.0).unwrap();
        assert_c64(
            r.value,
            Complex64::new(372.4432890655785, -234.99113048851652),
            5e-14,
        );
    }

    #[test]
    fn anchor_bc_negative_detuning() {
        let e = eff(15.0, 1.0, 20.0, 6.0, 0.4);
        let r = r_jk_analytic(Level::B, Level::C, -0.7 * GAMMA, &e, 1.0, 1.0).unwrap();
        assert_c64(
            r.value,
            Complex64::new(-568.5231345916266, -581.911514405535),
            5e-14,
        );
    }

    #[test]
    fn anchor_cc_diagonal() {
        let e = eff(20.0, 1.0, 20.0, 8.0, 0.0);
        let r = r_jk_analytic(Level::C, Level::C, 0.5 * GAMMA, &e, 1.0, 1.0).unwrap();
        assert_c64(
            r.value,
            Complex64::new(802.991082257551, -1056.2034501368885),
            5e-14,
        );
    }

    #[test]
    fn five_summands_match_compact_form() {
        let sets = [
            eff(20.0, 1.0, 20.0, 8.0, 0.0),
            eff(15.0, 1.0, 20.0, 6.0, 0.4),
            eff(15.0, 1.0, 20.0, 6.0, -0.4),
            eff(5.0, 0.0, 7.0, 0.0, 0.2),
        ];
        let omegas = [2.0 * GAMMA, -0.7 * GAMMA, 0.013 * GAMMA, 9.0 * GAMMA];
        for e in &sets {
            for &w in &omegas {
                for (j, k) in [
                    (Level::B, Level::B),
                    (Level::B, Level::C),
                    (Level::C, Level::B),
                    (Level::C, Level::C),
                ] {
                    let five = r_jk_analytic(j, k, w, e, 2.0, 3.0).unwrap().value;
                    let compact = r_jk_compact(j, k, w, e, 2.0, 3.0).unwrap();
                    assert_c64(five, compact, 1e-13);
                }
            }
        }
    }

    #[test]
    fn reduction_is_bitwise_when_bound_state_decouples() {
        let e = eff(20.0, 0.0, 12.0, 0.0, 0.0);
        for &w in &[0.0, 0.3 * GAMMA, -4.0 * GAMMA, 7.7 * GAMMA] {
            let full = r_jk_analytic(Level::B, Level::C, w, &e, 2.0, 3.0).unwrap();
            let reduced = r_jk_reduced(Level::B, Level::C, w, &e, 2.0, 3.0).unwrap();
            assert_eq!(full.value, reduced.value);
        }
    }

    #[test]
    fn transcribed_equals_analytic_only_for_symmetric_widths() {
        let sym = eff(20.0, 1.0, 20.0, 8.0, 0.0);
        let a = r_jk_analytic(Level::B, Level::C, 2.0 * GAMMA, &sym, 1.0, 1.0).unwrap();
        let t = r_jk_transcribed(Level::B, Level::C, 2.0 * GAMMA, &sym, 1.0, 1.0).unwrap();
        assert_eq!(a.value, t.value);

        let asym = eff(15.0, 1.0, 20.0, 6.0, 0.4);
        let a = r_jk_analytic(Level::B, Level::C, 0.05 * GAMMA, &asym, 1.0, 1.0).unwrap();
        let t = r_jk_transcribed(Level::B, Level::C, 0.05 * GAMMA, &asym, 1.0, 1.0).unwrap();
        let dev = (a.value - t.value).norm() / a.value.norm();
        assert!(dev > 0.1, "forms should disagree strongly near omega = 0, dev {dev}");
    }

    #[test]
    fn bilinearity_in_dipoles() {
        let e = eff(15.0, 1.0, 20.0, 6.0, 0.4);
        let base = r_jk_analytic(Level::B, Level::C, 2.0 * GAMMA, &e, 1.0, 1.0).unwrap();
        let scaled = r_jk_analytic(Level::B, Level::C, 2.0 * GAMMA, &e, 2.5, -4.0).unwrap();
        assert_eq!(scaled.value, base.value * 2.5 * -4.0);
    }

    #[test]
    fn exchange_symmetry_of_cross_product() {
        // R_bc * R_cb invariant under swapping the two channels.
        let e = eff(15.0, 1.0, 20.0, 6.0, 0.4);
        let swapped = eff(20.0, 6.0, 15.0, 1.0, 0.4);
        for &w in &[0.37 * GAMMA, -2.0 * GAMMA, 8.0 * GAMMA] {
            let p1 = r_jk_analytic(Level::B, Level::C, w, &e, 2.0, 3.0).unwrap().value
                * r_jk_analytic(Level::C, Level::B, w, &e, 3.0, 2.0).unwrap().value;
            let p2 = r_jk_analytic(Level::B, Level::C, w, &swapped, 3.0, 2.0).unwrap().value
                * r_jk_analytic(Level::C, Level::B, w, &swapped, 2.0, 3.0).unwrap().value;
            assert_c64(p1, p2, 1e-12);
        }
    }

    #[test]
    fn pole_and_prefactor_errors() {
        let coupled = eff(15.0, 1.0, 20.0, 6.0, 0.4);
        assert_eq!(
            r_jk_analytic(Level::B, Level::C, 0.0, &coupled, 1.0, 1.0),
            Err(ResponseError::PoleAtOmegaZero)
        );
        // Decoupled bound state: omega = 0 is regular.
        let dark = eff(20.0, 0.0, 12.0, 0.0, 0.0);
        assert!(r_jk_analytic(Level::B, Level::C, 0.0, &dark, 1.0, 1.0).is_ok());
        let singular = EffectiveParams {
            gamma21: 1.0,
            ..coupled
        };
        assert_eq!(
            r_jk_analytic(Level::B, Level::C, GAMMA, &singular, 1.0, 1.0),
            Err(ResponseError::SingularGammaRatio(1.0))
        );
    }

    #[test]
    fn diagonal_bb_has_positive_ionization_sign() {
        // Im R_bb < 0 for large |omega| (flat-continuum limit -i*pi*D^2).
        let e = eff(20.0, 1.0, 20.0, 8.0, 0.0);
        let r = r_jk_analytic(Level::B, Level::B, 500.0 * GAMMA, &e, 2.0, 2.0).unwrap();
        assert!(r.value.im < 0.0);
        assert_relative_eq!(
            r.value.im,
            -PI * 4.0,
            max_relative = 0.1
        );
    }
}
