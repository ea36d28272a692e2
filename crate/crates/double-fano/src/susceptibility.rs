//! Probe susceptibility of the driven medium and detuning-grid plumbing.
//!
//! With the control field coupling the metastable state to the same
//! structured continuum, the probe susceptibility is
//!
//! ```text
//! chi(omega) = -(N / eps0) * [ R_bb + (eps2^2/4) R_bc R_cb
//!                  / (omega - Delta_c + i*gamma_cb - (eps2^2/4) R_cc) ]
//! ```
//!
//! in atomic units with hbar = 1 and eps0 = 1/(4 pi). The +i*gamma_cb sign
//! is fixed by absorption positivity and by the steady state of the
//! dynamics module: the coherence decay must act with the same orientation
//! as the control-induced ionization broadening -(eps2^2/4) Im R_cc > 0.

use alloc::vec::Vec;

use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{effective_params, FieldParams, ParamError, SystemParams};
use crate::response::{r_jk_analytic, Level, Method, ResponseError};

/// Vacuum permittivity in atomic units.
pub const EPS0_AU: f64 = 1.0 / (4.0 * PI);

/// Probe detuning grid. Detunings are stored both in units of the total AI
/// width Gamma (the reporting unit of every output artifact) and in atomic
/// units (the math unit); the Gamma-unit values are primary and the atomic
/// values are derived as x * Gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    /// Total AI width used for unit conversion.
    pub gamma: f64,
    /// Detunings in Gamma units, strictly increasing.
    pub omega_over_gamma: Vec<f64>,
    /// Detunings in atomic units, strictly increasing.
    pub omega_values: Vec<f64>,
    /// Half-width of the excluded band around omega = 0, atomic units.
    pub omega_min_exclusion: f64,
}

/// Grid construction failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid gamma must be > 0, got {0}")]
    NonPositiveGamma(f64),
    #[error("grid values must be strictly increasing (violated at index {0})")]
    NotStrictlyIncreasing(usize),
    #[error("grid value {value} Gamma at index {index} lies inside the exclusion band |omega| < {exclusion} Gamma")]
    ExcludedPoint {
        index: usize,
        value: f64,
        exclusion: f64,
    },
}

impl DetuningGrid {
    /// Builds a grid from explicit Gamma-unit detunings, enforcing strict
    /// monotonicity and the exclusion band.
    pub fn new(
        gamma: f64,
        omega_over_gamma: Vec<f64>,
        exclusion_over_gamma: f64,
    ) -> Result<Self, GridError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(GridError::NonPositiveGamma(gamma));
        }
        for (i, pair) in omega_over_gamma.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(GridError::NotStrictlyIncreasing(i + 1));
            }
        }
        for (i, &x) in omega_over_gamma.iter().enumerate() {
            if libm::fabs(x) < exclusion_over_gamma {
                return Err(GridError::ExcludedPoint {
                    index: i,
                    value: x,
                    exclusion: exclusion_over_gamma,
                });
            }
        }
        let omega_values = omega_over_gamma.iter().map(|&x| x * gamma).collect();
        Ok(DetuningGrid {
            gamma,
            omega_over_gamma,
            omega_values,
            omega_min_exclusion: exclusion_over_gamma * gamma,
        })
    }

    /// Evenly spaced grid over [min, max] (Gamma units) with `count` nodes;
    /// nodes falling inside the exclusion band are dropped.
    pub fn linear(
        gamma: f64,
        min_over_gamma: f64,
        max_over_gamma: f64,
        count: usize,
        exclusion_over_gamma: f64,
    ) -> Result<Self, GridError> {
        let mut xs = Vec::with_capacity(count);
        if count == 1 {
            xs.push(min_over_gamma);
        } else if count > 1 {
            let step = (max_over_gamma - min_over_gamma) / (count as f64 - 1.0);
            for i in 0..count {
                xs.push(min_over_gamma + step * i as f64);
            }
        }
        xs.retain(|&x| libm::fabs(x) >= exclusion_over_gamma);
        Self::new(gamma, xs, exclusion_over_gamma)
    }

    pub fn len(&self) -> usize {
        self.omega_over_gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_over_gamma.is_empty()
    }
}

/// One susceptibility sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityPoint {
    /// Probe detuning, atomic units.
    pub omega: f64,
    /// Complex dimensionless susceptibility.
    pub chi: Complex64,
    /// Provenance of the evaluation.
    pub method: Method,
}

/// A spectrum: ordered susceptibility samples plus the generating record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub system: SystemParams,
    pub field: FieldParams,
    pub grid: DetuningGrid,
    pub points: Vec<SusceptibilityPoint>,
}

impl Spectrum {
    /// Imaginary parts in grid order.
    pub fn im_chi(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.chi.im).collect()
    }

    /// Real parts in grid order.
    pub fn re_chi(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.chi.re).collect()
    }
}

/// Susceptibility evaluation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChiError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Response(#[from] ResponseError),
}

/// Susceptibility at a single detuning (atomic units).
///
/// With eps2 = 0 the coupling term is skipped entirely and the result is
/// exactly -(N/eps0) * R_bb.
pub fn chi_at(omega: f64, p: &SystemParams, f: &FieldParams) -> Result<SusceptibilityPoint, ChiError> {
    p.validate()?;
    f.validate()?;
    let eff = effective_params(p)?;
    let scale = -p.density_n / EPS0_AU;
    let r_bb = r_jk_analytic(Level::B, Level::B, omega, &eff, p.d_b, p.d_b)?.value;
    let chi = if f.eps2 == 0.0 {
        scale * r_bb
    } else {
        let r_bc = r_jk_analytic(Level::B, Level::C, omega, &eff, p.d_b, p.d_c)?.value;
        let r_cb = r_jk_analytic(Level::C, Level::B, omega, &eff, p.d_c, p.d_b)?.value;
        let r_cc = r_jk_analytic(Level::C, Level::C, omega, &eff, p.d_c, p.d_c)?.value;
        let drive = 0.25 * f.eps2 * f.eps2;
        let denom = Complex64::new(omega - f.delta_c, p.gamma_cb) - drive * r_cc;
        scale * (r_bb + drive * r_bc * r_cb / denom)
    };
    Ok(SusceptibilityPoint {
        omega,
        chi,
        method: Method::Analytic,
    })
}

/// Vectorized susceptibility over a detuning grid; order preserved.
pub fn spectrum(grid: &DetuningGrid, p: &SystemParams, f: &FieldParams) -> Result<Spectrum, ChiError> {
    let mut points = Vec::with_capacity(grid.len());
    for &omega in &grid.omega_values {
        points.push(chi_at(omega, p, f)?);
    }
    Ok(Spectrum {
        system: *p,
        field: *f,
        grid: grid.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DENSITY_N_AU;

    const GAMMA: f64 = 1e-9;

    fn fig2_like(q_b21_micro: (f64, f64), q_c21_micro: (f64, f64)) -> SystemParams {
        SystemParams {
            q1b: q_b21_micro.0,
            q2b: q_b21_micro.1,
            q1c: q_c21_micro.0,
            q2c: q_c21_micro.1,
            ..SystemParams::default()
        }
    }

    #[test]
    fn eps2_zero_is_exactly_bare_response() {
        let p = fig2_like((19.0, 21.0), (12.0, 28.0));
        let f = FieldParams {
            eps2: 0.0,
            ..FieldParams::default()
        };
        let eff = effective_params(&p).unwrap();
        let r_bb = r_jk_analytic(Level::B, Level::B, 0.3 * GAMMA, &eff, p.d_b, p.d_b)
            .unwrap()
            .value;
        let got = chi_at(0.3 * GAMMA, &p, &f).unwrap().chi;
        assert_eq!(got, -p.density_n / EPS0_AU * r_bb);
    }

    #[test]
    fn weak_control_continuity() {
        // At eps2 = 1e-9 the coupling term stays below 1e-3 of |chi|.
        let p = fig2_like((19.0, 21.0), (12.0, 28.0));
        let weak = FieldParams {
            eps2: 1e-9,
            ..FieldParams::default()
        };
        let off = FieldParams {
            eps2: 0.0,
            ..FieldParams::default()
        };
        for &x in &[-5.0, -0.9, 0.21, 1.4, 8.0] {
            let chi_weak = chi_at(x * GAMMA, &p, &weak).unwrap().chi;
            let chi_off = chi_at(x * GAMMA, &p, &off).unwrap().chi;
            let coupling = (chi_weak - chi_off).norm();
            assert!(
                coupling < 1e-3 * chi_weak.norm(),
                "coupling {coupling:.3e} too large at {x} Gamma"
            );
        }
    }

    #[test]
    fn spectrum_matches_pointwise_calls() {
        let p = fig2_like((19.0, 21.0), (12.0, 28.0));
        let f = FieldParams::default();
        let grid = DetuningGrid::linear(GAMMA, -10.0, 10.0, 101, 1e-3).unwrap();
        let s = spectrum(&grid, &p, &f).unwrap();
        assert_eq!(s.points.len(), grid.len());
        for (pt, &omega) in s.points.iter().zip(&grid.omega_values) {
            let single = chi_at(omega, &p, &f).unwrap();
            assert_eq!(pt.chi, single.chi);
            assert_eq!(pt.omega, omega);
        }
    }

    #[test]
    fn empty_and_tiny_grids() {
        let p = SystemParams::default();
        let f = FieldParams::default();
        let empty = DetuningGrid::new(GAMMA, alloc::vec![], 0.0).unwrap();
        assert!(spectrum(&empty, &p, &f).unwrap().points.is_empty());
        let two = DetuningGrid::new(GAMMA, alloc::vec![-1.0, 2.0], 0.0).unwrap();
        let s = spectrum(&two, &p, &f).unwrap();
        assert_eq!(s.points.len(), 2);
        assert!(s.points[0].omega < s.points[1].omega);
    }

    #[test]
    fn grid_exclusion_and_monotonicity() {
        let g = DetuningGrid::linear(GAMMA, -10.0, 10.0, 4001, 1e-3).unwrap();
        assert!(g.omega_over_gamma.iter().all(|&x| libm::fabs(x) >= 1e-3));
        // 4001 odd linspace over symmetric range contains x = 0: dropped.
        assert_eq!(g.len(), 4000);
        assert!(matches!(
            DetuningGrid::new(GAMMA, alloc::vec![0.5, 0.5], 0.0),
            Err(GridError::NotStrictlyIncreasing(1))
        ));
        assert!(matches!(
            DetuningGrid::new(GAMMA, alloc::vec![0.0001], 0.001),
            Err(GridError::ExcludedPoint { .. })
        ));
        assert!(matches!(
            DetuningGrid::new(-1.0, alloc::vec![1.0], 0.0),
            Err(GridError::NonPositiveGamma(_))
        ));
    }

    #[test]
    fn absorption_background_positive_far_from_resonance() {
        let p = SystemParams::default();
        let f = FieldParams::default();
        // Far enough out that the O(Q^2/w) resonant correction is below 2%.
        let chi = chi_at(3000.0 * GAMMA, &p, &f).unwrap().chi;
        // Flat-continuum limit: Im chi -> (N/eps0) * pi * Db^2.
        let expected = DENSITY_N_AU / EPS0_AU * PI * 4.0;
        assert!(chi.im > 0.0);
        assert!((chi.im - expected).abs() < 0.05 * expected);
    }

    #[test]
    fn validation_errors_propagate() {
        let bad = SystemParams {
            gamma1: -1.0,
            ..SystemParams::default()
        };
        assert!(matches!(
            chi_at(GAMMA, &bad, &FieldParams::default()),
            Err(ChiError::Params(_))
        ));
    }
}
