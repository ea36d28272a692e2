//! Bundled parameter sets demonstrating the multi-window structure.
//!
//! Each preset is a ladder of curves over one varied quantity:
//!
//! * `fig2`: three bound-state asymmetry pairs (Q_b21, Q_c21) at equal
//!   widths (Gamma21 = 0), showing one, two narrow, and two wide windows.
//! * `fig3`: the two-wide-window configuration under a control-amplitude
//!   ladder; separation and width grow with the control field.
//! * `fig4`: identical per-level asymmetries (q_1j = q_2j) under a width
//!   asymmetry ladder; the bound state decouples exactly, so the window is
//!   invariant across the ladder.
//! * `fig5`: width-asymmetric configurations showing how Gamma21 moves the
//!   window separation.
//!
//! All curves share the reference field (weak probe, control amplitude
//! 4e-7 unless swept) and the default medium constants. The bundled
//! analysis grid spans +-1.5 Gamma with an even node count so no sample
//! sits exactly on the bound-state pole at omega = 0.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::params::{EffectiveParams, FieldParams, SystemParams};
use crate::susceptibility::DetuningGrid;

/// One curve of a preset: a complete system/field configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetCurve {
    pub label: String,
    pub system: SystemParams,
    pub field: FieldParams,
}

/// A named family of curves sharing one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub curves: Vec<PresetCurve>,
    pub grid: DetuningGrid,
}

const GAMMA: f64 = 1e-9;

/// Grid used by the window-structure presets: +-1.5 Gamma, 6000 nodes
/// (even count: no node at omega = 0), no exclusion band.
pub fn analysis_grid() -> DetuningGrid {
    DetuningGrid::linear(GAMMA, -1.5, 1.5, 6000, 0.0).expect("static grid is valid")
}

/// Grid used for closed-form certification: +-10 Gamma, 4001 nodes, with
/// the band |omega| < 1e-2 Gamma excluded.
pub fn certification_grid() -> DetuningGrid {
    DetuningGrid::linear(GAMMA, -10.0, 10.0, 4001, 1e-2).expect("static grid is valid")
}

fn system_from(q_b: f64, q_b21: f64, q_c: f64, q_c21: f64, gamma21: f64) -> SystemParams {
    let eff = EffectiveParams {
        q_b,
        q_c,
        q_b21,
        q_c21,
        gamma: GAMMA,
        gamma21,
    };
    SystemParams::from_effective(&eff, &SystemParams::default())
        .expect("preset parameters are valid")
}

fn curve(label: &str, system: SystemParams, field: FieldParams) -> PresetCurve {
    PresetCurve {
        label: String::from(label),
        system,
        field,
    }
}

/// Asymmetry-pair ladder at equal widths.
pub fn fig2() -> Preset {
    let field = FieldParams::default();
    Preset {
        name: String::from("fig2"),
        curves: alloc::vec![
            curve("solid", system_from(20.0, 0.0, 20.0, 0.0, 0.0), field),
            curve("dashed", system_from(20.0, 1.0, 20.0, 2.0, 0.0), field),
            curve("dashdot", system_from(20.0, 1.0, 20.0, 8.0, 0.0), field),
        ],
        grid: analysis_grid(),
    }
}

/// Control-amplitude ladder over the two-wide-window configuration.
pub fn fig3() -> Preset {
    let system = system_from(20.0, 1.0, 20.0, 8.0, 0.0);
    let curves = [2e-7, 4e-7, 8e-7]
        .iter()
        .map(|&eps2| {
            let field = FieldParams {
                eps2,
                ..FieldParams::default()
            };
            PresetCurve {
                label: format!("eps2={eps2:e}"),
                system: system.clone(),
                field,
            }
        })
        .collect();
    Preset {
        name: String::from("fig3"),
        curves,
        grid: analysis_grid(),
    }
}

/// Width-asymmetry ladder with identical per-level asymmetries
/// (q_1j = q_2j = q_j), for which Q_j21 = q_j Gamma21 and the bound state
/// decouples exactly: the spectrum is invariant across the ladder.
pub fn fig4() -> Preset {
    let field = FieldParams::default();
    let curves = [0.0, 0.2, 0.4]
        .iter()
        .map(|&gamma21| {
            let system = system_from(15.0, 15.0 * gamma21, 20.0, 20.0 * gamma21, gamma21);
            PresetCurve {
                label: format!("gamma21={gamma21}"),
                system,
                field,
            }
        })
        .collect();
    Preset {
        name: String::from("fig4"),
        curves,
        grid: analysis_grid(),
    }
}

/// Width-asymmetry ladder with fixed bound-state asymmetries.
pub fn fig5() -> Preset {
    let field = FieldParams::default();
    Preset {
        name: String::from("fig5"),
        curves: alloc::vec![
            curve("solid", system_from(15.0, 0.0, 20.0, 0.0, 0.0), field),
            curve("dashed", system_from(15.0, 1.0, 20.0, 6.0, -0.1), field),
            curve("dashdot", system_from(15.0, 1.0, 20.0, 6.0, -0.4), field),
        ],
        grid: analysis_grid(),
    }
}

/// Preset lookup by CLI name.
pub fn by_name(name: &str) -> Option<Preset> {
    match name {
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        "fig4" => Some(fig4()),
        "fig5" => Some(fig5()),
        _ => None,
    }
}

/// Parameter sets certified by the closed-form acceptance gate: every
/// distinct system of the asymmetry and width ladders.
pub fn certification_sets() -> Vec<(String, SystemParams)> {
    let mut sets = Vec::new();
    for preset in [fig2(), fig5()] {
        for c in preset.curves {
            sets.push((format!("{}_{}", preset.name, c.label), c.system));
        }
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{find_windows, DEFAULT_THRESHOLD_FRACTION};
    use crate::params::effective_params;
    use crate::susceptibility::spectrum;

    fn windows_of(c: &PresetCurve, grid: &DetuningGrid) -> crate::analysis::WindowReport {
        let s = spectrum(grid, &c.system, &c.field).unwrap();
        find_windows(&s, DEFAULT_THRESHOLD_FRACTION).unwrap()
    }

    #[test]
    fn asymmetry_ladder_window_structure() {
        let preset = fig2();
        let reports: Vec<_> = preset
            .curves
            .iter()
            .map(|c| windows_of(c, &preset.grid))
            .collect();
        let counts: Vec<usize> = reports.iter().map(|r| r.windows.len()).collect();
        assert_eq!(counts, alloc::vec![1, 2, 2]);

        let solo = reports[0].windows[0];
        assert!(libm::fabs(solo.center - 0.00228) < 5e-3, "center {}", solo.center);
        assert!(libm::fabs(solo.width - 0.22750) < 5e-3, "width {}", solo.width);
        assert!(solo.depth < 0.01, "depth {}", solo.depth);

        let sep_dashed = reports[1].windows[1].center - reports[1].windows[0].center;
        assert!(libm::fabs(sep_dashed - 0.14535) < 5e-3, "sep {sep_dashed}");

        let w = &reports[2].windows;
        assert!(libm::fabs(w[0].center + 0.25214) < 5e-3, "c0 {}", w[0].center);
        assert!(libm::fabs(w[1].center - 0.25462) < 5e-3, "c1 {}", w[1].center);
        let sep = w[1].center - w[0].center;
        assert!(libm::fabs(sep - 0.50676) < 5e-3, "sep {sep}");
        // Near-symmetric about zero: offset below 2 percent of separation.
        assert!(libm::fabs(w[0].center + w[1].center) < 0.02 * sep);
    }

    #[test]
    fn control_ladder_grows_separation_and_width() {
        let preset = fig3();
        let reports: Vec<_> = preset
            .curves
            .iter()
            .map(|c| windows_of(c, &preset.grid))
            .collect();
        let expected_sep = [0.25100, 0.50676, 1.02117];
        let expected_width = [0.02858, 0.11660, 0.27126];
        for (i, r) in reports.iter().enumerate() {
            assert_eq!(r.windows.len(), 2, "curve {i}");
            let sep = r.windows[1].center - r.windows[0].center;
            let width = 0.5 * (r.windows[0].width + r.windows[1].width);
            assert!(libm::fabs(sep - expected_sep[i]) < 5e-3, "sep {sep} at {i}");
            assert!(
                libm::fabs(width - expected_width[i]) < 5e-3,
                "width {width} at {i}"
            );
        }
    }

    #[test]
    fn identical_asymmetries_decouple_the_bound_state() {
        let preset = fig4();
        for c in &preset.curves {
            let eff = effective_params(&c.system).unwrap();
            assert!(libm::fabs(eff.k_b()) < 1e-12, "K_b {}", eff.k_b());
            assert!(libm::fabs(eff.k_c()) < 1e-12, "K_c {}", eff.k_c());
        }
        // Spectra agree pointwise across the width ladder to rounding noise.
        let base = spectrum(
            &preset.grid,
            &preset.curves[0].system,
            &preset.curves[0].field,
        )
        .unwrap();
        for c in &preset.curves[1..] {
            let other = spectrum(&preset.grid, &c.system, &c.field).unwrap();
            for (a, b) in base.points.iter().zip(&other.points) {
                let dev = (a.chi - b.chi).norm() / a.chi.norm();
                assert!(dev < 1e-9, "dev {dev:.3e} at omega {}", a.omega);
            }
        }
    }

    #[test]
    fn width_ladder_grows_separation() {
        let preset = fig5();
        let reports: Vec<_> = preset
            .curves
            .iter()
            .map(|c| windows_of(c, &preset.grid))
            .collect();
        assert_eq!(reports[0].windows.len(), 1);
        assert_eq!(reports[1].windows.len(), 2);
        assert_eq!(reports[2].windows.len(), 2);
        let sep1 = reports[1].windows[1].center - reports[1].windows[0].center;
        let sep2 = reports[2].windows[1].center - reports[2].windows[0].center;
        assert!(libm::fabs(sep1 - 0.41296) < 5e-3, "sep {sep1}");
        assert!(libm::fabs(sep2 - 0.52366) < 5e-3, "sep {sep2}");
        assert!(sep2 > sep1);
    }

    #[test]
    fn lookup_and_grids() {
        for name in ["fig2", "fig3", "fig4", "fig5"] {
            let p = by_name(name).unwrap();
            assert_eq!(p.name, name);
            assert_eq!(p.grid.len(), 6000);
        }
        assert!(by_name("fig6").is_none());
        assert_eq!(certification_sets().len(), 6);
        let cert = certification_grid();
        // 4001 nominal nodes; the node at zero plus the four neighbors that
        // round just inside the exclusion band are dropped.
        assert_eq!(cert.len(), 3996);
        assert!(cert.omega_over_gamma.iter().all(|&x| libm::fabs(x) >= 1e-2));
    }
}
