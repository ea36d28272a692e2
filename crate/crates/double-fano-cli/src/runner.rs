//! Orchestration: spectra, window reports, certification, and dynamics
//! cross-checks, written through a transactional output session.

use std::path::Path;
use std::thread;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use double_fano::analysis::{find_windows, AnalysisError};
use double_fano::dynamics::{chi_from_dynamics, DynamicsError, DynamicsOpts};
use double_fano::oracle::{certify_analytic, CertificationReport, OracleConfig};
use double_fano::params::{effective_params, FieldParams, SystemParams};
use double_fano::presets::{certification_grid, certification_sets, Preset};
use double_fano::susceptibility::{chi_at, ChiError, DetuningGrid, Spectrum, SusceptibilityPoint};

use crate::config::Resolved;
use crate::output::{json_string, spectrum_csv, OutputError, OutputSession};

/// Failures after configuration was accepted; all map to the numerical
/// exit status.
#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Chi(#[from] ChiError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct RunFlags {
    pub threads: usize,
    pub depth_fraction: f64,
}

/// Evaluates the susceptibility over the grid, fanning grid chunks out
/// over `threads` workers. Points land by index, so the result (and every
/// byte derived from it) is identical for any thread count.
pub fn compute_spectrum(
    grid: &DetuningGrid,
    p: &SystemParams,
    f: &FieldParams,
    threads: usize,
) -> Result<Spectrum, ChiError> {
    if threads <= 1 {
        return double_fano::susceptibility::spectrum(grid, p, f);
    }
    let chunk = grid.omega_values.len().div_ceil(threads).max(1);
    let collected: Vec<Result<Vec<SusceptibilityPoint>, ChiError>> = thread::scope(|scope| {
        let handles: Vec<_> = grid
            .omega_values
            .chunks(chunk)
            .map(|omegas| {
                scope.spawn(move || {
                    omegas
                        .iter()
                        .map(|&omega| chi_at(omega, p, f))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("spectrum worker panicked"))
            .collect()
    });
    let mut points = Vec::with_capacity(grid.omega_values.len());
    for part in collected {
        points.extend(part?);
    }
    Ok(Spectrum {
        system: *p,
        field: *f,
        grid: grid.clone(),
        points,
    })
}

/// Per-value file name: `spectrum.csv` + (`eps2`, 2e-7) ->
/// `spectrum_eps2=2e-7.csv`.
pub fn sweep_file_name(base: &str, label: &str, value: f64) -> String {
    match base.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_{label}={value:?}.{ext}"),
        None => format!("{base}_{label}={value:?}"),
    }
}

/// One certified parameter set, labeled for reading back.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledCertification {
    pub label: String,
    pub report: CertificationReport,
}

/// Summary over every certified set.
#[derive(Debug, Clone, Serialize)]
pub struct CertifySummary {
    pub pass: bool,
    pub max_deviation: f64,
    pub sets: Vec<LabeledCertification>,
}

/// One sampled detuning of the time-domain cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct DynamicsComparisonEntry {
    pub omega_over_gamma: f64,
    pub chi_dynamics: Complex64,
    pub chi_analytic: Complex64,
    pub rel_deviation: f64,
}

fn dynamics_entries(
    r: &Resolved,
    system: &SystemParams,
    field: &FieldParams,
) -> Result<Vec<DynamicsComparisonEntry>, RunnerError> {
    let gamma = effective_params(system)
        .expect("validated in resolve")
        .gamma;
    let opts = DynamicsOpts {
        n_bins: r.dynamics.n_bins,
        span_over_gamma: r.dynamics.span_over_gamma,
        t_max_over_gamma: r.dynamics.t_max_over_gamma,
        ..DynamicsOpts::default()
    };
    let mut entries = Vec::with_capacity(r.dynamics.omegas_over_gamma.len());
    for &x in &r.dynamics.omegas_over_gamma {
        let omega = x * gamma;
        let dynamic = chi_from_dynamics(system, field, omega, &opts)?;
        let exact = chi_at(omega, system, field)?;
        entries.push(DynamicsComparisonEntry {
            omega_over_gamma: x,
            chi_dynamics: dynamic.chi,
            chi_analytic: exact.chi,
            rel_deviation: (dynamic.chi - exact.chi).norm() / exact.chi.norm(),
        });
    }
    Ok(entries)
}

/// Runs the full pipeline for one parameter record, writing files under
/// the given names.
fn run_one(
    session: &mut OutputSession,
    r: &Resolved,
    system: &SystemParams,
    field: &FieldParams,
    names: &[String; 4],
    flags: &RunFlags,
) -> Result<(), RunnerError> {
    let s = compute_spectrum(&r.grid, system, field, flags.threads)?;
    session.write(&names[0], &spectrum_csv(&s))?;
    let windows = find_windows(&s, flags.depth_fraction)?;
    session.write(&names[1], &json_string(&windows)?)?;
    if r.certification {
        let report = certify_analytic(system, &r.grid, &r.oracle);
        session.write(&names[2], &json_string(&report)?)?;
    }
    if r.dynamics.enabled {
        let entries = dynamics_entries(r, system, field)?;
        session.write(&names[3], &json_string(&entries)?)?;
    }
    Ok(())
}

/// Executes a resolved configuration (the `run` subcommand).
pub fn execute_run(r: &Resolved, out_dir: &Path, flags: &RunFlags) -> Result<(), RunnerError> {
    let mut session = OutputSession::new(out_dir)?;
    let base = [
        r.outputs.spectrum.clone(),
        r.outputs.windows.clone(),
        r.outputs.certification.clone(),
        r.outputs.dynamics.clone(),
    ];
    match &r.sweep {
        None => run_one(&mut session, r, &r.system, &r.field, &base, flags)?,
        Some((param, values)) => {
            for &v in values {
                let (system, field) = param
                    .apply(&r.system, &r.field, v)
                    .expect("validated in resolve");
                let names = base
                    .clone()
                    .map(|name| sweep_file_name(&name, param.label(), v));
                run_one(&mut session, r, &system, &field, &names, flags)?;
            }
        }
    }
    session.commit();
    Ok(())
}

/// Executes a bundled figure preset: per-curve spectrum and window files
/// on the preset grid.
pub fn execute_preset(preset: &Preset, out_dir: &Path, flags: &RunFlags) -> Result<(), RunnerError> {
    let mut session = OutputSession::new(out_dir)?;
    for curve in &preset.curves {
        let s = compute_spectrum(&preset.grid, &curve.system, &curve.field, flags.threads)?;
        session.write(&format!("spectrum_{}.csv", curve.label), &spectrum_csv(&s))?;
        let windows = find_windows(&s, flags.depth_fraction)?;
        session.write(
            &format!("windows_{}.json", curve.label),
            &json_string(&windows)?,
        )?;
    }
    session.commit();
    Ok(())
}

/// Certifies the closed form on every bundled parameter set (the `certify`
/// subcommand and the `certify` preset).
pub fn execute_certify_bundled(out_dir: &Path, flags: &RunFlags) -> Result<(), RunnerError> {
    let _ = flags;
    let grid = certification_grid();
    let mut sets = Vec::new();
    let mut pass = true;
    let mut max_deviation = 0.0f64;
    for (label, system) in certification_sets() {
        let gamma = effective_params(&system).expect("presets are valid").gamma;
        let report = certify_analytic(&system, &grid, &OracleConfig::default_for(gamma));
        pass &= report.pass;
        max_deviation = max_deviation.max(report.max_deviation);
        sets.push(LabeledCertification { label, report });
    }
    let summary = CertifySummary {
        pass,
        max_deviation,
        sets,
    };
    let mut session = OutputSession::new(out_dir)?;
    session.write("certification.json", &json_string(&summary)?)?;
    session.commit();
    Ok(())
}

/// Certifies the configured system on the configured grid (the `certify`
/// subcommand with `--config`).
pub fn execute_certify_config(
    r: &Resolved,
    out_dir: &Path,
    _flags: &RunFlags,
) -> Result<(), RunnerError> {
    let report = certify_analytic(&r.system, &r.grid, &r.oracle);
    let summary = CertifySummary {
        pass: report.pass,
        max_deviation: report.max_deviation,
        sets: vec![LabeledCertification {
            label: String::from("config"),
            report,
        }],
    };
    let mut session = OutputSession::new(out_dir)?;
    session.write(&r.outputs.certification, &json_string(&summary)?)?;
    session.commit();
    Ok(())
}
