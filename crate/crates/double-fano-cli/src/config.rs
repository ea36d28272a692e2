//! Run configuration: JSON schema, defaults, validation, sweep semantics.
//!
//! Every block and every field is optional; an empty document resolves to
//! the reference configuration (figure-scale system, resonant control,
//! +-10 Gamma grid with 4001 nodes and a 1e-3 Gamma exclusion band).
//! Unknown keys anywhere are rejected with a field-path diagnostic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use double_fano::oracle::{LimitOrder, OracleConfig};
use double_fano::params::{effective_params, FieldParams, ParamError, SystemParams};
use double_fano::susceptibility::{DetuningGrid, GridError};

/// Configuration failures; all of them map to the config exit status.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("config: {0}")]
    Param(#[from] ParamError),
    #[error("config: {0}")]
    Grid(#[from] GridError),
    #[error("config: {0}")]
    Invalid(String),
    #[error("cannot read config `{path}`: {message}")]
    Io { path: String, message: String },
}

/// System block mirroring `SystemParams`; absent fields take the
/// reference defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSpec {
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub q1b: Option<f64>,
    pub q2b: Option<f64>,
    pub q1c: Option<f64>,
    pub q2c: Option<f64>,
    pub d_b: Option<f64>,
    pub d_c: Option<f64>,
    pub gamma_cb: Option<f64>,
    pub density_n: Option<f64>,
}

impl SystemSpec {
    pub fn resolve(&self) -> SystemParams {
        let d = SystemParams::default();
        SystemParams {
            gamma1: self.gamma1.unwrap_or(d.gamma1),
            gamma2: self.gamma2.unwrap_or(d.gamma2),
            q1b: self.q1b.unwrap_or(d.q1b),
            q2b: self.q2b.unwrap_or(d.q2b),
            q1c: self.q1c.unwrap_or(d.q1c),
            q2c: self.q2c.unwrap_or(d.q2c),
            d_b: self.d_b.unwrap_or(d.d_b),
            d_c: self.d_c.unwrap_or(d.d_c),
            gamma_cb: self.gamma_cb.unwrap_or(d.gamma_cb),
            density_n: self.density_n.unwrap_or(d.density_n),
        }
    }
}

/// Field block mirroring `FieldParams`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub delta_c: Option<f64>,
}

impl FieldSpec {
    pub fn resolve(&self) -> FieldParams {
        let d = FieldParams::default();
        FieldParams {
            eps1: self.eps1.unwrap_or(d.eps1),
            eps2: self.eps2.unwrap_or(d.eps2),
            delta_c: self.delta_c.unwrap_or(d.delta_c),
        }
    }
}

/// Evenly spaced detuning grid, all values in Gamma units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub min_over_gamma: f64,
    pub max_over_gamma: f64,
    pub count: usize,
    pub exclusion_over_gamma: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            min_over_gamma: -10.0,
            max_over_gamma: 10.0,
            count: 4001,
            exclusion_over_gamma: 1e-3,
        }
    }
}

/// One-parameter sweep: the whole pipeline reruns per value, writing
/// per-value files named `<stem>_<parameter>=<value>.<ext>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Output file names, resolved relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub spectrum: String,
    pub windows: String,
    pub certification: String,
    pub dynamics: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            spectrum: String::from("spectrum.csv"),
            windows: String::from("windows.json"),
            certification: String::from("certification.json"),
            dynamics: String::from("dynamics.json"),
        }
    }
}

/// Oracle overrides; lengths in Gamma units, tolerances dimensionless.
/// Absent fields take the width-scaled defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub delta_e_ladder_over_gamma: Option<Vec<f64>>,
    pub truncation_l_over_gamma: Option<f64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub refinement_floor_over_gamma: Option<f64>,
    pub limit_order: Option<LimitOrder>,
}

impl OracleSpec {
    pub fn resolve(&self, gamma: f64) -> OracleConfig {
        let mut cfg = OracleConfig::default_for(gamma);
        if let Some(ladder) = &self.delta_e_ladder_over_gamma {
            cfg.delta_e_ladder = ladder.iter().map(|x| x * gamma).collect();
        }
        if let Some(l) = self.truncation_l_over_gamma {
            cfg.truncation_l = l * gamma;
        }
        if let Some(t) = self.abs_tol {
            cfg.abs_tol = t;
        }
        if let Some(t) = self.rel_tol {
            cfg.rel_tol = t;
        }
        if let Some(fl) = self.refinement_floor_over_gamma {
            cfg.refinement_floor = fl * gamma;
        }
        if let Some(order) = self.limit_order {
            cfg.limit_order = order;
        }
        cfg
    }
}

/// Closed-form certification toggle; runs on the configured grid when on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificationSpec {
    pub enabled: bool,
}

/// Time-domain cross-check block: detunings sampled by the integrator and
/// compared against the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSpec {
    pub enabled: bool,
    pub span_over_gamma: f64,
    pub n_bins: usize,
    pub omegas_over_gamma: Vec<f64>,
    pub t_max_over_gamma: Option<f64>,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        DynamicsSpec {
            enabled: false,
            span_over_gamma: 1e4,
            n_bins: 2000,
            omegas_over_gamma: Vec::new(),
            t_max_over_gamma: None,
        }
    }
}

/// Complete run configuration as read from disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub field: FieldSpec,
    pub grid: GridSpec,
    pub sweep: Option<SweepSpec>,
    pub outputs: OutputSpec,
    pub oracle: OracleSpec,
    pub certification: CertificationSpec,
    pub dynamics: DynamicsSpec,
}

/// Parameter a sweep may vary. The width asymmetry and the bound-state
/// asymmetries act through the effective parametrization: the microscopic
/// record is rebuilt so the remaining effective parameters stay put.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Eps2,
    DeltaC,
    GammaCb,
    DensityN,
    Gamma21,
    QB21,
    QC21,
}

pub const SWEEPABLE: &str = "eps2, delta_c, gamma_cb, density_n, gamma21, q_b21, q_c21";

impl SweepParameter {
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "eps2" => Some(SweepParameter::Eps2),
            "delta_c" => Some(SweepParameter::DeltaC),
            "gamma_cb" => Some(SweepParameter::GammaCb),
            "density_n" => Some(SweepParameter::DensityN),
            "gamma21" => Some(SweepParameter::Gamma21),
            "q_b21" => Some(SweepParameter::QB21),
            "q_c21" => Some(SweepParameter::QC21),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Eps2 => "eps2",
            SweepParameter::DeltaC => "delta_c",
            SweepParameter::GammaCb => "gamma_cb",
            SweepParameter::DensityN => "density_n",
            SweepParameter::Gamma21 => "gamma21",
            SweepParameter::QB21 => "q_b21",
            SweepParameter::QC21 => "q_c21",
        }
    }

    /// Applies one sweep value, revalidating the outcome.
    pub fn apply(
        self,
        system: &SystemParams,
        field: &FieldParams,
        value: f64,
    ) -> Result<(SystemParams, FieldParams), ConfigError> {
        let mut sys = *system;
        let mut fld = *field;
        match self {
            SweepParameter::Eps2 => fld.eps2 = value,
            SweepParameter::DeltaC => fld.delta_c = value,
            SweepParameter::GammaCb => sys.gamma_cb = value,
            SweepParameter::DensityN => sys.density_n = value,
            SweepParameter::Gamma21 | SweepParameter::QB21 | SweepParameter::QC21 => {
                let mut eff = effective_params(system)?;
                match self {
                    SweepParameter::Gamma21 => eff.gamma21 = value,
                    SweepParameter::QB21 => eff.q_b21 = value,
                    SweepParameter::QC21 => eff.q_c21 = value,
                    _ => unreachable!(),
                }
                sys = SystemParams::from_effective(&eff, system)?;
            }
        }
        sys.validate()?;
        fld.validate()?;
        Ok((sys, fld))
    }
}

/// Fully validated, unit-resolved configuration ready to execute.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub system: SystemParams,
    pub field: FieldParams,
    pub grid: DetuningGrid,
    pub oracle: OracleConfig,
    pub sweep: Option<(SweepParameter, Vec<f64>)>,
    pub outputs: OutputSpec,
    pub certification: bool,
    pub dynamics: DynamicsSpec,
}

/// Parses a configuration document. An empty (or whitespace-only) document
/// yields the full default configuration; schema violations carry the
/// dotted path of the offending key.
pub fn load_config(text: &str) -> Result<RunConfig, ConfigError> {
    if text.trim().is_empty() {
        return Ok(RunConfig::default());
    }
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn strictly_monotone(values: &[f64]) -> bool {
    values.windows(2).all(|p| p[1] > p[0]) || values.windows(2).all(|p| p[1] < p[0])
}

impl RunConfig {
    /// Validates every block and resolves units; all failures here are
    /// configuration errors.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let system = self.system.resolve();
        system.validate()?;
        let eff = effective_params(&system)?;
        let field = self.field.resolve();
        field.validate()?;

        if self.grid.count < 100 {
            return Err(ConfigError::Invalid(format!(
                "grid.count must be at least 100, got {}",
                self.grid.count
            )));
        }
        let grid = DetuningGrid::linear(
            eff.gamma,
            self.grid.min_over_gamma,
            self.grid.max_over_gamma,
            self.grid.count,
            self.grid.exclusion_over_gamma,
        )?;
        if grid.is_empty() {
            return Err(ConfigError::Invalid(String::from(
                "grid is empty after applying the exclusion band",
            )));
        }

        let oracle = self.oracle.resolve(eff.gamma);
        oracle
            .validate(eff.gamma)
            .map_err(|e| ConfigError::Invalid(format!("oracle: {e}")))?;

        let names = [
            &self.outputs.spectrum,
            &self.outputs.windows,
            &self.outputs.certification,
            &self.outputs.dynamics,
        ];
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return Err(ConfigError::Invalid(String::from(
                    "output file names must be non-empty",
                )));
            }
            if names[i + 1..].contains(a) {
                return Err(ConfigError::Invalid(format!(
                    "output file names must be distinct, `{a}` repeats"
                )));
            }
        }

        let sweep = match &self.sweep {
            None => None,
            Some(s) => {
                let param = SweepParameter::from_label(&s.parameter).ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "sweep.parameter `{}` is not sweepable (expected one of {SWEEPABLE})",
                        s.parameter
                    ))
                })?;
                if s.values.is_empty() {
                    return Err(ConfigError::Invalid(String::from(
                        "sweep.values must be non-empty",
                    )));
                }
                if let Some(bad) = s.values.iter().position(|v| !v.is_finite()) {
                    return Err(ConfigError::Invalid(format!(
                        "sweep.values[{bad}] is not finite"
                    )));
                }
                if !strictly_monotone(&s.values) {
                    return Err(ConfigError::Invalid(String::from(
                        "sweep.values must be strictly monotone",
                    )));
                }
                for &v in &s.values {
                    param.apply(&system, &field, v)?;
                }
                Some((param, s.values.clone()))
            }
        };

        if self.dynamics.enabled {
            if self.dynamics.omegas_over_gamma.is_empty() {
                return Err(ConfigError::Invalid(String::from(
                    "dynamics.omegas_over_gamma must be non-empty when dynamics is enabled",
                )));
            }
            if let Some(bad) = self
                .dynamics
                .omegas_over_gamma
                .iter()
                .position(|v| !v.is_finite() || *v == 0.0)
            {
                return Err(ConfigError::Invalid(format!(
                    "dynamics.omegas_over_gamma[{bad}] must be finite and nonzero"
                )));
            }
            if self.dynamics.n_bins < 600 {
                return Err(ConfigError::Invalid(format!(
                    "dynamics.n_bins must be at least 600, got {}",
                    self.dynamics.n_bins
                )));
            }
            if !(self.dynamics.span_over_gamma >= 1e3) {
                return Err(ConfigError::Invalid(format!(
                    "dynamics.span_over_gamma must be at least 1e3, got {}",
                    self.dynamics.span_over_gamma
                )));
            }
        }

        Ok(Resolved {
            system,
            field,
            grid,
            oracle,
            sweep,
            outputs: self.outputs.clone(),
            certification: self.certification.enabled,
            dynamics: self.dynamics.clone(),
        })
    }
}
