//! TOML run configuration.
//!
//! ```toml
//! [system]
//! omega0 = 1.0
//! initial_state = "excited"   # excited | ground | plus
//!
//! [bath]                      # omit or leave empty to switch the bath off
//! gamma = 0.2
//! delta_sq = 0.4
//! beta = 0.32
//!
//! [field]                     # omit or leave empty to switch the field off
//! gamma_common = 0.4          # applies to omega, xi1 and xi2
//! delta_sq_common = 0.8
//! [field.xi2]                 # per-process values win over the common ones
//! delta_sq = 0.0
//!
//! [hierarchy]
//! depth = 16
//! depth_full = 22             # optional, depth for full dipole coupling
//! ```
//!
//! Remaining sections (`integrator`, `spectrum`, `mc`) have defaults for
//! every key. Unknown keys are rejected.

use std::path::Path;

use heom_core::model::DEFAULT_MAX_INDICES;
use heom_core::propagator::SteadyMethod;
use heom_core::spectrum::{linspace, SpectrumConfig, T1Mode, Window};
use heom_core::{
    BathParams, CouplingMode, FieldParams, MarkovParams, McConfig, NoiseLabel, OuProcess,
    SimConfig, TlsOperator,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub bath: BathSection,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default)]
    pub hierarchy: HierarchySection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub mc: McSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub omega0: f64,
    pub initial_state: InitialState,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { omega0: 1.0, initial_state: InitialState::Excited }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Excited,
    Ground,
    Plus,
}

impl InitialState {
    pub fn rho(self) -> TlsOperator {
        match self {
            InitialState::Excited => TlsOperator::excited(),
            InitialState::Ground => TlsOperator::ground(),
            InitialState::Plus => TlsOperator::plus_state(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_sq: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_common: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_sq_common: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<ProcessSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi1: Option<ProcessSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi2: Option<ProcessSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchySection {
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_full: Option<usize>,
    pub rescale: bool,
    pub max_indices: usize,
}

impl Default for HierarchySection {
    fn default() -> Self {
        Self { depth: 16, depth_full: None, rescale: true, max_indices: DEFAULT_MAX_INDICES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethodName {
    NullSpace,
    Propagate,
}

impl From<SteadyMethodName> for SteadyMethod {
    fn from(m: SteadyMethodName) -> Self {
        match m {
            SteadyMethodName::NullSpace => SteadyMethod::NullSpace,
            SteadyMethodName::Propagate => SteadyMethod::Propagate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    /// Horizon of `evolve`, `mc` and `lindblad` runs.
    pub t_max: f64,
    /// Steps between written samples.
    pub stride: usize,
    pub steady_method: SteadyMethodName,
    pub steady_tol: f64,
    /// Give-up time for propagation to the steady state.
    pub steady_t_max: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 50.0,
            stride: 10,
            steady_method: SteadyMethodName::Propagate,
            steady_tol: 1e-9,
            steady_t_max: 500.0,
        }
    }
}

/// `"equilibrium"` or a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum T1Spec {
    Time(f64),
    Named(T1Name),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T1Name {
    Equilibrium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub t1: T1Spec,
    pub tau_max: f64,
    pub dtau: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_count: usize,
    /// Exponential window rate; 0 disables the window.
    pub window_rate: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            t1: T1Spec::Named(T1Name::Equilibrium),
            tau_max: 200.0,
            dtau: 0.02,
            omega_min: -2.0,
            omega_max: 3.0,
            omega_count: 501,
            window_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n_traj: usize,
    pub dt: f64,
    pub stride: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self { n_traj: 20_000, dt: 0.01, stride: 10 }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// Bath parameters for `mode`; disabled when the section is empty.
    pub fn bath(&self, mode: CouplingMode) -> Result<BathParams, CliError> {
        let b = &self.bath;
        match (b.gamma, b.delta_sq) {
            (None, None) if b.beta.is_none() => Ok(BathParams::off().with_mode(mode)),
            (Some(g), Some(d)) => Ok(BathParams::new(g, d, b.beta.unwrap_or(0.0), mode)),
            _ => Err(CliError::Config(
                "bath: gamma and delta_sq must be given together".into(),
            )),
        }
    }

    pub fn field(&self) -> Result<FieldParams, CliError> {
        let f = &self.field;
        let mut out = FieldParams::off();
        for (label, section) in [
            (NoiseLabel::Omega, f.omega),
            (NoiseLabel::Xi1, f.xi1),
            (NoiseLabel::Xi2, f.xi2),
        ] {
            let s = section.unwrap_or_default();
            let gamma = s.gamma.or(f.gamma_common);
            let delta_sq = s.delta_sq.or(f.delta_sq_common);
            *out.get_mut(label) = match (gamma, delta_sq) {
                (None, None) => OuProcess::disabled(label),
                (Some(g), Some(d)) => OuProcess::from_delta_sq(label, d, g),
                _ => {
                    return Err(CliError::Config(format!(
                        "field.{}: gamma and delta_sq must both be set",
                        label.name()
                    )))
                }
            };
        }
        Ok(out)
    }

    pub fn depth(&self, mode: CouplingMode) -> usize {
        match mode {
            CouplingMode::Rwa => self.hierarchy.depth,
            CouplingMode::Full => self.hierarchy.depth_full.unwrap_or(self.hierarchy.depth),
        }
    }

    pub fn sim(&self, mode: CouplingMode) -> Result<SimConfig, CliError> {
        let mut sim = SimConfig::default()
            .with_bath(self.bath(mode)?)
            .with_field(self.field()?)
            .with_depth(self.depth(mode))
            .with_dt(self.integrator.dt)
            .with_t_max(self.integrator.t_max)
            .with_initial_state(self.system.initial_state.rho());
        sim.omega0 = self.system.omega0;
        sim.stride = self.integrator.stride;
        sim.steady_tol = self.integrator.steady_tol;
        sim.rescale = self.hierarchy.rescale;
        sim.max_indices = self.hierarchy.max_indices;
        sim.validate()?;
        Ok(sim)
    }

    /// Same as [`RunConfig::sim`] with the steady-state give-up time as horizon.
    pub fn steady_sim(&self, mode: CouplingMode) -> Result<SimConfig, CliError> {
        let mut sim = self.sim(mode)?;
        sim.t_max = self.integrator.steady_t_max;
        Ok(sim)
    }

    pub fn markov(&self) -> Result<MarkovParams, CliError> {
        Ok(MarkovParams::new(self.system.omega0, self.bath(CouplingMode::Full)?, self.field()?))
    }

    pub fn steady_method(&self) -> SteadyMethod {
        self.integrator.steady_method.into()
    }

    pub fn spectrum(&self, mode: CouplingMode) -> Result<SpectrumConfig, CliError> {
        let s = &self.spectrum;
        let mut cfg = SpectrumConfig::new(
            self.steady_sim(mode)?,
            s.tau_max,
            s.dtau,
            linspace(s.omega_min, s.omega_max, s.omega_count),
        );
        cfg.t1 = match s.t1 {
            T1Spec::Named(T1Name::Equilibrium) => T1Mode::Equilibrium(self.steady_method()),
            T1Spec::Time(t) => T1Mode::Fixed(t),
        };
        cfg.window = if s.window_rate > 0.0 { Window::Exponential(s.window_rate) } else { Window::None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mc(&self, seed: u64) -> Result<McConfig, CliError> {
        let mut cfg = McConfig::new(self.field()?, self.integrator.t_max, self.mc.n_traj, seed);
        cfg.omega0 = self.system.omega0;
        cfg.rho0 = self.system.initial_state.rho();
        cfg.dt = self.mc.dt;
        cfg.stride = self.mc.stride;
        Ok(cfg)
    }

    /// Structural and physical checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        let bath = self.bath(CouplingMode::Full)?;
        bath.validate()?;
        for p in self.field()?.processes() {
            p.validate()?;
        }
        if self.spectrum.omega_count < 2 {
            return Err(CliError::Config("spectrum.omega_count must be at least 2".into()));
        }
        if !(self.spectrum.omega_min < self.spectrum.omega_max) {
            return Err(CliError::Config("spectrum.omega_min must be below omega_max".into()));
        }
        self.sim(CouplingMode::Rwa)?;
        Ok(())
    }
}

/// Parses a file and applies `key=value` overrides on the document tree.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    RunConfig::from_table(table)
}

/// Applies one `dotted.key=value` override. The value is read as a TOML
/// literal when possible and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key '{key}' is malformed")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let (last, parents) = parts.split_last().expect("split produced at least one part");
    let mut node = table;
    for p in parents {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key '{key}': '{p}' is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Recovers the configuration echoed in the comment header of an output file.
pub fn config_from_header(csv: &str) -> Result<RunConfig, CliError> {
    use crate::output::{CONFIG_BEGIN, CONFIG_END};
    let mut inside = false;
    let mut found = false;
    let mut text = String::new();
    for line in csv.lines().take_while(|l| l.starts_with('#')) {
        if line == CONFIG_BEGIN {
            inside = true;
            found = true;
        } else if line == CONFIG_END {
            inside = false;
        } else if inside {
            text.push_str(line.strip_prefix("# ").unwrap_or(&line[1..]));
            text.push('\n');
        }
    }
    if !found {
        return Err(CliError::Config("output has no configuration header".into()));
    }
    RunConfig::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_uses_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(!cfg.field().unwrap().any_enabled());
        assert!(!cfg.bath(CouplingMode::Rwa).unwrap().enabled);
    }

    #[test]
    fn common_field_values_apply_to_every_process() {
        let cfg = RunConfig::from_toml_str(
            "[field]\ngamma_common = 0.4\ndelta_sq_common = 0.8\n[field.xi2]\ndelta_sq = 0.2\n",
        )
        .unwrap();
        let f = cfg.field().unwrap();
        assert!((f.omega.delta_sq() - 0.8).abs() < 1e-15);
        assert!((f.xi2.delta_sq() - 0.2).abs() < 1e-15);
        assert_eq!(f.xi2.gamma, 0.4);
    }

    #[test]
    fn half_specified_bath_is_an_error() {
        let err = RunConfig::from_toml_str("[bath]\ngamma = 0.2\n").unwrap_err();
        assert!(err.to_string().contains("delta_sq"));
    }

    #[test]
    fn overrides_parse_numbers_and_create_tables() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "bath.gamma=0.2").unwrap();
        apply_override(&mut t, "bath.delta_sq = 1").unwrap();
        apply_override(&mut t, "system.initial_state=plus").unwrap();
        let cfg = RunConfig::from_table(t).unwrap();
        assert_eq!(cfg.bath.delta_sq, Some(1.0));
        assert_eq!(cfg.system.initial_state, InitialState::Plus);
        assert!(apply_override(&mut toml::Table::new(), "novalue").is_err());
        assert!(apply_override(&mut toml::Table::new(), "a..b=1").is_err());
    }

    #[test]
    fn t1_accepts_name_or_time() {
        let a = RunConfig::from_toml_str("[spectrum]\nt1 = \"equilibrium\"\n").unwrap();
        assert_eq!(a.spectrum.t1, T1Spec::Named(T1Name::Equilibrium));
        let b = RunConfig::from_toml_str("[spectrum]\nt1 = 150.0\n").unwrap();
        assert_eq!(b.spectrum.t1, T1Spec::Time(150.0));
    }
}
