//! Physical parameters of the environment and the simulation controls.
//!
//! All quantities are in units of the TLS frequency ω0 with ħ = 1.

use std::f64::consts::PI;

use crate::error::{HeomError, Result};
use crate::operators::{tls_basis, CouplingMode, TlsOperator, I};

/// The three real Ornstein–Uhlenbeck processes of the stochastic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseLabel {
    /// Dephasing noise Ω(t), couples through J0.
    Omega,
    /// Real part ξ1(t) of the relaxation noise, couples through J+ + J-.
    Xi1,
    /// Imaginary part ξ2(t) of the relaxation noise, couples through i(J+ - J-).
    Xi2,
}

impl NoiseLabel {
    pub const ALL: [NoiseLabel; 3] = [NoiseLabel::Omega, NoiseLabel::Xi1, NoiseLabel::Xi2];

    pub fn name(self) -> &'static str {
        match self {
            NoiseLabel::Omega => "omega",
            NoiseLabel::Xi1 => "xi1",
            NoiseLabel::Xi2 => "xi2",
        }
    }

    /// The TLS operator the process multiplies in the interaction Hamiltonian.
    pub fn coupling_operator(self) -> TlsOperator {
        let b = tls_basis();
        match self {
            NoiseLabel::Omega => b.j0,
            NoiseLabel::Xi1 => b.jplus + b.jminus,
            NoiseLabel::Xi2 => I * (b.jplus - b.jminus),
        }
    }
}

/// A stationary OU process with correlation `Δ² e^{-γ|τ|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuProcess {
    pub label: NoiseLabel,
    /// Coupling amplitude Δ (the process standard deviation).
    pub delta: f64,
    /// Inverse correlation time γ.
    pub gamma: f64,
    pub enabled: bool,
}

impl OuProcess {
    pub fn new(label: NoiseLabel, delta: f64, gamma: f64) -> Self {
        Self { label, delta, gamma, enabled: true }
    }

    pub fn from_delta_sq(label: NoiseLabel, delta_sq: f64, gamma: f64) -> Self {
        Self::new(label, delta_sq.max(0.0).sqrt(), gamma)
    }

    pub fn disabled(label: NoiseLabel) -> Self {
        Self { label, delta: 0.0, gamma: 1.0, enabled: false }
    }

    pub fn delta_sq(&self) -> f64 {
        self.delta * self.delta
    }

    /// Two-time correlation `⟨ν(t)ν(t+τ)⟩`.
    pub fn correlation(&self, tau: f64) -> f64 {
        self.delta_sq() * (-self.gamma * tau.abs()).exp()
    }

    /// True when the process is enabled and actually couples to the TLS.
    pub fn is_active(&self) -> bool {
        self.enabled && self.delta != 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(HeomError::InvalidParameter(format!(
                "field.{}: delta must be finite and non-negative, got {}",
                self.label.name(),
                self.delta
            )));
        }
        if self.enabled && !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(HeomError::InvalidParameter(format!(
                "field.{}: gamma must be positive, got {}",
                self.label.name(),
                self.gamma
            )));
        }
        Ok(())
    }
}

/// The three field processes, in the fixed order Ω, ξ1, ξ2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub omega: OuProcess,
    pub xi1: OuProcess,
    pub xi2: OuProcess,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self::off()
    }
}

impl FieldParams {
    pub fn off() -> Self {
        Self {
            omega: OuProcess::disabled(NoiseLabel::Omega),
            xi1: OuProcess::disabled(NoiseLabel::Xi1),
            xi2: OuProcess::disabled(NoiseLabel::Xi2),
        }
    }

    /// All three processes with a common γ and Δ².
    pub fn uniform(gamma: f64, delta_sq: f64) -> Self {
        Self {
            omega: OuProcess::from_delta_sq(NoiseLabel::Omega, delta_sq, gamma),
            xi1: OuProcess::from_delta_sq(NoiseLabel::Xi1, delta_sq, gamma),
            xi2: OuProcess::from_delta_sq(NoiseLabel::Xi2, delta_sq, gamma),
        }
    }

    pub fn processes(&self) -> [OuProcess; 3] {
        [self.omega, self.xi1, self.xi2]
    }

    pub fn get_mut(&mut self, label: NoiseLabel) -> &mut OuProcess {
        match label {
            NoiseLabel::Omega => &mut self.omega,
            NoiseLabel::Xi1 => &mut self.xi1,
            NoiseLabel::Xi2 => &mut self.xi2,
        }
    }

    pub fn any_enabled(&self) -> bool {
        self.processes().iter().any(|p| p.enabled)
    }
}

/// High-temperature Drude bath, `J(ω) = c_JD βω / (γ_B² + ω²)`, `c_JD = γ_B Δ_B² / π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    pub delta_sq: f64,
    pub gamma: f64,
    pub beta: f64,
    pub mode: CouplingMode,
    pub enabled: bool,
}

impl Default for BathParams {
    fn default() -> Self {
        Self::off()
    }
}

impl BathParams {
    pub fn new(gamma: f64, delta_sq: f64, beta: f64, mode: CouplingMode) -> Self {
        Self { delta_sq, gamma, beta, mode, enabled: true }
    }

    pub fn off() -> Self {
        Self { delta_sq: 0.0, gamma: 1.0, beta: 0.0, mode: CouplingMode::Full, enabled: false }
    }

    pub fn with_mode(mut self, mode: CouplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta_sq.sqrt()
    }

    pub fn c_jd(&self) -> f64 {
        self.gamma * self.delta_sq / PI
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.c_jd() * self.beta * omega / (self.gamma * self.gamma + omega * omega)
    }

    /// The high-temperature expansion needs `β γ_B ≪ 1`; flagged from 0.5 on.
    pub fn ht_validity_violated(&self) -> bool {
        self.enabled && self.beta * self.gamma >= 0.5
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HeomError::InvalidParameter(msg));
        if !(self.delta_sq.is_finite() && self.delta_sq >= 0.0) {
            return bad(format!("bath.delta_sq must be non-negative, got {}", self.delta_sq));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("bath.beta must be non-negative, got {}", self.beta));
        }
        if self.enabled && !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("bath.gamma must be positive, got {}", self.gamma));
        }
        if self.ht_validity_violated() {
            log::warn!(
                "beta*gamma_B = {:.3} is outside the high-temperature regime",
                self.beta * self.gamma
            );
        }
        Ok(())
    }
}

/// Default cap on the number of auxiliary density matrices.
pub const DEFAULT_MAX_INDICES: usize = 2_000_000;

/// Everything needed to build and propagate one hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub omega0: f64,
    pub bath: BathParams,
    pub field: FieldParams,
    /// Hierarchy truncation depth L.
    pub depth: usize,
    pub dt: f64,
    pub t_max: f64,
    pub steady_tol: f64,
    pub initial_state: TlsOperator,
    /// Rescale auxiliary matrices so raising and lowering couplings are balanced.
    pub rescale: bool,
    /// Integration steps between recorded samples.
    pub stride: usize,
    pub max_indices: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            bath: BathParams::off(),
            field: FieldParams::off(),
            depth: 8,
            dt: 0.01,
            t_max: 500.0,
            steady_tol: 1e-9,
            initial_state: TlsOperator::excited(),
            rescale: true,
            stride: 10,
            max_indices: DEFAULT_MAX_INDICES,
        }
    }
}

impl SimConfig {
    pub fn with_bath(mut self, bath: BathParams) -> Self {
        self.bath = bath;
        self
    }

    pub fn with_field(mut self, field: FieldParams) -> Self {
        self.field = field;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_initial_state(mut self, rho: TlsOperator) -> Self {
        self.initial_state = rho;
        self
    }

    pub fn with_mode(mut self, mode: CouplingMode) -> Self {
        self.bath.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HeomError::InvalidParameter(msg));
        if !(self.omega0.is_finite()) {
            return bad(format!("omega0 must be finite, got {}", self.omega0));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return bad(format!("t_max must be non-negative, got {}", self.t_max));
        }
        if !(self.steady_tol.is_finite() && self.steady_tol > 0.0) {
            return bad(format!("steady_tol must be positive, got {}", self.steady_tol));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !self.initial_state.is_density_matrix(1e-9) {
            return bad("initial_state is not a valid density matrix".into());
        }
        self.bath.validate()?;
        for p in self.field.processes() {
            p.validate()?;
        }
        Ok(())
    }

    /// Sets a scalar parameter addressed by a dotted path.
    ///
    /// Besides the plain paths (`bath.gamma`, `field.xi1.delta_sq`, ...) two
    /// aggregate axes are understood: `field.gamma_common` and
    /// `field.delta_sq_common` set the value on all three processes at once.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<()> {
        let parts: Vec<&str> = path.split('.').collect();
        match parts.as_slice() {
            ["omega0"] => self.omega0 = value,
            ["dt"] => self.dt = value,
            ["t_max"] => self.t_max = value,
            ["steady_tol"] => self.steady_tol = value,
            ["depth"] => self.depth = non_negative_int(path, value)?,
            ["bath", "gamma"] => self.bath.gamma = value,
            ["bath", "delta_sq"] => self.bath.delta_sq = value,
            ["bath", "beta"] => self.bath.beta = value,
            ["field", "gamma_common"] => {
                for label in NoiseLabel::ALL {
                    self.field.get_mut(label).gamma = value;
                }
            }
            ["field", "delta_sq_common"] => {
                for label in NoiseLabel::ALL {
                    self.field.get_mut(label).delta = value.max(0.0).sqrt();
                }
            }
            ["field", name, key] => {
                let label = NoiseLabel::ALL
                    .into_iter()
                    .find(|l| l.name() == *name)
                    .ok_or_else(|| unknown(path))?;
                let p = self.field.get_mut(label);
                match *key {
                    "gamma" => p.gamma = value,
                    "delta_sq" => p.delta = value.max(0.0).sqrt(),
                    "delta" => p.delta = value,
                    _ => return Err(unknown(path)),
                }
            }
            _ => return Err(unknown(path)),
        }
        Ok(())
    }
}

fn unknown(path: &str) -> HeomError {
    HeomError::InvalidParameter(format!("`{path}` does not address a scalar parameter"))
}

fn non_negative_int(path: &str, value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(HeomError::InvalidParameter(format!("`{path}` must be a non-negative integer")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drude_constants() {
        let bath = BathParams::new(0.2, 0.4, 0.0, CouplingMode::Full);
        assert!((bath.c_jd() - 0.2 * 0.4 / PI).abs() < 1e-15);
        assert!((bath.c_jd() - 0.025_464_790_894_703_25).abs() < 1e-12);
        assert_eq!(bath.spectral_density(1.0), 0.0);
    }

    #[test]
    fn ht_flag() {
        assert!(!BathParams::new(0.2, 0.4, 0.32, CouplingMode::Full).ht_validity_violated());
        assert!(BathParams::new(4.0, 0.04, 0.2, CouplingMode::Full).ht_validity_violated());
    }

    #[test]
    fn set_param_paths() {
        let mut cfg = SimConfig::default().with_field(FieldParams::uniform(0.2, 0.4));
        cfg.set_param("field.gamma_common", 0.7).unwrap();
        assert!(cfg.field.processes().iter().all(|p| p.gamma == 0.7));
        cfg.set_param("field.xi2.delta_sq", 0.09).unwrap();
        assert!((cfg.field.xi2.delta - 0.3).abs() < 1e-15);
        cfg.set_param("bath.beta", 0.32).unwrap();
        assert_eq!(cfg.bath.beta, 0.32);
        assert!(cfg.set_param("bath.cutofff", 1.0).is_err());
        assert!(cfg.set_param("depth", 2.5).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut cfg = SimConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.field.xi1 = OuProcess::new(NoiseLabel::Xi1, 0.5, -1.0);
        assert!(cfg.validate().is_err());
        let cfg = SimConfig::default().with_initial_state(TlsOperator::identity());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn field_coupling_operators_are_hermitian() {
        for label in NoiseLabel::ALL {
            assert_eq!(label.coupling_operator().hermiticity_defect(), 0.0);
        }
    }
}
