//! Two-time correlation `⟨J+(t1+τ) J-(t1)⟩` from the hierarchy and the
//! emission spectrum obtained from it.
//!
//! The correlation follows the hierarchy route: propagate to `t1` (or take
//! the stationary stack), left-multiply every auxiliary matrix by `J-`,
//! propagate the modified stack over `τ`, and read `tr(J+ ρ_0(τ))`.
//!
//! The spectrum is the one-sided transform
//! `S(ω) = Re ∫_0^{τmax} e^{-iωτ} C(τ) w(τ) dτ`, normalized to a unit
//! maximum over the frequency grid. With this sign a free TLS emits at `+ω0`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{HeomError, Result};
use crate::heom::{AdmStack, HeomGenerator};
use crate::model::SimConfig;
use crate::operators::{tls_basis, ZERO};
use crate::propagator::{check_step_size, evolve_stack, steady_state_of, Propagator, SteadyMethod};

/// Where the first operator is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T1Mode {
    /// After the hierarchy has relaxed to its stationary state.
    Equilibrium(SteadyMethod),
    /// At a fixed time after the factorized initial state.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    None,
    /// Multiplies the correlation by `e^{-rate τ}`. Broadens every line by `rate`.
    Exponential(f64),
}

impl Window {
    fn weight(&self, tau: f64) -> f64 {
        match *self {
            Window::None => 1.0,
            Window::Exponential(rate) => (-rate * tau).exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumConfig {
    pub sim: SimConfig,
    pub t1: T1Mode,
    pub tau_max: f64,
    pub dtau: f64,
    pub omega_grid: Vec<f64>,
    pub window: Window,
}

impl SpectrumConfig {
    pub fn new(sim: SimConfig, tau_max: f64, dtau: f64, omega_grid: Vec<f64>) -> Self {
        Self {
            sim,
            t1: T1Mode::Equilibrium(SteadyMethod::NullSpace),
            tau_max,
            dtau,
            omega_grid,
            window: Window::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HeomError::InvalidParameter(m));
        if !(self.dtau.is_finite() && self.dtau > 0.0) {
            return bad(format!("dtau must be positive, got {}", self.dtau));
        }
        if !(self.tau_max.is_finite() && self.tau_max > 0.0) {
            return bad(format!("tau_max must be positive, got {}", self.tau_max));
        }
        if self.tau_max / self.dtau > 1e8 {
            return bad("tau_max / dtau exceeds 1e8 samples".into());
        }
        if self.omega_grid.iter().any(|w| !w.is_finite()) {
            return bad("omega grid contains non-finite values".into());
        }
        if let Window::Exponential(rate) = self.window {
            if !(rate.is_finite() && rate >= 0.0) {
                return bad(format!("window rate must be non-negative, got {rate}"));
            }
        }
        if let T1Mode::Fixed(t1) = self.t1 {
            if !(t1.is_finite() && t1 >= 0.0) {
                return bad(format!("t1 must be non-negative, got {t1}"));
            }
        }
        self.sim.validate()
    }
}

/// `C(τ)` sampled on a uniform grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrelationSeries {
    pub taus: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl CorrelationSeries {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Spectrum on the configured frequency grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub normalized: Vec<f64>,
    pub raw_re: Vec<f64>,
}

impl Spectrum {
    pub fn argmax(&self) -> Option<usize> {
        self.normalized
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }

    /// Interpolated normalized value at `omega`.
    pub fn value_at(&self, omega: f64) -> Option<f64> {
        let i = self.omega.windows(2).position(|w| w[0] <= omega && omega <= w[1])?;
        let (a, b) = (self.omega[i], self.omega[i + 1]);
        let f = if b > a { (omega - a) / (b - a) } else { 0.0 };
        Some(self.normalized[i] * (1.0 - f) + self.normalized[i + 1] * f)
    }

    /// Strict interior local maxima with normalized height above `min_height`.
    pub fn local_maxima(&self, min_height: f64) -> Vec<usize> {
        let s = &self.normalized;
        (1..s.len().saturating_sub(1))
            .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > min_height)
            .collect()
    }
}

/// The stack at `t1` for the configured mode.
pub fn stack_at_t1(g: &HeomGenerator, cfg: &SpectrumConfig) -> Result<AdmStack> {
    match cfg.t1 {
        T1Mode::Equilibrium(method) => Ok(steady_state_of(g, &cfg.sim, method)?.stack),
        T1Mode::Fixed(t1) => {
            let init = g.initial_stack(&cfg.sim.initial_state);
            let steps = ((t1 / cfg.sim.dt) as usize).max(1);
            Ok(evolve_stack(g, init, cfg.sim.dt, t1, steps, false)?.1)
        }
    }
}

/// Steps 2 and 3: apply `J-` to every element of `stack`, propagate, and
/// record `tr(J+ ρ_0(τ))`.
pub fn correlation_from_stack(
    g: &HeomGenerator,
    mut stack: AdmStack,
    tau_max: f64,
    dtau: f64,
) -> Result<CorrelationSeries> {
    check_step_size(g, dtau)?;
    let b = tls_basis();
    stack.left_multiply_all(&b.jminus);
    let n_steps = (tau_max / dtau - 1e-9).ceil().max(0.0) as usize;
    let mut out = CorrelationSeries {
        taus: Vec::with_capacity(n_steps + 1),
        values: Vec::with_capacity(n_steps + 1),
    };
    let read = |s: &AdmStack| (b.jplus * s.physical()).trace();
    out.taus.push(0.0);
    out.values.push(read(&stack));
    let mut prop = Propagator::new(g, stack, dtau);
    for step in 1..=n_steps {
        prop.step();
        if step % 256 == 0 {
            prop.check_stability()?;
        }
        out.taus.push(step as f64 * dtau);
        out.values.push(read(prop.state()));
    }
    prop.check_stability()?;
    Ok(out)
}

/// The full three-step procedure.
pub fn two_time_correlation(cfg: &SpectrumConfig) -> Result<CorrelationSeries> {
    cfg.validate()?;
    let g = HeomGenerator::build(&cfg.sim)?;
    let stack = stack_at_t1(&g, cfg)?;
    correlation_from_stack(&g, stack, cfg.tau_max, cfg.dtau)
}

/// Trapezoidal one-sided transform of the windowed correlation, unnormalized.
pub fn transform(corr: &CorrelationSeries, window: Window, omega: f64) -> f64 {
    let n = corr.len();
    if n < 2 {
        return 0.0;
    }
    let f = |i: usize| {
        let tau = corr.taus[i];
        Complex64::from_polar(window.weight(tau), -omega * tau) * corr.values[i]
    };
    let mut acc = ZERO;
    let mut prev = f(0);
    for i in 1..n {
        let cur = f(i);
        acc += 0.5 * (corr.taus[i] - corr.taus[i - 1]) * (prev + cur);
        prev = cur;
    }
    acc.re
}

/// Emission spectrum over `cfg.omega_grid`, normalized to a unit maximum.
pub fn emission_spectrum(corr: &CorrelationSeries, cfg: &SpectrumConfig) -> Result<Spectrum> {
    if corr.is_empty() {
        return Err(HeomError::InvalidParameter("correlation series is empty".into()));
    }
    if corr.values.iter().all(|z| *z == ZERO) {
        return Err(HeomError::ZeroCorrelation);
    }
    let raw_re: Vec<f64> = cfg
        .omega_grid
        .par_iter()
        .map(|&w| transform(corr, cfg.window, w))
        .collect();
    let peak = raw_re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak.is_finite() && peak > 0.0) {
        return Err(HeomError::InvalidParameter(format!(
            "spectrum maximum {peak} on the grid is not positive; cannot normalize"
        )));
    }
    Ok(Spectrum {
        omega: cfg.omega_grid.clone(),
        normalized: raw_re.iter().map(|s| s / peak).collect(),
        raw_re,
    })
}

/// Evenly spaced grid of `count` points over `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + h * i as f64).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::TlsOperator;

    fn lorentzian_series(omega0: f64, gamma: f64, tau_max: f64, dtau: f64) -> CorrelationSeries {
        let taus = linspace(0.0, tau_max, (tau_max / dtau).round() as usize + 1);
        let values = taus
            .iter()
            .map(|&t| Complex64::from_polar((-gamma * t).exp(), omega0 * t))
            .collect();
        CorrelationSeries { taus, values }
    }

    /// `Re ∫_0^T e^{-i(ω-ω0)τ - Γτ} dτ` in closed form.
    fn lorentzian_exact(omega: f64, omega0: f64, gamma: f64, t: f64) -> f64 {
        let z = Complex64::new(gamma, omega - omega0);
        ((Complex64::from(1.0) - (-z * t).exp()) / z).re
    }

    #[test]
    fn lorentzian_quadrature_matches_closed_form() {
        let (w0, gamma, tau_max) = (1.0, 0.1, 250.0);
        let corr = lorentzian_series(w0, gamma, tau_max, 0.01);
        let grid = linspace(-2.0, 3.0, 501);
        let cfg = SpectrumConfig::new(SimConfig::default(), tau_max, 0.01, grid.clone());
        let spec = emission_spectrum(&corr, &cfg).unwrap();
        let exact: Vec<f64> = grid.iter().map(|&w| lorentzian_exact(w, w0, gamma, tau_max)).collect();
        let peak = exact.iter().copied().fold(f64::MIN, f64::max);
        for (s, e) in spec.normalized.iter().zip(&exact) {
            assert!((s - e / peak).abs() < 1e-4);
        }
        let top = spec.argmax().unwrap();
        assert!((grid[top] - w0).abs() < 1e-9);
        // half width at half maximum equals Γ
        let half = spec.value_at(w0 + gamma).unwrap();
        assert!((half - 0.5).abs() < 1e-3);
    }

    #[test]
    fn free_dipole_correlation() {
        let sim = SimConfig::default();
        let g = HeomGenerator::build(&sim).unwrap();
        let stack = g.initial_stack(&TlsOperator::excited());
        let corr = correlation_from_stack(&g, stack, 20.0, 0.01).unwrap();
        for (t, c) in corr.taus.iter().zip(&corr.values) {
            assert!((c - Complex64::from_polar(1.0, *t)).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_correlation_rejected() {
        let corr = CorrelationSeries { taus: vec![0.0, 0.1], values: vec![ZERO, ZERO] };
        let cfg = SpectrumConfig::new(SimConfig::default(), 0.1, 0.1, vec![0.0, 1.0]);
        assert!(matches!(emission_spectrum(&corr, &cfg), Err(HeomError::ZeroCorrelation)));
    }

    #[test]
    fn exponential_window_broadens() {
        let corr = lorentzian_series(1.0, 0.1, 300.0, 0.01);
        let grid = linspace(0.0, 2.0, 401);
        let mut cfg = SpectrumConfig::new(SimConfig::default(), 300.0, 0.01, grid);
        let bare = emission_spectrum(&corr, &cfg).unwrap();
        cfg.window = Window::Exponential(0.1);
        let windowed = emission_spectrum(&corr, &cfg).unwrap();
        assert!(windowed.value_at(1.2).unwrap() > bare.value_at(1.2).unwrap());
        assert!((windowed.value_at(1.2).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn negative_frequencies_supported() {
        let corr = lorentzian_series(-1.0, 0.2, 150.0, 0.01);
        let grid = linspace(-2.0, 2.0, 81);
        let cfg = SpectrumConfig::new(SimConfig::default(), 150.0, 0.01, grid.clone());
        let spec = emission_spectrum(&corr, &cfg).unwrap();
        assert!((grid[spec.argmax().unwrap()] + 1.0).abs() < 1e-9);
    }
}
