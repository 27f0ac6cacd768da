//! Markovian baseline: Lindblad equation with the high-temperature Drude
//! bath, its Lamb shift, and field dissipators weighted by the integrated
//! noise correlations `K_ν(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{HeomError, Result};
use crate::model::{BathParams, FieldParams, OuProcess};
use crate::operators::{tls_basis, TlsOperator, I};
use crate::propagator::{Rk4, Trajectory};
use crate::spectrum::CorrelationSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// Rotating with `H_A`; only the Lamb shift enters the commutator.
    Interaction,
    /// Lab frame; `H_A + H_LS` enters the commutator.
    Schroedinger,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams {
    pub omega0: f64,
    pub bath: BathParams,
    pub field: FieldParams,
    pub picture: Picture,
}

impl MarkovParams {
    pub fn new(omega0: f64, bath: BathParams, field: FieldParams) -> Self {
        Self { omega0, bath, field, picture: Picture::Schroedinger }
    }

    pub fn from_sim(sim: &crate::model::SimConfig) -> Self {
        Self::new(sim.omega0, sim.bath, sim.field)
    }

    /// Downward and upward bath rates `2πJ(ω0)(n+1)` and `2πJ(ω0)n`.
    pub fn bath_rates(&self) -> (f64, f64) {
        if !self.bath.enabled {
            return (0.0, 0.0);
        }
        let b = &self.bath;
        let w = self.omega0;
        let x = b.beta * w;
        // J(ω)·n_B(ω) = c_JD/(γ²+ω²) · x/(e^x - 1), finite as β → 0
        let bose_factor = if x == 0.0 { 1.0 } else { x / x.exp_m1() };
        let j_n = b.c_jd() / (b.gamma * b.gamma + w * w) * bose_factor;
        let j = b.spectral_density(w);
        (2.0 * PI * (j_n + j), 2.0 * PI * j_n)
    }

    /// `(K_Ω(t), K_ξ(t))` with `K_ξ = K_ξ1 + K_ξ2`.
    pub fn field_weights(&self, t: f64) -> (f64, f64) {
        let f = &self.field;
        (k_nu(t, &f.omega), k_nu(t, &f.xi1) + k_nu(t, &f.xi2))
    }

    /// `H_LS = S(ω0) J+J- + S(-ω0) J-J+`, zero without a bath.
    pub fn lamb_shift_hamiltonian(&self) -> Result<TlsOperator> {
        if !self.bath.enabled {
            return Ok(TlsOperator::zero());
        }
        let b = tls_basis();
        let up = lamb_shift_ht(self.omega0, &self.bath)?;
        let down = lamb_shift_ht(-self.omega0, &self.bath)?;
        Ok(up * (b.jplus * b.jminus) + down * (b.jminus * b.jplus))
    }
}

/// `K_ν(t) = ∫_0^t Δ² e^{-γτ} dτ = (Δ²/γ)(1 - e^{-γt})`.
pub fn k_nu(t: f64, proc: &OuProcess) -> f64 {
    if !proc.enabled || proc.delta == 0.0 {
        return 0.0;
    }
    proc.delta_sq() / proc.gamma * (-(-proc.gamma * t).exp_m1())
}

/// High-temperature Drude Lamb shift
/// `S(ω) = c_JD [2πω + βγ_B(2ω ln(γ_B/|ω|) - πγ_B)] / [2γ_B(γ_B² + ω²)]`.
pub fn lamb_shift_ht(omega: f64, bath: &BathParams) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(HeomError::InvalidParameter(format!(
            "Lamb shift is undefined at omega = {omega}"
        )));
    }
    let g = bath.gamma;
    let num = 2.0 * PI * omega + bath.beta * g * (2.0 * omega * (g / omega.abs()).ln() - PI * g);
    Ok(bath.c_jd() * num / (2.0 * g * (g * g + omega * omega)))
}

/// `L ρ L† - ½{L†L, ρ}`.
fn dissipator(l: &TlsOperator, rho: &TlsOperator) -> TlsOperator {
    let ld = l.dagger();
    let ll = ld * *l;
    *l * *rho * ld - 0.5 * (ll * *rho + *rho * ll)
}

/// Precomputed pieces of the Markovian generator.
#[derive(Debug, Clone)]
struct MarkovRhs {
    params: MarkovParams,
    hamiltonian: TlsOperator,
    down: f64,
    up: f64,
}

impl MarkovRhs {
    fn new(params: &MarkovParams) -> Result<Self> {
        params.bath.validate()?;
        for p in params.field.processes() {
            p.validate()?;
        }
        let mut hamiltonian = params.lamb_shift_hamiltonian()?;
        if params.picture == Picture::Schroedinger {
            hamiltonian = hamiltonian + params.omega0 * tls_basis().j0;
        }
        let (down, up) = params.bath_rates();
        Ok(Self { params: *params, hamiltonian, down, up })
    }

    fn eval(&self, rho: &TlsOperator, t: f64) -> TlsOperator {
        let b = tls_basis();
        let (k_omega, k_xi) = self.params.field_weights(t);
        let coherent = self.hamiltonian.commutator(rho).scale(-I);
        let lower = dissipator(&b.jminus, rho);
        let raise = dissipator(&b.jplus, rho);
        coherent
            + (self.down + 2.0 * k_xi) * lower
            + (self.up + 2.0 * k_xi) * raise
            + (2.0 * k_omega) * dissipator(&b.j0, rho)
    }
}

/// Right-hand side of the Markovian master equation at time `t`.
pub fn markovian_rhs(rho: &TlsOperator, t: f64, p: &MarkovParams) -> Result<TlsOperator> {
    Ok(MarkovRhs::new(p)?.eval(rho, t))
}

/// RK4 integration of the Markovian master equation from `rho0`.
pub fn markovian_evolve(
    p: &MarkovParams,
    rho0: &TlsOperator,
    t_max: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(HeomError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let rhs = MarkovRhs::new(p)?;
    let stride = stride.max(1);
    let n_steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    let mut rk = Rk4::new(4);
    let mut x = rho0.to_vec();
    let mut traj = Trajectory::default();
    traj.push(0.0, rho0);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        rk.step_with(&mut x, t, dt, |tt, y, out| {
            out.copy_from_slice(&rhs.eval(&TlsOperator::from_vec(y), tt).to_vec());
        });
        let rho = TlsOperator::from_vec(&x);
        let norm = rho.max_abs();
        if !norm.is_finite() || norm > 1e3 {
            return Err(HeomError::Unstable { t: t + dt, norm });
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            traj.push((step + 1) as f64 * dt, &rho);
        }
    }
    Ok(traj)
}

/// `C(τ) = tr(J+ e^{Lτ}[J- ρ_ss])` with the field weights at their long-time limits.
pub fn markovian_correlation(p: &MarkovParams, tau_max: f64, dtau: f64) -> Result<CorrelationSeries> {
    if !(dtau.is_finite() && dtau > 0.0 && tau_max.is_finite() && tau_max > 0.0) {
        return Err(HeomError::InvalidParameter(format!(
            "need 0 < dtau and 0 < tau_max, got dtau = {dtau}, tau_max = {tau_max}"
        )));
    }
    let rhs = MarkovRhs::new(p)?;
    let b = tls_basis();
    let rho = markovian_steady_state(p)?;
    let mut x = (b.jminus * rho).to_vec();
    let n_steps = (tau_max / dtau - 1e-9).ceil() as usize;
    let mut rk = Rk4::new(4);
    let mut corr = CorrelationSeries::default();
    let record = |corr: &mut CorrelationSeries, tau: f64, x: &[Complex64]| {
        corr.taus.push(tau);
        corr.values.push((b.jplus * TlsOperator::from_vec(x)).trace());
    };
    record(&mut corr, 0.0, &x);
    for step in 0..n_steps {
        rk.step_with(&mut x, f64::INFINITY, dtau, |tt, y, out| {
            out.copy_from_slice(&rhs.eval(&TlsOperator::from_vec(y), tt).to_vec());
        });
        record(&mut corr, (step + 1) as f64 * dtau, &x);
    }
    Ok(corr)
}

/// Stationary state of the Markovian equation with `K_ν` at their limits.
///
/// Coherences decay whenever any rate is positive, so the steady state is
/// diagonal with `p_e = Γ↑ / (Γ↑ + Γ↓)`.
pub fn markovian_steady_state(p: &MarkovParams) -> Result<TlsOperator> {
    let (down, up) = p.bath_rates();
    let (_, k_xi) = p.field_weights(f64::INFINITY);
    let gamma_up = up + 2.0 * k_xi;
    let gamma_down = down + 2.0 * k_xi;
    let total = gamma_up + gamma_down;
    if total <= 0.0 {
        return Err(HeomError::DegenerateNullSpace(
            "no relaxation channel: every diagonal state is stationary".into(),
        ));
    }
    let pe = gamma_up / total;
    Ok(TlsOperator::new([
        [Complex64::from(pe), Complex64::from(0.0)],
        [Complex64::from(0.0), Complex64::from(1.0 - pe)],
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseLabel;
    use crate::operators::CouplingMode;

    #[test]
    fn k_nu_values() {
        let p = OuProcess::from_delta_sq(NoiseLabel::Xi1, 0.4, 0.2);
        assert_eq!(k_nu(0.0, &p), 0.0);
        assert!((k_nu(1e4, &p) - 2.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..200 {
            let k = k_nu(i as f64 * 0.25, &p);
            assert!(k >= prev);
            prev = k;
        }
        // against a direct trapezoid integral of the correlation
        let t = 3.7;
        let n = 20_000;
        let h = t / n as f64;
        let quad: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * p.correlation(i as f64 * h)
            })
            .sum::<f64>()
            * h;
        assert!((quad - k_nu(t, &p)).abs() < 1e-8);
    }

    #[test]
    fn lamb_shift_examples() {
        let bath = BathParams::new(0.2, 0.4, 0.0, CouplingMode::Full);
        let s = lamb_shift_ht(1.0, &bath).unwrap();
        assert!((s - 0.4 / 1.04).abs() < 1e-12);
        assert!((lamb_shift_ht(-1.0, &bath).unwrap() + s).abs() < 1e-14);
        assert!(lamb_shift_ht(0.0, &bath).is_err());

        // ω = γ_B: the logarithm drops out
        let warm = BathParams::new(0.2, 0.4, 0.5, CouplingMode::Full);
        let g = warm.gamma;
        let expected = warm.c_jd() * (2.0 * PI * g - 0.5 * g * PI * g) / (2.0 * g * (2.0 * g * g));
        assert!((lamb_shift_ht(g, &warm).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn zero_rates_interaction_picture_is_zero_map() {
        let mut p = MarkovParams::new(1.0, BathParams::off(), FieldParams::off());
        p.picture = Picture::Interaction;
        let rho = TlsOperator::from_real([[0.7, 0.2], [0.2, 0.3]]);
        assert_eq!(markovian_rhs(&rho, 3.0, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn infinite_temperature_rates_balance() {
        let p = MarkovParams::new(1.0, BathParams::new(0.2, 0.4, 0.0, CouplingMode::Full), FieldParams::off());
        let (down, up) = p.bath_rates();
        assert!(down > 0.0 && (down - up).abs() < 1e-15);
        let ss = markovian_steady_state(&p).unwrap();
        assert!((ss.get(0, 0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn detailed_balance_uses_exact_bose() {
        let p = MarkovParams::new(1.0, BathParams::new(0.2, 0.4, 0.32, CouplingMode::Full), FieldParams::off());
        let (down, up) = p.bath_rates();
        assert!((up / down - (-0.32f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn trace_free_rhs() {
        let p = MarkovParams::new(
            1.0,
            BathParams::new(0.4, 0.8, 0.1, CouplingMode::Full),
            FieldParams::uniform(0.3, 0.5),
        );
        let rho = TlsOperator::new([
            [Complex64::new(0.6, 0.0), Complex64::new(0.1, -0.3)],
            [Complex64::new(0.1, 0.3), Complex64::new(0.4, 0.0)],
        ]);
        for t in [0.0, 0.5, 10.0] {
            let d = markovian_rhs(&rho, t, &p).unwrap();
            assert!(d.trace().norm() < 1e-15);
            assert!(d.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn long_evolution_reaches_closed_form_steady_state() {
        let p = MarkovParams::new(
            1.0,
            BathParams::new(0.2, 0.4, 0.32, CouplingMode::Full),
            FieldParams::uniform(0.5, 0.2),
        );
        let traj = markovian_evolve(&p, &TlsOperator::excited(), 200.0, 0.01, 100).unwrap();
        let ss = markovian_steady_state(&p).unwrap();
        assert!((traj.last().unwrap().pop_excited - ss.get(0, 0).re).abs() < 1e-9);
    }

    #[test]
    fn markovian_correlation_is_a_damped_rotation() {
        let bath = BathParams::new(4.0, 0.04, 0.0, crate::operators::CouplingMode::Full);
        let p = MarkovParams::new(1.0, bath, FieldParams::off());
        let corr = markovian_correlation(&p, 20.0, 0.01).unwrap();
        let (down, up) = p.bath_rates();
        let decay = 0.5 * (down + up);
        let shifted = 1.0 + 2.0 * lamb_shift_ht(1.0, &bath).unwrap();
        for (tau, c) in corr.taus.iter().zip(&corr.values) {
            let expect = Complex64::from_polar(0.5 * (-decay * tau).exp(), shifted * tau);
            assert!((c - expect).norm() < 1e-8, "tau {tau}: {c} vs {expect}");
        }
    }
}
