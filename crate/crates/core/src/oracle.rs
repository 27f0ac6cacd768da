//! Independent reference for the classical noise channels.
//!
//! Each trajectory samples Ω(t), ξ1(t), ξ2(t) exactly from the OU transition
//! kernel, integrates the unitary TLS dynamics under the resulting
//! Hamiltonian, and the density matrices are averaged over trajectories. A
//! closed-form Gaussian-cumulant result covers pure dephasing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{HeomError, Result};
use crate::model::{FieldParams, OuProcess};
use crate::operators::{tls_basis, TlsOperator, I};
use crate::propagator::Rk4;

/// Trajectories per accumulation block; blocks are combined in a fixed order.
const BLOCK: usize = 64;

pub const MIN_TRAJECTORIES: usize = 100;

/// A sampled OU path on a uniform grid starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OuPath {
    pub dt: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl OuPath {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }
}

/// Fills `out` with a stationary path: `ν_0 ~ N(0, Δ²)`,
/// `ν_{j+1} = ν_j e^{-γ dt} + N(0, Δ²(1 - e^{-2γ dt}))`.
pub fn fill_ou_path<R: Rng + ?Sized>(proc: &OuProcess, dt: f64, rng: &mut R, out: &mut [f64]) {
    if !proc.is_active() {
        out.fill(0.0);
        return;
    }
    let decay = (-proc.gamma * dt).exp();
    let kick = proc.delta * (-(-2.0 * proc.gamma * dt).exp_m1()).sqrt();
    let mut x = proc.delta * rng.sample::<f64, _>(StandardNormal);
    for (i, v) in out.iter_mut().enumerate() {
        if i > 0 {
            x = x * decay + kick * rng.sample::<f64, _>(StandardNormal);
        }
        *v = x;
    }
}

/// `n_steps + 1` samples of one process with step `dt`.
pub fn sample_ou_path(proc: &OuProcess, dt: f64, n_steps: usize, seed: u64) -> Result<OuPath> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(HeomError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    proc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n_steps + 1];
    fill_ou_path(proc, dt, &mut rng, &mut values);
    Ok(OuPath { dt, values, seed })
}

/// `|ρ_eg(t)| / |ρ_eg(0)| = exp[-(Δ²/γ²)(γt - 1 + e^{-γt})]` for OU phase noise through J0.
pub fn dephasing_analytic(t: f64, proc: &OuProcess) -> f64 {
    if !proc.is_active() {
        return 1.0;
    }
    let gt = proc.gamma * t;
    // γt - 1 + e^{-γt}, written to stay accurate for small γt
    let shape = gt + (-gt).exp_m1();
    (-(proc.delta_sq() / (proc.gamma * proc.gamma)) * shape).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub omega0: f64,
    pub field: FieldParams,
    pub rho0: TlsOperator,
    pub t_max: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Integration steps between recorded samples.
    pub stride: usize,
}

impl McConfig {
    pub fn new(field: FieldParams, t_max: f64, n_traj: usize, seed: u64) -> Self {
        Self {
            omega0: 1.0,
            field,
            rho0: TlsOperator::excited(),
            t_max,
            dt: 0.005,
            n_traj,
            seed,
            stride: 20,
        }
    }
}

/// Trajectory-averaged observables with standard errors of the mean.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct McTrajectory {
    pub times: Vec<f64>,
    pub pop_mean: Vec<f64>,
    pub pop_stderr: Vec<f64>,
    pub coh_mean: Vec<Complex64>,
    pub coh_re_stderr: Vec<f64>,
    pub coh_im_stderr: Vec<f64>,
    pub n_traj: usize,
}

impl McTrajectory {
    /// Averaged reduced density matrix at sample `i`.
    pub fn mean_rho(&self, i: usize) -> TlsOperator {
        let p = Complex64::from(self.pop_mean[i]);
        let c = self.coh_mean[i];
        TlsOperator::new([[p, c], [c.conj(), Complex64::from(1.0) - p]])
    }
}

/// Per-sample running sums: pop, pop², Re c, (Re c)², Im c, (Im c)².
type Sums = Vec<[f64; 6]>;

/// Averages the unitary dynamics under `H(t) = ω0J0 + Ω(t)J0 + ξ1(t)(J+ + J-) + ξ2(t) i(J+ - J-)`.
///
/// Noise is sampled exactly on a half-step grid so the RK4 stages see the
/// path at `t`, `t + dt/2`, and `t + dt`. Trajectory `k` draws from stream
/// `k` of a generator seeded with `seed`, so results do not depend on the
/// number of worker threads.
pub fn mc_evolve(cfg: &McConfig) -> Result<McTrajectory> {
    if cfg.n_traj < MIN_TRAJECTORIES {
        return Err(HeomError::TooFewTrajectories(cfg.n_traj));
    }
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(HeomError::InvalidParameter(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !cfg.rho0.is_density_matrix(1e-9) {
        return Err(HeomError::InvalidParameter("rho0 is not a valid density matrix".into()));
    }
    for p in cfg.field.processes() {
        p.validate()?;
    }
    let stride = cfg.stride.max(1);
    let n_steps = (cfg.t_max / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let sample_steps: Vec<usize> = (0..=n_steps)
        .filter(|&s| s % stride == 0 || s == n_steps)
        .collect();

    let n_blocks = cfg.n_traj.div_ceil(BLOCK);
    let block_sums: Vec<Sums> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(cfg.n_traj);
            let mut sums = vec![[0.0; 6]; sample_steps.len()];
            let mut worker = TrajectoryWorker::new(cfg, n_steps);
            for k in start..end {
                worker.run(cfg, k as u64, &sample_steps, &mut sums);
            }
            sums
        })
        .collect();

    let mut total = vec![[0.0; 6]; sample_steps.len()];
    for sums in &block_sums {
        for (t, s) in total.iter_mut().zip(sums) {
            for j in 0..6 {
                t[j] += s[j];
            }
        }
    }

    let n = cfg.n_traj as f64;
    let stats = |sum: f64, sq: f64| {
        let mean = sum / n;
        let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    };
    let mut out = McTrajectory { n_traj: cfg.n_traj, ..Default::default() };
    for (&s, t) in sample_steps.iter().zip(&total) {
        let (pm, pe) = stats(t[0], t[1]);
        let (rm, re) = stats(t[2], t[3]);
        let (im, ie) = stats(t[4], t[5]);
        out.times.push(s as f64 * cfg.dt);
        out.pop_mean.push(pm);
        out.pop_stderr.push(pe);
        out.coh_mean.push(Complex64::new(rm, im));
        out.coh_re_stderr.push(re);
        out.coh_im_stderr.push(ie);
    }
    Ok(out)
}

struct TrajectoryWorker {
    omega: Vec<f64>,
    xi1: Vec<f64>,
    xi2: Vec<f64>,
    rk: Rk4,
}

impl TrajectoryWorker {
    fn new(_cfg: &McConfig, n_steps: usize) -> Self {
        let len = 2 * n_steps + 1;
        Self { omega: vec![0.0; len], xi1: vec![0.0; len], xi2: vec![0.0; len], rk: Rk4::new(4) }
    }

    fn run(&mut self, cfg: &McConfig, index: u64, sample_steps: &[usize], sums: &mut Sums) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);
        let half = 0.5 * cfg.dt;
        fill_ou_path(&cfg.field.omega, half, &mut rng, &mut self.omega);
        fill_ou_path(&cfg.field.xi1, half, &mut rng, &mut self.xi1);
        fill_ou_path(&cfg.field.xi2, half, &mut rng, &mut self.xi2);

        let b = tls_basis();
        let v_omega = b.j0;
        let v_xi1 = b.jplus + b.jminus;
        let v_xi2 = I * (b.jplus - b.jminus);
        let h0 = cfg.omega0 * b.j0;
        let (omega, xi1, xi2) = (&self.omega, &self.xi1, &self.xi2);
        let hamiltonian = |t: f64| {
            // stage times land exactly on the half-step grid
            let i = (t / half).round() as usize;
            h0 + omega[i] * v_omega + xi1[i] * v_xi1 + xi2[i] * v_xi2
        };

        let mut x = cfg.rho0.to_vec();
        let mut next_sample = 0;
        let n_steps = *sample_steps.last().unwrap_or(&0);
        for step in 0..=n_steps {
            if step == sample_steps[next_sample] {
                let rho = TlsOperator::from_vec(&x);
                let (p, c) = (rho.get(0, 0).re, rho.get(0, 1));
                let acc = &mut sums[next_sample];
                acc[0] += p;
                acc[1] += p * p;
                acc[2] += c.re;
                acc[3] += c.re * c.re;
                acc[4] += c.im;
                acc[5] += c.im * c.im;
                next_sample += 1;
            }
            if step == n_steps {
                break;
            }
            let t = step as f64 * cfg.dt;
            self.rk.step_with(&mut x, t, cfg.dt, |tt, y, out| {
                let rho = TlsOperator::from_vec(y);
                out.copy_from_slice(&hamiltonian(tt).commutator(&rho).scale(-I).to_vec());
            });
        }
    }
}
