//! Time evolution of the hierarchy, steady states, and parameter sweeps.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{HeomError, Result};
use crate::heom::{AdmStack, HeomGenerator};
use crate::model::SimConfig;
use crate::operators::{TlsOperator, ONE, ZERO};

/// Abort when the stack norm grows by more than this factor.
const GROWTH_LIMIT: f64 = 1e3;

/// Largest `dt · |λ|max` accepted for classic RK4.
const RK4_STABILITY_BOUND: f64 = 2.8;

/// Observables of the reduced density matrix at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// `⟨J+J-⟩ = ρ_ee`.
    pub pop_excited: f64,
    /// `ρ_eg`.
    pub coherence: Complex64,
    /// `|tr ρ - 1|`.
    pub trace_err: f64,
    /// `max |ρ - ρ†|`.
    pub herm_defect: f64,
}

impl Observables {
    pub fn of(rho: &TlsOperator) -> Self {
        Self {
            pop_excited: rho.get(0, 0).re,
            coherence: rho.get(0, 1),
            trace_err: (rho.trace() - ONE).norm(),
            herm_defect: rho.hermiticity_defect(),
        }
    }
}

/// Sampled observables along one propagation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub samples: Vec<Observables>,
    /// Reduced density matrices at the sample times, when requested.
    pub snapshots: Option<Vec<TlsOperator>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, rho: &TlsOperator) {
        self.times.push(t);
        self.samples.push(Observables::of(rho));
        if let Some(s) = self.snapshots.as_mut() {
            s.push(*rho);
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.pop_excited).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.samples.iter().map(|s| s.trace_err).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.herm_defect).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&Observables> {
        self.samples.last()
    }

    /// Sup-norm population difference against another trajectory, restricted
    /// to common sample times `t ≤ horizon`. Sample grids must coincide.
    pub fn population_sup_diff(&self, other: &Trajectory, horizon: f64) -> f64 {
        let mut worst = 0.0f64;
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            let (a, b) = (self.times[i], other.times[j]);
            if a > horizon + 1e-9 || b > horizon + 1e-9 {
                break;
            }
            if (a - b).abs() < 1e-9 {
                worst = worst.max((self.samples[i].pop_excited - other.samples[j].pop_excited).abs());
                i += 1;
                j += 1;
            } else if a < b {
                i += 1;
            } else {
                j += 1;
            }
        }
        worst
    }
}

/// Classic fixed-step fourth-order Runge–Kutta on the stacked ADM vector.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![ZERO; dim],
            k2: vec![ZERO; dim],
            k3: vec![ZERO; dim],
            k4: vec![ZERO; dim],
            tmp: vec![ZERO; dim],
        }
    }

    /// One step of `dx/dt = f(t, x)` with a time-dependent right-hand side.
    pub fn step_with<F>(&mut self, x: &mut [Complex64], t: f64, dt: f64, mut f: F)
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let half = 0.5 * dt;
        f(t, x, &mut self.k1);
        axpy_into(&mut self.tmp, x, half, &self.k1);
        f(t + half, &self.tmp, &mut self.k2);
        axpy_into(&mut self.tmp, x, half, &self.k2);
        f(t + half, &self.tmp, &mut self.k3);
        axpy_into(&mut self.tmp, x, dt, &self.k3);
        f(t + dt, &self.tmp, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..x.len() {
            x[i] += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }

    pub fn step(&mut self, g: &HeomGenerator, x: &mut [Complex64], dt: f64) {
        self.step_with(x, 0.0, dt, |_, y, out| g.apply(y, out));
    }
}

#[inline]
fn axpy_into(out: &mut [Complex64], x: &[Complex64], a: f64, y: &[Complex64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Steps a stack forward under a fixed generator, guarding against blow-up.
#[derive(Debug)]
pub struct Propagator<'g> {
    gen: &'g HeomGenerator,
    state: AdmStack,
    t: f64,
    dt: f64,
    rk: Rk4,
    norm_limit: f64,
}

impl<'g> Propagator<'g> {
    pub fn new(gen: &'g HeomGenerator, state: AdmStack, dt: f64) -> Self {
        assert_eq!(state.len(), gen.len(), "stack does not match generator");
        let norm_limit = GROWTH_LIMIT * state.max_abs().max(1.0);
        Self { rk: Rk4::new(gen.dim()), gen, state, t: 0.0, dt, norm_limit }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &AdmStack {
        &self.state
    }

    pub fn into_state(self) -> AdmStack {
        self.state
    }

    pub fn step(&mut self) {
        self.rk.step(self.gen, self.state.as_mut_slice(), self.dt);
        self.t += self.dt;
    }

    /// Takes `n` steps, then checks the stack for blow-up.
    pub fn advance(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.step();
        }
        self.check_stability()
    }

    pub fn check_stability(&self) -> Result<()> {
        let norm = self.state.max_abs();
        if !norm.is_finite() || norm > self.norm_limit {
            return Err(HeomError::Unstable { t: self.t, norm });
        }
        Ok(())
    }

    /// `‖G x‖∞ / ‖x‖∞` for the current stack.
    pub fn relative_residual(&self) -> f64 {
        relative_residual(self.gen, &self.state)
    }
}

fn relative_residual(g: &HeomGenerator, x: &AdmStack) -> f64 {
    let d = g.apply_stack(x);
    d.max_abs() / x.max_abs().max(f64::MIN_POSITIVE)
}

/// Rejects step sizes outside the RK4 stability region of `g`.
pub fn check_step_size(g: &HeomGenerator, dt: f64) -> Result<()> {
    let radius = g.spectral_radius_estimate(30);
    if dt * radius > RK4_STABILITY_BOUND {
        return Err(HeomError::InvalidParameter(format!(
            "dt = {dt} exceeds the RK4 stability bound for this hierarchy \
             (spectral radius ≈ {radius:.3}, need dt < {:.4})",
            RK4_STABILITY_BOUND / radius
        )));
    }
    Ok(())
}

fn step_count(span: f64, dt: f64) -> usize {
    (span / dt - 1e-9).ceil().max(0.0) as usize
}

/// Propagates the factorized initial state of `sim` up to `t_max`.
pub fn evolve(sim: &SimConfig) -> Result<Trajectory> {
    let g = HeomGenerator::build(sim)?;
    let stack = g.initial_stack(&sim.initial_state);
    evolve_stack(&g, stack, sim.dt, sim.t_max, sim.stride, false).map(|(traj, _)| traj)
}

/// Propagates an arbitrary stack, sampling the physical element every
/// `stride` steps. Returns the trajectory and the final stack.
pub fn evolve_stack(
    g: &HeomGenerator,
    stack: AdmStack,
    dt: f64,
    t_max: f64,
    stride: usize,
    keep_snapshots: bool,
) -> Result<(Trajectory, AdmStack)> {
    check_step_size(g, dt)?;
    let stride = stride.max(1);
    let n_steps = step_count(t_max, dt);
    let mut traj = Trajectory {
        snapshots: keep_snapshots.then(Vec::new),
        ..Default::default()
    };
    let mut prop = Propagator::new(g, stack, dt);
    traj.push(0.0, &prop.state().physical());
    let mut done = 0;
    while done < n_steps {
        let n = stride.min(n_steps - done);
        prop.advance(n)?;
        done += n;
        traj.push(done as f64 * dt, &prop.state().physical());
    }
    Ok((traj, prop.into_state()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Integrate until the stack stops changing.
    Propagate,
    /// Solve `G x = 0` with unit trace of the physical element.
    NullSpace,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: TlsOperator,
    /// Full stationary stack, needed for equilibrium correlation functions.
    pub stack: AdmStack,
    /// Time at which propagation converged; `None` for the null-space solve.
    pub time: Option<f64>,
}

impl SteadyState {
    pub fn population(&self) -> f64 {
        self.rho.get(0, 0).re
    }
}

/// Stationary state of the hierarchy built from `sim`.
pub fn steady_state(sim: &SimConfig, method: SteadyMethod) -> Result<SteadyState> {
    let g = HeomGenerator::build(sim)?;
    if g.channels().is_empty() {
        return Err(HeomError::NoChannels);
    }
    steady_state_of(&g, sim, method)
}

pub fn steady_state_of(
    g: &HeomGenerator,
    sim: &SimConfig,
    method: SteadyMethod,
) -> Result<SteadyState> {
    match method {
        SteadyMethod::Propagate => propagate_to_steady(g, sim),
        SteadyMethod::NullSpace => {
            let stack = null_space_steady(g)?;
            Ok(SteadyState { rho: stack.physical(), stack, time: None })
        }
    }
}

fn propagate_to_steady(g: &HeomGenerator, sim: &SimConfig) -> Result<SteadyState> {
    check_step_size(g, sim.dt)?;
    let check_every = step_count(1.0, sim.dt).max(1);
    let n_max = step_count(sim.t_max, sim.dt);
    let mut prop = Propagator::new(g, g.initial_stack(&sim.initial_state), sim.dt);
    let mut done = 0;
    let mut residual = prop.relative_residual();
    while done < n_max {
        let n = check_every.min(n_max - done);
        prop.advance(n)?;
        done += n;
        residual = prop.relative_residual();
        if residual < sim.steady_tol {
            let t = prop.time();
            let stack = prop.into_state();
            return Ok(SteadyState { rho: stack.physical(), stack, time: Some(t) });
        }
    }
    Err(HeomError::NotConverged { t_max: sim.t_max, residual })
}

/// Solves `G x = 0` with `tr ρ_0 = 1`.
///
/// Trace preservation makes the rows for `ρ_0[e,e]` and `ρ_0[g,g]` sum to
/// zero, so the first one is replaced by the trace constraint.
pub fn null_space_steady(g: &HeomGenerator) -> Result<AdmStack> {
    let csr = g.to_csr();
    let n = csr.n;
    let mut triplets: Vec<Triplet<usize, usize, Complex64>> = csr
        .triplets()
        .filter(|&(r, _, _)| r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    triplets.push(Triplet::new(0, 0, ONE));
    triplets.push(Triplet::new(0, 3, ONE));
    let degenerate = |why: String| HeomError::DegenerateNullSpace(why);

    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| degenerate(format!("could not assemble system: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| degenerate(format!("factorization failed: {e:?}")))?;
    let mut b = Mat::<Complex64>::zeros(n, 1);
    b[(0, 0)] = ONE;
    let x = lu.solve(&b);
    let values: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(degenerate("solution is not finite (singular system)".into()));
    }
    let stack = AdmStack::from_values(values);
    let scale = stack.max_abs();
    let residual = relative_residual(g, &stack);
    if residual > 1e-8 || scale > 1e8 {
        return Err(degenerate(format!(
            "stationary solution not unique (residual {residual:.3e}, norm {scale:.3e})"
        )));
    }
    Ok(stack)
}

/// Outcome of probing hierarchy depths for convergence.
#[derive(Debug, Clone)]
pub struct DepthConvergence {
    /// Smallest depth `L` whose trajectory matches `L + 2` within tolerance.
    pub depth: usize,
    pub sup_diff: f64,
    pub converged: bool,
}

/// Increases the depth in steps of 2 from `start` until the population
/// trajectories at `L` and `L + 2` agree within `tol` on `[0, horizon]`.
pub fn converge_depth(
    sim: &SimConfig,
    start: usize,
    max_depth: usize,
    tol: f64,
    horizon: f64,
) -> Result<DepthConvergence> {
    let run = |depth: usize| {
        let mut s = sim.clone();
        s.depth = depth;
        s.t_max = horizon;
        evolve(&s)
    };
    let mut depth = start;
    let mut current = run(depth)?;
    let mut diff = f64::INFINITY;
    while depth + 2 <= max_depth {
        let next = run(depth + 2)?;
        diff = current.population_sup_diff(&next, horizon);
        if diff <= tol {
            return Ok(DepthConvergence { depth, sup_diff: diff, converged: true });
        }
        depth += 2;
        current = next;
    }
    Ok(DepthConvergence { depth, sup_diff: diff, converged: false })
}

/// What each sweep point computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepReduce {
    SteadyPopulation(SteadyMethod),
    Trajectory,
}

#[derive(Debug, Clone)]
pub enum SweepOutcome {
    SteadyPopulation(f64),
    Trajectory(Trajectory),
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<SweepOutcome>,
}

/// Evaluates `reduce` at every value of the parameter addressed by `axis`.
///
/// Points run in parallel; rows come back in input order and a failing point
/// is recorded in its row without stopping the sweep.
pub fn sweep(base: &SimConfig, axis: &str, values: &[f64], reduce: SweepReduce) -> Result<Vec<SweepRow>> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(HeomError::InvalidParameter(format!("sweep value {v} is not finite")));
    }
    // Reject an unknown axis before spending any work.
    base.clone().set_param(axis, values.first().copied().unwrap_or(0.0))?;
    Ok(values
        .par_iter()
        .map(|&value| {
            let outcome = (|| {
                let mut sim = base.clone();
                sim.set_param(axis, value)?;
                match reduce {
                    SweepReduce::SteadyPopulation(method) => {
                        steady_state(&sim, method).map(|s| SweepOutcome::SteadyPopulation(s.population()))
                    }
                    SweepReduce::Trajectory => evolve(&sim).map(SweepOutcome::Trajectory),
                }
            })();
            SweepRow { value, outcome }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathParams, FieldParams, NoiseLabel, OuProcess};
    use crate::operators::CouplingMode;

    #[test]
    fn free_evolution_keeps_population() {
        let sim = SimConfig::default().with_t_max(20.0);
        let traj = evolve(&sim).unwrap();
        assert!(traj.populations().iter().all(|&p| (p - 1.0).abs() < 1e-14));
    }

    #[test]
    fn free_coherence_rotates_at_omega0() {
        let sim = SimConfig::default()
            .with_t_max(5.0)
            .with_initial_state(TlsOperator::plus_state());
        let traj = evolve(&sim).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.samples) {
            // ρ_eg(t) = ρ_eg(0) e^{-iω0 t}
            let expected = Complex64::from_polar(0.5, -t);
            assert!((s.coherence - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn omega_channel_leaves_diagonal_states_alone() {
        let mut field = FieldParams::off();
        field.omega = OuProcess::from_delta_sq(NoiseLabel::Omega, 0.4, 0.2);
        let sim = SimConfig::default().with_field(field).with_depth(6).with_t_max(30.0);
        let traj = evolve(&sim).unwrap();
        assert!(traj.populations().iter().all(|&p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unstable_step_rejected() {
        let sim = SimConfig::default()
            .with_field(FieldParams::uniform(0.4, 1.6))
            .with_depth(6)
            .with_dt(2.0);
        assert!(matches!(evolve(&sim), Err(HeomError::InvalidParameter(_))));
    }

    #[test]
    fn steady_state_methods_agree_small() {
        let sim = SimConfig::default()
            .with_bath(BathParams::new(0.4, 0.4, 0.2, CouplingMode::Rwa))
            .with_depth(6)
            .with_dt(0.02);
        let a = steady_state(&sim, SteadyMethod::Propagate).unwrap();
        let b = steady_state(&sim, SteadyMethod::NullSpace).unwrap();
        assert!((a.rho - b.rho).max_abs() < 1e-6);
        assert!(a.time.is_some() && b.time.is_none());
    }

    #[test]
    fn dephasing_only_null_space_is_degenerate() {
        let mut field = FieldParams::off();
        field.omega = OuProcess::from_delta_sq(NoiseLabel::Omega, 0.4, 0.2);
        let sim = SimConfig::default().with_field(field).with_depth(4);
        assert!(matches!(
            steady_state(&sim, SteadyMethod::NullSpace),
            Err(HeomError::DegenerateNullSpace(_))
        ));
    }

    #[test]
    fn no_channels_rejected() {
        assert!(matches!(
            steady_state(&SimConfig::default(), SteadyMethod::Propagate),
            Err(HeomError::NoChannels)
        ));
    }

    #[test]
    fn steady_state_times_out() {
        let sim = SimConfig::default()
            .with_bath(BathParams::new(0.4, 0.01, 0.0, CouplingMode::Full))
            .with_depth(2)
            .with_t_max(3.0);
        assert!(matches!(
            steady_state(&sim, SteadyMethod::Propagate),
            Err(HeomError::NotConverged { .. })
        ));
    }

    #[test]
    fn sweep_rows_keep_order_and_errors() {
        let base = SimConfig::default()
            .with_bath(BathParams::new(0.4, 0.4, 0.1, CouplingMode::Full))
            .with_depth(4)
            .with_dt(0.02);
        let rows = sweep(&base, "bath.gamma", &[0.5, -1.0, 0.3], SweepReduce::SteadyPopulation(SteadyMethod::NullSpace)).unwrap();
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![0.5, -1.0, 0.3]);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        assert!(rows[2].outcome.is_ok());
        assert!(sweep(&base, "bath.gamma", &[], SweepReduce::Trajectory).unwrap().is_empty());
        assert!(sweep(&base, "bath.nope", &[1.0], SweepReduce::Trajectory).is_err());
    }
}
