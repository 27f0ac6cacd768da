//! Command orchestration.

use std::path::PathBuf;

use heom_core::lindblad::{markovian_correlation, markovian_evolve, markovian_steady_state};
use heom_core::oracle::mc_evolve;
use heom_core::propagator::{evolve, steady_state, sweep, SweepOutcome, SweepReduce, Trajectory};
use heom_core::spectrum::{emission_spectrum, linspace, two_time_correlation, Spectrum};
use heom_core::{CouplingMode, HeomError, MarkovParams};

use crate::config::{load, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, CsvTable};

pub const MAX_INDICES_ENV: &str = "HEOM_MAX_INDICES";

const MODES: [CouplingMode; 2] = [CouplingMode::Rwa, CouplingMode::Full];

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Evolve,
    Steady,
    Spectrum,
    Sweep { axis: String, values: Vec<f64> },
    Mc,
    Lindblad,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Steady => "steady",
            Command::Spectrum => "spectrum",
            Command::Sweep { .. } => "sweep",
            Command::Mc => "mc",
            Command::Lindblad => "lindblad",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config: Option<PathBuf>,
    /// Standard output when absent.
    pub output: Option<PathBuf>,
    /// `dotted.key=value` assignments, applied in order.
    pub overrides: Vec<String>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub depth: Option<usize>,
}

impl RunSpec {
    pub fn new(command: Command) -> Self {
        Self { command, config: None, output: None, overrides: Vec::new(), threads: None, seed: 0, depth: None }
    }
}

/// Parses `start:stop:count` or a comma-separated list.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("cannot parse values '{text}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let n: usize = count.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            linspace(num(start)?, num(stop)?, n)
        }
        [list] => list.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// Loads the configuration with overrides, `--depth`, and the index cap.
pub fn resolve_config(spec: &RunSpec) -> Result<RunConfig, CliError> {
    let mut overrides = spec.overrides.clone();
    if let Some(d) = spec.depth {
        overrides.push(format!("hierarchy.depth={d}"));
        overrides.push(format!("hierarchy.depth_full={d}"));
    }
    let mut cfg = load(spec.config.as_deref(), &overrides)?;
    if let Ok(raw) = std::env::var(MAX_INDICES_ENV) {
        let cap: usize = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{MAX_INDICES_ENV}='{raw}' is not an integer")))?;
        cfg.hierarchy.max_indices = cfg.hierarchy.max_indices.min(cap);
    }
    Ok(cfg)
}

/// Result of a command: the rendered CSV and, for sweeps with failed
/// points, the first failure.
pub struct RunOutput {
    pub csv: String,
    pub deferred_error: Option<CliError>,
}

/// Runs the command and returns the CSV text without writing it.
pub fn execute(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let cfg = resolve_config(spec)?;
    let work = || compute(spec, &cfg);
    let (table, extra, deferred_error) = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let extra: Vec<(&str, String)> = extra.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    let csv = table.render(spec.command.name(), spec.seed, &cfg, &extra);
    Ok(RunOutput { csv, deferred_error })
}

/// Runs the command and writes the CSV to the output path or stdout.
pub fn run(spec: &RunSpec) -> Result<(), CliError> {
    let out = execute(spec)?;
    match &spec.output {
        Some(path) => std::fs::write(path, &out.csv)
            .map_err(|source| CliError::Output { path: path.display().to_string(), source })?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(out.csv.as_bytes())
                .map_err(|source| CliError::Output { path: "<stdout>".into(), source })?;
        }
    }
    match out.deferred_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

type Computed = (CsvTable, Vec<(String, String)>, Option<CliError>);

fn compute(spec: &RunSpec, cfg: &RunConfig) -> Result<Computed, CliError> {
    match &spec.command {
        Command::Evolve => evolve_table(cfg).map(|t| (t, Vec::new(), None)),
        Command::Lindblad => lindblad_table(cfg).map(|t| (t, Vec::new(), None)),
        Command::Steady => steady_table(cfg).map(|t| (t, Vec::new(), None)),
        Command::Spectrum => spectrum_table(cfg).map(|t| (t, Vec::new(), None)),
        Command::Mc => mc_table(cfg, spec.seed).map(|t| (t, Vec::new(), None)),
        Command::Sweep { axis, values } => {
            let (t, err) = sweep_table(cfg, axis, values)?;
            Ok((t, vec![("axis".into(), axis.clone())], err))
        }
    }
}

const TRAJECTORY_COLUMNS: [&str; 6] = ["series", "t", "pop_excited", "re_coh", "im_coh", "trace_err"];

fn push_trajectory(table: &mut CsvTable, series: &str, traj: &Trajectory) {
    for (t, s) in traj.times.iter().zip(&traj.samples) {
        table.push(vec![
            series.into(),
            (*t).into(),
            s.pop_excited.into(),
            s.coherence.re.into(),
            s.coherence.im.into(),
            s.trace_err.into(),
        ]);
    }
}

fn markov_trajectory(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let it = &cfg.integrator;
    Ok(markovian_evolve(&cfg.markov()?, &cfg.system.initial_state.rho(), it.t_max, it.dt, it.stride)?)
}

fn evolve_table(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let mut table = CsvTable::new(&TRAJECTORY_COLUMNS);
    for mode in MODES {
        let traj = evolve(&cfg.sim(mode)?)?;
        push_trajectory(&mut table, mode.name(), &traj);
    }
    push_trajectory(&mut table, "markov", &markov_trajectory(cfg)?);
    Ok(table)
}

fn lindblad_table(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let mut table = CsvTable::new(&TRAJECTORY_COLUMNS);
    push_trajectory(&mut table, "markov", &markov_trajectory(cfg)?);
    Ok(table)
}

fn steady_table(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let mut table = CsvTable::new(&["series", "depth", "pop_excited", "re_coh", "im_coh"]);
    for mode in MODES {
        let s = steady_state(&cfg.steady_sim(mode)?, cfg.steady_method())?;
        let c = s.rho.get(0, 1);
        table.push(vec![
            mode.name().into(),
            cfg.depth(mode).into(),
            s.population().into(),
            c.re.into(),
            c.im.into(),
        ]);
    }
    let m = markovian_steady_state(&cfg.markov()?)?;
    let c = m.get(0, 1);
    table.push(vec!["markov".into(), Cell::Empty, m.get(0, 0).re.into(), c.re.into(), c.im.into()]);
    Ok(table)
}

fn sweep_table(cfg: &RunConfig, axis: &str, values: &[f64]) -> Result<(CsvTable, Option<CliError>), CliError> {
    let mut per_mode = Vec::new();
    for mode in MODES {
        let base = cfg.steady_sim(mode)?;
        per_mode.push(sweep(&base, axis, values, SweepReduce::SteadyPopulation(cfg.steady_method()))?);
    }
    let base = cfg.steady_sim(CouplingMode::Full)?;
    let markov: Vec<Result<f64, HeomError>> = values
        .iter()
        .map(|&v| {
            let mut s = base.clone();
            s.set_param(axis, v)?;
            Ok(markovian_steady_state(&MarkovParams::from_sim(&s))?.get(0, 0).re)
        })
        .collect();

    let mut table = CsvTable::new(&[
        "value",
        "rwa_pop_excited",
        "full_pop_excited",
        "markov_pop_excited",
        "status",
    ]);
    let mut first_error = None;
    for (i, &v) in values.iter().enumerate() {
        let mut row = vec![Cell::from(v)];
        let mut status = String::from("ok");
        let outcomes = per_mode.iter().map(|rows| match &rows[i].outcome {
            Ok(SweepOutcome::SteadyPopulation(p)) => Ok(*p),
            Ok(SweepOutcome::Trajectory(_)) => unreachable!("steady sweep returns populations"),
            Err(e) => Err(e.clone()),
        });
        for outcome in outcomes.chain(std::iter::once(markov[i].clone())) {
            match outcome {
                Ok(p) => row.push(p.into()),
                Err(e) => {
                    let e = CliError::from(e);
                    log::warn!("{axis} = {v}: {e}");
                    if status == "ok" {
                        status = format!("error:{}", e.category());
                    }
                    first_error.get_or_insert(e);
                    row.push(Cell::Empty);
                }
            }
        }
        row.push(Cell::Text(status));
        table.push(row);
    }
    Ok((table, first_error))
}

fn push_spectrum(table: &mut CsvTable, series: &str, s: &Spectrum) {
    for ((w, n), r) in s.omega.iter().zip(&s.normalized).zip(&s.raw_re) {
        table.push(vec![series.into(), (*w).into(), (*n).into(), (*r).into()]);
    }
}

fn spectrum_table(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let mut table = CsvTable::new(&["series", "omega", "S_normalized", "S_raw_re"]);
    for mode in MODES {
        let scfg = cfg.spectrum(mode)?;
        let corr = two_time_correlation(&scfg)?;
        push_spectrum(&mut table, mode.name(), &emission_spectrum(&corr, &scfg)?);
    }
    let scfg = cfg.spectrum(CouplingMode::Full)?;
    let corr = markovian_correlation(&cfg.markov()?, scfg.tau_max, scfg.dtau)?;
    push_spectrum(&mut table, "markov", &emission_spectrum(&corr, &scfg)?);
    Ok(table)
}

fn mc_table(cfg: &RunConfig, seed: u64) -> Result<CsvTable, CliError> {
    let mc = mc_evolve(&cfg.mc(seed)?)?;
    let mut table = CsvTable::new(&[
        "t",
        "pop_mean",
        "pop_stderr",
        "re_coh",
        "re_coh_stderr",
        "im_coh",
        "im_coh_stderr",
    ]);
    for i in 0..mc.times.len() {
        table.push(vec![
            mc.times[i].into(),
            mc.pop_mean[i].into(),
            mc.pop_stderr[i].into(),
            mc.coh_mean[i].re.into(),
            mc.coh_re_stderr[i].into(),
            mc.coh_mean[i].im.into(),
            mc.coh_im_stderr[i].into(),
        ]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_grids() {
        assert_eq!(parse_values("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_values("0.1, 0.2,0.4").unwrap(), vec![0.1, 0.2, 0.4]);
        assert_eq!(parse_values("2").unwrap(), vec![2.0]);
        for bad in ["", "a", "0:1", "0:1:0", "0:1:x", "1,nan"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }
}
