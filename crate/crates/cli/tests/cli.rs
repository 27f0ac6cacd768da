use std::path::PathBuf;
use std::process::Command as Process;

use heom_cli::config::{config_from_header, load, RunConfig};
use heom_cli::run::{execute, Command, RunSpec, MAX_INDICES_ENV};
use heom_core::CouplingMode;

fn preset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn heom(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_heom")).args(args).output().expect("binary runs")
}

fn small_spec(command: Command) -> RunSpec {
    let mut spec = RunSpec::new(command);
    spec.config = Some(preset("fig3b.toml"));
    spec.overrides = vec!["integrator.t_max=5.0".into(), "hierarchy.depth=4".into(), "hierarchy.depth_full=4".into()];
    spec
}

#[test]
fn misspelled_key_is_named_in_the_error() {
    let err = RunConfig::from_toml_str("[bath]\ngamma = 0.2\ncutofff = 1.0\n").unwrap_err();
    assert!(err.to_string().contains("cutofff"), "{err}");
    let mut spec = small_spec(Command::Steady);
    spec.overrides.push("bath.cutofff=1".into());
    let err = execute(&spec).err().expect("override of an unknown key fails");
    assert!(err.to_string().contains("cutofff"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn empty_field_block_disables_every_process() {
    let cfg = RunConfig::from_toml_str("[field]\n[bath]\ngamma = 0.2\ndelta_sq = 0.4\n").unwrap();
    let field = cfg.field().unwrap();
    assert!(field.processes().iter().all(|p| !p.enabled));
}

#[test]
fn fig1c_preset_gives_the_caption_bath() {
    let cfg = load(Some(&preset("fig1c.toml")), &[]).unwrap();
    let bath = cfg.bath(CouplingMode::Full).unwrap();
    assert!(bath.enabled);
    assert_eq!((bath.gamma, bath.delta_sq), (0.2, 0.4));
    assert!(!cfg.field().unwrap().any_enabled());
}

#[test]
fn every_preset_validates() {
    let mut count = 0;
    for entry in std::fs::read_dir(preset("")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = load(Some(&path), &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        for mode in [CouplingMode::Rwa, CouplingMode::Full] {
            cfg.sim(mode).unwrap();
        }
        count += 1;
    }
    assert_eq!(count, 13);
}

#[test]
fn header_reparses_to_the_resolved_config() {
    for command in [Command::Steady, Command::Evolve] {
        let spec = small_spec(command);
        let out = execute(&spec).unwrap();
        let echoed = config_from_header(&out.csv).unwrap();
        let resolved = heom_cli::run::resolve_config(&spec).unwrap();
        assert_eq!(echoed, resolved);
        assert_eq!(echoed.integrator.t_max, 5.0);
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    for command in [Command::Evolve, Command::Lindblad, Command::Mc] {
        let mut spec = small_spec(command);
        spec.config = Some(preset("fig2b.toml"));
        spec.overrides.push("mc.n_traj=200".into());
        spec.seed = 7;
        spec.threads = Some(2);
        let a = execute(&spec).unwrap().csv;
        let b = execute(&spec).unwrap().csv;
        assert_eq!(a, b);
    }
}

#[test]
fn sweep_writes_one_row_per_value() {
    let spec = small_spec(Command::Sweep { axis: "bath.beta".into(), values: vec![0.0, 0.1, 0.2] });
    let csv = execute(&spec).unwrap().csv;
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "value,rwa_pop_excited,full_pop_excited,markov_pop_excited,status");
    assert_eq!(rows.len(), 4);
    let first: Vec<f64> = rows[1].split(',').take(4).map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!(first[1..].iter().all(|p| (p - 0.5).abs() < 1e-7), "{}", rows[1]);
}

#[test]
fn exit_codes_follow_the_error_category() {
    let ok = heom(&["steady", "--config", preset("fig3b.toml").to_str().unwrap(), "--depth", "4", "-q"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("series,depth,pop_excited"));

    let bad = heom(&["steady", "--set", "bath.gamma=-1", "--set", "bath.delta_sq=0.4"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error[config]"));

    // a pure dephasing field has no unique stationary state
    let degenerate = heom(&[
        "steady",
        "--set",
        "field.omega.gamma=0.2",
        "--set",
        "field.omega.delta_sq=0.4",
        "--set",
        "integrator.steady_method=\"null_space\"",
        "--depth",
        "4",
    ]);
    assert_eq!(degenerate.status.code(), Some(3), "{}", String::from_utf8_lossy(&degenerate.stderr));

    let slow = heom(&[
        "steady",
        "--config",
        preset("fig3b.toml").to_str().unwrap(),
        "--depth",
        "4",
        "--set",
        "integrator.steady_method=\"propagate\"",
        "--set",
        "integrator.steady_t_max=1.0",
    ]);
    assert_eq!(slow.status.code(), Some(4), "{}", String::from_utf8_lossy(&slow.stderr));
    assert!(String::from_utf8_lossy(&slow.stderr).starts_with("error[convergence]"));
}

#[test]
fn index_cap_comes_from_the_environment() {
    let out = Process::new(env!("CARGO_BIN_EXE_heom"))
        .args(["steady", "--config", preset("fig3b.toml").to_str().unwrap(), "--depth", "8"])
        .env(MAX_INDICES_ENV, "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('5'));
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("steady.csv");
    let out = heom(&[
        "steady",
        "--config",
        preset("fig3b.toml").to_str().unwrap(),
        "--depth",
        "4",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# heom "));
    assert!(out.stdout.is_empty());
}
