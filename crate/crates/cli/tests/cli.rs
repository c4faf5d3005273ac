//! Front-end behavior: the shipped scenario file, validation reporting,
//! exit codes, output formats and rerun determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wsansim::config::{load_scenario, Manager, Overrides, ScenarioFile};
use wsansim::exec::execute;
use wsansim::output::{render_summary_csv, render_timeseries};
use wsansim_core::SimTime;

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wsansim"))
}

fn run_bin(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn shipped_scenario_matches_documented_defaults() {
    let path = repo_file("scenarios/paper_5_1.json");
    let (file, scenario) = load_scenario(&path, &Overrides::default()).unwrap();
    assert_eq!(file.duration_s, 100.0);
    assert_eq!(file.seed, 1);
    assert_eq!(file.manager, Manager::None);
    assert_eq!(scenario.flows.len(), 5);
    for f in &scenario.flows {
        assert_eq!(f.period_us, 10_000, "default sampling period is 10 ms");
        assert_eq!(f.frame_bytes, 45);
    }
    let s3 = &scenario.flows[2];
    assert_eq!(s3.activation[0].on, SimTime::from_secs(60));
    assert_eq!(s3.route, vec!["s3".to_string(), "s6".into(), "a2".into()]);
    let s5 = &scenario.flows[4];
    assert!(!s5.managed);
    assert_eq!(s5.activation[0].on, SimTime::from_secs(20));
    assert_eq!(s5.activation[0].off, Some(SimTime::from_secs(40)));
    assert_eq!(scenario.mac.data_rate_bps, 250_000);
    assert_eq!(scenario.controller.setpoint, 0.10);
    assert_eq!(scenario.controller.interval_us, 1_000_000);
}

#[test]
fn shipped_scenario_round_trips() {
    let path = repo_file("scenarios/paper_5_1.json");
    let file = ScenarioFile::load(&path).unwrap();
    let text = serde_json::to_string_pretty(&file).unwrap();
    let reparsed: ScenarioFile = serde_json::from_str(&text).unwrap();
    assert_eq!(file, reparsed);
}

#[test]
fn zero_period_min_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "nodes": [{"id": "s1", "role": "source"}, {"id": "a1", "role": "actuator"}],
            "flows": [{"id": "f", "source": "s1", "sink": "a1", "route": ["s1", "a1"],
                       "period_min_ms": 0.0}]
        }"#,
    )
    .unwrap();
    let err = load_scenario(&path, &Overrides::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("flows[0].period_min_ms"), "{msg}");
}

#[test]
fn undeclared_route_hop_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "nodes": [{"id": "s1", "role": "source"}, {"id": "a1", "role": "actuator"}],
            "flows": [{"id": "f", "source": "s1", "sink": "a1", "route": ["s1", "ghost", "a1"]}]
        }"#,
    )
    .unwrap();
    let err = load_scenario(&path, &Overrides::default()).unwrap_err();
    assert!(err.to_string().contains("undeclared node ghost"), "{err}");
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let scenario = repo_file("scenarios/paper_5_1.json");
    let scenario = scenario.to_str().unwrap();

    // config error: zero duration
    let r = run_bin(&["run", "--scenario", scenario, "--duration", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("duration_s"));

    // I/O error: missing scenario file
    let r = run_bin(&["run", "--scenario", "no/such/file.json", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));

    // success
    let r = run_bin(&[
        "run", "--scenario", scenario, "--duration", "2", "--seed", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("dmr_timeseries.csv").exists());
    assert!(out.join("summary.csv").exists());
    assert!(!out.join("events.log").exists(), "trace file only with --trace");
}

#[test]
fn trace_flag_writes_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let scenario = repo_file("scenarios/paper_5_1.json");
    let r = run_bin(&[
        "run", "--scenario", scenario.to_str().unwrap(), "--duration", "1",
        "--trace", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0));
    let log = std::fs::read_to_string(out.join("events.log")).unwrap();
    let first = log.lines().next().unwrap();
    // <micros> <seq> <kind> <details>
    let mut parts = first.split(' ');
    parts.next().unwrap().parse::<u64>().unwrap();
    parts.next().unwrap().parse::<u64>().unwrap();
    assert!(parts.next().is_some());
    assert!(log.lines().any(|l| l.contains("SimEnd")));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (o1, o2) = (dir.path().join("a"), dir.path().join("b"));
    let scenario = repo_file("scenarios/paper_5_1.json");
    let args = |out: &Path| {
        vec![
            "run".to_string(),
            "--scenario".into(),
            scenario.to_str().unwrap().into(),
            "--duration".into(),
            "5".into(),
            "--manager".into(),
            "fuzzy".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let r1 = bin().args(args(&o1)).output().unwrap();
    let r2 = bin().args(args(&o2)).output().unwrap();
    // stdout differs only in the --out path, which is not printed
    assert_eq!(r1.stdout, r2.stdout);
    for name in ["dmr_timeseries.csv", "summary.csv"] {
        assert_eq!(
            std::fs::read(o1.join(name)).unwrap(),
            std::fs::read(o2.join(name)).unwrap(),
            "{name} must be byte-identical"
        );
    }
}

#[test]
fn compare_outputs_both_runs_and_skips_interferer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let scenario = repo_file("scenarios/paper_5_1.json");
    let r = run_bin(&[
        "compare", "--scenario", scenario.to_str().unwrap(), "--duration-ignored",
    ]);
    assert_ne!(r.status.code(), Some(0), "unknown flag is rejected");

    let r = run_bin(&[
        "compare", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("seed: 1"), "default seed is stated in the header:\n{text}");
    let table: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("flow")).collect();
    assert_eq!(table.len(), 5, "header plus one row per managed flow:\n{text}");
    assert!(!table.iter().any(|l| l.starts_with("s5")), "interferer excluded");
    for sub in ["none", "fuzzy"] {
        assert!(out.join(sub).join("summary.csv").exists());
        assert!(out.join(sub).join("dmr_timeseries.csv").exists());
    }
}

#[test]
fn never_activated_flow_appears_with_empty_dmr() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("idle.json");
    std::fs::write(
        &path,
        r#"{
            "duration_s": 2.0,
            "nodes": [
                {"id": "s1", "role": "source"}, {"id": "s9", "role": "source"},
                {"id": "a1", "role": "actuator"}
            ],
            "flows": [
                {"id": "s1", "source": "s1", "sink": "a1", "route": ["s1", "a1"]},
                {"id": "s9", "source": "s9", "sink": "a1", "route": ["s9", "a1"],
                 "activation": [{"on_s": 1000.0}]}
            ]
        }"#,
    )
    .unwrap();
    let (_, scenario) = load_scenario(&path, &Overrides::default()).unwrap();
    let output = execute(&scenario, false);
    let csv = render_summary_csv(&output.summary);
    let idle = csv.lines().find(|l| l.starts_with("s9,")).expect("idle flow present");
    assert!(idle.starts_with("s9,,0,0,0,0,"), "empty DMR column: {idle}");
    // and its window rows exist with zero releases
    let ts = render_timeseries(&output.summary);
    assert!(ts.lines().any(|l| l.contains(",s9,")));
}
