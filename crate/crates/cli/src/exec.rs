//! Command implementations shared by the binary and the test suites.

use std::path::Path;

use wsansim_core::sim::{run_scenario, RunOptions, RunOutput};
use wsansim_core::{derive_seed, ManagerKind, Scenario};

use crate::config::{load_scenario, Manager, Overrides, ScenarioFile};
use crate::output::{
    fmt_secs, render_compare_table, render_summary_table, write_outputs,
};
use crate::CliError;

fn header(path: &Path, sc: &Scenario) -> String {
    format!(
        "scenario: {}\nconfig: {:016x}\nmanager: {}\nseed: {}\nduration_s: {}\n",
        path.display(),
        sc.config_digest,
        sc.manager.label(),
        sc.seed,
        fmt_secs(sc.duration.micros())
    )
}

/// `run`: execute one scenario, write outputs, return the console text.
pub fn cmd_run(
    path: &Path,
    overrides: &Overrides,
    out_dir: &Path,
    trace: bool,
) -> Result<String, CliError> {
    let (_, scenario) = load_scenario(path, overrides)?;
    let output = execute(&scenario, trace);
    write_outputs(out_dir, &output)?;
    let mut text = header(path, &scenario);
    text.push('\n');
    text.push_str(&render_summary_table(&output.summary));
    Ok(text)
}

/// `compare`: the same scenario under both managers with independent
/// derived streams; outputs land under `<out>/none/` and `<out>/fuzzy/`.
pub fn cmd_compare(
    path: &Path,
    overrides: &Overrides,
    out_dir: &Path,
) -> Result<String, CliError> {
    let base = Overrides { manager: None, ..*overrides };
    let (file, merged) = load_scenario(path, &base)?;
    let (open_sc, fuzzy_sc) = compare_pair(&file);

    // the two runs share nothing and may proceed side by side
    let (open, fuzzy) = std::thread::scope(|s| {
        let a = s.spawn(|| execute(&open_sc, false));
        let b = s.spawn(|| execute(&fuzzy_sc, false));
        (a.join().expect("open-loop run"), b.join().expect("closed-loop run"))
    });
    write_outputs(&out_dir.join("none"), &open)?;
    write_outputs(&out_dir.join("fuzzy"), &fuzzy)?;

    let mut text = format!(
        "scenario: {}\nconfig: {:016x}\nseed: {}\nduration_s: {}\n\n",
        path.display(),
        merged.config_digest,
        merged.seed,
        fmt_secs(merged.duration.micros())
    );
    text.push_str(&render_compare_table(&open.summary, &fuzzy.summary));
    Ok(text)
}

/// Builds the two sub-scenarios of a comparison. Each consumes an
/// independent stream derived from the configured seed and the manager
/// label, so neither run's draws depend on the other's existence.
pub fn compare_pair(file: &ScenarioFile) -> (Scenario, Scenario) {
    let lower = |manager: Manager| {
        let mut f = file.clone();
        f.manager = manager;
        let mut sc = f.to_scenario();
        sc.seed = derive_seed(file.seed, manager_label(manager));
        sc
    };
    (lower(Manager::None), lower(Manager::Fuzzy))
}

fn manager_label(m: Manager) -> &'static str {
    ManagerKind::from(m).label()
}

pub fn execute(scenario: &Scenario, trace: bool) -> RunOutput {
    run_scenario(scenario, &RunOptions { trace }).expect("validated scenario resolves")
}
