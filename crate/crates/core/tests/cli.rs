//! End-to-end checks of the command-line surface: exit codes, artifact
//! schemas, determinism, and the shipped example configurations.

use std::path::Path;
use std::process::{Command, Output};

fn omidyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omidyn"))
        .args(args)
        .env_remove("OMIDYN_OUT")
        .output()
        .expect("binary must run")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const BASE: &str = r#"
[system]
omega_c = 1.0
omega_m = 1.0
g_l = 1.0
g_q = 1.0
gamma = 1.0
"#;

#[test]
fn dynamics_single_point_emits_initial_moments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "single.toml",
        &format!(
            "{BASE}
[state]
kind = \"number\"
photons = 1
phonons = 3

[grid]
time = {{ start = 0.0, stop = 0.0, steps = 1 }}
"
        ),
    );
    let out = dir.path().join("out");
    let result = omidyn(&["dynamics", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(out.join("dynamics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,phonon_number,quadrature,gamma");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[1].parse::<f64>().unwrap(), 3.0);
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    assert!(lines.next().is_none());
    // metadata sidecar captures the resolved run
    let meta = std::fs::read_to_string(out.join("dynamics.meta.toml")).unwrap();
    assert!(meta.contains("experiment = \"dynamics\""));
    assert!(meta.contains("version"));
}

#[test]
fn eigen_sweep_emits_expected_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "eigen.toml",
        &format!(
            "{BASE}
[sweep]
g_l = {{ start = 0.0, stop = 0.4, steps = 5 }}

[eigen]
photon_max = 2
phonon_max = 1
"
        ),
    );
    let out = dir.path().join("out");
    let result = omidyn(&["eigen", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(out.join("eigen.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,N,g_l,g_q,energy");
    // 3 photon values x 2 phonon values x 5 sweep points
    assert_eq!(lines.count(), 30);
    // the uncoupled vacuum level sits at zero for every sweep point
    for line in csv.lines().skip(1).take(5) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "0");
        assert_eq!(fields[4].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();

    // malformed TOML
    let bad = write(dir.path(), "bad.toml", "[system\nomega_c=");
    let result = omidyn(&["dynamics", "--config", &bad]);
    assert_eq!(result.status.code(), Some(2));

    // invariant breach names the field
    let negative = write(
        dir.path(),
        "neg.toml",
        "[system]\nomega_c = 1.0\nomega_m = -1.0\ng_l = 0.0\ng_q = 0.0\ngamma = 1.0\n",
    );
    let result = omidyn(&["dynamics", "--config", &negative]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("omega_m"));

    // unknown key is named
    let unknown = write(
        dir.path(),
        "unknown.toml",
        &format!("{BASE}\n[output]\nsvgg = true\n"),
    );
    let result = omidyn(&["dynamics", "--config", &unknown]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("svgg"));

    // unstable photon sector in the state support, lowest offender cited
    let unstable = write(
        dir.path(),
        "unstable.toml",
        r#"
[system]
omega_c = 1.0
omega_m = 1.0
g_l = 0.0
g_q = -0.3
gamma = 1.0

[state]
kind = "coherent"
alpha = 2.0
beta = { re = 0.0 }
"#,
    );
    let result = omidyn(&["dynamics", "--config", &unstable]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("n = 1"));

    // missing config file
    let result = omidyn(&["dynamics", "--config", "/nonexistent/x.toml"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn output_directory_env_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "env.toml",
        &format!(
            "{BASE}
[grid]
time = {{ start = 0.0, stop = 1.0, steps = 3 }}
"
        ),
    );
    let out = dir.path().join("from-env");
    let result = Command::new(env!("CARGO_BIN_EXE_omidyn"))
        .args(["dynamics", "--config", &cfg])
        .env("OMIDYN_OUT", &out)
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(out.join("dynamics.csv").exists());
}

#[test]
fn unitary_limit_gamma_runs_through_the_spectrum_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "inf.toml",
        r#"
[system]
omega_c = 1.0
omega_m = 1.0
g_l = 1.0
g_q = 1.0
gamma = "inf"

[state]
kind = "number"
photons = 1
phonons = 0

[grid]
time = { start = 0.0, stop = 10.0, steps = 6 }
omega = { start = -4.0, stop = 4.0, steps = 81 }
"#,
    );
    let out = dir.path().join("out");
    let result = omidyn(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(csv.lines().count() > 400);
    // gamma = "inf" has no long-time limit: exit code 2 on the longtime path
    let result = omidyn(&["longtime", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn shipped_configs_load_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let configs = root.join("configs");
    let dir = tempfile::tempdir().unwrap();

    for (experiment, file) in [
        ("eigen", "eigen_sweep.toml"),
        ("dynamics", "dynamics_number.toml"),
        ("longtime", "longtime.toml"),
    ] {
        let out = dir.path().join(experiment);
        let result = omidyn(&[
            experiment,
            "--config",
            configs.join(file).to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--svg",
        ]);
        assert!(result.status.success(), "{experiment}: {result:?}");
        let csv = out.join(format!("{experiment}.csv"));
        assert!(csv.exists());
        let svgs: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .path()
                    .extension()
                    .is_some_and(|x| x == "svg")
            })
            .collect();
        assert!(!svgs.is_empty(), "{experiment} should emit SVG");
    }
}

#[test]
fn nonconvergence_exits_with_code_1() {
    // a tiny series cap forces the truncated-sum cross-check to give up
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "capped.toml",
        r#"
[system]
omega_c = 1.0
omega_m = 1.0
g_l = 1.0
g_q = 1.0
gamma = 2.0

[tolerances]
series_cap = 10
"#,
    );
    let out = dir.path().join("out");
    let result = omidyn(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1), "{result:?}");
    assert!(String::from_utf8_lossy(&result.stderr).contains("cap"));
}

#[test]
fn verify_subcommand_passes_on_the_shipped_regime() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let cfg = root.join("configs/verify.toml");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify");
    let result = omidyn(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(result.status.success(), "{stdout}\n{result:?}");
    let report = std::fs::read_to_string(out.join("verify.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "check,max_abs_error,tolerance,pass");
    let mut seen = 0;
    for line in lines {
        assert!(line.ends_with(",true"), "failed check row: {line}");
        seen += 1;
    }
    assert!(seen >= 7, "expected a full battery, saw {seen} checks");
    assert!(stdout.contains("verify"));
}
