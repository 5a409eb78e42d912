use std::path::Path;
use std::process::{Command, Output};

use rabi_core::cli::{config_from_metadata, Config};
use rabi_core::models::nqrm_coupling;

const SMALL: &str = "\
# small 2QRM check
family = nqrm
n = 2
nu_tilde = 0.01
omega_tilde = 0.02
Omega = 0.1
g_n_over_nu_tilde = 0.125
fock = 0
spin = up_x
t_final = 0.25
samples = 16
n_max = 30
substeps = 32
";

fn rabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn lists_presets() {
    let out = rabi(&["presets"]);
    assert_eq!(code(&out), 0);
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "fig2a"));
    assert!(names.lines().any(|l| l == "si_s1_collapse"));
}

#[test]
fn run_writes_csvs_that_carry_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "small.conf", SMALL);
    let out_a = dir.path().join("a");
    let out = rabi(&["run", "--config", &conf, "--out", out_a.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let csv = read(out_a.join("equivalence.csv"));
    assert!(read(out_a.join("observables.csv")).starts_with("# rabi-core"));
    let embedded = config_from_metadata(&csv).unwrap();
    let parsed = Config::parse(SMALL).unwrap();
    assert_eq!(embedded, parsed.to_text());

    // the embedded config reruns to byte-identical output
    let again = write(dir.path(), "again.conf", &embedded);
    let out_b = dir.path().join("b");
    assert_eq!(code(&rabi(&["run", "--config", &again, "--out", out_b.to_str().unwrap()])), 0);
    for file in ["equivalence.csv", "observables.csv"] {
        assert_eq!(read(out_a.join(file)), read(out_b.join(file)), "{file}");
    }
}

#[test]
fn derived_parameters_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "small.conf", SMALL);
    let out = rabi(&["run", "--config", &conf, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = read(dir.path().join("equivalence.csv"));
    let derived = |key: &str| -> f64 {
        let prefix = format!("# {key} = ");
        csv.lines().skip_while(|l| *l != "# derived").find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
    };
    let cfg = Config::parse(&config_from_metadata(&csv).unwrap()).unwrap();
    let eta = derived("eta");
    let (g, _) = nqrm_coupling(eta, cfg.drive, cfg.n);
    assert!((g - derived("g_2")).abs() < 1e-12);
    assert!((g / cfg.nu_tilde - 0.125).abs() < 1e-12);
    assert!((derived("t_final") - 0.25 * 2.0 * std::f64::consts::PI / cfg.nu_tilde).abs() < 1e-12 * derived("t_final"));
}

#[test]
fn preset_writes_its_config_then_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let out = rabi(&["preset", "si_v_plan", "--out", path]);
    assert_eq!(code(&out), 0);
    let conf = read(dir.path().join("si_v_plan.conf"));
    let plan = read(dir.path().join("plan.csv"));
    assert_eq!(config_from_metadata(&plan).unwrap(), conf);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("gradient_hz = 9.250000e3"), "{stdout}");

    let only = tempfile::tempdir().unwrap();
    let out = rabi(&["preset", "fig2a", "--no-run", "--out", only.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(only.path().join("fig2a.conf").exists());
    assert!(!only.path().join("equivalence.csv").exists());
}

#[test]
fn validity_breach_exits_two_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(
        dir.path(),
        "qrm.conf",
        "family = qrm\nOmega = 0.1\neta = 0.4\nfock = 2\nspin = g\nt_final = 5\nsamples = 10\nn_max = 20\n",
    );
    let out = rabi(&["compare-qrm", "--config", &conf, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("qrm_compare.csv"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.ends_with("validity_flag"));
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write(dir.path(), "bad.conf", &format!("{SMALL}colour = blue\n"));
    let out = rabi(&["run", "--config", &bad_key, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let too_small = write(dir.path(), "small.conf", &SMALL.replace("n_max = 30", "n_max = 1"));
    assert_eq!(code(&rabi(&["run", "--config", &too_small, "--out", dir.path().to_str().unwrap()])), 1);

    assert_eq!(code(&rabi(&["run", "--config", "/nonexistent/x.conf", "--out", "/tmp"])), 1);
    assert_eq!(code(&rabi(&["preset", "fig9", "--out", dir.path().to_str().unwrap()])), 1);

    let good = write(dir.path(), "good.conf", SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_rabi"))
        .args(["run", "--config", &good, "--out", dir.path().to_str().unwrap()])
        .env("RABI_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn wrong_family_for_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "small.conf", SMALL);
    assert_eq!(code(&rabi(&["compare-qrm", "--config", &conf, "--out", dir.path().to_str().unwrap()])), 1);
}

#[test]
fn sweep_overrides_truncations() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "small.conf", &SMALL.replace("n = 2", "n = 3").replace("n_max = 30", "n_max = 20"));
    let out = rabi(&["sweep", "--config", &conf, "--nmax", "12,24", "--out", dir.path().to_str().unwrap()]);
    assert!(code(&out) != 1, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("truncation.csv"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.contains("relative_difference_12_24"), "{header}");
}
