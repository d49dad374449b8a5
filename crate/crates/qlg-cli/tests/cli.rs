//! End-to-end tests of the `qlg` binary: run-directory contents,
//! reproducibility, exit codes, and the compare verb.

use std::path::Path;
use std::process::{Command, Output};

fn qlg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("reading {rel}: {e}"))
}

#[test]
fn run_writes_a_complete_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qlg(
        tmp.path(),
        &[
            "run",
            "--output-root",
            "runs",
            "name=demo",
            "steps=60",
            "snapshot_every=20",
            "--model.kind",
            "quantum",
            "--model.theta",
            "1.5",
            "--set",
            "reference.enabled=true",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run = tmp.path().join("runs/demo");
    for f in [
        "config.txt",
        "provenance.txt",
        "series.csv",
        "comparison.csv",
        "comparison.txt",
        "plot.gp",
        "theory_table.csv",
    ] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    let snap = read(&run, "snapshots/step_0000060.csv");
    assert!(snap.starts_with("site,x,p_plus,p_minus,rho,u\n"));
    assert_eq!(snap.lines().count(), 257);

    let prov = read(&run, "provenance.txt");
    assert!(prov.contains("model.theta = 1.5"));
    assert!(prov.contains("alpha_eff ="));

    // the config echo is sufficient to re-run the experiment exactly
    let out2 = qlg(
        tmp.path(),
        &[
            "run",
            "--output-root",
            "runs",
            "-c",
            "runs/demo/config.txt",
            "--set",
            "name=demo2",
        ],
    );
    assert!(out2.status.success());
    assert_eq!(
        read(&run, "snapshots/step_0000060.csv"),
        read(&tmp.path().join("runs/demo2"), "snapshots/step_0000060.csv"),
        "identical config must reproduce bit-identical snapshots"
    );
}

#[test]
fn microscopic_runs_are_seed_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = qlg(
            tmp.path(),
            &[
                "run",
                "--output-root",
                "runs",
                &format!("name={name}"),
                "mode=microscopic",
                "ensemble.n=32",
                "seed=99",
                "steps=40",
                "snapshot_every=20",
                "--model.kind",
                "classical",
                "--model.alpha",
                "0.707",
            ],
        );
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(
        read(&tmp.path().join("runs/a"), "snapshots/step_0000040.csv"),
        read(&tmp.path().join("runs/b"), "snapshots/step_0000040.csv")
    );
}

#[test]
fn compare_verb_reports_zero_for_identical_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["x", "y"] {
        let out = qlg(
            tmp.path(),
            &[
                "run",
                "--output-root",
                "runs",
                &format!("name={name}"),
                "steps=30",
                "snapshot_every=10",
            ],
        );
        assert!(out.status.success());
    }
    let out = qlg(tmp.path(), &["compare", "runs/x", "runs/y"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("max_l2 = 0"), "{text}");
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();

    // 2: config error, naming the field
    let out = qlg(tmp.path(), &["run", "steps=7", "snapshot_every=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("snapshot_every"));

    let out = qlg(tmp.path(), &["run", "--model.kind", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));

    // 4: the two-bit EFT reference hits its singularity when the profile
    // crosses unit density
    let out = qlg(
        tmp.path(),
        &[
            "run",
            "--output-root",
            "runs",
            "name=sing",
            "--model.kind",
            "twobit",
            "steps=20",
            "snapshot_every=10",
            "--set",
            "reference.enabled=true",
            "--set",
            "reference.mode=eft",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // usage errors from the argument parser are also 2
    let out = qlg(tmp.path(), &["no-such-verb"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_fit_reference_reports_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qlg(
        tmp.path(),
        &[
            "run",
            "--output-root",
            "runs",
            "name=fitme",
            "steps=80",
            "snapshot_every=20",
            "--model.kind",
            "classical",
            "--model.alpha",
            "0.5",
        ],
    );
    assert!(out.status.success());
    let out = qlg(tmp.path(), &["compare", "runs/fitme", "--fit-reference"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    let c_s: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("c_s_fit = "))
        .expect("fit line present")
        .parse()
        .unwrap();
    assert!((0.3..1.0).contains(&c_s), "fitted c_s {c_s}");
}

#[test]
fn output_root_env_var_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qlg"))
        .current_dir(tmp.path())
        .env("QLG_OUTPUT_ROOT", "from_env")
        .args(["run", "name=envrun", "steps=10", "snapshot_every=10"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(tmp.path().join("from_env/envrun/config.txt").is_file());
}

#[test]
fn theory_report_prints_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qlg(
        tmp.path(),
        &[
            "theory-report",
            "--model",
            "classical",
            "--alpha",
            "0.707",
            "--points",
            "11",
            "--table",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("c_s = 0.707"));
    assert!(text.contains("nu = 0.5"));
    assert!(text.contains("rho,d_plus,d_minus,J_plus,J_minus,adv_coeff,diff_coeff"));
    assert_eq!(text.lines().filter(|l| l.contains(',')).count(), 12);
}
