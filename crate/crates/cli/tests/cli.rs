//! End-to-end tests of the command-line interface: exit codes, config file
//! merging, and deterministic CSV output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psam-mimo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should run")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("psam-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_prints_csv_row() {
    let out = run(&[
        "simulate",
        "--scheme",
        "nonfeedback",
        "--nt",
        "2",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--snr-db",
        "10",
        "--trials",
        "500",
        "--seed",
        "1",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,rho,lp,delay,alpha,phi,mean,stderr"
    );
    assert_eq!(lines.count(), 1, "exactly one data row expected");
}

#[test]
fn config_file_and_flag_merge_with_flags_winning() {
    let dir = temp_dir("merge");
    let cfg = dir.join("run.conf");
    std::fs::write(
        &cfg,
        "scheme = ccf\nnt = 4\nnr = 4\nblock_len = 20\npilot_len = 2\nsnr_db = 10\nrho = 0.5\ntrials = 300\nseed = 5\n",
    )
    .unwrap();
    let base = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(base.status.success());
    let flagged = run(&["simulate", "--config", cfg.to_str().unwrap(), "--rho", "0"]);
    assert!(flagged.status.success());
    let rho_col = 1usize;
    let pick = |o: &Output| -> f64 {
        let text = String::from_utf8(o.stdout.clone()).unwrap();
        let row = text.lines().nth(1).unwrap();
        row.split(',').nth(rho_col).unwrap().parse().unwrap()
    };
    assert_eq!(pick(&base), 0.5);
    assert_eq!(pick(&flagged), 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweeps_are_deterministic_and_written_atomically() {
    let dir = temp_dir("det");
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");
    for (path, workers) in [(&out_a, "1"), (&out_b, "4")] {
        let out = run(&[
            "sweep",
            "--scheme",
            "cgf",
            "--nt",
            "2",
            "--nr",
            "2",
            "--block-len",
            "20",
            "--snr-db",
            "0,10",
            "--trials",
            "400",
            "--seed",
            "9",
            "--deterministic",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read_to_string(&out_a).unwrap();
    let b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(a, b, "worker count must not change numeric output");
    assert_eq!(a.lines().count(), 3, "header plus two grid rows");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gap_flag_adds_gap_ratio_column() {
    let out = run(&[
        "simulate",
        "--scheme",
        "nonfeedback",
        "--nt",
        "2",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--snr-db",
        "10",
        "--trials",
        "500",
        "--gap",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with(",gap_ratio"), "header: {header}");
    let row = text.lines().nth(1).unwrap();
    let gap: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((0.0..0.2).contains(&gap), "gap ratio {gap} implausible");
}

#[test]
fn simulate_rejects_alpha_lists() {
    let out = run(&[
        "simulate",
        "--scheme",
        "nonfeedback",
        "--nt",
        "2",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--snr-db",
        "10",
        "--alpha",
        "0.4,0.6",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_code_2() {
    let out = run(&[
        "simulate",
        "--scheme",
        "nonfeedback",
        "--nt",
        "2",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--snr-db",
        "10",
        "--alpha",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("alpha"), "error should name the field: {err}");

    // Missing required key.
    let out = run(&[
        "simulate",
        "--scheme",
        "nonfeedback",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--snr-db",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("nt"));
}

#[test]
fn io_errors_exit_with_code_4() {
    let out = run(&[
        "sweep",
        "--scheme",
        "nonfeedback",
        "--nt",
        "2",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--snr-db",
        "10",
        "--trials",
        "200",
        "--out",
        "/nonexistent-dir/result.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unknown_figure_preset_is_rejected() {
    let out = run(&["figure", "no-such-figure"]);
    assert_eq!(out.status.code(), Some(2));
    let ls = run(&["figure", "--list"]);
    assert!(ls.status.success());
    let text = String::from_utf8(ls.stdout).unwrap();
    assert!(text.contains("cap-vs-rho-4x4"));
}

#[test]
fn optimize_alpha_reports_closed_form() {
    let out = run(&[
        "optimize",
        "alpha",
        "--scheme",
        "ccf",
        "--nt",
        "2",
        "--nr",
        "2",
        "--block-len",
        "20",
        "--pilot-len",
        "2",
        "--snr-db",
        "10",
        "--rho",
        "0.3",
        "--trials",
        "500",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("alpha_numeric"));
    // gamma = 18/16 -> alpha* = 0.75.
    assert!(text.contains("alpha_closed_form = 0.750000"), "{text}");
}
