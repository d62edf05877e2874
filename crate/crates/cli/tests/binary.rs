use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cvcoupler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvcoupler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn identical_invocations_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, jobs) in [(&a, "1"), (&b, "4")] {
        let out = cvcoupler(&[
            "--scenario",
            "fig3",
            "--zeta-max",
            "2",
            "--jobs",
            jobs,
            "--out",
            &out_arg(dir.path()),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let csv_a = fs::read(a.path().join("fig3.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.path().join("fig3.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("# schema = cvcoupler-csv/1\n"));
    assert!(text.contains("# kappa = 1.13\n"));
    assert!(text.contains("# zeta_max = 2\n"));
}

#[test]
fn rejects_sub_threshold_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvcoupler(&["--kappa", "0.9", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("linearization invalid"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["--scenario", "nope"][..],
        &["--bogus"],
        &["--kappa"],
        &["--scenario", "fig3", "--steps-per-unit", "x"],
    ] {
        assert_eq!(cvcoupler(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvcoupler(&[
        "--scenario",
        "fig3",
        "--steps-per-unit",
        "1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn zeta_max_override_extends_fig2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvcoupler(&[
        "--scenario",
        "fig2",
        "--zeta-max",
        "8",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let zeta: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert_eq!(zeta, 8.0);
    // summary on stdout and in the output directory
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        stdout,
        fs::read_to_string(dir.path().join("fig2_summary.txt")).unwrap()
    );
    let en_pumps: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("fig2.en_pumps_max = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(en_pumps < 1e-2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "# custom run\nscenario = custom\nkappa = 1.8\nratio = 0.5\nzeta_max = 1\n",
    )
    .unwrap();
    let out = cvcoupler(&[
        "--config",
        cfg.to_str().unwrap(),
        "--kappa",
        "2.0",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("custom.csv")).unwrap();
    assert!(text.contains("# kappa = 2\n"));
    assert!(text.contains("# power_ratio = 0.5\n"));
    // the z_mm column tracks zeta * kappa / C
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<f64> = line
            .split(',')
            .take(2)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!((f[1] - f[0] * 2.0 / 0.08).abs() <= 1e-9 * f[1].max(1.0));
    }
}

#[test]
fn sweep_writes_one_csv_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = cvcoupler(&[
        "--scenario",
        "fig4b",
        "--steps-per-unit",
        "1024",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "fig4b_kappa-1.01.csv",
            "fig4b_kappa-1.13.csv",
            "fig4b_kappa-1.6.csv",
            "fig4b_kappa-2.26.csv",
            "fig4b_kappa-3.2.csv",
            "fig4b_summary.txt"
        ]
    );
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("peak_table.global_max = fig4b_kappa-1.01"));
}
