use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confined-ep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "LF line endings only");
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn period_table_for_d4_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "period-table",
        "--dim",
        "4",
        "--samples",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&dir.path().join("period_table_d4.csv"));
    assert_eq!(header, ["E", "T"]);
    assert_eq!(rows.len(), 12);
    for row in rows {
        assert!((row[1] - std::f64::consts::PI).abs() < 1e-8);
    }
}

#[test]
fn all_dims_writes_ordered_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "period-table",
        "--all-dims",
        "2..6",
        "--samples",
        "15",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&dir.path().join("figure1_summary.csv"));
    assert_eq!(header, ["E", "T_d2", "T_d3", "T_d4", "T_d5", "T_d6"]);
    for row in &rows {
        assert!(row[1..].windows(2).all(|w| w[0] > w[1]), "{row:?}");
    }
    for d in 2..=6 {
        assert!(dir.path().join(format!("period_table_d{d}.csv")).exists());
    }
}

#[test]
fn zero_samples_is_a_usage_error() {
    let out = run(&["period-table", "--samples", "0"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn unknown_flags_and_bad_ranges_are_usage_errors() {
    assert_eq!(code(&run(&["period-table", "--frobnicate"])), 64);
    assert_eq!(code(&run(&["period-table", "--all-dims", "5..2"])), 64);
    assert_eq!(code(&run(&["period-table", "--dim", "1"])), 64);
    assert_eq!(code(&run(&["simulate", "--mode", "sideways"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn expansion_check_reports_every_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "expansion-check",
        "--all-dims",
        "2..6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for d in 2..=6 {
        assert!(text.contains(&format!("d={d}:")));
    }
    let (_, rows) = read_csv(&dir.path().join("expansion_check.csv"));
    for row in rows {
        let (predicted, formula) = (row[4], row[5]);
        assert!(
            (formula - predicted).abs() <= 0.03 * predicted.abs() + 1e-9,
            "{row:?}"
        );
    }
}

#[test]
fn generated_fixtures_classify_with_their_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["generate", "--dim", "3", "--out", d]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for (slug, expected) in [
        ("stationary", 0),
        ("compliant", 0),
        ("cond1-violated", 2),
        ("cond2-violated", 2),
    ] {
        let input = dir.path().join(format!("fixture_{slug}_d3.csv"));
        let out = run(&[
            "check",
            "--dim",
            "3",
            "--input",
            input.to_str().unwrap(),
            "--out",
            d,
        ]);
        assert_eq!(code(&out), expected, "{slug}: {}", stderr(&out));
        let report: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("condition_report.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(report["d"], 3);
        assert!(report["verdict"].is_string());
    }
}

#[test]
fn malformed_profile_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "r,P0,u0\n0.1,1e-3,0\n0.2,oops,0\n").unwrap();
    let out = run(&[
        "check",
        "--dim",
        "3",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains(":3:"), "{}", stderr(&out));
}

#[test]
fn check_needs_a_dimension() {
    assert_eq!(code(&run(&["check", "--input", "whatever.csv"])), 64);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("tables");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# period table\ndim = 5\nsamples = 4\nout = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = run(&[
        "period-table",
        "--config",
        cfg.to_str().unwrap(),
        "--dim",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = read_csv(&out_dir.join("period_table_d3.csv"));
    assert_eq!(rows.len(), 4);
    assert!(!out_dir.join("period_table_d5.csv").exists());

    std::fs::write(&cfg, "dims = 3\n").unwrap();
    let out = run(&["period-table", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("unknown key"));
}

#[test]
fn orbit_simulation_matches_the_quadrature_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--dim",
        "3",
        "--mode",
        "orbit",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let measured = summary["measured_period"].as_f64().unwrap();
    let quadrature = summary["quadrature_period"].as_f64().unwrap();
    assert!((measured - quadrature).abs() < 1e-6);
    assert!(summary["energy_drift"].as_f64().unwrap() < 1e-8);
    let (header, rows) = read_csv(&dir.path().join("trajectory_orbit_d3.csv"));
    assert_eq!(header, ["t", "r", "u"]);
    assert!(rows.len() > 100);
}

#[test]
fn pw_simulation_blows_up_on_condition_two_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--dim",
        "3",
        "--mode",
        "pw",
        "--fixture",
        "cond2-violated",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let t = summary["blowup_time"].as_f64().unwrap();
    assert!(t > 0.0 && t < summary["period"].as_f64().unwrap());
    let (header, _) = read_csv(&dir.path().join("trajectory_pw_d3.csv"));
    assert_eq!(header, ["t", "r", "u", "P", "w"]);
}

#[test]
fn bulk_simulation_of_compliant_data_returns_after_one_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--dim",
        "3",
        "--mode",
        "bulk",
        "--fixture",
        "compliant",
        "--labels",
        "64",
        "--samples",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(summary["breakdown"].is_null());
    assert!(summary["boundary_return_error"].as_f64().unwrap() < 1e-5);
    let (header, rows) = read_csv(&dir.path().join("bulk_fields_d3.csv"));
    assert_eq!(header, ["t", "r", "rho", "u", "P"]);
    assert!(rows.iter().all(|r| r[2] >= 0.0));
    assert!(dir.path().join("bulk_boundary_d3.csv").exists());
    assert!(dir.path().join("bulk_monitor_d3.csv").exists());
}

#[test]
fn bulk_simulation_detects_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--dim",
        "3",
        "--mode",
        "bulk",
        "--fixture",
        "cond1-violated",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!summary["breakdown"].is_null());
}

#[test]
fn crossing_demo_finds_a_crossing_in_three_dimensions() {
    let out = run(&["simulate", "--dim", "3", "--crossing-demo"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("first crossing at t = "));
}

#[test]
fn custom_profile_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&[
        "generate",
        "--dim",
        "5",
        "--fixture",
        "custom",
        "--level",
        "0.5",
        "--shape-a",
        "8.5",
        "--nodes",
        "128",
        "--out",
        d,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let input = dir.path().join("fixture_custom_d5.csv");
    let out = run(&[
        "check",
        "--dim",
        "5",
        "--input",
        input.to_str().unwrap(),
        "--out",
        d,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("GlobalSmooth"));
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let d = dir.path().to_str().unwrap();
        assert_eq!(
            code(&run(&[
                "period-table",
                "--all-dims",
                "2..6",
                "--samples",
                "7",
                "--out",
                d
            ])),
            0
        );
        assert_eq!(
            code(&run(&[
                "simulate",
                "--dim",
                "5",
                "--mode",
                "pw",
                "--fixture",
                "cond2-violated",
                "--out",
                d
            ])),
            2
        );
    }
    for name in [
        "figure1_summary.csv",
        "period_table_d3.csv",
        "trajectory_pw_d5.csv",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}
