use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcv")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ops_table_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ops.csv");
    let o = qcv(&["ops-table", "--preset", "ops-default", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (s1, s2) = (0.1f64.sin(), 0.05f64.sin());
    let expected = [
        4.0 * s2 * s2 / 0.01,
        4.0 * s2 * s2 / 0.01,
        s1 * s1 / 0.01,
        (2.0 * s1 * s1 - 4.0 * s2 * s2) / 0.01,
    ];
    let r = rows(&out);
    assert_eq!(r.len(), 4);
    for (row, w) in r.iter().zip(expected) {
        assert_eq!(row[3], "true");
        assert!((f(&row[4]) - w).abs() < 1e-13, "{row:?}");
        assert!((f(&row[5]) - (1.0 / w).cbrt()).abs() < 1e-13);
    }
}

#[test]
fn ops_table_flags_diagonal_operator() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ops.csv");
    let o = qcv(&["ops-table", "--operators", "gamma(0,1,0)", "--eps", "1e-3", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "\"gamma(0");
    assert!(text.contains("\",false,false,false,"));
}

#[test]
fn equilibrium_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq.csv");
    let o = qcv(&["equilibrium", "--preset", "equilateral3", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# lambda=3.0000000000000000e0,"));
    assert!(text.lines().next().unwrap().ends_with("shape=equilateral"));
    let p: Vec<[f64; 2]> = rows(&out).iter().map(|r| [f(&r[2]), f(&r[3])]).collect();
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let d = ((p[i][0] - p[j][0]).powi(2) + (p[i][1] - p[j][1]).powi(2)).sqrt();
        assert!((d - 1.0).abs() < 1e-9);
    }
    let o = qcv(&["equilibrium", "--preset", "l4", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let l4 = &rows(&out)[2];
    assert!((f(&l4[2]) + 0.488).abs() < 1e-15);
    assert!((f(&l4[3]) - 0.75f64.sqrt()).abs() < 1e-15);
    let o = qcv(&["equilibrium", "--preset", "collinear3"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("shape: collinear"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "mu 0.1\n").unwrap();
    assert_eq!(code(&qcv(&["equilibrium", "--config", path_str(&bad)])), 2);
    fs::write(&bad, "colour=blue\n").unwrap();
    assert_eq!(code(&qcv(&["simulate", "--config", path_str(&bad)])), 2);
    assert_eq!(code(&qcv(&["error-scan", "--operators", ";"])), 2);
    assert_eq!(code(&qcv(&["simulate", "--preset", "fig1"])), 2);
    assert_eq!(code(&qcv(&["simulate", "--operators", "leapfrog"])), 2);
    assert_eq!(code(&qcv(&["simulate", "--mu", "abc"])), 2);
    assert_eq!(code(&qcv(&["simulate", "--beta", "-2"])), 2);
    assert_eq!(code(&qcv(&["bogus"])), 2);
}

#[test]
fn numerical_failures_exit_three() {
    let o = qcv(&["equilibrium", "--masses", "1,1", "--guess", "0,0;0,0"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_is_bounded_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, m) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("m.csv"));
    for out in [&a, &b] {
        let o = qcv(&["simulate", "--preset", "fig-earth-moon", "-o", path_str(out), "--metrics", path_str(&m)]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let r = rows(&a);
    assert_eq!(r.len(), 126 * 3);
    assert_eq!(r[0].len(), 11);
    let test_particle: Vec<&Vec<String>> = r.iter().filter(|row| row[2] == "2").collect();
    let (x0, y0) = (f(&test_particle[0][3]), f(&test_particle[0][5]));
    for row in &test_particle {
        let d = ((f(&row[3]) - x0).powi(2) + (f(&row[5]) - y0).powi(2)).sqrt();
        assert!(d < 0.5);
    }
    let metrics = rows(&m);
    assert_eq!(metrics.len(), 126);
    assert_eq!(f(&metrics[0][1]), 0.0);
    assert!(!fs::read_to_string(&a).unwrap().contains('\r'));
}

#[test]
fn unstable_preset_reports_large_excursion() {
    let o = qcv(&["simulate", "--preset", "fig-unstable"]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let line = stdout.lines().find(|l| l.starts_with("max excursion")).unwrap();
    let value = f(line.rsplit(' ').next().unwrap());
    assert!(value > 0.5, "{line}");
}

#[test]
fn classical_reference_shares_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (d, c) = (dir.path().join("d.csv"), dir.path().join("c.csv"));
    assert_eq!(code(&qcv(&["simulate", "--preset", "fig-earth-moon", "-o", path_str(&d)])), 0);
    let o = qcv(&["simulate", "--preset", "fig-earth-moon", "--scheme", "classical", "-o", path_str(&c)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (rd, rc) = (rows(&d), rows(&c));
    assert_eq!(rd.len(), rc.len());
    for (x, y) in rd.iter().zip(&rc) {
        assert_eq!(x[..3], y[..3]);
    }
}

#[test]
fn error_scan_null_case_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = qcv(&[
        "error-scan", "--preset", "fig1", "--delta", "0", "--delta-prime", "0", "--scan-count", "20", "-o",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let r = rows(&out);
    assert_eq!(r.len(), 4 * 2 * 21);
    assert_eq!(r[0][..3], ["forward", "DEL", "0"]);
    assert_eq!(r[21][..3], ["forward", "DHE", "0"]);
    assert_eq!(r.last().unwrap()[2], "100");
    assert!(r.iter().all(|row| f(&row[3]) <= 1e-8));
}

#[test]
fn dumped_config_reproduces_results() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for preset in ["fig-earth-moon", "equilateral3", "ops-default"] {
        let cmd = match preset {
            "fig-earth-moon" => "simulate",
            "equilateral3" => "equilibrium",
            _ => "ops-table",
        };
        let o = qcv(&[cmd, "--preset", preset, "--dump-config"]);
        assert_eq!(code(&o), 0);
        fs::write(&conf, &o.stdout).unwrap();
        assert_eq!(code(&qcv(&[cmd, "--preset", preset, "-o", path_str(&a)])), 0);
        assert_eq!(code(&qcv(&[cmd, "--config", path_str(&conf), "-o", path_str(&b)])), 0);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{preset}");
    }
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let o = qcv(&["convergence", "--operators", "central;backward", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("central                      slope 2.0"));
    assert!(stdout.contains("backward                     slope 1.0") || stdout.contains("slope 0.99"));
    assert_eq!(rows(&out).len(), 8);
    let o = qcv(&["convergence", "--operators", "gamma(0,1,0)"]);
    assert_eq!(code(&o), 2);
}
