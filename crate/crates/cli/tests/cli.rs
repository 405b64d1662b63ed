use std::process::{Command, Output};

use proptest::prelude::*;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgn-equiv")).args(args).output().unwrap()
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn zeros_at_half_are_multiples_of_pi() {
    let out = run(&["zeros", "--hurst", "0.5", "--count", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("k,omega,omega_over_pi_minus_k\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 5);
    for (i, row) in r.iter().enumerate() {
        let w: f64 = row[1].parse().unwrap();
        assert!((w - (i + 1) as f64 * std::f64::consts::PI).abs() < 1e-10);
    }
}

#[test]
fn first_zero_in_band() {
    let out = run(&["zeros", "--hurst", "0.75", "-K", "1"]);
    let r = rows(&out);
    let off: f64 = r[0][2].parse().unwrap();
    assert!(off.abs() <= 0.125 && off < 0.0);
}

#[test]
fn exit_codes() {
    let bad = run(&["zeros", "--hurst", "1.2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("hurst"));
    assert_eq!(run(&["rates", "--hurst", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["zeros", "--hurst", "0.5", "--n-grid", "8:2:1"]).status.code(), Some(2));
    let fault = run(&["verify", "--seed", "3", "--hurst", "0.7", "--replicates", "100", "--perturb-ak", "0.01"]);
    assert_eq!(fault.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&fault.stdout).unwrap();
    let failed: Vec<String> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["check_name"].as_str().unwrap().to_string())
        .collect();
    assert!(failed.iter().any(|n| n.starts_with("basis.biorthogonality")));
    assert!(failed.iter().any(|n| n.starts_with("kl.consistency")));
}

#[test]
fn degenerate_verify_subset() {
    let out = run(&["verify", "--seed", "3", "--hurst", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sweep\nhurst = 0.3\nn-grid = 16:64:x2\nseed = 5\nfunction = zero\n").unwrap();
    let out = run(&["diagnose", "--config", cfg.to_str().unwrap(), "--hurst", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert_eq!(r.iter().map(|x| x[0].as_str()).collect::<Vec<_>>(), ["16", "32", "64"]);
    assert!(r.iter().all(|x| x[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0)));
    let json = run(&["diagnose", "--config", cfg.to_str().unwrap(), "--hurst", "0.7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["params"]["hurst"], 0.7);
}

#[test]
fn constant_function_has_no_discretization_error() {
    let out = run(&["diagnose", "--hurst", "0.6", "--seed", "1", "--function", "constant"]);
    assert!(rows(&out).iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn smooth_diagnostics_decrease() {
    let out = run(&["diagnose", "--hurst", "0.7", "--seed", "8", "--n-grid", "16:256:x2"]);
    let r = rows(&out);
    let v = |i: usize, c: usize| r[i][c].parse::<f64>().unwrap();
    // the discretization term can bump once on the coarsest grids
    for col in 1..=3 {
        assert!(v(r.len() - 1, col) < 0.25 * v(0, col));
        assert!((2..r.len()).all(|i| v(i, col) < v(i - 1, col)));
    }
}

#[test]
fn csv_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec![
            "rates".to_string(),
            "--hurst".into(),
            "0.7".into(),
            "--n-grid".into(),
            "64:1024:x4".into(),
            "--replicates".into(),
            "50".into(),
            "--seed".into(),
            "12".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let st = Command::new(env!("CARGO_BIN_EXE_fgn-equiv")).args(args(&a)).status().unwrap();
    let mut second = args(&b);
    second.extend(["--jobs".to_string(), "6".to_string()]);
    Command::new(env!("CARGO_BIN_EXE_fgn-equiv")).args(second).status().unwrap();
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    assert!(!x.contains(&b'\r'));
    assert!(st.code() == Some(0) || st.code() == Some(3));
}

#[test]
fn simulate_and_coeffs() {
    let s = run(&["simulate", "--hurst", "0.3", "--n", "16", "--seed", "2"]);
    assert_eq!(rows(&s).len(), 16);
    assert_eq!(s.stdout, run(&["simulate", "--hurst", "0.3", "--n", "16", "--seed", "2"]).stdout);
    let c = run(&["coeffs", "--hurst", "0.5", "-K", "4"]);
    for r in rows(&c) {
        assert!((r[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-8);
    }
    let b = run(&["bounds", "--hurst", "0.75", "--n", "256"]);
    assert_eq!(b.status.code(), Some(0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn n_grids_are_increasing_and_bounded(a in 1usize..500, span in 0usize..5000, step in 1usize..300, geometric: bool) {
        let b = a + span;
        let text = if geometric { format!("{a}:{b}:x{}", 2 + step % 4) } else { format!("{a}:{b}:{step}") };
        let g = fgn_equiv_cli::parse_n_grid(&text).unwrap();
        prop_assert_eq!(g[0], a);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*g.last().unwrap() <= b);
    }
}
