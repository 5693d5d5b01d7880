//! Behavior of the command-line interface: formats, exit codes, determinism,
//! config merging. Fixtures live in tests/fixtures; simulated inputs are
//! regenerated through the binary itself with pinned seeds.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flattop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Parses `key` out of the one-line JSON header `# {...}` atop estimate output.
fn header_field(output: &str, key: &str) -> String {
    let header = output.lines().next().expect("nonempty output");
    assert!(header.starts_with("# {"), "missing JSON header: {header}");
    let json: serde_json::Value = serde_json::from_str(&header[2..]).expect("valid header JSON");
    json.get(key)
        .unwrap_or_else(|| panic!("header key {key} missing"))
        .to_string()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, content).unwrap();
    path
}

#[test]
fn acf_of_short_ramp_matches_hand_computed_values() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "ramp.csv", "1\n2\n3\n4\n");
    let out = cli(&["acf", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lag,gamma,rho,threshold"));
    // mean 2.5, divisor 4: gamma = (1.25, 0.3125, -0.375, -0.5625)
    let expected_gamma = [1.25, 0.3125, -0.375, -0.5625];
    let expected_threshold = flattop::threshold(4, 2.0);
    for (k, line) in lines.enumerate() {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0] as usize, k);
        assert!(
            (fields[1] - expected_gamma[k]).abs() <= 1e-10 * expected_gamma[0],
            "gamma({k}) = {} vs {}",
            fields[1],
            expected_gamma[k]
        );
        assert!((fields[2] - expected_gamma[k] / expected_gamma[0]).abs() <= 1e-10);
        assert!((fields[3] - expected_threshold).abs() <= 1e-15);
    }
}

#[test]
fn acf_skips_one_header_line_and_honors_max_lag() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "with_header.csv", "value\n1\n2\n3\n4\n");
    let out = cli(&["acf", input.to_str().unwrap(), "--max-lag", "2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    assert_eq!(text.lines().count(), 4); // header + lags 0..=2
    let bare = write_temp(&dir, "bare.csv", "1\n2\n3\n4\n");
    let out_bare = cli(&["acf", bare.to_str().unwrap(), "--max-lag", "2"]);
    assert_eq!(stdout_str(&out_bare), text);
}

#[test]
fn acf_rejects_mid_file_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "broken.csv", "1\n2\nnot-a-number\n4\n");
    let out = cli(&["acf", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("broken.csv:3"));
}

#[test]
fn empty_input_exits_2_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "empty.csv", "");
    let out = cli(&["acf", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("empty.csv"));
}

#[test]
fn constant_column_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "const.csv", "5\n5\n5\n5\n5\n5\n5\n5\n");
    let out = cli(&["acf", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    let est = cli(&["estimate", input.to_str().unwrap()]);
    assert_eq!(exit_code(&est), 3);
}

/// Simulates the moving-average fixture at a pinned seed and returns the
/// series path. Chosen once and kept: seed 11 at n = 10^4 yields m_hat = 1.
fn ma1_series(dir: &tempfile::TempDir) -> PathBuf {
    let path = dir.path().join("ma1_series.csv");
    let out = cli(&[
        "simulate",
        fixture("ma1.json").to_str().unwrap(),
        "--n",
        "10000",
        "--seed",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));
    path
}

#[test]
fn estimate_of_simulated_ma1_selects_bandwidth_2_without_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let series = ma1_series(&dir);
    let out = cli(&["estimate", series.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    // round trip: simulator output parses cleanly, no warnings raised
    assert_eq!(stderr_str(&out), "");
    let text = stdout_str(&out);
    assert_eq!(header_field(&text, "m_hat"), "1");
    assert_eq!(header_field(&text, "M_hat"), "2");
    assert_eq!(header_field(&text, "N"), "10000");
    assert_eq!(header_field(&text, "capped"), "false");
    assert_eq!(text.lines().nth(1), Some("omega,f_hat"));
    assert_eq!(text.lines().count(), 2 + 512);

    // rerun is byte-identical
    let again = cli(&["estimate", series.to_str().unwrap()]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn estimate_clip_flag_floors_negative_values() {
    // a seasonal moving average has six spectral nulls in [0, pi]; at this
    // pinned seed the raw estimate rings negative near one of them
    let dir = tempfile::tempdir().unwrap();
    let spec = write_temp(&dir, "ma6.json", r#"{"kind":"cutoff","theta":[0,0,0,0,0,1]}"#);
    let series = dir.path().join("ma6_series.csv");
    let sim = cli(&[
        "simulate",
        spec.to_str().unwrap(),
        "--n",
        "4096",
        "--seed",
        "1",
        "--out",
        series.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&sim), 0);
    let plain = stdout_str(&cli(&["estimate", series.to_str().unwrap()]));
    let clipped = stdout_str(&cli(&["estimate", series.to_str().unwrap(), "--clip"]));
    let parse = |text: &str| -> Vec<f64> {
        text.lines()
            .skip(2)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let raw = parse(&plain);
    let floored = parse(&clipped);
    assert!(raw.iter().any(|v| *v < 0.0), "expected a negative dip");
    assert!(floored.iter().all(|v| *v >= 0.0));
    for (r, f) in raw.iter().zip(&floored) {
        assert_eq!(*f, r.max(0.0));
    }
}

#[test]
fn estimate_reports_ceiling_bandwidth_for_other_breakpoints() {
    let dir = tempfile::tempdir().unwrap();
    let series = ma1_series(&dir);
    let out = stdout_str(&cli(&[
        "estimate",
        series.to_str().unwrap(),
        "--c-break",
        "0.4",
    ]));
    let m_hat: usize = header_field(&out, "m_hat").parse().unwrap();
    let m_big: usize = header_field(&out, "M_hat").parse().unwrap();
    assert_eq!(m_big, (m_hat as f64 / 0.4).ceil() as usize);
    assert_eq!((m_hat, m_big), (1, 3));
}

#[test]
fn estimate_grid_and_range_flags_shape_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let series = ma1_series(&dir);
    let narrow = stdout_str(&cli(&[
        "estimate",
        series.to_str().unwrap(),
        "--grid",
        "65",
    ]));
    assert_eq!(narrow.lines().count(), 2 + 65);
    let omegas: Vec<f64> = narrow
        .lines()
        .skip(2)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(omegas[0], 0.0);
    assert!((omegas[64] - std::f64::consts::PI).abs() < 1e-15);

    let full = stdout_str(&cli(&[
        "estimate",
        series.to_str().unwrap(),
        "--grid",
        "65",
        "--full-range",
    ]));
    let omegas: Vec<f64> = full
        .lines()
        .skip(2)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(omegas[0] < 0.0);
    // estimates are even, so the density column is symmetric about omega = 0
    let values: Vec<f64> = full
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let mid = omegas.iter().position(|w| *w == 0.0).unwrap();
    for k in 1..=mid {
        assert!((values[mid - k] - values[mid + k]).abs() <= 1e-10 * (1.0 + values[mid].abs()));
    }
}

#[test]
fn estimate_writes_the_same_bytes_to_file_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let series = ma1_series(&dir);
    let to_stdout = cli(&["estimate", series.to_str().unwrap()]);
    let out_path = dir.path().join("spec.csv");
    let to_file = cli(&[
        "estimate",
        series.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&to_file), 0);
    assert_eq!(fs::read(&out_path).unwrap(), to_stdout.stdout);
}

#[test]
fn config_file_sets_rule_knobs_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "series.csv", &"1\n4\n2\n8\n3\n-1\n".repeat(20));
    let config = write_temp(&dir, "config.json", r#"{"c_thresh": 1.0}"#);
    let n = 120;

    let from_file = stdout_str(&cli(&[
        "acf",
        input.to_str().unwrap(),
        "--max-lag",
        "1",
        "--config",
        config.to_str().unwrap(),
    ]));
    let t_file: f64 = from_file
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((t_file - flattop::threshold(n, 1.0)).abs() <= 1e-15);

    let overridden = stdout_str(&cli(&[
        "acf",
        input.to_str().unwrap(),
        "--max-lag",
        "1",
        "--config",
        config.to_str().unwrap(),
        "--c-thresh",
        "3.0",
    ]));
    let t_flag: f64 = overridden
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((t_flag - flattop::threshold(n, 3.0)).abs() <= 1e-15);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "series.csv", "1\n2\n3\n4\n");
    let config = write_temp(&dir, "config.json", r#"{"c_tresh": 1.0}"#);
    let out = cli(&[
        "acf",
        input.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("config.json"));
}

#[test]
fn simulate_is_deterministic_per_seed_and_varies_across_seeds() {
    let spec = fixture("ma1.json");
    let run = |seed: &str| {
        let out = cli(&[
            "simulate",
            spec.to_str().unwrap(),
            "--n",
            "500",
            "--seed",
            seed,
        ]);
        assert_eq!(exit_code(&out), 0);
        out.stdout
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn simulate_white_noise_writes_n_finite_values() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_temp(&dir, "white.json", r#"{"kind":"cutoff","theta":[]}"#);
    let out = cli(&["simulate", spec.to_str().unwrap(), "--n", "1000"]);
    assert_eq!(exit_code(&out), 0);
    let values: Vec<f64> = stdout_str(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 1000);
    assert!(values.iter().all(|v| v.is_finite()));
}

#[test]
fn simulate_rejects_an_explosive_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_temp(
        &dir,
        "explosive.json",
        r#"{"kind":"exponential","terms":[{"amplitude":1.0,"ratio":1.2}]}"#,
    );
    let out = cli(&["simulate", spec.to_str().unwrap(), "--n", "100"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("ratio"));
}

#[test]
fn experiment_fixture_recovers_the_geometric_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "experiment",
        fixture("ar1_rate.json").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));

    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    let fitted = fit["fitted_constant"].as_f64().unwrap();
    let reference = fit["reference_constant"].as_f64().unwrap();
    assert!((reference - 9.491221581029905).abs() <= 1e-12);
    assert!(
        (fitted - reference).abs() <= 0.35 * reference,
        "fitted rate constant {fitted} too far from {reference}"
    );

    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3);
    assert!(summary.starts_with(
        "n,median_m_hat,median_bandwidth,oracle_m_hat,oracle_bandwidth,capped_fraction"
    ));
    let replicates = fs::read_to_string(dir.path().join("replicates.csv")).unwrap();
    assert_eq!(replicates.lines().count(), 1 + 3 * 30);

    // rerun into a second directory: byte-identical artifacts
    let dir2 = tempfile::tempdir().unwrap();
    let again = cli(&[
        "experiment",
        fixture("ar1_rate.json").to_str().unwrap(),
        "--out-dir",
        dir2.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&again), 0);
    for name in ["replicates.csv", "summary.csv", "fit.json"] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(dir2.path().join(name)).unwrap(),
            "{name} differed between reruns"
        );
    }
}

#[test]
fn experiment_needs_at_least_three_sample_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_temp(
        &dir,
        "two_sizes.json",
        r#"{"model":{"kind":"exponential","terms":[{"amplitude":1.0,"ratio":0.9}]},
           "n_values":[4096,16384],"replicates":30,"seed_base":1,"law":"exponential_rate"}"#,
    );
    let out = cli(&[
        "experiment",
        spec.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("3 sample sizes"));
}

#[test]
fn experiment_quality_gate_exits_5_when_everything_caps() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_temp(
        &dir,
        "capped.json",
        r#"{"model":{"kind":"exponential","terms":[{"amplitude":1.0,"ratio":0.9}]},
           "n_values":[256,512,1024],"replicates":10,"seed_base":3,
           "rule":{"max_m":1},"law":"exponential_rate","l_max":128}"#,
    );
    let out = cli(&[
        "experiment",
        spec.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 5);
    assert!(stderr_str(&out).contains("quality gate"));
}
