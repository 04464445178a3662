use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss-rocof")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_balanced_has_ten_thousand_rows() {
    let out = ok(&["generate", "--kind", "balanced", "--f0", "50", "--fs", "5000", "--dur", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time_s,va,vb,vc"));
    assert_eq!(lines.count(), 10_000);
}

#[test]
fn generate_other_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let chirp = dir.path().join("chirp.csv");
    ok(&["generate", "--kind", "chirp", "--ramp", "-1", "-o", path(&chirp)]);
    assert!(fs::read_to_string(&chirp).unwrap().lines().count() > 1);
    let event = dir.path().join("event.csv");
    ok(&["generate", "--kind", "transient-event", "--event-start", "1", "--event-len", "0.02", "-o", path(&event)]);
    assert!(fs::read_to_string(&event).unwrap().lines().count() == 10_001);
}

#[test]
fn generate_is_deterministic_under_seed() {
    let args = ["generate", "--kind", "polluted", "--noise", "0.01", "--seed", "9", "--dur", "0.2"];
    assert_eq!(ok(&args).stdout, ok(&args).stdout);
    let mut other = args;
    other[6] = "10";
    assert_ne!(ok(&args).stdout, ok(&other).stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["generate"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--kind", "chirp"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--kind", "transient-event", "--event-start", "1"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--kind", "balanced", "--fs", "500"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,va,vb\n0,1,2\n").unwrap();
    let out = dir.path().join("out.csv");
    assert_eq!(run(&["analyze", "-i", path(&bad), "-o", path(&out)]).status.code(), Some(2));
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["epsilon-recommend", "-i", path(&missing)]).status.code(), Some(2));
}

#[test]
fn analyze_writes_aligned_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("event.csv");
    ok(&["generate", "--kind", "transient-event", "--event-start", "1", "--event-len", "0.02", "-o", path(&input)]);
    let series = dir.path().join("series.csv");
    let out = ok(&["analyze", "-i", path(&input), "-o", path(&series), "--event-start", "1"]);
    let text = fs::read_to_string(&series).unwrap();
    let rows: Vec<_> = text.lines().collect();
    assert_eq!(rows.len(), 10_001);
    let width = rows[0].split(',').count();
    assert!(rows.iter().all(|r| r.split(',').count() == width));
    for col in ["omega_v_hz", "omega_v_filtered_hz", "omega_qss_hz", "gamma_prime", "tout", "rocof_conventional_hz_s", "rocof_qss_hz_s", "effective_window_s"] {
        assert!(rows[0].split(',').any(|c| c == col), "{col}");
    }

    let summary = fs::read_to_string(dir.path().join("series.csv.summary.csv")).unwrap();
    let exceeds: Vec<&str> = summary.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(exceeds, ["true", "false"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("initial gated span"));

    // Invalid configuration is a usage error.
    let code = run(&["analyze", "-i", path(&input), "-o", path(&series), "--window-ms", "10"]).status.code();
    assert_eq!(code, Some(1));
}

#[test]
fn analyze_window_pairs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("chirp.csv");
    ok(&["generate", "--kind", "chirp", "--ramp", "-1", "--dur", "1", "-o", path(&input)]);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    ok(&["analyze", "-i", path(&input), "-o", path(&a), "--window-ms", "250"]);
    ok(&["analyze", "-i", path(&input), "-o", path(&b), "--window-ms", "500"]);
    ok(&["analyze", "-i", path(&input), "-o", path(&c), "--window-ms", "250"]);
    let (a, b, c) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(a, c);
    assert_ne!(a, b);
    assert_eq!(a.iter().filter(|&&x| x == b'\n').count(), b.iter().filter(|&&x| x == b'\n').count());
}

#[test]
fn relay_compares_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("outage.csv");
    ok(&[
        "generate", "--kind", "transient-event", "--event-start", "1", "--event-len", "0.003", "--step-ratio", "0.95",
        "--step-at", "1", "--ramp", "-1.5", "--ramp-start", "1", "--dur", "3", "-o", path(&input),
    ]);
    let qss_cfg = dir.path().join("qss.toml");
    fs::write(
        &qss_cfg,
        "d_omega_1 = 0.012\nd_omega_2 = 0.024\ndelta_t_delta_1 = 0.2\ndelta_t_delta_2 = 0.2\n\
         delta_ls_1 = 0.2\ndelta_ls_2 = 0.2\nwindow_s = 0.25\nmode = \"qss\"\nepsilon = 0.05\n",
    )
    .unwrap();
    let out_dir = dir.path().join("trips");
    ok(&["relay", "-i", path(&input), "--qss", path(&qss_cfg), "--out-dir", path(&out_dir)]);
    let first_trip = |name: &str| -> f64 {
        let text = fs::read_to_string(out_dir.join(name)).unwrap();
        assert!(text.starts_with("stage,t_detect_s,t_trip_s,shed_pu\n"));
        text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!(first_trip("qss_trips.csv") < first_trip("conventional_trips.csv"));
    assert!(out_dir.join("comparison.csv").exists());

    fs::write(&qss_cfg, "mode = \"qss\"\n").unwrap();
    assert_eq!(run(&["relay", "-i", path(&input), "--qss", path(&qss_cfg)]).status.code(), Some(2));
}

#[test]
fn sweep_and_recommend() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("event.csv");
    ok(&[
        "generate", "--kind", "transient-event", "--event-start", "1", "--event-len", "0.02", "--drift", "0.01", "-o",
        path(&input),
    ]);
    let out = ok(&["sweep-epsilon", "-i", path(&input), "--event-start", "1", "--points", "9"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "epsilon,delta_t_s,saturated");
    assert_eq!(rows.len(), 10);
    assert!(rows[1].ends_with(",true"));
    assert!(rows[9].starts_with("1,0,"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("plateau"));
    assert_eq!(run(&["sweep-epsilon", "-i", path(&input), "--event-start", "1", "--points", "0"]).status.code(), Some(1));

    let out = ok(&["epsilon-recommend", "-i", path(&input)]);
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));

    let steady = dir.path().join("steady.csv");
    ok(&["generate", "--kind", "balanced", "-o", path(&steady)]);
    let out = ok(&["epsilon-recommend", "-i", path(&steady)]);
    assert!(out.stderr.is_empty());
    let eps: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix("epsilon="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(eps < 1e-8);
}
