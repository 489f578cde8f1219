use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_glovekit"));
    c.env_remove("GLOVEKIT_CONFIG");
    c
}

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}=` line in:\n{text}"))
        .to_string()
}

#[test]
fn solve_inline_radians() {
    let o = run(&[
        "--units",
        "rad",
        "solve",
        "--theta-em",
        "0.5",
        "--theta-ed",
        "2.0",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<f64> = out
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    for (got, want) in row.iter().zip([0.184615, 0.320604, 0.087077]) {
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn solve_inline_degrees_matches_radians() {
    let deg = run(&[
        "solve",
        "--theta-em",
        &0.5f64.to_degrees().to_string(),
        "--theta-ed",
        &2f64.to_degrees().to_string(),
    ]);
    let out = stdout(&deg);
    let theta3: f64 = out
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((theta3 - 0.087077f64.to_degrees()).abs() < 1e-4);
}

#[test]
fn zero_readings_warn_about_clamp() {
    let o = run(&[
        "--units",
        "rad",
        "solve",
        "--theta-em",
        "0",
        "--theta-ed",
        "0",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("clamp"));
}

#[test]
fn malformed_frames_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("frames.csv");
    std::fs::write(&p, "timestamp_us,enc_00\n0,12\n").unwrap();
    let o = run(&["solve", "--frames", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let mut text = String::from("timestamp_us");
    for i in 0..16 {
        text.push_str(&format!(",enc_{i:02}"));
    }
    text.push_str("\n0");
    for _ in 0..16 {
        text.push_str(",abc");
    }
    std::fs::write(&p, text).unwrap();
    assert_eq!(
        run(&["solve", "--frames", p.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn frames_round_trip_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("frames.csv");
    let mut text = String::from("timestamp_us");
    for i in 0..16 {
        text.push_str(&format!(",enc_{i:02}"));
    }
    text.push_str("\n0");
    for _ in 0..16 {
        text.push_str(",33000");
    }
    text.push('\n');
    std::fs::write(&p, text).unwrap();
    let o = run(&["solve", "--frames", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("timestamp_us,q_00"));
    assert_eq!(data[1].split(',').count(), 21);
}

#[test]
fn follow_reports_length() {
    let o = run(&[
        "follow", "--theta1", "30", "--theta2", "30", "--theta3", "30",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let len: f64 = out
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((len - 132.6485).abs() < 1e-3);
    let o = run(&["follow", "--delta"]);
    let servo: f64 = stdout(&o)
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(servo, 0.0);
}

#[test]
fn bus_encode_and_decode() {
    let o = run(&[
        "bus",
        "encode",
        "--address",
        "1",
        "--function",
        "0x03",
        "--payload",
        "00 00 00 10",
    ]);
    assert_eq!(stdout(&o).trim(), "01 03 00 00 00 10 44 06");
    let o = run(&["bus", "decode", "01 03 00 00 00 10 44 06"]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "payload"), "00 00 00 10");
    let bad = run(&["bus", "decode", "01 03 00 00 00 10 44 07"]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("CRC"));
    let short = run(&["bus", "decode", "01 03"]);
    assert_eq!(short.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&short.stderr).contains("short"));
}

#[test]
fn bus_timing_at_half_megabit() {
    let o = run(&["bus", "timing", "--bytes", "8", "--bitrate", "500000"]);
    let out = stdout(&o);
    assert_eq!(value(&out, "transmission_us"), "160");
    assert_eq!(value(&out, "gap_us"), "70");
}

#[test]
fn feedback_force_sequence() {
    let o = run(&["feedback", "--force", "0,6,0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains("force_feedback,0,true"));
    assert!(rows[2].contains(",none,0,false"));
}

#[test]
fn retarget_pip_follows_dip() {
    let o = run(&["retarget", "--model", "24dof", "--joint", "index.dip=45"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let pip: f64 = out
        .lines()
        .find(|l| l.contains(",index.pip,"))
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(pip > 45.0);
    assert_eq!(run(&["retarget", "--model", "nope"]).status.code(), Some(3));
}

#[test]
fn bad_config_override_exits_3() {
    let o = run(&["--set", "geometry.rg=-1", "config"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["--set", "nonsense", "config"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn help_mentions_units() {
    let o = run(&["--help"]);
    let out = stdout(&o);
    assert!(out.contains("degrees") && out.contains("--units"));
    assert!(out.contains("Exit codes"));
}

#[test]
fn simulate_latency_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = bin()
        .args([
            "simulate",
            "--out",
            trace.to_str().unwrap(),
            "--report",
            "latency",
        ])
        .arg("--config")
        .arg(demo_config())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&stdout(&o), "mean_latency_ms"), "200.0");
}

fn simulate_hash(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let o = bin()
        .arg("--config")
        .arg(demo_config())
        .args(["simulate", "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let hash = value(&stdout(&o), "trace_sha256");
    use sha2::Digest;
    assert_eq!(
        hash,
        hex::encode(sha2::Sha256::digest(std::fs::read(&out).unwrap()))
    );
    hash
}

#[test]
fn simulate_is_deterministic_and_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_hash(dir.path(), "a.csv", &[]);
    let b = simulate_hash(dir.path(), "b.csv", &[]);
    assert_eq!(a, b);
    let other = simulate_hash(dir.path(), "c.csv", &["--seed", "8"]);
    assert_ne!(a, other);

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/demo_trace.sha256");
    if std::env::var("GLOVEKIT_UPDATE_GOLDEN").as_deref() == Ok("1") {
        std::fs::write(&golden, format!("{a}\n")).unwrap();
    }
    let want = std::fs::read_to_string(&golden)
        .expect("golden hash; regenerate with GLOVEKIT_UPDATE_GOLDEN=1");
    assert_eq!(a, want.trim());
}

#[test]
fn episodes_write_numbered_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = bin()
        .arg("--config")
        .arg(demo_config())
        .args([
            "--set",
            "sim.duration_us=500000",
            "simulate",
            "--episodes",
            "3",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        assert!(dir.path().join(format!("run_{i}.csv")).exists());
    }
}

#[test]
fn report_reads_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("full.csv");
    let o = bin()
        .arg("--config")
        .arg(demo_config())
        .args(["simulate", "--full-rate", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = bin()
        .arg("--config")
        .arg(demo_config())
        .args(["report", "latency", "--trace"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(value(&stdout(&o), "mean_latency_ms"), "200.0");
    let o = bin()
        .arg("--config")
        .arg(demo_config())
        .args(["report", "repeatability", "--finger", "index", "--trace"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(value(&stdout(&o), "contacts"), "3");
}
