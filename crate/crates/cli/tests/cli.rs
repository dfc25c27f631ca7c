use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn isspll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isspll")).args(args).output().unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let cfg = config("default.ini");
    let mut args = vec!["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    isspll(&args)
}

#[test]
fn default_config_locks() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary, stdout(&o));
    assert_eq!(value(&summary, "locked"), "true");
    assert!(value(&summary, "f_error_ppm").parse::<f64>().unwrap().abs() < 10.0);
    for f in ["trace.csv", "spectrum.csv", "config.ini"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn short_run_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--duration", "10e-6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("trace.csv").is_file());
    assert_eq!(value(&fs::read_to_string(dir.path().join("summary.txt")).unwrap(), "locked"), "false");
}

#[test]
fn invalid_config_exits_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[loop]\nf_ref = 25e6\nt_pul = 50e-9\n").unwrap();
    let o = isspll(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("t_pul < 1/f_ref"), "{err}");

    fs::write(&cfg, "[loop]\nf_ref = fast\n").unwrap();
    let o = isspll(&["design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn analyze_reproduces_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = config("noisy.ini");
    let out = dir.path().join("run");
    let o = isspll(&["simulate", "--config", &noisy, "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let again = dir.path().join("again");
    let a = isspll(&[
        "analyze",
        "--config",
        out.join("config.ini").to_str().unwrap(),
        "--trace",
        out.join("trace.csv").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(a.status.code(), Some(0));
    let original = fs::read(out.join("summary.txt")).unwrap();
    assert_eq!(fs::read(again.join("summary.txt")).unwrap(), original);
    assert_eq!(a.stdout, original);
    assert_eq!(fs::read(again.join("spectrum.csv")).unwrap(), fs::read(out.join("spectrum.csv")).unwrap());
}

#[test]
fn identical_seeds_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = config("noisy.ini");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = isspll(&["simulate", "--config", &noisy, "--seed", seed, "--duration", "1e-3", "--out", out.to_str().unwrap()]);
        assert!(o.status.code().is_some());
        fs::read(out.join("trace.csv")).unwrap()
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
}

#[test]
fn fom_prints_the_reported_value() {
    let o = isspll(&["fom", "--sigma", "23.62e-12", "--power", "131.8e-6", "--area", "0.034"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "fom_ja_db=-236.0"), "{s}");
    assert_eq!(value(&s, "fom_db"), "-221.3");
    let bad = isspll(&["fom", "--sigma", "23.62e-12", "--power", "0", "--area", "0.034"]);
    assert_eq!(bad.status.code(), Some(1));
    let bad = isspll(&["fom", "--sigma", "abc", "--power", "1e-3", "--area", "1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn design_reports_a_positive_margin() {
    let o = isspll(&["design", "--config", &config("default.ini")]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(value(&s, "pm_deg").parse::<f64>().unwrap() > 0.0);
    assert_eq!(value(&s, "fll_count_lo"), "36");
    assert_eq!(value(&s, "fll_count_hi"), "38");
}

#[test]
fn sweep_outputs_and_key_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config("default.ini");
    let o = isspll(&[
        "sweep", "--config", &cfg, "--param", "i_chg", "--from", "5e-6", "--to", "20e-6", "--steps", "2", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "i_chg");
    assert!(header.contains(&"fom_ja_db") && header.contains(&"k_pd_i_A_per_rad"));
    let col = header.iter().position(|h| *h == "k_pd_i_A_per_rad").unwrap();
    let k: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert!((k[1] / k[0] - 4.0).abs() < 1e-12);

    for param in ["enabled", "no_such_key"] {
        let o = isspll(&["sweep", "--param", param, "--from", "0", "--to", "1", "--steps", "2", "--out", out]);
        assert_eq!(o.status.code(), Some(1), "{param}");
    }
}

#[test]
fn single_point_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_eq!(simulate(&sim, &["--duration", "2e-3"]).status.code(), Some(0));
    let short = dir.path().join("short.ini");
    fs::write(&short, fs::read_to_string(sim.join("config.ini")).unwrap()).unwrap();
    let sw = dir.path().join("sweep");
    let o = isspll(&[
        "sweep", "--config", short.to_str().unwrap(), "--param", "t_pul", "--from", "2e-9", "--to", "2e-9",
        "--steps", "1", "--out", sw.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(sw.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let summary = fs::read_to_string(sim.join("summary.txt")).unwrap();
    for line in summary.lines() {
        let (k, v) = line.split_once('=').unwrap();
        let i = header.iter().position(|h| *h == k).unwrap();
        assert_eq!(row[i], v, "{k}");
    }
}

#[test]
fn help_lists_every_config_key() {
    let o = isspll(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for f in isspll::model::FIELDS {
        assert!(s.lines().any(|l| l.split_whitespace().next() == Some(f.key) && l.contains(f.unit)), "{}", f.key);
    }
}
