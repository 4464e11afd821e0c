use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wqc::sequences::hyperfine_strength;
use wqc::spin_system::SystemSpec;

fn wqc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn segment_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect()
}

fn comment_value(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key} ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` line in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn verify_default_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wqc(&["verify", "--out", "rep"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(tmp.path().join("rep/verify_report.txt")).unwrap();
    let names: Vec<&str> = report
        .lines()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "double-commutator",
            "bch-scaling",
            "refocusing",
            "dissipator-decay",
            "serial-swap",
            "cptp"
        ]
    );
    assert!(report
        .lines()
        .all(|l| l.split_whitespace().nth(1) == Some("PASS")));
    assert_eq!(report, stdout(&o));
}

#[test]
fn verify_subset_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "[verify]\nchecks = [\"dissipator-decay\"]\n[outputs]\ndir = \"r\"\n",
    )
    .unwrap();
    let o = wqc(&["verify", "--config", "c.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(tmp.path().join("r/verify_report.txt").exists());
}

#[test]
fn failing_check_exits_one() {
    // The serial swap is defined for one nucleus per node only.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
[system]
dipolar_hz = 1.0e6
rabi_hz = 1.0e8
[[system.nucleus]]
hyperfine_hz = [2.0e7, 0.0, 6.0e7]
[[system.nucleus]]
hyperfine_hz = [3.5e7, 0.0, 1.5e7]
[verify]
checks = ["serial-swap"]
"#;
    fs::write(tmp.path().join("c.toml"), cfg).unwrap();
    let o = wqc(&["verify", "--config", "c.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn noise_t2_beyond_twice_t1_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "[noise]\nt1_s = 1.0e-6\nt2_s = 3.0e-6\n",
    )
    .unwrap();
    let o = wqc(&["verify", "--config", "c.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("noise.t2_s") && err.contains("line 3"),
        "{err}"
    );
}

#[test]
fn malformed_and_missing_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wqc(&["verify", "--config", "absent.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.toml"), "{}", stderr(&o));

    fs::write(tmp.path().join("bad.toml"), "[sweep]\npoints = \"x\"\n").unwrap();
    let o = wqc(&["sweep", "--config", "bad.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn dump_wqc_sequence() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wqc(&["dump-sequence", "wqc"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let segs = segment_lines(&text);
    assert_eq!(segs.len(), 8);
    let tau = comment_value(&text, "tau_s");
    for s in segs {
        let d: f64 = s.split_whitespace().nth(3).unwrap().parse().unwrap();
        assert_eq!(d, tau);
    }
}

#[test]
fn dump_swap_sequence_obeys_quarter_period_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wqc(&["dump-sequence", "swap"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(segment_lines(&text).len(), 3);
    let spec = SystemSpec::default();
    let t_hf = comment_value(&text, "t_hf_s");
    let t_d = comment_value(&text, "t_d_s");
    assert!((t_hf * hyperfine_strength(&spec) - FRAC_PI_2).abs() < 1e-9);
    assert!((t_d * spec.dipolar - FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        wqc(&["dump-sequence", "bogus"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(wqc(&["frobnicate"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        wqc(&["sweep", "--points", "0"], tmp.path()).status.code(),
        Some(2)
    );
}

#[test]
fn unwritable_output_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("file"), "").unwrap();
    let o = wqc(&["verify", "--out", "file/sub"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("output directory"), "{}", stderr(&o));
}

#[test]
fn sweep_is_deterministic_with_default_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let a = wqc(&["sweep", "--out", "a"], tmp.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = wqc(&["sweep", "--out", "b", "--seed", "7"], tmp.path());
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));

    let csv_a = fs::read(tmp.path().join("a/sweep.csv")).unwrap();
    let csv_b = fs::read(tmp.path().join("b/sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert_eq!(
        text.lines().next().unwrap(),
        "t1_s,t2_s,fidelity_wqc,fidelity_swap,neg_log10_infid_wqc,neg_log10_infid_swap"
    );
    for row in text.lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 6);
        assert!(v[4] >= v[5], "wqc below swap in {row}");
    }

    let svg = fs::read_to_string(tmp.path().join("a/sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("stroke-dasharray") && svg.contains("serial swap"));
    assert_eq!(
        svg,
        fs::read_to_string(tmp.path().join("b/sweep.svg")).unwrap()
    );
}
