use std::fs;
use std::process::{Command, Output};

fn usvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usvp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_documents_csv_schema() {
    let o = usvp(&["penalty-sweep", "--help"]);
    let s = stdout(&o);
    assert!(o.status.success());
    assert!(s.contains("scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status"));
    assert!(s.contains("snr_db,mi_bits,bound_bits,kappa_opt"));
    assert!(s.contains("N,K,Ktilde,trials,mean,std_err,seed"));
}

#[test]
fn penalty_sweep_both_assumptions_row_count() {
    let o = usvp(&["penalty-sweep", "--scheme", "us-cvp", "--assumption", "both", "--alpha", "2", "--T", "8", "--alphakappa-grid", "0.5:0.9:5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().filter(|r| r.contains(",rs,")).count(), 5);
    assert_eq!(rows.iter().filter(|r| r.contains(",1rsb,")).count(), 5);
}

#[test]
fn config_file_with_flag_override_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let out = dir.path().join("out.csv");
    fs::write(&cfg, "# demo\nscheme = dd-us-qpsk\nT = 8\nalpha = 2\nalphakappa-grid = 0.3,1.0\n").unwrap();
    let o = usvp(&["penalty-sweep", "--config", cfg.to_str().unwrap(), "--T", "16", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("dd-us-qpsk,rs,2,0.15,0.3,16,"));
    assert!(rows[2].contains("skipped: ακ < 1 required"));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "scheme = dd-us-qpsk\nwindow = 3\n").unwrap();
    let o = usvp(&["penalty-sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("window") && err.contains("line 2"), "{err}");
}

#[test]
fn violations_are_reported_together() {
    let o = usvp(&["simulate", "--scheme", "qam", "--trials", "0", "--T", "x"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("qam") && err.contains("trials") && err.contains("T:"), "{err}");
}

#[test]
fn unknown_flag_and_suite_are_usage_errors() {
    assert!(!usvp(&["penalty-sweep", "--frobnicate", "1"]).status.success());
    let o = usvp(&["validate", "--suite", "everything"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn all_failing_points_exit_nonzero() {
    let o = usvp(&["penalty-sweep", "--alphakappa-grid", "1.0,1.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn simulate_and_rate_sweep_rerun_identically() {
    let sim = ["simulate", "--N", "8", "--K", "16", "--T", "2", "--trials", "6", "--alphakappa-grid", "0.25,0.5", "--strategy", "zfbf-rus", "--seed", "4"];
    let a = usvp(&sim);
    assert!(a.status.success());
    assert_eq!(a.stdout, usvp(&sim).stdout);
    let header = stdout(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status,N,K,Ktilde,trials,mean,std_err,seed,strategy");
    let rate = ["rate-sweep", "--scheme", "dd-us-qpsk", "--alpha", "2", "--T", "8", "--alphakappa-grid", "0.2,0.6", "--snr-db-grid", "-5:5:3"];
    let b = usvp(&rate);
    assert!(b.status.success());
    assert_eq!(b.stdout, usvp(&rate).stdout);
    assert_eq!(stdout(&b).lines().count(), 7);
}

#[test]
fn validate_math_suite_passes() {
    let o = usvp(&["validate", "--suite", "math"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS math"));
}
