use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_backsec");

const SMALL: &str = "\
metric = sop
methods = exact, asymptotic, mc
protocols = ots, sots, mets, rts
axis = gamma_t_db
axis_values = 10:10:30
n_tags = 3
p_c = 100 uW
trials = 20000
seed = 7
";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing_pc = write(dir.path(), "a.cfg", "metric = sop\naxis = rate\naxis_values = 0.5\n");
    let out = run(&["sweep", "--config", &missing_pc]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_c"));

    let unknown = write(dir.path(), "b.cfg", "p_c = 100 uW\nbogus = 1\n");
    let out = run(&["validate", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let equal = write(dir.path(), "c.cfg", "p_c = 200 uW\n");
    assert_eq!(run(&["validate", "--config", &equal]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--preset", "fig9"]).status.code(), Some(2));
}

#[test]
fn validate_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL);
    let first = run(&["validate", "--config", &cfg]);
    assert!(first.status.success());
    let resolved = write(dir.path(), "r.cfg", std::str::from_utf8(&first.stdout).unwrap());
    let second = run(&["validate", "--config", &resolved]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL);
    let a = dir.path().join("a.csv");
    let out = run(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = run(&["sweep", "--config", &cfg, "--workers", "3"]);
    assert!(b.status.success());
    let csv = fs::read(&a).unwrap();
    assert_eq!(csv, b.stdout);

    let text = String::from_utf8(csv).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("axis_name,axis_value,protocol,method,value,stderr,trials"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 4 * 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 7));
    assert!(rows.iter().filter(|r| r.contains(",mc,")).all(|r| r.ends_with(",20000")));

    let other_seed = run(&["sweep", "--config", &cfg, "--seed", "8"]);
    assert_ne!(other_seed.stdout, b.stdout);
}

#[test]
fn trials_override_reaches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", SMALL);
    let out = run(&["sweep", "--config", &cfg, "--trials", "1000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|r| r.contains(",mc,")).all(|r| r.ends_with(",1000")));
}

#[test]
fn instability_exits_3_but_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("methods = exact, asymptotic, mc", "methods = exact") + "cancellation_limit = 1e-3\n";
    let cfg = write(dir.path(), "u.cfg", &text);
    let csv = dir.path().join("u.csv");
    let out = run(&["sweep", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable"));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("axis_name,"));
}

#[test]
fn oracle_prints_all_protocols() {
    let out = run(&["oracle", "--point", "p_c = 100 uW; gamma_t = 30 dB; trials = 20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for p in ["SOTS", "METS", "OTS", "RTS"] {
        assert_eq!(text.lines().filter(|l| l.starts_with(p)).count(), 2, "{text}");
    }
    assert!(text.contains("exact") && text.contains("asymptotic"));
    assert_eq!(run(&["oracle", "--point", "gamma_t = 30 dB"]).status.code(), Some(2));
}

#[test]
fn help_documents_db_convention() {
    let out = run(&["sweep", "--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("10^(x/10)"));
}
