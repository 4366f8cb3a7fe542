use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cantor-dioph");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CANTOR_DIOPH_BUDGET").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compare against the frozen file; UPDATE_GOLDEN=1 rewrites it.
fn golden(name: &str, args: &[&str], exit: i32) {
    let o = run(args);
    assert_eq!(code(&o), exit, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, stdout(&o)).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(stdout(&o), want, "{name} differs from golden output");
}

#[test]
fn golden_reports() {
    golden("member_quarter.json", &["member", "--set", "missing-digit b=3 W=0,2", "--x", "1/4"], 0);
    golden("member_half.json", &["member", "--x", "1/2"], 1);
    golden("nearest_half.json", &["nearest", "--x", "1/2"], 0);
    golden("expand_seventh.json", &["expand", "--x", "1/7", "--base", "10"], 0);
    golden("enumerate_4.csv", &["enumerate", "--n", "4", "--format", "csv"], 0);
    golden("intrinsic_quarter.json", &["intrinsic", "--x", "1/4", "--q", "27"], 0);
    golden("extrinsic_zero.json", &["extrinsic", "--xi", "0", "--q", "3"], 0);
    golden("extrinsic_lower_bound.json", &["extrinsic", "--lower-bound", "1/2"], 0);
    golden("liouville.json", &["liouville", "--stages", "3"], 0);
    golden("profile_sqrt2.csv", &["profile", "--xi", "surd:-1,1,2,1", "--grid", "0:3:1/2", "--format", "csv"], 0);
    golden("periods_corpus.csv", &["periods", "--q-max", "30", "--format", "csv"], 0);
    golden("scan_gcd.json", &["scan", "--kind", "gcd", "--word", "02"], 0);
    golden("scan_divisor.json", &["scan", "--kind", "divisor", "--n", "2", "--dn", "4"], 0);
    golden("scan_safe_prime.csv", &["scan", "--kind", "safe-prime", "--q-max", "100", "--format", "csv"], 0);
    golden("scan_pthm.csv", &["scan", "--kind", "pthm", "--q-max", "20", "--format", "csv"], 0);
}

#[test]
fn member_distance_and_exit_codes() {
    let o = run(&["member", "--x", "1/2"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outputs"]["distance"]["exact"], "1/6");
    assert_eq!(code(&run(&["member", "--x", "1/4"])), 0);
    assert_eq!(code(&run(&["member", "--x", "1/x"])), 2);
    assert_eq!(code(&run(&["member", "--x", "1/0"])), 2);
    assert_eq!(code(&run(&["member", "--set", "missing-digit b=3 W=0,7", "--x", "1/2"])), 2);
}

#[test]
fn enumerate_rows() {
    let rows = |n: &str| stdout(&run(&["enumerate", "--n", n, "--format", "csv"])).lines().count() - 1;
    assert_eq!(rows("4"), 6);
    assert_eq!(rows("1"), 2);
    assert_eq!(code(&run(&["enumerate", "--n", "0"])), 2);
}

#[test]
fn budget_flag_and_env() {
    assert_eq!(code(&run(&["enumerate", "--n", "4", "--budget", "3"])), 2);
    let o = Command::new(BIN).args(["enumerate", "--n", "4"]).env("CANTOR_DIOPH_BUDGET", "3").output().unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(BIN).args(["enumerate", "--n", "4"]).env("CANTOR_DIOPH_BUDGET", "10").output().unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn help_and_conflicts() {
    for cmd in ["member", "nearest", "expand", "enumerate", "intrinsic", "extrinsic", "liouville", "profile", "periods", "scan", "verify"] {
        let o = run(&[cmd, "--help"]);
        assert_eq!(code(&o), 0, "{cmd} --help");
        assert!(stdout(&o).contains("Usage"), "{cmd} --help prints usage");
    }
    assert_eq!(code(&run(&["member", "--set", "missing-digit b=3 W=0,2", "--ifs-file", "x.txt", "--x", "0"])), 2);
    assert_eq!(code(&run(&["extrinsic", "--q", "3", "--lower-bound", "1/2"])), 2);
    assert_eq!(code(&run(&["intrinsic", "--x", "1/4", "--address", "(1)", "--q", "9"])), 2);
    assert_eq!(code(&run(&["periods", "--x", "1/4", "--q-max", "9"])), 2);
    assert_eq!(code(&run(&["nosuchcommand"])), 2);
}

#[test]
fn verify_suites() {
    assert_eq!(code(&run(&["verify", "--suite", "counting"])), 0);
    assert_eq!(code(&run(&["verify", "--suite", "nonexistent"])), 2);
}

#[test]
fn reports_are_deterministic() {
    let args = ["intrinsic", "--address", "2(12)", "--q", "81"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    let a = run(&["verify", "--suite", "round-trip", "--seed", "5"]);
    let b = run(&["verify", "--suite", "round-trip", "--seed", "5", "--jobs", "1"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn ifs_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.ifs");
    std::fs::write(&path, "dim 2\nmap\nA 1 0 0 1\nq 3\nb 0 0\ns 3\nmap\nA 1 0 0 1\nq 3\nb 2 0\ns 3\nmap\nA 0 1 1 0\nq 3\nb 0 2\ns 3\n").unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["member", "--ifs-file", p, "--x", "0,0"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificates"]["address"], "(1)");
    assert_eq!(code(&run(&["member", "--ifs-file", p, "--x", "1/2,1/2"])), 1);
    assert_eq!(code(&run(&["member", "--ifs-file", p, "--x", "1/2"])), 2);
    let o = run(&["periods", "--ifs-file", p, "--x", "1/4,0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(&["member", "--ifs-file", "/nonexistent/file", "--x", "0"])), 2);
}
