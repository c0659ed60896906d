use std::path::PathBuf;
use std::process::{Command, Output};

fn bitpush(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitpush")).args(args).output().expect("spawn bitpush")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn column(csv: &str, row: usize, name: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.nth(row).unwrap().split(',').nth(idx).unwrap().to_string()
}

#[test]
fn run_writes_one_row() {
    let o = bitpush(&["run", "--method", "adaptive", "--n", "10000", "--bits", "10", "--reps", "20", "--seed", "42"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("method,param_name,param_value,n,bits,epsilon,delta,gamma,alpha,nrmse,stderr,reps,wall_time_ms\n"));
    let nrmse: f64 = column(&text, 0, "nrmse").parse().unwrap();
    assert!(nrmse > 0.0 && nrmse < 0.05, "{nrmse}");
    assert_eq!(column(&text, 0, "wall_time_ms"), "");
}

#[test]
fn sweep_writes_row_per_value() {
    let o = bitpush(&["sweep", "--param", "delta", "--values", "0.1,0.2,0.5,0.9", "--n", "2000", "--reps", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(column(&text, 3, "param_value"), "0.9");
    assert_eq!(column(&text, 3, "delta"), "0.9");
}

#[test]
fn identical_argv_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = ["sweep", "--param", "epsilon", "--values", "none,1", "--n", "2000", "--reps", "5", "--seed", "7"];
    let a = bitpush(&args);
    let b = bitpush(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut with_out = args.to_vec();
    let p = path.display().to_string();
    with_out.extend(["--out", &p]);
    let c = bitpush(&with_out);
    assert!(c.status.success());
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["run", "--method", "laplace", "--epsilon", "0"],
        vec!["run", "--method", "laplace"],
        vec!["run", "--no-such-flag"],
        vec!["run", "--method", "nope"],
        vec!["run", "--reps", "1"],
        vec!["run", "--dist", "file"],
        vec!["sweep", "--param", "colour", "--values", "1"],
    ] {
        let o = bitpush(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn missing_file_exits_1() {
    let o = bitpush(&["run", "--dist", "file", "--input", "/definitely/not/here.csv", "--reps", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn ingest_check_summarizes_column() {
    let o = bitpush(&["ingest-check", "--input", &fixture("ages.csv"), "--column", "age", "--bits", "5"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "rows 6\nskipped 2\nmin 20\nmax 61\nmean 35.5\noutside_5_bits 3\n"
    );
}

#[test]
fn file_input_runs_end_to_end() {
    let o = bitpush(&[
        "run", "--dist", "file", "--input", &fixture("ages.csv"), "--column", "age", "--bits", "7",
        "--method", "oracle", "--reps", "3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(column(&text, 0, "n"), "6");
    assert_eq!(column(&text, 0, "nrmse"), "0");
}

#[test]
fn meter_report_counts_bits() {
    let o = bitpush(&["meter-report", "--method", "basic", "--n", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("clients 1000\n"));
    assert!(text.contains("per_client_bits 1.000000\n"));
    assert!(text.contains("max_client_bits 1.000000\n"));
    let means = text.lines().find_map(|l| l.strip_prefix("bit_means ")).unwrap();
    assert_eq!(means.split(' ').count(), 10);
}

#[test]
fn meter_flag_writes_to_stderr() {
    let o = bitpush(&["run", "--method", "basic", "--n", "1000", "--reps", "2", "--meter"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("meter method=basic"));
    assert!(!stdout(&o).contains("meter"));
}
