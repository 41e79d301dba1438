use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn lgev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgev")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    lines
        .take_while(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn cdf_grid_has_one_row_per_point_and_is_monotone() {
    let csv = stdout(&lgev(&["cdf", "--m", "10", "--n", "5", "--p", "15", "--snr-db", "10", "--grid", "0:20:200"]));
    assert!(csv.starts_with("x,cdf_analytic\n"));
    let f = column(&csv, "cdf_analytic");
    assert_eq!(f.len(), 200);
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
    assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn cdf_null_point() {
    let csv = stdout(&lgev(&["cdf", "--m", "3", "--n", "2", "--p", "3", "--eta", "0", "--grid", "1:1:1"]));
    assert_eq!(csv, "x,cdf_analytic\n1,0.015625\n");
}

#[test]
fn cdf_with_empirical_column() {
    let csv = stdout(&lgev(&["cdf", "--m", "4", "--n", "2", "--p", "5", "--eta", "1", "--grid", "0:10:5", "--trials", "2000"]));
    let exact = column(&csv, "cdf_analytic");
    let emp = column(&csv, "cdf_empirical");
    for (a, b) in exact.iter().zip(&emp) {
        assert!((a - b).abs() < 0.05, "{a} vs {b}");
    }
}

#[test]
fn invalid_dimensions_exit_with_validation_code() {
    let out = lgev(&["cdf", "--m", "5", "--n", "5", "--p", "6", "--eta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires m > n"));
    let out = lgev(&["cdf", "--m", "5", "--n", "2", "--p", "4", "--eta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p >= m"));
    let out = lgev(&["cdf", "--m", "5", "--n", "2", "--p", "6", "--eta", "1", "--snr-db", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lgev(&["cdf", "--m", "5", "--n", "2", "--p", "6", "--grid", "0:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cancellation_beyond_budget_exits_with_numerical_code() {
    let out = lgev(&["cdf", "--m", "200", "--n", "150", "--p", "248", "--eta", "1e6", "--grid", "1000:1000:1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x = 1000"));
}

#[test]
fn density_point() {
    let csv = stdout(&lgev(&["density", "--m", "4", "--n", "1", "--p", "5", "--eta", "2", "--at", "0.7"]));
    let d = column(&csv, "density")[0];
    assert!((d - 0.15715424621717523712).abs() <= 1e-12, "{d}");
    let out = lgev(&["density", "--m", "4", "--n", "2", "--p", "5", "--eta", "2", "--at", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn roc_exact_column_is_monotone() {
    let csv = stdout(&lgev(&["roc", "--m", "15", "--p", "16", "--n", "10", "--snr-db", "10"]));
    let pf = column(&csv, "pf");
    let pd = column(&csv, "pd_exact");
    assert_eq!(pd.len(), 101);
    assert!(pd.windows(2).all(|w| w[0] <= w[1]));
    assert!(pf.iter().zip(&pd).all(|(f, d)| d >= f));
}

#[test]
fn asymptotic_roc_starts_at_zero() {
    let csv = stdout(&lgev(&["roc", "--asym", "--c", "1", "--n", "5"]));
    let pf = column(&csv, "pf");
    let pd = column(&csv, "pd_asymptotic");
    assert_eq!((pf[0], pd[0]), (0.0, 0.0));
    assert_eq!(*pd.last().unwrap(), 1.0);
    let csv = stdout(&lgev(&["asym", "--c", "1", "--n", "1", "--pf-grid", "0.5:0.5:1"]));
    assert!((column(&csv, "pd_asymptotic")[0] - (1.0 - 0.5 / (1.0 + 2f64.ln()))).abs() < 1e-15);
    assert_eq!(column(&csv, "pd_upper_bound")[0], 0.75);
}

#[test]
fn balanced_roc_reports_asymptotic_gap() {
    let csv = stdout(&lgev(&["roc", "--m", "6", "--p", "6", "--n", "5", "--gamma-eq-m", "--with-asym", "--closed-form"]));
    let exact = column(&csv, "pd_exact");
    let closed = column(&csv, "pd_closed_form");
    let asym = column(&csv, "pd_asymptotic");
    assert!(exact.iter().zip(&closed).all(|(a, b)| (a - b).abs() <= 1e-9));
    let footer = csv.lines().find(|l| l.starts_with("# max_abs_gap_exact_vs_asymptotic")).expect("footer");
    let gap: f64 = footer.rsplit(['=', ',', ' ']).next().unwrap().parse().unwrap();
    let want = exact.iter().zip(&asym).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert_eq!(gap, want);
    assert!(gap < 0.1);

    let out = lgev(&["roc", "--m", "6", "--p", "7", "--n", "5", "--eta", "3", "--closed-form"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_output_carries_metadata() {
    let text = stdout(&lgev(&["--format", "json", "cdf", "--m", "3", "--n", "2", "--p", "3", "--eta", "0", "--grid", "1:2:2"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let meta = &v["metadata"];
    assert_eq!(meta["artifact"], "lgev");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["command"]["cdf"]["m"], 3);
    assert_eq!(v["columns"]["x"], serde_json::json!([1.0, 2.0]));
    assert_eq!(v["columns"]["cdf_analytic"][0], 0.015625);
}

#[test]
fn output_file_honors_directory_override() {
    let dir = std::env::temp_dir().join(format!("lgev-cli-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let out = Command::new(env!("CARGO_BIN_EXE_lgev"))
        .env("LGEV_OUTPUT_DIR", &dir)
        .args(["--output", "sub/null.csv", "cdf", "--m", "3", "--n", "2", "--p", "3", "--eta", "0", "--grid", "1:1:1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(dir.join("sub/null.csv")).unwrap(), "x,cdf_analytic\n1,0.015625\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn monte_carlo_command_is_reproducible() {
    let args = ["mc", "--m", "4", "--n", "2", "--p", "5", "--eta", "2", "--trials", "300", "--seed", "9"];
    let a = stdout(&lgev(&args));
    assert_eq!(a, stdout(&lgev(&args)));
    assert_eq!(a.lines().count(), 301);
    let mut threaded = vec!["--threads", "3"];
    threaded.extend(args);
    assert_eq!(a, stdout(&lgev(&threaded)));
}

#[test]
fn quick_validation_passes_and_fault_fails() {
    let start = Instant::now();
    let out = lgev(&["validate", "--quick"]);
    assert!(start.elapsed() < Duration::from_secs(60));
    let report = stdout(&out);
    assert!(report.lines().skip(1).all(|l| l.contains(",PASS,")), "{report}");

    let out = lgev(&["validate", "--quick", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains(",FAIL,"));
}
