use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use fraccancel::bench::scenario_by_name;
use fraccancel::canceller;
use fraccancel::realize::{fit_rational, parse_filter, validation_grid, FitRequest};
use fraccancel::Complex64;

fn c(w: f64) -> Complex64 {
    Complex64::new(0.0, w)
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fraccancel"));
    cmd.env_remove("FRACCANCEL_ILT_TERMS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

struct Csv {
    rows: Vec<Vec<f64>>,
    footer: HashMap<String, String>,
}

fn read_csv(path: &Path) -> Csv {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rows = Vec::new();
    let mut footer = HashMap::new();
    for line in text.lines().skip(1) {
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv.split_once(" = ").unwrap();
            footer.insert(k.to_string(), v.to_string());
        } else {
            rows.push(line.split(',').map(|v| v.parse().unwrap()).collect());
        }
    }
    Csv { rows, footer }
}

#[test]
fn simulate_example1_nominal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = run(&["simulate", "--scenario", "ex1-fig3", "--nu", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,y,u\n"));
    let csv = read_csv(&out);
    assert_eq!(csv.rows.len(), 2000);
    assert!(csv.rows.iter().all(|r| r.len() == 3));
    let last = csv.rows.last().unwrap();
    assert_eq!(last[0], 60.0);
    assert!((last[1] - 1.0).abs() < 0.02);
    assert_eq!(csv.footer["stable"], "true");
    assert!(csv.footer["gain_margin_db"].parse::<f64>().is_ok());
}

#[test]
fn simulate_low_order_case_has_small_undershoot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = run(&["simulate", "--scenario", "ex1-fig4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let u: f64 = read_csv(&out).footer["undershoot_frac"].parse().unwrap();
    assert!(u < 0.02, "{u}");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = run(&["simulate", "--scenario", "ex1-fig4", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unknown_scenario_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = run(&["simulate", "--scenario", "no-such", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such"));
}

#[test]
fn unstable_loop_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = run(&["simulate", "--scenario", "ex1-fig3", "--nu", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read_csv(&out).footer["stable"], "false");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--scenario", "ex1-fig3", "--nu", "x"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn sweep_rows(args: &[&str]) -> (Option<i32>, Vec<HashMap<String, String>>) {
    let o = run(args);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows = lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(str::to_string)).collect())
        .collect();
    (o.status.code(), rows)
}

#[test]
fn sweep_example2_gets_slower_with_nu() {
    let (code, rows) = sweep_rows(&["sweep", "--scenario", "ex2-fig5", "--nus", "4,5,6"]);
    assert_eq!(code, Some(0));
    assert_eq!(rows.len(), 3);
    let nus: Vec<&str> = rows.iter().map(|r| r["nu"].as_str()).collect();
    assert_eq!(nus, ["4", "5", "6"]);
    let rise: Vec<f64> = rows.iter().map(|r| r["rise_time_s"].parse().unwrap()).collect();
    assert!(rise[0] < rise[1] && rise[1] < rise[2], "{rise:?}");
}

#[test]
fn sweep_example1_rows_are_stable() {
    let (code, rows) = sweep_rows(&["sweep", "--scenario", "ex1-fig3", "--nus", "15,20,25"]);
    assert_eq!(code, Some(0));
    assert!(rows.iter().all(|r| r["stable"] == "true"));
}

#[test]
fn sweep_at_nu_one_matches_plain_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = run(&["simulate", "--scenario", "ex2-fig5", "--nu", "1", "--out", out.to_str().unwrap()]);
    let csv = read_csv(&out);
    let (code, rows) = sweep_rows(&["sweep", "--scenario", "ex2-fig5", "--nus", "1"]);
    assert_eq!(code, o.status.code());
    let row = &rows[0];
    assert_eq!(row["stable"], csv.footer["stable"]);
    for key in ["gain_margin_db", "phase_margin_deg", "omega_gain_crossover"] {
        assert_eq!(row[key], csv.footer[key], "{key}");
    }
    if let Some(u) = csv.footer.get("undershoot_frac") {
        assert_eq!(&row["undershoot_frac"], u);
    }
}

#[test]
fn zeros_of_example2() {
    let o = run(&["zeros", "--plant", "example2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let zeros: Vec<f64> = text.lines().filter(|l| !l.starts_with('#')).map(|l| l.parse().unwrap()).collect();
    assert_eq!(zeros.len(), 3);
    for (z, want) in zeros.iter().zip([19.9982, 45.0015, 400.0282]) {
        assert!((z - want).abs() < 1e-2);
    }
    assert_eq!(run(&["zeros", "--plant", "example9"]).status.code(), Some(1));
}

#[test]
fn margins_against_baseline() {
    let o = run(&["margins", "--scenario", "ex1-fig3", "--nu", "20", "--compare-baseline"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), ("canceller", "baseline"));
    // the canceller stabilizes the loop: positive gain margin, against a
    // negative one without it
    assert_eq!((rows[0][2], rows[1][2]), ("true", "false"));
    let gm: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(gm[0] > 0.0 && gm[1] < 0.0, "{gm:?}");
}

#[test]
fn realize_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c1.txt");
    let o = run(&["realize", "--scenario", "ex1-fig3", "--order", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let filter = parse_filter(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let z = scenario_by_name("ex1-fig3").unwrap().zeros[0];
    let band = (z / 100.0, z * 100.0);
    let req = FitRequest::new(canceller(z, 20).unwrap(), band, 8);
    let fit = fit_rational(&req).unwrap();
    match &filter {
        fraccancel::realize::Filter::Tf { num, den } => assert_eq!((num.len(), den.len()), (9, 9)),
        other => panic!("unexpected form {other:?}"),
    }
    for w in validation_grid(band, 4 * req.n_samples) {
        let (a, b) = (filter.eval(c(w)), fit.eval(c(w)));
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }
}

#[test]
fn scenario_file_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.toml");
    let mut s = scenario_by_name("ex1-fig4").unwrap().to_toml().unwrap();
    s = s.replace("n_points = 2000", "n_points = 50");
    std::fs::write(&file, s).unwrap();
    let out = dir.path().join("y.csv");
    let args = ["simulate", "--scenario", file.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(run(&args).status.code(), Some(0));
    let base = read_csv(&out);
    assert_eq!(base.rows.len(), 50);

    let o = bin().args(args).env("FRACCANCEL_ILT_TERMS", "400").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let more = read_csv(&out);
    for (a, b) in base.rows.iter().zip(&more.rows) {
        assert!((a[1] - b[1]).abs() < 1e-6);
    }
    let o = bin().args(args).env("FRACCANCEL_ILT_TERMS", "3").output().unwrap();
    assert_eq!(o.status.code(), Some(1), "too few terms is rejected");
}

#[test]
fn csv_values_equal_library_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = run(&["simulate", "--scenario", "ex1-fig4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read_csv(&out);
    let s = scenario_by_name("ex1-fig4").unwrap();
    let (r, _) = fraccancel_cli::run::simulate(&s, &fraccancel::ilt::IltParams::default()).unwrap();
    for (i, row) in csv.rows.iter().enumerate() {
        assert_eq!(row, &vec![r.times[i], r.y[i], r.u[i]]);
    }
}
