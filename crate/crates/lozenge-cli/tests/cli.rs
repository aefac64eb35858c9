use std::process::{Command, Output};

use lozenge::arctic::hexagon_arctic;
use lozenge::density::{two_corner_solution, uniform_rho};
use lozenge::enumeration::{exact_distribution, RegionSpec};
use lozenge::exact::{int, parse_rational};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lozenge")).args(args).env_remove("LOZENGE_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn rational(v: &Value) -> lozenge::exact::ExactRational {
    parse_rational(&format!("{}/{}", v["num"].as_str().unwrap(), v["den"].as_str().unwrap())).unwrap()
}

#[test]
fn count_single_path() {
    let o = run(&["count", "--k", "1", "--n", "2", "--q", "1", "--m", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rational(&v), int(2));
}

#[test]
fn count_methods_agree() {
    let args = ["count", "--k", "2", "--n", "3", "--q", "5/3", "--m", "1,3"];
    let values: Vec<Value> = ["det", "product", "brute"]
        .iter()
        .map(|m| {
            let mut a = args.to_vec();
            a.extend(["--method", m]);
            serde_json::from_str(&stdout(&run(&a))).unwrap()
        })
        .collect();
    assert_eq!(values[0], values[1]);
    assert_eq!(values[0], values[2]);
}

#[test]
fn uniform_density_grid() {
    let o = run(&["density", "--model", "uniform", "--lambda", "1", "--grid", "3"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["z", "rho", "regime_tag"]);
    let mid = rows.iter().find(|r| r[0] == "1").unwrap();
    assert!((mid[1].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-7);
}

#[test]
fn density_csv_round_trips() {
    let o = run(&["density", "--model", "uniform", "--lambda", "0.7", "--grid", "57"]);
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 57);
    for r in rows {
        let z: f64 = r[0].parse().unwrap();
        let rho: f64 = r[1].parse().unwrap();
        assert_eq!(rho.to_bits(), uniform_rho(z, 0.7).to_bits());
    }
}

#[test]
fn distribution_csv_is_exact() {
    let o = run(&["distribution", "--k", "2", "--n", "3", "--q", "2/3", "--format", "csv"]);
    assert!(o.status.success());
    let dist = exact_distribution(&RegionSpec::cut_hexagon(2, 3, parse_rational("2/3").unwrap()).unwrap()).unwrap();
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["m", "weight", "probability"]);
    assert_eq!(rows.len(), dist.configs.len());
    for (i, r) in rows.iter().enumerate() {
        let m: Vec<i64> = r[0].split(' ').map(|x| x.parse().unwrap()).collect();
        assert_eq!(m, dist.configs[i].m);
        assert_eq!(parse_rational(&r[1]).unwrap(), dist.weights[i]);
        assert_eq!(parse_rational(&r[2]).unwrap(), dist.probability(i));
    }
}

#[test]
fn distribution_json_sums_to_one() {
    let o = run(&["distribution", "--k", "2", "--n", "2", "--forbidden", "0:0.5"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total: lozenge::exact::ExactRational = v["configs"].as_array().unwrap().iter().map(|c| rational(&c["probability"])).sum();
    assert_eq!(total, int(1));
    assert!(v["configs"].as_array().unwrap().iter().all(|c| c["m"][0].as_i64().unwrap() >= 1));
}

#[test]
fn sample_is_deterministic_and_reads_seed_from_env() {
    let args = ["sample", "--k", "6", "--n", "6", "--steps", "20000", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_lozenge"))
        .args(&args[..args.len() - 2])
        .env("LOZENGE_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(a.stdout, env.stdout);
    let (header, rows) = csv_rows(&stdout(&a));
    assert_eq!(header, ["bin_center", "empirical", "theory", "abs_err"]);
    for r in rows {
        let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        assert!(((v[1] - v[2]).abs() - v[3]).abs() < 1e-15);
    }
}

#[test]
fn sample_with_forbidden_corners_tracks_limit() {
    let o = run(&["sample", "--k", "20", "--n", "20", "--forbidden", "0:0.2", "--forbidden", "1.6:2", "--steps", "2000000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv_rows(&stdout(&o));
    let l1: f64 = rows
        .iter()
        .map(|r| r[3].parse::<f64>().unwrap() * 2.0 / rows.len() as f64)
        .sum();
    assert!(l1 < 0.12, "{l1}");
}

#[test]
fn arctic_points_lie_on_the_ellipse() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("a.svg");
    let o = run(&["arctic", "--lambda", "2", "--theta", "1", "--points", "40", "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success());
    let c = hexagon_arctic(2.0, 1.0).unwrap();
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["x", "y"]);
    assert_eq!(rows.len(), 40);
    for r in rows {
        let (x, y): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!(c.eval(x, y).abs() < 1e-12);
    }
    let s = std::fs::read_to_string(svg).unwrap();
    assert!(s.starts_with("<svg") && s.matches("<polyline").count() == 2);
}

#[test]
fn solve_gap_matches_closed_form() {
    let o = run(&["solve-gap", "--lambda", "1", "--forbidden", "0:0.2", "--forbidden", "1.6:2", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], Value::Bool(true));
    let c = two_corner_solution(1.0, 0.2, 1.6).unwrap();
    let band = &v["bands"][0];
    assert!((band[0].as_f64().unwrap() - c.band.lo).abs() < 1e-6);
    assert!((band[1].as_f64().unwrap() - c.band.hi).abs() < 1e-6);
}

#[test]
fn solve_gap_grid_tags() {
    let o = run(&["solve-gap", "--lambda", "1", "--forbidden", "0:0.2", "--forbidden", "1.6:2", "--grid", "11"]);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["z", "rho", "regime_tag"]);
    let tags: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(tags[0], "forbidden");
    assert_eq!(tags[5], "band");
    assert_eq!(tags[10], "forbidden");
}

#[test]
fn verify_passes() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("checks passed"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--k", "1"]).status.code(), Some(2));
    let o = run(&["density", "--model", "uniform"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lambda"));
    let o = run(&["density", "--model", "two-corner", "--lambda", "1", "--nu", "0.3", "--theta", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta - nu >= 1"));
    let o = run(&["count", "--k", "1", "--n", "2", "--m", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["solve-gap", "--lambda", "1", "--forbidden", "0.5"]).status.code(), Some(2));
}
