use std::path::Path;
use std::process::{Command, Output};

use cantor_riemannium::cauchy::{ProfileRow, ResidueReport};
use cantor_riemannium::geometry::{sample_good_points, GoodPointConfig};
use cantor_riemannium::green::{GreenLineTrace, TraceStatus};
use cantor_riemannium::monodromy::BorelReport;
use cantor_riemannium::path::{crossing_loop, PathJson};
use cantor_riemannium::rational::{fmt_ratio, ratio};
use cantor_riemannium::riemannium::{generic_node_count, GraphJson, Quotient};
use rand::SeedableRng;

fn riemannium(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riemannium"))
        .current_dir(dir)
        .env_remove("RIEMANNIUM_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const LOOP: &str = r#"{"vertices": [[0,0],[0.4,0.3],[-0.7,0.3],[-0.7,-0.3],[0.4,-0.3]], "closed": true}"#;

fn good_points(n: usize) -> Vec<String> {
    let cfg = GoodPointConfig::new(ratio(7, 2), 30);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    sample_good_points(&mut rng, n, &cfg, 16, 8).unwrap().iter().map(|g| fmt_ratio(&g.x)).collect()
}

#[test]
fn residue_check_reports_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("loop.json"), LOOP).unwrap();
    let out = stdout(&riemannium(dir.path(), &["residue-check", "--loop", "loop.json", "--base", "mu", "--depth", "8"]));
    let rep: ResidueReport = serde_json::from_str(&out).unwrap();
    assert!(rep.pass);
    assert!(rep.diff <= 1e-8);
    assert_eq!(rep.exact, "1/2");
    let again = serde_json::to_string(&rep).unwrap();
    assert_eq!(serde_json::from_str::<ResidueReport>(&again).unwrap(), rep);
    rep.loop_.to_crossing_path().unwrap();
}

#[test]
fn check_lambda_rejects_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = riemannium(dir.path(), &["check-lambda", "--ratio", "1/2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverges"));
    let ok = stdout(&riemannium(dir.path(), &["check-lambda", "--ratio", "1/8"]));
    let v: serde_json::Value = serde_json::from_str(&ok).unwrap();
    assert_eq!(v["mass_sum"], "1/1");
    assert_eq!(v["line_bound"], "6/1");
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["eval"],
        &["eval", "--at", "nonsense"],
        &["residue-check", "--loop", "missing.json"],
        &["render", "--size", "8x8"],
        &["sheets", "--quotient", "H9"],
        &["green-line", "--theta", "x"],
    ] {
        assert_eq!(riemannium(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sheets_match_closed_form_count() {
    let dir = tempfile::tempdir().unwrap();
    let pool = good_points(2);
    std::fs::write(dir.path().join("points.json"), serde_json::to_string(&pool).unwrap()).unwrap();
    let out = stdout(&riemannium(dir.path(), &["sheets", "--pool", "points.json", "--budget", "2", "--quotient", "H0"]));
    let g: GraphJson = serde_json::from_str(&out).unwrap();
    assert_eq!(g.quotient, Quotient::H0);
    assert_eq!(g.node_count as u128, generic_node_count(2, 2));
    assert_eq!(g.nodes.len(), g.node_count);
    let h1: GraphJson =
        serde_json::from_str(&stdout(&riemannium(dir.path(), &["sheets", "--pool", "points.json", "--quotient", "H1"]))).unwrap();
    assert_eq!(h1.node_count, 1);
    let dot = stdout(&riemannium(dir.path(), &["sheets", "--pool", "points.json", "--dot"]));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace: GreenLineTrace = serde_json::from_str(&stdout(&riemannium(dir.path(), &["green-line", "--theta", "1/3"]))).unwrap();
    assert_eq!(trace.status, TraceStatus::Landed);
    assert_eq!(trace.theta, "1/3");

    let rows: Vec<ProfileRow> =
        serde_json::from_str(&stdout(&riemannium(dir.path(), &["profile", "--x0", "1/3", "--count", "5", "--json"]))).unwrap();
    assert_eq!(rows.len(), 5);
    let csv = stdout(&riemannium(dir.path(), &["profile", "--x0", "1/3", "--count", "5"]));
    assert_eq!(csv.lines().count(), 6);

    let eval: serde_json::Value =
        serde_json::from_str(&stdout(&riemannium(dir.path(), &["eval", "--at", "0.1,0.2", "--at", "-0.3,-0.5"]))).unwrap();
    assert_eq!(eval.as_array().unwrap().len(), 2);

    let x = cantor_riemannium::rational::parse_ratio(&good_points(1)[0]).unwrap();
    let path = PathJson::from_crossing_path(&crossing_loop(&x, 1, 0.2).unwrap());
    std::fs::write(dir.path().join("path.json"), serde_json::to_string(&path).unwrap()).unwrap();
    let rep: BorelReport =
        serde_json::from_str(&stdout(&riemannium(dir.path(), &["borel", "--path", "path.json", "--tol", "1e-7"]))).unwrap();
    assert!(rep.last_diff < 1e-7);
    let mono: serde_json::Value = serde_json::from_str(&stdout(&riemannium(dir.path(), &["monodromy", "--loop", "path.json"]))).unwrap();
    // the loop value is the crossing value, which the continued integral approximates
    let v = cantor_riemannium::rational::to_f64(&cantor_riemannium::rational::parse_ratio(mono["value"].as_str().unwrap()).unwrap());
    assert!((rep.value[0] - v).abs() < 1e-6, "{} vs {v}", rep.value[0]);
}

#[test]
fn render_is_deterministic_and_honours_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["render", "--size", "48x40", "--window", "-1,1,-0.8,0.8", "--mode", "green_lines", "-o", "a.png"];
    stdout(&riemannium(dir.path(), &args));
    let mut again = args;
    again[8] = "b.png";
    stdout(&riemannium(dir.path(), &again));
    let a = std::fs::read(dir.path().join("a.png")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.png")).unwrap());
    assert_eq!(&a[1..4], b"PNG");

    let out = dir.path().join("renders");
    let o = Command::new(env!("CARGO_BIN_EXE_riemannium"))
        .current_dir(dir.path())
        .env("RIEMANNIUM_OUT_DIR", &out)
        .args(["render", "--size", "16x16", "-o", "c.ppm"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(std::fs::read(out.join("c.ppm")).unwrap().starts_with(b"P6\n16 16\n255\n"));
}
