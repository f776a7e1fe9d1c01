use std::path::PathBuf;
use std::process::{Command, Output};

use confein_cli::catalog;
use confein_cli::spec::MetricSpecFile;
use serde_json::Value;

fn confein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confein")).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn dump(name: &str) -> PathBuf {
    let path = tmp(&format!("{name}.json"));
    let out = confein(&["catalog", "dump", name, "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn catalog_lists_every_entry() {
    let out = confein(&["catalog", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in catalog::names() {
        assert!(text.lines().any(|l| l.starts_with(&format!("{name}\t"))), "{name}");
    }
}

#[test]
fn dumped_specs_load_back_to_the_same_chart() {
    for name in ["schwarzschild", "s2xs4_einstein", "conformally_flat_generic"] {
        let text = std::fs::read_to_string(dump(name)).unwrap();
        let spec = MetricSpecFile::from_json(&text).unwrap();
        let once = MetricSpecFile::from_chart(&spec.to_chart().unwrap()).to_json();
        let twice = MetricSpecFile::from_chart(&MetricSpecFile::from_json(&once).unwrap().to_chart().unwrap()).to_json();
        assert_eq!(once, twice, "{name}");
        let (a, b): (Value, Value) = (serde_json::from_str(&text).unwrap(), serde_json::from_str(&once).unwrap());
        for key in ["name", "signature", "coordinates", "metric", "parameters", "domain"] {
            assert_eq!(a[key], b[key], "{name}.{key}");
        }
    }
}

#[test]
fn analyze_report_shape() {
    let file = dump("schwarzschild");
    let out = confein(&["analyze", file.to_str().unwrap(), "--points", "3", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["run"]["chart"], "schwarzschild");
    assert_eq!(report["run"]["seed"], 7);
    assert_eq!(report["run"]["order_used"], 5);
    assert_eq!(report["points"].as_array().unwrap().len(), 3);
    assert_eq!(report["aggregate"]["einstein"], true);
    assert_eq!(report["aggregate"]["max_rank"], 5);
}

#[test]
fn analyze_writes_the_same_bytes_twice() {
    let file = dump("bumped_schwarzschild");
    let run = |out: &str| {
        let path = tmp(out);
        let o = confein(&["analyze", file.to_str().unwrap(), "--points", "4", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn rescale_multiplies_every_component() {
    let file = dump("sphere_4");
    let out_path = tmp("sphere_4_rescaled.json");
    let out = confein(&["rescale", file.to_str().unwrap(), "--omega", "0.2*x1*x2", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let base = MetricSpecFile::from_json(&std::fs::read_to_string(&file).unwrap()).unwrap().to_chart().unwrap();
    let hat = MetricSpecFile::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap().to_chart().unwrap();
    let p = [0.3, -0.5, 0.2, 0.1];
    let factor = (2.0f64 * 0.2 * p[0] * p[1]).exp();
    for (a, b) in base.metric_values(&p).unwrap().iter().zip(hat.metric_values(&p).unwrap()) {
        assert!((a * factor - b).abs() <= 1e-14 * b.abs().max(1.0));
    }
}

#[test]
fn transport_along_a_curve() {
    let file = dump("sphere_4");
    let out = confein(&["transport", file.to_str().unwrap(), "--curve", "0.5*t;0;0.2*t;0", "--steps", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["steps"], 200);
    assert!(r["closure_deviation"].is_null());
    assert!(r["h_drift"].as_f64().unwrap() <= 1e-12);
    // the unit scale tractor of the round sphere is parallel
    let start: Vec<f64> = r["start"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let end: Vec<f64> = r["end"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(start[0], 1.0);
    for (a, b) in start.iter().zip(&end) {
        assert!((a - b).abs() <= 1e-10, "{start:?} {end:?}");
    }
}

#[test]
fn classify_prints_verdicts() {
    let file = dump("flat_4");
    let out = confein(&["classify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("einstein in declared coordinates: yes"));
}

#[test]
fn exit_codes() {
    let good = dump("flat_3");
    let good = good.to_str().unwrap();
    assert_eq!(confein(&["analyze", good, "--skip", "rank"]).status.code(), Some(1));
    assert_eq!(confein(&["analyze", good, "--points", "0"]).status.code(), Some(1));
    assert_eq!(confein(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(confein(&["catalog", "dump", "no_such_metric"]).status.code(), Some(1));
    assert_eq!(confein(&["analyze", tmp("missing.json").to_str().unwrap()]).status.code(), Some(2));

    let broken = tmp("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(confein(&["analyze", broken.to_str().unwrap()]).status.code(), Some(2));

    let text = std::fs::read_to_string(good).unwrap();
    let degenerate = tmp("degenerate.json");
    std::fs::write(&degenerate, text.replacen("\"1\"", "\"0\"", 1)).unwrap();
    assert_eq!(confein(&["analyze", degenerate.to_str().unwrap()]).status.code(), Some(2));

    // valid at the midpoint, indefinite at every sample
    let pinched = tmp("pinched.json");
    std::fs::write(&pinched, text.replacen("\"1\"", "\"1 - 1e6*x1^2\"", 1)).unwrap();
    assert_eq!(confein(&["analyze", pinched.to_str().unwrap(), "--points", "3"]).status.code(), Some(3));
}

#[test]
fn every_catalog_entry_analyzes_within_budget() {
    use confein_cli::analyze::AnalyzeOptions;
    use confein_cli::commands::run_analyze;
    for e in catalog::ENTRIES {
        let chart = confein_core::chart::MetricChart::new(e.description()).unwrap();
        let start = std::time::Instant::now();
        let report = run_analyze(&chart, &AnalyzeOptions::default()).unwrap();
        assert!(start.elapsed().as_secs() < 60, "{}", e.name);
        assert_eq!(report.aggregate.failed_points, 0, "{}", e.name);
        assert_eq!(report.aggregate.einstein, e.einstein, "{}", e.name);
    }
}

fn doc_example(doc: &str, marker: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(doc);
    let text = std::fs::read_to_string(path).unwrap();
    let after = text.split(&format!("<!-- example: {marker} -->\n```json\n")).nth(1).unwrap();
    after.split("```").next().unwrap().to_string()
}

#[test]
fn documented_examples_match_live_output() {
    let out = confein(&["catalog", "dump", "schwarzschild"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), doc_example("spec-format.md", "catalog dump schwarzschild"));
    let file = dump("sphere_3");
    let out = confein(&["analyze", file.to_str().unwrap(), "--points", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), doc_example("report-format.md", "analyze sphere_3 --points 1"));
}
