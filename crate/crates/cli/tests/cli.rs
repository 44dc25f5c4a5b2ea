use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn powassign(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powassign"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str], dir: &Path) -> Value {
    let out = powassign(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn workspace(n: usize) -> TempDir {
    let dir = TempDir::new().unwrap();
    let seed = n.to_string();
    let n = n.to_string();
    let out = powassign(
        &["gen", "--n", &n, "--seed", &seed, "--output", "pts.txt"],
        dir.path(),
    );
    assert!(out.status.success());
    dir
}

fn svg_counts(path: &Path) -> (usize, usize) {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
    let count = |tag: &str| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
    (count("circle"), count("polyline"))
}

#[test]
fn cover_report_fields() {
    let dir = workspace(12);
    let r = report(
        &[
            "cover",
            "--k",
            "2",
            "--alpha",
            "2",
            "--epsilon",
            "1",
            "--discrete",
            "pts.txt",
        ],
        dir.path(),
    );
    assert_eq!(r["problem"], "cover");
    assert_eq!(r["parameters"]["k"], 2);
    for field in [
        "balls",
        "cost",
        "uncovered",
        "coreset_size",
        "grid_delta",
        "opt_estimate",
    ] {
        assert!(!r["result"][field].is_null(), "missing {field}");
    }
    assert!(r["result"]["balls"].as_array().unwrap().len() <= 2);
    assert!(r["timings_ms"]["solve"].is_number());
}

#[test]
fn cover_exact_ratio_within_bound() {
    let dir = workspace(10);
    let r = report(
        &[
            "cover",
            "--k",
            "2",
            "--epsilon",
            "0.5",
            "--exact",
            "pts.txt",
        ],
        dir.path(),
    );
    assert!(r["result"]["ratio_vs_opt"].as_f64().unwrap() <= 1.5 + 1e-9);
}

#[test]
fn refusals_exit_with_three() {
    let dir = workspace(13);
    let out = powassign(&["cover", "--exact", "pts.txt"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let out = powassign(
        &["cover", "--non-discrete", "--outliers", "1", "pts.txt"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn input_and_usage_errors_exit_with_two() {
    let dir = workspace(6);
    std::fs::write(dir.path().join("bad.txt"), "0 0\n1 x\n").unwrap();
    let out = powassign(&["cover", "bad.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let cases: [&[&str]; 5] = [
        &["tsp", "missing.txt"],
        &["tsp", "--gap", "2"],
        &["multicast", "--receivers", "1", "pts.txt"],
        &["multicast", "--source", "0", "--receivers", "9", "pts.txt"],
        &["cover", "--epsilon", "2", "pts.txt"],
    ];
    for args in cases {
        assert_eq!(
            powassign(args, dir.path()).status.code(),
            Some(2),
            "{args:?}"
        );
    }
}

#[test]
fn multicast_reports() {
    let dir = workspace(10);
    let r = report(
        &["multicast", "--source", "4", "--receivers", "4", "pts.txt"],
        dir.path(),
    );
    assert_eq!(r["result"]["cost"], 0.0);
    assert_eq!(r["result"]["ranges"].as_array().unwrap().len(), 0);

    let r = report(
        &[
            "multicast",
            "--source",
            "0",
            "--receivers",
            "3,7",
            "--k",
            "2",
            "--ladder",
            "--exact",
            "pts.txt",
        ],
        dir.path(),
    );
    assert_eq!(r["result"]["ladder"], true);
    assert!(r["counts"]["candidate_ranges"].as_u64().unwrap() > 0);
    assert!(r["result"]["ratio_vs_opt"].as_f64().unwrap() <= 2.0 + 1e-9);
    assert!(!r["result"]["tree_edges"].as_array().unwrap().is_empty());
}

#[test]
fn tsp_reports() {
    let dir = workspace(9);
    let r = report(
        &["tsp", "--gap", "4", "--alpha", "2", "--exact"],
        dir.path(),
    );
    assert_eq!(r["result"]["opt_cost"], 10.0);

    let r = report(&["tsp", "--alpha", "2", "pts.txt"], dir.path());
    assert!(r["result"]["ratio_vs_mst"].as_f64().unwrap() <= 6.0);
    assert_eq!(r["result"]["order"].as_array().unwrap().len(), 9);
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let dir = workspace(12);
    let invocations: [&[&str]; 4] = [
        &["cover", "--k", "3", "--epsilon", "0.5", "pts.txt"],
        &["cover", "--k", "2", "--non-discrete", "pts.txt"],
        &[
            "multicast",
            "--source",
            "1",
            "--receivers",
            "2,5",
            "--k",
            "2",
            "pts.txt",
        ],
        &["tsp", "--exact", "--alpha", "3", "--gap", "8"],
    ];
    for args in invocations {
        let run = |threads: &str| {
            let mut full = vec!["--no-timings", "--threads", threads];
            full.extend_from_slice(args);
            let out = powassign(&full, dir.path());
            assert!(out.status.success(), "{args:?}");
            out.stdout
        };
        let one = run("1");
        assert_eq!(one, run("1"), "{args:?}");
        assert_eq!(one, run("4"), "{args:?}");
    }
}

#[test]
fn svg_outputs_are_valid_and_counted() {
    let dir = workspace(12);
    let r = report(
        &["cover", "--k", "3", "--svg", "cover.svg", "pts.txt"],
        dir.path(),
    );
    let balls = r["result"]["balls"].as_array().unwrap().len();
    assert_eq!(svg_counts(&dir.path().join("cover.svg")), (balls, 0));

    let r = report(
        &[
            "multicast",
            "--source",
            "0",
            "--receivers",
            "3,7",
            "--k",
            "2",
            "--svg",
            "m.svg",
            "pts.txt",
        ],
        dir.path(),
    );
    let senders = r["result"]["ranges"].as_array().unwrap().len();
    let edges = r["result"]["tree_edges"].as_array().unwrap().len();
    assert_eq!(svg_counts(&dir.path().join("m.svg")), (senders, edges));

    report(&["tsp", "--svg", "t.svg", "pts.txt"], dir.path());
    assert_eq!(svg_counts(&dir.path().join("t.svg")), (0, 1));
}

#[test]
fn generator_is_seeded() {
    let dir = TempDir::new().unwrap();
    let a = powassign(&["gen", "--n", "5", "--seed", "7"], dir.path()).stdout;
    let b = powassign(&["gen", "--n", "5", "--seed", "7"], dir.path()).stdout;
    let c = powassign(
        &["gen", "--n", "5", "--seed", "8", "--dim", "3"],
        dir.path(),
    )
    .stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(c).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.split_whitespace().count() == 3));
}
