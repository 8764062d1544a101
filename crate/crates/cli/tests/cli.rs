use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use breakscope_core::fixtures;
use serde_json::Value;

fn breakscope() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_breakscope"));
    cmd.env_remove("BREAKSCOPE_STABILITY_CONFIG").env_remove("RUST_LOG");
    cmd
}

fn run(args: &[&str]) -> Output {
    breakscope().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Servlet {
    _dir: tempfile::TempDir,
    v301: PathBuf,
    v310: PathBuf,
    mock: PathBuf,
    unrelated: PathBuf,
}

fn servlet() -> Servlet {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let (v301, v310, mock, unrelated) = (p("3.0.1.jar"), p("3.1.0.jar"), p("mock.jar"), p("unrelated.jar"));
    fixtures::servlet_3_0_1().write(&v301).unwrap();
    fixtures::servlet_3_1_0().write(&v310).unwrap();
    fixtures::mock_request_client().write(&mock).unwrap();
    fixtures::unrelated_client().write(&unrelated).unwrap();
    Servlet { _dir: dir, v301, v310, mock, unrelated }
}

type Check = fn(&Value) -> bool;

/// Keys that must be present with the given JSON types.
fn has_shape(v: &Value, fields: &[(&str, Check)]) {
    for (k, ok) in fields {
        let f = v.get(*k).unwrap_or_else(|| panic!("missing {k} in {v}"));
        assert!(ok(f), "{k} has the wrong type: {f}");
    }
}

#[test]
fn delta_reports_the_added_interface_method() {
    let f = servlet();
    let out = run(&["delta", s(&f.v301), s(&f.v310), "--json", "--fail-on-breaking"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    has_shape(
        &v,
        &[
            ("schema_version", Value::is_u64),
            ("old", Value::is_string),
            ("new", Value::is_string),
            ("changes", Value::is_array),
            ("counts", Value::is_object),
        ],
    );
    let changes = v["changes"].as_array().unwrap();
    assert_eq!(changes.len(), 1);
    assert_eq!(changes[0]["kind"], "methodAddedToInterface");
    assert_eq!(changes[0]["element"], "javax.servlet.http.HttpServletRequest#changeSessionId()Ljava/lang/String;");
    assert_eq!(v["counts"]["total"], 1);

    // without the flag a breaking delta is still a successful run
    assert_eq!(code(&run(&["delta", s(&f.v301), s(&f.v310)])), 0);
}

#[test]
fn identical_jars_have_an_empty_delta() {
    let f = servlet();
    let out = run(&["delta", s(&f.v301), s(&f.v301), "--json", "--fail-on-breaking"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["changes"].as_array().unwrap().len(), 0);
}

#[test]
fn delta_csv_has_a_header_and_one_row_per_change() {
    let f = servlet();
    let out = run(&["delta", s(&f.v301), s(&f.v310), "--csv"]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert!(r.headers().unwrap().iter().any(|h| h == "kind"));
    assert_eq!(r.records().count(), 1);
}

#[test]
fn unreadable_input_exits_with_input_status() {
    let f = servlet();
    let bad = f.v301.with_file_name("corrupt.jar");
    std::fs::write(&bad, b"PK\x03\x04 truncated").unwrap();
    let out = run(&["delta", s(&bad), s(&f.v310)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt.jar"));
    assert!(out.stdout.is_empty());

    let missing = f.v301.with_file_name("absent.jar");
    assert_eq!(code(&run(&["detect", s(&f.v301), s(&f.v310), s(&missing)])), 3);
}

#[test]
fn detect_finds_the_implementing_client() {
    let f = servlet();
    let out = run(&["detect", s(&f.v301), s(&f.v310), s(&f.mock), "--json", "--fail-on-breaking"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    has_shape(
        &v,
        &[
            ("schema_version", Value::is_u64),
            ("broken", Value::is_boolean),
            ("summary", Value::is_object),
            ("detections", Value::is_array),
        ],
    );
    assert_eq!(v["broken"], true);
    let d = v["detections"].as_array().unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["client"], "org.springframework.mock.web.MockHttpServletRequest");
    assert_eq!(d[0]["useKind"], "implements");
    assert_eq!(d[0]["bcKind"], "methodAddedToInterface");
    assert_eq!(d[0]["confidence"], "certain");
}

#[test]
fn detect_leaves_unrelated_clients_alone() {
    let f = servlet();
    let out = run(&["detect", s(&f.v301), s(&f.v310), s(&f.unrelated), "--json", "--fail-on-breaking"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["broken"], false);
    assert!(v["detections"].as_array().unwrap().is_empty());
}

#[test]
fn stable_scope_ignores_unstable_packages() {
    let f = servlet();
    let config = f.v301.with_file_name("stability.txt");
    std::fs::write(&config, "[keywords]\nservlet\n").unwrap();

    let flag = run(&[
        "delta",
        s(&f.v301),
        s(&f.v310),
        "--fail-on-breaking",
        "--scope",
        "stable",
        "--stability-config",
        s(&config),
    ]);
    assert_eq!(code(&flag), 0);

    // the environment variable supplies the same default
    let env = breakscope()
        .args(["delta", s(&f.v301), s(&f.v310), "--fail-on-breaking", "--scope", "stable"])
        .env("BREAKSCOPE_STABILITY_CONFIG", &config)
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);

    let everything = run(&["delta", s(&f.v301), s(&f.v310), "--fail-on-breaking", "--scope", "stable"]);
    assert_eq!(code(&everything), 1);
}

#[test]
fn classify_levels_and_rejections() {
    let out = run(&["classify", "1.2.3", "1.3.0", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    has_shape(&v, &[("schema_version", Value::is_u64), ("level", Value::is_string)]);
    assert_eq!(v["level"], "minor");

    let out = run(&["classify", "0.4.1", "0.5.0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "dev");

    assert_eq!(code(&run(&["classify", "2.0", "1.9"])), 2);
    assert_eq!(code(&run(&["classify", "1.0-SNAPSHOT", "1.1"])), 2);
}

#[test]
fn corpus_derive_and_run_on_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures::write_filter_corpus(dir.path()).unwrap();
    let derived = dir.path().join("derived");
    let out = run(&[
        "corpus",
        "derive",
        "--graph",
        s(&corpus.graph_dir),
        "--jars",
        s(&corpus.jar_dir),
        "--out",
        s(&derived),
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["upgrades"], 3);
    assert_eq!(v["candidates"].as_u64().unwrap(), v["upgrades"].as_u64().unwrap() + v["excluded"].as_u64().unwrap());
    for reason in ["date_like_version", "java_version_above_8", "non_java_language", "release_date_inversion"] {
        assert_eq!(v["excluded_by_reason"][reason], 1, "{reason}");
    }
    let mut upgrades = csv::Reader::from_path(derived.join("upgrades.csv")).unwrap();
    assert_eq!(upgrades.records().count(), 3);
    assert!(derived.join("exclusions.csv").is_file());

    let results = dir.path().join("results");
    let out = run(&[
        "corpus",
        "run",
        "--graph",
        s(&corpus.graph_dir),
        "--jars",
        s(&corpus.jar_dir),
        "--out",
        s(&results),
        "--jobs",
        "2",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    has_shape(&v, &[("schema_version", Value::is_u64), ("broken_clients", Value::is_u64)]);
    assert_eq!(v["broken_clients"], 2);
    for f in ["upgrades.csv", "exclusions.csv", "clients.csv", "detections.csv", "summary.json"] {
        assert!(results.join(f).is_file(), "{f}");
    }

    let out = run(&["analyze", s(&results), "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["schema_version"].is_u64());
    assert!(results.join("report").join("report.md").is_file());
}

#[test]
fn empty_graph_gives_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph");
    std::fs::create_dir(&graph).unwrap();
    std::fs::write(graph.join("artifacts.csv"), "group,artifact,version,release_date,packaging,jar_path\n").unwrap();
    std::fs::write(graph.join("edges.csv"), "kind,scope,from,to\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["corpus", "run", "--graph", s(&graph), "--jars", s(dir.path()), "--out", s(&out_dir), "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!((v["candidates"].as_u64(), v["upgrades"].as_u64()), (Some(0), Some(0)));
    let mut upgrades = csv::Reader::from_path(out_dir.join("upgrades.csv")).unwrap();
    assert!(upgrades.headers().unwrap().len() > 1);
    assert_eq!(upgrades.records().count(), 0);
}

#[test]
fn malformed_graph_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("artifacts.csv"), "nonsense\n").unwrap();
    std::fs::write(dir.path().join("edges.csv"), "kind,scope,from,to\n").unwrap();
    let out = run(&["corpus", "derive", "--graph", s(dir.path()), "--jars", s(dir.path()), "--out", s(dir.path())]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("artifacts"));
}

#[test]
fn analyze_of_an_empty_directory_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report").join("report.json").is_file());
}

#[test]
fn analyze_with_client_counts_reproduces_pairwise_odds_ratios() {
    let counts = [
        ("major", 29_847u64, 10_663u64, 1_250u64),
        ("minor", 111_830, 14_445, 1_130),
        ("patch", 123_286, 14_621, 735),
        ("dev", 28_854, 10_533, 1_772),
    ];
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("counts.csv");
    let mut text = String::from("level,population,sample,broken\n");
    for (l, p, s, b) in counts {
        text.push_str(&format!("{l},{p},{s},{b}\n"));
    }
    std::fs::write(&file, text).unwrap();
    let report = dir.path().join("report");
    let out = run(&["analyze", s(dir.path()), "--counts", s(&file), "--out", s(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let odds = |(_, _, s, b): (&str, u64, u64, u64)| b as f64 / (s - b) as f64;
    let mut rows = csv::Reader::from_path(report.join("fisher.csv")).unwrap();
    let header = rows.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (a, b, or) = (col("a"), col("b"), col("odds_ratio"));
    let mut seen = 0;
    for r in rows.records() {
        let r = r.unwrap();
        let find = |name: &str| *counts.iter().find(|c| c.0 == name).unwrap();
        let want = odds(find(&r[b])) / odds(find(&r[a]));
        let got: f64 = r[or].parse().unwrap();
        assert!((got - want).abs() < 1e-3, "{} vs {}: {got} vs {want}", &r[a], &r[b]);
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn bench_reports_accuracy_on_the_bundled_suite() {
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_bench_suite(dir.path()).unwrap();
    let manifest = dir.path().join("manifest.json");
    let out = run(&["bench", s(&manifest), "--json", "--jobs", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    has_shape(
        &v,
        &[
            ("schema_version", Value::is_u64),
            ("cases", Value::is_u64),
            ("precision", Value::is_f64),
            ("recall", Value::is_f64),
            ("recall_excluding_gaps", Value::is_f64),
            ("fp_by_rule", Value::is_object),
            ("outcomes", Value::is_array),
        ],
    );
    assert_eq!(v["cases"].as_u64().unwrap() as usize, fixtures::bench_fixtures().len());
    assert_eq!(v["unattributed_fp"], 0);
    assert_eq!(v["recall_excluding_gaps"], 1.0);
    let (tp, fp) = (v["tp"].as_f64().unwrap(), v["fp"].as_f64().unwrap());
    assert!((v["precision"].as_f64().unwrap() - tp / (tp + fp)).abs() < 1e-12);

    let text = run(&["bench", s(&manifest)]);
    assert_eq!(code(&text), 0);
    assert!(String::from_utf8_lossy(&text.stdout).contains("precision"));
}

#[test]
fn fixtures_command_writes_usable_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fixtures", s(dir.path())]);
    assert_eq!(code(&out), 0);
    let servlet = dir.path().join("servlet");
    let out = run(&[
        "detect",
        s(&servlet.join("servlet-api-3.0.1.jar")),
        s(&servlet.join("servlet-api-3.1.0.jar")),
        s(&servlet.join("spring-test-mock.jar")),
        "--fail-on-breaking",
    ]);
    assert_eq!(code(&out), 1);
    assert!(dir.path().join("bench").join("manifest.json").is_file());
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(code(&run(&["delta"])), 2);
    assert_eq!(code(&run(&["detect", "a.jar", "b.jar", "c.jar", "--json", "--csv"])), 2);
}
