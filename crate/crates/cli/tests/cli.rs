use std::path::Path;
use std::process::{Command, Output};

fn imea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imea"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn generate(dir: &Path, nodes: usize, edges: usize) -> String {
    let path = dir.join("g.txt");
    let out = imea(&[
        "generate",
        "--nodes",
        &nodes.to_string(),
        "--edges",
        &edges.to_string(),
        "--output",
        path.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), 100, 2);
    let text = std::fs::read_to_string(path).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 98 * 2);
}

#[test]
fn spread_csv_has_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), 200, 2);
    let out = imea(&[
        "spread", "--graph", &g, "--seeds", "0,1,2", "--method", "mc,mc-max-hop,two-hop", "--simulations", "500",
        "--max-hop", "inf",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,mean,std,runtime_ms");
    assert_eq!(lines.len(), 4);
    // With an infinite hop limit mc-max-hop is plain MC on the same stream.
    let mean = |l: &str| l.split(',').nth(1).unwrap().to_string();
    assert_eq!(mean(lines[1]), mean(lines[2]));
}

#[test]
fn optimize_writes_log_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), 150, 2);
    let out_dir = dir.path().join("run");
    let bandit = out_dir.join("bandit.csv");
    let out = imea(&[
        "optimize",
        "--graph",
        &g,
        "--k",
        "3",
        "--population",
        "12",
        "--generations",
        "6",
        "--mutation",
        "bandit",
        "--fitness",
        "two-hop",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--bandit-log",
        bandit.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = std::fs::read_to_string(out_dir.join("generations.csv")).unwrap();
    assert!(log.starts_with("generation,best,mean,std,elapsed_ms\n"));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["best_seed_set"].as_array().unwrap().len(), 3);
    let executed = result["generations_executed"].as_u64().unwrap() as usize;
    assert_eq!(log.lines().count(), executed + 2);
    assert!(std::fs::read_to_string(bandit).unwrap().starts_with("generation,arm,count,window_sum"));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), 120, 2);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# optimizer settings\ngraph = {g}\nk = 2\npopulation = 8\ngenerations = 50\nfitness = two-hop\n"
        ),
    )
    .unwrap();
    let result = dir.path().join("r.json");
    let out = imea(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--generations",
        "3",
        "--patience",
        "3",
        "--result",
        result.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(result).unwrap()).unwrap();
    assert_eq!(doc["config"]["k"], 2);
    assert_eq!(doc["config"]["population_size"], 8);
    assert_eq!(doc["config"]["max_generations"], 3);
}

#[test]
fn filter_report_feeds_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), 150, 3);
    let report = dir.path().join("f.json");
    let out = imea(&[
        "filter", "--graph", &g, "--filter", "min-degree", "--min-degree", "4", "--output",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = dir.path().join("r.json");
    let out = imea(&[
        "optimize",
        "--graph",
        &g,
        "--candidates",
        report.to_str().unwrap(),
        "--k",
        "2",
        "--population",
        "6",
        "--generations",
        "2",
        "--fitness",
        "two-hop",
        "--result",
        result.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(result).unwrap()).unwrap();
    let kept: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let retained = kept["retained"].as_array().unwrap().len() as u64;
    assert_eq!(doc["candidate_count"].as_u64().unwrap(), retained);
}

#[test]
fn correlate_and_compare_emit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = imea(&[
        "correlate", "--ba-nodes", "150", "--ba-edges", "2", "--seed-sets", "10", "--simulations", "200",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("correlation.csv")).unwrap();
    assert!(csv.starts_with("run_id,method,dataset,model,k,metric,value,runtime_ms\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 10);

    let out = imea(&[
        "compare", "--ba-nodes", "120", "--ba-edges", "2", "--k", "2", "--population", "6", "--generations",
        "2", "--fitness", "two-hop", "--variants", "basic,bandit", "--repetitions", "2", "--final-simulations",
        "100", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    assert!(doc["version"].as_str().unwrap().starts_with('v'));
    assert!(!doc["aggregates"].as_array().unwrap().is_empty());
}

#[test]
fn centrality_csv_uses_labels() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("star.txt");
    std::fs::write(&g, "10 20\n10 30\n10 40\n").unwrap();
    let out = imea(&["centrality", "--graph", g.to_str().unwrap(), "--metric", "degree"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("node,score"));
    assert!(text.lines().any(|l| l == "10,3"));
}

#[test]
fn exit_codes() {
    assert_eq!(imea(&["optimize", "--bogus"]).status.code(), Some(1));
    assert_eq!(imea(&["spread", "--graph", "x", "--seeds", "1", "--max-hop", "0"]).status.code(), Some(1));
    assert_eq!(
        imea(&["spread", "--graph", "/no/such/file", "--seeds", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(imea(&["--help"]).status.code(), Some(0));
}
