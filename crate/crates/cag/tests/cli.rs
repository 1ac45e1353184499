use std::process::{Command, Output};

use serde_json::Value;

fn cag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cag"))
        .args(args)
        .env_remove("CAG_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn record(args: &[&str]) -> Value {
    let o = cag(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(stdout(&o).trim()).unwrap()
}

#[test]
fn thresholds_example() {
    let r = record(&["thresholds", "--n", "100", "--m", "100", "--law", "deg_2_1"]);
    assert!((r["lambda"].as_f64().unwrap() - 2.605170).abs() < 1e-6);
    assert_eq!(r["kappa_used"], "kappa");
    assert_eq!(r["alpha"].as_f64(), Some(1.0));
}

#[test]
fn exact_cut_probability_example() {
    let r = record(&["exact", "--what", "qr", "--n", "4", "--r", "2", "--x", "2", "--q", "1"]);
    assert!((r["q_r"].as_f64().unwrap() - 0.333333333333).abs() < 1e-12);
}

#[test]
fn no_arguments_is_a_usage_error() {
    let o = cag(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_lists_valid_ones() {
    let o = cag(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("frobnicate"));
    let help = cag(&["--help"]);
    let help = stdout(&help);
    for sub in ["thresholds", "exact", "simulate", "sweep", "counterexample"] {
        assert!(help.contains(sub));
    }
}

#[test]
fn missing_query_argument_is_a_usage_error() {
    let o = cag(&["exact", "--what", "qr", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn runtime_errors_are_single_line_records() {
    let o = cag(&["thresholds", "--n", "1", "--m", "1", "--law", "deg_2_1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.trim().lines().count(), 1);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "domain_error");

    let o = cag(&["thresholds", "--n", "10", "--m", "1", "--law", "mix:2,1,0;3,1,0"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8(o.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "parse_error");

    let o = cag(&[
        "exact",
        "--what",
        "union-bound",
        "--n",
        "6000",
        "--m",
        "3",
        "--law",
        "deg_2_1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8(o.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "refused");
}

#[test]
fn exact_queries() {
    let r = record(&["exact", "--what", "en0", "--n", "10", "--m", "5", "--law", "deg_2_1"]);
    assert!((r["expected_n0"].as_f64().unwrap() - 3.2768).abs() < 1e-12);
    let r = record(&["exact", "--what", "varn0", "--n", "10", "--m", "5", "--law", "deg_2_1"]);
    assert!(r["var_n0"].as_f64().unwrap() > 0.0);
    let r = record(&["exact", "--what", "kappa", "--law", "deg_3_0.5"]);
    assert_eq!(r["kappa"].as_f64(), Some(2.25));
    let r = record(&[
        "exact", "--what", "lambda", "--n", "100", "--m", "100", "--law", "deg_2_1",
    ]);
    assert!((r["lambda"].as_f64().unwrap() - 2.605170185988091).abs() < 1e-12);
    let r = record(&["exact", "--what", "qbar", "--n", "10", "--r", "3", "--law", "deg_2_0.5"]);
    assert!((r["qbar_exact"].as_f64().unwrap() - 23.0 / 30.0).abs() < 1e-15);
    let r = record(&[
        "exact",
        "--what",
        "union-bound",
        "--n",
        "20",
        "--m",
        "40",
        "--law",
        "deg_2_1",
    ]);
    assert_eq!(r["terms"].as_array().unwrap().len(), 10);
    assert_eq!(r["partial"], false);
}

#[test]
fn exact_with_fixed_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixed.json");
    std::fs::write(
        &path,
        "{\"n\": 4, \"layers\": [{\"x\": 2, \"q\": 1}, {\"x\": 2, \"q\": 1}]}",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let r = record(&["exact", "--what", "en0", "--fixed", p]);
    assert!((r["p_single"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    let r = record(&["exact", "--what", "lambda", "--schedule", "fixed", "--fixed", p]);
    assert_eq!(r["kappa_used"], "kappa_truncated");
    assert_eq!(r["m"].as_u64(), Some(2));
    let o = cag(&["exact", "--what", "en0", "--schedule", "fixed", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_records_round_trip() {
    let o = cag(&[
        "exact", "--what", "qr", "--n", "10", "--r", "3", "--x", "4", "--q", "0.7", "--format", "csv",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<&str> = lines.next().unwrap().split(',').collect();
    let q_r: f64 = values[header.iter().position(|h| *h == "q_r").unwrap()]
        .parse()
        .unwrap();
    let direct = cag_core::exact::cut_prob_exact(10, 3, 4, 0.7).unwrap();
    assert_eq!(q_r.to_bits(), direct.to_bits());
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate",
        "--n",
        "30",
        "--m",
        "20",
        "--law",
        "mix:2,1,0.5;5,0.3,0.5",
        "--replicates",
        "200",
    ];
    let a = cag(&args);
    let b = cag(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(
        text.lines().next().unwrap(),
        "replicate,connected,components,isolated,largest,edges"
    );
    assert_eq!(text.lines().count(), 201);

    let mut with_seed = args.to_vec();
    with_seed.extend(["--seed", "7"]);
    let c = cag(&with_seed);
    assert_ne!(a.stdout, c.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_cag"))
        .args(args)
        .env("CAG_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, c.stdout);
    let both = Command::new(env!("CARGO_BIN_EXE_cag"))
        .args(&with_seed)
        .env("CAG_SEED", "8")
        .output()
        .unwrap();
    assert_eq!(both.stdout, c.stdout);

    let mut parallel = args.to_vec();
    parallel.extend(["--workers", "4"]);
    assert_eq!(cag(&parallel).stdout, a.stdout);
}

#[test]
fn simulate_counts_clique_edges_and_writes_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let fixed = dir.path().join("fixed.json");
    std::fs::write(&fixed, "{\"layers\": [{\"x\": 4, \"q\": 1}, {\"x\": 3, \"q\": 1}]}").unwrap();
    let edges = dir.path().join("edges.csv");
    let o = cag(&[
        "simulate",
        "--n",
        "6",
        "--fixed",
        fixed.to_str().unwrap(),
        "--replicates",
        "5",
        "--retain-edges",
        edges.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for line in stdout(&o).lines().skip(1) {
        assert_eq!(line.rsplit(',').next(), Some("9"));
    }
    let listed = std::fs::read_to_string(&edges).unwrap();
    assert_eq!(listed.lines().count(), 1 + 5 * 9);
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        "{\"n\": 200, \"law\": \"deg_3_0.5\", \"lambda_grid\": [-3, 0, 3], \"replicates\": 40, \"seed\": 11}",
    )
    .unwrap();
    let o = cag(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda_target,m,lambda_actual,frac_connected,se_connected,mean_n0,se_n0,frac_n0_zero,en0_exact,varn0_exact,union_bound_S"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][3] >= rows[1][3] && rows[1][3] >= rows[2][3]);
    for r in &rows {
        assert!((r[2] - r[0]).abs() <= 2.25 / 200.0 + 1e-12);
    }
    let again = cag(&["sweep", "--config", config.to_str().unwrap(), "--workers", "3"]);
    assert_eq!(again.stdout, o.stdout);

    let out = dir.path().join("rows.json");
    let o = cag(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn sweep_above_union_bound_cap_leaves_cell_empty() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        "{\"n\": 5001, \"law\": \"deg_3_0.5\", \"m_grid\": [10], \"replicates\": 2}",
    )
    .unwrap();
    let o = cag(&["sweep", "--config", config.to_str().unwrap()]);
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with(",10,"));
    assert!(row.ends_with(','));
}

#[test]
fn counterexample_report() {
    let o = cag(&["counterexample", "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.6321"));
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ce.csv");
    let o = cag(&["counterexample", "--k-max", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 2);
    let r = record(&["counterexample", "--y", "1,2,3", "--k-max", "3", "--format", "json"]);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!((r["reference_bound"].as_f64().unwrap() - 0.6321205588285577).abs() < 1e-15);
    let o = cag(&["counterexample", "--y", "2,1", "--k-max", "2"]);
    assert_eq!(o.status.code(), Some(1));
}
