use std::path::PathBuf;
use std::process::Command;

use qdcert::{emit, load_scenario, run, Format, RunOptions, CSV_HEADER};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn qdcert(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qdcert")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn exact_scenario_exits_zero_with_full_schema() {
    let path = scenario("z6.scn");
    let (code, stdout, _) = qdcert(&["--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["version", "input_hash", "certificates", "sweep", "errors"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let cert = &v["certificates"][0];
    for key in [
        "id", "epsilon", "eps_conv", "eps_dist", "vu_gap", "eps_total", "tol_grid", "gram_deviation", "defect_mult",
        "defect_equiv", "defect_norm", "bound_mult", "bound_equiv", "bound_norm", "bound_vu", "unital_defect",
        "adjoint_defect", "positivity_min", "normalization", "equiv_sampled", "pass", "provenance", "action",
    ] {
        assert!(cert.get(key).is_some(), "{key}");
    }
    assert_eq!(cert["pass"], true);
    for key in ["defect_mult", "defect_equiv", "defect_norm"] {
        assert!(cert[key].as_f64().unwrap() < 1e-10);
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(v["input_hash"], qdcert::input_hash(&text));
}

#[test]
fn unachievable_scenario_reports_code_and_exits_two() {
    let path = scenario("unachievable.scn");
    let (code, stdout, stderr) = qdcert(&["--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["errors"][0]["code"], "unachievable");
    assert!(stderr.contains("unachievable"));
}

#[test]
fn torus_sweep_rows_decrease() {
    let path = scenario("torus_sweep.scn");
    let (code, stdout, _) = qdcert(&["--scenario", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 1, "torus equivariance is sampled and fails its bound");
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["4", "8", "16", "32"]);
    assert_eq!(rows.iter().map(|r| r[1]).collect::<Vec<_>>(), ["16", "32", "64", "128"]);
    let mult: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(mult.windows(2).all(|w| w[1] <= w[0]), "{mult:?}");
    assert!(rows.iter().all(|r| r[9] == "0"));
}

#[test]
fn out_flag_and_max_dim_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let path = scenario("perturbed.scn");
    let (code, stdout, _) =
        qdcert(&["--scenario", path.to_str().unwrap(), "--format", "json", "--out", out.to_str().unwrap(), "--max-dim", "16"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["errors"][0]["code"], "unachievable");
}

#[test]
fn unreadable_scenarios_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = qdcert(&["--scenario", dir.path().join("missing.scn").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!stderr.is_empty());

    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "[scenario]\nid = x\ngroup = torus\nepsilon = 0.5\n[kernel]\nkernel = gauss(3)\n").unwrap();
    let (code, _, stderr) = qdcert(&["--scenario", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 6"), "{stderr}");
}

#[test]
fn human_format_summarizes() {
    let path = scenario("s3_table.scn");
    let (code, stdout, _) = qdcert(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("id"));
    assert!(stdout.contains("s3-table"));
    assert!(stdout.trim_end().ends_with("1/1 certificates pass, 0 error(s): PASS"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["rotation_irrational.scn", "triangle.scn", "perturbed.scn", "built.scn"] {
        let (s, text) = load_scenario(&scenario(name)).unwrap();
        let (a, b) = (run(&s, &text, &RunOptions::default()), run(&s, &text, &RunOptions::default()));
        for format in [Format::Json, Format::Csv, Format::Human] {
            assert_eq!(emit(&a, format), emit(&b, format), "{name}");
        }
    }
}

const SMALL_SWEEP: &str = "
[scenario]
id = small-sweep
group = torus
epsilon = 0.5
sweep = 2, 3, 4
[kernel]
kernel = fejer(2)
[grid]
grid = uniform(8)
[functions]
z = exp(1)
";

#[test]
fn timing_only_touches_wall_time() {
    let s = qdcert::parse_scenario(SMALL_SWEEP).unwrap();
    let mut timed = run(&s, SMALL_SWEEP, &RunOptions { timing: true, ..Default::default() });
    let plain = run(&s, SMALL_SWEEP, &RunOptions::default());
    assert_eq!(plain.sweep.len(), 3);
    for row in &mut timed.sweep {
        row.wall_ms = 0;
    }
    assert_eq!(timed, plain);
}

#[test]
fn action_scenarios_run_from_files() {
    for name in ["rotation_fifth.scn", "triangle.scn"] {
        let (s, text) = load_scenario(&scenario(name)).unwrap();
        let report = run(&s, &text, &RunOptions::default());
        assert!(report.errors.is_empty(), "{name}: {:?}", report.errors);
        let cert = &report.certificates[0];
        assert!(cert.pass && cert.defect_mult < 1e-10 && cert.defect_equiv < 1e-10, "{name}");
        assert!(cert.action.is_some());
    }
}
