use std::process::{Command, Output};

use ddrec::families::{default_families, family};
use serde_json::Value;

fn ddrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddrec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_out(args: &[&str]) -> Value {
    let o = ddrec(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("error object on stderr")
}

#[test]
fn stirling_triangle_csv() {
    let o = ddrec(&["triangle", "--family", "stirling2", "--max-n", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,c0,c1,c2,c3,c4");
    assert_eq!(lines[1], "0,1");
    assert_eq!(*lines.last().unwrap(), "4,0,1,7,6,1");
}

#[test]
fn triangle_json_round_trip() {
    let fam = family("whitney", &[("m", 3), ("c", 2)]).unwrap();
    let v = json_out(&["triangle", "--family", "whitney(m=3, c=2)", "--max-n", "30", "--format", "json"]);
    let rows = fam.spec.triangle(30).unwrap();
    let parsed = v["rows"].as_array().unwrap();
    assert_eq!(parsed.len(), rows.len());
    for (row, js) in rows.iter().zip(parsed) {
        assert_eq!(js["n"].as_u64().unwrap() as usize, row.n);
        let coeffs: Vec<ddrec::Rational> = js["coeffs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().parse().unwrap())
            .collect();
        assert_eq!(coeffs, row.coeffs);
    }
}

#[test]
fn pmf_json_probs() {
    let v = json_out(&["pmf", "--family", "stirling2", "--n", "3", "--format", "json"]);
    let table = &v["tables"][0];
    assert_eq!(table["probs"], serde_json::json!({"1": "1/5", "2": "3/5", "3": "1/5"}));
    assert_eq!(table["mean"], "2");
    assert_eq!(table["variance"], "2/5");
}

#[test]
fn moments_match_pmf() {
    let v = json_out(&["moments", "--inline", "gamma: x + 1; m: 2;", "--ns", "3,10", "--format", "json"]);
    let dowling = family("dowling", &[("m", 2)]).unwrap();
    let polys = dowling.spec.generate(10).unwrap();
    for (i, n) in [3usize, 10].into_iter().enumerate() {
        let t = ddrec::distribution::pmf(&polys[n], n).unwrap();
        assert_eq!(v["moments"][i]["mean"], t.mean.to_string());
        assert_eq!(v["moments"][i]["variance"], t.variance.to_string());
    }
}

#[test]
fn clt_reports_decrease() {
    let v = json_out(&["clt", "--family", "stirling2", "--ns", "50,400", "--format", "json"]);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let ks: Vec<f64> = reports.iter().map(|r| r["ks_continuity"].as_f64().unwrap()).collect();
    assert!(ks[1] < ks[0], "{ks:?}");
}

#[test]
fn empty_n_list_has_header_only() {
    let o = ddrec(&["clt", "--family", "stirling2", "--ns", ""]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).starts_with("n,ks_plain,ks_continuity"));
    let v = json_out(&["pmf", "--family", "stirling2", "--ns", "", "--format", "json"]);
    assert_eq!(v["tables"], serde_json::json!([]));
}

#[test]
fn verify_dowling() {
    let o = ddrec(&["verify", "--family", "dowling(m=2)", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], true);
    let statuses: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["status"].as_str().unwrap()).collect();
    assert_eq!(statuses, ["pass", "pass", "pass"]);
}

#[test]
fn verify_every_default_family() {
    for fam in default_families() {
        let o = ddrec(&["verify", "--family", &fam.invocation()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", fam.invocation(), stdout(&o));
    }
}

#[test]
fn verify_detects_negative_entries() {
    // gamma = x - 2 puts -2 into P_1.
    let o = ddrec(&["verify", "--inline", "gamma: x - 2; m: 1;", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["checks"][2]["status"], "fail");
    assert_eq!(stderr_json(&o)["error"]["kind"], "verification");
}

#[test]
fn asymptotics_columns() {
    let v = json_out(&["asymptotics", "--family", "stirling2", "--ns", "100", "--format", "json"]);
    let c = &v["comparisons"][0];
    assert!((c["predicted_mean"].as_f64().unwrap() - 28.54).abs() < 0.01);
    assert!(c["mean_rel_error"].as_f64().unwrap() < 0.05);
    assert!(c["saddle_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn usage_errors() {
    let none = ddrec(&["triangle", "--max-n", "3"]);
    assert_eq!(none.status.code(), Some(2));
    assert_eq!(stderr_json(&none)["error"]["kind"], "usage");

    let two = ddrec(&["triangle", "--family", "stirling2", "--inline", "gamma: x; m: 1;", "--max-n", "3"]);
    assert_eq!(two.status.code(), Some(2));

    let bad = ddrec(&["triangle", "--inline", "gamma: x;\nm: 0;", "--max-n", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    let err = stderr_json(&bad);
    assert_eq!(err["error"]["position"]["line"], 2);
    assert_eq!(err["error"]["position"]["column"], 4);
    assert!(err["error"]["message"].as_str().unwrap().contains("m > 0"));

    let fam = ddrec(&["triangle", "--family", "dowlin(m=2)", "--max-n", "3"]);
    assert_eq!(fam.status.code(), Some(2));
    assert_eq!(stderr_json(&fam)["error"]["position"]["column"], 1);
}

#[test]
fn numeric_failure() {
    // d = 0: the saddle hypothesis fails.
    let o = ddrec(&["asymptotics", "--inline", "gamma: 2; m: 1;", "--n", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"]["kind"], "numeric");
}

#[test]
fn spec_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("assoc.rec");
    std::fs::write(&spec, "# s = 2\ngamma: 0;\nm: 1;\nlag: {s: 2, coeff: x, binom: true};\n").unwrap();
    let out = dir.path().join("tri.csv");
    let o = ddrec(&[
        "triangle",
        "--spec",
        spec.to_str().unwrap(),
        "--max-n",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().last().unwrap(), "6,0,1,25,15");
}

#[test]
fn deterministic_output() {
    let args = ["asymptotics", "--family", "sheffer(d=2, a=1)", "--ns", "20,60", "--format", "json"];
    assert_eq!(ddrec(&args).stdout, ddrec(&args).stdout);
    let fams = ["families", "--format", "json"];
    let a = ddrec(&fams).stdout;
    assert_eq!(a, ddrec(&fams).stdout);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["families"].as_array().unwrap().len(), ddrec::families::FAMILIES.len());
}
