use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-riesz"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sphere_lower_r1_bound_touches_at_levels() {
    let o = run(&["verify", "sphere:2", "s2.r1.lower", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let slack = v["sides"][0]["min_slack"].as_f64().unwrap();
    assert!(slack.abs() < 1e-9, "min slack {slack}");
    let eq = v["equality_checks"].as_array().unwrap();
    let at_two = eq
        .iter()
        .find(|e| e["x"].as_f64() == Some(2.0))
        .expect("z = 2 is an equality point");
    assert_eq!(at_two["ok"], true);
    assert!(at_two["slack"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn polya_counterexample_on_three_dim_hemisphere() {
    let o = run(&["verify", "hemisphere-d:3", "fail.hemi.polya.d≥3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let w = &v["sides"][0]["first_violation"];
    assert_eq!(w["x"].as_f64(), Some(3.0));
    assert!(w["target"].as_f64().unwrap() > w["bound"].as_f64().unwrap());
    // the ASCII spelling resolves to the same entry
    assert_eq!(run(&["verify", "hemisphere-d:3", "fail.hemi.polya.d>=3"]).status.code(), Some(0));
}

#[test]
fn trace_series_on_two_sphere() {
    let o = run(&["sumrule", "sphere:2", "trace", "--lmax", "1000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["partial_sum"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert_eq!(v["within_tail"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verify", "bogus:2", "s2.r1.lower"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "sphere:2", "no.such.bound"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--space", "sphere:0", "--z", "1"]).status.code(), Some(2));
    assert_eq!(run(&["figure", "f99"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // an expected-valid bound that is violated is a failed check, not a usage error
    let o = run(&["verify", "circle:1", "sd.r2.twosided"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn bad_thread_setting_is_a_config_error() {
    let o = bin()
        .env("SPECTRAL_RIESZ_THREADS", "zero")
        .args(["levels", "sphere:2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .env("SPECTRAL_RIESZ_THREADS", "2")
        .args(["sumrule", "cp:4", "pq", "--lmax", "20"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_matches_closed_forms_exactly() {
    let o = run(&["eval", "sphere:2", "--z", "1,7/2,12", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[2], &rec[3], "exact and closed differ at z = {}", &rec[0]);
    }
    let o = run(&["eval", "hemisphere-d:4", "--quantity", "n", "--z", "20,21,45", "--format", "csv"]);
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[2], &rec[3]);
    }
}

#[test]
fn levels_table() {
    let o = run(&["levels", "--space", "sphere:2", "--lmax", "3", "--format", "csv"]);
    assert_eq!(stdout(&o), "l,lambda,multiplicity,count\n0,0,1,1\n1,2,3,4\n2,6,5,9\n3,12,7,16\n");
}

#[test]
fn json_round_trips_byte_for_byte() {
    for args in [
        &["verify", "rp:3", "sd.r2.twosided", "--format", "json"][..],
        &["sumrule", "hp:8", "pq", "--lmax", "10", "--format", "json"][..],
        &["figure", "f5", "--resolution", "3", "--format", "json"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
        assert_eq!(again, stdout(&o), "{args:?}");
    }
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f4.csv");
    let o = run(&["figure", "f4", "--resolution", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("z,series_label,value\n"));
    assert!(text.lines().count() > 100);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn svg_output() {
    let o = run(&["figure", "f9", "--resolution", "4", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
}
