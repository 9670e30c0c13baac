use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dc-handover"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("DC_HANDOVER_OUTPUT_DIR").output().unwrap()
}

fn write_plan(dir: &Path, body: &str) -> String {
    let p = dir.join("plan.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn sweep_delay_table() {
    let out = run(&["sweep-delay", "--tper", "200us", "--ngnb", "16", "--nue", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("analog-analog,1,0.0256,"), "{text}");
    assert!(text.contains("hybrid-analog,2,0.0128,"), "{text}");
    assert!(text.contains("digital-analog,16,0.0016,"), "{text}");

    let out = run(&["sweep-delay", "--tper", "0.2ms", "--ngnb", "16", "--nue", "8", "--table1-compat"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hybrid-analog,2,0.0168,"), "{text}");
    assert!(text.contains("analog-analog,1,0.0256,"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["sweep-delay", "--tper", "fast", "--ngnb", "16", "--nue", "8"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(&good, include_str!("../scenarios/default.json")).unwrap();
    assert_eq!(run(&["validate", good.to_str().unwrap()]).status.code(), Some(0));

    let mut scenario: serde_json::Value = serde_json::from_str(include_str!("../scenarios/default.json")).unwrap();
    scenario["gnb_positions_m"].as_array_mut().unwrap().truncate(1);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, scenario.to_string()).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("M_T"));

    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["validate", bad.to_str().unwrap()]).status.code(), Some(2));

    let plan = write_plan(dir.path(), r#"{"schemes": [], "seeds": [1], "episodes": 2}"#);
    assert_eq!(run(&["run", "--plan", &plan]).status.code(), Some(2));
}

#[test]
fn run_is_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(
        dir.path(),
        r#"{"schemes": ["fixed", "cdql"], "bf_kinds": ["digital-analog"], "seeds": [3], "episodes": 3}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["run", "--plan", &plan, "--seed", "7", "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let fa = csv_files(&a);
    assert!(fa.iter().any(|(n, _)| n == "cdql_digital-analog_seed7.csv"));
    assert_eq!(fa, csv_files(&b));

    let ck = a.join("cdql_digital-analog_seed7_checkpoint.json");
    let trace = dir.path().join("trace.csv");
    let o = run(&[
        "replay",
        "--plan",
        &plan,
        "--checkpoint",
        ck.to_str().unwrap(),
        "--bf",
        "digital-analog",
        "--seed",
        "7",
        "--episode",
        "1",
        "--output",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&trace).unwrap();
    // schema line, header, one row per 1 ms step of a 10 s episode
    assert_eq!(text.lines().count(), 2 + 10_000);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(
        dir.path(),
        r#"{"schemes": ["fixed"], "bf_kinds": ["analog-analog"], "seeds": [1], "episodes": 1, "output_dir": "unused"}"#,
    );
    let target = dir.path().join("from_env");
    let o = bin()
        .args(["run", "--plan", &plan])
        .env("DC_HANDOVER_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("fixed_analog-analog_seed1.csv").exists());
    assert!(!dir.path().join("unused").exists());
}
