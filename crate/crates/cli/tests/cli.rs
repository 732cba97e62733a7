use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn obring(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_obring"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn scenario(dir: &TempDir, name: &str, json: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

fn records(stdout: &str) -> Vec<Value> {
    stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn log_election_run_passes_with_formula_counts() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"log-election","n":3,"ids":[1,2,3],"d":"auto"}"#,
    );
    let (code, out, err) = obring(&["run", &f]);
    assert_eq!(code, 0, "{err}");
    let rec = &records(&out)[0];
    assert_eq!(rec["leader"], 0);
    assert_eq!(rec["cw_per_proc"], serde_json::json!([21, 21, 21]));
    assert_eq!(rec["ccw_per_proc"], serde_json::json!([3, 3, 3]));
    assert!(err.contains("passed 1/1"));
}

#[test]
fn duplicate_minimum_is_a_judgement_failure() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"const-direction","ids":[1,1,3],"U":3,"step_cap":100000}"#,
    );
    let (code, out, _) = obring(&["run", &f]);
    assert!(code == 2 || code == 3, "exit {code}");
    let rec = &records(&out)[0];
    assert_eq!(rec["judgement"]["violated"][0]["name"], "leader_ok");
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let f = scenario(&dir, "s.json", r#"{"algorithm":"randomized","c":1}"#);
    let (code, _, err) = obring(&["run", &f]);
    assert_eq!(code, 1);
    assert!(err.contains("`U`"), "{err}");

    let f = scenario(
        &dir,
        "t.json",
        "{\"algorithm\": \"log-election\",\n \"ids\": [1, 2],\n \"colour\": 1}",
    );
    let (code, _, err) = obring(&["run", &f]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");

    let (code, _, _) = obring(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(code, 1);
}

#[test]
fn explore_pair_has_one_signature() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"log-election","ids":[1,2],"d":2}"#,
    );
    let (code, out, err) = obring(&["explore", &f]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(records(&out)[0]["signatures"].as_array().unwrap().len(), 1);
}

#[test]
fn explore_guards_ring_size() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"log-election","ids":[1,2,3,4]}"#,
    );
    assert_eq!(obring(&["explore", &f]).0, 1);
}

#[test]
fn explore_unscattered_instance_reports_witnesses() {
    // enc(1) is alone in the bit-0 set at round 2 and p1 is two active hops
    // clockwise from it, so d = 1 is too small.
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"log-election","ids":[1,3,2],"d":1}"#,
    );
    let traces = dir.path().join("w");
    let (code, out, err) = obring(&["explore", &f, "--trace", traces.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    let sigs = records(&out)[0]["signatures"].as_array().unwrap().len();
    assert!(sigs > 1);
    assert!(err.contains("witness traces in"));
    for k in 0..sigs {
        let text = fs::read_to_string(traces.join(format!("witness-{k}.trace"))).unwrap();
        assert!(text.starts_with("step=0 kind=resume proc=0"));
    }
}

#[test]
fn tiny_step_cap_exits_3() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"log-election","ids":[1,2,3],"step_cap":5}"#,
    );
    assert_eq!(obring(&["run", &f]).0, 3);
    let f = scenario(
        &dir,
        "e.json",
        r#"{"algorithm":"const-direction","ids":[1,2,3],"state_cap":10}"#,
    );
    assert_eq!(obring(&["explore", &f]).0, 3);
}

#[test]
fn mc_single_trial() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"randomized","U":8,"c":1,"repeat":1}"#,
    );
    let (code, out, _) = obring(&["mc", &f, "--seed", "3"]);
    let rec = &records(&out)[0];
    assert_eq!(rec["trials"], 1);
    assert_eq!(code == 0, rec["successes"] == 1);
}

#[test]
fn output_file_and_jobs() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("out/records.jsonl");
    let json = format!(
        r#"{{"algorithm":"randomized","U":8,"c":1,"repeat":6,"output":{{"path":{:?}}}}}"#,
        out_path.to_str().unwrap()
    );
    let f = scenario(&dir, "s.json", &json);
    let (code, stdout, _) = obring(&["run", &f, "--jobs", "2", "--seed", "11"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("passed 6/6"));
    let written = fs::read_to_string(&out_path).unwrap();
    let runs: Vec<u64> = records(&written)
        .iter()
        .map(|r| r["run"].as_u64().unwrap())
        .collect();
    assert_eq!(runs, (0..6).collect::<Vec<_>>());
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn replay_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let f = scenario(
        &dir,
        "s.json",
        r#"{"algorithm":"log-election","ids":{"random-distinct":{"seed":4,"max":30}},"n":5,"repeat":4}"#,
    );
    let (t1, t2) = (dir.path().join("t1"), dir.path().join("t2"));
    let (_, a, _) = obring(&["run", &f, "--seed", "99", "--trace", t1.to_str().unwrap()]);
    let (_, b, _) = obring(&[
        "run",
        &f,
        "--seed",
        "99",
        "--trace",
        t2.to_str().unwrap(),
        "--jobs",
        "3",
    ]);
    assert_eq!(a, b);
    assert_eq!(read_dir_sorted(&t1), read_dir_sorted(&t2));

    let recs = records(&a);
    let hash = recs[2]["scenario_hash"].as_str().unwrap();
    let seed = recs[2]["seed"].to_string();
    let t3 = dir.path().join("t3");
    let (code, one, _) = obring(&[
        "run",
        &f,
        "--seed",
        &seed,
        "--run",
        "2",
        "--expect-hash",
        hash,
        "--trace",
        t3.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(one, a.lines().nth(2).unwrap().to_owned() + "\n");
    assert_eq!(
        fs::read(t3.join("run-2.trace")).unwrap(),
        fs::read(t1.join("run-2.trace")).unwrap()
    );

    let (code, _, _) = obring(&["run", &f, "--expect-hash", "00"]);
    assert_eq!(code, 1);
}
