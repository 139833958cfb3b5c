use std::path::PathBuf;
use std::process::{Command, Output};

use hidden_shift::instance_file::InstanceFile;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hidden-shift")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hidden-shift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let a = run(&["gen", "--n", "2", "--t", "2", "--seed", "1"]);
    let b = run(&["gen", "--n", "2", "--t", "2", "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let file = InstanceFile::parse(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!((file.n, file.t, file.l, file.seed, file.s.clone()), (2, 2, 4, 1, None));
    assert_eq!(file.to_text().as_bytes(), a.stdout.as_slice());

    let path = scratch("gen.json");
    let c = run(&["gen", "--n", "2", "--t", "2", "--seed", "1", "--with-secret", "--out", path.to_str().unwrap()]);
    assert!(c.status.success());
    let stored = InstanceFile::read(&path).unwrap();
    let inst = stored.instantiate().unwrap();
    assert_eq!(stored.s.as_deref(), Some(inst.secret().coords()));
    assert_eq!(InstanceFile::from_instance(&inst, true), stored);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["gen", "--n", "3", "--t", "2", "--l", "5"]).status.code(), Some(64));
    assert_eq!(run(&["gen", "--t", "2"]).status.code(), Some(64));
    assert_eq!(run(&["--bogus"]).status.code(), Some(64));
    assert_eq!(run(&["solve", "--n", "2", "--t", "2", "--epsilon", "1.5"]).status.code(), Some(64));
    assert_eq!(run(&["solve", "--n", "2", "--t", "2", "--mode", "quantum"]).status.code(), Some(64));
    assert_eq!(run(&["validate", "--only", "nope"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn solve_self_check() {
    let path = scratch("secret.json");
    assert!(run(&["gen", "--n", "3", "--t", "2", "--seed", "4", "--with-secret", "--out", path.to_str().unwrap()]).status.success());
    let out = run(&["solve", "--instance", path.to_str().unwrap(), "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["seed"], 9);
    assert_eq!(v["config"]["instance_seed"], 4);
    let r = &v["result"];
    assert_eq!(r["verified"], true);
    assert_eq!(r["secret_check"], "match");
    let stored = InstanceFile::read(&path).unwrap().s.unwrap();
    let found: Vec<u64> = serde_json::from_value(r["s"].clone()).unwrap();
    assert_eq!(found, stored);
    assert!(r["peak_live_tokens"].as_u64().unwrap() <= 3 * 2 + 2);
    assert_eq!(r["space_bound"], 8);

    let again = run(&["solve", "--instance", path.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn tampered_secret_is_rejected() {
    let path = scratch("tampered.json");
    let inst = hidden_shift::HiddenShiftInstance::new(2, 2, 4, 3).unwrap();
    let mut file = InstanceFile::from_instance(&inst, true);
    file.s.as_mut().unwrap()[0] ^= 1;
    file.write(&path).unwrap();
    assert_eq!(run(&["solve", "--instance", path.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn coset_mode_dispatch() {
    let a = run(&["solve", "--n", "2", "--t", "3", "--seed", "5", "--mode", "coset"]);
    let b = run(&["solve-coset", "--n", "2", "--t", "3", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["config"]["mode"], "coset");
    let standard = json(&run(&["solve", "--n", "2", "--t", "3", "--seed", "5"]));
    assert_eq!(standard["config"]["mode"], "standard");
    assert_eq!(standard["result"]["s"], json(&a)["result"]["s"]);
}

#[test]
fn failed_solve_exits_1() {
    // One attempt at (2,3) fails often enough to find a seed quickly.
    let failed = (0..200u32)
        .map(|s| run(&["solve", "--n", "2", "--t", "3", "--seed", &s.to_string(), "--epsilon", "0.9"]))
        .find(|o| !o.status.success())
        .expect("some single attempt fails");
    assert_eq!(failed.status.code(), Some(1));
    let v = json(&failed);
    assert_eq!(v["result"]["verified"], false);
    assert!(v["result"]["s"].is_null());
    assert_eq!(v["result"]["report"]["outcome"], "rank_deficient");
}

#[test]
fn validate_only_runs_one_group() {
    let out = run(&["validate", "--only", "theorem2", "--seed", "3", "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let checks = v["result"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    for c in checks {
        assert_eq!(c["group"], "theorem2");
        assert!(c["seed"].is_u64());
        assert_eq!(c["threshold"], 0.005);
    }
    assert_eq!(v["config"]["only"], "theorem2");
    let single = json(&run(&["validate", "--only", "theorem2/p5_n1_t2", "--seed", "3"]));
    assert_eq!(single["result"]["checks"][0]["statistic"], checks[1]["statistic"]);
    assert_eq!(single["result"]["checks"][0]["seed"], checks[1]["seed"]);
}

#[test]
fn validate_output_is_reproducible() {
    let args = ["validate", "--only", "signs", "--seed", "8", "--trials", "2000"];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn bench_shape() {
    let args = ["bench", "--n-max", "3", "--t-max", "3", "--trials", "4", "--seed", "2"];
    let out = run(&args);
    assert!(out.status.success());
    assert_eq!(out.stdout, run(&args).stdout);
    let rows = json(&out)["result"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r["base_per_final"].as_f64().unwrap(), r["expected_base_per_final"].as_f64().unwrap());
        assert!(r["peak_live_tokens"].as_u64().unwrap() <= r["space_bound"].as_u64().unwrap());
    }
    let at = |n: u64, t: u64| rows.iter().find(|r| r["n"] == n && r["t"] == t).unwrap();
    assert!(at(2, 3)["base_per_final"].as_f64().unwrap() <= 9.0);
    for n in 1..=3 {
        let q: Vec<f64> = (1..=3).map(|t| at(n, t)["mean_queries"].as_f64().unwrap()).collect();
        assert!(q[0] < q[1] && q[1] < q[2], "n={n}: {q:?}");
    }
    let table = run(&["bench", "--n-max", "2", "--t-max", "2", "--trials", "2", "--table"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert_eq!(text.lines().count(), 2 + 4);
}
