use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> String {
    scenarios().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn run_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_versekit"));
    cmd.args(args).env_remove("VERSEKIT_SEED");
    if let Some(s) = seed {
        cmd.env("VERSEKIT_SEED", s);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Copy a bundled config into `dir` with paths made absolute, after `edit`.
fn edited(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(scenarios().join(name)).unwrap()).unwrap();
    for a in v["agents"].as_array_mut().unwrap() {
        a["logic"] = Value::String(scenario(a["logic"].as_str().unwrap()));
    }
    if v["map"].as_str().unwrap().ends_with(".json") {
        v["map"] = Value::String(scenario(v["map"].as_str().unwrap()));
    }
    edit(&mut v);
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn out(tmp: &tempfile::TempDir, name: &str) -> (PathBuf, String) {
    let p = tmp.path().join(name);
    let s = p.to_string_lossy().into_owned();
    (p, s)
}

#[test]
fn simulate_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, d) = out(&tmp, "sim");
    let o = run(&["simulate", &scenario("toy.json"), "-o", &d]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tree: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("tree.json")).unwrap()).unwrap();
    let field = tree["fields"][0][0].as_str().unwrap().to_string();
    assert!(dir.join(format!("plot_t_{field}.svg")).exists());
    let csv = std::fs::read_to_string(dir.join("reachtube.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), format!("node_id,agent,t_lo,t_hi,{field}_lo,{field}_hi"));
    let r = report(&dir);
    assert_eq!(r["command"], "simulate");
    assert_eq!(r["seed"], 0);
    assert_eq!(r["safe"], true);
}

#[test]
fn violations_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, d) = out(&tmp, "v");
    let o = run(&["verify", &scenario("drone3_m5.json"), "-o", &d]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let r = report(&dir);
    assert_eq!(r["safe"], false);
    assert!(!r["violations"].as_array().unwrap().is_empty());
}

#[test]
fn safe_verification_exits_with_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, d) = out(&tmp, "v");
    let o = run(&["verify", &scenario("car3_m1.json"), "-o", &d]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&dir)["safe"], true);
}

#[test]
fn node_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, d) = out(&tmp, "v");
    let o = run(&["verify", &scenario("car3_m1.json"), "-o", &d, "--engine", "mixed-monotone"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("E_ENGINE: node 0"), "{}", stderr(&o));
    assert_eq!(report(&dir)["errors"].as_array().unwrap().len(), 1);
}

#[test]
fn partial_tree_warns_and_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = edited(tmp.path(), "car3_m1.json", |v| v["max_nodes"] = 3.into());
    let (dir, d) = out(&tmp, "v");
    let o = run(&["verify", &cfg, "-o", &d]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("W_INCOMPLETE"));
    assert_eq!(report(&dir)["complete"], false);
}

fn error_code(args: &[&str]) -> String {
    let o = run(args);
    assert_eq!(code(&o), 1, "{args:?}");
    let err = stderr(&o);
    let first = err.lines().next().unwrap_or_default().to_string();
    first.split(':').next().unwrap().to_string()
}

#[test]
fn errors_carry_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("o").to_string_lossy().into_owned();
    let bad_json = tmp.path().join("bad.json");
    std::fs::write(&bad_json, "{").unwrap();
    let bad_json = bad_json.to_string_lossy().into_owned();
    let neg = scenario("negative/unknown_field.vdl");
    let cases: Vec<(&str, String)> = vec![
        ("E_IO", tmp.path().join("absent.json").to_string_lossy().into_owned()),
        ("E_CONFIG", bad_json),
        ("E_CONFIG", edited(tmp.path(), "toy.json", |v| v["delta"] = 0.33.into())),
        ("E_DSL", edited(tmp.path(), "drone2_m5.json", |v| v["agents"][0]["logic"] = neg.clone().into())),
        ("E_AGENT", edited(tmp.path(), "car3_m3.json", |v| v["agents"][0]["type"] = "boat".into())),
        ("E_MAP", edited(tmp.path(), "car3_noisy_m1.json", |v| v["map"] = "M42".into())),
        ("E_VALIDATE", edited(tmp.path(), "car8_m2.json", |v| v["agents"][1]["id"] = "car1".into())),
    ];
    for (want, cfg) in cases {
        assert_eq!(error_code(&["verify", &cfg, "-o", &d]), want, "{cfg}");
    }
    assert_eq!(error_code(&["verify"]), "E_USAGE");
    assert_eq!(error_code(&["verify", &scenario("toy.json"), "--bogus"]), "E_USAGE");
    assert_eq!(error_code(&["plot", &bad_json_path(&tmp), "--dims", "x,y"]), "E_IO");
}

fn bad_json_path(tmp: &tempfile::TempDir) -> String {
    tmp.path().join("no-tree.json").to_string_lossy().into_owned()
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["verify", "--help"])), 0);
}

#[test]
fn seed_must_be_an_integer() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, d) = out(&tmp, "s");
    let o = run_env(&["simulate", &scenario("toy.json"), "-o", &d], Some("abc"));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("E_USAGE: VERSEKIT_SEED"), "{}", stderr(&o));
}

#[test]
fn seed_selects_the_simulated_state() {
    let tmp = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for (i, seed) in ["1", "1", "2"].iter().enumerate() {
        let (dir, d) = out(&tmp, &format!("s{i}"));
        assert_eq!(code(&run_env(&["simulate", &scenario("car3_m1.json"), "-o", &d], Some(seed))), 0);
        trees.push(std::fs::read_to_string(dir.join("tree.json")).unwrap());
    }
    assert_eq!(trees[0], trees[1]);
    assert_ne!(trees[0], trees[2]);
}

#[test]
fn plot_projects_a_saved_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, d) = out(&tmp, "v");
    run(&["verify", &scenario("fig8_verify.json"), "-o", &d]);
    let tree = dir.join("tree.json").to_string_lossy().into_owned();
    let svg = tmp.path().join("p.svg").to_string_lossy().into_owned();
    let o = run(&["plot", &tree, "--dims", "t,pz", "-o", &svg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("<rect"));
    assert_eq!(error_code(&["plot", &tree, "--dims", "t,altitude"]), "E_USAGE");
    assert_eq!(error_code(&["plot", &tree, "--dims", "px"]), "E_USAGE");
}

#[test]
fn incremental_runs_reuse_the_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache.json").to_string_lossy().into_owned();
    let (a, da) = out(&tmp, "a");
    let (b, db) = out(&tmp, "b");
    assert_eq!(code(&run(&["verify", &scenario("car3_m1.json"), "-o", &da, "--cache-path", &cache])), 0);
    assert_eq!(report(&a)["cache"]["mode"], "record");
    assert_eq!(code(&run(&["verify", &scenario("car3_m1.json"), "-o", &db, "--incremental", "--cache-path", &cache])), 0);
    let r = report(&b);
    assert_eq!(r["cache"]["guard_hit_rate"], 1.0);
    assert_eq!(r["cache"]["flow_hit_rate"], 1.0);
    assert_eq!(std::fs::read(a.join("tree.json")).unwrap(), std::fs::read(b.join("tree.json")).unwrap());

    let o = run(&["verify", &scenario("car3_m1.json"), "-o", &db, "--incremental", "--cache-path", &cache, "--cache-clear"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&b)["cache"]["stats"]["guard_hits"], 0);

    // Different bloat: the cache is discarded with a warning and the run
    // matches one that starts from no cache at all.
    let cfg = edited(tmp.path(), "car3_m1.json", |v| v["bloat"] = 0.3.into());
    let o = run(&["verify", &cfg, "-o", &db, "--incremental", "--cache-path", &cache]);
    assert!(stderr(&o).contains("W_CACHE"), "{}", stderr(&o));
    let (c, dc) = out(&tmp, "c");
    let empty = tmp.path().join("empty.json").to_string_lossy().into_owned();
    assert_eq!(code(&run(&["verify", &cfg, "-o", &dc, "--incremental", "--cache-path", &empty])), 0);
    assert_eq!(report(&b)["cache"]["stats"], report(&c)["cache"]["stats"]);
    assert_eq!(std::fs::read(b.join("tree.json")).unwrap(), std::fs::read(c.join("tree.json")).unwrap());

    std::fs::write(&cache, "garbage").unwrap();
    assert_eq!(error_code(&["verify", &scenario("car3_m1.json"), "-o", &db, "--incremental", "--cache-path", &cache]), "E_CACHE");
}

#[test]
fn incremental_defaults_to_a_cache_in_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, d) = out(&tmp, "v");
    assert_eq!(code(&run(&["verify", &scenario("toy.json"), "-o", &d, "--incremental"])), 0);
    assert!(dir.join("cache.json").exists());
}
