#![allow(dead_code)]

use std::path::PathBuf;

use versekit::scenario::{load_scenario, parse_scenario, HybridAutomaton, RunSettings};

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load(name: &str) -> (HybridAutomaton, RunSettings) {
    let (sc, settings, _) = load_scenario(&scenarios_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    (sc.build_automaton().unwrap_or_else(|e| panic!("{name}: {e}")), settings)
}

pub fn load_edited(name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> (HybridAutomaton, RunSettings) {
    let dir = scenarios_dir();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    edit(&mut v);
    let (sc, settings, _) = parse_scenario(&v.to_string(), &dir, name).unwrap_or_else(|e| panic!("{name}: {e}"));
    (sc.build_automaton().unwrap_or_else(|e| panic!("{name}: {e}")), settings)
}

pub fn bundled() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().to_string_lossy().into_owned();
            name.ends_with(".json").then_some(name)
        })
        .collect();
    names.sort();
    names
}
