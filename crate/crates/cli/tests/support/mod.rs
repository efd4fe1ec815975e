#![allow(dead_code)]

pub mod oracle;

use std::collections::HashMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use versekit::agent::ModePair;
use versekit::reach::{simulate, Tree};
use versekit::scenario::{load_scenario, parse_scenario, HybridAutomaton, RunSettings};

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn seed() -> u64 {
    std::env::var("VERSEKIT_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn load(name: &str) -> (HybridAutomaton, RunSettings) {
    let (sc, settings, _) = load_scenario(&scenarios_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    (sc.build_automaton().unwrap_or_else(|e| panic!("{name}: {e}")), settings)
}

/// Load a scenario after editing its JSON.
pub fn load_edited(name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> (HybridAutomaton, RunSettings) {
    let dir = scenarios_dir();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    edit(&mut v);
    let (sc, settings, _) = parse_scenario(&v.to_string(), &dir, name).unwrap_or_else(|e| panic!("{name}: {e}"));
    (sc.build_automaton().unwrap_or_else(|e| panic!("{name}: {e}")), settings)
}

pub fn sample_initial(aut: &HybridAutomaton, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    aut.initial
        .iter()
        .map(|r| {
            r.dims()
                .iter()
                .map(|iv| if iv.is_point() { iv.lo } else { rng.random_range(iv.lo..=iv.hi) })
                .collect()
        })
        .collect()
}

/// Largest per-axis distance of `p` outside the box; zero inside.
fn outside(lo: &[f64], hi: &[f64], p: &[f64]) -> f64 {
    p.iter()
        .zip(lo.iter().zip(hi))
        .map(|(x, (l, h))| (l - x).max(x - h).max(0.0))
        .fold(0.0, f64::max)
}

/// Does every state of simulation node `s` lie in some reachtube entry of
/// verification node `v` that covers its time?
fn node_contains(sim: &Tree, s: usize, ver: &Tree, v: usize, tol: f64) -> Result<(), f64> {
    let (sn, vn) = (&sim.nodes[s], &ver.nodes[v]);
    let mut worst = 0.0f64;
    for (a, tube) in sn.tubes.iter().enumerate() {
        for e in tube {
            let t = e.0;
            let best = vn.tubes[a]
                .iter()
                .filter(|r| r.0 - 1e-9 <= t && t <= r.1 + 1e-9)
                .map(|r| outside(&r.2, &r.3, &e.2))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
    }
    if worst <= tol {
        Ok(())
    } else {
        Err(worst)
    }
}

pub struct McReport {
    pub sims: usize,
    pub sim_nodes: usize,
}

/// Simulate `n` initial states drawn uniformly from the initial sets and
/// check that every simulation node is covered by a verification node with
/// the same depth and modes.
pub fn mc_soundness(aut: &HybridAutomaton, settings: &RunSettings, ver: &Tree, n: usize, salt: u64, tol: f64) -> Result<McReport, String> {
    let mut index: HashMap<(usize, Vec<ModePair>), Vec<usize>> = HashMap::new();
    for node in &ver.nodes {
        if node.error.is_none() {
            index.entry((node.depth, node.modes.clone())).or_default().push(node.id);
        }
    }
    let mut rng = rng(salt);
    let mut sim_nodes = 0;
    for k in 0..n {
        let init = sample_initial(aut, &mut rng);
        let sim = simulate(aut, settings, &init).map_err(|e| e.to_string())?;
        if !sim.complete {
            return Err(format!("simulation {k} exceeded the node budget"));
        }
        for s in &sim.nodes {
            if let Some(e) = &s.error {
                return Err(format!("simulation {k} node {}: {e}", s.id));
            }
            sim_nodes += 1;
            let cands = index.get(&(s.depth, s.modes.clone())).cloned().unwrap_or_default();
            let mut best = f64::INFINITY;
            for v in &cands {
                match node_contains(&sim, s.id, ver, *v, tol) {
                    Ok(()) => {
                        best = 0.0;
                        break;
                    }
                    Err(w) => best = best.min(w),
                }
            }
            if best > tol {
                let modes: Vec<String> = s.modes.iter().map(|m| m.to_string()).collect();
                return Err(format!(
                    "simulation {k} (init {init:?}) node {} at depth {} modes {} escapes the reachtree by {best:.3e} ({} candidate nodes)",
                    s.id,
                    s.depth,
                    modes.join(" "),
                    cands.len()
                ));
            }
        }
    }
    Ok(McReport { sims: n, sim_nodes })
}
