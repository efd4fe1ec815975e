//! Simulation and reachability trees and their JSON form.

use serde::{Deserialize, Serialize};

use crate::agent::ModePair;
use crate::extract::TriBool;
use crate::scenario::EngineKind;
use crate::HyperRect;

/// `[t_lo, t_hi, lo, hi]`: the agent's states over `[t_lo, t_hi]` lie in
/// the box `lo..hi`. Simulation entries are points with `t_lo == t_hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeEntry(pub f64, pub f64, pub Vec<f64>, pub Vec<f64>);

impl TubeEntry {
    pub fn t_lo(&self) -> f64 {
        self.0
    }

    pub fn t_hi(&self) -> f64 {
        self.1
    }

    pub fn rect(&self) -> HyperRect {
        HyperRect::from_bounds(&self.2, &self.3).expect("tube entries are well-formed")
    }
}

/// The discrete transition that created a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub agent: usize,
    pub from: ModePair,
    pub to: ModePair,
}

/// A failed assertion inside one node: the first segment where the verdict
/// was not definitely true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertRecord {
    pub agent: usize,
    pub label: String,
    pub verdict: TriBool,
    pub t_lo: f64,
    pub t_hi: f64,
    pub witness: [Vec<f64>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub modes: Vec<ModePair>,
    /// `None` for the root and for stay edges.
    pub edge: Option<Edge>,
    /// Initial set of each agent as `[lo, hi]`.
    pub init: Vec<[Vec<f64>; 2]>,
    /// One tube per agent.
    pub tubes: Vec<Vec<TubeEntry>>,
    pub asserts: Vec<AssertRecord>,
    pub error: Option<String>,
    pub children: Vec<usize>,
}

impl Node {
    pub fn init_rects(&self) -> Vec<HyperRect> {
        self.init
            .iter()
            .map(|[lo, hi]| HyperRect::from_bounds(lo, hi).expect("node sets are well-formed"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Simulate,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub kind: RunKind,
    pub engine: Option<EngineKind>,
    pub delta: f64,
    pub dt: f64,
    pub horizon_steps: usize,
    pub agents: Vec<String>,
    pub fields: Vec<Vec<String>>,
    /// False when exploration stopped at the node budget.
    pub complete: bool,
    pub nodes: Vec<Node>,
}

/// An assertion failure with the mode path that reaches it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub node: usize,
    pub agent: String,
    pub label: String,
    pub verdict: TriBool,
    pub t_lo: f64,
    pub t_hi: f64,
    pub witness: [Vec<f64>; 2],
    pub path: Vec<String>,
}

fn joint(modes: &[ModePair]) -> String {
    modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")
}

impl Tree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Nodes from the root down to `id`.
    pub fn path_to(&self, id: usize) -> Vec<&Node> {
        let mut out = vec![&self.nodes[id]];
        while let Some(p) = out.last().unwrap().parent {
            out.push(&self.nodes[p]);
        }
        out.reverse();
        out
    }

    /// Joint modes along the path to `id`, one entry per mode change.
    pub fn mode_path(&self, id: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for n in self.path_to(id) {
            let s = joint(&n.modes);
            if out.last() != Some(&s) {
                out.push(s);
            }
        }
        out
    }

    /// Number of discrete-transition edges (stay edges excluded).
    pub fn transition_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.edge.is_some()).count()
    }

    /// Transition edges leaving the root's stay chain: the first mode
    /// change on each branch.
    pub fn transition_branches(&self) -> Vec<usize> {
        let mut on_chain = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for n in &self.nodes {
            match n.parent {
                None => on_chain[n.id] = true,
                Some(p) if on_chain[p] => {
                    if n.edge.is_some() {
                        out.push(n.id);
                    } else {
                        on_chain[n.id] = true;
                    }
                }
                _ => {}
            }
        }
        out
    }

    pub fn errors(&self) -> Vec<(usize, &str)> {
        self.nodes
            .iter()
            .filter_map(|n| n.error.as_deref().map(|e| (n.id, e)))
            .collect()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for n in &self.nodes {
            for r in &n.asserts {
                out.push(Violation {
                    node: n.id,
                    agent: self.agents[r.agent].clone(),
                    label: r.label.clone(),
                    verdict: r.verdict,
                    t_lo: r.t_lo,
                    t_hi: r.t_hi,
                    witness: r.witness.clone(),
                    path: self.mode_path(n.id),
                });
            }
        }
        out
    }

    /// Transition branches whose subtree records an assertion failure.
    pub fn violating_branches(&self) -> Vec<usize> {
        let bad: Vec<usize> = self.nodes.iter().filter(|n| !n.asserts.is_empty()).map(|n| n.id).collect();
        self.transition_branches()
            .into_iter()
            .filter(|b| bad.iter().any(|&v| self.path_to(v).iter().any(|n| n.id == *b)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trees serialize")
    }

    pub fn from_json(text: &str) -> Result<Tree, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// End of the time horizon.
    pub fn end_time(&self) -> f64 {
        self.horizon_steps as f64 * self.delta
    }
}
