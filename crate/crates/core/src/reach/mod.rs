//! Branching simulation and set-based verification over decision periods.

mod engine;
mod tree;

pub use engine::{decomposition_post, mixed_monotone, post_cont, sample_bloat, sample_points, LocalTube};
pub use tree::{AssertRecord, Edge, Node, RunKind, Tree, TubeEntry, Violation};

use serde::{Deserialize, Serialize};

use crate::agent::{flow, ModePair};
use crate::extract::TriBool;
use crate::numeric::step_count;
use crate::scenario::{Candidate, HybridAutomaton, RunSettings};
use crate::HyperRect;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReachError {
    #[error("agent {agent}: {message}")]
    Flow { agent: String, message: String },
    #[error("{0}")]
    Engine(String),
    #[error("agent {agent}: {message}")]
    Guard { agent: String, message: String },
    #[error("initial state has {got} agents, scenario has {want}")]
    Initial { got: usize, want: usize },
}

/// Result of one candidate transition on a node's end sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardOutcome {
    pub verdict: TriBool,
    /// Joint successor sets; `None` when the guard cannot hold.
    pub successor: Option<Vec<HyperRect>>,
}

/// Interception points for reusing earlier continuous and discrete posts.
pub trait Memo {
    fn flow(
        &mut self,
        aut: &HybridAutomaton,
        agent: usize,
        rect: &HyperRect,
        mode: &ModePair,
        compute: &mut dyn FnMut() -> Result<LocalTube, ReachError>,
    ) -> Result<LocalTube, ReachError>;

    fn guard(
        &mut self,
        aut: &HybridAutomaton,
        c: &Candidate,
        ends: &[HyperRect],
        modes: &[ModePair],
        compute: &mut dyn FnMut() -> Result<GuardOutcome, ReachError>,
    ) -> Result<GuardOutcome, ReachError>;
}

/// Always recomputes.
pub struct NoMemo;

impl Memo for NoMemo {
    fn flow(
        &mut self,
        _: &HybridAutomaton,
        _: usize,
        _: &HyperRect,
        _: &ModePair,
        compute: &mut dyn FnMut() -> Result<LocalTube, ReachError>,
    ) -> Result<LocalTube, ReachError> {
        compute()
    }

    fn guard(
        &mut self,
        _: &HybridAutomaton,
        _: &Candidate,
        _: &[HyperRect],
        _: &[ModePair],
        compute: &mut dyn FnMut() -> Result<GuardOutcome, ReachError>,
    ) -> Result<GuardOutcome, ReachError> {
        compute()
    }
}

fn steps_per_period(settings: &RunSettings) -> usize {
    step_count(settings.delta, settings.dt).expect("settings were checked")
}

fn time(depth: usize, steps: usize, k: usize, dt: f64) -> f64 {
    (depth * steps + k) as f64 * dt
}

fn bounds(r: &HyperRect) -> [Vec<f64>; 2] {
    [r.lo(), r.hi()]
}

fn empty_tree(aut: &HybridAutomaton, settings: &RunSettings, kind: RunKind) -> Tree {
    Tree {
        kind,
        engine: (kind == RunKind::Verify).then_some(settings.engine),
        delta: settings.delta,
        dt: settings.dt,
        horizon_steps: settings.horizon_steps,
        agents: aut.agents.iter().map(|a| a.id.clone()).collect(),
        fields: aut.agents.iter().map(|a| a.fields.clone()).collect(),
        complete: true,
        nodes: Vec::new(),
    }
}

fn new_node(id: usize, parent: Option<usize>, depth: usize, modes: Vec<ModePair>, edge: Option<Edge>, init: &[HyperRect]) -> Node {
    Node {
        id,
        parent,
        depth,
        modes,
        edge,
        init: init.iter().map(bounds).collect(),
        tubes: Vec::new(),
        asserts: Vec::new(),
        error: None,
        children: Vec::new(),
    }
}

fn edge(modes: &[ModePair], c: &Candidate) -> Edge {
    Edge {
        agent: c.agent,
        from: modes[c.agent].clone(),
        to: c.next.clone(),
    }
}

/// Record, per agent and assertion, the first segment whose verdict is not
/// definitely true. `segments[k]` holds the joint boxes of segment `k`.
fn assert_records(
    aut: &HybridAutomaton,
    modes: &[ModePair],
    segments: &[(f64, f64, Vec<HyperRect>)],
) -> Vec<AssertRecord> {
    let mut out = Vec::new();
    for (i, a) in aut.agents.iter().enumerate() {
        if a.asserts.is_empty() {
            continue;
        }
        let mut done = vec![false; a.asserts.len()];
        for (t_lo, t_hi, rects) in segments {
            for (j, v) in aut.assert_verdicts(i, rects, modes).into_iter().enumerate() {
                if done[j] {
                    continue;
                }
                // An assertion that cannot be evaluated is not known to hold.
                let verdict = v.unwrap_or(TriBool::Unknown);
                if verdict != TriBool::DefTrue {
                    done[j] = true;
                    out.push(AssertRecord {
                        agent: i,
                        label: a.asserts[j].label.clone(),
                        verdict,
                        t_lo: *t_lo,
                        t_hi: *t_hi,
                        witness: bounds(&rects[i]),
                    });
                }
            }
            if done.iter().all(|d| *d) {
                break;
            }
        }
    }
    out
}

/// Room for one more node under the budget.
fn admit(tree: &mut Tree, settings: &RunSettings) -> bool {
    if tree.nodes.len() >= settings.max_nodes {
        tree.complete = false;
        return false;
    }
    true
}

/// Branching simulation from one joint point state. Every enabled
/// transition spawns a branch; with none enabled the modes persist.
pub fn simulate(aut: &HybridAutomaton, settings: &RunSettings, init: &[Vec<f64>]) -> Result<Tree, ReachError> {
    if init.len() != aut.agents.len() {
        return Err(ReachError::Initial {
            got: init.len(),
            want: aut.agents.len(),
        });
    }
    let steps = steps_per_period(settings);
    let dt = settings.dt;
    let mut tree = empty_tree(aut, settings, RunKind::Simulate);
    let rects: Vec<HyperRect> = init
        .iter()
        .map(|s| HyperRect::point(s).map_err(|e| ReachError::Engine(format!("initial state: {e}"))))
        .collect::<Result<_, _>>()?;
    tree.nodes.push(new_node(0, None, 0, aut.initial_modes.clone(), None, &rects));
    let mut states: Vec<Vec<Vec<f64>>> = vec![init.to_vec()];

    let mut cur = 0;
    while cur < tree.nodes.len() {
        let depth = tree.nodes[cur].depth;
        let modes = tree.nodes[cur].modes.clone();
        let x0 = std::mem::take(&mut states[cur]);
        let traces: Result<Vec<_>, ReachError> = aut
            .agents
            .iter()
            .zip(&x0)
            .zip(&modes)
            .map(|((a, x), m)| {
                flow(a.model.as_ref(), x, m, &aut.map, settings.delta, dt).map_err(|e| ReachError::Flow {
                    agent: a.id.clone(),
                    message: e.to_string(),
                })
            })
            .collect();
        let traces = match traces {
            Ok(t) => t,
            Err(e) => {
                tree.nodes[cur].error = Some(e.to_string());
                cur += 1;
                continue;
            }
        };
        let mut segments = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = time(depth, steps, k, dt);
            let rs: Vec<HyperRect> = traces.iter().map(|tr| HyperRect::point(&tr.states[k]).expect("finite state")).collect();
            segments.push((t, t, rs));
        }
        let node = &mut tree.nodes[cur];
        node.tubes = traces
            .iter()
            .map(|tr| {
                (0..=steps)
                    .map(|k| {
                        let t = time(depth, steps, k, dt);
                        TubeEntry(t, t, tr.states[k].clone(), tr.states[k].clone())
                    })
                    .collect()
            })
            .collect();
        node.asserts = assert_records(aut, &modes, &segments);

        if depth + 1 < settings.horizon_steps {
            let ends: Vec<Vec<f64>> = traces.iter().map(|t| t.last().to_vec()).collect();
            let mut next: Vec<(Option<Edge>, Vec<ModePair>, Vec<Vec<f64>>)> = Vec::new();
            let mut failure = None;
            for c in aut.candidates(&modes) {
                match aut.guard_on_points(&c, &ends, &modes) {
                    Ok(false) => {}
                    Ok(true) => match aut.reset_point(&c, &ends, &modes) {
                        Ok(s) => next.push((Some(edge(&modes, &c)), aut.next_modes(&modes, &c), s)),
                        Err(e) => failure = Some(e),
                    },
                    Err(e) => failure = Some(e),
                }
                if failure.is_some() {
                    break;
                }
            }
            if let Some(e) = failure {
                tree.nodes[cur].error = Some(e.to_string());
                cur += 1;
                continue;
            }
            if next.is_empty() {
                next.push((None, modes.clone(), ends));
            }
            for (e, m, s) in next {
                if !admit(&mut tree, settings) {
                    break;
                }
                let id = tree.nodes.len();
                let rs: Vec<HyperRect> = s.iter().map(|x| HyperRect::point(x).expect("finite state")).collect();
                tree.nodes.push(new_node(id, Some(cur), depth + 1, m, e, &rs));
                tree.nodes[cur].children.push(id);
                states.push(s);
            }
        }
        cur += 1;
    }
    Ok(tree)
}

/// Simulation from the center of every agent's initial set.
pub fn simulate_center(aut: &HybridAutomaton, settings: &RunSettings) -> Result<Tree, ReachError> {
    let init: Vec<Vec<f64>> = aut.initial.iter().map(|r| r.center()).collect();
    simulate(aut, settings, &init)
}

/// Over-approximate reachtree from the scenario's initial sets.
pub fn verify(aut: &HybridAutomaton, settings: &RunSettings) -> Tree {
    verify_with(aut, settings, &mut NoMemo)
}

/// Verification with continuous and discrete posts routed through `memo`.
///
/// A node whose post fails keeps the error and gets no children. A node
/// stays in its modes unless some guard is definitely true and none is
/// undecided.
pub fn verify_with(aut: &HybridAutomaton, settings: &RunSettings, memo: &mut dyn Memo) -> Tree {
    let steps = steps_per_period(settings);
    let dt = settings.dt;
    let mut tree = empty_tree(aut, settings, RunKind::Verify);
    tree.nodes.push(new_node(0, None, 0, aut.initial_modes.clone(), None, &aut.initial));

    let mut cur = 0;
    while cur < tree.nodes.len() {
        let depth = tree.nodes[cur].depth;
        let modes = tree.nodes[cur].modes.clone();
        let init = tree.nodes[cur].init_rects();
        let mut posts = Vec::with_capacity(init.len());
        let mut failure = None;
        for (i, a) in aut.agents.iter().enumerate() {
            let mut compute = || post_cont(a, &aut.map, &init[i], &modes[i], settings);
            match memo.flow(aut, i, &init[i], &modes[i], &mut compute) {
                Ok(p) => posts.push(p),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failure {
            tree.nodes[cur].error = Some(e.to_string());
            cur += 1;
            continue;
        }
        let segments: Vec<(f64, f64, Vec<HyperRect>)> = (0..steps)
            .map(|k| {
                (
                    time(depth, steps, k, dt),
                    time(depth, steps, k + 1, dt),
                    posts.iter().map(|p| p.entries[k].clone()).collect(),
                )
            })
            .collect();
        let node = &mut tree.nodes[cur];
        node.tubes = posts
            .iter()
            .map(|p| {
                p.entries
                    .iter()
                    .enumerate()
                    .map(|(k, r)| TubeEntry(time(depth, steps, k, dt), time(depth, steps, k + 1, dt), r.lo(), r.hi()))
                    .collect()
            })
            .collect();
        node.asserts = assert_records(aut, &modes, &segments);

        if depth + 1 < settings.horizon_steps {
            let ends: Vec<HyperRect> = posts.into_iter().map(|p| p.end).collect();
            let mut next: Vec<(Candidate, Vec<HyperRect>)> = Vec::new();
            let mut any_true = false;
            let mut any_unknown = false;
            let mut failure = None;
            for c in aut.candidates(&modes) {
                let mut compute = || {
                    let err = |e: crate::extract::EvalError| ReachError::Guard {
                        agent: aut.agents[c.agent].id.clone(),
                        message: e.to_string(),
                    };
                    let verdict = aut.guard_on_sets(&c, &ends, &modes).map_err(err)?;
                    let successor = match verdict {
                        TriBool::DefFalse => None,
                        _ => aut.post_disc(&c, &ends, &modes).map_err(err)?,
                    };
                    Ok(GuardOutcome { verdict, successor })
                };
                match memo.guard(aut, &c, &ends, &modes, &mut compute) {
                    Ok(o) => {
                        any_true |= o.verdict == TriBool::DefTrue;
                        any_unknown |= o.verdict == TriBool::Unknown;
                        if let Some(s) = o.successor {
                            next.push((c, s));
                        }
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = failure {
                tree.nodes[cur].error = Some(e.to_string());
                cur += 1;
                continue;
            }
            let mut children: Vec<(Option<Edge>, Vec<ModePair>, Vec<HyperRect>)> = next
                .into_iter()
                .map(|(c, s)| (Some(edge(&modes, &c)), aut.next_modes(&modes, &c), s))
                .collect();
            if !any_true || any_unknown {
                children.push((None, modes.clone(), ends));
            }
            for (e, m, s) in children {
                if !admit(&mut tree, settings) {
                    break;
                }
                let id = tree.nodes.len();
                tree.nodes.push(new_node(id, Some(cur), depth + 1, m, e, &s));
                tree.nodes[cur].children.push(id);
            }
        }
        cur += 1;
    }
    tree
}
