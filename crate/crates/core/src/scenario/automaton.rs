use std::sync::Arc;

use super::{Scenario, ScenarioError};
use crate::agent::{FlowModel, ModePair};
use crate::dsl::ast::Expr;
use crate::dsl::Span;
use crate::extract::{clip_guard, eval_bool, eval_num, extract_transitions, AgentView, AssertSpec, EvalEnv, EvalError, TriBool};
use crate::map::MapDef;
use crate::sensor::SensorDef;
use crate::HyperRect;

/// One extracted transition with resets resolved to field indices.
#[derive(Debug, Clone)]
pub struct Transition {
    pub src: String,
    pub dst: String,
    pub guard: Expr,
    pub resets: Vec<(usize, Expr)>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct AgentAutomaton {
    pub id: String,
    pub model: Arc<dyn FlowModel>,
    pub fields: Vec<String>,
    pub pos_dims: usize,
    pub transitions: Vec<Transition>,
    pub asserts: Vec<AssertSpec>,
}

/// A joint transition: agent `agent` takes its `transition`-th edge,
/// landing in mode `next`; every other agent keeps its mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub agent: usize,
    pub transition: usize,
    pub next: ModePair,
}

#[derive(Debug, Clone)]
pub struct HybridAutomaton {
    pub map: Arc<MapDef>,
    pub sensor: SensorDef,
    pub agents: Vec<AgentAutomaton>,
    pub initial: Vec<HyperRect>,
    pub initial_modes: Vec<ModePair>,
}

impl HybridAutomaton {
    pub(super) fn build(sc: &Scenario) -> Result<HybridAutomaton, ScenarioError> {
        let k = sc.agents.len();
        let mut agents = Vec::with_capacity(k);
        for a in &sc.agents {
            let (ts, asserts) = extract_transitions(&a.logic, k).map_err(|error| ScenarioError::Dsl {
                path: a.logic_path.clone(),
                error,
            })?;
            let fields: Vec<String> = a.model.fields().to_vec();
            let mut transitions = Vec::with_capacity(ts.len());
            for t in ts {
                let mut resets = Vec::new();
                for (f, e) in t.resets {
                    let i = fields.iter().position(|g| *g == f).ok_or_else(|| ScenarioError::Dimension {
                        id: a.id.clone(),
                        message: format!("reset of unknown field `{f}`"),
                    })?;
                    resets.push((i, e));
                }
                transitions.push(Transition {
                    src: t.src,
                    dst: t.dst,
                    guard: t.guard,
                    resets,
                    span: t.span,
                });
            }
            agents.push(AgentAutomaton {
                id: a.id.clone(),
                model: a.model.clone(),
                pos_dims: a.model.pos_dims(),
                fields,
                transitions,
                asserts,
            });
        }
        Ok(HybridAutomaton {
            map: sc.map.clone(),
            sensor: sc.sensor.clone(),
            agents,
            initial: sc.agents.iter().map(|a| a.initial.clone()).collect(),
            initial_modes: sc.agents.iter().map(|a| a.mode.clone()).collect(),
        })
    }

    /// Outgoing joint transitions of `modes`, ordered by agent index then
    /// declaration order. Edges whose track-mode change the map does not
    /// define are dropped.
    pub fn candidates(&self, modes: &[ModePair]) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (i, a) in self.agents.iter().enumerate() {
            let cur = &modes[i];
            for (j, t) in a.transitions.iter().enumerate() {
                if t.src != cur.tactical {
                    continue;
                }
                let Ok(track) = self.map.next_track_mode(&cur.track, &t.src, &t.dst) else {
                    continue;
                };
                let next = ModePair::new(t.dst.clone(), track);
                if next == *cur && t.resets.is_empty() {
                    continue;
                }
                out.push(Candidate {
                    agent: i,
                    transition: j,
                    next,
                });
            }
        }
        out
    }

    pub fn transition(&self, c: &Candidate) -> &Transition {
        &self.agents[c.agent].transitions[c.transition]
    }

    pub fn next_modes(&self, modes: &[ModePair], c: &Candidate) -> Vec<ModePair> {
        let mut m = modes.to_vec();
        m[c.agent] = c.next.clone();
        m
    }

    fn env<'a>(&'a self, ego: usize, rects: &'a [HyperRect], modes: &'a [ModePair]) -> EvalEnv<'a> {
        let view = |i: usize| AgentView {
            rect: &rects[i],
            tactical: &modes[i].tactical,
            track: &modes[i].track,
        };
        EvalEnv {
            fields: &self.agents[ego].fields,
            pos_dims: self.agents[ego].pos_dims,
            ego: view(ego),
            others: (0..rects.len()).filter(|i| *i != ego).map(view).collect(),
            map: self.map.as_ref(),
        }
    }

    fn observed(&self, ego: usize, rects: &[HyperRect]) -> Vec<HyperRect> {
        self.sensor.observe_sets(ego, rects, self.agents[ego].pos_dims)
    }

    /// Three-valued guard verdict over joint boxes, as the switching agent
    /// observes them.
    pub fn guard_on_sets(&self, c: &Candidate, rects: &[HyperRect], modes: &[ModePair]) -> Result<TriBool, EvalError> {
        let obs = self.observed(c.agent, rects);
        eval_bool(&self.transition(c).guard, &self.env(c.agent, &obs, modes))
    }

    /// Concrete guard value at a joint point state.
    pub fn guard_on_points(&self, c: &Candidate, states: &[Vec<f64>], modes: &[ModePair]) -> Result<bool, EvalError> {
        let rects = points(states);
        let v = eval_bool(&self.transition(c).guard, &self.env(c.agent, &rects, modes))?;
        Ok(v == TriBool::DefTrue)
    }

    /// Discrete successor of joint boxes: clip the switching agent's box to
    /// the guard, then apply its resets over intervals. `None` when the
    /// clipped box is empty.
    pub fn post_disc(
        &self,
        c: &Candidate,
        rects: &[HyperRect],
        modes: &[ModePair],
    ) -> Result<Option<Vec<HyperRect>>, EvalError> {
        let t = self.transition(c);
        let mut obs = self.observed(c.agent, rects);
        let Some(clipped) = clip_guard(&t.guard, &self.env(c.agent, &obs, modes)) else {
            return Ok(None);
        };
        obs[c.agent] = clipped.clone();
        let mut next = clipped.clone();
        {
            let env = self.env(c.agent, &obs, modes);
            for (i, e) in &t.resets {
                next.set(*i, eval_num(e, &env)?);
            }
        }
        let mut out = rects.to_vec();
        out[c.agent] = next;
        Ok(Some(out))
    }

    /// Discrete successor of a joint point state.
    pub fn reset_point(&self, c: &Candidate, states: &[Vec<f64>], modes: &[ModePair]) -> Result<Vec<Vec<f64>>, EvalError> {
        let t = self.transition(c);
        let rects = points(states);
        let env = self.env(c.agent, &rects, modes);
        let mut next = states[c.agent].clone();
        for (i, e) in &t.resets {
            next[*i] = eval_num(e, &env)?.mid();
        }
        let mut out = states.to_vec();
        out[c.agent] = next;
        Ok(out)
    }

    /// Verdict of each of agent `ego`'s asserts over exact joint boxes.
    pub fn assert_verdicts(&self, ego: usize, rects: &[HyperRect], modes: &[ModePair]) -> Vec<Result<TriBool, EvalError>> {
        let env = self.env(ego, rects, modes);
        self.agents[ego]
            .asserts
            .iter()
            .map(|a| eval_bool(&a.predicate, &env))
            .collect()
    }
}

fn points(states: &[Vec<f64>]) -> Vec<HyperRect> {
    states.iter().map(|s| HyperRect::point(s).expect("finite state")).collect()
}
