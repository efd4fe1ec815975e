//! Scenarios: a map, agents and a sensor composed into a hybrid automaton.

mod automaton;
mod config;

use std::sync::Arc;

pub use automaton::{AgentAutomaton, Candidate, HybridAutomaton, Transition};
pub use config::{load_scenario, parse_scenario, AgentConfig, EngineKind, RunSettings, ScenarioConfig, UnsafeRegion};

use crate::agent::{AgentError, FlowModel, ModePair};
use crate::dsl::{CheckedProgram, DslError};
use crate::extract::extract_transitions;
use crate::map::{MapDef, MapError};
use crate::sensor::SensorDef;
use crate::HyperRect;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}:{error}")]
    Dsl { path: String, error: DslError },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("agent {id}: {source}")]
    Agent { id: String, source: AgentError },
    #[error("duplicate agent id `{0}`")]
    Duplicate(String),
    #[error("agent {id}: {message}")]
    Dimension { id: String, message: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("scenario is invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// One agent instance: dynamics, decision logic, initial set and mode.
#[derive(Debug, Clone)]
pub struct AgentDef {
    pub id: String,
    pub model: Arc<dyn FlowModel>,
    pub logic: Arc<CheckedProgram>,
    /// Where the logic came from, for diagnostics.
    pub logic_path: String,
    pub initial: HyperRect,
    pub mode: ModePair,
}

impl AgentDef {
    fn check_initial(&self) -> Result<(), ScenarioError> {
        let n = self.model.fields().len();
        if self.initial.dim() != n {
            return Err(ScenarioError::Dimension {
                id: self.id.clone(),
                message: format!(
                    "initial set has {} dimensions, {} state has {n}",
                    self.initial.dim(),
                    self.model.kind()
                ),
            });
        }
        if !self.initial.is_finite() {
            return Err(ScenarioError::Dimension {
                id: self.id.clone(),
                message: "initial set is not finite".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub map: Arc<MapDef>,
    pub agents: Vec<AgentDef>,
    pub sensor: SensorDef,
}

impl Scenario {
    pub fn new(map: Arc<MapDef>, sensor: SensorDef) -> Scenario {
        Scenario {
            map,
            agents: Vec::new(),
            sensor,
        }
    }

    pub fn add_agent(&mut self, agent: AgentDef) -> Result<(), ScenarioError> {
        if self.agents.iter().any(|a| a.id == agent.id) {
            return Err(ScenarioError::Duplicate(agent.id));
        }
        agent.check_initial()?;
        self.agents.push(agent);
        Ok(())
    }

    pub fn set_initial(&mut self, id: &str, rect: HyperRect, mode: ModePair) -> Result<(), ScenarioError> {
        let a = self
            .agents
            .iter_mut()
            .find(|a| a.id == id)
            .ok_or_else(|| ScenarioError::UnknownAgent(id.into()))?;
        let old = std::mem::replace(&mut a.initial, rect);
        if let Err(e) = a.check_initial() {
            a.initial = old;
            return Err(e);
        }
        a.mode = mode;
        Ok(())
    }

    /// Compatibility of agents, map and sensor. Returns every violation.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.agents.is_empty() {
            out.push("scenario has no agents".into());
        }
        if let Err(e) = self.sensor.validate() {
            out.push(e);
        }
        let k = self.agents.len().max(1);
        for a in &self.agents {
            let model = &a.model;
            if model.follows_track() && model.pos_dims() != self.map.dim {
                out.push(format!(
                    "agent {}: {} moves in {} dimensions but map {} has {}",
                    a.id,
                    model.kind(),
                    model.pos_dims(),
                    self.map.name,
                    self.map.dim
                ));
            }
            if self.map.mode_info(&a.mode.track).is_err() {
                out.push(format!(
                    "agent {}: initial track mode {} is not a mode of map {}",
                    a.id, a.mode.track, self.map.name
                ));
            }
            if !a.logic.tactical_modes.contains(&a.mode.tactical) {
                out.push(format!(
                    "agent {}: initial tactical mode {} is not declared by its logic",
                    a.id, a.mode.tactical
                ));
            }
            if !self.map.scheme.knows(&a.mode.tactical) {
                out.push(format!(
                    "agent {}: map {} has no transition for ({}, {}, {})",
                    a.id, self.map.name, a.mode.track, a.mode.tactical, a.mode.tactical
                ));
            }
            match extract_transitions(&a.logic, k) {
                Err(e) => out.push(format!("agent {}: {}:{e}", a.id, a.logic_path)),
                Ok((ts, _)) => {
                    let mut seen = Vec::new();
                    for t in ts {
                        if !self.map.scheme.knows(&t.dst) && !seen.contains(&(t.src.clone(), t.dst.clone())) {
                            out.push(format!(
                                "agent {}: map {} has no transition for ({}, {}, {})",
                                a.id, self.map.name, a.mode.track, t.src, t.dst
                            ));
                            seen.push((t.src, t.dst));
                        }
                    }
                }
            }
            if a.initial.dim() != model.fields().len() {
                out.push(format!("agent {}: initial set dimension mismatch", a.id));
            }
        }
        if let Some(first) = self.agents.first() {
            for a in &self.agents[1..] {
                if a.model.fields() != first.model.fields() {
                    out.push(format!(
                        "agents {} and {} have different state spaces ({} vs {})",
                        first.id,
                        a.id,
                        first.model.fields().join(","),
                        a.model.fields().join(",")
                    ));
                }
            }
            if self.sensor.noise() > 0.0 && first.model.pos_dims() == 0 {
                out.push("noisy sensor needs agents with position fields".into());
            }
        }
        out
    }

    /// Build the joint automaton. Fails with all violations if invalid.
    pub fn build_automaton(&self) -> Result<HybridAutomaton, ScenarioError> {
        let v = self.validate();
        if !v.is_empty() {
            return Err(ScenarioError::Invalid(v));
        }
        HybridAutomaton::build(self)
    }
}
