//! Agents: continuous state schemas and black-box flow simulators.

mod car;
mod drone;
mod simple;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use car::{stanley_steering, CarModel, CarParams};
pub use drone::{drone_acceleration, DroneModel, DroneParams};
pub use simple::{IntegratorModel, LotkaModel};

use crate::map::{MapDef, MapError};
use crate::numeric::{rk4_step, step_count};

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 0.05;

/// An agent's discrete state: tactical mode and track mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModePair {
    pub tactical: String,
    pub track: String,
}

impl ModePair {
    pub fn new(tactical: impl Into<String>, track: impl Into<String>) -> ModePair {
        ModePair {
            tactical: tactical.into(),
            track: track.into(),
        }
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.tactical, self.track)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("unknown agent type `{0}` (expected car, drone, integrator or lotka)")]
    UnknownType(String),
    #[error("agent type {kind}: bad parameter `{name}`: {message}")]
    Param { kind: String, name: String, message: String },
    #[error("non-finite state at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("duration {duration} is not a positive multiple of dt {dt}")]
    Duration { duration: f64, dt: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A mixed-monotone decomposition `d(x, x̂, w, ŵ)` with bounded disturbance.
pub trait Decomposition: Send + Sync {
    fn disturbance(&self) -> (Vec<f64>, Vec<f64>);
    fn decompose(&self, x: &[f64], xh: &[f64], w: &[f64], wh: &[f64], mode: &ModePair, out: &mut [f64]);
}

/// Closed-loop dynamics of one agent type.
pub trait FlowModel: Send + Sync + fmt::Debug {
    fn kind(&self) -> &str;
    /// Names of the continuous state variables, in order.
    fn fields(&self) -> &[String];
    /// Leading fields that form the agent's position.
    fn pos_dims(&self) -> usize;
    /// Whether the agent steers along map tracks (and so must match the map
    /// dimension).
    fn follows_track(&self) -> bool {
        true
    }
    fn derivative(&self, x: &[f64], mode: &ModePair, map: &MapDef, out: &mut [f64]) -> Result<(), AgentError>;
    fn decomposition(&self) -> Option<&dyn Decomposition> {
        None
    }
}

/// Uniformly sampled trajectory starting at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
}

impl Trace {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trace is never empty")
    }
}

/// Integrate `model` from `x0` for `duration` with fixed-step RK4.
pub fn flow(
    model: &dyn FlowModel,
    x0: &[f64],
    mode: &ModePair,
    map: &MapDef,
    duration: f64,
    dt: f64,
) -> Result<Trace, AgentError> {
    let steps = step_count(duration, dt).ok_or(AgentError::Duration { duration, dt })?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    states.push(x.clone());
    let mut failure = None;
    for step in 1..=steps {
        let mut f = |s: &[f64], d: &mut [f64]| {
            if failure.is_none() {
                if let Err(e) = model.derivative(s, mode, map, d) {
                    failure = Some(e);
                }
            }
        };
        rk4_step(&mut f, &mut x, dt);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AgentError::NonFinite {
                step,
                time: step as f64 * dt,
            });
        }
        states.push(x.clone());
    }
    Ok(Trace { dt, states })
}

/// Typed access to a `params` object with defaults; unknown keys are errors.
pub(crate) struct Params<'a> {
    kind: &'a str,
    map: &'a Map<String, Value>,
    seen: Vec<String>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(kind: &'a str, map: &'a Map<String, Value>) -> Params<'a> {
        Params {
            kind,
            map,
            seen: Vec::new(),
        }
    }

    fn bad(&self, name: &str, message: impl Into<String>) -> AgentError {
        AgentError::Param {
            kind: self.kind.into(),
            name: name.into(),
            message: message.into(),
        }
    }

    pub(crate) fn opt(&mut self, name: &str) -> Result<Option<f64>, AgentError> {
        self.seen.push(name.into());
        match self.map.get(name) {
            None => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.bad(name, "expected a finite number")),
            },
        }
    }

    pub(crate) fn get(&mut self, name: &str, default: f64) -> Result<f64, AgentError> {
        Ok(self.opt(name)?.unwrap_or(default))
    }

    pub(crate) fn positive(&mut self, name: &str, default: f64) -> Result<f64, AgentError> {
        let v = self.get(name, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.bad(name, "must be positive"))
        }
    }

    /// Every key starting with `prefix`, with the prefix stripped.
    pub(crate) fn prefixed(&mut self, prefix: &str) -> Result<Vec<(String, f64)>, AgentError> {
        let keys: Vec<String> = self.map.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        let mut out = Vec::new();
        for k in keys {
            let v = self.get(&k, 0.0)?;
            out.push((k[prefix.len()..].to_string(), v));
        }
        Ok(out)
    }

    pub(crate) fn finish(self) -> Result<(), AgentError> {
        for k in self.map.keys() {
            if !self.seen.iter().any(|s| s == k) {
                return Err(self.bad(k, "unknown parameter"));
            }
        }
        Ok(())
    }
}

/// Construct a bundled dynamics model by type name.
pub fn builtin_model(kind: &str, params: &Map<String, Value>) -> Result<Arc<dyn FlowModel>, AgentError> {
    Ok(match kind {
        "car" => Arc::new(CarModel::from_params(params)?),
        "drone" => Arc::new(DroneModel::from_params(params)?),
        "integrator" => Arc::new(IntegratorModel::from_params(params)?),
        "lotka" => Arc::new(LotkaModel::from_params(params)?),
        other => return Err(AgentError::UnknownType(other.into())),
    })
}
