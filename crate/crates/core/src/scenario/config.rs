use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{AgentDef, Scenario, ScenarioError};
use crate::agent::{builtin_model, ModePair, DEFAULT_DT};
use crate::map::{builtin_map, load_map};
use crate::numeric::is_multiple;
use crate::sensor::SensorDef;
use crate::HyperRect;

/// Continuous post operator used by verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    #[default]
    SampleBloat,
    MixedMonotone,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::SampleBloat => "sample-bloat",
            EngineKind::MixedMonotone => "mixed-monotone",
        })
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sample-bloat" => Ok(EngineKind::SampleBloat),
            "mixed-monotone" => Ok(EngineKind::MixedMonotone),
            _ => Err(format!("unknown engine `{s}` (expected sample-bloat or mixed-monotone)")),
        }
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_max_nodes() -> usize {
    100_000
}

fn default_bloat() -> f64 {
    0.2
}

fn default_corner_cap() -> usize {
    5
}

/// Axis-aligned unsafe box for plots, bounded only on the named fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnsafeRegion {
    #[serde(default)]
    pub label: Option<String>,
    pub lo: BTreeMap<String, f64>,
    pub hi: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub logic: String,
    pub initial: [Vec<f64>; 2],
    pub mode: [String; 2],
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub map: String,
    #[serde(default)]
    pub sensor: SensorDef,
    pub delta: f64,
    pub horizon_steps: usize,
    #[serde(default)]
    pub engine: EngineKind,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_nodes")]
    pub max_nodes: usize,
    #[serde(default = "default_bloat")]
    pub bloat: f64,
    #[serde(default = "default_corner_cap")]
    pub corner_cap: usize,
    #[serde(default, rename = "unsafe")]
    pub unsafe_regions: Vec<UnsafeRegion>,
    pub agents: Vec<AgentConfig>,
}

/// Parameters of a simulate/verify run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub delta: f64,
    pub horizon_steps: usize,
    pub dt: f64,
    pub engine: EngineKind,
    pub max_nodes: usize,
    /// Sample-bloat factor β.
    pub bloat: f64,
    /// Number of widest dimensions whose corners are sampled.
    pub corner_cap: usize,
}

impl RunSettings {
    pub fn new(delta: f64, horizon_steps: usize) -> RunSettings {
        RunSettings {
            delta,
            horizon_steps,
            dt: DEFAULT_DT,
            engine: EngineKind::SampleBloat,
            max_nodes: default_max_nodes(),
            bloat: default_bloat(),
            corner_cap: default_corner_cap(),
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("$.dt: must be positive, got {}", self.dt));
        }
        if !(self.delta > 0.0) || !is_multiple(self.delta, self.dt) {
            return Err(format!(
                "$.delta: must be a positive multiple of dt {} , got {}",
                self.dt, self.delta
            ));
        }
        if self.horizon_steps == 0 {
            return Err("$.horizon_steps: must be at least 1".into());
        }
        if !(self.bloat >= 0.0 && self.bloat.is_finite()) {
            return Err(format!("$.bloat: must be non-negative, got {}", self.bloat));
        }
        if self.max_nodes == 0 {
            return Err("$.max_nodes: must be at least 1".into());
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Read a scenario config; relative map and logic paths resolve against
/// the config's directory.
pub fn load_scenario(path: &Path) -> Result<(Scenario, RunSettings, ScenarioConfig), ScenarioError> {
    let text = read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, base, &path.display().to_string())
}

pub fn parse_scenario(
    text: &str,
    base: &Path,
    name: &str,
) -> Result<(Scenario, RunSettings, ScenarioConfig), ScenarioError> {
    let cfg_err = |message: String| ScenarioError::Config {
        path: name.to_string(),
        message,
    };
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
    let settings = RunSettings {
        delta: cfg.delta,
        horizon_steps: cfg.horizon_steps,
        dt: cfg.dt,
        engine: cfg.engine,
        max_nodes: cfg.max_nodes,
        bloat: cfg.bloat,
        corner_cap: cfg.corner_cap,
    };
    settings.check().map_err(cfg_err)?;
    cfg.sensor.validate().map_err(|m| cfg_err(format!("$.sensor: {m}")))?;

    let map = if cfg.map.ends_with(".json") {
        let p = base.join(&cfg.map);
        load_map(&read(&p)?).map_err(|e| ScenarioError::Config {
            path: p.display().to_string(),
            message: e.to_string(),
        })?
    } else {
        builtin_map(&cfg.map)?
    };
    let mut sc = Scenario::new(Arc::new(map), cfg.sensor.clone());
    for (i, a) in cfg.agents.iter().enumerate() {
        let model = builtin_model(&a.kind, &a.params).map_err(|source| ScenarioError::Agent {
            id: a.id.clone(),
            source,
        })?;
        let logic_path = base.join(&a.logic);
        let src = read(&logic_path)?;
        let logic = crate::dsl::load(&src, sc.map.modes(), model.fields()).map_err(|error| ScenarioError::Dsl {
            path: logic_path.display().to_string(),
            error,
        })?;
        let initial = HyperRect::from_bounds(&a.initial[0], &a.initial[1])
            .map_err(|e| cfg_err(format!("$.agents[{i}].initial: {e}")))?;
        sc.add_agent(AgentDef {
            id: a.id.clone(),
            model,
            logic: Arc::new(logic),
            logic_path: logic_path.display().to_string(),
            initial,
            mode: ModePair::new(a.mode[0].clone(), a.mode[1].clone()),
        })?;
    }
    Ok((sc, settings, cfg))
}
