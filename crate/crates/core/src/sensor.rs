//! What each agent observes about the others.

use serde::{Deserialize, Serialize};

use crate::HyperRect;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SensorDef {
    #[default]
    Transparent,
    /// Positions of other agents are known up to ±`position_noise` per axis.
    Noisy { position_noise: f64 },
}

impl SensorDef {
    pub fn noise(&self) -> f64 {
        match self {
            SensorDef::Transparent => 0.0,
            SensorDef::Noisy { position_noise } => *position_noise,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.noise();
        if n.is_finite() && n >= 0.0 {
            Ok(())
        } else {
            Err(format!("sensor noise must be finite and non-negative, got {n}"))
        }
    }

    /// Point observation. Noise is never sampled, so this is the identity
    /// for both kinds.
    pub fn observe(&self, _ego: usize, states: &[Vec<f64>]) -> Vec<Vec<f64>> {
        states.to_vec()
    }

    /// Set observation: other agents' first `pos_dims` dimensions are
    /// bloated by the noise bound; the ego's own set is exact.
    pub fn observe_sets(&self, ego: usize, rects: &[HyperRect], pos_dims: usize) -> Vec<HyperRect> {
        let n = self.noise();
        rects
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if i == ego || n == 0.0 {
                    return r.clone();
                }
                let amounts: Vec<f64> = (0..r.dim()).map(|d| if d < pos_dims { n } else { 0.0 }).collect();
                r.bloat(&amounts).expect("noise is non-negative and sized to the rect")
            })
            .collect()
    }
}
