use serde_json::{Map, Value};

use super::{AgentError, Decomposition, FlowModel, ModePair, Params};
use crate::map::MapDef;

/// One-dimensional `ẋ = rate(tactical mode)`; rates come from `rate_<Mode>`
/// parameters, missing modes stand still.
#[derive(Debug, Clone)]
pub struct IntegratorModel {
    rates: Vec<(String, f64)>,
    fields: Vec<String>,
}

impl IntegratorModel {
    pub fn new(rates: Vec<(String, f64)>) -> IntegratorModel {
        IntegratorModel {
            rates,
            fields: vec!["x".into()],
        }
    }

    pub fn from_params(raw: &Map<String, Value>) -> Result<IntegratorModel, AgentError> {
        let mut p = Params::new("integrator", raw);
        let rates = p.prefixed("rate_")?;
        p.finish()?;
        Ok(IntegratorModel::new(rates))
    }

    pub fn rate(&self, tactical: &str) -> f64 {
        self.rates.iter().find(|(m, _)| m == tactical).map_or(0.0, |r| r.1)
    }
}

impl FlowModel for IntegratorModel {
    fn kind(&self) -> &str {
        "integrator"
    }

    fn fields(&self) -> &[String] {
        &self.fields
    }

    fn pos_dims(&self) -> usize {
        1
    }

    fn follows_track(&self) -> bool {
        false
    }

    fn derivative(&self, _: &[f64], mode: &ModePair, _: &MapDef, out: &mut [f64]) -> Result<(), AgentError> {
        out[0] = self.rate(&mode.tactical);
        Ok(())
    }
}

/// Competitive Lotka-Volterra pair with additive growth disturbance
/// `w ∈ [w_lo, w_hi]²`:
/// `ẋ₁ = x₁(1.1 + w₁ − x₁ − 0.1x₂)`, `ẋ₂ = x₂(4 + w₂ − 3x₁ − x₂)`.
/// Point simulation uses the midpoint disturbance.
#[derive(Debug, Clone)]
pub struct LotkaModel {
    pub w_lo: f64,
    pub w_hi: f64,
    fields: Vec<String>,
}

impl LotkaModel {
    pub fn new(w_lo: f64, w_hi: f64) -> LotkaModel {
        LotkaModel {
            w_lo,
            w_hi,
            fields: vec!["x1".into(), "x2".into()],
        }
    }

    pub fn from_params(raw: &Map<String, Value>) -> Result<LotkaModel, AgentError> {
        let mut p = Params::new("lotka", raw);
        let (lo, hi) = (p.get("w_lo", -0.1)?, p.get("w_hi", 0.1)?);
        p.finish()?;
        if lo > hi {
            return Err(AgentError::Param {
                kind: "lotka".into(),
                name: "w_lo".into(),
                message: "must not exceed w_hi".into(),
            });
        }
        Ok(LotkaModel::new(lo, hi))
    }

    /// Decomposition function; `x̂` enters where the dynamics decrease.
    pub fn d(x: &[f64], xh: &[f64], w: &[f64], out: &mut [f64]) {
        out[0] = x[0] * (1.1 + w[0] - x[0] - 0.1 * xh[1]);
        out[1] = x[1] * (4.0 + w[1] - 3.0 * xh[0] - x[1]);
    }
}

impl FlowModel for LotkaModel {
    fn kind(&self) -> &str {
        "lotka"
    }

    fn fields(&self) -> &[String] {
        &self.fields
    }

    fn pos_dims(&self) -> usize {
        2
    }

    fn follows_track(&self) -> bool {
        false
    }

    fn derivative(&self, x: &[f64], _: &ModePair, _: &MapDef, out: &mut [f64]) -> Result<(), AgentError> {
        let w = 0.5 * (self.w_lo + self.w_hi);
        LotkaModel::d(x, x, &[w, w], out);
        Ok(())
    }

    fn decomposition(&self) -> Option<&dyn Decomposition> {
        Some(self)
    }
}

impl Decomposition for LotkaModel {
    fn disturbance(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![self.w_lo; 2], vec![self.w_hi; 2])
    }

    fn decompose(&self, x: &[f64], xh: &[f64], w: &[f64], _: &[f64], _: &ModePair, out: &mut [f64]) {
        LotkaModel::d(x, xh, w, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lotka_equilibrium() {
        let mut out = [9.0; 2];
        LotkaModel::d(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0], &mut out);
        // 1.1 - 1 - 0.1 is not exactly zero in binary.
        assert!(out.iter().all(|v| v.abs() < 1e-15), "{out:?}");
    }

    #[test]
    fn integrator_rates() {
        let p = serde_json::json!({"rate_Up": 1.0, "rate_Down": -1.0});
        let m = IntegratorModel::from_params(p.as_object().unwrap()).unwrap();
        assert_eq!(m.rate("Up"), 1.0);
        assert_eq!(m.rate("Down"), -1.0);
        assert_eq!(m.rate("Other"), 0.0);
    }
}
