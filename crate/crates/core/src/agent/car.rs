use serde_json::{Map, Value};

use super::{AgentError, FlowModel, ModePair, Params};
use crate::map::MapDef;

/// Bicycle model and Stanley steering constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CarParams {
    pub wheelbase: f64,
    pub k_s: f64,
    /// Steering limit (rad).
    pub max_steer: f64,
    pub k_v: f64,
    pub eps_v: f64,
    /// Commanded speed; `None` holds the current speed.
    pub speed: Option<f64>,
}

impl Default for CarParams {
    fn default() -> Self {
        CarParams {
            wheelbase: 1.75,
            k_s: 0.45,
            max_steer: 30f64.to_radians(),
            k_v: 1.0,
            eps_v: 0.1,
            speed: None,
        }
    }
}

/// Stanley law `ψ_e + atan(k_s e / (v + ε))`, clamped to the steering limit.
/// Positive cross-track error means the path lies to the left.
pub fn stanley_steering(p: &CarParams, heading_err: f64, cross_track: f64, v: f64) -> f64 {
    let raw = heading_err + (p.k_s * cross_track).atan2(v + p.eps_v);
    raw.clamp(-p.max_steer, p.max_steer)
}

fn wrap_angle(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    (a + t / 2.0).rem_euclid(t) - t / 2.0
}

/// State `(x, y, θ, v)` following the lane of its track mode.
#[derive(Debug, Clone)]
pub struct CarModel {
    pub params: CarParams,
    fields: Vec<String>,
}

impl CarModel {
    pub fn new(params: CarParams) -> CarModel {
        CarModel {
            params,
            fields: ["x", "y", "theta", "v"].map(String::from).to_vec(),
        }
    }

    pub fn from_params(raw: &Map<String, Value>) -> Result<CarModel, AgentError> {
        let d = CarParams::default();
        let mut p = Params::new("car", raw);
        let params = CarParams {
            wheelbase: p.positive("wheelbase", d.wheelbase)?,
            k_s: p.get("k_s", d.k_s)?,
            max_steer: p.positive("max_steer_deg", d.max_steer.to_degrees())?.to_radians(),
            k_v: p.get("k_v", d.k_v)?,
            eps_v: p.get("eps_v", d.eps_v)?,
            speed: p.opt("speed")?,
        };
        p.finish()?;
        Ok(CarModel::new(params))
    }

    /// Bicycle kinematics for a given steering angle.
    pub fn dynamics(&self, x: &[f64], steer: f64, out: &mut [f64]) {
        let p = &self.params;
        let (th, v) = (x[2], x[3]);
        out[0] = v * th.cos();
        out[1] = v * th.sin();
        out[2] = v / p.wheelbase * steer.tan();
        out[3] = match p.speed {
            Some(cmd) => p.k_v * (cmd - v),
            None => 0.0,
        };
    }
}

impl FlowModel for CarModel {
    fn kind(&self) -> &str {
        "car"
    }

    fn fields(&self) -> &[String] {
        &self.fields
    }

    fn pos_dims(&self) -> usize {
        2
    }

    fn derivative(&self, x: &[f64], mode: &ModePair, map: &MapDef, out: &mut [f64]) -> Result<(), AgentError> {
        let p = &self.params;
        let (th, v) = (x[2], x[3]);
        let dir = [th.cos(), th.sin()];
        let front = [x[0] + p.wheelbase * dir[0], x[1] + p.wheelbase * dir[1]];
        let r = map.reference(&mode.track, &front, Some(dir))?;
        let path_heading = r.tangent[1].atan2(r.tangent[0]);
        let heading_err = wrap_angle(path_heading - th);
        let cross = (r.point[0] - front[0]) * -r.tangent[1] + (r.point[1] - front[1]) * r.tangent[0];
        let steer = stanley_steering(p, heading_err, cross, v);
        self.dynamics(x, steer, out);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::builtin_map;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn straight_motion() {
        let m = CarModel::new(CarParams::default());
        let mut d = [0.0; 4];
        m.dynamics(&[0.0, 0.0, 0.0, 1.0], 0.0, &mut d);
        assert_eq!(&d[..3], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn stanley_examples() {
        let p = CarParams {
            k_s: 1.0,
            eps_v: 0.0,
            max_steer: 10.0,
            ..CarParams::default()
        };
        assert!((stanley_steering(&p, 0.0, 1.0, 1.0) - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(stanley_steering(&p, 0.0, 0.0, 1.0), 0.0);
        let clamped = stanley_steering(&CarParams::default(), 0.0, 100.0, 0.0);
        assert!((clamped - 30f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn on_lane_has_zero_steering() {
        let map = builtin_map("M1").unwrap();
        let m = CarModel::new(CarParams::default());
        let mut d = [0.0; 4];
        m.derivative(&[3.0, 0.0, 0.0, 1.0], &ModePair::new("Normal", "T1"), &map, &mut d)
            .unwrap();
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn transition_mode_steers_toward_destination() {
        let map = builtin_map("M1").unwrap();
        let m = CarModel::new(CarParams::default());
        let mut d = [0.0; 4];
        m.derivative(&[3.0, 0.0, 0.0, 1.0], &ModePair::new("SwitchLeft", "M10"), &map, &mut d)
            .unwrap();
        assert!(d[2] > 0.0);
        m.derivative(&[3.0, 0.0, 0.0, 1.0], &ModePair::new("SwitchRight", "M12"), &map, &mut d)
            .unwrap();
        assert!(d[2] < 0.0);
    }
}
