use serde_json::{Map, Value};

use super::{AgentError, FlowModel, ModePair, Params};
use crate::map::MapDef;

#[derive(Debug, Clone, PartialEq)]
pub struct DroneParams {
    pub k_p: f64,
    pub k_d: f64,
    pub a_max: f64,
    /// Speed along the track.
    pub speed: f64,
}

impl Default for DroneParams {
    fn default() -> Self {
        DroneParams {
            k_p: 2.0,
            k_d: 3.0,
            a_max: 10.0,
            speed: 1.0,
        }
    }
}

/// PD acceleration toward `target` at velocity `v_ref`, norm-limited.
pub fn drone_acceleration(p: &DroneParams, pos: &[f64], vel: &[f64], target: &[f64], v_ref: &[f64]) -> [f64; 3] {
    let mut a = [0.0; 3];
    for i in 0..3 {
        a[i] = p.k_p * (target[i] - pos[i]) + p.k_d * (v_ref[i] - vel[i]);
    }
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if n > p.a_max {
        for c in &mut a {
            *c *= p.a_max / n;
        }
    }
    a
}

/// State `(px, py, pz, vx, vy, vz)` tracking the layer of its track mode.
#[derive(Debug, Clone)]
pub struct DroneModel {
    pub params: DroneParams,
    fields: Vec<String>,
}

impl DroneModel {
    pub fn new(params: DroneParams) -> DroneModel {
        DroneModel {
            params,
            fields: ["px", "py", "pz", "vx", "vy", "vz"].map(String::from).to_vec(),
        }
    }

    pub fn from_params(raw: &Map<String, Value>) -> Result<DroneModel, AgentError> {
        let d = DroneParams::default();
        let mut p = Params::new("drone", raw);
        let params = DroneParams {
            k_p: p.get("k_p", d.k_p)?,
            k_d: p.get("k_d", d.k_d)?,
            a_max: p.positive("a_max", d.a_max)?,
            speed: p.get("speed", d.speed)?,
        };
        p.finish()?;
        Ok(DroneModel::new(params))
    }
}

impl FlowModel for DroneModel {
    fn kind(&self) -> &str {
        "drone"
    }

    fn fields(&self) -> &[String] {
        &self.fields
    }

    fn pos_dims(&self) -> usize {
        3
    }

    fn derivative(&self, x: &[f64], mode: &ModePair, map: &MapDef, out: &mut [f64]) -> Result<(), AgentError> {
        let hint = (x[3].abs() + x[4].abs() > 1e-9).then_some([x[3], x[4]]);
        let r = map.reference(&mode.track, &x[..map.dim], hint)?;
        let mut target = [0.0; 3];
        let mut v_ref = [0.0; 3];
        for i in 0..map.dim.min(3) {
            target[i] = r.point[i];
            v_ref[i] = self.params.speed * r.tangent[i];
        }
        let a = drone_acceleration(&self.params, &x[..3], &x[3..6], &target, &v_ref);
        out[..3].copy_from_slice(&x[3..6]);
        out[3..6].copy_from_slice(&a);
        Ok(())
    }
}
