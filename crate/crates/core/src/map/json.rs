use serde_json::{json, Map, Value};

use super::{Lane, LaneGeometry, MapDef, MapError, TacticalScheme, P2};

fn err(path: &str, message: impl Into<String>) -> MapError {
    MapError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, MapError> {
    obj.get(key).ok_or_else(|| err(path, format!("missing key \"{key}\"")))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, MapError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64, MapError> {
    let p = format!("{path}.{key}");
    let x = field(obj, key, path)?.as_f64().ok_or_else(|| err(&p, "expected a number"))?;
    if !x.is_finite() {
        return Err(err(&p, "non-finite coordinate"));
    }
    Ok(x)
}

fn string(obj: &Map<String, Value>, key: &str, path: &str) -> Result<String, MapError> {
    let p = format!("{path}.{key}");
    Ok(field(obj, key, path)?.as_str().ok_or_else(|| err(&p, "expected a string"))?.to_string())
}

fn point(obj: &Map<String, Value>, key: &str, path: &str) -> Result<P2, MapError> {
    let p = format!("{path}.{key}");
    let arr = field(obj, key, path)?.as_array().ok_or_else(|| err(&p, "expected [x, y]"))?;
    if arr.len() != 2 {
        return Err(err(&p, "expected [x, y]"));
    }
    let mut out = [0.0; 2];
    for (i, v) in arr.iter().enumerate() {
        let x = v.as_f64().ok_or_else(|| err(&format!("{p}[{i}]"), "expected a number"))?;
        if !x.is_finite() {
            return Err(err(&format!("{p}[{i}]"), "non-finite coordinate"));
        }
        out[i] = x;
    }
    Ok(out)
}

fn positive(x: f64, path: &str) -> Result<f64, MapError> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(err(path, "must be positive"))
    }
}

fn geometry(v: &Value, path: &str) -> Result<LaneGeometry, MapError> {
    let g = object(v, path)?;
    let kind = string(g, "kind", path)?;
    Ok(match kind.as_str() {
        "straight" => LaneGeometry::Straight {
            start: point(g, "start", path)?,
            heading: number(g, "heading", path)?,
            length: positive(number(g, "length", path)?, &format!("{path}.length"))?,
        },
        "arc" => LaneGeometry::Arc {
            start: point(g, "start", path)?,
            heading: number(g, "heading", path)?,
            before: number(g, "before", path)?.max(0.0),
            radius: positive(number(g, "radius", path)?, &format!("{path}.radius"))?,
            angle: number(g, "angle", path)?,
            after: number(g, "after", path)?.max(0.0),
        },
        "figure8" => LaneGeometry::Figure8 {
            center: point(g, "center", path)?,
            a: positive(number(g, "a", path)?, &format!("{path}.a"))?,
        },
        other => {
            return Err(err(
                &format!("{path}.kind"),
                format!("unknown geometry kind \"{other}\" (expected straight, arc or figure8)"),
            ))
        }
    })
}

fn scheme(v: Option<&Value>, dim: usize) -> Result<TacticalScheme, MapError> {
    match v {
        None => Ok(if dim == 2 {
            TacticalScheme::lateral()
        } else {
            TacticalScheme::vertical()
        }),
        Some(Value::String(s)) if s == "passive" => Ok(TacticalScheme::Passive),
        Some(Value::String(s)) if s == "lateral" => Ok(TacticalScheme::lateral()),
        Some(Value::String(s)) if s == "vertical" => Ok(TacticalScheme::vertical()),
        Some(Value::Object(o)) => Ok(TacticalScheme::Directional {
            keep: string(o, "keep", "$.tactical")?,
            increase: string(o, "increase", "$.tactical")?,
            decrease: string(o, "decrease", "$.tactical")?,
        }),
        Some(_) => Err(err(
            "$.tactical",
            "expected \"passive\", \"lateral\", \"vertical\" or {keep, increase, decrease}",
        )),
    }
}

/// Parse a map document.
pub fn load_map(text: &str) -> Result<MapDef, MapError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| err("$", format!("invalid JSON: {e}")))?;
    MapDef::from_json(&doc)
}

impl MapDef {
    pub fn from_json(doc: &Value) -> Result<MapDef, MapError> {
        let root = object(doc, "$")?;
        let dim = field(root, "dim", "$")?
            .as_u64()
            .filter(|d| *d == 2 || *d == 3)
            .ok_or_else(|| err("$.dim", "expected 2 or 3"))? as usize;
        let name = match root.get("name") {
            Some(v) => v.as_str().ok_or_else(|| err("$.name", "expected a string"))?.to_string(),
            None => "custom".into(),
        };
        let lanes_v = field(root, "lanes", "$")?
            .as_array()
            .ok_or_else(|| err("$.lanes", "expected an array"))?;
        if lanes_v.is_empty() {
            return Err(err("$.lanes", "at least one lane is required"));
        }
        let mut lanes = Vec::new();
        for (i, l) in lanes_v.iter().enumerate() {
            let path = format!("$.lanes[{i}]");
            let o = object(l, &path)?;
            let id = string(o, "id", &path)?;
            if id.is_empty() {
                return Err(err(&format!("{path}.id"), "empty lane id"));
            }
            let geom = geometry(field(o, "geometry", &path)?, &format!("{path}.geometry"))?;
            let offset = match o.get("offset") {
                Some(_) => number(o, "offset", &path)?,
                None => 0.0,
            };
            lanes.push(Lane::new(id, geom, offset, dim));
        }
        let mut adjacent = Vec::new();
        if let Some(a) = root.get("adjacent") {
            let arr = a.as_array().ok_or_else(|| err("$.adjacent", "expected an array"))?;
            for (k, pair) in arr.iter().enumerate() {
                let path = format!("$.adjacent[{k}]");
                let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| err(&path, "expected [laneId, laneId]"))?;
                let s = |j: usize| {
                    p[j].as_str()
                        .map(str::to_string)
                        .ok_or_else(|| err(&format!("{path}[{j}]"), "expected a lane id"))
                };
                adjacent.push((s(0)?, s(1)?));
            }
        }
        let scheme = scheme(root.get("tactical"), dim)?;
        MapDef::new(name, dim, lanes, adjacent, scheme)
    }

    pub fn to_json(&self) -> Value {
        let lanes: Vec<Value> = self
            .lanes
            .iter()
            .map(|l| {
                let geometry = match &l.geometry {
                    LaneGeometry::Straight { start, heading, length } => json!({
                        "kind": "straight", "start": start, "heading": heading, "length": length
                    }),
                    LaneGeometry::Arc {
                        start,
                        heading,
                        before,
                        radius,
                        angle,
                        after,
                    } => json!({
                        "kind": "arc", "start": start, "heading": heading, "before": before,
                        "radius": radius, "angle": angle, "after": after
                    }),
                    LaneGeometry::Figure8 { center, a } => json!({"kind": "figure8", "center": center, "a": a}),
                };
                json!({"id": l.id, "geometry": geometry, "offset": l.offset})
            })
            .collect();
        let tactical = match &self.scheme {
            TacticalScheme::Passive => json!("passive"),
            TacticalScheme::Directional { keep, increase, decrease } => {
                json!({"keep": keep, "increase": increase, "decrease": decrease})
            }
        };
        json!({
            "name": self.name,
            "dim": self.dim,
            "lanes": lanes,
            "adjacent": self.adjacent.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "tactical": tactical,
        })
    }
}
