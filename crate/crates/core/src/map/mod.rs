//! Maps: track modes, lane geometry, the track lookup and the
//! track-mode transition function.

mod curve;
mod json;

use std::collections::HashMap;

pub use curve::{LaneCurve, Piece, Projection, P2};
pub use json::load_map;

use crate::extract::TrackQuery;

/// Longitudinal lead of a lane-change curve on planar maps (m).
pub const LANE_CHANGE_LEAD: f64 = 15.0;
/// Length of the lane piece returned for persistent modes.
const TRACK_SPAN: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("unknown track mode `{0}`")]
    UnknownMode(String),
    #[error("map has no transition for ({track}, {from}, {to})")]
    Unsupported { track: String, from: String, to: String },
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("map {0}: import-only map not bundled")]
    ImportOnly(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("position has {got} coordinates, map needs {want}")]
    Position { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LaneGeometry {
    /// Heading in degrees.
    Straight { start: P2, heading: f64, length: f64 },
    /// Straight, circular arc (`angle` degrees, positive turns left), straight.
    Arc {
        start: P2,
        heading: f64,
        before: f64,
        radius: f64,
        angle: f64,
        after: f64,
    },
    Figure8 { center: P2, a: f64 },
}

impl LaneGeometry {
    /// Horizontal curve shifted `lateral` to the left.
    pub fn curve(&self, lateral: f64) -> LaneCurve {
        match *self {
            LaneGeometry::Straight { start, heading, length } => {
                let d = unit(heading);
                let n = curve::left(d);
                LaneCurve::chain(vec![Piece::Line {
                    p0: [start[0] + lateral * n[0], start[1] + lateral * n[1]],
                    dir: d,
                    len: length,
                }])
            }
            LaneGeometry::Arc {
                start,
                heading,
                before,
                radius,
                angle,
                after,
            } => {
                let d = unit(heading);
                let n = curve::left(d);
                let sg = if angle >= 0.0 { 1.0 } else { -1.0 };
                let bend = [start[0] + before * d[0], start[1] + before * d[1]];
                let center = [bend[0] + sg * radius * n[0], bend[1] + sg * radius * n[1]];
                let a0 = (-sg * n[1]).atan2(-sg * n[0]);
                let sweep = angle.to_radians();
                let r = radius - sg * lateral;
                let d2 = unit(heading + angle);
                let end = [
                    center[0] + r * (a0 + sweep).cos(),
                    center[1] + r * (a0 + sweep).sin(),
                ];
                LaneCurve::chain(vec![
                    Piece::Line {
                        p0: [start[0] + lateral * n[0], start[1] + lateral * n[1]],
                        dir: d,
                        len: before,
                    },
                    Piece::Arc { center, radius: r, a0, sweep },
                    Piece::Line {
                        p0: end,
                        dir: d2,
                        len: after,
                    },
                ])
            }
            LaneGeometry::Figure8 { center, a } => LaneCurve::Figure8 {
                center,
                a,
                offset: lateral,
            },
        }
    }
}

fn unit(deg: f64) -> P2 {
    let r = deg.to_radians();
    [r.cos(), r.sin()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub id: String,
    pub geometry: LaneGeometry,
    /// Lateral shift (planar maps) or layer height (3-d maps).
    pub offset: f64,
    curve: LaneCurve,
}

impl Lane {
    pub fn new(id: impl Into<String>, geometry: LaneGeometry, offset: f64, dim: usize) -> Lane {
        let curve = geometry.curve(if dim == 2 { offset } else { 0.0 });
        Lane {
            id: id.into(),
            geometry,
            offset,
            curve,
        }
    }

    pub fn curve(&self) -> &LaneCurve {
        &self.curve
    }
}

/// Names of the tactical modes a map understands.
#[derive(Debug, Clone, PartialEq)]
pub enum TacticalScheme {
    /// Every tactical change keeps the current track.
    Passive,
    /// `increase`/`decrease` move to the adjacent lane with the larger or
    /// smaller offset; `keep` settles on the destination lane.
    Directional { keep: String, increase: String, decrease: String },
}

impl TacticalScheme {
    pub fn lateral() -> TacticalScheme {
        TacticalScheme::Directional {
            keep: "Normal".into(),
            increase: "SwitchLeft".into(),
            decrease: "SwitchRight".into(),
        }
    }

    pub fn vertical() -> TacticalScheme {
        TacticalScheme::Directional {
            keep: "Normal".into(),
            increase: "MoveUp".into(),
            decrease: "MoveDown".into(),
        }
    }

    pub fn knows(&self, tactical: &str) -> bool {
        match self {
            TacticalScheme::Passive => true,
            TacticalScheme::Directional { keep, increase, decrease } => {
                tactical == keep || tactical == increase || tactical == decrease
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeInfo {
    Lane(usize),
    Transition(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapDef {
    pub name: String,
    pub dim: usize,
    pub lanes: Vec<Lane>,
    pub adjacent: Vec<(String, String)>,
    pub scheme: TacticalScheme,
    modes: Vec<String>,
    index: HashMap<String, ModeInfo>,
}

/// Name of the transition mode from lane `src` to lane `dst`.
pub fn transition_name(src: &str, dst: &str) -> String {
    let short = |s: &str| s.strip_prefix('T').filter(|r| !r.is_empty()).unwrap_or(s).to_string();
    format!("M{}{}", short(src), short(dst))
}

/// What `trackFor` returns: a curve sampled on s ∈ [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Track {
    Lane {
        curve: LaneCurve,
        /// Fixed height for 3-d maps.
        z: Option<f64>,
        from: f64,
        to: f64,
    },
    /// Cubic Hermite spline between two workspace points.
    Spline {
        p0: Vec<f64>,
        p1: Vec<f64>,
        m0: Vec<f64>,
        m1: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackKind {
    Straight,
    Arc,
    Figure8,
    Spline,
}

impl Track {
    pub fn kind(&self) -> TrackKind {
        match self {
            Track::Spline { .. } => TrackKind::Spline,
            Track::Lane { curve, from, .. } => match curve {
                LaneCurve::Figure8 { .. } => TrackKind::Figure8,
                LaneCurve::Chain { pieces, starts } => {
                    let i = starts.partition_point(|s| *s <= *from).saturating_sub(1).min(pieces.len() - 1);
                    match pieces[i] {
                        Piece::Line { .. } => TrackKind::Straight,
                        Piece::Arc { .. } => TrackKind::Arc,
                    }
                }
            },
        }
    }

    pub fn sample(&self, s: f64) -> Vec<f64> {
        match self {
            Track::Lane { curve, z, from, to } => {
                let (p, _) = curve.at(from + (to - from) * s);
                let mut v = p.to_vec();
                v.extend(z);
                v
            }
            Track::Spline { p0, p1, m0, m1 } => {
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                (0..p0.len())
                    .map(|i| h00 * p0[i] + h10 * m0[i] + h01 * p1[i] + h11 * m1[i])
                    .collect()
            }
        }
    }
}

/// Point to steer toward on a lane, with the lane's direction there.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub point: Vec<f64>,
    pub tangent: Vec<f64>,
}

impl MapDef {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        lanes: Vec<Lane>,
        adjacent: Vec<(String, String)>,
        scheme: TacticalScheme,
    ) -> Result<MapDef, MapError> {
        if dim != 2 && dim != 3 {
            return Err(MapError::Schema {
                path: "$.dim".into(),
                message: format!("dimension must be 2 or 3, got {dim}"),
            });
        }
        let mut index = HashMap::new();
        let mut modes = Vec::new();
        for (i, l) in lanes.iter().enumerate() {
            if index.insert(l.id.clone(), ModeInfo::Lane(i)).is_some() {
                return Err(MapError::Schema {
                    path: format!("$.lanes[{i}].id"),
                    message: format!("duplicate lane `{}`", l.id),
                });
            }
            modes.push(l.id.clone());
        }
        for (k, (a, b)) in adjacent.iter().enumerate() {
            let find = |id: &str, side: usize| match index.get(id) {
                Some(ModeInfo::Lane(i)) => Ok(*i),
                _ => Err(MapError::Schema {
                    path: format!("$.adjacent[{k}][{side}]"),
                    message: format!("unknown lane `{id}`"),
                }),
            };
            let (i, j) = (find(a, 0)?, find(b, 1)?);
            if i == j {
                return Err(MapError::Schema {
                    path: format!("$.adjacent[{k}]"),
                    message: "a lane cannot be adjacent to itself".into(),
                });
            }
            for (s, d) in [(i, j), (j, i)] {
                let name = transition_name(&lanes[s].id, &lanes[d].id);
                if index.contains_key(&name) {
                    continue;
                }
                index.insert(name.clone(), ModeInfo::Transition(s, d));
                modes.push(name);
            }
        }
        Ok(MapDef {
            name: name.into(),
            dim,
            lanes,
            adjacent,
            scheme,
            modes,
            index,
        })
    }

    /// The track-mode set L: lanes first, then transitions.
    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn mode_info(&self, mode: &str) -> Result<ModeInfo, MapError> {
        self.index.get(mode).copied().ok_or_else(|| MapError::UnknownMode(mode.into()))
    }

    pub fn is_persistent(&self, mode: &str) -> bool {
        matches!(self.index.get(mode), Some(ModeInfo::Lane(_)))
    }

    /// Lane the agent should end up on in `mode`.
    pub fn target_lane(&self, mode: &str) -> Result<&Lane, MapError> {
        Ok(match self.mode_info(mode)? {
            ModeInfo::Lane(i) | ModeInfo::Transition(_, i) => &self.lanes[i],
        })
    }

    /// Transition function h.
    pub fn next_track_mode(&self, track: &str, from: &str, to: &str) -> Result<String, MapError> {
        let info = self.mode_info(track)?;
        let unsupported = || MapError::Unsupported {
            track: track.into(),
            from: from.into(),
            to: to.into(),
        };
        let TacticalScheme::Directional { keep, increase, decrease } = &self.scheme else {
            return Ok(track.into());
        };
        if from == to && self.scheme.knows(to) {
            return Ok(track.into());
        }
        if to == keep {
            let lane = match info {
                ModeInfo::Lane(i) | ModeInfo::Transition(_, i) => i,
            };
            return Ok(self.lanes[lane].id.clone());
        }
        let up = if to == increase {
            true
        } else if to == decrease {
            false
        } else {
            return Err(unsupported());
        };
        let ModeInfo::Lane(i) = info else {
            return Err(unsupported());
        };
        if from != keep {
            return Err(unsupported());
        }
        let here = self.lanes[i].offset;
        let mut best: Option<(f64, usize)> = None;
        for (a, b) in &self.adjacent {
            let other = if *a == self.lanes[i].id {
                b
            } else if *b == self.lanes[i].id {
                a
            } else {
                continue;
            };
            let Ok(ModeInfo::Lane(j)) = self.mode_info(other) else {
                continue;
            };
            let gap = self.lanes[j].offset - here;
            if (up && gap > 0.0) || (!up && gap < 0.0) {
                if best.is_none_or(|(g, _)| gap.abs() < g) {
                    best = Some((gap.abs(), j));
                }
            }
        }
        match best {
            Some((_, j)) => Ok(transition_name(&self.lanes[i].id, &self.lanes[j].id)),
            None => Err(unsupported()),
        }
    }

    fn horizontal(&self, p: &[f64]) -> Result<P2, MapError> {
        if p.len() != self.dim {
            return Err(MapError::Position {
                got: p.len(),
                want: self.dim,
            });
        }
        Ok([p[0], p[1]])
    }

    fn lane_point(&self, lane: &Lane, p: P2) -> Vec<f64> {
        let mut v = p.to_vec();
        if self.dim == 3 {
            v.push(lane.offset);
        }
        v
    }

    /// Closest point of the lane that `mode` leads to, plus its unit
    /// tangent. `heading` disambiguates self-crossing lanes.
    pub fn reference(&self, mode: &str, pos: &[f64], heading: Option<P2>) -> Result<Reference, MapError> {
        let lane = self.target_lane(mode)?;
        let pr = lane.curve.project(self.horizontal(pos)?, heading);
        let mut tangent = pr.tangent.to_vec();
        if self.dim == 3 {
            tangent.push(0.0);
        }
        Ok(Reference {
            point: self.lane_point(lane, pr.point),
            tangent,
        })
    }

    /// Track lookup g.
    pub fn track_for(&self, pos: &[f64], mode: &str) -> Result<Track, MapError> {
        let info = self.mode_info(mode)?;
        let h = self.horizontal(pos)?;
        match info {
            ModeInfo::Lane(i) => {
                let lane = &self.lanes[i];
                let pr = lane.curve.project(h, None);
                Ok(Track::Lane {
                    curve: lane.curve.clone(),
                    z: (self.dim == 3).then_some(lane.offset),
                    from: pr.param,
                    to: lane.curve.advance(pr.param, TRACK_SPAN),
                })
            }
            ModeInfo::Transition(s, d) => {
                let (src, dst) = (&self.lanes[s], &self.lanes[d]);
                let a = src.curve.project(h, None);
                let p0 = self.lane_point(src, a.point);
                let (p1, t1) = if self.dim == 2 {
                    let b = dst.curve.project(a.point, Some(a.tangent));
                    let param = dst.curve.advance(b.param, LANE_CHANGE_LEAD);
                    let (q, t) = dst.curve.at(param);
                    (q.to_vec(), t.to_vec())
                } else {
                    let b = dst.curve.project(a.point, Some(a.tangent));
                    (self.lane_point(dst, b.point), vec![])
                };
                let (m0, m1) = if self.dim == 2 {
                    let len = p0.iter().zip(&p1).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                    (
                        a.tangent.iter().map(|t| t * len).collect(),
                        t1.iter().map(|t| t * len).collect(),
                    )
                } else {
                    let d: Vec<f64> = p1.iter().zip(&p0).map(|(x, y)| x - y).collect();
                    (d.clone(), d)
                };
                Ok(Track::Spline { p0, p1, m0, m1 })
            }
        }
    }

    /// Distance from a workspace point to a lane.
    pub fn distance_to_lane(&self, lane: &str, pos: &[f64]) -> Result<f64, MapError> {
        let ModeInfo::Lane(i) = self.mode_info(lane)? else {
            return Err(MapError::UnknownMode(lane.into()));
        };
        let l = &self.lanes[i];
        let pr = l.curve.project(self.horizontal(pos)?, None);
        let q = self.lane_point(l, pr.point);
        Ok(q.iter().zip(pos).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }
}

impl TrackQuery for MapDef {
    fn track_height(&self, mode: &str) -> Option<f64> {
        self.target_lane(mode).ok().map(|l| l.offset)
    }
}

fn parallel_straight(name: &str, offsets: &[f64]) -> MapDef {
    let geom = LaneGeometry::Straight {
        start: [-100.0, 0.0],
        heading: 0.0,
        length: 400.0,
    };
    stacked(name, 2, geom, offsets, TacticalScheme::lateral())
}

fn stacked(name: &str, dim: usize, geom: LaneGeometry, offsets: &[f64], scheme: TacticalScheme) -> MapDef {
    let lanes: Vec<Lane> = offsets
        .iter()
        .enumerate()
        .map(|(i, o)| Lane::new(format!("T{i}"), geom.clone(), *o, dim))
        .collect();
    let adjacent = (1..lanes.len()).map(|i| (lanes[i - 1].id.clone(), lanes[i].id.clone())).collect();
    MapDef::new(name, dim, lanes, adjacent, scheme).expect("built-in maps are valid")
}

/// Maps bundled with the library.
pub fn builtin_map(name: &str) -> Result<MapDef, MapError> {
    Ok(match name {
        "M1" => parallel_straight("M1", &[3.0, 0.0, -3.0]),
        "M2" => parallel_straight("M2", &[3.0, 0.0, -3.0, -6.0, -9.0]),
        "M3" => stacked(
            "M3",
            2,
            LaneGeometry::Arc {
                start: [-100.0, 0.0],
                heading: 0.0,
                before: 160.0,
                radius: 40.0,
                angle: 90.0,
                after: 200.0,
            },
            &[3.0, 0.0, -3.0],
            TacticalScheme::lateral(),
        ),
        "M4" => return Err(MapError::ImportOnly(name.into())),
        "M5" => stacked(
            "M5",
            3,
            LaneGeometry::Straight {
                start: [-100.0, 0.0],
                heading: 0.0,
                length: 400.0,
            },
            &[3.0, 2.0, 1.0],
            TacticalScheme::vertical(),
        ),
        "M6" => stacked(
            "M6",
            3,
            LaneGeometry::Figure8 {
                center: [0.0, 0.0],
                a: 20.0,
            },
            &[3.0, 2.0, 1.0],
            TacticalScheme::vertical(),
        ),
        _ => return Err(MapError::UnknownMap(name.into())),
    })
}

/// Polyline of a lane for plotting, in workspace coordinates.
pub fn lane_polyline(map: &MapDef, lane: &Lane, n: usize) -> Vec<Vec<f64>> {
    let (a, b) = lane.curve.span();
    (0..=n)
        .map(|i| {
            let (p, _) = lane.curve.at(a + (b - a) * i as f64 / n as f64);
            map.lane_point(lane, p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn m1_modes() {
        let m = builtin_map("M1").unwrap();
        for name in ["T0", "T1", "T2", "M01", "M10", "M12", "M21"] {
            assert!(m.modes().iter().any(|x| x == name), "{name}");
        }
        assert_eq!(m.modes().len(), 7);
        assert_eq!(m.dim, 2);
    }

    #[test]
    fn m6_is_three_dimensional() {
        assert_eq!(builtin_map("M6").unwrap().dim, 3);
    }

    #[test]
    fn m4_is_not_bundled() {
        let e = builtin_map("M4").unwrap_err();
        assert!(e.to_string().contains("import-only map not bundled"));
    }

    #[test]
    fn transition_function_examples() {
        let m = builtin_map("M6").unwrap();
        assert_eq!(m.next_track_mode("T1", "Normal", "MoveUp").unwrap(), "M10");
        assert_eq!(m.next_track_mode("T0", "Normal", "Normal").unwrap(), "T0");
        assert_eq!(m.next_track_mode("M10", "MoveUp", "Normal").unwrap(), "T0");
        assert_eq!(m.next_track_mode("T1", "Normal", "MoveDown").unwrap(), "M12");
        assert!(m.next_track_mode("T0", "Normal", "MoveUp").is_err());
        assert!(m.next_track_mode("T1", "Normal", "SwitchLeft").is_err());
        let m1 = builtin_map("M1").unwrap();
        assert_eq!(m1.next_track_mode("T1", "Normal", "SwitchLeft").unwrap(), "M10");
        assert_eq!(m1.next_track_mode("T1", "Normal", "SwitchRight").unwrap(), "M12");
    }

    #[test]
    fn staying_keeps_persistent_track() {
        for name in ["M1", "M2", "M3", "M5", "M6"] {
            let m = builtin_map(name).unwrap();
            let TacticalScheme::Directional { keep, increase, decrease } = &m.scheme else {
                unreachable!()
            };
            for l in m.modes().iter().filter(|l| m.is_persistent(l)) {
                for p in [keep, increase, decrease] {
                    assert_eq!(&m.next_track_mode(l, p, p).unwrap(), l);
                }
            }
        }
    }

    #[test]
    fn unknown_mode_errors() {
        let m = builtin_map("M1").unwrap();
        assert_eq!(m.track_for(&[0.0, 0.0], "T9").unwrap_err(), MapError::UnknownMode("T9".into()));
    }

    #[test]
    fn straight_track_along_lane() {
        let m = builtin_map("M1").unwrap();
        let t = m.track_for(&[0.0, 0.0], "T1").unwrap();
        assert_eq!(t.kind(), TrackKind::Straight);
        assert!(dist(&t.sample(0.0), &[0.0, 0.0]) < 1e-12);
        let end = t.sample(1.0);
        assert!((end[0] - 50.0).abs() < 1e-9 && end[1].abs() < 1e-12);
    }

    #[test]
    fn ascending_transition_on_figure8() {
        let m = builtin_map("M6").unwrap();
        let t = m.track_for(&[20.0, 0.0, 2.0], "M10").unwrap();
        assert_eq!(t.kind(), TrackKind::Spline);
        let (a, b) = (t.sample(0.0), t.sample(1.0));
        assert!(dist(&a, &[20.0, 0.0, 2.0]) < 1e-6);
        assert!((b[2] - 3.0).abs() < 1e-12);
        assert!(m.distance_to_lane("T0", &b).unwrap() < 1e-6);
        // Monotone climb.
        let zs: Vec<f64> = (0..=10).map(|i| t.sample(i as f64 / 10.0)[2]).collect();
        assert!(zs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn lane_change_ends_on_destination() {
        for name in ["M1", "M3"] {
            let m = builtin_map(name).unwrap();
            for (x, y, mode) in [(0.0, 0.3, "M10"), (70.0, 0.0, "M12"), (55.0, 3.0, "M01")] {
                let t = m.track_for(&[x, y], mode).unwrap();
                let dst = m.target_lane(mode).unwrap().id.clone();
                assert!(m.distance_to_lane(&dst, &t.sample(1.0)).unwrap() < 1e-6, "{name} {mode}");
                let src = match m.mode_info(mode).unwrap() {
                    ModeInfo::Transition(s, _) => m.lanes[s].id.clone(),
                    _ => unreachable!(),
                };
                assert!(m.distance_to_lane(&src, &t.sample(0.0)).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn arc_lanes_are_concentric() {
        let m = builtin_map("M3").unwrap();
        // On the arc the lanes stay 3 m apart.
        let mid = m.lanes[1].curve().at(160.0 + 40.0 * PI / 4.0).0;
        let d0 = m.distance_to_lane("T0", &mid).unwrap();
        let d2 = m.distance_to_lane("T2", &mid).unwrap();
        assert!((d0 - 3.0).abs() < 1e-9 && (d2 - 3.0).abs() < 1e-9, "{d0} {d2}");
        let t = m.track_for(&mid, "T1").unwrap();
        assert_eq!(t.kind(), TrackKind::Arc);
    }

    #[test]
    fn track_height_of_modes() {
        let m = builtin_map("M5").unwrap();
        assert_eq!(m.track_height("T0"), Some(3.0));
        assert_eq!(m.track_height("M21"), Some(2.0));
        assert_eq!(m.track_height("X"), None);
    }
}
