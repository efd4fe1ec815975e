//! Files written next to a run: reachtube CSV, SVG projections and the report.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use versekit::incremental::CacheStats;
use versekit::reach::{Tree, Violation};

use crate::error::CliError;

const COLORS: [&str; 8] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// One row per tube entry: node, agent, time bounds, then lo/hi per field.
pub fn write_csv(tree: &Tree, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let fields = tree.fields.first().cloned().unwrap_or_default();
    let mut header = vec!["node_id".to_string(), "agent".into(), "t_lo".into(), "t_hi".into()];
    for f in &fields {
        header.push(format!("{f}_lo"));
        header.push(format!("{f}_hi"));
    }
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for n in &tree.nodes {
        for (a, tube) in n.tubes.iter().enumerate() {
            for e in tube {
                let mut row = vec![n.id.to_string(), tree.agents[a].clone(), e.0.to_string(), e.1.to_string()];
                for (lo, hi) in e.2.iter().zip(&e.3) {
                    row.push(lo.to_string());
                    row.push(hi.to_string());
                }
                w.write_record(&row).map_err(|e| CliError::io(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Axis of a projection: a state field, or `t` for time.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Time,
    Field(usize),
}

pub fn parse_axis(tree: &Tree, name: &str) -> Result<Axis, CliError> {
    if name == "t" {
        return Ok(Axis::Time);
    }
    let fields = tree.fields.first().map(|f| f.as_slice()).unwrap_or(&[]);
    fields
        .iter()
        .position(|f| f == name)
        .map(Axis::Field)
        .ok_or_else(|| CliError::new("E_USAGE", format!("unknown dimension `{name}` (expected t or one of {})", fields.join(", "))))
}

/// Projection shown by default: the first two fields, or time against the
/// only field.
pub fn default_dims(tree: &Tree) -> Vec<String> {
    let f = tree.fields.first().cloned().unwrap_or_default();
    match f.len() {
        0 => vec!["t".into(), "t".into()],
        1 => vec!["t".into(), f[0].clone()],
        _ => vec![f[0].clone(), f[1].clone()],
    }
}

fn range(e: &versekit::reach::TubeEntry, axis: &Axis) -> (f64, f64) {
    match axis {
        Axis::Time => (e.0, e.1),
        Axis::Field(i) => (e.2[*i], e.3[*i]),
    }
}

/// Project every tube entry onto two axes. Boxes for reachtubes, polylines
/// for simulations.
pub fn render_svg(tree: &Tree, ax: &Axis, ay: &Axis, labels: (&str, &str)) -> String {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for n in &tree.nodes {
        for e in n.tubes.iter().flatten() {
            let (a, b) = range(e, ax);
            let (c, d) = range(e, ay);
            x_lo = x_lo.min(a);
            x_hi = x_hi.max(b);
            y_lo = y_lo.min(c);
            y_hi = y_hi.max(d);
        }
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad_x = ((x_hi - x_lo) * 0.05).max(1e-3);
    let pad_y = ((y_hi - y_lo) * 0.05).max(1e-3);
    let (x0, x1, y0, y1) = (x_lo - pad_x, x_hi + pad_x, y_lo - pad_y, y_hi + pad_y);
    let (w, h) = (800.0, 600.0);
    let sx = |x: f64| (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| h - (y - y0) / (y1 - y0) * h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
        h + 40.0,
        h + 40.0
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white" stroke="black"/>"#);
    for n in &tree.nodes {
        for (a, tube) in n.tubes.iter().enumerate() {
            let color = COLORS[a % COLORS.len()];
            if tree.kind == versekit::reach::RunKind::Simulate {
                let pts: Vec<String> = tube
                    .iter()
                    .map(|e| format!("{:.3},{:.3}", sx(range(e, ax).0), sy(range(e, ay).0)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            } else {
                for e in tube {
                    let (a0, a1) = range(e, ax);
                    let (b0, b1) = range(e, ay);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="0.3"/>"#,
                        sx(a0),
                        sy(b1),
                        (sx(a1) - sx(a0)).max(0.2),
                        (sy(b0) - sy(b1)).max(0.2)
                    );
                }
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}" font-family="monospace" font-size="12">{}: [{x_lo:.3}, {x_hi:.3}]  {}: [{y_lo:.3}, {y_hi:.3}]</text>"#,
        h + 16.0,
        labels.0,
        labels.1
    );
    for (a, id) in tree.agents.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" fill="{}">{id}</text>"#,
            4 + 80 * a,
            h + 34.0,
            COLORS[a % COLORS.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Serialize)]
pub struct CacheReport {
    pub mode: &'static str,
    pub stats: CacheStats,
    pub guard_hit_rate: f64,
    pub flow_hit_rate: f64,
    pub guard_entries: usize,
    pub flow_entries: usize,
}

#[derive(Debug, Serialize)]
pub struct NodeError {
    pub node: usize,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub scenario: String,
    pub engine: Option<String>,
    pub seed: Option<u64>,
    pub nodes: usize,
    pub transitions: usize,
    pub transition_branches: usize,
    pub complete: bool,
    pub safe: bool,
    pub violations: Vec<Violation>,
    pub errors: Vec<NodeError>,
    pub cache: Option<CacheReport>,
}

impl Report {
    pub fn new(command: &'static str, scenario: String, tree: &Tree) -> Report {
        let violations = tree.violations();
        let errors: Vec<NodeError> = tree
            .errors()
            .into_iter()
            .map(|(node, m)| NodeError {
                node,
                message: m.to_string(),
            })
            .collect();
        Report {
            command,
            scenario,
            engine: tree.engine.map(|e| e.to_string()),
            seed: None,
            nodes: tree.nodes.len(),
            transitions: tree.transition_count(),
            transition_branches: tree.transition_branches().len(),
            complete: tree.complete,
            safe: violations.is_empty() && errors.is_empty() && tree.complete,
            violations,
            errors,
            cache: None,
        }
    }
}
