//! Continuous post operators for one agent over one decision period.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ReachError;
use crate::agent::{flow, ModePair};
use crate::map::MapDef;
use crate::numeric::{rk4_step, step_count};
use crate::scenario::{AgentAutomaton, EngineKind, RunSettings};
use crate::{HyperRect, Interval, Scalar};

/// Reachtube of one agent over `[0, δ]`: entry `k` bounds the states on
/// `[k·dt, (k+1)·dt]`; `end` bounds the states at `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTube {
    pub entries: Vec<HyperRect>,
    pub end: HyperRect,
}

/// Initial states simulated by the sample-bloat engine: corners over the
/// `cap` widest non-degenerate dimensions, the center, and the two face
/// centers of every non-degenerate dimension. Face centers keep each
/// extreme of a dimension paired with mid values of the others, which a
/// smaller box would otherwise reach through its corners alone.
pub fn sample_points(rect: &HyperRect, cap: usize) -> Vec<Vec<f64>> {
    let c = rect.center();
    let w = rect.widths();
    let mut dims: Vec<usize> = (0..rect.dim()).filter(|&i| w[i] > 0.0).collect();
    // Widest first; ties keep index order.
    dims.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let corner_dims = &dims[..dims.len().min(cap)];
    let mut out = Vec::with_capacity((1 << corner_dims.len()) + 1 + 2 * dims.len());
    for mask in 0..(1usize << corner_dims.len()) {
        let mut p = c.clone();
        for (b, &d) in corner_dims.iter().enumerate() {
            let iv = rect.get(d);
            p[d] = if mask >> b & 1 == 1 { iv.hi } else { iv.lo };
        }
        out.push(p);
    }
    if !corner_dims.is_empty() {
        out.push(c.clone());
    }
    for &d in &dims {
        for v in [rect.get(d).lo, rect.get(d).hi] {
            let mut p = c.clone();
            p[d] = v;
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn hull_of(points: &[&[f64]]) -> HyperRect {
    HyperRect::bounding(points.iter().copied()).expect("at least one sample")
}

fn bloated(r: &HyperRect, beta: f64) -> HyperRect {
    let eps: Vec<f64> = r.widths().iter().map(|w| 0.5 * beta * w).collect();
    r.bloat(&eps).expect("non-negative bloat")
}

/// Sample-bloat post: simulate the sample points, take per-step hulls and
/// widen each by `β/2` of its spread on both sides. The end set is the
/// unwidened hull of the final samples.
pub fn sample_bloat(
    agent: &AgentAutomaton,
    map: &MapDef,
    rect: &HyperRect,
    mode: &ModePair,
    settings: &RunSettings,
) -> Result<LocalTube, ReachError> {
    let samples = sample_points(rect, settings.corner_cap);
    let traces = samples
        .par_iter()
        .map(|x0| flow(agent.model.as_ref(), x0, mode, map, settings.delta, settings.dt))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ReachError::Flow {
            agent: agent.id.clone(),
            message: e.to_string(),
        })?;
    let steps = traces[0].states.len() - 1;
    let mut entries = Vec::with_capacity(steps);
    for k in 0..steps {
        let pts: Vec<&[f64]> = traces
            .iter()
            .flat_map(|t| [t.states[k].as_slice(), t.states[k + 1].as_slice()])
            .collect();
        entries.push(bloated(&hull_of(&pts), settings.bloat));
    }
    let last: Vec<&[f64]> = traces.iter().map(|t| t.last()).collect();
    Ok(LocalTube {
        entries,
        end: hull_of(&last),
    })
}

/// Envelope `[x_l(t), x_u(t)]` of the embedding system
/// `ẋ_l = d(x_l, x_u, w_l, w_u)`, `ẋ_u = d(x_u, x_l, w_u, w_l)`, one entry
/// per integration step including `t = 0`.
#[allow(clippy::too_many_arguments)]
pub fn decomposition_post<T, D>(
    x_lo: &[T],
    x_hi: &[T],
    w_lo: &[T],
    w_hi: &[T],
    d: D,
    duration: T,
    dt: T,
) -> Result<Vec<(Vec<T>, Vec<T>)>, ReachError>
where
    T: Scalar,
    D: Fn(&[T], &[T], &[T], &[T], &mut [T]),
{
    let n = x_lo.len();
    let steps = step_count(duration, dt).ok_or_else(|| ReachError::Engine("duration is not a multiple of dt".into()))?;
    let mut z: Vec<T> = x_lo.iter().chain(x_hi).copied().collect();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((x_lo.to_vec(), x_hi.to_vec()));
    let mut f = |s: &[T], ds: &mut [T]| {
        let (l, u) = s.split_at(n);
        let (dl, du) = ds.split_at_mut(n);
        d(l, u, w_lo, w_hi, dl);
        d(u, l, w_hi, w_lo, du);
    };
    for step in 1..=steps {
        rk4_step(&mut f, &mut z, dt);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(ReachError::Engine(format!("non-finite envelope at step {step}")));
        }
        out.push((z[..n].to_vec(), z[n..].to_vec()));
    }
    Ok(out)
}

fn ordered(lo: &[f64], hi: &[f64]) -> HyperRect {
    HyperRect::new(
        lo.iter()
            .zip(hi)
            .map(|(a, b)| Interval {
                lo: a.min(*b),
                hi: a.max(*b),
            })
            .collect(),
    )
    .expect("finite envelope")
}

/// Mixed-monotone post through the agent's decomposition function.
pub fn mixed_monotone(
    agent: &AgentAutomaton,
    rect: &HyperRect,
    mode: &ModePair,
    settings: &RunSettings,
) -> Result<LocalTube, ReachError> {
    let dec = agent.model.decomposition().ok_or_else(|| {
        ReachError::Engine(format!(
            "agent {}: {} dynamics have no decomposition function",
            agent.id,
            agent.model.kind()
        ))
    })?;
    let (w_lo, w_hi) = dec.disturbance();
    let env = decomposition_post(
        &rect.lo(),
        &rect.hi(),
        &w_lo,
        &w_hi,
        |x, xh, w, wh, out| dec.decompose(x, xh, w, wh, mode, out),
        settings.delta,
        settings.dt,
    )?;
    let rects: Vec<HyperRect> = env.iter().map(|(l, u)| ordered(l, u)).collect();
    let entries = rects.windows(2).map(|w| w[0].hull(&w[1]).expect("same dimension")).collect();
    Ok(LocalTube {
        entries,
        end: rects.last().expect("at least the initial envelope").clone(),
    })
}

/// Dispatch on the configured engine.
pub fn post_cont(
    agent: &AgentAutomaton,
    map: &MapDef,
    rect: &HyperRect,
    mode: &ModePair,
    settings: &RunSettings,
) -> Result<LocalTube, ReachError> {
    match settings.engine {
        EngineKind::SampleBloat => sample_bloat(agent, map, rect, mode, settings),
        EngineKind::MixedMonotone => mixed_monotone(agent, rect, mode, settings),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_of_point_rect() {
        let r = HyperRect::point(&[1.0, 2.0]).unwrap();
        assert_eq!(sample_points(&r, 5), vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn samples_cap_corners() {
        let r = HyperRect::from_bounds(&[0.0; 7], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        let s = sample_points(&r, 5);
        // 32 corners, the center, two face centers per dim.
        assert_eq!(s.len(), 32 + 1 + 14);
        for p in &s {
            assert!(r.contains_point(p));
        }
        // Narrow dims 0 and 1 sit at the center in every corner sample.
        assert!(s[..32].iter().all(|p| p[0] == 0.5 && p[1] == 1.0));
    }

    fn lotka_d(x: &[f64], xh: &[f64], w: &[f64], _: &[f64], out: &mut [f64]) {
        crate::agent::LotkaModel::d(x, xh, w, out);
    }

    #[test]
    fn degenerate_embedding_has_zero_width() {
        let env = decomposition_post(&[1.0, 1.0], &[1.0, 1.0], &[0.0; 2], &[0.0; 2], lotka_d, 5.0, 0.01).unwrap();
        for (l, u) in &env {
            assert_eq!(l, u);
            assert!((l[0] - 1.0).abs() < 1e-9 && (l[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn embedding_works_in_f32() {
        let d = |x: &[f32], xh: &[f32], w: &[f32], _: &[f32], out: &mut [f32]| {
            out[0] = x[0] * (1.1 + w[0] - x[0] - 0.1 * xh[1]);
            out[1] = x[1] * (4.0 + w[1] - 3.0 * xh[0] - x[1]);
        };
        let env = decomposition_post(&[0.3f32, 0.3], &[2.0, 2.0], &[-0.1; 2], &[0.1; 2], d, 1.0, 0.01).unwrap();
        let (l, u) = env.last().unwrap();
        assert!(l[0] <= u[0] && l[1] <= u[1]);
    }
}
