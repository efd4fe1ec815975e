//! Lane reference curves in the horizontal plane.

use std::f64::consts::{PI, TAU};

pub type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: P2) -> f64 {
    dot(a, a).sqrt()
}

/// Left-hand normal of a unit direction.
pub fn left(d: P2) -> P2 {
    [-d[1], d[0]]
}

#[derive(Clone, Debug, PartialEq)]
pub enum Piece {
    Line { p0: P2, dir: P2, len: f64 },
    /// Arc starting at angle `a0` around `center`; positive sweep turns left.
    Arc { center: P2, radius: f64, a0: f64, sweep: f64 },
}

impl Piece {
    pub fn len(&self) -> f64 {
        match self {
            Piece::Line { len, .. } => *len,
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn at(&self, s: f64) -> (P2, P2) {
        match self {
            Piece::Line { p0, dir, .. } => ([p0[0] + s * dir[0], p0[1] + s * dir[1]], *dir),
            Piece::Arc { center, radius, a0, sweep } => {
                let sg = sweep.signum();
                let a = a0 + sg * s / radius;
                let p = [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
                // Tangent of a left (ccw) turn is the radial direction rotated +90°.
                let t = [-sg * a.sin(), sg * a.cos()];
                (p, t)
            }
        }
    }

    /// Local arc length of the closest point; lines may extend past
    /// their ends when `extend_back` / `extend_fwd` are set.
    fn project(&self, p: P2, extend_back: bool, extend_fwd: bool) -> f64 {
        let total = self.len();
        let s = match self {
            Piece::Line { p0, dir, .. } => dot(sub(p, *p0), *dir),
            Piece::Arc { center, radius, a0, sweep } => {
                let v = sub(p, *center);
                if norm(v) == 0.0 {
                    0.0
                } else {
                    let ang = v[1].atan2(v[0]);
                    let sg = sweep.signum();
                    // Angle travelled from the start, wrapped to [-π, π) around the arc middle.
                    let mid = sweep.abs() / 2.0;
                    let mut d = sg * (ang - a0) - mid;
                    d = (d + PI).rem_euclid(TAU) - PI;
                    (d + mid) * radius
                }
            }
        };
        let lo = if extend_back { f64::NEG_INFINITY } else { 0.0 };
        let hi = if extend_fwd { f64::INFINITY } else { total };
        s.clamp(lo, hi)
    }
}

/// A lane's horizontal reference curve, parameterized by arc length for
/// chains and by angle for the closed figure-eight.
#[derive(Clone, Debug, PartialEq)]
pub enum LaneCurve {
    /// Consecutive pieces; the first and last extend indefinitely.
    Chain { pieces: Vec<Piece>, starts: Vec<f64> },
    /// Lemniscate of Gerono `(a cos t, a sin t cos t)`, shifted by `offset`
    /// along its left normal.
    Figure8 { center: P2, a: f64, offset: f64 },
}

/// Closest point of a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub param: f64,
    pub point: P2,
    pub tangent: P2,
}

const FIG8_COARSE: usize = 720;

impl LaneCurve {
    pub fn chain(pieces: Vec<Piece>) -> LaneCurve {
        let mut starts = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            starts.push(acc);
            acc += p.len();
        }
        LaneCurve::Chain { pieces, starts }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, LaneCurve::Figure8 { .. })
    }

    /// Parameter range for plotting: arc length of a chain, one period of
    /// the figure-eight.
    pub fn span(&self) -> (f64, f64) {
        match self {
            LaneCurve::Chain { pieces, starts } => (0.0, starts.last().unwrap() + pieces.last().unwrap().len()),
            LaneCurve::Figure8 { .. } => (0.0, TAU),
        }
    }

    pub fn at(&self, param: f64) -> (P2, P2) {
        match self {
            LaneCurve::Chain { pieces, starts } => {
                let mut i = starts.partition_point(|s| *s <= param).saturating_sub(1);
                i = i.min(pieces.len() - 1);
                pieces[i].at(param - starts[i])
            }
            LaneCurve::Figure8 { center, a, offset } => {
                let (st, ct) = param.sin_cos();
                let d = [-a * st, a * (ct * ct - st * st)];
                let n = norm(d);
                let t = if n > 0.0 { [d[0] / n, d[1] / n] } else { [1.0, 0.0] };
                let l = left(t);
                let p = [center[0] + a * ct + offset * l[0], center[1] + a * st * ct + offset * l[1]];
                (p, t)
            }
        }
    }

    /// Closest point to `p`. For the figure-eight, `hint` (a direction of
    /// travel) breaks ties near the self-crossing.
    pub fn project(&self, p: P2, hint: Option<P2>) -> Projection {
        match self {
            LaneCurve::Chain { pieces, starts } => {
                let n = pieces.len();
                let mut best = (f64::INFINITY, 0.0);
                for (i, pc) in pieces.iter().enumerate() {
                    let s = pc.project(p, i == 0, i == n - 1);
                    let (q, _) = pc.at(s);
                    let d = norm(sub(p, q));
                    if d < best.0 {
                        best = (d, starts[i] + s);
                    }
                }
                let (point, tangent) = self.at(best.1);
                Projection {
                    param: best.1,
                    point,
                    tangent,
                }
            }
            LaneCurve::Figure8 { .. } => self.project_closed(p, hint),
        }
    }

    fn project_closed(&self, p: P2, hint: Option<P2>) -> Projection {
        let hint = hint.and_then(|h| {
            let n = norm(h);
            (n > 1e-9).then(|| [h[0] / n, h[1] / n])
        });
        let cost = |t: f64| {
            let (q, tan) = self.at(t);
            let d2 = dot(sub(p, q), sub(p, q));
            match hint {
                // Penalize points whose direction opposes travel.
                Some(h) => d2 + 4.0 * (1.0 - dot(h, tan)),
                None => d2,
            }
        };
        let step = TAU / FIG8_COARSE as f64;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..FIG8_COARSE {
            let t = i as f64 * step;
            let c = cost(t);
            if c < best.0 {
                best = (c, t);
            }
        }
        // Golden-section refinement on the bracket around the coarse minimum.
        let (mut lo, mut hi) = (best.1 - step, best.1 + step);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (cost(x1), cost(x2));
        for _ in 0..60 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = cost(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = cost(x2);
            }
        }
        let t = ((lo + hi) / 2.0).rem_euclid(TAU);
        let (point, tangent) = self.at(t);
        Projection {
            param: t,
            point,
            tangent,
        }
    }

    /// Parameter reached by travelling arc length `ds` forward from `param`.
    pub fn advance(&self, param: f64, ds: f64) -> f64 {
        match self {
            LaneCurve::Chain { .. } => param + ds,
            LaneCurve::Figure8 { a, offset, .. } => {
                let n = 400;
                let mut t = param;
                let h = ds / n as f64;
                for _ in 0..n {
                    let (st, ct) = t.sin_cos();
                    let d = [-a * st, a * (ct * ct - st * st)];
                    let dd = [-a * ct, -4.0 * a * st * ct];
                    let speed = norm(d);
                    // Curvature correction for the offset curve.
                    let kappa = (d[0] * dd[1] - d[1] * dd[0]) / speed.powi(3).max(1e-12);
                    let v = (speed * (1.0 - offset * kappa)).abs().max(1e-9);
                    t += h / v;
                }
                t
            }
        }
    }

    /// Distance from `p` to the curve.
    pub fn distance(&self, p: P2) -> f64 {
        norm(sub(p, self.project(p, None).point))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_projection_extends() {
        let c = LaneCurve::chain(vec![Piece::Line {
            p0: [0.0, 0.0],
            dir: [1.0, 0.0],
            len: 10.0,
        }]);
        let pr = c.project([-5.0, 2.0], None);
        assert_eq!(pr.point, [-5.0, 0.0]);
        let pr = c.project([25.0, -1.0], None);
        assert_eq!(pr.param, 25.0);
    }

    #[test]
    fn arc_chain_is_continuous() {
        let c = LaneCurve::chain(vec![
            Piece::Line {
                p0: [0.0, 0.0],
                dir: [1.0, 0.0],
                len: 10.0,
            },
            Piece::Arc {
                center: [10.0, 5.0],
                radius: 5.0,
                a0: -PI / 2.0,
                sweep: PI / 2.0,
            },
            Piece::Line {
                p0: [15.0, 5.0],
                dir: [0.0, 1.0],
                len: 10.0,
            },
        ]);
        let l1 = 10.0;
        let l2 = 10.0 + 5.0 * PI / 2.0;
        for s in [l1, l2] {
            let (a, ta) = c.at(s - 1e-9);
            let (b, tb) = c.at(s + 1e-9);
            assert!(norm(sub(a, b)) < 1e-6 && norm(sub(ta, tb)) < 1e-6, "{s}");
        }
        let pr = c.project([13.0, 1.0], None);
        assert!((norm(sub(pr.point, [10.0, 5.0])) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn figure8_projection_round_trips() {
        let c = LaneCurve::Figure8 {
            center: [0.0, 0.0],
            a: 20.0,
            offset: 0.0,
        };
        for i in 0..50 {
            let t = i as f64 * 0.12 + 0.05;
            let (p, tan) = c.at(t);
            let pr = c.project(p, Some(tan));
            assert!(norm(sub(pr.point, p)) < 1e-6, "t={t}");
        }
    }

    #[test]
    fn figure8_crossing_uses_heading() {
        let c = LaneCurve::Figure8 {
            center: [0.0, 0.0],
            a: 20.0,
            offset: 0.0,
        };
        let (_, t1) = c.at(PI / 2.0);
        let pr = c.project([0.0, 0.0], Some(t1));
        assert!((pr.param - PI / 2.0).abs() < 1e-4);
        let (_, t2) = c.at(3.0 * PI / 2.0);
        let pr = c.project([0.0, 0.0], Some(t2));
        assert!((pr.param - 3.0 * PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn figure8_advance_matches_arc_length() {
        let c = LaneCurve::Figure8 {
            center: [0.0, 0.0],
            a: 20.0,
            offset: 0.0,
        };
        let t = c.advance(0.3, 2.0);
        // Numerically integrate the chord lengths between the two parameters.
        let n = 2000;
        let mut len = 0.0;
        let mut prev = c.at(0.3).0;
        for i in 1..=n {
            let q = c.at(0.3 + (t - 0.3) * i as f64 / n as f64).0;
            len += norm(sub(q, prev));
            prev = q;
        }
        assert!((len - 2.0).abs() < 1e-3, "{len}");
    }
}
