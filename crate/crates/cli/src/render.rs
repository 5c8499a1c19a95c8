//! SVG figures of a solved initial state.

use std::fmt::Write as _;

use turretguard_core::geometry::{apollonius_circle, turret_discriminant, wrap_pi, PolarPoint};
use turretguard_core::{FullSolution, GameParams, GameState, Point, TurnDirection, TARGET_RADIUS};

/// Pixels per unit length.
pub const SCALE: f64 = 100.0;
const MARGIN: f64 = 0.5;
const REGION_SAMPLES: usize = 2048;
const MAX_PATH_POINTS: usize = 2000;

/// Everything drawn in one figure.
#[derive(Debug, Clone)]
pub struct Figure {
    pub params: GameParams,
    pub initial: GameState,
    pub solution: FullSolution,
    pub terminal_defender: Point,
    pub terminal_attacker: Point,
    /// Simulated paths of the Defender and Attacker, when known.
    pub paths: Option<(Vec<Point>, Vec<Point>)>,
}

impl Figure {
    /// Straight-line equilibrium play from the solution.
    pub fn from_solution(initial: GameState, params: GameParams, solution: FullSolution) -> Self {
        let chosen = solution.chosen_solution();
        let h = chosen.heading_d;
        let terminal_defender = initial.defender + Point::new(h.cos(), h.sin()) * params.mu() * chosen.t_f;
        Self {
            params,
            initial,
            terminal_attacker: chosen.capture_point,
            terminal_defender,
            solution,
            paths: None,
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Closed boundary loops of the Attacker's dominance region over the Turret
/// for the given turn direction, in the fixed frame.
pub fn turret_region_loops(state: &GameState, params: &GameParams, dir: TurnDirection) -> Vec<Vec<Point>> {
    let a = state.attacker;
    let sign = dir.sign();
    let attacker = PolarPoint::new(a.norm(), sign * wrap_pi(a.y.atan2(a.x) - state.theta_t));
    let theta_max = attacker.ccw_angle() + std::f64::consts::PI;
    let valid = |th: f64| -> bool {
        if turret_discriminant(attacker, th, params) < 0.0 {
            return false;
        }
        let mid = attacker.r * (th - attacker.ccw_angle()).cos();
        mid + turret_discriminant(attacker, th, params).sqrt() >= 0.0
    };
    let edge = |mut lo: f64, mut hi: f64, lo_valid: bool| -> f64 {
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if valid(m) == lo_valid {
                lo = m;
            } else {
                hi = m;
            }
        }
        if lo_valid {
            lo
        } else {
            hi
        }
    };
    let to_fixed = |th: f64, r: f64| {
        let ang = state.theta_t + sign * th;
        Point::new(r * ang.cos(), r * ang.sin())
    };

    let mut segments: Vec<(f64, f64)> = Vec::new();
    let mut start: Option<f64> = None;
    let step = theta_max / REGION_SAMPLES as f64;
    let mut prev_valid = false;
    for i in 0..=REGION_SAMPLES {
        let th = i as f64 * step;
        let v = valid(th);
        if v && !prev_valid {
            start = Some(if i == 0 { th } else { edge(th - step, th, false) });
        } else if !v && prev_valid {
            segments.push((start.take().unwrap_or(0.0), edge(th - step, th, true)));
        }
        prev_valid = v;
    }
    if let Some(s) = start {
        segments.push((s, theta_max));
    }

    segments
        .into_iter()
        .filter(|(lo, hi)| hi > lo)
        .map(|(lo, hi)| {
            let n = ((hi - lo) / step).ceil().max(8.0) as usize;
            let mut upper = Vec::with_capacity(n + 1);
            let mut lower = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let th = lo + (hi - lo) * k as f64 / n as f64;
                let disc = turret_discriminant(attacker, th, params).max(0.0).sqrt();
                let mid = attacker.r * (th - attacker.ccw_angle()).cos();
                upper.push(to_fixed(th, (mid + disc).max(0.0)));
                lower.push(to_fixed(th, (mid - disc).max(0.0)));
            }
            lower.reverse();
            upper.extend(lower);
            upper
        })
        .collect()
}

struct View {
    x0: f64,
    y1: f64,
}

impl View {
    fn x(&self, x: f64) -> String {
        num((x - self.x0) * SCALE)
    }
    fn y(&self, y: f64) -> String {
        num((self.y1 - y) * SCALE)
    }
    fn len(&self, l: f64) -> String {
        num(l * SCALE)
    }
}

fn thin(path: &[Point]) -> Vec<Point> {
    if path.len() <= MAX_PATH_POINTS {
        return path.to_vec();
    }
    let stride = path.len().div_ceil(MAX_PATH_POINTS);
    let mut out: Vec<Point> = path.iter().step_by(stride).copied().collect();
    if let Some(last) = path.last() {
        out.push(*last);
    }
    out
}

/// Renders the figure. Output depends only on the figure contents.
pub fn render_svg(fig: &Figure) -> String {
    let s = &fig.initial;
    let sol = fig.solution.chosen_solution();
    let ring = fig.solution.value + TARGET_RADIUS;
    let apollonius = apollonius_circle(s.attacker, s.defender, &fig.params).ok();
    let loops = turret_region_loops(s, &fig.params, fig.solution.chosen);

    let mut pts: Vec<Point> = vec![
        Point::new(-ring, -ring),
        Point::new(ring, ring),
        s.attacker,
        s.defender,
        fig.terminal_attacker,
        fig.terminal_defender,
    ];
    if let Some(c) = &apollonius {
        pts.push(c.center - Point::new(c.radius, c.radius));
        pts.push(c.center + Point::new(c.radius, c.radius));
    }
    pts.extend(loops.iter().flatten());
    if let Some((pd, pa)) = &fig.paths {
        pts.extend(pd.iter().chain(pa));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let (x0, x1, y0, y1) = (x0 - MARGIN, x1 + MARGIN, y0 - MARGIN, y1 + MARGIN);
    let v = View { x0, y1 };
    let (w, h) = (num((x1 - x0) * SCALE), num((y1 - y0) * SCALE));

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<circle class="target" cx="{}" cy="{}" r="{}" fill="whitesmoke" stroke="black" stroke-width="1.5"/>"#,
        v.x(0.0),
        v.y(0.0),
        v.len(TARGET_RADIUS)
    );
    if let Some(c) = &apollonius {
        let _ = writeln!(
            out,
            r#"<circle class="apollonius" cx="{}" cy="{}" r="{}" fill="none" stroke="blue" stroke-width="1.5"/>"#,
            v.x(c.center.x),
            v.y(c.center.y),
            v.len(c.radius)
        );
    }
    for lp in &loops {
        let mut d = String::new();
        for (i, p) in lp.iter().enumerate() {
            let _ = write!(d, "{}{},{} ", if i == 0 { "M" } else { "L" }, v.x(p.x), v.y(p.y));
        }
        d.push('Z');
        let _ = writeln!(out, r#"<path class="turret-region" d="{d}" fill="none" stroke="green" stroke-width="1.5"/>"#);
    }
    let _ = writeln!(
        out,
        r#"<circle class="value-ring" cx="{}" cy="{}" r="{}" fill="none" stroke="purple" stroke-width="1.5" stroke-dasharray="8 6"/>"#,
        v.x(0.0),
        v.y(0.0),
        v.len(ring)
    );
    let look = Point::new(s.theta_t.cos(), s.theta_t.sin()) * TARGET_RADIUS;
    let _ = writeln!(
        out,
        r#"<line class="look" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"/>"#,
        v.x(0.0),
        v.y(0.0),
        v.x(look.x),
        v.y(look.y)
    );
    let paths = match &fig.paths {
        Some((pd, pa)) => vec![("defender", "blue", thin(pd)), ("attacker", "red", thin(pa))],
        None => vec![
            ("defender", "blue", vec![s.defender, fig.terminal_defender]),
            ("attacker", "red", vec![s.attacker, fig.terminal_attacker]),
        ],
    };
    for (who, color, path) in &paths {
        let pts: Vec<String> = path.iter().map(|p| format!("{},{}", v.x(p.x), v.y(p.y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="path {who}" points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
    }
    let marker = |out: &mut String, class: &str, p: Point, fill: &str, stroke: &str| {
        let _ = writeln!(
            out,
            r#"<circle class="{class}" cx="{}" cy="{}" r="5" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
            v.x(p.x),
            v.y(p.y)
        );
    };
    marker(&mut out, "initial turret", Point::new(0.0, 0.0), "green", "green");
    marker(&mut out, "initial defender", s.defender, "blue", "blue");
    marker(&mut out, "initial attacker", s.attacker, "red", "red");
    marker(&mut out, "terminal defender", fig.terminal_defender, "none", "blue");
    marker(&mut out, "terminal attacker", fig.terminal_attacker, "none", "red");
    let _ = writeln!(
        out,
        r#"<circle class="capture" cx="{}" cy="{}" r="2" fill="black"/>"#,
        v.x(sol.capture_point.x),
        v.y(sol.capture_point.y)
    );
    out.push_str("</svg>\n");
    out
}

/// Numeric attribute `name` of an SVG element line.
pub fn attribute(tag: &str, name: &str) -> Option<f64> {
    let key = format!(" {name}=\"");
    let start = tag.find(&key)? + key.len();
    let end = tag[start..].find('"')? + start;
    tag[start..end].parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use turretguard_core::solve;

    fn figure() -> Figure {
        let params = GameParams::new(0.7, 1.0, 1.0).unwrap();
        let a = Point::new(2.0 * 0.3f64.cos(), 2.0 * 0.3f64.sin());
        let state = GameState::new(Point::new(1.5, 0.6), a, 0.0).unwrap();
        let sol = solve(&state, &params).unwrap();
        Figure::from_solution(state, params, sol)
    }

    #[test]
    fn one_dashed_ring_at_value_radius() {
        let fig = figure();
        let svg = render_svg(&fig);
        let dashed: Vec<&str> = svg.lines().filter(|l| l.contains("stroke-dasharray")).collect();
        assert_eq!(dashed.len(), 1);
        let r = attribute(dashed[0], "r").unwrap();
        assert!((r - (fig.solution.value + 1.0) * SCALE).abs() <= 1e-3, "{r}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(render_svg(&figure()), render_svg(&figure()));
    }

    #[test]
    fn turret_region_loop_contains_attacker_neighbourhood() {
        let fig = figure();
        let loops = turret_region_loops(&fig.initial, &fig.params, TurnDirection::Ccw);
        assert!(!loops.is_empty());
        let lp = &loops[0];
        assert!((lp[0] - lp[lp.len() - 1]).norm() < 1e-6);
    }

    #[test]
    fn negative_zero_is_normalised() {
        assert_eq!(num(-0.0001), "0.000");
        assert_eq!(num(1.23456), "1.235");
    }
}
