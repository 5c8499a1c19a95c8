//! Equilibrium solution of the Turret-Defender-Attacker game.
//!
//! Every directional solve works in a local frame whose +x axis is the
//! Turret's look angle and in which the Turret turns counter-clockwise. The
//! clockwise game is the counter-clockwise game of the state mirrored across
//! the look axis.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::game::{rotate, GameParams, GameState, Point, TARGET_RADIUS};
use crate::geometry::{
    apollonius_circle, ccw_turn, g, g_inverse, in_shadow, theta_barrier, to_polar, turret_lower_unchecked,
    turret_region_bounds, wrap_pi, ApolloniusCircle, Branch, PolarPoint,
};
use crate::numerics::{find_root, grid_argmin, scan_brackets, Bracket, GridSpec, Rect};

/// Largest value gap at which both turn directions are treated as optimal.
pub const DISPERSAL_TOL: f64 = 1e-9;
/// Sign-change scan density for the simultaneous-capture angle.
const SIMULTANEOUS_SAMPLES: usize = 512;
/// Samples of the visible target arc used to detect an Attacker win.
const ARC_SAMPLES: usize = 4096;
/// Relative slack on arrival-time comparisons so boundary points count as reachable.
const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurnDirection {
    Ccw,
    Cw,
}

impl TurnDirection {
    /// Turret control `u_T`.
    pub fn sign(self) -> f64 {
        match self {
            TurnDirection::Ccw => 1.0,
            TurnDirection::Cw => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            TurnDirection::Ccw => TurnDirection::Cw,
            TurnDirection::Cw => TurnDirection::Ccw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationCase {
    SoloDefender,
    SoloTurret,
    Simultaneous,
    FallbackPoint,
    AttackerWins,
}

/// Equilibrium play for one Turret turn direction, in the fixed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureSolution {
    /// Terminal distance of the Attacker from the target, `|capture_point| - 1`.
    pub value: f64,
    pub capture_point: Point,
    pub case: TerminationCase,
    pub direction: TurnDirection,
    pub heading_a: f64,
    pub heading_d: f64,
    pub u_t: f64,
    pub t_f: f64,
}

impl CaptureSolution {
    /// Attacker runs straight to a target point it reaches uncaptured, or
    /// radially when none is found.
    pub fn attacker_wins(state: &GameState, params: &GameParams, direction: TurnDirection) -> Self {
        let a = state.attacker;
        let r = a.norm();
        let point = attacker_escape_point(state, params, direction).unwrap_or_else(|| {
            if r > 0.0 {
                a / r * TARGET_RADIUS
            } else {
                Point::new(TARGET_RADIUS, 0.0)
            }
        });
        Self {
            value: 0.0,
            capture_point: point,
            case: TerminationCase::AttackerWins,
            direction,
            heading_a: heading(a, point),
            heading_d: heading(state.defender, a),
            u_t: direction.sign(),
            t_f: (point - a).norm() / params.nu(),
        }
    }
}

/// The game solution: the better of the two turn directions for the team.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSolution {
    pub value: f64,
    pub chosen: TurnDirection,
    pub ccw: CaptureSolution,
    pub cw: CaptureSolution,
    pub dispersal: bool,
}

impl FullSolution {
    pub fn chosen_solution(&self) -> &CaptureSolution {
        self.direction(self.chosen)
    }

    pub fn direction(&self, dir: TurnDirection) -> &CaptureSolution {
        match dir {
            TurnDirection::Ccw => &self.ccw,
            TurnDirection::Cw => &self.cw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameStatus {
    TeamWins(FullSolution),
    AttackerWins,
    /// The state is outside the regime the solution covers.
    Unresolved(String),
}

fn heading(from: Point, to: Point) -> f64 {
    let d = to - from;
    d.y.atan2(d.x)
}

/// Look-angle frame for one turn direction.
#[derive(Debug, Clone, Copy)]
struct Frame {
    theta_t: f64,
    mirror: bool,
}

impl Frame {
    fn new(theta_t: f64, direction: TurnDirection) -> Self {
        Self { theta_t, mirror: direction == TurnDirection::Cw }
    }

    fn local(&self, p: Point) -> Point {
        let q = rotate(p, -self.theta_t);
        if self.mirror {
            Point::new(q.x, -q.y)
        } else {
            q
        }
    }

    fn fixed(&self, q: Point) -> Point {
        let q = if self.mirror { Point::new(q.x, -q.y) } else { q };
        rotate(q, self.theta_t)
    }

    fn fixed_heading(&self, h: f64) -> f64 {
        wrap_pi(if self.mirror { -h } else { h } + self.theta_t)
    }
}

/// One directional problem in its local frame.
struct Local<'a> {
    frame: Frame,
    direction: TurnDirection,
    params: &'a GameParams,
    a: Point,
    d: Point,
    pa: PolarPoint,
    /// Counter-clockwise turn to the Attacker, in `[0, 2 pi)`.
    theta_a: f64,
}

/// A solution in local coordinates before conversion to the fixed frame.
struct LocalSolution {
    point: Point,
    value: f64,
    case: TerminationCase,
    heading_a: f64,
}

impl<'a> Local<'a> {
    fn new(state: &GameState, params: &'a GameParams, direction: TurnDirection) -> Self {
        let frame = Frame::new(state.theta_t, direction);
        let a = frame.local(state.attacker);
        let d = frame.local(state.defender);
        let pa = to_polar(a, 0.0);
        Self { frame, direction, params, a, d, pa, theta_a: pa.ccw_angle() }
    }

    fn barrier(&self) -> Result<f64> {
        theta_barrier(self.pa.r, self.params)
    }

    fn circle(&self) -> Result<ApolloniusCircle> {
        apollonius_circle(self.a, self.d, self.params)
    }

    fn turn_to(&self, p: Point) -> f64 {
        ccw_turn(p.y.atan2(p.x), self.pa.theta)
    }

    /// Whether the Attacker reaches `p` in a straight line no later than the
    /// Turret's line of sight does.
    fn beats_turret(&self, p: Point) -> bool {
        let turn = self.turn_to(p);
        turn >= 0.0 && (p - self.a).norm() / self.params.nu() <= turn / self.params.omega() * (1.0 + SLACK)
    }

    fn beats_defender(&self, p: Point) -> bool {
        (p - self.a).norm() / self.params.nu() <= (p - self.d).norm() / self.params.mu() * (1.0 + SLACK)
    }

    fn feasible(&self, p: Point) -> bool {
        self.beats_defender(p) && self.beats_turret(p) && !in_shadow(p, self.a)
    }

    /// Heading of the Attacker in the one-on-one Turret game.
    fn turret_heading(&self) -> f64 {
        let offset = (self.params.turn_radius() / self.pa.r).asin();
        self.theta_a - PI - offset
    }

    fn finish(&self, s: LocalSolution, state: &GameState) -> Result<CaptureSolution> {
        let radius = s.point.norm();
        if radius <= TARGET_RADIUS {
            return Err(Error::AttackerWins(format!("capture point lies inside the target (r = {radius})")));
        }
        let capture_point = self.frame.fixed(s.point);
        Ok(CaptureSolution {
            value: s.value,
            capture_point,
            case: s.case,
            direction: self.direction,
            heading_a: self.frame.fixed_heading(s.heading_a),
            heading_d: heading(state.defender, capture_point),
            u_t: self.direction.sign(),
            t_f: (s.point - self.a).norm() / self.params.nu(),
        })
    }

    fn solo_defender(&self) -> Result<LocalSolution> {
        let circle = self.circle()?;
        let point = circle.closest_to_origin()?;
        Ok(LocalSolution { point, value: point.norm() - 1.0, case: TerminationCase::SoloDefender, heading_a: heading(self.a, point) })
    }

    fn solo_turret(&self) -> Result<LocalSolution> {
        let params = self.params;
        let y = g(self.pa.r, params)? - self.theta_a;
        if y < FRAC_PI_2 {
            return Err(Error::Domain { function: "solo_turret", value: self.theta_a });
        }
        let r_f = g_inverse(y, params)?;
        let u = self.turret_heading();
        let dir = Point::new(u.cos(), u.sin());
        // Follow the straight path until the line of sight catches up; the
        // relative angle decreases monotonically until the tangent point.
        let a = params.turn_radius();
        let t_tangent = (self.pa.r * self.pa.r - a * a).max(0.0).sqrt() / params.nu();
        let gap = |t: f64| params.omega() * t - self.turn_to(self.a + dir * (params.nu() * t));
        let point = match Bracket::new(&gap, 0.0, t_tangent) {
            Ok(b) => self.a + dir * (params.nu() * find_root(gap, b, 1e-15)),
            Err(_) => self.a + dir * (params.nu() * t_tangent),
        };
        let radial_estimate = params.omega() * (self.pa.r - r_f) / params.nu();
        let propagated = self.turn_to(point);
        if (radial_estimate - propagated).abs() > 1e-6 {
            log::debug!("radial-path capture angle {radial_estimate} differs from propagated angle {propagated}");
        }
        Ok(LocalSolution { point, value: r_f - 1.0, case: TerminationCase::SoloTurret, heading_a: u })
    }

    fn p_dagger(&self) -> Result<Point> {
        if self.a == self.d {
            return Err(Error::CoincidentAgents);
        }
        let params = self.params;
        let u = self.turret_heading();
        let away = self.a - self.d;
        let psi = u - away.y.atan2(away.x);
        let k = params.mu() / params.nu();
        let dist = params.alpha() * away.norm() * (psi.cos() + (k * k - psi.sin().powi(2)).sqrt());
        Ok(self.a + Point::new(u.cos(), u.sin()) * dist)
    }

    fn require_single_lobe(&self) -> Result<()> {
        let barrier = self.barrier()?;
        if self.theta_a > barrier {
            return Err(Error::Premise(format!("theta_A = {} exceeds the barrier angle {barrier}", self.theta_a)));
        }
        Ok(())
    }

    fn pd_in_rat(&self) -> Result<bool> {
        self.require_single_lobe()?;
        let p = self.solo_defender()?.point;
        Ok(p.norm() > self.params.turn_radius() && self.beats_turret(p))
    }

    fn pt_in_rad(&self) -> Result<bool> {
        self.require_single_lobe()?;
        let p = self.p_dagger()?;
        let turn = self.turn_to(p);
        Ok(p.norm() > self.params.turn_radius()
            && (p - self.a).norm() / self.params.nu() > turn / self.params.omega())
    }

    fn simultaneous(&self) -> Result<LocalSolution> {
        self.require_single_lobe()?;
        let circle = self.circle()?;
        let half = circle.angular_half_width()?;
        let bounds = turret_region_bounds(self.pa, self.params)?;
        let theta_c = self.theta_a + wrap_pi(circle.theta_c - self.theta_a);
        let lo = bounds.theta_lo.max(theta_c - half);
        let hi = bounds.theta_hi.min(theta_c + half);
        if !(lo < hi) {
            return Err(Error::NoIntersection);
        }
        let t = |th: f64| turret_lower_unchecked(self.pa, th, self.params);
        let d = |th: f64| circle.radius_at_unchecked(th - theta_c, Branch::Lower);
        let gap = |th: f64| t(th) - d(th);
        let best = scan_brackets(&gap, lo, hi, SIMULTANEOUS_SAMPLES)
            .into_iter()
            .map(|b| find_root(gap, b, 1e-14))
            .min_by(|x, y| d(*x).total_cmp(&d(*y)))
            .ok_or(Error::NoIntersection)?;
        let r = d(best);
        let point = Point::new(r * best.cos(), r * best.sin());
        Ok(LocalSolution { point, value: r - 1.0, case: TerminationCase::Simultaneous, heading_a: heading(self.a, point) })
    }

    /// Point of the target circle the Attacker reaches ahead of both captors
    /// along an unobstructed straight line, with the widest time margin.
    fn escape_point(&self) -> Option<Point> {
        let visible = (TARGET_RADIUS / self.pa.r).acos();
        let (nu, mu, omega) = (self.params.nu(), self.params.mu(), self.params.omega());
        (0..ARC_SAMPLES)
            .filter_map(|i| {
                let s = (i as f64 + 0.5) / ARC_SAMPLES as f64;
                let phi = self.pa.theta + visible * (2.0 * s - 1.0);
                let q = Point::new(phi.cos(), phi.sin()) * TARGET_RADIUS;
                if !(self.beats_defender(q) && self.beats_turret(q)) {
                    return None;
                }
                let run = (q - self.a).norm() / nu;
                let margin = ((q - self.d).norm() / mu - run).min(self.turn_to(q) / omega - run);
                Some((margin, q))
            })
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .map(|(_, q)| q)
    }

    fn fallback(&self, spec: &GridSpec) -> Result<LocalSolution> {
        if self.escape_point().is_some() {
            return Err(Error::AttackerWins("an unobstructed target point is reachable".into()));
        }
        let circle = self.circle()?;
        if let Ok(p) = circle.closest_to_origin() {
            if p.norm() > TARGET_RADIUS && self.feasible(p) {
                return Ok(LocalSolution {
                    point: p,
                    value: p.norm() - 1.0,
                    case: TerminationCase::SoloDefender,
                    heading_a: heading(self.a, p),
                });
            }
        }
        // The turn condition bounds the reach by at most theta_A + pi of turning.
        let reach = self.params.turn_radius() * (self.theta_a + PI) * (1.0 + 1e-9);
        let around_a = Rect::centered(self.a, reach);
        let around_c = Rect::centered(circle.center, circle.radius);
        let domain = Rect::new(
            Point::new(around_a.min.x.max(around_c.min.x), around_a.min.y.max(around_c.min.y)),
            Point::new(around_a.max.x.min(around_c.max.x), around_a.max.y.min(around_c.max.y)),
        );
        let point = grid_argmin(|p| p.norm(), |p| self.feasible(p), domain, spec)
            .ok_or_else(|| Error::AttackerWins("no feasible capture point".into()))?;
        Ok(LocalSolution { point, value: point.norm() - 1.0, case: TerminationCase::FallbackPoint, heading_a: heading(self.a, point) })
    }

    fn immediate(&self, case: TerminationCase, heading_a: f64) -> LocalSolution {
        LocalSolution { point: self.a, value: self.pa.r - 1.0, case, heading_a }
    }

    fn dispatch(&self, spec: &GridSpec) -> Result<LocalSolution> {
        if self.pa.r <= TARGET_RADIUS {
            return Err(Error::AttackerWins("attacker is inside the target".into()));
        }
        if self.a == self.d {
            return Ok(self.immediate(TerminationCase::SoloDefender, self.turret_heading()));
        }
        if self.theta_a == 0.0 {
            return Ok(self.immediate(TerminationCase::SoloTurret, self.turret_heading()));
        }
        if self.theta_a > self.barrier()? {
            return self.fallback(spec);
        }
        let defender = match self.pd_in_rat() {
            Ok(true) => Some(self.solo_defender()?),
            _ => None,
        };
        let turret = if self.pt_in_rad()? { Some(self.solo_turret()?) } else { None };
        match (defender, turret) {
            (Some(d), Some(t)) => Ok(if t.value > d.value { t } else { d }),
            (Some(d), None) => Ok(d),
            (None, Some(t)) => Ok(t),
            (None, None) => match self.simultaneous() {
                Err(Error::NoIntersection) | Err(Error::OriginInsideApollonius { .. }) => self.fallback(spec),
                other => other,
            },
        }
    }
}

/// Target point the Attacker reaches uncaptured against this turn direction.
pub fn attacker_escape_point(state: &GameState, params: &GameParams, direction: TurnDirection) -> Option<Point> {
    let local = Local::new(state, params, direction);
    if local.pa.r <= TARGET_RADIUS {
        return None;
    }
    local.escape_point().map(|q| local.frame.fixed(q))
}

/// The Attacker's view of one turn direction: the equilibrium when the team
/// wins, otherwise a run to the target.
pub fn solve_for_attacker(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<CaptureSolution> {
    match solve_direction(state, params, direction) {
        Err(Error::AttackerWins(_)) => Ok(CaptureSolution::attacker_wins(state, params, direction)),
        other => other,
    }
}

/// Capture at the point of the Apollonius circle nearest the Turret.
pub fn solve_solo_defender(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<CaptureSolution> {
    let local = Local::new(state, params, direction);
    let s = local.solo_defender().map_err(|e| match e {
        Error::OriginInsideApollonius { .. } => Error::AttackerWins(e.to_string()),
        other => other,
    })?;
    local.finish(s, state)
}

/// Capture by the Turret alone, ignoring the Defender.
pub fn solve_solo_turret(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<CaptureSolution> {
    let local = Local::new(state, params, direction);
    if local.pa.r <= params.turn_radius() {
        return Err(Error::Domain { function: "solve_solo_turret", value: local.pa.r });
    }
    if local.theta_a == 0.0 {
        return local.finish(local.immediate(TerminationCase::SoloTurret, local.turret_heading()), state);
    }
    let s = local.solo_turret()?;
    local.finish(s, state)
}

/// Point where the Attacker, running the one-on-one Turret heading, meets the
/// Apollonius circle. Returned in the fixed frame.
pub fn p_dagger(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<Point> {
    let local = Local::new(state, params, direction);
    Ok(local.frame.fixed(local.p_dagger()?))
}

/// Whether the Defender-only capture point is reached by the Attacker before
/// the Turret can align with it.
pub fn check_pd_in_rat(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<bool> {
    Local::new(state, params, direction).pd_in_rat()
}

/// Whether the Turret aligns with the Attacker's one-on-one path before the
/// Defender can intercept it there.
pub fn check_pt_in_rad(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<bool> {
    Local::new(state, params, direction).pt_in_rad()
}

/// Capture at the nearest intersection of the two dominance boundaries.
pub fn solve_simultaneous(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<CaptureSolution> {
    let local = Local::new(state, params, direction);
    let s = local.simultaneous()?;
    local.finish(s, state)
}

/// Grid minimisation over the feasible capture points. Returns the
/// Defender-only point exactly when it is feasible.
pub fn solve_fallback(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<CaptureSolution> {
    solve_fallback_with(state, params, direction, &GridSpec::default())
}

pub fn solve_fallback_with(
    state: &GameState,
    params: &GameParams,
    direction: TurnDirection,
    spec: &GridSpec,
) -> Result<CaptureSolution> {
    let local = Local::new(state, params, direction);
    if local.pa.r <= TARGET_RADIUS {
        return Err(Error::AttackerWins("attacker is inside the target".into()));
    }
    let s = local.fallback(spec)?;
    local.finish(s, state)
}

/// Equilibrium for a fixed Turret turn direction.
pub fn solve_direction(state: &GameState, params: &GameParams, direction: TurnDirection) -> Result<CaptureSolution> {
    let local = Local::new(state, params, direction);
    let s = local.dispatch(&GridSpec::default())?;
    local.finish(s, state)
}

/// Solves both turn directions and keeps the one better for the team.
pub fn solve(state: &GameState, params: &GameParams) -> Result<FullSolution> {
    let ccw = solve_direction(state, params, TurnDirection::Ccw);
    let cw = solve_direction(state, params, TurnDirection::Cw);
    let (ccw, cw) = match (ccw, cw) {
        (Ok(a), Ok(b)) => (a, b),
        (Ok(a), Err(Error::AttackerWins(_))) => (a, CaptureSolution::attacker_wins(state, params, TurnDirection::Cw)),
        (Err(Error::AttackerWins(_)), Ok(b)) => (CaptureSolution::attacker_wins(state, params, TurnDirection::Ccw), b),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let dispersal = (ccw.value - cw.value).abs() <= DISPERSAL_TOL;
    let chosen = if dispersal || ccw.value >= cw.value { TurnDirection::Ccw } else { TurnDirection::Cw };
    Ok(FullSolution { value: ccw.value.max(cw.value), chosen, ccw, cw, dispersal })
}

pub fn classify(state: &GameState, params: &GameParams) -> GameStatus {
    match solve(state, params) {
        Ok(s) => GameStatus::TeamWins(s),
        Err(Error::AttackerWins(_)) => GameStatus::AttackerWins,
        Err(e) => GameStatus::Unresolved(e.to_string()),
    }
}
