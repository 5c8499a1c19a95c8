//! Forward simulation of the game kinematics with capture detection.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::game::{GameParams, GameState, Point, TARGET_RADIUS};
use crate::geometry::wrap_pi;
use crate::solver::{solve, solve_for_attacker, CaptureSolution, TurnDirection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub capture_tol_dist: f64,
    pub capture_tol_angle: f64,
    pub max_time: f64,
    /// Steps between feedback re-solves; 0 plays the initial controls throughout.
    pub resolve_period: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-4, capture_tol_dist: 5e-4, capture_tol_angle: 5e-4, max_time: 50.0, resolve_period: 100 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("capture_tol_dist", self.capture_tol_dist),
            ("capture_tol_angle", self.capture_tol_angle),
            ("max_time", self.max_time),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    DefenderCapture,
    TurretCapture,
    SimultaneousCapture,
    AttackerReachedTarget,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::DefenderCapture => "DefenderCapture",
            Outcome::TurretCapture => "TurretCapture",
            Outcome::SimultaneousCapture => "SimultaneousCapture",
            Outcome::AttackerReachedTarget => "AttackerReachedTarget",
            Outcome::Timeout => "Timeout",
        }
    }

    pub fn is_capture(self) -> bool {
        matches!(self, Outcome::DefenderCapture | Outcome::TurretCapture | Outcome::SimultaneousCapture)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: GameState,
}

/// Sampled play. Samples are `dt` apart except the last, which sits at the
/// interpolated event instant inside the final step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub outcome: Outcome,
    /// `r_A` at termination.
    pub terminal_distance: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &GameState {
        &self.samples.last().expect("trajectory has at least one sample").state
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x_D,y_D,x_A,y_A,theta_T")?;
        for s in &self.samples {
            let g = &s.state;
            writeln!(
                out,
                "{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
                s.t, g.defender.x, g.defender.y, g.attacker.x, g.attacker.y, g.theta_t
            )?;
        }
        writeln!(out, "# outcome={},terminal_distance={:.9}", self.outcome, self.terminal_distance)
    }
}

/// Headings of the Defender and Attacker and the Turret turn control in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub u_d: f64,
    pub u_a: f64,
    pub u_t: f64,
}

impl Controls {
    pub fn from_solution(sol: &CaptureSolution) -> Self {
        Self { u_d: sol.heading_d, u_a: sol.heading_a, u_t: sol.u_t }
    }
}

/// One explicit Euler step.
pub fn step(state: &GameState, controls: &Controls, params: &GameParams, dt: f64) -> GameState {
    let (sd, cd) = controls.u_d.sin_cos();
    let (sa, ca) = controls.u_a.sin_cos();
    GameState {
        defender: state.defender + Point::new(cd, sd) * (params.mu() * dt),
        attacker: state.attacker + Point::new(ca, sa) * (params.nu() * dt),
        theta_t: state.theta_t + params.omega() * controls.u_t.clamp(-1.0, 1.0) * dt,
    }
}

fn relative_angle(state: &GameState) -> f64 {
    wrap_pi(state.attacker.y.atan2(state.attacker.x) - state.theta_t)
}

/// Capture test at a single instant.
pub fn detect_capture(state: &GameState, _params: &GameParams, config: &SimConfig) -> Option<Outcome> {
    let r = state.attacker.norm();
    if r <= TARGET_RADIUS {
        return Some(Outcome::AttackerReachedTarget);
    }
    let by_defender = (state.defender - state.attacker).norm() <= config.capture_tol_dist;
    let by_turret = relative_angle(state).abs() <= config.capture_tol_angle;
    match (by_defender, by_turret) {
        (true, true) => Some(Outcome::SimultaneousCapture),
        (true, false) => Some(Outcome::DefenderCapture),
        (false, true) => Some(Outcome::TurretCapture),
        (false, false) => None,
    }
}

fn lerp(a: &GameState, b: &GameState, s: f64) -> GameState {
    GameState {
        defender: a.defender + (b.defender - a.defender) * s,
        attacker: a.attacker + (b.attacker - a.attacker) * s,
        theta_t: a.theta_t + (b.theta_t - a.theta_t) * s,
    }
}

/// Earliest event inside the step from `a` to `b`, as a step fraction.
fn event_in_step(a: &GameState, b: &GameState, config: &SimConfig) -> Option<(f64, Outcome)> {
    let mut events: Vec<(f64, Outcome)> = Vec::new();

    let (r0, r1) = (a.attacker.norm(), b.attacker.norm());
    if r1 <= TARGET_RADIUS {
        events.push(((r0 - TARGET_RADIUS) / (r0 - r1), Outcome::AttackerReachedTarget));
    }

    let (f0, f1) = (relative_angle(a), relative_angle(b));
    if f0.abs() < std::f64::consts::FRAC_PI_2 && f1.abs() < std::f64::consts::FRAC_PI_2 && f0 * f1 <= 0.0 && f0 != f1 {
        events.push((f0 / (f0 - f1), Outcome::TurretCapture));
    }

    // Closest approach of the linearly moving separation vector.
    let w0 = a.defender - a.attacker;
    let dw = (b.defender - b.attacker) - w0;
    let s = if dw.norm_squared() > 0.0 { (-w0.dot(&dw) / dw.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
    if s < 1.0 && (w0 + dw * s).norm() <= config.capture_tol_dist {
        events.push((s, Outcome::DefenderCapture));
    }

    let (s, kind) = events.into_iter().min_by(|x, y| x.0.total_cmp(&y.0))?;
    let at = lerp(a, b, s);
    let kind = match kind {
        Outcome::TurretCapture if (at.defender - at.attacker).norm() <= config.capture_tol_dist => Outcome::SimultaneousCapture,
        Outcome::DefenderCapture if relative_angle(&at).abs() <= config.capture_tol_angle => Outcome::SimultaneousCapture,
        k => k,
    };
    Some((s, kind))
}

/// Source of controls during a simulation.
pub trait Controller {
    fn controls(&mut self, step: usize, state: &GameState, params: &GameParams) -> Controls;
}

/// Plays fixed controls.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub Controls);

impl Controller for Constant {
    fn controls(&mut self, _: usize, _: &GameState, _: &GameParams) -> Controls {
        self.0
    }
}

/// Integrates until a capture, the Attacker reaching the target, or `max_time`.
pub fn simulate<C: Controller + ?Sized>(state: &GameState, params: &GameParams, config: &SimConfig, controller: &mut C) -> Trajectory {
    let mut samples = vec![Sample { t: 0.0, state: *state }];
    if let Some(outcome) = detect_capture(state, params, config) {
        return Trajectory { samples, outcome, terminal_distance: state.attacker.norm() };
    }
    let steps = (config.max_time / config.dt).ceil() as usize;
    let mut current = *state;
    for k in 0..steps {
        let controls = controller.controls(k, &current, params);
        let next = step(&current, &controls, params, config.dt);
        let t = k as f64 * config.dt;
        if let Some((s, outcome)) = event_in_step(&current, &next, config) {
            let at = lerp(&current, &next, s);
            if s > 0.0 {
                samples.push(Sample { t: t + s * config.dt, state: at });
            }
            return Trajectory { samples, outcome, terminal_distance: at.attacker.norm() };
        }
        current = next;
        samples.push(Sample { t: (k + 1) as f64 * config.dt, state: current });
    }
    Trajectory { samples, outcome: Outcome::Timeout, terminal_distance: current.attacker.norm() }
}

/// All agents hold the solution's constant controls.
pub fn run_open_loop(state: &GameState, params: &GameParams, solution: &CaptureSolution, config: &SimConfig) -> Trajectory {
    simulate(state, params, config, &mut Constant(Controls::from_solution(solution)))
}

/// Team side of the feedback strategy: re-solve and play the chosen direction.
#[derive(Debug, Clone)]
pub struct TeamFeedback {
    pub period: usize,
    /// Re-solve every step while the Defender is this close to the Attacker.
    pub close_range: f64,
    current: Option<(f64, f64)>,
}

impl TeamFeedback {
    pub fn new(period: usize) -> Self {
        Self { period: period.max(1), close_range: 0.05, current: None }
    }

    /// Defender heading and Turret control, re-solved when due.
    pub fn play(&mut self, step: usize, state: &GameState, params: &GameParams) -> (f64, f64) {
        let due = step.is_multiple_of(self.period) || (state.defender - state.attacker).norm() < self.close_range;
        if due || self.current.is_none() {
            if let Ok(sol) = solve(state, params) {
                let chosen = sol.chosen_solution();
                self.current = Some((chosen.heading_d, chosen.u_t));
            }
        }
        self.current.unwrap_or_else(|| {
            let d = state.attacker - state.defender;
            (d.y.atan2(d.x), 1.0)
        })
    }
}

/// Attacker side: best response to the turn direction it believes the Turret
/// is using, updated from the observed direction at every re-solve.
#[derive(Debug, Clone)]
pub struct AttackerFeedback {
    pub period: usize,
    pub belief: TurnDirection,
    heading: Option<f64>,
}

impl AttackerFeedback {
    pub fn new(period: usize, guess: TurnDirection) -> Self {
        Self { period: period.max(1), belief: guess, heading: None }
    }

    pub fn play(&mut self, step: usize, state: &GameState, params: &GameParams, observed_u_t: Option<f64>) -> f64 {
        if step > 0 && step.is_multiple_of(self.period) {
            if let Some(u) = observed_u_t {
                self.belief = if u >= 0.0 { TurnDirection::Ccw } else { TurnDirection::Cw };
            }
            self.heading = None;
        }
        if self.heading.is_none() {
            if let Ok(sol) = solve_for_attacker(state, params, self.belief) {
                self.heading = Some(sol.heading_a);
            }
        }
        self.heading.unwrap_or_else(|| {
            let inward = -state.attacker;
            inward.y.atan2(inward.x)
        })
    }
}

/// Both sides playing feedback strategies.
#[derive(Debug, Clone)]
pub struct FeedbackPlay {
    pub team: TeamFeedback,
    pub attacker: AttackerFeedback,
    last_u_t: Option<f64>,
}

impl FeedbackPlay {
    pub fn new(period: usize, guess: TurnDirection) -> Self {
        Self { team: TeamFeedback::new(period), attacker: AttackerFeedback::new(period, guess), last_u_t: None }
    }
}

impl Controller for FeedbackPlay {
    fn controls(&mut self, step: usize, state: &GameState, params: &GameParams) -> Controls {
        let u_a = self.attacker.play(step, state, params, self.last_u_t);
        let (u_d, u_t) = self.team.play(step, state, params);
        self.last_u_t = Some(u_t);
        Controls { u_d, u_a, u_t }
    }
}

/// Feedback play: the team re-solves every `resolve_period` steps; the
/// Attacker starts on the equilibrium for `attacker_guess` and switches to
/// the observed turn direction at its first re-solve.
pub fn run_feedback(state: &GameState, params: &GameParams, config: &SimConfig, attacker_guess: TurnDirection) -> Result<Trajectory> {
    if config.resolve_period == 0 {
        return Err(Error::InvalidParams("feedback play needs resolve_period > 0".into()));
    }
    config.validate()?;
    Ok(simulate(state, params, config, &mut FeedbackPlay::new(config.resolve_period, attacker_guess)))
}
