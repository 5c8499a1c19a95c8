//! Slow, independent checks of the solver.
//!
//! Nothing here calls the closed-form region boundaries or the solver: region
//! membership is decided from raw arrival times, with the Turret's turn
//! obtained by integrating the Attacker's polar angle along its path.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{GameParams, GameState, Point, TARGET_RADIUS};
use crate::numerics::{GridSpec, Rect};
use crate::solver::TurnDirection;

/// Sub-segments used when integrating the polar angle along a straight path.
const PATH_SUBSTEPS: usize = 8;
const FD_STEP: f64 = 1e-6;

/// Gradient of the Defender-only value with respect to the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostateVector {
    pub lambda_xa: f64,
    pub lambda_ya: f64,
    pub lambda_xd: f64,
    pub lambda_yd: f64,
    pub lambda_theta_t: f64,
}

impl CostateVector {
    pub fn max_abs_diff(&self, other: &CostateVector) -> f64 {
        [
            self.lambda_xa - other.lambda_xa,
            self.lambda_ya - other.lambda_ya,
            self.lambda_xd - other.lambda_xd,
            self.lambda_yd - other.lambda_yd,
            self.lambda_theta_t - other.lambda_theta_t,
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `-nu |lambda_A| + mu |lambda_D|`.
    pub fn hamiltonian(&self, params: &GameParams) -> f64 {
        -params.nu() * self.lambda_xa.hypot(self.lambda_ya) + params.mu() * self.lambda_xd.hypot(self.lambda_yd)
    }
}

/// Grid used by the oracle: fine sampling with slow window shrinkage so the
/// incumbent can track a minimum sitting on a flat boundary.
pub fn oracle_grid() -> GridSpec {
    GridSpec { resolution: 256, refine_rounds: 16, shrink: 2.0 }
}

/// Bounding box of every candidate capture point.
pub fn oracle_domain(state: &GameState) -> Rect {
    let half = state.attacker.norm() + (state.attacker - state.defender).norm() + 1.0;
    Rect::centered(Point::zeros(), half)
}

fn wrap(a: f64) -> f64 {
    let w = (a + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    if w == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        w
    }
}

fn sigma(direction: TurnDirection) -> f64 {
    match direction {
        TurnDirection::Ccw => 1.0,
        TurnDirection::Cw => -1.0,
    }
}

/// Angle the Turret still has to sweep, in its turn direction, to point at `p`.
fn initial_lead(p: Point, theta_t: f64, direction: TurnDirection) -> f64 {
    (sigma(direction) * (p.y.atan2(p.x) - theta_t)).rem_euclid(TAU)
}

/// Turret lead along a straight run to `p` with the Turret turning in
/// `direction`: `(lead on arrival, smallest lead at any sampled instant)`.
fn lead_along(attacker: Point, theta_t: f64, p: Point, direction: TurnDirection, params: &GameParams) -> (f64, f64) {
    let lead0 = initial_lead(attacker, theta_t, direction);
    let s = sigma(direction);
    let total = (p - attacker).norm() / params.nu();
    let mut swept = 0.0;
    let mut prev = attacker.y.atan2(attacker.x);
    let (mut lead, mut lowest) = (lead0, lead0);
    for k in 1..=PATH_SUBSTEPS {
        let frac = k as f64 / PATH_SUBSTEPS as f64;
        let q = attacker + (p - attacker) * frac;
        let phi = q.y.atan2(q.x);
        swept += wrap(phi - prev);
        prev = phi;
        lead = lead0 + s * swept - params.omega() * total * frac;
        lowest = lowest.min(lead);
    }
    (lead, lowest)
}

/// Whether the Attacker arrives at `p` no later than the line of sight.
fn arrives_first(attacker: Point, theta_t: f64, p: Point, direction: TurnDirection, params: &GameParams) -> bool {
    lead_along(attacker, theta_t, p, direction, params).0 >= -1e-12
}

/// Whether the line of sight never reaches the Attacker on its way to `p`.
fn survives_run(attacker: Point, theta_t: f64, p: Point, direction: TurnDirection, params: &GameParams) -> bool {
    lead_along(attacker, theta_t, p, direction, params).1 >= -1e-12
}

fn defender_slower(attacker: Point, defender: Point, p: Point, params: &GameParams) -> bool {
    (p - attacker).norm() / params.nu() <= (p - defender).norm() / params.mu() * (1.0 + 1e-12)
}

fn obstructed(attacker: Point, p: Point) -> bool {
    if p.norm() <= TARGET_RADIUS {
        return true;
    }
    let d = p - attacker;
    let s = if d.norm_squared() > 0.0 { (-attacker.dot(&d) / d.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
    (attacker + d * s).norm() < TARGET_RADIUS
}

/// Per-cell membership of the Attacker's dominance regions over the
/// Defender and over the Turret, row-major with `y` outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMasks {
    pub domain: Rect,
    pub resolution: usize,
    pub defender: Vec<bool>,
    pub turret: Vec<bool>,
}

impl RegionMasks {
    pub fn point(&self, i: usize, j: usize) -> Point {
        let n = (self.resolution - 1) as f64;
        Point::new(
            self.domain.min.x + self.domain.width() * i as f64 / n,
            self.domain.min.y + self.domain.height() * j as f64 / n,
        )
    }

    pub fn cell_size(&self) -> f64 {
        self.domain.width() / (self.resolution - 1) as f64
    }
}

pub fn region_membership_grid(state: &GameState, params: &GameParams, direction: TurnDirection, grid: &GridSpec) -> RegionMasks {
    let domain = oracle_domain(state);
    let n = grid.resolution.max(2);
    let mut masks = RegionMasks { domain, resolution: n, defender: Vec::new(), turret: Vec::new() };
    let cells: Vec<(bool, bool)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let p = masks.point(k % n, k / n);
            (
                defender_slower(state.attacker, state.defender, p, params),
                arrives_first(state.attacker, state.theta_t, p, direction, params),
            )
        })
        .collect();
    (masks.defender, masks.turret) = cells.into_iter().unzip();
    masks
}

/// Whether the Attacker can end its straight run at `p` uncaptured.
pub fn feasible_capture_point(state: &GameState, params: &GameParams, direction: TurnDirection, p: Point) -> bool {
    defender_slower(state.attacker, state.defender, p, params)
        && !obstructed(state.attacker, p)
        && survives_run(state.attacker, state.theta_t, p, direction, params)
}

/// Nearest-to-target point the Attacker can reach uncaptured, found by a
/// refining grid search.
///
/// Returns `Error::AttackerWins` when no sample is feasible or the best one is
/// within a final cell of the target.
pub fn brute_capture_point(state: &GameState, params: &GameParams, direction: TurnDirection, grid: &GridSpec) -> Result<Point> {
    let domain = oracle_domain(state);
    let n = grid.resolution.max(2);
    let mut window = domain;
    // The Attacker's own position seeds the search: a feasible region much
    // smaller than a coarse cell is otherwise invisible.
    let mut best = feasible_capture_point(state, params, direction, state.attacker).then(|| (state.attacker.norm(), state.attacker));
    for _ in 0..=grid.refine_rounds {
        let dx = window.width() / (n - 1) as f64;
        let dy = window.height() / (n - 1) as f64;
        let pass = (0..n)
            .into_par_iter()
            .filter_map(|j| {
                let mut row: Option<(f64, usize, Point)> = None;
                for i in 0..n {
                    let p = Point::new(window.min.x + dx * i as f64, window.min.y + dy * j as f64);
                    let r = p.norm();
                    if row.is_some_and(|(b, _, _)| r >= b) || !feasible_capture_point(state, params, direction, p) {
                        continue;
                    }
                    row = Some((r, j * n + i, p));
                }
                row
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((r, _, p)) = pass {
            if best.is_none_or(|(b, _)| r < b) {
                best = Some((r, p));
            }
        }
        let Some((_, centre)) = best else { break };
        let half = 0.5 * window.width().max(window.height()) / grid.shrink;
        let w = Rect::centered(centre, half);
        window = Rect::new(
            Point::new(w.min.x.max(domain.min.x), w.min.y.max(domain.min.y)),
            Point::new(w.max.x.min(domain.max.x), w.max.y.min(domain.max.y)),
        );
    }
    let (r, p) = best.ok_or_else(|| Error::AttackerWins("no feasible capture point".into()))?;
    if r <= TARGET_RADIUS + grid.final_cell_diagonal(&domain) {
        return Err(Error::AttackerWins(format!("target reachable (best radius {r})")));
    }
    Ok(p)
}

/// Defender-only value `|c| - rho - 1` evaluated directly from the state.
fn defender_value(state: &GameState, params: &GameParams) -> f64 {
    let (nu, mu) = (params.nu(), params.mu());
    let alpha = nu * nu / (mu * mu - nu * nu);
    let c = state.attacker * (1.0 + alpha) - state.defender * alpha;
    c.norm() - mu * alpha / nu * (state.defender - state.attacker).norm() - 1.0
}

/// Costates by central finite differences of the Defender-only value.
pub fn fd_costates(state: &GameState, params: &GameParams) -> CostateVector {
    let diff = |bump: &dyn Fn(&mut GameState, f64)| {
        let (mut hi, mut lo) = (*state, *state);
        bump(&mut hi, FD_STEP);
        bump(&mut lo, -FD_STEP);
        (defender_value(&hi, params) - defender_value(&lo, params)) / (2.0 * FD_STEP)
    };
    CostateVector {
        lambda_xa: diff(&|s, h| s.attacker.x += h),
        lambda_ya: diff(&|s, h| s.attacker.y += h),
        lambda_xd: diff(&|s, h| s.defender.x += h),
        lambda_yd: diff(&|s, h| s.defender.y += h),
        lambda_theta_t: diff(&|s, h| s.theta_t += h),
    }
}

/// Closed-form costates of the Defender-only value.
pub fn analytic_costates(state: &GameState, params: &GameParams) -> CostateVector {
    let (nu, mu) = (params.nu(), params.mu());
    let alpha = nu * nu / (mu * mu - nu * nu);
    let c = state.attacker * (1.0 + alpha) - state.defender * alpha;
    let sep = state.attacker - state.defender;
    let k = mu * alpha / nu / sep.norm();
    let cn = c.norm();
    CostateVector {
        lambda_xa: c.x * (1.0 + alpha) / cn - k * sep.x,
        lambda_ya: c.y * (1.0 + alpha) / cn - k * sep.y,
        lambda_xd: -c.x * alpha / cn + k * sep.x,
        lambda_yd: -c.y * alpha / cn + k * sep.y,
        lambda_theta_t: 0.0,
    }
}

/// `|H|` with finite-difference costates of the Defender-only value.
pub fn hamiltonian_residual(state: &GameState, params: &GameParams) -> f64 {
    fd_costates(state, params).hamiltonian(params).abs()
}

/// Outcome of [`monotonicity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MonotonicityReport {
    /// Time pairs at which the contraction premise held and was tested.
    pub contraction_pairs: usize,
    /// Time pairs at which the expansion premise held and was tested.
    pub expansion_pairs: usize,
    pub points_tested: usize,
    /// Points in the continuing-direction region at the later time but not the earlier.
    pub contraction_violations: usize,
    /// Points in the reversing-direction region at the earlier time but not the later.
    pub expansion_violations: usize,
}

impl MonotonicityReport {
    pub fn violations(&self) -> usize {
        self.contraction_violations + self.expansion_violations
    }
}

/// Barrier angle computed from its definition for the premise checks.
fn barrier(r: f64, params: &GameParams) -> f64 {
    let k = params.omega() * r / params.nu();
    (k * k - 1.0).sqrt() - (1.0 / k).acos()
}

/// Drives the Attacker along a random walk of headings while the Turret turns
/// counter-clockwise, then checks the region inclusions between random time
/// pairs on random points near the Attacker.
///
/// The continuing-direction region must not gain points over time and the
/// reversing-direction region must not lose any, whenever the respective
/// premise holds at the earlier time.
pub fn monotonicity_check<R: Rng>(
    state: &GameState,
    params: &GameParams,
    horizon: f64,
    samples: usize,
    rng: &mut R,
) -> MonotonicityReport {
    const STEPS: usize = 200;
    const PAIRS: usize = 10;
    let dt = horizon / STEPS as f64;
    let mut path = vec![*state];
    let mut heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    for _ in 0..STEPS {
        let last = *path.last().unwrap();
        heading += rng.gen_range(-1.0..1.0);
        let next = GameState {
            defender: last.defender,
            attacker: last.attacker + Point::new(heading.cos(), heading.sin()) * (params.nu() * dt),
            theta_t: last.theta_t + params.omega() * dt,
        };
        let lead = initial_lead(next.attacker, next.theta_t, TurnDirection::Ccw);
        if next.attacker.norm() <= TARGET_RADIUS || lead <= 0.0 || lead >= TAU - 1e-9 {
            break;
        }
        path.push(next);
    }

    let mut report = MonotonicityReport::default();
    let reach = params.nu() * TAU / params.omega();
    let per_pair = samples.div_ceil(PAIRS);
    for _ in 0..PAIRS {
        let mut i = rng.gen_range(0..path.len());
        let mut j = rng.gen_range(0..path.len());
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        let (early, late) = (path[i], path[j]);
        let theta_a = initial_lead(early.attacker, early.theta_t, TurnDirection::Ccw);
        let theta_b = barrier(early.attacker.norm(), params);
        let contraction = theta_a < theta_b;
        let expansion = TAU - theta_a < theta_b;
        report.contraction_pairs += contraction as usize;
        report.expansion_pairs += expansion as usize;
        if !contraction && !expansion {
            continue;
        }
        let points: Vec<Point> = (0..per_pair)
            .map(|_| {
                let r = reach * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..TAU);
                early.attacker + Point::new(a.cos(), a.sin()) * r
            })
            .collect();
        report.points_tested += points.len();
        let member = |s: &GameState, p: Point, dir| survives_run(s.attacker, s.theta_t, p, dir, params);
        let (c, e) = points
            .par_iter()
            .map(|&p| {
                let c = contraction
                    && member(&late, p, TurnDirection::Ccw)
                    && !member(&early, p, TurnDirection::Ccw);
                let e = expansion && member(&early, p, TurnDirection::Cw) && !member(&late, p, TurnDirection::Cw);
                (c as usize, e as usize)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        report.contraction_violations += c;
        report.expansion_violations += e;
    }
    report
}
