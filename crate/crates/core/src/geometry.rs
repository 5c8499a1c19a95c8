//! Geometric primitives of the game.
//!
//! Angles handed to the turret-region functions are measured relative to the
//! Turret's current look angle. Everything assumes a counter-clockwise turning
//! Turret; the clockwise game is solved by mirroring (see `solver`).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::game::{GameParams, Point, TARGET_RADIUS};
use crate::numerics::{find_root, Bracket};

/// Absolute tolerance for angles found by root finding.
pub const ANGLE_TOL: f64 = 1e-10;
/// Residual tolerance used for `g_inverse`.
pub const RADIUS_TOL: f64 = 1e-13;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Wraps an angle to `[0, 2 pi)`.
pub fn wrap_tau(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Counter-clockwise turn the Turret makes before its line of sight meets a
/// point at relative angle `theta_p`, reached by the Attacker in a straight
/// line from relative angle `theta_a`.
///
/// The Attacker's counter-clockwise lead over the line of sight starts in
/// `[0, 2 pi)` and changes continuously along the path, so the point's angle
/// is unwrapped to within `pi` of the Attacker's. A negative result means the
/// path crosses the line of sight before arriving.
pub fn ccw_turn(theta_p: f64, theta_a: f64) -> f64 {
    let lead = wrap_tau(theta_a);
    lead + wrap_pi(theta_p - lead)
}

/// Polar coordinates relative to the Turret's look angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    /// Angle relative to the look angle, in `(-pi, pi]`.
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta: wrap_pi(theta) }
    }

    /// Cartesian point in the frame whose +x axis is the look angle.
    pub fn to_local(&self) -> Point {
        Point::new(self.r * self.theta.cos(), self.r * self.theta.sin())
    }

    /// Cartesian point in the fixed frame.
    pub fn to_cartesian(&self, theta_t: f64) -> Point {
        let a = self.theta + theta_t;
        Point::new(self.r * a.cos(), self.r * a.sin())
    }

    /// Counter-clockwise turn needed to align with this point, in `[0, 2 pi)`.
    pub fn ccw_angle(&self) -> f64 {
        wrap_tau(self.theta)
    }
}

pub fn to_polar(p: Point, theta_t: f64) -> PolarPoint {
    PolarPoint::new(p.norm(), p.y.atan2(p.x) - theta_t)
}

/// Which root of a polar circle equation to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The root nearer the Turret.
    Lower,
    Upper,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Lower => -1.0,
            Branch::Upper => 1.0,
        }
    }
}

/// Boundary of the Attacker's dominance region over the Defender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApolloniusCircle {
    pub center: Point,
    pub radius: f64,
    /// Distance from the Turret to the centre.
    pub r_c: f64,
    /// Polar angle of the centre in the frame the agents were given in.
    pub theta_c: f64,
    pub alpha: f64,
}

/// Apollonius circle of points the Attacker and Defender reach at the same
/// time. Pass the agents in the turret frame to get `theta_c` relative to the
/// look angle.
pub fn apollonius_circle(attacker: Point, defender: Point, params: &GameParams) -> Result<ApolloniusCircle> {
    let sep = (defender - attacker).norm();
    if sep == 0.0 {
        return Err(Error::CoincidentAgents);
    }
    let alpha = params.alpha();
    let center = attacker * (1.0 + alpha) - defender * alpha;
    let radius = params.mu() * alpha / params.nu() * sep;
    Ok(ApolloniusCircle { center, radius, r_c: center.norm(), theta_c: center.y.atan2(center.x), alpha })
}

impl ApolloniusCircle {
    /// Closed-disk membership.
    pub fn contains(&self, p: Point) -> bool {
        (p - self.center).norm() <= self.radius
    }

    pub fn origin_inside(&self) -> bool {
        self.r_c <= self.radius
    }

    /// Point of the circle closest to the Turret.
    pub fn closest_to_origin(&self) -> Result<Point> {
        if self.origin_inside() {
            return Err(Error::OriginInsideApollonius { r_c: self.r_c, rho: self.radius });
        }
        Ok(self.center * ((self.r_c - self.radius) / self.r_c))
    }

    pub fn boundary_point(&self, phi: f64) -> Point {
        self.center + Point::new(phi.cos(), phi.sin()) * self.radius
    }

    /// Half-width `asin(rho / r_c)` of the angular range the circle subtends.
    pub fn angular_half_width(&self) -> Result<f64> {
        if self.origin_inside() {
            return Err(Error::OriginInsideApollonius { r_c: self.r_c, rho: self.radius });
        }
        Ok((self.radius / self.r_c).asin())
    }

    /// Radial distance of the circle along the ray at angle `theta`, or `None`
    /// when the ray misses the circle.
    pub fn radius_at(&self, theta: f64, branch: Branch) -> Result<Option<f64>> {
        let half = self.angular_half_width()?;
        let delta = wrap_pi(theta - self.theta_c);
        if delta.abs() > half {
            return Ok(None);
        }
        Ok(Some(self.radius_at_unchecked(delta, branch)))
    }

    /// `radius_at` for an offset `delta` from `theta_c` already known to be
    /// inside the angular range; the discriminant is clamped at zero.
    pub(crate) fn radius_at_unchecked(&self, delta: f64, branch: Branch) -> f64 {
        let s = self.r_c * delta.sin();
        let disc = (self.radius * self.radius - s * s).max(0.0);
        self.r_c * delta.cos() + branch.sign() * disc.sqrt()
    }
}

fn check_turn_radius(function: &'static str, r: f64, params: &GameParams) -> Result<f64> {
    let ratio = params.turn_radius() / r;
    if !(r > 0.0) || ratio > 1.0 || ratio.is_nan() {
        return Err(Error::Domain { function, value: r });
    }
    Ok(ratio)
}

fn stretch(r: f64, params: &GameParams) -> f64 {
    let k = params.omega() * r / params.nu();
    (k * k - 1.0).max(0.0).sqrt()
}

/// `sqrt(omega^2 r^2 / nu^2 - 1) + asin(nu / (r omega))`, defined for
/// `r >= nu / omega` and strictly increasing there.
pub fn g(r: f64, params: &GameParams) -> Result<f64> {
    let ratio = check_turn_radius("g", r, params)?;
    Ok(stretch(r, params) + ratio.asin())
}

/// Barrier angle `sqrt(omega^2 r^2 / nu^2 - 1) - acos(nu / (r omega))`.
///
/// From polar angle `theta_A <= theta_barrier(r_A)` the Attacker cannot reach
/// the `nu / omega` disk against a Turret turning towards it.
pub fn theta_barrier(r: f64, params: &GameParams) -> Result<f64> {
    let ratio = check_turn_radius("theta_barrier", r, params)?;
    Ok(stretch(r, params) - ratio.acos())
}

/// Inverse of [`g`] by bisection; `y` must be at least `pi / 2`.
pub fn g_inverse(y: f64, params: &GameParams) -> Result<f64> {
    if !(y >= FRAC_PI_2) {
        return Err(Error::Domain { function: "g_inverse", value: y });
    }
    let lo = params.turn_radius();
    if y == FRAC_PI_2 {
        return Ok(lo);
    }
    // g(r) > omega r / nu - 1, so this upper end always brackets.
    let hi = (y + 1.0) * params.nu() / params.omega() + lo;
    let f = |r: f64| g(r, params).map(|v| v - y).unwrap_or(f64::NAN);
    let bracket = Bracket::new(&f, lo, hi)?;
    Ok(find_root(f, bracket, RADIUS_TOL))
}

/// Membership in the Attacker's dominance region over a counter-clockwise
/// Turret: the straight-line travel time to `p` does not exceed the Turret's
/// turn time to it.
///
/// The turn angle is taken from [`ccw_turn`]; points behind the line of sight
/// (negative turn) are excluded. The inequality is closed up to a relative
/// slack of `1e-12`.
pub fn in_turret_region(p: PolarPoint, attacker: PolarPoint, params: &GameParams) -> bool {
    let theta = ccw_turn(p.theta, attacker.theta);
    let theta_a = attacker.ccw_angle();
    if theta < 0.0 {
        return false;
    }
    let half = 0.5 * (theta - theta_a);
    let dist_sq = (p.r - attacker.r).powi(2) + 4.0 * p.r * attacker.r * half.sin().powi(2);
    let reach = params.nu() * theta / params.omega();
    dist_sq <= reach * reach * (1.0 + 1e-12) + 1e-300
}

/// Root of the turret-region boundary along the ray at counter-clockwise turn
/// `theta`; `None` when the ray misses the region or a root is negative.
pub fn turret_region_radius_at(attacker: PolarPoint, theta: f64, branch: Branch, params: &GameParams) -> Option<f64> {
    let disc = turret_discriminant(attacker, theta, params);
    if theta < 0.0 || disc < 0.0 {
        return None;
    }
    let theta_a = attacker.ccw_angle();
    let mid = attacker.r * (theta - theta_a).cos();
    let (lower, upper) = (mid - disc.sqrt(), mid + disc.sqrt());
    if lower < 0.0 {
        return None;
    }
    Some(match branch {
        Branch::Lower => lower,
        Branch::Upper => upper,
    })
}

/// `(nu theta / omega)^2 - r_A^2 sin^2(theta - theta_A)`.
pub fn turret_discriminant(attacker: PolarPoint, theta: f64, params: &GameParams) -> f64 {
    let reach = params.nu() * theta / params.omega();
    let s = attacker.r * (theta - attacker.ccw_angle()).sin();
    reach * reach - s * s
}

/// Lower branch of the turret-region boundary with the discriminant clamped at
/// zero, for use inside a known angular domain.
pub(crate) fn turret_lower_unchecked(attacker: PolarPoint, theta: f64, params: &GameParams) -> f64 {
    let disc = turret_discriminant(attacker, theta, params).max(0.0);
    attacker.r * (theta - attacker.ccw_angle()).cos() - disc.sqrt()
}

/// Angular domain of the Attacker's dominance region over the Turret.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurretRegionBounds {
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Angle at which the boundary slope matches `nu / omega`.
    pub theta_u: f64,
}

/// Finds the two angles where `nu theta / omega = r_A |sin(theta - theta_A)|`
/// around the Attacker. Requires `theta_A <= theta_barrier(r_A)`, otherwise the
/// region is not a single lobe and `Error::Premise` is returned.
pub fn turret_region_bounds(attacker: PolarPoint, params: &GameParams) -> Result<TurretRegionBounds> {
    let theta_a = attacker.ccw_angle();
    let r_a = attacker.r;
    if theta_a <= 0.0 {
        return Err(Error::Premise("attacker is on the line of sight".into()));
    }
    if r_a <= params.turn_radius() {
        return Err(Error::Premise(format!("r_A = {r_a} is inside the nu/omega disk")));
    }
    let barrier = theta_barrier(r_a, params)?;
    if theta_a > barrier {
        return Err(Error::Premise(format!("theta_A = {theta_a} exceeds the barrier angle {barrier}")));
    }
    let ratio = params.nu() / params.omega();
    let gap = |th: f64| ratio * th - r_a * (th - theta_a).sin().abs();
    let theta_u = (params.turn_radius() / r_a).acos() + theta_a;

    let start = (theta_a - FRAC_PI_2).max(0.0);
    let lower = Bracket::new(&gap, start, theta_a).map_err(|_| {
        Error::Premise(format!("attacker at r_A = {r_a} is too close for a {theta_a} rad turn"))
    })?;
    let theta_lo = find_root(gap, lower, ANGLE_TOL * 1e-3);
    let upper = Bracket::new(&gap, theta_a, theta_u)?;
    let theta_hi = find_root(gap, upper, ANGLE_TOL * 1e-3);
    Ok(TurretRegionBounds { theta_lo, theta_hi, theta_u })
}

/// True when `p` is in the target disk, or the segment from the Attacker to
/// `p` passes through the open target disk. Tangent segments are not shadowed.
pub fn in_shadow(p: Point, attacker: Point) -> bool {
    if p.norm_squared() <= TARGET_RADIUS * TARGET_RADIUS {
        return true;
    }
    segment_distance_to_origin(attacker, p) < TARGET_RADIUS
}

/// Closest distance from the origin to the segment `[a, b]`.
pub fn segment_distance_to_origin(a: Point, b: Point) -> f64 {
    let d = b - a;
    let len_sq = d.norm_squared();
    if len_sq == 0.0 {
        return a.norm();
    }
    let s = (-a.dot(&d) / len_sq).clamp(0.0, 1.0);
    (a + d * s).norm()
}
