//! Game parameters and the five-dimensional game state.

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Cartesian point in the plane. The Turret sits at the origin.
pub type Point = Vector2<f64>;

/// Radius of the target circle centred on the Turret.
pub const TARGET_RADIUS: f64 = 1.0;

/// Speeds and turn rate of the three agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    nu: f64,
    mu: f64,
    omega: f64,
}

impl GameParams {
    /// Validates that the Attacker is strictly slower than both the Defender
    /// and the Turret's line of sight at the target radius.
    pub fn new(nu: f64, mu: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("nu", nu), ("mu", mu), ("omega", omega)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if nu >= mu {
            return Err(Error::InvalidParams(format!("nu ({nu}) must be < mu ({mu})")));
        }
        if nu >= omega * TARGET_RADIUS {
            return Err(Error::InvalidParams(format!(
                "nu ({nu}) must be < omega * target_radius ({})",
                omega * TARGET_RADIUS
            )));
        }
        Ok(Self { nu, mu, omega })
    }

    /// Attacker speed.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Defender speed.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Turret turn rate.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn target_radius(&self) -> f64 {
        TARGET_RADIUS
    }

    /// `nu^2 / (mu^2 - nu^2)`, the Apollonius scale factor.
    pub fn alpha(&self) -> f64 {
        self.nu * self.nu / (self.mu * self.mu - self.nu * self.nu)
    }

    /// Radius `nu / omega` inside which the Attacker out-turns the Turret.
    pub fn turn_radius(&self) -> f64 {
        self.nu / self.omega
    }
}

/// Positions of the Defender and Attacker plus the Turret look angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameState {
    pub defender: Point,
    pub attacker: Point,
    /// Look angle in radians, measured from the +x axis.
    pub theta_t: f64,
}

impl GameState {
    /// Builds a state for solving: the Attacker must start outside the target.
    pub fn new(defender: Point, attacker: Point, theta_t: f64) -> Result<Self> {
        let finite = defender.iter().chain(attacker.iter()).all(|v| v.is_finite()) && theta_t.is_finite();
        if !finite {
            return Err(Error::InvalidState("coordinates and look angle must be finite".into()));
        }
        if attacker.norm() <= TARGET_RADIUS {
            return Err(Error::InvalidState(format!(
                "attacker must start outside the target (r_A = {})",
                attacker.norm()
            )));
        }
        Ok(Self { defender, attacker, theta_t })
    }

    pub fn attacker_range(&self) -> f64 {
        self.attacker.norm()
    }

    /// Reflects both mobile agents across the Turret's line of sight.
    pub fn mirrored(&self) -> Self {
        Self {
            defender: reflect_across(self.defender, self.theta_t),
            attacker: reflect_across(self.attacker, self.theta_t),
            theta_t: self.theta_t,
        }
    }
}

/// Reflection of `p` across the line through the origin at angle `axis`.
pub fn reflect_across(p: Point, axis: f64) -> Point {
    let (s, c) = (2.0 * axis).sin_cos();
    Point::new(c * p.x + s * p.y, s * p.x - c * p.y)
}

/// Rotation of `p` about the origin by `angle`.
pub fn rotate(p: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_fast_attacker() {
        assert!(GameParams::new(1.2, 1.0, 1.0).is_err());
        assert!(GameParams::new(0.7, 1.0, 0.5).is_err());
        assert!(GameParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GameParams::new(0.7, 1.0, 1.0).is_ok());
    }

    #[test]
    fn rejects_attacker_inside_target() {
        let err = GameState::new(Point::new(3.0, 0.0), Point::new(0.5, 0.0), 0.0);
        assert!(matches!(err, Err(Error::InvalidState(_))));
        assert!(GameState::new(Point::new(3.0, 0.0), Point::new(f64::NAN, 2.0), 0.0).is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        let s = GameState::new(Point::new(-0.3, 2.0), Point::new(1.5, 1.1), 0.7).unwrap();
        let back = s.mirrored().mirrored();
        assert_abs_diff_eq!(back.attacker, s.attacker, epsilon = 1e-12);
        assert_abs_diff_eq!(back.defender, s.defender, epsilon = 1e-12);
        // A point on the look axis is fixed.
        let on_axis = rotate(Point::new(2.0, 0.0), 0.7);
        assert_abs_diff_eq!(reflect_across(on_axis, 0.7), on_axis, epsilon = 1e-12);
    }
}
