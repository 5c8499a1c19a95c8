//! JSON scenario files.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use turretguard_core::sim::SimConfig;
use turretguard_core::{GameParams, GameState, Point};

/// Largest number of cells a sweep may request.
pub const MAX_SWEEP_CELLS: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario field `{path}`: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { path: path.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub nu: f64,
    pub mu: f64,
    pub omega: f64,
    pub attacker: [f64; 2],
    pub defender: [f64; 2],
    /// Turret look angle in the fixed frame, radians.
    pub turret_angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

/// Simulation overrides; missing entries take the simulator defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_tol_dist: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_tol_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolve_period: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// Attacker distance from the Turret, keeping its polar angle.
    AttackerR,
    /// Attacker polar angle in the fixed frame, keeping its distance.
    AttackerTheta,
    DefenderX,
    DefenderY,
}

impl AxisName {
    pub fn column(self) -> &'static str {
        match self {
            AxisName::AttackerR => "attacker_r",
            AxisName::AttackerTheta => "attacker_theta",
            AxisName::DefenderX => "defender_x",
            AxisName::DefenderY => "defender_y",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub axis: AxisName,
    pub min: f64,
    pub max: f64,
    /// Samples along the axis, endpoints included.
    pub count: usize,
}

impl SweepAxis {
    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// Outermost axis first.
    pub axes: Vec<SweepAxis>,
}

impl SweepBlock {
    pub fn cells(&self) -> usize {
        self.axes.iter().fold(1usize, |n, a| n.saturating_mul(a.count))
    }
}

impl ScenarioFile {
    pub fn params(&self) -> Result<GameParams, ScenarioError> {
        GameParams::new(self.nu, self.mu, self.omega).map_err(|e| {
            let path = if self.mu.is_nan() || self.mu <= 0.0 {
                "mu"
            } else if self.omega.is_nan() || self.omega <= 0.0 {
                "omega"
            } else {
                "nu"
            };
            invalid(path, e.to_string())
        })
    }

    pub fn state(&self) -> Result<GameState, ScenarioError> {
        let defender = Point::new(self.defender[0], self.defender[1]);
        let attacker = Point::new(self.attacker[0], self.attacker[1]);
        if !defender.iter().all(|v| v.is_finite()) {
            return Err(invalid("defender", "coordinates must be finite"));
        }
        if !self.turret_angle.is_finite() {
            return Err(invalid("turret_angle", "must be finite"));
        }
        GameState::new(defender, attacker, self.turret_angle).map_err(|e| invalid("attacker", e.to_string()))
    }

    pub fn sim_config(&self) -> Result<SimConfig, ScenarioError> {
        let mut cfg = SimConfig::default();
        if let Some(b) = &self.sim {
            cfg.dt = b.dt.unwrap_or(cfg.dt);
            cfg.capture_tol_dist = b.capture_tol_dist.unwrap_or(cfg.capture_tol_dist);
            cfg.capture_tol_angle = b.capture_tol_angle.unwrap_or(cfg.capture_tol_angle);
            cfg.max_time = b.max_time.unwrap_or(cfg.max_time);
            cfg.resolve_period = b.resolve_period.unwrap_or(cfg.resolve_period);
        }
        let checks = [
            ("sim.dt", cfg.dt),
            ("sim.capture_tol_dist", cfg.capture_tol_dist),
            ("sim.capture_tol_angle", cfg.capture_tol_angle),
            ("sim.max_time", cfg.max_time),
        ];
        for (path, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(path, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(cfg)
    }

    fn validate_sweep(&self) -> Result<(), ScenarioError> {
        let Some(sweep) = &self.sweep else { return Ok(()) };
        if sweep.axes.is_empty() {
            return Err(invalid("sweep.axes", "at least one axis is required"));
        }
        for (i, a) in sweep.axes.iter().enumerate() {
            if a.count == 0 {
                return Err(invalid(&format!("sweep.axes[{i}].count"), "must be >= 1"));
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return Err(invalid(&format!("sweep.axes[{i}]"), "range must be finite"));
            }
            if sweep.axes[..i].iter().any(|b| b.axis == a.axis) {
                return Err(invalid(&format!("sweep.axes[{i}].axis"), "axis listed twice"));
            }
        }
        if sweep.cells() > MAX_SWEEP_CELLS {
            return Err(invalid("sweep.axes", format!("{} cells exceeds the limit of {MAX_SWEEP_CELLS}", sweep.cells())));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params()?;
        self.state()?;
        self.sim_config()?;
        self.validate_sweep()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::Parse {
            path: if path == "?" || path == "." { "$".to_string() } else { path },
            message: e.inner().to_string(),
        }
    })?;
    file.validate()?;
    Ok(file)
}
