//! JSON solution reports.

use serde::{Deserialize, Serialize};
use turretguard_core::{CaptureSolution, FullSolution, GameStatus, TerminationCase, TurnDirection};

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

pub fn case_name(case: TerminationCase) -> &'static str {
    match case {
        TerminationCase::SoloDefender => "SoloDefender",
        TerminationCase::SoloTurret => "SoloTurret",
        TerminationCase::Simultaneous => "Simultaneous",
        TerminationCase::FallbackPoint => "FallbackPoint",
        TerminationCase::AttackerWins => "AttackerWins",
    }
}

pub fn direction_name(dir: TurnDirection) -> &'static str {
    match dir {
        TurnDirection::Ccw => "ccw",
        TurnDirection::Cw => "cw",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    TeamWins,
    AttackerWins,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Headings {
    pub attacker: f64,
    pub defender: f64,
    /// Turret turn control, `+1` counter-clockwise.
    pub turret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionReport {
    pub value: f64,
    pub case: String,
    pub capture_point: [f64; 2],
    pub headings: Headings,
    pub t_f: f64,
}

impl From<&CaptureSolution> for DirectionReport {
    fn from(s: &CaptureSolution) -> Self {
        Self {
            value: round12(s.value),
            case: case_name(s.case).to_string(),
            capture_point: [round12(s.capture_point.x), round12(s.capture_point.y)],
            headings: Headings { attacker: round12(s.heading_a), defender: round12(s.heading_d), turret: round12(s.u_t) },
            t_f: round12(s.t_f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionReport {
    pub schema_version: u32,
    pub status: Status,
    pub value: Option<f64>,
    pub case: Option<String>,
    pub direction: Option<String>,
    pub dispersal: Option<bool>,
    pub capture_point: Option<[f64; 2]>,
    pub headings: Option<Headings>,
    pub t_f: Option<f64>,
    pub ccw: Option<DirectionReport>,
    pub cw: Option<DirectionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SolutionReport {
    fn empty(status: Status, message: Option<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            status,
            value: None,
            case: None,
            direction: None,
            dispersal: None,
            capture_point: None,
            headings: None,
            t_f: None,
            ccw: None,
            cw: None,
            message,
        }
    }

    pub fn from_solution(sol: &FullSolution) -> Self {
        let chosen = DirectionReport::from(sol.chosen_solution());
        Self {
            schema_version: SCHEMA_VERSION,
            status: Status::TeamWins,
            value: Some(round12(sol.value)),
            case: Some(chosen.case.clone()),
            direction: Some(direction_name(sol.chosen).to_string()),
            dispersal: Some(sol.dispersal),
            capture_point: Some(chosen.capture_point),
            headings: Some(chosen.headings.clone()),
            t_f: Some(chosen.t_f),
            ccw: Some(DirectionReport::from(&sol.ccw)),
            cw: Some(DirectionReport::from(&sol.cw)),
            message: None,
        }
    }

    pub fn from_status(status: &GameStatus) -> Self {
        match status {
            GameStatus::TeamWins(sol) => Self::from_solution(sol),
            GameStatus::AttackerWins => {
                Self::empty(Status::AttackerWins, Some("the Attacker reaches the target in both turn directions".into()))
            }
            GameStatus::Unresolved(msg) => Self::empty(Status::Unresolved, Some(msg.clone())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
