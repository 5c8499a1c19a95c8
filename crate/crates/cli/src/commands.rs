//! Command implementations. Each returns the text for stdout and an exit code.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use turretguard_core::sim::{run_feedback, run_open_loop, Trajectory};
use turretguard_core::{classify, solve, GameParams, GameState, GameStatus, Point, TurnDirection};

use crate::render::{render_svg, Figure};
use crate::report::{direction_name, round12, SolutionReport, SCHEMA_VERSION};
use crate::scenario::{parse_scenario, ScenarioError, ScenarioFile};
use crate::sweep::{run_sweep, write_sweep_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ATTACKER_WINS: i32 = 2;
pub const EXIT_UNRESOLVED: i32 = 3;
pub const EXIT_TIMEOUT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Core(#[from] turretguard_core::Error),
    #[error("{0}")]
    Input(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile, CliError> {
    Ok(parse_scenario(&read(path)?)?)
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self { stdout, stderr: String::new(), code: EXIT_OK }
    }
}

pub fn status_code(status: &GameStatus) -> i32 {
    match status {
        GameStatus::TeamWins(_) => EXIT_OK,
        GameStatus::AttackerWins => EXIT_ATTACKER_WINS,
        GameStatus::Unresolved(_) => EXIT_UNRESOLVED,
    }
}

pub fn cmd_solve(scenario: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let status = classify(&scenario.state()?, &scenario.params()?);
    let report = SolutionReport::from_status(&status);
    let stderr = match &status {
        GameStatus::TeamWins(_) => String::new(),
        GameStatus::AttackerWins => "attacker wins\n".to_string(),
        GameStatus::Unresolved(m) => format!("unresolved: {m}\n"),
    };
    Ok(CommandOutput { stdout: report.to_json() + "\n", stderr, code: status_code(&status) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    OpenLoop,
    Feedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSummary {
    pub schema_version: u32,
    pub mode: String,
    pub outcome: String,
    pub terminal_distance: f64,
    pub value: f64,
    /// `|terminal_distance - (value + 1)|`.
    pub residual: f64,
    pub t_f: f64,
    pub final_time: f64,
    pub attacker_guess: Option<String>,
}

/// Runs the simulation and returns the trajectory alongside its summary.
pub fn simulate_scenario(
    scenario: &ScenarioFile,
    mode: SimMode,
    guess: Option<TurnDirection>,
) -> Result<Result<(Trajectory, SimulationSummary), GameStatus>, CliError> {
    let state = scenario.state()?;
    let params = scenario.params()?;
    let config = scenario.sim_config()?;
    let status = classify(&state, &params);
    let GameStatus::TeamWins(sol) = status else { return Ok(Err(status)) };
    let chosen = sol.chosen_solution();
    let (traj, guess) = match mode {
        SimMode::OpenLoop => {
            config.validate()?;
            (run_open_loop(&state, &params, chosen, &config), None)
        }
        SimMode::Feedback => {
            let g = guess.unwrap_or(sol.chosen);
            (run_feedback(&state, &params, &config, g)?, Some(direction_name(g).to_string()))
        }
    };
    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        mode: match mode {
            SimMode::OpenLoop => "open-loop".into(),
            SimMode::Feedback => "feedback".into(),
        },
        outcome: traj.outcome.name().to_string(),
        terminal_distance: round12(traj.terminal_distance),
        value: round12(sol.value),
        residual: round12((traj.terminal_distance - (sol.value + 1.0)).abs()),
        t_f: round12(chosen.t_f),
        final_time: round12(traj.final_time()),
        attacker_guess: guess,
    };
    Ok(Ok((traj, summary)))
}

pub fn cmd_simulate(
    scenario: &ScenarioFile,
    mode: SimMode,
    guess: Option<TurnDirection>,
    csv: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    match simulate_scenario(scenario, mode, guess)? {
        Err(status) => {
            let report = SolutionReport::from_status(&status);
            Ok(CommandOutput {
                stdout: report.to_json() + "\n",
                stderr: "no team-win equilibrium to simulate\n".into(),
                code: status_code(&status),
            })
        }
        Ok((traj, summary)) => {
            if let Some(path) = csv {
                let mut buf = Vec::new();
                traj.write_csv(&mut buf).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
                write(path, &buf)?;
            }
            let code = if traj.outcome.name() == "Timeout" { EXIT_TIMEOUT } else { EXIT_OK };
            let stdout = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
            Ok(CommandOutput { stdout, stderr: String::new(), code })
        }
    }
}

pub fn cmd_sweep(scenario: &ScenarioFile, out: &Path) -> Result<CommandOutput, CliError> {
    let rows = run_sweep(scenario)?;
    let sweep = scenario.sweep.as_ref().expect("validated by run_sweep");
    let mut buf = Vec::new();
    write_sweep_csv(sweep, &rows, &mut buf).map_err(|source| CliError::Io { path: out.display().to_string(), source })?;
    write(out, &buf)?;
    Ok(CommandOutput::ok(format!("{} rows written to {}\n", rows.len(), out.display())))
}

/// States of a trajectory CSV, in file order.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<GameState>, CliError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != "t,x_D,y_D,x_A,y_A,theta_T" {
        return Err(CliError::Input(format!("unexpected trajectory header `{header}`")));
    }
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Input(format!("line {}: {e}", i + 2)))?;
        if v.len() != 6 {
            return Err(CliError::Input(format!("line {}: expected 6 fields, got {}", i + 2, v.len())));
        }
        states.push(GameState { defender: Point::new(v[1], v[2]), attacker: Point::new(v[3], v[4]), theta_t: v[5] });
    }
    if states.is_empty() {
        return Err(CliError::Input("trajectory has no rows".into()));
    }
    Ok(states)
}

/// Renders a scenario, or a trajectory CSV whose first row is solved with
/// `params`.
pub fn cmd_render(input: &Path, svg: &Path, params: Option<GameParams>) -> Result<CommandOutput, CliError> {
    let text = read(input)?;
    let is_csv = text.trim_start().starts_with("t,");
    let (state, params, traj) = if is_csv {
        let states = parse_trajectory_csv(&text)?;
        let params = match params {
            Some(p) => p,
            None => GameParams::new(0.7, 1.0, 1.0)?,
        };
        let first = states[0];
        let state = GameState::new(first.defender, first.attacker, first.theta_t)?;
        (state, params, Some(states))
    } else {
        let scenario = parse_scenario(&text)?;
        (scenario.state()?, scenario.params()?, None)
    };
    let sol = match solve(&state, &params) {
        Ok(sol) => sol,
        Err(turretguard_core::Error::AttackerWins(_)) => {
            return Ok(CommandOutput {
                stdout: SolutionReport::from_status(&GameStatus::AttackerWins).to_json() + "\n",
                stderr: "render skipped: the Attacker wins from this state\n".into(),
                code: EXIT_ATTACKER_WINS,
            });
        }
        Err(e) => {
            return Ok(CommandOutput {
                stdout: SolutionReport::from_status(&GameStatus::Unresolved(e.to_string())).to_json() + "\n",
                stderr: format!("render skipped: {e}\n"),
                code: EXIT_UNRESOLVED,
            });
        }
    };
    let mut fig = Figure::from_solution(state, params, sol);
    if let Some(states) = traj {
        let last = states[states.len() - 1];
        fig.terminal_defender = last.defender;
        fig.terminal_attacker = last.attacker;
        fig.paths = Some((states.iter().map(|s| s.defender).collect(), states.iter().map(|s| s.attacker).collect()));
    }
    write(svg, render_svg(&fig).as_bytes())?;
    Ok(CommandOutput::ok(format!("figure written to {}\n", svg.display())))
}
