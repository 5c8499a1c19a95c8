//! Parameter sweeps over the initial state.

use std::io::{self, Write};

use rayon::prelude::*;
use turretguard_core::{classify, GameParams, GameState, GameStatus, Point};

use crate::report::{case_name, direction_name, round12};
use crate::scenario::{AxisName, ScenarioError, ScenarioFile, SweepBlock};

/// Environment variable capping the sweep thread count.
pub const THREADS_ENV: &str = "TURRETGUARD_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub case: String,
    pub value: Option<f64>,
    pub direction: Option<String>,
}

fn cell_state(base: &ScenarioFile, sweep: &SweepBlock, index: usize) -> (Vec<f64>, Point, Point) {
    let mut coords = vec![0.0; sweep.axes.len()];
    let mut rem = index;
    for (k, axis) in sweep.axes.iter().enumerate().rev() {
        coords[k] = axis.value(rem % axis.count);
        rem /= axis.count;
    }
    let a0 = Point::new(base.attacker[0], base.attacker[1]);
    let (mut r, mut th) = (a0.norm(), a0.y.atan2(a0.x));
    let mut d = Point::new(base.defender[0], base.defender[1]);
    for (axis, &v) in sweep.axes.iter().zip(&coords) {
        match axis.axis {
            AxisName::AttackerR => r = v,
            AxisName::AttackerTheta => th = v,
            AxisName::DefenderX => d.x = v,
            AxisName::DefenderY => d.y = v,
        }
    }
    (coords, Point::new(r * th.cos(), r * th.sin()), d)
}

fn solve_cell(base: &ScenarioFile, sweep: &SweepBlock, params: &GameParams, index: usize) -> SweepRow {
    let (coords, attacker, defender) = cell_state(base, sweep, index);
    let status = match GameState::new(defender, attacker, base.turret_angle) {
        Ok(state) => classify(&state, params),
        // Starting on or inside the target.
        Err(_) => GameStatus::AttackerWins,
    };
    match status {
        GameStatus::TeamWins(sol) => SweepRow {
            coords,
            case: case_name(sol.chosen_solution().case).to_string(),
            value: Some(round12(sol.value)),
            direction: Some(if sol.dispersal { "both".into() } else { direction_name(sol.chosen).into() }),
        },
        GameStatus::AttackerWins => SweepRow { coords, case: "AttackerWins".into(), value: None, direction: None },
        GameStatus::Unresolved(_) => SweepRow { coords, case: "Unresolved".into(), value: None, direction: None },
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Solves every cell, last axis varying fastest.
pub fn run_sweep(scenario: &ScenarioFile) -> Result<Vec<SweepRow>, ScenarioError> {
    scenario.validate()?;
    let sweep = scenario.sweep.as_ref().ok_or_else(|| ScenarioError::Invalid {
        path: "sweep".into(),
        message: "scenario has no sweep block".into(),
    })?;
    let params = scenario.params()?;
    let n = sweep.cells();
    let work = || (0..n).into_par_iter().map(|i| solve_cell(scenario, sweep, &params, i)).collect::<Vec<_>>();
    let rows = match thread_count() {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(sweep: &SweepBlock, rows: &[SweepRow], mut out: W) -> io::Result<()> {
    let header: Vec<&str> = sweep.axes.iter().map(|a| a.axis.column()).collect();
    writeln!(out, "{},case,value,direction", header.join(","))?;
    for row in rows {
        for c in &row.coords {
            write!(out, "{},", round12(*c))?;
        }
        let value = row.value.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{}", row.case, value, row.direction.as_deref().unwrap_or(""))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn scenario(axes: &str) -> ScenarioFile {
        parse_scenario(&format!(
            r#"{{"nu":0.7,"mu":1,"omega":1,"attacker":[3,0],"defender":[3.5,0],"turret_angle":3.141592653589793,"sweep":{{"axes":[{axes}]}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn row_major_order() {
        let s = scenario(
            r#"{"axis":"defender_x","min":3.5,"max":4,"count":2},{"axis":"defender_y","min":0,"max":1,"count":2}"#,
        );
        let rows = run_sweep(&s).unwrap();
        let coords: Vec<_> = rows.iter().map(|r| r.coords.clone()).collect();
        assert_eq!(coords, vec![vec![3.5, 0.0], vec![3.5, 1.0], vec![4.0, 0.0], vec![4.0, 1.0]]);
    }

    #[test]
    fn inside_target_cells_are_attacker_wins() {
        let s = scenario(r#"{"axis":"attacker_r","min":0.5,"max":1,"count":3}"#);
        let rows = run_sweep(&s).unwrap();
        assert!(rows.iter().all(|r| r.case == "AttackerWins" && r.value.is_none()));
        let mut buf = Vec::new();
        write_sweep_csv(s.sweep.as_ref().unwrap(), &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0.5,AttackerWins,,");
    }
}
