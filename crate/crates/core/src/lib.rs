//! Equilibrium solver, simulator and brute-force checks for a planar
//! Turret-Defender-Attacker target-guarding game.

pub mod error;
pub mod game;
pub mod geometry;
pub mod numerics;
pub mod oracle;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use game::{GameParams, GameState, Point, TARGET_RADIUS};
pub use solver::{classify, solve, solve_direction, CaptureSolution, FullSolution, GameStatus, TerminationCase, TurnDirection};
