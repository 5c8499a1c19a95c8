use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use turretguard::commands::{self, CliError, CommandOutput, SimMode, EXIT_FAILURE};
use turretguard_core::{GameParams, TurnDirection};

#[derive(Parser)]
#[command(name = "turretguard", version, about = "Turret and mobile defender guarding a target against one attacker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Guess {
    Ccw,
    Cw,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the game and print the solution as JSON.
    Solve { file: PathBuf },
    /// Simulate equilibrium play.
    Simulate {
        file: PathBuf,
        /// Constant equilibrium headings (default).
        #[arg(long, conflicts_with = "feedback")]
        open_loop: bool,
        /// Periodic re-solving by both sides.
        #[arg(long)]
        feedback: bool,
        /// Turn direction the Attacker initially assumes in feedback play.
        #[arg(long, value_enum, requires = "feedback")]
        guess: Option<Guess>,
        /// Write the trajectory CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve every cell of the scenario's sweep block.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a scenario or a trajectory CSV as SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// Speeds `nu,mu,omega` for a trajectory CSV (default 0.7,1,1).
        #[arg(long, value_delimiter = ',', num_args = 3)]
        params: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> Result<CommandOutput, CliError> {
    match cli.command {
        Command::Solve { file } => commands::cmd_solve(&commands::load_scenario(&file)?),
        Command::Simulate { file, open_loop: _, feedback, guess, csv } => {
            let mode = if feedback { SimMode::Feedback } else { SimMode::OpenLoop };
            let guess = guess.map(|g| match g {
                Guess::Ccw => TurnDirection::Ccw,
                Guess::Cw => TurnDirection::Cw,
            });
            commands::cmd_simulate(&commands::load_scenario(&file)?, mode, guess, csv.as_deref())
        }
        Command::Sweep { file, out } => commands::cmd_sweep(&commands::load_scenario(&file)?, &out),
        Command::Render { file, svg, params } => {
            let params = match params {
                Some(v) => Some(GameParams::new(v[0], v[1], v[2])?),
                None => None,
            };
            commands::cmd_render(&file, &svg, params)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
