use thiserror::Error;

/// Everything that can go wrong while setting up, solving or verifying a game.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// Attacker and Defender occupy the same point; capture has already happened.
    #[error("attacker and defender are coincident")]
    CoincidentAgents,
    /// The Turret sits inside the Attacker's dominance region over the Defender.
    #[error("origin lies inside the Apollonius circle (r_c = {r_c}, rho = {rho})")]
    OriginInsideApollonius { r_c: f64, rho: f64 },
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// A precondition of a closed-form construction does not hold for this state.
    #[error("premise violated: {0}")]
    Premise(String),
    #[error("dominance region boundaries do not intersect")]
    NoIntersection,
    /// The Attacker can reach the target before either captor intercepts it.
    #[error("attacker wins: {0}")]
    AttackerWins(String),
}

pub type Result<T> = std::result::Result<T, Error>;
