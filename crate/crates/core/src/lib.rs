//! Headless first-person-shooter duel simulator with a tabular SARSA(lambda)
//! bot that learns where to aim from damage feedback.
//!
//! The learner observes the nearest opponent every 0.25 s logic tick,
//! encodes it into one of 1184 states and picks one of 44 aim offsets.
//! Updates are deferred to the end of each shooting period, optionally with
//! cluster-weighted rewards, and selections can be held over several ticks.

pub mod action_grid;
pub mod geometry;
pub mod harness;
pub mod persistence;
pub mod protocol;
pub mod reward_shaping;
pub mod sarsa;
pub mod sim;
pub mod snapshot;
pub mod state_codec;

pub use action_grid::{ActionGrid, AimAction, AimOffset, NUM_ACTIONS};
pub use persistence::PasState;
pub use reward_shaping::{Outcome, ShootingPeriodLog};
pub use sarsa::{AgentConfig, QTable, Successor, TraceTable};
pub use state_codec::{RelativeObservation, StateEncoder, StateKey, NUM_STATES};
