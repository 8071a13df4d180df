//! Reinforcement-learning Wi-Fi rate adaptation on a simulated 802.11n link.
//!
//! The crate bundles a deterministic link simulator ([`sim`]) built on a
//! Friis/logistic PHY model ([`phy`]), a from-scratch deep Q-learning stack
//! ([`rl`]), rate adapters including the DQN-driven DARA agent ([`agents`]),
//! and a train/eval/sweep harness with CSV logging ([`harness`], [`io`]).

pub mod agents;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod phy;
pub mod rl;
pub mod sim;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ENV_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 2;

/// Channel randomness (frame success draws).
pub fn env_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ENV_STREAM);
    rng
}

/// Agent randomness (weight init, exploration, replay sampling). Kept on a
/// separate stream so agent changes never perturb the channel.
pub fn agent_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(AGENT_STREAM);
    rng
}
