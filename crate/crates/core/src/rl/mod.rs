//! Q-learning machinery: tabular updates, a small MLP Q-network with
//! hand-written backprop, Adam, replay, exploration and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod dqn;
pub mod mlp;
pub mod policy;
pub mod replay;
pub mod tabular;

pub use adam::AdamState;
pub use checkpoint::Checkpoint;
pub use dqn::{bellman_target, dqn_train_step};
pub use mlp::{mse_loss, Activation, Dense, MlpParams};
pub use policy::{argmax, epsilon_greedy, EpsilonSchedule};
pub use replay::{ReplayBuffer, Transition};
pub use tabular::QTable;

/// Size of the action space (HT MCS 0-7).
pub const NUM_ACTIONS: usize = crate::phy::NUM_MCS;
