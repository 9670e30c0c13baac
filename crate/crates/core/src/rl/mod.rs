//! Deep Q-learning building blocks: MLP with manual backprop, optimizers,
//! uniform replay, epsilon-greedy exploration and clipped double Q-learning.

mod cdql;
mod checkpoint;
mod mlp;
mod replay;

pub use cdql::{cdql_target, select_action, argmax, CdqlAgent, CdqlConfig, EpsilonSchedule};
pub use checkpoint::{AgentCheckpoint, NetworkCheckpoint, CHECKPOINT_FORMAT_VERSION};
pub use mlp::{Layer, Mlp, MlpTrace, Optimizer, OptimizerKind};
pub use replay::{ReplayBuffer, Transition};

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub state: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

/// Episodic environment with a discrete action space.
pub trait Environment {
    fn state_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    fn reset(&mut self) -> Vec<f64>;
    fn step(&mut self, action: usize) -> EnvStep;
}
