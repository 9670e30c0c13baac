use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Optimizer, OptimizerKind};
use super::replay::{ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::scenario::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdqlConfig {
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Minimum stored transitions before updates begin.
    pub learning_starts: usize,
    pub gamma: f64,
    /// Polyak factor for the target networks.
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of the planned training steps over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
    /// Gradient updates per observed transition once warmed up.
    pub updates_per_step: usize,
}

impl Default for CdqlConfig {
    fn default() -> Self {
        CdqlConfig {
            hidden_layers: vec![16],
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            batch_size: 64,
            buffer_capacity: 50_000,
            learning_starts: 64,
            gamma: 0.95,
            tau: 0.005,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.4,
            updates_per_step: 1,
        }
    }
}

impl CdqlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Validation("gamma must lie in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Validation("tau must lie in [0, 1]".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::Validation("batch size and buffer capacity must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return Err(Error::Validation("epsilon bounds must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Linear decay from `start` to `end` over `decay_steps`, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Clipped double-Q target. The bootstrap action is chosen by network 1 and
/// evaluated by both; the smaller estimate is used.
pub fn cdql_target(reward: f64, done: bool, q1_next: &[f64], q2_next: &[f64], gamma: f64) -> Result<f64> {
    if q1_next.is_empty() || q2_next.is_empty() {
        return Err(Error::Domain("empty Q vector".into()));
    }
    if q1_next.len() != q2_next.len() {
        return Err(Error::Dimension {
            expected: q1_next.len(),
            got: q2_next.len(),
        });
    }
    if done {
        return Ok(reward);
    }
    let a = argmax(q1_next);
    Ok(reward + gamma * q1_next[a].min(q2_next[a]))
}

/// Epsilon-greedy over `q`'s outputs.
pub fn select_action<R: Rng + ?Sized>(q: &Mlp, state: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(rng.random_range(0..q.output_dim()));
    }
    Ok(argmax(&q.forward(state)?))
}

/// Clipped double Q-learning agent: twin online networks, twin Polyak targets.
#[derive(Debug, Clone)]
pub struct CdqlAgent {
    pub config: CdqlConfig,
    pub q1: Mlp,
    pub q2: Mlp,
    pub target1: Mlp,
    pub target2: Mlp,
    opt1: Optimizer,
    opt2: Optimizer,
    pub buffer: ReplayBuffer,
    pub epsilon: EpsilonSchedule,
    explore_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
    /// Transitions observed so far; drives the epsilon schedule.
    pub steps: u64,
    pub updates: u64,
}

impl CdqlAgent {
    /// `stream_index` separates several agents trained under one seed.
    pub fn new(state_dim: usize, action_count: usize, config: CdqlConfig, seed: u64, stream_index: u64) -> Self {
        let mut widths = vec![state_dim];
        widths.extend(&config.hidden_layers);
        widths.push(action_count);
        let mut init = stream_rng(seed, Stream::Init, stream_index);
        let q1 = Mlp::new(&widths, &mut init);
        let q2 = Mlp::new(&widths, &mut init);
        let params = q1.param_count();
        CdqlAgent {
            target1: q1.clone(),
            target2: q2.clone(),
            q1,
            q2,
            opt1: Optimizer::new(config.optimizer, config.learning_rate, params),
            opt2: Optimizer::new(config.optimizer, config.learning_rate, params),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            epsilon: EpsilonSchedule {
                start: config.epsilon_start,
                end: config.epsilon_end,
                decay_steps: 0,
            },
            explore_rng: stream_rng(seed, Stream::Exploration, stream_index),
            replay_rng: stream_rng(seed, Stream::Replay, stream_index),
            steps: 0,
            updates: 0,
            config,
        }
    }

    /// Sets the epsilon decay horizon from the planned number of transitions.
    pub fn plan_steps(&mut self, total_steps: u64) {
        self.epsilon.decay_steps = (self.config.epsilon_decay_fraction * total_steps as f64).round() as u64;
    }

    pub fn current_epsilon(&self) -> f64 {
        self.epsilon.value(self.steps)
    }

    pub fn act(&mut self, state: &[f64]) -> usize {
        let eps = self.current_epsilon();
        select_action(&self.q1, state, eps, &mut self.explore_rng).expect("state width matches network")
    }

    pub fn act_with_epsilon(&mut self, state: &[f64], epsilon: f64) -> usize {
        select_action(&self.q1, state, epsilon, &mut self.explore_rng).expect("state width matches network")
    }

    pub fn greedy(&self, state: &[f64]) -> usize {
        argmax(&self.q1.forward(state).expect("state width matches network"))
    }

    /// Stores a transition and, once warmed up, performs `updates_per_step` updates. Returns the last loss.
    pub fn observe(&mut self, t: Transition) -> Option<f64> {
        self.buffer.push(t);
        self.steps += 1;
        if self.buffer.len() < self.config.learning_starts.max(1) {
            return None;
        }
        let mut loss = 0.0;
        for _ in 0..self.config.updates_per_step.max(1) {
            loss = self.train_step();
        }
        Some(loss)
    }

    /// Samples a batch from the replay buffer and updates on it.
    pub fn train_step(&mut self) -> f64 {
        let batch: Vec<Transition> = self
            .buffer
            .sample(self.config.batch_size, &mut self.replay_rng)
            .into_iter()
            .cloned()
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        self.update(&refs).expect("transition widths match network")
    }

    /// One MSE gradient step of both online networks toward the clipped target,
    /// then a Polyak refresh of both targets. Returns the mean of the two losses.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Domain("empty batch".into()));
        }
        let n = batch.len() as f64;
        let targets = batch
            .iter()
            .map(|t| {
                if t.done {
                    Ok(t.reward)
                } else {
                    let q1n = self.target1.forward(&t.next_state)?;
                    let q2n = self.target2.forward(&t.next_state)?;
                    cdql_target(t.reward, false, &q1n, &q2n, self.config.gamma)
                }
            })
            .collect::<Result<Vec<f64>>>()?;

        let mut total = 0.0;
        for (net, opt) in [(&mut self.q1, &mut self.opt1), (&mut self.q2, &mut self.opt2)] {
            let mut grads = Mlp::zeros(&net.widths());
            let mut upstream = vec![0.0; net.output_dim()];
            let mut loss = 0.0;
            for (t, y) in batch.iter().zip(&targets) {
                let trace = net.forward_trace(&t.state)?;
                let err = trace.output()[t.action] - y;
                loss += err * err / n;
                upstream.iter_mut().for_each(|u| *u = 0.0);
                upstream[t.action] = 2.0 * err / n;
                net.backward_into(&trace, &upstream, &mut grads)?;
            }
            opt.step(net, &grads);
            total += loss;
        }
        self.target1.soft_update(&self.q1, self.config.tau);
        self.target2.soft_update(&self.q2, self.config.tau);
        self.updates += 1;
        Ok(total / 2.0)
    }
}
