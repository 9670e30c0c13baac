//! Oracles and stub environments shared by the integration tests.
#![allow(dead_code)]

use dc_handover::rl::{EnvStep, Environment, Mlp};

/// Central finite-difference gradient of `sum_i c_i * f(x)_i` with respect to every parameter.
pub fn finite_difference_grad(net: &Mlp, x: &[f64], c: &[f64], h: f64) -> Vec<f64> {
    let base = net.params();
    let mut probe = net.clone();
    let objective = |n: &Mlp| -> f64 {
        n.forward(x)
            .unwrap()
            .iter()
            .zip(c)
            .map(|(y, w)| y * w)
            .sum()
    };
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe.set_params(&p).unwrap();
            let up = objective(&probe);
            p[i] = base[i] - h;
            probe.set_params(&p).unwrap();
            let down = objective(&probe);
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Deterministic 3-state, 2-action MDP. Action 0 walks 0 → 1 → 2 and stays
/// at 2 for reward 1; action 1 returns to state 0 with a small reward.
pub struct TinyMdp {
    pub state: usize,
}

pub const TINY_STATES: usize = 3;
pub const TINY_ACTIONS: usize = 2;
pub const TINY_GAMMA: f64 = 0.9;

pub fn tiny_transition(s: usize, a: usize) -> (usize, f64) {
    match (s, a) {
        (0, 0) => (1, 0.0),
        (0, _) => (0, 0.5),
        (1, 0) => (2, 0.0),
        (1, _) => (0, 0.0),
        (_, 0) => (2, 1.0),
        (_, _) => (0, 0.2),
    }
}

pub fn one_hot(s: usize) -> Vec<f64> {
    let mut v = vec![0.0; TINY_STATES];
    v[s] = 1.0;
    v
}

/// Value iteration to a fixed point; returns Q[s][a].
pub fn tiny_value_iteration(gamma: f64) -> [[f64; TINY_ACTIONS]; TINY_STATES] {
    let mut q = [[0.0_f64; TINY_ACTIONS]; TINY_STATES];
    for _ in 0..2000 {
        let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
        for s in 0..TINY_STATES {
            for a in 0..TINY_ACTIONS {
                let (n, r) = tiny_transition(s, a);
                q[s][a] = r + gamma * v[n];
            }
        }
    }
    q
}

impl Environment for TinyMdp {
    fn state_dim(&self) -> usize {
        TINY_STATES
    }
    fn action_count(&self) -> usize {
        TINY_ACTIONS
    }
    fn reset(&mut self) -> Vec<f64> {
        self.state = 0;
        one_hot(0)
    }
    fn step(&mut self, action: usize) -> EnvStep {
        let (n, r) = tiny_transition(self.state, action);
        self.state = n;
        EnvStep {
            state: one_hot(n),
            reward: r,
            done: false,
        }
    }
}

/// Scripted environment: constant reward, fixed horizon.
pub struct ConstantEnv {
    pub t: usize,
    pub horizon: usize,
    pub reward: f64,
    pub actions: usize,
}

impl Environment for ConstantEnv {
    fn state_dim(&self) -> usize {
        4
    }
    fn action_count(&self) -> usize {
        self.actions
    }
    fn reset(&mut self) -> Vec<f64> {
        self.t = 0;
        vec![0.0; 4]
    }
    fn step(&mut self, _action: usize) -> EnvStep {
        self.t += 1;
        let f = self.t as f64 / self.horizon as f64;
        EnvStep {
            state: vec![f, 1.0 - f, 0.5, 0.0],
            reward: self.reward,
            done: self.t >= self.horizon,
        }
    }
}

/// Collects uniformly random transitions on the tiny MDP, then runs
/// `updates` CDQL updates from the replay buffer. Returns the agent and the
/// visited (state, action) pairs.
pub fn train_tiny_mdp(seed: u64, updates: usize) -> (dc_handover::rl::CdqlAgent, Vec<(usize, usize)>) {
    use dc_handover::rl::{CdqlAgent, CdqlConfig, OptimizerKind, Transition};
    let cfg = CdqlConfig {
        hidden_layers: vec![32, 32],
        learning_rate: 1e-3,
        optimizer: OptimizerKind::Adam,
        batch_size: 32,
        buffer_capacity: 10_000,
        learning_starts: usize::MAX,
        gamma: TINY_GAMMA,
        tau: 0.01,
        epsilon_start: 1.0,
        epsilon_end: 1.0,
        epsilon_decay_fraction: 0.0,
        updates_per_step: 1,
    };
    let mut agent = CdqlAgent::new(TINY_STATES, TINY_ACTIONS, cfg, seed, 0);
    let mut env = TinyMdp { state: 0 };
    let mut s = env.reset();
    let mut visited = Vec::new();
    for i in 0..3000 {
        // Random restarts keep all three states well covered.
        if i % 10 == 0 {
            env.state = i / 10 % TINY_STATES;
            s = one_hot(env.state);
        }
        let from = env.state;
        let a = agent.act_with_epsilon(&s, 1.0);
        let st = env.step(a);
        if !visited.contains(&(from, a)) {
            visited.push((from, a));
        }
        agent.observe(Transition {
            state: s,
            action: a,
            reward: st.reward,
            next_state: st.state.clone(),
            done: false,
        });
        s = st.state;
    }
    for _ in 0..updates {
        agent.train_step();
    }
    (agent, visited)
}
