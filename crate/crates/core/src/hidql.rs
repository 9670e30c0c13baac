//! Hierarchical deep Q-learning: a meta-controller proposes (outage, TTT)
//! goals and a controller picks grid actions conditioned on the goal.
//!
//! A goal segment ends when the controller has acted `c_max` times or its
//! action lies closer than `kappa` to the goal (normalized grid distance).
//! The controller learns from the intrinsic goal-proximity reward; the
//! meta-controller learns from the extrinsic reward summed over the segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rl::{CdqlAgent, CdqlConfig, Environment, Transition};

pub use crate::sim::{extrinsic_reward, RewardWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntrinsicMode {
    Binary,
    ShapedDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HidqlConfig {
    pub c_max: usize,
    pub kappa: f64,
    pub intrinsic_mode: IntrinsicMode,
    pub meta: CdqlConfig,
    pub controller: CdqlConfig,
}

impl Default for HidqlConfig {
    fn default() -> Self {
        HidqlConfig {
            c_max: 8,
            kappa: 0.25,
            intrinsic_mode: IntrinsicMode::Binary,
            meta: CdqlConfig::default(),
            controller: CdqlConfig::default(),
        }
    }
}

impl HidqlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_max == 0 {
            return Err(Error::Validation("c_max must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::Validation("kappa must lie in [0, 1]".into()));
        }
        self.meta.validate()?;
        self.controller.validate()
    }
}

/// Mean normalized grid distance between an action and a goal, in `[0, 1]`.
pub fn goal_distance(action: (usize, usize), goal: (usize, usize), k_o: usize, k_ttt: usize) -> Result<f64> {
    if k_o < 2 || k_ttt < 2 {
        return Err(Error::Domain("goal distance needs at least 2 levels per axis".into()));
    }
    let d_out = action.0.abs_diff(goal.0) as f64 / (k_o - 1) as f64;
    let d_ttt = action.1.abs_diff(goal.1) as f64 / (k_ttt - 1) as f64;
    Ok((d_out + d_ttt) / 2.0)
}

/// Segment termination: step budget spent or goal reached.
pub fn done(c: usize, c_max: usize, dist: f64, kappa: f64) -> bool {
    c >= c_max || dist < kappa
}

pub fn intrinsic_reward(dist: f64, kappa: f64, mode: IntrinsicMode) -> f64 {
    match mode {
        IntrinsicMode::Binary => {
            if dist < kappa {
                1.0
            } else {
                0.0
            }
        }
        IntrinsicMode::ShapedDistance => 1.0 - dist,
    }
}

/// One row of the meta-decision training log.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaDecision {
    pub episode: u64,
    /// Environment steps taken in the episode when the segment closed.
    pub env_step: u64,
    pub goal: usize,
    pub c_used: usize,
    pub extrinsic_return: f64,
    pub meta_epsilon: f64,
    pub controller_epsilon: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HidqlEpisodeStats {
    pub meta_log: Vec<MetaDecision>,
    pub controller_steps: u64,
    pub extrinsic_return: f64,
}

pub struct HidqlAgent {
    pub config: HidqlConfig,
    pub meta: CdqlAgent,
    pub controller: CdqlAgent,
    pub k_outage: usize,
    pub k_ttt: usize,
    /// Environment steps over all episodes; drives both exploration schedules.
    pub env_steps: u64,
}

impl HidqlAgent {
    pub fn new(state_dim: usize, k_outage: usize, k_ttt: usize, config: HidqlConfig, seed: u64) -> Self {
        let s = k_outage * k_ttt;
        HidqlAgent {
            meta: CdqlAgent::new(state_dim, s, config.meta.clone(), seed, 1),
            controller: CdqlAgent::new(state_dim + 2, s, config.controller.clone(), seed, 2),
            config,
            k_outage,
            k_ttt,
            env_steps: 0,
        }
    }

    pub fn goal_space(&self) -> usize {
        self.k_outage * self.k_ttt
    }

    /// Sets both epsilon horizons from the planned number of environment steps.
    pub fn plan_steps(&mut self, total_env_steps: u64) {
        self.meta.plan_steps(total_env_steps);
        self.controller.plan_steps(total_env_steps);
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.k_ttt, index % self.k_ttt)
    }

    /// Controller input: state features followed by the goal's normalized grid coordinates.
    pub fn controller_input(&self, state: &[f64], goal: usize) -> Vec<f64> {
        let (i_out, i_ttt) = self.split(goal);
        let mut v = Vec::with_capacity(state.len() + 2);
        v.extend_from_slice(state);
        v.push(i_out as f64 / (self.k_outage - 1) as f64);
        v.push(i_ttt as f64 / (self.k_ttt - 1) as f64);
        v
    }

    fn distance(&self, action: usize, goal: usize) -> f64 {
        goal_distance(self.split(action), self.split(goal), self.k_outage, self.k_ttt)
            .expect("grid has at least two levels per axis")
    }

    /// Runs one episode. With `learn` false both levels act greedily and nothing is stored.
    pub fn run_episode<E: Environment + ?Sized>(&mut self, env: &mut E, episode: u64, learn: bool) -> HidqlEpisodeStats {
        let cfg = self.config.clone();
        let mut stats = HidqlEpisodeStats::default();
        let mut state = env.reset();
        let mut env_done = false;
        while !env_done {
            let meta_eps = if learn { self.meta.epsilon.value(self.env_steps) } else { 0.0 };
            let goal = self.meta.act_with_epsilon(&state, meta_eps);
            let start_state = state.clone();
            let mut segment_return = 0.0;
            let mut c = 0;
            let mut ctrl_eps;
            loop {
                ctrl_eps = if learn { self.controller.epsilon.value(self.env_steps) } else { 0.0 };
                let input = self.controller_input(&state, goal);
                let action = self.controller.act_with_epsilon(&input, ctrl_eps);
                let step = env.step(action);
                c += 1;
                stats.controller_steps += 1;
                if learn {
                    self.env_steps += 1;
                }
                let dist = self.distance(action, goal);
                let seg_done = done(c, cfg.c_max, dist, cfg.kappa);
                let r = intrinsic_reward(dist, cfg.kappa, cfg.intrinsic_mode);
                segment_return += step.reward;
                stats.extrinsic_return += step.reward;
                if learn {
                    let next_input = self.controller_input(&step.state, goal);
                    self.controller.observe(Transition {
                        state: input,
                        action,
                        reward: r,
                        next_state: next_input,
                        done: seg_done || step.done,
                    });
                }
                state = step.state;
                env_done = step.done;
                if seg_done || env_done {
                    break;
                }
            }
            if learn {
                self.meta.observe(Transition {
                    state: start_state,
                    action: goal,
                    reward: segment_return,
                    next_state: state.clone(),
                    done: env_done,
                });
            }
            stats.meta_log.push(MetaDecision {
                episode,
                env_step: stats.controller_steps,
                goal,
                c_used: c,
                extrinsic_return: segment_return,
                meta_epsilon: meta_eps,
                controller_epsilon: ctrl_eps,
            });
        }
        stats
    }
}
