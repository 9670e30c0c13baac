mod common;

use common::ConstantEnv;
use dc_handover::hidql::{HidqlAgent, HidqlConfig, IntrinsicMode};

fn agent(c_max: usize, kappa: f64, mode: IntrinsicMode) -> HidqlAgent {
    let cfg = HidqlConfig {
        c_max,
        kappa,
        intrinsic_mode: mode,
        ..Default::default()
    };
    HidqlAgent::new(4, 5, 6, cfg, 8)
}

#[test]
fn meta_buffer_gets_one_transition_per_segment() {
    let r = -0.25;
    for (horizon, c_max) in [(24, 8), (20, 8), (7, 1), (5, 10)] {
        let mut a = agent(c_max, 0.0, IntrinsicMode::Binary);
        let mut env = ConstantEnv { t: 0, horizon, reward: r, actions: 30 };
        let stats = a.run_episode(&mut env, 0, true);
        let expected = horizon.div_ceil(c_max);
        assert_eq!(a.meta.buffer.len(), expected);
        assert_eq!(stats.meta_log.len(), expected);
        assert_eq!(a.controller.buffer.len(), horizon);
        let metas: Vec<_> = a.meta.buffer.iter().collect();
        for (i, m) in metas.iter().enumerate() {
            let steps = if i + 1 < expected { c_max } else { horizon - c_max * (expected - 1) };
            assert!((m.reward - steps as f64 * r).abs() < 1e-12);
            assert_eq!(m.done, i + 1 == expected);
            assert_eq!(m.state.len(), 4);
        }
        assert!(stats.meta_log.iter().all(|d| d.c_used <= c_max));
    }
}

#[test]
fn binary_intrinsic_reward_only_on_distance_termination() {
    let mut a = agent(8, 0.25, IntrinsicMode::Binary);
    let mut env = ConstantEnv { t: 0, horizon: 200, reward: -1.0, actions: 30 };
    a.run_episode(&mut env, 0, true);
    for t in a.controller.buffer.iter() {
        assert_eq!(t.state.len(), 6);
        if t.reward == 1.0 {
            assert!(t.done);
        } else {
            assert_eq!(t.reward, 0.0);
        }
    }
}

#[test]
fn greedy_episode_stores_nothing() {
    let mut a = agent(4, 0.25, IntrinsicMode::ShapedDistance);
    let mut env = ConstantEnv { t: 0, horizon: 30, reward: -1.0, actions: 30 };
    let stats = a.run_episode(&mut env, 3, false);
    assert!(a.meta.buffer.is_empty() && a.controller.buffer.is_empty());
    assert_eq!(stats.controller_steps, 30);
    assert!((stats.extrinsic_return + 30.0).abs() < 1e-12);
    assert!(stats.meta_log.iter().all(|d| d.episode == 3 && d.meta_epsilon == 0.0));
}
