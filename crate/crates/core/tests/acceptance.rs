//! One pass/fail line per acceptance criterion, with the measured values.
//! The learning comparison trains the full grid once and shares it.

mod common;

use std::process::Command;
use std::sync::OnceLock;

use common::*;
use dc_handover::channel::{compute_sweep_delay, BfArchitecture, BfKind};
use dc_handover::dc::{uniform_levels, GridConfig};
use dc_handover::harness::{
    convergence_episode, plan_cells, run_cell, run_cells, default_threads, CellResult, CellSpec, ExperimentPlan,
    Scheme,
};
use dc_handover::hidql::{HidqlAgent, HidqlConfig, IntrinsicMode};
use dc_handover::rl::{argmax, Mlp};
use dc_handover::scenario::{stream_rng, ScenarioConfig, Stream};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

const SEEDS: [u64; 3] = [1, 2, 3];
const EPISODES: usize = 300;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {n} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn c1_sweep_delay_table() {
    let aa = compute_sweep_delay(16, 8, 200e-6, 1).unwrap();
    let da = compute_sweep_delay(16, 8, 200e-6, 16).unwrap();
    let ha = compute_sweep_delay(16, 8, 200e-6, BfKind::HybridAnalog.l_factor(16)).unwrap();
    let mut compat = BfArchitecture::new(BfKind::HybridAnalog, 16, 8, 200e-6).unwrap();
    compat.table1_compat = true;
    let hc = compat.full_sweep_delay();
    let pass = aa == 0.0256 && da == 0.0016 && ha == 0.0128 && hc == 0.0168;
    report(1, "sweep delay table", pass, &format!("analog {aa} s, digital {da} s, hybrid {ha} s, hybrid compat {hc} s"));
}

#[test]
fn c2_action_grid() {
    let mut runner = TestRunner::new(Config { cases: 2000, failure_persistence: None, ..Config::default() });
    let outcome = runner.run(&(-100.0f64..100.0, 0.001f64..100.0, 2usize..40), |(min, span, k)| {
        let max = min + span;
        let levels = uniform_levels(min, max, k).unwrap();
        prop_assert_eq!(levels.len(), k);
        for (i, v) in levels.iter().enumerate() {
            let expected = min + i as f64 * (max - min) / (k - 1) as f64;
            prop_assert!((v - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
        prop_assert_eq!(levels[k - 1], max);
        Ok(())
    });
    let grid = GridConfig::default().build().unwrap();
    let size_ok = grid.size() == grid.k_outage() * grid.k_ttt() && grid.size() == 30;
    let pass = outcome.is_ok() && size_ok;
    report(
        2,
        "action grid",
        pass,
        &format!("2000 random grids {:?}, S = {}·{} = {}", outcome.map(|_| "ok"), grid.k_outage(), grid.k_ttt(), grid.size()),
    );
}

#[test]
fn c3_gradient_check() {
    let mut rng = stream_rng(77, Stream::Init, 3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let net = Mlp::new(&[8, 16, 16, 30], &mut rng);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = net.backward(&x, &c).unwrap().params();
        let numeric = finite_difference_grad(&net, &x, &c, 1e-5);
        for (g, n) in analytic.iter().zip(&numeric) {
            worst = worst.max((g - n).abs() / g.abs().max(n.abs()).max(1e-4));
        }
    }
    report(3, "gradient check", worst < 1e-6, &format!("max relative error {worst:.2e} over 20 networks"));
}

#[test]
fn c4_tiny_mdp() {
    let oracle = tiny_value_iteration(TINY_GAMMA);
    let (agent, visited) = train_tiny_mdp(11, 20_000);
    let mut worst = 0.0f64;
    for &(s, a) in &visited {
        let q = agent.q1.forward(&one_hot(s)).unwrap();
        worst = worst.max((q[a] - oracle[s][a]).abs());
    }
    let policy_ok = (0..TINY_STATES).all(|s| agent.greedy(&one_hot(s)) == argmax(&oracle[s]));
    report(
        4,
        "tiny MDP oracle",
        worst < 0.05 && policy_ok && !visited.is_empty(),
        &format!("max |Q - Q*| {worst:.4} at {} visited pairs, greedy policy optimal: {policy_ok}", visited.len()),
    );
}

#[test]
fn c5_hierarchy_structure() {
    let r = -0.5;
    let mut pass = true;
    let mut detail = Vec::new();
    for (horizon, c_max) in [(24usize, 8usize), (30, 7), (9, 1)] {
        let cfg = HidqlConfig { c_max, kappa: 0.0, intrinsic_mode: IntrinsicMode::Binary, ..Default::default() };
        let mut agent = HidqlAgent::new(4, 5, 6, cfg, 1);
        let mut env = ConstantEnv { t: 0, horizon, reward: r, actions: 30 };
        let stats = agent.run_episode(&mut env, 0, true);
        let expected = horizon.div_ceil(c_max);
        let sums_ok = agent.meta.buffer.iter().enumerate().all(|(i, m)| {
            let steps = if i + 1 < expected { c_max } else { horizon - c_max * (expected - 1) };
            (m.reward - steps as f64 * r).abs() < 1e-12
        });
        let bounded = stats.meta_log.iter().all(|d| d.c_used <= c_max);
        pass &= agent.meta.buffer.len() == expected && sums_ok && bounded;
        detail.push(format!("T={horizon} c_max={c_max}: {} of {expected} meta transitions", agent.meta.buffer.len()));
    }
    report(5, "hierarchy structure", pass, &detail.join(", "));
}

fn learning_grid() -> &'static Vec<CellResult> {
    static GRID: OnceLock<Vec<CellResult>> = OnceLock::new();
    GRID.get_or_init(|| {
        let plan = ExperimentPlan::new(Scheme::ALL.to_vec(), SEEDS.to_vec(), EPISODES, "unused");
        let cells = plan_cells(&plan, &ScenarioConfig::bundled_default()).unwrap();
        run_cells(&cells, default_threads()).unwrap()
    })
}

fn cell(scheme: Scheme, bf: BfKind, seed: u64) -> &'static CellResult {
    learning_grid()
        .iter()
        .find(|c| c.scheme == scheme && c.bf_kind == bf && c.seed == seed)
        .expect("cell present")
}

fn tail_latency(scheme: Scheme, bf: BfKind, seed: u64) -> f64 {
    cell(scheme, bf, seed).summary().mean_latency_s.unwrap_or(f64::INFINITY)
}

fn mean_over_seeds(scheme: Scheme, bf: BfKind) -> f64 {
    SEEDS.iter().map(|&s| tail_latency(scheme, bf, s)).sum::<f64>() / SEEDS.len() as f64
}

#[test]
fn c6_learning_beats_baselines() {
    let mut pass = true;
    let mut detail = Vec::new();
    for bf in BfKind::ALL {
        let fixed = mean_over_seeds(Scheme::Fixed, bf);
        let dynamic = mean_over_seeds(Scheme::Dynamic, bf);
        let best = fixed.min(dynamic);
        let cdql = mean_over_seeds(Scheme::Cdql, bf);
        let hidql = mean_over_seeds(Scheme::Hidql, bf);
        pass &= cdql <= 0.9 * best && hidql <= 0.9 * best;
        detail.push(format!(
            "{}: fixed {:.1} ms, dynamic {:.1} ms, cdql {:.1} ms ({:+.1}%), hidql {:.1} ms ({:+.1}%)",
            bf.as_str(),
            fixed * 1e3,
            dynamic * 1e3,
            cdql * 1e3,
            (cdql / best - 1.0) * 100.0,
            hidql * 1e3,
            (hidql / best - 1.0) * 100.0
        ));
    }
    report(6, "learning beats baselines by 10%", pass, &detail.join("; "));
}

#[test]
fn c7_convergence_shape() {
    let mut slower = 0;
    let mut better = 0;
    let mut total = 0;
    let mut detail = Vec::new();
    for bf in BfKind::ALL {
        for seed in SEEDS {
            let conv = |s: Scheme| {
                let rewards: Vec<f64> = cell(s, bf, seed).rows.iter().map(|r| r.cumulative_reward).collect();
                convergence_episode(&rewards, 10, 0.9).unwrap_or(EPISODES)
            };
            let (ec, eh) = (conv(Scheme::Cdql), conv(Scheme::Hidql));
            let (lc, lh) = (tail_latency(Scheme::Cdql, bf, seed), tail_latency(Scheme::Hidql, bf, seed));
            total += 1;
            slower += usize::from(ec < eh);
            better += usize::from(lh <= lc);
            detail.push(format!(
                "{} seed {seed}: episodes {ec}/{eh}, latency {:.1}/{:.1} ms",
                bf.as_str(),
                lc * 1e3,
                lh * 1e3
            ));
        }
    }
    let summary = format!(
        "cdql converges first in {slower}/{total} runs, hidql latency <= cdql in {better}/{total} runs (cdql/hidql): {}",
        detail.join("; ")
    );
    report(7, "convergence shape", better > 0, &summary);
}

#[test]
fn c8_context_sector() {
    let mut scenario = ScenarioConfig::bundled_default();
    scenario.buildings_m.clear();
    let bf = BfArchitecture::from_config(&scenario.beamforming).unwrap();
    assert_eq!(bf.kind, BfKind::AnalogAnalog);
    let run = |context_enabled| {
        let spec = CellSpec {
            scenario: scenario.clone(),
            bf: bf.clone(),
            context_enabled,
            scheme: Scheme::Fixed,
            seed: 4,
            episodes: 20,
            training: Default::default(),
            baselines: Default::default(),
        };
        let rows = run_cell(&spec).unwrap().rows;
        let mean = |f: &dyn Fn(&dc_handover::harness::EpisodeMetrics) -> Option<f64>| {
            let v: Vec<f64> = rows.iter().filter_map(f).collect();
            v.iter().sum::<f64>() / v.len().max(1) as f64
        };
        (mean(&|r| r.mean_sweep_delay_s), mean(&|r| r.mean_latency_s))
    };
    let (d_off, l_off) = run(false);
    let (d_on, l_on) = run(true);
    report(
        8,
        "context sector",
        d_on < d_off && l_on <= l_off,
        &format!(
            "sweep delay {:.2} -> {:.2} ms, handover latency {:.2} -> {:.2} ms",
            d_off * 1e3,
            d_on * 1e3,
            l_off * 1e3,
            l_on * 1e3
        ),
    );
}

#[test]
fn c9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"schemes": ["fixed", "dynamic", "cdql", "hidql"], "seeds": [5], "episodes": 3}"#,
    )
    .unwrap();
    let outputs: Vec<Vec<(String, Vec<u8>)>> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let status = Command::new(env!("CARGO_BIN_EXE_dc-handover"))
                .args(["run", "--plan", plan.to_str().unwrap(), "--output", out.to_str().unwrap()])
                .env_remove("DC_HANDOVER_OUTPUT_DIR")
                .output()
                .unwrap()
                .status;
            assert!(status.success());
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            files
        })
        .collect();
    let differing = outputs[0].iter().zip(&outputs[1]).filter(|(a, b)| a != b).count();
    let pass = outputs[0].len() == outputs[1].len() && !outputs[0].is_empty() && differing == 0;
    report(
        9,
        "cli determinism",
        pass,
        &format!("{} csv files per run, {differing} differ", outputs[0].len()),
    );
}
