//! Experiment runner: trains or evaluates every (scheme, beamforming, seed)
//! cell of a plan and writes per-episode metrics as CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::baselines::{dynamic_ttt_policy, fixed_ttt_policy, BaselineConfig};
use crate::channel::{BfArchitecture, BfKind};
use crate::dc::{GridConfig, HandoverRecord};
use crate::error::{Error, Result};
use crate::hidql::{HidqlAgent, HidqlConfig, MetaDecision};
use crate::rl::{AgentCheckpoint, CdqlAgent, CdqlConfig, Environment, Transition};
use crate::scenario::{load_scenario, ScenarioConfig};
use crate::sim::{EnvConfig, HandoverEnv, TraceRow, STATE_FEATURES};

/// Version tag written as the first line of every CSV.
pub const CSV_SCHEMA: &str = "# dc-handover csv v1";
pub const OUTPUT_DIR_ENV: &str = "DC_HANDOVER_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Fixed,
    Dynamic,
    Cdql,
    Hidql,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Fixed, Scheme::Dynamic, Scheme::Cdql, Scheme::Hidql];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Fixed => "fixed",
            Scheme::Dynamic => "dynamic",
            Scheme::Cdql => "cdql",
            Scheme::Hidql => "hidql",
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, Scheme::Cdql | Scheme::Hidql)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub grid: GridConfig,
    pub env: EnvConfig,
    pub cdql: CdqlConfig,
    pub hidql: HidqlConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Scenario file, relative to the plan file. Absent means the bundled default.
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    pub schemes: Vec<Scheme>,
    #[serde(default = "all_bf_kinds")]
    pub bf_kinds: Vec<BfKind>,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    #[serde(default)]
    pub context_enabled: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub baselines: BaselineConfig,
    /// Write per-handover and meta-decision logs next to the metrics.
    #[serde(default = "yes")]
    pub detailed_logs: bool,
}

fn all_bf_kinds() -> Vec<BfKind> {
    BfKind::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn yes() -> bool {
    true
}

impl ExperimentPlan {
    pub fn new(schemes: Vec<Scheme>, seeds: Vec<u64>, episodes: usize, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentPlan {
            scenario: None,
            schemes,
            bf_kinds: all_bf_kinds(),
            seeds,
            episodes,
            context_enabled: false,
            output_dir: output_dir.into(),
            training: TrainingConfig::default(),
            baselines: BaselineConfig::default(),
            detailed_logs: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::Validation("plan needs at least one scheme".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Validation("plan needs at least one seed".into()));
        }
        if self.bf_kinds.is_empty() {
            return Err(Error::Validation("plan needs at least one beamforming kind".into()));
        }
        if self.episodes == 0 {
            return Err(Error::Validation("episodes must be positive".into()));
        }
        self.training.grid.build()?;
        self.training.cdql.validate()?;
        self.training.hidql.validate()?;
        if !(self.training.env.decision_window_s > 0.0) {
            return Err(Error::Validation("decision window must be positive".into()));
        }
        if !(self.baselines.delta_low_db < self.baselines.delta_high_db) {
            return Err(Error::Validation("dynamic TTT needs delta_low_db < delta_high_db".into()));
        }
        Ok(())
    }
}

/// Parses a plan and resolves its scenario path against the plan's directory.
pub fn load_plan(path: impl AsRef<Path>) -> Result<ExperimentPlan> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut plan: ExperimentPlan = serde_json::from_str(&text).map_err(|source| Error::Parse {
        what: path.display().to_string(),
        source,
    })?;
    if let (Some(s), Some(dir)) = (plan.scenario.as_mut(), path.parent()) {
        if s.is_relative() {
            *s = dir.join(&*s);
        }
    }
    plan.validate()?;
    Ok(plan)
}

pub fn resolve_scenario(plan: &ExperimentPlan) -> Result<ScenarioConfig> {
    match &plan.scenario {
        Some(p) => load_scenario(p),
        None => Ok(ScenarioConfig::bundled_default()),
    }
}

/// Per-episode result row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: u64,
    pub scheme: Scheme,
    pub bf_kind: BfKind,
    pub seed: u64,
    pub cumulative_reward: f64,
    pub mean_latency_s: Option<f64>,
    pub p95_latency_s: Option<f64>,
    pub handover_count: usize,
    pub pingpong_count: usize,
    pub outage_fraction: f64,
    pub mean_sweep_delay_s: Option<f64>,
}

/// Nearest-rank percentile of a non-empty sample.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Episodes that make up the reported tail: the last `ceil(20%)`.
pub fn tail_len(episodes: usize) -> usize {
    (episodes as f64 * 0.2).ceil().max(1.0) as usize
}

/// Column means over the last 20% of episodes. Latency columns average only
/// the episodes that had handovers.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cumulative_reward: f64,
    pub mean_latency_s: Option<f64>,
    pub p95_latency_s: Option<f64>,
    pub handover_count: f64,
    pub pingpong_count: f64,
    pub outage_fraction: f64,
    pub mean_sweep_delay_s: Option<f64>,
}

pub fn summarize(rows: &[EpisodeMetrics]) -> CellSummary {
    let tail = &rows[rows.len() - tail_len(rows.len()).min(rows.len())..];
    CellSummary {
        cumulative_reward: mean(tail.iter().map(|r| r.cumulative_reward)).unwrap_or(0.0),
        mean_latency_s: mean(tail.iter().filter_map(|r| r.mean_latency_s)),
        p95_latency_s: mean(tail.iter().filter_map(|r| r.p95_latency_s)),
        handover_count: mean(tail.iter().map(|r| r.handover_count as f64)).unwrap_or(0.0),
        pingpong_count: mean(tail.iter().map(|r| r.pingpong_count as f64)).unwrap_or(0.0),
        outage_fraction: mean(tail.iter().map(|r| r.outage_fraction)).unwrap_or(0.0),
        mean_sweep_delay_s: mean(tail.iter().filter_map(|r| r.mean_sweep_delay_s)),
    }
}

/// First episode at which the moving average (width `window`) of `rewards`
/// has covered `fraction` of the way from its first full-window value to the
/// mean of the last 20% of episodes.
pub fn convergence_episode(rewards: &[f64], window: usize, fraction: f64) -> Option<usize> {
    if rewards.is_empty() || window == 0 {
        return None;
    }
    let smooth: Vec<f64> = (0..rewards.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            rewards[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect();
    let first = window.min(rewards.len()) - 1;
    let initial = smooth[first];
    let tail = tail_len(rewards.len());
    let last = rewards[rewards.len() - tail..].iter().sum::<f64>() / tail as f64;
    let target = initial + fraction * (last - initial);
    let up = last >= initial;
    (first..smooth.len()).find(|&i| if up { smooth[i] >= target } else { smooth[i] <= target })
}

/// One independent unit of work.
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub scenario: ScenarioConfig,
    pub bf: BfArchitecture,
    pub context_enabled: bool,
    pub scheme: Scheme,
    pub seed: u64,
    pub episodes: usize,
    pub training: TrainingConfig,
    pub baselines: BaselineConfig,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub scheme: Scheme,
    pub bf_kind: BfKind,
    pub seed: u64,
    pub rows: Vec<EpisodeMetrics>,
    pub handovers: Vec<(u64, HandoverRecord)>,
    pub meta_log: Vec<MetaDecision>,
    pub checkpoint: Option<AgentCheckpoint>,
}

impl CellResult {
    pub fn summary(&self) -> CellSummary {
        summarize(&self.rows)
    }

    pub fn file_stem(&self) -> String {
        cell_stem(self.scheme, self.bf_kind, self.seed)
    }
}

pub fn cell_stem(scheme: Scheme, bf: BfKind, seed: u64) -> String {
    format!("{}_{}_seed{}", scheme.as_str(), bf.as_str(), seed)
}

fn make_env(spec: &CellSpec) -> Result<HandoverEnv> {
    let grid = spec.training.grid.build()?;
    let mut env = HandoverEnv::new(
        spec.scenario.clone(),
        spec.bf.clone(),
        spec.context_enabled,
        grid,
        spec.training.env.clone(),
        spec.seed,
    );
    // Every scheme attaches under the same parameters.
    let fixed = fixed_ttt_policy(&env.grid, &spec.baselines);
    env.initial_action = env.grid.flat(fixed.grid_index.0, fixed.grid_index.1);
    Ok(env)
}

fn episode_row(env: &HandoverEnv, spec: &CellSpec, episode: u64) -> EpisodeMetrics {
    let totals = env.totals();
    let m = &totals.metrics;
    let latencies: Vec<f64> = m.handovers.iter().map(|h| h.latency_s).collect();
    EpisodeMetrics {
        episode,
        scheme: spec.scheme,
        bf_kind: spec.bf.kind,
        seed: spec.seed,
        cumulative_reward: totals.cumulative_reward,
        mean_latency_s: m.mean_latency(),
        p95_latency_s: percentile(&latencies, 95.0),
        handover_count: m.handovers.len(),
        pingpong_count: m.pingpong_count(),
        outage_fraction: m.outage_fraction(),
        mean_sweep_delay_s: m.mean_sweep_delay(),
    }
}

/// Trains (learning schemes) or evaluates (baselines) one cell. Episode `e`
/// replays the same mobility and shadowing for every scheme.
pub fn run_cell(spec: &CellSpec) -> Result<CellResult> {
    let mut env = make_env(spec)?;
    let grid = env.grid.clone();
    let windows = env.windows_per_episode() as u64;
    let mut result = CellResult {
        scheme: spec.scheme,
        bf_kind: spec.bf.kind,
        seed: spec.seed,
        rows: Vec::with_capacity(spec.episodes),
        handovers: Vec::new(),
        meta_log: Vec::new(),
        checkpoint: None,
    };
    let mut cdql = None;
    let mut hidql = None;
    match spec.scheme {
        Scheme::Cdql => {
            let mut agent = CdqlAgent::new(STATE_FEATURES, grid.size(), spec.training.cdql.clone(), spec.seed, 0);
            agent.plan_steps(windows * spec.episodes as u64);
            cdql = Some(agent);
        }
        Scheme::Hidql => {
            let mut agent = HidqlAgent::new(
                STATE_FEATURES,
                grid.k_outage(),
                grid.k_ttt(),
                spec.training.hidql.clone(),
                spec.seed,
            );
            agent.plan_steps(windows * spec.episodes as u64);
            hidql = Some(agent);
        }
        Scheme::Fixed | Scheme::Dynamic => {}
    }
    let fixed = fixed_ttt_policy(&grid, &spec.baselines);
    let fixed_index = grid.flat(fixed.grid_index.0, fixed.grid_index.1);

    for e in 0..spec.episodes as u64 {
        env.seek_episode(e);
        match spec.scheme {
            Scheme::Fixed => {
                env.reset();
                while !env.step(fixed_index).done {}
            }
            Scheme::Dynamic => {
                env.reset();
                let cfg = &spec.baselines;
                let g = grid.clone();
                while !env
                    .step_with(fixed_index, &mut |_, crt, sch| dynamic_ttt_policy(crt, sch, &g, cfg))
                    .done
                {}
            }
            Scheme::Cdql => {
                let agent = cdql.as_mut().expect("agent built");
                let mut s = env.reset();
                loop {
                    let a = agent.act(&s);
                    let st = env.step(a);
                    agent.observe(Transition {
                        state: s,
                        action: a,
                        reward: st.reward,
                        next_state: st.state.clone(),
                        done: st.done,
                    });
                    s = st.state;
                    if st.done {
                        break;
                    }
                }
            }
            Scheme::Hidql => {
                let agent = hidql.as_mut().expect("agent built");
                let stats = agent.run_episode(&mut env, e, true);
                result.meta_log.extend(stats.meta_log);
            }
        }
        result.rows.push(episode_row(&env, spec, e));
        result
            .handovers
            .extend(env.totals().metrics.handovers.iter().map(|h| (e, h.clone())));
    }

    result.checkpoint = match (cdql, hidql) {
        (Some(a), _) => Some(
            AgentCheckpoint::new(spec.scheme.as_str(), grid.k_outage(), grid.k_ttt())
                .with_network("q1", &a.q1)
                .with_network("q2", &a.q2),
        ),
        (_, Some(h)) => Some(
            AgentCheckpoint::new(spec.scheme.as_str(), grid.k_outage(), grid.k_ttt())
                .with_network("meta_q1", &h.meta.q1)
                .with_network("meta_q2", &h.meta.q2)
                .with_network("controller_q1", &h.controller.q1)
                .with_network("controller_q2", &h.controller.q2),
        ),
        _ => None,
    };
    Ok(result)
}

/// Builds the cell list of a plan in output order.
pub fn plan_cells(plan: &ExperimentPlan, scenario: &ScenarioConfig) -> Result<Vec<CellSpec>> {
    let mut cells = Vec::new();
    for &scheme in &plan.schemes {
        for &kind in &plan.bf_kinds {
            let mut bf_cfg = scenario.beamforming.clone();
            bf_cfg.kind = kind;
            let bf = BfArchitecture::from_config(&bf_cfg)?;
            for &seed in &plan.seeds {
                cells.push(CellSpec {
                    scenario: scenario.clone(),
                    bf: bf.clone(),
                    context_enabled: plan.context_enabled,
                    scheme,
                    seed,
                    episodes: plan.episodes,
                    training: plan.training.clone(),
                    baselines: plan.baselines.clone(),
                });
            }
        }
    }
    Ok(cells)
}

/// Runs cells on up to `threads` workers; results come back in input order.
pub fn run_cells(cells: &[CellSpec], threads: usize) -> Result<Vec<CellResult>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<CellResult>>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, cells.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                log::info!(
                    "running {}",
                    cell_stem(cell.scheme, cell.bf.kind, cell.seed)
                );
                let r = run_cell(cell);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const METRICS_HEADER: &str = "episode,scheme,bf_kind,seed,cumulative_reward,mean_latency_s,p95_latency_s,handover_count,pingpong_count,outage_fraction,mean_sweep_delay_s";

pub fn metrics_csv(result: &CellResult) -> String {
    let mut out = format!("{CSV_SCHEMA}\n{METRICS_HEADER}\n");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.episode,
            r.scheme.as_str(),
            r.bf_kind.as_str(),
            r.seed,
            r.cumulative_reward,
            opt(r.mean_latency_s),
            opt(r.p95_latency_s),
            r.handover_count,
            r.pingpong_count,
            r.outage_fraction,
            opt(r.mean_sweep_delay_s)
        );
    }
    let s = result.summary();
    let _ = writeln!(
        out,
        "summary,{},{},{},{},{},{},{},{},{},{}",
        result.scheme.as_str(),
        result.bf_kind.as_str(),
        result.seed,
        s.cumulative_reward,
        opt(s.mean_latency_s),
        opt(s.p95_latency_s),
        s.handover_count,
        s.pingpong_count,
        s.outage_fraction,
        opt(s.mean_sweep_delay_s)
    );
    out
}

pub fn handovers_csv(result: &CellResult) -> String {
    let mut out = format!(
        "{CSV_SCHEMA}\nepisode,triggered_at_s,completed_at_s,from,to,latency_s,matched,was_pingpong,cause\n"
    );
    for (e, h) in &result.handovers {
        let _ = writeln!(
            out,
            "{e},{},{},{},{},{},{},{},{}",
            h.triggered_at_s,
            h.completed_at_s,
            h.from,
            h.to,
            h.latency_s,
            h.matched,
            h.was_pingpong,
            h.cause.as_str()
        );
    }
    out
}

pub fn meta_log_csv(result: &CellResult) -> String {
    let mut out = format!(
        "{CSV_SCHEMA}\nepisode,env_step,goal,c_used,extrinsic_return,meta_epsilon,controller_epsilon\n"
    );
    for m in &result.meta_log {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.episode, m.env_step, m.goal, m.c_used, m.extrinsic_return, m.meta_epsilon, m.controller_epsilon
        );
    }
    out
}

pub fn summary_csv(results: &[CellResult]) -> String {
    let mut out = format!(
        "{CSV_SCHEMA}\nscheme,bf_kind,seed,episodes,tail_episodes,cumulative_reward,mean_latency_s,p95_latency_s,handover_count,pingpong_count,outage_fraction,mean_sweep_delay_s,convergence_episode\n"
    );
    for r in results {
        let s = r.summary();
        let rewards: Vec<f64> = r.rows.iter().map(|m| m.cumulative_reward).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme.as_str(),
            r.bf_kind.as_str(),
            r.seed,
            r.rows.len(),
            tail_len(r.rows.len()),
            s.cumulative_reward,
            opt(s.mean_latency_s),
            opt(s.p95_latency_s),
            s.handover_count,
            s.pingpong_count,
            s.outage_fraction,
            opt(s.mean_sweep_delay_s),
            convergence_episode(&rewards, 10, 0.9).map(|c| c.to_string()).unwrap_or_default()
        );
    }
    out
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = format!(
        "{CSV_SCHEMA}\ntime_s,x_m,y_m,serving,ground_truth,outage_threshold_db,ttt_s,crt_serving_sinr_db,crt_best_neighbor_sinr_db,crt_measured_at_s,handover_to\n"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.time_s,
            r.x_m,
            r.y_m,
            r.serving,
            r.ground_truth,
            r.outage_threshold_db,
            r.ttt_s,
            r.crt_serving_sinr_db,
            r.crt_best_neighbor_sinr_db,
            r.crt_measured_at_s,
            r.handover_to.map(|c| c.to_string()).unwrap_or_default()
        );
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes every output file of `results` into `dir`.
pub fn write_results(dir: &Path, results: &[CellResult], detailed: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for r in results {
        let stem = r.file_stem();
        let mut files = vec![(format!("{stem}.csv"), metrics_csv(r))];
        if detailed {
            files.push((format!("{stem}_handovers.csv"), handovers_csv(r)));
            if r.scheme == Scheme::Hidql {
                files.push((format!("{stem}_meta.csv"), meta_log_csv(r)));
            }
        }
        if let Some(ck) = &r.checkpoint {
            files.push((format!("{stem}_checkpoint.json"), ck.to_json()));
        }
        for (name, text) in files {
            let path = dir.join(name);
            write(&path, &text)?;
            written.push(path);
        }
    }
    let path = dir.join("summary.csv");
    write(&path, &summary_csv(results))?;
    written.push(path);
    Ok(written)
}

/// Output directory: explicit override, then the environment variable, then the plan.
pub fn output_dir(plan: &ExperimentPlan, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => plan.output_dir.clone(),
    }
}

/// Runs a whole plan and writes its outputs into `dir`.
pub fn run_experiment(plan: &ExperimentPlan, dir: &Path) -> Result<Vec<CellResult>> {
    plan.validate()?;
    let scenario = resolve_scenario(plan)?;
    let cells = plan_cells(plan, &scenario)?;
    let results = run_cells(&cells, default_threads())?;
    write_results(dir, &results, plan.detailed_logs)?;
    Ok(results)
}

/// Greedy re-run of one episode from a checkpoint, recording every step of UE 0.
pub fn replay_episode(
    plan: &ExperimentPlan,
    checkpoint: &AgentCheckpoint,
    bf_kind: BfKind,
    seed: u64,
    episode: u64,
) -> Result<Vec<TraceRow>> {
    let scenario = resolve_scenario(plan)?;
    let mut bf_cfg = scenario.beamforming.clone();
    bf_cfg.kind = bf_kind;
    let scheme: Scheme = checkpoint.scheme.parse()?;
    let spec = CellSpec {
        bf: BfArchitecture::from_config(&bf_cfg)?,
        scenario,
        context_enabled: plan.context_enabled,
        scheme,
        seed,
        episodes: 1,
        training: plan.training.clone(),
        baselines: plan.baselines.clone(),
    };
    let mut env = make_env(&spec)?;
    if env.grid.k_outage() != checkpoint.k_outage || env.grid.k_ttt() != checkpoint.k_ttt {
        return Err(Error::Checkpoint(format!(
            "checkpoint grid {}x{} does not match plan grid {}x{}",
            checkpoint.k_outage,
            checkpoint.k_ttt,
            env.grid.k_outage(),
            env.grid.k_ttt()
        )));
    }
    env.enable_trace();
    env.seek_episode(episode);
    match scheme {
        Scheme::Cdql => {
            let mut agent = CdqlAgent::new(STATE_FEATURES, env.grid.size(), plan.training.cdql.clone(), seed, 0);
            agent.q1 = checked(checkpoint.network("q1")?, &agent.q1)?;
            agent.q2 = checked(checkpoint.network("q2")?, &agent.q2)?;
            let mut s = env.reset();
            loop {
                let st = env.step(agent.greedy(&s));
                s = st.state;
                if st.done {
                    break;
                }
            }
        }
        Scheme::Hidql => {
            let mut agent = HidqlAgent::new(
                STATE_FEATURES,
                env.grid.k_outage(),
                env.grid.k_ttt(),
                plan.training.hidql.clone(),
                seed,
            );
            agent.meta.q1 = checked(checkpoint.network("meta_q1")?, &agent.meta.q1)?;
            agent.meta.q2 = checked(checkpoint.network("meta_q2")?, &agent.meta.q2)?;
            agent.controller.q1 = checked(checkpoint.network("controller_q1")?, &agent.controller.q1)?;
            agent.controller.q2 = checked(checkpoint.network("controller_q2")?, &agent.controller.q2)?;
            agent.run_episode(&mut env, episode, false);
        }
        Scheme::Fixed | Scheme::Dynamic => {
            return Err(Error::Checkpoint(format!("scheme '{}' has no networks", scheme.as_str())));
        }
    }
    Ok(env.take_trace())
}

fn checked(net: crate::rl::Mlp, like: &crate::rl::Mlp) -> Result<crate::rl::Mlp> {
    if net.widths() != like.widths() {
        return Err(Error::Dimension {
            expected: like.input_dim(),
            got: net.input_dim(),
        });
    }
    Ok(net)
}
