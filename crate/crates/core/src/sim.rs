//! Fixed-step episode simulator and its decision-window environment wrapper.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    context_sector, gps_fix, run_sweep, BfArchitecture, CellId, CompleteReportTable, LinkBudget,
    ShadowingField,
};
use crate::dc::{
    record_latency, sch_step, ActionGrid, GroundTruthTrace, HandoverAction, HandoverRecord,
    SchState,
};
use crate::rl::{EnvStep, Environment};
use crate::scenario::{step_mobility, stream_rng, ScenarioConfig, Stream, UeState};

/// Per-UE simulation state.
#[derive(Debug, Clone)]
pub struct UeSim {
    pub mobility: UeState,
    pub sch: SchState,
    /// Latest report visible to the coordinator.
    pub crt: CompleteReportTable,
    /// Sweep in flight; becomes visible at its `measured_at_s`.
    pending: CompleteReportTable,
    pub ground_truth: GroundTruthTrace,
    last_completion_s: f64,
}

/// Aggregates over a span of simulation steps (all UEs).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowMetrics {
    pub ue_steps: u64,
    pub outage_steps: u64,
    pub handovers: Vec<HandoverRecord>,
    pub sweeps: u64,
    pub sweep_delay_sum_s: f64,
}

impl WindowMetrics {
    pub fn merge(&mut self, other: &WindowMetrics) {
        self.ue_steps += other.ue_steps;
        self.outage_steps += other.outage_steps;
        self.handovers.extend(other.handovers.iter().cloned());
        self.sweeps += other.sweeps;
        self.sweep_delay_sum_s += other.sweep_delay_sum_s;
    }

    pub fn outage_fraction(&self) -> f64 {
        if self.ue_steps == 0 {
            0.0
        } else {
            self.outage_steps as f64 / self.ue_steps as f64
        }
    }

    pub fn pingpong_count(&self) -> usize {
        self.handovers.iter().filter(|h| h.was_pingpong).count()
    }

    pub fn mean_latency(&self) -> Option<f64> {
        if self.handovers.is_empty() {
            None
        } else {
            Some(self.handovers.iter().map(|h| h.latency_s).sum::<f64>() / self.handovers.len() as f64)
        }
    }

    pub fn mean_sweep_delay(&self) -> Option<f64> {
        (self.sweeps > 0).then(|| self.sweep_delay_sum_s / self.sweeps as f64)
    }
}

/// Weights of the windowed extrinsic reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub w_latency: f64,
    pub w_outage: f64,
    pub w_pingpong: f64,
    pub latency_norm_s: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_latency: 1.0,
            w_outage: 0.5,
            w_pingpong: 0.2,
            latency_norm_s: 0.100,
        }
    }
}

/// `−(w_L·mean_latency/norm + w_O·outage_fraction + w_P·pingpongs)`; no handovers means no latency term.
pub fn extrinsic_reward(window: &WindowMetrics, w: &RewardWeights) -> f64 {
    let latency = window.mean_latency().map_or(0.0, |l| l / w.latency_norm_s);
    -(w.w_latency * latency
        + w.w_outage * window.outage_fraction()
        + w.w_pingpong * window.pingpong_count() as f64)
}

/// One episode of the dual-connectivity system on a fixed time step.
pub struct Simulator {
    pub scenario: ScenarioConfig,
    pub bf: BfArchitecture,
    pub context_enabled: bool,
    shadowing: ShadowingField,
    mobility_rng: ChaCha8Rng,
    gps_rng: ChaCha8Rng,
    pub ues: Vec<UeSim>,
    step: u64,
}

impl Simulator {
    /// Builds episode `episode` of `seed`. Mobility, shadowing and GPS noise
    /// depend only on `(seed, episode)`, never on the controller.
    pub fn new(
        scenario: &ScenarioConfig,
        bf: &BfArchitecture,
        context_enabled: bool,
        seed: u64,
        episode: u64,
        initial_action: &HandoverAction,
    ) -> Self {
        let mut shadow_rng = stream_rng(seed, Stream::Shadowing, episode);
        let shadowing = ShadowingField::new(scenario, &mut shadow_rng);
        let mut mobility_rng = stream_rng(seed, Stream::Mobility, episode);
        let gps_rng = stream_rng(seed, Stream::Gps, episode);
        let mobilities: Vec<UeState> = (0..scenario.ue_count)
            .map(|_| UeState::spawn(scenario, &mut mobility_rng))
            .collect();
        let mut sim = Simulator {
            scenario: scenario.clone(),
            bf: bf.clone(),
            context_enabled,
            shadowing,
            mobility_rng,
            gps_rng,
            ues: Vec::with_capacity(mobilities.len()),
            step: 0,
        };
        for mobility in mobilities {
            // Initial access: the first report is available immediately.
            let mut crt = sim.sweep(&mobility, 0.0);
            crt.measured_at_s = 0.0;
            let pending = sim.sweep(&mobility, 0.0);
            let sch = SchState::attach(&crt, initial_action.outage_threshold_db);
            let mut ue = UeSim {
                mobility,
                sch,
                crt,
                pending,
                ground_truth: GroundTruthTrace::default(),
                last_completion_s: f64::NEG_INFINITY,
            };
            let gt = sim.ground_truth_cell(&ue.mobility, initial_action.outage_threshold_db);
            ue.ground_truth.observe(0.0, gt);
            sim.ues.push(ue);
        }
        sim
    }

    pub fn now(&self) -> f64 {
        self.step as f64 * self.scenario.sim_step_s
    }

    pub fn finished(&self) -> bool {
        self.step >= self.scenario.steps_per_episode()
    }

    pub fn steps_remaining(&self) -> u64 {
        self.scenario.steps_per_episode().saturating_sub(self.step)
    }

    fn sweep(&mut self, ue: &UeState, start: f64) -> CompleteReportTable {
        let sectors: Option<Vec<Vec<usize>>> = self.context_enabled.then(|| {
            let fix = gps_fix(
                ue.position,
                self.scenario.context.gps_error_radius_m,
                &mut self.gps_rng,
            );
            self.scenario
                .gnb_positions_m
                .iter()
                .map(|&g| {
                    context_sector(
                        fix,
                        self.scenario.context.gps_error_radius_m,
                        g,
                        self.bf.n_gnb_dirs,
                        self.scenario.context.margin_rad,
                    )
                })
                .collect()
        });
        run_sweep(
            ue.position,
            &self.bf,
            &self.scenario.channel,
            &self.scenario,
            &self.shadowing,
            start,
            sectors.as_deref(),
        )
    }

    /// Best gNB from zero-delay SINR, or LTE when even that one is in outage.
    fn ground_truth_cell(&self, ue: &UeState, outage_threshold_db: f64) -> CellId {
        let budget = LinkBudget::new(
            ue.position,
            &self.bf,
            &self.scenario.channel,
            &self.scenario,
            &self.shadowing,
        );
        let (best, sinr) = (0..self.scenario.gnb_count())
            .map(|k| (k, budget.aligned_sinr(k)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if sinr < outage_threshold_db {
            CellId::Lte
        } else {
            CellId::Gnb(best)
        }
    }

    /// Advances every UE by one step. `policy` picks the handover parameters
    /// in force for this step from the UE's current report and SCH state.
    pub fn step_once<P>(&mut self, policy: &mut P) -> WindowMetrics
    where
        P: FnMut(usize, &CompleteReportTable, &SchState) -> HandoverAction,
    {
        self.step += 1;
        let now = self.now();
        let dt = self.scenario.sim_step_s;
        let mut out = WindowMetrics::default();
        for i in 0..self.ues.len() {
            let action = policy(i, &self.ues[i].crt, &self.ues[i].sch);
            let moved = step_mobility(&self.ues[i].mobility, &self.scenario, &mut self.mobility_rng);
            let gt = self.ground_truth_cell(&moved, action.outage_threshold_db);
            while self.ues[i].pending.measured_at_s <= now + 1e-12 {
                let start = self.ues[i].pending.measured_at_s;
                let next = self.sweep(&moved, start);
                out.sweeps += 1;
                out.sweep_delay_sum_s += next.sweep_delay_s;
                self.ues[i].crt = std::mem::replace(&mut self.ues[i].pending, next);
            }
            let ue = &mut self.ues[i];
            ue.mobility = moved;
            ue.ground_truth.observe(now, gt);
            if let Some(mut rec) = sch_step(
                &mut ue.sch,
                &ue.crt,
                &action,
                now,
                dt,
                &self.scenario.handover,
            ) {
                record_latency(
                    &ue.ground_truth,
                    &mut rec,
                    ue.last_completion_s,
                    self.scenario.handover.rat_switch_delay_s,
                );
                ue.last_completion_s = rec.completed_at_s;
                out.handovers.push(rec);
            }
            out.ue_steps += 1;
            if ue.sch.on_lte_fallback {
                out.outage_steps += 1;
            }
        }
        out
    }

    /// Runs up to `steps` steps (fewer at the end of the episode).
    pub fn run_window<P>(&mut self, steps: u64, policy: &mut P) -> WindowMetrics
    where
        P: FnMut(usize, &CompleteReportTable, &SchState) -> HandoverAction,
    {
        let mut acc = WindowMetrics::default();
        for _ in 0..steps.min(self.steps_remaining()) {
            let m = self.step_once(policy);
            acc.merge(&m);
        }
        acc
    }
}

/// Per-episode aggregates before they are labelled for output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTotals {
    pub metrics: WindowMetrics,
    pub cumulative_reward: f64,
    pub windows: usize,
}

/// Environment settings shared by all schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub decision_window_s: f64,
    pub reward: RewardWeights,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            decision_window_s: 0.5,
            reward: RewardWeights::default(),
        }
    }
}

/// Number of features produced by [`HandoverEnv`].
pub const STATE_FEATURES: usize = 8;

/// Normalized observation of UE 0's report table and recent behavior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFeatures {
    pub lte_sinr_norm: f64,
    pub serving_mmwave_sinr_norm: f64,
    pub best_neighbor_sinr_norm: f64,
    pub sinr_gap_norm: f64,
    pub current_outage_index_norm: f64,
    pub current_ttt_index_norm: f64,
    pub recent_pingpong_rate: f64,
    pub recent_outage_fraction: f64,
}

const SINR_SCALE_DB: f64 = 30.0;
const GAP_SCALE_DB: f64 = 15.0;

impl StateFeatures {
    pub fn observe(
        crt: &CompleteReportTable,
        sch: &SchState,
        grid: &ActionGrid,
        current_action: usize,
        last_window: Option<&WindowMetrics>,
    ) -> Self {
        let serving = crt.mmwave_sinr_db[sch.serving_gnb];
        let neighbor = crt
            .best_gnb_except(Some(sch.serving_gnb))
            .map_or(serving, |(_, s)| s);
        let (i_out, i_ttt) = grid.split(current_action);
        let (pingpong_rate, outage) = last_window.map_or((0.0, 0.0), |w| {
            let rate = if w.handovers.is_empty() {
                0.0
            } else {
                w.pingpong_count() as f64 / w.handovers.len() as f64
            };
            (rate, w.outage_fraction())
        });
        StateFeatures {
            lte_sinr_norm: (crt.lte_sinr_db / SINR_SCALE_DB).clamp(-1.0, 1.0),
            serving_mmwave_sinr_norm: (serving / SINR_SCALE_DB).clamp(-1.0, 1.0),
            best_neighbor_sinr_norm: (neighbor / SINR_SCALE_DB).clamp(-1.0, 1.0),
            sinr_gap_norm: ((neighbor - serving) / GAP_SCALE_DB).clamp(-1.0, 1.0),
            current_outage_index_norm: i_out as f64 / (grid.k_outage() - 1) as f64,
            current_ttt_index_norm: i_ttt as f64 / (grid.k_ttt() - 1) as f64,
            recent_pingpong_rate: pingpong_rate,
            recent_outage_fraction: outage,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.lte_sinr_norm,
            self.serving_mmwave_sinr_norm,
            self.best_neighbor_sinr_norm,
            self.sinr_gap_norm,
            self.current_outage_index_norm,
            self.current_ttt_index_norm,
            self.recent_pingpong_rate,
            self.recent_outage_fraction,
        ]
    }
}

/// Decision-window view of the simulator: one RL step applies one grid action
/// for `decision_window_s` of simulated time.
pub struct HandoverEnv {
    pub scenario: ScenarioConfig,
    pub bf: BfArchitecture,
    pub context_enabled: bool,
    pub grid: ActionGrid,
    pub config: EnvConfig,
    /// Grid index used by [`Environment::reset`] for attachment.
    pub initial_action: usize,
    seed: u64,
    next_episode: u64,
    sim: Option<Simulator>,
    current_action: usize,
    last_window: Option<WindowMetrics>,
    totals: EpisodeTotals,
    trace: Option<Vec<TraceRow>>,
}

/// Per-step snapshot of UE 0, used by episode replays.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub serving: CellId,
    pub ground_truth: CellId,
    pub outage_threshold_db: f64,
    pub ttt_s: f64,
    pub crt_serving_sinr_db: f64,
    pub crt_best_neighbor_sinr_db: f64,
    pub crt_measured_at_s: f64,
    pub handover_to: Option<CellId>,
}

impl TraceRow {
    fn capture(sim: &Simulator, action: HandoverAction, step: &WindowMetrics) -> Self {
        let ue = &sim.ues[0];
        let serving = ue.crt.mmwave_sinr_db[ue.sch.serving_gnb];
        TraceRow {
            time_s: sim.now(),
            x_m: ue.mobility.position.x,
            y_m: ue.mobility.position.y,
            serving: ue.sch.serving_cell(),
            ground_truth: ue.ground_truth.current().unwrap_or(CellId::Lte),
            outage_threshold_db: action.outage_threshold_db,
            ttt_s: action.ttt_s,
            crt_serving_sinr_db: serving,
            crt_best_neighbor_sinr_db: ue
                .crt
                .best_gnb_except(Some(ue.sch.serving_gnb))
                .map_or(serving, |(_, s)| s),
            crt_measured_at_s: ue.crt.measured_at_s,
            // only UE 0's records are traced; with one UE this is exact
            handover_to: step.handovers.last().map(|h| h.to),
        }
    }
}

impl HandoverEnv {
    pub fn new(
        scenario: ScenarioConfig,
        bf: BfArchitecture,
        context_enabled: bool,
        grid: ActionGrid,
        config: EnvConfig,
        seed: u64,
    ) -> Self {
        HandoverEnv {
            scenario,
            bf,
            context_enabled,
            grid,
            config,
            initial_action: 0,
            seed,
            next_episode: 0,
            sim: None,
            current_action: 0,
            last_window: None,
            totals: EpisodeTotals::default(),
            trace: None,
        }
    }

    /// Starts collecting a per-step trace of UE 0.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<TraceRow> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Makes the next `reset` start episode `episode`.
    pub fn seek_episode(&mut self, episode: u64) {
        self.next_episode = episode;
    }

    pub fn window_steps(&self) -> u64 {
        ((self.config.decision_window_s / self.scenario.sim_step_s).round() as u64).max(1)
    }

    pub fn windows_per_episode(&self) -> usize {
        self.scenario.steps_per_episode().div_ceil(self.window_steps()) as usize
    }

    pub fn simulator(&self) -> Option<&Simulator> {
        self.sim.as_ref()
    }

    /// Resets with an explicit initial action used for attachment and the first features.
    pub fn reset_with(&mut self, initial_action: usize) -> Vec<f64> {
        let episode = self.next_episode;
        self.next_episode += 1;
        let action = self.grid.action(initial_action);
        self.sim = Some(Simulator::new(
            &self.scenario,
            &self.bf,
            self.context_enabled,
            self.seed,
            episode,
            &action,
        ));
        self.current_action = initial_action;
        self.last_window = None;
        self.totals = EpisodeTotals::default();
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        let sim = self.sim.as_ref().expect("reset before observing");
        let ue = &sim.ues[0];
        StateFeatures::observe(
            &ue.crt,
            &ue.sch,
            &self.grid,
            self.current_action,
            self.last_window.as_ref(),
        )
        .to_vec()
    }

    /// Runs one decision window under an arbitrary per-step policy.
    /// `label` is the grid index reported in the next observation.
    pub fn step_with<P>(&mut self, label: usize, policy: &mut P) -> EnvStep
    where
        P: FnMut(usize, &CompleteReportTable, &SchState) -> HandoverAction,
    {
        let steps = self.window_steps();
        let sim = self.sim.as_mut().expect("reset before stepping");
        let window = match self.trace.as_mut() {
            None => sim.run_window(steps, policy),
            Some(rows) => {
                let mut acc = WindowMetrics::default();
                for _ in 0..steps.min(sim.steps_remaining()) {
                    let mut used = None;
                    let m = sim.step_once(&mut |i, crt, sch| {
                        let a = policy(i, crt, sch);
                        if i == 0 {
                            used = Some(a);
                        }
                        a
                    });
                    rows.push(TraceRow::capture(sim, used.expect("UE 0 acted"), &m));
                    acc.merge(&m);
                }
                acc
            }
        };
        let done = sim.finished();
        let reward = extrinsic_reward(&window, &self.config.reward);
        self.totals.metrics.merge(&window);
        self.totals.cumulative_reward += reward;
        self.totals.windows += 1;
        self.current_action = label;
        self.last_window = Some(window);
        EnvStep {
            state: self.observe(),
            reward,
            done,
        }
    }

    pub fn last_window(&self) -> Option<&WindowMetrics> {
        self.last_window.as_ref()
    }

    pub fn totals(&self) -> &EpisodeTotals {
        &self.totals
    }
}

impl Environment for HandoverEnv {
    fn state_dim(&self) -> usize {
        STATE_FEATURES
    }

    fn action_count(&self) -> usize {
        self.grid.size()
    }

    fn reset(&mut self) -> Vec<f64> {
        self.reset_with(self.initial_action)
    }

    fn step(&mut self, action: usize) -> EnvStep {
        let a = self.grid.action(action);
        self.step_with(action, &mut |_, _, _| a)
    }
}
