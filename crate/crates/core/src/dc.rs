//! Coordinator-side secondary cell handover (SCH) and latency accounting.

use serde::{Deserialize, Serialize};

use crate::channel::{CellId, CompleteReportTable};
use crate::error::{Error, Result};

/// One (SINR outage threshold, TTT) setting on the discretized grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandoverAction {
    pub outage_threshold_db: f64,
    pub ttt_s: f64,
    /// `(i_out, i_ttt)`
    pub grid_index: (usize, usize),
}

/// Grid configuration as stored in experiment plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub outage_min_db: f64,
    pub outage_max_db: f64,
    pub k_outage: usize,
    pub ttt_min_s: f64,
    pub ttt_max_s: f64,
    pub k_ttt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            outage_min_db: -8.0,
            outage_max_db: 0.0,
            k_outage: 5,
            ttt_min_s: 0.025,
            ttt_max_s: 0.150,
            k_ttt: 6,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<ActionGrid> {
        ActionGrid::new(
            self.outage_min_db,
            self.outage_max_db,
            self.k_outage,
            self.ttt_min_s,
            self.ttt_max_s,
            self.k_ttt,
        )
    }
}

/// Cartesian product of the uniform outage and TTT levels. Flat index is
/// `i_out · k_ttt + i_ttt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    pub outage_levels: Vec<f64>,
    pub ttt_levels: Vec<f64>,
}

/// `min + i·(max − min)/(k − 1)` for `i in 0..k`, with the last level pinned to `max`.
pub fn uniform_levels(min: f64, max: f64, k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 levels, got {k}")));
    }
    if !(min < max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Domain(format!("grid bounds must satisfy min < max, got [{min}, {max}]")));
    }
    let step = (max - min) / (k - 1) as f64;
    Ok((0..k)
        .map(|i| if i == k - 1 { max } else { min + i as f64 * step })
        .collect())
}

impl ActionGrid {
    pub fn new(
        o_min: f64,
        o_max: f64,
        k_o: usize,
        ttt_min: f64,
        ttt_max: f64,
        k_ttt: usize,
    ) -> Result<Self> {
        if !(ttt_min >= 0.0) {
            return Err(Error::Domain("TTT levels must be non-negative".into()));
        }
        Ok(ActionGrid {
            outage_levels: uniform_levels(o_min, o_max, k_o)?,
            ttt_levels: uniform_levels(ttt_min, ttt_max, k_ttt)?,
        })
    }

    pub fn k_outage(&self) -> usize {
        self.outage_levels.len()
    }

    pub fn k_ttt(&self) -> usize {
        self.ttt_levels.len()
    }

    /// Action-space size `S = K_o · K_TTT`.
    pub fn size(&self) -> usize {
        self.k_outage() * self.k_ttt()
    }

    pub fn action(&self, index: usize) -> HandoverAction {
        let (i_out, i_ttt) = self.split(index);
        HandoverAction {
            outage_threshold_db: self.outage_levels[i_out],
            ttt_s: self.ttt_levels[i_ttt],
            grid_index: (i_out, i_ttt),
        }
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.k_ttt(), index % self.k_ttt())
    }

    pub fn flat(&self, i_out: usize, i_ttt: usize) -> usize {
        i_out * self.k_ttt() + i_ttt
    }

    pub fn actions(&self) -> Vec<HandoverAction> {
        (0..self.size()).map(|i| self.action(i)).collect()
    }

    /// Nearest outage level; equidistant values go to the higher level.
    pub fn snap_outage(&self, value: f64) -> usize {
        snap(&self.outage_levels, value, true)
    }

    /// Nearest TTT level; equidistant values go to the shorter TTT.
    pub fn snap_ttt(&self, value: f64) -> usize {
        snap(&self.ttt_levels, value, false)
    }
}

fn snap(levels: &[f64], value: f64, ties_up: bool) -> usize {
    // Relative slack so that values produced by the level formula count as ties.
    let scale = (levels[levels.len() - 1] - levels[0]).abs().max(1e-300);
    let eps = 1e-9 * scale;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &l) in levels.iter().enumerate() {
        let d = (l - value).abs();
        if d < best_d - eps || ((d - best_d).abs() <= eps && ties_up) {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Fixed SCH constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchParams {
    /// Margin a candidate needs over the serving gNB before TTT starts counting.
    pub hysteresis_db: f64,
    /// Signalling delay of a gNB switch (X2 round trip plus coordinator processing).
    pub rat_switch_delay_s: f64,
    pub pingpong_window_s: f64,
    /// Margin above the outage threshold required to leave LTE fallback.
    pub outage_return_hysteresis_db: f64,
}

impl Default for SchParams {
    fn default() -> Self {
        SchParams {
            hysteresis_db: 1.0,
            rat_switch_delay_s: 0.020,
            pingpong_window_s: 1.0,
            outage_return_hysteresis_db: 2.0,
        }
    }
}

impl SchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.hysteresis_db >= 0.0
            && self.rat_switch_delay_s >= 0.0
            && self.pingpong_window_s >= 0.0
            && self.outage_return_hysteresis_db >= 0.0)
        {
            return Err(Error::Validation("handover parameters must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HandoverCause {
    BetterSinr,
    Outage,
}

impl HandoverCause {
    pub fn as_str(self) -> &'static str {
        match self {
            HandoverCause::BetterSinr => "better-sinr",
            HandoverCause::Outage => "outage",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverRecord {
    pub triggered_at_s: f64,
    pub completed_at_s: f64,
    pub from: CellId,
    pub to: CellId,
    /// Filled by [`measure_latency`]; zero until then.
    pub latency_s: f64,
    /// False when the target never became the ground-truth best cell.
    pub matched: bool,
    pub was_pingpong: bool,
    pub cause: HandoverCause,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TttTimer {
    pub candidate: usize,
    /// Consecutive simulation steps the trigger condition has held.
    pub held_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingSwitch {
    pub from: CellId,
    pub target: usize,
    pub triggered_at_s: f64,
    pub completes_at_s: f64,
    pub cause: HandoverCause,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastHandover {
    pub from: CellId,
    pub to: CellId,
    pub at_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchState {
    /// Current (or, while on fallback, most recent) mmWave serving gNB.
    pub serving_gnb: usize,
    pub on_lte_fallback: bool,
    pub ttt_timer: Option<TttTimer>,
    pub switch_in_progress: Option<PendingSwitch>,
    pub last_handover: Option<LastHandover>,
}

impl SchState {
    /// Initial attachment to the best gNB of the first report, or LTE when every gNB is in outage.
    pub fn attach(crt: &CompleteReportTable, outage_threshold_db: f64) -> Self {
        let (best, sinr) = crt.best_gnb_except(None).expect("at least one gNB");
        SchState {
            serving_gnb: best,
            on_lte_fallback: sinr < outage_threshold_db,
            ttt_timer: None,
            switch_in_progress: None,
            last_handover: None,
        }
    }

    pub fn serving_cell(&self) -> CellId {
        if self.on_lte_fallback {
            CellId::Lte
        } else {
            CellId::Gnb(self.serving_gnb)
        }
    }

    pub fn ttt_held_s(&self, sim_step: f64) -> f64 {
        self.ttt_timer
            .map_or(0.0, |t| t.held_steps as f64 * sim_step)
    }

    fn close_handover(
        &mut self,
        from: CellId,
        to: CellId,
        triggered_at_s: f64,
        completed_at_s: f64,
        cause: HandoverCause,
        params: &SchParams,
    ) -> HandoverRecord {
        let was_pingpong = self.last_handover.is_some_and(|last| {
            last.from == to && triggered_at_s - last.at_s <= params.pingpong_window_s
        });
        self.last_handover = Some(LastHandover {
            from,
            to,
            at_s: completed_at_s,
        });
        HandoverRecord {
            triggered_at_s,
            completed_at_s,
            from,
            to,
            latency_s: 0.0,
            matched: false,
            was_pingpong,
            cause,
        }
    }
}

/// Number of steps the trigger condition must hold for `ttt_s`.
fn ttt_steps(ttt_s: f64, sim_step: f64) -> u64 {
    ((ttt_s / sim_step) - 1e-9).ceil().max(0.0) as u64
}

/// Advances the SCH state machine by one simulation step using the latest report.
pub fn sch_step(
    state: &mut SchState,
    crt: &CompleteReportTable,
    action: &HandoverAction,
    now: f64,
    sim_step: f64,
    params: &SchParams,
) -> Option<HandoverRecord> {
    let thr = action.outage_threshold_db;

    if let Some(sw) = state.switch_in_progress {
        if now + 1e-12 >= sw.completes_at_s {
            state.switch_in_progress = None;
            state.serving_gnb = sw.target;
            state.on_lte_fallback = false;
            return Some(state.close_handover(
                sw.from,
                CellId::Gnb(sw.target),
                sw.triggered_at_s,
                now,
                sw.cause,
                params,
            ));
        }
    }

    if !state.on_lte_fallback && crt.mmwave_sinr_db[state.serving_gnb] < thr {
        // Outage: fall back to the already-connected LTE leg at once.
        let from = CellId::Gnb(state.serving_gnb);
        state.on_lte_fallback = true;
        state.ttt_timer = None;
        state.switch_in_progress = None;
        return Some(state.close_handover(from, CellId::Lte, now, now, HandoverCause::Outage, params));
    }

    if state.switch_in_progress.is_some() {
        return None;
    }

    if state.on_lte_fallback {
        if let Some((best, sinr)) = crt.best_gnb_except(None) {
            if sinr >= thr + params.outage_return_hysteresis_db {
                state.switch_in_progress = Some(PendingSwitch {
                    from: CellId::Lte,
                    target: best,
                    triggered_at_s: now,
                    completes_at_s: now + params.rat_switch_delay_s,
                    cause: HandoverCause::BetterSinr,
                });
            }
        }
        return None;
    }

    let serving = crt.mmwave_sinr_db[state.serving_gnb];
    let condition = crt
        .best_gnb_except(Some(state.serving_gnb))
        .filter(|&(_, cand)| cand > serving + params.hysteresis_db && cand >= thr && serving >= thr);
    match condition {
        Some((cand, _)) => {
            let held = match state.ttt_timer {
                Some(t) if t.candidate == cand => t.held_steps + 1,
                _ => 1,
            };
            if held >= ttt_steps(action.ttt_s, sim_step) {
                state.ttt_timer = None;
                state.switch_in_progress = Some(PendingSwitch {
                    from: CellId::Gnb(state.serving_gnb),
                    target: cand,
                    triggered_at_s: now,
                    completes_at_s: now + params.rat_switch_delay_s,
                    cause: HandoverCause::BetterSinr,
                });
            } else {
                state.ttt_timer = Some(TttTimer {
                    candidate: cand,
                    held_steps: held,
                });
            }
        }
        None => state.ttt_timer = None,
    }
    None
}

/// Change points of the zero-delay best cell. The first entry is the initial cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthTrace {
    pub changes: Vec<(f64, CellId)>,
}

impl GroundTruthTrace {
    pub fn observe(&mut self, t: f64, cell: CellId) {
        if self.changes.last().map(|c| c.1) != Some(cell) {
            self.changes.push((t, cell));
        }
    }

    pub fn current(&self) -> Option<CellId> {
        self.changes.last().map(|c| c.1)
    }

    /// Most recent change to `cell` in `(after, until]`, skipping the initial entry.
    fn last_change_to(&self, cell: CellId, after: f64, until: f64) -> Option<f64> {
        self.changes
            .iter()
            .skip(1)
            .rev()
            .filter(|(t, _)| *t <= until)
            .take_while(|(t, _)| *t > after)
            .find(|(_, c)| *c == cell)
            .map(|(t, _)| *t)
    }
}

/// Latency of one record: completion minus the most recent instant the
/// ground-truth best cell became the target, at least `rat_switch_delay`.
/// Only changes after `previous_completion` are considered; otherwise the
/// record is unmatched and falls back to `completed − triggered`.
pub fn record_latency(
    gt: &GroundTruthTrace,
    record: &mut HandoverRecord,
    previous_completion: f64,
    rat_switch_delay_s: f64,
) {
    match gt.last_change_to(record.to, previous_completion, record.completed_at_s) {
        Some(t) => {
            record.latency_s = (record.completed_at_s - t).max(rat_switch_delay_s);
            record.matched = true;
        }
        None => {
            record.latency_s = record.completed_at_s - record.triggered_at_s;
            record.matched = false;
        }
    }
}

/// Assigns latencies to a time-ordered list of records of one UE.
pub fn measure_latency(gt: &GroundTruthTrace, records: &mut [HandoverRecord], rat_switch_delay_s: f64) {
    let mut previous = f64::NEG_INFINITY;
    for r in records.iter_mut() {
        record_latency(gt, r, previous, rat_switch_delay_s);
        previous = r.completed_at_s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BeamPair;

    fn crt(sinr: &[f64]) -> CompleteReportTable {
        CompleteReportTable {
            lte_sinr_db: 10.0,
            mmwave_sinr_db: sinr.to_vec(),
            best_beam: vec![BeamPair { gnb_dir: 0, ue_dir: 0 }; sinr.len()],
            measured_at_s: 0.0,
            sweep_delay_s: 0.0,
        }
    }

    fn grid() -> ActionGrid {
        GridConfig::default().build().unwrap()
    }

    fn action(out: f64, ttt: f64) -> HandoverAction {
        HandoverAction {
            outage_threshold_db: out,
            ttt_s: ttt,
            grid_index: (0, 0),
        }
    }

    #[test]
    fn default_grid_levels() {
        let g = grid();
        assert_eq!(g.outage_levels, vec![-8.0, -6.0, -4.0, -2.0, 0.0]);
        let expected_ttt = [0.025, 0.050, 0.075, 0.100, 0.125, 0.150];
        for (a, b) in g.ttt_levels.iter().zip(expected_ttt) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(g.size(), 30);
        let a = g.action(g.flat(3, 4));
        assert_eq!(a.grid_index, (3, 4));
        assert_eq!(a.outage_threshold_db, -2.0);
    }

    #[test]
    fn two_level_and_degenerate_grids() {
        assert_eq!(uniform_levels(-3.0, 1.0, 2).unwrap(), vec![-3.0, 1.0]);
        assert!(matches!(uniform_levels(-3.0, 1.0, 1), Err(Error::Domain(_))));
        assert!(uniform_levels(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn snapping_tie_rules() {
        let g = grid();
        assert_eq!(g.outage_levels[g.snap_outage(-3.0)], -2.0);
        assert_eq!(g.outage_levels[g.snap_outage(-4.2)], -4.0);
        assert_eq!(g.snap_ttt(0.0875), 2);
        assert_eq!(g.snap_ttt(0.0625), 1);
        assert_eq!(g.snap_ttt(10.0), 5);
    }

    #[test]
    fn better_candidate_held_for_ttt_starts_switch() {
        let p = SchParams::default();
        let c = crt(&[10.0, 13.0]);
        let a = action(-4.0, 0.100);
        let mut st = SchState::attach(&crt(&[10.0, 5.0]), -4.0);
        assert_eq!(st.serving_gnb, 0);
        let dt = 0.001;
        for n in 1..100 {
            assert!(sch_step(&mut st, &c, &a, n as f64 * dt, dt, &p).is_none());
            assert!(st.switch_in_progress.is_none(), "step {n}");
            assert!(st.ttt_held_s(dt) <= a.ttt_s + dt);
        }
        sch_step(&mut st, &c, &a, 0.100, dt, &p);
        let sw = st.switch_in_progress.expect("switch after exactly TTT");
        assert_eq!(sw.target, 1);
        assert!((sw.completes_at_s - 0.120).abs() < 1e-12);
        // completion emits the record
        let mut rec = None;
        for n in 101..=120 {
            rec = rec.or(sch_step(&mut st, &c, &a, n as f64 * dt, dt, &p));
        }
        let rec = rec.expect("completed");
        assert_eq!(rec.from, CellId::Gnb(0));
        assert_eq!(rec.to, CellId::Gnb(1));
        assert_eq!(rec.cause, HandoverCause::BetterSinr);
        assert!(!rec.was_pingpong);
        assert_eq!(st.serving_gnb, 1);
    }

    #[test]
    fn broken_hold_resets_timer() {
        let p = SchParams::default();
        let a = action(-4.0, 0.050);
        let mut st = SchState::attach(&crt(&[10.0, 5.0]), -4.0);
        let dt = 0.001;
        for n in 1..50 {
            sch_step(&mut st, &crt(&[10.0, 13.0]), &a, n as f64 * dt, dt, &p);
        }
        assert_eq!(st.ttt_timer.unwrap().held_steps, 49);
        sch_step(&mut st, &crt(&[10.0, 9.0]), &a, 0.050, dt, &p);
        assert!(st.ttt_timer.is_none());
        assert!(st.switch_in_progress.is_none());
    }

    #[test]
    fn hysteresis_blocks_marginal_candidate() {
        let p = SchParams::default();
        let a = action(-4.0, 0.025);
        let mut st = SchState::attach(&crt(&[10.0, 5.0]), -4.0);
        for n in 1..200 {
            sch_step(&mut st, &crt(&[10.0, 10.9]), &a, n as f64 * 0.001, 0.001, &p);
        }
        assert!(st.ttt_timer.is_none() && st.switch_in_progress.is_none());
    }

    #[test]
    fn outage_falls_back_immediately_and_recovers() {
        let p = SchParams::default();
        let a = action(-4.0, 0.100);
        let mut st = SchState::attach(&crt(&[10.0, 5.0]), -4.0);
        let rec = sch_step(&mut st, &crt(&[-4.1, -6.0]), &a, 0.5, 0.001, &p).unwrap();
        assert_eq!(rec.cause, HandoverCause::Outage);
        assert_eq!(rec.to, CellId::Lte);
        assert_eq!(rec.triggered_at_s, rec.completed_at_s);
        assert!(st.on_lte_fallback);
        // 1.9 dB above threshold is not enough to return
        sch_step(&mut st, &crt(&[-2.1, -6.0]), &a, 0.501, 0.001, &p);
        assert!(st.switch_in_progress.is_none());
        sch_step(&mut st, &crt(&[-6.0, -2.0]), &a, 0.502, 0.001, &p);
        assert_eq!(st.switch_in_progress.unwrap().target, 1);
        let rec = sch_step(&mut st, &crt(&[-6.0, -2.0]), &a, 0.522, 0.001, &p).unwrap();
        assert_eq!(rec.from, CellId::Lte);
        assert_eq!(rec.to, CellId::Gnb(1));
        assert!(!st.on_lte_fallback);
    }

    #[test]
    fn pingpong_detection() {
        let p = SchParams::default();
        let a = action(-8.0, 0.025);
        let mut st = SchState::attach(&crt(&[10.0, 5.0]), -8.0);
        let dt = 0.001;
        let mut records = Vec::new();
        let mut n = 1;
        for (sinr, steps) in [([10.0, 13.0], 100), ([13.0, 10.0], 100)] {
            for _ in 0..steps {
                records.extend(sch_step(&mut st, &crt(&sinr), &a, n as f64 * dt, dt, &p));
                n += 1;
            }
        }
        assert_eq!(records.len(), 2);
        assert!(!records[0].was_pingpong);
        assert!(records[1].was_pingpong);
    }

    #[test]
    fn latency_from_ground_truth_flip() {
        let mut gt = GroundTruthTrace::default();
        gt.observe(0.0, CellId::Gnb(0));
        gt.observe(1.0, CellId::Gnb(1));
        let mut recs = vec![HandoverRecord {
            triggered_at_s: 1.04,
            completed_at_s: 1.06,
            from: CellId::Gnb(0),
            to: CellId::Gnb(1),
            latency_s: 0.0,
            matched: false,
            was_pingpong: false,
            cause: HandoverCause::BetterSinr,
        }];
        measure_latency(&gt, &mut recs, 0.02);
        assert!(recs[0].matched);
        assert!((recs[0].latency_s - 0.060).abs() < 1e-12);
    }

    #[test]
    fn latency_unmatched_before_any_flip() {
        let mut gt = GroundTruthTrace::default();
        gt.observe(0.0, CellId::Gnb(0));
        gt.observe(2.0, CellId::Gnb(1));
        let mut recs = vec![HandoverRecord {
            triggered_at_s: 0.5,
            completed_at_s: 0.52,
            from: CellId::Gnb(0),
            to: CellId::Gnb(1),
            latency_s: 0.0,
            matched: true,
            was_pingpong: false,
            cause: HandoverCause::BetterSinr,
        }];
        measure_latency(&gt, &mut recs, 0.02);
        assert!(!recs[0].matched);
        assert!((recs[0].latency_s - 0.02).abs() < 1e-12);
    }

    #[test]
    fn latency_clamped_to_switch_delay() {
        let mut gt = GroundTruthTrace::default();
        gt.observe(0.0, CellId::Gnb(0));
        gt.observe(1.055, CellId::Gnb(1));
        let mut recs = vec![HandoverRecord {
            triggered_at_s: 1.04,
            completed_at_s: 1.06,
            from: CellId::Gnb(0),
            to: CellId::Gnb(1),
            latency_s: 0.0,
            matched: false,
            was_pingpong: false,
            cause: HandoverCause::BetterSinr,
        }];
        measure_latency(&gt, &mut recs, 0.02);
        assert_eq!(recs[0].latency_s, 0.02);
    }
}
