//! Non-learning handover controllers: a fixed (outage, TTT) pair and a TTT
//! that shrinks as the best candidate pulls ahead of the serving gNB.

use serde::{Deserialize, Serialize};

use crate::channel::CompleteReportTable;
use crate::dc::{ActionGrid, HandoverAction, SchState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub fixed_outage_db: f64,
    pub fixed_ttt_s: f64,
    pub dynamic_outage_db: f64,
    /// ΔSINR at or below which the longest TTT is used.
    pub delta_low_db: f64,
    /// ΔSINR at or above which the shortest TTT is used.
    pub delta_high_db: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            fixed_outage_db: -4.0,
            fixed_ttt_s: 0.100,
            dynamic_outage_db: -4.0,
            delta_low_db: 0.0,
            delta_high_db: 8.0,
        }
    }
}

fn on_grid(levels: &[f64], value: f64, snapped: usize) -> bool {
    (levels[snapped] - value).abs() <= 1e-9 * value.abs().max(1.0)
}

/// The configured pair snapped onto the grid; off-grid values are reported once per call.
pub fn fixed_ttt_policy(grid: &ActionGrid, cfg: &BaselineConfig) -> HandoverAction {
    let i_out = grid.snap_outage(cfg.fixed_outage_db);
    let i_ttt = grid.snap_ttt(cfg.fixed_ttt_s);
    if !on_grid(&grid.outage_levels, cfg.fixed_outage_db, i_out) {
        log::warn!(
            "fixed outage threshold {} dB is off-grid; using {} dB",
            cfg.fixed_outage_db,
            grid.outage_levels[i_out]
        );
    }
    if !on_grid(&grid.ttt_levels, cfg.fixed_ttt_s, i_ttt) {
        log::warn!(
            "fixed TTT {} s is off-grid; using {} s",
            cfg.fixed_ttt_s,
            grid.ttt_levels[i_ttt]
        );
    }
    grid.action(grid.flat(i_out, i_ttt))
}

/// Raw (unsnapped) dynamic TTT for a given SINR advantage of the best candidate.
pub fn dynamic_ttt_raw(delta_db: f64, grid: &ActionGrid, cfg: &BaselineConfig) -> f64 {
    let t_min = grid.ttt_levels[0];
    let t_max = grid.ttt_levels[grid.k_ttt() - 1];
    let frac = ((delta_db - cfg.delta_low_db) / (cfg.delta_high_db - cfg.delta_low_db)).clamp(0.0, 1.0);
    (t_max - (t_max - t_min) * frac).clamp(t_min, t_max)
}

pub fn dynamic_ttt_policy(
    crt: &CompleteReportTable,
    sch: &SchState,
    grid: &ActionGrid,
    cfg: &BaselineConfig,
) -> HandoverAction {
    let serving = crt.mmwave_sinr_db[sch.serving_gnb];
    let delta = crt
        .best_gnb_except(Some(sch.serving_gnb))
        .map_or(0.0, |(_, s)| s - serving);
    let i_ttt = grid.snap_ttt(dynamic_ttt_raw(delta, grid, cfg));
    let i_out = grid.snap_outage(cfg.dynamic_outage_db);
    grid.action(grid.flat(i_out, i_ttt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dc::GridConfig;

    fn crt(sinrs: &[f64]) -> CompleteReportTable {
        CompleteReportTable {
            lte_sinr_db: 10.0,
            mmwave_sinr_db: sinrs.to_vec(),
            best_beam: vec![crate::channel::BeamPair { gnb_dir: 0, ue_dir: 0 }; sinrs.len()],
            measured_at_s: 0.0,
            sweep_delay_s: 0.0,
        }
    }

    fn sch() -> SchState {
        SchState::attach(&crt(&[10.0, 0.0]), -4.0)
    }

    #[test]
    fn fixed_is_constant_and_snaps() {
        let grid = GridConfig::default().build().unwrap();
        let cfg = BaselineConfig::default();
        let a = fixed_ttt_policy(&grid, &cfg);
        assert_eq!(a, fixed_ttt_policy(&grid, &cfg));
        assert_eq!(a.outage_threshold_db, -4.0);
        assert!((a.ttt_s - 0.100).abs() < 1e-12);
        let off = BaselineConfig {
            fixed_outage_db: -3.0,
            ..cfg
        };
        assert_eq!(fixed_ttt_policy(&grid, &off).outage_threshold_db, -2.0);
    }

    #[test]
    fn dynamic_branches() {
        let grid = GridConfig::default().build().unwrap();
        let cfg = BaselineConfig::default();
        let s = sch();
        assert_eq!(s.serving_gnb, 0);
        let fast = dynamic_ttt_policy(&crt(&[0.0, 9.0]), &s, &grid, &cfg);
        assert_eq!(fast.ttt_s, 0.025);
        let slow = dynamic_ttt_policy(&crt(&[5.0, 2.0]), &s, &grid, &cfg);
        assert_eq!(slow.ttt_s, 0.150);
        assert!((dynamic_ttt_raw(4.0, &grid, &cfg) - 0.0875).abs() < 1e-12);
        let mid = dynamic_ttt_policy(&crt(&[0.0, 4.0]), &s, &grid, &cfg);
        assert!((mid.ttt_s - 0.075).abs() < 1e-12);
        assert_eq!(mid.outage_threshold_db, -4.0);
    }
}
