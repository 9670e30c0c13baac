//! Link budget, beam sweeps and the coordinator's report table.
//!
//! mmWave links use the UMi street-canyon pathloss with geometric LOS/NLOS,
//! a frozen log-normal shadowing field and an idealized sectored beam model.
//! The LTE link uses the macro-cell pathloss and carries no interference.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{is_los, Point, ScenarioConfig};

/// Printed Hybrid-Analog delay over the value the sweep formula gives for it (16.8 / 12.8).
const TABLE1_HYBRID_NUM: u128 = 21;
const TABLE1_HYBRID_DEN: u128 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellId {
    Lte,
    Gnb(usize),
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellId::Lte => write!(f, "lte"),
            CellId::Gnb(i) => write!(f, "gnb{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BfKind {
    AnalogAnalog,
    HybridAnalog,
    DigitalAnalog,
}

impl BfKind {
    pub const ALL: [BfKind; 3] = [
        BfKind::AnalogAnalog,
        BfKind::HybridAnalog,
        BfKind::DigitalAnalog,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BfKind::AnalogAnalog => "analog-analog",
            BfKind::HybridAnalog => "hybrid-analog",
            BfKind::DigitalAnalog => "digital-analog",
        }
    }

    /// Number of gNB directions processed simultaneously.
    pub fn l_factor(self, n_gnb_dirs: usize) -> usize {
        match self {
            BfKind::AnalogAnalog => 1,
            BfKind::HybridAnalog => 2,
            BfKind::DigitalAnalog => n_gnb_dirs,
        }
    }
}

impl fmt::Display for BfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BfKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown beamforming kind '{s}'")))
    }
}

/// Beamforming block of the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BfConfig {
    pub kind: BfKind,
    pub n_gnb_dirs: usize,
    pub n_ue_dirs: usize,
    pub srs_period_s: f64,
    /// Use the printed Hybrid-Analog delay (16.8 ms) instead of the formula value (12.8 ms).
    #[serde(default)]
    pub table1_compat: bool,
}

impl Default for BfConfig {
    fn default() -> Self {
        BfConfig {
            kind: BfKind::AnalogAnalog,
            n_gnb_dirs: 16,
            n_ue_dirs: 8,
            srs_period_s: 200e-6,
            table1_compat: false,
        }
    }
}

impl BfConfig {
    pub fn validate(&self) -> Result<()> {
        BfArchitecture::from_config(self).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfArchitecture {
    pub kind: BfKind,
    pub n_gnb_dirs: usize,
    pub n_ue_dirs: usize,
    pub srs_period_s: f64,
    pub l_factor: usize,
    pub table1_compat: bool,
}

impl BfArchitecture {
    pub fn new(kind: BfKind, n_gnb_dirs: usize, n_ue_dirs: usize, srs_period_s: f64) -> Result<Self> {
        if n_gnb_dirs == 0 || n_ue_dirs == 0 {
            return Err(Error::Validation(
                "beamforming direction counts must be at least 1".into(),
            ));
        }
        if !(srs_period_s > 0.0 && srs_period_s.is_finite()) {
            return Err(Error::Validation("srs_period_s must be positive".into()));
        }
        Ok(BfArchitecture {
            kind,
            n_gnb_dirs,
            n_ue_dirs,
            srs_period_s,
            l_factor: kind.l_factor(n_gnb_dirs),
            table1_compat: false,
        })
    }

    pub fn from_config(cfg: &BfConfig) -> Result<Self> {
        let mut bf = Self::new(cfg.kind, cfg.n_gnb_dirs, cfg.n_ue_dirs, cfg.srs_period_s)?;
        bf.table1_compat = cfg.table1_compat;
        Ok(bf)
    }

    pub fn full_sweep_delay(&self) -> f64 {
        self.sweep_delay(self.n_gnb_dirs)
    }

    /// Sweep delay when only `swept_gnb_dirs` gNB directions are measured.
    ///
    /// A transceiver cannot process more directions in parallel than it sweeps,
    /// so the parallelism is capped at the swept count.
    pub fn sweep_delay(&self, swept_gnb_dirs: usize) -> f64 {
        let swept = swept_gnb_dirs.clamp(1, self.n_gnb_dirs);
        let l = self.l_factor.min(swept);
        let (mut num, mut den) = sweep_delay_fraction(swept, self.n_ue_dirs, self.srs_period_s, l);
        if self.table1_compat && self.kind == BfKind::HybridAnalog {
            num *= TABLE1_HYBRID_NUM;
            den *= TABLE1_HYBRID_DEN;
        }
        num as f64 / den as f64
    }
}

/// Sweep delay as an exact fraction of seconds: `(N_gNB·N_UE·T_ns) / (L·1e9)`.
/// The SRS period is resolved to whole nanoseconds.
pub fn sweep_delay_fraction(
    n_gnb_dirs: usize,
    n_ue_dirs: usize,
    srs_period_s: f64,
    l_factor: usize,
) -> (u128, u128) {
    let srs_ns = (srs_period_s * 1e9).round() as u128;
    (
        n_gnb_dirs as u128 * n_ue_dirs as u128 * srs_ns,
        l_factor as u128 * 1_000_000_000,
    )
}

/// Measurement delay of a full beam sweep: `D = N_gNB · N_UE · T_per / L`.
pub fn compute_sweep_delay(
    n_gnb_dirs: usize,
    n_ue_dirs: usize,
    srs_period_s: f64,
    l_factor: usize,
) -> Result<f64> {
    if l_factor == 0 {
        return Err(Error::Domain("l_factor must be at least 1".into()));
    }
    if n_gnb_dirs == 0 || n_ue_dirs == 0 {
        return Err(Error::Domain("direction counts must be at least 1".into()));
    }
    if !(srs_period_s > 0.0 && srs_period_s.is_finite()) {
        return Err(Error::Domain("srs period must be positive".into()));
    }
    let (num, den) = sweep_delay_fraction(n_gnb_dirs, n_ue_dirs, srs_period_s, l_factor);
    Ok(num as f64 / den as f64)
}

/// Radio constants. Defaults are the usual UMi street-canyon / macro values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub mmwave_carrier_ghz: f64,
    pub lte_carrier_ghz: f64,
    pub tx_power_gnb_dbm: f64,
    pub tx_power_enb_dbm: f64,
    pub noise_figure_db: f64,
    pub bandwidth_mmwave_hz: f64,
    pub bandwidth_lte_hz: f64,
    pub shadowing_sigma_los_db: f64,
    pub shadowing_sigma_nlos_db: f64,
    pub shadowing_sigma_lte_db: f64,
    pub shadowing_decorrelation_distance_m: f64,
    /// Gain of a non-aligned beam relative to the aligned gain `10·log10(n)`.
    pub sidelobe_relative_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            mmwave_carrier_ghz: 28.0,
            lte_carrier_ghz: 2.1,
            tx_power_gnb_dbm: 30.0,
            tx_power_enb_dbm: 46.0,
            noise_figure_db: 7.0,
            bandwidth_mmwave_hz: 400e6,
            bandwidth_lte_hz: 20e6,
            shadowing_sigma_los_db: 4.0,
            shadowing_sigma_nlos_db: 7.82,
            shadowing_sigma_lte_db: 6.0,
            shadowing_decorrelation_distance_m: 10.0,
            sidelobe_relative_db: -10.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mmwave_carrier_ghz,
            self.lte_carrier_ghz,
            self.tx_power_gnb_dbm,
            self.tx_power_enb_dbm,
            self.noise_figure_db,
            self.sidelobe_relative_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("channel powers and gains must be finite".into()));
        }
        if [
            self.shadowing_sigma_los_db,
            self.shadowing_sigma_nlos_db,
            self.shadowing_sigma_lte_db,
        ]
        .iter()
        .any(|s| !(*s >= 0.0))
        {
            return Err(Error::Validation("shadowing sigmas must be >= 0".into()));
        }
        if !(self.bandwidth_mmwave_hz > 0.0 && self.bandwidth_lte_hz > 0.0) {
            return Err(Error::Validation("bandwidths must be positive".into()));
        }
        if !(self.shadowing_decorrelation_distance_m > 0.0) {
            return Err(Error::Validation(
                "shadowing decorrelation distance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn noise_mmwave_dbm(&self) -> f64 {
        thermal_noise_dbm(self.bandwidth_mmwave_hz) + self.noise_figure_db
    }

    pub fn noise_lte_dbm(&self) -> f64 {
        thermal_noise_dbm(self.bandwidth_lte_hz) + self.noise_figure_db
    }
}

pub fn thermal_noise_dbm(bandwidth_hz: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10()
}

/// UMi street-canyon pathloss in dB. Distances below 1 m are clamped.
pub fn pathloss_mmwave(distance_m: f64, los: bool, carrier_ghz: f64) -> f64 {
    let d = distance_m.max(1.0);
    let slope = if los { 21.0 } else { 31.9 };
    32.4 + slope * d.log10() + 20.0 * carrier_ghz.log10()
}

/// Macro-cell pathloss in dB, `128.1 + 37.6·log10(d_km)`. Distances below 10 m are clamped.
pub fn pathloss_lte(distance_m: f64) -> f64 {
    let d_km = distance_m.max(10.0) / 1000.0;
    128.1 + 37.6 * d_km.log10()
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Aligned per-side gain of an `n`-direction sectored array.
pub fn bf_gain_db(n_dirs: usize, aligned: bool, sidelobe_relative_db: f64) -> f64 {
    let g = 10.0 * (n_dirs as f64).log10();
    if aligned {
        g
    } else {
        g + sidelobe_relative_db
    }
}

/// Beam `i` of `n` covers bearings `[i·2π/n, (i+1)·2π/n)`.
pub fn beam_index(bearing: f64, n_dirs: usize) -> usize {
    let w = TAU / n_dirs as f64;
    let b = bearing.rem_euclid(TAU);
    ((b / w).floor() as usize).min(n_dirs - 1)
}

pub fn beam_center(index: usize, n_dirs: usize) -> f64 {
    (index as f64 + 0.5) * TAU / n_dirs as f64
}

fn angular_distance(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TAU) - PI).abs()
}

/// Frozen per-episode shadowing: one unit-variance Gaussian field per link,
/// drawn on a lattice with the decorrelation distance as spacing and
/// bilinearly interpolated (renormalized to unit variance).
#[derive(Debug, Clone)]
pub struct ShadowingField {
    spacing: f64,
    nx: usize,
    ny: usize,
    /// `links × ny × nx`; links are the gNBs in order, then the LTE eNB.
    values: Vec<f64>,
    links: usize,
}

impl ShadowingField {
    pub fn new<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Self {
        let spacing = scenario.channel.shadowing_decorrelation_distance_m;
        let nx = (scenario.area_width_m / spacing).ceil() as usize + 2;
        let ny = (scenario.area_height_m / spacing).ceil() as usize + 2;
        let links = scenario.gnb_count() + 1;
        let values = (0..links * nx * ny)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        ShadowingField {
            spacing,
            nx,
            ny,
            values,
            links,
        }
    }

    /// A field that is zero everywhere.
    pub fn zero(scenario: &ScenarioConfig) -> Self {
        ShadowingField {
            spacing: 1.0,
            nx: 1,
            ny: 1,
            values: vec![0.0; scenario.gnb_count() + 1],
            links: scenario.gnb_count() + 1,
        }
    }

    fn link_index(&self, cell: CellId) -> usize {
        match cell {
            CellId::Gnb(i) => i,
            CellId::Lte => self.links - 1,
        }
    }

    /// Unit-variance field value for `cell` at `p`.
    pub fn unit_value(&self, cell: CellId, p: Point) -> f64 {
        let base = self.link_index(cell) * self.nx * self.ny;
        if self.nx == 1 && self.ny == 1 {
            return self.values[base];
        }
        let fx = (p.x / self.spacing).clamp(0.0, (self.nx - 2) as f64);
        let fy = (p.y / self.spacing).clamp(0.0, (self.ny - 2) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let w = [
            (1.0 - tx) * (1.0 - ty),
            tx * (1.0 - ty),
            (1.0 - tx) * ty,
            tx * ty,
        ];
        let v = [
            self.values[base + iy * self.nx + ix],
            self.values[base + iy * self.nx + ix + 1],
            self.values[base + (iy + 1) * self.nx + ix],
            self.values[base + (iy + 1) * self.nx + ix + 1],
        ];
        let num: f64 = w.iter().zip(v).map(|(w, v)| w * v).sum();
        let norm = w.iter().map(|w| w * w).sum::<f64>().sqrt();
        num / norm
    }
}

/// Per-position quantities shared by every beam pair of a sweep.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    /// Received power per gNB without beamforming gain, dBm.
    pub base_rx_dbm: Vec<f64>,
    pub los: Vec<bool>,
    /// gNB-side beam containing the UE bearing, per gNB.
    pub gnb_aligned: Vec<usize>,
    /// UE-side beam containing each gNB bearing.
    pub ue_aligned: Vec<usize>,
    pub noise_mw: f64,
    n_gnb_dirs: usize,
    n_ue_dirs: usize,
    sidelobe_relative_db: f64,
}

impl LinkBudget {
    pub fn new(
        ue: Point,
        bf: &BfArchitecture,
        params: &ChannelParams,
        scenario: &ScenarioConfig,
        shadowing: &ShadowingField,
    ) -> Self {
        let m = scenario.gnb_count();
        let mut base_rx_dbm = Vec::with_capacity(m);
        let mut los = Vec::with_capacity(m);
        let mut gnb_aligned = Vec::with_capacity(m);
        let mut ue_aligned = Vec::with_capacity(m);
        for (k, &g) in scenario.gnb_positions_m.iter().enumerate() {
            let l = is_los(g, ue, &scenario.buildings_m);
            let sigma = if l {
                params.shadowing_sigma_los_db
            } else {
                params.shadowing_sigma_nlos_db
            };
            let shadow = sigma * shadowing.unit_value(CellId::Gnb(k), ue);
            let pl = pathloss_mmwave(g.distance(ue), l, params.mmwave_carrier_ghz);
            base_rx_dbm.push(params.tx_power_gnb_dbm - pl - shadow);
            los.push(l);
            gnb_aligned.push(beam_index(g.bearing_to(ue), bf.n_gnb_dirs));
            ue_aligned.push(beam_index(ue.bearing_to(g), bf.n_ue_dirs));
        }
        LinkBudget {
            base_rx_dbm,
            los,
            gnb_aligned,
            ue_aligned,
            noise_mw: db_to_lin(params.noise_mmwave_dbm()),
            n_gnb_dirs: bf.n_gnb_dirs,
            n_ue_dirs: bf.n_ue_dirs,
            sidelobe_relative_db: params.sidelobe_relative_db,
        }
    }

    /// Interference at the UE when it listens on beam `ue_dir`, excluding gNB `k`.
    /// Interferers point their serving beams away from this UE and so arrive on a sidelobe.
    fn interference_mw(&self, k: usize, ue_dir: usize) -> f64 {
        let g_side = bf_gain_db(self.n_gnb_dirs, false, self.sidelobe_relative_db);
        (0..self.base_rx_dbm.len())
            .filter(|&m| m != k)
            .map(|m| {
                let g_ue = bf_gain_db(
                    self.n_ue_dirs,
                    self.ue_aligned[m] == ue_dir,
                    self.sidelobe_relative_db,
                );
                db_to_lin(self.base_rx_dbm[m] + g_side + g_ue)
            })
            .sum()
    }

    /// SINR of gNB `k` measured on the beam pair (`gnb_dir`, `ue_dir`), dB.
    pub fn pair_sinr(&self, k: usize, gnb_dir: usize, ue_dir: usize) -> f64 {
        let signal = self.base_rx_dbm[k]
            + bf_gain_db(
                self.n_gnb_dirs,
                self.gnb_aligned[k] == gnb_dir,
                self.sidelobe_relative_db,
            )
            + bf_gain_db(
                self.n_ue_dirs,
                self.ue_aligned[k] == ue_dir,
                self.sidelobe_relative_db,
            );
        signal - lin_to_db(self.noise_mw + self.interference_mw(k, ue_dir))
    }

    /// SINR of gNB `k` on its geometrically aligned beam pair.
    pub fn aligned_sinr(&self, k: usize) -> f64 {
        self.pair_sinr(k, self.gnb_aligned[k], self.ue_aligned[k])
    }
}

pub fn lte_sinr(
    ue: Point,
    params: &ChannelParams,
    scenario: &ScenarioConfig,
    shadowing: &ShadowingField,
) -> f64 {
    let shadow = params.shadowing_sigma_lte_db * shadowing.unit_value(CellId::Lte, ue);
    params.tx_power_enb_dbm - pathloss_lte(scenario.enb_position_m.distance(ue)) - shadow
        - params.noise_lte_dbm()
}

/// Zero-delay SINR of `cell` at `ue` with ideal beam alignment, dB.
pub fn instantaneous_sinr(
    ue: Point,
    cell: CellId,
    bf: &BfArchitecture,
    params: &ChannelParams,
    scenario: &ScenarioConfig,
    shadowing: &ShadowingField,
) -> f64 {
    match cell {
        CellId::Lte => lte_sinr(ue, params, scenario, shadowing),
        CellId::Gnb(k) => LinkBudget::new(ue, bf, params, scenario, shadowing).aligned_sinr(k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamPair {
    pub gnb_dir: usize,
    pub ue_dir: usize,
}

/// Per-gNB best-beam SINR snapshot as seen by the coordinator.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteReportTable {
    pub lte_sinr_db: f64,
    pub mmwave_sinr_db: Vec<f64>,
    pub best_beam: Vec<BeamPair>,
    /// Simulation time at which this sweep's results became available.
    pub measured_at_s: f64,
    /// Duration of the sweep that produced this table.
    pub sweep_delay_s: f64,
}

impl CompleteReportTable {
    /// Strongest gNB other than `exclude`, with its SINR.
    pub fn best_gnb_except(&self, exclude: Option<usize>) -> Option<(usize, f64)> {
        self.mmwave_sinr_db
            .iter()
            .copied()
            .enumerate()
            .filter(|(k, _)| Some(*k) != exclude)
            .fold(None, |best, (k, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((k, s)),
            })
    }
}

/// Sweeps every gNB's direction set (or the given per-gNB sector) against all
/// UE directions. Results become available one sweep delay after `now`.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    ue: Point,
    bf: &BfArchitecture,
    params: &ChannelParams,
    scenario: &ScenarioConfig,
    shadowing: &ShadowingField,
    now: f64,
    sectors: Option<&[Vec<usize>]>,
) -> CompleteReportTable {
    let budget = LinkBudget::new(ue, bf, params, scenario, shadowing);
    let full: Vec<usize> = (0..bf.n_gnb_dirs).collect();
    let m = scenario.gnb_count();
    let mut sinr = Vec::with_capacity(m);
    let mut best_beam = Vec::with_capacity(m);
    let mut delay = 0.0_f64;
    for k in 0..m {
        let dirs = sectors.map_or(full.as_slice(), |s| s[k].as_slice());
        delay = delay.max(bf.sweep_delay(dirs.len()));
        let mut best = (f64::NEG_INFINITY, BeamPair { gnb_dir: 0, ue_dir: 0 });
        for &gi in dirs {
            for uj in 0..bf.n_ue_dirs {
                let s = budget.pair_sinr(k, gi, uj);
                if s > best.0 {
                    best = (s, BeamPair { gnb_dir: gi, ue_dir: uj });
                }
            }
        }
        sinr.push(best.0);
        best_beam.push(best.1);
    }
    CompleteReportTable {
        lte_sinr_db: lte_sinr(ue, params, scenario, shadowing),
        mmwave_sinr_db: sinr,
        best_beam,
        measured_at_s: now + delay,
        sweep_delay_s: delay,
    }
}

/// GPS-context beam sector: the contiguous gNB beams whose centers lie within
/// `margin + bearing uncertainty` of the bearing to the reported UE position.
/// The uncertainty is the half-angle subtended by the GPS error disc.
pub fn context_sector(
    ue_gps: Point,
    error_radius_m: f64,
    gnb: Point,
    full_dirs: usize,
    margin_rad: f64,
) -> Vec<usize> {
    let d = gnb.distance(ue_gps);
    let r = error_radius_m.max(0.0);
    let uncertainty = if r >= d {
        PI
    } else {
        r.atan2((d * d - r * r).sqrt())
    };
    let half = margin_rad.max(0.0) + uncertainty;
    if half >= PI {
        return (0..full_dirs).collect();
    }
    let bearing = gnb.bearing_to(ue_gps);
    let inside: Vec<bool> = (0..full_dirs)
        .map(|i| angular_distance(beam_center(i, full_dirs), bearing) <= half + 1e-12)
        .collect();
    if inside.iter().all(|&b| b) {
        return (0..full_dirs).collect();
    }
    if !inside.iter().any(|&b| b) {
        return vec![beam_index(bearing, full_dirs)];
    }
    let start = (0..full_dirs)
        .find(|&i| inside[i] && !inside[(i + full_dirs - 1) % full_dirs])
        .expect("a proper non-empty arc has a first beam");
    (0..full_dirs)
        .map(|o| (start + o) % full_dirs)
        .take_while(|&i| inside[i])
        .collect()
}

/// Draws a GPS fix uniformly within `radius` of the true position.
pub fn gps_fix<R: Rng + ?Sized>(truth: Point, radius: f64, rng: &mut R) -> Point {
    if radius <= 0.0 {
        return truth;
    }
    let rho = radius * rng.random::<f64>().sqrt();
    let phi = TAU * rng.random::<f64>();
    Point::new(truth.x + rho * phi.cos(), truth.y + rho * phi.sin())
}

/// GPS-context sector reduction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextConfig {
    pub enabled: bool,
    pub gps_error_radius_m: f64,
    pub margin_rad: f64,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            enabled: false,
            gps_error_radius_m: 5.0,
            margin_rad: 0.2,
        }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gps_error_radius_m >= 0.0) || !(self.margin_rad >= 0.0) {
            return Err(Error::Validation(
                "context error radius and margin must be >= 0".into(),
            ));
        }
        Ok(())
    }
}
