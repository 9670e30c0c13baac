//! Static urban geometry, UE mobility and RNG stream management.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{BfConfig, ChannelParams, ContextConfig};
use crate::dc::SchParams;
use crate::error::{Error, Result};

/// Clearance kept between mobility paths and building walls, in meters.
const WALL_CLEARANCE_M: f64 = 1e-6;
const MAX_WAYPOINT_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from `self` towards `other` in `[0, 2π)`, counter-clockwise from +x.
    pub fn bearing_to(self, other: Point) -> f64 {
        let a = (other.y - self.y).atan2(other.x - self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// Axis-aligned rectangle. Only its open interior blocks a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn contains_open(&self, p: Point) -> bool {
        p.x > self.x_min && p.x < self.x_max && p.y > self.y_min && p.y < self.y_max
    }

    pub fn contains_closed(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    fn inflate(&self, by: f64) -> Rect {
        Rect::new(
            self.x_min - by,
            self.y_min - by,
            self.x_max + by,
            self.y_max + by,
        )
    }

    /// True iff some point of segment `a`-`b` lies in the open interior.
    pub fn segment_crosses_interior(&self, a: Point, b: Point) -> bool {
        // Liang-Barsky clip against the closed rectangle, then test the midpoint
        // of the clipped piece: a chord of a convex set is interior everywhere
        // except at its ends unless it lies along one edge.
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (p, q) in [
            (-dx, a.x - self.x_min),
            (dx, self.x_max - a.x),
            (-dy, a.y - self.y_min),
            (dy, self.y_max - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t0 > t1 {
            return false;
        }
        let tm = 0.5 * (t0 + t1);
        self.contains_open(Point::new(a.x + tm * dx, a.y + tm * dy))
    }
}

/// Line-of-sight test: the segment touches no building interior. Edge contact is LOS.
pub fn is_los(a: Point, b: Point, buildings: &[Rect]) -> bool {
    !buildings.iter().any(|r| r.segment_crosses_interior(a, b))
}

/// Complete simulation scenario as stored in the JSON scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub enb_position_m: Point,
    pub gnb_positions_m: Vec<Point>,
    #[serde(default)]
    pub buildings_m: Vec<Rect>,
    pub ue_count: usize,
    pub ue_speed_mps: f64,
    #[serde(default = "default_sim_step")]
    pub sim_step_s: f64,
    pub episode_duration_s: f64,
    pub seed: u64,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub beamforming: BfConfig,
    #[serde(default)]
    pub handover: SchParams,
    #[serde(default)]
    pub context: ContextConfig,
}

fn default_sim_step() -> f64 {
    0.001
}

const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.json");

impl ScenarioConfig {
    /// The bundled street-canyon scenario: one eNB, two gNBs, two buildings, one UE.
    pub fn bundled_default() -> Self {
        parse_scenario(DEFAULT_SCENARIO, "bundled default scenario")
            .expect("bundled scenario is valid")
    }

    pub fn gnb_count(&self) -> usize {
        self.gnb_positions_m.len()
    }

    pub fn steps_per_episode(&self) -> u64 {
        (self.episode_duration_s / self.sim_step_s).round() as u64
    }

    pub fn in_area(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.area_width_m && p.y >= 0.0 && p.y <= self.area_height_m
    }

    pub fn inside_building(&self, p: Point) -> bool {
        self.buildings_m.iter().any(|b| b.contains_open(p))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if !(self.area_width_m > 0.0 && self.area_height_m > 0.0)
            || !self.area_width_m.is_finite()
            || !self.area_height_m.is_finite()
        {
            return fail("area dimensions must be positive and finite".into());
        }
        if self.gnb_positions_m.len() < 2 {
            return fail(format!(
                "M_T >= 2 gNBs required for handover, got {}",
                self.gnb_positions_m.len()
            ));
        }
        if !self.in_area(self.enb_position_m) {
            return fail("eNB position lies outside the area".into());
        }
        for (i, g) in self.gnb_positions_m.iter().enumerate() {
            if !self.in_area(*g) {
                return fail(format!("gNB {i} position lies outside the area"));
            }
        }
        for (j, b) in self.buildings_m.iter().enumerate() {
            if !(b.x_min < b.x_max && b.y_min < b.y_max) {
                return fail(format!("building {j} has non-positive extent"));
            }
            if !self.in_area(Point::new(b.x_min, b.y_min)) || !self.in_area(Point::new(b.x_max, b.y_max))
            {
                return fail(format!("building {j} extends outside the area"));
            }
            if b.contains_closed(self.enb_position_m) {
                return fail(format!("building {j} contains the eNB position"));
            }
            for (i, g) in self.gnb_positions_m.iter().enumerate() {
                if b.contains_closed(*g) {
                    return fail(format!("building {j} contains gNB {i}"));
                }
            }
        }
        if self.ue_count == 0 {
            return fail("ue_count must be at least 1".into());
        }
        if !(self.ue_speed_mps >= 0.0 && self.ue_speed_mps.is_finite()) {
            return fail("ue_speed_mps must be finite and non-negative".into());
        }
        if !(self.sim_step_s > 0.0 && self.sim_step_s.is_finite()) {
            return fail("sim_step_s must be positive".into());
        }
        let ratio = self.episode_duration_s / self.sim_step_s;
        if !(self.episode_duration_s > 0.0) || (ratio - ratio.round()).abs() > 1e-6 {
            return fail("episode_duration_s must be a positive integer multiple of sim_step_s".into());
        }
        self.channel.validate()?;
        self.beamforming.validate()?;
        self.handover.validate()?;
        self.context.validate()?;
        Ok(())
    }
}

pub fn parse_scenario(text: &str, what: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|source| Error::Parse {
        what: what.to_string(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

/// Independent randomness concerns. Each gets its own ChaCha stream under the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Mobility = 1,
    Shadowing = 2,
    Exploration = 3,
    Replay = 4,
    Gps = 5,
    Init = 6,
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) ^ index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub position: Point,
    pub velocity: Point,
    pub waypoint: Point,
}

impl UeState {
    /// Places a UE uniformly outside buildings and gives it a first waypoint.
    pub fn spawn<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> UeState {
        let position = draw_free_point(cfg, rng).unwrap_or(cfg.enb_position_m);
        let mut ue = UeState {
            position,
            velocity: Point::default(),
            waypoint: position,
        };
        retarget(&mut ue, cfg, rng);
        ue
    }
}

fn draw_free_point<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Option<Point> {
    for _ in 0..MAX_WAYPOINT_DRAWS {
        let p = Point::new(
            rng.random::<f64>() * cfg.area_width_m,
            rng.random::<f64>() * cfg.area_height_m,
        );
        if !cfg
            .buildings_m
            .iter()
            .any(|b| b.inflate(WALL_CLEARANCE_M).contains_closed(p))
        {
            return Some(p);
        }
    }
    None
}

/// Draws a new waypoint reachable in a straight line, and points the velocity at it.
fn retarget<R: Rng + ?Sized>(ue: &mut UeState, cfg: &ScenarioConfig, rng: &mut R) {
    let inflated: Vec<Rect> = cfg
        .buildings_m
        .iter()
        .map(|b| b.inflate(WALL_CLEARANCE_M))
        .collect();
    for _ in 0..MAX_WAYPOINT_DRAWS {
        let Some(wp) = draw_free_point(cfg, rng) else {
            break;
        };
        let d = ue.position.distance(wp);
        if d > 0.0 && is_los(ue.position, wp, &inflated) {
            ue.waypoint = wp;
            ue.velocity = Point::new(
                (wp.x - ue.position.x) / d * cfg.ue_speed_mps,
                (wp.y - ue.position.y) / d * cfg.ue_speed_mps,
            );
            return;
        }
    }
    // Boxed in: wait in place and retry on the next step.
    ue.waypoint = ue.position;
    ue.velocity = Point::default();
}

/// Advances one UE by one simulation step under random-waypoint mobility.
pub fn step_mobility<R: Rng + ?Sized>(ue: &UeState, cfg: &ScenarioConfig, rng: &mut R) -> UeState {
    let mut next = ue.clone();
    let speed = ue.velocity.x.hypot(ue.velocity.y);
    if speed == 0.0 {
        if cfg.ue_speed_mps > 0.0 {
            retarget(&mut next, cfg, rng);
        }
        return next;
    }
    let travel = speed * cfg.sim_step_s;
    if ue.position.distance(ue.waypoint) <= travel {
        next.position = ue.waypoint;
        retarget(&mut next, cfg, rng);
    } else {
        next.position = Point::new(
            ue.position.x + ue.velocity.x * cfg.sim_step_s,
            ue.position.y + ue.velocity.y * cfg.sim_step_s,
        );
    }
    next
}
