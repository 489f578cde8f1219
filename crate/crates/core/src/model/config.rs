//! Configuration file schema.
//!
//! The file is TOML with sections `geometry`, `encoders`, `limits`,
//! `feedback`, `bus` and `sim`. Lengths are millimetres and angles degrees;
//! both are converted to the internal units (mm, radians) at load. Omitted
//! keys take their defaults, unknown keys are rejected.

use super::encoder::{ChannelMap, DirectChannel, EncoderResolution, EncoderSettings};
use super::geometry::{
    GloveGeometry, Interval, JointLimits, RoutingPath, RoutingPoint, DEFAULT_ROUTING_HEIGHT,
};
use super::{Finger, JointChannel};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Offending key for validation errors.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

/// Haptic policy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackPolicy {
    /// Force thresholds t0 < t1 < t2, N.
    pub thresholds: [f64; 3],
    /// Release band below each threshold, N. Zero disables hysteresis.
    pub hysteresis: f64,
    /// Motor current per newton of contact force, mA/N.
    pub current_per_newton: f64,
    /// Cable retracted when force feedback engages, mm.
    pub tension_offset: f64,
    /// LRA drive frequencies of waveform 1 and 2, Hz.
    pub waveform_hz: [f64; 2],
}

impl Default for FeedbackPolicy {
    fn default() -> Self {
        FeedbackPolicy {
            thresholds: [0.1, 0.5, 1.0],
            hysteresis: 0.02,
            current_per_newton: 65.0,
            tension_offset: 1.5,
            waveform_hz: [160.0, 240.0],
        }
    }
}

impl FeedbackPolicy {
    /// Same thresholds with hysteresis disabled.
    pub fn without_hysteresis(mut self) -> Self {
        self.hysteresis = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [t0, t1, t2] = self.thresholds;
        if !(0.0 < t0 && t0 < t1 && t1 < t2 && t2.is_finite()) {
            return Err(ConfigError::invalid(
                "feedback.thresholds",
                "need 0 < t0 < t1 < t2",
            ));
        }
        if !(self.hysteresis >= 0.0 && self.hysteresis < (t1 - t0) / 2.0) {
            return Err(ConfigError::invalid(
                "feedback.hysteresis",
                format!("must lie in [0, {})", (t1 - t0) / 2.0),
            ));
        }
        if !(self.current_per_newton.is_finite() && self.current_per_newton > 0.0) {
            return Err(ConfigError::invalid(
                "feedback.current_per_newton",
                "must be positive",
            ));
        }
        if !(self.tension_offset.is_finite() && self.tension_offset >= 0.0) {
            return Err(ConfigError::invalid(
                "feedback.tension_offset",
                "must be non-negative",
            ));
        }
        if self
            .waveform_hz
            .iter()
            .any(|f| !(f.is_finite() && *f > 0.0))
        {
            return Err(ConfigError::invalid(
                "feedback.waveform_hz",
                "must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BusConfig {
    pub address: u8,
    /// bit/s
    pub bitrate: u32,
}

impl Default for BusConfig {
    fn default() -> Self {
        BusConfig {
            address: 1,
            bitrate: 500_000,
        }
    }
}

/// Delays along the force-feedback path, µs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageLatencies {
    pub sensor: u64,
    pub bus_up: u64,
    pub compute: u64,
    pub bus_down: u64,
    pub servo_mech: u64,
}

impl Default for StageLatencies {
    fn default() -> Self {
        StageLatencies {
            sensor: 5_000,
            bus_up: 2_000,
            compute: 3_000,
            bus_down: 2_000,
            servo_mech: 188_000,
        }
    }
}

impl StageLatencies {
    pub const ZERO: StageLatencies = StageLatencies {
        sensor: 0,
        bus_up: 0,
        compute: 0,
        bus_down: 0,
        servo_mech: 0,
    };

    pub fn total(&self) -> u64 {
        self.sensor + self.bus_up + self.compute + self.bus_down + self.servo_mech
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Per-sample Gaussian noise std, radians.
    pub encoder_std: f64,
    /// Linear drift, radians per second.
    pub drift: f64,
}

/// Linear angular spring on the robot's distal joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactModel {
    /// N/rad
    pub stiffness: f64,
    /// radians
    pub engage_angle: f64,
}

impl Default for ContactModel {
    fn default() -> Self {
        ContactModel {
            stiffness: 10.0,
            engage_angle: 60f64.to_radians(),
        }
    }
}

impl ContactModel {
    pub fn force(&self, distal_angle: f64) -> f64 {
        self.stiffness * (distal_angle - self.engage_angle).max(0.0)
    }
}

/// Operator trajectory description.
///
/// Poses list measured channels only (radians); PIP channels are derived
/// from DIP through the coupling and may not be given.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySpec {
    Static {
        pose: BTreeMap<JointChannel, f64>,
    },
    /// Raised-cosine cycles `from -> to -> from` with the given period.
    Cycle {
        period_us: u64,
        from: BTreeMap<JointChannel, f64>,
        to: BTreeMap<JointChannel, f64>,
    },
    /// Joint-angle CSV (`timestamp_us, q_00..q_19`, degrees), linearly
    /// interpolated.
    Recorded {
        path: PathBuf,
    },
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        let to = [
            ("index.mcp", 30.0),
            ("index.dip", 70.0),
            ("middle.mcp", 25.0),
            ("middle.dip", 50.0),
            ("thumb.ip", 20.0),
        ]
        .into_iter()
        .map(|(k, v)| (JointChannel::from_name(k).unwrap(), f64::to_radians(v)))
        .collect();
        TrajectorySpec::Cycle {
            period_us: 2_000_000,
            from: BTreeMap::new(),
            to,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Acquisition tick, µs.
    pub tick_us: u64,
    /// Every n-th tick goes to the recorded trace.
    pub record_divider: u32,
    pub duration_us: u64,
    pub latencies: StageLatencies,
    pub noise: NoiseModel,
    /// Quantize encoder readings to whole counts.
    pub quantize: bool,
    pub contact: ContactModel,
    pub seed: u64,
    /// Built-in preset name or path to a hand-model file.
    pub hand_model: String,
    pub trajectory: TrajectorySpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tick_us: 10_000,
            record_divider: 3,
            duration_us: 6_000_000,
            latencies: StageLatencies::default(),
            noise: NoiseModel::default(),
            quantize: true,
            contact: ContactModel::default(),
            seed: 0,
            hand_model: "6dof".to_string(),
            trajectory: TrajectorySpec::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tick_us == 0 {
            return Err(ConfigError::invalid("sim.tick_us", "must be positive"));
        }
        if self.record_divider == 0 {
            return Err(ConfigError::invalid(
                "sim.record_divider",
                "must be positive",
            ));
        }
        if !(self.noise.encoder_std.is_finite() && self.noise.encoder_std >= 0.0) {
            return Err(ConfigError::invalid(
                "sim.noise.encoder_std_deg",
                "must be non-negative",
            ));
        }
        if !self.noise.drift.is_finite() {
            return Err(ConfigError::invalid(
                "sim.noise.drift_deg_per_s",
                "must be finite",
            ));
        }
        if !(self.contact.stiffness.is_finite() && self.contact.stiffness >= 0.0) {
            return Err(ConfigError::invalid(
                "sim.contact.stiffness",
                "must be non-negative",
            ));
        }
        if let TrajectorySpec::Cycle { period_us: 0, .. } = self.trajectory {
            return Err(ConfigError::invalid(
                "sim.trajectory.period_us",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// Everything loaded from a configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub geometry: GloveGeometry,
    pub encoders: EncoderSettings,
    pub limits: JointLimits,
    pub feedback: FeedbackPolicy,
    pub bus: BusConfig,
    pub sim: SimConfig,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
        Self::load_with_overrides(path, &[])
    }

    /// Loads `path` after applying `key=value` overrides (dotted keys,
    /// file units).
    pub fn load_with_overrides(
        path: impl AsRef<Path>,
        overrides: &[(String, String)],
    ) -> Result<Config, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_with_overrides(&text, overrides)?;
        // Relative recorded-trajectory paths are relative to the config file.
        if let TrajectorySpec::Recorded { path: traj } = &mut cfg.sim.trajectory {
            if traj.is_relative() {
                if let Some(dir) = path.parent() {
                    *traj = dir.join(&*traj);
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        Self::from_toml_with_overrides(text, &[])
    }

    pub fn from_toml_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Config, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let file: ConfigFile = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        file.resolve()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from_config(self)).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        self.limits.validate()?;
        self.feedback.validate()?;
        self.sim.validate()?;
        let enc = &self.encoders;
        if enc.resolution.counts_per_rev == 0 {
            return Err(ConfigError::invalid(
                "encoders.counts_per_rev",
                "must be positive",
            ));
        }
        if enc.resolution.turns == 0 {
            return Err(ConfigError::invalid("encoders.turns", "must be positive"));
        }
        if enc.zero_count >= enc.resolution.count_limit() {
            return Err(ConfigError::invalid(
                "encoders.zero_count",
                "must be below counts_per_rev * turns",
            ));
        }
        if self.bus.bitrate == 0 {
            return Err(ConfigError::invalid("bus.bitrate", "must be positive"));
        }
        if self.bus.address == 0 || self.bus.address > 247 {
            return Err(ConfigError::invalid("bus.address", "must be in 1..=247"));
        }
        Ok(())
    }
}

/// Sets a dotted `key` in `table`. The value is parsed as a TOML value and
/// falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), ConfigError> {
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(ConfigError::invalid(key, "empty key segment"));
        }
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::invalid(key, format!("`{part}` is not a section")))?;
    }
    Err(ConfigError::invalid(key, "empty key"))
}

// ---------------------------------------------------------------------------
// File representation (file units, every field defaulted)

#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    geometry: GeometryFile,
    encoders: EncodersFile,
    limits: LimitsFile,
    feedback: FeedbackFile,
    bus: BusFile,
    sim: SimFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GeometryFile {
    r1: f64,
    r1p: f64,
    r2p: f64,
    r3p: f64,
    rg: f64,
    rs: f64,
    l0: f64,
    l1: f64,
    l2: f64,
    l3: f64,
    sigma: f64,
    pip_coupling_a: f64,
    pip_coupling_b: f64,
    thumb_r_mcp: f64,
    thumb_r_ip: f64,
    /// Dorsal offset used to generate routes for fingers without one.
    routing_height: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    routing: BTreeMap<String, Vec<PointFile>>,
}

impl Default for GeometryFile {
    fn default() -> Self {
        let g = GloveGeometry::default();
        GeometryFile {
            r1: g.r1,
            r1p: g.r1p,
            r2p: g.r2p,
            r3p: g.r3p,
            rg: g.rg,
            rs: g.rs,
            l0: g.l0,
            l1: g.l1,
            l2: g.l2,
            l3: g.l3,
            sigma: g.sigma,
            pip_coupling_a: g.pip_coupling_a,
            pip_coupling_b: g.pip_coupling_b,
            thumb_r_mcp: g.thumb_r_mcp,
            thumb_r_ip: g.thumb_r_ip,
            routing_height: DEFAULT_ROUTING_HEIGHT,
            routing: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct PointFile {
    frame: u8,
    x: f64,
    y: f64,
    #[serde(default)]
    z: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EncodersFile {
    counts_per_rev: u32,
    turns: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    splay_gear_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thumb_tm_bend_gear_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thumb_tm_splay_gear_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thumb_mcp_gear_radius: Option<f64>,
}

impl Default for EncodersFile {
    fn default() -> Self {
        let r = EncoderResolution::default();
        EncodersFile {
            counts_per_rev: r.counts_per_rev,
            turns: r.turns,
            zero_count: None,
            splay_gear_radius: None,
            thumb_tm_bend_gear_radius: None,
            thumb_tm_splay_gear_radius: None,
            thumb_mcp_gear_radius: None,
        }
    }
}

/// Joint limits, degrees.
#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LimitsFile {
    mcp: [f64; 2],
    pip: [f64; 2],
    dip: [f64; 2],
    splay: [f64; 2],
    thumb_tm_bend: [f64; 2],
    thumb_tm_splay: [f64; 2],
    thumb_mcp: [f64; 2],
    thumb_ip: [f64; 2],
}

fn interval_deg(iv: Interval) -> [f64; 2] {
    [iv.lo.to_degrees(), iv.hi.to_degrees()]
}

fn interval_rad(v: [f64; 2]) -> Interval {
    Interval::degrees(v[0], v[1])
}

impl From<&JointLimits> for LimitsFile {
    fn from(l: &JointLimits) -> Self {
        LimitsFile {
            mcp: interval_deg(l.mcp),
            pip: interval_deg(l.pip),
            dip: interval_deg(l.dip),
            splay: interval_deg(l.splay),
            thumb_tm_bend: interval_deg(l.thumb_tm_bend),
            thumb_tm_splay: interval_deg(l.thumb_tm_splay),
            thumb_mcp: interval_deg(l.thumb_mcp),
            thumb_ip: interval_deg(l.thumb_ip),
        }
    }
}

impl Default for LimitsFile {
    fn default() -> Self {
        LimitsFile {
            mcp: [0.0, 90.0],
            pip: [0.0, 110.0],
            dip: [0.0, 90.0],
            splay: [-20.0, 20.0],
            thumb_tm_bend: [0.0, 90.0],
            thumb_tm_splay: [-20.0, 60.0],
            thumb_mcp: [0.0, 90.0],
            thumb_ip: [0.0, 90.0],
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FeedbackFile {
    thresholds: [f64; 3],
    hysteresis: f64,
    current_per_newton: f64,
    tension_offset: f64,
    waveform_hz: [f64; 2],
}

impl Default for FeedbackFile {
    fn default() -> Self {
        let p = FeedbackPolicy::default();
        FeedbackFile {
            thresholds: p.thresholds,
            hysteresis: p.hysteresis,
            current_per_newton: p.current_per_newton,
            tension_offset: p.tension_offset,
            waveform_hz: p.waveform_hz,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BusFile {
    address: u8,
    bitrate: u32,
}

impl Default for BusFile {
    fn default() -> Self {
        let b = BusConfig::default();
        BusFile {
            address: b.address,
            bitrate: b.bitrate,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimFile {
    tick_us: u64,
    record_divider: u32,
    duration_us: u64,
    seed: u64,
    quantize: bool,
    hand_model: String,
    latency_us: LatencyFile,
    noise: NoiseFile,
    contact: ContactFile,
    trajectory: TrajectoryFile,
}

impl Default for SimFile {
    fn default() -> Self {
        SimFile::from(&SimConfig::default())
    }
}

impl From<&SimConfig> for SimFile {
    fn from(s: &SimConfig) -> Self {
        SimFile {
            tick_us: s.tick_us,
            record_divider: s.record_divider,
            duration_us: s.duration_us,
            seed: s.seed,
            quantize: s.quantize,
            hand_model: s.hand_model.clone(),
            latency_us: LatencyFile {
                sensor: s.latencies.sensor,
                bus_up: s.latencies.bus_up,
                compute: s.latencies.compute,
                bus_down: s.latencies.bus_down,
                servo_mech: s.latencies.servo_mech,
            },
            noise: NoiseFile {
                encoder_std_deg: s.noise.encoder_std.to_degrees(),
                drift_deg_per_s: s.noise.drift.to_degrees(),
            },
            contact: ContactFile {
                stiffness: s.contact.stiffness,
                engage_deg: s.contact.engage_angle.to_degrees(),
            },
            trajectory: TrajectoryFile::from(&s.trajectory),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LatencyFile {
    sensor: u64,
    bus_up: u64,
    compute: u64,
    bus_down: u64,
    servo_mech: u64,
}

impl Default for LatencyFile {
    fn default() -> Self {
        let l = StageLatencies::default();
        LatencyFile {
            sensor: l.sensor,
            bus_up: l.bus_up,
            compute: l.compute,
            bus_down: l.bus_down,
            servo_mech: l.servo_mech,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct NoiseFile {
    encoder_std_deg: f64,
    drift_deg_per_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ContactFile {
    /// N/rad
    stiffness: f64,
    engage_deg: f64,
}

impl Default for ContactFile {
    fn default() -> Self {
        let c = ContactModel::default();
        ContactFile {
            stiffness: c.stiffness,
            engage_deg: c.engage_angle.to_degrees(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TrajectoryFile {
    Static {
        #[serde(default)]
        pose: BTreeMap<String, f64>,
    },
    Cycle {
        period_us: u64,
        #[serde(default)]
        from: BTreeMap<String, f64>,
        #[serde(default)]
        to: BTreeMap<String, f64>,
    },
    Recorded {
        path: PathBuf,
    },
}

impl Default for TrajectoryFile {
    fn default() -> Self {
        TrajectoryFile::from(&TrajectorySpec::default())
    }
}

fn pose_to_file(pose: &BTreeMap<JointChannel, f64>) -> BTreeMap<String, f64> {
    pose.iter()
        .map(|(ch, v)| (ch.name().to_string(), v.to_degrees()))
        .collect()
}

fn pose_from_file(
    key: &str,
    pose: &BTreeMap<String, f64>,
) -> Result<BTreeMap<JointChannel, f64>, ConfigError> {
    let mut out = BTreeMap::new();
    for (name, deg) in pose {
        let ch = JointChannel::from_name(name).ok_or_else(|| {
            ConfigError::invalid(format!("{key}.{name}"), "unknown joint channel")
        })?;
        if ch.is_pip() {
            return Err(ConfigError::invalid(
                format!("{key}.{name}"),
                "PIP follows DIP through the coupling and cannot be set",
            ));
        }
        if !deg.is_finite() {
            return Err(ConfigError::invalid(
                format!("{key}.{name}"),
                "must be finite",
            ));
        }
        out.insert(ch, deg.to_radians());
    }
    Ok(out)
}

impl From<&TrajectorySpec> for TrajectoryFile {
    fn from(t: &TrajectorySpec) -> Self {
        match t {
            TrajectorySpec::Static { pose } => TrajectoryFile::Static {
                pose: pose_to_file(pose),
            },
            TrajectorySpec::Cycle {
                period_us,
                from,
                to,
            } => TrajectoryFile::Cycle {
                period_us: *period_us,
                from: pose_to_file(from),
                to: pose_to_file(to),
            },
            TrajectorySpec::Recorded { path } => TrajectoryFile::Recorded { path: path.clone() },
        }
    }
}

fn gear(radius: Option<f64>) -> DirectChannel {
    match radius {
        Some(radius) => DirectChannel::Gear { radius },
        None => DirectChannel::Direct,
    }
}

fn gear_radius(ch: DirectChannel) -> Option<f64> {
    match ch {
        DirectChannel::Direct => None,
        DirectChannel::Gear { radius } => Some(radius),
    }
}

impl ConfigFile {
    fn resolve(self) -> Result<Config, ConfigError> {
        let g = &self.geometry;
        for finger in g.routing.keys() {
            if finger.parse::<Finger>().is_err() {
                return Err(ConfigError::invalid(
                    format!("geometry.routing.{finger}"),
                    "unknown finger",
                ));
            }
        }
        let segments = [g.l0, g.l1, g.l2, g.l3];
        let routing = std::array::from_fn(|i| {
            let finger = Finger::ALL[i];
            match g.routing.get(finger.name()) {
                Some(points) => RoutingPath {
                    points: points
                        .iter()
                        .map(|p| RoutingPoint {
                            frame: p.frame,
                            position: [p.x, p.y, p.z],
                        })
                        .collect(),
                },
                None => RoutingPath::dorsal(segments, g.routing_height),
            }
        });
        if !(g.routing_height.is_finite()) {
            return Err(ConfigError::invalid(
                "geometry.routing_height",
                "must be finite",
            ));
        }
        let geometry = GloveGeometry {
            r1: g.r1,
            r1p: g.r1p,
            r2p: g.r2p,
            r3p: g.r3p,
            rg: g.rg,
            rs: g.rs,
            l0: g.l0,
            l1: g.l1,
            l2: g.l2,
            l3: g.l3,
            sigma: g.sigma,
            pip_coupling_a: g.pip_coupling_a,
            pip_coupling_b: g.pip_coupling_b,
            thumb_r_mcp: g.thumb_r_mcp,
            thumb_r_ip: g.thumb_r_ip,
            routing,
        };

        let e = &self.encoders;
        let resolution = EncoderResolution {
            counts_per_rev: e.counts_per_rev,
            turns: e.turns,
        };
        for (key, r) in [
            ("splay_gear_radius", e.splay_gear_radius),
            ("thumb_tm_bend_gear_radius", e.thumb_tm_bend_gear_radius),
            ("thumb_tm_splay_gear_radius", e.thumb_tm_splay_gear_radius),
            ("thumb_mcp_gear_radius", e.thumb_mcp_gear_radius),
        ] {
            if let Some(r) = r {
                if !(r.is_finite() && r > 0.0) {
                    return Err(ConfigError::invalid(
                        format!("encoders.{key}"),
                        "must be positive",
                    ));
                }
            }
        }
        let encoders = EncoderSettings {
            resolution,
            zero_count: e.zero_count.unwrap_or(resolution.count_limit() / 2),
            channels: ChannelMap {
                splay: gear(e.splay_gear_radius),
                thumb_tm_bend: gear(e.thumb_tm_bend_gear_radius),
                thumb_tm_splay: gear(e.thumb_tm_splay_gear_radius),
                thumb_mcp: gear(e.thumb_mcp_gear_radius),
            },
        };

        let l = &self.limits;
        let limits = JointLimits {
            mcp: interval_rad(l.mcp),
            pip: interval_rad(l.pip),
            dip: interval_rad(l.dip),
            splay: interval_rad(l.splay),
            thumb_tm_bend: interval_rad(l.thumb_tm_bend),
            thumb_tm_splay: interval_rad(l.thumb_tm_splay),
            thumb_mcp: interval_rad(l.thumb_mcp),
            thumb_ip: interval_rad(l.thumb_ip),
        };

        let f = &self.feedback;
        let feedback = FeedbackPolicy {
            thresholds: f.thresholds,
            hysteresis: f.hysteresis,
            current_per_newton: f.current_per_newton,
            tension_offset: f.tension_offset,
            waveform_hz: f.waveform_hz,
        };

        let s = &self.sim;
        let trajectory = match &s.trajectory {
            TrajectoryFile::Static { pose } => TrajectorySpec::Static {
                pose: pose_from_file("sim.trajectory.pose", pose)?,
            },
            TrajectoryFile::Cycle {
                period_us,
                from,
                to,
            } => TrajectorySpec::Cycle {
                period_us: *period_us,
                from: pose_from_file("sim.trajectory.from", from)?,
                to: pose_from_file("sim.trajectory.to", to)?,
            },
            TrajectoryFile::Recorded { path } => TrajectorySpec::Recorded { path: path.clone() },
        };
        let sim = SimConfig {
            tick_us: s.tick_us,
            record_divider: s.record_divider,
            duration_us: s.duration_us,
            latencies: StageLatencies {
                sensor: s.latency_us.sensor,
                bus_up: s.latency_us.bus_up,
                compute: s.latency_us.compute,
                bus_down: s.latency_us.bus_down,
                servo_mech: s.latency_us.servo_mech,
            },
            noise: NoiseModel {
                encoder_std: s.noise.encoder_std_deg.to_radians(),
                drift: s.noise.drift_deg_per_s.to_radians(),
            },
            quantize: s.quantize,
            contact: ContactModel {
                stiffness: s.contact.stiffness,
                engage_angle: s.contact.engage_deg.to_radians(),
            },
            seed: s.seed,
            hand_model: s.hand_model.clone(),
            trajectory,
        };

        let config = Config {
            geometry,
            encoders,
            limits,
            feedback,
            bus: BusConfig {
                address: self.bus.address,
                bitrate: self.bus.bitrate,
            },
            sim,
        };
        config.validate()?;
        Ok(config)
    }

    fn from_config(c: &Config) -> Self {
        let g = &c.geometry;
        let routing = Finger::ALL
            .iter()
            .map(|f| {
                let points = g
                    .route(*f)
                    .points
                    .iter()
                    .map(|p| PointFile {
                        frame: p.frame,
                        x: p.position[0],
                        y: p.position[1],
                        z: p.position[2],
                    })
                    .collect();
                (f.name().to_string(), points)
            })
            .collect();
        let e = &c.encoders;
        ConfigFile {
            geometry: GeometryFile {
                r1: g.r1,
                r1p: g.r1p,
                r2p: g.r2p,
                r3p: g.r3p,
                rg: g.rg,
                rs: g.rs,
                l0: g.l0,
                l1: g.l1,
                l2: g.l2,
                l3: g.l3,
                sigma: g.sigma,
                pip_coupling_a: g.pip_coupling_a,
                pip_coupling_b: g.pip_coupling_b,
                thumb_r_mcp: g.thumb_r_mcp,
                thumb_r_ip: g.thumb_r_ip,
                routing_height: DEFAULT_ROUTING_HEIGHT,
                routing,
            },
            encoders: EncodersFile {
                counts_per_rev: e.resolution.counts_per_rev,
                turns: e.resolution.turns,
                zero_count: Some(e.zero_count),
                splay_gear_radius: gear_radius(e.channels.splay),
                thumb_tm_bend_gear_radius: gear_radius(e.channels.thumb_tm_bend),
                thumb_tm_splay_gear_radius: gear_radius(e.channels.thumb_tm_splay),
                thumb_mcp_gear_radius: gear_radius(e.channels.thumb_mcp),
            },
            limits: LimitsFile::from(&c.limits),
            feedback: FeedbackFile {
                thresholds: c.feedback.thresholds,
                hysteresis: c.feedback.hysteresis,
                current_per_newton: c.feedback.current_per_newton,
                tension_offset: c.feedback.tension_offset,
                waveform_hz: c.feedback.waveform_hz,
            },
            bus: BusFile {
                address: c.bus.address,
                bitrate: c.bus.bitrate,
            },
            sim: SimFile::from(&c.sim),
        }
    }
}
