use super::{ConfigError, Finger, FINGERS};

/// Points per feedback-cable route: O1, A1, A2, B1, B2, C1, C2.
pub const ROUTING_POINTS: usize = 7;

/// Frame each routing point is expressed in, in route order.
const ROUTE_FRAMES: [u8; ROUTING_POINTS] = [0, 1, 1, 2, 2, 3, 3];

/// Dorsal offset of the generated default routing points, mm.
pub const DEFAULT_ROUTING_HEIGHT: f64 = 8.0;

/// A cable routing point in the local frame of joint `frame` (0 = base).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingPoint {
    pub frame: u8,
    /// mm
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingPath {
    pub points: Vec<RoutingPoint>,
}

impl RoutingPath {
    /// Dorsal route collinear at the zero pose: O1 at `(0, h, 0)` in the base
    /// frame and two points per segment at 30 % and 70 % of its length.
    pub fn dorsal(segments: [f64; 4], height: f64) -> Self {
        let mut points = vec![RoutingPoint {
            frame: 0,
            position: [0.0, height, 0.0],
        }];
        for frame in 1..=3u8 {
            let l = segments[frame as usize];
            for frac in [0.3, 0.7] {
                points.push(RoutingPoint {
                    frame,
                    position: [-frac * l, height, 0.0],
                });
            }
        }
        RoutingPath { points }
    }

    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if self.points.len() != ROUTING_POINTS {
            return Err(ConfigError::invalid(
                key,
                format!(
                    "expected {ROUTING_POINTS} routing points, got {}",
                    self.points.len()
                ),
            ));
        }
        for (i, (p, expected)) in self.points.iter().zip(ROUTE_FRAMES).enumerate() {
            if p.frame > 3 {
                return Err(ConfigError::invalid(
                    format!("{key}[{i}].frame"),
                    format!("frame index {} outside 0..=3", p.frame),
                ));
            }
            if p.frame != expected {
                return Err(ConfigError::invalid(
                    format!("{key}[{i}].frame"),
                    format!("point {i} must live in frame {expected}, got {}", p.frame),
                ));
            }
            if p.position.iter().any(|v| !v.is_finite()) {
                return Err(ConfigError::invalid(
                    format!("{key}[{i}]"),
                    "non-finite coordinate",
                ));
            }
        }
        Ok(())
    }
}

/// Mechanical parameters of the glove. Lengths in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct GloveGeometry {
    /// MCP measurement cable radius at the MCP joint.
    pub r1: f64,
    /// DIP measurement cable radii at MCP, PIP and DIP.
    pub r1p: f64,
    pub r2p: f64,
    pub r3p: f64,
    /// Encoder gear radius.
    pub rg: f64,
    /// Servo output-flange radius.
    pub rs: f64,
    /// Segment lengths O-A, A-B, B-C, C-D.
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Cable slack allowance.
    pub sigma: f64,
    /// PIP/DIP coupling `theta2 = (theta3 + b) / a`.
    pub pip_coupling_a: f64,
    pub pip_coupling_b: f64,
    /// Thumb IP cable radii at the thumb MCP and IP joints.
    pub thumb_r_mcp: f64,
    pub thumb_r_ip: f64,
    /// Feedback-cable route per finger, indexed by [`Finger::index`].
    pub routing: [RoutingPath; FINGERS],
}

impl Default for GloveGeometry {
    fn default() -> Self {
        let (l0, l1, l2, l3) = (35.71, 44.33, 24.21, 23.51);
        let route = RoutingPath::dorsal([l0, l1, l2, l3], DEFAULT_ROUTING_HEIGHT);
        GloveGeometry {
            r1: 16.25,
            r1p: 23.25,
            r2p: 19.31,
            r3p: 17.42,
            rg: 6.0,
            rs: 10.0,
            l0,
            l1,
            l2,
            l3,
            sigma: 2.0,
            pip_coupling_a: 0.989,
            pip_coupling_b: 0.230,
            thumb_r_mcp: 20.0,
            thumb_r_ip: 17.0,
            routing: std::array::from_fn(|_| route.clone()),
        }
    }
}

impl GloveGeometry {
    pub fn segments(&self) -> [f64; 4] {
        [self.l0, self.l1, self.l2, self.l3]
    }

    pub fn route(&self, finger: Finger) -> &RoutingPath {
        &self.routing[finger.index()]
    }

    /// Checks every invariant, naming the offending key on failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("r1", self.r1),
            ("r1p", self.r1p),
            ("r2p", self.r2p),
            ("r3p", self.r3p),
            ("rg", self.rg),
            ("rs", self.rs),
            ("l0", self.l0),
            ("l1", self.l1),
            ("l2", self.l2),
            ("l3", self.l3),
            ("pip_coupling_a", self.pip_coupling_a),
            ("thumb_r_mcp", self.thumb_r_mcp),
            ("thumb_r_ip", self.thumb_r_ip),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(
                    format!("geometry.{key}"),
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(ConfigError::invalid(
                "geometry.sigma",
                format!("must be non-negative, got {}", self.sigma),
            ));
        }
        if !self.pip_coupling_b.is_finite() {
            return Err(ConfigError::invalid(
                "geometry.pip_coupling_b",
                "must be finite",
            ));
        }
        for f in Finger::ALL {
            self.route(f).validate(&format!("geometry.routing.{f}"))?;
        }
        Ok(())
    }
}

/// Closed angle interval, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn degrees(lo: f64, hi: f64) -> Self {
        Interval::new(lo.to_radians(), hi.to_radians())
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    /// Clamped value and whether clamping changed it.
    pub fn clamp(&self, v: f64) -> (f64, bool) {
        let c = v.clamp(self.lo, self.hi);
        (c, c != v)
    }
}

/// Joint-limit intervals applied after solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub mcp: Interval,
    pub pip: Interval,
    pub dip: Interval,
    pub splay: Interval,
    pub thumb_tm_bend: Interval,
    pub thumb_tm_splay: Interval,
    pub thumb_mcp: Interval,
    pub thumb_ip: Interval,
}

impl Default for JointLimits {
    fn default() -> Self {
        JointLimits {
            mcp: Interval::degrees(0.0, 90.0),
            pip: Interval::degrees(0.0, 110.0),
            dip: Interval::degrees(0.0, 90.0),
            splay: Interval::degrees(-20.0, 20.0),
            thumb_tm_bend: Interval::degrees(0.0, 90.0),
            thumb_tm_splay: Interval::degrees(-20.0, 60.0),
            thumb_mcp: Interval::degrees(0.0, 90.0),
            thumb_ip: Interval::degrees(0.0, 90.0),
        }
    }
}

impl JointLimits {
    pub(crate) fn named(&self) -> [(&'static str, Interval); 8] {
        [
            ("mcp", self.mcp),
            ("pip", self.pip),
            ("dip", self.dip),
            ("splay", self.splay),
            ("thumb_tm_bend", self.thumb_tm_bend),
            ("thumb_tm_splay", self.thumb_tm_splay),
            ("thumb_mcp", self.thumb_mcp),
            ("thumb_ip", self.thumb_ip),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, iv) in self.named() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                return Err(ConfigError::invalid(
                    format!("limits.{key}"),
                    "limits must be finite with lower <= upper",
                ));
            }
        }
        Ok(())
    }

    /// Limit interval for one of the 20 joint channels.
    pub fn for_channel(&self, channel: super::JointChannel) -> Interval {
        match channel.0 {
            0 => self.thumb_tm_bend,
            1 => self.thumb_tm_splay,
            2 => self.thumb_mcp,
            3 => self.thumb_ip,
            i => match i % 4 {
                0 => self.mcp,
                1 => self.pip,
                2 => self.dip,
                _ => self.splay,
            },
        }
    }
}
