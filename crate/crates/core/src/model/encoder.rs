use super::Finger;
use std::f64::consts::TAU;
use thiserror::Error;

/// Encoder channels per frame.
pub const ENCODER_CHANNELS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncoderError {
    #[error("encoder channel {channel}: count {count} outside [0, {limit})")]
    CountOutOfRange {
        channel: usize,
        count: u32,
        limit: u32,
    },
    #[error("counts_per_rev must be positive")]
    ZeroResolution,
}

/// Counts per revolution and the number of revolutions the absolute
/// counter spans.
///
/// Cable drums on the DIP channel turn more than once over the full
/// flexion range, so counts are multi-turn: valid counts lie in
/// `[0, counts_per_rev * turns)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderResolution {
    pub counts_per_rev: u32,
    pub turns: u32,
}

impl Default for EncoderResolution {
    fn default() -> Self {
        EncoderResolution {
            counts_per_rev: 4096,
            turns: 16,
        }
    }
}

impl EncoderResolution {
    pub fn single_turn(counts_per_rev: u32) -> Self {
        EncoderResolution {
            counts_per_rev,
            turns: 1,
        }
    }

    /// One past the largest valid count.
    pub fn count_limit(&self) -> u32 {
        self.counts_per_rev.saturating_mul(self.turns)
    }

    /// Radians per count.
    pub fn step(&self) -> f64 {
        TAU / self.counts_per_rev as f64
    }

    pub fn angle(&self, count: u32) -> f64 {
        count as f64 * self.step()
    }

    /// Nearest count to `angle`, saturated to the valid range.
    pub fn quantize(&self, angle: f64) -> u32 {
        let c = (angle / self.step()).round();
        if c.is_nan() || c <= 0.0 {
            0
        } else {
            (c as u64).min(self.count_limit() as u64 - 1) as u32
        }
    }
}

/// Converts raw counts to angles: `angle = count * 2π / counts_per_rev`.
pub fn decode_counts(
    raw_counts: &[u32; ENCODER_CHANNELS],
    resolution: EncoderResolution,
) -> Result<[f64; ENCODER_CHANNELS], EncoderError> {
    if resolution.counts_per_rev == 0 || resolution.turns == 0 {
        return Err(EncoderError::ZeroResolution);
    }
    let limit = resolution.count_limit();
    let mut out = [0.0; ENCODER_CHANNELS];
    for (channel, (&count, angle)) in raw_counts.iter().zip(out.iter_mut()).enumerate() {
        if count >= limit {
            return Err(EncoderError::CountOutOfRange {
                channel,
                count,
                limit,
            });
        }
        *angle = resolution.angle(count);
    }
    Ok(out)
}

/// One timestamped sample of all encoder channels.
///
/// Channel layout: thumb `tm_bend, tm_splay, mcp, ip`; then index, middle,
/// ring and pinky each contribute `mcp cable, dip cable, splay`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderFrame {
    pub timestamp_us: u64,
    /// Radians.
    pub readings: [f64; ENCODER_CHANNELS],
    pub raw_counts: [u32; ENCODER_CHANNELS],
}

impl EncoderFrame {
    pub fn from_counts(
        timestamp_us: u64,
        raw_counts: [u32; ENCODER_CHANNELS],
        resolution: EncoderResolution,
    ) -> Result<Self, EncoderError> {
        Ok(EncoderFrame {
            timestamp_us,
            readings: decode_counts(&raw_counts, resolution)?,
            raw_counts,
        })
    }

    /// Frame from an ideal (unquantized) encoder. `raw_counts` hold the
    /// nearest counts for logging only; `readings` are kept exact.
    pub fn ideal(
        timestamp_us: u64,
        readings: [f64; ENCODER_CHANNELS],
        resolution: EncoderResolution,
    ) -> Self {
        EncoderFrame {
            timestamp_us,
            readings,
            raw_counts: readings.map(|a| resolution.quantize(a)),
        }
    }

    pub const THUMB_TM_BEND: usize = 0;
    pub const THUMB_TM_SPLAY: usize = 1;
    pub const THUMB_MCP: usize = 2;
    pub const THUMB_IP: usize = 3;

    /// `(mcp cable, dip cable, splay)` channel indices of a long finger.
    pub fn finger_channels(finger: Finger) -> Option<(usize, usize, usize)> {
        match finger {
            Finger::Thumb => None,
            f => {
                let base = 4 + 3 * (f.index() - 1);
                Some((base, base + 1, base + 2))
            }
        }
    }
}

/// How a directly measured channel maps to a joint angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectChannel {
    /// Joint angle equals the encoder angle.
    Direct,
    /// Encoder driven through the gear by a cable on a joint of this
    /// radius (mm): `joint = rg * encoder / radius`.
    Gear { radius: f64 },
}

impl DirectChannel {
    pub fn to_joint(self, encoder: f64, rg: f64) -> f64 {
        match self {
            DirectChannel::Direct => encoder,
            DirectChannel::Gear { radius } => rg * encoder / radius,
        }
    }

    pub fn to_encoder(self, joint: f64, rg: f64) -> f64 {
        match self {
            DirectChannel::Direct => joint,
            DirectChannel::Gear { radius } => joint * radius / rg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMap {
    pub splay: DirectChannel,
    pub thumb_tm_bend: DirectChannel,
    pub thumb_tm_splay: DirectChannel,
    pub thumb_mcp: DirectChannel,
}

impl Default for ChannelMap {
    fn default() -> Self {
        ChannelMap {
            splay: DirectChannel::Direct,
            thumb_tm_bend: DirectChannel::Direct,
            thumb_tm_splay: DirectChannel::Direct,
            thumb_mcp: DirectChannel::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderSettings {
    pub resolution: EncoderResolution,
    /// Count each encoder reads when its joint sits at the model zero.
    pub zero_count: u32,
    pub channels: ChannelMap,
}

impl Default for EncoderSettings {
    fn default() -> Self {
        let resolution = EncoderResolution::default();
        EncoderSettings {
            resolution,
            zero_count: resolution.count_limit() / 2,
            channels: ChannelMap::default(),
        }
    }
}

impl EncoderSettings {
    pub fn zero_angle(&self) -> f64 {
        self.resolution.angle(self.zero_count)
    }
}

/// Per-channel offsets subtracted from raw readings before solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub offsets: [f64; ENCODER_CHANNELS],
}

impl Calibration {
    pub fn none() -> Self {
        Calibration {
            offsets: [0.0; ENCODER_CHANNELS],
        }
    }

    /// Captures a flat-hand frame: its readings become the offsets.
    pub fn capture(frame: &EncoderFrame) -> Self {
        Calibration {
            offsets: frame.readings,
        }
    }

    /// Offsets matching the encoders' mounted zero count.
    pub fn mount_zero(settings: &EncoderSettings) -> Self {
        Calibration {
            offsets: [settings.zero_angle(); ENCODER_CHANNELS],
        }
    }

    pub fn apply(&self, frame: &EncoderFrame) -> [f64; ENCODER_CHANNELS] {
        std::array::from_fn(|i| frame.readings[i] - self.offsets[i])
    }
}
