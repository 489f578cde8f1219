//! RS485 line timing for 8N1 characters (10 bits on the wire per byte).

pub const BITS_PER_CHAR: u32 = 10;
/// Silent interval separating RTU frames, in characters.
pub const INTER_FRAME_CHARS: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireTiming {
    /// µs
    pub transmission_us: f64,
    /// µs
    pub gap_us: f64,
}

impl WireTiming {
    pub fn total_us(&self) -> f64 {
        self.transmission_us + self.gap_us
    }
}

/// Time to send `frame_len` bytes at `bitrate` bit/s plus the trailing
/// inter-frame gap.
pub fn wire_delay(frame_len: usize, bitrate: u32) -> WireTiming {
    let char_us = BITS_PER_CHAR as f64 * 1e6 / bitrate as f64;
    WireTiming {
        transmission_us: frame_len as f64 * char_us,
        gap_us: INTER_FRAME_CHARS * char_us,
    }
}

/// Request plus response on a half-duplex line, µs.
pub fn transaction_us(request_len: usize, response_len: usize, bitrate: u32) -> f64 {
    wire_delay(request_len, bitrate).total_us() + wire_delay(response_len, bitrate).total_us()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_megabit_examples() {
        let t = wire_delay(8, 500_000);
        assert_eq!(t.transmission_us, 160.0);
        assert_eq!(t.gap_us, 70.0);
        assert_eq!(wire_delay(1, 500_000).transmission_us, 20.0);
        assert_eq!(
            wire_delay(16, 500_000).transmission_us,
            2.0 * wire_delay(8, 500_000).transmission_us
        );
    }

    #[test]
    fn sixteen_register_poll() {
        // 8-byte request, 37-byte response
        assert_eq!(transaction_us(8, 37, 500_000), 230.0 + 740.0 + 70.0);
    }
}
