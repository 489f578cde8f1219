use super::crc::{crc16_raw, crc_bytes};
use super::FrameError;

/// Largest RTU frame on the wire, bytes.
pub const MAX_FRAME_LEN: usize = 256;
/// Address, function and CRC.
pub const FRAME_OVERHEAD: usize = 4;
pub const MAX_PAYLOAD_LEN: usize = MAX_FRAME_LEN - FRAME_OVERHEAD;

/// One Modbus-RTU frame. The CRC is computed on encode and checked on
/// decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusFrame {
    pub address: u8,
    pub function: u8,
    pub payload: Vec<u8>,
}

impl BusFrame {
    pub fn new(address: u8, function: u8, payload: Vec<u8>) -> Self {
        BusFrame {
            address,
            function,
            payload,
        }
    }

    pub fn crc(&self) -> u16 {
        let mut head = Vec::with_capacity(2 + self.payload.len());
        head.push(self.address);
        head.push(self.function);
        head.extend_from_slice(&self.payload);
        crc16_raw(&head)
    }

    pub fn wire_len(&self) -> usize {
        self.payload.len() + FRAME_OVERHEAD
    }

    pub fn is_exception(&self) -> bool {
        self.function & 0x80 != 0
    }

    pub fn encode(&self) -> Result<Vec<u8>, FrameError> {
        if self.payload.len() > MAX_PAYLOAD_LEN {
            return Err(FrameError::TooLong(self.wire_len()));
        }
        let mut out = Vec::with_capacity(self.wire_len());
        out.push(self.address);
        out.push(self.function);
        out.extend_from_slice(&self.payload);
        let crc = crc16_raw(&out);
        out.extend_from_slice(&crc_bytes(crc));
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<BusFrame, FrameError> {
        if bytes.len() < FRAME_OVERHEAD {
            return Err(FrameError::Short(bytes.len()));
        }
        if bytes.len() > MAX_FRAME_LEN {
            return Err(FrameError::TooLong(bytes.len()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 2);
        let found = u16::from_le_bytes([tail[0], tail[1]]);
        let expected = crc16_raw(body);
        if found != expected {
            return Err(FrameError::BadCrc { expected, found });
        }
        Ok(BusFrame {
            address: body[0],
            function: body[1],
            payload: body[2..].to_vec(),
        })
    }
}
