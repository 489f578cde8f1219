//! In-process glove device answering Modbus-RTU requests over the
//! register map.

use super::registers::RegisterMap;
use super::{function, BusFrame, ExceptionCode};
use crate::model::{ENCODER_CHANNELS, FINGERS};

/// Most registers a single read may return.
pub const MAX_READ: u16 = 125;
/// Most registers a single write-multiple may carry.
pub const MAX_WRITE: u16 = 123;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GloveDevice {
    pub address: u8,
    pub registers: RegisterMap,
}

impl GloveDevice {
    pub fn new(address: u8) -> Self {
        GloveDevice {
            address,
            registers: RegisterMap::default(),
        }
    }

    /// Device-side update of the encoder registers.
    pub fn inject_counts(&mut self, counts: &[u16; ENCODER_CHANNELS]) {
        self.registers.encoders = *counts;
    }

    /// Device-side update of the motor-current registers, mA.
    pub fn inject_currents(&mut self, currents: &[u16; FINGERS]) {
        self.registers.current = *currents;
    }

    /// Handles one request. Frames for other addresses and broadcasts
    /// (address 0) get no response; broadcast writes are still applied.
    pub fn handle(&mut self, request: &BusFrame) -> Option<BusFrame> {
        if request.address != self.address && request.address != 0 {
            return None;
        }
        let response = match self.execute(request) {
            Ok(payload) => BusFrame::new(self.address, request.function, payload),
            Err(code) => BusFrame::new(self.address, request.function | 0x80, vec![code as u8]),
        };
        (request.address != 0).then_some(response)
    }

    /// Wire-level handling. Frames that fail to decode are dropped silently,
    /// as on a real RTU line.
    pub fn handle_bytes(&mut self, wire: &[u8]) -> Option<Vec<u8>> {
        let request = BusFrame::decode(wire).ok()?;
        self.handle(&request)
            .map(|r| r.encode().expect("responses fit in one frame"))
    }

    fn execute(&mut self, req: &BusFrame) -> Result<Vec<u8>, ExceptionCode> {
        let p = &req.payload;
        let word = |i: usize| u16::from_be_bytes([p[i], p[i + 1]]);
        match req.function {
            function::READ_HOLDING | function::READ_INPUT => {
                if p.len() != 4 {
                    return Err(ExceptionCode::IllegalDataValue);
                }
                let (start, count) = (word(0), word(2));
                if count == 0 || count > MAX_READ {
                    return Err(ExceptionCode::IllegalDataValue);
                }
                let mut out = Vec::with_capacity(1 + 2 * count as usize);
                out.push((2 * count) as u8);
                for i in 0..count {
                    let addr = start
                        .checked_add(i)
                        .ok_or(ExceptionCode::IllegalDataAddress)?;
                    out.extend_from_slice(&self.registers.read(addr)?.to_be_bytes());
                }
                Ok(out)
            }
            function::WRITE_SINGLE => {
                if p.len() != 4 {
                    return Err(ExceptionCode::IllegalDataValue);
                }
                self.registers.write(word(0), word(2))?;
                Ok(p.clone())
            }
            function::WRITE_MULTIPLE => {
                if p.len() < 5 {
                    return Err(ExceptionCode::IllegalDataValue);
                }
                let (start, count, byte_count) = (word(0), word(2), p[4] as usize);
                if count == 0
                    || count > MAX_WRITE
                    || byte_count != 2 * count as usize
                    || p.len() != 5 + byte_count
                {
                    return Err(ExceptionCode::IllegalDataValue);
                }
                // Validate the whole range before touching any register.
                let mut writes = Vec::with_capacity(count as usize);
                for i in 0..count {
                    let addr = start
                        .checked_add(i)
                        .ok_or(ExceptionCode::IllegalDataAddress)?;
                    let value = word(5 + 2 * i as usize);
                    self.registers.check_write(addr, value)?;
                    writes.push((addr, value));
                }
                for (addr, value) in writes {
                    self.registers.write(addr, value)?;
                }
                Ok(p[..4].to_vec())
            }
            _ => Err(ExceptionCode::IllegalFunction),
        }
    }
}
