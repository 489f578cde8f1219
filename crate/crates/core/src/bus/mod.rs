//! Modbus-RTU link to the glove: frame codec, register map, device
//! emulator, RS485 timing and transports.

pub mod client;
mod crc;
pub mod emulator;
mod frame;
pub mod registers;
mod timing;
pub mod transport;

pub use crc::{crc16, crc16_raw, crc_bytes};
pub use emulator::GloveDevice;
pub use frame::{BusFrame, FRAME_OVERHEAD, MAX_FRAME_LEN, MAX_PAYLOAD_LEN};
pub use registers::RegisterMap;
pub use timing::{transaction_us, wire_delay, WireTiming, BITS_PER_CHAR};

use thiserror::Error;

pub mod function {
    pub const READ_HOLDING: u8 = 0x03;
    pub const READ_INPUT: u8 = 0x04;
    pub const WRITE_SINGLE: u8 = 0x06;
    pub const WRITE_MULTIPLE: u8 = 0x10;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExceptionCode {
    IllegalFunction = 0x01,
    IllegalDataAddress = 0x02,
    IllegalDataValue = 0x03,
}

impl ExceptionCode {
    pub fn from_u8(code: u8) -> Option<ExceptionCode> {
        match code {
            0x01 => Some(ExceptionCode::IllegalFunction),
            0x02 => Some(ExceptionCode::IllegalDataAddress),
            0x03 => Some(ExceptionCode::IllegalDataValue),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("CRC of empty input")]
    Empty,
    #[error("short frame: {0} bytes, need at least {FRAME_OVERHEAD}")]
    Short(usize),
    #[error("frame of {0} bytes exceeds {MAX_FRAME_LEN}")]
    TooLong(usize),
    #[error("bad CRC: computed {expected:#06x}, frame carries {found:#06x}")]
    BadCrc { expected: u16, found: u16 },
}

#[derive(Debug, Error)]
pub enum BusError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("device exception on function {function:#04x}: code {raw_code:#04x}")]
    Exception {
        function: u8,
        code: Option<ExceptionCode>,
        raw_code: u8,
    },
    #[error("unexpected response: {0}")]
    UnexpectedResponse(String),
    #[error("invalid request: {0}")]
    Request(String),
    #[error("no response from device")]
    NoResponse,
    #[error("link closed")]
    Disconnected,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
