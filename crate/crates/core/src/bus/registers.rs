//! Glove register map.
//!
//! | address         | content                         | access     | unit            |
//! |-----------------|---------------------------------|------------|-----------------|
//! | 0x0000 - 0x000F | encoder counts, channels 0..15  | read       | counts          |
//! | 0x0100 - 0x0104 | servo targets, thumb..pinky     | read/write | centi-radians, i16 |
//! | 0x0200 - 0x0204 | LRA waveform IDs, thumb..pinky  | read/write | 0 off, 1, 2     |
//! | 0x0300 - 0x0304 | motor current, thumb..pinky     | read       | mA              |
//!
//! Register values are 16 bit and travel big-endian. Servo targets are
//! two's-complement so negative (retracting) targets survive the wire.

use super::ExceptionCode;
use crate::model::{ENCODER_CHANNELS, FINGERS};

pub const ENCODER_BASE: u16 = 0x0000;
pub const SERVO_BASE: u16 = 0x0100;
pub const LRA_BASE: u16 = 0x0200;
pub const CURRENT_BASE: u16 = 0x0300;

/// Largest waveform ID accepted by the LRA registers.
pub const MAX_WAVEFORM_ID: u16 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Encoders,
    Servo,
    Lra,
    Current,
}

impl Block {
    pub fn writable(self) -> bool {
        matches!(self, Block::Servo | Block::Lra)
    }
}

/// Block and offset of a mapped address.
pub fn locate(address: u16) -> Option<(Block, usize)> {
    let (block, base, len) = match address & 0xFF00 {
        0x0000 => (Block::Encoders, ENCODER_BASE, ENCODER_CHANNELS),
        0x0100 => (Block::Servo, SERVO_BASE, FINGERS),
        0x0200 => (Block::Lra, LRA_BASE, FINGERS),
        0x0300 => (Block::Current, CURRENT_BASE, FINGERS),
        _ => return None,
    };
    let offset = (address - base) as usize;
    (offset < len).then_some((block, offset))
}

/// Servo target in radians to its register value.
pub fn servo_to_register(radians: f64) -> u16 {
    let centi = (radians * 100.0)
        .round()
        .clamp(i16::MIN as f64, i16::MAX as f64);
    centi as i16 as u16
}

pub fn servo_from_register(value: u16) -> f64 {
    value as i16 as f64 / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegisterMap {
    pub encoders: [u16; ENCODER_CHANNELS],
    pub servo: [u16; FINGERS],
    pub lra: [u16; FINGERS],
    pub current: [u16; FINGERS],
}

impl RegisterMap {
    pub fn read(&self, address: u16) -> Result<u16, ExceptionCode> {
        let (block, i) = locate(address).ok_or(ExceptionCode::IllegalDataAddress)?;
        Ok(match block {
            Block::Encoders => self.encoders[i],
            Block::Servo => self.servo[i],
            Block::Lra => self.lra[i],
            Block::Current => self.current[i],
        })
    }

    /// Bus-side write; only servo and LRA registers accept writes.
    pub fn write(&mut self, address: u16, value: u16) -> Result<(), ExceptionCode> {
        let (block, i) = self.check_write(address, value)?;
        match block {
            Block::Servo => self.servo[i] = value,
            Block::Lra => self.lra[i] = value,
            Block::Encoders | Block::Current => unreachable!("checked writable"),
        }
        Ok(())
    }

    pub fn check_write(&self, address: u16, value: u16) -> Result<(Block, usize), ExceptionCode> {
        let (block, i) = locate(address).ok_or(ExceptionCode::IllegalDataAddress)?;
        if !block.writable() {
            return Err(ExceptionCode::IllegalDataAddress);
        }
        if block == Block::Lra && value > MAX_WAVEFORM_ID {
            return Err(ExceptionCode::IllegalDataValue);
        }
        Ok((block, i))
    }
}
