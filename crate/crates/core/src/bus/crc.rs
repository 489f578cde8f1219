//! CRC-16/MODBUS: reflected polynomial 0xA001, initial value 0xFFFF, sent
//! low byte first.

use super::FrameError;

const TABLE: [u16; 256] = build_table();

const fn build_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u16;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xA001
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// CRC of `bytes`, treating empty input as valid (returns the initial value).
pub fn crc16_raw(bytes: &[u8]) -> u16 {
    bytes.iter().fold(0xFFFF, |crc, &b| {
        (crc >> 8) ^ TABLE[((crc ^ b as u16) & 0xFF) as usize]
    })
}

pub fn crc16(bytes: &[u8]) -> Result<u16, FrameError> {
    if bytes.is_empty() {
        return Err(FrameError::Empty);
    }
    Ok(crc16_raw(bytes))
}

/// Wire order of a CRC: low byte first.
pub fn crc_bytes(crc: u16) -> [u8; 2] {
    crc.to_le_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_values() {
        assert_eq!(crc16(b"123456789").unwrap(), 0x4B37);
        assert_eq!(crc16(&[0x00]).unwrap(), 0x40BF);
        assert_eq!(crc16(&[]).unwrap_err(), FrameError::Empty);
    }

    #[test]
    fn appending_crc_gives_zero() {
        let mut msg = b"glove".to_vec();
        let crc = crc16(&msg).unwrap();
        msg.extend_from_slice(&crc_bytes(crc));
        assert_eq!(crc16(&msg).unwrap(), 0x0000);
    }
}
