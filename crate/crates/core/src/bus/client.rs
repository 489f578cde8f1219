//! Bus-master side: request builders, response parsers and a small
//! register client over any [`Transport`].

use super::transport::Transport;
use super::{function, BusError, BusFrame, ExceptionCode, MAX_PAYLOAD_LEN};

pub fn read_request(address: u8, function: u8, start: u16, count: u16) -> BusFrame {
    let mut payload = start.to_be_bytes().to_vec();
    payload.extend_from_slice(&count.to_be_bytes());
    BusFrame::new(address, function, payload)
}

pub fn write_single_request(address: u8, register: u16, value: u16) -> BusFrame {
    let mut payload = register.to_be_bytes().to_vec();
    payload.extend_from_slice(&value.to_be_bytes());
    BusFrame::new(address, function::WRITE_SINGLE, payload)
}

pub fn write_multiple_request(
    address: u8,
    start: u16,
    values: &[u16],
) -> Result<BusFrame, BusError> {
    if values.is_empty() || 5 + 2 * values.len() > MAX_PAYLOAD_LEN {
        return Err(BusError::Request(format!(
            "cannot write {} registers in one frame",
            values.len()
        )));
    }
    let mut payload = start.to_be_bytes().to_vec();
    payload.extend_from_slice(&(values.len() as u16).to_be_bytes());
    payload.push((2 * values.len()) as u8);
    for v in values {
        payload.extend_from_slice(&v.to_be_bytes());
    }
    Ok(BusFrame::new(address, function::WRITE_MULTIPLE, payload))
}

fn check_exception(frame: &BusFrame) -> Result<(), BusError> {
    if frame.is_exception() {
        let code = frame.payload.first().copied().unwrap_or(0);
        return Err(BusError::Exception {
            function: frame.function & 0x7F,
            code: ExceptionCode::from_u8(code),
            raw_code: code,
        });
    }
    Ok(())
}

/// Register values from a read response.
pub fn parse_read_response(frame: &BusFrame, count: u16) -> Result<Vec<u16>, BusError> {
    check_exception(frame)?;
    let p = &frame.payload;
    let n = 2 * count as usize;
    if p.len() != n + 1 || p[0] as usize != n {
        return Err(BusError::UnexpectedResponse(format!(
            "expected {n} data bytes, got payload of {}",
            p.len()
        )));
    }
    Ok(p[1..]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect())
}

/// Register client bound to one device address.
pub struct Master<T: Transport> {
    transport: T,
    address: u8,
}

impl<T: Transport> Master<T> {
    pub fn new(transport: T, address: u8) -> Self {
        Master { transport, address }
    }

    pub fn into_inner(self) -> T {
        self.transport
    }

    pub fn request(&mut self, request: &BusFrame) -> Result<BusFrame, BusError> {
        let wire = request.encode()?;
        let reply = self
            .transport
            .transact(&wire)?
            .ok_or(BusError::NoResponse)?;
        let frame = BusFrame::decode(&reply)?;
        if frame.address != request.address || frame.function & 0x7F != request.function {
            return Err(BusError::UnexpectedResponse(format!(
                "reply {:02x}/{:02x} to request {:02x}/{:02x}",
                frame.address, frame.function, request.address, request.function
            )));
        }
        check_exception(&frame)?;
        Ok(frame)
    }

    pub fn read_holding(&mut self, start: u16, count: u16) -> Result<Vec<u16>, BusError> {
        let resp = self.request(&read_request(
            self.address,
            function::READ_HOLDING,
            start,
            count,
        ))?;
        parse_read_response(&resp, count)
    }

    pub fn read_input(&mut self, start: u16, count: u16) -> Result<Vec<u16>, BusError> {
        let resp = self.request(&read_request(
            self.address,
            function::READ_INPUT,
            start,
            count,
        ))?;
        parse_read_response(&resp, count)
    }

    pub fn write_single(&mut self, register: u16, value: u16) -> Result<(), BusError> {
        self.request(&write_single_request(self.address, register, value))
            .map(|_| ())
    }

    pub fn write_multiple(&mut self, start: u16, values: &[u16]) -> Result<(), BusError> {
        self.request(&write_multiple_request(self.address, start, values)?)
            .map(|_| ())
    }
}
