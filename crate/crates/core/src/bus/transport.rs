//! Byte pipes between bus master and device.
//!
//! [`DirectLink`] calls the device in place. [`DeviceTask`] moves the device
//! onto its own thread and serializes requests through a channel, so any
//! number of [`DeviceHandle`]s (and TCP connections, see [`serve_tcp`]) can
//! share it without concurrent access to the registers.

use super::emulator::GloveDevice;
use super::{function, BusError};
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;
use std::thread::JoinHandle;

pub trait Transport {
    /// Sends one encoded request and returns the encoded reply, if any.
    fn transact(&mut self, request: &[u8]) -> Result<Option<Vec<u8>>, BusError>;
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn transact(&mut self, request: &[u8]) -> Result<Option<Vec<u8>>, BusError> {
        (**self).transact(request)
    }
}

pub struct DirectLink<'a> {
    pub device: &'a mut GloveDevice,
}

impl<'a> DirectLink<'a> {
    pub fn new(device: &'a mut GloveDevice) -> Self {
        DirectLink { device }
    }
}

impl Transport for DirectLink<'_> {
    fn transact(&mut self, request: &[u8]) -> Result<Option<Vec<u8>>, BusError> {
        Ok(self.device.handle_bytes(request))
    }
}

type Envelope = (Vec<u8>, mpsc::Sender<Option<Vec<u8>>>);

/// Device running on its own thread.
pub struct DeviceTask {
    handle: DeviceHandle,
    join: JoinHandle<GloveDevice>,
}

impl DeviceTask {
    pub fn spawn(mut device: GloveDevice) -> Self {
        let (tx, rx) = mpsc::channel::<Envelope>();
        let join = std::thread::spawn(move || {
            for (request, reply) in rx {
                let _ = reply.send(device.handle_bytes(&request));
            }
            device
        });
        DeviceTask {
            handle: DeviceHandle { tx },
            join,
        }
    }

    pub fn handle(&self) -> DeviceHandle {
        self.handle.clone()
    }

    /// Waits for every handle to drop and returns the final device state.
    pub fn join(self) -> GloveDevice {
        drop(self.handle);
        self.join.join().expect("device thread panicked")
    }
}

#[derive(Clone)]
pub struct DeviceHandle {
    tx: mpsc::Sender<Envelope>,
}

impl Transport for DeviceHandle {
    fn transact(&mut self, request: &[u8]) -> Result<Option<Vec<u8>>, BusError> {
        let (reply_tx, reply_rx) = mpsc::channel();
        self.tx
            .send((request.to_vec(), reply_tx))
            .map_err(|_| BusError::Disconnected)?;
        reply_rx.recv().map_err(|_| BusError::Disconnected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Request,
    Response,
}

/// Reads exactly one RTU frame from a byte stream, sizing it from the
/// function code. Returns `Ok(None)` on a clean end of stream.
pub fn read_frame(
    reader: &mut impl Read,
    direction: Direction,
) -> Result<Option<Vec<u8>>, BusError> {
    let mut head = [0u8; 2];
    match reader.read_exact(&mut head) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let mut frame = head.to_vec();
    let mut take = |n: usize, frame: &mut Vec<u8>| -> Result<(), BusError> {
        let start = frame.len();
        frame.resize(start + n, 0);
        reader.read_exact(&mut frame[start..])?;
        Ok(())
    };
    let func = head[1];
    match direction {
        Direction::Request => match func {
            function::WRITE_MULTIPLE => {
                take(5, &mut frame)?;
                let byte_count = frame[6] as usize;
                take(byte_count + 2, &mut frame)?;
            }
            _ => take(6, &mut frame)?,
        },
        Direction::Response => {
            if func & 0x80 != 0 {
                take(3, &mut frame)?;
            } else if func == function::READ_HOLDING || func == function::READ_INPUT {
                take(1, &mut frame)?;
                let byte_count = frame[2] as usize;
                take(byte_count + 2, &mut frame)?;
            } else {
                take(6, &mut frame)?;
            }
        }
    }
    Ok(Some(frame))
}

/// Client end of a TCP loopback link.
pub struct TcpLink {
    stream: TcpStream,
}

impl TcpLink {
    pub fn connect(addr: impl std::net::ToSocketAddrs) -> Result<Self, BusError> {
        Ok(TcpLink {
            stream: TcpStream::connect(addr)?,
        })
    }
}

impl Transport for TcpLink {
    fn transact(&mut self, request: &[u8]) -> Result<Option<Vec<u8>>, BusError> {
        self.stream.write_all(request)?;
        if request.first() == Some(&0) {
            return Ok(None);
        }
        read_frame(&mut self.stream, Direction::Response)?
            .map(Some)
            .ok_or(BusError::Disconnected)
    }
}

fn serve_connection(mut stream: TcpStream, mut device: DeviceHandle) -> Result<(), BusError> {
    while let Some(request) = read_frame(&mut stream, Direction::Request)? {
        if let Some(reply) = device.transact(&request)? {
            stream.write_all(&reply)?;
        }
    }
    Ok(())
}

/// Accepts connections and forwards their frames to `device`. Stops after
/// `max_connections` connections have been accepted and served, or never
/// when `None`.
pub fn serve_tcp(
    listener: TcpListener,
    device: DeviceHandle,
    max_connections: Option<usize>,
) -> Result<(), BusError> {
    let mut workers = Vec::new();
    for (n, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let handle = device.clone();
        workers.push(std::thread::spawn(move || serve_connection(stream, handle)));
        if max_connections.is_some_and(|m| n + 1 >= m) {
            break;
        }
    }
    for w in workers {
        w.join().expect("connection thread panicked")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::client::{self, Master};
    use crate::bus::BusFrame;

    #[test]
    fn frame_reader_sizes_by_function() {
        let req = client::write_multiple_request(1, 0x0100, &[1, 2, 3])
            .unwrap()
            .encode()
            .unwrap();
        let read = client::read_request(1, 0x04, 0, 2).encode().unwrap();
        let mut stream: Vec<u8> = req.clone();
        stream.extend_from_slice(&read);
        let mut cursor = std::io::Cursor::new(stream);
        assert_eq!(
            read_frame(&mut cursor, Direction::Request).unwrap(),
            Some(req)
        );
        assert_eq!(
            read_frame(&mut cursor, Direction::Request).unwrap(),
            Some(read)
        );
        assert_eq!(read_frame(&mut cursor, Direction::Request).unwrap(), None);

        let exc = BusFrame::new(1, 0x83, vec![2]).encode().unwrap();
        let mut cursor = std::io::Cursor::new(exc.clone());
        assert_eq!(
            read_frame(&mut cursor, Direction::Response).unwrap(),
            Some(exc)
        );
    }

    #[test]
    fn device_task_serializes_handles() {
        let task = DeviceTask::spawn(GloveDevice::new(3));
        let mut a = Master::new(task.handle(), 3);
        let mut b = Master::new(task.handle(), 3);
        a.write_single(0x0101, 42).unwrap();
        assert_eq!(b.read_holding(0x0101, 1).unwrap(), vec![42]);
        drop((a, b));
        let device = task.join();
        assert_eq!(device.registers.servo[1], 42);
    }

    #[test]
    fn tcp_loopback_uses_the_same_codec() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let mut device = GloveDevice::new(1);
        device.inject_counts(&[9; 16]);
        let task = DeviceTask::spawn(device);
        let handle = task.handle();
        let server = std::thread::spawn(move || serve_tcp(listener, handle, Some(1)));
        {
            let mut m = Master::new(TcpLink::connect(addr).unwrap(), 1);
            assert_eq!(m.read_input(0, 16).unwrap(), vec![9; 16]);
            m.write_multiple(0x0200, &[1, 2]).unwrap();
            let err = m.read_holding(0x0400, 1).unwrap_err();
            assert!(
                matches!(err, BusError::Exception { raw_code: 2, .. }),
                "{err}"
            );
        }
        server.join().unwrap().unwrap();
        assert_eq!(&task.join().registers.lra[..2], &[1, 2]);
    }
}
