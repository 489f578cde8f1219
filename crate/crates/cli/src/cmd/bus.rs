use crate::error::{CliError, ExitKind};
use crate::io::{parse_hex, spaced_hex};
use crate::Ctx;
use clap::{Args, Subcommand};
use glovekit::bus::transport::{serve_tcp, DeviceTask};
use glovekit::bus::{crc16, crc_bytes, wire_delay, BusFrame, FrameError, GloveDevice};
use std::net::TcpListener;

#[derive(Subcommand, Debug)]
pub enum BusCommand {
    /// Build a wire frame: address, function, payload and CRC.
    Encode(EncodeArgs),
    /// Check and split a wire frame.
    Decode {
        /// Frame bytes in hex; spaces, colons and `0x` are ignored.
        frame: String,
    },
    /// CRC-16 of the given bytes, with its little-endian wire order.
    Crc {
        /// Bytes in hex.
        bytes: String,
    },
    /// RS485 transmission time of a frame.
    Timing(TimingArgs),
    /// Serve an emulated glove over TCP.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Device address; defaults to `bus.address`.
    #[arg(long)]
    address: Option<u8>,
    /// Function code, decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_u8)]
    function: u8,
    /// Payload bytes in hex.
    #[arg(long, default_value = "")]
    payload: String,
}

#[derive(Args, Debug)]
pub struct TimingArgs {
    /// Frame length in bytes.
    #[arg(long)]
    bytes: usize,
    /// bit/s; defaults to `bus.bitrate`.
    #[arg(long)]
    bitrate: Option<u32>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:5020")]
    listen: String,
    /// Exit after serving this many connections.
    #[arg(long)]
    max_connections: Option<usize>,
}

fn parse_u8(s: &str) -> Result<u8, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u8::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

pub fn bus(ctx: &Ctx, c: BusCommand) -> Result<(), CliError> {
    match c {
        BusCommand::Encode(a) => {
            let frame = BusFrame::new(
                a.address.unwrap_or(ctx.config.bus.address),
                a.function,
                parse_hex(&a.payload)?,
            );
            let wire = frame.encode().map_err(|e| CliError::input(e.to_string()))?;
            println!("{}", spaced_hex(&wire));
        }
        BusCommand::Decode { frame } => {
            let bytes = parse_hex(&frame)?;
            let f = BusFrame::decode(&bytes).map_err(|e| match e {
                FrameError::BadCrc { .. } => CliError::input(format!("CRC mismatch: {e}")),
                _ => CliError::input(format!("malformed frame: {e}")),
            })?;
            println!("address={}", f.address);
            println!("function={:#04x}", f.function);
            println!("exception={}", f.is_exception());
            println!("payload={}", spaced_hex(&f.payload));
            println!("crc={:#06x}", f.crc());
        }
        BusCommand::Crc { bytes } => {
            let bytes = parse_hex(&bytes)?;
            let crc = crc16(&bytes).map_err(|e| CliError::input(e.to_string()))?;
            println!("crc={crc:#06x}");
            println!("wire={}", spaced_hex(&crc_bytes(crc)));
        }
        BusCommand::Timing(a) => {
            let bitrate = a.bitrate.unwrap_or(ctx.config.bus.bitrate);
            if bitrate == 0 {
                return Err(CliError::input("bitrate must be positive"));
            }
            let t = wire_delay(a.bytes, bitrate);
            println!("transmission_us={}", t.transmission_us);
            println!("gap_us={}", t.gap_us);
            println!("total_us={}", t.total_us());
        }
        BusCommand::Serve(a) => {
            let listener = TcpListener::bind(&a.listen).map_err(|e| CliError::io(&a.listen, e))?;
            let local = listener
                .local_addr()
                .map_err(|e| CliError::io(&a.listen, e))?;
            eprintln!(
                "glove emulator at address {} listening on {local}",
                ctx.config.bus.address
            );
            let task = DeviceTask::spawn(GloveDevice::new(ctx.config.bus.address));
            serve_tcp(listener, task.handle(), a.max_connections)
                .map_err(|e| CliError::new(ExitKind::Bus, e.to_string()))?;
            task.join();
        }
    }
    Ok(())
}
