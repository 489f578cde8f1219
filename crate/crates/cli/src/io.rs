//! File formats shared by subcommands.

use crate::error::CliError;
use crate::Units;
use glovekit::model::{Calibration, ENCODER_CHANNELS, JOINT_CHANNELS};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub fn open_input(path: &Path) -> Result<Box<dyn Read>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(std::io::stdin()));
    }
    let f = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
    Ok(Box::new(f))
}

/// `path`, or standard output when `None` or `-`.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::create(p).map_err(|e| CliError::io(p.display(), e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(std::io::stdout().lock())),
    }
}

pub fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("output", e))
}

fn columns(headers: &csv::StringRecord, prefix: &str, n: usize) -> Result<Vec<usize>, CliError> {
    (0..n)
        .map(|i| {
            let name = format!("{prefix}{i:02}");
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::input(format!("missing column `{name}`")))
        })
        .collect()
}

fn reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Encoder frames from `timestamp_us, enc_00..enc_15` (raw counts). Extra
/// columns are ignored, so simulator traces are valid input.
pub fn read_frames(input: impl Read) -> Result<Vec<(u64, [u32; ENCODER_CHANNELS])>, CliError> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let t_col = headers.iter().position(|h| h == "timestamp_us");
    let enc = columns(&headers, "enc_", ENCODER_CHANNELS)?;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |c: usize| {
            CliError::input(format!(
                "row {}: bad `{}` value `{}`",
                n + 1,
                &headers[c],
                &rec[c]
            ))
        };
        let t = match t_col {
            Some(c) => rec[c].parse().map_err(|_| bad(c))?,
            None => n as u64,
        };
        let mut counts = [0u32; ENCODER_CHANNELS];
        for (v, &c) in counts.iter_mut().zip(&enc) {
            *v = rec[c].parse().map_err(|_| bad(c))?;
        }
        out.push((t, counts));
    }
    Ok(out)
}

/// Joint-angle rows from `timestamp_us, q_00..q_19` in `units`.
pub fn read_poses(
    input: impl Read,
    units: Units,
) -> Result<Vec<(u64, [f64; JOINT_CHANNELS])>, CliError> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let t_col = headers.iter().position(|h| h == "timestamp_us");
    let qs = columns(&headers, "q_", JOINT_CHANNELS)?;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |c: usize| {
            CliError::input(format!(
                "row {}: bad `{}` value `{}`",
                n + 1,
                &headers[c],
                &rec[c]
            ))
        };
        let t = match t_col {
            Some(c) => rec[c].parse().map_err(|_| bad(c))?,
            None => n as u64,
        };
        let mut q = [0.0; JOINT_CHANNELS];
        for (v, &c) in q.iter_mut().zip(&qs) {
            let x: f64 = rec[c].parse().map_err(|_| bad(c))?;
            if !x.is_finite() {
                return Err(bad(c));
            }
            *v = units.to_rad(x);
        }
        out.push((t, q));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    /// Per-channel encoder angle at the flat hand, degrees.
    offsets_deg: [f64; ENCODER_CHANNELS],
}

pub fn read_calibration(path: &Path) -> Result<Calibration, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    let file: CalibrationFile = toml::from_str(&text)
        .map_err(|e| CliError::input(format!("calibration {}: {e}", path.display())))?;
    if file.offsets_deg.iter().any(|v| !v.is_finite()) {
        return Err(CliError::input("calibration offsets must be finite"));
    }
    Ok(Calibration {
        offsets: file.offsets_deg.map(f64::to_radians),
    })
}

pub fn calibration_text(cal: &Calibration) -> String {
    let file = CalibrationFile {
        offsets_deg: cal.offsets.map(f64::to_degrees),
    };
    format!(
        "# encoder offsets at the flat hand, degrees\n{}",
        toml::to_string(&file).expect("calibration serializes")
    )
}

/// Bytes from hex text; spaces, colons and a leading `0x` are ignored.
pub fn parse_hex(text: &str) -> Result<Vec<u8>, CliError> {
    let cleaned: String = text
        .trim()
        .trim_start_matches("0x")
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ':')
        .collect();
    hex::decode(&cleaned).map_err(|e| CliError::input(format!("hex `{text}`: {e}")))
}

pub fn spaced_hex(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_forms() {
        assert_eq!(parse_hex("01 03:00 00").unwrap(), vec![1, 3, 0, 0]);
        assert_eq!(parse_hex("0x0103").unwrap(), vec![1, 3]);
        assert!(parse_hex("0g").is_err());
        assert_eq!(spaced_hex(&[0x44, 0x06]), "44 06");
    }

    #[test]
    fn frames_need_every_encoder_column() {
        let err = read_frames("timestamp_us,enc_00\n0,1\n".as_bytes()).unwrap_err();
        assert!(err.message.contains("enc_01"));
    }

    #[test]
    fn calibration_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cal.toml");
        let cal = Calibration {
            offsets: std::array::from_fn(|i| i as f64 * 0.25),
        };
        std::fs::write(&p, calibration_text(&cal)).unwrap();
        let back = read_calibration(&p).unwrap();
        for (a, b) in back.offsets.iter().zip(cal.offsets) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
