use super::SimError;
use crate::feedback::FeedbackMode;
use crate::model::{ENCODER_CHANNELS, FINGERS, JOINT_CHANNELS};
use std::io::{Read, Write};

/// One simulator tick. Angles are radians in memory and degrees on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub timestamp_us: u64,
    pub counts: [u32; ENCODER_CHANNELS],
    /// Solved glove pose.
    pub q: [f64; JOINT_CHANNELS],
    /// Robot-hand joint targets.
    pub cmd: Vec<f64>,
    /// Contact force seen by the controller, N.
    pub force: [f64; FINGERS],
    /// Feedback mode rendered on the glove.
    pub mode: [FeedbackMode; FINGERS],
    /// Applied servo target, radians.
    pub servo: [f64; FINGERS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub hand_model: String,
    /// Time between consecutive rows, µs.
    pub row_period_us: u64,
    pub rows: Vec<TraceRow>,
}

const UNITS: &str = "# time us; enc counts; q, cmd and servo in degrees; force N; \
mode 0=none 1=waveform1 2=waveform2 3=force_feedback";

impl Trace {
    /// Every `divider`-th row, starting with the first.
    pub fn downsample(&self, divider: u32) -> Trace {
        let d = divider.max(1) as usize;
        Trace {
            hand_model: self.hand_model.clone(),
            row_period_us: self.row_period_us * d as u64,
            rows: self.rows.iter().step_by(d).cloned().collect(),
        }
    }

    pub fn dof(&self) -> usize {
        self.rows.first().map_or(0, |r| r.cmd.len())
    }

    pub fn header(dof: usize) -> Vec<String> {
        let mut h = vec!["timestamp_us".to_string()];
        h.extend((0..ENCODER_CHANNELS).map(|i| format!("enc_{i:02}")));
        h.extend((0..JOINT_CHANNELS).map(|i| format!("q_{i:02}")));
        h.extend((0..dof).map(|i| format!("cmd_{i:02}")));
        h.extend((0..FINGERS).map(|i| format!("force_{i}")));
        h.extend((0..FINGERS).map(|i| format!("mode_{i}")));
        h.extend((0..FINGERS).map(|i| format!("servo_{i}")));
        h
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<(), SimError> {
        let io = |e: std::io::Error| SimError::Trace(e.to_string());
        writeln!(out, "{UNITS}").map_err(io)?;
        writeln!(
            out,
            "# hand_model={} row_period_us={}",
            self.hand_model, self.row_period_us
        )
        .map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header(self.dof()))?;
        for r in &self.rows {
            let mut rec = vec![r.timestamp_us.to_string()];
            rec.extend(r.counts.iter().map(u32::to_string));
            rec.extend(r.q.iter().map(|v| v.to_degrees().to_string()));
            rec.extend(r.cmd.iter().map(|v| v.to_degrees().to_string()));
            rec.extend(r.force.iter().map(f64::to_string));
            rec.extend(r.mode.iter().map(|m| m.level().to_string()));
            rec.extend(r.servo.iter().map(|v| v.to_degrees().to_string()));
            w.write_record(rec)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        buf
    }

    pub fn read_csv(mut input: impl Read) -> Result<Trace, SimError> {
        let mut text = String::new();
        input
            .read_to_string(&mut text)
            .map_err(|e| SimError::Trace(e.to_string()))?;
        let mut hand_model = String::new();
        let mut row_period_us = 0;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            for kv in line.trim_start_matches('#').split_whitespace() {
                match kv.split_once('=') {
                    Some(("hand_model", v)) => hand_model = v.to_string(),
                    Some(("row_period_us", v)) => {
                        row_period_us = v
                            .parse()
                            .map_err(|_| SimError::Trace(format!("bad row period `{v}`")))?
                    }
                    _ => {}
                }
            }
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        let dof = headers.iter().filter(|h| h.starts_with("cmd_")).count();
        if headers.iter().collect::<Vec<_>>() != Self::header(dof) {
            return Err(SimError::Trace("unexpected trace columns".into()));
        }
        let mut rows = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |c: usize| SimError::Trace(format!("row {}: bad `{}`", n + 1, &headers[c]));
            let f = |c: usize| rec[c].parse::<f64>().map_err(|_| bad(c));
            let mut c = 0;
            let timestamp_us = rec[c].parse().map_err(|_| bad(c))?;
            c += 1;
            let mut counts = [0u32; ENCODER_CHANNELS];
            for v in counts.iter_mut() {
                *v = rec[c].parse().map_err(|_| bad(c))?;
                c += 1;
            }
            let mut q = [0.0; JOINT_CHANNELS];
            for v in q.iter_mut() {
                *v = f(c)?.to_radians();
                c += 1;
            }
            let mut cmd = Vec::with_capacity(dof);
            for _ in 0..dof {
                cmd.push(f(c)?.to_radians());
                c += 1;
            }
            let mut force = [0.0; FINGERS];
            for v in force.iter_mut() {
                *v = f(c)?;
                c += 1;
            }
            let mut mode = [FeedbackMode::None; FINGERS];
            for v in mode.iter_mut() {
                *v = rec[c]
                    .parse()
                    .ok()
                    .and_then(FeedbackMode::from_level)
                    .ok_or_else(|| bad(c))?;
                c += 1;
            }
            let mut servo = [0.0; FINGERS];
            for v in servo.iter_mut() {
                *v = f(c)?.to_radians();
                c += 1;
            }
            rows.push(TraceRow {
                timestamp_us,
                counts,
                q,
                cmd,
                force,
                mode,
                servo,
            });
        }
        if row_period_us == 0 && rows.len() > 1 {
            row_period_us = rows[1].timestamp_us - rows[0].timestamp_us;
        }
        Ok(Trace {
            hand_model,
            row_period_us,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: u64) -> TraceRow {
        TraceRow {
            timestamp_us: t,
            counts: [32768; ENCODER_CHANNELS],
            q: [0.25; JOINT_CHANNELS],
            cmd: vec![0.5, -0.125],
            force: [0.0, 1.5, 0.0, 0.0, 0.3],
            mode: [
                FeedbackMode::None,
                FeedbackMode::ForceFeedback,
                FeedbackMode::None,
                FeedbackMode::None,
                FeedbackMode::Waveform1,
            ],
            servo: [0.0, -0.15, 0.0, 0.0, 0.2],
        }
    }

    #[test]
    fn csv_round_trip() {
        let trace = Trace {
            hand_model: "6dof".into(),
            row_period_us: 10_000,
            rows: vec![row(0), row(10_000)],
        };
        let bytes = trace.to_csv_bytes();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("# time us;"));
        let back = Trace::read_csv(bytes.as_slice()).unwrap();
        assert_eq!(back.hand_model, "6dof");
        assert_eq!(back.row_period_us, 10_000);
        assert_eq!(back.rows.len(), 2);
        for (a, b) in back.rows.iter().zip(&trace.rows) {
            assert_eq!(a.counts, b.counts);
            assert_eq!(a.mode, b.mode);
            assert_eq!(a.force, b.force);
            for (x, y) in a.q.iter().chain(&a.cmd).zip(b.q.iter().chain(&b.cmd)) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn downsample_keeps_first_row() {
        let trace = Trace {
            hand_model: "x".into(),
            row_period_us: 10,
            rows: (0..7).map(|i| row(i * 10)).collect(),
        };
        let d = trace.downsample(3);
        let ts: Vec<u64> = d.rows.iter().map(|r| r.timestamp_us).collect();
        assert_eq!(ts, vec![0, 30, 60]);
        assert_eq!(d.row_period_us, 30);
    }

    #[test]
    fn wrong_columns_rejected() {
        assert!(Trace::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
