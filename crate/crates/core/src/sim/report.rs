use super::trace::Trace;
use super::SimError;
use crate::feedback::{next_mode, FeedbackMode, FeedbackPolicy};
use crate::model::Finger;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyEvent {
    pub finger: Finger,
    /// Timestamp of the force sample that triggered force feedback, µs.
    pub trigger_us: u64,
    /// First row showing the servo tensioned, µs.
    pub action_us: u64,
}

impl LatencyEvent {
    pub fn latency_us(&self) -> u64 {
        self.action_us - self.trigger_us
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub events: Vec<LatencyEvent>,
    pub mean_ms: f64,
    pub max_ms: f64,
}

/// Force-to-servo latency of every force-feedback activation in `trace`.
///
/// Triggers are found by replaying the policy on the logged forces; the
/// action is the first later row where the finger turns tensioned.
/// Activations still pending when the trace ends are skipped.
pub fn latency_report(trace: &Trace, policy: &FeedbackPolicy) -> Result<LatencyReport, SimError> {
    let rows = &trace.rows;
    let mut events = Vec::new();
    for f in Finger::ALL {
        let i = f.index();
        let mut mode = FeedbackMode::None;
        for (k, row) in rows.iter().enumerate() {
            let next = next_mode(mode, row.force[i], policy);
            let entered = next == FeedbackMode::ForceFeedback && mode != next;
            mode = next;
            if !entered {
                continue;
            }
            let action = (k..rows.len()).find(|&j| {
                rows[j].mode[i] == FeedbackMode::ForceFeedback
                    && (j == 0 || rows[j - 1].mode[i] != FeedbackMode::ForceFeedback)
            });
            if let Some(j) = action {
                events.push(LatencyEvent {
                    finger: f,
                    trigger_us: row.timestamp_us,
                    action_us: rows[j].timestamp_us,
                });
            }
        }
    }
    if events.is_empty() {
        return Err(SimError::NoActivation);
    }
    events.sort_by_key(|e| (e.trigger_us, e.finger.index()));
    let ms: Vec<f64> = events
        .iter()
        .map(|e| e.latency_us() as f64 / 1000.0)
        .collect();
    Ok(LatencyReport {
        mean_ms: ms.iter().sum::<f64>() / ms.len() as f64,
        max_ms: ms.iter().copied().fold(f64::MIN, f64::max),
        events,
    })
}

impl LatencyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# latency in ms\nfinger,trigger_us,action_us,latency_ms\n");
        for e in &self.events {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                e.finger,
                e.trigger_us,
                e.action_us,
                e.latency_us() as f64 / 1000.0
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "activations={}\nmean_latency_ms={:.1}\nmax_latency_ms={:.1}\n",
            self.events.len(),
            self.mean_ms,
            self.max_ms
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatabilityReport {
    pub finger: Finger,
    /// Contact angle of each cycle, degrees.
    pub per_cycle_deg: Vec<f64>,
    pub mean_deg: f64,
    /// Sample standard deviation, degrees.
    pub std_deg: f64,
}

/// Mean and sample standard deviation of contact angles in degrees.
///
/// Deviations are taken from the first value so identical angles give a
/// standard deviation of exactly zero.
pub fn repeatability_from_angles(
    finger: Finger,
    angles_deg: &[f64],
) -> Result<RepeatabilityReport, SimError> {
    let n = angles_deg.len();
    if n < 3 {
        return Err(SimError::NotEnoughContacts { found: n });
    }
    let x0 = angles_deg[0];
    let d: Vec<f64> = angles_deg.iter().map(|x| x - x0).collect();
    let mean_d = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean_d).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(RepeatabilityReport {
        finger,
        per_cycle_deg: angles_deg.to_vec(),
        mean_deg: x0 + mean_d,
        std_deg: var.sqrt(),
    })
}

/// Contact angle of `finger` at each upward crossing of the lowest force
/// threshold: the solved distal angle on the first row at or above it.
pub fn repeatability_report(
    trace: &Trace,
    finger: Finger,
    policy: &FeedbackPolicy,
) -> Result<RepeatabilityReport, SimError> {
    let i = finger.index();
    let ch = finger.distal_channel().0;
    let t0 = policy.thresholds[0];
    let mut prev = 0.0;
    let mut angles = Vec::new();
    for row in &trace.rows {
        if row.force[i] >= t0 && prev < t0 {
            angles.push(row.q[ch].to_degrees());
        }
        prev = row.force[i];
    }
    repeatability_from_angles(finger, &angles)
}

impl RepeatabilityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# contact angle in degrees\ncycle,angle_deg\n");
        for (k, a) in self.per_cycle_deg.iter().enumerate() {
            let _ = writeln!(s, "{},{}", k + 1, a);
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "finger={}\ncontacts={}\nmean_contact_deg={:.3}\nstd_contact_deg={:.3}\n",
            self.finger,
            self.per_cycle_deg.len(),
            self.mean_deg,
            self.std_deg
        )
    }
}
