use glovekit::bus::{BusError, FrameError};
use glovekit::kinematics::KinematicsError;
use glovekit::model::ConfigError;
use glovekit::retarget::RetargetError;
use glovekit::sim::SimError;
use std::fmt;

/// Exit status per error class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 3,
    Input = 4,
    Domain = 5,
    Io = 6,
    Bus = 7,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Input, message)
    }

    pub fn io(what: impl fmt::Display, e: std::io::Error) -> Self {
        Self::new(ExitKind::Io, format!("{what}: {e}"))
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let kind = match e {
            ConfigError::Io { .. } => ExitKind::Io,
            _ => ExitKind::Config,
        };
        CliError::new(kind, format!("config: {e}"))
    }
}

impl From<KinematicsError> for CliError {
    fn from(e: KinematicsError) -> Self {
        CliError::new(ExitKind::Domain, e.to_string())
    }
}

impl From<RetargetError> for CliError {
    fn from(e: RetargetError) -> Self {
        let kind = match e {
            RetargetError::Io { .. } => ExitKind::Io,
            _ => ExitKind::Config,
        };
        CliError::new(kind, format!("hand model: {e}"))
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        CliError::input(format!("frame: {e}"))
    }
}

impl From<BusError> for CliError {
    fn from(e: BusError) -> Self {
        let kind = match e {
            BusError::Io(_) => ExitKind::Io,
            _ => ExitKind::Bus,
        };
        CliError::new(kind, format!("bus: {e}"))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => c.into(),
            SimError::Retarget(r) => r.into(),
            SimError::Bus(b) => b.into(),
            SimError::Trace(_) => CliError::input(e.to_string()),
            SimError::Trajectory(_) => CliError::input(e.to_string()),
            other => CliError::new(ExitKind::Domain, other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            CliError::new(ExitKind::Io, e.to_string())
        } else {
            CliError::input(format!("csv: {e}"))
        }
    }
}
