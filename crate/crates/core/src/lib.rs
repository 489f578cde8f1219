//! Control stack for a cable-driven force-feedback data glove.
//!
//! - [`model`]: domain types and the configuration schema
//! - [`kinematics`]: joint angles from encoder readings, and the inverse
//! - [`cable`]: force-feedback cable length and servo target
//! - [`feedback`]: force-to-haptics policy with hysteresis
//! - [`retarget`]: joint-space mapping onto robot hands
//! - [`bus`]: Modbus-RTU codec, register map and device emulator
//! - [`sim`]: deterministic closed-loop simulator and reports

pub mod bus;
pub mod cable;
pub mod feedback;
pub mod kinematics;
pub mod model;
pub mod retarget;
pub mod sim;
