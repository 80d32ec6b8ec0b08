//! Desk-scale simulation of GPS spoofing against PMU time sources and of a
//! LoRa-linked remote-unit countermeasure.
//!
//! The crate is organized bottom-up:
//!
//! - [`rfmodel`]: free-space link budgets, dBm/watt conversions, and the
//!   relative capture rule that decides when a spoofer overpowers the
//!   authentic signal at a receiver.
//! - [`signal`]: C/A spreading codes, sampled IF signal synthesis, and
//!   correlation acquisition over a code-phase x Doppler grid.
//! - [`phasor`]: clock-offset to phase-angle conversion and the two-bus
//!   power-transfer consequences of a timing error.
//! - [`telemetry`]: what a GPS receiver reports under capture, the 28-byte
//!   report frame with CRC-16 integrity, and the LoRa link budget that
//!   carries frames back to the central unit.
//! - [`detector`]: per-unit agreement checks and the majority-vote verdict
//!   over remote-unit reports.
//! - [`simkit`]: tick-based scenario engine tying the layers together:
//!   placement geometry, attack profiles, event logs, and run summaries.
//!
//! Everything is deterministic: all randomness flows from explicit seeds,
//! and serialized outputs are byte-stable for identical inputs.

pub mod detector;
pub mod geo;
pub mod phasor;
pub mod rfmodel;
pub mod signal;
pub mod simkit;
pub mod telemetry;
