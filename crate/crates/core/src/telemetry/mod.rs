//! Remote-unit reporting: what a GPS-disciplined receiver outputs under
//! spoofing capture, the compact report frame that carries it over a LoRa
//! uplink, and the link budget that decides whether the frame arrives.
//!
//! # Example
//!
//! ```
//! use spoofwatch_core::telemetry::{decode_frame, encode_frame, FrameError, GpsFix, RemoteReport};
//!
//! let report = RemoteReport {
//!     unit_id: 3,
//!     fix: GpsFix {
//!         utc_time_ms: 1_700_000_000_000,
//!         latitude_deg: 39.9526,
//!         longitude_deg: -75.1652,
//!         sats_visible: 9,
//!         sats_used: 7,
//!     },
//!     packet_counter: 42,
//! };
//! let mut frame = encode_frame(&report).unwrap();
//! assert_eq!(decode_frame(&frame).unwrap().unit_id, 3);
//!
//! frame[9] ^= 0x01;
//! assert_eq!(decode_frame(&frame), Err(FrameError::Integrity));
//! ```

mod codec;

pub use codec::{
    crc16_ccitt_false, decode_frame, decode_tagged_frame, encode_frame, encode_tagged_frame,
    FrameError, FRAME_LEN_V1, FRAME_LEN_V2, FRAME_MAGIC, FRAME_VERSION_V1, FRAME_VERSION_V2,
};

use serde::{Deserialize, Serialize};

use crate::rfmodel::{received_power, watts_to_dbm, wavelength, CaptureState, LinkBudget, RfError};

// ---- receiver model ----

/// Satellites a receiver needs before it trusts its solution. A captured
/// receiver is modeled at exactly this count: the counterfeit constellation
/// is a minimal one, but the receiver still believes it has a lock.
pub const MIN_SATS_FOR_LOCK: u8 = 4;

/// One navigation solution: UTC milliseconds and a position, plus how many
/// satellites the receiver saw and used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub utc_time_ms: u64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub sats_visible: u8,
    pub sats_used: u8,
}

/// What a receiver reports given the true fix and its capture state.
///
/// An authentic lock reports the truth unchanged. A captured receiver
/// reports the counterfeit timeline: UTC shifted by the spoofed clock
/// offset (rounded to whole milliseconds, saturating at zero), the
/// counterfeit position if the attack carries one, and a minimal
/// [`MIN_SATS_FOR_LOCK`] constellation.
pub fn observe(
    truth: &GpsFix,
    capture: CaptureState,
    spoof_offset_s: f64,
    spoof_position: Option<(f64, f64)>,
) -> GpsFix {
    match capture {
        CaptureState::Authentic => *truth,
        CaptureState::Spoofed => {
            let shift_ms = (spoof_offset_s * 1000.0).round() as i64;
            let (latitude_deg, longitude_deg) = spoof_position
                .unwrap_or((truth.latitude_deg, truth.longitude_deg));
            GpsFix {
                utc_time_ms: truth.utc_time_ms.saturating_add_signed(shift_ms),
                latitude_deg,
                longitude_deg,
                sats_visible: MIN_SATS_FOR_LOCK,
                sats_used: MIN_SATS_FOR_LOCK,
            }
        }
    }
}

/// One unit's report for one tick: its fix plus framing metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteReport {
    pub unit_id: u8,
    pub fix: GpsFix,
    pub packet_counter: u32,
}

// ---- LoRa uplink ----

/// Carrier frequency of the report uplink, Hz (915 MHz ISM band).
pub const LORA_FREQ_HZ: f64 = 915.0e6;

/// Weakest RSSI the central receiver still demodulates, dBm.
pub const DEFAULT_LORA_SENSITIVITY_DBM: f64 = -120.0;

/// Received signal strength of an uplink transmission after free-space
/// propagation over `distance_m`, in dBm.
pub fn lora_rssi(
    tx_power_w: f64,
    tx_gain_dbi: f64,
    rx_gain_dbi: f64,
    distance_m: f64,
) -> Result<f64, RfError> {
    let lambda = wavelength(LORA_FREQ_HZ)?;
    let budget = LinkBudget::with_gains_dbi(tx_power_w, tx_gain_dbi, rx_gain_dbi, lambda, distance_m)?;
    Ok(watts_to_dbm(received_power(&budget)))
}

/// Whether a frame at `rssi_dbm` is demodulated. Exactly at sensitivity
/// still counts as delivered.
pub fn deliver(rssi_dbm: f64, sensitivity_dbm: f64) -> bool {
    rssi_dbm >= sensitivity_dbm
}

/// A decoded frame as the central unit logs it, with reception metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedFrameRecord {
    pub unit_id: u8,
    pub rssi_dbm: f64,
    pub size_bytes: usize,
    pub utc_time: u64,
    pub lat: f64,
    pub lon: f64,
    pub sats_visible: u8,
    pub sats_used: u8,
    pub packet_counter: u32,
}

impl ReceivedFrameRecord {
    /// Log entry for a report that arrived at `rssi_dbm` in a frame of
    /// `size_bytes`.
    pub fn new(report: &RemoteReport, rssi_dbm: f64, size_bytes: usize) -> Self {
        Self {
            unit_id: report.unit_id,
            rssi_dbm,
            size_bytes,
            utc_time: report.fix.utc_time_ms,
            lat: report.fix.latitude_deg,
            lon: report.fix.longitude_deg,
            sats_visible: report.fix.sats_visible,
            sats_used: report.fix.sats_used,
            packet_counter: report.packet_counter,
        }
    }
}
