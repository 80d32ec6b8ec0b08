//! Report frame codec. Version 1 is a fixed 28-byte big-endian frame with
//! a CRC-16 trailer; version 2 appends a keyed SHA-256 tag so a forged
//! frame fails even when its CRC is valid.
//!
//! Decoding checks length, then the CRC over everything before the
//! trailer, then magic and version. The CRC runs first so that any
//! single corrupted bit, wherever it lands, surfaces as an integrity
//! failure rather than a format complaint.

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{GpsFix, RemoteReport};

/// First two bytes of every frame.
pub const FRAME_MAGIC: [u8; 2] = [0xA5, 0x5A];

/// CRC-only frame length, bytes.
pub const FRAME_LEN_V1: usize = 28;

/// Keyed-tag frame length, bytes.
pub const FRAME_LEN_V2: usize = 32;

pub const FRAME_VERSION_V1: u8 = 1;
pub const FRAME_VERSION_V2: u8 = 2;

/// Fields (magic through counter) occupy this prefix; integrity data
/// follows.
const PAYLOAD_LEN: usize = 26;

/// Degrees to the fixed-point unit the frame stores (1e-7 degree).
const DEG_SCALE: f64 = 1e7;

/// Why a frame failed to encode or decode.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame must be {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("frame failed the integrity check")]
    Integrity,
    #[error("frame magic or version is not recognized")]
    Format,
    #[error("field out of range: {0}")]
    Range(&'static str),
}

/// CRC-16/CCITT-FALSE: polynomial 0x1021, initial value 0xFFFF, no
/// reflection, no final XOR. The check value over the ASCII digits
/// "123456789" is 0x29B1.
pub fn crc16_ccitt_false(bytes: &[u8]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &b in bytes {
        crc ^= (b as u16) << 8;
        for _ in 0..8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
        }
    }
    crc
}

fn encode_payload(report: &RemoteReport, version: u8) -> Result<[u8; PAYLOAD_LEN], FrameError> {
    let fix = &report.fix;
    if !(fix.latitude_deg.is_finite() && fix.latitude_deg.abs() <= 90.0) {
        return Err(FrameError::Range("latitude_deg must be within ±90"));
    }
    if !(fix.longitude_deg.is_finite() && fix.longitude_deg.abs() <= 180.0) {
        return Err(FrameError::Range("longitude_deg must be within ±180"));
    }
    let lat = (fix.latitude_deg * DEG_SCALE).round() as i32;
    let lon = (fix.longitude_deg * DEG_SCALE).round() as i32;

    let mut out = [0u8; PAYLOAD_LEN];
    out[0..2].copy_from_slice(&FRAME_MAGIC);
    out[2] = version;
    out[3] = report.unit_id;
    out[4..8].copy_from_slice(&lat.to_be_bytes());
    out[8..12].copy_from_slice(&lon.to_be_bytes());
    out[12] = fix.sats_visible;
    out[13] = fix.sats_used;
    out[14..22].copy_from_slice(&fix.utc_time_ms.to_be_bytes());
    out[22..26].copy_from_slice(&report.packet_counter.to_be_bytes());
    Ok(out)
}

fn decode_payload(payload: &[u8]) -> RemoteReport {
    let lat = i32::from_be_bytes(payload[4..8].try_into().unwrap());
    let lon = i32::from_be_bytes(payload[8..12].try_into().unwrap());
    RemoteReport {
        unit_id: payload[3],
        fix: GpsFix {
            utc_time_ms: u64::from_be_bytes(payload[14..22].try_into().unwrap()),
            latitude_deg: lat as f64 / DEG_SCALE,
            longitude_deg: lon as f64 / DEG_SCALE,
            sats_visible: payload[12],
            sats_used: payload[13],
        },
        packet_counter: u32::from_be_bytes(payload[22..26].try_into().unwrap()),
    }
}

/// Encode a version 1 frame: payload plus CRC-16 trailer.
pub fn encode_frame(report: &RemoteReport) -> Result<[u8; FRAME_LEN_V1], FrameError> {
    let payload = encode_payload(report, FRAME_VERSION_V1)?;
    let mut out = [0u8; FRAME_LEN_V1];
    out[..PAYLOAD_LEN].copy_from_slice(&payload);
    let crc = crc16_ccitt_false(&out[..PAYLOAD_LEN]);
    out[PAYLOAD_LEN..].copy_from_slice(&crc.to_be_bytes());
    Ok(out)
}

/// Decode a version 1 frame, checking length, CRC, then format.
pub fn decode_frame(bytes: &[u8]) -> Result<RemoteReport, FrameError> {
    if bytes.len() != FRAME_LEN_V1 {
        return Err(FrameError::Length {
            expected: FRAME_LEN_V1,
            actual: bytes.len(),
        });
    }
    let stored = u16::from_be_bytes(bytes[PAYLOAD_LEN..].try_into().unwrap());
    if crc16_ccitt_false(&bytes[..PAYLOAD_LEN]) != stored {
        return Err(FrameError::Integrity);
    }
    if bytes[0..2] != FRAME_MAGIC || bytes[2] != FRAME_VERSION_V1 {
        return Err(FrameError::Format);
    }
    Ok(decode_payload(&bytes[..PAYLOAD_LEN]))
}

fn keyed_tag(key: &[u8], payload: &[u8]) -> [u8; 4] {
    let mut hasher = Sha256::new();
    hasher.update(key);
    hasher.update(payload);
    let digest = hasher.finalize();
    [digest[0], digest[1], digest[2], digest[3]]
}

/// Encode a version 2 frame: payload, 4-byte keyed tag, CRC-16 trailer.
/// The tag is the truncated SHA-256 of the key followed by the payload, so
/// only a sender holding the key can produce a frame that verifies.
pub fn encode_tagged_frame(
    report: &RemoteReport,
    key: &[u8],
) -> Result<[u8; FRAME_LEN_V2], FrameError> {
    let payload = encode_payload(report, FRAME_VERSION_V2)?;
    let mut out = [0u8; FRAME_LEN_V2];
    out[..PAYLOAD_LEN].copy_from_slice(&payload);
    out[PAYLOAD_LEN..PAYLOAD_LEN + 4].copy_from_slice(&keyed_tag(key, &payload));
    let crc = crc16_ccitt_false(&out[..PAYLOAD_LEN + 4]);
    out[PAYLOAD_LEN + 4..].copy_from_slice(&crc.to_be_bytes());
    Ok(out)
}

/// Decode a version 2 frame: length, CRC, format, then the keyed tag.
pub fn decode_tagged_frame(bytes: &[u8], key: &[u8]) -> Result<RemoteReport, FrameError> {
    if bytes.len() != FRAME_LEN_V2 {
        return Err(FrameError::Length {
            expected: FRAME_LEN_V2,
            actual: bytes.len(),
        });
    }
    let stored = u16::from_be_bytes(bytes[PAYLOAD_LEN + 4..].try_into().unwrap());
    if crc16_ccitt_false(&bytes[..PAYLOAD_LEN + 4]) != stored {
        return Err(FrameError::Integrity);
    }
    if bytes[0..2] != FRAME_MAGIC || bytes[2] != FRAME_VERSION_V2 {
        return Err(FrameError::Format);
    }
    if keyed_tag(key, &bytes[..PAYLOAD_LEN]) != bytes[PAYLOAD_LEN..PAYLOAD_LEN + 4] {
        return Err(FrameError::Integrity);
    }
    Ok(decode_payload(&bytes[..PAYLOAD_LEN]))
}
