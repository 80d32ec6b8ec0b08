//! Consequence model for PMU timing errors: a clock offset shifts every
//! measured phasor by 360·f·offset degrees, and the two-bus power-transfer
//! relation turns that angle error into an active-power error.
//!
//! Angles wrap to (−180, +180], with +180 kept at the boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default grid frequency, Hz.
pub const DEFAULT_SYSTEM_FREQ_HZ: f64 = 60.0;

/// Phase-angle difference between buses above which load shedding or other
/// protective action is assumed to trip, degrees.
pub const DEFAULT_ANGLE_ALARM_DEG: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhasorError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
}

/// Wrap an angle in degrees to (−180, +180]. +180 maps to itself.
pub fn wrap_angle_deg(angle_deg: f64) -> f64 {
    let r = angle_deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Phase-angle error caused by a receiver clock offset: 360·f·offset,
/// wrapped to (−180, +180]. A clock offset of one full period is invisible.
pub fn offset_to_angle(clock_offset_s: f64, system_freq_hz: f64) -> f64 {
    wrap_angle_deg(360.0 * system_freq_hz * clock_offset_s)
}

/// Two buses joined by a line of series reactance, with per-unit voltage
/// magnitudes and the angle between their phasors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasorLink {
    v_send: f64,
    v_recv: f64,
    reactance: f64,
    angle_diff_deg: f64,
}

impl PhasorLink {
    pub fn new(
        v_send: f64,
        v_recv: f64,
        reactance: f64,
        angle_diff_deg: f64,
    ) -> Result<Self, PhasorError> {
        for (name, value) in [("v_send", v_send), ("v_recv", v_recv)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(PhasorError::Negative { name, value });
            }
        }
        if !(reactance.is_finite() && reactance > 0.0) {
            return Err(PhasorError::NotPositive {
                name: "reactance",
                value: reactance,
            });
        }
        if !angle_diff_deg.is_finite() {
            return Err(PhasorError::Negative {
                name: "angle_diff_deg",
                value: angle_diff_deg,
            });
        }
        Ok(Self {
            v_send,
            v_recv,
            reactance,
            angle_diff_deg,
        })
    }

    pub fn v_send(&self) -> f64 {
        self.v_send
    }

    pub fn v_recv(&self) -> f64 {
        self.v_recv
    }

    pub fn reactance(&self) -> f64 {
        self.reactance
    }

    pub fn angle_diff_deg(&self) -> f64 {
        self.angle_diff_deg
    }

    /// Same link at a different angle difference.
    pub fn at_angle(&self, angle_diff_deg: f64) -> Result<Self, PhasorError> {
        Self::new(self.v_send, self.v_recv, self.reactance, angle_diff_deg)
    }
}

/// Active power transferred between the buses, per unit:
/// (V_S·V_R/X_L)·sin δ.
pub fn active_power(link: &PhasorLink) -> f64 {
    link.v_send * link.v_recv / link.reactance * link.angle_diff_deg.to_radians().sin()
}

/// True iff the wrapped angle error strictly exceeds the threshold in
/// magnitude. An error of exactly the threshold does not alarm.
pub fn angle_alarm(angle_error_deg: f64, threshold_deg: f64) -> bool {
    wrap_angle_deg(angle_error_deg).abs() > threshold_deg
}
