//! Free-space RF propagation math: wavelength, Friis power ratio, received
//! power, capture decisions, and the safe-radius inversion.
//!
//! The capture criterion is relative: a spoofed signal captures a receiver
//! when its received power meets or exceeds the authentic signal's nominal
//! power plus a margin. [`safe_radius`] inverts the Friis equation to find
//! the distance beyond which a given transmitter can no longer capture.
//!
//! All powers are watts unless a name says dBm; gains are linear directivity
//! unless a name says dBi. Conversions for both are provided.
//!
//! # Example
//!
//! ```
//! use spoofwatch_core::rfmodel::{wavelength, LinkBudget, received_power, watts_to_dbm};
//!
//! let lambda = wavelength(1.57542e9).unwrap();
//! let budget = LinkBudget::new(0.035, 10.0, 10.0, lambda, 1609.34).unwrap();
//! let p = received_power(&budget);
//! assert!(watts_to_dbm(p) < -60.0);
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// GPS L1 carrier frequency, Hz.
pub const GPS_L1_FREQ_HZ: f64 = 1.57542e9;

/// Nominal authentic GPS signal power at a terrestrial receiver, dBm.
pub const DEFAULT_AUTHENTIC_POWER_DBM: f64 = -128.5;

/// Default margin by which a spoofed signal must exceed the authentic one
/// to capture the receiver, dB.
pub const DEFAULT_CAPTURE_MARGIN_DB: f64 = 3.0;

/// Domain errors for link-budget math.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RfError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, RfError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(RfError::NotPositive { name, value })
    }
}

fn require_non_negative(name: &'static str, value: f64) -> Result<f64, RfError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(RfError::Negative { name, value })
    }
}

// ---------------------------------------------------------------------------
// Unit conversions
// ---------------------------------------------------------------------------

/// Watts to dBm. Zero maps to negative infinity.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Antenna gain in dBi to linear directivity.
pub fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

/// Linear directivity to dBi.
pub fn linear_to_dbi(gain: f64) -> f64 {
    10.0 * gain.log10()
}

/// Carrier wavelength in meters: c/f.
///
/// Errors on non-positive or non-finite frequency.
pub fn wavelength(frequency_hz: f64) -> Result<f64, RfError> {
    require_positive("frequency_hz", frequency_hz)?;
    Ok(SPEED_OF_LIGHT_M_S / frequency_hz)
}

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// One free-space link: transmit power, antenna directivities, wavelength,
/// and distance. Construction validates that every field is finite and
/// strictly positive, so the propagation math below cannot hit a singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    tx_power_w: f64,
    tx_gain: f64,
    rx_gain: f64,
    wavelength_m: f64,
    distance_m: f64,
}

impl LinkBudget {
    /// New budget with linear gains.
    pub fn new(
        tx_power_w: f64,
        tx_gain: f64,
        rx_gain: f64,
        wavelength_m: f64,
        distance_m: f64,
    ) -> Result<Self, RfError> {
        Ok(Self {
            tx_power_w: require_positive("tx_power_w", tx_power_w)?,
            tx_gain: require_positive("tx_gain", tx_gain)?,
            rx_gain: require_positive("rx_gain", rx_gain)?,
            wavelength_m: require_positive("wavelength_m", wavelength_m)?,
            distance_m: require_positive("distance_m", distance_m)?,
        })
    }

    /// New budget with gains given in dBi.
    pub fn with_gains_dbi(
        tx_power_w: f64,
        tx_gain_dbi: f64,
        rx_gain_dbi: f64,
        wavelength_m: f64,
        distance_m: f64,
    ) -> Result<Self, RfError> {
        Self::new(
            tx_power_w,
            dbi_to_linear(tx_gain_dbi),
            dbi_to_linear(rx_gain_dbi),
            wavelength_m,
            distance_m,
        )
    }

    /// Same link re-evaluated at a different distance.
    pub fn at_distance(&self, distance_m: f64) -> Result<Self, RfError> {
        Self::new(
            self.tx_power_w,
            self.tx_gain,
            self.rx_gain,
            self.wavelength_m,
            distance_m,
        )
    }

    pub fn tx_power_w(&self) -> f64 {
        self.tx_power_w
    }

    pub fn tx_gain(&self) -> f64 {
        self.tx_gain
    }

    pub fn rx_gain(&self) -> f64 {
        self.rx_gain
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }
}

/// Friis free-space ratio P_r/P_t = D_t · D_r · (λ/(4πd))².
pub fn friis_ratio(budget: &LinkBudget) -> f64 {
    let geom = budget.wavelength_m / (4.0 * std::f64::consts::PI * budget.distance_m);
    budget.tx_gain * budget.rx_gain * geom * geom
}

/// Received power in watts: tx_power × friis_ratio.
pub fn received_power(budget: &LinkBudget) -> f64 {
    budget.tx_power_w * friis_ratio(budget)
}

/// Friis ratio of a template budget swept over `distances`, in input order.
/// The template's own distance is ignored. An empty sweep yields an empty
/// curve; a non-positive distance is an error.
pub fn power_curve(
    template: &LinkBudget,
    distances: &[f64],
) -> Result<Vec<(f64, f64)>, RfError> {
    distances
        .iter()
        .map(|&d| {
            let b = template.at_distance(d)?;
            Ok((d, friis_ratio(&b)))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Capture
// ---------------------------------------------------------------------------

/// Relative capture criterion: the spoofed signal captures a receiver when
/// its received power is at least `authentic_power_dbm + margin_db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureRule {
    pub authentic_power_dbm: f64,
    pub margin_db: f64,
}

impl CaptureRule {
    pub fn new(authentic_power_dbm: f64, margin_db: f64) -> Result<Self, RfError> {
        require_non_negative("margin_db", margin_db)?;
        if !authentic_power_dbm.is_finite() {
            return Err(RfError::Negative {
                name: "authentic_power_dbm",
                value: authentic_power_dbm,
            });
        }
        Ok(Self {
            authentic_power_dbm,
            margin_db,
        })
    }

    /// Spoofed received power (dBm) required to capture.
    pub fn threshold_dbm(&self) -> f64 {
        self.authentic_power_dbm + self.margin_db
    }

    pub fn validate(&self) -> Result<(), RfError> {
        Self::new(self.authentic_power_dbm, self.margin_db).map(|_| ())
    }
}

impl Default for CaptureRule {
    fn default() -> Self {
        Self {
            authentic_power_dbm: DEFAULT_AUTHENTIC_POWER_DBM,
            margin_db: DEFAULT_CAPTURE_MARGIN_DB,
        }
    }
}

/// Which signal a receiver is locked to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureState {
    Authentic,
    Spoofed,
}

impl CaptureState {
    pub fn from_captured(captured: bool) -> Self {
        if captured {
            CaptureState::Spoofed
        } else {
            CaptureState::Authentic
        }
    }

    pub fn is_spoofed(&self) -> bool {
        matches!(self, CaptureState::Spoofed)
    }
}

/// True iff the spoofed power meets the capture threshold (inclusive).
/// NaN input never captures.
pub fn is_captured(spoof_power_dbm: f64, rule: &CaptureRule) -> bool {
    spoof_power_dbm >= rule.threshold_dbm()
}

/// Maximum distance at which a transmitter with the given EIRP parameters
/// still captures a receiver under `rule`; beyond it, `is_captured` on the
/// received power is false. Closed-form inversion of the Friis equation for
/// P_r(d*) = threshold.
pub fn safe_radius(
    tx_power_w: f64,
    tx_gain: f64,
    rx_gain: f64,
    wavelength_m: f64,
    rule: &CaptureRule,
) -> Result<f64, RfError> {
    require_positive("tx_power_w", tx_power_w)?;
    require_positive("tx_gain", tx_gain)?;
    require_positive("rx_gain", rx_gain)?;
    require_positive("wavelength_m", wavelength_m)?;
    rule.validate()?;
    let threshold_w = dbm_to_watts(rule.threshold_dbm());
    let d = wavelength_m / (4.0 * std::f64::consts::PI)
        * (tx_power_w * tx_gain * rx_gain / threshold_w).sqrt();
    Ok(d)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
