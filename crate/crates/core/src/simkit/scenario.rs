//! Scenario description: site geometry, the attacker's transmit profile,
//! capture and vote rules, and run-level knobs. Scenarios serialize to
//! JSON under a versioned schema so runs are reproducible from a file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{ComparisonConfig, DetectorError};
use crate::geo::{destination, planar_distance_m};
use crate::rfmodel::{CaptureRule, RfError};
use crate::signal::SignalError;
use crate::telemetry::FrameError;

/// Scenario format version this build reads.
pub const SCENARIO_SCHEMA: u32 = 1;

/// Remote-unit distance used by the default placement, meters (one mile).
pub const DEFAULT_UNIT_RADIUS_M: f64 = 1609.34;

/// Anything that can stop a scenario from loading or running.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unsupported scenario schema {0}; this build reads schema {SCENARIO_SCHEMA}")]
    UnsupportedSchema(u32),
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
    #[error(transparent)]
    Rf(#[from] RfError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// One remote unit, placed on a bearing and radius from the PMU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitPlacement {
    pub unit_id: u8,
    /// Degrees clockwise from north, in [0, 360).
    pub bearing_deg: f64,
    /// Meters from the PMU; must exceed the spoofer's effective radius for
    /// the vote to work.
    pub radius_m: f64,
}

/// Where everything sits. Coordinates are (latitude, longitude) degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Placement {
    pub pmu: (f64, f64),
    pub units: Vec<UnitPlacement>,
    pub spoofer: (f64, f64),
}

impl Default for Placement {
    /// Three units one mile out at bearings 0, 120, and 240, and a spoofer
    /// ten meters east of the PMU.
    fn default() -> Self {
        let pmu = (39.9526, -75.1652);
        let units = [0.0, 120.0, 240.0]
            .iter()
            .enumerate()
            .map(|(i, &bearing_deg)| UnitPlacement {
                unit_id: i as u8 + 1,
                bearing_deg,
                radius_m: DEFAULT_UNIT_RADIUS_M,
            })
            .collect();
        Self {
            pmu,
            units,
            spoofer: destination(pmu, 90.0, 10.0),
        }
    }
}

impl Placement {
    /// Ground position of one unit.
    pub fn unit_position(&self, unit: &UnitPlacement) -> (f64, f64) {
        destination(self.pmu, unit.bearing_deg, unit.radius_m)
    }
}

/// What the attacker transmits over time. Powers are watts at the
/// spoofer's antenna; `tx_gain` is linear. `spoof_offset_s` is the clock
/// falsification a captured receiver inherits, and `spoof_position` (when
/// present) the counterfeit position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackProfile {
    /// No transmitter at all.
    None,
    /// Full power from `start_tick` onward.
    BruteForce {
        start_tick: u64,
        tx_power_w: f64,
        tx_gain: f64,
        spoof_offset_s: f64,
        spoof_position: Option<(f64, f64)>,
    },
    /// Power grows linearly from `start_power_w` by `ramp_w_per_tick`
    /// each tick after `start_tick`, clamped at `cap_w`.
    GradualRamp {
        start_tick: u64,
        start_power_w: f64,
        ramp_w_per_tick: f64,
        cap_w: f64,
        tx_gain: f64,
        spoof_offset_s: f64,
        spoof_position: Option<(f64, f64)>,
    },
}

impl AttackProfile {
    /// Transmit power at `tick`, watts. Zero while off the air.
    pub fn power_at(&self, tick: u64) -> f64 {
        match self {
            AttackProfile::None => 0.0,
            AttackProfile::BruteForce {
                start_tick,
                tx_power_w,
                ..
            } => {
                if tick >= *start_tick {
                    *tx_power_w
                } else {
                    0.0
                }
            }
            AttackProfile::GradualRamp {
                start_tick,
                start_power_w,
                ramp_w_per_tick,
                cap_w,
                ..
            } => {
                if tick >= *start_tick {
                    (start_power_w + ramp_w_per_tick * (tick - start_tick) as f64).min(*cap_w)
                } else {
                    0.0
                }
            }
        }
    }

    /// Linear antenna gain of the spoofer (1.0 when off the air).
    pub fn tx_gain(&self) -> f64 {
        match self {
            AttackProfile::None => 1.0,
            AttackProfile::BruteForce { tx_gain, .. }
            | AttackProfile::GradualRamp { tx_gain, .. } => *tx_gain,
        }
    }

    /// Clock falsification carried by the counterfeit signal, seconds.
    pub fn spoof_offset_s(&self) -> f64 {
        match self {
            AttackProfile::None => 0.0,
            AttackProfile::BruteForce { spoof_offset_s, .. }
            | AttackProfile::GradualRamp { spoof_offset_s, .. } => *spoof_offset_s,
        }
    }

    /// Counterfeit position, when the attack carries one.
    pub fn spoof_position(&self) -> Option<(f64, f64)> {
        match self {
            AttackProfile::None => None,
            AttackProfile::BruteForce { spoof_position, .. }
            | AttackProfile::GradualRamp { spoof_position, .. } => *spoof_position,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let bad = |msg| Err(SimError::InvalidScenario(msg));
        let check_common = |gain: f64, offset: f64, pos: Option<(f64, f64)>| {
            if !(gain.is_finite() && gain > 0.0) {
                return bad("tx_gain must be positive and finite");
            }
            if !offset.is_finite() {
                return bad("spoof_offset_s must be finite");
            }
            if let Some(p) = pos {
                check_coordinates("spoof_position", p)?;
            }
            Ok(())
        };
        match self {
            AttackProfile::None => Ok(()),
            AttackProfile::BruteForce {
                tx_power_w,
                tx_gain,
                spoof_offset_s,
                spoof_position,
                ..
            } => {
                if !(tx_power_w.is_finite() && *tx_power_w >= 0.0) {
                    return bad("tx_power_w must be non-negative and finite");
                }
                check_common(*tx_gain, *spoof_offset_s, *spoof_position)
            }
            AttackProfile::GradualRamp {
                start_power_w,
                ramp_w_per_tick,
                cap_w,
                tx_gain,
                spoof_offset_s,
                spoof_position,
                ..
            } => {
                if !(start_power_w.is_finite() && *start_power_w >= 0.0) {
                    return bad("start_power_w must be non-negative and finite");
                }
                if !(ramp_w_per_tick.is_finite() && *ramp_w_per_tick >= 0.0) {
                    return bad("ramp_w_per_tick must be non-negative and finite");
                }
                if !(cap_w.is_finite() && *cap_w >= 0.0) {
                    return bad("cap_w must be non-negative and finite");
                }
                check_common(*tx_gain, *spoof_offset_s, *spoof_position)
            }
        }
    }
}

fn check_coordinates(name: &'static str, (lat, lon): (f64, f64)) -> Result<(), SimError> {
    if !(lat.is_finite() && lat.abs() <= 90.0 && lon.is_finite() && lon.abs() <= 180.0) {
        // The name survives as the error text; positions come from few
        // enough places that this is unambiguous.
        return Err(SimError::InvalidScenario(name));
    }
    Ok(())
}

/// How capture is decided each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Compare received spoof power against the capture threshold.
    #[default]
    PowerLevel,
    /// Synthesize both signals at each receiver and let correlation
    /// acquisition pick the winner.
    SignalLevel,
}

/// A complete, serializable description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Must be [`SCENARIO_SCHEMA`]; files without it do not load.
    pub schema: u32,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default = "default_profile")]
    pub profile: AttackProfile,
    #[serde(default)]
    pub capture_rule: CaptureRule,
    #[serde(default)]
    pub comparison: ComparisonConfig,
    #[serde(default = "default_ticks")]
    pub ticks: u64,
    #[serde(default = "default_tick_seconds")]
    pub tick_seconds: f64,
    #[serde(default = "default_system_freq_hz")]
    pub system_freq_hz: f64,
    #[serde(default)]
    pub mode: SimMode,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

/// A brute-force spoofer sized to capture the PMU from ten meters while
/// staying far under the threshold at units a mile out, walking the clock
/// 7.05 ms.
fn default_profile() -> AttackProfile {
    AttackProfile::BruteForce {
        start_tick: 100,
        tx_power_w: 2.0e-6,
        tx_gain: 1.0,
        spoof_offset_s: 0.00705,
        spoof_position: None,
    }
}

fn default_ticks() -> u64 {
    300
}

fn default_tick_seconds() -> f64 {
    1.0
}

fn default_system_freq_hz() -> f64 {
    60.0
}

fn default_seed() -> u64 {
    1
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            schema: SCENARIO_SCHEMA,
            placement: Placement::default(),
            profile: default_profile(),
            capture_rule: CaptureRule::default(),
            comparison: ComparisonConfig::default(),
            ticks: default_ticks(),
            tick_seconds: default_tick_seconds(),
            system_freq_hz: default_system_freq_hz(),
            mode: SimMode::default(),
            seed: default_seed(),
        }
    }
}

impl Scenario {
    /// Check every field the engine relies on. [`crate::simkit::run`] calls
    /// this first, so a scenario that loads and validates also runs.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(SimError::UnsupportedSchema(self.schema));
        }
        if self.ticks == 0 {
            return Err(SimError::InvalidScenario("ticks must be at least 1"));
        }
        if !(self.tick_seconds.is_finite() && self.tick_seconds > 0.0) {
            return Err(SimError::InvalidScenario(
                "tick_seconds must be positive and finite",
            ));
        }
        if !(self.system_freq_hz.is_finite() && self.system_freq_hz > 0.0) {
            return Err(SimError::InvalidScenario(
                "system_freq_hz must be positive and finite",
            ));
        }
        check_coordinates("placement.pmu", self.placement.pmu)?;
        check_coordinates("placement.spoofer", self.placement.spoofer)?;
        if self.placement.units.is_empty() {
            return Err(SimError::InvalidScenario("placement needs at least one unit"));
        }
        let mut ids: Vec<u8> = self.placement.units.iter().map(|u| u.unit_id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.placement.units.len() {
            return Err(SimError::InvalidScenario("unit ids must be unique"));
        }
        for unit in &self.placement.units {
            if !(unit.radius_m.is_finite() && unit.radius_m > 0.0) {
                return Err(SimError::InvalidScenario(
                    "unit radius_m must be positive and finite",
                ));
            }
            if !(unit.bearing_deg.is_finite()
                && (0.0..360.0).contains(&unit.bearing_deg))
            {
                return Err(SimError::InvalidScenario(
                    "unit bearing_deg must lie in [0, 360)",
                ));
            }
        }
        // The propagation model needs strictly positive path lengths.
        if planar_distance_m(self.placement.spoofer, self.placement.pmu) <= 0.0 {
            return Err(SimError::InvalidScenario(
                "spoofer must not sit exactly on the PMU",
            ));
        }
        for unit in &self.placement.units {
            let pos = self.placement.unit_position(unit);
            if planar_distance_m(self.placement.spoofer, pos) <= 0.0 {
                return Err(SimError::InvalidScenario(
                    "spoofer must not sit exactly on a unit",
                ));
            }
        }
        self.profile.validate()?;
        self.capture_rule.validate()?;
        self.comparison.validate()?;
        Ok(())
    }
}
