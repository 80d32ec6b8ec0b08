//! Majority-vote spoofing detection: compare the PMU's time source against
//! reports from GPS units placed outside the spoofer's effective radius,
//! and declare an attack when a quorum of them disagrees with the PMU.
//!
//! A spoofer that captures the PMU cannot also capture units a mile away
//! without a large power increase, so the disagreeing units carry the
//! authentic time and the vote both detects the attack and recovers a
//! corrected timestamp.
//!
//! # Example
//!
//! ```
//! use spoofwatch_core::detector::{
//!     majority_vote, ComparisonConfig, PmuObservation, UnitObservation, VerdictState,
//! };
//!
//! let pmu = PmuObservation {
//!     utc_time_ms: 1_000_007,
//!     position: (39.9526, -75.1652),
//! };
//! // The PMU clock runs 7 ms ahead of the units: both disagree.
//! let units = vec![
//!     UnitObservation::received(1, 1_000_000, 39.9526, -75.1652),
//!     UnitObservation::received(2, 1_000_001, 39.9526, -75.1652),
//! ];
//! let verdict = majority_vote(&pmu, &units, &ComparisonConfig::default());
//! assert_eq!(verdict.state, VerdictState::AttackDetected);
//! assert_eq!(verdict.corrected_time_ms, Some(1_000_000));
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::planar_distance_m;

/// Tolerances and quorum rules for the vote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    /// A unit agrees in time when its UTC differs from the PMU's by at most
    /// this many milliseconds.
    pub time_tolerance_ms: u64,
    /// A unit agrees in position when it is within this many meters of
    /// where it is expected to be.
    pub position_tolerance_m: f64,
    /// Disagreeing units needed to declare an attack.
    pub quorum: usize,
    /// Reporting units needed for any verdict besides attack; below this
    /// the vote is inconclusive.
    pub min_reporting_units: usize,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            time_tolerance_ms: 5,
            position_tolerance_m: 100.0,
            quorum: 2,
            min_reporting_units: 2,
        }
    }
}

/// Rejected [`ComparisonConfig`] values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectorError {
    #[error("invalid comparison config: {0}")]
    InvalidConfig(&'static str),
}

impl ComparisonConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.quorum == 0 {
            return Err(DetectorError::InvalidConfig("quorum must be at least 1"));
        }
        if self.min_reporting_units == 0 {
            return Err(DetectorError::InvalidConfig(
                "min_reporting_units must be at least 1",
            ));
        }
        if !(self.position_tolerance_m.is_finite() && self.position_tolerance_m >= 0.0) {
            return Err(DetectorError::InvalidConfig(
                "position_tolerance_m must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// The PMU side of the comparison: its time source and surveyed position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmuObservation {
    pub utc_time_ms: u64,
    /// (latitude, longitude), degrees.
    pub position: (f64, f64),
}

/// The fields of a unit report the vote reads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitData {
    pub utc_time_ms: u64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

/// One unit's contribution for one tick: its id, where it is surveyed to
/// sit (when known), and whatever report arrived, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitObservation {
    pub unit_id: u8,
    /// Surveyed position the report is checked against. When absent the
    /// PMU position is used, which suits co-located installations.
    pub expected_position: Option<(f64, f64)>,
    pub data: Option<UnitData>,
}

impl UnitObservation {
    /// A report that arrived.
    pub fn received(unit_id: u8, utc_time_ms: u64, latitude_deg: f64, longitude_deg: f64) -> Self {
        Self {
            unit_id,
            expected_position: None,
            data: Some(UnitData {
                utc_time_ms,
                latitude_deg,
                longitude_deg,
            }),
        }
    }

    /// A unit that sent nothing (or nothing decodable) this tick.
    pub fn missing(unit_id: u8) -> Self {
        Self {
            unit_id,
            expected_position: None,
            data: None,
        }
    }

    /// Attach the surveyed position the report should match.
    pub fn with_expected_position(mut self, position: (f64, f64)) -> Self {
        self.expected_position = Some(position);
        self
    }
}

/// How one unit relates to the PMU this tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    NoData,
}

/// Compare one unit report against the PMU: time within tolerance and
/// position within tolerance of the expected location. Both tolerances are
/// inclusive.
pub fn compare_unit(
    pmu: &PmuObservation,
    unit: &UnitObservation,
    config: &ComparisonConfig,
) -> Agreement {
    let Some(data) = &unit.data else {
        return Agreement::NoData;
    };
    if data.utc_time_ms.abs_diff(pmu.utc_time_ms) > config.time_tolerance_ms {
        return Agreement::Disagree;
    }
    let reference = unit.expected_position.unwrap_or(pmu.position);
    let distance = planar_distance_m((data.latitude_deg, data.longitude_deg), reference);
    if distance > config.position_tolerance_m {
        return Agreement::Disagree;
    }
    Agreement::Agree
}

/// Outcome of one vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictState {
    NoAttackDetected,
    AttackDetected,
    Inconclusive,
}

/// The vote's conclusion plus its evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub state: VerdictState,
    /// Units that disagreed with the PMU, sorted by id.
    pub disagreeing_units: Vec<u8>,
    /// Consensus UTC recovered from the disagreeing units, when they agree
    /// with each other well enough to trust.
    pub corrected_time_ms: Option<u64>,
}

/// Vote unit reports against the PMU.
///
/// An attack is declared as soon as at least `quorum` units disagree, even
/// when too few units report for a clean all-clear; with fewer disagreeing
/// units the verdict is inconclusive unless `min_reporting_units` reports
/// arrived. The corrected time is the lower-middle median of the largest
/// mutually-agreeing cluster (pairwise within the time tolerance) among the
/// disagreeing units, provided that cluster reaches the quorum on its own.
pub fn majority_vote(
    pmu: &PmuObservation,
    units: &[UnitObservation],
    config: &ComparisonConfig,
) -> Verdict {
    let mut disagreeing = Vec::new();
    let mut disagreeing_times = Vec::new();
    let mut reporting = 0usize;
    for unit in units {
        match compare_unit(pmu, unit, config) {
            Agreement::NoData => {}
            Agreement::Agree => reporting += 1,
            Agreement::Disagree => {
                reporting += 1;
                disagreeing.push(unit.unit_id);
                disagreeing_times.push(unit.data.as_ref().unwrap().utc_time_ms);
            }
        }
    }
    disagreeing.sort_unstable();

    if disagreeing.len() >= config.quorum {
        return Verdict {
            state: VerdictState::AttackDetected,
            corrected_time_ms: consensus_time(
                &mut disagreeing_times,
                config.time_tolerance_ms,
                config.quorum,
            ),
            disagreeing_units: disagreeing,
        };
    }
    let state = if reporting < config.min_reporting_units {
        VerdictState::Inconclusive
    } else {
        VerdictState::NoAttackDetected
    };
    Verdict {
        state,
        disagreeing_units: disagreeing,
        corrected_time_ms: None,
    }
}

/// Lower-middle median of the largest cluster of times spanning at most
/// `tolerance_ms`; ties go to the earliest cluster. `None` when no cluster
/// reaches `quorum`.
fn consensus_time(times: &mut Vec<u64>, tolerance_ms: u64, quorum: usize) -> Option<u64> {
    times.sort_unstable();
    let mut best: Option<(usize, usize)> = None;
    let mut lo = 0usize;
    for hi in 0..times.len() {
        while times[hi] - times[lo] > tolerance_ms {
            lo += 1;
        }
        let len = hi - lo + 1;
        if best.map_or(true, |(bl, bh)| len > bh - bl + 1) {
            best = Some((lo, hi));
        }
    }
    let (lo, hi) = best?;
    if hi - lo + 1 < quorum {
        return None;
    }
    Some(times[lo + (hi - lo) / 2])
}

/// One tick's verdict in a serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub tick: u64,
    pub state: VerdictState,
    pub disagreeing_units: Vec<u8>,
    pub corrected_time_ms: Option<u64>,
}

/// Run the vote over a sequence of ticks.
pub fn verdict_stream<I>(ticks: I, config: &ComparisonConfig) -> Vec<VerdictRecord>
where
    I: IntoIterator<Item = (PmuObservation, Vec<UnitObservation>)>,
{
    ticks
        .into_iter()
        .enumerate()
        .map(|(tick, (pmu, units))| {
            let verdict = majority_vote(&pmu, &units, config);
            VerdictRecord {
                tick: tick as u64,
                state: verdict.state,
                disagreeing_units: verdict.disagreeing_units,
                corrected_time_ms: verdict.corrected_time_ms,
            }
        })
        .collect()
}
