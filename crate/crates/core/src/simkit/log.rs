//! Run output: one record per tick, a JSON Lines writer, and a roll-up
//! summary with the numbers a reader checks first (detection latency,
//! worst phase error, corrected-time accuracy).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::detector::{Verdict, VerdictState};
use crate::rfmodel::CaptureState;

/// What one remote unit saw and reported during a tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTickRecord {
    pub unit_id: u8,
    pub capture: CaptureState,
    /// Telemetry link strength at the collector, dBm.
    pub rssi_dbm: f64,
    /// Whether the frame cleared the collector's sensitivity floor.
    pub delivered: bool,
    /// UTC the unit reported, ms; absent when the frame never arrived.
    pub report_utc_ms: Option<u64>,
}

/// Everything the simulation knows about one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Reference wall clock, ms since the simulation epoch start.
    pub true_utc_ms: u64,
    /// Counterfeit power arriving at the PMU, dBm; absent while the
    /// transmitter is off the air.
    pub spoof_power_dbm: Option<f64>,
    pub pmu_capture: CaptureState,
    pub pmu_utc_ms: u64,
    /// Synchrophasor angle error the PMU's clock offset produces, degrees.
    pub phase_angle_error_deg: f64,
    /// Whether that error trips the standing angle alarm.
    pub phase_alarm: bool,
    pub units: Vec<UnitTickRecord>,
    pub verdict: Verdict,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub schema: u32,
    pub ticks: Vec<TickRecord>,
}

/// Roll-up counters for a whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub ticks: u64,
    pub attack_ticks: u64,
    pub no_attack_ticks: u64,
    pub inconclusive_ticks: u64,
    /// First tick the PMU fell to the counterfeit signal.
    pub pmu_capture_onset: Option<u64>,
    /// First tick the vote called the attack.
    pub first_detection_tick: Option<u64>,
    pub max_phase_angle_error_deg: f64,
    /// Worst |corrected - true| over ticks that produced a correction, ms.
    pub max_corrected_time_error_ms: Option<u64>,
    /// Ticks where the vote saw an attack while the PMU itself still held
    /// the authentic signal (the units were hit, not the PMU).
    pub pmu_consistent_minority_ticks: u64,
}

impl EventLog {
    /// Write one JSON object per tick, newline-delimited.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for tick in &self.ticks {
            serde_json::to_writer(&mut out, tick)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reduce the log to its headline numbers.
    pub fn summary(&self) -> RunSummary {
        let mut summary = RunSummary {
            schema: self.schema,
            ticks: self.ticks.len() as u64,
            attack_ticks: 0,
            no_attack_ticks: 0,
            inconclusive_ticks: 0,
            pmu_capture_onset: None,
            first_detection_tick: None,
            max_phase_angle_error_deg: 0.0,
            max_corrected_time_error_ms: None,
            pmu_consistent_minority_ticks: 0,
        };
        for tick in &self.ticks {
            match tick.verdict.state {
                VerdictState::AttackDetected => summary.attack_ticks += 1,
                VerdictState::NoAttackDetected => summary.no_attack_ticks += 1,
                VerdictState::Inconclusive => summary.inconclusive_ticks += 1,
            }
            if tick.pmu_capture.is_spoofed() && summary.pmu_capture_onset.is_none() {
                summary.pmu_capture_onset = Some(tick.tick);
            }
            if tick.verdict.state == VerdictState::AttackDetected {
                if summary.first_detection_tick.is_none() {
                    summary.first_detection_tick = Some(tick.tick);
                }
                if !tick.pmu_capture.is_spoofed() {
                    summary.pmu_consistent_minority_ticks += 1;
                }
            }
            let angle = tick.phase_angle_error_deg.abs();
            if angle > summary.max_phase_angle_error_deg {
                summary.max_phase_angle_error_deg = angle;
            }
            if let Some(corrected) = tick.verdict.corrected_time_ms {
                let err = corrected.abs_diff(tick.true_utc_ms);
                summary.max_corrected_time_error_ms =
                    Some(summary.max_corrected_time_error_ms.unwrap_or(0).max(err));
            }
        }
        summary
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::SCENARIO_SCHEMA;

    fn tick(n: u64, pmu_spoofed: bool, state: VerdictState, corrected: Option<u64>) -> TickRecord {
        TickRecord {
            tick: n,
            true_utc_ms: 1_000 + n,
            spoof_power_dbm: None,
            pmu_capture: CaptureState::from_captured(pmu_spoofed),
            pmu_utc_ms: 1_000 + n,
            phase_angle_error_deg: if pmu_spoofed { -152.28 } else { 0.0 },
            phase_alarm: pmu_spoofed,
            units: Vec::new(),
            verdict: Verdict {
                state,
                disagreeing_units: Vec::new(),
                corrected_time_ms: corrected,
            },
        }
    }

    // ---- summary tests ----

    #[test]
    fn summary_counts_states_and_finds_onsets() {
        let log = EventLog {
            schema: SCENARIO_SCHEMA,
            ticks: vec![
                tick(0, false, VerdictState::NoAttackDetected, None),
                tick(1, false, VerdictState::Inconclusive, None),
                tick(2, true, VerdictState::AttackDetected, Some(1_002)),
                tick(3, true, VerdictState::AttackDetected, Some(1_008)),
            ],
        };
        let s = log.summary();
        assert_eq!(s.ticks, 4);
        assert_eq!(s.attack_ticks, 2);
        assert_eq!(s.no_attack_ticks, 1);
        assert_eq!(s.inconclusive_ticks, 1);
        assert_eq!(s.pmu_capture_onset, Some(2));
        assert_eq!(s.first_detection_tick, Some(2));
        assert!((s.max_phase_angle_error_deg - 152.28).abs() < 1e-12);
        assert_eq!(s.max_corrected_time_error_ms, Some(5));
        assert_eq!(s.pmu_consistent_minority_ticks, 0);
    }

    #[test]
    fn summary_flags_detections_that_spare_the_pmu() {
        let log = EventLog {
            schema: SCENARIO_SCHEMA,
            ticks: vec![tick(0, false, VerdictState::AttackDetected, None)],
        };
        let s = log.summary();
        assert_eq!(s.pmu_capture_onset, None);
        assert_eq!(s.first_detection_tick, Some(0));
        assert_eq!(s.pmu_consistent_minority_ticks, 1);
        assert_eq!(s.max_corrected_time_error_ms, None);
    }

    #[test]
    fn empty_log_summarizes_to_zeroes() {
        let log = EventLog {
            schema: SCENARIO_SCHEMA,
            ticks: Vec::new(),
        };
        let s = log.summary();
        assert_eq!(s.ticks, 0);
        assert_eq!(s.pmu_capture_onset, None);
        assert_eq!(s.max_phase_angle_error_deg, 0.0);
    }

    // ---- serialization tests ----

    #[test]
    fn jsonl_output_is_one_parseable_object_per_tick() {
        let log = EventLog {
            schema: SCENARIO_SCHEMA,
            ticks: vec![
                tick(0, false, VerdictState::NoAttackDetected, None),
                tick(1, true, VerdictState::AttackDetected, Some(1_001)),
            ],
        };
        let mut buf = Vec::new();
        log.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        for (record, line) in log.ticks.iter().zip(&lines) {
            let back: TickRecord = serde_json::from_str(line).unwrap();
            assert_eq!(&back, record);
        }
    }
}
