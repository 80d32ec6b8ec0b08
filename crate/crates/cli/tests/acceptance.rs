//! Acceptance gate: the nine checks this toolkit must pass before a
//! release. Each test states its tolerance inline, checks it against an
//! independent computation where one exists, and prints one PASS line
//! (visible with `cargo test -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use spoofwatch_core::detector::{
    verdict_stream, ComparisonConfig, PmuObservation, UnitObservation, VerdictState,
};
use spoofwatch_core::detector::majority_vote;
use spoofwatch_core::phasor::{angle_alarm, offset_to_angle};
use spoofwatch_core::rfmodel::{safe_radius, wavelength, CaptureRule, GPS_L1_FREQ_HZ};
use spoofwatch_core::signal::{
    acquire_grid, generate_ca_code, lock_decision, synthesize, LockOutcome, SignalSource,
    CA_CODE_LEN, DEFAULT_IF_HZ, DEFAULT_LOCK_THRESHOLD, DEFAULT_SAMPLE_RATE_HZ,
};
use spoofwatch_core::simkit::{run, Scenario};
use spoofwatch_core::telemetry::{
    crc16_ccitt_false, decode_frame, encode_frame, FrameError, GpsFix, RemoteReport,
};

// ---- criterion 1: carrier wavelength ----

#[test]
fn criterion_1_l1_wavelength() {
    let w = wavelength(1.57542e9).unwrap();
    assert!((w - 0.190).abs() <= 0.0005, "{w}");
    println!("acceptance criterion 1: PASS (wavelength(1575.42 MHz) = {w:.6} m, within 0.190 +/- 0.0005)");
}

// ---- criterion 2: free-space power curve from the binary ----

#[test]
fn criterion_2_power_curve_binary() {
    let output = Command::new(env!("CARGO_BIN_EXE_spoofwatch"))
        .arg("curve")
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("distance_m,ratio"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (d, r) = l.split_once(',').unwrap();
            (d.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 201);
    for pair in rows.windows(2) {
        assert!(pair[1].1 < pair[0].1, "ratio must strictly decrease");
    }
    // Inverse square: ratio times distance squared is constant.
    let k0 = rows[0].1 * rows[0].0 * rows[0].0;
    for (d, r) in &rows {
        assert!((r * d * d - k0).abs() / k0 < 1e-9);
    }
    let (d, ratio) = rows
        .iter()
        .copied()
        .min_by(|a, b| {
            (a.0 - 1609.34).abs().partial_cmp(&(b.0 - 1609.34).abs()).unwrap()
        })
        .unwrap();
    assert!((d - 1609.34).abs() < 0.01, "{d}");
    assert!((ratio - 8.85e-9).abs() / 8.85e-9 < 0.01, "{ratio}");
    println!(
        "acceptance criterion 2: PASS (curve strictly decreasing, ratio at {d:.2} m = {ratio:.4e}, within 1% of 8.85e-9)"
    );
}

// ---- criterion 3: clock offset to phasor angle ----

#[test]
fn criterion_3_offset_angle_and_alarm() {
    let angle = offset_to_angle(0.00705, 60.0);
    assert!((angle - 152.28).abs() <= 0.01, "{angle}");
    assert!((angle - 150.0).abs() <= 3.0, "{angle}");
    assert!(angle_alarm(angle, 7.0));
    println!(
        "acceptance criterion 3: PASS (7.05 ms at 60 Hz = {angle:.2} deg, within 152.28 +/- 0.01; 7 deg alarm fires)"
    );
}

// ---- criterion 4: three-unit vote truth table ----

#[test]
fn criterion_4_vote_truth_table() {
    let config = ComparisonConfig::default();
    assert_eq!(config.quorum, 2);
    let base = 1_000_000u64;
    let here = (39.9526, -75.1652);
    let pmu = |utc| PmuObservation { utc_time_ms: utc, position: here };
    let unit = |id, utc| UnitObservation::received(id, utc, here.0, here.1);

    // Everyone authentic: all clear.
    let v = majority_vote(&pmu(base), &[unit(1, base), unit(2, base), unit(3, base)], &config);
    assert_eq!(v.state, VerdictState::NoAttackDetected);
    assert!(v.disagreeing_units.is_empty());
    assert_eq!(v.corrected_time_ms, None);

    // PMU captured, all units clean: detected and corrected.
    let v = majority_vote(&pmu(base + 7), &[unit(1, base), unit(2, base), unit(3, base)], &config);
    assert_eq!(v.state, VerdictState::AttackDetected);
    assert_eq!(v.disagreeing_units, vec![1, 2, 3]);
    assert_eq!(v.corrected_time_ms, Some(base));

    // PMU and one unit captured together: the clean pair still wins.
    let v = majority_vote(
        &pmu(base + 7),
        &[unit(1, base + 7), unit(2, base), unit(3, base)],
        &config,
    );
    assert_eq!(v.state, VerdictState::AttackDetected);
    assert_eq!(v.disagreeing_units, vec![2, 3]);
    assert_eq!(v.corrected_time_ms, Some(base));

    println!("acceptance criterion 4: PASS (three-unit vote truth table, default config, exact)");
}

// ---- criterion 5: spreading-code correlation bounds ----

fn circular_corr(a: &[i8; CA_CODE_LEN], b: &[i8; CA_CODE_LEN], lag: usize) -> i32 {
    let mut sum = 0i32;
    for i in 0..CA_CODE_LEN {
        sum += a[i] as i32 * b[(i + lag) % CA_CODE_LEN] as i32;
    }
    sum
}

#[test]
fn criterion_5_code_correlation_bounds() {
    let start = Instant::now();
    let pairs = [(1u8, 2u8), (3, 4), (5, 6), (7, 8), (9, 10), (20, 32)];
    for (p, q) in pairs {
        let a = generate_ca_code(p).unwrap();
        let b = generate_ca_code(q).unwrap();
        assert_eq!(circular_corr(a.chips(), a.chips(), 0), 1023);
        assert_eq!(circular_corr(b.chips(), b.chips(), 0), 1023);
        for lag in 0..CA_CODE_LEN {
            let c = circular_corr(a.chips(), b.chips(), lag);
            assert!(
                c == -65 || c == -1 || c == 63,
                "PRN {p} x PRN {q} lag {lag}: {c}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    println!(
        "acceptance criterion 5: PASS ({} pairs: autocorrelation 1023, cross in {{-65,-1,63}} at all lags, {elapsed:?})",
        pairs.len()
    );
}

// ---- criterion 6: capture flip under a power ramp ----

#[test]
fn criterion_6_capture_flip_is_monotone_near_parity() {
    let start = Instant::now();
    let mut outcomes = Vec::new();
    for rel_db in -10..=10 {
        let spoof_power = 10f64.powf(rel_db as f64 / 10.0);
        let sources = [
            SignalSource::new(7, 1.0, 0.0, 100.0),
            SignalSource::new(7, spoof_power, 1000.0, 600.5),
        ];
        let signal = synthesize(
            &sources,
            DEFAULT_SAMPLE_RATE_HZ,
            DEFAULT_IF_HZ,
            1.0e-3,
            0.01,
            11,
        )
        .unwrap();
        let grid = acquire_grid(&signal, 7, &[0.0, 1000.0], 0.5).unwrap();
        let authentic = grid.result_near(100.0, 0.0, 1.0, 1.0);
        let spoofed = grid.result_near(600.5, 1000.0, 1.0, 1.0);
        let outcome = lock_decision(&authentic, &spoofed, DEFAULT_LOCK_THRESHOLD);
        assert_ne!(outcome, LockOutcome::NoLock, "at {rel_db} dB");
        outcomes.push((rel_db, outcome == LockOutcome::LockSpoofed));
    }
    assert!(!outcomes.first().unwrap().1, "must start authentic at -10 dB");
    assert!(outcomes.last().unwrap().1, "must end spoofed at +10 dB");
    let flips: Vec<i32> = outcomes
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| w[1].0)
        .collect();
    assert_eq!(flips.len(), 1, "exactly one flip: {outcomes:?}");
    assert!(flips[0].abs() <= 3, "flip at {} dB, outside +/-3 dB of parity", flips[0]);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "{elapsed:?}");
    println!(
        "acceptance criterion 6: PASS (single monotone lock flip at {} dB relative power, {elapsed:?})",
        flips[0]
    );
}

// ---- criterion 7: wire codec integrity ----

#[test]
fn criterion_7_codec_round_trip_and_integrity() {
    let start = Instant::now();
    // Simple LCG so the 1000 reports are reproducible without extra deps.
    let mut state = 0x1234_5678_9abc_def0u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        state
    };
    for _ in 0..1000 {
        let report = RemoteReport {
            unit_id: (next() & 0xff) as u8,
            fix: GpsFix {
                utc_time_ms: next() >> 20,
                // Positions on the wire's fixed-point grid round-trip
                // bit-exactly; the grid is 1e-7 degrees.
                latitude_deg: ((next() % 1_800_000_001) as i64 - 900_000_000) as f64 / 1e7,
                longitude_deg: ((next() % 3_600_000_001) as i64 - 1_800_000_000) as f64 / 1e7,
                sats_visible: (next() & 0x1f) as u8,
                sats_used: (next() & 0x1f) as u8,
            },
            packet_counter: (next() & 0xffff_ffff) as u32,
        };
        let frame = encode_frame(&report).unwrap();
        assert_eq!(decode_frame(&frame).unwrap(), report);
    }

    let sample = RemoteReport {
        unit_id: 2,
        fix: GpsFix {
            utc_time_ms: 1_735_689_600_000,
            latitude_deg: 39.9526,
            longitude_deg: -75.1652,
            sats_visible: 10,
            sats_used: 8,
        },
        packet_counter: 77,
    };
    let frame = encode_frame(&sample).unwrap();
    let mut flips = 0;
    for byte in 0..frame.len() {
        for bit in 0..8 {
            let mut corrupt = frame;
            corrupt[byte] ^= 1 << bit;
            assert_eq!(
                decode_frame(&corrupt),
                Err(FrameError::Integrity),
                "byte {byte} bit {bit}"
            );
            flips += 1;
        }
    }
    assert_eq!(flips, 224);
    assert_eq!(crc16_ccitt_false(b"123456789"), 0x29B1);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    println!(
        "acceptance criterion 7: PASS (1000 round-trips exact, all 224 bit flips rejected, CRC check 0x29B1, {elapsed:?})"
    );
}

// ---- criterion 8: end-to-end close-range capture ----

#[test]
fn criterion_8_close_range_attack_end_to_end() {
    let start = Instant::now();
    let scenario = Scenario::default();

    // The default attacker's reach must fall short of the unit ring, so
    // only the PMU can be captured.
    let lambda = wavelength(GPS_L1_FREQ_HZ).unwrap();
    let reach = safe_radius(2.0e-6, 1.0, 1.0, lambda, &CaptureRule::default()).unwrap();
    assert!(reach < 1609.0, "{reach}");

    let log = run(&scenario).unwrap();
    assert_eq!(log.ticks.len(), 300);
    for tick in &log.ticks {
        let attacked = tick.tick >= 100;
        assert_eq!(tick.pmu_capture.is_spoofed(), attacked, "tick {}", tick.tick);
        for unit in &tick.units {
            assert!(!unit.capture.is_spoofed(), "unit {} captured", unit.unit_id);
        }
    }

    // Feed the logged observations back through the stream API and hold
    // it to the same verdicts.
    let timeline = log.ticks.iter().map(|t| {
        let pmu = PmuObservation {
            utc_time_ms: t.pmu_utc_ms,
            position: scenario.placement.pmu,
        };
        let units = t
            .units
            .iter()
            .map(|u| {
                let placed = scenario
                    .placement
                    .units
                    .iter()
                    .find(|p| p.unit_id == u.unit_id)
                    .unwrap();
                let pos = scenario.placement.unit_position(placed);
                match u.report_utc_ms {
                    Some(utc) => UnitObservation::received(u.unit_id, utc, pos.0, pos.1)
                        .with_expected_position(pos),
                    None => UnitObservation::missing(u.unit_id).with_expected_position(pos),
                }
            })
            .collect();
        (pmu, units)
    });
    let verdicts = verdict_stream(timeline, &scenario.comparison);
    for (tick, verdict) in log.ticks.iter().zip(&verdicts) {
        assert_eq!(verdict.state, tick.verdict.state, "tick {}", tick.tick);
        if tick.tick >= 100 {
            assert_eq!(verdict.state, VerdictState::AttackDetected);
            let corrected = verdict.corrected_time_ms.unwrap();
            assert!(
                corrected.abs_diff(tick.true_utc_ms) <= scenario.comparison.time_tolerance_ms,
                "tick {}: corrected {corrected} vs true {}",
                tick.tick,
                tick.true_utc_ms
            );
        } else {
            assert_eq!(verdict.state, VerdictState::NoAttackDetected);
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    println!(
        "acceptance criterion 8: PASS (reach {reach:.0} m < 1609 m, PMU-only capture, attack called and corrected on all 200 attacked ticks, {elapsed:?})"
    );
}

// ---- criterion 9: run determinism ----

#[test]
fn criterion_9_runs_are_byte_identical() {
    let scenario = Scenario::default();
    let a = run(&scenario).unwrap();
    let b = run(&scenario).unwrap();
    assert_eq!(a, b);
    let mut ja = Vec::new();
    let mut jb = Vec::new();
    a.write_jsonl(&mut ja).unwrap();
    b.write_jsonl(&mut jb).unwrap();
    assert_eq!(ja, jb, "serialized event logs must match byte for byte");
    assert!(!ja.is_empty());
    println!(
        "acceptance criterion 9: PASS (two runs, same seed: {} bytes of events, byte-identical)",
        ja.len()
    );
}
