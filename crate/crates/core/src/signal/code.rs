//! C/A spreading codes: 1023-chip Gold codes from two 10-stage LFSRs.
//!
//! G1 feedback taps (3, 10); G2 feedback taps (2, 3, 6, 8, 9, 10); both
//! registers start all-ones. Each PRN selects its G2 delay through the
//! conventional pair of phase-select taps, so the whole family comes out of
//! one construction with no per-PRN delay tables.

use super::{SignalError, CA_CODE_LEN};

/// Phase-select tap pairs (1-based stage numbers into G2) for PRN 1..=32.
const PHASE_SELECT: [(usize, usize); 32] = [
    (2, 6),
    (3, 7),
    (4, 8),
    (5, 9),
    (1, 9),
    (2, 10),
    (1, 8),
    (2, 9),
    (3, 10),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 10),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 7),
    (5, 8),
    (6, 9),
    (1, 3),
    (4, 6),
    (5, 7),
    (6, 8),
    (7, 9),
    (8, 10),
    (1, 6),
    (2, 7),
    (3, 8),
    (4, 9),
];

/// One satellite's C/A code: 1023 chips in {+1, −1}, periodic.
///
/// Chip polarity: code bit 1 maps to +1, bit 0 to −1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaCode {
    prn: u8,
    chips: [i8; CA_CODE_LEN],
}

impl CaCode {
    pub fn prn(&self) -> u8 {
        self.prn
    }

    pub fn chips(&self) -> &[i8; CA_CODE_LEN] {
        &self.chips
    }

    /// Chip at index `i`, extended periodically in both directions:
    /// chip(i) = chip(i mod 1023).
    pub fn chip_at(&self, i: i64) -> i8 {
        self.chips[i.rem_euclid(CA_CODE_LEN as i64) as usize]
    }

    /// The chips as a single CSV row of +1/-1 values.
    pub fn csv_row(&self) -> String {
        let mut row = String::with_capacity(3 * CA_CODE_LEN);
        for (i, c) in self.chips.iter().enumerate() {
            if i > 0 {
                row.push(',');
            }
            row.push_str(if *c > 0 { "1" } else { "-1" });
        }
        row
    }
}

/// Generate the C/A code for a PRN in 1..=32.
pub fn generate_ca_code(prn: u8) -> Result<CaCode, SignalError> {
    if !(1..=32).contains(&prn) {
        return Err(SignalError::InvalidPrn(prn));
    }
    let (t1, t2) = PHASE_SELECT[(prn - 1) as usize];
    let mut g1 = [true; 10];
    let mut g2 = [true; 10];
    let mut chips = [0i8; CA_CODE_LEN];
    for chip in chips.iter_mut() {
        let bit = g1[9] ^ g2[t1 - 1] ^ g2[t2 - 1];
        *chip = if bit { 1 } else { -1 };
        let fb1 = g1[2] ^ g1[9];
        let fb2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
        g1.rotate_right(1);
        g1[0] = fb1;
        g2.rotate_right(1);
        g2[0] = fb2;
    }
    Ok(CaCode { prn, chips })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Circular correlation of two codes at the given lag, computed the
    /// obvious way; the independent check for all correlation claims.
    fn circular_correlation(a: &CaCode, b: &CaCode, lag: i64) -> i64 {
        (0..CA_CODE_LEN as i64)
            .map(|i| a.chip_at(i) as i64 * b.chip_at(i + lag) as i64)
            .sum()
    }

    fn first_10_chips_octal(code: &CaCode) -> String {
        let mut v: u32 = 0;
        for i in 0..10 {
            v = (v << 1) | if code.chip_at(i) > 0 { 1 } else { 0 };
        }
        format!("{v:o}")
    }

    // ---- construction tests ----

    #[test]
    fn every_prn_yields_1023_signed_unit_chips() {
        for prn in 1..=32 {
            let code = generate_ca_code(prn).unwrap();
            assert_eq!(code.chips().len(), 1023);
            assert!(code.chips().iter().all(|&c| c == 1 || c == -1));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_ca_code(13).unwrap(), generate_ca_code(13).unwrap());
    }

    #[test]
    fn out_of_range_prn_is_rejected() {
        assert_eq!(generate_ca_code(0), Err(SignalError::InvalidPrn(0)));
        assert_eq!(generate_ca_code(33), Err(SignalError::InvalidPrn(33)));
    }

    #[test]
    fn first_chips_match_published_octal_anchors() {
        // First 10 chips of each code, as the conventional octal word with
        // a leading 1. Published interface-control values for PRN 1..=10.
        let expected = [
            (1, "1440"),
            (2, "1620"),
            (3, "1710"),
            (4, "1744"),
            (5, "1133"),
            (6, "1455"),
            (7, "1131"),
            (8, "1454"),
            (9, "1626"),
            (10, "1504"),
        ];
        for (prn, octal) in expected {
            let code = generate_ca_code(prn).unwrap();
            assert_eq!(first_10_chips_octal(&code), octal, "PRN {prn}");
        }
    }

    #[test]
    fn prn1_leading_chips_frozen() {
        let code = generate_ca_code(1).unwrap();
        let expected: [i8; 16] = [1, 1, -1, -1, 1, -1, -1, -1, -1, -1, 1, 1, 1, -1, -1, 1];
        assert_eq!(&code.chips()[..16], &expected);
    }

    #[test]
    fn codes_are_balanced() {
        // Each selected Gold code has 512 ones and 511 zeros.
        for prn in 1..=32 {
            let sum: i64 = generate_ca_code(prn)
                .unwrap()
                .chips()
                .iter()
                .map(|&c| c as i64)
                .sum();
            assert_eq!(sum, 1, "PRN {prn}");
        }
    }

    #[test]
    fn chip_indexing_is_periodic() {
        let code = generate_ca_code(5).unwrap();
        for i in [-2046i64, -1023, -1, 0, 1, 1022, 1023, 5000] {
            assert_eq!(code.chip_at(i), code.chip_at(i.rem_euclid(1023)));
            assert_eq!(code.chip_at(i), code.chip_at(i + 1023));
        }
    }

    // ---- correlation tests ----

    #[test]
    fn autocorrelation_peak_is_1023() {
        for prn in [1, 9, 17, 32] {
            let code = generate_ca_code(prn).unwrap();
            assert_eq!(circular_correlation(&code, &code, 0), 1023);
        }
    }

    #[test]
    fn autocorrelation_off_peak_takes_gold_values() {
        let code = generate_ca_code(1).unwrap();
        for lag in 1..1023 {
            let v = circular_correlation(&code, &code, lag);
            assert!(
                v == -65 || v == -1 || v == 63,
                "lag {lag} gave {v}"
            );
        }
    }

    #[test]
    fn cross_correlation_is_bounded_for_distinct_prns() {
        for (a, b) in [(1u8, 2u8), (5, 9), (10, 20), (17, 28), (31, 32)] {
            let ca = generate_ca_code(a).unwrap();
            let cb = generate_ca_code(b).unwrap();
            for lag in 0..1023 {
                let v = circular_correlation(&ca, &cb, lag);
                assert!(
                    v == -65 || v == -1 || v == 63,
                    "PRNs ({a},{b}) lag {lag} gave {v}"
                );
            }
        }
    }

    // ---- export tests ----

    #[test]
    fn csv_row_round_trips() {
        let code = generate_ca_code(3).unwrap();
        let row = code.csv_row();
        let parsed: Vec<i8> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed.as_slice(), &code.chips()[..]);
        // PRN 3 opens 1111001000 (octal 1710).
        assert!(row.starts_with("1,1,1,1,-1,-1,1,-1,-1,-1"));
    }
}
