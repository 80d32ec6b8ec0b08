//! Correlation acquisition: mix the sampled signal to baseband per Doppler
//! bin, correlate against a local C/A replica over a code-phase grid, and
//! take the envelope. The peak cell gives the code phase and Doppler
//! estimate; the peak-to-grid-mean ratio drives the lock decision.

use super::code::{generate_ca_code, CaCode};
use super::{SampledSignal, SignalError, CA_CODE_LEN, CHIP_RATE_HZ};

/// Location and strength of a correlation peak.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionResult {
    /// C/A code the replica used.
    pub prn: u8,
    /// Code phase of the peak cell, chips.
    pub best_code_phase: f64,
    /// Doppler of the peak cell, Hz.
    pub best_doppler: f64,
    /// Envelope value at the peak cell.
    pub peak: f64,
    /// Peak divided by the mean envelope over the whole grid. Values near 1
    /// mean the peak is indistinguishable from clutter.
    pub peak_to_mean: f64,
}

/// The full code-phase by Doppler envelope surface for one PRN.
#[derive(Debug, Clone)]
pub struct AcquisitionGrid {
    prn: u8,
    code_phase_step: f64,
    doppler_bins: Vec<f64>,
    n_phases: usize,
    /// Bin-major: `envelope[bin * n_phases + phase]`.
    envelope: Vec<f64>,
    mean: f64,
}

impl AcquisitionGrid {
    pub fn prn(&self) -> u8 {
        self.prn
    }

    pub fn code_phase_step(&self) -> f64 {
        self.code_phase_step
    }

    pub fn doppler_bins(&self) -> &[f64] {
        &self.doppler_bins
    }

    pub fn n_phases(&self) -> usize {
        self.n_phases
    }

    /// Code phase of grid column `phase_idx`, chips.
    pub fn phase_at(&self, phase_idx: usize) -> f64 {
        phase_idx as f64 * self.code_phase_step
    }

    /// Envelope value at one grid cell.
    pub fn value(&self, bin_idx: usize, phase_idx: usize) -> f64 {
        self.envelope[bin_idx * self.n_phases + phase_idx]
    }

    /// Mean envelope over the whole grid.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// The global peak cell. Ties resolve to the lowest code phase, then
    /// the lowest Doppler.
    pub fn result(&self) -> AcquisitionResult {
        let mut best_bin = 0usize;
        let mut best_phase = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (bi, _) in self.doppler_bins.iter().enumerate() {
            for pi in 0..self.n_phases {
                let v = self.value(bi, pi);
                if self.cell_beats(v, pi, bi, best_val, best_phase, best_bin) {
                    best_val = v;
                    best_bin = bi;
                    best_phase = pi;
                }
            }
        }
        self.result_at(best_bin, best_phase)
    }

    /// The peak cell within a window around an expected location: code
    /// phases within `phase_window_chips` (circular distance over the 1023
    /// chip period) and Doppler bins within `doppler_window_hz`. If no cell
    /// falls inside the window, the nearest cell to the expected location
    /// is reported instead.
    pub fn result_near(
        &self,
        code_phase_chips: f64,
        doppler_hz: f64,
        phase_window_chips: f64,
        doppler_window_hz: f64,
    ) -> AcquisitionResult {
        let mut best: Option<(usize, usize, f64)> = None;
        for (bi, &fd) in self.doppler_bins.iter().enumerate() {
            if (fd - doppler_hz).abs() > doppler_window_hz {
                continue;
            }
            for pi in 0..self.n_phases {
                if circular_chip_distance(self.phase_at(pi), code_phase_chips)
                    > phase_window_chips
                {
                    continue;
                }
                let v = self.value(bi, pi);
                match best {
                    Some((bb, bp, bv)) if !self.cell_beats(v, pi, bi, bv, bp, bb) => {}
                    _ => best = Some((bi, pi, v)),
                }
            }
        }
        if let Some((bi, pi, _)) = best {
            return self.result_at(bi, pi);
        }
        // Empty window: fall back to the cell closest to the expected
        // location (phase distance first, then Doppler distance).
        let mut near = (0usize, 0usize);
        let mut near_key = (f64::INFINITY, f64::INFINITY);
        for (bi, &fd) in self.doppler_bins.iter().enumerate() {
            for pi in 0..self.n_phases {
                let key = (
                    circular_chip_distance(self.phase_at(pi), code_phase_chips),
                    (fd - doppler_hz).abs(),
                );
                if key < near_key {
                    near_key = key;
                    near = (bi, pi);
                }
            }
        }
        self.result_at(near.0, near.1)
    }

    fn result_at(&self, bin_idx: usize, phase_idx: usize) -> AcquisitionResult {
        let peak = self.value(bin_idx, phase_idx);
        let peak_to_mean = if self.mean > 0.0 { peak / self.mean } else { 0.0 };
        AcquisitionResult {
            prn: self.prn,
            best_code_phase: self.phase_at(phase_idx),
            best_doppler: self.doppler_bins[bin_idx],
            peak,
            peak_to_mean,
        }
    }

    /// Strict ordering for peak selection: higher value, then lower code
    /// phase, then lower Doppler.
    fn cell_beats(
        &self,
        v: f64,
        pi: usize,
        bi: usize,
        best_v: f64,
        best_pi: usize,
        best_bi: usize,
    ) -> bool {
        if v != best_v {
            return v > best_v;
        }
        if pi != best_pi {
            return pi < best_pi;
        }
        self.doppler_bins[bi] < self.doppler_bins[best_bi]
    }
}

fn circular_chip_distance(a: f64, b: f64) -> f64 {
    let period = CA_CODE_LEN as f64;
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Outcome of comparing the authentic and counterfeit correlation peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockOutcome {
    /// Neither peak stands out from the grid clutter.
    NoLock,
    /// The receiver locks onto the authentic signal.
    LockAuthentic,
    /// The receiver locks onto the counterfeit signal.
    LockSpoofed,
}

/// Decide which correlation peak a receiver locks to. The stronger peak
/// wins (ties resolve like grid cells: lower code phase, then lower
/// Doppler, then the authentic side). A winner whose peak-to-mean ratio is
/// below `threshold` is not a lock at all.
pub fn lock_decision(
    authentic: &AcquisitionResult,
    spoofed: &AcquisitionResult,
    threshold: f64,
) -> LockOutcome {
    let spoof_wins = if spoofed.peak != authentic.peak {
        spoofed.peak > authentic.peak
    } else if spoofed.best_code_phase != authentic.best_code_phase {
        spoofed.best_code_phase < authentic.best_code_phase
    } else if spoofed.best_doppler != authentic.best_doppler {
        spoofed.best_doppler < authentic.best_doppler
    } else {
        false
    };
    let winner = if spoof_wins { spoofed } else { authentic };
    if !(winner.peak_to_mean >= threshold) {
        return LockOutcome::NoLock;
    }
    if spoof_wins {
        LockOutcome::LockSpoofed
    } else {
        LockOutcome::LockAuthentic
    }
}

/// Compute the full acquisition envelope for one PRN.
///
/// `doppler_bins` lists the carrier offsets to search (Hz, any order);
/// `code_phase_step` sets the phase grid spacing in chips. Identical
/// inputs give identical grids.
pub fn acquire_grid(
    signal: &SampledSignal,
    prn: u8,
    doppler_bins: &[f64],
    code_phase_step: f64,
) -> Result<AcquisitionGrid, SignalError> {
    if signal.samples.is_empty() {
        return Err(SignalError::EmptySignal);
    }
    if doppler_bins.is_empty() || doppler_bins.iter().any(|d| !d.is_finite()) {
        return Err(SignalError::BadDopplerBins);
    }
    if !(code_phase_step.is_finite()
        && code_phase_step > 0.0
        && code_phase_step <= CA_CODE_LEN as f64)
    {
        return Err(SignalError::InvalidCodePhaseStep(code_phase_step));
    }
    let code = generate_ca_code(prn)?;

    let n_phases = (CA_CODE_LEN as f64 / code_phase_step).ceil() as usize;
    let fs = signal.sample_rate_hz;
    let mut envelope = vec![0.0f64; doppler_bins.len() * n_phases];

    // The fast path applies when the phase step divides a chip evenly
    // (step = 1/k) and spans a whole number of samples. Samples then fold
    // into per-step block sums once per Doppler bin, and every correlation
    // is a dot product of the folded sums with a shifted chip table. The
    // result is the direct per-sample correlation, just grouped.
    let k = (1.0 / code_phase_step).round();
    let step_samples = (code_phase_step * fs / CHIP_RATE_HZ).round();
    let fast = (1.0 / code_phase_step - k).abs() < 1e-9
        && k >= 1.0
        && (code_phase_step * fs / CHIP_RATE_HZ - step_samples).abs() < 1e-9
        && step_samples >= 1.0;

    if fast {
        fill_grid_blocked(
            signal,
            &code,
            doppler_bins,
            n_phases,
            k as i64,
            step_samples as usize,
            &mut envelope,
        );
    } else {
        fill_grid_direct(signal, &code, doppler_bins, n_phases, code_phase_step, &mut envelope);
    }

    let mean = envelope.iter().sum::<f64>() / envelope.len() as f64;
    Ok(AcquisitionGrid {
        prn,
        code_phase_step,
        doppler_bins: doppler_bins.to_vec(),
        n_phases,
        envelope,
        mean,
    })
}

/// Acquisition reduced to its peak: [`acquire_grid`] followed by
/// [`AcquisitionGrid::result`].
pub fn acquire(
    signal: &SampledSignal,
    prn: u8,
    doppler_bins: &[f64],
    code_phase_step: f64,
) -> Result<AcquisitionResult, SignalError> {
    Ok(acquire_grid(signal, prn, doppler_bins, code_phase_step)?.result())
}

// ---- grid kernels ----

fn fill_grid_blocked(
    signal: &SampledSignal,
    code: &CaCode,
    doppler_bins: &[f64],
    n_phases: usize,
    k: i64,
    step_samples: usize,
    envelope: &mut [f64],
) {
    let n_blocks = n_phases;
    // chip value for a block offset d = j - p in (-n_blocks, n_blocks).
    let mut table = vec![0.0f64; 2 * n_blocks];
    for (i, slot) in table.iter_mut().enumerate() {
        let d = i as i64 - n_blocks as i64;
        *slot = code.chip_at(d.div_euclid(k)) as f64;
    }

    let fs = signal.sample_rate_hz;
    let mut bi_sum = vec![0.0f64; n_blocks];
    let mut bq_sum = vec![0.0f64; n_blocks];
    for (bin_idx, &fd) in doppler_bins.iter().enumerate() {
        let omega = 2.0 * std::f64::consts::PI * (signal.carrier_freq_hz + fd);
        bi_sum.iter_mut().for_each(|v| *v = 0.0);
        bq_sum.iter_mut().for_each(|v| *v = 0.0);
        for (n, &x) in signal.samples.iter().enumerate() {
            let t = n as f64 / fs;
            let (s, c) = (omega * t).sin_cos();
            let j = (n / step_samples) % n_blocks;
            bi_sum[j] += x * c;
            bq_sum[j] += x * s;
        }
        let row = &mut envelope[bin_idx * n_phases..(bin_idx + 1) * n_phases];
        for (p, out) in row.iter_mut().enumerate() {
            let shifted = &table[n_blocks - p..2 * n_blocks - p];
            let mut acc_i = 0.0;
            let mut acc_q = 0.0;
            for ((&ch, &bi), &bq) in shifted.iter().zip(&bi_sum).zip(&bq_sum) {
                acc_i += ch * bi;
                acc_q += ch * bq;
            }
            *out = (acc_i * acc_i + acc_q * acc_q).sqrt();
        }
    }
}

fn fill_grid_direct(
    signal: &SampledSignal,
    code: &CaCode,
    doppler_bins: &[f64],
    n_phases: usize,
    code_phase_step: f64,
    envelope: &mut [f64],
) {
    let fs = signal.sample_rate_hz;
    let len = signal.samples.len();
    let mut mixed_i = vec![0.0f64; len];
    let mut mixed_q = vec![0.0f64; len];
    for (bin_idx, &fd) in doppler_bins.iter().enumerate() {
        let omega = 2.0 * std::f64::consts::PI * (signal.carrier_freq_hz + fd);
        for (n, &x) in signal.samples.iter().enumerate() {
            let t = n as f64 / fs;
            let (s, c) = (omega * t).sin_cos();
            mixed_i[n] = x * c;
            mixed_q[n] = x * s;
        }
        let row = &mut envelope[bin_idx * n_phases..(bin_idx + 1) * n_phases];
        for (p, out) in row.iter_mut().enumerate() {
            let phase = p as f64 * code_phase_step;
            let mut acc_i = 0.0;
            let mut acc_q = 0.0;
            for n in 0..len {
                let chips_elapsed = n as f64 * CHIP_RATE_HZ / fs;
                let chip = code.chip_at((chips_elapsed - phase).floor() as i64) as f64;
                acc_i += mixed_i[n] * chip;
                acc_q += mixed_q[n] * chip;
            }
            *out = (acc_i * acc_i + acc_q * acc_q).sqrt();
        }
    }
}
