//! Sampled-signal synthesis: each source contributes
//! H·√(2P_c)·C(t − τ)·D(t)·cos(2π(f_c + Δf)·t), plus zero-mean Gaussian
//! noise of a chosen variance from a seeded generator.

use std::io::{self, BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::code::generate_ca_code;
use super::{SignalError, CA_CODE_LEN, CHIP_RATE_HZ, NAV_BIT_RATE_HZ};

/// One satellite-like emitter: spreading code, scalar channel gain, carrier
/// power, Doppler shift, code phase, navigation bits, and the clock offset
/// its timing would impose on a receiver that locks to it. The offset is
/// carried as metadata (bit-level nav encoding is out of scope); capture
/// logic reads it from whichever source wins the lock.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSource {
    /// C/A code selector, 1..=32.
    pub prn: u8,
    /// Scalar channel gain H.
    pub channel_gain: f64,
    /// Carrier power P_c, watts.
    pub carrier_power_w: f64,
    /// Carrier offset Δf, Hz.
    pub doppler_hz: f64,
    /// Code delay in chips, in [0, 1023).
    pub code_phase_chips: f64,
    /// Data bits (±1) at 50 bit/s, applied cyclically.
    pub nav_bits: Vec<i8>,
    /// Time falsification this source carries, seconds.
    pub clock_offset_s: f64,
}

impl SignalSource {
    /// Source with unit channel gain, constant +1 nav bits, and no clock
    /// offset.
    pub fn new(prn: u8, carrier_power_w: f64, doppler_hz: f64, code_phase_chips: f64) -> Self {
        Self {
            prn,
            channel_gain: 1.0,
            carrier_power_w,
            doppler_hz,
            code_phase_chips,
            nav_bits: vec![1],
            clock_offset_s: 0.0,
        }
    }

    fn validate(&self) -> Result<(), SignalError> {
        if !(1..=32).contains(&self.prn) {
            return Err(SignalError::InvalidPrn(self.prn));
        }
        if !(self.channel_gain.is_finite() && self.channel_gain >= 0.0) {
            return Err(SignalError::InvalidSource("channel_gain must be >= 0"));
        }
        if !(self.carrier_power_w.is_finite() && self.carrier_power_w >= 0.0) {
            return Err(SignalError::InvalidSource("carrier_power_w must be >= 0"));
        }
        if !self.doppler_hz.is_finite() {
            return Err(SignalError::InvalidSource("doppler_hz must be finite"));
        }
        if !(self.code_phase_chips >= 0.0 && self.code_phase_chips < CA_CODE_LEN as f64) {
            return Err(SignalError::InvalidSource(
                "code_phase_chips must be in [0, 1023)",
            ));
        }
        if self.nav_bits.is_empty() || self.nav_bits.iter().any(|&b| b != 1 && b != -1) {
            return Err(SignalError::InvalidSource("nav_bits must be non-empty ±1"));
        }
        if !self.clock_offset_s.is_finite() {
            return Err(SignalError::InvalidSource("clock_offset_s must be finite"));
        }
        Ok(())
    }
}

/// A real-valued sampled window and the parameters it was produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub sample_rate_hz: f64,
    pub carrier_freq_hz: f64,
    pub samples: Vec<f64>,
    /// Variance of the additive noise the window was synthesized with.
    pub noise_power_w: f64,
}

impl SampledSignal {
    /// Export as a one-line `sample_rate,carrier_freq,count` header followed
    /// by the samples as little-endian f32.
    pub fn write_raw<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{}",
            self.sample_rate_hz,
            self.carrier_freq_hz,
            self.samples.len()
        )?;
        for &s in &self.samples {
            w.write_all(&(s as f32).to_le_bytes())?;
        }
        Ok(())
    }
}

/// Read a signal written by [`SampledSignal::write_raw`]. The header does
/// not carry the noise power, so the field comes back zero.
pub fn read_raw<R: BufRead>(mut r: R) -> io::Result<SampledSignal> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let parts: Vec<&str> = header.trim_end().split(',').collect();
    if parts.len() != 3 {
        return Err(bad("header must be sample_rate,carrier_freq,count"));
    }
    let sample_rate_hz: f64 = parts[0].parse().map_err(|_| bad("bad sample_rate"))?;
    let carrier_freq_hz: f64 = parts[1].parse().map_err(|_| bad("bad carrier_freq"))?;
    let count: usize = parts[2].parse().map_err(|_| bad("bad count"))?;
    let mut buf = vec![0u8; count * 4];
    r.read_exact(&mut buf)
        .map_err(|_| bad("sample data shorter than header count"))?;
    let samples = buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(SampledSignal {
        sample_rate_hz,
        carrier_freq_hz,
        samples,
        noise_power_w: 0.0,
    })
}

/// Synthesize a window of the summed source model plus seeded Gaussian
/// noise. Identical inputs (including the seed) give bit-identical output.
///
/// The chip rate is fixed at 1.023 Mchip/s; `sample_rate_hz` must exceed
/// twice the highest instantaneous carrier frequency (carrier plus the
/// largest |Doppler|).
pub fn synthesize(
    sources: &[SignalSource],
    sample_rate_hz: f64,
    carrier_freq_hz: f64,
    duration_s: f64,
    noise_power_w: f64,
    seed: u64,
) -> Result<SampledSignal, SignalError> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(SignalError::InvalidDuration(duration_s));
    }
    if !(noise_power_w.is_finite() && noise_power_w >= 0.0) {
        return Err(SignalError::InvalidSource("noise_power_w must be >= 0"));
    }
    let max_doppler = sources
        .iter()
        .map(|s| s.doppler_hz.abs())
        .fold(0.0, f64::max);
    let required = 2.0 * (carrier_freq_hz + max_doppler);
    if !(sample_rate_hz.is_finite() && carrier_freq_hz.is_finite() && carrier_freq_hz > 0.0)
        || sample_rate_hz <= required
    {
        return Err(SignalError::SamplingCriterion {
            sample_rate_hz,
            required_hz: required,
            carrier_freq_hz,
            max_doppler_hz: max_doppler,
        });
    }
    for s in sources {
        s.validate()?;
    }

    let n = (duration_s * sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(SignalError::InvalidDuration(duration_s));
    }
    let mut samples = vec![0.0f64; n];

    for src in sources {
        let code = generate_ca_code(src.prn)?;
        let amplitude = src.channel_gain * (2.0 * src.carrier_power_w).sqrt();
        if amplitude == 0.0 {
            continue;
        }
        let omega = 2.0 * std::f64::consts::PI * (carrier_freq_hz + src.doppler_hz);
        let bits = &src.nav_bits;
        for (i, out) in samples.iter_mut().enumerate() {
            let t = i as f64 / sample_rate_hz;
            // (i * rate) / fs is a single rounding, so samples that fall
            // exactly on a chip or bit boundary index exactly.
            let chips_elapsed = i as f64 * CHIP_RATE_HZ / sample_rate_hz;
            let chip_idx = (chips_elapsed - src.code_phase_chips).floor() as i64;
            let chip = code.chip_at(chip_idx) as f64;
            let bit_idx = (i as f64 * NAV_BIT_RATE_HZ / sample_rate_hz).floor() as i64;
            let bit = bits[bit_idx.rem_euclid(bits.len() as i64) as usize] as f64;
            *out += amplitude * chip * bit * (omega * t).cos();
        }
    }

    if noise_power_w > 0.0 {
        let normal = Normal::new(0.0, noise_power_w.sqrt())
            .map_err(|_| SignalError::InvalidSource("noise_power_w must be >= 0"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for out in samples.iter_mut() {
            *out += normal.sample(&mut rng);
        }
    }

    Ok(SampledSignal {
        sample_rate_hz,
        carrier_freq_hz,
        samples,
        noise_power_w,
    })
}
