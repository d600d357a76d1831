use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use super::analysis::FftPair;
use super::{peak_normalize, samples_for, SampledSignal};
use crate::error::{Error, Result};

/// Total stimulus length: noise, core, noise, tone.
pub const STIMULUS_DURATION_S: f64 = 1.6;

/// Start times of the core, second noise and tone segments.
pub const STIMULUS_BOUNDARIES_S: [f64; 3] = [0.2, 1.2, 1.4];

const SEGMENT_S: f64 = 0.2;
const CORE_S: f64 = 1.0;
const TONE_HZ: f64 = 1000.0;
const RAMP_S: f64 = 0.005;

fn check_duration(duration_s: f64) -> Result<()> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::invalid(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    Ok(())
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Pink (1/f power) noise, peak-normalized to one.
///
/// White Gaussian noise is shaped in the frequency domain by `1/sqrt(f)`;
/// the DC bin is removed.
pub fn pink_noise<R: Rng + ?Sized>(duration_s: f64, rate: u32, rng: &mut R) -> Result<SampledSignal> {
    check_duration(duration_s)?;
    let n = samples_for(duration_s, rate);
    let white = gaussian(rng, n);
    if n < 2 {
        return SampledSignal::new(rate, white);
    }
    let fft = FftPair::new(n);
    let mut spec = fft.forward_real(&white);
    let df = f64::from(rate) / n as f64;
    spec[0] = Complex64::new(0.0, 0.0);
    for k in 1..n {
        // bin k and its mirror n-k share the same |f|
        let bin = k.min(n - k);
        spec[k] /= (bin as f64 * df).sqrt();
    }
    fft.inverse_normalized(&mut spec);
    let mut out: Vec<f64> = spec.into_iter().map(|c| c.re).collect();
    peak_normalize(&mut out);
    Ok(SampledSignal::from_parts(rate, out))
}

/// White Gaussian noise burst, peak-normalized to one.
pub fn white_burst<R: Rng + ?Sized>(duration_s: f64, rate: u32, rng: &mut R) -> Result<SampledSignal> {
    check_duration(duration_s)?;
    let mut out = gaussian(rng, samples_for(duration_s, rate));
    peak_normalize(&mut out);
    Ok(SampledSignal::from_parts(rate, out))
}

/// Unit-amplitude sine with 5 ms raised-cosine on/off ramps.
pub fn tone(freq_hz: f64, duration_s: f64, rate: u32) -> Result<SampledSignal> {
    check_duration(duration_s)?;
    let nyquist = f64::from(rate) / 2.0;
    if !(freq_hz.is_finite() && freq_hz > 0.0 && freq_hz < nyquist) {
        return Err(Error::invalid(format!(
            "tone frequency {freq_hz} Hz outside (0, {nyquist}) Hz"
        )));
    }
    let n = samples_for(duration_s, rate);
    let ramp = samples_for(RAMP_S, rate).min(n / 2);
    let w = 2.0 * PI * freq_hz / f64::from(rate);
    let out = (0..n)
        .map(|i| {
            let gain = if i < ramp {
                0.5 - 0.5 * (PI * i as f64 / ramp as f64).cos()
            } else if i >= n - ramp {
                0.5 - 0.5 * (PI * (n - 1 - i) as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            gain * (w * i as f64).sin()
        })
        .collect();
    Ok(SampledSignal::from_parts(rate, out))
}

/// Localisation stimulus: pink noise (0.2 s), core (1.0 s), pink noise
/// (0.2 s) and a 1 kHz tone (0.2 s).
///
/// The core must be mono at `rate` and last one second within one sample;
/// it is trimmed or zero-padded to exactly one second.
pub fn build_stimulus<R: Rng + ?Sized>(
    core: &SampledSignal,
    rate: u32,
    rng: &mut R,
) -> Result<SampledSignal> {
    if core.sample_rate_hz() != rate {
        return Err(Error::invalid(format!(
            "core audio sampled at {} Hz, expected {rate} Hz",
            core.sample_rate_hz()
        )));
    }
    let core_len = samples_for(CORE_S, rate);
    if core.len().abs_diff(core_len) > 1 {
        return Err(Error::invalid(format!(
            "core audio must last 1.0 s ({core_len} samples), got {} samples",
            core.len()
        )));
    }
    let head = pink_noise(SEGMENT_S, rate, rng)?;
    let tail = pink_noise(SEGMENT_S, rate, rng)?;
    let beep = tone(TONE_HZ, SEGMENT_S, rate)?;

    let mut out = Vec::with_capacity(samples_for(STIMULUS_DURATION_S, rate));
    out.extend_from_slice(head.samples());
    out.extend(core.samples().iter().copied().chain(std::iter::repeat(0.0)).take(core_len));
    out.extend_from_slice(tail.samples());
    out.extend_from_slice(beep.samples());
    Ok(SampledSignal::from_parts(rate, out))
}
