//! Gammatone filterbank on the ERB-number scale.
//!
//! Each channel is a 4th-order complex gammatone realised as four cascaded
//! complex one-pole filters; the real output is twice the real part of the
//! complex response, which gives unit gain at the centre frequency.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::SampledSignal;
use crate::error::{Error, Result};

const GAMMATONE_ORDER: usize = 4;
/// Ratio between the gammatone bandwidth parameter and the ERB.
const BANDWIDTH_FACTOR: f64 = 1.019;

/// ERB-number (Cams) of a frequency: `21.4·log10(4.37·f/1000 + 1)`.
pub fn erb_number(freq_hz: f64) -> f64 {
    21.4 * (4.37 * freq_hz / 1000.0 + 1.0).log10()
}

pub fn erb_number_to_hz(erb: f64) -> f64 {
    (10f64.powf(erb / 21.4) - 1.0) * 1000.0 / 4.37
}

/// Equivalent rectangular bandwidth at `freq_hz`.
pub fn erb_bandwidth_hz(freq_hz: f64) -> f64 {
    24.7 * (4.37 * freq_hz / 1000.0 + 1.0)
}

/// `n_bands` centres equally spaced on the ERB-number scale, each at the
/// middle of its slice of `[lo_hz, hi_hz]`.
pub fn erb_centers(n_bands: usize, lo_hz: f64, hi_hz: f64) -> Result<Vec<f64>> {
    if n_bands == 0 {
        return Err(Error::invalid("ERB filterbank needs at least one band"));
    }
    if !(lo_hz > 0.0 && hi_hz > lo_hz) {
        return Err(Error::invalid(format!(
            "ERB range must satisfy 0 < lo < hi, got {lo_hz}..{hi_hz} Hz"
        )));
    }
    let (e_lo, e_hi) = (erb_number(lo_hz), erb_number(hi_hz));
    let step = (e_hi - e_lo) / n_bands as f64;
    Ok((0..n_bands)
        .map(|k| erb_number_to_hz(e_lo + (k as f64 + 0.5) * step))
        .collect())
}

/// Splits `s` into `n_bands` gammatone channels between `lo_hz` and `hi_hz`.
pub fn erb_filterbank(
    s: &SampledSignal,
    n_bands: usize,
    lo_hz: f64,
    hi_hz: f64,
) -> Result<Vec<SampledSignal>> {
    let nyquist = s.nyquist_hz();
    if hi_hz >= nyquist {
        return Err(Error::invalid(format!(
            "ERB upper edge {hi_hz} Hz must be below Nyquist ({nyquist} Hz)"
        )));
    }
    let centers = erb_centers(n_bands, lo_hz, hi_hz)?;
    let rate = f64::from(s.sample_rate_hz());
    Ok(centers
        .iter()
        .map(|&fc| s.map_samples(|x| gammatone(x, fc, rate)))
        .collect())
}

fn gammatone(x: &[f64], fc: f64, rate: f64) -> Vec<f64> {
    let b = BANDWIDTH_FACTOR * erb_bandwidth_hz(fc);
    let decay = (-2.0 * PI * b / rate).exp();
    let pole = Complex64::from_polar(decay, 2.0 * PI * fc / rate);
    let gain = 1.0 - decay;
    let mut state = [Complex64::new(0.0, 0.0); GAMMATONE_ORDER];
    x.iter()
        .map(|&v| {
            let mut input = Complex64::new(v, 0.0);
            for s in state.iter_mut() {
                *s = input * gain + pole * *s;
                input = *s;
            }
            2.0 * input.re
        })
        .collect()
}
