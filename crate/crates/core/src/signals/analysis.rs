use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SampledSignal;
use crate::error::{Error, Result};

/// Smallest `2^a 3^b 5^c` that is `>= n`.
pub(crate) fn fft_len(n: usize) -> usize {
    let n = n.max(1);
    let mut best = n.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

pub(crate) struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
    pub len: usize,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    /// Zero-padded forward transform of a real sequence.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        buf.resize(self.len, Complex64::new(0.0, 0.0));
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse_normalized(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }
}

/// Analytic signal of `x` (real part equals `x` up to rounding).
pub(crate) fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let len = fft_len(2 * n);
    let fft = FftPair::new(len);
    let mut spec = fft.forward_real(x);
    // one-sided spectrum: keep DC and Nyquist, double positive bins
    let half = len / 2;
    for (k, c) in spec.iter_mut().enumerate() {
        if k == 0 || (len.is_multiple_of(2) && k == half) {
            continue;
        } else if k < len.div_ceil(2) {
            *c *= 2.0;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    fft.inverse_normalized(&mut spec);
    spec.truncate(n);
    spec
}

/// Magnitude of the analytic signal.
pub fn envelope(s: &SampledSignal) -> SampledSignal {
    s.map_samples(|x| analytic_signal(x).iter().map(|c| c.norm()).collect())
}

/// Lag-limited normalized cross-correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct XCorr {
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
}

impl XCorr {
    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        self.best_by(|v| v)
    }

    /// Index of the largest absolute value (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        self.best_by(f64::abs)
    }

    fn best_by(&self, key: impl Fn(f64) -> f64) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if key(v) > key(self.values[best]) {
                best = i;
            }
        }
        best
    }

    /// Lag of the maximum with parabolic sub-sample refinement.
    pub fn refined_peak_lag(&self) -> f64 {
        let i = self.argmax();
        let lag = self.lags[i] as f64;
        if i == 0 || i + 1 >= self.values.len() {
            return lag;
        }
        let (a, b, c) = (self.values[i - 1], self.values[i], self.values[i + 1]);
        let denom = a - 2.0 * b + c;
        if denom.abs() < f64::EPSILON * b.abs().max(1e-300) || denom >= 0.0 {
            return lag;
        }
        lag + (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    }
}

/// `value(τ) = Σ a(t)·b(t+τ) / √(Σa²·Σb²)` for `τ ∈ [-max_lag, max_lag]`.
///
/// With this convention a copy of `a` delayed by `k` samples in `b` peaks at
/// `τ = +k`.
pub fn normalized_xcorr(a: &SampledSignal, b: &SampledSignal, max_lag: usize) -> Result<XCorr> {
    if a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::invalid("cross-correlation of signals with different rates"));
    }
    let (x, y) = (a.samples(), b.samples());
    let min_len = x.len().min(y.len());
    if max_lag >= min_len {
        return Err(Error::invalid(format!(
            "max lag {max_lag} must be below the shorter length {min_len}"
        )));
    }
    let norm = (a.energy() * b.energy()).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroEnergy);
    }
    let max_lag = max_lag as i64;
    let mut lags = Vec::with_capacity((2 * max_lag + 1) as usize);
    let mut values = Vec::with_capacity(lags.capacity());
    for lag in -max_lag..=max_lag {
        let (xs, ys) = if lag >= 0 {
            (x, &y[lag as usize..])
        } else {
            (&x[(-lag) as usize..], y)
        };
        let dot: f64 = xs.iter().zip(ys).map(|(p, q)| p * q).sum();
        lags.push(lag);
        values.push((dot / norm).clamp(-1.0, 1.0));
    }
    Ok(XCorr { lags, values })
}

/// Relative half-width of the cosine transition at each octave edge.
const OCTAVE_EDGE_TAPER: f64 = 0.1;

/// Splits `s` into octave bands `[fc/√2, fc·√2)` by masking the spectrum of
/// the zero-padded signal. Each edge is a short raised-cosine transition
/// (±10 % around the edge frequency) that keeps the time-domain leakage of
/// the mask low; the transitions of adjacent bands are complementary, so
/// the bands of a signal sum back to its in-range content. An upper edge at
/// or above Nyquist is dropped.
pub fn ideal_octave_bands(s: &SampledSignal, centers_hz: &[f64]) -> Result<Vec<SampledSignal>> {
    let rate = f64::from(s.sample_rate_hz());
    let n = s.len();
    if n == 0 {
        return Err(Error::invalid("cannot split an empty signal"));
    }
    let fft = FftPair::new(fft_len(2 * n));
    let spec = fft.forward_real(s.samples());
    let df = rate / fft.len as f64;
    // 0 below the edge, 1 above it
    let rise = |f: f64, edge: f64| -> f64 {
        let u = (((f / edge).ln() / (1.0 + OCTAVE_EDGE_TAPER).ln() + 1.0) / 2.0).clamp(0.0, 1.0);
        0.5 - 0.5 * (std::f64::consts::PI * u).cos()
    };
    centers_hz
        .iter()
        .map(|&fc| {
            super::check_cutoff(fc, s.sample_rate_hz())?;
            let (lo, hi) = (fc / std::f64::consts::SQRT_2, fc * std::f64::consts::SQRT_2);
            let mut band = vec![Complex64::new(0.0, 0.0); fft.len];
            for (k, c) in spec.iter().enumerate() {
                // negative frequencies mirror the positive ones
                let f = k.min(fft.len - k) as f64 * df;
                if f == 0.0 {
                    continue;
                }
                let upper = if hi >= rate / 2.0 { 1.0 } else { 1.0 - rise(f, hi) };
                let gain = rise(f, lo) * upper;
                if gain > 0.0 {
                    band[k] = *c * gain;
                }
            }
            fft.inverse_normalized(&mut band);
            Ok(s.map_samples(|_| band[..n].iter().map(|c| c.re).collect()))
        })
        .collect()
}

/// Full linear convolution via FFT.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    if x.len().min(h.len()) <= 64 {
        let mut out = vec![0.0; out_len];
        for (i, &xv) in x.iter().enumerate() {
            for (j, &hv) in h.iter().enumerate() {
                out[i + j] += xv * hv;
            }
        }
        return out;
    }
    let fft = FftPair::new(fft_len(out_len));
    let mut xs = fft.forward_real(x);
    let hs = fft.forward_real(h);
    xs.iter_mut().zip(&hs).for_each(|(a, b)| *a *= b);
    fft.inverse_normalized(&mut xs);
    xs.truncate(out_len);
    xs.into_iter().map(|c| c.re).collect()
}
