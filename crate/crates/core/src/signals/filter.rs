use std::f64::consts::{PI, SQRT_2};

use super::{check_cutoff, SampledSignal};
use crate::error::{Error, Result};

const BUTTERWORTH_ORDER: usize = 4;

/// Biquad coefficients `[b0, b1, b2, a1, a2]` with `a0 = 1`.
type Biquad = [f64; 5];

/// A cascade of second-order sections with Butterworth pole placement,
/// designed by the bilinear transform with frequency pre-warping.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthSos {
    sections: Vec<Biquad>,
}

#[derive(Clone, Copy)]
enum Kind {
    Low,
    High,
}

impl ButterworthSos {
    pub fn lowpass(order: usize, cutoff_hz: f64, rate: u32) -> Result<Self> {
        Self::design(Kind::Low, order, cutoff_hz, rate)
    }

    pub fn highpass(order: usize, cutoff_hz: f64, rate: u32) -> Result<Self> {
        Self::design(Kind::High, order, cutoff_hz, rate)
    }

    /// High-pass at `lo_hz` followed by low-pass at `hi_hz`. The low-pass
    /// stage is dropped when `hi_hz` reaches the Nyquist frequency.
    pub fn bandpass(order: usize, lo_hz: f64, hi_hz: f64, rate: u32) -> Result<Self> {
        if !(hi_hz > lo_hz) {
            return Err(Error::invalid(format!(
                "band edges must be increasing, got {lo_hz}..{hi_hz} Hz"
            )));
        }
        let mut f = Self::highpass(order, lo_hz, rate)?;
        if hi_hz < f64::from(rate) / 2.0 {
            f.sections
                .extend(Self::lowpass(order, hi_hz, rate)?.sections);
        }
        Ok(f)
    }

    fn design(kind: Kind, order: usize, cutoff_hz: f64, rate: u32) -> Result<Self> {
        check_cutoff(cutoff_hz, rate)?;
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "Butterworth order must be even and positive, got {order}"
            )));
        }
        let w0 = 2.0 * PI * cutoff_hz / f64::from(rate);
        let (sin_w, cos_w) = w0.sin_cos();
        let sections = (1..=order / 2)
            .map(|k| {
                let theta = (2 * k - 1) as f64 * PI / (2 * order) as f64;
                let q = 1.0 / (2.0 * theta.cos());
                let alpha = sin_w / (2.0 * q);
                let a0 = 1.0 + alpha;
                let (b0, b1) = match kind {
                    Kind::Low => ((1.0 - cos_w) / 2.0, 1.0 - cos_w),
                    Kind::High => ((1.0 + cos_w) / 2.0, -(1.0 + cos_w)),
                };
                [b0 / a0, b1 / a0, b0 / a0, -2.0 * cos_w / a0, (1.0 - alpha) / a0]
            })
            .collect();
        Ok(Self { sections })
    }

    /// Causal single pass from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            run_section(s, &mut y, [0.0, 0.0]);
        }
        y
    }

    /// Zero-phase forward-backward filtering.
    ///
    /// The input is extended at both ends by odd reflection and each pass
    /// starts from the steady state matching its first sample, so constant
    /// inputs produce no start-up transient.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![x[0] * self.dc_gain().powi(2)];
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        self.steady_pass(&mut ext);
        ext.reverse();
        self.steady_pass(&mut ext);
        ext.reverse();
        ext.drain(..pad);
        ext.truncate(n);
        ext
    }

    fn steady_pass(&self, y: &mut [f64]) {
        let mut level = y[0];
        for s in &self.sections {
            let [b0, b1, b2, a1, a2] = *s;
            let gain = (b0 + b1 + b2) / (1.0 + a1 + a2);
            let s2 = (b2 - a2 * gain) * level;
            let s1 = (b1 - a1 * gain) * level + s2;
            run_section(s, y, [s1, s2]);
            level *= gain;
        }
    }

    /// Magnitude response of one pass at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, rate: u32) -> f64 {
        let w = 2.0 * PI * freq_hz / f64::from(rate);
        let z1 = rustfft::num_complex::Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|[b0, b1, b2, a1, a2]| {
                ((*b0 + z1 * *b1 + z2 * *b2) / (1.0 + z1 * *a1 + z2 * *a2)).norm()
            })
            .product()
    }

    fn dc_gain(&self) -> f64 {
        self.sections
            .iter()
            .map(|[b0, b1, b2, a1, a2]| (b0 + b1 + b2) / (1.0 + a1 + a2))
            .product()
    }
}

/// Transposed direct form II, in place.
fn run_section(c: &Biquad, y: &mut [f64], state: [f64; 2]) {
    let [b0, b1, b2, a1, a2] = *c;
    let [mut s1, mut s2] = state;
    for v in y.iter_mut() {
        let x = *v;
        let out = b0 * x + s1;
        s1 = b1 * x - a1 * out + s2;
        s2 = b2 * x - a2 * out;
        *v = out;
    }
}

/// Zero-phase 4th-order Butterworth low-pass.
pub fn lowpass(s: &SampledSignal, cutoff_hz: f64) -> Result<SampledSignal> {
    let f = ButterworthSos::lowpass(BUTTERWORTH_ORDER, cutoff_hz, s.sample_rate_hz())?;
    Ok(s.map_samples(|x| f.filtfilt(x)))
}

/// Zero-phase 4th-order Butterworth high-pass.
pub fn highpass(s: &SampledSignal, cutoff_hz: f64) -> Result<SampledSignal> {
    let f = ButterworthSos::highpass(BUTTERWORTH_ORDER, cutoff_hz, s.sample_rate_hz())?;
    Ok(s.map_samples(|x| f.filtfilt(x)))
}

/// Zero-phase band-pass built from 4th-order Butterworth edges.
pub fn bandpass(s: &SampledSignal, lo_hz: f64, hi_hz: f64) -> Result<SampledSignal> {
    let f = ButterworthSos::bandpass(BUTTERWORTH_ORDER, lo_hz, hi_hz, s.sample_rate_hz())?;
    Ok(s.map_samples(|x| f.filtfilt(x)))
}

/// One zero-phase octave band per centre frequency, with edges at
/// `fc/√2` and `fc·√2`.
pub fn octave_filterbank(s: &SampledSignal, centers_hz: &[f64]) -> Result<Vec<SampledSignal>> {
    let rate = s.sample_rate_hz();
    centers_hz
        .iter()
        .map(|&fc| {
            check_cutoff(fc, rate)?;
            let lo = fc / SQRT_2;
            let hi = (fc * SQRT_2).min(f64::from(rate) / 2.0);
            bandpass(s, lo, hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const RATE: u32 = 48_000;

    fn sine(f: f64, n: usize) -> SampledSignal {
        SampledSignal::new(
            RATE,
            (0..n)
                .map(|i| (2.0 * PI * f * i as f64 / f64::from(RATE)).sin())
                .collect(),
        )
        .unwrap()
    }

    fn noise(seed: u64, n: usize) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampledSignal::new(RATE, (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap()
    }

    fn mid_rms(s: &SampledSignal) -> f64 {
        let x = &s.samples()[s.len() / 4..3 * s.len() / 4];
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn single_pass_is_3db_down_at_cutoff() {
        for fc in [100.0, 1500.0, 3000.0, 12_000.0] {
            let lp = ButterworthSos::lowpass(4, fc, RATE).unwrap();
            let hp = ButterworthSos::highpass(4, fc, RATE).unwrap();
            let target = std::f64::consts::FRAC_1_SQRT_2;
            assert!((lp.magnitude(fc, RATE) - target).abs() < 1e-9);
            assert!((hp.magnitude(fc, RATE) - target).abs() < 1e-9);
            // -3 dB point within 5 % of the nominal cutoff
            assert!(lp.magnitude(fc * 0.95, RATE) > target);
            assert!(lp.magnitude(fc * 1.05, RATE) < target);
        }
    }

    #[test]
    fn tone_at_cutoff_drops_6db() {
        for fc in [1500.0, 3000.0] {
            let x = sine(fc, 48_000);
            let db = |y: &SampledSignal| 20.0 * (mid_rms(y) / mid_rms(&x)).log10();
            let lp = lowpass(&x, fc).unwrap();
            let hp = highpass(&x, fc).unwrap();
            assert!((db(&lp) + 6.02).abs() < 1.0, "{}", db(&lp));
            assert!((db(&hp) + 6.02).abs() < 1.0, "{}", db(&hp));
        }
    }

    #[test]
    fn lowpass_stopband_decade_above() {
        let fc = 1000.0;
        let x = sine(10.0 * fc, 48_000);
        let y = lowpass(&x, fc).unwrap();
        let att = 20.0 * (mid_rms(&y) / mid_rms(&x)).log10();
        assert!(att < -60.0, "{att}");
    }

    #[test]
    fn dc_survives_lowpass() {
        let x = SampledSignal::new(RATE, vec![0.75; 4000]).unwrap();
        let y = lowpass(&x, 200.0).unwrap();
        assert!(y.samples().iter().all(|v| (v - 0.75).abs() < 1e-6));
    }

    #[test]
    fn rejects_bad_cutoffs() {
        let x = sine(100.0, 100);
        assert!(lowpass(&x, 0.0).is_err());
        assert!(lowpass(&x, 24_000.0).is_err());
        assert!(highpass(&x, -5.0).is_err());
        assert!(ButterworthSos::lowpass(3, 100.0, RATE).is_err());
    }

    #[test]
    fn filters_are_linear() {
        let a = noise(1, 3000);
        let b = noise(2, 3000);
        let sum = SampledSignal::new(
            RATE,
            a.samples().iter().zip(b.samples()).map(|(p, q)| 2.0 * p - 0.5 * q).collect(),
        )
        .unwrap();
        let fa = lowpass(&a, 3000.0).unwrap();
        let fb = lowpass(&b, 3000.0).unwrap();
        let fs = lowpass(&sum, 3000.0).unwrap();
        for i in 0..3000 {
            let expect = 2.0 * fa.samples()[i] - 0.5 * fb.samples()[i];
            assert!((fs.samples()[i] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_phase_keeps_band_tone_aligned() {
        let x = sine(1000.0, 9600);
        let y = octave_filterbank(&x, &[1000.0]).unwrap().remove(0);
        let xc = crate::signals::normalized_xcorr(&x, &y, 20).unwrap();
        assert_eq!(xc.lags[xc.argmax()], 0);
    }

    #[test]
    fn octave_bank_energy_shares() {
        // ideal share of a white signal: bandwidth / Nyquist
        let x = noise(7, 10 * RATE as usize);
        let centers = [31.5, 63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16_000.0];
        let bands = octave_filterbank(&x, &centers).unwrap();
        let total = x.energy();
        for (fc, band) in centers.iter().zip(&bands) {
            let hi = (fc * SQRT_2).min(24_000.0);
            let ideal = (hi - fc / SQRT_2) / 24_000.0;
            let db = 10.0 * (band.energy() / total / ideal).log10();
            assert!(db.abs() < 2.0, "{fc} Hz band off by {db} dB");
        }
    }

    #[test]
    fn octave_bank_isolates_tone() {
        let x = sine(1000.0, 48_000);
        let centers = [250.0, 500.0, 1000.0, 2000.0, 4000.0];
        let bands = octave_filterbank(&x, &centers).unwrap();
        let energies: Vec<f64> = bands.iter().map(|b| b.energy()).collect();
        let total: f64 = energies.iter().sum();
        assert!(energies[2] / total >= 0.95, "{energies:?}");
        assert!(octave_filterbank(&x, &[]).unwrap().is_empty());
        assert!(octave_filterbank(&x, &[30_000.0]).is_err());
    }
}
