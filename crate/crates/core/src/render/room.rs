//! Room parameters, distance attenuation and the synthetic diffuse tail.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::head::HeadModel;
use crate::error::{Error, Result};
use crate::signals::{fft_len, BinauralPair, FftPair, SampledSignal};

/// Octave-band centres of the reverberation table.
pub const OCTAVE_CENTERS_HZ: [f64; 10] = [
    31.5, 63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16_000.0,
];
pub const TABLE_T30_S: [f64; 10] = [0.787, 0.799, 0.794, 0.637, 0.561, 0.834, 0.707, 0.672, 0.549, 0.376];
pub const TABLE_EDT_S: [f64; 10] = [0.840, 0.699, 0.747, 0.607, 0.653, 0.663, 0.675, 0.623, 0.530, 0.372];
pub const BROADBAND_T30_S: f64 = 0.581;
pub const BROADBAND_EDT_S: f64 = 0.594;

/// Decay constant: ln(10^3), the amplitude e-folding count over a 60 dB fall.
const DECAY_60DB: f64 = 6.907_755_278_982_137;
const FADE_IN_S: f64 = 0.005;
const FLATTEN_ITERATIONS: usize = 8;
const CALIBRATION_ROUNDS: usize = 6;
const COHERENCE_TOLERANCE: f64 = 0.02;

/// Per-band reverberation targets and distance-attenuation rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomAcoustics {
    pub band_centers_hz: Vec<f64>,
    pub t30_s: Vec<f64>,
    pub edt_s: Vec<f64>,
    pub direct_rule_db_per_doubling: f64,
    pub reverb_rule_db_per_doubling: f64,
    pub reference_distance_m: f64,
    /// Tail energy at the reference distance, in dB relative to a unit
    /// impulse (the far-field direct path of the analytic head).
    pub tail_level_db_at_reference: f64,
}

impl Default for RoomAcoustics {
    fn default() -> Self {
        Self {
            band_centers_hz: OCTAVE_CENTERS_HZ.to_vec(),
            t30_s: TABLE_T30_S.to_vec(),
            edt_s: TABLE_EDT_S.to_vec(),
            direct_rule_db_per_doubling: -6.0,
            reverb_rule_db_per_doubling: -3.0,
            reference_distance_m: 1.0,
            tail_level_db_at_reference: DEFAULT_TAIL_LEVEL_DB,
        }
    }
}

/// Direct-to-reverberant ratio of +3 dB at the reference distance.
pub const DEFAULT_TAIL_LEVEL_DB: f64 = -3.0;

impl RoomAcoustics {
    pub fn validate(&self) -> Result<()> {
        let n = self.band_centers_hz.len();
        if n == 0 {
            return Err(Error::invalid("room needs at least one octave band"));
        }
        if self.t30_s.len() != n || self.edt_s.len() != n {
            return Err(Error::invalid(format!(
                "room has {n} band centres but {} T30 and {} EDT values",
                self.t30_s.len(),
                self.edt_s.len()
            )));
        }
        let positive = |v: &f64| v.is_finite() && *v > 0.0;
        if !self.band_centers_hz.iter().all(positive) {
            return Err(Error::invalid("band centres must be positive"));
        }
        if !self.t30_s.iter().chain(&self.edt_s).all(positive) {
            return Err(Error::invalid("T30 and EDT values must be positive"));
        }
        if !positive(&self.reference_distance_m) {
            return Err(Error::invalid("reference distance must be positive"));
        }
        let finite = [
            self.direct_rule_db_per_doubling,
            self.reverb_rule_db_per_doubling,
            self.tail_level_db_at_reference,
        ];
        if !finite.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("distance rules and tail level must be finite"));
        }
        Ok(())
    }

    pub fn max_t30_s(&self) -> f64 {
        self.t30_s.iter().fold(0.0, |m, &v| m.max(v))
    }
}

/// Level change in dB of a source at `distance_m` relative to
/// `reference_m`, for a rule given in dB per doubling of distance.
///
/// ```
/// use bincue::render::distance_gain_db;
///
/// assert_eq!(distance_gain_db(2.0, 1.0, -6.0).unwrap(), -6.0);
/// assert_eq!(distance_gain_db(2.0, 1.0, -3.0).unwrap(), -3.0);
/// ```
pub fn distance_gain_db(distance_m: f64, reference_m: f64, rule_db_per_doubling: f64) -> Result<f64> {
    if !(distance_m > 0.0 && reference_m > 0.0 && distance_m.is_finite() && reference_m.is_finite()) {
        return Err(Error::invalid(format!(
            "distances must be positive, got {distance_m} and {reference_m}"
        )));
    }
    Ok(rule_db_per_doubling * (distance_m / reference_m).log2())
}

pub(crate) fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Diffuse-field interaural coherence `sin(k d)/(k d)` at `freq_hz`.
pub fn diffuse_coherence(freq_hz: f64, ear_spacing_m: f64, speed_of_sound_m_s: f64) -> f64 {
    let x = 2.0 * PI * freq_hz * ear_spacing_m / speed_of_sound_m_s;
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Binaural diffuse tail: one exponentially decaying noise per octave band,
/// summed. Each band is built from a shared and two private noises, mixed
/// to the diffuse-field coherence of its centre frequency. The band noises
/// have flattened envelopes so that short, narrow bands still show a clean
/// exponential decay. The tail starts at sample 0 with a 5 ms fade-in and
/// its mean per-ear energy is `tail_level_db_at_reference`.
pub fn synth_reverb_tail<R: Rng + ?Sized>(
    room: &RoomAcoustics,
    head: &HeadModel,
    rate: u32,
    duration_s: f64,
    rng: &mut R,
) -> Result<BinauralPair> {
    let bands = synth_reverb_tail_bands(room, head, rate, duration_s, rng)?;
    let n = bands[0].len();
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for b in &bands {
        left.iter_mut().zip(b.left().samples()).for_each(|(a, v)| *a += v);
        right.iter_mut().zip(b.right().samples()).for_each(|(a, v)| *a += v);
    }
    BinauralPair::new(SampledSignal::new(rate, left)?, SampledSignal::new(rate, right)?)
}

/// The per-band components of [`synth_reverb_tail`], already scaled so that
/// their sum is the tail.
pub fn synth_reverb_tail_bands<R: Rng + ?Sized>(
    room: &RoomAcoustics,
    head: &HeadModel,
    rate: u32,
    duration_s: f64,
    rng: &mut R,
) -> Result<Vec<BinauralPair>> {
    room.validate()?;
    head.validate()?;
    if rate == 0 {
        return Err(Error::invalid("sample rate must be positive"));
    }
    if !(duration_s.is_finite() && duration_s >= room.max_t30_s()) {
        return Err(Error::invalid(format!(
            "tail duration {duration_s} s is shorter than the longest T30 ({} s)",
            room.max_t30_s()
        )));
    }
    let fs = f64::from(rate);
    let n = (duration_s * fs).round() as usize;
    let fft = FftPair::new(fft_len(n));
    let nyquist = fs / 2.0;

    let mut out = Vec::with_capacity(room.band_centers_hz.len());
    for (&fc, &t30) in room.band_centers_hz.iter().zip(&room.t30_s) {
        let lo = fc / SQRT_2;
        let hi = (fc * SQRT_2).min(nyquist);
        if lo >= hi {
            return Err(Error::invalid(format!(
                "octave band at {fc} Hz lies above Nyquist ({nyquist} Hz)"
            )));
        }
        let band = Band::new(lo, hi, fs, fft.len);
        if band.bins.is_empty() {
            return Err(Error::invalid(format!(
                "tail of {duration_s} s too short to resolve the {fc} Hz band"
            )));
        }
        let target = diffuse_coherence(fc, head.ear_spacing_m(), head.speed_of_sound_m_s);
        let decay: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (-DECAY_60DB * t / t30).exp() * fade_in(t)
            })
            .collect();
        let [l, r] = band.coherent_noise(target, &decay, &fft, rng);

        // equal energy per ear and a white spectrum across bands
        let weight = (hi - lo).sqrt();
        let shape = |x: Vec<f64>| -> Vec<f64> {
            let shaped: Vec<f64> = x.iter().zip(&decay).map(|(v, d)| v * d).collect();
            let norm = shaped.iter().map(|v| v * v).sum::<f64>().sqrt();
            shaped.into_iter().map(|v| v / norm * weight).collect()
        };
        out.push((shape(l), shape(r)));
    }

    let energy: f64 = {
        let ear = |sel: fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> f64 {
            let mut sum = vec![0.0; n];
            for b in &out {
                sum.iter_mut().zip(sel(b)).for_each(|(a, v)| *a += v);
            }
            sum.iter().map(|v| v * v).sum()
        };
        0.5 * (ear(|b| &b.0) + ear(|b| &b.1))
    };
    if energy <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let scale = (10f64.powf(room.tail_level_db_at_reference / 10.0) / energy).sqrt();
    out.into_iter()
        .map(|(l, r)| {
            let f = |v: Vec<f64>| SampledSignal::new(rate, v.into_iter().map(|x| x * scale).collect());
            BinauralPair::new(f(l)?, f(r)?)
        })
        .collect()
}

fn fade_in(t: f64) -> f64 {
    if t >= FADE_IN_S {
        1.0
    } else {
        0.5 - 0.5 * (PI * t / FADE_IN_S).cos()
    }
}

/// Positive-frequency FFT bins of one band.
struct Band {
    bins: Vec<usize>,
    len: usize,
}

impl Band {
    fn new(lo: f64, hi: f64, fs: f64, len: usize) -> Self {
        let df = fs / len as f64;
        let bins = (1..len.div_ceil(2))
            .filter(|&k| {
                let f = k as f64 * df;
                f >= lo && f < hi
            })
            .collect();
        Self { bins, len }
    }

    fn gaussian<R: Rng + ?Sized>(&self, fft: &FftPair, rng: &mut R) -> Vec<Complex64> {
        let mut spec = vec![Complex64::new(0.0, 0.0); self.len];
        for &k in &self.bins {
            spec[k] = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
        fft.inverse_normalized(&mut spec);
        spec
    }

    /// Keeps only the in-band positive-frequency part of an analytic signal.
    fn project(&self, z: &mut [Complex64], fft: &FftPair) {
        fft.forward.process(z);
        let mut keep = vec![Complex64::new(0.0, 0.0); self.len];
        for &k in &self.bins {
            keep[k] = z[k];
        }
        z.copy_from_slice(&keep);
        fft.inverse_normalized(z);
    }

    /// Pushes the envelope of a band-limited analytic signal towards a
    /// constant while staying inside the band.
    fn flatten(&self, z: &mut [Complex64], n: usize, fft: &FftPair) {
        for _ in 0..FLATTEN_ITERATIONS {
            for (i, c) in z.iter_mut().enumerate() {
                let m = c.norm();
                *c = if i < n && m > 0.0 { *c / m } else { Complex64::new(0.0, 0.0) };
            }
            self.project(z, fft);
        }
    }

    /// Two real band noises, as long as `decay`, whose correlation under
    /// the decay weighting is `target`. Flattening lowers the coherence of
    /// the raw mix, so the mix coefficient is searched by the Illinois
    /// variant of regula falsi; coherence is monotone in the coefficient and
    /// equals ±1 at ±1.
    fn coherent_noise<R: Rng + ?Sized>(
        &self,
        target: f64,
        decay: &[f64],
        fft: &FftPair,
        rng: &mut R,
    ) -> [Vec<f64>; 2] {
        let n = decay.len();
        let shared = self.gaussian(fft, rng);
        let private_l = self.gaussian(fft, rng);
        let private_r = self.gaussian(fft, rng);
        let render = |rho: f64| -> ([Vec<f64>; 2], f64) {
            let a = rho.abs().sqrt();
            let b = (1.0 - rho.abs()).sqrt();
            let mix = |p: &[Complex64], s: f64| -> Vec<Complex64> {
                shared.iter().zip(p).map(|(c, q)| c * (a * s) + q * b).collect()
            };
            let mut l = mix(&private_l, 1.0);
            let mut r = mix(&private_r, rho.signum());
            self.flatten(&mut l, n, fft);
            self.flatten(&mut r, n, fft);
            let l: Vec<f64> = l[..n].iter().map(|c| c.re).collect();
            let r: Vec<f64> = r[..n].iter().map(|c| c.re).collect();
            let measured = weighted_correlation(&l, &r, decay);
            ([l, r], measured)
        };
        // bracket (coefficient, coherence - target)
        let (mut lo, mut hi) = ((-1.0, -1.0 - target), (1.0, 1.0 - target));
        let mut side = 0i8;
        let mut rho = target.clamp(-1.0, 1.0);
        let mut best: Option<([Vec<f64>; 2], f64)> = None;
        for _ in 0..CALIBRATION_ROUNDS {
            let (pair, measured) = render(rho);
            let err = measured - target;
            if best.as_ref().is_none_or(|(_, e)| err.abs() < e.abs()) {
                best = Some((pair, err));
            }
            if err.abs() < COHERENCE_TOLERANCE {
                break;
            }
            if err < 0.0 {
                lo = (rho, err);
                if side == -1 {
                    hi.1 /= 2.0;
                }
                side = -1;
            } else {
                hi = (rho, err);
                if side == 1 {
                    lo.1 /= 2.0;
                }
                side = 1;
            }
            rho = lo.0 - lo.1 * (hi.0 - lo.0) / (hi.1 - lo.1);
        }
        best.map(|(pair, _)| pair).unwrap_or_default()
    }
}

fn weighted_correlation(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for ((x, y), w) in a.iter().zip(b).zip(w) {
        let w2 = w * w;
        ab += x * y * w2;
        aa += x * x * w2;
        bb += y * y * w2;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa * bb).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_gain_examples() {
        assert_eq!(distance_gain_db(2.0, 1.0, -6.0).unwrap(), -6.0);
        assert_eq!(distance_gain_db(1.0, 1.0, -6.0).unwrap(), 0.0);
        assert_eq!(distance_gain_db(2.0, 1.0, -3.0).unwrap(), -3.0);
        assert_eq!(distance_gain_db(0.5, 1.0, -6.0).unwrap(), 6.0);
        assert!(distance_gain_db(0.0, 1.0, -6.0).is_err());
        assert!(distance_gain_db(1.0, -1.0, -6.0).is_err());
    }

    #[test]
    fn defaults_hold_the_reverberation_table() {
        let room = RoomAcoustics::default();
        room.validate().unwrap();
        assert_eq!(room.t30_s.len(), 10);
        assert_eq!(room.t30_s[0], 0.787);
        assert_eq!(room.edt_s[9], 0.372);
        assert_eq!(room.band_centers_hz[4], 500.0);
        assert_eq!(room.max_t30_s(), 0.834);
    }

    #[test]
    fn invalid_rooms_are_rejected() {
        let mut room = RoomAcoustics::default();
        room.t30_s.pop();
        assert!(room.validate().is_err());
        let mut room = RoomAcoustics::default();
        room.edt_s[2] = 0.0;
        assert!(room.validate().is_err());
    }

    #[test]
    fn coherence_model_limits() {
        assert_eq!(diffuse_coherence(0.0, 0.175, 343.0), 1.0);
        let first_zero = 343.0 / (2.0 * 0.175);
        assert!(diffuse_coherence(first_zero, 0.175, 343.0).abs() < 1e-12);
    }

    #[test]
    fn tail_too_short_is_rejected() {
        let room = RoomAcoustics::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(synth_reverb_tail(&room, &HeadModel::default(), 48_000, 0.5, &mut rng).is_err());
    }

    #[test]
    fn tail_level_and_balance() {
        let room = RoomAcoustics::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tail = synth_reverb_tail(&room, &HeadModel::default(), 48_000, 0.9, &mut rng).unwrap();
        let (el, er) = (tail.left().energy(), tail.right().energy());
        let mean_db = 10.0 * (0.5 * (el + er)).log10();
        assert!((mean_db - room.tail_level_db_at_reference).abs() < 1e-9);
        assert!((10.0 * (el / er).log10()).abs() < 0.5);
        assert!(tail.left().samples()[0].abs() < 1e-15);
    }

    #[test]
    fn band_coherence_tracks_diffuse_target() {
        let room = RoomAcoustics::default();
        let head = HeadModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bands = synth_reverb_tail_bands(&room, &head, 48_000, 0.9, &mut rng).unwrap();
        for (b, &fc) in bands.iter().zip(&room.band_centers_hz) {
            let target = diffuse_coherence(fc, head.ear_spacing_m(), head.speed_of_sound_m_s);
            let ones = vec![1.0; b.len()];
            let got = weighted_correlation(b.left().samples(), b.right().samples(), &ones);
            assert!((got - target).abs() < 0.1, "{fc} Hz: {got} vs {target}");
        }
    }

    #[test]
    fn same_seed_same_tail() {
        let room = RoomAcoustics::default();
        let head = HeadModel::default();
        let a = synth_reverb_tail(&room, &head, 48_000, 0.9, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = synth_reverb_tail(&room, &head, 48_000, 0.9, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
