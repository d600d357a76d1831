//! Analytic spherical-head impulse responses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::geometry::SourcePosition;
use crate::signals::{convolve, BinauralPair, SampledSignal};

/// Leading silence (samples) in every analytic IR, so that the non-causal
/// half of the interpolation and shadow kernels fits before the arrival.
pub const PRE_DELAY_SAMPLES: usize = 64;

const FRAC_DELAY_TAPS: usize = 32;
const SHADOW_HALF_LEN: usize = 48;
const SHADOW_GRID: usize = 1024;

/// Rigid-sphere head with ears at ±90° azimuth on the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadModel {
    pub head_radius_m: f64,
    pub speed_of_sound_m_s: f64,
    /// Shadow-filter cutoff for a source straight in front of the ear.
    pub ipsilateral_cutoff_hz: f64,
    /// Shadow-filter cutoff for a source diametrically opposite the ear.
    pub contralateral_cutoff_hz: f64,
}

impl Default for HeadModel {
    fn default() -> Self {
        Self {
            head_radius_m: 0.0875,
            speed_of_sound_m_s: 343.0,
            ipsilateral_cutoff_hz: 10_000.0,
            contralateral_cutoff_hz: 1_500.0,
        }
    }
}

impl HeadModel {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.head_radius_m) {
            return Err(Error::invalid(format!(
                "head radius must be positive, got {}",
                self.head_radius_m
            )));
        }
        if !positive(self.speed_of_sound_m_s) {
            return Err(Error::invalid(format!(
                "speed of sound must be positive, got {}",
                self.speed_of_sound_m_s
            )));
        }
        if !positive(self.ipsilateral_cutoff_hz) || !positive(self.contralateral_cutoff_hz) {
            return Err(Error::invalid("head-shadow cutoffs must be positive"));
        }
        Ok(())
    }

    /// Distance between the two ears.
    pub fn ear_spacing_m(&self) -> f64 {
        2.0 * self.head_radius_m
    }

    /// Path from `p` to one ear and the incidence angle at that ear.
    pub fn ear_path(&self, p: &SourcePosition, ear: Ear) -> Result<EarPath> {
        self.validate()?;
        let a = self.head_radius_m;
        let r = p.distance_m();
        if r <= a {
            return Err(Error::SourceInsideHead {
                distance_m: r,
                radius_m: a,
            });
        }
        let s = p.to_cartesian();
        let side = ear.sign();
        let cos_gamma = (s[1] * side / r).clamp(-1.0, 1.0);
        let gamma = cos_gamma.acos();
        // beyond this angle the straight line to the ear crosses the sphere
        let visible = (a / r).acos();
        let path_m = if gamma <= visible {
            (s[0] * s[0] + (s[1] - side * a).powi(2) + s[2] * s[2]).sqrt()
        } else {
            (r * r - a * a).sqrt() + a * (gamma - visible)
        };
        Ok(EarPath {
            path_m,
            incidence_deg: gamma.to_degrees(),
        })
    }

    /// Shadow cutoff for an incidence angle in degrees (0 = facing the ear).
    pub fn shadow_cutoff_hz(&self, incidence_deg: f64) -> f64 {
        let t = (incidence_deg / 180.0).clamp(0.0, 1.0);
        self.ipsilateral_cutoff_hz * (self.contralateral_cutoff_hz / self.ipsilateral_cutoff_hz).powf(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ear {
    Left,
    Right,
}

impl Ear {
    fn sign(self) -> f64 {
        match self {
            Ear::Left => 1.0,
            Ear::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarPath {
    pub path_m: f64,
    /// Angle between the source direction and the ear axis, seen from the
    /// head centre.
    pub incidence_deg: f64,
}

/// A two-ear impulse response with its source metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralIR {
    pair: BinauralPair,
    source: Option<SourcePosition>,
    condition: Condition,
    onset_index: usize,
}

impl BinauralIR {
    pub fn new(
        pair: BinauralPair,
        source: Option<SourcePosition>,
        condition: Condition,
        onset_index: usize,
    ) -> Result<Self> {
        if onset_index >= pair.len() {
            return Err(Error::invalid(format!(
                "onset index {onset_index} beyond IR length {}",
                pair.len()
            )));
        }
        Ok(Self {
            pair,
            source,
            condition,
            onset_index,
        })
    }

    pub fn pair(&self) -> &BinauralPair {
        &self.pair
    }

    pub fn left(&self) -> &SampledSignal {
        self.pair.left()
    }

    pub fn right(&self) -> &SampledSignal {
        self.pair.right()
    }

    pub fn source(&self) -> Option<&SourcePosition> {
        self.source.as_ref()
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    /// Sample index of the first direct-path arrival.
    pub fn onset_index(&self) -> usize {
        self.onset_index
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.pair.sample_rate_hz()
    }
}

/// Direct-path IR of a point source for the spherical head.
///
/// Each ear receives a delayed, attenuated impulse: the delay follows the
/// straight or sphere-wrapped path, the gain is `distance / path` (so a
/// far source gives unit gain), and a zero-phase low-pass whose cutoff
/// slides from the ipsilateral to the contralateral value with the
/// incidence angle models the head shadow.
pub fn spherical_head_ir(head: &HeadModel, p: &SourcePosition, rate: u32) -> Result<BinauralIR> {
    if rate == 0 {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let fs = f64::from(rate);
    let left = head.ear_path(p, Ear::Left)?;
    let right = head.ear_path(p, Ear::Right)?;

    let delays = [left, right]
        .map(|e| e.path_m / head.speed_of_sound_m_s * fs + PRE_DELAY_SAMPLES as f64);
    let len = delays.iter().fold(0.0f64, |m, &d| m.max(d)).floor() as usize
        + FRAC_DELAY_TAPS
        + SHADOW_HALF_LEN
        + 1;
    let channel = |e: EarPath, delay: f64| -> Result<SampledSignal> {
        let cutoff = head.shadow_cutoff_hz(e.incidence_deg).min(0.45 * fs);
        let gain = p.distance_m() / e.path_m;
        let (start, frac) = fractional_delay(delay);
        let kernel = convolve(&frac, &shadow_fir(cutoff, fs));
        let offset = start - SHADOW_HALF_LEN;
        let mut out = vec![0.0; len];
        for (i, k) in kernel.iter().enumerate() {
            out[offset + i] = gain * k;
        }
        SampledSignal::new(rate, out)
    };
    let pair = BinauralPair::new(channel(left, delays[0])?, channel(right, delays[1])?)?;
    let onset = delays[0].min(delays[1]).floor() as usize;
    BinauralIR::new(pair, Some(*p), Condition::Anechoic, onset)
}

/// Windowed-sinc interpolator for a delay of `delay` samples: returns the
/// index of the first tap and the unit-DC taps.
fn fractional_delay(delay: f64) -> (usize, Vec<f64>) {
    let half = (FRAC_DELAY_TAPS / 2) as f64;
    let base = delay.floor() as usize;
    let start = base + 1 - FRAC_DELAY_TAPS / 2;
    let mut taps: Vec<f64> = (0..FRAC_DELAY_TAPS)
        .map(|i| {
            let x = (start + i) as f64 - delay;
            let sinc = if x.abs() < 1e-12 {
                1.0
            } else {
                (PI * x).sin() / (PI * x)
            };
            let w = 0.42 + 0.5 * (PI * x / half).cos() + 0.08 * (2.0 * PI * x / half).cos();
            sinc * w.max(0.0)
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    (start, taps)
}

/// Symmetric FIR with the magnitude of a one-pole low-pass,
/// `1/√(1 + (f/fc)²)`, and no phase shift. Centred at `SHADOW_HALF_LEN`.
fn shadow_fir(cutoff_hz: f64, fs: f64) -> Vec<f64> {
    let m = SHADOW_GRID;
    let mag = |j: usize| {
        let f = j as f64 * fs / m as f64;
        1.0 / (1.0 + (f / cutoff_hz).powi(2)).sqrt()
    };
    let h = SHADOW_HALF_LEN as i64;
    let mut taps: Vec<f64> = (-h..=h)
        .map(|k| {
            let mut acc = mag(0) + mag(m / 2) * if k % 2 == 0 { 1.0 } else { -1.0 };
            for j in 1..m / 2 {
                acc += 2.0 * mag(j) * (2.0 * PI * (j as f64) * (k as f64) / m as f64).cos();
            }
            let w = 0.5 + 0.5 * (PI * k as f64 / (h + 1) as f64).cos();
            acc / m as f64 * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

#[cfg(test)]
mod tests {
    use super::*;

    const RATE: u32 = 48_000;

    fn ir(az: f64, d: f64) -> BinauralIR {
        spherical_head_ir(
            &HeadModel::default(),
            &SourcePosition::from_degrees(az, 0.0, d).unwrap(),
            RATE,
        )
        .unwrap()
    }

    fn centroid(x: &[f64]) -> f64 {
        let e: f64 = x.iter().map(|v| v * v).sum();
        x.iter().enumerate().map(|(i, v)| i as f64 * v * v).sum::<f64>() / e
    }

    #[test]
    fn frontal_source_is_symmetric() {
        let h = HeadModel::default();
        let p = SourcePosition::from_degrees(0.0, 0.0, 1.3).unwrap();
        let l = h.ear_path(&p, Ear::Left).unwrap();
        let r = h.ear_path(&p, Ear::Right).unwrap();
        assert!((l.path_m - r.path_m).abs() / h.speed_of_sound_m_s < 1e-6);
        let x = ir(0.0, 1.3);
        let de = 10.0 * (x.left().energy() / x.right().energy()).log10();
        assert!(de.abs() < 0.01);
    }

    #[test]
    fn lateral_far_field_delay_matches_woodworth() {
        let h = HeadModel::default();
        let p = SourcePosition::from_degrees(90.0, 0.0, 100.0).unwrap();
        let l = h.ear_path(&p, Ear::Left).unwrap();
        let r = h.ear_path(&p, Ear::Right).unwrap();
        let itd = (r.path_m - l.path_m) / h.speed_of_sound_m_s;
        let woodworth = h.head_radius_m / h.speed_of_sound_m_s * (PI / 2.0 + 1.0);
        assert!((itd - woodworth).abs() < 25e-6, "{itd} vs {woodworth}");
    }

    #[test]
    fn unoccluded_path_is_straight_line() {
        let h = HeadModel::default();
        let p = SourcePosition::from_cartesian([0.3, 0.5, 0.1]).unwrap();
        let l = h.ear_path(&p, Ear::Left).unwrap();
        let direct = (0.3f64.powi(2) + (0.5 - 0.0875f64).powi(2) + 0.01).sqrt();
        assert!((l.path_m - direct).abs() < 1e-12);
    }

    #[test]
    fn wrapped_path_is_continuous_at_tangent() {
        let h = HeadModel::default();
        let r = 0.6;
        let visible = (h.head_radius_m / r).acos().to_degrees();
        // azimuth measured from the left ear axis: az = 90 - gamma
        let before = SourcePosition::from_degrees(90.0 - (visible - 1e-7), 0.0, r).unwrap();
        let after = SourcePosition::from_degrees(90.0 - (visible + 1e-7), 0.0, r).unwrap();
        let a = h.ear_path(&before, Ear::Left).unwrap().path_m;
        let b = h.ear_path(&after, Ear::Left).unwrap().path_m;
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn source_inside_head_is_rejected() {
        let p = SourcePosition::from_degrees(0.0, 0.0, 0.05).unwrap();
        assert!(matches!(
            spherical_head_ir(&HeadModel::default(), &p, RATE),
            Err(Error::SourceInsideHead { .. })
        ));
    }

    #[test]
    fn arrival_time_follows_path() {
        let h = HeadModel::default();
        let p = SourcePosition::from_degrees(50.0, 10.0, 1.7).unwrap();
        let x = spherical_head_ir(&h, &p, RATE).unwrap();
        for (sig, ear) in [(x.left(), Ear::Left), (x.right(), Ear::Right)] {
            let expected = h.ear_path(&p, ear).unwrap().path_m / h.speed_of_sound_m_s
                * f64::from(RATE)
                + PRE_DELAY_SAMPLES as f64;
            // zero-phase shadow filter: the energy centroid sits on the delay
            assert!((centroid(sig.samples()) - expected).abs() < 0.05, "{ear:?}");
        }
        assert!(x.onset_index() <= x.left().len());
    }

    #[test]
    fn ipsilateral_ear_is_louder_and_closer_gives_larger_ratio() {
        let ratio = |d: f64| {
            let x = ir(90.0, d);
            10.0 * (x.left().energy() / x.right().energy()).log10()
        };
        assert!(ratio(2.0) > 0.0);
        assert!(ratio(0.5) > ratio(2.0));
    }

    #[test]
    fn shadow_filter_has_unit_dc_and_falls_off() {
        let taps = shadow_fir(1500.0, 48_000.0);
        assert_eq!(taps.len(), 2 * SHADOW_HALF_LEN + 1);
        assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let gain = |f: f64| {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, t) in taps.iter().enumerate() {
                let w = 2.0 * PI * f / 48_000.0 * (k as f64 - SHADOW_HALF_LEN as f64);
                re += t * w.cos();
                im += t * w.sin();
            }
            (re * re + im * im).sqrt()
        };
        assert!((20.0 * gain(1500.0).log10() + 3.01).abs() < 0.5);
        assert!(gain(12_000.0) < 0.2);
    }

    #[test]
    fn fractional_delay_taps_have_unit_dc() {
        for d in [64.0, 64.25, 100.5, 123.999] {
            let (start, taps) = fractional_delay(d);
            assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let c: f64 = taps.iter().enumerate().map(|(i, t)| (start + i) as f64 * t).sum();
            assert!((c - d).abs() < 0.01, "{d}: {c}");
        }
    }
}
