//! Synthetic trial logs with a known structure, for tests, examples and
//! the CLI.
//!
//! Each (subject, condition) gets a head range of motion; the probability
//! of a quadrant error falls linearly with that ROM, more steeply in the
//! reverberant condition.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::condition::Condition;
use crate::error::Result;
use crate::geometry::{
    interaural_to_spherical, spherical_to_interaural, wrap_polar, DirectionInteraural, DirectionSpherical,
    SourcePosition,
};

use super::{HeadPoseSample, TrialRecord};

pub const FIXTURE_DISTANCES_M: [f64; 3] = [0.8, 1.4, 2.0];
const POSE_RATE_HZ: f64 = 90.0;
const PRE_STIMULUS_S: f64 = 0.2;
const STIMULUS_S: f64 = 1.6;
const POST_STIMULUS_S: f64 = 0.4;
const TURN_DURATION_S: f64 = 0.4;
const TRACKER_NOISE_DEG: f64 = 0.01;
const LATERAL_NOISE_DEG: f64 = 8.0;
const POLAR_NOISE_DEG: f64 = 10.0;

/// Generator settings. The QE probability of a (subject, condition) with
/// ROM `r` is `intercept + slope · r`, clamped to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub n_subjects: usize,
    pub repeats: usize,
    /// Subject ROMs are drawn uniformly from this range (degrees).
    pub rom_range_deg: (f64, f64),
    /// (intercept, slope per degree) for anechoic trials.
    pub anechoic_qe: (f64, f64),
    /// (intercept, slope per degree) for reverberant trials.
    pub reverberant_qe: (f64, f64),
    /// Mean movement onset after stimulus start, per condition (s).
    pub onset_after_stimulus_s: (f64, f64),
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            n_subjects: 1,
            repeats: 5,
            rom_range_deg: (10.0, 60.0),
            anechoic_qe: (0.40, -0.005),
            reverberant_qe: (0.65, -0.010),
            onset_after_stimulus_s: (0.8, 1.15),
        }
    }
}

impl FixtureSpec {
    fn qe_model(&self, c: Condition) -> (f64, f64) {
        match c {
            Condition::Anechoic => self.anechoic_qe,
            Condition::Reverberant => self.reverberant_qe,
        }
    }

    fn onset(&self, c: Condition) -> f64 {
        match c {
            Condition::Anechoic => self.onset_after_stimulus_s.0,
            Condition::Reverberant => self.onset_after_stimulus_s.1,
        }
    }
}

/// The 12 target directions: 8 azimuths 45° apart on the horizontal plane
/// and 4 azimuths 90° apart at 45° elevation.
pub fn fixture_directions() -> Vec<DirectionSpherical> {
    let horizontal = (0..8).map(|k| (-180.0 + 45.0 * k as f64, 0.0));
    let raised = (0..4).map(|k| (-180.0 + 90.0 * k as f64, 45.0));
    horizontal
        .chain(raised)
        .map(|(az, el)| DirectionSpherical::new(az, el).expect("fixed directions are valid"))
        .collect()
}

/// Generates `n_subjects × 2 conditions × 12 directions × 3 distances ×
/// repeats` trials with 90 Hz yaw traces.
pub fn generate_fixture<R: Rng + ?Sized>(spec: &FixtureSpec, rng: &mut R) -> Result<Vec<TrialRecord>> {
    let directions = fixture_directions();
    let lateral_noise = Normal::new(0.0, LATERAL_NOISE_DEG).expect("positive sd");
    let polar_noise = Normal::new(0.0, POLAR_NOISE_DEG).expect("positive sd");
    let jitter = Normal::new(0.0, 1.0).expect("positive sd");
    let mut trials = Vec::new();
    for s in 0..spec.n_subjects {
        let subject_id = format!("s{:02}", s + 1);
        for condition in Condition::ALL {
            let subject_rom = rng.random_range(spec.rom_range_deg.0..=spec.rom_range_deg.1);
            let (a, b) = spec.qe_model(condition);
            let p_qe = (a + b * subject_rom).clamp(0.0, 1.0);
            let mut k = 0;
            for &distance in &FIXTURE_DISTANCES_M {
                for &dir in &directions {
                    for _ in 0..spec.repeats {
                        k += 1;
                        let target = SourcePosition::new(dir, distance)?;
                        let ia = spherical_to_interaural(dir);
                        let confused = rng.random_bool(p_qe);
                        let lat = (ia.lateral_deg() + lateral_noise.sample(rng)).clamp(-90.0, 90.0);
                        let flip = if confused { 180.0 } else { 0.0 };
                        let pol = wrap_polar(ia.polar_deg() + flip + polar_noise.sample(rng));
                        let response = interaural_to_spherical(DirectionInteraural::new(lat, pol)?);
                        let spread: f64 = 1.0 + 0.1 * jitter.sample(rng);
                        let amplitude = subject_rom * spread.max(0.1);
                        let sign = if dir.azimuth_deg() < 0.0 { -1.0 } else { 1.0 };
                        let onset = PRE_STIMULUS_S + spec.onset(condition) + 0.1 * jitter.sample(rng);
                        let poses = yaw_trace(sign * amplitude, onset.max(PRE_STIMULUS_S), rng);
                        trials.push(TrialRecord {
                            trial_id: format!("{subject_id}-{}-{k:03}", condition.as_str()),
                            subject_id: subject_id.clone(),
                            condition,
                            target,
                            response,
                            poses,
                        });
                    }
                }
            }
        }
    }
    Ok(trials)
}

/// Minimum-jerk yaw turn of `amplitude` degrees starting at `onset_s`,
/// plus tracker noise.
fn yaw_trace<R: Rng + ?Sized>(amplitude: f64, onset_s: f64, rng: &mut R) -> Vec<HeadPoseSample> {
    let noise = Normal::new(0.0, TRACKER_NOISE_DEG).expect("positive sd");
    let total = PRE_STIMULUS_S + STIMULUS_S + POST_STIMULUS_S;
    let n = (total * POSE_RATE_HZ).round() as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / POSE_RATE_HZ;
            let s = ((t - onset_s) / TURN_DURATION_S).clamp(0.0, 1.0);
            let yaw = amplitude * s.powi(3) * (10.0 - 15.0 * s + 6.0 * s * s);
            HeadPoseSample {
                t_s: t,
                yaw_deg: yaw + noise.sample(rng),
                pitch_deg: noise.sample(rng),
                roll_deg: noise.sample(rng),
                in_stimulus: (PRE_STIMULUS_S..PRE_STIMULUS_S + STIMULUS_S).contains(&t),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::quadrant_error_rate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn directions_cover_the_grid() {
        let d = fixture_directions();
        assert_eq!(d.len(), 12);
        assert_eq!(d.iter().filter(|d| d.elevation_deg() == 45.0).count(), 4);
    }

    #[test]
    fn default_fixture_has_360_trials() {
        let t = generate_fixture(&FixtureSpec::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(t.len(), 360);
        assert_eq!(t.iter().filter(|t| t.condition == Condition::Reverberant).count(), 180);
        assert!(t.iter().all(|t| t.poses.len() == 198));
        let mut ids: Vec<&str> = t.iter().map(|t| t.trial_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 360);
    }

    #[test]
    fn same_seed_same_fixture() {
        let a = generate_fixture(&FixtureSpec::default(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_fixture(&FixtureSpec::default(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn certain_confusion_gives_full_qe_rate() {
        let spec = FixtureSpec { anechoic_qe: (1.0, 0.0), reverberant_qe: (0.0, 0.0), ..FixtureSpec::default() };
        let t = generate_fixture(&spec, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (an, rev): (Vec<_>, Vec<_>) = t.into_iter().partition(|t| t.condition == Condition::Anechoic);
        assert_eq!(quadrant_error_rate(&an).unwrap(), 100.0);
        assert!(quadrant_error_rate(&rev).unwrap() < 5.0);
    }
}
