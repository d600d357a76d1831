//! Head range of motion and movement onset from yaw traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::signals::savitzky_golay;

use super::{HeadPoseSample, TrialRecord};

/// Settings of [`movement_onset`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnsetParams {
    /// Onset threshold as a fraction of the peak yaw speed.
    pub threshold_fraction: f64,
    /// Peak speeds below this (°/s) count as no movement.
    pub noise_floor_deg_s: f64,
    /// Savitzky-Golay window (odd, in samples) applied to the velocity.
    pub sg_window: usize,
    pub sg_order: usize,
}

impl Default for OnsetParams {
    fn default() -> Self {
        OnsetParams { threshold_fraction: 0.05, noise_floor_deg_s: 5.0, sg_window: 11, sg_order: 3 }
    }
}

impl OnsetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "onset threshold fraction must lie in (0, 1), got {}",
                self.threshold_fraction
            )));
        }
        if !(self.noise_floor_deg_s >= 0.0) {
            return Err(Error::invalid("onset noise floor must be non-negative"));
        }
        if self.sg_window.is_multiple_of(2) || self.sg_order >= self.sg_window {
            return Err(Error::invalid(format!(
                "Savitzky-Golay window {} / order {} invalid (odd window above the order required)",
                self.sg_window, self.sg_order
            )));
        }
        Ok(())
    }
}

/// Movement onset of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Onset {
    /// Onset of the earliest suprathreshold speed peak, in trial time.
    pub onset_s: f64,
    /// One onset per suprathreshold run, in time order.
    pub all_onsets_s: Vec<f64>,
    /// Peak smoothed yaw speed in °/s.
    pub peak_speed_deg_s: f64,
}

/// Removes ±360° jumps from a yaw trace.
fn unwrap_deg(yaw: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for y in yaw {
        if let Some(p) = prev {
            let step = y - p;
            offset -= 360.0 * (step / 360.0).round();
        }
        prev = Some(y);
        out.push(y + offset);
    }
    out
}

/// Yaw range of motion: largest absolute deviation from the first sample of
/// the stimulus window, over that window.
pub fn rom(trial: &TrialRecord) -> Result<f64> {
    let window: Vec<&HeadPoseSample> = trial.poses.iter().filter(|p| p.in_stimulus).collect();
    if window.is_empty() {
        return Err(Error::InsufficientData(format!(
            "trial {} has no pose samples in the stimulus window",
            trial.trial_id
        )));
    }
    let yaw = unwrap_deg(window.iter().map(|p| p.yaw_deg));
    let start = yaw[0];
    Ok(yaw.iter().fold(0.0f64, |m, y| m.max((y - start).abs())))
}

/// Mean trial ROM.
pub fn subject_rom(trials: &[&TrialRecord]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::InsufficientData("no trials to average".into()));
    }
    let mut sum = 0.0;
    for t in trials {
        sum += rom(t)?;
    }
    Ok(sum / trials.len() as f64)
}

/// Yaw velocity in °/s: central differences inside, one-sided at the ends.
fn yaw_velocity(t: &[f64], yaw: &[f64]) -> Vec<f64> {
    let n = t.len();
    let slope = |a: usize, b: usize| {
        let dt = t[b] - t[a];
        if dt > 0.0 { (yaw[b] - yaw[a]) / dt } else { 0.0 }
    };
    (0..n)
        .map(|i| match i {
            0 => slope(0, 1),
            _ if i == n - 1 => slope(n - 2, n - 1),
            _ => slope(i - 1, i + 1),
        })
        .collect()
}

/// Movement onset over the whole pose series of a trial.
///
/// Yaw speed is smoothed, the threshold set at `threshold_fraction` of the
/// peak speed, and each suprathreshold peak walked back to the last sample
/// still at or above threshold. Returns `None` when the peak speed stays
/// below the noise floor.
pub fn movement_onset(poses: &[HeadPoseSample], params: &OnsetParams) -> Result<Option<Onset>> {
    params.validate()?;
    if poses.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "movement onset needs at least 3 pose samples, got {}",
            poses.len()
        )));
    }
    let t: Vec<f64> = poses.iter().map(|p| p.t_s).collect();
    let yaw = unwrap_deg(poses.iter().map(|p| p.yaw_deg));
    let velocity = savitzky_golay(&yaw_velocity(&t, &yaw), params.sg_window, params.sg_order)?;
    let speed: Vec<f64> = velocity.iter().map(|v| v.abs()).collect();
    let peak = speed.iter().copied().fold(0.0, f64::max);
    if peak < params.noise_floor_deg_s {
        return Ok(None);
    }
    let threshold = params.threshold_fraction * peak;
    // every suprathreshold run holds at least one peak, and walking back
    // from any of them stops at the run's first sample
    let mut onsets = Vec::new();
    let mut inside = false;
    for (i, &s) in speed.iter().enumerate() {
        let above = s >= threshold;
        if above && !inside {
            onsets.push(t[i]);
        }
        inside = above;
    }
    Ok(Some(Onset { onset_s: onsets[0], all_onsets_s: onsets, peak_speed_deg_s: peak }))
}

/// Mean ROM of one subject in one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRom {
    pub subject_id: String,
    pub condition: Condition,
    pub rom_deg: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOnset {
    pub trial_id: String,
    pub subject_id: String,
    pub condition: Condition,
    /// `None` when the head did not move.
    pub onset_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicsSummary {
    /// Sorted by (subject, condition).
    pub rom: Vec<SubjectRom>,
    /// In input order.
    pub onsets: Vec<TrialOnset>,
}

/// ROM per (subject, condition) and movement onset per trial.
pub fn kinematics_summary(trials: &[TrialRecord], params: &OnsetParams) -> Result<KinematicsSummary> {
    let mut groups: BTreeMap<(&str, Condition), Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        if t.poses.is_empty() {
            return Err(Error::InsufficientData(format!("trial {} has no pose samples", t.trial_id)));
        }
        groups.entry((t.subject_id.as_str(), t.condition)).or_default().push(t);
    }
    let rom = groups
        .into_iter()
        .map(|((subject, condition), ts)| {
            Ok(SubjectRom {
                subject_id: subject.to_string(),
                condition,
                rom_deg: subject_rom(&ts)?,
                n_trials: ts.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let onsets = trials
        .iter()
        .map(|t| {
            Ok(TrialOnset {
                trial_id: t.trial_id.clone(),
                subject_id: t.subject_id.clone(),
                condition: t.condition,
                onset_s: movement_onset(&t.poses, params)?.map(|o| o.onset_s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KinematicsSummary { rom, onsets })
}
