//! Localisation errors, quadrant errors, range of motion and movement
//! onset computed from trial logs.

mod fixture;
mod kinematics;
mod log;

pub use fixture::{fixture_directions, generate_fixture, FixtureSpec, FIXTURE_DISTANCES_M};
pub use kinematics::{
    kinematics_summary, movement_onset, rom, subject_rom, KinematicsSummary, Onset, OnsetParams, SubjectRom,
    TrialOnset,
};
pub use log::{
    parse_trial_log, read_poses, read_trial_log, read_trials, write_poses, write_trials, ParsedLog, Reject,
    POSES_HEADER, TRIALS_HEADER,
};

use std::collections::BTreeMap;

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::geometry::{spherical_to_interaural, wrap_polar_difference, DirectionSpherical, SourcePosition};

/// Quadrant errors are only scored for targets within this lateral angle.
pub const QE_LATERAL_LIMIT_DEG: f64 = 60.0;
/// Weighted polar errors above this value are quadrant errors.
pub const QE_THRESHOLD_DEG: f64 = 45.0;

/// One head-tracker sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadPoseSample {
    /// Seconds from trial start.
    pub t_s: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    /// Whether the sample falls inside the stimulus window.
    pub in_stimulus: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: String,
    pub subject_id: String,
    pub condition: Condition,
    pub target: SourcePosition,
    /// Head orientation at the button press, as (yaw, pitch).
    pub response: DirectionSpherical,
    pub poses: Vec<HeadPoseSample>,
}

impl TrialRecord {
    /// Target distance rounded to centimetres, used as a grouping key.
    pub fn distance_key_cm(&self) -> i64 {
        (self.target.distance_m() * 100.0).round() as i64
    }
}

/// Signed lateral error `response − target` in interaural coordinates.
pub fn lateral_error(target: DirectionSpherical, response: DirectionSpherical) -> f64 {
    spherical_to_interaural(response).lateral_deg() - spherical_to_interaural(target).lateral_deg()
}

/// Signed polar error `response − target`, wrapped into `(−180, 180]`.
pub fn polar_error(target: DirectionSpherical, response: DirectionSpherical) -> f64 {
    wrap_polar_difference(
        spherical_to_interaural(response).polar_deg(),
        spherical_to_interaural(target).polar_deg(),
    )
}

/// `|polar_error|` scaled by `0.5·cos(2·lateral) + 0.5`, which is 1 on the
/// median plane and 0 at the interaural poles.
///
/// ```
/// use bincue::behavior::weighted_polar_error;
///
/// assert_eq!(weighted_polar_error(0.0, 60.0).unwrap(), 60.0);
/// assert!((weighted_polar_error(60.0, 60.0).unwrap() - 15.0).abs() < 1e-12);
/// ```
pub fn weighted_polar_error(target_lateral_deg: f64, polar_error_deg: f64) -> Result<f64> {
    if !(target_lateral_deg.abs() <= 90.0) {
        return Err(Error::invalid(format!(
            "lateral angle {target_lateral_deg} outside [-90, 90]"
        )));
    }
    let w = 0.5 * (2.0 * target_lateral_deg.to_radians()).cos() + 0.5;
    Ok(polar_error_deg.abs() * w.max(0.0))
}

/// Per-trial errors and quadrant-error classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialErrors {
    pub target_lateral_deg: f64,
    pub lateral_error_deg: f64,
    pub polar_error_deg: f64,
    pub weighted_polar_error_deg: f64,
    /// Target within the lateral range where quadrant errors are scored.
    pub eligible: bool,
    pub quadrant_error: bool,
}

pub fn trial_errors(t: &TrialRecord) -> TrialErrors {
    let target = t.target.direction();
    let target_lateral = spherical_to_interaural(target).lateral_deg();
    let pe = polar_error(target, t.response);
    let weighted = weighted_polar_error(target_lateral, pe).unwrap_or(0.0);
    let eligible = target_lateral.abs() <= QE_LATERAL_LIMIT_DEG;
    TrialErrors {
        target_lateral_deg: target_lateral,
        lateral_error_deg: lateral_error(target, t.response),
        polar_error_deg: pe,
        weighted_polar_error_deg: weighted,
        eligible,
        quadrant_error: eligible && weighted > QE_THRESHOLD_DEG,
    }
}

/// Percentage of eligible trials (target lateral within ±60°) whose
/// weighted polar error exceeds 45°.
pub fn quadrant_error_rate(trials: &[TrialRecord]) -> Result<f64> {
    let errors: Vec<TrialErrors> = trials.iter().map(trial_errors).collect();
    qe_rate(&errors).ok_or_else(|| Error::InsufficientData("no trials with target lateral angle within ±60°".into()))
}

fn qe_rate(errors: &[TrialErrors]) -> Option<f64> {
    let eligible = errors.iter().filter(|e| e.eligible).count();
    let qe = errors.iter().filter(|e| e.quadrant_error).count();
    (eligible > 0).then(|| 100.0 * qe as f64 / eligible as f64)
}

/// Localisation metrics of one (condition, distance) group. Fields that
/// need more trials than the group holds are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalisationSummary {
    pub condition: Condition,
    pub distance_m: f64,
    pub n_trials: usize,
    /// Trials eligible for quadrant-error scoring.
    pub n_eligible: usize,
    /// Eligible trials that are not quadrant errors; the polar metrics use
    /// only these.
    pub n_polar: usize,
    pub lateral_precision_deg: Option<f64>,
    pub lateral_accuracy_deg: Option<f64>,
    pub polar_precision_deg: Option<f64>,
    pub polar_accuracy_deg: Option<f64>,
    pub quadrant_error_rate_pct: Option<f64>,
}

/// Sample standard deviation (`n − 1`); `None` below two values.
pub fn sample_sd(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    Some((ss / (v.len() - 1) as f64).sqrt())
}

fn mean_abs(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64)
}

/// Summarizes the errors of a set of trials as one group.
pub fn summarize_group(condition: Condition, distance_m: f64, trials: &[&TrialRecord]) -> LocalisationSummary {
    let errors: Vec<TrialErrors> = trials.iter().map(|t| trial_errors(t)).collect();
    let lateral: Vec<f64> = errors.iter().map(|e| e.lateral_error_deg).collect();
    let polar: Vec<f64> = errors
        .iter()
        .filter(|e| e.eligible && !e.quadrant_error)
        .map(|e| e.polar_error_deg)
        .collect();
    LocalisationSummary {
        condition,
        distance_m,
        n_trials: errors.len(),
        n_eligible: errors.iter().filter(|e| e.eligible).count(),
        n_polar: polar.len(),
        lateral_precision_deg: sample_sd(&lateral),
        lateral_accuracy_deg: mean_abs(&lateral),
        polar_precision_deg: sample_sd(&polar),
        polar_accuracy_deg: mean_abs(&polar),
        quadrant_error_rate_pct: qe_rate(&errors),
    }
}

/// Groups trials by (condition, distance rounded to 1 cm) in sorted order
/// and summarizes each group.
pub fn localisation_summary(trials: &[TrialRecord]) -> Vec<LocalisationSummary> {
    let mut groups: BTreeMap<(Condition, i64), Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        groups.entry((t.condition, t.distance_key_cm())).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((c, d), ts)| summarize_group(c, d as f64 / 100.0, &ts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{interaural_to_spherical, DirectionInteraural};

    fn dir(az: f64, el: f64) -> DirectionSpherical {
        DirectionSpherical::new(az, el).unwrap()
    }

    fn from_interaural(lat: f64, pol: f64) -> DirectionSpherical {
        interaural_to_spherical(DirectionInteraural::new(lat, pol).unwrap())
    }

    fn trial(id: usize, target: DirectionSpherical, response: DirectionSpherical) -> TrialRecord {
        TrialRecord {
            trial_id: format!("t{id}"),
            subject_id: "s1".into(),
            condition: Condition::Anechoic,
            target: SourcePosition::new(target, 1.0).unwrap(),
            response,
            poses: Vec::new(),
        }
    }

    #[test]
    fn error_examples() {
        assert_eq!(lateral_error(dir(90.0, 45.0), dir(90.0, 45.0)), 0.0);
        assert_eq!(polar_error(dir(90.0, 45.0), dir(90.0, 45.0)), 0.0);
        assert_eq!(lateral_error(dir(0.0, 0.0), dir(-180.0, 0.0)), 0.0);
        assert_eq!(polar_error(dir(0.0, 0.0), dir(-180.0, 0.0)), 180.0);
        let t = from_interaural(30.0, 0.0);
        let r = from_interaural(45.0, -20.0);
        assert!((lateral_error(t, r) - 15.0).abs() < 1e-9);
        assert!((polar_error(t, r) + 20.0).abs() < 1e-9);
    }

    #[test]
    fn weighting_examples() {
        assert_eq!(weighted_polar_error(0.0, 60.0).unwrap(), 60.0);
        assert!((weighted_polar_error(60.0, 60.0).unwrap() - 15.0).abs() < 1e-12);
        assert!(weighted_polar_error(90.0, 170.0).unwrap().abs() < 1e-12);
        assert!(weighted_polar_error(-90.0, 30.0).unwrap().abs() < 1e-12);
        assert!(weighted_polar_error(91.0, 30.0).is_err());
    }

    #[test]
    fn qe_rate_examples() {
        let front = dir(0.0, 0.0);
        let perfect: Vec<TrialRecord> = (0..4).map(|i| trial(i, front, front)).collect();
        assert_eq!(quadrant_error_rate(&perfect).unwrap(), 0.0);

        let mut mixed = perfect.clone();
        mixed[0].response = dir(-180.0, 0.0);
        assert_eq!(quadrant_error_rate(&mixed).unwrap(), 25.0);

        // lateral 75 deg targets never count, even when answered behind
        let side = from_interaural(75.0, 0.0);
        let mut with_side = mixed.clone();
        with_side.push(trial(9, side, from_interaural(75.0, 180.0)));
        assert_eq!(quadrant_error_rate(&with_side).unwrap(), 25.0);
        assert!(quadrant_error_rate(&with_side[4..]).is_err());
    }

    #[test]
    fn summary_of_perfect_trials_is_zero() {
        let ts: Vec<TrialRecord> = [0.0, 45.0, 90.0, 180.0]
            .iter()
            .enumerate()
            .map(|(i, &az)| trial(i, dir(az, 0.0), dir(az, 0.0)))
            .collect();
        let s = localisation_summary(&ts);
        assert_eq!(s.len(), 1);
        let s = &s[0];
        assert_eq!(s.lateral_precision_deg, Some(0.0));
        assert_eq!(s.lateral_accuracy_deg, Some(0.0));
        assert_eq!(s.polar_precision_deg, Some(0.0));
        assert_eq!(s.polar_accuracy_deg, Some(0.0));
        assert_eq!(s.quadrant_error_rate_pct, Some(0.0));
    }

    #[test]
    fn group_of_only_quadrant_errors_has_no_polar_metrics() {
        let ts: Vec<TrialRecord> = (0..3).map(|i| trial(i, dir(0.0, 0.0), dir(-180.0, 0.0))).collect();
        let s = &localisation_summary(&ts)[0];
        assert_eq!(s.quadrant_error_rate_pct, Some(100.0));
        assert_eq!(s.polar_precision_deg, None);
        assert_eq!(s.polar_accuracy_deg, None);
        assert_eq!(s.n_polar, 0);
    }

    #[test]
    fn single_trial_group_has_no_sd() {
        let ts = vec![trial(0, dir(10.0, 0.0), dir(20.0, 0.0))];
        let s = &localisation_summary(&ts)[0];
        assert_eq!(s.lateral_precision_deg, None);
        assert!((s.lateral_accuracy_deg.unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn groups_split_by_condition_and_distance() {
        let mut ts: Vec<TrialRecord> = (0..6).map(|i| trial(i, dir(0.0, 0.0), dir(5.0, 0.0))).collect();
        ts[1].condition = Condition::Reverberant;
        ts[2].target = SourcePosition::new(dir(0.0, 0.0), 2.0).unwrap();
        ts[3].target = SourcePosition::new(dir(0.0, 0.0), 1.004).unwrap();
        let s = localisation_summary(&ts);
        let keys: Vec<_> = s.iter().map(|g| (g.condition, g.distance_m, g.n_trials)).collect();
        assert_eq!(
            keys,
            vec![(Condition::Anechoic, 1.0, 4), (Condition::Anechoic, 2.0, 1), (Condition::Reverberant, 1.0, 1)]
        );
    }

    #[test]
    fn sd_uses_n_minus_one() {
        assert_eq!(sample_sd(&[1.0]), None);
        assert!((sample_sd(&[1.0, 3.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
}
