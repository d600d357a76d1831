use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    csv_bytes, opt, write_file, RunConfig, FIXTURE_POSES_CSV, FIXTURE_TRIALS_CSV, LOCALISATION_CSV, ONSETS_CSV,
    REJECTS_CSV, SUBJECT_METRICS_CSV,
};
use crate::behavior::{
    generate_fixture, kinematics_summary, localisation_summary, parse_trial_log, summarize_group, write_poses,
    write_trials, FixtureSpec, KinematicsSummary, LocalisationSummary, ParsedLog, Reject, TrialRecord,
};
use crate::condition::Condition;
use crate::error::{Error, Result};

const LOCALISATION_HEADER: [&str; 10] = [
    "condition",
    "distance_m",
    "n_trials",
    "n_eligible",
    "lateral_precision_deg",
    "lateral_accuracy_deg",
    "polar_precision_deg",
    "polar_accuracy_deg",
    "quadrant_error_rate_pct",
    "n_polar",
];

pub const SUBJECT_METRICS_HEADER: [&str; 11] = [
    "subject_id",
    "condition",
    "n_trials",
    "lateral_precision_deg",
    "lateral_accuracy_deg",
    "polar_precision_deg",
    "polar_accuracy_deg",
    "quadrant_error_rate_pct",
    "rom_deg",
    "mean_onset_s",
    "n_onsets",
];

const ONSETS_HEADER: [&str; 4] = ["trial_id", "subject_id", "condition", "onset_s"];
const REJECTS_HEADER: [&str; 3] = ["file", "line", "message"];

/// Where the trials come from.
#[derive(Debug, Clone, PartialEq)]
pub enum BehaviorInput {
    Files { trials: PathBuf, poses: Option<PathBuf> },
    /// A synthetic fixture drawn from the configured seed; its logs are
    /// written next to the metrics.
    Fixture,
}

/// Metrics of one subject in one condition, pooled over distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectMetrics {
    pub subject_id: String,
    pub condition: Condition,
    pub n_trials: usize,
    pub lateral_precision_deg: Option<f64>,
    pub lateral_accuracy_deg: Option<f64>,
    pub polar_precision_deg: Option<f64>,
    pub polar_accuracy_deg: Option<f64>,
    pub quadrant_error_rate_pct: Option<f64>,
    pub rom_deg: Option<f64>,
    pub mean_onset_s: Option<f64>,
    pub n_onsets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorOutput {
    pub n_trials: usize,
    pub localisation: Vec<LocalisationSummary>,
    pub subjects: Vec<SubjectMetrics>,
    pub kinematics: Option<KinematicsSummary>,
    pub rejects: Vec<Reject>,
}

fn subject_metrics(trials: &[TrialRecord], kin: Option<&KinematicsSummary>) -> Vec<SubjectMetrics> {
    let mut groups: BTreeMap<(&str, Condition), Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        groups.entry((t.subject_id.as_str(), t.condition)).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((subject, condition), ts)| {
            let s = summarize_group(condition, f64::NAN, &ts);
            let rom = kin.and_then(|k| {
                k.rom.iter().find(|r| r.subject_id == subject && r.condition == condition).map(|r| r.rom_deg)
            });
            let onsets: Vec<f64> = kin
                .map(|k| {
                    k.onsets
                        .iter()
                        .filter(|o| o.subject_id == subject && o.condition == condition)
                        .filter_map(|o| o.onset_s)
                        .collect()
                })
                .unwrap_or_default();
            SubjectMetrics {
                subject_id: subject.to_string(),
                condition,
                n_trials: s.n_trials,
                lateral_precision_deg: s.lateral_precision_deg,
                lateral_accuracy_deg: s.lateral_accuracy_deg,
                polar_precision_deg: s.polar_precision_deg,
                polar_accuracy_deg: s.polar_accuracy_deg,
                quadrant_error_rate_pct: s.quadrant_error_rate_pct,
                rom_deg: rom,
                mean_onset_s: (!onsets.is_empty()).then(|| onsets.iter().sum::<f64>() / onsets.len() as f64),
                n_onsets: onsets.len(),
            }
        })
        .collect()
}

fn rejects_csv(rejects: &[Reject]) -> Result<Vec<u8>> {
    csv_bytes(&REJECTS_HEADER, |w| {
        for r in rejects {
            w.write_record([r.file.clone(), r.line.to_string(), r.message.clone()])?;
        }
        Ok(())
    })
}

/// Computes localisation metrics per (condition, distance), per-subject
/// metrics and, when poses are present, movement onsets. Writes
/// `localisation.csv`, `subject_metrics.csv`, `onsets.csv` and
/// `rejects.csv`.
pub fn cmd_behavior(cfg: &RunConfig, input: &BehaviorInput) -> Result<BehaviorOutput> {
    let mut fixture_logs = None;
    let (log, source) = match input {
        BehaviorInput::Files { trials, poses } => {
            (parse_trial_log(trials, poses.as_deref())?, trials.display().to_string())
        }
        BehaviorInput::Fixture => {
            let spec = FixtureSpec {
                n_subjects: cfg.fixture.subjects,
                repeats: cfg.fixture.repeats,
                ..FixtureSpec::default()
            };
            let trials = generate_fixture(&spec, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
            let mut t = Vec::new();
            let mut p = Vec::new();
            write_trials(&mut t, &trials)?;
            write_poses(&mut p, &trials)?;
            fixture_logs = Some((t, p));
            (ParsedLog { trials, rejects: Vec::new() }, "synthetic fixture".to_string())
        }
    };
    let rejects = rejects_csv(&log.rejects)?;
    let trials = log.trials;
    if trials.is_empty() {
        write_file(&cfg.out_dir, REJECTS_CSV, &rejects)?;
        return Err(Error::InsufficientData(format!("no trials in {source}")));
    }

    let with_poses = trials.iter().filter(|t| !t.poses.is_empty()).count();
    let kinematics = if with_poses == 0 {
        None
    } else if with_poses < trials.len() {
        let missing = trials.iter().find(|t| t.poses.is_empty()).expect("counted above");
        write_file(&cfg.out_dir, REJECTS_CSV, &rejects)?;
        return Err(Error::InsufficientData(format!(
            "trial {} has no pose samples while others do",
            missing.trial_id
        )));
    } else {
        match kinematics_summary(&trials, &cfg.kinematics) {
            Ok(k) => Some(k),
            Err(e) => {
                write_file(&cfg.out_dir, REJECTS_CSV, &rejects)?;
                return Err(e);
            }
        }
    };
    let localisation = localisation_summary(&trials);
    let subjects = subject_metrics(&trials, kinematics.as_ref());

    let loc_csv = csv_bytes(&LOCALISATION_HEADER, |w| {
        for s in &localisation {
            w.write_record([
                s.condition.to_string(),
                s.distance_m.to_string(),
                s.n_trials.to_string(),
                s.n_eligible.to_string(),
                opt(s.lateral_precision_deg),
                opt(s.lateral_accuracy_deg),
                opt(s.polar_precision_deg),
                opt(s.polar_accuracy_deg),
                opt(s.quadrant_error_rate_pct),
                s.n_polar.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let subj_csv = csv_bytes(&SUBJECT_METRICS_HEADER, |w| {
        for s in &subjects {
            w.write_record([
                s.subject_id.clone(),
                s.condition.to_string(),
                s.n_trials.to_string(),
                opt(s.lateral_precision_deg),
                opt(s.lateral_accuracy_deg),
                opt(s.polar_precision_deg),
                opt(s.polar_accuracy_deg),
                opt(s.quadrant_error_rate_pct),
                opt(s.rom_deg),
                opt(s.mean_onset_s),
                s.n_onsets.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let onsets_csv = kinematics
        .as_ref()
        .map(|k| {
            csv_bytes(&ONSETS_HEADER, |w| {
                for o in &k.onsets {
                    w.write_record([o.trial_id.clone(), o.subject_id.clone(), o.condition.to_string(), opt(o.onset_s)])?;
                }
                Ok(())
            })
        })
        .transpose()?;

    if let Some((t, p)) = fixture_logs {
        write_file(&cfg.out_dir, FIXTURE_TRIALS_CSV, &t)?;
        write_file(&cfg.out_dir, FIXTURE_POSES_CSV, &p)?;
    }
    write_file(&cfg.out_dir, LOCALISATION_CSV, &loc_csv)?;
    write_file(&cfg.out_dir, SUBJECT_METRICS_CSV, &subj_csv)?;
    if let Some(bytes) = onsets_csv {
        write_file(&cfg.out_dir, ONSETS_CSV, &bytes)?;
    }
    write_file(&cfg.out_dir, REJECTS_CSV, &rejects)?;
    Ok(BehaviorOutput { n_trials: trials.len(), localisation, subjects, kinematics, rejects: log.rejects })
}
