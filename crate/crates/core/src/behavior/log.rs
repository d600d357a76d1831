//! Reading and writing the `trials.csv` / `poses.csv` log pair.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::geometry::{DirectionSpherical, SourcePosition};

use super::{HeadPoseSample, TrialRecord};

pub const TRIALS_HEADER: [&str; 8] = [
    "trial_id",
    "subject_id",
    "condition",
    "target_azimuth_deg",
    "target_elevation_deg",
    "target_distance_m",
    "response_yaw_deg",
    "response_pitch_deg",
];

pub const POSES_HEADER: [&str; 6] = ["trial_id", "t_s", "yaw_deg", "pitch_deg", "roll_deg", "in_stimulus"];

/// A malformed row, kept out of the parsed records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub file: String,
    /// 1-based line number in the file.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedLog {
    pub trials: Vec<TrialRecord>,
    pub rejects: Vec<Reject>,
}

/// Parses a trials file and, optionally, its poses file.
pub fn parse_trial_log(trials_path: &Path, poses_path: Option<&Path>) -> Result<ParsedLog> {
    let open = |p: &Path| File::open(p).map_err(|e| Error::io(p, e));
    let name = |p: &Path| p.display().to_string();
    let trials = open(trials_path)?;
    match poses_path {
        Some(pp) => read_trial_log(trials, &name(trials_path), Some((open(pp)?, name(pp).as_str()))),
        None => read_trial_log(trials, &name(trials_path), None::<(File, &str)>),
    }
}

/// Reader form of [`parse_trial_log`]; `*_name` labels diagnostics.
pub fn read_trial_log<R1: Read, R2: Read>(
    trials: R1,
    trials_name: &str,
    poses: Option<(R2, &str)>,
) -> Result<ParsedLog> {
    let (mut records, mut rejects) = read_trials(trials, trials_name)?;
    if let Some((reader, name)) = poses {
        let (by_trial, pose_rejects) = read_poses(reader, name)?;
        rejects.extend(pose_rejects);
        let mut by_trial: HashMap<String, Vec<(u64, HeadPoseSample)>> = by_trial;
        let mut bad_trials = Vec::new();
        for rec in records.iter_mut() {
            let Some(rows) = by_trial.remove(&rec.trial_id) else { continue };
            if let Some(w) = rows.windows(2).find(|w| w[1].1.t_s < w[0].1.t_s) {
                rejects.push(Reject {
                    file: name.to_string(),
                    line: w[1].0,
                    message: format!(
                        "timestamps of trial {} decrease ({} after {}); trial dropped",
                        rec.trial_id, w[1].1.t_s, w[0].1.t_s
                    ),
                });
                bad_trials.push(rec.trial_id.clone());
                continue;
            }
            rec.poses = rows.into_iter().map(|(_, p)| p).collect();
        }
        records.retain(|r| !bad_trials.contains(&r.trial_id));
        let mut orphans: Vec<(u64, String)> =
            by_trial.into_iter().map(|(id, rows)| (rows[0].0, id)).collect();
        orphans.sort();
        for (line, id) in orphans {
            rejects.push(Reject {
                file: name.to_string(),
                line,
                message: format!("pose rows for unknown trial {id:?}"),
            });
        }
    }
    Ok(ParsedLog { trials: records, rejects })
}

fn check_header(headers: &csv::StringRecord, expected: &[&str], file: &str) -> Result<()> {
    if headers.is_empty() || headers.iter().eq(expected.iter().copied()) {
        return Ok(());
    }
    let missing: Vec<&str> = expected.iter().copied().filter(|c| !headers.iter().any(|h| h == *c)).collect();
    let extra: Vec<&str> = headers.iter().filter(|h| !expected.contains(h)).collect();
    let message = if missing.is_empty() && extra.is_empty() {
        format!("columns out of order; expected {}", expected.join(","))
    } else {
        format!("header mismatch: missing [{}], unexpected [{}]", missing.join(", "), extra.join(", "))
    };
    Err(Error::Schema { file: file.to_string(), message })
}

fn num(rec: &csv::StringRecord, i: usize, col: &str) -> std::result::Result<f64, String> {
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("{col}: {raw:?} is not a finite number"))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(r)
}

/// Parses `trials.csv` rows; poses are left empty.
pub fn read_trials<R: Read>(r: R, file: &str) -> Result<(Vec<TrialRecord>, Vec<Reject>)> {
    let mut rdr = reader(r);
    check_header(rdr.headers()?, &TRIALS_HEADER, file)?;
    let mut trials: Vec<TrialRecord> = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (|| -> std::result::Result<TrialRecord, String> {
            if row.len() != TRIALS_HEADER.len() {
                return Err(format!("expected {} fields, found {}", TRIALS_HEADER.len(), row.len()));
            }
            let trial_id = row[0].trim().to_string();
            if trial_id.is_empty() {
                return Err("empty trial_id".into());
            }
            if let Some(first) = seen.get(&trial_id) {
                return Err(format!("duplicate trial_id {trial_id:?} (first on line {first})"));
            }
            let condition: Condition = row[2].parse().map_err(|e: Error| e.to_string())?;
            let target = SourcePosition::from_degrees(
                num(&row, 3, TRIALS_HEADER[3])?,
                num(&row, 4, TRIALS_HEADER[4])?,
                num(&row, 5, TRIALS_HEADER[5])?,
            )
            .map_err(|e| e.to_string())?;
            let response = DirectionSpherical::new(num(&row, 6, TRIALS_HEADER[6])?, num(&row, 7, TRIALS_HEADER[7])?)
                .map_err(|e| e.to_string())?;
            Ok(TrialRecord {
                trial_id,
                subject_id: row[1].trim().to_string(),
                condition,
                target,
                response,
                poses: Vec::new(),
            })
        })();
        match parsed {
            Ok(t) => {
                seen.insert(t.trial_id.clone(), line);
                trials.push(t);
            }
            Err(message) => rejects.push(Reject { file: file.to_string(), line, message }),
        }
    }
    Ok((trials, rejects))
}

/// Parses `poses.csv` rows into per-trial series, keeping each row's line
/// number.
pub fn read_poses<R: Read>(
    r: R,
    file: &str,
) -> Result<(HashMap<String, Vec<(u64, HeadPoseSample)>>, Vec<Reject>)> {
    let mut rdr = reader(r);
    check_header(rdr.headers()?, &POSES_HEADER, file)?;
    let mut out: HashMap<String, Vec<(u64, HeadPoseSample)>> = HashMap::new();
    let mut rejects = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (|| -> std::result::Result<(String, HeadPoseSample), String> {
            if row.len() != POSES_HEADER.len() {
                return Err(format!("expected {} fields, found {}", POSES_HEADER.len(), row.len()));
            }
            let in_stimulus = match row[5].trim() {
                "0" => false,
                "1" => true,
                other => return Err(format!("in_stimulus: {other:?} is not 0 or 1")),
            };
            Ok((
                row[0].trim().to_string(),
                HeadPoseSample {
                    t_s: num(&row, 1, POSES_HEADER[1])?,
                    yaw_deg: num(&row, 2, POSES_HEADER[2])?,
                    pitch_deg: num(&row, 3, POSES_HEADER[3])?,
                    roll_deg: num(&row, 4, POSES_HEADER[4])?,
                    in_stimulus,
                },
            ))
        })();
        match parsed {
            Ok((id, p)) => out.entry(id).or_default().push((line, p)),
            Err(message) => rejects.push(Reject { file: file.to_string(), line, message }),
        }
    }
    Ok((out, rejects))
}

pub fn write_trials<W: Write>(w: W, trials: &[TrialRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TRIALS_HEADER)?;
    for t in trials {
        let d = t.target.direction();
        wtr.write_record([
            t.trial_id.clone(),
            t.subject_id.clone(),
            t.condition.to_string(),
            d.azimuth_deg().to_string(),
            d.elevation_deg().to_string(),
            t.target.distance_m().to_string(),
            t.response.azimuth_deg().to_string(),
            t.response.elevation_deg().to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<trials writer>", e))
}

pub fn write_poses<W: Write>(w: W, trials: &[TrialRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(POSES_HEADER)?;
    for t in trials {
        for p in &t.poses {
            wtr.write_record([
                t.trial_id.clone(),
                p.t_s.to_string(),
                p.yaw_deg.to_string(),
                p.pitch_deg.to_string(),
                p.roll_deg.to_string(),
                if p.in_stimulus { "1" } else { "0" }.to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<poses writer>", e))
}
