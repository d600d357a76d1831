//! The batch commands behind the `bincue` binary: `stimulus`, `sweep`,
//! `behavior` and `report`.
//!
//! Each command computes everything first and writes its files only when
//! it succeeds, so a failed run leaves nothing behind except the reject
//! report of `behavior`.

mod behavior;
mod config;
mod report;
mod stimulus;
mod sweep;

pub use behavior::{cmd_behavior, BehaviorInput, BehaviorOutput, SubjectMetrics, SUBJECT_METRICS_HEADER};
pub use config::{FixtureConfig, Overrides, RunConfig, SweepConfig};
pub use report::cmd_report;
pub use stimulus::{cmd_stimulus, StimulusOutput};
pub use sweep::{cmd_sweep, SweepOutput};

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const STIMULUS_WAV: &str = "stimulus.wav";
pub const STIMULUS_SIDECAR: &str = "stimulus.json";
pub const CUES_CSV: &str = "cues.csv";
pub const CUES_NORMALIZED_CSV: &str = "cues_normalized.csv";
pub const NORMALIZATION_CSV: &str = "normalization.csv";
pub const LOCALISATION_CSV: &str = "localisation.csv";
pub const SUBJECT_METRICS_CSV: &str = "subject_metrics.csv";
pub const ONSETS_CSV: &str = "onsets.csv";
pub const REJECTS_CSV: &str = "rejects.csv";
pub const FIXTURE_TRIALS_CSV: &str = "trials.csv";
pub const FIXTURE_POSES_CSV: &str = "poses.csv";
pub const REPORT_TXT: &str = "report.txt";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `bytes` to `dir/name` and returns the path.
fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Empty string for a missing value.
fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        fill(&mut w)?;
        w.flush().map_err(|e| Error::io("<buffer>", e))?;
    }
    Ok(buf)
}
