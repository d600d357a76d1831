//! Externally measured impulse-response sets.
//!
//! A set is a directory holding stereo WAV files (left ear first) and a
//! `manifest.csv` with the header `file,azimuth_deg,elevation_deg,distance_m`.
//! File names are relative to the directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::head::BinauralIR;
use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::geometry::{DirectionSpherical, SourcePosition};
use crate::signals::wav;

pub const MANIFEST_FILE: &str = "manifest.csv";
const MANIFEST_HEADER: [&str; 4] = ["file", "azimuth_deg", "elevation_deg", "distance_m"];
/// Fraction of the peak magnitude that marks the direct-path onset.
const ONSET_FRACTION: f64 = 0.1;

#[derive(Debug, Deserialize)]
struct ManifestRow {
    file: PathBuf,
    azimuth_deg: f64,
    elevation_deg: f64,
    distance_m: f64,
}

#[derive(Debug, Clone)]
pub struct IrSet {
    irs: Vec<BinauralIR>,
}

impl IrSet {
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = dir.join(MANIFEST_FILE);
        let schema = |message: String| Error::Schema {
            file: manifest.display().to_string(),
            message,
        };
        let mut reader = csv::Reader::from_path(&manifest)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if header != MANIFEST_HEADER {
            return Err(schema(format!(
                "header must be `{}`, found `{}`",
                MANIFEST_HEADER.join(","),
                header.join(",")
            )));
        }
        let mut irs = Vec::new();
        for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| schema(format!("line {line}: {e}")))?;
            let position = SourcePosition::from_degrees(row.azimuth_deg, row.elevation_deg, row.distance_m)
                .map_err(|e| schema(format!("line {line}: {e}")))?;
            let pair = wav::read_stereo(&dir.join(&row.file))?;
            let peak = pair.peak();
            if peak == 0.0 {
                return Err(schema(format!("line {line}: {} is silent", row.file.display())));
            }
            let onset = pair
                .left()
                .samples()
                .iter()
                .zip(pair.right().samples())
                .position(|(l, r)| l.abs().max(r.abs()) >= ONSET_FRACTION * peak)
                .unwrap_or(0);
            irs.push(BinauralIR::new(pair, Some(position), Condition::Anechoic, onset)?);
        }
        if irs.is_empty() {
            return Err(schema("manifest lists no impulse responses".into()));
        }
        let rate = irs[0].sample_rate_hz();
        if irs.iter().any(|ir| ir.sample_rate_hz() != rate) {
            return Err(schema("impulse responses have different sample rates".into()));
        }
        Ok(Self { irs })
    }

    pub fn len(&self) -> usize {
        self.irs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irs.is_empty()
    }

    pub fn irs(&self) -> &[BinauralIR] {
        &self.irs
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.irs[0].sample_rate_hz()
    }

    /// The response whose direction is closest (great-circle) to `d`; ties
    /// go to the entry listed first.
    pub fn nearest(&self, d: DirectionSpherical) -> &BinauralIR {
        let u = d.unit_vector();
        let mut best = &self.irs[0];
        let mut best_dot = f64::NEG_INFINITY;
        for ir in &self.irs {
            let Some(src) = ir.source() else { continue };
            let v = src.direction().unit_vector();
            let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            if dot > best_dot {
                best_dot = dot;
                best = ir;
            }
        }
        best
    }
}
