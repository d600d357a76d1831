use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::CueSet;
use crate::condition::Condition;
use crate::error::{Error, Result};

pub const CUE_CSV_HEADER: [&str; 6] = ["azimuth_deg", "distance_m", "condition", "itd_us", "ild_db", "iacc"];

#[derive(Debug, Clone, PartialEq)]
pub struct CueRow {
    pub azimuth_deg: f64,
    pub distance_m: f64,
    pub condition: Condition,
    pub cues: CueSet,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    azimuth_deg: f64,
    distance_m: f64,
    condition: Condition,
    itd_us: f64,
    ild_db: f64,
    iacc: f64,
}

/// Cue rows keyed by (condition, distance, azimuth), kept sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CueTable {
    rows: Vec<CueRow>,
}

impl CueTable {
    pub fn new(mut rows: Vec<CueRow>) -> Result<Self> {
        for r in &rows {
            let c = &r.cues;
            if !(r.azimuth_deg.is_finite() && r.distance_m.is_finite())
                || !(c.itd_us.is_finite() && c.ild_db.is_finite() && c.iacc.is_finite())
            {
                return Err(Error::invalid("cue rows must be finite"));
            }
            if !(0.0..=1.0).contains(&c.iacc) {
                return Err(Error::invalid(format!("IACC {} outside [0, 1]", c.iacc)));
            }
        }
        rows.sort_by(|a, b| {
            a.condition
                .cmp(&b.condition)
                .then(a.distance_m.total_cmp(&b.distance_m))
                .then(a.azimuth_deg.total_cmp(&b.azimuth_deg))
        });
        for w in rows.windows(2) {
            if w[0].condition == w[1].condition
                && w[0].distance_m == w[1].distance_m
                && w[0].azimuth_deg == w[1].azimuth_deg
            {
                return Err(Error::invalid(format!(
                    "duplicate cue row ({}, {} m, {})",
                    w[0].azimuth_deg, w[0].distance_m, w[0].condition
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[CueRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<CueRow> {
        self.rows
    }

    /// Union of two tables; keys must not overlap.
    pub fn merged(self, other: CueTable) -> Result<Self> {
        let mut rows = self.rows;
        rows.extend(other.rows);
        Self::new(rows)
    }

    pub fn filter(&self, condition: Condition) -> impl Iterator<Item = &CueRow> {
        self.rows.iter().filter(move |r| r.condition == condition)
    }

    pub fn mean_iacc(&self, condition: Condition) -> Option<f64> {
        let v: Vec<f64> = self.filter(condition).map(|r| r.cues.iacc).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(CsvRow {
                azimuth_deg: r.azimuth_deg,
                distance_m: r.distance_m,
                condition: r.condition,
                itd_us: r.cues.itd_us,
                ild_db: r.cues.ild_db,
                iacc: r.cues.iacc,
            })?;
        }
        if self.rows.is_empty() {
            out.write_record(CUE_CSV_HEADER)?;
        }
        out.flush().map_err(|e| Error::io("<cue table>", e))?;
        Ok(())
    }

    /// Reads a table written by [`CueTable::write_csv`]. `source` names the
    /// input in error messages.
    pub fn read_csv<R: Read>(r: R, source: &str) -> Result<Self> {
        let schema = |message: String| Error::Schema {
            file: source.to_owned(),
            message,
        };
        let mut reader = csv::Reader::from_reader(r);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        for expected in CUE_CSV_HEADER {
            if !header.iter().any(|h| h == expected) {
                return Err(schema(format!("missing column `{expected}`")));
            }
        }
        if header != CUE_CSV_HEADER {
            return Err(schema(format!(
                "header must be `{}`, found `{}`",
                CUE_CSV_HEADER.join(","),
                header.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<CsvRow>().enumerate() {
            let rec = rec.map_err(|e| schema(format!("line {}: {e}", i + 2)))?;
            rows.push(CueRow {
                azimuth_deg: rec.azimuth_deg,
                distance_m: rec.distance_m,
                condition: rec.condition,
                cues: CueSet {
                    itd_us: rec.itd_us,
                    ild_db: rec.ild_db,
                    iacc: rec.iacc,
                    per_band_ild_db: None,
                },
            });
        }
        Self::new(rows).map_err(|e| schema(e.to_string()))
    }
}

/// Replaces every ILD by `ild / iacc`.
///
/// ```
/// use bincue::cues::{normalize_ild, CueRow, CueSet, CueTable};
/// use bincue::Condition;
///
/// let row = CueRow {
///     azimuth_deg: 30.0,
///     distance_m: 1.0,
///     condition: Condition::Reverberant,
///     cues: CueSet { itd_us: 250.0, ild_db: 5.0, iacc: 0.5, per_band_ild_db: None },
/// };
/// let table = normalize_ild(&CueTable::new(vec![row]).unwrap()).unwrap();
/// assert_eq!(table.rows()[0].cues.ild_db, 10.0);
/// ```
pub fn normalize_ild(table: &CueTable) -> Result<CueTable> {
    let rows = table
        .rows
        .iter()
        .map(|r| {
            if r.cues.iacc <= 0.0 {
                return Err(Error::invalid(format!(
                    "IACC is zero at ({}, {} m, {}); ILD cannot be normalized",
                    r.azimuth_deg, r.distance_m, r.condition
                )));
            }
            let mut r = r.clone();
            r.cues.ild_db /= r.cues.iacc;
            if let Some(bands) = r.cues.per_band_ild_db.as_mut() {
                bands.iter_mut().for_each(|b| *b /= r.cues.iacc);
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    CueTable::new(rows)
}

/// RMS distance between the reverberant ILD curve at one distance and the
/// anechoic reference curve, before and after normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationDeviation {
    pub distance_m: f64,
    pub raw_rms_db: f64,
    pub normalized_rms_db: f64,
}

/// Compares each reverberant distance with the anechoic curve at
/// `reference_distance_m`, matching rows by azimuth.
pub fn normalization_deviation(table: &CueTable, reference_distance_m: f64) -> Result<Vec<NormalizationDeviation>> {
    let reference: BTreeMap<u64, f64> = table
        .filter(Condition::Anechoic)
        .filter(|r| r.distance_m == reference_distance_m)
        .map(|r| (r.azimuth_deg.to_bits(), r.cues.ild_db))
        .collect();
    if reference.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no anechoic rows at the reference distance {reference_distance_m} m"
        )));
    }
    let mut by_distance: BTreeMap<u64, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in table.filter(Condition::Reverberant) {
        let Some(&target) = reference.get(&r.azimuth_deg.to_bits()) else {
            continue;
        };
        if r.cues.iacc <= 0.0 {
            return Err(Error::invalid("IACC is zero; ILD cannot be normalized"));
        }
        by_distance
            .entry(r.distance_m.to_bits())
            .or_default()
            .push((target, r.cues.ild_db, r.cues.ild_db / r.cues.iacc));
    }
    if by_distance.is_empty() {
        return Err(Error::InsufficientData("no reverberant rows match the reference azimuths".into()));
    }
    let rms = |v: &[(f64, f64, f64)], pick: fn(&(f64, f64, f64)) -> f64| {
        (v.iter().map(|t| (pick(t) - t.0).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let mut out: Vec<NormalizationDeviation> = by_distance
        .into_iter()
        .map(|(d, v)| NormalizationDeviation {
            distance_m: f64::from_bits(d),
            raw_rms_db: rms(&v, |t| t.1),
            normalized_rms_db: rms(&v, |t| t.2),
        })
        .collect();
    out.sort_by(|a, b| a.distance_m.total_cmp(&b.distance_m));
    Ok(out)
}
