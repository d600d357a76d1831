use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{csv_bytes, write_file, RunConfig, CUES_CSV, CUES_NORMALIZED_CSV, NORMALIZATION_CSV};
use crate::condition::Condition;
use crate::cues::{cue_sweep, normalization_deviation, normalize_ild, CueTable, NormalizationDeviation};
use crate::error::Result;

const NORMALIZATION_HEADER: [&str; 3] = ["distance_m", "raw_rms_db", "normalized_rms_db"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub table: CueTable,
    pub normalized: CueTable,
    /// Present when both conditions were swept and the reference distance
    /// is on the grid.
    pub deviations: Option<Vec<NormalizationDeviation>>,
    pub mean_iacc: Vec<(Condition, f64)>,
}

/// Each condition draws from its own stream of the seeded generator, so
/// sweeping one condition alone gives the same rows as sweeping both.
fn condition_rng(seed: u64, c: Condition) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match c {
        Condition::Anechoic => 1,
        Condition::Reverberant => 2,
    });
    rng
}

/// Runs the cue sweep for every configured condition and writes
/// `cues.csv`, `cues_normalized.csv` and, when possible,
/// `normalization.csv`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    let grid = cfg.sweep.grid();
    let mut table: Option<CueTable> = None;
    for c in cfg.conditions() {
        let room = (c == Condition::Reverberant).then_some(&cfg.room);
        let t = cue_sweep(&cfg.head, room, &grid, cfg.sample_rate_hz, &mut condition_rng(cfg.seed, c))?;
        table = Some(match table {
            Some(acc) => acc.merged(t)?,
            None => t,
        });
    }
    let table = table.expect("validated config has at least one condition");
    let normalized = normalize_ild(&table)?;
    let both = cfg.conditions().len() == Condition::ALL.len();
    let on_grid = cfg.sweep.distances_m.contains(&cfg.sweep.reference_distance_m);
    let deviations = if both && on_grid {
        Some(normalization_deviation(&table, cfg.sweep.reference_distance_m)?)
    } else {
        None
    };
    let mean_iacc = cfg
        .conditions()
        .into_iter()
        .filter_map(|c| table.mean_iacc(c).map(|m| (c, m)))
        .collect();

    let mut cues = Vec::new();
    table.write_csv(&mut cues)?;
    let mut cues_norm = Vec::new();
    normalized.write_csv(&mut cues_norm)?;
    let deviation_csv = deviations
        .as_ref()
        .map(|devs| {
            csv_bytes(&NORMALIZATION_HEADER, |w| {
                for d in devs {
                    w.write_record([d.distance_m.to_string(), d.raw_rms_db.to_string(), d.normalized_rms_db.to_string()])?;
                }
                Ok(())
            })
        })
        .transpose()?;
    write_file(&cfg.out_dir, CUES_CSV, &cues)?;
    write_file(&cfg.out_dir, CUES_NORMALIZED_CSV, &cues_norm)?;
    if let Some(bytes) = deviation_csv {
        write_file(&cfg.out_dir, NORMALIZATION_CSV, &bytes)?;
    }
    Ok(SweepOutput { table, normalized, deviations, mean_iacc })
}
