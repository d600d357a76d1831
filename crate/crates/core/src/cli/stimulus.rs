use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{write_file, RunConfig, STIMULUS_SIDECAR, STIMULUS_WAV};
use crate::error::{Error, Result};
use crate::signals::{build_stimulus, pink_noise, wav, STIMULUS_BOUNDARIES_S};

/// Peak level the written stimulus is scaled down to when it would clip.
const MAX_PEAK: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulusOutput {
    pub wav_path: PathBuf,
    pub frames: usize,
    pub sample_rate_hz: u32,
    pub seed: u64,
    pub core_path: Option<PathBuf>,
    /// True when pink noise stood in for the core audio.
    pub placeholder_core: bool,
    pub segment_boundaries_s: [f64; 3],
    /// Gain applied before quantization (1 unless the peak exceeded 0.99).
    pub gain: f64,
}

/// Builds the 1.6 s stimulus and writes `stimulus.wav` plus a JSON sidecar.
pub fn cmd_stimulus(cfg: &RunConfig, core: Option<&Path>) -> Result<StimulusOutput> {
    let rate = cfg.sample_rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let core_signal = match core {
        Some(p) => wav::read_mono(p)?,
        None => pink_noise(1.0, rate, &mut rng)?,
    };
    let stimulus = build_stimulus(&core_signal, rate, &mut rng)?;
    let peak = stimulus.peak();
    let gain = if peak > MAX_PEAK { MAX_PEAK / peak } else { 1.0 };
    let stimulus = stimulus.scaled(gain);

    let out = StimulusOutput {
        wav_path: cfg.out_dir.join(STIMULUS_WAV),
        frames: stimulus.len(),
        sample_rate_hz: rate,
        seed: cfg.seed,
        core_path: core.map(Path::to_path_buf),
        placeholder_core: core.is_none(),
        segment_boundaries_s: STIMULUS_BOUNDARIES_S,
        gain,
    };
    let sidecar = serde_json::to_vec_pretty(&out).map_err(|e| Error::invalid(e.to_string()))?;
    super::ensure_dir(&cfg.out_dir)?;
    wav::write_mono(&out.wav_path, &stimulus)?;
    write_file(&cfg.out_dir, STIMULUS_SIDECAR, &sidecar)?;
    Ok(out)
}
