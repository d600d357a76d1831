//! Run configuration: built-in defaults, overridden by a TOML file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::behavior::OnsetParams;
use crate::condition::Condition;
use crate::cues::{SweepGrid, DEFAULT_AZIMUTH_STEP_DEG, DEFAULT_DISTANCES_M};
use crate::error::{Error, Result};
use crate::render::{HeadModel, RoomAcoustics};
use crate::signals::DEFAULT_SAMPLE_RATE_HZ;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub azimuth_step_deg: f64,
    pub distances_m: Vec<f64>,
    pub conditions: Vec<Condition>,
    /// Anechoic distance whose ILD curve is the normalization reference.
    pub reference_distance_m: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            azimuth_step_deg: DEFAULT_AZIMUTH_STEP_DEG,
            distances_m: DEFAULT_DISTANCES_M.to_vec(),
            conditions: Condition::ALL.to_vec(),
            reference_distance_m: 0.5,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> SweepGrid {
        SweepGrid { azimuth_step_deg: self.azimuth_step_deg, distances_m: self.distances_m.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureConfig {
    pub subjects: usize,
    pub repeats: usize,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig { subjects: 1, repeats: 5 }
    }
}

/// Everything a command needs besides its input files.
///
/// ```
/// use bincue::cli::RunConfig;
///
/// let cfg = RunConfig::from_toml_str("seed = 7\n[sweep]\nazimuth_step_deg = 45.0\n").unwrap();
/// assert_eq!(cfg.seed, 7);
/// assert_eq!(cfg.sweep.distances_m, vec![0.5, 1.0, 1.5, 2.0]);
/// assert!(RunConfig::from_toml_str("[sweep]\nazimuth_stepp = 45.0\n").is_err());
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub sample_rate_hz: u32,
    pub out_dir: PathBuf,
    pub head: HeadModel,
    pub room: RoomAcoustics,
    pub sweep: SweepConfig,
    pub kinematics: OnsetParams,
    pub fixture: FixtureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            out_dir: PathBuf::from("out"),
            head: HeadModel::default(),
            room: RoomAcoustics::default(),
            sweep: SweepConfig::default(),
            kinematics: OnsetParams::default(),
            fixture: FixtureConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub azimuth_step_deg: Option<f64>,
    pub distances_m: Option<Vec<f64>>,
    pub subjects: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults, then `path` if given, then `overrides`.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", p.display(), e.message())))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(a) = o.azimuth_step_deg {
            self.sweep.azimuth_step_deg = a;
        }
        if let Some(d) = &o.distances_m {
            self.sweep.distances_m = d.clone();
        }
        if let Some(n) = o.subjects {
            self.fixture.subjects = n;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        if self.sample_rate_hz < 8000 {
            return Err(Error::Config(format!("sample_rate_hz {} is below 8000", self.sample_rate_hz)));
        }
        self.head.validate().map_err(wrap)?;
        self.room.validate().map_err(wrap)?;
        self.kinematics.validate().map_err(wrap)?;
        crate::cues::sweep_azimuths(self.sweep.azimuth_step_deg).map_err(wrap)?;
        if self.sweep.distances_m.is_empty() {
            return Err(Error::Config("sweep.distances_m is empty".into()));
        }
        if let Some(d) = self.sweep.distances_m.iter().find(|d| !(**d > self.head.head_radius_m)) {
            return Err(Error::Config(format!(
                "sweep distance {d} m is not outside the head (radius {} m)",
                self.head.head_radius_m
            )));
        }
        if self.sweep.conditions.is_empty() {
            return Err(Error::Config("sweep.conditions is empty".into()));
        }
        if self.fixture.subjects == 0 || self.fixture.repeats == 0 {
            return Err(Error::Config("fixture subjects and repeats must be positive".into()));
        }
        Ok(())
    }

    /// The sorted, de-duplicated sweep conditions.
    pub fn conditions(&self) -> Vec<Condition> {
        let mut c = self.sweep.conditions.clone();
        c.sort();
        c.dedup();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_encode_the_analysis_grid() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.sample_rate_hz, 48_000);
        assert_eq!(crate::cues::sweep_azimuths(cfg.sweep.azimuth_step_deg).unwrap().len(), 72);
        assert_eq!(cfg.sweep.distances_m.len(), 4);
        assert_eq!(cfg.conditions(), Condition::ALL.to_vec());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml_str("[room]\nt60 = [1.0]\n").unwrap_err().to_string();
        assert!(err.contains("t60"), "{err}");
        let err = RunConfig::from_toml_str("colour = 1\n").unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 5\nout_dir = \"a\"\n[sweep]\nazimuth_step_deg = 10.0\n").unwrap();
        let file_only = RunConfig::load(Some(&path), &Overrides::default()).unwrap();
        assert_eq!((file_only.seed, file_only.sweep.azimuth_step_deg), (5, 10.0));
        let o = Overrides { seed: Some(9), azimuth_step_deg: Some(45.0), ..Overrides::default() };
        let both = RunConfig::load(Some(&path), &o).unwrap();
        assert_eq!((both.seed, both.sweep.azimuth_step_deg), (9, 45.0));
        assert_eq!(both.out_dir, PathBuf::from("a"));
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_toml_str("[sweep]\ndistances_m = [0.05]\n").is_err());
        assert!(RunConfig::from_toml_str("[sweep]\nconditions = [\"reverb\"]\n").is_err());
        assert!(RunConfig::from_toml_str("[kinematics]\nsg_window = 10\n").is_err());
        assert!(RunConfig::from_toml_str("[room]\nt30_s = [0.5]\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
