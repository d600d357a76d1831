//! Interaural cues (IACC, ITD, ILD), the azimuth/distance sweep and the
//! divisive normalization of ILD by IACC.

mod table;

pub use table::{normalization_deviation, normalize_ild, CueRow, CueTable, NormalizationDeviation, CUE_CSV_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::geometry::SourcePosition;
use crate::render::{render_with_ir, spherical_head_ir, synth_reverb_tail, BinauralIR, HeadModel, IrSet, RoomAcoustics};
use crate::signals::{envelope, erb_filterbank, highpass, lowpass, normalized_xcorr, white_burst, BinauralPair, SampledSignal};

pub const DEFAULT_MAX_LAG_MS: f64 = 1.0;
pub const ITD_LOWPASS_HZ: f64 = 3000.0;
pub const ILD_HIGHPASS_HZ: f64 = 1500.0;
pub const ILD_BANDS: usize = 30;
pub const ILD_UPPER_HZ: f64 = 20_000.0;
pub const BURST_DURATION_S: f64 = 0.1;
pub const DEFAULT_AZIMUTH_STEP_DEG: f64 = 5.0;
pub const DEFAULT_DISTANCES_M: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
/// Zero padding appended before ERB filtering so band ring-out is kept.
const ERB_PAD_S: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct CueSet {
    pub itd_us: f64,
    /// Positive when the left ear is louder.
    pub ild_db: f64,
    pub iacc: f64,
    pub per_band_ild_db: Option<Vec<f64>>,
}

fn max_lag_samples(max_lag_ms: f64, rate: u32, len: usize) -> Result<usize> {
    if !(max_lag_ms.is_finite() && max_lag_ms >= 0.0) {
        return Err(Error::invalid(format!("lag window must be non-negative, got {max_lag_ms} ms")));
    }
    if len < 2 {
        return Err(Error::invalid("signals need at least two samples"));
    }
    let lag = (max_lag_ms * 1e-3 * f64::from(rate)).round() as usize;
    Ok(lag.min(len - 1))
}

/// Largest absolute normalized cross-correlation within `±max_lag_ms`.
///
/// ```
/// use bincue::cues::iacc;
/// use bincue::signals::{BinauralPair, SampledSignal};
///
/// let x = SampledSignal::new(48_000, vec![0.0, 1.0, -0.5, 0.25, 0.0]).unwrap();
/// let pair = BinauralPair::new(x.clone(), x).unwrap();
/// assert!((iacc(&pair, 1.0).unwrap() - 1.0).abs() < 1e-12);
/// ```
pub fn iacc(pair: &BinauralPair, max_lag_ms: f64) -> Result<f64> {
    let lag = max_lag_samples(max_lag_ms, pair.sample_rate_hz(), pair.len())?;
    let xc = normalized_xcorr(pair.left(), pair.right(), lag)?;
    Ok(xc.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).min(1.0))
}

/// Interaural time difference in microseconds from the lag that maximizes
/// the correlation of the 3 kHz low-passed energy envelopes. Positive when
/// the left ear leads.
pub fn itd_maxiacce(pair: &BinauralPair) -> Result<f64> {
    let rate = pair.sample_rate_hz();
    let lag = max_lag_samples(DEFAULT_MAX_LAG_MS, rate, pair.len())?;
    let env = |s: &SampledSignal| -> Result<SampledSignal> { Ok(envelope(&lowpass(s, ITD_LOWPASS_HZ)?)) };
    let (l, r) = (env(pair.left())?, env(pair.right())?);
    if l.energy() == 0.0 || r.energy() == 0.0 {
        return Err(Error::DegenerateEnvelope("an ear has a zero envelope".into()));
    }
    let xc = normalized_xcorr(&l, &r, lag)?;
    let (lo, hi) = xc
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        return Err(Error::DegenerateEnvelope("flat envelope correlation".into()));
    }
    Ok(xc.refined_peak_lag() / f64::from(rate) * 1e6)
}

/// Mean over 30 ERB bands (1.5–20 kHz, after a 1.5 kHz high-pass) of
/// `10·log10(E_left / E_right)`, and the per-band values.
pub fn ild_erb(pair: &BinauralPair) -> Result<(f64, Vec<f64>)> {
    let rate = pair.sample_rate_hz();
    let pad = (ERB_PAD_S * f64::from(rate)).round() as usize;
    let bands = |s: &SampledSignal| -> Result<Vec<f64>> {
        let mut x = highpass(s, ILD_HIGHPASS_HZ)?.into_samples();
        x.resize(x.len() + pad, 0.0);
        let x = SampledSignal::new(rate, x)?;
        Ok(erb_filterbank(&x, ILD_BANDS, ILD_HIGHPASS_HZ, ILD_UPPER_HZ)?
            .iter()
            .map(SampledSignal::energy)
            .collect())
    };
    let (el, er) = (bands(pair.left())?, bands(pair.right())?);
    let per_band: Vec<f64> = el
        .iter()
        .zip(&er)
        .map(|(&l, &r)| {
            if l > 0.0 && r > 0.0 {
                Ok(10.0 * (l / r).log10())
            } else {
                Err(Error::ZeroEnergy)
            }
        })
        .collect::<Result<_>>()?;
    let mean = per_band.iter().sum::<f64>() / per_band.len() as f64;
    Ok((mean, per_band))
}

/// Azimuths from −180° in steps of `step_deg` covering one full turn.
pub fn sweep_azimuths(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg.is_finite() && step_deg > 0.0 && step_deg <= 360.0) {
        return Err(Error::invalid(format!("azimuth step must be in (0, 360], got {step_deg}")));
    }
    let n = (360.0 / step_deg - 1e-9).ceil() as usize;
    Ok((0..n).map(|k| -180.0 + k as f64 * step_deg).collect())
}

/// Where direct-path impulse responses come from.
#[derive(Debug, Clone, Copy)]
pub enum DirectPath<'a> {
    SphericalHead,
    /// Nearest-direction lookup in a measured set.
    Measured(&'a IrSet),
}

/// Sweep settings shared by both conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub azimuth_step_deg: f64,
    pub distances_m: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            azimuth_step_deg: DEFAULT_AZIMUTH_STEP_DEG,
            distances_m: DEFAULT_DISTANCES_M.to_vec(),
        }
    }
}

/// Renders a 100 ms white burst from every grid point on the horizontal
/// plane and measures its cues: ITD on the direct-path IR, ILD and IACC on
/// the rendered ear signals. `room = None` gives the anechoic condition.
///
/// One burst and (for the reverberant condition) one tail are drawn from
/// `rng` and shared by all grid points, so the rows do not depend on the
/// order in which they are computed.
pub fn cue_sweep<R: Rng + ?Sized>(
    head: &HeadModel,
    room: Option<&RoomAcoustics>,
    grid: &SweepGrid,
    rate: u32,
    rng: &mut R,
) -> Result<CueTable> {
    cue_sweep_with(DirectPath::SphericalHead, head, room, grid, rate, rng)
}

pub fn cue_sweep_with<R: Rng + ?Sized>(
    direct: DirectPath<'_>,
    head: &HeadModel,
    room: Option<&RoomAcoustics>,
    grid: &SweepGrid,
    rate: u32,
    rng: &mut R,
) -> Result<CueTable> {
    if grid.distances_m.is_empty() {
        return Err(Error::invalid("sweep needs at least one distance"));
    }
    if let DirectPath::Measured(set) = direct {
        if set.sample_rate_hz() != rate {
            return Err(Error::invalid(format!(
                "impulse-response set is sampled at {} Hz, sweep runs at {rate} Hz",
                set.sample_rate_hz()
            )));
        }
    }
    let azimuths = sweep_azimuths(grid.azimuth_step_deg)?;
    let burst_seed: u64 = rng.random();
    let tail_seed: u64 = rng.random();
    let burst = white_burst(BURST_DURATION_S, rate, &mut ChaCha8Rng::seed_from_u64(burst_seed))?;
    let tail = room
        .map(|r| synth_reverb_tail(r, head, rate, r.max_t30_s(), &mut ChaCha8Rng::seed_from_u64(tail_seed)))
        .transpose()?;
    let condition = if room.is_some() { Condition::Reverberant } else { Condition::Anechoic };

    let points: Vec<(f64, f64)> = grid
        .distances_m
        .iter()
        .flat_map(|&d| azimuths.iter().map(move |&az| (az, d)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(az, d)| -> Result<CueRow> {
            let p = SourcePosition::from_degrees(az, 0.0, d)?;
            let ir: BinauralIR = match direct {
                DirectPath::SphericalHead => spherical_head_ir(head, &p, rate)?,
                DirectPath::Measured(set) => set.nearest(p.direction()).clone(),
            };
            let out = render_with_ir(&burst, &ir, d, room, tail.as_ref())?;
            let (ild_db, per_band) = ild_erb(&out.pair)?;
            Ok(CueRow {
                azimuth_deg: az,
                distance_m: d,
                condition,
                cues: CueSet {
                    itd_us: itd_maxiacce(ir.pair())?,
                    ild_db,
                    iacc: iacc(&out.pair, DEFAULT_MAX_LAG_MS)?,
                    per_band_ild_db: Some(per_band),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CueTable::new(rows)
}
