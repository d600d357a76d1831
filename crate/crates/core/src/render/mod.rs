//! Binaural synthesis: spherical-head impulse responses, distance rules,
//! a parametric diffuse tail and reverberation-time estimation.

mod decay;
mod head;
mod irset;
mod room;

pub use decay::{estimate_edt, estimate_t30, schroeder_curve_db};
pub use head::{spherical_head_ir, BinauralIR, Ear, EarPath, HeadModel, PRE_DELAY_SAMPLES};
pub use irset::{IrSet, MANIFEST_FILE};
pub use room::{
    diffuse_coherence, distance_gain_db, synth_reverb_tail, synth_reverb_tail_bands, RoomAcoustics,
    BROADBAND_EDT_S, BROADBAND_T30_S, DEFAULT_TAIL_LEVEL_DB, OCTAVE_CENTERS_HZ, TABLE_EDT_S,
    TABLE_T30_S,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::SourcePosition;
use crate::signals::{convolve, BinauralPair, SampledSignal};
use room::db_to_amplitude;

/// Distance rules used when no room is given.
const ANECHOIC_REFERENCE_M: f64 = 1.0;
const ANECHOIC_DIRECT_RULE_DB: f64 = -6.0;

/// Output of [`render`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    pub pair: BinauralPair,
    /// Gain applied after convolution to keep the peak at or below 1
    /// (`1.0` when no scaling was needed).
    pub headroom_gain: f64,
    /// Sample index of the direct-path arrival in the impulse response.
    pub direct_onset_index: usize,
}

/// Renders `signal` from source position `p`, in free field (`room = None`)
/// or with a fresh diffuse tail drawn from `rng`.
pub fn render<R: Rng + ?Sized>(
    signal: &SampledSignal,
    p: &SourcePosition,
    head: &HeadModel,
    room: Option<&RoomAcoustics>,
    rate: u32,
    rng: &mut R,
) -> Result<Rendering> {
    if signal.sample_rate_hz() != rate {
        return Err(Error::invalid(format!(
            "signal sampled at {} Hz, rendering at {rate} Hz",
            signal.sample_rate_hz()
        )));
    }
    let ir = spherical_head_ir(head, p, rate)?;
    let tail = room
        .map(|r| synth_reverb_tail(r, head, rate, r.max_t30_s(), rng))
        .transpose()?;
    render_with_ir(signal, &ir, p.distance_m(), room, tail.as_ref())
}

/// Renders through a given direct-path IR, optionally adding a precomputed
/// tail. The direct part follows the room's direct rule, the tail its
/// reverberant rule; the tail starts at the direct arrival.
pub fn render_with_ir(
    signal: &SampledSignal,
    ir: &BinauralIR,
    distance_m: f64,
    room: Option<&RoomAcoustics>,
    tail: Option<&BinauralPair>,
) -> Result<Rendering> {
    if signal.sample_rate_hz() != ir.sample_rate_hz() {
        return Err(Error::invalid("signal and impulse response rates differ"));
    }
    let wet = wet_ir(ir, distance_m, room, tail)?;
    let rate = signal.sample_rate_hz();
    let left = convolve(signal.samples(), wet.left().samples());
    let right = convolve(signal.samples(), wet.right().samples());
    let peak = left.iter().chain(&right).fold(0.0f64, |m, v| m.max(v.abs()));
    let headroom_gain = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    let scale = |v: Vec<f64>| SampledSignal::new(rate, v.into_iter().map(|x| x * headroom_gain).collect());
    Ok(Rendering {
        pair: BinauralPair::new(scale(left)?, scale(right)?)?,
        headroom_gain,
        direct_onset_index: ir.onset_index(),
    })
}

/// Direct IR plus tail, each scaled by its distance rule.
pub fn wet_ir(
    ir: &BinauralIR,
    distance_m: f64,
    room: Option<&RoomAcoustics>,
    tail: Option<&BinauralPair>,
) -> Result<BinauralPair> {
    let (reference, direct_rule) = match room {
        Some(r) => {
            r.validate()?;
            (r.reference_distance_m, r.direct_rule_db_per_doubling)
        }
        None => (ANECHOIC_REFERENCE_M, ANECHOIC_DIRECT_RULE_DB),
    };
    let direct_gain = db_to_amplitude(distance_gain_db(distance_m, reference, direct_rule)?);
    let rate = ir.sample_rate_hz();
    let onset = ir.onset_index();
    let tail = match (room, tail) {
        (Some(r), Some(t)) => {
            if t.sample_rate_hz() != rate {
                return Err(Error::invalid("tail and impulse response rates differ"));
            }
            let g = db_to_amplitude(distance_gain_db(distance_m, reference, r.reverb_rule_db_per_doubling)?);
            Some((t, g))
        }
        (None, Some(_)) => return Err(Error::invalid("a tail needs room parameters")),
        _ => None,
    };
    let len = ir.pair().len().max(tail.map_or(0, |(t, _)| onset + t.len()));
    let build = |direct: &SampledSignal, pick: fn(&BinauralPair) -> &SampledSignal| {
        let mut out = vec![0.0; len];
        for (o, v) in out.iter_mut().zip(direct.samples()) {
            *o = v * direct_gain;
        }
        if let Some((t, g)) = tail {
            for (o, v) in out[onset..].iter_mut().zip(pick(t).samples()) {
                *o += v * g;
            }
        }
        SampledSignal::new(rate, out)
    };
    BinauralPair::new(build(ir.left(), BinauralPair::left)?, build(ir.right(), BinauralPair::right)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cues::iacc;
    use crate::signals::white_burst;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RATE: u32 = 48_000;

    fn burst(seed: u64) -> SampledSignal {
        white_burst(0.1, RATE, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn pos(az: f64, d: f64) -> SourcePosition {
        SourcePosition::from_degrees(az, 0.0, d).unwrap()
    }

    #[test]
    fn frontal_anechoic_render_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = render(&burst(1), &pos(0.0, 1.0), &HeadModel::default(), None, RATE, &mut rng).unwrap();
        let d = 10.0 * (out.pair.left().energy() / out.pair.right().energy()).log10();
        assert!(d.abs() < 0.1);
    }

    #[test]
    fn doubling_distance_drops_direct_energy_six_db() {
        let head = HeadModel::default();
        let s = burst(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // frontal and rear sources: both ear paths scale with the distance
        for az in [0.0, 180.0] {
            let near = render(&s, &pos(az, 1.0), &head, None, RATE, &mut rng).unwrap();
            let far = render(&s, &pos(az, 2.0), &head, None, RATE, &mut rng).unwrap();
            let e = |r: &Rendering| (r.pair.left().energy() + r.pair.right().energy()) / r.headroom_gain.powi(2);
            let drop = 10.0 * (e(&near) / e(&far)).log10();
            assert!((drop - 6.02).abs() < 0.1, "az {az}: {drop}");
        }
    }

    #[test]
    fn rendering_is_linear() {
        let head = HeadModel::default();
        let room = RoomAcoustics::default();
        let s = burst(3).scaled(0.01);
        let a = render(&s, &pos(40.0, 1.5), &head, Some(&room), RATE, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = render(&s.scaled(3.0), &pos(40.0, 1.5), &head, Some(&room), RATE, &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap();
        for (x, y) in a.pair.left().samples().iter().zip(b.pair.left().samples()) {
            let (x, y) = (x / a.headroom_gain, y / b.headroom_gain);
            assert!((3.0 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn loud_input_is_scaled_not_clipped() {
        let s = burst(4).scaled(50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = render(&s, &pos(90.0, 0.5), &HeadModel::default(), None, RATE, &mut rng).unwrap();
        assert!(out.headroom_gain < 1.0);
        assert!((out.pair.peak() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reverberant_iacc_falls_with_distance() {
        let head = HeadModel::default();
        let room = RoomAcoustics::default();
        let tail = synth_reverb_tail(&room, &head, RATE, room.max_t30_s(), &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let s = burst(5);
        let coherence = |d: f64| {
            let ir = spherical_head_ir(&head, &pos(30.0, d), RATE).unwrap();
            let out = render_with_ir(&s, &ir, d, Some(&room), Some(&tail)).unwrap();
            iacc(&out.pair, 1.0).unwrap()
        };
        assert!(coherence(2.0) < coherence(0.5));
    }

    #[test]
    fn tail_starts_at_direct_arrival() {
        let head = HeadModel::default();
        let room = RoomAcoustics::default();
        let ir = spherical_head_ir(&head, &pos(0.0, 2.0), RATE).unwrap();
        let tail = synth_reverb_tail(&room, &head, RATE, room.max_t30_s(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let wet = wet_ir(&ir, 2.0, Some(&room), Some(&tail)).unwrap();
        let dry = wet_ir(&ir, 2.0, None, None).unwrap();
        assert_eq!(wet.len(), ir.onset_index() + tail.len());
        // identical up to the onset; the tail fades in from zero
        for i in 0..=ir.onset_index() {
            assert!((wet.left().samples()[i] - dry.left().samples()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_without_room_is_rejected() {
        let head = HeadModel::default();
        let room = RoomAcoustics::default();
        let ir = spherical_head_ir(&head, &pos(0.0, 1.0), RATE).unwrap();
        let tail = synth_reverb_tail(&room, &head, RATE, room.max_t30_s(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(wet_ir(&ir, 1.0, None, Some(&tail)).is_err());
    }
}
