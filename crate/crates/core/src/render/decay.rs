//! Reverberation-time estimation from a (band-limited) impulse response.

use crate::error::{Error, Result};
use crate::signals::SampledSignal;

const SMOOTHING_S: f64 = 0.010;
const NOISE_TAIL_FRACTION: f64 = 0.1;
const REQUIRED_RANGE_DB: f64 = 35.0;
const MIN_FIT_POINTS: usize = 8;

/// Schroeder backward-integrated energy in dB, normalized to 0 dB at the
/// first sample.
pub fn schroeder_curve_db(ir: &[f64]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; ir.len()];
    let mut sum = 0.0;
    for (i, v) in ir.iter().enumerate().rev() {
        sum += v * v;
        acc[i] = sum;
    }
    let total = acc.first().copied().unwrap_or(0.0);
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(acc
        .into_iter()
        .map(|e| if e > 0.0 { 10.0 * (e / total).log10() } else { f64::NEG_INFINITY })
        .collect())
}

/// T30: slope of the −5…−35 dB part of the Schroeder curve, extrapolated to
/// a 60 dB decay.
pub fn estimate_t30(ir_band: &SampledSignal) -> Result<f64> {
    check_dynamic_range(ir_band)?;
    decay_time(ir_band, -5.0, -35.0)
}

/// EDT: slope of the 0…−10 dB part of the Schroeder curve, extrapolated to
/// a 60 dB decay.
pub fn estimate_edt(ir_band: &SampledSignal) -> Result<f64> {
    check_dynamic_range(ir_band)?;
    decay_time(ir_band, 0.0, -10.0)
}

fn decay_time(ir: &SampledSignal, upper_db: f64, lower_db: f64) -> Result<f64> {
    let curve = schroeder_curve_db(ir.samples())?;
    let fs = f64::from(ir.sample_rate_hz());
    let start = curve.iter().position(|&c| c <= upper_db).unwrap_or(0);
    let Some(end) = curve.iter().position(|&c| c < lower_db) else {
        return Err(Error::InsufficientDecay(format!(
            "energy never falls below {lower_db} dB"
        )));
    };
    if end < start + MIN_FIT_POINTS {
        return Err(Error::InsufficientDecay(format!(
            "only {} samples between {upper_db} and {lower_db} dB",
            end.saturating_sub(start)
        )));
    }
    // least-squares line through (t, dB)
    let pts = &curve[start..end];
    let n = pts.len() as f64;
    let t_mean = (start + end - 1) as f64 / 2.0 / fs;
    let y_mean = pts.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, &y) in pts.iter().enumerate() {
        let dt = (start + k) as f64 / fs - t_mean;
        sxy += dt * (y - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::InsufficientDecay("fitted decay slope is not negative".into()));
    }
    Ok(-60.0 / slope)
}

/// Requires the 10 ms smoothed energy peak to sit at least 35 dB above the
/// mean energy of the last 10 % of the response.
fn check_dynamic_range(ir: &SampledSignal) -> Result<()> {
    let x = ir.samples();
    let fs = f64::from(ir.sample_rate_hz());
    let win = ((SMOOTHING_S * fs).round() as usize).max(1);
    if x.len() < 2 * win {
        return Err(Error::InsufficientDecay(format!(
            "response of {} samples is too short to estimate a decay",
            x.len()
        )));
    }
    let energy: Vec<f64> = x.iter().map(|v| v * v).collect();
    let mut running: f64 = energy[..win].iter().sum();
    let mut peak = running;
    for i in win..energy.len() {
        running += energy[i] - energy[i - win];
        peak = peak.max(running);
    }
    let peak = peak / win as f64;
    if peak <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let tail_len = ((x.len() as f64 * NOISE_TAIL_FRACTION) as usize).max(1);
    let floor = energy[energy.len() - tail_len..].iter().sum::<f64>() / tail_len as f64;
    let range_db = if floor > 0.0 { 10.0 * (peak / floor).log10() } else { f64::INFINITY };
    if range_db < REQUIRED_RANGE_DB {
        return Err(Error::InsufficientDecay(format!(
            "only {range_db:.1} dB between the energy peak and the noise floor"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const RATE: u32 = 48_000;

    fn exp_noise(t30: f64, seed: u64) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (1.2 * t30 * f64::from(RATE)) as usize;
        let x = (0..n)
            .map(|i| {
                let t = i as f64 / f64::from(RATE);
                let g: f64 = StandardNormal.sample(&mut rng);
                g * (-6.907_755 * t / t30).exp()
            })
            .collect();
        SampledSignal::new(RATE, x).unwrap()
    }

    #[test]
    fn broadband_exponential_noise_recovers_t30() {
        for seed in 0..5 {
            let t = estimate_t30(&exp_noise(0.581, seed)).unwrap();
            assert!((t - 0.581).abs() < 0.1 * 0.581, "{t}");
        }
    }

    #[test]
    fn edt_matches_t30_for_single_slope() {
        let ir = exp_noise(0.7, 11);
        let t30 = estimate_t30(&ir).unwrap();
        let edt = estimate_edt(&ir).unwrap();
        assert!((edt - t30).abs() < 0.1 * t30, "{edt} {t30}");
    }

    #[test]
    fn pure_impulse_has_insufficient_decay() {
        let mut x = vec![0.0; 4800];
        x[0] = 1.0;
        let ir = SampledSignal::new(RATE, x).unwrap();
        assert!(matches!(estimate_t30(&ir), Err(Error::InsufficientDecay(_))));
    }

    #[test]
    fn noise_floor_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ir = exp_noise(0.5, 4);
        let noisy: Vec<f64> = ir
            .samples()
            .iter()
            .map(|v| {
                let g: f64 = StandardNormal.sample(&mut rng);
                v + 0.05 * g
            })
            .collect();
        let noisy = SampledSignal::new(RATE, noisy).unwrap();
        assert!(matches!(estimate_t30(&noisy), Err(Error::InsufficientDecay(_))));
    }

    #[test]
    fn deterministic_exponential_envelope() {
        // a squared-exponential energy decay: Schroeder curve is exactly linear
        let t30 = 0.4;
        let x: Vec<f64> = (0..30_000)
            .map(|i| (-6.907_755_278_982_137 * i as f64 / f64::from(RATE) / t30).exp())
            .collect();
        let ir = SampledSignal::new(RATE, x).unwrap();
        let t = estimate_t30(&ir).unwrap();
        assert!((t - t30).abs() < 1e-3 * t30, "{t}");
    }

    #[test]
    fn zero_signal_is_an_error() {
        let ir = SampledSignal::zeros(RATE, 1000).unwrap();
        assert!(estimate_t30(&ir).is_err());
    }
}
