use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::mean;

const AD_MIN_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonDarling {
    /// A² with the small-sample factor `1 + 0.75/n + 2.25/n²` applied.
    pub a2: f64,
    pub p_value: f64,
}

/// Anderson-Darling test of normality with mean and SD estimated from the
/// sample.
pub fn anderson_darling(sample: &[f64]) -> Result<AndersonDarling> {
    let n = sample.len();
    if n < AD_MIN_N {
        return Err(Error::InsufficientData(format!(
            "Anderson-Darling needs at least {AD_MIN_N} values, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sample contains non-finite values"));
    }
    let m = mean(sample);
    let var = sample.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::invalid("zero variance sample"));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = sample.iter().map(|v| (v - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let std = Normal::standard();
    let ln_cdf = |x: f64| std.cdf(x).max(f64::MIN_POSITIVE).ln();
    let nf = n as f64;
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (ln_cdf(z[i]) + ln_cdf(-z[n - 1 - i])))
        .sum();
    let a2 = (-nf - s / nf) * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a2 >= 0.6 {
        (1.2937 - 5.709 * a2 + 0.0186 * a2 * a2).exp()
    } else if a2 >= 0.34 {
        (0.9177 - 4.279 * a2 - 1.38 * a2 * a2).exp()
    } else if a2 >= 0.2 {
        1.0 - (-8.318 + 42.796 * a2 - 59.938 * a2 * a2).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a2 - 223.73 * a2 * a2).exp()
    };
    Ok(AndersonDarling { a2, p_value: p.clamp(0.0, 1.0) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCoxResult {
    pub lambda: f64,
    pub transformed: Vec<f64>,
    /// Profile log-likelihood at `lambda`.
    pub log_likelihood: f64,
    /// Constant added before transforming (0 when none was needed).
    pub shift: f64,
}

fn transform(y: &[f64], lambda: f64) -> Vec<f64> {
    if lambda == 0.0 {
        y.iter().map(|v| v.ln()).collect()
    } else {
        y.iter().map(|v| (v.powf(lambda) - 1.0) / lambda).collect()
    }
}

fn profile_llf(y: &[f64], sum_ln: f64, lambda: f64) -> f64 {
    let t = transform(y, lambda);
    let m = mean(&t);
    let var = t.iter().map(|v| (v - m).powi(2)).sum::<f64>() / t.len() as f64;
    -(t.len() as f64) / 2.0 * var.ln() + (lambda - 1.0) * sum_ln
}

/// Box-Cox transform with λ chosen on the grid −2, −1.99, …, 2 by maximum
/// profile log-likelihood. All values must be positive.
pub fn box_cox(sample: &[f64]) -> Result<BoxCoxResult> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData("Box-Cox needs at least 2 values".into()));
    }
    if let Some(v) = sample.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("Box-Cox needs positive finite values, found {v}")));
    }
    if sample.iter().all(|v| *v == sample[0]) {
        return Err(Error::invalid("Box-Cox undefined for a constant sample"));
    }
    let sum_ln: f64 = sample.iter().map(|v| v.ln()).sum();
    let (mut best_lambda, mut best) = (f64::NAN, f64::NEG_INFINITY);
    for k in 0..=400 {
        let lambda = (k as f64 - 200.0) / 100.0;
        let llf = profile_llf(sample, sum_ln, lambda);
        if llf > best {
            best = llf;
            best_lambda = lambda;
        }
    }
    if !best.is_finite() {
        return Err(Error::invalid("Box-Cox likelihood is not finite on the grid"));
    }
    Ok(BoxCoxResult {
        lambda: best_lambda,
        transformed: transform(sample, best_lambda),
        log_likelihood: best,
        shift: 0.0,
    })
}

/// [`box_cox`] for non-negative data: when zeros are present, every value
/// is shifted by half the smallest positive value first.
pub fn box_cox_shifted(sample: &[f64]) -> Result<BoxCoxResult> {
    if let Some(v) = sample.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(format!("shifted Box-Cox needs non-negative values, found {v}")));
    }
    if !sample.contains(&0.0) {
        return box_cox(sample);
    }
    let smallest = sample
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !smallest.is_finite() {
        return Err(Error::invalid("Box-Cox undefined for an all-zero sample"));
    }
    let shift = smallest / 2.0;
    let shifted: Vec<f64> = sample.iter().map(|v| v + shift).collect();
    Ok(BoxCoxResult { shift, ..box_cox(&shifted)? })
}
