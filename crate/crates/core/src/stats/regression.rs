use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Coefficient order of [`RegressionResult`].
pub const COEFFICIENT_NAMES: [&str; 4] = ["intercept", "rom", "condition", "rom:condition"];

/// Fixed-effects least-squares fit of `y = b0 + b1·rom + b2·cond +
/// b3·rom·cond`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub coefficients: [f64; 4],
    pub std_errors: [f64; 4],
    pub t_stats: [f64; 4],
    /// Two-sided p values from Student's t with `n − 4` degrees of freedom.
    pub p_values: [f64; 4],
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub df_residual: usize,
}

const RANK_TOL: f64 = 1e-10;

pub fn ols_interaction(y: &[f64], rom: &[f64], condition_flag: &[bool]) -> Result<RegressionResult> {
    let n = y.len();
    if rom.len() != n || condition_flag.len() != n {
        return Err(Error::invalid(format!(
            "length mismatch: y {n}, rom {}, condition {}",
            rom.len(),
            condition_flag.len()
        )));
    }
    if n <= 4 {
        return Err(Error::InsufficientData(format!("regression needs more than 4 observations, got {n}")));
    }
    let x = DMatrix::from_fn(n, 4, |i, j| {
        let c = if condition_flag[i] { 1.0 } else { 0.0 };
        match j {
            0 => 1.0,
            1 => rom[i],
            2 => c,
            _ => rom[i] * c,
        }
    });
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() <= RANK_TOL * smax {
        return Err(Error::RankDeficient);
    }
    let beta = svd.solve(&yv, 0.0).map_err(|_| Error::RankDeficient)?;
    let fitted = &x * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let ymean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ymean).powi(2)).sum();
    let df = n - 4;
    let sigma2 = rss / df as f64;
    // (XᵀX)⁻¹ = V Σ⁻² Vᵀ
    let v_t = svd.v_t.as_ref().expect("requested");
    let inv_s2 = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
    let cov = v_t.transpose() * inv_s2 * v_t;
    let t_dist = StudentsT::new(0.0, 1.0, df as f64).expect("df is positive");
    let mut out = RegressionResult {
        coefficients: [0.0; 4],
        std_errors: [0.0; 4],
        t_stats: [0.0; 4],
        p_values: [0.0; 4],
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        residuals,
        df_residual: df,
    };
    for j in 0..4 {
        let b = beta[j];
        let se = (sigma2 * cov[(j, j)]).max(0.0).sqrt();
        let (t, p) = if se > 0.0 {
            let t = b / se;
            (t, (2.0 * t_dist.sf(t.abs())).clamp(0.0, 1.0))
        } else if b == 0.0 {
            (0.0, 1.0)
        } else {
            (b.signum() * f64::INFINITY, 0.0)
        };
        out.coefficients[j] = b;
        out.std_errors[j] = se;
        out.t_stats[j] = t;
        out.p_values[j] = p;
    }
    Ok(out)
}
