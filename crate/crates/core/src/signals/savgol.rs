use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Savitzky-Golay smoothing: least-squares polynomial of degree `poly_order`
/// over a sliding window of `window` samples.
///
/// Interior points use the centred window; the first and last `window/2`
/// points are evaluated from the polynomial fitted to the first and last full
/// window, so polynomials of degree `<= poly_order` pass through unchanged
/// everywhere.
pub fn savitzky_golay(series: &[f64], window: usize, poly_order: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Savitzky-Golay window must be odd, got {window}"
        )));
    }
    if poly_order >= window {
        return Err(Error::invalid(format!(
            "polynomial order {poly_order} must be below the window length {window}"
        )));
    }
    if series.len() < window {
        return Err(Error::invalid(format!(
            "series of {} samples is shorter than the smoothing window ({window})",
            series.len()
        )));
    }
    let hat = projection(window, poly_order)?;
    let half = window / 2;
    let n = series.len();
    let apply = |row: usize, start: usize| -> f64 {
        (0..window).map(|j| hat[(row, j)] * series[start + j]).sum()
    };
    let mut out = Vec::with_capacity(n);
    out.extend((0..half).map(|i| apply(i, 0)));
    out.extend((half..n - half).map(|i| apply(half, i - half)));
    out.extend((n - half..n).map(|i| apply(i - (n - window), n - window)));
    Ok(out)
}

/// `A (AᵀA)⁻¹ Aᵀ` for the Vandermonde matrix `A` of centred offsets.
fn projection(window: usize, order: usize) -> Result<DMatrix<f64>> {
    let half = (window / 2) as f64;
    let a = DMatrix::from_fn(window, order + 1, |i, j| {
        // scaled offsets keep the normal matrix well conditioned
        ((i as f64 - half) / half.max(1.0)).powi(j as i32)
    });
    let ata = a.transpose() * &a;
    let inv = ata
        .try_inverse()
        .ok_or_else(|| Error::invalid("singular Savitzky-Golay design"))?;
    Ok(&a * inv * a.transpose())
}
