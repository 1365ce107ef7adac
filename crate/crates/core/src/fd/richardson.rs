//! Richardson extrapolation in the grid spacing.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{CasimirError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    /// Size of the eliminated terms at the finest spacing.
    pub error: f64,
}

/// Fit v(h) = V + c_p h^p + c_{p+1} h^{p+1} + ... through all samples and
/// return V. Two samples eliminate the h^p term only.
pub fn richardson_extrapolate(values: &[(f64, f64)], p: u32) -> Result<Extrapolated> {
    if values.len() < 2 {
        return Err(CasimirError::config("Richardson extrapolation needs at least two samples"));
    }
    if p == 0 {
        return Err(CasimirError::config("Richardson order must be at least 1"));
    }
    for (k, &(h, v)) in values.iter().enumerate() {
        if !(h > 0.0) || !h.is_finite() || !v.is_finite() {
            return Err(CasimirError::config(format!("invalid Richardson sample (dx = {h}, value = {v})")));
        }
        if values[..k].iter().any(|&(g, _)| (g - h).abs() <= 1e-12 * h.max(g)) {
            return Err(CasimirError::config(format!("duplicate grid spacing {h} in Richardson samples")));
        }
    }
    let m = values.len();
    let h_ref = values.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    // unknowns V, c_p, ..., c_{p+m-2}; spacings scaled by the finest one
    let a = DMatrix::from_fn(m, m, |i, j| if j == 0 { 1.0 } else { (values[i].0 / h_ref).powi((p as usize + j - 1) as i32) });
    let b = DVector::from_iterator(m, values.iter().map(|s| s.1));
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| CasimirError::Consistency("singular Richardson system".into()))?;
    let finest = values.iter().min_by(|x, y| x.0.total_cmp(&y.0)).expect("non-empty").1;
    Ok(Extrapolated { value: x[0], error: (x[0] - finest).abs() })
}

/// Fitted exponent of |v(h) - reference| over the given samples (log-log
/// least squares).
pub fn convergence_order(values: &[(f64, f64)], reference: f64) -> f64 {
    let pts: Vec<(f64, f64)> = values.iter().map(|&(h, v)| (h.ln(), (v - reference).abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Observed order from three spacings in a constant ratio, no reference
/// needed: p = ln((v1 - v2)/(v2 - v3)) / ln r.
pub fn observed_order(coarse: f64, mid: f64, fine: f64, ratio: f64) -> f64 {
    ((coarse - mid) / (mid - fine)).abs().ln() / ratio.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quadratic_model() {
        let v = |h: f64| 3.25 + 0.7 * h * h;
        let r = richardson_extrapolate(&[(0.1, v(0.1)), (0.05, v(0.05))], 2).unwrap();
        assert!((r.value - 3.25).abs() < 1e-14);
    }

    #[test]
    fn exact_on_linear_model() {
        let v = |h: f64| -1.5 + 4.0 * h;
        let r = richardson_extrapolate(&[(0.2, v(0.2)), (0.1, v(0.1))], 1).unwrap();
        assert!((r.value + 1.5).abs() < 1e-14);
    }

    #[test]
    fn three_samples_remove_two_orders() {
        let v = |h: f64| 2.0 + 0.3 * h * h - 0.9 * h * h * h;
        let r = richardson_extrapolate(&[(0.3, v(0.3)), (0.2, v(0.2)), (0.1, v(0.1))], 2).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!((r.error - (v(0.1) - 2.0).abs()).abs() < 1e-13);
    }

    #[test]
    fn duplicate_spacing_is_config_error() {
        let e = richardson_extrapolate(&[(0.1, 1.0), (0.1, 1.1)], 2).unwrap_err();
        assert!(e.is_config());
        assert!(richardson_extrapolate(&[(0.1, 1.0)], 2).unwrap_err().is_config());
    }

    #[test]
    fn orders() {
        let v = |h: f64| 1.0 + h.powi(2);
        let s = [(0.4, v(0.4)), (0.2, v(0.2)), (0.1, v(0.1))];
        assert!((convergence_order(&s, 1.0) - 2.0).abs() < 1e-12);
        assert!((observed_order(s[0].1, s[1].1, s[2].1, 2.0) - 2.0).abs() < 1e-12);
    }
}
