use nalgebra::{DMatrix, DVector};

use super::{RadialError, RadialFunction};

const MIN_FIT_POINTS: usize = 3;

/// Least-squares coefficients `c` minimising `‖Σ_j c_j basis_j − y‖₂`.
///
/// Columns are rescaled to unit max-norm before the SVD solve, so bases with
/// very different magnitudes (e.g. `1`, `t^{1-m}`, `t^{-m}`) stay well posed.
pub fn least_squares(basis: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, RadialError> {
    let rows = y.len();
    let cols = basis.len();
    if cols == 0 || rows < cols || basis.iter().any(|b| b.len() != rows) {
        return Err(RadialError::SingularFit);
    }
    let scales: Vec<f64> = basis
        .iter()
        .map(|b| b.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect();
    if scales.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(RadialError::SingularFit);
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| basis[j][i] / scales[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() < 1e-13 * smax {
        return Err(RadialError::SingularFit);
    }
    let c = svd.solve(&b, 0.0).map_err(|_| RadialError::SingularFit)?;
    Ok(c.iter().zip(&scales).map(|(c, s)| c / s).collect())
}

/// Slope of `log|y|` against `log r` by ordinary least squares.
pub fn power_law_slope(r: &[f64], y: &[f64]) -> Result<f64, RadialError> {
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(y)
        .filter(|(_, v)| **v != 0.0 && v.is_finite())
        .map(|(r, v)| (r.ln(), v.abs().ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(RadialError::NoDecayOrder);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(RadialError::SingularFit);
    }
    Ok(sxy / sxx)
}

/// Estimated exponent `σ` in `f^(k) ~ r^σ` over the radii in `fit_window`.
pub fn decay_order(
    f: &RadialFunction,
    k: usize,
    fit_window: (f64, f64),
) -> Result<f64, RadialError> {
    let (lo, hi) = fit_window;
    let grid = f.grid();
    let idx = grid.window(lo, hi);
    if idx.len() < MIN_FIT_POINTS {
        return Err(RadialError::WindowTooSmall {
            lo,
            hi,
            points: idx.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let d = f.derivative_r(k)?;
    let r: Vec<f64> = idx.clone().map(|i| grid.r(i)).collect();
    let y: Vec<f64> = idx.map(|i| d[i]).collect();
    if y.iter().all(|&v| v == 0.0) {
        return Err(RadialError::NoDecayOrder);
    }
    power_law_slope(&r, &y)
}
