//! Quadrature on log-uniform grids and adaptive Gauss–Kronrod integration.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("adaptive quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    NotConverged { a: f64, b: f64, estimate: f64 },
    #[error("tail does not decay (fitted log-slope {0})")]
    DivergentTail(f64),
    #[error("tail changes sign or vanishes; cannot extrapolate")]
    IrregularTail,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),
}

/// Integrals of `g` over each interval `[x_i, x_{i+1}]` of a uniform grid of
/// spacing `h`, by local cubic interpolation (fourth order).
pub fn interval_pieces(h: f64, g: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    let n = g.len();
    if n < 4 {
        return Err(QuadratureError::TooFewSamples { needed: 4, got: n });
    }
    let c = h / 24.0;
    Ok((0..n - 1)
        .map(|i| {
            if i == 0 {
                c * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3])
            } else if i == n - 2 {
                c * (g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1])
            } else {
                c * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2])
            }
        })
        .collect())
}

/// Interval integrals by local interpolation through `points` consecutive
/// samples (order `points`), centred on each interval away from the ends.
pub fn interval_pieces_order(h: f64, g: &[f64], points: usize) -> Result<Vec<f64>, QuadratureError> {
    let n = g.len();
    if n < points || points < 2 {
        return Err(QuadratureError::TooFewSamples { needed: points.max(2), got: n });
    }
    // weights[k]: window offsets 0..points, interval [k, k+1]
    let weights: Vec<Vec<f64>> = (0..points - 1).map(|k| lagrange_interval_weights(points, k)).collect();
    let half = (points - 1) / 2;
    Ok((0..n - 1)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - points);
            let w = &weights[i - start];
            h * w.iter().zip(&g[start..start + points]).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect())
}

/// `∫_k^{k+1} L_j(y) dy` for the Lagrange basis on nodes `0..points`.
fn lagrange_interval_weights(points: usize, k: usize) -> Vec<f64> {
    let v = nalgebra::DMatrix::from_fn(points, points, |q, j| (j as f64).powi(q as i32));
    let moments = nalgebra::DVector::from_fn(points, |q, _| {
        let e = q as i32 + 1;
        (((k + 1) as f64).powi(e) - (k as f64).powi(e)) / e as f64
    });
    v.lu().solve(&moments).expect("Vandermonde matrix on distinct nodes").iter().copied().collect()
}

/// Running integral with the interpolation rule of [`interval_pieces_order`].
pub fn cumulative_order(h: f64, g: &[f64], points: usize) -> Result<Vec<f64>, QuadratureError> {
    let pieces = interval_pieces_order(h, g, points)?;
    let mut out = vec![0.0; g.len()];
    for (i, p) in pieces.iter().enumerate() {
        out[i + 1] = out[i] + p;
    }
    Ok(out)
}

/// Running integral `I_i = ∫_{x_0}^{x_i} g dx` on a uniform grid of spacing `h`.
pub fn cumulative_uniform(h: f64, g: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    let pieces = interval_pieces(h, g)?;
    let mut out = vec![0.0; g.len()];
    for (i, p) in pieces.iter().enumerate() {
        out[i + 1] = out[i] + p;
    }
    Ok(out)
}

/// Remaining integral `J_i = ∫_{x_i}^{x_end} g dx`, accumulated from the right end.
pub fn reverse_cumulative_uniform(h: f64, g: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    let pieces = interval_pieces(h, g)?;
    Ok(reverse_cumsum(&pieces, 0.0))
}

/// `out_i = start + Σ_{j ≥ i} pieces_j`, with one more entry than `pieces`.
pub fn reverse_cumsum(pieces: &[f64], start: f64) -> Vec<f64> {
    let mut out = vec![start; pieces.len() + 1];
    for i in (0..pieces.len()).rev() {
        out[i] = out[i + 1] + pieces[i];
    }
    out
}

/// Integral over the whole grid.
pub fn uniform_total(h: f64, g: &[f64]) -> Result<f64, QuadratureError> {
    Ok(*cumulative_uniform(h, g)?.last().unwrap_or(&0.0))
}

/// `∫_{x_end}^∞ g dx` assuming `g = C e^{σx}` beyond the last sample, with `σ`
/// fitted on the trailing samples. Identically zero tails integrate to zero.
pub fn power_law_tail(x: &[f64], g: &[f64]) -> Result<f64, QuadratureError> {
    if x.len() < 3 || x.len() != g.len() {
        return Err(QuadratureError::TooFewSamples { needed: 3, got: x.len().min(g.len()) });
    }
    if g.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let sign = g[g.len() - 1].signum();
    if g.iter().any(|&v| v == 0.0 || v.signum() != sign) {
        return Err(QuadratureError::IrregularTail);
    }
    let n = x.len() as f64;
    let ly: Vec<f64> = g.iter().map(|v| v.abs().ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < -1e-3) {
        return Err(QuadratureError::DivergentTail(slope));
    }
    Ok(g[g.len() - 1] / -slope)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: `(kronrod, error estimate)`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs_mass = WGK[7] * fc.abs();
    for i in 0..7 {
        let d = hw * XGK[i];
        let (fl, fr) = (f(c - d), f(c + d));
        k += WGK[i] * (fl + fr);
        abs_mass += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (fl + fr);
        }
    }
    let diff = ((k - g) * hw).abs();
    // differences at rounding level relative to ∫|f| carry no information
    let err = if diff <= 200.0 * f64::EPSILON * hw * abs_mass { 0.0 } else { diff };
    (k * hw, err)
}

const MAX_PANELS: usize = 4000;
const ROUNDING_FLOOR: f64 = 1e-15;

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integral of `f` over `[a, b]`: the panel with
/// the largest error estimate is bisected until the summed estimate is below
/// `max(abs_tol, rel_tol·|I|)`, or below rounding level relative to `∫|f|` when
/// the integral cancels.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadratureError> {
    let panel = |a: f64, b: f64| {
        let (value, error) = gk15(&f, a, b);
        Panel { a, b, value, error }
    };
    let mut heap = std::collections::BinaryHeap::new();
    let first = panel(a, b);
    let (mut total, mut err, mut mass) = (first.value, first.error, first.value.abs());
    heap.push(first);
    loop {
        if !total.is_finite() {
            return Err(QuadratureError::NonFinite(a));
        }
        if err <= abs_tol.max(rel_tol * total.abs()).max(ROUNDING_FLOOR * mass) {
            return Ok(total);
        }
        if heap.len() >= MAX_PANELS {
            return Err(QuadratureError::NotConverged { a, b, estimate: err });
        }
        let worst = heap.pop().expect("heap never empty");
        let c = 0.5 * (worst.a + worst.b);
        if !(c > worst.a && c < worst.b) {
            // cannot subdivide further in floating point
            return Err(QuadratureError::NotConverged { a, b, estimate: err });
        }
        let (l, r) = (panel(worst.a, c), panel(c, worst.b));
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        mass += l.value.abs() + r.value.abs() - worst.value.abs();
        heap.push(l);
        heap.push(r);
        if heap.len() % 64 == 0 {
            // refresh running sums against accumulated rounding
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
            mass = heap.iter().map(|p| p.value.abs()).sum();
        }
    }
}

/// `∫_a^∞ f` through `s = a + τ/(1−τ)`, `τ ∈ [0, 1)`.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadratureError> {
    integrate(
        |tau| {
            if tau >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - tau;
            let v = f(a + tau / w) / (w * w);
            if v.is_finite() { v } else { 0.0 }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn high_order_rule_is_exact_on_quintics() {
        let h = 0.1;
        let x: Vec<f64> = (0..30).map(|i| i as f64 * h).collect();
        let g: Vec<f64> = x.iter().map(|x| x.powi(5) - 3.0 * x.powi(2) + 1.0).collect();
        let c = cumulative_order(h, &g, 6).unwrap();
        for (i, x) in x.iter().enumerate() {
            let exact = x.powi(6) / 6.0 - x.powi(3) + x;
            assert!((c[i] - exact).abs() < 1e-10 * exact.abs().max(1.0), "{i}");
        }
    }

    #[test]
    fn four_point_rule_matches_cubic_rule() {
        let g: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).sin()).collect();
        let a = interval_pieces(0.3, &g).unwrap();
        let b = interval_pieces_order(0.3, &g, 4).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn cumulative_rule_is_exact_on_cubics() {
        let h = 0.1;
        let g: Vec<f64> = (0..20).map(|i| {
            let x = i as f64 * h;
            x * x * x - 2.0 * x + 1.0
        }).collect();
        let c = cumulative_uniform(h, &g).unwrap();
        for (i, v) in c.iter().enumerate() {
            let x = i as f64 * h;
            let exact = x.powi(4) / 4.0 - x * x + x;
            assert!((v - exact).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn cumulative_rule_converges_at_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let g: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
            (uniform_total(h, &g).unwrap() - (2f64.exp() - 1.0)).abs()
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn exponential_tail_is_exact() {
        let x: Vec<f64> = (0..6).map(|i| 10.0 + i as f64 * 0.1).collect();
        let g: Vec<f64> = x.iter().map(|x| 3.0 * (-2.0 * x).exp()).collect();
        let tail = power_law_tail(&x, &g).unwrap();
        assert!((tail / (1.5 * (-2.0 * x[5]).exp()) - 1.0).abs() < 1e-12);
        assert!(matches!(power_law_tail(&x, &[1.0; 6]), Err(QuadratureError::DivergentTail(_))));
        assert_eq!(power_law_tail(&x, &[0.0; 6]), Ok(0.0));
    }

    #[test]
    fn gauss_kronrod_known_integrals() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        // ∫_0^∞ 8 s³ (1+s²)^{-3} ds = 2
        let v = integrate_to_infinity(|s| 8.0 * s.powi(3) * (1.0 + s * s).powi(-3), 0.0, 1e-14, 1e-14)
            .unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    proptest! {
        #[test]
        fn gauss_kronrod_integrates_polynomials(c in proptest::collection::vec(-3.0f64..3.0, 6), b in 0.1f64..4.0) {
            let p = |x: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
            let exact: f64 = c.iter().enumerate().map(|(i, ci)| ci * b.powi(i as i32 + 1) / (i + 1) as f64).sum();
            let v = integrate(p, 0.0, b, 1e-13, 1e-13).unwrap();
            prop_assert!((v - exact).abs() < 1e-11 * (1.0 + exact.abs()));
        }
    }
}
