//! Calabi's explicit Ricci-flat ALE metric on the crepant resolution of `ℂᵐ/ℤₘ`,
//! and the U(m)-invariant Kähler potentials it is compared against.
//!
//! Conventions: a potential `Φ(t)`, `t = r²`, has transverse eigenvalue `Φ′`
//! (multiplicity `m−1`) and radial eigenvalue `Φ′ + tΦ″`; `Φ = t` is Euclidean.
//! With `s = (t^m + 1)^{1/m}` the Calabi potential is
//! `Φ = s + (1/m) Σ_j ζ^j log(s − ζ^j)`, `ζ = e^{2πi/m}`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::radial::{
    decay_order, least_squares, ClosedForm, RadialError, RadialFunction, RadialGrid, Variable,
};

const SERIES_TERMS: usize = 200;
const SERIES_TOLERANCE: f64 = 1e-18;
const IMAGINARY_TOLERANCE: f64 = 1e-12;
const FD_GHOSTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalabiError {
    #[error("complex dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("potential is singular at t = {0} (need t > 0)")]
    NonPositiveT(f64),
    #[error("imaginary residue {0:e} of the logarithm sum exceeds tolerance")]
    ImaginaryResidue(f64),
    #[error("metric not positive at node {node} (t = {t}): eigenvalues ({transverse}, {radial})")]
    NotPositive { node: usize, t: f64, transverse: f64, radial: f64 },
    #[error("potentials need a log-t grid")]
    WrongCoordinate,
    #[error("derivative order {0} not in 0..=2")]
    Order(usize),
    #[error(transparent)]
    Radial(#[from] RadialError),
}

fn check(m: usize, t: f64) -> Result<(), CalabiError> {
    if m < 2 {
        return Err(CalabiError::Dimension(m));
    }
    if !(t > 0.0) {
        return Err(CalabiError::NonPositiveT(t));
    }
    Ok(())
}

/// `s − 1` without cancellation.
fn s_minus_one(m: usize, t: f64) -> f64 {
    ((t.powi(m as i32)).ln_1p() / m as f64).exp_m1()
}

/// `binom(1/m, k)` for `k = 0..len`.
fn root_binomials(m: usize, len: usize) -> Vec<f64> {
    let a = 1.0 / m as f64;
    let mut out = vec![1.0; len];
    for k in 1..len {
        out[k] = out[k - 1] * (a - (k - 1) as f64) / k as f64;
    }
    out
}

/// The logarithm sum `s + (1/m) Σ_j ζ^j log(s − ζ^j)` with principal branches.
pub fn calabi_potential_complex(m: usize, t: f64) -> Result<Complex64, CalabiError> {
    check(m, t)?;
    let sm1 = s_minus_one(m, t);
    let s = 1.0 + sm1;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        // s − ζ^j = (s − 1) + 2 sin²(θ/2) − i sin θ
        let half = (0.5 * theta).sin();
        let arg = Complex64::new(sm1 + 2.0 * half * half, -theta.sin());
        sum += Complex64::from_polar(1.0, theta) * arg.ln();
    }
    Ok(s + sum / m as f64)
}

/// Calabi potential at `t = r²`, the real part of the logarithm sum.
pub fn calabi_potential(m: usize, t: f64) -> Result<f64, CalabiError> {
    let z = calabi_potential_complex(m, t)?;
    if z.im.abs() > IMAGINARY_TOLERANCE * z.re.abs().max(1.0) {
        return Err(CalabiError::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// `Φ − t = Σ_{k≥1} binom(1/m,k) t^{1−km}/(1−km)` for `t^m > 1`.
fn far_series(m: usize, t: f64, first: usize) -> f64 {
    let u = t.powi(-(m as i32));
    let b = root_binomials(m, SERIES_TERMS);
    let mut sum = 0.0;
    let mut uk = u.powi(first as i32);
    for (k, bk) in b.iter().enumerate().skip(first) {
        let term = bk * uk / (1.0 - (k * m) as f64);
        sum += term;
        if term.abs() <= SERIES_TOLERANCE * sum.abs() {
            break;
        }
        uk *= u;
    }
    t * sum
}

/// `Φ(t) − t`, accurate in relative terms at large `t`.
pub fn calabi_deviation(m: usize, t: f64) -> Result<f64, CalabiError> {
    check(m, t)?;
    if t.powi(m as i32) >= 2.0 {
        Ok(far_series(m, t, 1))
    } else {
        Ok(calabi_potential(m, t)? - t)
    }
}

/// Leading coefficient `A = −1/(m(m−1))` of `Φ − t ~ A t^{1−m}`.
pub fn calabi_leading_coefficient(m: usize) -> f64 {
    -1.0 / (m * (m - 1)) as f64
}

/// `χ = Φ − t − A t^{1−m}`, computed from the series where it converges fast.
pub fn calabi_remainder(m: usize, t: f64) -> Result<f64, CalabiError> {
    check(m, t)?;
    if t.powi(m as i32) >= 2.0 {
        Ok(far_series(m, t, 2))
    } else {
        Ok(calabi_deviation(m, t)? - calabi_leading_coefficient(m) * t.powi(1 - m as i32))
    }
}

/// `lim_{t→0} (Φ − log t)`.
fn divisor_constant(m: usize) -> f64 {
    let mf = m as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 1..m {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / mf;
        let half = (0.5 * theta).sin();
        sum += Complex64::from_polar(1.0, theta) * Complex64::new(2.0 * half * half, -theta.sin()).ln();
    }
    1.0 + (sum.re - mf.ln()) / mf
}

/// `Φ − log t − lim_{t→0}(Φ − log t)`, accurate in relative terms as `t → 0`.
fn divisor_part(m: usize, t: f64) -> Result<f64, CalabiError> {
    check(m, t)?;
    let tau = t.powi(m as i32);
    if tau <= 0.5 {
        let b = root_binomials(m, SERIES_TERMS);
        let mut sum = 0.0;
        let mut tk = tau;
        for (k, bk) in b.iter().enumerate().skip(1) {
            let term = bk * tk / k as f64;
            sum += term;
            if term.abs() <= SERIES_TOLERANCE * sum.abs() {
                break;
            }
            tk *= tau;
        }
        Ok(sum / m as f64)
    } else {
        Ok(calabi_potential(m, t)? - t.ln() - divisor_constant(m))
    }
}

/// Closed-form metric eigenvalues `(Φ′, Φ′ + tΦ″) = (s/t, t^{m−1}/s^{m−1})`.
pub fn calabi_derivatives(m: usize, t: f64) -> Result<(f64, f64), CalabiError> {
    check(m, t)?;
    let s = 1.0 + s_minus_one(m, t);
    Ok((s / t, (t / s).powi(m as i32 - 1)))
}

/// Eigenvalue excesses `(Φ′ − 1, Φ′ + tΦ″ − 1)` without cancellation.
pub fn calabi_excess(m: usize, t: f64) -> Result<(f64, f64), CalabiError> {
    check(m, t)?;
    let l = t.powi(-(m as i32)).ln_1p() / m as f64;
    Ok((l.exp_m1(), (-(m as f64 - 1.0) * l).exp_m1()))
}

/// U(m)-invariant Kähler potential on a log-t grid, stored as the deviation
/// `Φ − t` together with its metric eigenvalues at the nodes.
#[derive(Debug, Clone)]
pub struct RadialKahlerPotential {
    m: usize,
    deviation: RadialFunction,
    transverse: Vec<f64>,
    radial: Vec<f64>,
    excess_transverse: Vec<f64>,
    excess_radial: Vec<f64>,
    class_constant: f64,
}

impl RadialKahlerPotential {
    /// Builds from exact nodal data. Each eigenvalue is given together with its
    /// excess over one so that neither end of the grid loses precision.
    pub fn from_parts(
        m: usize,
        deviation: RadialFunction,
        (transverse, excess_transverse): (Vec<f64>, Vec<f64>),
        (radial, excess_radial): (Vec<f64>, Vec<f64>),
        class_constant: f64,
    ) -> Result<Self, CalabiError> {
        if m < 2 {
            return Err(CalabiError::Dimension(m));
        }
        if deviation.grid().coordinate() != crate::radial::Coordinate::LogT {
            return Err(CalabiError::WrongCoordinate);
        }
        let n = deviation.grid().len();
        for v in [&transverse, &radial, &excess_transverse, &excess_radial] {
            if v.len() != n {
                return Err(RadialError::GridMismatch.into());
            }
        }
        Ok(Self { m, deviation, transverse, radial, excess_transverse, excess_radial, class_constant })
    }

    /// Eigenvalues from (finite-difference or analytic) log-derivatives of the deviation.
    pub fn from_deviation(m: usize, deviation: RadialFunction, class_constant: f64) -> Result<Self, CalabiError> {
        let grid = deviation.grid().clone();
        if grid.coordinate() != crate::radial::Coordinate::LogT {
            return Err(CalabiError::WrongCoordinate);
        }
        let d = deviation.log_derivatives(2)?;
        let t = grid.t_values();
        let et: Vec<f64> = (0..grid.len()).map(|i| d[1][i] / t[i]).collect();
        let er: Vec<f64> = (0..grid.len()).map(|i| d[2][i] / t[i]).collect();
        let lt = et.iter().map(|e| 1.0 + e).collect();
        let lr = er.iter().map(|e| 1.0 + e).collect();
        Self::from_parts(m, deviation, (lt, et), (lr, er), class_constant)
    }

    /// The flat potential `Φ = t`.
    pub fn flat(m: usize, grid: &RadialGrid) -> Result<Self, CalabiError> {
        let n = grid.len();
        Self::from_parts(
            m,
            RadialFunction::zeros(grid),
            (vec![1.0; n], vec![0.0; n]),
            (vec![1.0; n], vec![0.0; n]),
            0.0,
        )
    }

    /// Calabi's potential with closed-form eigenvalues; class constant 1.
    pub fn calabi(m: usize, grid: &RadialGrid) -> Result<Self, CalabiError> {
        if m < 2 {
            return Err(CalabiError::Dimension(m));
        }
        let form = ClosedForm::new(format!("calabi m={m}"), Variable::T, move |t, k| match k {
            0 => calabi_deviation(m, t).ok(),
            1 => calabi_excess(m, t).ok().map(|e| e.0),
            // Φ″ = −s^{1−m}/t²
            2 => Some(-(1.0 + s_minus_one(m, t)).powi(1 - m as i32) / (t * t)),
            _ => None,
        });
        let deviation = RadialFunction::closed_form(grid, form)?;
        let mut lt = Vec::with_capacity(grid.len());
        let mut lr = Vec::with_capacity(grid.len());
        let mut et = Vec::with_capacity(grid.len());
        let mut er = Vec::with_capacity(grid.len());
        for t in grid.t_values() {
            let (a, b) = calabi_derivatives(m, t)?;
            let (ea, eb) = calabi_excess(m, t)?;
            lt.push(a);
            lr.push(b);
            et.push(ea);
            er.push(eb);
        }
        Self::from_parts(m, deviation, (lt, et), (lr, er), 1.0)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &RadialGrid {
        self.deviation.grid()
    }

    pub fn class_constant(&self) -> f64 {
        self.class_constant
    }

    /// `Φ − t`.
    pub fn deviation(&self) -> &RadialFunction {
        &self.deviation
    }

    /// `Φ` itself.
    pub fn phi(&self) -> RadialFunction {
        let grid = self.grid();
        let values = (0..grid.len()).map(|i| grid.t(i) + self.deviation.values()[i]).collect();
        RadialFunction::sampled(grid.clone(), values).expect("finite potential")
    }

    /// `Φ′` at the nodes.
    pub fn transverse(&self) -> &[f64] {
        &self.transverse
    }

    /// `Φ′ + tΦ″` at the nodes.
    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    pub fn excess_transverse(&self) -> &[f64] {
        &self.excess_transverse
    }

    pub fn excess_radial(&self) -> &[f64] {
        &self.excess_radial
    }

    /// `log[(Φ′)^{m−1}(Φ′+tΦ″)]`, the log volume ratio against the flat metric.
    pub fn log_density(&self) -> Vec<f64> {
        let lg = |l: f64, e: f64| if e.abs() < 0.5 { e.ln_1p() } else { l.ln() };
        (0..self.grid().len())
            .map(|i| {
                (self.m as f64 - 1.0) * lg(self.transverse[i], self.excess_transverse[i])
                    + lg(self.radial[i], self.excess_radial[i])
            })
            .collect()
    }

    /// Smallest metric eigenvalue over the grid.
    pub fn positivity_margin(&self) -> f64 {
        self.transverse.iter().chain(&self.radial).fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn check_positive(&self) -> Result<(), CalabiError> {
        for i in 0..self.grid().len() {
            if !(self.transverse[i] > 0.0 && self.radial[i] > 0.0) {
                return Err(CalabiError::NotPositive {
                    node: i,
                    t: self.grid().t(i),
                    transverse: self.transverse[i],
                    radial: self.radial[i],
                });
            }
        }
        Ok(())
    }
}

/// `max |(Φ′)^{m−1}(Φ′+tΦ″) − 1|` over the grid with closed-form eigenvalues.
pub fn ricci_flat_residual(m: usize, grid: &RadialGrid) -> Result<f64, CalabiError> {
    let mut worst: f64 = 0.0;
    for t in grid.t_values() {
        let (a, b) = calabi_derivatives(m, t)?;
        worst = worst.max((a.powi(m as i32 - 1) * b - 1.0).abs());
    }
    Ok(worst)
}

/// Same residual with `Φ′, Φ″` from sixth-order central differences in `log t`.
///
/// The differenced quantity is `Φ − log t − C` for `t < 1` and `Φ − t` for
/// `t ≥ 1`: the subtracted parts are differentiated exactly, and what remains
/// keeps full relative precision where the radial eigenvalue degenerates
/// (`~t^{m−1}` near the divisor) and where the metric is nearly flat.
pub fn ricci_flat_residual_fd(m: usize, grid: &RadialGrid) -> Result<f64, CalabiError> {
    if m < 2 {
        return Err(CalabiError::Dimension(m));
    }
    let ext = grid.extended(FD_GHOSTS);
    let h = grid.spacing();
    let per_x = grid.coordinate().log_t_per_x();
    let ts = ext.t_values();
    let near: Vec<f64> = ts
        .iter()
        .map(|&t| if t < 2.0 { divisor_part(m, t) } else { Ok(0.0) })
        .collect::<Result<_, _>>()?;
    let far: Vec<f64> = ts
        .iter()
        .map(|&t| if t > 0.5 { calabi_deviation(m, t) } else { Ok(0.0) })
        .collect::<Result<_, _>>()?;
    let c1 = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    let c2 = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let stencil = |v: &[f64], c: &[f64; 7], j: usize| -> f64 {
        (0..7).map(|k| c[k] * v[j - FD_GHOSTS + k]).sum()
    };
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let j = i + FD_GHOSTS;
        let t = ts[j];
        // derivatives in log t
        let (lt, lr) = if t < 1.0 {
            let d1 = stencil(&near, &c1, j) / (h * per_x);
            let d2 = stencil(&near, &c2, j) / (h * h * per_x * per_x);
            ((1.0 + d1) / t, d2 / t)
        } else {
            let d1 = stencil(&far, &c1, j) / (h * per_x);
            let d2 = stencil(&far, &c2, j) / (h * h * per_x * per_x);
            (1.0 + d1 / t, 1.0 + d2 / t)
        };
        worst = worst.max((lt.powi(m as i32 - 1) * lr - 1.0).abs());
    }
    Ok(worst)
}

/// Least-squares `A` in `Φ − t ≈ c₀ + A t^{1−m} + c₂ t^{−m}` over the given samples.
pub fn fit_asymptotic_coefficient(m: usize, t: &[f64], deviation: &[f64]) -> Result<f64, RadialError> {
    if t.len() < 6 {
        return Err(RadialError::WindowTooSmall {
            lo: t.first().copied().unwrap_or(0.0),
            hi: t.last().copied().unwrap_or(0.0),
            points: t.len(),
            needed: 6,
        });
    }
    let mi = m as i32;
    let basis = vec![
        vec![1.0; t.len()],
        t.iter().map(|t| t.powi(1 - mi)).collect(),
        t.iter().map(|t| t.powi(-mi)).collect(),
    ];
    Ok(least_squares(&basis, deviation)?[1])
}

const FIT_SAMPLES: usize = 200;

/// Fitted coefficient `A` of `t^{1−m}` in the Calabi potential over `[t_lo, t_hi]`.
pub fn asymptotic_coefficient(m: usize, fit_window: (f64, f64)) -> Result<f64, CalabiError> {
    let (lo, hi) = fit_window;
    if m < 2 {
        return Err(CalabiError::Dimension(m));
    }
    if !(lo > 0.0 && hi > lo * 1.5) {
        return Err(RadialError::WindowTooSmall { lo, hi, points: 0, needed: 6 }.into());
    }
    let grid = RadialGrid::log_t(lo, hi, FIT_SAMPLES)?;
    let t = grid.t_values();
    let dev = t.iter().map(|&t| calabi_deviation(m, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(fit_asymptotic_coefficient(m, &t, &dev)?)
}

/// Default radial window for the decay fits.
pub const DECAY_WINDOW_R: (f64, f64) = (1e2, 1e4);

/// `Φ′ − 1` as a closed form in `t` with analytic derivatives up to order two.
pub fn transverse_excess_form(m: usize) -> ClosedForm {
    ClosedForm::new(format!("calabi transverse excess m={m}"), Variable::T, move |t, k| {
        let (e, _) = calabi_excess(m, t).ok()?;
        let s = t * (1.0 + e);
        let mf = m as f64;
        let sp = s.powf(1.0 - mf);
        match k {
            0 => Some(e),
            1 => Some(-sp / (t * t)),
            2 => Some(sp / (t * t * t) * ((mf - 1.0) * (t / s).powi(m as i32) + 2.0)),
            _ => None,
        }
    })
}

/// Decay order in `r` of `∂_r^k (Φ′ − 1)`; the sharp value is `−2m − k`.
pub fn metric_decay_profile(m: usize, k: usize) -> Result<f64, CalabiError> {
    metric_decay_profile_in(m, k, DECAY_WINDOW_R)
}

pub fn metric_decay_profile_in(m: usize, k: usize, window_r: (f64, f64)) -> Result<f64, CalabiError> {
    if k > 2 {
        return Err(CalabiError::Order(k));
    }
    let grid = RadialGrid::log_t(window_r.0.powi(2), window_r.1.powi(2), FIT_SAMPLES)?;
    let f = RadialFunction::closed_form(&grid, transverse_excess_form(m))?;
    Ok(decay_order(&f, k, window_r)?)
}

/// `χ = Φ − t − A t^{1−m}` as a closed form in `t` with analytic first derivative.
pub fn remainder_form(m: usize) -> ClosedForm {
    ClosedForm::new(format!("calabi remainder m={m}"), Variable::T, move |t, k| match k {
        0 => calabi_remainder(m, t).ok(),
        // χ′ = (Φ′ − 1) − A(1−m) t^{−m}
        1 => {
            let a = calabi_leading_coefficient(m);
            let mf = m as f64;
            if t.powi(m as i32) >= 2.0 {
                // Φ′ − 1 = Σ_{k≥1} binom(1/m,k) t^{−km}; drop k = 1
                let u = t.powf(-mf);
                let b = root_binomials(m, SERIES_TERMS);
                let mut sum = 0.0;
                let mut uk = u * u;
                for bk in b.iter().skip(2) {
                    let term = bk * uk;
                    sum += term;
                    if term.abs() <= SERIES_TOLERANCE * sum.abs() {
                        break;
                    }
                    uk *= u;
                }
                Some(sum)
            } else {
                calabi_excess(m, t).ok().map(|e| e.0 - a * (1.0 - mf) * t.powf(-mf))
            }
        }
        _ => None,
    })
}

/// Decay order in `r` of `∂_r^k χ`, `k ≤ 1`.
pub fn remainder_decay(m: usize, k: usize, window_r: (f64, f64)) -> Result<f64, CalabiError> {
    if k > 1 {
        return Err(CalabiError::Order(k));
    }
    let grid = RadialGrid::log_t(window_r.0.powi(2), window_r.1.powi(2), FIT_SAMPLES)?;
    let f = RadialFunction::closed_form(&grid, remainder_form(m))?;
    Ok(decay_order(&f, k, window_r)?)
}

/// Summary of the Calabi metric for reports.
#[derive(Debug, Clone, Serialize)]
pub struct CalabiSummary {
    pub m: usize,
    pub fitted_a: f64,
    pub exact_a: f64,
    pub ricci_residual_closed_form: f64,
    pub ricci_residual_finite_difference: f64,
    pub metric_decay: [f64; 3],
    pub remainder_decay: [f64; 2],
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_value_at_unit_t() {
        let v = calabi_potential(2, 1.0).unwrap();
        let expected = 2f64.sqrt() - (1.0 + 2f64.sqrt()).ln();
        assert!((v - expected).abs() < 1e-15, "{v}");
        assert!((v - 0.53284).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(calabi_potential(2, 0.0), Err(CalabiError::NonPositiveT(_))));
        assert!(matches!(calabi_derivatives(1, 1.0), Err(CalabiError::Dimension(1))));
    }

    #[test]
    fn derivatives_at_unit_t() {
        let (a, b) = calabi_derivatives(2, 1.0).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
        assert!((b - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_tend_to_flat_and_class_constant_is_one() {
        for m in 2..=5 {
            let (a, b) = calabi_derivatives(m, 1e6).unwrap();
            assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
            let t = 1e-8;
            let (a, _) = calabi_derivatives(m, t).unwrap();
            assert!(((t * a).powi(m as i32) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deviation_routes_agree_at_the_switch() {
        for m in 2..=5 {
            let t0 = 2f64.powf(1.0 / m as f64);
            for t in [0.9 * t0, t0, 1.1 * t0, 3.0 * t0] {
                let series = far_series(m, t, 1);
                let direct = calabi_potential(m, t).unwrap() - t;
                assert!((series - direct).abs() < 1e-13, "m={m} t={t}: {series} vs {direct}");
            }
        }
    }

    #[test]
    fn divisor_series_agrees_with_logarithm_sum() {
        for m in 2..=5 {
            let c = divisor_constant(m);
            for t in [0.3, 0.6, 0.8f64.powf(1.0 / m as f64)] {
                let series = divisor_part(m, t).unwrap();
                let direct = calabi_potential(m, t).unwrap() - t.ln() - c;
                assert!((series - direct).abs() < 1e-13, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn deviation_vanishes_at_infinity() {
        for m in 2..=5 {
            let d = calabi_deviation(m, 1e6).unwrap();
            assert!(d.abs() < 1e-5 && d < 0.0);
        }
    }

    #[test]
    fn closed_form_ricci_flatness() {
        let g = RadialGrid::log_t(1e-4, 1e8, 2000).unwrap();
        for m in 2..=5 {
            assert!(ricci_flat_residual(m, &g).unwrap() < 1e-13);
        }
    }

    #[test]
    fn finite_difference_ricci_flatness() {
        let g = RadialGrid::log_t(1e-4, 1e8, 2000).unwrap();
        for m in 2..=5 {
            let r = ricci_flat_residual_fd(m, &g).unwrap();
            assert!(r < 1e-8, "m={m}: {r}");
        }
    }

    #[test]
    fn stored_eigenvalues_match_finite_differences_of_deviation() {
        let g = RadialGrid::log_t(1.0, 1e6, 1500).unwrap();
        for m in 2..=4 {
            let exact = RadialKahlerPotential::calabi(m, &g).unwrap();
            let fd = RadialKahlerPotential::from_deviation(m, exact.deviation().to_sampled(), 1.0).unwrap();
            for i in 0..g.len() {
                let tol = 1e-6 * exact.excess_transverse()[i].abs() + 1e-13;
                assert!((exact.excess_transverse()[i] - fd.excess_transverse()[i]).abs() < tol, "m={m} i={i}");
                let tol = 1e-5 * exact.excess_radial()[i].abs() + 1e-12;
                assert!((exact.excess_radial()[i] - fd.excess_radial()[i]).abs() < tol, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn fitted_leading_coefficient() {
        for m in 2..=4 {
            let a = asymptotic_coefficient(m, (1e4, 1e8)).unwrap();
            let exact = calabi_leading_coefficient(m);
            assert!(((a - exact) / exact).abs() < 5e-3, "m={m}: {a}");
            assert!(((a - exact) / exact).abs() < 1e-6, "m={m}: {a}");
        }
    }

    #[test]
    fn sharp_metric_decay() {
        for m in 2..=3 {
            for k in 0..=2 {
                let d = metric_decay_profile(m, k).unwrap();
                let target = -2.0 * m as f64 - k as f64;
                assert!(((d - target) / target).abs() < 0.05, "m={m} k={k}: {d}");
            }
        }
    }

    #[test]
    fn remainder_decays_at_twice_the_leading_rate() {
        for m in 2..=3 {
            let mf = m as f64;
            let d0 = remainder_decay(m, 0, DECAY_WINDOW_R).unwrap();
            let d1 = remainder_decay(m, 1, DECAY_WINDOW_R).unwrap();
            assert!(d0 <= -2.0 * mf + 0.1);
            assert!((d0 - (2.0 - 4.0 * mf)).abs() < 1e-3, "m={m}: {d0}");
            assert!((d1 - (1.0 - 4.0 * mf)).abs() < 1e-3, "m={m}: {d1}");
        }
    }

    #[test]
    fn flat_potential_is_flat() {
        let g = RadialGrid::log_t(1e-2, 1e2, 32).unwrap();
        let f = RadialKahlerPotential::flat(3, &g).unwrap();
        assert!(f.log_density().iter().all(|&v| v == 0.0));
        assert_eq!(f.positivity_margin(), 1.0);
    }

    proptest! {
        #[test]
        fn imaginary_residue_is_negligible(m in 2usize..=6, lt in -8.0f64..8.0) {
            let z = calabi_potential_complex(m, 10f64.powf(lt)).unwrap();
            prop_assert!(z.im.abs() < 1e-12 * z.re.abs().max(1.0));
        }

        #[test]
        fn transverse_excess_decreases_to_zero(m in 2usize..=6, lt in -6.0f64..6.0, ratio in 1.01f64..10.0) {
            let t = 10f64.powf(lt);
            let (a, _) = calabi_excess(m, t).unwrap();
            let (b, _) = calabi_excess(m, t * ratio).unwrap();
            prop_assert!(b < a && b > 0.0);
        }
    }
}
