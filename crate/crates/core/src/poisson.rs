//! Radial Poisson theory on `ℝⁿ/G` with decaying right-hand sides.
//!
//! With `Δ = −(∂_r² + (n−1)/r ∂_r)` the decaying radial solution of `Δu = f` is
//!
//! `u(r) = (1/(n−2)) [ r^{2−n} ∫_0^r f σ^{n−1} dσ + ∫_r^∞ f σ dσ ]`,
//!
//! which is the radial average of the Green's representation. Both integrals are
//! accumulated on the grid (or per interval by Gauss–Kronrod for closed forms).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::{solve_tridiagonal, BandedError};
use crate::quadrature::{
    cumulative_uniform, integrate, integrate_to_infinity, interval_pieces, power_law_tail,
    reverse_cumsum, QuadratureError,
};
use crate::radial::{
    decay_order, smoothed_radius_power, ClosedForm, RadialError, RadialFunction, RadialGrid,
    Variable,
};

const TAIL_SAMPLES: usize = 8;
const NEGLIGIBLE_REMAINDER: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoissonError {
    #[error("dimension must exceed 2, got {0}")]
    Dimension(usize),
    #[error("group order must be at least 1")]
    GroupOrder,
    #[error("weight {0} outside the theorem's weight range (need beta < -2)")]
    Weight(f64),
    #[error("weight {0} equals -n: logarithmic borderline case not handled")]
    CriticalWeight(f64),
    #[error("f not integrable: weight {0} >= -n")]
    NotIntegrable(f64),
    #[error("weight hypothesis violated: beta + gamma = {sum} must be < 2 - n = {bound}")]
    SymmetryHypothesis { sum: f64, bound: f64 },
    #[error("unknown right-hand side {0:?}")]
    UnknownFunction(String),
    #[error("refinement check needs a closed-form right-hand side")]
    NeedsClosedForm,
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Banded(#[from] BandedError),
}

/// Volume of the unit `k`-sphere.
pub fn sphere_volume(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k - 1) as f64 * sphere_volume(k - 2),
    }
}

#[derive(Debug, Clone)]
pub struct PoissonProblem {
    pub n: usize,
    pub group_order: u64,
    pub f: RadialFunction,
    pub beta: f64,
    /// Radii used for decay fits; defaults to `[10⁻³, 10⁻¹]·r_max` (clamped to `r ≥ 10`).
    pub fit_window: Option<(f64, f64)>,
}

impl PoissonProblem {
    pub fn new(n: usize, group_order: u64, f: RadialFunction, beta: f64) -> Result<Self, PoissonError> {
        if n <= 2 {
            return Err(PoissonError::Dimension(n));
        }
        if group_order == 0 {
            return Err(PoissonError::GroupOrder);
        }
        if !(beta < -2.0) {
            return Err(PoissonError::Weight(beta));
        }
        Ok(Self { n, group_order, f, beta, fit_window: None })
    }

    pub fn with_fit_window(mut self, lo: f64, hi: f64) -> Self {
        self.fit_window = Some((lo, hi));
        self
    }

    pub fn case(&self) -> Result<PoissonCase, PoissonError> {
        let n = self.n as f64;
        if self.beta == -n {
            Err(PoissonError::CriticalWeight(self.beta))
        } else if self.beta > -n {
            Ok(PoissonCase::A)
        } else {
            Ok(PoissonCase::B)
        }
    }

    /// Radii used for decay fits.
    pub fn decay_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or_else(|| {
            let r_max = self.f.grid().r_max();
            ((1e-3 * r_max).max(10.0), 0.1 * r_max)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoissonCase {
    /// `β ∈ (−n, −2)`: `u ∈ C_{β+2}` with no leading term.
    #[serde(rename = "a")]
    A,
    /// `β < −n`: `u = A ρ^{2−n} + v` with `v ∈ C_{β+2}`.
    #[serde(rename = "b")]
    B,
}

impl PoissonCase {
    pub fn tag(self) -> &'static str {
        match self {
            PoissonCase::A => "a",
            PoissonCase::B => "b",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub u: RadialFunction,
    pub a_coefficient: f64,
    pub v: RadialFunction,
    pub case: PoissonCase,
    /// `None` when `u` vanishes on the fit window.
    pub measured_decay_u: Option<f64>,
    /// `None` when `v` is negligible against `u` on the fit window.
    pub measured_decay_v: Option<f64>,
}

/// `Δu = −(u″ + (n−1)u′/r)`.
pub fn laplacian(u: &RadialFunction, n: usize) -> Result<RadialFunction, RadialError> {
    let grid = u.grid();
    let a = grid.coordinate().log_r_per_x();
    let d = u.log_derivatives(2)?;
    let values = (0..grid.len())
        .map(|i| {
            let r = grid.r(i);
            -(d[2][i] / (a * a) + (n as f64 - 2.0) * d[1][i] / a) / (r * r)
        })
        .collect();
    RadialFunction::sampled(grid.clone(), values)
}

/// Integrals of `f σ^k dσ` over each grid interval `[r_i, r_{i+1}]`.
fn moment_pieces(f: &RadialFunction, k: f64) -> Result<Vec<f64>, PoissonError> {
    let grid = f.grid();
    let a = grid.coordinate().log_r_per_x();
    let g: Vec<f64> =
        (0..grid.len()).map(|i| f.values()[i] * grid.r(i).powf(k + 1.0) * a).collect();
    match f.closed_form_source() {
        Some(form) => {
            let x = grid.x_values();
            let floor = 1e-17 * grid.spacing() * g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            (0..grid.len() - 1)
                .map(|i| {
                    integrate(
                        |xx| {
                            let r = (a * xx).exp();
                            form.value_at_r(r) * r.powf(k + 1.0) * a
                        },
                        x[i],
                        x[i + 1],
                        floor,
                        1e-14,
                    )
                    .map_err(PoissonError::from)
                })
                .collect()
        }
        None => Ok(interval_pieces(grid.spacing(), &g)?),
    }
}

fn forward_cumsum(pieces: &[f64], start: f64) -> Vec<f64> {
    let mut out = vec![start; pieces.len() + 1];
    for (i, p) in pieces.iter().enumerate() {
        out[i + 1] = out[i] + p;
    }
    out
}

/// `∫_{r_max}^∞ f σ^k dσ`.
fn outer_tail(f: &RadialFunction, k: f64) -> Result<f64, PoissonError> {
    let grid = f.grid();
    let r_end = grid.r_max();
    match f.closed_form_source() {
        Some(form) => Ok(integrate_to_infinity(
            |s| form.value_at_r(s) * s.powf(k),
            r_end,
            0.0,
            1e-13,
        )?),
        None => {
            let n = grid.len();
            let a = grid.coordinate().log_r_per_x();
            let idx = n - TAIL_SAMPLES..n;
            let x: Vec<f64> = idx.clone().map(|i| grid.x_values()[i]).collect();
            let g: Vec<f64> =
                idx.map(|i| f.values()[i] * grid.r(i).powf(k + 1.0) * a).collect();
            Ok(power_law_tail(&x, &g)?)
        }
    }
}

/// `∫_0^{r_min} f σ^k dσ`, for `k > −1`.
fn inner_piece(f: &RadialFunction, k: f64) -> Result<f64, PoissonError> {
    let r0 = f.grid().r_min();
    match f.closed_form_source() {
        Some(form) => Ok(integrate(|s| form.value_at_r(s) * s.powf(k), 0.0, r0, 0.0, 1e-14)?),
        None => Ok(f.values()[0] * r0.powf(k + 1.0) / (k + 1.0)),
    }
}

/// Solves `Δu = f` for the decaying radial solution and splits off the leading term.
pub fn solve_poisson(p: &PoissonProblem) -> Result<PoissonSolution, PoissonError> {
    let case = p.case()?;
    let grid = p.f.grid().clone();
    let nf = p.n as f64;
    let len = grid.len();
    if p.f.is_identically_zero() {
        let zero = RadialFunction::zeros(&grid);
        return Ok(PoissonSolution {
            u: zero.clone(),
            a_coefficient: 0.0,
            v: zero,
            case,
            measured_decay_u: None,
            measured_decay_v: None,
        });
    }

    // P(r) = ∫_0^r f σ^{n−1} (forward), Q(r) = ∫_r^∞ f σ (backward)
    let p_pieces = moment_pieces(&p.f, nf - 1.0)?;
    let p_fwd = forward_cumsum(&p_pieces, inner_piece(&p.f, nf - 1.0)?);
    let q = reverse_cumsum(&moment_pieces(&p.f, 1.0)?, outer_tail(&p.f, 1.0)?);
    let power = |i: usize| grid.r(i).powf(2.0 - nf);

    let (u_vals, a_coefficient, v_vals) = match case {
        PoissonCase::A => {
            let u: Vec<f64> =
                (0..len).map(|i| (power(i) * p_fwd[i] + q[i]) / (nf - 2.0)).collect();
            (u.clone(), 0.0, u)
        }
        PoissonCase::B => {
            // T(r) = ∫_r^∞ f σ^{n−1} = P∞ − P(r); each node uses whichever of P, T
            // carries less cancellation
            let t = reverse_cumsum(&p_pieces, outer_tail(&p.f, nf - 1.0)?);
            let p_inf = t[0] + p_fwd[0];
            let a = p_inf / (nf - 2.0);
            let mut u = vec![0.0; len];
            let mut v = vec![0.0; len];
            for i in 0..len {
                let r = grid.r(i);
                if p_fwd[i].abs() <= t[i].abs() {
                    u[i] = (power(i) * p_fwd[i] + q[i]) / (nf - 2.0);
                    v[i] = u[i] - a * (1.0 + r * r).powf(0.5 * (2.0 - nf));
                } else {
                    let rest = (q[i] - power(i) * t[i]) / (nf - 2.0);
                    u[i] = a * power(i) + rest;
                    // r^{2−n} − ρ^{2−n} without cancellation
                    let lead_gap = -power(i) * (0.5 * (2.0 - nf) * (r * r).recip().ln_1p()).exp_m1();
                    v[i] = rest + a * lead_gap;
                }
            }
            (u, a, v)
        }
    };
    let u = RadialFunction::sampled(grid.clone(), u_vals)?;
    let v = RadialFunction::sampled(grid.clone(), v_vals)?;

    let window = p.decay_window();
    let measured_decay_u = fit_or_none(&u, window)?;
    let measured_decay_v = match case {
        PoissonCase::A => measured_decay_u,
        PoissonCase::B => {
            let idx = grid.window(window.0, window.1);
            let negligible =
                idx.clone().all(|i| v.values()[i].abs() <= NEGLIGIBLE_REMAINDER * u.values()[i].abs());
            if negligible { None } else { fit_or_none(&v, window)? }
        }
    };

    Ok(PoissonSolution { u, a_coefficient, v, case, measured_decay_u, measured_decay_v })
}

fn fit_or_none(f: &RadialFunction, window: (f64, f64)) -> Result<Option<f64>, PoissonError> {
    match decay_order(f, 0, window) {
        Ok(s) => Ok(Some(s)),
        Err(RadialError::NoDecayOrder) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// `A = |G|/((n−2)Ω_{n−1}) ∫_X f dV`, the coefficient of `ρ^{2−n}` in `u`.
///
/// Integrated independently of [`solve_poisson`]: adaptive Gauss–Kronrod on
/// `[0, ∞)` for closed forms, composite rule plus power-law tail otherwise.
pub fn leading_coefficient(p: &PoissonProblem) -> Result<f64, PoissonError> {
    let nf = p.n as f64;
    if !(p.beta < -nf) {
        return Err(PoissonError::NotIntegrable(p.beta));
    }
    if p.f.is_identically_zero() {
        return Ok(0.0);
    }
    let omega = sphere_volume(p.n - 1);
    let g = p.group_order as f64;
    let radial = match p.f.closed_form_source() {
        Some(form) => integrate_to_infinity(|s| form.value_at_r(s) * s.powf(nf - 1.0), 0.0, 1e-300, 1e-13)?,
        None => {
            let grid = p.f.grid();
            let a = grid.coordinate().log_r_per_x();
            let w: Vec<f64> =
                (0..grid.len()).map(|i| p.f.values()[i] * grid.r(i).powf(nf) * a).collect();
            let body = *cumulative_uniform(grid.spacing(), &w)?.last().unwrap_or(&0.0);
            body + inner_piece(&p.f, nf - 1.0)? + outer_tail(&p.f, nf - 1.0)?
        }
    };
    let volume_integral = omega / g * radial;
    Ok(g / ((nf - 2.0) * omega) * volume_integral)
}

/// `(∫_X Δ(ρ^{2−n}) dV, (n−2)Ω_{n−1}/|G|)` with `dV = Ω_{n−1} r^{n−1} dr / |G|`.
pub fn delta_radius_identity(n: usize, group_order: u64, grid: &RadialGrid) -> Result<(f64, f64), PoissonError> {
    if n <= 2 {
        return Err(PoissonError::Dimension(n));
    }
    if group_order == 0 {
        return Err(PoissonError::GroupOrder);
    }
    let nf = n as f64;
    let lap = laplacian(&smoothed_radius_power(grid, 2.0 - nf), n)?;
    let omega = sphere_volume(n - 1);
    let measure = omega / group_order as f64;
    let a = grid.coordinate().log_r_per_x();
    let w: Vec<f64> = (0..grid.len()).map(|i| lap.values()[i] * grid.r(i).powf(nf) * a).collect();
    let body = *cumulative_uniform(grid.spacing(), &w)?.last().unwrap_or(&0.0);
    let total = body + inner_piece(&lap, nf - 1.0)? + outer_tail(&lap, nf - 1.0)?;
    Ok((measure * total, (nf - 2.0) * measure))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `|∫_0^∞ (uΔv − vΔu) r^{n−1} dr|` with the tail beyond the grid extrapolated.
    pub residual: f64,
    /// `r^{n−1}(u v′ − v u′)` at the outer node; `∫_0^R` equals minus this.
    pub boundary_term: f64,
}

/// Green's symmetry `∫ uΔv = ∫ vΔu` for `u ∈ C²_β`, `v ∈ C²_γ`, `β + γ < 2 − n`.
pub fn symmetry_residual(
    u: &RadialFunction,
    v: &RadialFunction,
    n: usize,
    beta: f64,
    gamma: f64,
) -> Result<SymmetryReport, PoissonError> {
    let bound = 2.0 - n as f64;
    if !(beta + gamma < bound) {
        return Err(PoissonError::SymmetryHypothesis { sum: beta + gamma, bound });
    }
    if u.grid() != v.grid() {
        return Err(RadialError::GridMismatch.into());
    }
    let grid = u.grid();
    let nf = n as f64;
    let lu = laplacian(u, n)?;
    let lv = laplacian(v, n)?;
    let integrand: Vec<f64> = (0..grid.len())
        .map(|i| u.values()[i] * lv.values()[i] - v.values()[i] * lu.values()[i])
        .collect();
    let h = RadialFunction::sampled(grid.clone(), integrand)?;
    let body: f64 = moment_pieces(&h, nf - 1.0)?.iter().sum();
    let tail = if h.is_identically_zero() { 0.0 } else { outer_tail(&h, nf - 1.0)? };
    let total = body + inner_piece(&h, nf - 1.0)? + tail;
    let du = u.derivative_r(1)?;
    let dv = v.derivative_r(1)?;
    let last = grid.len() - 1;
    let boundary_term = grid.r_max().powf(nf - 1.0)
        * (u.values()[last] * dv[last] - v.values()[last] * du[last]);
    Ok(SymmetryReport { residual: total.abs(), boundary_term })
}

/// Independent solve of the same problem as a two-point boundary-value problem,
/// second order in `x = log r`, Richardson-extrapolated from spacings `h` and `h/2`.
///
/// Inner condition `r u′ = −f(r_0) r_0²/n`; outer Robin condition `r u′ = σ u`
/// with `σ = 2 − n` (case b) or `β + 2` (case a).
pub fn solve_poisson_bvp(p: &PoissonProblem) -> Result<RadialFunction, PoissonError> {
    let form = p.f.closed_form_source().ok_or(PoissonError::NeedsClosedForm)?.clone();
    let grid = p.f.grid();
    let sigma = match p.case()? {
        PoissonCase::A => p.beta + 2.0,
        PoissonCase::B => 2.0 - p.n as f64,
    };
    let coarse = bvp_second_order(&form, grid.r_min(), grid.r_max(), grid.len(), p.n, sigma)?;
    let fine = bvp_second_order(&form, grid.r_min(), grid.r_max(), 2 * grid.len() - 1, p.n, sigma)?;
    let values = (0..grid.len()).map(|i| (4.0 * fine[2 * i] - coarse[i]) / 3.0).collect();
    Ok(RadialFunction::sampled(grid.clone(), values)?)
}

fn bvp_second_order(
    form: &ClosedForm,
    r_min: f64,
    r_max: f64,
    len: usize,
    n: usize,
    sigma: f64,
) -> Result<Vec<f64>, PoissonError> {
    let grid = RadialGrid::log_r(r_min, r_max, len)?;
    let h = grid.spacing();
    let k = n as f64 - 2.0;
    // u_xx + k u_x = −r² f
    let (cm, c0, cp) = (1.0 / (h * h) - k / (2.0 * h), -2.0 / (h * h), 1.0 / (h * h) + k / (2.0 * h));
    let mut lower = vec![cm; len];
    let mut diag = vec![c0; len];
    let mut upper = vec![cp; len];
    let mut rhs: Vec<f64> = (0..len).map(|i| -grid.t(i) * form.value_at_r(grid.r(i))).collect();
    // ghost u_{−1} = u_1 − 2h g0
    let g0 = -r_min * r_min * form.value_at_r(r_min) / n as f64;
    lower[0] = 0.0;
    upper[0] = cm + cp;
    rhs[0] += cm * 2.0 * h * g0;
    // ghost u_N = u_{N−2} + 2hσ u_{N−1}
    let last = len - 1;
    lower[last] = cm + cp;
    diag[last] = c0 + cp * 2.0 * h * sigma;
    upper[last] = 0.0;
    Ok(solve_tridiagonal(&lower, &diag, &upper, &rhs)?)
}

/// Named closed-form right-hand sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum RightHandSide {
    /// `amplitude · (1 + r²)^{−p}`, weight `−2p`.
    InverseQuadraticPower { p: f64, amplitude: f64 },
    /// `amplitude · exp(−1/(1 − (r/R)²))` on `r < R`.
    CompactBump { radius: f64, amplitude: f64 },
    /// `Δ(ρ^p)`, weight `p − 2`; integral zero when `p < 2 − n`.
    RhoPowerLaplacian { p: f64 },
    /// `b_R(r) − 2^{−n} b_R(r/2)`: compactly supported with zero integral.
    ZeroMeanBump { radius: f64 },
}

fn bump(r: f64, radius: f64) -> f64 {
    let s = r / radius;
    if s >= 1.0 { 0.0 } else { (-1.0 / (1.0 - s * s)).exp() }
}

impl RightHandSide {
    /// Decay weight `β` used by default in dimension `n`.
    pub fn default_beta(&self, n: usize) -> f64 {
        match *self {
            RightHandSide::InverseQuadraticPower { p, .. } => -2.0 * p,
            RightHandSide::RhoPowerLaplacian { p } => p - 2.0,
            RightHandSide::CompactBump { .. } | RightHandSide::ZeroMeanBump { .. } => -2.0 * n as f64,
        }
    }

    pub fn closed_form(&self, n: usize) -> ClosedForm {
        let nf = n as f64;
        match *self {
            RightHandSide::InverseQuadraticPower { p, amplitude } => {
                ClosedForm::new(format!("{amplitude}*(1+r^2)^-{p}"), Variable::R, move |r, k| {
                    let s = 1.0 + r * r;
                    Some(match k {
                        0 => amplitude * s.powf(-p),
                        1 => -2.0 * p * amplitude * r * s.powf(-p - 1.0),
                        _ => return None,
                    })
                })
            }
            RightHandSide::CompactBump { radius, amplitude } => {
                ClosedForm::new(format!("bump R={radius}"), Variable::R, move |r, k| {
                    (k == 0).then(|| amplitude * bump(r, radius))
                })
            }
            RightHandSide::RhoPowerLaplacian { p } => {
                ClosedForm::new(format!("laplacian of rho^{p}"), Variable::R, move |r, k| {
                    let q = 0.5 * p;
                    let s = 1.0 + r * r;
                    (k == 0).then(|| {
                        -(2.0 * q * nf * s.powf(q - 1.0) + 4.0 * q * (q - 1.0) * r * r * s.powf(q - 2.0))
                    })
                })
            }
            RightHandSide::ZeroMeanBump { radius } => {
                ClosedForm::new(format!("zero-mean bump R={radius}"), Variable::R, move |r, k| {
                    (k == 0).then(|| bump(r, radius) - 2f64.powf(-nf) * bump(0.5 * r, radius))
                })
            }
        }
    }

    pub fn on_grid(&self, grid: &RadialGrid, n: usize) -> Result<RadialFunction, RadialError> {
        RadialFunction::closed_form(grid, self.closed_form(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::smoothed_radius;

    fn oracle_problem(r_max: f64, points: usize) -> PoissonProblem {
        let g = RadialGrid::log_r(1e-3, r_max, points).unwrap();
        let f = RightHandSide::InverseQuadraticPower { p: 3.0, amplitude: 8.0 }.on_grid(&g, 4).unwrap();
        PoissonProblem::new(4, 1, f, -6.0).unwrap()
    }

    #[test]
    fn sphere_volumes() {
        use std::f64::consts::PI;
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(5) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn laplacian_examples() {
        let g = RadialGrid::log_r(0.5, 100.0, 400).unwrap();
        let constant = smoothed_radius_power(&g, 0.0).map(|_| 3.0).unwrap();
        assert!(laplacian(&constant, 4).unwrap().sup_abs() < 1e-9);
        let r2 = RadialFunction::closed_form(
            &g,
            ClosedForm::new("r^-2", Variable::R, |r, k| {
                Some(match k {
                    0 => r.powi(-2),
                    1 => -2.0 * r.powi(-3),
                    2 => 6.0 * r.powi(-4),
                    _ => return None,
                })
            }),
        )
        .unwrap();
        assert!(laplacian(&r2, 4).unwrap().sup_abs() < 1e-12);
        let u = smoothed_radius_power(&g, -2.0);
        let lap = laplacian(&u, 4).unwrap();
        for i in 0..g.len() {
            let e = 8.0 * (1.0 + g.t(i)).powi(-3);
            assert!((lap.values()[i] - e).abs() < 1e-14 * (1.0 + e), "{i}");
        }
        // the sampled route sees the same through finite differences
        let lap_fd = laplacian(&u.to_sampled(), 4).unwrap();
        for i in 0..g.len() {
            let e = 8.0 * (1.0 + g.t(i)).powi(-3);
            assert!((lap_fd.values()[i] - e).abs() < 1e-6 * e + 1e-12, "{i}");
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = RadialGrid::log_r(1e-2, 1e3, 64).unwrap();
        let p = PoissonProblem::new(4, 1, RadialFunction::zeros(&g), -6.0).unwrap();
        let s = solve_poisson(&p).unwrap();
        assert_eq!(s.a_coefficient, 0.0);
        assert!(s.u.is_identically_zero());
        assert_eq!(leading_coefficient(&p).unwrap(), 0.0);
    }

    #[test]
    fn oracle_problem_recovers_inverse_square() {
        let p = oracle_problem(1e4, 2000);
        let s = solve_poisson(&p).unwrap();
        assert_eq!(s.case, PoissonCase::B);
        let g = p.f.grid();
        let err = (0..g.len())
            .map(|i| (s.u.values()[i] - 1.0 / (1.0 + g.t(i))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "sup error {err}");
        assert!((s.a_coefficient - 1.0).abs() < 1e-8);
        assert!((leading_coefficient(&p).unwrap() - s.a_coefficient).abs() < 1e-10);
        assert!(s.measured_decay_v.is_none(), "v should vanish: {:?}", s.measured_decay_v);
        assert!((s.measured_decay_u.unwrap() + 2.0).abs() < 0.01);
    }

    #[test]
    fn sampled_route_matches_closed_form_route() {
        let p = oracle_problem(1e4, 2000);
        let mut q = p.clone();
        q.f = p.f.to_sampled();
        let a = solve_poisson(&p).unwrap();
        let b = solve_poisson(&q).unwrap();
        for i in 0..p.f.grid().len() {
            assert!((a.u.values()[i] - b.u.values()[i]).abs() < 1e-9);
        }
        assert!((leading_coefficient(&q).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn case_a_decay_matches_weight() {
        let g = RadialGrid::log_r(1e-3, 1e6, 1500).unwrap();
        let f = RightHandSide::InverseQuadraticPower { p: 1.5, amplitude: 1.0 }.on_grid(&g, 4).unwrap();
        let p = PoissonProblem::new(4, 1, f, -3.0).unwrap();
        let s = solve_poisson(&p).unwrap();
        assert_eq!(s.case, PoissonCase::A);
        assert_eq!(s.a_coefficient, 0.0);
        let d = s.measured_decay_u.unwrap();
        assert!((d + 1.0).abs() < 0.02, "decay {d}");
        assert!(matches!(leading_coefficient(&p), Err(PoissonError::NotIntegrable(_))));
    }

    #[test]
    fn zero_flux_data_decays_faster_than_fundamental_solution() {
        let g = RadialGrid::log_r(1e-3, 1e5, 1500).unwrap();
        let f = RightHandSide::RhoPowerLaplacian { p: -4.0 }.on_grid(&g, 4).unwrap();
        let p = PoissonProblem::new(4, 1, f, -6.0).unwrap();
        assert!(leading_coefficient(&p).unwrap().abs() < 1e-10);
        let s = solve_poisson(&p).unwrap();
        assert!(s.a_coefficient.abs() < 1e-10);
        let d = s.measured_decay_u.unwrap();
        assert!(d < -2.0 - 0.5, "decay {d}");
        assert!((d + 4.0).abs() < 0.02);
        for i in 0..g.len() {
            assert!((s.u.values()[i] - (1.0 + g.t(i)).powi(-2)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_mean_bump_has_zero_coefficient() {
        let g = RadialGrid::log_r(1e-3, 1e3, 1200).unwrap();
        let f = RightHandSide::ZeroMeanBump { radius: 2.0 }.on_grid(&g, 4).unwrap();
        let p = PoissonProblem::new(4, 1, f, -8.0).unwrap();
        assert!(leading_coefficient(&p).unwrap().abs() < 1e-12);
        let s = solve_poisson(&p).unwrap();
        // beyond the support u is exactly A r^{2−n}, here zero
        let far = g.window(10.0, 1e3);
        assert!(far.map(|i| s.u.values()[i].abs()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn bvp_agrees_with_green_representation() {
        let p = oracle_problem(1e5, 3000);
        let s = solve_poisson(&p).unwrap();
        let bvp = solve_poisson_bvp(&p).unwrap();
        for i in 0..p.f.grid().len() {
            let u = s.u.values()[i];
            assert!((bvp.values()[i] - u).abs() < 1e-8 * u.abs(), "node {i}: {} vs {u}", bvp.values()[i]);
        }
    }

    #[test]
    fn residual_is_small_at_interior_nodes() {
        let g = RadialGrid::log_r(1e-2, 1e3, 1500).unwrap();
        let f = RightHandSide::CompactBump { radius: 3.0, amplitude: 2.0 }.on_grid(&g, 4).unwrap();
        let p = PoissonProblem::new(4, 1, f.clone(), -8.0).unwrap();
        let s = solve_poisson(&p).unwrap();
        let lap = laplacian(&s.u, 4).unwrap();
        for i in 5..g.len() - 5 {
            assert!((lap.values()[i] - f.values()[i]).abs() < 1e-5, "node {i}");
        }
    }

    #[test]
    fn integral_identity_for_radius_function() {
        use std::f64::consts::PI;
        let g = RadialGrid::log_r(1e-3, 1e4, 2000).unwrap();
        for (n, order, expected) in [(4, 1, 4.0 * PI * PI), (4, 2, 2.0 * PI * PI), (6, 1, 4.0 * PI.powi(3))] {
            let (computed, target) = delta_radius_identity(n, order, &g).unwrap();
            assert!((target - expected).abs() < 1e-12 * expected);
            assert!(((computed - target) / target).abs() < 1e-6, "n={n}: {computed} vs {target}");
        }
    }

    #[test]
    fn green_symmetry() {
        let g = RadialGrid::log_r(1e-3, 1e4, 2000).unwrap();
        let u = smoothed_radius_power(&g, -2.0);
        let v = smoothed_radius_power(&g, -3.0);
        assert_eq!(symmetry_residual(&u, &u, 4, -2.0, -2.0).unwrap().residual, 0.0);
        let rep = symmetry_residual(&u, &v, 4, -2.0, -3.0).unwrap();
        assert!(rep.residual < 1e-8, "{rep:?}");
        let one = smoothed_radius_power(&g, 0.0);
        assert!(matches!(
            symmetry_residual(&one, &u, 4, 0.0, -2.0),
            Err(PoissonError::SymmetryHypothesis { .. })
        ));
        let _ = smoothed_radius(&g);
    }

    #[test]
    fn weight_range_is_enforced() {
        let g = RadialGrid::log_r(1e-2, 1e3, 64).unwrap();
        assert!(matches!(
            PoissonProblem::new(4, 1, RadialFunction::zeros(&g), -2.0),
            Err(PoissonError::Weight(_))
        ));
        assert!(matches!(PoissonProblem::new(2, 1, RadialFunction::zeros(&g), -3.0), Err(PoissonError::Dimension(2))));
        let p = PoissonProblem::new(4, 1, RadialFunction::zeros(&g), -4.0).unwrap();
        assert!(matches!(solve_poisson(&p), Err(PoissonError::CriticalWeight(_))));
    }

    #[test]
    fn registry_round_trips_through_json() {
        let r: RightHandSide =
            serde_json::from_str(r#"{"name":"inverse_quadratic_power","p":3.0,"amplitude":8.0}"#).unwrap();
        assert_eq!(r.default_beta(4), -6.0);
        assert!((r.closed_form(4).value_at_r(1.0) - 1.0).abs() < 1e-15);
    }
}
