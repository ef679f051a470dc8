//! The radial complex Monge–Ampère equation `(ω̂ + dd^cφ)^m = e^f ω̂^m` for
//! U(m)-invariant potentials: gluing a potential to the flat one, extracting
//! Ricci potentials, and two independent solvers (exact quadrature and a
//! homotopy/Newton continuity method).

mod continuity;
mod quadrature;

pub use continuity::{quadratic_convergence_constant, solve_ma_continuity};
pub use quadrature::{conserved_excess, solve_ma_quadrature};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::BandedError;
use crate::calabi::{
    calabi_deviation, calabi_excess, fit_asymptotic_coefficient, CalabiError, RadialKahlerPotential,
};
use crate::poisson::sphere_volume;
use crate::quadrature::{interval_pieces_order, power_law_tail, QuadratureError};
use crate::radial::{cutoff, RadialError, RadialFunction, RadialGrid};

/// Largest admissible `sup |f|`.
pub const MAX_AMPLITUDE: f64 = 5.0;
/// Default Newton tolerance on the max-norm residual.
pub const DEFAULT_NEWTON_TOLERANCE: f64 = 1e-10;
/// Interpolation points of the integration rule (sixth order).
pub(crate) const RULE_POINTS: usize = 6;
const TAIL_POINTS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaError {
    #[error("complex dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("group order must be positive")]
    GroupOrder,
    #[error("weight β = {0} must lie below −2")]
    Weight(f64),
    #[error("weight β = −2m is the critical weight")]
    CriticalWeight,
    #[error("sup |f| = {0} exceeds {MAX_AMPLITUDE}")]
    Amplitude(f64),
    #[error("class constant must be non-negative, got {0}")]
    ClassConstant(f64),
    #[error("right-hand side and background live on different grids")]
    GridMismatch,
    #[error("metric not positive at node {node} (t = {t})")]
    NotPositive { node: usize, t: f64 },
    #[error("R = {radius} too small: glued potential not positive at node {node} (t = {t})")]
    RadiusTooSmall { radius: f64, node: usize, t: f64 },
    #[error("gluing radius must exceed 1, got {0}")]
    GluingRadius(f64),
    #[error("volume form e^f times the background density is not positive at node {0}")]
    NegativeIntegrand(usize),
    #[error("volume integral diverges for β = {0} ≥ −2m")]
    DivergentVolumeIntegral(f64),
    #[error("Newton iteration diverged at s = {s} after {iterations} iterations; use more homotopy steps")]
    Divergence { s: f64, iterations: usize },
    #[error("metric lost positivity during Newton iteration at s = {s}")]
    PositivityLost { s: f64 },
    #[error("Newton iteration stalled at s = {s} with residual {residual:e}")]
    NotConverged { s: f64, residual: f64 },
    #[error("homotopy step fell below {min_step} at s = {s}")]
    HomotopyStalled { s: f64, min_step: f64 },
    #[error("homotopy needs at least one step")]
    Steps,
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Banded(#[from] BandedError),
    #[error(transparent)]
    Calabi(#[from] CalabiError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaCase {
    /// `−2m < β < −2`: `φ` decays like `ρ^{β+2}`.
    #[serde(rename = "a")]
    A,
    /// `β < −2m`: `φ = A ρ^{2−2m} + ψ`.
    #[serde(rename = "b")]
    B,
}

impl MaCase {
    pub fn tag(self) -> &'static str {
        match self {
            MaCase::A => "a",
            MaCase::B => "b",
        }
    }
}

/// `(ω̂ + dd^cφ)^m = e^f ω̂^m` for radial data on the background's log-t grid.
#[derive(Debug, Clone)]
pub struct MAProblem {
    pub m: usize,
    pub background: RadialKahlerPotential,
    pub f: RadialFunction,
    pub beta: f64,
    pub group_order: u64,
    pub newton_tolerance: f64,
    /// Window in `t` for the asymptotic fit.
    pub fit_window: Option<(f64, f64)>,
}

impl MAProblem {
    pub fn new(
        background: RadialKahlerPotential,
        f: RadialFunction,
        beta: f64,
        group_order: u64,
    ) -> Result<Self, MaError> {
        let m = background.m();
        if group_order == 0 {
            return Err(MaError::GroupOrder);
        }
        if !(beta < -2.0) {
            return Err(MaError::Weight(beta));
        }
        if beta == -2.0 * m as f64 {
            return Err(MaError::CriticalWeight);
        }
        if f.grid() != background.grid() {
            return Err(MaError::GridMismatch);
        }
        let sup = f.sup_abs();
        if !(sup <= MAX_AMPLITUDE) {
            return Err(MaError::Amplitude(sup));
        }
        background.check_positive()?;
        Ok(Self {
            m,
            background,
            f,
            beta,
            group_order,
            newton_tolerance: DEFAULT_NEWTON_TOLERANCE,
            fit_window: None,
        })
    }

    pub fn with_newton_tolerance(mut self, tol: f64) -> Self {
        self.newton_tolerance = tol;
        self
    }

    pub fn with_fit_window(mut self, t_lo: f64, t_hi: f64) -> Self {
        self.fit_window = Some((t_lo, t_hi));
        self
    }

    pub fn grid(&self) -> &RadialGrid {
        self.background.grid()
    }

    pub fn case(&self) -> MaCase {
        if self.beta < -2.0 * self.m as f64 {
            MaCase::B
        } else {
            MaCase::A
        }
    }

    /// Fit window in `t`, by default the decades `[10⁻⁴, 10⁻¹]·t_max`.
    pub fn fit_window_t(&self) -> (f64, f64) {
        let g = self.grid();
        self.fit_window.unwrap_or((g.t_min().max(1e-4 * g.t_max()), 0.1 * g.t_max()))
    }
}

#[derive(Debug, Clone)]
pub struct MASolution {
    /// `φ = Φ − û`.
    pub phi: RadialFunction,
    pub a_coefficient: f64,
    /// `ψ = φ − A ρ^{2−2m}` with `ρ² = 1 + t`.
    pub psi: RadialFunction,
    pub case: MaCase,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub positivity_margin: f64,
    /// The solved potential `Φ = û + φ`.
    pub potential: RadialKahlerPotential,
    /// Newton residuals, one list per homotopy stage.
    pub residual_history: Vec<Vec<f64>>,
    /// Homotopy parameters reached, in order.
    pub homotopy_path: Vec<f64>,
}

/// Volume ratio `(ω̂ + dd^cφ)^m / ω̂^m` at the nodes.
pub fn ma_ratio(background: &RadialKahlerPotential, phi: &RadialFunction) -> Result<RadialFunction, MaError> {
    let grid = background.grid();
    if phi.grid() != grid {
        return Err(MaError::GridMismatch);
    }
    let d = phi.log_derivatives(2)?;
    let mf = background.m() as f64;
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let t = grid.t(i);
        let a = d[1][i] / (t * background.transverse()[i]);
        let b = d[2][i] / (t * background.radial()[i]);
        if !(a > -1.0 && b > -1.0) {
            return Err(MaError::NotPositive { node: i, t });
        }
        out.push(((mf - 1.0) * a.ln_1p() + b.ln_1p()).exp());
    }
    Ok(RadialFunction::sampled(grid.clone(), out)?)
}

/// Glues `u0` to the flat potential: `û = t + μ(r − R)(u0 − t)`, equal to `u0`
/// for `r ≤ R − 1` and to `t` for `r ≥ R`.
pub fn flatten(u0: &RadialKahlerPotential, radius: f64) -> Result<RadialKahlerPotential, MaError> {
    if !(radius > 1.0) {
        return Err(MaError::GluingRadius(radius));
    }
    let grid = u0.grid();
    let mu = cutoff(0.0);
    let n = grid.len();
    let (mut w, mut lt, mut lr, mut et, mut er) =
        (vec![0.0; n], vec![1.0; n], vec![1.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let t = grid.t(i);
        let r = t.sqrt();
        let arg = r - radius;
        let c = mu.value(arg);
        let m1 = mu.derivative(arg, 1).unwrap_or(0.0);
        let m2 = mu.derivative(arg, 2).unwrap_or(0.0);
        if m1 == 0.0 && m2 == 0.0 && (c == 0.0 || c == 1.0) {
            if c == 1.0 {
                w[i] = u0.deviation().values()[i];
                lt[i] = u0.transverse()[i];
                lr[i] = u0.radial()[i];
                et[i] = u0.excess_transverse()[i];
                er[i] = u0.excess_radial()[i];
            }
            continue;
        }
        // d/dt and d²/dt² of c(t) = μ(√t − R)
        let c1 = m1 / (2.0 * r);
        let c2 = m2 / (4.0 * t) - m1 / (4.0 * r * t);
        let w0 = u0.deviation().values()[i];
        let (et0, er0) = (u0.excess_transverse()[i], u0.excess_radial()[i]);
        w[i] = c * w0;
        et[i] = c1 * w0 + c * et0;
        er[i] = et[i] + t * (c2 * w0 + 2.0 * c1 * et0) + c * (er0 - et0);
        lt[i] = 1.0 + et[i];
        lr[i] = 1.0 + er[i];
        if !(lt[i] > 0.0 && lr[i] > 0.0) {
            return Err(MaError::RadiusTooSmall { radius, node: i, t });
        }
    }
    let deviation = RadialFunction::sampled(grid.clone(), w)?;
    Ok(RadialKahlerPotential::from_parts(u0.m(), deviation, (lt, et), (lr, er), u0.class_constant())?)
}

/// `f = −log[(u′)^{m−1}(u′ + tu″)]`, so that `½dd^cf` is the Ricci form of `u`.
pub fn ricci_potential(u: &RadialKahlerPotential) -> RadialFunction {
    let values = u.log_density().into_iter().map(|v| -v).collect();
    RadialFunction::sampled(u.grid().clone(), values).expect("finite log density")
}

/// `∫_{x_end}^∞ g dx` from the last samples, treating roundoff-level data as zero.
pub(crate) fn tail_integral(x: &[f64], g: &[f64]) -> Result<f64, QuadratureError> {
    let n = x.len();
    let k = TAIL_POINTS.min(n);
    match power_law_tail(&x[n - k..], &g[n - k..]) {
        Err(QuadratureError::IrregularTail) if g[n - k..].iter().all(|v| v.abs() < 1e-280) => Ok(0.0),
        other => other,
    }
}

/// Assembles a solution from the solved potential.
pub(crate) fn finish(
    p: &MAProblem,
    potential: RadialKahlerPotential,
    newton_iterations: usize,
    final_residual: f64,
    residual_history: Vec<Vec<f64>>,
    homotopy_path: Vec<f64>,
) -> Result<MASolution, MaError> {
    let grid = p.grid().clone();
    let phi_values: Vec<f64> = potential
        .deviation()
        .values()
        .iter()
        .zip(p.background.deviation().values())
        .map(|(w, wb)| w - wb)
        .collect();
    let case = p.case();
    let a = match case {
        MaCase::B => {
            let (lo, hi) = p.fit_window_t();
            let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid.t(i) >= lo && grid.t(i) <= hi).collect();
            let t: Vec<f64> = idx.iter().map(|&i| grid.t(i)).collect();
            let y: Vec<f64> = idx.iter().map(|&i| phi_values[i]).collect();
            if y.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                fit_asymptotic_coefficient(p.m, &t, &y)?
            }
        }
        MaCase::A => 0.0,
    };
    let psi_values = (0..grid.len())
        .map(|i| phi_values[i] - a * (1.0 + grid.t(i)).powi(1 - p.m as i32))
        .collect();
    let positivity_margin = potential.positivity_margin();
    if !(positivity_margin > 0.0) {
        potential.check_positive()?;
    }
    Ok(MASolution {
        phi: RadialFunction::sampled(grid.clone(), phi_values)?,
        a_coefficient: a,
        psi: RadialFunction::sampled(grid, psi_values)?,
        case,
        newton_iterations,
        final_residual,
        positivity_margin,
        potential,
        residual_history,
        homotopy_path,
    })
}

/// `∫₀^∞ (1 − e^f) D̂ t^{m−1} dt` with `D̂` the background volume ratio.
///
/// Split as `∫(D̂ − 1)t^{m−1} − ∫(e^f D̂ − 1)t^{m−1}`. The first part is exact:
/// `m t^{m−1} D̂ = d/dt[t^m (û′)^m]`, so it is read off the background's
/// transverse eigenvalue at the grid ends. Only the second part is sampled.
fn volume_defect_integral(p: &MAProblem) -> Result<f64, MaError> {
    if p.case() == MaCase::A {
        return Err(MaError::DivergentVolumeIntegral(p.beta));
    }
    let grid = p.grid();
    let n = grid.len();
    let m = p.m as i32;
    let mf = p.m as f64;
    let x = grid.x_values();
    let log_d = p.background.log_density();
    let f = p.f.values();
    let tm = |i: usize| grid.t(i).powi(m);

    let e_bg = conserved_excess(&p.background);
    let bg_tail: Vec<f64> = (0..n).map(|i| tm(i) * log_d[i].exp_m1()).collect();
    let background_part =
        (e_bg[n - 1] + mf * tail_integral(x, &bg_tail)? - e_bg[0]) / mf + bg_tail[0] / mf;

    // dt t^{m−1} = t^m dx
    let g: Vec<f64> = (0..n).map(|i| tm(i) * (f[i] + log_d[i]).exp_m1()).collect();
    let sampled = g[0] / mf
        + interval_pieces_order(grid.spacing(), &g, RULE_POINTS)?.iter().sum::<f64>()
        + tail_integral(x, &g)?;
    Ok(background_part - sampled)
}

/// `(A_formula, A_fitted)` for `φ`.
///
/// `A_formula = (1/(m−1)) ∫(1 − e^f) D̂ t^{m−1} dt − (c − ĉ)/(m(m−1))`, where the
/// second term accounts for a change of class constant. Without it this is
/// twice [`literal_volume_coefficient`].
pub fn leading_coefficient_ma(p: &MAProblem, solution: &MASolution) -> Result<(f64, f64), MaError> {
    let mf = p.m as f64;
    let shift = solution.potential.class_constant() - p.background.class_constant();
    let formula = volume_defect_integral(p)? / (mf - 1.0) - shift / (mf * (mf - 1.0));
    Ok((formula, solution.a_coefficient))
}

/// `|G|/((m−1)Ω_{2m−1}) ∫_X (1 − e^f) dV_ĝ` with `dV = D̂ Ω_{2m−1} r^{2m−1} dr / |G|`.
pub fn literal_volume_coefficient(p: &MAProblem) -> Result<f64, MaError> {
    let omega = sphere_volume(2 * p.m - 1);
    let g = p.group_order as f64;
    // r^{2m−1} dr = t^{m−1} dt / 2
    let volume = volume_defect_integral(p)? * omega / (2.0 * g);
    Ok(g / ((p.m as f64 - 1.0) * omega) * volume)
}

/// Registry of right-hand sides `f` for the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MaRightHandSide {
    Zero,
    /// `a·exp(1 − 1/(1 − y²))` for `|y| < 1`, `y = log(t/center)/width`: smooth, compact.
    LogBump { center: f64, width: f64, amplitude: f64 },
    /// `a(1 + t)^{β/2}`.
    Power { beta: f64, amplitude: f64 },
}

impl MaRightHandSide {
    pub fn default_beta(&self, m: usize) -> f64 {
        match self {
            MaRightHandSide::Power { beta, .. } => *beta,
            _ => -2.0 * m as f64 - 1.0,
        }
    }

    pub fn on_grid(&self, grid: &RadialGrid) -> Result<RadialFunction, RadialError> {
        match *self {
            MaRightHandSide::Zero => Ok(RadialFunction::zeros(grid)),
            MaRightHandSide::LogBump { center, width, amplitude } => RadialFunction::from_fn_t(grid, |t| {
                let y = (t / center).ln() / width;
                if y.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - y * y)).exp()
                } else {
                    0.0
                }
            }),
            MaRightHandSide::Power { beta, amplitude } => {
                RadialFunction::from_fn_t(grid, |t| amplitude * (1.0 + t).powf(0.5 * beta))
            }
        }
    }
}

/// Outcome of gluing the Calabi metric to the flat one at radius `R`, taking its
/// Ricci potential, and solving back for the Ricci-flat metric in the same class.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub background: RadialKahlerPotential,
    pub f: RadialFunction,
    pub continuity: MASolution,
    pub quadrature: MASolution,
    pub report: PipelineReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub m: usize,
    pub radius: f64,
    pub steps: usize,
    pub n_points: usize,
    /// `max |λ/λ_Calabi − 1|` over both eigenvalues of the continuity solution.
    pub max_metric_deviation: f64,
    /// `max |(Φ − t) − (Φ_Calabi − t)|` for the continuity solution.
    pub max_potential_deviation: f64,
    /// `max |φ_continuity − φ_quadrature| / max |φ_quadrature|`.
    pub solver_agreement: f64,
    /// `sup |f|` of the solved metric's Ricci potential.
    pub ricci_potential_sup: f64,
    pub a_fitted: f64,
    pub a_formula: f64,
    pub a_background: f64,
    pub a_total: f64,
    pub newton_iterations: usize,
    pub newton_quadratic_constant: Option<f64>,
    pub background_positivity_margin: f64,
}

/// Runs the gluing pipeline for the Calabi metric of dimension `m`.
pub fn pipeline(m: usize, radius: f64, steps: usize, grid: &RadialGrid) -> Result<PipelineRun, MaError> {
    let u0 = RadialKahlerPotential::calabi(m, grid)?;
    let background = flatten(&u0, radius)?;
    let f = ricci_potential(&background);
    let beta = -2.0 * m as f64 - 1.0;
    let problem = MAProblem::new(background.clone(), f.clone(), beta, m as u64)?;
    let c = background.class_constant();
    let continuity = solve_ma_continuity(&problem, c, steps)?;
    let quadrature = solve_ma_quadrature(&problem, c)?;
    let (a_formula, a_fitted) = leading_coefficient_ma(&problem, &continuity)?;

    let mut metric_dev: f64 = 0.0;
    let mut potential_dev: f64 = 0.0;
    let sol = &continuity.potential;
    for i in 0..grid.len() {
        let t = grid.t(i);
        let (et, er) = calabi_excess(m, t)?;
        metric_dev = metric_dev
            .max(((sol.excess_transverse()[i] - et) / (1.0 + et)).abs())
            .max(((sol.radial()[i] - (1.0 + er)) / (1.0 + er)).abs());
        potential_dev = potential_dev.max((sol.deviation().values()[i] - calabi_deviation(m, t)?).abs());
    }
    let qmax = quadrature.phi.sup_abs();
    let diff = continuity
        .phi
        .values()
        .iter()
        .zip(quadrature.phi.values())
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
    let agreement = if qmax > 0.0 { diff / qmax } else { diff };
    let a_background = background_coefficient(&problem)?;
    let report = PipelineReport {
        m,
        radius,
        steps,
        n_points: grid.len(),
        max_metric_deviation: metric_dev,
        max_potential_deviation: potential_dev,
        solver_agreement: agreement,
        ricci_potential_sup: ricci_potential(sol).sup_abs(),
        a_fitted,
        a_formula,
        a_background,
        a_total: a_fitted + a_background,
        newton_iterations: continuity.newton_iterations,
        newton_quadratic_constant: quadratic_convergence_constant(&continuity.residual_history),
        background_positivity_margin: background.positivity_margin(),
    };
    Ok(PipelineRun { background, f, continuity, quadrature, report })
}

/// Asymptotic coefficient of the background deviation `û − t` on the fit window.
fn background_coefficient(p: &MAProblem) -> Result<f64, MaError> {
    let grid = p.grid();
    let (lo, hi) = p.fit_window_t();
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid.t(i) >= lo && grid.t(i) <= hi).collect();
    let y: Vec<f64> = idx.iter().map(|&i| p.background.deviation().values()[i]).collect();
    if y.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let t: Vec<f64> = idx.iter().map(|&i| grid.t(i)).collect();
    Ok(fit_asymptotic_coefficient(p.m, &t, &y)?)
}
