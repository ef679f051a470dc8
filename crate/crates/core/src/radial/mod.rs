//! Radial functions on `ℝⁿ/G` and on U(m)-invariant resolutions: grids,
//! derivatives, radius functions, weighted norms, decay orders and cutoffs.

mod cutoff;
mod fit;
mod function;
mod grid;
mod norms;

pub use cutoff::{cutoff, Cutoff};
pub use fit::{decay_order, least_squares, power_law_slope};
pub use function::{ClosedForm, Evaluator, RadialFunction, Source, Variable, MAX_DERIVATIVE};
pub use grid::{fd_weights, Coordinate, RadialGrid, Stencil, MIN_POINTS};
pub use norms::{weighted_ck_norm, WeightedNormReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("grid needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid radial range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("grid spacing is not uniform in the log coordinate (interval {index})")]
    NonUniform { index: usize },
    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },
    #[error("derivative order {0} unsupported (maximum {MAX_DERIVATIVE})")]
    UnsupportedOrder(usize),
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("fit window [{lo}, {hi}] holds {points} usable nodes; need at least {needed}")]
    WindowTooSmall { lo: f64, hi: f64, points: usize, needed: usize },
    #[error("no decay order: function vanishes on the fit window")]
    NoDecayOrder,
    #[error("least-squares fit is singular")]
    SingularFit,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// `ρ(r) = (1 + r²)^{1/2}`.
pub fn smoothed_radius_at(r: f64) -> f64 {
    r.hypot(1.0)
}

/// The radius function `ρ = (1 + r²)^{1/2}` on `grid`, with analytic derivatives
/// up to order four.
pub fn smoothed_radius(grid: &RadialGrid) -> RadialFunction {
    let form = ClosedForm::new("smoothed_radius", Variable::R, |r, k| {
        let rho = r.hypot(1.0);
        Some(match k {
            0 => rho,
            1 => r / rho,
            2 => rho.powi(-3),
            3 => -3.0 * r * rho.powi(-5),
            4 => (12.0 * r * r - 3.0) * rho.powi(-7),
            _ => return None,
        })
    });
    RadialFunction::closed_form(grid, form).expect("smoothed radius is finite")
}

/// `ρ^p` for the smoothed radius, with analytic derivatives up to order two.
pub fn smoothed_radius_power(grid: &RadialGrid, p: f64) -> RadialFunction {
    RadialFunction::closed_form(grid, smoothed_radius_power_form(p)).expect("finite power")
}

/// Closed form of `ρ^p = (1+r²)^{p/2}`.
pub fn smoothed_radius_power_form(p: f64) -> ClosedForm {
    ClosedForm::new(format!("rho^{p}"), Variable::R, move |r, k| {
        let q = 0.5 * p;
        let s = 1.0 + r * r;
        Some(match k {
            0 => s.powf(q),
            1 => 2.0 * q * r * s.powf(q - 1.0),
            2 => 2.0 * q * s.powf(q - 1.0) + 4.0 * q * (q - 1.0) * r * r * s.powf(q - 2.0),
            _ => return None,
        })
    })
}
