//! Radial functions sampled on a [`RadialGrid`], with derivative access up to order four.
//!
//! Derivatives are computed in the grid's log coordinate `x` and converted to
//! derivatives in `r` or `t = r²` through the identity
//! `v^k f^(k)(v) = D(D-1)…(D-k+1) f` with `D = v d/dv`. Closed-form sources
//! that provide analytic derivatives bypass the finite differences entirely.

use std::fmt;
use std::sync::Arc;

use super::grid::RadialGrid;
use super::RadialError;

/// Highest derivative order supported by [`RadialFunction`].
pub const MAX_DERIVATIVE: usize = 4;

/// Signed Stirling numbers of the first kind, `s1[k][j]`.
const STIRLING_FIRST: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 1.0, 0.0, 0.0],
    [0.0, 2.0, -3.0, 1.0, 0.0],
    [0.0, -6.0, 11.0, -6.0, 1.0],
];

/// Stirling numbers of the second kind, `s2[j][i]`.
const STIRLING_SECOND: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 1.0, 0.0, 0.0],
    [0.0, 1.0, 3.0, 1.0, 0.0],
    [0.0, 1.0, 7.0, 6.0, 1.0],
];

/// Independent variable of a closed-form evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    R,
    T,
}

/// `eval(v, k)` returns the `k`-th derivative with respect to the evaluator's
/// variable, or `None` when no analytic expression is available for that order.
/// Order zero must always be available.
pub type Evaluator = Arc<dyn Fn(f64, usize) -> Option<f64> + Send + Sync>;

#[derive(Clone)]
pub struct ClosedForm {
    pub label: String,
    pub variable: Variable,
    pub eval: Evaluator,
}

impl ClosedForm {
    pub fn new(
        label: impl Into<String>,
        variable: Variable,
        eval: impl Fn(f64, usize) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), variable, eval: Arc::new(eval) }
    }

    /// Value at geometric radius `r`.
    pub fn value_at_r(&self, r: f64) -> f64 {
        let v = match self.variable {
            Variable::R => r,
            Variable::T => r * r,
        };
        (self.eval)(v, 0).expect("closed form must provide order zero")
    }
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedForm")
            .field("label", &self.label)
            .field("variable", &self.variable)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    Sampled,
    ClosedForm(ClosedForm),
}

#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: RadialGrid,
    values: Vec<f64>,
    source: Source,
}

impl RadialFunction {
    pub fn sampled(grid: RadialGrid, values: Vec<f64>) -> Result<Self, RadialError> {
        if values.len() != grid.len() {
            return Err(RadialError::GridMismatch);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(RadialError::NonFinite { index });
        }
        Ok(Self { grid, values, source: Source::Sampled })
    }

    /// Samples `f(r)` at the grid nodes; no analytic derivatives.
    pub fn from_fn_r(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self, RadialError> {
        let values = (0..grid.len()).map(|i| f(grid.r(i))).collect();
        Self::sampled(grid.clone(), values)
    }

    /// Samples `f(t)` at the grid nodes; no analytic derivatives.
    pub fn from_fn_t(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self, RadialError> {
        let values = (0..grid.len()).map(|i| f(grid.t(i))).collect();
        Self::sampled(grid.clone(), values)
    }

    pub fn closed_form(grid: &RadialGrid, form: ClosedForm) -> Result<Self, RadialError> {
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let v = match form.variable {
                    Variable::R => grid.r(i),
                    Variable::T => grid.t(i),
                };
                (form.eval)(v, 0).unwrap_or(f64::NAN)
            })
            .collect();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(RadialError::NonFinite { index });
        }
        Ok(Self { grid: grid.clone(), values, source: Source::ClosedForm(form) })
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()], source: Source::Sampled }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn closed_form_source(&self) -> Option<&ClosedForm> {
        match &self.source {
            Source::ClosedForm(form) => Some(form),
            Source::Sampled => None,
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Drops any closed-form source, keeping the nodal values.
    pub fn to_sampled(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.clone(), source: Source::Sampled }
    }

    /// Nodal map; the result is sampled.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, RadialError> {
        Self::sampled(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Nodal combination with another function on the same grid; the result is sampled.
    pub fn zip_with(
        &self,
        other: &RadialFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, RadialError> {
        if self.grid != other.grid {
            return Err(RadialError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::sampled(self.grid.clone(), values)
    }

    /// `(d/dx)^j f` for `j = 0..=k` where `x` is the grid coordinate.
    pub fn log_derivatives(&self, k: usize) -> Result<Vec<Vec<f64>>, RadialError> {
        if k > MAX_DERIVATIVE {
            return Err(RadialError::UnsupportedOrder(k));
        }
        if let Some(out) = self.analytic_log_derivatives(k) {
            return Ok(out);
        }
        let g = &self.grid;
        let mut out = vec![self.values.clone()];
        if k >= 1 {
            out.push(g.apply_d1(&self.values));
        }
        if k >= 2 {
            out.push(g.apply_d2(&self.values));
        }
        if k >= 3 {
            out.push(g.apply_d1(&out[2]));
        }
        if k >= 4 {
            out.push(g.apply_d2(&out[2]));
        }
        Ok(out)
    }

    fn analytic_log_derivatives(&self, k: usize) -> Option<Vec<Vec<f64>>> {
        let form = self.closed_form_source()?;
        let g = &self.grid;
        let per_x = match form.variable {
            Variable::R => g.coordinate().log_r_per_x(),
            Variable::T => g.coordinate().log_t_per_x(),
        };
        let mut out = vec![vec![0.0; g.len()]; k + 1];
        for node in 0..g.len() {
            let v = match form.variable {
                Variable::R => g.r(node),
                Variable::T => g.t(node),
            };
            // v^i f^(i)(v)
            let mut scaled = [0.0; MAX_DERIVATIVE + 1];
            let mut vp = 1.0;
            for (i, slot) in scaled.iter_mut().enumerate().take(k + 1) {
                *slot = vp * (form.eval)(v, i)?;
                vp *= v;
            }
            for (j, row) in out.iter_mut().enumerate() {
                let log_deriv: f64 =
                    (0..=j).map(|i| STIRLING_SECOND[j][i] * scaled[i]).sum();
                row[node] = per_x.powi(j as i32) * log_deriv;
            }
        }
        Some(out)
    }

    /// `d^k f / dr^k` at the nodes.
    pub fn derivative_r(&self, k: usize) -> Result<Vec<f64>, RadialError> {
        let per_x = self.grid.coordinate().log_r_per_x();
        let radii = self.grid.r_values();
        self.derivative_in(k, per_x, &radii)
    }

    /// `d^k f / dt^k` at the nodes, `t = r²`.
    pub fn derivative_t(&self, k: usize) -> Result<Vec<f64>, RadialError> {
        let per_x = self.grid.coordinate().log_t_per_x();
        let ts = self.grid.t_values();
        self.derivative_in(k, per_x, &ts)
    }

    fn derivative_in(&self, k: usize, per_x: f64, var: &[f64]) -> Result<Vec<f64>, RadialError> {
        let logd = self.log_derivatives(k)?;
        if k == 0 {
            return Ok(logd.into_iter().next().unwrap_or_default());
        }
        let out = (0..self.grid.len())
            .map(|node| {
                let combo: f64 = (1..=k)
                    .map(|j| STIRLING_FIRST[k][j] * logd[j][node] / per_x.powi(j as i32))
                    .sum();
                combo / var[node].powi(k as i32)
            })
            .collect();
        Ok(out)
    }
}
