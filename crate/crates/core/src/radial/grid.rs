//! Log-uniform radial grids and the finite-difference stencils that live on them.

use serde::{Deserialize, Serialize};

use super::RadialError;

/// Smallest admissible grid.
pub const MIN_POINTS: usize = 16;

const SPACING_TOLERANCE: f64 = 1e-12;

/// Which radial variable the grid coordinate `x` is the logarithm of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// `x = log t` with `t = r²` (Kähler potentials).
    LogT,
    /// `x = log r` (real Poisson problems).
    LogR,
}

impl Coordinate {
    /// `d(log r)/dx`.
    pub fn log_r_per_x(self) -> f64 {
        match self {
            Coordinate::LogT => 0.5,
            Coordinate::LogR => 1.0,
        }
    }

    /// `d(log t)/dx`.
    pub fn log_t_per_x(self) -> f64 {
        match self {
            Coordinate::LogT => 1.0,
            Coordinate::LogR => 2.0,
        }
    }
}

/// Uniform grid in a logarithmic radial coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    coordinate: Coordinate,
    x: Vec<f64>,
    h: f64,
}

impl RadialGrid {
    /// Grid with `x = log t`, spanning `[t_min, t_max]`.
    pub fn log_t(t_min: f64, t_max: f64, n_points: usize) -> Result<Self, RadialError> {
        Self::uniform(Coordinate::LogT, t_min, t_max, n_points)
    }

    /// Grid with `x = log r`, spanning `[r_min, r_max]`.
    pub fn log_r(r_min: f64, r_max: f64, n_points: usize) -> Result<Self, RadialError> {
        Self::uniform(Coordinate::LogR, r_min, r_max, n_points)
    }

    fn uniform(
        coordinate: Coordinate,
        lo: f64,
        hi: f64,
        n_points: usize,
    ) -> Result<Self, RadialError> {
        if n_points < MIN_POINTS {
            return Err(RadialError::TooFewPoints(n_points));
        }
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(RadialError::InvalidRange { lo, hi });
        }
        let (x0, x1) = (lo.ln(), hi.ln());
        let h = (x1 - x0) / (n_points - 1) as f64;
        let x = (0..n_points)
            .map(|i| if i == n_points - 1 { x1 } else { x0 + h * i as f64 })
            .collect();
        Ok(Self { coordinate, x, h })
    }

    /// Builds a grid from explicit coordinate values, checking uniform spacing.
    pub fn from_x(coordinate: Coordinate, x: Vec<f64>) -> Result<Self, RadialError> {
        if x.len() < MIN_POINTS {
            return Err(RadialError::TooFewPoints(x.len()));
        }
        let n = x.len();
        let h = (x[n - 1] - x[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(RadialError::InvalidRange { lo: x[0], hi: x[n - 1] });
        }
        for (i, pair) in x.windows(2).enumerate() {
            if ((pair[1] - pair[0]) - h).abs() > SPACING_TOLERANCE * h.max(1.0) {
                return Err(RadialError::NonUniform { index: i });
            }
        }
        Ok(Self { coordinate, x, h })
    }

    /// Same spacing, `extra` additional nodes on each side.
    pub fn extended(&self, extra: usize) -> Self {
        let x0 = self.x[0] - self.h * extra as f64;
        let n = self.len() + 2 * extra;
        let x = (0..n).map(|i| x0 + self.h * i as f64).collect();
        Self { coordinate: self.coordinate, x, h: self.h }
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x
    }

    /// Geometric radius at node `i`.
    pub fn r(&self, i: usize) -> f64 {
        match self.coordinate {
            Coordinate::LogT => (0.5 * self.x[i]).exp(),
            Coordinate::LogR => self.x[i].exp(),
        }
    }

    /// Squared radius at node `i`.
    pub fn t(&self, i: usize) -> f64 {
        match self.coordinate {
            Coordinate::LogT => self.x[i].exp(),
            Coordinate::LogR => (2.0 * self.x[i]).exp(),
        }
    }

    pub fn r_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }

    pub fn t_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.t(i)).collect()
    }

    pub fn t_min(&self) -> f64 {
        self.t(0)
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.len() - 1)
    }

    pub fn r_min(&self) -> f64 {
        self.r(0)
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len() - 1)
    }

    /// Indices of nodes whose radius lies in `[r_lo, r_hi]`.
    pub fn window(&self, r_lo: f64, r_hi: f64) -> std::ops::Range<usize> {
        let start = (0..self.len())
            .find(|&i| self.r(i) >= r_lo * (1.0 - 1e-12))
            .unwrap_or(self.len());
        let end = (0..self.len())
            .rev()
            .find(|&i| self.r(i) <= r_hi * (1.0 + 1e-12))
            .map_or(0, |i| i + 1);
        start..end.max(start)
    }

    /// Fourth-order first-derivative stencil in `x` at node `i`.
    pub fn d1_stencil(&self, i: usize) -> Stencil {
        let n = self.len();
        let s = 1.0 / (12.0 * self.h);
        let (start, w): (usize, [f64; 5]) = if i == 0 {
            (0, [-25.0, 48.0, -36.0, 16.0, -3.0])
        } else if i == 1 {
            (0, [-3.0, -10.0, 18.0, -6.0, 1.0])
        } else if i == n - 2 {
            (n - 5, [-1.0, 6.0, -18.0, 10.0, 3.0])
        } else if i == n - 1 {
            (n - 5, [3.0, -16.0, 36.0, -48.0, 25.0])
        } else {
            (i - 2, [1.0, -8.0, 0.0, 8.0, -1.0])
        };
        Stencil::new(start, w.iter().map(|c| c * s).collect())
    }

    /// Fourth-order second-derivative stencil in `x` at node `i`.
    pub fn d2_stencil(&self, i: usize) -> Stencil {
        let n = self.len();
        let s = 1.0 / (12.0 * self.h * self.h);
        let (start, w): (usize, Vec<f64>) = if i == 0 {
            (0, vec![45.0, -154.0, 214.0, -156.0, 61.0, -10.0])
        } else if i == 1 {
            (0, vec![10.0, -15.0, -4.0, 14.0, -6.0, 1.0])
        } else if i == n - 2 {
            (n - 6, vec![1.0, -6.0, 14.0, -4.0, -15.0, 10.0])
        } else if i == n - 1 {
            (n - 6, vec![-10.0, 61.0, -156.0, 214.0, -154.0, 45.0])
        } else {
            (i - 2, vec![-1.0, 16.0, -30.0, 16.0, -1.0])
        };
        Stencil::new(start, w.into_iter().map(|c| c * s).collect())
    }

    /// Applies the first-derivative stencils to nodal values.
    pub fn apply_d1(&self, values: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.d1_stencil(i).apply(values)).collect()
    }

    /// Applies the second-derivative stencils to nodal values.
    pub fn apply_d2(&self, values: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.d2_stencil(i).apply(values)).collect()
    }
}

impl RadialGrid {
    /// Derivative stencil of order `order` on a window of `points` consecutive
    /// nodes, centred on `i` where possible and shifted inward at the ends.
    pub fn wide_stencil(&self, i: usize, order: usize, points: usize) -> Stencil {
        let n = self.len();
        let points = points.min(n);
        let start = i.saturating_sub(points / 2).min(n - points);
        let nodes: Vec<f64> = (0..points).map(|k| k as f64).collect();
        let w = fd_weights((i - start) as f64, &nodes, order);
        let scale = self.h.powi(order as i32);
        Stencil::new(start, w[order].iter().map(|c| c / scale).collect())
    }
}

/// Fornberg's weights: `out[k][j]` approximates the `k`-th derivative at `z`
/// from values at `nodes[j]`, for `k = 0..=order`.
pub fn fd_weights(z: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Contiguous finite-difference weights starting at node `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    fn new(start: usize, weights: Vec<f64>) -> Self {
        Self { start, weights }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&values[self.start..self.start + self.weights.len()])
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(k, &w)| (self.start + k, w))
    }
}
