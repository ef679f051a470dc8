//! Pointwise algebra of real (1,1)-forms measured against a background Kähler form.
//!
//! A form `ζ = (i/2) Σ H_jk dz_j ∧ dz̄_k` is stored by its Hermitian matrix `H`
//! in a unitary frame for `ω = (i/2) Σ dz_j ∧ dz̄_j`, so `ω` itself is the identity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

const HERMITIAN_TOLERANCE: f64 = 1e-10;
const TRACE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HermitianError {
    #[error("matrix is {rows}x{cols}; need a square matrix of size at least 1")]
    Shape { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("wedge power {k} outside [0, {m}]")]
    PowerOutOfRange { k: usize, m: usize },
    #[error("hypothesis ζ∧ω^(m-1)=0 violated (trace {0:e})")]
    NotPrimitive(f64),
    #[error("primitive square identity needs m >= 2")]
    Dimension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    entries: DMatrix<Complex64>,
}

impl HermitianForm {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, HermitianError> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(HermitianError::Shape { rows, cols });
        }
        let scale = entries.iter().fold(1.0_f64, |s, z| s.max(z.norm()));
        let dev = (&entries - entries.adjoint()).iter().fold(0.0_f64, |s, z| s.max(z.norm()));
        if !(dev <= HERMITIAN_TOLERANCE * scale) {
            return Err(HermitianError::NotHermitian(dev));
        }
        // symmetrize away rounding so eigenvalues are exactly real
        let entries = (&entries + entries.adjoint()).map(|z| z * 0.5);
        Ok(Self { entries })
    }

    pub fn identity(m: usize) -> Self {
        Self { entries: DMatrix::identity(m, m) }
    }

    pub fn zero(m: usize) -> Self {
        Self { entries: DMatrix::zeros(m, m) }
    }

    pub fn diagonal(lambda: &[f64]) -> Self {
        let m = lambda.len();
        Self { entries: DMatrix::from_fn(m, m, |i, j| if i == j { lambda[i].into() } else { 0.0.into() }) }
    }

    /// `dd^c u` at a point from the real Hessian of `u` in coordinates
    /// `(x_1, …, x_m, y_1, …, y_m)` with `z_j = x_j + i y_j`.
    pub fn from_real_hessian(hessian: &DMatrix<f64>) -> Result<Self, HermitianError> {
        let (rows, cols) = hessian.shape();
        if rows != cols || rows % 2 == 1 || rows == 0 {
            return Err(HermitianError::Shape { rows, cols });
        }
        let m = rows / 2;
        let h = |a: usize, b: usize| hessian[(a, b)];
        let entries = DMatrix::from_fn(m, m, |j, k| {
            Complex64::new(h(j, k) + h(m + j, m + k), h(j, m + k) - h(m + j, k))
        });
        Self::new(entries)
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Eigenvalues relative to `ω`, in descending order.
    pub fn omega_eigenvalues(&self) -> Vec<f64> {
        let mut lambda: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        lambda.sort_by(|a, b| b.total_cmp(a));
        lambda
    }

    /// `ζ^k ∧ ω^{m−k} / ω^m = e_k(λ) / C(m,k)`.
    pub fn wedge_power_ratio(&self, k: usize) -> Result<f64, HermitianError> {
        let m = self.m();
        if k > m {
            return Err(HermitianError::PowerOutOfRange { k, m });
        }
        Ok(elementary_symmetric(&self.omega_eigenvalues(), k) / binomial(m, k))
    }

    /// `|ζ|² = 2 Σ λ_i²`.
    pub fn norm_squared(&self) -> f64 {
        2.0 * self.omega_eigenvalues().iter().map(|l| l * l).sum::<f64>()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `ζ − (tr ζ / m) ω`.
    pub fn trace_free_part(&self) -> Self {
        let shift = self.trace() / self.m() as f64;
        let id = DMatrix::<Complex64>::identity(self.m(), self.m());
        Self { entries: &self.entries - id * Complex64::from(shift) }
    }

    /// `|e_1(λ) + Δu|`, zero when `ζ = dd^c u` and `Δu` is the (nonnegative) Laplacian.
    pub fn trace_identity_residual(&self, laplacian_value: f64) -> f64 {
        (self.trace() + laplacian_value).abs()
    }

    /// `|ζ²∧ω^{m−2}/ω^m + |ζ|²/(2m(m−1))|` for trace-free `ζ`.
    pub fn primitive_square_identity_residual(&self) -> Result<f64, HermitianError> {
        let m = self.m();
        if m < 2 {
            return Err(HermitianError::Dimension);
        }
        let tr = self.trace();
        let scale = self.entries.iter().fold(1.0_f64, |s, z| s.max(z.norm()));
        if tr.abs() > TRACE_TOLERANCE * scale {
            return Err(HermitianError::NotPrimitive(tr));
        }
        let ratio = self.wedge_power_ratio(2)?;
        Ok((ratio + self.norm_squared() / (2.0 * (m * (m - 1)) as f64)).abs())
    }

    pub fn is_positive(&self) -> bool {
        self.omega_eigenvalues().iter().all(|&l| l > 0.0)
    }
}

/// `e_k(λ)` by the standard one-pass recurrence.
pub fn elementary_symmetric(lambda: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &l in lambda {
        for j in (1..=k).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e[k]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
