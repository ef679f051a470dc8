//! Numerical toolkit for U(m)-invariant ALE Kähler geometry: cyclic quotient
//! singularities, pointwise Hermitian algebra, radial calculus, flat Poisson
//! theory, the Calabi metric and radial complex Monge–Ampère solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod radial;
pub mod quotient;
pub mod hermitian;
pub mod banded;
pub mod quadrature;
pub mod poisson;
pub mod calabi;
pub mod monge_ampere;
