use serde::Serialize;

use super::{RadialError, RadialFunction};

/// Weighted `C^k_β` norm and weighted Hölder seminorm of a radial function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedNormReport {
    pub beta: f64,
    pub k: usize,
    pub alpha: f64,
    pub ck_norm: f64,
    pub holder_seminorm: f64,
    /// `sup ρ^{j-β} |f^(j)|` for `j = 0..=k`.
    pub per_order_sups: Vec<f64>,
    /// Set when some weighted order is maximal at the outermost node and still
    /// increasing there: the norm is likely to diverge as the grid grows.
    pub grows_at_outer_edge: bool,
}

/// Weighted norm `Σ_j sup ρ^{j-β}|∇^j f|` plus the seminorm
/// `sup min(ρ(x),ρ(y))^{-γ} |T(x)-T(y)| / d(x,y)^α` of `T = f^(k)`, with
/// `γ = β - k - α`, over node pairs closer than `min(ρ(x),ρ(y))/2`.
///
/// Derivatives are taken with respect to the geometric radius `r`.
pub fn weighted_ck_norm(
    f: &RadialFunction,
    rho: &RadialFunction,
    beta: f64,
    k: usize,
    alpha: f64,
) -> Result<WeightedNormReport, RadialError> {
    if f.grid() != rho.grid() {
        return Err(RadialError::GridMismatch);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RadialError::InvalidParameter(format!("Hölder exponent {alpha} not in (0,1)")));
    }
    let grid = f.grid();
    let n = grid.len();
    let rho_v = rho.values();
    let r: Vec<f64> = grid.r_values();

    let mut per_order_sups = Vec::with_capacity(k + 1);
    let mut grows_at_outer_edge = false;
    let mut top = Vec::new();
    for j in 0..=k {
        let d = f.derivative_r(j)?;
        let weighted: Vec<f64> =
            (0..n).map(|i| rho_v[i].powf(j as f64 - beta) * d[i].abs()).collect();
        let sup = weighted.iter().fold(0.0_f64, |m, &v| m.max(v));
        if sup > 0.0
            && weighted[n - 1] >= sup * (1.0 - 1e-12)
            && weighted[n - 1] > weighted[n - 2] * (1.0 + 1e-9)
        {
            grows_at_outer_edge = true;
        }
        per_order_sups.push(sup);
        if j == k {
            top = d;
        }
    }

    let gamma = beta - k as f64 - alpha;
    let mut holder: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dist = r[j] - r[i];
            let min_rho = rho_v[i].min(rho_v[j]);
            if dist >= 0.5 * rho_v[i] {
                break;
            }
            if dist >= 0.5 * min_rho {
                continue;
            }
            let q = min_rho.powf(-gamma) * (top[i] - top[j]).abs() / dist.powf(alpha);
            holder = holder.max(q);
        }
    }

    Ok(WeightedNormReport {
        beta,
        k,
        alpha,
        ck_norm: per_order_sups.iter().sum(),
        holder_seminorm: holder,
        per_order_sups,
        grows_at_outer_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{smoothed_radius, smoothed_radius_power, RadialGrid};

    #[test]
    fn rho_to_the_beta_has_unit_zeroth_order() {
        let g = RadialGrid::log_r(1e-3, 1e4, 400).unwrap();
        let rho = smoothed_radius(&g);
        let f = smoothed_radius_power(&g, -3.0);
        let rep = weighted_ck_norm(&f, &rho, -3.0, 0, 0.5).unwrap();
        assert!((rep.per_order_sups[0] - 1.0).abs() < 1e-12);
        assert!(!rep.grows_at_outer_edge);
    }

    #[test]
    fn inverse_square_first_order_weight_tends_to_two() {
        let g = RadialGrid::log_r(1e-3, 1e5, 1200).unwrap();
        let rho = smoothed_radius(&g);
        let f = smoothed_radius_power(&g, -2.0);
        let rep = weighted_ck_norm(&f, &rho, -2.0, 1, 0.5).unwrap();
        assert!((rep.per_order_sups[1] - 2.0).abs() < 0.02, "{:?}", rep.per_order_sups);
    }

    #[test]
    fn inverse_r_is_not_in_c0_minus_two() {
        let mut norms = Vec::new();
        for r_max in [1e2, 1e3, 1e4] {
            let g = RadialGrid::log_r(1.0, r_max, 200).unwrap();
            let rho = smoothed_radius(&g);
            let f = RadialFunction::from_fn_r(&g, |r| 1.0 / r).unwrap();
            let rep = weighted_ck_norm(&f, &rho, -2.0, 0, 0.5).unwrap();
            assert!(rep.grows_at_outer_edge);
            norms.push(rep.ck_norm);
        }
        assert!(norms[1] > 5.0 * norms[0] && norms[2] > 5.0 * norms[1]);
    }

    #[test]
    fn adding_orders_never_decreases_the_norm() {
        let g = RadialGrid::log_r(1e-2, 1e3, 300).unwrap();
        let rho = smoothed_radius(&g);
        let f = smoothed_radius_power(&g, -2.5);
        let mut last = 0.0;
        for k in 0..=2 {
            let rep = weighted_ck_norm(&f, &rho, -2.5, k, 0.5).unwrap();
            assert!(rep.ck_norm >= last);
            last = rep.ck_norm;
        }
    }

    #[test]
    fn alpha_must_be_in_unit_interval() {
        let g = RadialGrid::log_r(1.0, 10.0, 32).unwrap();
        let rho = smoothed_radius(&g);
        assert!(weighted_ck_norm(&rho, &rho, 1.0, 0, 1.0).is_err());
    }
}
