use super::{finish, tail_integral, MAProblem, MASolution, MaError, RULE_POINTS};
use crate::calabi::RadialKahlerPotential;
use crate::quadrature::{cumulative_order, interval_pieces_order, reverse_cumsum};
use crate::radial::RadialFunction;

/// Solves by direct integration of `d/dt[t^m (Φ′)^m] = m t^{m−1} e^f D̂`, with
/// `D̂` the background volume ratio and `lim_{t→0} t^m (Φ′)^m = class_constant`.
///
/// `E = t^m((Φ′)^m − 1)` is accumulated from the inner end (the piece below the
/// first node uses the integrand frozen at that node), `Φ′ = (1 + E/t^m)^{1/m}`,
/// and `Φ − t` is integrated inward from `0` at infinity.
pub fn solve_ma_quadrature(p: &MAProblem, class_constant: f64) -> Result<MASolution, MaError> {
    if !(class_constant >= 0.0) {
        return Err(MaError::ClassConstant(class_constant));
    }
    let grid = p.grid();
    let n = grid.len();
    let h = grid.spacing();
    let mi = p.m as i32;
    let mf = p.m as f64;
    let log_d = p.background.log_density();
    let f = p.f.values();
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        let l = f[i] + log_d[i];
        if !l.is_finite() {
            return Err(MaError::NegativeIntegrand(i));
        }
        // m s^{m−1} ds = m t^m dx
        g.push(mf * grid.t(i).powi(mi) * l.exp_m1());
    }
    let t0m = grid.t(0).powi(mi);
    let e0 = class_constant + t0m * (f[0] + log_d[0]).exp_m1();
    let running = cumulative_order(h, &g, RULE_POINTS)?;

    let (mut lt, mut lr, mut et, mut er) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut dw = vec![0.0; n];
    for i in 0..n {
        let t = grid.t(i);
        let q = (e0 + running[i]) / t.powi(mi);
        if !(q > -1.0) {
            return Err(MaError::NotPositive { node: i, t });
        }
        let l = q.ln_1p() / mf;
        et[i] = l.exp_m1();
        lt[i] = l.exp();
        let log_radial = f[i] + log_d[i] - (mf - 1.0) * l;
        er[i] = log_radial.exp_m1();
        lr[i] = log_radial.exp();
        dw[i] = t * et[i];
    }
    let tail = tail_integral(grid.x_values(), &dw)?;
    let pieces = interval_pieces_order(h, &dw, RULE_POINTS)?;
    let w: Vec<f64> = reverse_cumsum(&pieces, tail).into_iter().map(|v| -v).collect();

    let deviation = RadialFunction::sampled(grid.clone(), w)?;
    let potential = RadialKahlerPotential::from_parts(p.m, deviation, (lt, et), (lr, er), class_constant)?;
    let density = potential.log_density();
    let residual = (0..n).fold(0.0_f64, |acc, i| acc.max((density[i] - log_d[i] - f[i]).abs()));
    finish(p, potential, 0, residual, Vec::new(), vec![1.0])
}

/// `t^m (Φ′)^m − t^m` at the nodes; nondecreasing plus `t^m` and tending to the
/// class constant as `t → 0`.
pub fn conserved_excess(u: &RadialKahlerPotential) -> Vec<f64> {
    let m = u.m() as i32;
    (0..u.grid().len())
        .map(|i| {
            let t = u.grid().t(i);
            t.powi(m) * (m as f64 * u.excess_transverse()[i].ln_1p()).exp_m1()
        })
        .collect()
}
