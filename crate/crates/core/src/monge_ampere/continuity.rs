use super::{finish, tail_integral, MAProblem, MASolution, MaError};
use crate::banded::BandMatrix;
use crate::calabi::RadialKahlerPotential;
use crate::radial::{RadialFunction, Stencil};

const STENCIL_POINTS: usize = 7;
/// Nodes with `t` below this use the background's exact eigenvalues plus
/// differences of `φ`; the rest difference the total deviation `Φ − t`.
const SPLIT_T: f64 = 1.0;
const MAX_NEWTON_STEPS: usize = 40;
const MAX_DAMPING_HALVINGS: usize = 12;
const MIN_HOMOTOPY_STEP: f64 = 1.0 / 4096.0;

/// Discretized residual `(m−1) log(Φ′/û′) + log((Φ′+tΦ″)/(û′+tû″)) − s f` on the
/// nodes, with `φ_0 = 0` fixing the additive constant until the end.
pub(super) struct Discretization<'a> {
    p: &'a MAProblem,
    t: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    log_density: Vec<f64>,
    kl: usize,
    ku: usize,
    class_constant: f64,
}

/// Eigenvalue data of `Φ = û + φ` at every node.
pub(super) struct State {
    /// Row 0: inner boundary condition; rows `1..n−1`: equation at node `i`.
    pub residual: Vec<f64>,
    pub transverse: Vec<f64>,
    pub radial: Vec<f64>,
    pub excess_transverse: Vec<f64>,
    pub excess_radial: Vec<f64>,
    pub norm: f64,
}

impl<'a> Discretization<'a> {
    pub(super) fn new(p: &'a MAProblem, class_constant: f64) -> Self {
        let grid = p.grid();
        let n = grid.len();
        let d1: Vec<Stencil> = (0..n).map(|i| grid.wide_stencil(i, 1, STENCIL_POINTS)).collect();
        let d2: Vec<Stencil> = (0..n).map(|i| grid.wide_stencil(i, 2, STENCIL_POINTS)).collect();
        let (mut kl, mut ku) = (0, 0);
        for row in 0..n - 1 {
            for (j, _) in d1[row].iter().chain(d2[row].iter()).filter(|(j, _)| *j > 0) {
                let col = j - 1;
                kl = kl.max(row.saturating_sub(col));
                ku = ku.max(col.saturating_sub(row));
            }
        }
        Self {
            p,
            t: grid.t_values(),
            d1,
            d2,
            log_density: p.background.log_density(),
            kl,
            ku,
            class_constant,
        }
    }

    fn n(&self) -> usize {
        self.t.len()
    }

    /// `(t₀Φ′)(t₀) − t₀û′(t₀)` prescribed by the class constant, moved linearly
    /// from the background's along the path, with the integrand frozen on `(0, t₀)`.
    fn inner_target(&self, s: f64) -> f64 {
        let p = self.p;
        let m = p.m as i32;
        let mf = p.m as f64;
        let t0 = self.t[0];
        let t0m = t0.powi(m);
        let bg_e = p.background.excess_transverse()[0];
        let bg_flux = t0 * p.background.transverse()[0];
        // E = t^m((Φ′)^m − 1) for the target and for the background
        let bg_c = p.background.class_constant();
        let c = bg_c + s * (self.class_constant - bg_c);
        let e_target = c + t0m * (s * p.f.values()[0] + self.log_density[0]).exp_m1();
        let e_background = t0m * (mf * bg_e.ln_1p()).exp_m1();
        let ratio = (e_target - e_background) / bg_flux.powi(m);
        bg_flux * (ratio.ln_1p() / mf).exp_m1()
    }

    /// Evaluates eigenvalues and residuals; `Err(node)` if the metric is not positive.
    pub(super) fn evaluate(&self, phi: &[f64], s: f64) -> Result<State, usize> {
        let p = self.p;
        let n = self.n();
        let mf = p.m as f64;
        let bg = &p.background;
        let bw = bg.deviation().values();
        let w: Vec<f64> = phi.iter().zip(bw).map(|(a, b)| a + b).collect();
        let mut st = State {
            residual: vec![0.0; n],
            transverse: vec![0.0; n],
            radial: vec![0.0; n],
            excess_transverse: vec![0.0; n],
            excess_radial: vec![0.0; n],
            norm: 0.0,
        };
        for i in 0..n {
            let t = self.t[i];
            let f_term = s * p.f.values()[i];
            let (a, b, lhs);
            if t < SPLIT_T {
                let dp = self.d1[i].apply(phi) / t;
                let ddp = self.d2[i].apply(phi) / t;
                a = dp / bg.transverse()[i];
                b = ddp / bg.radial()[i];
                if !(a > -1.0 && b > -1.0) {
                    return Err(i);
                }
                st.transverse[i] = bg.transverse()[i] * (1.0 + a);
                st.radial[i] = bg.radial()[i] * (1.0 + b);
                st.excess_transverse[i] = bg.excess_transverse()[i] + dp;
                st.excess_radial[i] = bg.excess_radial()[i] + ddp;
                lhs = (mf - 1.0) * a.ln_1p() + b.ln_1p();
            } else {
                a = self.d1[i].apply(&w) / t;
                b = self.d2[i].apply(&w) / t;
                if !(a > -1.0 && b > -1.0) {
                    return Err(i);
                }
                st.transverse[i] = 1.0 + a;
                st.radial[i] = 1.0 + b;
                st.excess_transverse[i] = a;
                st.excess_radial[i] = b;
                lhs = (mf - 1.0) * a.ln_1p() + b.ln_1p() - self.log_density[i];
            }
            st.residual[i] = lhs - f_term;
        }
        st.residual[0] = self.d1[0].apply(phi) - self.inner_target(s);
        st.residual[n - 1] = 0.0;
        st.norm = st.residual.iter().fold(0.0, |m, r| m.max(r.abs()));
        Ok(st)
    }

    /// Jacobian of rows `0..n−1` with respect to `φ_1, …, φ_{n−1}`.
    pub(super) fn jacobian(&self, st: &State) -> BandMatrix {
        let n = self.n();
        let mf = self.p.m as f64;
        let mut jac = BandMatrix::zeros(n - 1, self.kl, self.ku);
        for (j, c) in self.d1[0].iter().filter(|(j, _)| *j > 0) {
            jac.add(0, j - 1, c);
        }
        for i in 1..n - 1 {
            let t = self.t[i];
            let ct = (mf - 1.0) / (t * st.transverse[i]);
            let cr = 1.0 / (t * st.radial[i]);
            for (j, c) in self.d1[i].iter().filter(|(j, _)| *j > 0) {
                jac.add(i, j - 1, ct * c);
            }
            for (j, c) in self.d2[i].iter().filter(|(j, _)| *j > 0) {
                jac.add(i, j - 1, cr * c);
            }
        }
        jac
    }

    /// Newton iteration at fixed `s`, updating `phi` in place.
    fn newton(&self, phi: &mut Vec<f64>, s: f64) -> Result<Vec<f64>, MaError> {
        let n = self.n();
        let tol = self.p.newton_tolerance;
        let mut st = self.evaluate(phi, s).map_err(|_| MaError::PositivityLost { s })?;
        let mut history = vec![st.norm];
        let mut increases = 0;
        while st.norm > tol {
            if history.len() > MAX_NEWTON_STEPS {
                return Err(MaError::NotConverged { s, residual: st.norm });
            }
            let rhs: Vec<f64> = st.residual[..n - 1].iter().map(|r| -r).collect();
            let delta = self.jacobian(&st).factor()?.solve(&rhs)?;
            let mut alpha = 1.0;
            let mut halvings = 0;
            let (trial, next) = loop {
                let mut trial = phi.clone();
                for (k, d) in delta.iter().enumerate() {
                    trial[k + 1] += alpha * d;
                }
                match self.evaluate(&trial, s) {
                    Ok(next) => break (trial, next),
                    Err(_) if halvings < MAX_DAMPING_HALVINGS => {
                        alpha *= 0.5;
                        halvings += 1;
                    }
                    Err(_) => return Err(MaError::PositivityLost { s }),
                }
            };
            if next.norm > st.norm {
                increases += 1;
                if increases >= 2 {
                    return Err(MaError::Divergence { s, iterations: history.len() });
                }
            } else {
                increases = 0;
            }
            let step = delta.iter().fold(0.0_f64, |m, d| m.max((alpha * d).abs()));
            let scale = trial.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            *phi = trial;
            let stalled = next.norm >= st.norm && step <= 1e-14 * scale;
            st = next;
            history.push(st.norm);
            if stalled && st.norm > tol {
                return Err(MaError::NotConverged { s, residual: st.norm });
            }
        }
        Ok(history)
    }
}

/// Continuity method: solves `(ω̂ + dd^cφ)^m = e^{sf} ω̂^m` by Newton iteration
/// for `s = 1/steps, 2/steps, …, 1`, bisecting a step whenever Newton fails.
///
/// The linearization at each iterate is the radial Laplacian of the current
/// metric. The inner boundary row prescribes `lim t^m(Φ′)^m = class_constant`;
/// at the outer end `Φ − t` is extended as a power law and set to vanish at
/// infinity, which for `β < −2m` is `d/dt(t^{m−1}φ) → 0`.
pub fn solve_ma_continuity(p: &MAProblem, class_constant: f64, steps: usize) -> Result<MASolution, MaError> {
    if steps == 0 {
        return Err(MaError::Steps);
    }
    if !(class_constant >= 0.0) {
        return Err(MaError::ClassConstant(class_constant));
    }
    let disc = Discretization::new(p, class_constant);
    let n = disc.n();
    let mut phi = vec![0.0; n];
    let mut reached = 0.0;
    let mut history = Vec::new();
    let mut path = Vec::new();
    for k in 1..=steps {
        let target = k as f64 / steps as f64;
        while reached < target {
            let mut s = target;
            loop {
                let mut trial = phi.clone();
                match disc.newton(&mut trial, s) {
                    Ok(h) => {
                        phi = trial;
                        history.push(h);
                        path.push(s);
                        reached = s;
                        break;
                    }
                    Err(
                        e @ (MaError::Divergence { .. }
                        | MaError::PositivityLost { .. }
                        | MaError::NotConverged { .. }),
                    ) => {
                        if s - reached < MIN_HOMOTOPY_STEP {
                            return Err(match e {
                                MaError::Divergence { .. } => e,
                                _ => MaError::HomotopyStalled { s: reached, min_step: MIN_HOMOTOPY_STEP },
                            });
                        }
                        s = 0.5 * (reached + s);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let st = disc.evaluate(&phi, 1.0).map_err(|_| MaError::PositivityLost { s: 1.0 })?;

    // fix the constant: Φ − t → 0 at infinity
    let grid = p.grid();
    let bw = p.background.deviation().values();
    let dw: Vec<f64> = (0..n).map(|i| grid.t(i) * st.excess_transverse[i]).collect();
    let tail = tail_integral(grid.x_values(), &dw)?;
    let shift = -tail - (phi[n - 1] + bw[n - 1]);
    let w: Vec<f64> = (0..n).map(|i| phi[i] + shift + bw[i]).collect();

    let potential = RadialKahlerPotential::from_parts(
        p.m,
        RadialFunction::sampled(grid.clone(), w)?,
        (st.transverse, st.excess_transverse),
        (st.radial, st.excess_radial),
        class_constant,
    )?;
    let iterations = history.iter().map(|h| h.len() - 1).sum();
    finish(p, potential, iterations, st.norm, history, path)
}

/// Largest `r_{k+1}/r_k²` over Newton steps with `r_k < 10⁻²` and `r_{k+1}`
/// above roundoff, or `None` if no step qualifies.
pub fn quadratic_convergence_constant(history: &[Vec<f64>]) -> Option<f64> {
    history
        .iter()
        .flat_map(|h| h.windows(2))
        .filter(|w| w[0] < 1e-2 && w[1] > 1e-11)
        .map(|w| w[1] / (w[0] * w[0]))
        .reduce(f64::max)
}

#[cfg(test)]
pub(super) fn residual_rows(d: &Discretization, phi: &[f64], s: f64) -> Vec<f64> {
    let st = d.evaluate(phi, s).expect("positive");
    st.residual[..st.residual.len() - 1].to_vec()
}
