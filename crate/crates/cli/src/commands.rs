//! One function per command: run the owning module, collect results, checks and profiles.

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ale_core::calabi::{
    asymptotic_coefficient, calabi_leading_coefficient, calabi_potential, metric_decay_profile_in,
    remainder_decay, ricci_flat_residual, ricci_flat_residual_fd, CalabiSummary, RadialKahlerPotential,
    DECAY_WINDOW_R,
};
use ale_core::hermitian::HermitianForm;
use ale_core::monge_ampere::{
    flatten, leading_coefficient_ma, ma_ratio, pipeline, quadratic_convergence_constant, solve_ma_continuity,
    solve_ma_quadrature, MAProblem, MASolution, MaCase, MaRightHandSide,
};
use ale_core::poisson::{
    delta_radius_identity, leading_coefficient, solve_poisson, PoissonCase, PoissonProblem, RightHandSide,
};
use ale_core::quotient::CyclicQuotient;
use ale_core::radial::{decay_order, smoothed_radius, weighted_ck_norm, RadialFunction, RadialGrid};

use crate::config::JobConfig;
use crate::report::{Check, Profile};

pub(crate) struct CommandOutput {
    /// Parameters with defaults filled in, echoed back in the report.
    pub parameters: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub profile: Option<Profile>,
}

fn t_grid(cfg: &JobConfig) -> Result<RadialGrid> {
    let g = cfg.grid;
    RadialGrid::log_t(g.t_min, g.t_max, g.n_points).context("building the t grid")
}

fn r_grid(cfg: &JobConfig) -> Result<RadialGrid> {
    let g = cfg.grid;
    RadialGrid::log_r(g.t_min.sqrt(), g.t_max.sqrt(), g.n_points).context("building the r grid")
}

fn echo<P: Serialize>(p: &P) -> Value {
    serde_json::to_value(p).expect("parameters serialize")
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

// ---------------------------------------------------------------- calabi

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalabiParams {
    pub m: usize,
    /// Range of `t` for the fit of the `t^{1−m}` coefficient.
    pub fit_window_t: (f64, f64),
    /// Range of `r` for decay-rate fits.
    pub decay_window_r: (f64, f64),
}

impl Default for CalabiParams {
    fn default() -> Self {
        Self { m: 2, fit_window_t: (1e4, 1e8), decay_window_r: DECAY_WINDOW_R }
    }
}

pub(crate) fn calabi(cfg: &JobConfig) -> Result<CommandOutput> {
    let p: CalabiParams = cfg.parameters()?;
    let m = p.m;
    let grid = t_grid(cfg)?;
    let mf = m as f64;
    let fit = cfg.tolerances.fit;

    let closed = ricci_flat_residual(m, &grid)?;
    let fd = ricci_flat_residual_fd(m, &grid)?;
    let exact_a = calabi_leading_coefficient(m);
    let fitted_a = asymptotic_coefficient(m, p.fit_window_t)?;
    let mut metric_decay = [0.0; 3];
    for (k, d) in metric_decay.iter_mut().enumerate() {
        *d = metric_decay_profile_in(m, k, p.decay_window_r)?;
    }
    let remainder = [remainder_decay(m, 0, p.decay_window_r)?, remainder_decay(m, 1, p.decay_window_r)?];
    let summary = CalabiSummary {
        m,
        fitted_a,
        exact_a,
        ricci_residual_closed_form: closed,
        ricci_residual_finite_difference: fd,
        metric_decay,
        remainder_decay: remainder,
    };

    let mut checks = vec![
        Check::at_most("ricci_flat_closed_form", closed, 1e-13, "closed-form eigenvalues"),
        Check::at_most("ricci_flat_finite_difference", fd, 1e-8, "oracle: sixth-order differences of the potential"),
        Check::relative("asymptotic_coefficient", fitted_a, exact_a, 0.005, "exact: -1/(m(m-1))"),
        Check::below("asymptotic_coefficient_negative", fitted_a, 0.0, 0.0, "sign of the leading coefficient"),
    ];
    for (k, d) in metric_decay.iter().enumerate() {
        let target = -2.0 * mf - k as f64;
        checks.push(Check::relative(format!("metric_decay_k{k}"), *d, target, fit, "sharp rate -2m-k"));
    }
    for (k, d) in remainder.iter().enumerate() {
        let bound = -2.0 * mf - k as f64;
        checks.push(Check::at_most(format!("remainder_decay_k{k}"), *d, bound, "bound O(r^(-2m-k))"));
        let rate = 2.0 - 4.0 * mf - k as f64;
        checks.push(Check::relative(
            format!("remainder_rate_k{k}"),
            *d,
            rate,
            fit,
            "oracle: second term of the series at infinity, r^(2-4m-k)",
        ));
    }

    let u = RadialKahlerPotential::calabi(m, &grid)?;
    let t = grid.t_values();
    let phi = t.iter().map(|&t| calabi_potential(m, t)).collect::<Result<Vec<_>, _>>()?;
    let profile = Profile::new(
        &["r", "phi", "phi_prime", "eig_radial", "eig_transverse"],
        vec![grid.r_values(), phi, u.transverse().to_vec(), u.radial().to_vec(), u.transverse().to_vec()],
    );
    Ok(CommandOutput {
        parameters: echo(&p),
        results: serde_json::to_value(summary)?,
        checks,
        profile: Some(profile),
    })
}

// ---------------------------------------------------------------- poisson

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonParams {
    pub n: usize,
    pub group_order: u64,
    pub rhs: RightHandSide,
    /// Weight of the right-hand side; defaults to the natural weight of `rhs`.
    pub beta: Option<f64>,
    pub fit_window_r: Option<(f64, f64)>,
}

impl Default for PoissonParams {
    fn default() -> Self {
        Self {
            n: 4,
            group_order: 1,
            rhs: RightHandSide::InverseQuadraticPower { p: 3.0, amplitude: 8.0 },
            beta: None,
            fit_window_r: None,
        }
    }
}

/// `c` with `u = c(1+r²)^{−1}` where that closed form applies: in dimension
/// four `Δ(1+r²)^{−1} = 8(1+r²)^{−3}`. Then `A = c` as well.
fn poisson_closed_form(p: &PoissonParams) -> Option<f64> {
    match p.rhs {
        RightHandSide::InverseQuadraticPower { p: q, amplitude } if p.n == 4 && q == 3.0 => Some(amplitude / 8.0),
        _ => None,
    }
}

/// Whether `∫ f dV = 0` by construction.
fn zero_integral(p: &PoissonParams) -> bool {
    match p.rhs {
        RightHandSide::ZeroMeanBump { .. } => true,
        RightHandSide::RhoPowerLaplacian { p: q } => q < 2.0 - p.n as f64,
        _ => false,
    }
}

pub(crate) fn poisson(cfg: &JobConfig) -> Result<CommandOutput> {
    let p: PoissonParams = cfg.parameters()?;
    let grid = r_grid(cfg)?;
    let n = p.n;
    let nf = n as f64;
    let beta = p.beta.unwrap_or_else(|| p.rhs.default_beta(n));
    let f = p.rhs.on_grid(&grid, n)?;
    let mut problem = PoissonProblem::new(n, p.group_order, f, beta)?;
    if let Some((lo, hi)) = p.fit_window_r {
        problem = problem.with_fit_window(lo, hi);
    }
    let sol = solve_poisson(&problem)?;
    let fit = cfg.tolerances.fit;
    let mut checks = Vec::new();
    let mut results = json!({
        "n": n,
        "group_order": p.group_order,
        "beta": beta,
        "case": sol.case.tag(),
        "a_coefficient": sol.a_coefficient,
        "measured_decay_u": sol.measured_decay_u,
        "measured_decay_v": sol.measured_decay_v,
        "u_sup": sol.u.sup_abs(),
    });

    if let Some(c) = poisson_closed_form(&p) {
        let err = grid
            .r_values()
            .iter()
            .zip(sol.u.values())
            .fold(0.0_f64, |m, (&r, u)| m.max((u - c / (1.0 + r * r)).abs()));
        results["closed_form_sup_error"] = json!(err);
        checks.push(Check::at_most("closed_form_sup_error", err, 1e-8, "oracle: closed-form solution c(1+r^2)^-1"));
        if sol.case == PoissonCase::B {
            checks.push(Check::absolute("a_exact", sol.a_coefficient, c, 1e-8, "oracle: closed-form solution"));
        }
    }

    match sol.case {
        PoissonCase::A => {
            let target = beta + 2.0;
            let d = sol.measured_decay_u.unwrap_or(f64::NAN);
            checks.push(Check::relative("decay_u", d, target, fit, "weighted estimate: u decays like rho^(beta+2)"));
        }
        PoissonCase::B => {
            let a_quad = leading_coefficient(&problem)?;
            results["a_quadrature"] = json!(a_quad);
            checks.push(Check::absolute(
                "a_quadrature",
                sol.a_coefficient,
                a_quad,
                1e-10,
                "oracle: adaptive quadrature of the volume integral",
            ));
            let green = 2.0 - nf;
            if zero_integral(&p) {
                // a tail at roundoff level relative to sup |u| counts as vanishing
                let (lo, hi) = problem.decay_window();
                let tail = grid.window(lo, hi).map(|i| sol.u.values()[i].abs()).fold(0.0, f64::max);
                let relative_tail = tail / sol.u.sup_abs().max(f64::MIN_POSITIVE);
                results["relative_tail"] = json!(relative_tail);
                match sol.measured_decay_u {
                    Some(d) if relative_tail > 1e-12 => checks.push(Check::below(
                        "decay_faster_than_green",
                        d,
                        green,
                        0.1,
                        "zero integral: faster than r^(2-n)",
                    )),
                    _ => checks.push(Check::at_most(
                        "decay_faster_than_green",
                        relative_tail,
                        1e-12,
                        "zero integral: u vanishes outside the support of f",
                    )),
                }
            } else {
                let d = sol.measured_decay_u.unwrap_or(f64::NAN);
                checks.push(Check::relative("decay_u", d, green, fit, "leading term A rho^(2-n)"));
                // v also carries A(r^{2−n} − ρ^{2−n}) ~ r^{−n}
                if beta > -nf - 2.0 {
                    if let Some(dv) = sol.measured_decay_v {
                        checks.push(Check::at_most("decay_v", dv, beta + 2.0 + 0.1, "remainder v decays like rho^(beta+2)"));
                    }
                }
            }
        }
    }

    let lead: Vec<f64> =
        grid.r_values().iter().map(|&r| sol.a_coefficient * (1.0 + r * r).powf(0.5 * (2.0 - nf))).collect();
    let profile = Profile::new(
        &["r", "u", "A*rho^{2-n}", "v"],
        vec![grid.r_values(), sol.u.values().to_vec(), lead, sol.v.values().to_vec()],
    );
    Ok(CommandOutput { parameters: echo(&p), results, checks, profile: Some(profile) })
}

// ---------------------------------------------------------------- ma-solve

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    Flat,
    Calabi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaSolveParams {
    pub m: usize,
    pub background: Background,
    /// Glue the background to the flat metric at this radius.
    pub flatten_radius: Option<f64>,
    pub rhs: MaRightHandSide,
    pub beta: Option<f64>,
    pub group_order: u64,
    /// Defaults to the background's class constant.
    pub class_constant: Option<f64>,
    pub steps: usize,
    pub fit_window_t: Option<(f64, f64)>,
}

impl Default for MaSolveParams {
    fn default() -> Self {
        Self {
            m: 2,
            background: Background::Flat,
            flatten_radius: None,
            rhs: MaRightHandSide::LogBump { center: 4.0, width: 2.0, amplitude: 0.3 },
            beta: None,
            group_order: 1,
            class_constant: None,
            steps: 4,
            fit_window_t: None,
        }
    }
}

/// `log(ma_ratio) − f` with the volume ratio recomputed from `φ` by differencing.
fn ma_residual(problem: &MAProblem, sol: &MASolution) -> Result<Vec<f64>> {
    let ratio = ma_ratio(&problem.background, &sol.phi)?;
    Ok(ratio.values().iter().zip(problem.f.values()).map(|(q, f)| q.ln() - f).collect())
}

fn ma_profile(problem: &MAProblem, sol: &MASolution) -> Result<Profile> {
    let grid = problem.grid();
    Ok(Profile::new(
        &["r", "f", "phi", "psi", "ma_residual"],
        vec![
            grid.r_values(),
            problem.f.values().to_vec(),
            sol.phi.values().to_vec(),
            sol.psi.values().to_vec(),
            ma_residual(problem, sol)?,
        ],
    ))
}

/// `max |φ_a − φ_b| / max |φ_b|`, or the plain difference when `φ_b ≡ 0`.
fn agreement(a: &RadialFunction, b: &RadialFunction) -> f64 {
    let d = sup_diff(a.values(), b.values());
    let s = b.sup_abs();
    if s > 0.0 { d / s } else { d }
}

pub(crate) fn ma_solve(cfg: &JobConfig) -> Result<CommandOutput> {
    let p: MaSolveParams = cfg.parameters()?;
    let grid = t_grid(cfg)?;
    let mut bg = match p.background {
        Background::Flat => RadialKahlerPotential::flat(p.m, &grid)?,
        Background::Calabi => RadialKahlerPotential::calabi(p.m, &grid)?,
    };
    if let Some(r) = p.flatten_radius {
        bg = flatten(&bg, r)?;
    }
    let c = p.class_constant.unwrap_or_else(|| bg.class_constant());
    let beta = p.beta.unwrap_or_else(|| p.rhs.default_beta(p.m));
    let f = p.rhs.on_grid(&grid)?;
    let mut problem = MAProblem::new(bg, f, beta, p.group_order)?.with_newton_tolerance(cfg.tolerances.newton);
    if let Some(w) = p.fit_window_t {
        problem = problem.with_fit_window(w.0, w.1);
    }
    let cont = solve_ma_continuity(&problem, c, p.steps).context("continuity solve")?;
    let quad = solve_ma_quadrature(&problem, c).context("quadrature solve")?;
    let agree = agreement(&cont.phi, &quad.phi);
    let (a_formula, a_fitted) = leading_coefficient_ma(&problem, &cont)?;
    let quadratic = quadratic_convergence_constant(&cont.residual_history);

    let mut checks = vec![
        Check::at_most("solver_agreement", agree, 1e-8, "oracle: direct quadrature solve"),
        Check::above("positivity_margin", cont.positivity_margin, 0.0, 0.0, "solved metric is positive"),
    ];
    if cont.case == MaCase::B {
        checks.push(Check::relative(
            "coefficient_formula",
            a_fitted,
            a_formula,
            1e-5,
            "oracle: volume-defect integral",
        ));
        if let Ok(d) = decay_order(&cont.psi, 0, window_r(&problem)) {
            checks.push(Check::at_most("psi_decay", d, beta + 2.0, "remainder decays like rho^(beta+2)"));
        }
    }
    let results = json!({
        "m": p.m,
        "class_constant": c,
        "beta": beta,
        "case": cont.case,
        "a_coefficient": cont.a_coefficient,
        "a_formula": a_formula,
        "a_fitted": a_fitted,
        "solver_agreement": agree,
        "newton_iterations": cont.newton_iterations,
        "final_residual": cont.final_residual,
        "newton_quadratic_constant": quadratic,
        "homotopy_path": cont.homotopy_path,
        "positivity_margin": cont.positivity_margin,
    });
    let profile = ma_profile(&problem, &cont)?;
    Ok(CommandOutput { parameters: echo(&p), results, checks, profile: Some(profile) })
}

fn window_r(p: &MAProblem) -> (f64, f64) {
    let (lo, hi) = p.fit_window_t();
    (lo.sqrt(), hi.sqrt())
}

// ---------------------------------------------------------------- pipeline

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub m: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub steps: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self { m: 2, radius: 10.0, steps: 8 }
    }
}

pub(crate) fn pipeline_command(cfg: &JobConfig) -> Result<CommandOutput> {
    let p: PipelineParams = cfg.parameters()?;
    let grid = t_grid(cfg)?;
    let run = pipeline(p.m, p.radius, p.steps, &grid)?;
    let r = &run.report;
    let exact = calabi_leading_coefficient(p.m);
    let checks = vec![
        Check::at_most("metric_deviation", r.max_metric_deviation, 1e-6, "oracle: closed-form Calabi metric"),
        Check::at_most("solver_agreement", r.solver_agreement, 1e-8, "oracle: direct quadrature solve"),
        Check::at_most("ricci_potential", r.ricci_potential_sup, 1e-8, "solved metric is Ricci-flat"),
        Check::below("a_negative", r.a_total, 0.0, 0.0, "sign of the leading coefficient"),
        Check::relative("a_total", r.a_total, exact, 1e-3, "exact: -1/(m(m-1))"),
        Check::relative("coefficient_formula", r.a_fitted, r.a_formula, 1e-6, "oracle: volume-defect integral"),
        Check::at_most(
            "newton_quadratic_constant",
            r.newton_quadratic_constant.unwrap_or(f64::NAN),
            1e3,
            "quadratic convergence r_(k+1) <= C r_k^2",
        ),
    ];
    let problem = MAProblem::new(run.background.clone(), run.f.clone(), -2.0 * p.m as f64 - 1.0, p.m as u64)?;
    let profile = ma_profile(&problem, &run.continuity)?;
    Ok(CommandOutput {
        parameters: echo(&p),
        results: serde_json::to_value(r)?,
        checks,
        profile: Some(profile),
    })
}

// ---------------------------------------------------------------- quotient

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuotientParams {
    pub m: usize,
    /// Order of the generator; with `exponents`, classifies one action.
    pub k: Option<u64>,
    pub exponents: Option<Vec<u64>>,
    /// Without `exponents`, scans every order `2..=k_max`.
    pub k_max: u64,
}

impl Default for QuotientParams {
    fn default() -> Self {
        Self { m: 4, k: None, exponents: None, k_max: 20 }
    }
}

const TERMINAL_PROVENANCE: &str = "theorem: free symplectic cyclic actions in dimension >= 4 are terminal";

pub(crate) fn quotient(cfg: &JobConfig) -> Result<CommandOutput> {
    let p: QuotientParams = cfg.parameters()?;
    let mut checks = Vec::new();
    let results = match (&p.exponents, p.k) {
        (Some(a), Some(k)) => {
            let q = CyclicQuotient::new(p.m, k, a.clone())?;
            let free = q.acts_freely();
            let su = q.in_special_unitary();
            let pairing = if p.m.is_multiple_of(2) { Some(q.satisfies_symplectic_pairing()?) } else { None };
            let terminal = q.is_terminal().ok();
            let ages = (1..q.order()).map(|j| q.age(j).map(|r| r.to_string())).collect::<Result<Vec<_>, _>>().ok();
            if free && su && pairing == Some(true) && p.m >= 4 {
                let t = if terminal == Some(true) { 1.0 } else { 0.0 };
                checks.push(Check::absolute("terminal", t, 1.0, 0.0, TERMINAL_PROVENANCE));
            }
            json!({
                "m": p.m,
                "order": q.order(),
                "exponents": q.exponents(),
                "acts_freely": free,
                "special_unitary": su,
                "symplectic_pairing": pairing,
                "terminal": terminal,
                "ages": ages,
            })
        }
        (None, None) => {
            if p.m % 2 == 1 {
                bail!("the symplectic scan needs even m, got {}", p.m);
            }
            let mut scanned = 0usize;
            let mut qualifying = 0usize;
            let mut counterexamples = Vec::new();
            for k in 2..=p.k_max {
                for q in CyclicQuotient::all_of_order(p.m, k) {
                    scanned += 1;
                    if q.acts_freely() && q.in_special_unitary() && q.satisfies_symplectic_pairing()? {
                        qualifying += 1;
                        if !q.is_terminal()? {
                            counterexamples.push(json!({"k": k, "exponents": q.exponents()}));
                        }
                    }
                }
            }
            if p.m >= 4 {
                checks.push(Check::absolute(
                    "terminal_scan",
                    counterexamples.len() as f64,
                    0.0,
                    0.0,
                    TERMINAL_PROVENANCE,
                ));
            }
            json!({
                "m": p.m,
                "k_max": p.k_max,
                "actions_scanned": scanned,
                "free_symplectic_actions": qualifying,
                "non_terminal": counterexamples,
            })
        }
        _ => bail!("quotient needs both k and exponents, or neither (scan mode)"),
    };
    Ok(CommandOutput { parameters: echo(&p), results, checks, profile: None })
}

// ---------------------------------------------------------------- identities

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesParams {
    pub m_values: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// `(n, |G|)` pairs for the integral of `Δ(ρ^{2−n})`.
    pub laplacian_cases: Vec<(usize, u64)>,
}

impl Default for IdentitiesParams {
    fn default() -> Self {
        Self { m_values: vec![2, 3, 4, 5], samples: 1000, seed: 0, laplacian_cases: vec![(4, 1), (4, 2), (6, 1)] }
    }
}

pub(crate) fn identities(cfg: &JobConfig) -> Result<CommandOutput> {
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    let p: IdentitiesParams = cfg.parameters()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut checks = Vec::new();
    let mut pointwise = Vec::new();
    for &m in &p.m_values {
        let (mut trace_worst, mut square_worst) = (0.0_f64, 0.0_f64);
        for _ in 0..p.samples {
            // ζ = dd^c u for the quadratic u = ½ xᵀHx, whose Laplacian is −tr H
            let mut hess = DMatrix::<f64>::zeros(2 * m, 2 * m);
            for a in 0..2 * m {
                for b in a..2 * m {
                    let v = rng.random_range(-1.0..1.0);
                    hess[(a, b)] = v;
                    hess[(b, a)] = v;
                }
            }
            let zeta = HermitianForm::from_real_hessian(&hess)?;
            trace_worst = trace_worst.max(zeta.trace_identity_residual(-hess.trace()));

            let mut h = DMatrix::<Complex64>::zeros(m, m);
            for j in 0..m {
                h[(j, j)] = rng.random_range(-1.0..1.0).into();
                for k in j + 1..m {
                    let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    h[(j, k)] = z;
                    h[(k, j)] = z.conj();
                }
            }
            let primitive = HermitianForm::new(h)?.trace_free_part();
            square_worst = square_worst.max(primitive.primitive_square_identity_residual()?);
        }
        checks.push(Check::at_most(format!("trace_identity_m{m}"), trace_worst, 1e-12, "exact: tr dd^c u = -Laplacian u"));
        checks.push(Check::at_most(
            format!("primitive_square_identity_m{m}"),
            square_worst,
            1e-12,
            "exact: zeta^2 wedge omega^(m-2) = -|zeta|^2/(2m(m-1)) omega^m",
        ));
        pointwise.push(json!({"m": m, "trace_residual": trace_worst, "primitive_square_residual": square_worst}));
    }

    let grid = r_grid(cfg)?;
    let mut integral = Vec::new();
    for &(n, g) in &p.laplacian_cases {
        let (value, exact) = delta_radius_identity(n, g, &grid)?;
        checks.push(Check::relative(
            format!("delta_radius_identity_n{n}_g{g}"),
            value,
            exact,
            1e-6,
            "exact: (n-2) Omega_(n-1) / |G|",
        ));
        integral.push(json!({"n": n, "group_order": g, "integral": value, "exact": exact}));
    }
    let results = json!({"pointwise": pointwise, "laplacian_integral": integral});
    Ok(CommandOutput { parameters: echo(&p), results, checks, profile: None })
}

// ---------------------------------------------------------------- norms

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsParams {
    /// The measured function is `ρ^p` with `ρ = √(1+r²)`.
    pub p: f64,
    pub beta: f64,
    pub k: usize,
    pub alpha: f64,
    pub decay_window_r: (f64, f64),
}

impl Default for NormsParams {
    fn default() -> Self {
        Self { p: -3.0, beta: -2.0, k: 2, alpha: 0.5, decay_window_r: (1e2, 1e3) }
    }
}

pub(crate) fn norms(cfg: &JobConfig) -> Result<CommandOutput> {
    let p: NormsParams = cfg.parameters()?;
    let grid = r_grid(cfg)?;
    let rho = smoothed_radius(&grid);
    let f = rho.map(|v| v.powf(p.p))?;
    let report = weighted_ck_norm(&f, &rho, p.beta, p.k, p.alpha)?;
    let mut checks = Vec::new();
    let mut decays = Vec::new();
    for j in 0..=p.k.min(2) {
        let d = decay_order(&f, j, p.decay_window_r)?;
        checks.push(Check::relative(format!("decay_k{j}"), d, p.p - j as f64, cfg.tolerances.fit, "exact: rho^p decays like r^(p-k)"));
        decays.push(d);
    }
    if p.p <= p.beta {
        checks.push(Check::at_most(
            "bounded_on_grid",
            if report.grows_at_outer_edge { 1.0 } else { 0.0 },
            0.0,
            "rho^p lies in C_beta when p <= beta",
        ));
        // sup ρ^{p−β} over r ≥ r_min is attained at the inner edge
        let exact = rho.values()[0].powf(p.p - p.beta);
        checks.push(Check::relative("weighted_sup_k0", report.per_order_sups[0], exact, 1e-12, "exact: sup rho^(p-beta)"));
    }
    let results = json!({"norm": report, "decay_orders": decays});
    let profile = Profile::new(&["r", "rho", "f"], vec![grid.r_values(), rho.values().to_vec(), f.values().to_vec()]);
    Ok(CommandOutput { parameters: echo(&p), results, checks, profile: Some(profile) })
}

/// Every parameter of `command` at its default value.
pub fn default_parameters(command: crate::config::Command) -> Value {
    use crate::config::Command as C;
    match command {
        C::Calabi => echo(&CalabiParams::default()),
        C::Poisson => echo(&PoissonParams::default()),
        C::MaSolve => echo(&MaSolveParams::default()),
        C::Pipeline => echo(&PipelineParams::default()),
        C::Quotient => echo(&QuotientParams::default()),
        C::Identities => echo(&IdentitiesParams::default()),
        C::Norms => echo(&NormsParams::default()),
    }
}
