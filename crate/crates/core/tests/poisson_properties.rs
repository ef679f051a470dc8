use ale_core::poisson::{solve_poisson, PoissonProblem};
use ale_core::radial::{smoothed_radius, weighted_ck_norm, ClosedForm, RadialFunction, RadialGrid, Variable};
use proptest::prelude::*;

fn combo(grid: &RadialGrid, a: f64, b: f64) -> RadialFunction {
    RadialFunction::closed_form(
        grid,
        ClosedForm::new("a f + b g", Variable::R, move |r, k| {
            let s = 1.0 + r * r;
            (k == 0).then(|| a * 8.0 * s.powi(-3) + b * s.powi(-4))
        }),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solutions_are_linear_in_data(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = RadialGrid::log_r(1e-3, 1e4, 600).unwrap();
        let solve = |x: f64, y: f64| {
            let p = PoissonProblem::new(4, 1, combo(&g, x, y), -6.0).unwrap();
            solve_poisson(&p).unwrap().u.into_values()
        };
        let (uf, ug, uc) = (solve(1.0, 0.0), solve(0.0, 1.0), solve(a, b));
        let scale = uc.iter().chain(&uf).fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..uc.len() {
            prop_assert!((uc[i] - (a * uf[i] + b * ug[i])).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn remainder_decays_at_shifted_weight() {
    let g = RadialGrid::log_r(1e-3, 1e6, 1500).unwrap();
    // v also carries A(r^{2−n} − ρ^{2−n}) ~ r^{−n}, so the weight stays above −n−2
    for (beta, n) in [(-5.0, 4), (-5.5, 4), (-7.0, 6), (-7.5, 6)] {
        let f = RadialFunction::from_fn_r(&g, |r| (1.0 + r * r).powf(0.5 * beta) * (2.0 + 1.0 / (1.0 + r))).unwrap();
        let sol = solve_poisson(&PoissonProblem::new(n, 1, f, beta).unwrap()).unwrap();
        let dv = sol.measured_decay_v.expect("nonzero remainder");
        assert!(dv <= beta + 2.0 + 0.1, "n={n} β={beta}: {dv}");
    }
}

#[test]
fn weighted_estimate_constant_stays_bounded() {
    let g = RadialGrid::log_r(1e-3, 1e5, 1200).unwrap();
    let rho = smoothed_radius(&g);
    let beta = -3.0;
    let ratio = |j: usize| {
        let freq = j as f64;
        let f = RadialFunction::from_fn_r(&g, |r| {
            let s = 1.0 + r * r;
            s.powf(0.5 * beta) * (1.0 + 0.5 * (freq * r.atan()).sin())
        })
        .unwrap();
        let u = solve_poisson(&PoissonProblem::new(4, 1, f.clone(), beta).unwrap()).unwrap().u;
        let nu = weighted_ck_norm(&u, &rho, beta + 2.0, 0, 0.5).unwrap().ck_norm;
        let nf = weighted_ck_norm(&f, &rho, beta, 0, 0.5).unwrap().ck_norm;
        nu / nf
    };
    let small: f64 = (1..=4).map(ratio).fold(0.0, f64::max);
    let large: f64 = (1..=12).map(ratio).fold(0.0, f64::max);
    assert!(small.is_finite() && small > 0.0);
    assert!(large <= 1.5 * small, "{small} {large}");
}
