use ale_core::radial::{decay_order, smoothed_radius, weighted_ck_norm, ClosedForm, RadialFunction, RadialGrid, Variable};
use proptest::prelude::*;

fn wide_rho(grid: &RadialGrid) -> RadialFunction {
    RadialFunction::closed_form(
        grid,
        ClosedForm::new("sqrt(4+r^2)", Variable::R, |r, k| {
            let s = (4.0 + r * r).sqrt();
            match k {
                0 => Some(s),
                1 => Some(r / s),
                2 => Some(4.0 / (s * s * s)),
                _ => None,
            }
        }),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radius_change_gives_equivalent_norms(p in 0.5f64..4.0, beta in -5.0f64..-0.5, k in 0usize..=2) {
        let g = RadialGrid::log_r(1e-2, 1e3, 300).unwrap();
        let f = RadialFunction::from_fn_r(&g, |r| (1.0 + r * r).powf(-0.5 * p) * (1.0 + 0.3 * r.ln().sin())).unwrap();
        let a = weighted_ck_norm(&f, &smoothed_radius(&g), beta, k, 0.5).unwrap().ck_norm;
        let b = weighted_ck_norm(&f, &wide_rho(&g), beta, k, 0.5).unwrap().ck_norm;
        let bound = 2f64.powf(beta.abs() + k as f64);
        prop_assert!(a / b <= bound && b / a <= bound, "{a} {b} {bound}");
    }

    #[test]
    fn decay_orders_add_under_products(p in 0.5f64..4.0, q in 0.5f64..4.0) {
        let g = RadialGrid::log_r(1.0, 1e4, 400).unwrap();
        let f = RadialFunction::from_fn_r(&g, |r| (1.0 + r * r).powf(-0.5 * p)).unwrap();
        let h = RadialFunction::from_fn_r(&g, |r| 3.0 * (2.0 + r * r).powf(-0.5 * q)).unwrap();
        let fh = f.zip_with(&h, |a, b| a * b).unwrap();
        let w = (1e2, 1e3);
        let (df, dh, dfh) = (decay_order(&f, 0, w).unwrap(), decay_order(&h, 0, w).unwrap(), decay_order(&fh, 0, w).unwrap());
        prop_assert!((dfh - (df + dh)).abs() <= 0.02 * (df + dh).abs());
    }
}

#[test]
fn lipschitz_limit_of_holder_seminorm() {
    let g = RadialGrid::log_r(1e-2, 1e3, 2000).unwrap();
    let rho = smoothed_radius(&g);
    for beta in [-3.0, -1.5, -0.5] {
        let f = RadialFunction::from_fn_r(&g, |r| (1.0 + r * r).powf(0.5 * beta)).unwrap();
        let holder = weighted_ck_norm(&f, &rho, beta, 0, 0.999).unwrap().holder_seminorm;
        let first = weighted_ck_norm(&f, &rho, beta, 1, 0.5).unwrap().per_order_sups[1];
        assert!(holder <= 2.0 * first && first <= 2.0 * holder, "β={beta}: {holder} vs {first}");
    }
}
