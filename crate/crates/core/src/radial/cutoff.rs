/// Smooth step `μ(s − shift)` with `μ = 1` for `s ≤ −1` and `μ = 0` for `s ≥ 0`.
///
/// Built as `μ(s) = S(−s)` with `S(x) = ψ(x)/(ψ(x) + ψ(1−x))`, `ψ(y) = e^{−1/y}`
/// for `y > 0` and `ψ = 0` otherwise, so every derivative vanishes at the joins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub shift: f64,
}

/// The cutoff shifted so that the transition happens on `[shift − 1, shift]`.
pub fn cutoff(t_shift: f64) -> Cutoff {
    Cutoff { shift: t_shift }
}

/// `ψ, ψ′, ψ″` at `y`.
fn psi(y: f64) -> [f64; 3] {
    if y <= 0.0 {
        return [0.0; 3];
    }
    let p = (-1.0 / y).exp();
    let y2 = y * y;
    [p, p / y2, p * (1.0 - 2.0 * y) / (y2 * y2)]
}

/// `S, S′, S″` at `x`.
fn step(x: f64) -> [f64; 3] {
    if x <= 0.0 {
        return [0.0; 3];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let [p, p1, p2] = psi(x);
    let [q, q1, q2] = psi(1.0 - x);
    let (q1, q2) = (-q1, q2);
    let d = p + q;
    let d1 = p1 + q1;
    let d2 = p2 + q2;
    let num1 = p1 * d - p * d1;
    [p / d, num1 / (d * d), (p2 * d - p * d2) / (d * d) - 2.0 * d1 * num1 / (d * d * d)]
}

impl Cutoff {
    pub fn value(&self, s: f64) -> f64 {
        step(self.shift - s)[0]
    }

    /// `k`-th derivative in `s` for `k ≤ 2`.
    pub fn derivative(&self, s: f64, k: usize) -> Option<f64> {
        let st = step(self.shift - s);
        match k {
            0 => Some(st[0]),
            1 => Some(-st[1]),
            2 => Some(st[2]),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plateau_values() {
        let mu = cutoff(0.0);
        assert_eq!(mu.value(-2.0), 1.0);
        assert_eq!(mu.value(-1.0), 1.0);
        assert_eq!(mu.value(0.0), 0.0);
        assert_eq!(mu.value(0.5), 0.0);
        let mid = mu.value(-0.5);
        assert!((mid - 0.5).abs() < 1e-15);
        assert!(mu.derivative(-0.5, 1).unwrap() < 0.0);
    }

    #[test]
    fn shift_translates_the_transition() {
        let mu = cutoff(10.0);
        assert_eq!(mu.value(8.9), 1.0);
        assert_eq!(mu.value(10.0), 0.0);
        assert!((mu.value(9.3) - cutoff(0.0).value(-0.7)).abs() < 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_central_differences() {
        let mu = cutoff(0.0);
        let h = 1e-5;
        for i in 1..40 {
            let s = -1.0 + i as f64 / 40.0;
            let fd1 = (mu.value(s + h) - mu.value(s - h)) / (2.0 * h);
            let fd2 = (mu.derivative(s + h, 1).unwrap() - mu.derivative(s - h, 1).unwrap())
                / (2.0 * h);
            assert!((fd1 - mu.derivative(s, 1).unwrap()).abs() < 1e-7, "s={s}");
            assert!((fd2 - mu.derivative(s, 2).unwrap()).abs() < 1e-5, "s={s}");
        }
    }

    #[test]
    fn derivatives_vanish_near_the_joins() {
        let mu = cutoff(0.0);
        for s in [-1.0 + 1e-3, -1e-3] {
            assert!(mu.derivative(s, 1).unwrap().abs() < 1e-300);
            assert!(mu.derivative(s, 2).unwrap().abs() < 1e-300);
        }
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(a in -1.5f64..0.5, b in -1.5f64..0.5) {
            let mu = cutoff(0.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(mu.value(lo) >= mu.value(hi));
            prop_assert!((0.0..=1.0).contains(&mu.value(a)));
        }

        #[test]
        fn symmetric_about_midpoint(x in 0.0f64..0.5) {
            let mu = cutoff(0.0);
            prop_assert!((mu.value(-0.5 - x) + mu.value(-0.5 + x) - 1.0).abs() < 1e-14);
        }
    }
}
