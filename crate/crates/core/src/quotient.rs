//! Cyclic subgroups of U(m) acting diagonally on ℂᵐ, with the freeness,
//! special-unitary, age and terminality tests used to classify quotient
//! singularities.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("complex dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("group order must be at least 1")]
    Order,
    #[error("expected {expected} exponents, got {got}")]
    ExponentCount { expected: usize, got: usize },
    #[error("exponent {value} outside [0, {k})")]
    ExponentRange { value: u64, k: u64 },
    #[error("identity element has no age in this test")]
    IdentityHasNoAge,
    #[error("criterion applies to free SU actions")]
    NotFreeSpecialUnitary,
    #[error("symplectic pairing needs even dimension, got {0}")]
    OddDimension(usize),
}

/// The group generated by `z_j ↦ e^{2πi a_j/k} z_j`, stored in reduced form so
/// that `k` is the true order of the generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawQuotient", into = "RawQuotient")]
pub struct CyclicQuotient {
    m: usize,
    k: u64,
    exponents: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawQuotient {
    m: usize,
    k: u64,
    exponents: Vec<u64>,
}

impl TryFrom<RawQuotient> for CyclicQuotient {
    type Error = QuotientError;
    fn try_from(raw: RawQuotient) -> Result<Self, Self::Error> {
        CyclicQuotient::new(raw.m, raw.k, raw.exponents)
    }
}

impl From<CyclicQuotient> for RawQuotient {
    fn from(q: CyclicQuotient) -> Self {
        RawQuotient { m: q.m, k: q.k, exponents: q.exponents }
    }
}

impl CyclicQuotient {
    /// Validates and reduces: `(k, a)` becomes `(k/g, a/g)` with `g = gcd(k, a_1, …, a_m)`.
    pub fn new(m: usize, k: u64, exponents: Vec<u64>) -> Result<Self, QuotientError> {
        if m < 2 {
            return Err(QuotientError::Dimension(m));
        }
        if k == 0 {
            return Err(QuotientError::Order);
        }
        if exponents.len() != m {
            return Err(QuotientError::ExponentCount { expected: m, got: exponents.len() });
        }
        if let Some(&value) = exponents.iter().find(|&&a| a >= k) {
            return Err(QuotientError::ExponentRange { value, k });
        }
        let g = exponents.iter().fold(k, |g, &a| g.gcd(&a));
        Ok(Self { m, k: k / g, exponents: exponents.iter().map(|a| a / g).collect() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> u64 {
        self.k
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Whether no nontrivial element fixes a nonzero vector.
    pub fn acts_freely(&self) -> bool {
        self.exponents.iter().all(|a| a.gcd(&self.k) == 1)
    }

    /// Whether the generator has determinant one.
    pub fn in_special_unitary(&self) -> bool {
        self.exponents.iter().sum::<u64>() % self.k == 0
    }

    /// `Σ_j frac(l a_j / k)` for the element `γ^l`.
    pub fn age(&self, power: u64) -> Result<Ratio<u64>, QuotientError> {
        let l = power % self.k;
        if l == 0 {
            return Err(QuotientError::IdentityHasNoAge);
        }
        let num: u64 = self.exponents.iter().map(|a| (l * a) % self.k).sum();
        Ok(Ratio::new(num, self.k))
    }

    /// Reid's criterion: every nontrivial element has age strictly above one.
    pub fn is_terminal(&self) -> Result<bool, QuotientError> {
        if !(self.acts_freely() && self.in_special_unitary()) {
            return Err(QuotientError::NotFreeSpecialUnitary);
        }
        let one = Ratio::from_integer(1);
        for l in 1..self.k {
            if self.age(l)? <= one {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether the exponents split into pairs with `a_i + a_j ≡ 0 (mod k)`.
    pub fn satisfies_symplectic_pairing(&self) -> Result<bool, QuotientError> {
        if self.m % 2 == 1 {
            return Err(QuotientError::OddDimension(self.m));
        }
        let mut used = vec![false; self.m];
        Ok(self.pair_from(&mut used))
    }

    fn pair_from(&self, used: &mut [bool]) -> bool {
        let Some(i) = used.iter().position(|u| !u) else {
            return true;
        };
        used[i] = true;
        for j in i + 1..self.m {
            if !used[j] && (self.exponents[i] + self.exponents[j]).is_multiple_of(self.k) {
                used[j] = true;
                if self.pair_from(used) {
                    return true;
                }
                used[j] = false;
            }
        }
        used[i] = false;
        false
    }

    /// All actions of exact order `k` on ℂᵐ, one per sorted exponent tuple.
    pub fn all_of_order(m: usize, k: u64) -> Vec<CyclicQuotient> {
        let mut out = Vec::new();
        let mut current = vec![0; m];
        collect_sorted(m, k, 0, 0, &mut current, &mut out);
        out
    }
}

fn collect_sorted(
    m: usize,
    k: u64,
    pos: usize,
    min: u64,
    current: &mut Vec<u64>,
    out: &mut Vec<CyclicQuotient>,
) {
    if pos == m {
        if current.iter().fold(k, |g, a| g.gcd(a)) == 1 {
            out.push(CyclicQuotient { m, k, exponents: current.clone() });
        }
        return;
    }
    for a in min..k {
        current[pos] = a;
        collect_sorted(m, k, pos + 1, a, current, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn q(m: usize, k: u64, a: &[u64]) -> CyclicQuotient {
        CyclicQuotient::new(m, k, a.to_vec()).unwrap()
    }

    fn frees_by_eigenvalues(q: &CyclicQuotient) -> bool {
        let k = q.order();
        (1..k).all(|l| {
            q.exponents().iter().all(|&a| {
                let theta = 2.0 * std::f64::consts::PI * (l * a) as f64 / k as f64;
                (Complex64::from_polar(1.0, theta) - 1.0).norm() > 1e-9
            })
        })
    }

    #[test]
    fn freeness_examples() {
        assert!(q(2, 2, &[1, 1]).acts_freely());
        assert!(q(2, 1, &[0, 0]).acts_freely());
        assert!(!q(2, 4, &[1, 2]).acts_freely());
    }

    #[test]
    fn special_unitary_examples() {
        assert!(q(2, 2, &[1, 1]).in_special_unitary());
        assert!(q(3, 3, &[1, 1, 1]).in_special_unitary());
        assert!(!q(2, 3, &[1, 1]).in_special_unitary());
    }

    #[test]
    fn age_examples() {
        assert_eq!(q(2, 2, &[1, 1]).age(1).unwrap(), Ratio::from_integer(1));
        assert_eq!(q(4, 2, &[1, 1, 1, 1]).age(1).unwrap(), Ratio::from_integer(2));
        assert_eq!(q(3, 3, &[1, 1, 1]).age(2).unwrap(), Ratio::from_integer(2));
        assert_eq!(q(3, 3, &[1, 1, 1]).age(3), Err(QuotientError::IdentityHasNoAge));
    }

    #[test]
    fn terminality_examples() {
        assert_eq!(q(4, 2, &[1, 1, 1, 1]).is_terminal(), Ok(true));
        assert_eq!(q(2, 2, &[1, 1]).is_terminal(), Ok(false));
        assert_eq!(q(3, 3, &[1, 1, 1]).is_terminal(), Ok(false));
        assert_eq!(q(2, 3, &[1, 1]).is_terminal(), Err(QuotientError::NotFreeSpecialUnitary));
        assert_eq!(q(2, 1, &[0, 0]).is_terminal(), Ok(true));
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(q(4, 2, &[1, 1, 1, 1]).satisfies_symplectic_pairing(), Ok(true));
        assert_eq!(q(2, 5, &[1, 4]).satisfies_symplectic_pairing(), Ok(true));
        assert_eq!(q(4, 3, &[1, 1, 1, 1]).satisfies_symplectic_pairing(), Ok(false));
        assert_eq!(q(4, 5, &[1, 2, 4, 3]).satisfies_symplectic_pairing(), Ok(true));
        assert_eq!(
            q(3, 3, &[1, 1, 1]).satisfies_symplectic_pairing(),
            Err(QuotientError::OddDimension(3))
        );
    }

    #[test]
    fn construction_reduces_and_validates() {
        let r = q(2, 6, &[2, 4]);
        assert_eq!((r.order(), r.exponents()), (3, &[1, 2][..]));
        assert_eq!(q(3, 4, &[0, 0, 0]).order(), 1);
        assert!(CyclicQuotient::new(2, 3, vec![3, 1]).is_err());
        assert!(CyclicQuotient::new(1, 3, vec![1]).is_err());
        assert!(CyclicQuotient::new(2, 3, vec![1]).is_err());
    }

    #[test]
    fn json_round_trip_normalizes() {
        let parsed: CyclicQuotient =
            serde_json::from_str(r#"{"m":2,"k":4,"exponents":[2,2]}"#).unwrap();
        assert_eq!(parsed, q(2, 2, &[1, 1]));
        let again: CyclicQuotient =
            serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
        assert_eq!(again, parsed);
    }

    #[test]
    fn freeness_agrees_with_eigenvalue_enumeration() {
        for m in 2..=3 {
            for k in 1..=30 {
                for g in CyclicQuotient::all_of_order(m, k) {
                    assert_eq!(g.acts_freely(), frees_by_eigenvalues(&g), "{g:?}");
                }
            }
        }
    }

    fn arb_quotient() -> impl Strategy<Value = CyclicQuotient> {
        (2usize..=6, 1u64..=50).prop_flat_map(|(m, k)| {
            proptest::collection::vec(0..k, m)
                .prop_map(move |a| CyclicQuotient::new(m, k, a).unwrap())
        })
    }

    proptest! {
        #[test]
        fn freeness_matches_brute_force(g in arb_quotient()) {
            prop_assert_eq!(g.acts_freely(), frees_by_eigenvalues(&g));
        }

        #[test]
        fn freeness_invariant_under_permutation_and_negation(g in arb_quotient(), rot in 0usize..6) {
            let k = g.order();
            let mut permuted = g.exponents().to_vec();
            let len = permuted.len();
            permuted.rotate_left(rot % len);
            let negated: Vec<u64> = g.exponents().iter().map(|a| (k - a) % k).collect();
            let p = CyclicQuotient::new(g.m(), k, permuted).unwrap();
            let n = CyclicQuotient::new(g.m(), k, negated).unwrap();
            prop_assert_eq!(p.acts_freely(), g.acts_freely());
            prop_assert_eq!(n.acts_freely(), g.acts_freely());
        }

        #[test]
        fn complementary_ages_sum_to_dimension(g in arb_quotient()) {
            prop_assume!(g.acts_freely() && g.order() > 1);
            for l in 1..g.order() {
                let total = g.age(l).unwrap() + g.age(g.order() - l).unwrap();
                prop_assert_eq!(total, Ratio::from_integer(g.m() as u64));
            }
        }

        #[test]
        fn symplectic_free_actions_are_terminal(
            half in 2usize..=4,
            k in 2u64..=40,
            seeds in proptest::collection::vec(1u64..1000, 4),
        ) {
            let mut a = Vec::new();
            for s in seeds.iter().take(half) {
                let x = 1 + s % (k - 1);
                prop_assume!(x.gcd(&k) == 1);
                a.push(x);
                a.push(k - x);
            }
            let g = CyclicQuotient::new(2 * half, k, a).unwrap();
            prop_assert!(g.acts_freely() && g.in_special_unitary());
            prop_assert_eq!(g.satisfies_symplectic_pairing(), Ok(true));
            prop_assert_eq!(g.is_terminal(), Ok(true));
        }
    }
}
