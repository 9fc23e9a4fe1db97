//! Property tests: universal invariants checked on randomly generated
//! inputs, with the recurrence engine as the oracle throughout.

use num_bigint::BigInt;
use proptest::collection::vec;
use proptest::prelude::*;

use gfib_core::closed_form::{b_closed, b_piecewise, binomial, f_closed, s_closed};
use gfib_core::engine::{b_via_s, generate, index_decomp, recompose, SequenceSpec};
use gfib_core::padic::{s2_u64, v2_binomial, v2_or_infinite};
use gfib_core::valuation::{applicable_f_rules, applicable_rules};

fn spec_strategy(k_max: usize) -> impl Strategy<Value = SequenceSpec> {
    (2..=k_max).prop_flat_map(|k| {
        vec(-9i64..=9, k).prop_map(move |init| {
            SequenceSpec::new(k, init.into_iter().map(BigInt::from).collect())
                .expect("k >= 2 and matching init length")
        })
    })
}

proptest! {
    /// Every term is the init-weighted sum of basis terms.
    #[test]
    fn recomposition_is_exact(spec in spec_strategy(6), n in 0u64..=120) {
        let w = generate(&spec, n).unwrap();
        let total = recompose(spec.k(), &spec.decompose(), n).unwrap();
        prop_assert_eq!(&total, w.get(n as i64).unwrap());
    }

    /// The all-ones closed form equals the engine.
    #[test]
    fn s_closed_matches_engine(k in 2usize..=8, n in 0u64..=200) {
        let w = generate(&SequenceSpec::ones(k).unwrap(), n).unwrap();
        prop_assert_eq!(&s_closed(k, n).unwrap(), w.get(n as i64).unwrap());
    }

    /// Two independent routes to a basis term agree.
    #[test]
    fn b_closed_matches_quotient_route(k in 2usize..=8, sel in 0usize..8, n_off in 0u64..=150) {
        let j = sel % k;
        let n = j as u64 + 1 + n_off;
        prop_assert_eq!(b_closed(k, j, n).unwrap(), b_via_s(k, j, n as i64).unwrap());
    }

    /// The general closed form is linear over the basis closed forms.
    #[test]
    fn f_closed_is_linear(spec in spec_strategy(6), n_off in 0u64..=120) {
        let k = spec.k();
        let n = k as u64 + n_off;
        let by_parts: BigInt = spec
            .init()
            .iter()
            .enumerate()
            .map(|(j, c)| c * b_closed(k, j, n).unwrap())
            .sum();
        prop_assert_eq!(f_closed(&spec, n).unwrap(), by_parts);
    }

    /// Piecewise values agree with the full closed form on their bands.
    #[test]
    fn piecewise_matches_closed(k in 2usize..=12, sel in 0usize..12, band in 0u64..=30) {
        let j = sel % k;
        let n = k as u64 + band.min((2 * k + j + 2) as u64);
        prop_assert_eq!(b_piecewise(k, j, n).unwrap(), b_closed(k, j, n).unwrap());
    }

    /// Digit-sum valuation of a binomial equals the valuation of the
    /// materialized coefficient.
    #[test]
    fn binomial_valuation_matches_exact(m in 0u64..=500, raw in 0u64..=500) {
        let n = raw.min(m);
        let exact = BigInt::from(binomial(m, n));
        prop_assert_eq!(
            v2_or_infinite(&exact).finite().unwrap(),
            v2_binomial(m, n).unwrap()
        );
    }

    /// v2 is additive over products of nonzero integers.
    #[test]
    fn v2_is_additive(x in prop::num::i64::ANY, y in prop::num::i64::ANY) {
        prop_assume!(x != 0 && y != 0);
        let (bx, by) = (BigInt::from(x), BigInt::from(y));
        prop_assert_eq!(
            v2_or_infinite(&(&bx * &by)),
            v2_or_infinite(&bx) + v2_or_infinite(&by)
        );
    }

    /// Digit sum agrees with the naive halving loop and stays within its
    /// bounds: zero exactly at zero, otherwise between 1 and the bit length.
    #[test]
    fn s2_matches_naive(n in prop::num::u64::ANY) {
        let mut m = n;
        let mut s = 0;
        while m > 0 {
            s += m & 1;
            m >>= 1;
        }
        prop_assert_eq!(s2_u64(n), s);
        if n == 0 {
            prop_assert_eq!(s2_u64(n), 0);
        } else {
            prop_assert!(s2_u64(n) >= 1);
            prop_assert!(s2_u64(n) <= 64 - u64::from(n.leading_zeros()));
        }
    }

    /// The canonical decomposition reconstructs n and keeps r in range.
    #[test]
    fn index_decomp_is_canonical(k in 2usize..=16, n in 0u64..=1_000_000) {
        let d = index_decomp(k, n);
        prop_assert!(d.r >= -1 && d.r <= k as i64 - 1);
        prop_assert_eq!(d.a as i64 * (k as i64 + 1) + d.r, n as i64);
    }

    /// Every applicable basis-term rule predicts the engine's valuation.
    #[test]
    fn basis_rules_are_sound(k in 2usize..=6, sel in 0usize..6, n in 0u64..=1200) {
        let j = sel % k;
        let w = generate(&SequenceSpec::basis(k, j).unwrap(), n).unwrap();
        let truth = v2_or_infinite(w.get(n as i64).unwrap());
        for (rule, value) in applicable_rules(k, j, n).unwrap() {
            prop_assert_eq!(value, truth, "rule {}", rule);
        }
    }

    /// Every applicable general-sequence rule predicts the engine's valuation.
    #[test]
    fn general_rules_are_sound(spec in spec_strategy(5), n_off in 0u64..=400) {
        let k = spec.k();
        let n = k as u64 + n_off;
        let w = generate(&spec, n).unwrap();
        let truth = v2_or_infinite(w.get(n as i64).unwrap());
        for (rule, value) in applicable_f_rules(&spec, n).unwrap() {
            prop_assert_eq!(value, truth, "rule {}", rule);
        }
    }
}
