mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exact_divide_round_trips(p in poly_strategy(3, 3, 6), q in nonzero_poly(2, 2, 4)) {
        prop_divide_roundtrip(&p, &q)?;
    }

    #[test]
    fn division_failure_is_honest(p in poly_strategy(3, 3, 6), q in nonconstant_poly(2, 2, 4)) {
        prop_division_failure_is_honest(&p, &q)?;
    }

    #[test]
    fn vanishing_order_counts_planted_powers(
        p in nonzero_poly(2, 2, 4),
        q in nonconstant_poly(1, 2, 3),
        k in 0u32..=3,
    ) {
        prop_vanishing_order_shift(&p, &q, k)?;
    }

    #[test]
    fn multiplicity_zero_iff_nonvanishing(p in nonzero_poly(3, 3, 6), a in small_rational(), b in small_rational()) {
        prop_multiplicity_zero_iff_nonvanishing(&p, &[a, b])?;
    }

    #[test]
    fn multiplicity_at_planted_zero_is_positive(p in nonconstant_poly(3, 3, 6), a in small_rational(), b in small_rational()) {
        let pt = [a, b];
        let shifted = &p - &pentaheat_core::poly::Poly::constant(&xy(), p.eval(&pt));
        prop_assert!(shifted.multiplicity_at_point(&pt).unwrap() >= 1);
        prop_multiplicity_zero_iff_nonvanishing(&shifted, &pt)?;
    }

    #[test]
    fn gcd_against_brute_force(f in nonzero_poly(1, 1, 3), a in nonzero_poly(2, 1, 4), b in nonzero_poly(1, 2, 4)) {
        prop_gcd(&f, &a, &b, &trial_factors())?;
    }

    #[test]
    fn resultant_vanishes_on_common_zeros(
        p in nonconstant_poly(2, 2, 5),
        q in nonconstant_poly(2, 2, 5),
        a in small_rational(),
        b in small_rational(),
        x1 in small_rational(),
    ) {
        prop_resultant(&p, &q, &[a, b], &x1)?;
    }

    #[test]
    fn bidegree_is_additive(p in nonzero_poly(3, 3, 5), q in nonzero_poly(3, 3, 5)) {
        prop_bidegree_additive(&p, &q)?;
    }

    #[test]
    fn univariate_division_and_gcd(
        a in prop::collection::vec(-9i64..=9, 1..8),
        b in prop::collection::vec(-9i64..=9, 1..6),
    ) {
        prop_univariate_division(&a, &b)?;
    }

    #[test]
    fn char_poly_invariants(m in matrix5(), (s, s_inv) in unimodular5()) {
        prop_char_poly(&m, &s, &s_inv)?;
    }
}

#[test]
fn spec_examples_for_division_and_order() {
    let v = xy();
    let e = |s: &str| pentaheat_core::poly::Poly::expr(&v, s);
    assert_eq!(e("x^2*y^2 - 1").exact_divide(&e("x*y - 1")).unwrap(), e("x*y + 1"));
    assert!(e("x*y - 1").exact_divide(&e("x + y")).is_err());
    assert_eq!(e("(x*y - 1)^3*(x + 1)").vanishing_order(&e("x*y - 1")).unwrap(), 3);
    assert_eq!(e("x + 1").vanishing_order(&e("x*y - 1")).unwrap(), 0);
}
