use proptest::prelude::*;

use progeny_core::rational::{rat, ExactRational};
use progeny_core::series::PowerSeries;

const ORDER: usize = 7;

fn small_rat() -> impl Strategy<Value = ExactRational> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn nonzero_rat() -> impl Strategy<Value = ExactRational> {
    small_rat().prop_filter("nonzero", |r| !r.is_zero())
}

fn series() -> impl Strategy<Value = PowerSeries> {
    prop::collection::vec(small_rat(), 1..=ORDER + 1)
        .prop_map(|c| PowerSeries::from_coeffs_with_order(&c, ORDER))
}

fn unit_series() -> impl Strategy<Value = PowerSeries> {
    (nonzero_rat(), series()).prop_map(|(c, s)| {
        let mut coeffs = s.coeffs();
        coeffs[0] = c;
        PowerSeries::from_coeffs_with_order(&coeffs, ORDER)
    })
}

/// Constant term 1.
fn one_series() -> impl Strategy<Value = PowerSeries> {
    series().prop_map(|s| s.add_constant(&(ExactRational::one() - s.coeff(0))))
}

/// `s(0) = 0`, `s'(0) != 0`.
fn invertible_series() -> impl Strategy<Value = PowerSeries> {
    (nonzero_rat(), series()).prop_map(|(c, s)| {
        let mut coeffs = s.coeffs();
        coeffs[0] = ExactRational::zero();
        coeffs[1] = c;
        PowerSeries::from_coeffs_with_order(&coeffs, ORDER)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in series(), b in series(), c in series()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&PowerSeries::one(ORDER)), a.clone());
    }

    #[test]
    fn div_then_mul_round_trips(s in series(), t in unit_series()) {
        prop_assert_eq!(s.div(&t).unwrap().mul(&t), s.clone());
        prop_assert_eq!(t.recip().unwrap().mul(&t), PowerSeries::one(ORDER));
    }

    #[test]
    fn reciprocal_stream_matches_recip(t in unit_series()) {
        let streamed: Vec<_> = t.recip_stream().unwrap().take(ORDER + 1).collect();
        prop_assert_eq!(streamed, t.recip().unwrap().coeffs());
    }

    #[test]
    fn comp_inverse_is_two_sided(s in invertible_series()) {
        let g = s.comp_inverse().unwrap();
        let u = PowerSeries::variable(ORDER);
        prop_assert_eq!(s.compose(&g).unwrap(), u.clone());
        prop_assert_eq!(g.compose(&s).unwrap(), u);
        prop_assert_eq!(g, s.comp_inverse_lagrange().unwrap());
    }

    #[test]
    fn pow_rational_adds_exponents(s in one_series(), e1 in small_rat(), e2 in small_rat()) {
        let lhs = s.pow_rational(&(&e1 + &e2)).unwrap();
        let rhs = s.pow_rational(&e1).unwrap().mul(&s.pow_rational(&e2).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn integer_powers_agree(s in one_series(), k in 0u32..5) {
        prop_assert_eq!(s.pow_rational(&ExactRational::from(k as i64)).unwrap(), s.powu(k));
    }

    #[test]
    fn exp_inverts_log(s in one_series()) {
        prop_assert_eq!(s.log().unwrap().exp().unwrap(), s);
    }

    #[test]
    fn derivative_inverts_integral(s in series()) {
        let back = s.integrate().derivative();
        prop_assert_eq!(back.truncate(ORDER), s);
    }

    #[test]
    fn json_round_trip(s in series()) {
        let text = serde_json::to_string(&s).unwrap();
        let back: PowerSeries = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn rational_text_round_trip(r in small_rat()) {
        let back: ExactRational = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }
}
