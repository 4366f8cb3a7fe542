use std::sync::Arc;

use cantor_dioph_core::arith::cf::determinant;
use cantor_dioph_core::arith::{convergents, decide_power_bound, ApproximableReal, QuadraticSurd};
use cantor_dioph_core::digits::{expand, MissingDigitSet};
use cantor_dioph_core::ifs::address::compose_word;
use cantor_dioph_core::ifs::{default_selector, eval_prefix, periodic_fixed_point, rational_to_address, RationalIFS};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn word(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..2, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn periodic_address_round_trip(pre in word(0..6), period in word(1..6)) {
        let ifs = RationalIFS::middle_third();
        let x = periodic_fixed_point(&ifs, &pre, &period).unwrap();
        let addr = rational_to_address(&ifs, &x, default_selector(&ifs)).unwrap();
        prop_assert_eq!(periodic_fixed_point(&ifs, &addr.pre, &addr.period).unwrap(), x);
    }

    #[test]
    fn prefix_evaluation_composes(w1 in word(0..8), w2 in word(0..8), seed in 0i64..9) {
        let ifs = RationalIFS::middle_third();
        let s = vec![r(seed, 9)];
        let mut w = w1.clone();
        w.extend(&w2);
        let inner = eval_prefix(&ifs, &w2, &s).unwrap();
        prop_assert_eq!(eval_prefix(&ifs, &w, &s).unwrap(), eval_prefix(&ifs, &w1, &inner).unwrap());
        prop_assert_eq!(compose_word(&ifs, &w).unwrap().apply(&s), eval_prefix(&ifs, &w, &s).unwrap());
    }

    #[test]
    fn words_contract_by_tau_power(w in word(0..10), x in -20i64..20, y in -20i64..20) {
        let ifs = RationalIFS::middle_third();
        let (a, b) = (vec![r(x, 7)], vec![r(y, 7)]);
        let fa = eval_prefix(&ifs, &w, &a).unwrap();
        let fb = eval_prefix(&ifs, &w, &b).unwrap();
        let tau_n = num_traits::pow::Pow::pow(ifs.tau(), w.len() as u32);
        prop_assert!((&fa[0] - &fb[0]).abs() <= tau_n * (&a[0] - &b[0]).abs());
    }

    #[test]
    fn expansion_round_trip(p in 0i64..500, q in 1i64..500, base in 2u64..11) {
        prop_assume!(p < q);
        let x = r(p, q);
        prop_assert_eq!(expand(&x, base).unwrap().to_rational(), x);
    }

    #[test]
    fn nearest_point_agrees_with_membership(p in 0u64..300, q in 1u64..300) {
        prop_assume!(p <= q);
        let set = MissingDigitSet::middle_third();
        let x = r(p as i64, q as i64);
        let np = set.nearest_point(&x);
        prop_assert!(set.contains(&np.point));
        prop_assert_eq!(np.distance.is_zero(), set.contains(&x));
        prop_assert_eq!(np.distance, (&np.point - &x).abs());
        let (rp, rq) = (x.numer().clone(), x.denom().clone());
        prop_assert_eq!(set.member_u64(rp.try_into().unwrap(), rq.try_into().unwrap()), set.contains(&x));
    }

    #[test]
    fn power_bound_is_monotone_in_q(q in 1u64..5000, big_q in 2i64..40) {
        let set = MissingDigitSet::middle_third();
        let b = BigUint::from(3u32);
        let bq = r(big_q, 1);
        let hi = decide_power_bound(&BigUint::from(q), &b, &bq, set.delta()).unwrap();
        let lo = decide_power_bound(&BigUint::from(q / 2 + 1), &b, &bq, set.delta()).unwrap();
        prop_assert!(!hi || lo);
    }

    #[test]
    fn consecutive_convergents_are_unimodular(a in 1i64..50, b in 1i64..50, c in 2i64..30) {
        let xi: Arc<dyn ApproximableReal> = match QuadraticSurd::new(a, b, c, 7) {
            Ok(x) => Arc::new(x),
            Err(_) => return Ok(()),
        };
        let (conv, _) = convergents(xi, 12).unwrap();
        for w in conv.windows(2) {
            prop_assert!(determinant(&w[0], &w[1]).abs().is_one());
        }
    }
}

#[test]
fn unit_endpoint_membership() {
    let set = MissingDigitSet::middle_third();
    assert!(set.contains(&BigRational::one()));
    assert!(!set.contains(&BigRational::from_integer(BigInt::from(2))));
}
