//! Deciding q <= b^(Q^Δ).

use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::arith::real::{compare, Expr, LogInterval, Node};
use crate::error::{Error, Result};

/// (g, e) with n = g^e and e maximal.
pub fn perfect_power(n: &BigUint) -> (BigUint, u32) {
    if n <= &BigUint::one() {
        return (n.clone(), 1);
    }
    let max_e = n.bits() as u32;
    for e in (2..=max_e).rev() {
        let r = n.nth_root(e);
        if r > BigUint::one() && Pow::pow(&r, e) == *n {
            return (r, e);
        }
    }
    (n.clone(), 1)
}

fn as_positive_integer(x: &BigRational) -> Option<BigUint> {
    if x.is_integer() && x.numer() > &BigInt::zero() {
        x.numer().to_biguint()
    } else {
        None
    }
}

/// If Δ = ln a / ln c and Q, c are powers of a common integer, Q^Δ = a^(i/j).
/// Returns that exponent when it is an integer.
fn exact_exponent(big_q: &BigRational, delta: &Expr) -> Option<BigUint> {
    let Node::Div(num, den) = delta.node() else { return None };
    let (Node::Ln(a), Node::Ln(c)) = (num.node(), den.node()) else { return None };
    let a = as_positive_integer(a.as_const()?)?;
    let c = as_positive_integer(c.as_const()?)?;
    let qi = as_positive_integer(big_q)?;
    if c <= BigUint::one() {
        return None;
    }
    if qi.is_one() {
        return Some(BigUint::one());
    }
    let (g1, i) = perfect_power(&qi);
    let (g2, j) = perfect_power(&c);
    if g1 != g2 {
        return None;
    }
    let g = i.gcd(&j);
    let (i, j) = (i / g, j / g);
    let r = a.nth_root(j);
    if Pow::pow(&r, j) != a {
        return None;
    }
    Some(Pow::pow(&r, i))
}

/// q <= b^r for integers, without materialising b^r when sizes already decide.
fn le_int_power(q: &BigUint, b: &BigUint, r: &BigUint) -> bool {
    let qb = q.bits();
    let bb = b.bits();
    let lower = r * BigUint::from(bb - 1);
    let upper = r * BigUint::from(bb);
    if BigUint::from(qb) <= lower {
        return true;
    }
    if BigUint::from(qb - 1) >= upper {
        return false;
    }
    let r = r.to_u32().expect("exponent bounded by bit length");
    *q <= Pow::pow(b, r)
}

/// Decide ln q <= Q^Δ ln b.
pub fn decide_power_bound(q: &BigUint, b: &BigUint, big_q: &BigRational, delta: &LogInterval) -> Result<bool> {
    if q.is_zero() {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    if b < &BigUint::from(2u32) {
        return Err(Error::InvalidArgument("b must be at least 2".into()));
    }
    if big_q < &BigRational::one() {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    if q.is_one() {
        return Ok(true);
    }
    if let Some(r) = exact_exponent(big_q, delta.expr()) {
        return Ok(le_int_power(q, b, &r));
    }
    if big_q.is_one() {
        return Ok(q <= b);
    }
    // ln ln q <= Δ ln Q + ln ln b
    let lhs = Expr::big(BigInt::from(q.clone())).ln().ln();
    let rhs = delta.expr().clone() * Expr::rational(big_q.clone()).ln() + Expr::big(BigInt::from(b.clone())).ln().ln();
    Ok(compare(&lhs, &rhs)? != Ordering::Greater)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta23() -> LogInterval {
        LogInterval::new(Expr::log_ratio(BigRational::from_integer(2.into()), BigRational::from_integer(3.into()))).unwrap()
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn spec_examples() {
        let d = delta23();
        let b = BigUint::from(3u32);
        assert!(decide_power_bound(&BigUint::from(9u32), &b, &r(3), &d).unwrap());
        assert!(!decide_power_bound(&BigUint::from(10u32), &b, &r(3), &d).unwrap());
        assert!(decide_power_bound(&BigUint::one(), &b, &r(7), &d).unwrap());
    }

    #[test]
    fn exact_path_on_powers_of_three() {
        let d = delta23();
        let b = BigUint::from(3u32);
        // Q = 3^k  =>  Q^Δ = 2^k
        for k in 1..6u32 {
            let qq = BigRational::from_integer(BigInt::from(3u64.pow(k)));
            let edge = Pow::pow(&b, 2u32.pow(k));
            assert!(decide_power_bound(&edge, &b, &qq, &d).unwrap());
            assert!(!decide_power_bound(&(&edge + 1u32), &b, &qq, &d).unwrap());
        }
    }

    #[test]
    fn interval_path_non_power_q() {
        // Q = 10: 10^0.6309 = 4.275..; 3^4.275 = 109.6
        let d = delta23();
        let b = BigUint::from(3u32);
        assert!(decide_power_bound(&BigUint::from(109u32), &b, &r(10), &d).unwrap());
        assert!(!decide_power_bound(&BigUint::from(110u32), &b, &r(10), &d).unwrap());
    }

    #[test]
    fn perfect_power_finds_largest_exponent() {
        assert_eq!(perfect_power(&BigUint::from(64u32)), (BigUint::from(2u32), 6));
        assert_eq!(perfect_power(&BigUint::from(12u32)), (BigUint::from(12u32), 1));
    }
}
