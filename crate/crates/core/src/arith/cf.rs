//! Continued fractions of targets given by enclosures.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
#[cfg(test)]
use num_traits::Signed;

use crate::arith::approx::{one_over_pow2, ApproximableReal};
use crate::arith::real::Interval;
use crate::error::{Error, Result};

/// Precision ceiling for enclosure requests, in bits.
const MAX_ENCLOSURE_BITS: u32 = 1 << 20;

/// Partial quotients and convergents of a target, grown on demand.
#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    target: Arc<dyn ApproximableReal>,
    pub quotients: Vec<BigInt>,
    /// (u_t, v_t), lowest terms.
    pub convergents: Vec<(BigInt, BigInt)>,
    pub terminated: bool,
    bits: u32,
}

fn quotients_of_rational(x: &BigRational, count: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::new();
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    while out.len() < count {
        let (a, r) = n.div_mod_floor(&d);
        out.push(a);
        if r.is_zero() {
            return (out, true);
        }
        n = d;
        d = r;
    }
    (out, false)
}

/// Partial quotients certified by an enclosure. Stops at the first
/// quotient the interval cannot decide.
fn quotients_of_interval(iv: &Interval, count: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut l, mut h) = (iv.lo.clone(), iv.hi.clone());
    while out.len() < count {
        let a = l.floor().to_integer();
        if h.floor().to_integer() != a {
            break;
        }
        let fa = BigRational::from_integer(a.clone());
        out.push(a);
        if l == fa {
            break;
        }
        let nl = (&h - &fa).recip();
        let nh = (&l - &fa).recip();
        l = nl;
        h = nh;
    }
    out
}

fn convergents_from(q: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(q.len());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
    for a in q {
        let p = a * &p1 + &p2;
        let qq = a * &q1 + &q2;
        p2 = core::mem::replace(&mut p1, p.clone());
        q2 = core::mem::replace(&mut q1, qq.clone());
        out.push((p, qq));
    }
    out
}

impl ContinuedFraction {
    pub fn new(target: Arc<dyn ApproximableReal>) -> Self {
        ContinuedFraction { target, quotients: Vec::new(), convergents: Vec::new(), terminated: false, bits: 64 }
    }

    pub fn target(&self) -> &Arc<dyn ApproximableReal> {
        &self.target
    }

    /// Grow until `count` convergents exist or the expansion terminates.
    pub fn extend_to(&mut self, count: usize) -> Result<()> {
        if self.terminated || self.convergents.len() >= count {
            return Ok(());
        }
        if let Some(x) = self.target.exact() {
            let (q, term) = quotients_of_rational(&x, count);
            self.terminated = term;
            self.convergents = convergents_from(&q);
            self.quotients = q;
            return Ok(());
        }
        let mut last_width: Option<BigRational> = None;
        loop {
            let iv = self.target.enclose(&one_over_pow2(self.bits))?;
            let q = quotients_of_interval(&iv, count);
            if q.len() > self.quotients.len() {
                self.convergents = convergents_from(&q);
                self.quotients = q;
            }
            if self.quotients.len() >= count {
                return Ok(());
            }
            let w = iv.width();
            if let Some(prev) = &last_width {
                if !w.is_zero() && &w >= prev {
                    return Err(Error::EnclosureExhausted);
                }
            }
            last_width = Some(w);
            if self.bits >= MAX_ENCLOSURE_BITS {
                return Err(Error::EnclosureExhausted);
            }
            self.bits = (self.bits * 2).min(MAX_ENCLOSURE_BITS);
        }
    }

    /// Grow while the newest denominator is at most `v_max`.
    pub fn extend_past_denominator(&mut self, v_max: &BigInt) -> Result<()> {
        loop {
            if self.terminated {
                return Ok(());
            }
            if let Some((_, v)) = self.convergents.last() {
                if v > v_max {
                    return Ok(());
                }
            }
            let n = self.convergents.len() + 1;
            self.extend_to(n)?;
        }
    }
}

/// The first `count` convergents of `x` and whether the expansion ended.
pub fn convergents(x: Arc<dyn ApproximableReal>, count: usize) -> Result<(Vec<(BigInt, BigInt)>, bool)> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut cf = ContinuedFraction::new(x);
    cf.extend_to(count)?;
    let term = cf.terminated && cf.convergents.len() <= count;
    cf.convergents.truncate(count);
    Ok((cf.convergents, term))
}

/// Exact record of the two-sided convergent bound at index `t` (0-based).
#[derive(Clone, Debug)]
pub struct SandwichWitness {
    pub t: usize,
    pub u: BigInt,
    pub v: BigInt,
    pub v_next: BigInt,
    /// 1 / (2 v v_next)
    pub lower: BigRational,
    /// 1 / (v v_next)
    pub upper: BigRational,
    /// Encloses |x - u/v|.
    pub distance: Interval,
    pub holds: bool,
}

pub fn convergent_sandwich_check(x: Arc<dyn ApproximableReal>, t: usize) -> Result<SandwichWitness> {
    let mut cf = ContinuedFraction::new(x.clone());
    cf.extend_to(t + 2)?;
    if cf.convergents.len() < t + 2 {
        return Err(Error::RationalTarget);
    }
    let (u, v) = cf.convergents[t].clone();
    let v_next = cf.convergents[t + 1].1.clone();
    let c = BigRational::new(u.clone(), v.clone());
    let vv = BigRational::from_integer(&v * &v_next);
    let upper = vv.recip();
    let lower = &upper / BigRational::from_integer(BigInt::from(2));
    let mut bits = 64 + 2 * v_next.bits() as u32;
    loop {
        let iv = x.enclose(&one_over_pow2(bits))?;
        let d = Interval::new(&iv.lo - &c, &iv.hi - &c).abs();
        if d.lo >= lower && d.hi <= upper {
            return Ok(SandwichWitness { t, u, v, v_next, lower, upper, distance: d, holds: true });
        }
        if d.hi < lower || d.lo > upper {
            return Ok(SandwichWitness { t, u, v, v_next, lower, upper, distance: d, holds: false });
        }
        if d.is_point() || bits >= MAX_ENCLOSURE_BITS {
            return Err(Error::Undecided(bits));
        }
        bits *= 2;
    }
}

/// u_t v_{t-1} - u_{t-1} v_t for consecutive convergents.
pub fn determinant(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> BigInt {
    &b.0 * &a.1 - &a.0 * &b.1
}

#[cfg(test)]
pub(crate) fn is_abs_one(x: &BigInt) -> bool {
    x.abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::approx::QuadraticSurd;
    use alloc::vec;

    fn pairs(v: &[(i64, i64)]) -> Vec<(BigInt, BigInt)> {
        v.iter().map(|&(a, b)| (BigInt::from(a), BigInt::from(b))).collect()
    }

    #[test]
    fn rational_terminates() {
        let x: Arc<dyn ApproximableReal> = Arc::new(BigRational::new(1.into(), 3.into()));
        let (c, term) = convergents(x, 2).unwrap();
        assert_eq!(c, pairs(&[(0, 1), (1, 3)]));
        assert!(term);
    }

    #[test]
    fn rational_with_more_requested_returns_all() {
        let x: Arc<dyn ApproximableReal> = Arc::new(BigRational::new(1.into(), 3.into()));
        let (c, term) = convergents(x, 10).unwrap();
        assert_eq!(c.len(), 2);
        assert!(term);
    }

    #[test]
    fn sqrt2_convergents_follow_recurrence() {
        let (c, term) = convergents(Arc::new(QuadraticSurd::sqrt2()), 4).unwrap();
        assert_eq!(c, pairs(&[(1, 1), (3, 2), (7, 5), (17, 12)]));
        assert!(!term);
    }

    #[test]
    fn golden_convergents_are_fibonacci_ratios() {
        let (c, _) = convergents(Arc::new(QuadraticSurd::golden()), 5).unwrap();
        // oracle: F(n+2)/F(n+1)
        let mut fib = vec![1i64, 1];
        while fib.len() < 8 {
            let n = fib.len();
            fib.push(fib[n - 1] + fib[n - 2]);
        }
        for (i, (u, v)) in c.iter().enumerate() {
            assert_eq!(*u, BigInt::from(fib[i + 1]));
            assert_eq!(*v, BigInt::from(fib[i]));
        }
    }

    #[test]
    fn determinants_are_unit() {
        let (c, _) = convergents(Arc::new(QuadraticSurd::new(0, 1, 7, 1).unwrap()), 25).unwrap();
        for w in c.windows(2) {
            assert!(is_abs_one(&determinant(&w[0], &w[1])));
        }
    }

    #[test]
    fn sandwich_sqrt2_t1() {
        let w = convergent_sandwich_check(Arc::new(QuadraticSurd::sqrt2()), 1).unwrap();
        assert!(w.holds);
        assert_eq!((w.u.clone(), w.v.clone(), w.v_next.clone()), (3.into(), 2.into(), 5.into()));
        assert_eq!(w.lower, BigRational::new(1.into(), 20.into()));
        assert_eq!(w.upper, BigRational::new(1.into(), 10.into()));
    }

    #[test]
    fn sandwich_rational_target() {
        let x: Arc<dyn ApproximableReal> = Arc::new(BigRational::new(1.into(), 3.into()));
        assert_eq!(convergent_sandwich_check(x, 1).unwrap_err(), Error::RationalTarget);
    }

    #[test]
    fn sandwich_e_like_t3() {
        // e via exp(1) enclosure
        let e = crate::arith::approx::ExprReal(crate::arith::real::Expr::int(1).exp());
        let w = convergent_sandwich_check(Arc::new(e), 3).unwrap();
        assert!(w.holds);
        // e = [2;1,2,1,1,4,...], convergents 2,3,8/3,11/4,19/7
        assert_eq!((w.u.clone(), w.v.clone(), w.v_next.clone()), (11.into(), 4.into(), 7.into()));
    }
}
