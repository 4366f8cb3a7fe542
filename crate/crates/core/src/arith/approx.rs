//! The single protocol for "a real number".

use core::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::real::{pow2, Expr, Interval};
use crate::error::{Error, Result};

/// A target real that can hand out rational enclosures of any width.
pub trait ApproximableReal: Send + Sync + fmt::Debug {
    /// An interval of width at most `width` containing the value.
    fn enclose(&self, width: &BigRational) -> Result<Interval>;

    /// The exact value when the target is rational.
    fn exact(&self) -> Option<BigRational> {
        None
    }
}

impl ApproximableReal for BigRational {
    fn enclose(&self, _width: &BigRational) -> Result<Interval> {
        Ok(Interval::point(self.clone()))
    }

    fn exact(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

/// (a + b*sqrt(c)) / d with c > 0 not a perfect square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticSurd {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl QuadraticSurd {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let s = QuadraticSurd { a: a.into(), b: b.into(), c: c.into(), d: d.into() };
        if s.c.sign() != Sign::Plus || s.d.is_zero() {
            return Err(Error::InvalidArgument("surd needs c > 0 and d != 0".into()));
        }
        let r = s.c.sqrt();
        if &r * &r == s.c {
            return Err(Error::InvalidArgument("surd radicand is a perfect square".into()));
        }
        Ok(s)
    }

    pub fn sqrt2() -> Self {
        QuadraticSurd::new(0, 1, 2, 1).unwrap()
    }

    /// (1 + sqrt 5) / 2
    pub fn golden() -> Self {
        QuadraticSurd::new(1, 1, 5, 2).unwrap()
    }
}

impl ApproximableReal for QuadraticSurd {
    fn enclose(&self, width: &BigRational) -> Result<Interval> {
        if !width.is_positive() {
            return Err(Error::EnclosureExhausted);
        }
        // floor(sqrt(c) 2^k) has error < 2^-k; scale so |b/d| 2^-k <= width
        let scale = BigRational::new(self.b.abs(), self.d.abs()) / width;
        let mut k: u32 = 1;
        while BigRational::from_integer(pow2(k)) < scale {
            k += 1;
        }
        let s = (&self.c << (2 * k as usize)).sqrt();
        let den = pow2(k);
        let lo = BigRational::new(s.clone(), den.clone());
        let hi = BigRational::new(s + 1, den);
        let a = BigRational::from_integer(self.a.clone());
        let b = BigRational::from_integer(self.b.clone());
        let d = BigRational::from_integer(self.d.clone());
        let x = (&a + &b * &lo) / &d;
        let y = (&a + &b * &hi) / &d;
        Ok(if x <= y { Interval::new(x, y) } else { Interval::new(y, x) })
    }
}

/// An expression viewed as a target real.
#[derive(Clone, Debug)]
pub struct ExprReal(pub Expr);

impl ApproximableReal for ExprReal {
    fn enclose(&self, width: &BigRational) -> Result<Interval> {
        self.0.enclose(width).map_err(|e| match e {
            Error::Undecided(_) => Error::EnclosureExhausted,
            e => e,
        })
    }

    fn exact(&self) -> Option<BigRational> {
        self.0.as_const().cloned()
    }
}

/// Shift a target by a rational: x + c.
#[derive(Debug)]
pub struct Shifted<T: ApproximableReal> {
    pub inner: T,
    pub shift: BigRational,
}

impl<T: ApproximableReal> ApproximableReal for Shifted<T> {
    fn enclose(&self, width: &BigRational) -> Result<Interval> {
        let iv = self.inner.enclose(width)?;
        Ok(Interval::new(iv.lo + &self.shift, iv.hi + &self.shift))
    }

    fn exact(&self) -> Option<BigRational> {
        self.inner.exact().map(|v| v + &self.shift)
    }
}

pub(crate) fn one_over_pow2(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), pow2(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surd_enclosure_is_tight_and_correct() {
        let s = QuadraticSurd::sqrt2();
        let w = one_over_pow2(100);
        let iv = s.enclose(&w).unwrap();
        assert!(iv.width() <= w);
        // lo^2 <= 2 <= hi^2
        let two = BigRational::from_integer(2.into());
        assert!(&iv.lo * &iv.lo <= two && two <= &iv.hi * &iv.hi);
    }

    #[test]
    fn negative_coefficient_orders_endpoints() {
        let s = QuadraticSurd::new(3, -1, 2, 1).unwrap();
        let iv = s.enclose(&one_over_pow2(40)).unwrap();
        assert!(iv.lo < iv.hi);
        assert!(iv.lo_f64() < 1.5858 && iv.hi_f64() > 1.5857);
    }

    #[test]
    fn perfect_square_rejected() {
        assert!(QuadraticSurd::new(0, 1, 4, 1).is_err());
    }
}
