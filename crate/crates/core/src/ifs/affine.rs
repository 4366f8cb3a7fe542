//! Affine rational contractions y -> A y / q + b / s.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ifs::linalg::{self, IntMat};

/// A rational vector.
pub type RVec = Vec<BigRational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineContraction {
    pub a: IntMat,
    pub q: BigInt,
    pub b: Vec<BigInt>,
    pub s: BigInt,
}

impl AffineContraction {
    /// Fails with `NotContraction(0)` when the sup-norm of A/q is not below 1.
    pub fn new(a: IntMat, q: BigInt, b: Vec<BigInt>, s: BigInt) -> Result<Self> {
        if b.len() != a.n {
            return Err(Error::DimensionMismatch { expected: a.n, got: b.len() });
        }
        if a.n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !q.is_positive() || !s.is_positive() {
            return Err(Error::InvalidArgument("denominators must be positive".into()));
        }
        if a.row_sum_norm() >= q {
            return Err(Error::NotContraction(0));
        }
        Ok(AffineContraction { a, q, b, s })
    }

    /// y -> (num y) / q + b / s on the line.
    pub fn line(num: i64, q: i64, b: i64, s: i64) -> Result<Self> {
        AffineContraction::new(IntMat::new(1, alloc::vec![num.into()]), q.into(), alloc::vec![b.into()], s.into())
    }

    pub fn dim(&self) -> usize {
        self.a.n
    }

    /// Exact sup-norm of A/q.
    pub fn tau(&self) -> BigRational {
        BigRational::new(self.a.row_sum_norm(), self.q.clone())
    }

    pub fn det(&self) -> BigInt {
        self.a.det()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn translation(&self) -> RVec {
        self.b.iter().map(|x| BigRational::new(x.clone(), self.s.clone())).collect()
    }

    pub fn apply(&self, y: &[BigRational]) -> RVec {
        let q = BigRational::from_integer(self.q.clone());
        self.a.mul_rat_vec(y).into_iter().zip(self.translation()).map(|(v, t)| v / &q + t).collect()
    }

    /// Preimage of x, or None when A is singular.
    pub fn inverse_apply(&self, x: &[BigRational]) -> Option<RVec> {
        let q = BigRational::from_integer(self.q.clone());
        let rhs: RVec = x.iter().zip(self.translation()).map(|(xi, t)| (xi - t) * &q).collect();
        linalg::solve(&self.a.to_rational(), &rhs)
    }

    /// Bounding box of the image of [lo, hi].
    pub fn image_box(&self, lo: &[BigRational], hi: &[BigRational]) -> (RVec, RVec) {
        let n = self.dim();
        let q = BigRational::from_integer(self.q.clone());
        let t = self.translation();
        let mut out_lo = Vec::with_capacity(n);
        let mut out_hi = Vec::with_capacity(n);
        for i in 0..n {
            let (mut l, mut h) = (BigRational::zero(), BigRational::zero());
            for k in 0..n {
                let a = BigRational::from_integer(self.a.at(i, k).clone());
                let x = &a * &lo[k];
                let y = &a * &hi[k];
                if x <= y {
                    l += x;
                    h += y;
                } else {
                    l += y;
                    h += x;
                }
            }
            out_lo.push(l / &q + &t[i]);
            out_hi.push(h / &q + &t[i]);
        }
        (out_lo, out_hi)
    }

    pub fn to_int_affine(&self) -> IntAffine {
        let den = self.q.lcm(&self.s);
        let ma = &den / &self.q;
        let mb = &den / &self.s;
        IntAffine { m: self.a.scale(&ma), c: self.b.iter().map(|x| x * &mb).collect(), den }
    }
}

/// y -> (M y + c) / den with integer data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntAffine {
    pub m: IntMat,
    pub c: Vec<BigInt>,
    pub den: BigInt,
}

impl IntAffine {
    pub fn identity(d: usize) -> Self {
        IntAffine { m: IntMat::identity(d), c: alloc::vec![BigInt::zero(); d], den: BigInt::one() }
    }

    /// self after inner.
    pub fn compose(&self, inner: &IntAffine) -> IntAffine {
        let m = self.m.mul(&inner.m);
        let c = self.m.mul_vec(&inner.c).into_iter().zip(&self.c).map(|(x, y)| x + y * &inner.den).collect();
        IntAffine { m, c, den: &self.den * &inner.den }
    }

    pub fn pow(&self, mut k: u64) -> IntAffine {
        let mut base = self.clone();
        let mut acc = IntAffine::identity(self.m.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    pub fn apply(&self, y: &[BigRational]) -> RVec {
        let den = BigRational::from_integer(self.den.clone());
        self.m.mul_rat_vec(y).into_iter().zip(&self.c).map(|(v, c)| (v + BigRational::from_integer(c.clone())) / &den).collect()
    }

    /// Solution of (den I - M) y = c.
    pub fn fixed_point(&self) -> Option<RVec> {
        let lhs = IntMat::scalar(self.m.n, &self.den).sub(&self.m);
        let rhs: RVec = self.c.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        linalg::solve(&lhs.to_rational(), &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rejects_expanding_map() {
        assert_eq!(AffineContraction::line(3, 3, 0, 1).unwrap_err(), Error::NotContraction(0));
        assert!(AffineContraction::line(-2, 3, 0, 1).is_ok());
    }

    #[test]
    fn inverse_undoes_apply() {
        let f = AffineContraction::new(IntMat::new(2, vec![1.into(), 1.into(), 0.into(), (-1).into()]), 3.into(), vec![1.into(), 2.into()], 5.into()).unwrap();
        let x = vec![r(2, 7), r(-1, 3)];
        assert_eq!(f.inverse_apply(&f.apply(&x)).unwrap(), x);
    }

    #[test]
    fn int_form_agrees_with_rational_form() {
        let f = AffineContraction::line(2, 9, 1, 6).unwrap();
        let g = f.to_int_affine();
        let x = vec![r(5, 11)];
        assert_eq!(f.apply(&x), g.apply(&x));
    }

    #[test]
    fn pow_matches_repeated_compose() {
        let g = AffineContraction::line(1, 3, 2, 3).unwrap().to_int_affine();
        let mut acc = IntAffine::identity(1);
        for _ in 0..5 {
            acc = acc.compose(&g);
        }
        let x = vec![r(1, 2)];
        assert_eq!(acc.apply(&x), g.pow(5).apply(&x));
    }

    #[test]
    fn fixed_point_of_line_map() {
        let g = AffineContraction::line(1, 3, 2, 3).unwrap().to_int_affine();
        assert_eq!(g.fixed_point().unwrap(), vec![r(1, 1)]);
    }
}
