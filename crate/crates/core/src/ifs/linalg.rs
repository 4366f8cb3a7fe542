//! Small dense matrices over Z and Q.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Square integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMat {
    pub n: usize,
    pub data: Vec<BigInt>,
}

impl IntMat {
    pub fn new(n: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), n * n);
        IntMat { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigInt::one();
        }
        IntMat { n, data }
    }

    pub fn scalar(n: usize, s: &BigInt) -> Self {
        let mut m = IntMat::identity(n);
        for i in 0..n {
            m.data[i * n + i] = s.clone();
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, o: &IntMat) -> IntMat {
        let n = self.n;
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * o.at(k, j);
                }
            }
        }
        IntMat { n, data }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.at(i, j) * &v[j]).sum()).collect()
    }

    pub fn mul_rat_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.n)
            .map(|i| (0..self.n).fold(BigRational::zero(), |acc, j| acc + BigRational::from_integer(self.at(i, j).clone()) * &v[j]))
            .collect()
    }

    pub fn scale(&self, s: &BigInt) -> IntMat {
        IntMat { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn sub(&self, o: &IntMat) -> IntMat {
        IntMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    /// max_i sum_j |a_ij|
    pub fn row_sum_norm(&self) -> BigInt {
        (0..self.n).map(|i| (0..self.n).map(|j| self.at(i, j).abs()).sum::<BigInt>()).max().unwrap_or_default()
    }

    /// Fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                let Some(r) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else { return BigInt::zero() };
                for j in 0..n {
                    a.swap(k * n + j, r * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * &a[n * n - 1]
    }

    pub fn to_rational(&self) -> Vec<Vec<BigRational>> {
        (0..self.n).map(|i| (0..self.n).map(|j| BigRational::from_integer(self.at(i, j).clone())).collect()).collect()
    }
}

/// Solve a x = b over Q; None when singular.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for j in c..=n {
            let v = &m[c][j] * &inv;
            m[c][j] = v;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in c..=n {
                    let v = &m[r][j] - &f * &m[c][j];
                    m[r][j] = v;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Rational inverse; None when singular.
pub fn inverse(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let e: Vec<BigRational> = (0..n).map(|i| if i == k { BigRational::one() } else { BigRational::zero() }).collect();
        cols.push(solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

pub fn mat_vec(a: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
    a.iter().map(|row| row.iter().zip(v).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: usize, v: &[i64]) -> IntMat {
        IntMat::new(n, v.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        assert_eq!(m(2, &[3, 1, 4, 2]).det(), BigInt::from(2));
        assert_eq!(m(3, &[2, 0, 1, 1, 3, 2, 1, 1, 2]).det(), BigInt::from(6));
        assert_eq!(m(3, &[0, 1, 0, 1, 0, 0, 0, 0, 1]).det(), BigInt::from(-1));
        assert_eq!(m(2, &[1, 2, 2, 4]).det(), BigInt::zero());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = m(3, &[2, 0, 1, 1, 3, 2, 1, 1, 2]).to_rational();
        let inv = inverse(&a).unwrap();
        for i in 0..3 {
            let col: Vec<BigRational> = (0..3).map(|k| inv[k][i].clone()).collect();
            let prod = mat_vec(&a, &col);
            for (k, v) in prod.iter().enumerate() {
                assert_eq!(*v, if k == i { BigRational::one() } else { BigRational::zero() });
            }
        }
    }

    #[test]
    fn singular_solve_is_none() {
        let a = m(2, &[1, 2, 2, 4]).to_rational();
        assert!(solve(&a, &[BigRational::one(), BigRational::one()]).is_none());
    }
}
