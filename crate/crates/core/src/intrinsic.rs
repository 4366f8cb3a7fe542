//! Intrinsic Dirichlet approximation and rational-point counting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::arith::real::{compare, ln_rat, Expr, LogInterval};
use crate::digits::MissingDigitSet;
use crate::error::{Error, Result};
use crate::ifs::address::{common_denominator, periodic_fixed_point, Address, PeriodicAddress};
use crate::ifs::linalg::IntMat;
use crate::ifs::system::RationalIFS;
use crate::ifs::RVec;

/// How the denominator is capped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QBound {
    /// q_unreduced < base^exponent and exponent <= Q^Δ.
    Power { base: u64, exponent: BigInt },
    /// q_unreduced <= value <= Q.
    Integer(BigInt),
}

#[derive(Clone, Debug)]
pub struct IntrinsicResult {
    pub point: RVec,
    /// Reduced common denominator.
    pub q: BigInt,
    pub q_unreduced: BigInt,
    pub q_bound: QBound,
    /// Certified upper bound on the sup-norm distance to ξ.
    pub error_bound: BigRational,
    /// b / (Q q_unreduced) for digit systems.
    pub dirichlet_bound: Option<BigRational>,
    pub address: PeriodicAddress,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub collision: Vec<usize>,
}

/// y -> (P y + r / S) / q
#[derive(Clone, Debug)]
struct WordMap {
    p: IntMat,
    q: BigInt,
    r: Vec<BigInt>,
}

fn word_map(ifs: &RationalIFS, word: &[usize]) -> WordMap {
    let d = ifs.dim();
    let s = ifs.s_prod();
    let mut acc = WordMap { p: IntMat::identity(d), q: BigInt::one(), r: alloc::vec![BigInt::zero(); d] };
    for &j in word.iter().rev() {
        let f = &ifs.maps()[j];
        let scale = s / &f.s;
        let r = f.a.mul_vec(&acc.r).into_iter().zip(&f.b).map(|(x, b)| x + &acc.q * b * &scale).collect();
        acc = WordMap { p: f.a.mul(&acc.p), q: &f.q * &acc.q, r };
    }
    acc
}

/// First pair n < n' with equal length-l windows, scanning n' upward over 0..=last.
fn first_collision(xi: &Address, l: usize, last: usize) -> Result<(usize, usize)> {
    let word = xi.prefix(last + l)?;
    let mut seen: BTreeMap<&[usize], usize> = BTreeMap::new();
    for k in 0..=last {
        let w = &word[k..k + l];
        if let Some(&n) = seen.get(w) {
            return Ok((n, k));
        }
        seen.insert(w, k);
    }
    Err(Error::BoundViolation("pigeonhole found no collision".into()))
}

fn tau_product(ifs: &RationalIFS, word: &[usize]) -> BigRational {
    word.iter().fold(BigRational::one(), |acc, &j| acc * &ifs.tau_j()[j])
}

fn check_symbols(ifs: &RationalIFS, word: &[usize]) -> Result<()> {
    match word.iter().find(|&&j| j >= ifs.len()) {
        Some(&j) => Err(Error::IndexOutOfRange { index: j, maps: ifs.len() }),
        None => Ok(()),
    }
}

fn assemble(ifs: &RationalIFS, xi: &Address, n: usize, k: usize, l: usize) -> Result<(PeriodicAddress, RVec, Vec<usize>)> {
    let word = xi.prefix(k + l)?;
    check_symbols(ifs, &word)?;
    let address = PeriodicAddress::new(word[..n].to_vec(), word[n..k].to_vec())?;
    let point = periodic_fixed_point(ifs, &address.pre, &address.period)?;
    Ok((address, point, word[k..k + l].to_vec()))
}

/// Dirichlet approximation by a rational point of the attractor, following the
/// shift-orbit pigeonhole construction. Digit systems use the sharper base-b form.
pub fn intrinsic_dirichlet(ifs: &RationalIFS, xi: &Address, big_q: &BigRational) -> Result<IntrinsicResult> {
    if ifs.digits().is_some() {
        intrinsic_digits(ifs, xi, big_q)
    } else {
        intrinsic_general(ifs, xi, big_q)
    }
}

/// q <= b^(Q^Δ) and |ξ - p/q| <= b/(Q q).
pub fn intrinsic_digits(ifs: &RationalIFS, xi: &Address, big_q: &BigRational) -> Result<IntrinsicResult> {
    let (b, ws) = ifs.digits().ok_or_else(|| Error::InvalidArgument("not a digit system".into()))?;
    if big_q < &BigRational::one() {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    let j = ws.len();
    let bq = BigRational::from_integer(BigInt::from(b));
    // largest l with b^l <= Q
    let mut l = 0usize;
    let mut pw = bq.clone();
    while &pw <= big_q {
        l += 1;
        pw *= &bq;
    }
    let cells = (j as u128).checked_pow(l as u32).and_then(|c| usize::try_from(c).ok()).ok_or_else(|| Error::BudgetExceeded("J^l too large".into()))?;
    let (n, k) = first_collision(xi, l, cells)?;
    let (address, point, collision) = assemble(ifs, xi, n, k, l)?;
    let m = k - n;
    let bi = BigInt::from(b);
    let q_unreduced = Pow::pow(&bi, n) * (Pow::pow(&bi, m) - BigInt::one());
    let q = common_denominator(&point);
    if !(&q_unreduced % &q).is_zero() || q_unreduced >= Pow::pow(&bi, k) || k > cells {
        return Err(Error::BoundViolation("denominator exceeds b^(J^l)".into()));
    }
    let error_bound = ifs.diam_ub() / BigRational::from_integer(Pow::pow(&bi, k + l));
    let dirichlet = bq / (big_q * BigRational::from_integer(q_unreduced.clone()));
    if error_bound > dirichlet {
        return Err(Error::BoundViolation("error exceeds b/(Qq)".into()));
    }
    Ok(IntrinsicResult {
        point,
        q,
        q_unreduced,
        q_bound: QBound::Power { base: b, exponent: BigInt::from(cells) },
        error_bound,
        dirichlet_bound: Some(dirichlet),
        address,
        n,
        m,
        l,
        collision,
    })
}

/// General affine construction; needs Q >= S (2 q_max)^d.
pub fn intrinsic_general(ifs: &RationalIFS, xi: &Address, big_q: &BigRational) -> Result<IntrinsicResult> {
    let d = ifs.dim();
    let s = ifs.s_prod().clone();
    let step = BigRational::from_integer(Pow::pow(&(ifs.q_max() * BigInt::from(2)), d) * &s);
    if big_q < &step {
        return Err(Error::InvalidArgument("Q below S (2 q_max)^d".into()));
    }
    // largest N with step^N <= Q
    let mut big_n = 0usize;
    let mut pw = step.clone();
    while &pw <= big_q {
        big_n += 1;
        pw *= &step;
    }
    let jj = ifs.len() as u128;
    let mut l = 0usize;
    while jj.checked_pow(l as u32 + 1).is_some_and(|c| c <= big_n as u128) {
        l += 1;
    }
    let (n, k) = first_collision(xi, l, big_n)?;
    let (address, point, collision) = assemble(ifs, xi, n, k, l)?;
    let u1 = word_map(ifs, &address.pre);
    let u2 = word_map(ifs, &address.period);
    let lhs = IntMat::scalar(d, &u2.q).sub(&u2.p);
    let q_unreduced = (&s * &u1.q * lhs.det()).abs();
    let cap = &s * &u1.q * Pow::pow(&(&u2.q * BigInt::from(2)), d);
    let q = common_denominator(&point);
    if q_unreduced.is_zero() || !(&q_unreduced % &q).is_zero() {
        return Err(Error::BoundViolation("denominator does not divide the certified value".into()));
    }
    if q_unreduced > cap || BigRational::from_integer(cap.clone()) > *big_q {
        return Err(Error::BoundViolation("denominator exceeds Q".into()));
    }
    let mut shared = address.pre.clone();
    shared.extend_from_slice(&address.period);
    shared.extend_from_slice(&collision);
    let error_bound = ifs.diam_ub() * tau_product(ifs, &shared);
    Ok(IntrinsicResult {
        point,
        q,
        q_unreduced,
        q_bound: QBound::Integer(cap),
        error_bound,
        dirichlet_bound: None,
        address,
        n,
        m: k - n,
        l,
        collision,
    })
}

/// error / (q^(μ/d) (log Q)^(log τ / log J)), reported as a diagnostic.
pub fn dirichlet_shape_ratio(ifs: &RationalIFS, r: &IntrinsicResult, big_q: &BigRational) -> Result<LogInterval> {
    let c = ifs.derived_constants();
    let mu = c.mu.ok_or_else(|| Error::InvalidArgument("μ undefined".into()))?;
    if c.j < 2 || big_q <= &BigRational::one() {
        return Err(Error::InvalidArgument("need J >= 2 and Q > 1".into()));
    }
    let d = Expr::int(c.d as i64);
    let qq = Expr::big(r.q.clone()).pow(&(mu.expr().clone() / d));
    let lg = Expr::rational(big_q.clone()).ln().pow(&(Expr::rational(c.tau.clone()).ln() / Expr::int(c.j as i64).ln()));
    LogInterval::new(Expr::rational(r.error_bound.clone()) / (qq * lg))
}

/// Sorted rational points of C with denominator at most N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub n: u64,
    /// (p, q) sorted by q then p.
    pub points: Vec<(u64, u64)>,
}

/// Default cap on N for the brute-force catalog.
pub const ENUMERATION_BUDGET: u64 = 100_000;

pub fn enumerate_rationals(set: &MissingDigitSet, n: u64, budget: u64) -> Result<Catalog> {
    check_enumeration(n, budget)?;
    let points = (1..=n).flat_map(|q| set.members_with_denominator(q).into_iter().map(move |p| (p, q))).collect();
    Ok(Catalog { n, points })
}

pub fn check_enumeration(n: u64, budget: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if n > budget {
        return Err(Error::BudgetExceeded(alloc::format!("N = {n} exceeds budget {budget}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CountingVerdict {
    pub count: u64,
    /// J^2 diam^D N^(2D)
    pub bound: LogInterval,
    pub holds: bool,
}

pub fn counting_bound(j: usize, diam: &BigRational, dim_exp: &LogInterval, n: u64, count: u64) -> Result<CountingVerdict> {
    if diam.is_zero() {
        return Err(Error::InvalidSet("degenerate attractor".into()));
    }
    let de = dim_exp.expr().clone();
    let e = Expr::int((j * j) as i64) * Expr::rational(diam.clone()).pow(&de) * Expr::big(BigInt::from(n)).pow(&(Expr::int(2) * de));
    let bound = LogInterval::new(e)?;
    let holds = compare(&Expr::big(BigInt::from(count)), bound.expr())? != Ordering::Greater;
    Ok(CountingVerdict { count, bound, holds })
}

/// Least-squares slope of log count against log N. Diagnostic only.
pub fn counting_exponent_fit(series: &[(u64, u64)]) -> Result<f64> {
    let mut ns: Vec<u64> = series.iter().map(|s| s.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 || series.iter().any(|&(n, c)| n == 0 || c == 0) {
        return Err(Error::InsufficientData);
    }
    let ln = |v: u64| ln_rat(&BigRational::from_integer(BigInt::from(v)), 64).map(|i| i.mid_f64());
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, c)| Ok((ln(n)?, ln(c)?))).collect::<Result<_>>()?;
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Exact enclosure [x_n + min b^-n, x_n + max b^-n] of a digit address from n symbols.
pub fn digit_prefix_enclosure(set: &MissingDigitSet, xi: &Address, n: usize) -> Result<(BigRational, BigRational)> {
    let word = xi.prefix(n)?;
    let b = BigInt::from(set.base());
    let mut num = BigInt::zero();
    for &j in &word {
        let w = set.digits().get(j).ok_or(Error::IndexOutOfRange { index: j, maps: set.digits().len() })?;
        num = num * &b + BigInt::from(*w);
    }
    let den = Pow::pow(&b, n);
    let x = BigRational::new(num, den.clone());
    let scale = BigRational::new(BigInt::one(), den);
    Ok((&x + set.min_point() * &scale, x + set.max_point() * scale))
}

/// max |ξ - x| over an enclosure of ξ.
pub fn max_distance(lo: &BigRational, hi: &BigRational, x: &BigRational) -> BigRational {
    let a = (lo - x).abs();
    let b = (hi - x).abs();
    if a > b {
        a
    } else {
        b
    }
}

pub fn to_u64_pair(x: &BigRational) -> Option<(u64, u64)> {
    Some((x.numer().to_u64()?, x.denom().to_u64()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::power::decide_power_bound;
    use crate::ifs::address::eval_prefix;
    use crate::ifs::affine::AffineContraction;
    use alloc::sync::Arc;
    use alloc::vec;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn squares() -> Address {
        // digit 2 at positions n^2 (1-based)
        Address::generated(|i| {
            let k = i + 1;
            usize::from((1..=k).take_while(|t| t * t <= k).any(|t| t * t == k))
        })
    }

    #[test]
    fn digit_path_meets_both_inequalities() {
        let ifs = RationalIFS::middle_third();
        let set = MissingDigitSet::middle_third();
        for qv in [3i64, 9, 27, 81, 243, 1000] {
            let big_q = r(qv, 1);
            let res = intrinsic_dirichlet(&ifs, &squares(), &big_q).unwrap();
            assert!(set.contains(&res.point[0]));
            assert!(decide_power_bound(&res.q.to_biguint().unwrap(), &3u32.into(), &big_q, set.delta()).unwrap());
            let (lo, hi) = digit_prefix_enclosure(&set, &squares(), 200).unwrap();
            let dist = max_distance(&lo, &hi, &res.point[0]);
            assert!(dist <= r(3, 1) / (big_q * BigRational::from_integer(res.q.clone())));
            assert!(dist <= res.error_bound);
        }
    }

    #[test]
    fn periodic_target_is_hit() {
        let ifs = RationalIFS::middle_third();
        let xi = Address::Periodic(PeriodicAddress::new(vec![], vec![0, 1]).unwrap());
        let res = intrinsic_dirichlet(&ifs, &xi, &r(81, 1)).unwrap();
        assert_eq!(res.point, vec![r(1, 4)]);
    }

    #[test]
    fn general_path_on_plane_ifs() {
        let id = IntMat::identity(2);
        let sw = IntMat::new(2, vec![0.into(), 1.into(), 1.into(), 0.into()]);
        let m = |a: &IntMat, b: [i64; 2]| AffineContraction::new(a.clone(), 3.into(), vec![b[0].into(), b[1].into()], 3.into()).unwrap();
        let ifs = RationalIFS::new(vec![m(&id, [0, 0]), m(&id, [2, 0]), m(&sw, [0, 2])]).unwrap();
        let xi = Address::generated(|i| (i * i + 1) % 3);
        // S (2 q_max)^d = 27 * 36
        let big_q = BigRational::from_integer(BigInt::from(972u64 * 972 * 972));
        let res = intrinsic_dirichlet(&ifs, &xi, &big_q).unwrap();
        assert!(BigRational::from_integer(res.q_unreduced.clone()) <= big_q);
        let p = crate::ifs::address::prefix_box(&ifs, &xi.prefix(60).unwrap()).unwrap();
        for i in 0..2 {
            assert!(max_distance(&p.0[i], &p.1[i], &res.point[i]) <= res.error_bound);
        }
        assert_eq!(periodic_fixed_point(&ifs, &res.address.pre, &res.address.period).unwrap(), res.point);
    }

    #[test]
    fn general_and_digit_paths_agree_on_line() {
        let ifs = RationalIFS::new(vec![AffineContraction::line(1, 4, 0, 1).unwrap(), AffineContraction::line(-1, 4, 1, 1).unwrap()]).unwrap();
        let xi = Address::generated(|i| (i / 3) % 2);
        let big_q = r(1 << 20, 1);
        let res = intrinsic_dirichlet(&ifs, &xi, &big_q).unwrap();
        let enc = crate::ifs::address::AddressPoint::new(Arc::new(ifs.clone()), xi.clone());
        let iv = crate::arith::approx::ApproximableReal::enclose(&enc, &r(1, 1 << 30)).unwrap();
        assert!(max_distance(&iv.lo, &iv.hi, &res.point[0]) <= res.error_bound);
        let seed = vec![BigRational::zero()];
        let _ = eval_prefix(&ifs, &res.address.pre, &seed).unwrap();
    }

    #[test]
    fn enumerate_examples() {
        let set = MissingDigitSet::middle_third();
        let c = enumerate_rationals(&set, 1, ENUMERATION_BUDGET).unwrap();
        assert_eq!(c.points, vec![(0, 1), (1, 1)]);
        let c = enumerate_rationals(&set, 4, ENUMERATION_BUDGET).unwrap();
        assert_eq!(c.points, vec![(0, 1), (1, 1), (1, 3), (2, 3), (1, 4), (3, 4)]);
        let v = counting_bound(2, &BigRational::one(), set.delta(), 4, 6).unwrap();
        assert!(v.holds);
        // 4 * 4^(2Δ) = 22.9..
        assert!(v.bound.lo() > &r(22, 1) && v.bound.hi() < &r(24, 1));
        assert!(enumerate_rationals(&set, 0, ENUMERATION_BUDGET).is_err());
        assert!(matches!(enumerate_rationals(&set, 10, 5), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn exponent_fit_cases() {
        assert!((counting_exponent_fit(&[(10, 5), (100, 5), (1000, 5)]).unwrap()).abs() < 1e-12);
        let s = counting_exponent_fit(&[(10, 10), (100, 100), (1000, 1000)]).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
        assert_eq!(counting_exponent_fit(&[(10, 3), (10, 3), (100, 4)]).unwrap_err(), Error::InsufficientData);
    }
}
