//! Addresses, their points, and the rational to periodic-address map.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::approx::ApproximableReal;
use crate::arith::real::{Expr, Interval, LogInterval};
use crate::error::{Error, Result};
use crate::ifs::affine::{IntAffine, RVec};
use crate::ifs::system::RationalIFS;

/// Word over map indices 0..J.
#[derive(Clone)]
pub enum Address {
    Finite(Vec<usize>),
    Periodic(PeriodicAddress),
    Generated(Arc<dyn Fn(usize) -> usize + Send + Sync>),
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Address::Finite(w) => f.debug_tuple("Finite").field(w).finish(),
            Address::Periodic(p) => f.debug_tuple("Periodic").field(p).finish(),
            Address::Generated(_) => f.write_str("Generated(..)"),
        }
    }
}

impl Address {
    pub fn generated(g: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        Address::Generated(Arc::new(g))
    }

    pub fn symbol(&self, i: usize) -> Option<usize> {
        match self {
            Address::Finite(w) => w.get(i).copied(),
            Address::Periodic(p) => Some(p.symbol(i)),
            Address::Generated(g) => Some(g(i)),
        }
    }

    /// Known length for finite words.
    pub fn finite_len(&self) -> Option<usize> {
        match self {
            Address::Finite(w) => Some(w.len()),
            _ => None,
        }
    }

    pub fn prefix(&self, n: usize) -> Result<Vec<usize>> {
        if let Address::Finite(w) = self {
            if w.len() < n {
                return Err(Error::AddressTooShort { need: n, have: w.len() });
            }
            return Ok(w[..n].to_vec());
        }
        Ok((0..n).map(|i| self.symbol(i).unwrap()).collect())
    }

    /// The shifted word σ^n.
    pub fn shift(&self, n: usize) -> Address {
        match self {
            Address::Finite(w) => Address::Finite(w.get(n..).map(|s| s.to_vec()).unwrap_or_default()),
            Address::Periodic(p) => Address::Periodic(p.shift(n)),
            Address::Generated(g) => {
                let g = g.clone();
                Address::Generated(Arc::new(move |i| g(i + n)))
            }
        }
    }
}

/// pre · period^∞
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicAddress {
    pub pre: Vec<usize>,
    pub period: Vec<usize>,
}

impl PeriodicAddress {
    pub fn new(pre: Vec<usize>, period: Vec<usize>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("period must be nonempty".into()));
        }
        Ok(PeriodicAddress { pre, period })
    }

    pub fn symbol(&self, i: usize) -> usize {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    /// Preperiod plus period length.
    pub fn total_len(&self) -> usize {
        self.pre.len() + self.period.len()
    }

    pub fn shift(&self, n: usize) -> PeriodicAddress {
        if n <= self.pre.len() {
            return PeriodicAddress { pre: self.pre[n..].to_vec(), period: self.period.clone() };
        }
        let k = (n - self.pre.len()) % self.period.len();
        let mut period = self.period[k..].to_vec();
        period.extend_from_slice(&self.period[..k]);
        PeriodicAddress { pre: Vec::new(), period }
    }
}

fn check_word(ifs: &RationalIFS, word: &[usize]) -> Result<()> {
    match word.iter().find(|&&j| j >= ifs.len()) {
        Some(&j) => Err(Error::IndexOutOfRange { index: j, maps: ifs.len() }),
        None => Ok(()),
    }
}

/// π_1 ∘ … ∘ π_k (seed)
pub fn eval_prefix(ifs: &RationalIFS, word: &[usize], seed: &[BigRational]) -> Result<RVec> {
    check_word(ifs, word)?;
    if seed.len() != ifs.dim() {
        return Err(Error::DimensionMismatch { expected: ifs.dim(), got: seed.len() });
    }
    let mut x = seed.to_vec();
    for &j in word.iter().rev() {
        x = ifs.maps()[j].apply(&x);
    }
    Ok(x)
}

/// Integer form of π_1 ∘ … ∘ π_k.
pub fn compose_word(ifs: &RationalIFS, word: &[usize]) -> Result<IntAffine> {
    check_word(ifs, word)?;
    let mut acc = IntAffine::identity(ifs.dim());
    for &j in word {
        acc = acc.compose(&ifs.maps()[j].to_int_affine());
    }
    Ok(acc)
}

/// The point with address pre · period^∞.
pub fn periodic_fixed_point(ifs: &RationalIFS, pre: &[usize], period: &[usize]) -> Result<RVec> {
    if period.is_empty() {
        return Err(Error::InvalidArgument("period must be nonempty".into()));
    }
    let p = compose_word(ifs, period)?;
    let z = p.fixed_point().expect("a contraction has a unique fixed point");
    eval_prefix(ifs, pre, &z)
}

/// Chooses a map whose image contains a given attractor point.
pub trait BranchSelector {
    fn select(&self, ifs: &RationalIFS, x: &[BigRational]) -> Result<usize>;
}

/// Leading base-b digit: smallest j with b x - w_j in the hull.
#[derive(Clone, Copy, Debug, Default)]
pub struct DigitSelector;

impl BranchSelector for DigitSelector {
    fn select(&self, ifs: &RationalIFS, x: &[BigRational]) -> Result<usize> {
        let (b, ws) = ifs.digits().ok_or_else(|| Error::InvalidArgument("not a digit system".into()))?;
        let (lo, hi) = ifs.attractor_box();
        let bx = &x[0] * BigRational::from_integer(BigInt::from(b));
        let mut best: Option<(u64, usize)> = None;
        for (j, &w) in ws.iter().enumerate() {
            let y = &bx - BigRational::from_integer(BigInt::from(w));
            if lo[0] <= y && y <= hi[0] && best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, j));
            }
        }
        best.map(|(_, j)| j).ok_or(Error::NotInAttractor)
    }
}

/// Box test on f_j^{-1}(x), recursing `depth` levels when several maps pass.
#[derive(Clone, Copy, Debug)]
pub struct BoxSelector {
    pub depth: usize,
}

impl Default for BoxSelector {
    fn default() -> Self {
        BoxSelector { depth: 8 }
    }
}

fn survives(ifs: &RationalIFS, y: &[BigRational], depth: usize) -> bool {
    if !ifs.in_box(y) {
        return false;
    }
    if depth == 0 {
        return true;
    }
    ifs.maps().iter().any(|f| f.inverse_apply(y).is_some_and(|z| survives(ifs, &z, depth - 1)))
}

impl BranchSelector for BoxSelector {
    fn select(&self, ifs: &RationalIFS, x: &[BigRational]) -> Result<usize> {
        let pre: Vec<Option<RVec>> = ifs.maps().iter().map(|f| f.inverse_apply(x)).collect();
        if pre.iter().any(|p| p.is_none()) {
            return Err(Error::InvalidArgument("singular map".into()));
        }
        let mut alive: Vec<usize> = (0..ifs.len()).filter(|&j| ifs.in_box(pre[j].as_ref().unwrap())).collect();
        let mut level = 0;
        while alive.len() > 1 && level < self.depth {
            level += 1;
            alive.retain(|&j| survives(ifs, pre[j].as_ref().unwrap(), level));
        }
        match alive.len() {
            0 => Err(Error::NotInAttractor),
            1 => Ok(alive[0]),
            _ => Err(Error::Ambiguous(self.depth)),
        }
    }
}

/// Digit selector for digit systems, box selector otherwise.
pub fn default_selector(ifs: &RationalIFS) -> &'static dyn BranchSelector {
    static DIGIT: DigitSelector = DigitSelector;
    static BOX: BoxSelector = BoxSelector { depth: 8 };
    if ifs.digits().is_some() {
        &DIGIT
    } else {
        &BOX
    }
}

/// Default bound on inverse-iteration steps.
pub const MAX_ORBIT: usize = 1 << 22;

/// Inverse-iterate until a point repeats.
pub fn rational_to_address(ifs: &RationalIFS, x: &[BigRational], selector: &dyn BranchSelector) -> Result<PeriodicAddress> {
    rational_to_address_with_limit(ifs, x, selector, MAX_ORBIT)
}

pub fn rational_to_address_with_limit(ifs: &RationalIFS, x: &[BigRational], selector: &dyn BranchSelector, max_steps: usize) -> Result<PeriodicAddress> {
    if !ifs.is_unimodular() {
        return Err(Error::NotUnimodular);
    }
    if x.len() != ifs.dim() {
        return Err(Error::DimensionMismatch { expected: ifs.dim(), got: x.len() });
    }
    if !ifs.in_box(x) {
        return Err(Error::NotInAttractor);
    }
    let mut seen: BTreeMap<RVec, usize> = BTreeMap::new();
    let mut word = Vec::new();
    let mut a = x.to_vec();
    loop {
        if let Some(&i) = seen.get(&a) {
            let period = word.split_off(i);
            return Ok(PeriodicAddress { pre: word, period });
        }
        if word.len() >= max_steps {
            return Err(Error::BudgetExceeded(alloc::format!("orbit longer than {max_steps}")));
        }
        let j = selector.select(ifs, &a)?;
        let next = ifs.maps()[j].inverse_apply(&a).ok_or(Error::NotUnimodular)?;
        seen.insert(core::mem::replace(&mut a, next), word.len());
        word.push(j);
    }
}

/// Measured period data for a rational point and the ratio L / min(q^D, q^d).
#[derive(Clone, Debug)]
pub struct PeriodBound {
    pub address: PeriodicAddress,
    pub length: usize,
    /// Common denominator of the point.
    pub q: BigInt,
    pub ratio: LogInterval,
}

pub fn common_denominator(x: &[BigRational]) -> BigInt {
    x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn period_length_bound_check(ifs: &RationalIFS, x: &[BigRational]) -> Result<PeriodBound> {
    let address = rational_to_address(ifs, x, default_selector(ifs))?;
    let length = address.total_len();
    let q = common_denominator(x);
    let qd = num_traits::pow(q.clone(), ifs.dim());
    let big = Expr::big(q.clone()).pow(ifs.dim_exponent().expr()).min(&Expr::big(qd));
    let ratio = LogInterval::new(Expr::int(length as i64) / big)?;
    Ok(PeriodBound { address, length, q, ratio })
}

/// Two indices whose length-l prefixes agree; first collision in input order.
pub fn pigeonhole_witness(ifs: &RationalIFS, prefixes: &[Vec<usize>], l: usize) -> Result<(usize, usize)> {
    let cells = (ifs.len() as u128).checked_pow(l as u32);
    if cells.is_some_and(|c| (prefixes.len() as u128) <= c) {
        return Err(Error::InsufficientPoints(cells.unwrap() as usize));
    }
    let mut first: BTreeMap<&[usize], usize> = BTreeMap::new();
    for (i, p) in prefixes.iter().enumerate() {
        if p.len() < l {
            return Err(Error::AddressTooShort { need: l, have: p.len() });
        }
        check_word(ifs, &p[..l])?;
        if let Some(&k) = first.get(&p[..l]) {
            return Ok((k, i));
        }
        first.insert(&p[..l], i);
    }
    Err(Error::InsufficientPoints(prefixes.len()))
}

/// diamUB · τ^l
pub fn prefix_distance_bound(ifs: &RationalIFS, l: usize) -> BigRational {
    ifs.diam_ub() * num_traits::pow(ifs.tau().clone(), l)
}

/// Smallest n with diamUB · τ^n <= width.
pub fn depth_for_width(ifs: &RationalIFS, width: &BigRational) -> Option<usize> {
    let mut bound = ifs.diam_ub().clone();
    let mut n = 0;
    while &bound > width {
        if ifs.tau().is_zero() {
            return Some(n + 1);
        }
        bound *= ifs.tau();
        n += 1;
        if n > 1 << 24 {
            return None;
        }
    }
    Some(n)
}

/// Bounding box of π_1 ∘ … ∘ π_n (attractor box).
pub fn prefix_box(ifs: &RationalIFS, word: &[usize]) -> Result<(RVec, RVec)> {
    check_word(ifs, word)?;
    let (lo, hi) = ifs.attractor_box();
    let (mut lo, mut hi) = (lo.to_vec(), hi.to_vec());
    for &j in word.iter().rev() {
        (lo, hi) = ifs.maps()[j].image_box(&lo, &hi);
    }
    Ok((lo, hi))
}

/// One coordinate of the point with a given address.
#[derive(Clone, Debug)]
pub struct AddressPoint {
    pub ifs: Arc<RationalIFS>,
    pub address: Address,
    pub coord: usize,
}

impl AddressPoint {
    pub fn new(ifs: Arc<RationalIFS>, address: Address) -> Self {
        AddressPoint { ifs, address, coord: 0 }
    }

    pub fn coordinate(&self, coord: usize) -> Self {
        AddressPoint { coord, ..self.clone() }
    }
}

impl ApproximableReal for AddressPoint {
    fn enclose(&self, width: &BigRational) -> Result<Interval> {
        if let Some(x) = self.exact() {
            return Ok(Interval::point(x));
        }
        let n = depth_for_width(&self.ifs, width).ok_or(Error::EnclosureExhausted)?;
        let word = self.address.prefix(n).map_err(|_| Error::EnclosureExhausted)?;
        let (lo, hi) = prefix_box(&self.ifs, &word)?;
        Ok(Interval::new(lo[self.coord].clone(), hi[self.coord].clone()))
    }

    fn exact(&self) -> Option<BigRational> {
        match &self.address {
            Address::Periodic(p) => periodic_fixed_point(&self.ifs, &p.pre, &p.period).ok().map(|v| v[self.coord].clone()),
            _ if self.ifs.diam_ub().is_zero() => Some(self.ifs.attractor_box().0[self.coord].clone()),
            _ => None,
        }
    }
}

/// Exact point of an eventually periodic address, or an enclosure box otherwise.
pub fn zero_seed(ifs: &RationalIFS) -> RVec {
    alloc::vec![BigRational::zero(); ifs.dim()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::affine::AffineContraction;
    use crate::ifs::linalg::IntMat;
    use alloc::vec;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mt() -> RationalIFS {
        RationalIFS::middle_third()
    }

    fn plane() -> RationalIFS {
        let id = IntMat::identity(2);
        let sw = IntMat::new(2, vec![0.into(), 1.into(), 1.into(), 0.into()]);
        let m = |a: &IntMat, b: [i64; 2]| AffineContraction::new(a.clone(), 3.into(), vec![b[0].into(), b[1].into()], 3.into()).unwrap();
        RationalIFS::new(vec![m(&id, [0, 0]), m(&id, [2, 0]), m(&sw, [0, 2])]).unwrap()
    }

    #[test]
    fn eval_prefix_examples() {
        let z = vec![BigRational::zero()];
        assert_eq!(eval_prefix(&mt(), &[0, 1], &z).unwrap(), vec![r(2, 9)]);
        assert_eq!(eval_prefix(&mt(), &[], &[r(5, 7)]).unwrap(), vec![r(5, 7)]);
        assert_eq!(eval_prefix(&mt(), &[1, 1, 1], &z).unwrap(), vec![r(26, 27)]);
        assert_eq!(eval_prefix(&mt(), &[2], &z).unwrap_err(), Error::IndexOutOfRange { index: 2, maps: 2 });
    }

    #[test]
    fn periodic_point_examples() {
        assert_eq!(periodic_fixed_point(&mt(), &[], &[0, 1]).unwrap(), vec![r(1, 4)]);
        assert_eq!(periodic_fixed_point(&mt(), &[0], &[1]).unwrap(), vec![r(1, 3)]);
        assert_eq!(periodic_fixed_point(&mt(), &[], &[1]).unwrap(), vec![r(1, 1)]);
    }

    #[test]
    fn rational_to_address_examples() {
        let sel = DigitSelector;
        let a = rational_to_address(&mt(), &[r(1, 4)], &sel).unwrap();
        assert_eq!((a.pre.clone(), a.period.clone()), (vec![], vec![0, 1]));
        let a = rational_to_address(&mt(), &[r(0, 1)], &sel).unwrap();
        assert_eq!((a.pre.clone(), a.period.clone()), (vec![], vec![0]));
        let a = rational_to_address(&mt(), &[r(1, 3)], &sel).unwrap();
        assert_eq!((a.pre.clone(), a.period.clone(), a.total_len()), (vec![0], vec![1], 2));
        assert_eq!(rational_to_address(&mt(), &[r(1, 2)], &sel).unwrap_err(), Error::NotInAttractor);
    }

    #[test]
    fn box_selector_agrees_with_digit_selector() {
        let ifs = mt();
        for x in [r(1, 4), r(3, 4), r(1, 10), r(1, 3), r(2, 3)] {
            let a = rational_to_address(&ifs, core::slice::from_ref(&x), &BoxSelector::default()).unwrap();
            let b = rational_to_address(&ifs, core::slice::from_ref(&x), &DigitSelector).unwrap();
            assert_eq!(periodic_fixed_point(&ifs, &a.pre, &a.period).unwrap(), vec![x.clone()]);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_unimodular_is_rejected() {
        let ifs = RationalIFS::new(vec![AffineContraction::line(2, 5, 0, 1).unwrap(), AffineContraction::line(1, 5, 4, 5).unwrap()]).unwrap();
        assert_eq!(rational_to_address(&ifs, &[r(0, 1)], &BoxSelector::default()).unwrap_err(), Error::NotUnimodular);
    }

    #[test]
    fn period_bound_examples() {
        let p = period_length_bound_check(&mt(), &[r(1, 4)]).unwrap();
        assert_eq!(p.length, 2);
        // 2 / 4^(log 2/log 3) = 0.834..
        assert!(p.ratio.lo() > &r(833, 1000) && p.ratio.hi() < &r(835, 1000));
        assert_eq!(period_length_bound_check(&mt(), &[r(0, 1)]).unwrap().length, 1);
        assert_eq!(period_length_bound_check(&mt(), &[r(1, 10)]).unwrap().length, 4);
    }

    #[test]
    fn pigeonhole_examples() {
        let ifs = mt();
        let pts = vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![0, 0], vec![1, 0]];
        assert_eq!(pigeonhole_witness(&ifs, &pts, 2).unwrap(), (1, 4));
        assert_eq!(prefix_distance_bound(&ifs, 2), r(1, 9));
        assert_eq!(pigeonhole_witness(&ifs, &pts[..3], 1).unwrap(), (1, 2));
        assert_eq!(pigeonhole_witness(&ifs, &pts[..4], 2).unwrap_err(), Error::InsufficientPoints(4));
    }

    #[test]
    fn plane_round_trip() {
        let ifs = plane();
        assert!(ifs.is_unimodular());
        let x = periodic_fixed_point(&ifs, &[2, 0], &[1, 2, 2]).unwrap();
        let a = rational_to_address(&ifs, &x, default_selector(&ifs)).unwrap();
        assert_eq!(periodic_fixed_point(&ifs, &a.pre, &a.period).unwrap(), x);
    }

    #[test]
    fn address_point_encloses_its_value() {
        let ifs = Arc::new(mt());
        let p = AddressPoint::new(ifs.clone(), Address::generated(|i| i % 2));
        let iv = p.enclose(&r(1, 1000)).unwrap();
        assert!(iv.contains(&r(1, 4)));
        assert!(iv.width() <= r(1, 1000));
        let q = AddressPoint::new(ifs, Address::Periodic(PeriodicAddress::new(vec![], vec![0, 1]).unwrap()));
        assert_eq!(q.exact(), Some(r(1, 4)));
    }

    #[test]
    fn shift_of_periodic_address() {
        let a = PeriodicAddress::new(vec![1], vec![0, 1, 1]).unwrap();
        for n in 0..6 {
            let s = a.shift(n);
            for i in 0..10 {
                assert_eq!(s.symbol(i), a.symbol(i + n));
            }
        }
    }
}
