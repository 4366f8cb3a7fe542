//! Missing-digit Cantor sets C_{b,W}.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::arith::modular::{is_prime_u64, mult_order, split_by_base, FactorBudget};
use crate::arith::real::{Expr, LogInterval};
use crate::error::{Error, Result};
use crate::ifs::system::RationalIFS;

#[derive(Clone, Debug)]
pub struct MissingDigitSet {
    b: u64,
    w: Vec<u64>,
    mask: Vec<bool>,
    delta: LogInterval,
}

/// Preperiod and primitive period of a base-b expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseExpansion {
    pub value: BigRational,
    pub base: u64,
    pub pre: Vec<u64>,
    pub period: Vec<u64>,
}

impl BaseExpansion {
    /// p / q with q = b^N - b^k.
    pub fn to_rational(&self) -> BigRational {
        from_digits(self.base, &self.pre, &self.period)
    }
}

/// Value of 0.pre(period)^∞ in base b.
pub fn from_digits(base: u64, pre: &[u64], period: &[u64]) -> BigRational {
    let b = BigInt::from(base);
    let k = pre.len();
    let n = k + period.len();
    let all = pre.iter().chain(period);
    let big = all.fold(BigInt::zero(), |acc, &c| acc * &b + BigInt::from(c));
    let small = pre.iter().fold(BigInt::zero(), |acc, &c| acc * &b + BigInt::from(c));
    let q = Pow::pow(&b, n) - Pow::pow(&b, k);
    BigRational::new(big - small, q)
}

/// Result of a membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    /// A representation with every digit in W.
    pub witness: Option<(Vec<u64>, Vec<u64>)>,
    /// First digit outside W in the canonical expansion.
    pub canonical_bad: Option<usize>,
    /// Same for the dual expansion ending in (b-1)s, when it exists.
    pub dual_bad: Option<usize>,
    pub outside_hull: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearestPoint {
    pub point: BigRational,
    pub distance: BigRational,
}

/// Digit words rendered as text: 0-9a-z up to base 36, comma lists above.
pub fn format_digits(base: u64, digits: &[u64]) -> String {
    if base <= 36 {
        digits.iter().map(|&d| char::from_digit(d as u32, 36).unwrap()).collect()
    } else {
        let parts: Vec<String> = digits.iter().map(|d| alloc::format!("{d}")).collect();
        parts.join(",")
    }
}

pub fn parse_digits(base: u64, text: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidArgument(alloc::format!("bad digit word `{text}`"));
    let ds: Vec<u64> = if base <= 36 {
        text.chars().map(|c| c.to_digit(36).map(u64::from).ok_or_else(bad)).collect::<Result<_>>()?
    } else {
        text.split(',').map(|t| t.trim().parse::<u64>().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if ds.iter().any(|&d| d >= base) {
        return Err(bad());
    }
    Ok(ds)
}

/// Expansion of 0 <= x < 1 with minimal preperiod and primitive period.
pub fn expand(x: &BigRational, base: u64) -> Result<BaseExpansion> {
    if base < 2 {
        return Err(Error::InvalidArgument("base must be at least 2".into()));
    }
    if x.is_negative() || x >= &BigRational::one() {
        return Err(Error::InvalidArgument("expand needs 0 <= x < 1".into()));
    }
    let q = x.denom().to_biguint().unwrap();
    let bb = BigUint::from(base);
    let (_, c2, v) = split_by_base(&q, &bb);
    let l = mult_order(&bb, &c2, &FactorBudget::default())?;
    let l = l.to_usize().ok_or_else(|| Error::BudgetExceeded("period too long".into()))?;
    let v = v as usize;
    let b = BigInt::from(base);
    let qi = x.denom();
    let mut r = x.numer().clone();
    let mut digits = Vec::with_capacity(v + l);
    let mut r_v = BigInt::zero();
    for i in 0..v + l {
        if i == v {
            r_v = r.clone();
        }
        r *= &b;
        let (d, rem) = r.div_rem(qi);
        digits.push(d.to_u64().unwrap());
        r = rem;
    }
    if v + l == v {
        r_v = r.clone();
    }
    assert_eq!(r, r_v, "period length disagrees with the order formula");
    let period = digits.split_off(v);
    Ok(BaseExpansion { value: x.clone(), base, pre: digits, period })
}

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl MissingDigitSet {
    pub fn new(b: u64, w: &[u64]) -> Result<Self> {
        if b < 3 {
            return Err(Error::InvalidSet("base must be at least 3".into()));
        }
        let set: BTreeSet<u64> = w.iter().copied().collect();
        if set.len() != w.len() || set.iter().any(|&d| d >= b) {
            return Err(Error::InvalidSet("digits must be distinct and below the base".into()));
        }
        if set.len() < 2 || set.len() as u64 > b - 1 {
            return Err(Error::InvalidSet("need 2 <= |W| <= b - 1".into()));
        }
        let w: Vec<u64> = set.into_iter().collect();
        let mut mask = alloc::vec![false; b as usize];
        for &d in &w {
            mask[d as usize] = true;
        }
        let delta = LogInterval::new(Expr::log_ratio(rat(w.len() as u64), rat(b)))?;
        Ok(MissingDigitSet { b, w, mask, delta })
    }

    pub fn middle_third() -> Self {
        MissingDigitSet::new(3, &[0, 2]).unwrap()
    }

    pub fn base(&self) -> u64 {
        self.b
    }

    pub fn digits(&self) -> &[u64] {
        &self.w
    }

    pub fn has(&self, d: u64) -> bool {
        (d as usize) < self.mask.len() && self.mask[d as usize]
    }

    pub fn delta(&self) -> &LogInterval {
        &self.delta
    }

    pub fn min_point(&self) -> BigRational {
        rat(self.w[0]) / rat(self.b - 1)
    }

    pub fn max_point(&self) -> BigRational {
        rat(*self.w.last().unwrap()) / rat(self.b - 1)
    }

    pub fn diam(&self) -> BigRational {
        self.max_point() - self.min_point()
    }

    /// The IFS y -> (y + w)/b, maps in increasing digit order.
    pub fn ifs(&self) -> RationalIFS {
        RationalIFS::missing_digit(self.b, &self.w).expect("valid digit set")
    }

    pub fn is_member(&self, x: &BigRational) -> Membership {
        let outside = Membership { member: false, witness: None, canonical_bad: None, dual_bad: None, outside_hull: true };
        if x < &self.min_point() || x > &self.max_point() {
            return outside;
        }
        if x.is_one() {
            let ok = self.has(self.b - 1);
            return Membership {
                member: ok,
                witness: ok.then(|| (Vec::new(), alloc::vec![self.b - 1])),
                canonical_bad: None,
                dual_bad: if ok { None } else { Some(0) },
                outside_hull: false,
            };
        }
        let e = self.walk(x);
        let canonical_bad = e.bad;
        let member_c = canonical_bad.is_none();
        let mut dual_bad = None;
        let mut dual_ok = false;
        let mut dual = None;
        if e.terminating && !x.is_zero() {
            // digits before the zero tail; last one nonzero
            let mut d = self.terminating_digits(x);
            let n = d.len();
            d[n - 1] -= 1;
            dual_bad = d.iter().position(|&c| !self.has(c));
            if dual_bad.is_none() && !self.has(self.b - 1) {
                dual_bad = Some(n);
            }
            dual_ok = dual_bad.is_none();
            dual = Some(d);
        }
        let witness = if member_c {
            Some((e.head.clone(), e.tail.clone()))
        } else if dual_ok {
            Some((dual.unwrap(), alloc::vec![self.b - 1]))
        } else {
            None
        };
        Membership { member: member_c || dual_ok, witness, canonical_bad, dual_bad, outside_hull: false }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.is_member(x).member
    }

    /// Canonical digit walk of 0 <= x < 1 with early exit at the first bad digit.
    fn walk(&self, x: &BigRational) -> Walk {
        let b = BigInt::from(self.b);
        let q = x.denom();
        let (_, _, v) = split_by_base(&q.to_biguint().unwrap(), &BigUint::from(self.b));
        let v = v as usize;
        let mut r = x.numer().clone();
        let mut head = Vec::new();
        let mut r_v: Option<BigInt> = None;
        let mut i = 0usize;
        loop {
            if r.is_zero() {
                // 0^∞ tail
                let bad = if self.has(0) { None } else { Some(i) };
                let bad = head.iter().position(|&c| !self.has(c)).or(bad);
                let last_nonzero = head.iter().rposition(|&c| c != 0).map_or(0, |k| k + 1);
                head.truncate(last_nonzero);
                return Walk { head, tail: alloc::vec![0], bad, terminating: true };
            }
            if i == v {
                r_v = Some(r.clone());
            } else if i > v && r_v.as_ref() == Some(&r) {
                let tail = head.split_off(v);
                return Walk { head, tail, bad: None, terminating: false };
            }
            r *= &b;
            let (d, rem) = r.div_rem(q);
            let d = d.to_u64().unwrap();
            if !self.has(d) {
                return Walk { head, tail: Vec::new(), bad: Some(i), terminating: self.terminates(q) };
            }
            head.push(d);
            r = rem;
            i += 1;
        }
    }

    fn terminating_digits(&self, x: &BigRational) -> Vec<u64> {
        let b = BigInt::from(self.b);
        let mut r = x.numer().clone();
        let mut out = Vec::new();
        while !r.is_zero() {
            r *= &b;
            let (d, rem) = r.div_rem(x.denom());
            out.push(d.to_u64().unwrap());
            r = rem;
        }
        out
    }

    fn terminates(&self, q: &BigInt) -> bool {
        let (_, c2, _) = split_by_base(&q.to_biguint().unwrap(), &BigUint::from(self.b));
        c2.is_one()
    }

    /// Exact nearest point of C and its distance; ties go to the smaller point.
    pub fn nearest_point(&self, x: &BigRational) -> NearestPoint {
        let (m, mx) = (self.min_point(), self.max_point());
        let b = rat(self.b);
        // point = off + scale * z
        let mut off = BigRational::zero();
        let mut scale = BigRational::one();
        let mut y = x.clone();
        let mut seen = BTreeSet::new();
        let finish = |off: &BigRational, scale: &BigRational, z: BigRational| {
            let point = off + scale * z;
            let distance = (&point - x).abs();
            NearestPoint { point, distance }
        };
        loop {
            if y <= m {
                return finish(&off, &scale, m);
            }
            if y >= mx {
                return finish(&off, &scale, mx);
            }
            if !seen.insert(y.clone()) {
                return NearestPoint { point: x.clone(), distance: BigRational::zero() };
            }
            let by = &y * &b;
            let mut next = None;
            let mut gap = None;
            for (i, &w) in self.w.iter().enumerate() {
                let wr = rat(w);
                let lo = &wr + &m;
                let hi = &wr + &mx;
                if lo <= by && by <= hi {
                    next = Some(wr);
                    break;
                }
                if by < lo {
                    let left = (rat(self.w[i - 1]) + &mx) / &b;
                    let right = lo / &b;
                    gap = Some((left, right));
                    break;
                }
            }
            if let Some(wr) = next {
                off = &off + &scale * &wr / &b;
                scale = &scale / &b;
                y = by - wr;
                continue;
            }
            let (left, right) = gap.expect("y lies in the hull");
            let z = if &y - &left <= &right - &y { left } else { right };
            return finish(&off, &scale, z);
        }
    }

    pub fn distance(&self, x: &BigRational) -> BigRational {
        self.nearest_point(x).distance
    }

    /// φ(x); keyed to membership unless `literal`, which reads the canonical expansion.
    pub fn first_bad_digit(&self, x: &BigRational, literal: bool) -> Option<usize> {
        let m = self.is_member(x);
        if m.outside_hull {
            let e = self.walk_any(x);
            return e;
        }
        if literal {
            return m.canonical_bad;
        }
        if m.member {
            None
        } else {
            m.canonical_bad
        }
    }

    fn walk_any(&self, x: &BigRational) -> Option<usize> {
        if x.is_negative() || x >= &BigRational::one() {
            return None;
        }
        self.walk(x).bad
    }

    /// Position of the first bad digit, counted from 1, over q0^Δ for a non-member
    /// x = p0/q0. The returned index is 0-based.
    pub fn pthm_ratio(&self, x: &BigRational) -> Result<(usize, LogInterval)> {
        if x.is_negative() || x >= &BigRational::one() {
            return Err(Error::InvalidArgument("need 0 <= x < 1".into()));
        }
        if self.contains(x) {
            return Err(Error::MemberInput);
        }
        let phi = self.walk(x).bad.expect("non-member has a bad digit");
        let e = Expr::int(phi as i64 + 1) / Expr::big(x.denom().clone()).pow(self.delta.expr());
        Ok((phi, LogInterval::new(e)?))
    }

    /// Fast membership for 0 <= p/q <= 1 in lowest terms.
    pub fn member_u64(&self, p: u64, q: u64) -> bool {
        if p == q {
            return self.has(self.b - 1);
        }
        let b = self.b as u128;
        let qq = q as u128;
        let mut c2 = q;
        let mut v = 0usize;
        loop {
            let g = c2.gcd(&self.b);
            if g == 1 {
                break;
            }
            c2 /= g;
            v += 1;
        }
        let mut r = p as u128;
        let mut last_nonzero: Option<u64> = None;
        let mut prefix_ok = true;
        let mut i = 0usize;
        let mut r_v = u128::MAX;
        loop {
            if r == 0 {
                if prefix_ok && self.has(0) {
                    return true;
                }
                // dual: last nonzero digit minus one, then (b-1)^∞
                return match last_nonzero {
                    Some(d) if prefix_ok_before_last(self, p, q) => self.has(d - 1) && self.has(self.b - 1),
                    _ => false,
                };
            }
            if i == v {
                r_v = r;
            } else if i > v && r == r_v {
                return prefix_ok;
            }
            let t = r * b;
            let d = (t / qq) as u64;
            r = t % qq;
            if d != 0 {
                last_nonzero = Some(d);
            }
            if !self.has(d) {
                prefix_ok = false;
                if c2 != 1 {
                    return false;
                }
            }
            i += 1;
        }
    }

    /// Members p/q with gcd(p, q) = 1 in the hull, ascending.
    pub fn members_with_denominator(&self, q: u64) -> Vec<u64> {
        let lo = (self.w[0] as u128 * q as u128).div_ceil((self.b - 1) as u128) as u64;
        let hi = (*self.w.last().unwrap() as u128 * q as u128 / (self.b - 1) as u128) as u64;
        (lo..=hi).filter(|&p| p.gcd(&q) == 1 && self.member_u64(p, q)).collect()
    }
}

/// Every digit before the last nonzero one lies in W.
fn prefix_ok_before_last(set: &MissingDigitSet, p: u64, q: u64) -> bool {
    let b = set.b as u128;
    let qq = q as u128;
    let mut r = p as u128;
    let mut digits = Vec::new();
    while r != 0 {
        let t = r * b;
        digits.push((t / qq) as u64);
        r = t % qq;
    }
    digits.pop();
    digits.iter().all(|&d| set.has(d))
}

struct Walk {
    head: Vec<u64>,
    tail: Vec<u64>,
    bad: Option<usize>,
    terminating: bool,
}

/// gcd of the word value and b^N - 1 for a primitive word.
pub fn gcd_pattern(b: u64, word: &[u64]) -> Result<BigInt> {
    let n = word.len();
    if n == 0 || word.iter().any(|&c| c >= b) {
        return Err(Error::InvalidArgument("word must be nonempty with digits below b".into()));
    }
    for k in 1..n {
        if n % k == 0 && (k..n).all(|i| word[i] == word[i - k]) {
            return Err(Error::NonPrimitivePeriod);
        }
    }
    let bb = BigInt::from(b);
    let val = word.iter().fold(BigInt::zero(), |acc, &c| acc * &bb + BigInt::from(c));
    let m = Pow::pow(&bb, n) - BigInt::one();
    Ok(val.gcd(&m))
}

/// gcd · N^(1/Δ) / b^N
pub fn gcd_pattern_ratio(set: &MissingDigitSet, word: &[u64]) -> Result<(BigInt, LogInterval)> {
    let g = gcd_pattern(set.b, word)?;
    let n = word.len() as i64;
    let e = Expr::big(g.clone()) * Expr::int(n).pow(&(Expr::int(1) / set.delta.expr().clone())) / Expr::big(Pow::pow(&BigInt::from(set.b), word.len()));
    Ok((g, LogInterval::new(e)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorDigits {
    /// (b^N - 1)/dN as an N-digit word.
    pub word: Vec<u64>,
    pub w1: BTreeSet<u64>,
    pub w2: BTreeSet<u64>,
    pub equal: bool,
    /// W2 is inside the given digit set.
    pub within_w: bool,
}

/// Digit sets of d' = (b^N - 1)/dN: W1 from positions 0..=φlen, W2 from all N.
pub fn divisor_digit_sets(b: u64, w: &[u64], n: usize, d_n: &BigInt, phi_len: usize) -> Result<DivisorDigits> {
    if b < 2 || n == 0 || !d_n.is_positive() {
        return Err(Error::InvalidArgument("need b >= 2, N >= 1, dN >= 1".into()));
    }
    let bb = BigInt::from(b);
    let m = Pow::pow(&bb, n) - BigInt::one();
    if !(&m % d_n).is_zero() {
        return Err(Error::NotADivisor);
    }
    let mut d = m / d_n;
    let mut word = alloc::vec![0u64; n];
    for i in (0..n).rev() {
        let (qq, r) = d.div_rem(&bb);
        word[i] = r.to_u64().unwrap();
        d = qq;
    }
    let w1: BTreeSet<u64> = word.iter().take(phi_len + 1).copied().collect();
    let w2: BTreeSet<u64> = word.iter().copied().collect();
    let equal = w1 == w2;
    let within_w = w2.iter().all(|d| w.contains(d));
    Ok(DivisorDigits { word, w1, w2, equal, within_w })
}

/// Safe primes q <= q_max coprime to b, with every p where p/q lies in C.
pub fn safe_prime_scan(set: &MissingDigitSet, q_max: u64) -> Vec<(u64, Vec<u64>)> {
    (5..=q_max).filter(|&q| is_safe_prime(q) && q.gcd(&set.b) == 1).map(|q| (q, set.members_with_denominator(q))).collect()
}

pub fn is_safe_prime(q: u64) -> bool {
    q >= 5 && is_prime_u64(q) && is_prime_u64((q - 1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mt() -> MissingDigitSet {
        MissingDigitSet::middle_third()
    }

    #[test]
    fn expand_examples() {
        let e = expand(&r(1, 7), 10).unwrap();
        assert_eq!((e.pre.clone(), e.period.clone()), (vec![], vec![1, 4, 2, 8, 5, 7]));
        let e = expand(&r(1, 6), 10).unwrap();
        assert_eq!((e.pre.clone(), e.period.clone()), (vec![1], vec![6]));
        let e = expand(&r(1, 4), 2).unwrap();
        assert_eq!((e.pre.clone(), e.period.clone()), (vec![0, 1], vec![0]));
        assert_eq!(e.to_rational(), r(1, 4));
    }

    #[test]
    fn expand_round_trips() {
        for q in 1..200i64 {
            for p in 0..q {
                let x = r(p, q);
                for b in [2u64, 3, 10] {
                    assert_eq!(expand(&x, b).unwrap().to_rational(), x);
                }
            }
        }
    }

    #[test]
    fn membership_examples() {
        let c = mt();
        let m = c.is_member(&r(1, 4));
        assert!(m.member);
        assert_eq!(m.witness, Some((vec![], vec![0, 2])));
        let m = c.is_member(&r(1, 3));
        assert!(m.member);
        assert_eq!(m.witness, Some((vec![0], vec![2])));
        let m = c.is_member(&r(1, 2));
        assert!(!m.member);
        assert_eq!(m.canonical_bad, Some(0));
        assert!(c.contains(&r(1, 1)));
        assert!(c.contains(&r(0, 1)));
    }

    #[test]
    fn nearest_point_examples() {
        let c = mt();
        assert_eq!(c.nearest_point(&r(1, 2)), NearestPoint { point: r(1, 3), distance: r(1, 6) });
        assert_eq!(c.nearest_point(&r(1, 4)), NearestPoint { point: r(1, 4), distance: r(0, 1) });
        assert_eq!(c.nearest_point(&r(4, 9)), NearestPoint { point: r(1, 3), distance: r(1, 9) });
        assert_eq!(c.nearest_point(&r(-1, 2)).point, r(0, 1));
        assert_eq!(c.nearest_point(&r(5, 2)).point, r(1, 1));
    }

    #[test]
    fn first_bad_digit_examples() {
        let c = mt();
        assert_eq!(c.first_bad_digit(&r(1, 2), false), Some(0));
        assert_eq!(c.first_bad_digit(&r(1, 4), false), None);
        // 7/9 = 0.21 = 0.2022.. in base 3
        assert_eq!(c.first_bad_digit(&r(7, 9), false), None);
        assert_eq!(c.first_bad_digit(&r(7, 9), true), Some(1));
    }

    #[test]
    fn pthm_ratio_examples() {
        let c = mt();
        let (phi, ratio) = c.pthm_ratio(&r(1, 2)).unwrap();
        assert_eq!(phi, 0);
        assert!((ratio.approx_f64() - 0.6456).abs() < 1e-3);
        let x = from_digits(3, &[], &[0, 2, 0, 2, 0, 2, 1]);
        let (phi, _) = c.pthm_ratio(&x).unwrap();
        assert_eq!(phi, 6);
        assert_eq!(c.pthm_ratio(&r(1, 4)).unwrap_err(), Error::MemberInput);
    }

    #[test]
    fn gcd_pattern_examples() {
        assert_eq!(gcd_pattern(3, &[0, 2]).unwrap(), BigInt::from(2));
        assert_eq!(gcd_pattern(3, &[2, 0]).unwrap(), BigInt::from(2));
        assert_eq!(gcd_pattern(3, &[0, 0]).unwrap_err(), Error::NonPrimitivePeriod);
    }

    #[test]
    fn divisor_digit_examples() {
        let d = divisor_digit_sets(3, &[0, 2], 4, &BigInt::from(2), 0).unwrap();
        assert_eq!(d.word, vec![1, 1, 1, 1]);
        assert!(d.equal);
        let d = divisor_digit_sets(3, &[0, 2], 2, &BigInt::from(8), 0).unwrap();
        assert_eq!(d.word, vec![0, 1]);
        assert_eq!(d.w2, [0, 1].into_iter().collect());
        assert_eq!(divisor_digit_sets(3, &[0, 2], 2, &BigInt::from(9), 0).unwrap_err(), Error::NotADivisor);
    }

    #[test]
    fn safe_prime_examples() {
        let c = mt();
        let s = safe_prime_scan(&c, 20);
        assert_eq!(s.iter().map(|x| x.0).collect::<Vec<_>>(), vec![5, 7, 11]);
        assert!(safe_prime_scan(&c, 4).is_empty());
    }

    #[test]
    fn fast_membership_agrees_with_exact() {
        for (b, w) in [(3u64, vec![0u64, 2]), (4, vec![0, 1, 3]), (5, vec![1, 4]), (10, vec![0, 9])] {
            let c = MissingDigitSet::new(b, &w).unwrap();
            for q in 1..150u64 {
                for p in 0..=q {
                    if p.gcd(&q) != 1 {
                        continue;
                    }
                    let x = BigRational::new(p.into(), q.into());
                    assert_eq!(c.member_u64(p, q), c.contains(&x), "b={b} p/q={p}/{q}");
                }
            }
        }
    }

    #[test]
    fn digit_text_round_trip() {
        assert_eq!(format_digits(3, &[0, 2, 1]), "021");
        assert_eq!(parse_digits(3, "021").unwrap(), vec![0, 2, 1]);
        assert_eq!(format_digits(40, &[0, 39]), "0,39");
        assert_eq!(parse_digits(40, "0,39").unwrap(), vec![0, 39]);
        assert!(parse_digits(3, "3").is_err());
    }

    #[test]
    fn rejects_degenerate_sets() {
        assert!(MissingDigitSet::new(2, &[0, 1]).is_err());
        assert!(MissingDigitSet::new(3, &[0, 1, 2]).is_err());
        assert!(MissingDigitSet::new(3, &[1]).is_err());
    }
}
