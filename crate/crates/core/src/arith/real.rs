//! Rational interval enclosures of real expressions.
//!
//! Every value is carried as `[lo, hi]` with rational endpoints rounded
//! outward to a dyadic grid. `ln` and `exp` are evaluated in fixed point
//! with floor/ceil directed rounding, so the enclosures are rigorous at
//! every precision and shrink as the precision grows.

use alloc::sync::Arc;
use core::cmp::Ordering;
use core::fmt;
use core::ops;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::approx::ApproximableReal;
use crate::error::{Error, Result};

/// Bits used for the first evaluation attempt.
pub const START_PREC: u32 = 64;
/// Refinement stops (with `Undecided`) past this precision.
pub const MAX_PREC: u32 = 1 << 13;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn pow2(e: u32) -> BigInt {
    BigInt::one() << e as usize
}

/// floor(x * 2^p)
pub(crate) fn floor_scaled(x: &BigRational, p: u32) -> BigInt {
    (x.numer() << p as usize).div_floor(x.denom())
}

/// ceil(x * 2^p)
pub(crate) fn ceil_scaled(x: &BigRational, p: u32) -> BigInt {
    -((-x.numer() << p as usize).div_floor(x.denom()))
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn scaled(n: BigInt, p: u32) -> BigRational {
    BigRational::new(n, pow2(p))
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / rat(2)
    }

    /// Round outward to multiples of 2^-p.
    pub fn round_out(&self, p: u32) -> Interval {
        if self.lo.denom().is_one() && self.hi.denom().is_one() {
            return self.clone();
        }
        Interval {
            lo: scaled(floor_scaled(&self.lo, p), p),
            hi: scaled(ceil_scaled(&self.hi, p), p),
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn recip(&self, prec: u32) -> Result<Interval> {
        if self.contains_zero() {
            return Err(if self.is_point() {
                Error::Domain("division by zero")
            } else {
                Error::Undecided(prec)
            });
        }
        Ok(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn div(&self, o: &Interval, prec: u32) -> Result<Interval> {
        Ok(self.mul(&o.recip(prec)?))
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            Interval { lo: BigRational::zero(), hi: m }
        }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval {
            lo: if self.lo > o.lo { self.lo.clone() } else { o.lo.clone() },
            hi: if self.hi > o.hi { self.hi.clone() } else { o.hi.clone() },
        }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval {
            lo: if self.lo < o.lo { self.lo.clone() } else { o.lo.clone() },
            hi: if self.hi < o.hi { self.hi.clone() } else { o.hi.clone() },
        }
    }

    /// Certified order against another interval, if the two are disjoint
    /// (or equal points).
    pub fn order(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && o.is_point() && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn ln(&self, prec: u32) -> Result<Interval> {
        if !self.hi.is_positive() {
            return Err(Error::Domain("log of non-positive value"));
        }
        if !self.lo.is_positive() {
            return Err(Error::Undecided(prec));
        }
        if self.is_point() {
            return ln_rat(&self.lo, prec);
        }
        Ok(Interval { lo: ln_rat(&self.lo, prec)?.lo, hi: ln_rat(&self.hi, prec)?.hi })
    }

    pub fn exp(&self, prec: u32) -> Result<Interval> {
        if self.is_point() {
            return exp_rat(&self.lo, prec);
        }
        Ok(Interval { lo: exp_rat(&self.lo, prec)?.lo, hi: exp_rat(&self.hi, prec)?.hi })
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    /// Display-only midpoint.
    pub fn mid_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// 2*atanh(z) for z = num/den in [0, 1/3], returned scaled by 2^w.
fn two_atanh_fixed(num: &BigInt, den: &BigInt, w: u32) -> (BigInt, BigInt) {
    let one = pow2(w);
    let zlo = (num << w as usize).div_floor(den);
    let zhi = ceil_div(&(num << w as usize), den);
    let z2lo = (&zlo * &zlo) >> w as usize;
    let z2hi = ceil_div(&(&zhi * &zhi), &one);
    let (mut plo, mut phi) = (zlo, zhi);
    let (mut slo, mut shi) = (BigInt::zero(), BigInt::zero());
    let mut i: u64 = 0;
    let small = BigInt::from(16);
    loop {
        let d = BigInt::from(2 * i + 1);
        slo += plo.div_floor(&d);
        shi += ceil_div(&phi, &d);
        plo = (&plo * &z2lo) >> w as usize;
        phi = ceil_div(&(&phi * &z2hi), &one);
        i += 1;
        if phi <= small {
            // tail <= P_i / (1 - z^2) <= 9/8 P_i
            shi += ceil_div(&(&phi * 9), &BigInt::from(8));
            break;
        }
    }
    (slo << 1usize, shi << 1usize)
}

/// Enclosure of ln(x) for rational x > 0, endpoints on the 2^-prec grid.
pub fn ln_rat(x: &BigRational, prec: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Domain("log of non-positive value"));
    }
    if x.is_one() {
        return Ok(Interval::point(BigRational::zero()));
    }
    let (n, d) = (x.numer(), x.denom());
    let mut k = n.bits() as i64 - d.bits() as i64;
    // y = x / 2^k, normalised into [1, 2)
    let (mut yn, mut yd) = if k >= 0 { (n.clone(), d << k as usize) } else { (n << (-k) as usize, d.clone()) };
    if yn < yd {
        yn <<= 1usize;
        k -= 1;
    }
    if yn >= (&yd << 1usize) {
        yd <<= 1usize;
        k += 1;
    }
    let w = prec + 32 + 64 - (k.unsigned_abs().leading_zeros());
    let (ylo, yhi) = two_atanh_fixed(&(&yn - &yd), &(&yn + &yd), w);
    let (l2lo, l2hi) = two_atanh_fixed(&BigInt::one(), &BigInt::from(3), w);
    let kb = BigInt::from(k);
    let (lo, hi) = if k >= 0 { (&kb * &l2lo + ylo, &kb * &l2hi + yhi) } else { (&kb * &l2hi + ylo, &kb * &l2lo + yhi) };
    let lo = scaled(lo, w);
    let hi = scaled(hi, w);
    Ok(Interval { lo: scaled(floor_scaled(&lo, prec), prec), hi: scaled(ceil_scaled(&hi, prec), prec) })
}

/// Enclosure of exp(r) for rational r, endpoints on the 2^-prec grid.
pub fn exp_rat(r: &BigRational, prec: u32) -> Result<Interval> {
    if r.is_zero() {
        return Ok(Interval::point(BigRational::one()));
    }
    if r.is_negative() {
        // guard bits for the reciprocal
        let inner = exp_rat(&-r, prec + 8)?;
        let iv = Interval { lo: inner.hi.recip(), hi: inner.lo.recip() };
        return Ok(iv.round_out(prec));
    }
    // magnitude guard: exp(r) < 2^(3r/2 + 1)
    let mag = (r.ceil().to_integer() * BigInt::from(3) / BigInt::from(2) + BigInt::one()).to_u64().ok_or(Error::Domain("exp argument too large"))?;
    if mag > 1 << 24 {
        return Err(Error::Domain("exp argument too large"));
    }
    // k halvings bring r below 1/2
    let mut k: u32 = 0;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut y = r.clone();
    while y > half {
        y /= rat(2);
        k += 1;
    }
    let w = prec + k + 48 + mag as u32;
    let one = pow2(w);
    let ylo = floor_scaled(&y, w);
    let yhi = ceil_scaled(&y, w);
    let (mut tlo, mut thi) = (one.clone(), one.clone());
    let (mut slo, mut shi) = (BigInt::zero(), BigInt::zero());
    let mut i: u64 = 1;
    let small = BigInt::from(16);
    loop {
        slo += &tlo;
        shi += &thi;
        tlo = (&tlo * &ylo).div_floor(&(&one * BigInt::from(i)));
        thi = ceil_div(&(&thi * &yhi), &(&one * BigInt::from(i)));
        i += 1;
        if thi <= small {
            // ratio of consecutive terms is at most 1/2
            shi += &thi * 2;
            break;
        }
    }
    for _ in 0..k {
        slo = (&slo * &slo) >> w as usize;
        shi = ceil_div(&(&shi * &shi), &one);
    }
    let lo = scaled(slo, w);
    let hi = scaled(shi, w);
    Ok(Interval { lo: scaled(floor_scaled(&lo, prec), prec), hi: scaled(ceil_scaled(&hi, prec), prec) })
}

#[derive(Debug)]
pub enum Node {
    Const(BigRational),
    Real(Arc<dyn ApproximableReal>),
    Ln(Expr),
    Exp(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Abs(Expr),
    Max(Expr, Expr),
    Min(Expr, Expr),
    /// base^exponent for a positive base.
    Pow(Expr, Expr),
}

/// A real-valued expression tree, cheap to clone.
#[derive(Clone, Debug)]
pub struct Expr(pub Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn rational(x: BigRational) -> Expr {
        Expr(Arc::new(Node::Const(x)))
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(rat(n))
    }

    pub fn big(n: BigInt) -> Expr {
        Expr::rational(BigRational::from_integer(n))
    }

    pub fn real(x: Arc<dyn ApproximableReal>) -> Expr {
        Expr(Arc::new(Node::Real(x)))
    }

    pub fn ln(&self) -> Expr {
        Expr(Arc::new(Node::Ln(self.clone())))
    }

    pub fn exp(&self) -> Expr {
        Expr(Arc::new(Node::Exp(self.clone())))
    }

    pub fn abs(&self) -> Expr {
        Expr(Arc::new(Node::Abs(self.clone())))
    }

    pub fn max(&self, o: &Expr) -> Expr {
        Expr(Arc::new(Node::Max(self.clone(), o.clone())))
    }

    pub fn min(&self, o: &Expr) -> Expr {
        Expr(Arc::new(Node::Min(self.clone(), o.clone())))
    }

    pub fn pow(&self, e: &Expr) -> Expr {
        Expr(Arc::new(Node::Pow(self.clone(), e.clone())))
    }

    /// ln(a)/ln(c) for positive rationals.
    pub fn log_ratio(a: BigRational, c: BigRational) -> Expr {
        Expr::rational(a).ln() / Expr::rational(c).ln()
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, prec: u32) -> Result<Interval> {
        let p = prec + 4;
        let iv = match self.node() {
            Node::Const(c) => return Ok(Interval::point(c.clone())),
            Node::Real(x) => {
                if let Some(v) = x.exact() {
                    return Ok(Interval::point(v));
                }
                x.enclose(&BigRational::new(BigInt::one(), pow2(p)))?
            }
            Node::Ln(a) => a.eval(p)?.ln(p)?,
            Node::Exp(a) => a.eval(p)?.exp(p)?,
            Node::Add(a, b) => a.eval(p)?.add(&b.eval(p)?),
            Node::Sub(a, b) => a.eval(p)?.sub(&b.eval(p)?),
            Node::Mul(a, b) => a.eval(p)?.mul(&b.eval(p)?),
            Node::Div(a, b) => a.eval(p)?.div(&b.eval(p)?, p)?,
            Node::Neg(a) => a.eval(p)?.neg(),
            Node::Abs(a) => a.eval(p)?.abs(),
            Node::Max(a, b) => a.eval(p)?.max(&b.eval(p)?),
            Node::Min(a, b) => a.eval(p)?.min(&b.eval(p)?),
            Node::Pow(b, e) => {
                let bv = b.eval(p + 8)?;
                let ev = e.eval(p + 8)?;
                if ev.is_point() && ev.lo.is_zero() {
                    return Ok(Interval::point(BigRational::one()));
                }
                if bv.is_point() && bv.lo.is_one() {
                    return Ok(Interval::point(BigRational::one()));
                }
                if ev.is_point() && ev.lo.is_integer() && bv.is_point() {
                    if let Some(k) = ev.lo.to_integer().to_i32() {
                        if k.unsigned_abs() <= 4096 {
                            return Ok(Interval::point(num_traits::pow::Pow::pow(&bv.lo, k)));
                        }
                    }
                }
                ev.mul(&bv.ln(p + 8)?).exp(p)?
            }
        };
        Ok(iv.round_out(prec + 2))
    }

    /// Evaluate, doubling the precision until the width is at most `width`.
    pub fn enclose(&self, width: &BigRational) -> Result<Interval> {
        let mut prec = START_PREC;
        loop {
            match self.eval(prec) {
                Ok(iv) if &iv.width() <= width => return Ok(iv),
                Ok(_) | Err(Error::Undecided(_)) => {}
                Err(e) => return Err(e),
            }
            if prec >= MAX_PREC {
                return Err(Error::Undecided(prec));
            }
            prec *= 2;
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr(Arc::new(Node::Add(self, o)))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr(Arc::new(Node::Sub(self, o)))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr(Arc::new(Node::Mul(self, o)))
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr(Arc::new(Node::Div(self, o)))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(Node::Neg(self)))
    }
}

/// Decide the order of two expressions by refining both until their
/// enclosures separate. Equality is only reported when both evaluate to
/// the same exact rational.
pub fn compare(a: &Expr, b: &Expr) -> Result<Ordering> {
    compare_with_limit(a, b, MAX_PREC)
}

pub fn compare_with_limit(a: &Expr, b: &Expr, max_prec: u32) -> Result<Ordering> {
    let mut prec = START_PREC;
    loop {
        let r = a.eval(prec).and_then(|x| b.eval(prec).map(|y| (x, y)));
        match r {
            Ok((x, y)) => {
                if let Some(o) = x.order(&y) {
                    return Ok(o);
                }
            }
            Err(Error::Undecided(_)) => {}
            Err(e) => return Err(e),
        }
        if prec >= max_prec {
            return Err(Error::Undecided(prec));
        }
        prec *= 2;
    }
}

/// A refinable enclosure of a real expression.
#[derive(Clone, Debug)]
pub struct LogInterval {
    expr: Expr,
    enc: Interval,
    prec: u32,
}

impl LogInterval {
    pub fn new(expr: Expr) -> Result<Self> {
        let mut prec = START_PREC;
        loop {
            match expr.eval(prec) {
                Ok(enc) => return Ok(LogInterval { expr, enc, prec }),
                Err(Error::Undecided(_)) if prec < MAX_PREC => prec *= 2,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn exact(x: BigRational) -> Self {
        LogInterval { expr: Expr::rational(x.clone()), enc: Interval::point(x), prec: START_PREC }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn lo(&self) -> &BigRational {
        &self.enc.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.enc.hi
    }

    pub fn interval(&self) -> &Interval {
        &self.enc
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Double the working precision.
    pub fn refine(&mut self) -> Result<()> {
        if self.enc.is_point() {
            return Ok(());
        }
        if self.prec >= MAX_PREC {
            return Err(Error::Undecided(self.prec));
        }
        self.prec *= 2;
        self.enc = self.expr.eval(self.prec)?;
        Ok(())
    }

    pub fn refine_to(&mut self, width: &BigRational) -> Result<()> {
        while &self.enc.width() > width {
            self.refine()?;
        }
        Ok(())
    }

    /// Display-only decimal value.
    pub fn approx_f64(&self) -> f64 {
        self.enc.mid_f64()
    }

    pub fn compare(&self, other: &LogInterval) -> Result<Ordering> {
        if let Some(o) = self.enc.order(&other.enc) {
            return Ok(o);
        }
        compare(&self.expr, &other.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn approx(iv: &Interval, v: f64, tol: f64) {
        assert!(iv.lo_f64() <= v + tol && iv.hi_f64() >= v - tol, "{} does not contain {}", iv, v);
    }

    #[test]
    fn ln_encloses_reference_values() {
        for (x, v) in [(r(2, 1), core::f64::consts::LN_2), (r(3, 1), 1.0986122886681098), (r(1, 10), -core::f64::consts::LN_10), (r(7, 5), 0.3364722366212129)] {
            let iv = ln_rat(&x, 80).unwrap();
            approx(&iv, v, 1e-15);
            assert!(iv.width() < r(1, 1 << 60));
        }
    }

    #[test]
    fn exp_encloses_reference_values() {
        for (x, v) in [(r(1, 1), core::f64::consts::E), (r(-3, 2), 0.22313016014842982), (r(10, 1), 22026.465794806718)] {
            let iv = exp_rat(&x, 80).unwrap();
            approx(&iv, v, 1e-10);
        }
    }

    #[test]
    fn exp_ln_roundtrip_contains_input() {
        let x = r(355, 113);
        let l = ln_rat(&x, 120).unwrap();
        let back = l.exp(120).unwrap();
        assert!(back.contains(&x));
    }

    #[test]
    fn compare_separates_close_values() {
        // ln 2 / ln 3 vs 0.6309
        let d = Expr::log_ratio(r(2, 1), r(3, 1));
        assert_eq!(compare(&d, &Expr::rational(r(6309, 10000))).unwrap(), Ordering::Greater);
        assert_eq!(compare(&d, &Expr::rational(r(6310, 10000))).unwrap(), Ordering::Less);
    }

    #[test]
    fn compare_detects_exact_equality() {
        let a = Expr::int(3) * Expr::rational(r(1, 3));
        assert_eq!(compare(&a, &Expr::int(1)).unwrap(), Ordering::Equal);
    }

    #[test]
    fn pow_matches_exponent_algebra() {
        // 3^(ln2/ln3) = 2
        let d = Expr::log_ratio(r(2, 1), r(3, 1));
        let v = Expr::int(3).pow(&d).eval(100).unwrap();
        assert!(v.contains(&r(2, 1)));
        assert!(v.width() < BigRational::new(BigInt::one(), BigInt::one() << 80usize));
    }

    #[test]
    fn log_interval_refines() {
        let mut li = LogInterval::new(Expr::int(5).ln()).unwrap();
        let w0 = li.interval().width();
        li.refine().unwrap();
        assert!(li.interval().width() < w0);
        li.refine_to(&r(1, 1 << 30)).unwrap();
        assert!(li.interval().width() <= r(1, 1 << 30));
    }
}
