//! Rational affine IFS and its derived constants.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::real::{ceil_scaled, floor_scaled, pow2, Expr, LogInterval};
use crate::error::{Error, Result};
use crate::ifs::affine::{AffineContraction, RVec};
use crate::ifs::linalg::IntMat;

/// Grid for outward rounding of box endpoints.
const BOX_BITS: u32 = 64;
const BOX_ITERATIONS: usize = 96;

#[derive(Clone, Debug)]
pub struct RationalIFS {
    maps: Vec<AffineContraction>,
    tau_j: Vec<BigRational>,
    tau: BigRational,
    s_prod: BigInt,
    box_lo: RVec,
    box_hi: RVec,
    diam: BigRational,
    unimodular: bool,
    digits: Option<(u64, Vec<u64>)>,
}

/// Everything `derived_constants` reports.
#[derive(Clone, Debug)]
pub struct DerivedConstants {
    pub j: usize,
    pub d: usize,
    pub tau_j: Vec<BigRational>,
    pub tau: BigRational,
    pub s: BigInt,
    pub mu_j: Vec<Option<LogInterval>>,
    pub mu: Option<LogInterval>,
    /// log J / log(1/τ)
    pub dim_exp: LogInterval,
    pub gamma: Option<LogInterval>,
    pub diam_ub: BigRational,
    /// log|W| / log b for digit-form systems.
    pub delta: Option<LogInterval>,
    pub unimodular: bool,
}

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn round_down(x: &BigRational) -> BigRational {
    BigRational::new(floor_scaled(x, BOX_BITS), pow2(BOX_BITS))
}

fn round_up(x: &BigRational) -> BigRational {
    BigRational::new(ceil_scaled(x, BOX_BITS), pow2(BOX_BITS))
}

/// Recognise y -> y/b + w/b for every map.
fn detect_digits(maps: &[AffineContraction]) -> Option<(u64, Vec<u64>)> {
    let mut base: Option<u64> = None;
    let mut ws = Vec::new();
    for f in maps {
        if f.dim() != 1 || !f.a.at(0, 0).is_positive() {
            return None;
        }
        let ratio = BigRational::new(f.a.at(0, 0).clone(), f.q.clone());
        if !ratio.numer().is_one() {
            return None;
        }
        let b = ratio.denom().to_u64()?;
        if *base.get_or_insert(b) != b {
            return None;
        }
        let w = BigRational::new(f.b[0].clone(), f.s.clone()) * rat(b);
        if !w.is_integer() {
            return None;
        }
        let w = w.to_integer().to_u64()?;
        if w >= b || ws.contains(&w) {
            return None;
        }
        ws.push(w);
    }
    Some((base?, ws))
}

impl RationalIFS {
    pub fn new(maps: Vec<AffineContraction>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(Error::InvalidSet("an IFS needs at least one map".into()));
        };
        let d = first.dim();
        for (j, f) in maps.iter().enumerate() {
            if f.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
            }
            if f.a.row_sum_norm() >= f.q {
                return Err(Error::NotContraction(j));
            }
        }
        let tau_j: Vec<BigRational> = maps.iter().map(|f| f.tau()).collect();
        let tau = tau_j.iter().max().unwrap().clone();
        let s_prod = maps.iter().fold(BigInt::one(), |acc, f| acc * &f.s);
        let unimodular = maps.iter().all(|f| f.is_unimodular());
        let digits = detect_digits(&maps);
        let mut ifs = RationalIFS {
            maps,
            tau_j,
            tau,
            s_prod,
            box_lo: Vec::new(),
            box_hi: Vec::new(),
            diam: BigRational::zero(),
            unimodular,
            digits,
        };
        ifs.compute_box();
        Ok(ifs)
    }

    /// The maps y -> (y + w)/b for w in W.
    pub fn missing_digit(b: u64, w: &[u64]) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidSet("base must be at least 2".into()));
        }
        let mut seen = Vec::new();
        let mut maps = Vec::new();
        for &x in w {
            if x >= b || seen.contains(&x) {
                return Err(Error::InvalidSet(format!("bad digit {x} for base {b}")));
            }
            seen.push(x);
            maps.push(AffineContraction::line(1, b as i64, x as i64, b as i64)?);
        }
        RationalIFS::new(maps)
    }

    pub fn middle_third() -> Self {
        RationalIFS::missing_digit(3, &[0, 2]).unwrap()
    }

    fn compute_box(&mut self) {
        let d = self.dim();
        if let Some((b, ws)) = &self.digits {
            let lo = rat(*ws.iter().min().unwrap()) / rat(b - 1);
            let hi = rat(*ws.iter().max().unwrap()) / rat(b - 1);
            self.diam = &hi - &lo;
            self.box_lo = alloc::vec![lo];
            self.box_hi = alloc::vec![hi];
            return;
        }
        if self.maps.len() == 1 {
            let p = self.maps[0].to_int_affine().fixed_point().expect("contraction has a fixed point");
            self.box_lo = p.clone();
            self.box_hi = p;
            self.diam = BigRational::zero();
            return;
        }
        // seed radius max |b/s| / (1 - τ) gives an invariant box
        let rb = self.maps.iter().flat_map(|f| f.translation()).map(|x| x.abs()).max().unwrap();
        let r = round_up(&(rb / (BigRational::one() - &self.tau)));
        let mut lo: RVec = alloc::vec![-r.clone(); d];
        let mut hi: RVec = alloc::vec![r; d];
        for _ in 0..BOX_ITERATIONS {
            let (mut nl, mut nh) = self.maps[0].image_box(&lo, &hi);
            for f in &self.maps[1..] {
                let (l, h) = f.image_box(&lo, &hi);
                for i in 0..d {
                    if l[i] < nl[i] {
                        nl[i] = l[i].clone();
                    }
                    if h[i] > nh[i] {
                        nh[i] = h[i].clone();
                    }
                }
            }
            // outward rounding clamped to the previous box keeps invariance
            let nl: RVec = nl.iter().zip(&lo).map(|(x, p)| round_down(x).max(p.clone())).collect();
            let nh: RVec = nh.iter().zip(&hi).map(|(x, p)| round_up(x).min(p.clone())).collect();
            if nl == lo && nh == hi {
                break;
            }
            lo = nl;
            hi = nh;
        }
        self.diam = lo.iter().zip(&hi).map(|(l, h)| h - l).max().unwrap();
        self.box_lo = lo;
        self.box_hi = hi;
        debug_assert!(self.box_invariant());
    }

    /// f_j(box) is inside the box for every j, checked on corners.
    pub fn box_invariant(&self) -> bool {
        let d = self.dim();
        for f in &self.maps {
            for mask in 0u32..(1 << d) {
                let corner: RVec = (0..d).map(|i| if mask >> i & 1 == 1 { self.box_hi[i].clone() } else { self.box_lo[i].clone() }).collect();
                if !self.in_box(&f.apply(&corner)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn in_box(&self, x: &[BigRational]) -> bool {
        x.iter().zip(&self.box_lo).zip(&self.box_hi).all(|((v, l), h)| l <= v && v <= h)
    }

    pub fn maps(&self) -> &[AffineContraction] {
        &self.maps
    }

    pub fn map(&self, j: usize) -> Result<&AffineContraction> {
        self.maps.get(j).ok_or(Error::IndexOutOfRange { index: j, maps: self.maps.len() })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn tau(&self) -> &BigRational {
        &self.tau
    }

    pub fn tau_j(&self) -> &[BigRational] {
        &self.tau_j
    }

    pub fn s_prod(&self) -> &BigInt {
        &self.s_prod
    }

    pub fn diam_ub(&self) -> &BigRational {
        &self.diam
    }

    pub fn attractor_box(&self) -> (&[BigRational], &[BigRational]) {
        (&self.box_lo, &self.box_hi)
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular
    }

    /// (b, W in map order) when every map is y -> (y + w)/b.
    pub fn digits(&self) -> Option<(u64, &[u64])> {
        self.digits.as_ref().map(|(b, w)| (*b, w.as_slice()))
    }

    /// Largest denominator q_j.
    pub fn q_max(&self) -> BigInt {
        self.maps.iter().map(|f| f.q.clone()).max().unwrap()
    }

    /// log J / log(1/τ); zero when J = 1 or τ = 0.
    pub fn dim_exponent(&self) -> LogInterval {
        let j = self.maps.len() as u64;
        if j == 1 || self.tau.is_zero() {
            return LogInterval::exact(BigRational::zero());
        }
        LogInterval::new(Expr::log_ratio(rat(j), self.tau.recip())).expect("positive logarithms")
    }

    pub fn derived_constants(&self) -> DerivedConstants {
        let mu_j: Vec<Option<LogInterval>> = self
            .maps
            .iter()
            .zip(&self.tau_j)
            .map(|(f, t)| {
                if t.is_zero() || f.q.is_one() {
                    return None;
                }
                // log τ_j / log q_j
                let e = Expr::rational(t.clone()).ln() / Expr::big(f.q.clone()).ln();
                LogInterval::new(e).ok()
            })
            .collect();
        let mu = mu_j.iter().flatten().map(|l| l.expr().clone()).reduce(|a, b| a.max(&b)).and_then(|e| LogInterval::new(e).ok());
        let gamma = if self.dim() == 1 {
            self.maps
                .iter()
                .filter_map(|f| {
                    let r = BigRational::new(f.a.at(0, 0).abs(), f.q.clone());
                    if r.is_zero() || r.denom().is_one() {
                        return None;
                    }
                    Some(Expr::big(r.numer().clone()).ln() / Expr::big(r.denom().clone()).ln())
                })
                .reduce(|a, b| a.max(&b))
                .and_then(|e| LogInterval::new(e).ok())
        } else {
            None
        };
        let delta = self.digits.as_ref().map(|(b, w)| {
            LogInterval::new(Expr::log_ratio(rat(w.len() as u64), rat(*b))).expect("positive logarithms")
        });
        DerivedConstants {
            j: self.maps.len(),
            d: self.dim(),
            tau_j: self.tau_j.clone(),
            tau: self.tau.clone(),
            s: self.s_prod.clone(),
            mu_j,
            mu,
            dim_exp: self.dim_exponent(),
            gamma,
            diam_ub: self.diam.clone(),
            delta,
            unimodular: self.unimodular,
        }
    }

    /// Parse the text format: `dim d` followed by `map`/`A`/`q`/`b`/`s` blocks,
    /// or a single `missing-digit b=.. W=..` line.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(|l| l.split('#').next().unwrap().trim()).filter(|l| !l.is_empty()).collect();
        let Some(head) = lines.first() else {
            return Err(Error::InvalidSet("empty description".into()));
        };
        if let Some(rest) = head.strip_prefix("missing-digit") {
            if lines.len() > 1 {
                return Err(Error::InvalidSet("trailing lines after missing-digit".into()));
            }
            let (b, w) = parse_missing_digit(rest)?;
            return RationalIFS::missing_digit(b, &w);
        }
        let d: usize = head
            .strip_prefix("dim")
            .ok_or_else(|| Error::InvalidSet("expected `dim <d>`".into()))?
            .trim()
            .parse()
            .map_err(|_| Error::InvalidSet("bad dimension".into()))?;
        if d == 0 {
            return Err(Error::InvalidSet("dimension must be at least 1".into()));
        }
        let mut maps = Vec::new();
        let mut i = 1;
        while i < lines.len() {
            if lines[i] != "map" {
                return Err(Error::InvalidSet(format!("expected `map`, found `{}`", lines[i])));
            }
            if i + 4 >= lines.len() {
                return Err(Error::InvalidSet("truncated map block".into()));
            }
            let a = ints(lines[i + 1], "A", d * d)?;
            let q = ints(lines[i + 2], "q", 1)?.pop().unwrap();
            let b = ints(lines[i + 3], "b", d)?;
            let s = ints(lines[i + 4], "s", 1)?.pop().unwrap();
            let j = maps.len();
            let f = AffineContraction::new(IntMat::new(d, a), q, b, s).map_err(|e| match e {
                Error::NotContraction(_) => Error::NotContraction(j),
                e => e,
            })?;
            maps.push(f);
            i += 5;
        }
        RationalIFS::new(maps)
    }
}

fn ints(line: &str, key: &str, count: usize) -> Result<Vec<BigInt>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::InvalidSet(format!("expected `{key}` line, found `{line}`")));
    }
    let v: Vec<BigInt> = it
        .map(|t| t.parse::<BigInt>().map_err(|_| Error::InvalidSet(format!("bad integer `{t}`"))))
        .collect::<Result<_>>()?;
    if v.len() != count {
        return Err(Error::InvalidSet(format!("`{key}` needs {count} integers, got {}", v.len())));
    }
    Ok(v)
}

/// `b=<int> W=<d,d,..>`
pub fn parse_missing_digit(rest: &str) -> Result<(u64, Vec<u64>)> {
    let mut b = None;
    let mut w = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("b=") {
            b = Some(v.parse::<u64>().map_err(|_| Error::InvalidSet(format!("bad base `{v}`")))?);
        } else if let Some(v) = tok.strip_prefix("W=") {
            let ds: Vec<u64> = v
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| Error::InvalidSet(format!("bad digit `{x}`"))))
                .collect::<Result<_>>()?;
            w = Some(ds);
        } else {
            return Err(Error::InvalidSet(format!("unexpected token `{tok}`")));
        }
    }
    match (b, w) {
        (Some(b), Some(w)) => Ok((b, w)),
        _ => Err(Error::InvalidSet(String::from("missing-digit needs b= and W="))),
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
    fn middle_third_constants() {
        let c = RationalIFS::middle_third().derived_constants();
        assert_eq!(c.tau, r(1, 3));
        assert_eq!(c.j, 2);
        assert_eq!(c.diam_ub, r(1, 1));
        assert!(c.dim_exp.lo() < &r(6310, 10000) && c.dim_exp.hi() > &r(6309, 10000));
        let delta = c.delta.unwrap();
        assert!(delta.lo() < &r(6310, 10000) && delta.hi() > &r(6309, 10000));
        assert!(c.gamma.unwrap().interval().contains(&BigRational::zero()));
        assert!(c.unimodular);
    }

    #[test]
    fn single_map_collapses_to_fixed_point() {
        let ifs = RationalIFS::new(vec![AffineContraction::line(1, 2, 0, 1).unwrap()]).unwrap();
        let c = ifs.derived_constants();
        assert!(c.diam_ub.is_zero());
        assert!(c.dim_exp.hi().is_zero());
    }

    #[test]
    fn base_five_two_digits() {
        let ifs = RationalIFS::missing_digit(5, &[0, 4]).unwrap();
        let c = ifs.derived_constants();
        assert_eq!(c.diam_ub, r(1, 1));
        let delta = c.delta.unwrap();
        // log 2 / log 5 = 0.43067..
        assert!(delta.lo() < &r(43068, 100000) && delta.hi() > &r(43067, 100000));
    }

    #[test]
    fn general_box_is_invariant_and_tight() {
        let ifs = RationalIFS::new(vec![AffineContraction::line(1, 4, 0, 1).unwrap(), AffineContraction::line(-1, 4, 1, 1).unwrap()]).unwrap();
        assert!(ifs.digits().is_none());
        assert!(ifs.box_invariant());
        let (lo, hi) = ifs.attractor_box();
        // hull is [0, 1]: fixed points 0 and 4/5, the second map sends 0 to 1
        assert!(lo[0] <= BigRational::zero() && lo[0] > r(-1, 1000));
        assert!(hi[0] >= BigRational::one() && hi[0] < r(1001, 1000));
    }

    #[test]
    fn parse_both_formats() {
        let a = RationalIFS::parse("missing-digit b=3 W=0,2").unwrap();
        assert_eq!(a.digits().unwrap(), (3, &[0u64, 2][..]));
        let text = "dim 2\nmap\nA 1 0 0 1\nq 3\nb 0 0\ns 3\nmap\nA 0 1 1 0\nq 3\nb 0 2\ns 3\n";
        let b = RationalIFS::parse(text).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.dim(), 2);
        assert!(b.is_unimodular());
        assert!(b.box_invariant());
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(RationalIFS::parse("").is_err());
        assert!(RationalIFS::parse("dim 1\nmap\nA 3\nq 3\nb 0\ns 1").unwrap_err() == Error::NotContraction(0));
        assert!(RationalIFS::parse("missing-digit b=3 W=0,3").is_err());
        assert!(RationalIFS::parse("dim 1\nmap\nA 1 2\nq 3\nb 0\ns 1").is_err());
    }
}
