//! Successive minima of the lattice {(m, mξ - n)} against the boxes
//! [-T, T] x [-1/T, 1/T], and finite-depth exponent estimates.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::cf::ContinuedFraction;
use crate::arith::real::{exp_rat, ln_rat, pow2, Expr, Interval, LogInterval};
use crate::arith::ApproximableReal;
use crate::digits::MissingDigitSet;
use crate::error::{Error, Result};

/// Working precision for candidate evaluation, in bits.
const SAMPLE_PREC: u32 = 96;
/// Every m up to this bound is tried with the three nearest n.
const BRUTE_M: u64 = 64;

/// (m, n)
pub type LatticePoint = (BigInt, BigInt);

fn rb(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn exact_hit(xi: &Arc<dyn ApproximableReal>, m: &BigInt, n: &BigInt) -> bool {
    xi.exact().is_some_and(|x| x * rb(m) == rb(n))
}

fn residual(xi: &Arc<dyn ApproximableReal>, m: &BigInt, n: &BigInt) -> Expr {
    (Expr::big(m.clone()) * Expr::real(xi.clone()) - Expr::big(n.clone())).abs()
}

/// L_(m,n)(t) = max{log m - t, log|mξ - n| + t}; for m = 0 this is log|n| + t.
pub fn l_expr(m: &BigInt, n: &BigInt, xi: &Arc<dyn ApproximableReal>, t: &BigRational) -> Result<Expr> {
    if m.is_negative() {
        return Err(Error::InvalidArgument("m must be non-negative".into()));
    }
    let t = Expr::rational(t.clone());
    if m.is_zero() {
        if n.is_zero() {
            return Err(Error::InvalidArgument("(m, n) must be nonzero".into()));
        }
        return Ok(Expr::big(n.abs()).ln() + t);
    }
    if exact_hit(xi, m, n) {
        return Err(Error::ExactHit);
    }
    Ok((Expr::big(m.clone()).ln() - t.clone()).max(&(residual(xi, m, n).ln() + t)))
}

pub fn l_function(m: &BigInt, n: &BigInt, xi: &Arc<dyn ApproximableReal>, t: &BigRational) -> Result<LogInterval> {
    LogInterval::new(l_expr(m, n, xi, t)?)
}

#[derive(Clone, Debug)]
pub struct MinimaSample {
    pub t: BigRational,
    pub l1: Interval,
    pub l2: Interval,
    /// Realizer of the first minimum, (m, n).
    pub r1: LatticePoint,
    /// Realizer of the second minimum, independent of r1.
    pub r2: LatticePoint,
    /// r1 is a convergent, an intermediate fraction, or (0, 1).
    pub r1_convergent: bool,
    /// L1 + L2 does not lie certifiably outside [-log 2, 0].
    pub band_ok: bool,
    /// r1 hits ξ exactly; the profile stops here.
    pub exact_hit: bool,
}

#[derive(Clone, Debug)]
pub struct MinimaProfile {
    pub samples: Vec<MinimaSample>,
    /// The t at which a rational ξ was hit exactly.
    pub terminal: Option<BigRational>,
}

impl MinimaProfile {
    pub fn band_violations(&self) -> usize {
        self.samples.iter().filter(|s| !s.band_ok).count()
    }
}

struct Candidate {
    point: LatticePoint,
    value: Interval,
    convergent: bool,
    hit: bool,
}

fn independent(a: &LatticePoint, b: &LatticePoint) -> bool {
    !(&a.0 * &b.1 - &a.1 * &b.0).is_zero()
}

fn evaluate(xi: &Arc<dyn ApproximableReal>, t: &BigRational, m: &BigInt, n: &BigInt, convergent: bool) -> Result<Candidate> {
    let hit = !m.is_zero() && exact_hit(xi, m, n);
    let e = if hit { Expr::big(m.clone()).ln() - Expr::rational(t.clone()) } else { l_expr(m, n, xi, t)? };
    let mut li = LogInterval::new(e)?;
    li.refine_to(&BigRational::new(BigInt::one(), pow2(SAMPLE_PREC / 2)))?;
    let value = li.interval().clone();
    Ok(Candidate { point: (m.clone(), n.clone()), value, convergent, hit })
}

/// Prefix list with (p, q) = (1, 0) ahead of the convergents.
fn extended(cf: &ContinuedFraction) -> Vec<(BigInt, BigInt)> {
    let mut v = vec![(BigInt::one(), BigInt::zero())];
    v.extend(cf.convergents.iter().cloned());
    v
}

/// Grow the expansion past the denominator bound for parameter t.
pub fn prepare(cf: &mut ContinuedFraction, t: &BigRational, max_bits: u64) -> Result<()> {
    let bound = exp_rat(&(t * BigRational::from_integer(2.into())), 64)?.hi.ceil().to_integer() + 1u32;
    if bound.bits() > max_bits {
        return Err(Error::SearchExhausted);
    }
    cf.extend_past_denominator(&bound)?;
    // one more so that the intermediate fractions after the last useful convergent are known
    let n = cf.convergents.len() + 1;
    match cf.extend_to(n) {
        Ok(()) | Err(Error::EnclosureExhausted) => Ok(()),
        Err(e) => Err(e),
    }
}

/// One sample of the profile. `cf` must already reach past e^{2t}.
pub fn minima_sample(cf: &ContinuedFraction, t: &BigRational) -> Result<MinimaSample> {
    let xi = cf.target().clone();
    let conv = extended(cf);
    let bound = exp_rat(&(t * BigRational::from_integer(2.into())), 64)?.hi.ceil().to_integer() + 1u32;
    let mut cands: Vec<Candidate> = Vec::new();
    let mut seen = alloc::collections::BTreeSet::new();
    let mut push = |cands: &mut Vec<Candidate>, m: BigInt, n: BigInt, convergent: bool| -> Result<()> {
        if (m.is_zero() && n.is_zero()) || !seen.insert((m.clone(), n.clone())) {
            return Ok(());
        }
        cands.push(evaluate(&xi, t, &m, &n, convergent)?);
        Ok(())
    };
    push(&mut cands, BigInt::zero(), BigInt::one(), true)?;
    for (p, q) in conv.iter().skip(1) {
        push(&mut cands, q.clone(), p.clone(), true)?;
        if q > &bound {
            break;
        }
    }
    // intermediate fractions (p_{i-1} + j p_i)/(q_{i-1} + j q_i), 0 < j < a_{i+1}
    for i in 0..conv.len().saturating_sub(1) {
        let (p0, q0) = &conv[i];
        let (p1, q1) = &conv[i + 1];
        let Some(a) = cf.quotients.get(i + 1) else { break };
        if q0 > &bound {
            break;
        }
        if a <= &BigInt::one() {
            continue;
        }
        for j in semiconvergent_indices(&xi, t, (p0, q0), (p1, q1), a)? {
            push(&mut cands, q0 + q1 * &j, p0 + p1 * &j, true)?;
        }
    }
    let brute = bound.to_u64().map_or(BRUTE_M, |b| b.min(BRUTE_M));
    let iv = xi.enclose(&BigRational::new(BigInt::one(), pow2(32)))?;
    for m in 1..=brute {
        let mb = BigInt::from(m);
        let c = (iv.midpoint() * rb(&mb)).round().to_integer();
        for n in [&c - 1, c.clone(), &c + 1] {
            push(&mut cands, mb.clone(), n, false)?;
        }
    }
    select(t, cands)
}

/// Indices j near the crossing of the two branches of L, plus the ends.
fn semiconvergent_indices(
    xi: &Arc<dyn ApproximableReal>,
    t: &BigRational,
    (p0, q0): (&BigInt, &BigInt),
    (p1, q1): (&BigInt, &BigInt),
    a: &BigInt,
) -> Result<Vec<BigInt>> {
    // e^{-t}(q0 + j q1) = e^{t}(d0 - j d1)
    let d0 = residual(xi, q0, p0);
    let d1 = residual(xi, q1, p1);
    let et = Expr::rational(t.clone()).exp();
    let emt = (-Expr::rational(t.clone())).exp();
    let j = (et.clone() * d0 - emt.clone() * Expr::big(q0.clone())) / (emt * Expr::big(q1.clone()) + et * d1);
    let jv = j.eval(64)?;
    let top = a - 1u32;
    let mid = jv.midpoint().floor().to_integer();
    let mut out = vec![BigInt::one(), top.clone()];
    for k in -2i64..=3 {
        out.push(&mid + k);
    }
    let one = BigInt::one();
    out.retain(|j| j >= &one && j <= &top);
    out.sort();
    out.dedup();
    Ok(out)
}

fn select(t: &BigRational, cands: Vec<Candidate>) -> Result<MinimaSample> {
    if cands.len() < 2 {
        return Err(Error::SearchExhausted);
    }
    let best = (0..cands.len()).min_by(|&a, &b| cands[a].value.hi.cmp(&cands[b].value.hi)).unwrap();
    let cut = cands[best].value.hi.clone();
    // every candidate that might be the true first minimum
    let possible: Vec<usize> = (0..cands.len()).filter(|&i| cands[i].value.lo <= cut).collect();
    let l1 = Interval::new(possible.iter().map(|&i| cands[i].value.lo.clone()).min().unwrap(), cut);
    let mut l2_lo: Option<BigRational> = None;
    let mut l2_hi: Option<BigRational> = None;
    let mut r2 = None;
    for &i in &possible {
        let v = &cands[i].point;
        let second = (0..cands.len())
            .filter(|&k| independent(&cands[k].point, v))
            .min_by(|&a, &b| cands[a].value.hi.cmp(&cands[b].value.hi))
            .ok_or(Error::SearchExhausted)?;
        let cut2 = cands[second].value.hi.clone();
        let lo2 = (0..cands.len())
            .filter(|&k| independent(&cands[k].point, v))
            .map(|k| cands[k].value.lo.clone())
            .min()
            .unwrap();
        if i == best {
            r2 = Some(cands[second].point.clone());
        }
        l2_lo = Some(l2_lo.map_or(lo2.clone(), |x| x.min(lo2)));
        l2_hi = Some(l2_hi.map_or(cut2.clone(), |x| x.max(cut2)));
    }
    let l2 = Interval::new(l2_lo.unwrap().max(l1.lo.clone()), l2_hi.unwrap());
    let sum = l1.add(&l2);
    let ln2 = ln_rat(&BigRational::from_integer(2.into()), 64)?;
    let band_ok = !(sum.lo > BigRational::zero() || sum.hi < -ln2.hi.clone());
    let c1 = &cands[best];
    Ok(MinimaSample {
        t: t.clone(),
        l1,
        l2,
        r1: c1.point.clone(),
        r2: r2.unwrap(),
        r1_convergent: c1.convergent,
        band_ok,
        exact_hit: c1.hit,
    })
}

/// Profile over a sorted t-grid; stops after the first exact hit.
pub fn minima_profile(xi: Arc<dyn ApproximableReal>, grid: &[BigRational], max_bits: u64) -> Result<MinimaProfile> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("t-grid must be sorted".into()));
    }
    if grid.iter().any(|t| t.is_negative()) {
        return Err(Error::InvalidArgument("t must be non-negative".into()));
    }
    let mut cf = ContinuedFraction::new(xi);
    let mut samples = Vec::new();
    for t in grid {
        prepare(&mut cf, t, max_bits)?;
        let s = minima_sample(&cf, t)?;
        let hit = s.exact_hit;
        samples.push(s);
        if hit {
            return Ok(MinimaProfile { samples, terminal: Some(t.clone()) });
        }
    }
    Ok(MinimaProfile { samples, terminal: None })
}

/// Kinds of exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExponentKind {
    Lambda,
    LambdaHat,
    LambdaInt,
    LambdaHatInt,
    LambdaExt,
    LambdaHatExt,
}

impl ExponentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExponentKind::Lambda => "lambda",
            ExponentKind::LambdaHat => "lambda_hat",
            ExponentKind::LambdaInt => "lambda_int",
            ExponentKind::LambdaHatInt => "lambda_hat_int",
            ExponentKind::LambdaExt => "lambda_ext",
            ExponentKind::LambdaHatExt => "lambda_hat_ext",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExponentEstimate {
    pub kind: ExponentKind,
    /// Certified: |ξ - p/q| <= q^{-1} Q^{-w} for the witness triple. Ordinary exponents only.
    pub lower_witness: Option<BigRational>,
    /// (p, q, Q)
    pub witness: Option<(BigInt, BigInt, BigInt)>,
    /// Empirical value over the scanned range.
    pub diagnostic: f64,
    pub depth: BigInt,
}

#[derive(Clone, Debug)]
pub struct ClassifiedConvergent {
    pub p: BigInt,
    pub q: BigInt,
    pub member: bool,
    /// -log|qξ - p| / log q, absent for q = 1.
    pub exponent: Option<Interval>,
}

#[derive(Clone, Debug)]
pub struct ExponentReport {
    pub convergents: Vec<ClassifiedConvergent>,
    pub estimates: Vec<ExponentEstimate>,
    /// Certified-direction checks; a false entry is a failure.
    pub checks: Vec<(&'static str, bool)>,
}

impl ExponentReport {
    pub fn get(&self, kind: ExponentKind) -> &ExponentEstimate {
        self.estimates.iter().find(|e| e.kind == kind).expect("every kind is reported")
    }
}

/// Grid for certified witnesses.
const WITNESS_BITS: u32 = 32;

fn floor_grid(x: &BigRational) -> BigRational {
    let s = pow2(WITNESS_BITS);
    BigRational::new((x * rb(&s)).floor().to_integer(), s)
}

/// Uniform diagnostic: for Q just below each next denominator, the exponent of
/// the latest convergent of the kind.
fn hat_diagnostic(conv: &[ClassifiedConvergent], resid: &[f64], keep: impl Fn(&ClassifiedConvergent) -> bool) -> f64 {
    let mut best: Option<f64> = None;
    let mut last: Option<usize> = None;
    for k in 0..conv.len().saturating_sub(1) {
        if keep(&conv[k]) {
            last = Some(k);
        }
        let q_next = conv[k + 1].q.to_f64().unwrap_or(f64::MAX);
        if conv[k].q <= BigInt::one() || q_next <= 1.0 {
            continue;
        }
        let v = match last {
            Some(j) => -resid[j] / ln_f64(&conv[k + 1].q),
            None => 0.0,
        };
        best = Some(best.map_or(v, |b: f64| b.min(v)));
    }
    best.unwrap_or(0.0).max(0.0)
}

fn ln_f64(n: &BigInt) -> f64 {
    ln_rat(&rb(n), 32).map(|iv| iv.mid_f64()).unwrap_or(0.0)
}

/// Classify the convergents of ξ with denominator up to `depth` and derive
/// exponent witnesses.
pub fn estimate_exponents(set: &MissingDigitSet, xi: Arc<dyn ApproximableReal>, depth: &BigInt) -> Result<ExponentReport> {
    if xi.exact().is_some() {
        return Err(Error::RationalTarget);
    }
    let mut cf = ContinuedFraction::new(xi.clone());
    cf.extend_past_denominator(depth)?;
    let mut conv = Vec::new();
    let mut resid = Vec::new();
    let mut dirichlet = true;
    for (p, q) in cf.convergents.iter().filter(|(_, q)| q <= depth) {
        let member = set.contains(&BigRational::new(p.clone(), q.clone()));
        let r = LogInterval::new(residual(&xi, q, p).ln())?;
        let exponent = if q > &BigInt::one() {
            let e = LogInterval::new(-residual(&xi, q, p).ln() / Expr::big(q.clone()).ln())?;
            dirichlet &= e.lo() > &BigRational::one();
            Some(e.interval().clone())
        } else {
            None
        };
        resid.push(r.approx_f64());
        conv.push(ClassifiedConvergent { p: p.clone(), q: q.clone(), member, exponent });
    }
    if conv.len() < 3 {
        return Err(Error::DepthTooSmall);
    }
    let witness = |keep: &dyn Fn(&ClassifiedConvergent) -> bool| -> (Option<BigRational>, Option<(BigInt, BigInt, BigInt)>, f64) {
        let mut best: Option<(BigRational, &ClassifiedConvergent, f64)> = None;
        for c in conv.iter().filter(|c| keep(c)) {
            if let Some(e) = &c.exponent {
                let w = floor_grid(&e.lo);
                if best.as_ref().map_or(true, |(b, _, _)| &w > b) {
                    best = Some((w, c, e.mid_f64()));
                }
            }
        }
        match best {
            Some((w, c, f)) => (Some(w), Some((c.p.clone(), c.q.clone(), c.q.clone())), f),
            None => (Some(BigRational::zero()), None, 0.0),
        }
    };
    let (w_all, t_all, f_all) = witness(&|_| true);
    let (w_int, t_int, f_int) = witness(&|c| c.member);
    let (w_ext, t_ext, f_ext) = witness(&|c| !c.member);
    let est = |kind, lower_witness, witness, diagnostic| ExponentEstimate { kind, lower_witness, witness, diagnostic, depth: depth.clone() };
    let estimates = vec![
        est(ExponentKind::Lambda, w_all.clone(), t_all, f_all),
        est(ExponentKind::LambdaHat, None, None, hat_diagnostic(&conv, &resid, |_| true)),
        est(ExponentKind::LambdaInt, w_int.clone(), t_int, f_int),
        est(ExponentKind::LambdaHatInt, None, None, hat_diagnostic(&conv, &resid, |c| c.member)),
        est(ExponentKind::LambdaExt, w_ext.clone(), t_ext, f_ext),
        est(ExponentKind::LambdaHatExt, None, None, hat_diagnostic(&conv, &resid, |c| !c.member)),
    ];
    let is_max = w_all == w_int.max(w_ext);
    Ok(ExponentReport { convergents: conv, estimates, checks: vec![("lambda_is_max", is_max), ("dirichlet", dirichlet)] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::QuadraticSurd;
    use crate::ifs::{Address, AddressPoint, RationalIFS};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn sqrt2() -> Arc<dyn ApproximableReal> {
        Arc::new(QuadraticSurd::sqrt2())
    }

    fn lacunary() -> Arc<dyn ApproximableReal> {
        let ifs = Arc::new(RationalIFS::middle_third());
        Arc::new(AddressPoint::new(
            ifs,
            Address::generated(|i| {
                let mut f = 1usize;
                let mut k = 1usize;
                while f < i + 1 {
                    k += 1;
                    f *= k;
                }
                usize::from(f == i + 1)
            }),
        ))
    }

    #[test]
    fn l_function_examples() {
        let l = l_function(&b(1), &b(1), &sqrt2(), &r(0, 1)).unwrap();
        assert!(l.lo() <= &BigRational::zero() && l.hi() >= &BigRational::zero());
        let third: Arc<dyn ApproximableReal> = Arc::new(r(1, 3));
        let l = l_function(&b(1), &b(0), &third, &r(0, 1)).unwrap();
        assert_eq!(l.interval().clone(), Interval::point(BigRational::zero()));
        let l = l_function(&b(3), &b(4), &sqrt2(), &r(1, 1)).unwrap();
        // max{log 3 - 1, log 0.2426 + 1} = 0.0986
        assert!((l.approx_f64() - 0.098612).abs() < 1e-5);
        assert_eq!(l_function(&b(3), &b(1), &third, &r(0, 1)).unwrap_err(), Error::ExactHit);
    }

    #[test]
    fn sqrt2_at_zero() {
        let p = minima_profile(sqrt2(), &[r(0, 1)], 256).unwrap();
        let s = &p.samples[0];
        assert!(s.l1.contains(&BigRational::zero()));
        assert!(s.band_ok);
    }

    #[test]
    fn band_holds_on_grids() {
        let grid: Vec<BigRational> = (0..=10).map(|k| r(k, 1)).collect();
        for xi in [Arc::new(QuadraticSurd::new(-1, 1, 2, 1).unwrap()) as Arc<dyn ApproximableReal>, Arc::new(QuadraticSurd::golden()), lacunary()] {
            let p = minima_profile(xi, &grid, 4096).unwrap();
            assert_eq!(p.samples.len(), grid.len());
            assert_eq!(p.band_violations(), 0);
            for s in &p.samples {
                assert!(independent(&s.r1, &s.r2));
                assert!(s.r1_convergent);
            }
        }
    }

    #[test]
    fn rational_target_terminates() {
        let third: Arc<dyn ApproximableReal> = Arc::new(r(1, 3));
        let grid: Vec<BigRational> = (0..=10).map(|k| r(k, 1)).collect();
        let p = minima_profile(third, &grid, 256).unwrap();
        assert_eq!(p.terminal, Some(r(2, 1)));
        assert_eq!(p.samples.last().unwrap().r1, (b(3), b(1)));
    }

    #[test]
    fn exponents_for_sqrt2_and_lacunary() {
        let set = MissingDigitSet::middle_third();
        let rep = estimate_exponents(&set, sqrt2(), &b(1_000_000)).unwrap();
        assert!(rep.checks.iter().all(|c| c.1));
        assert!(rep.get(ExponentKind::Lambda).lower_witness.clone().unwrap() >= r(1, 1));
        assert!(matches!(estimate_exponents(&set, sqrt2(), &b(2)), Err(Error::DepthTooSmall)));

        let shallow = estimate_exponents(&set, lacunary(), &BigInt::from(3).pow(30)).unwrap();
        let deep = estimate_exponents(&set, lacunary(), &BigInt::from(3).pow(150)).unwrap();
        let a = shallow.get(ExponentKind::LambdaInt).lower_witness.clone().unwrap();
        let c = deep.get(ExponentKind::LambdaInt).lower_witness.clone().unwrap();
        assert!(c > a && c >= r(4, 1), "{a} {c}");
        assert!(deep.checks.iter().all(|c| c.1));
    }
}
