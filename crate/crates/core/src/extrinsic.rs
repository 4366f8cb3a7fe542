//! Extrinsic approximation: uniform approximants outside C, exact distance
//! lower bounds, and points built from two maps that avoid all non-members.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Range;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::real::{compare_with_limit, pow2, Expr, Interval, LogInterval};
use crate::arith::{is_prime_u64, ApproximableReal};
use crate::digits::MissingDigitSet;
use crate::error::{Error, Result};
use crate::ifs::{default_selector, rational_to_address, IntAffine, RVec, RationalIFS};

/// Largest denominator, in bits, that stage records keep exactly.
pub const EXACT_BITS: u64 = 1 << 16;
/// Largest witness scale the exhaustive scan accepts.
pub const WITNESS_BUDGET: u64 = 1 << 24;
/// Precision cap for stage comparisons; undecided counts as not certified.
const STAGE_PREC: u32 = 1024;

fn ri(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rb(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn log2(x: Expr) -> Expr {
    x.ln() / Expr::int(2).ln()
}

fn greater(a: &Expr, b: &Expr) -> bool {
    matches!(compare_with_limit(a, b, STAGE_PREC), Ok(Ordering::Greater))
}

// ---------------------------------------------------------------------------
// membership

/// The set a candidate is tested against.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Digits(&'a MissingDigitSet),
    Ifs(&'a RationalIFS),
}

/// Why a rational point lies outside C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    OutsideHull,
    /// First digit outside W in the canonical and (for terminating points) the dual expansion.
    BadDigit { canonical: Option<usize>, dual: Option<usize> },
    /// Inverse iteration found no map whose image contains the point.
    NoBranch,
}

impl Target<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Target::Digits(_) => 1,
            Target::Ifs(ifs) => ifs.dim(),
        }
    }

    /// None for members.
    pub fn certify(&self, x: &[BigRational]) -> Result<Option<Certificate>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        match self {
            Target::Digits(set) => {
                let m = set.is_member(&x[0]);
                Ok(if m.member {
                    None
                } else if m.outside_hull {
                    Some(Certificate::OutsideHull)
                } else {
                    Some(Certificate::BadDigit { canonical: m.canonical_bad, dual: m.dual_bad })
                })
            }
            Target::Ifs(ifs) => {
                if !ifs.in_box(x) {
                    return Ok(Some(Certificate::OutsideHull));
                }
                match rational_to_address(ifs, x, default_selector(ifs)) {
                    Ok(_) => Ok(None),
                    Err(Error::NotInAttractor) => Ok(Some(Certificate::NoBranch)),
                    Err(e) => Err(e),
                }
            }
        }
    }
}

impl Certificate {
    /// Re-derive non-membership and compare.
    pub fn confirms(&self, target: Target<'_>, x: &[BigRational]) -> Result<bool> {
        Ok(target.certify(x)?.as_ref() == Some(self))
    }
}

// ---------------------------------------------------------------------------
// uniform extrinsic approximation

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Progression,
    PrimeDenominator,
}

#[derive(Clone, Debug)]
pub struct ExtrinsicResult {
    /// The approximant, reduced.
    pub point: RVec,
    pub numerators: Vec<BigInt>,
    /// The denominator the candidate was built with; at most Q.
    pub denominator: BigInt,
    /// Exact upper bound on the sup-norm distance to ξ.
    pub error_bound: BigRational,
    /// error_bound * Q
    pub realized_k: BigRational,
    pub branch: Branch,
    /// Progression index n, or the prime N.
    pub step: u64,
    pub certificate: Certificate,
}

fn enclose_all(xi: &[Arc<dyn ApproximableReal>], width: &BigRational) -> Result<Vec<Interval>> {
    xi.iter().map(|x| x.enclose(width)).collect()
}

fn nearest_numerator(iv: &Interval, n: &BigInt) -> BigInt {
    (iv.midpoint() * rb(n) + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

fn sup_error(ivs: &[Interval], nums: &[BigInt], den: &BigInt) -> BigRational {
    ivs.iter()
        .zip(nums)
        .map(|(iv, r)| {
            let x = BigRational::new(r.clone(), den.clone());
            (&iv.lo - &x).abs().max((&iv.hi - &x).abs())
        })
        .max()
        .unwrap_or_default()
}

fn finish(
    target: Target<'_>,
    ivs: &[Interval],
    nums: Vec<BigInt>,
    den: BigInt,
    q: &BigRational,
    branch: Branch,
    step: u64,
) -> Result<Option<ExtrinsicResult>> {
    let point: RVec = nums.iter().map(|r| BigRational::new(r.clone(), den.clone())).collect();
    let Some(certificate) = target.certify(&point)? else { return Ok(None) };
    let error_bound = sup_error(ivs, &nums, &den);
    let realized_k = &error_bound * q;
    Ok(Some(ExtrinsicResult { point, numerators: nums, denominator: den, error_bound, realized_k, branch, step, certificate }))
}

/// A certified non-member r/s with s <= Q close to ξ.
///
/// The progression branch scans p/⌊Q⌋ + n v/⌊Q⌋ for n = 0..=n_max, starting at
/// the coordinate-wise nearest point with denominator ⌊Q⌋. The prime branch
/// tries p_N/N for every prime N in [Q/2, Q).
pub fn uniform_extrinsic(
    target: Target<'_>,
    xi: &[Arc<dyn ApproximableReal>],
    q: &BigRational,
    v: &[BigInt],
    n_max: u64,
    branch: Branch,
) -> Result<ExtrinsicResult> {
    if q <= &BigRational::one() {
        return Err(Error::InvalidArgument("Q must exceed 1".into()));
    }
    let d = target.dim();
    if xi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: xi.len() });
    }
    match branch {
        Branch::Progression => {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
            if v.iter().all(Zero::is_zero) {
                return Err(Error::InvalidArgument("direction must be nonzero".into()));
            }
            if n_max == 0 {
                return Err(Error::InvalidArgument("progression budget must be at least 1".into()));
            }
            let n = q.floor().to_integer();
            let ivs = enclose_all(xi, &BigRational::new(BigInt::one(), &n * 4))?;
            let p: Vec<BigInt> = ivs.iter().map(|iv| nearest_numerator(iv, &n)).collect();
            for k in 0..=n_max {
                let nums = p.iter().zip(v).map(|(p, v)| p + v * k).collect();
                if let Some(r) = finish(target, &ivs, nums, n.clone(), q, branch, k)? {
                    return Ok(r);
                }
            }
            Err(Error::Exhausted)
        }
        Branch::PrimeDenominator => {
            let top = q.ceil().to_integer();
            let lo = (q / ri(2)).ceil().to_integer();
            let (Some(lo), Some(top)) = (lo.to_u64(), top.to_u64()) else {
                return Err(Error::InvalidArgument("Q too large for the prime branch".into()));
            };
            let ivs = enclose_all(xi, &BigRational::new(BigInt::one(), BigInt::from(top) * 4))?;
            for big_n in lo.max(2)..top {
                if !is_prime_u64(big_n) {
                    continue;
                }
                let den = BigInt::from(big_n);
                let nums = ivs.iter().map(|iv| nearest_numerator(iv, &den)).collect();
                if let Some(r) = finish(target, &ivs, nums, den, q, branch, big_n)? {
                    return Ok(r);
                }
            }
            Err(Error::Exhausted)
        }
    }
}

// ---------------------------------------------------------------------------
// distance lower bound

/// b^{-(2b)^Δ q^Δ} / (2q)
pub fn lower_bound_expr(set: &MissingDigitSet, q: &BigInt) -> Expr {
    let b = BigInt::from(set.base());
    let e = Expr::big(&b * 2 * q).pow(set.delta().expr());
    Expr::big(b).pow(&(-e)) / Expr::big(q * 2)
}

#[derive(Clone, Debug)]
pub struct LowerBoundCheck {
    pub distance: BigRational,
    pub nearest: BigRational,
    pub bound: LogInterval,
    pub holds: bool,
}

/// Decide d > bound strictly, refining the bound as needed.
pub fn exceeds(d: &BigRational, bound: &mut LogInterval) -> Result<bool> {
    loop {
        if d > bound.hi() {
            return Ok(true);
        }
        if d <= bound.lo() {
            return Ok(false);
        }
        bound.refine()?;
    }
}

pub fn extrinsic_lower_bound_check(set: &MissingDigitSet, x: &BigRational) -> Result<LowerBoundCheck> {
    if set.contains(x) {
        return Err(Error::MemberInput);
    }
    let np = set.nearest_point(x);
    let mut bound = LogInterval::new(lower_bound_expr(set, x.denom()))?;
    let holds = exceeds(&np.distance, &mut bound)?;
    Ok(LowerBoundCheck { distance: np.distance, nearest: np.point, bound, holds })
}

// ---------------------------------------------------------------------------
// symbolic integers

/// A positive integer, possibly too large to materialize.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sym {
    Int(BigInt),
    /// m * base^exp
    Pow { m: BigInt, base: BigInt, exp: BigInt },
    /// ceil(k * x) + c
    Lin { k: BigRational, x: Box<Sym>, c: BigInt },
}

impl Sym {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Sym::Int(n) => Some(n),
            _ => None,
        }
    }

    /// log2 of the value, where that is a manageable number.
    pub fn log2_expr(&self) -> Option<Expr> {
        match self {
            Sym::Int(n) => Some(log2(Expr::big(n.clone()))),
            Sym::Pow { m, base, exp } => Some(log2(Expr::big(m.clone())) + Expr::big(exp.clone()) * log2(Expr::big(base.clone()))),
            Sym::Lin { .. } => None,
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Int(n) => write!(f, "{n}"),
            Sym::Pow { m, base, exp } if m.is_one() => write!(f, "{base}^{exp}"),
            Sym::Pow { m, base, exp } => write!(f, "{m}*{base}^{exp}"),
            Sym::Lin { k, x, c } => write!(f, "ceil({k}*{x})+{c}"),
        }
    }
}

// ---------------------------------------------------------------------------
// decay schedules

/// A rational-valued function Φ that decreases to 0.
pub trait DecaySchedule: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Φ(Q) for Q >= 1.
    fn value(&self, q: &BigInt) -> BigRational;

    /// T with log2 Q > T implying Φ(Q) < c, if one exists.
    fn log2_threshold(&self, c: &BigRational) -> Option<BigInt>;

    /// κ with log2_threshold(1/x) <= κ x for every integer x >= 1.
    fn threshold_slope(&self) -> Option<BigRational>;
}

/// Φ(Q) = 1/⌈log2 Q⌉, Φ(1) = 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct InverseCeilLog2;

impl DecaySchedule for InverseCeilLog2 {
    fn name(&self) -> String {
        "1/ceil(log2 Q)".into()
    }

    fn value(&self, q: &BigInt) -> BigRational {
        if q <= &BigInt::one() {
            return BigRational::one();
        }
        let bits = (q - 1u32).bits();
        BigRational::new(BigInt::one(), BigInt::from(bits))
    }

    fn log2_threshold(&self, c: &BigRational) -> Option<BigInt> {
        c.is_positive().then(|| c.recip().floor().to_integer())
    }

    fn threshold_slope(&self) -> Option<BigRational> {
        Some(BigRational::one())
    }
}

/// Φ(Q) = c for every Q.
#[derive(Clone, Debug)]
pub struct ConstantSchedule(pub BigRational);

impl DecaySchedule for ConstantSchedule {
    fn name(&self) -> String {
        format!("{}", self.0)
    }

    fn value(&self, _q: &BigInt) -> BigRational {
        self.0.clone()
    }

    fn log2_threshold(&self, c: &BigRational) -> Option<BigInt> {
        (&self.0 < c).then(BigInt::zero)
    }

    fn threshold_slope(&self) -> Option<BigRational> {
        None
    }
}

/// Probe Φ at 2, 4, ..., 2^64: values must be positive and strictly decreasing.
pub fn validate_schedule(s: &dyn DecaySchedule) -> Result<()> {
    let mut prev = s.value(&BigInt::from(2));
    if !prev.is_positive() {
        return Err(Error::ScheduleNotDecreasing);
    }
    for j in 2..=64u32 {
        let v = s.value(&(BigInt::one() << j));
        if !v.is_positive() || v >= prev {
            return Err(Error::ScheduleNotDecreasing);
        }
        prev = v;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Liouville construction

/// θ_k = p_k / q_k; numerators are absent once q_k is symbolic.
#[derive(Clone, Debug)]
pub struct Theta {
    pub numerators: Option<Vec<BigInt>>,
    /// Exact reduced denominator, or an upper bound.
    pub q: Sym,
}

impl Theta {
    pub fn point(&self) -> Option<RVec> {
        let q = self.q.as_int()?;
        Some(self.numerators.as_ref()?.iter().map(|p| BigRational::new(p.clone(), q.clone())).collect())
    }
}

/// One certified inequality.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

fn check(name: &'static str, lhs: impl fmt::Display, rhs: impl fmt::Display, holds: bool) -> Check {
    Check { name, lhs: format!("{lhs}"), rhs: format!("{rhs}"), holds }
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub k: usize,
    pub a_next: Sym,
    /// diam τ^{a_{k+1}-1}, bounding |θ_k - ξ|.
    pub error_bound: Option<BigRational>,
    pub log2_error: Option<Interval>,
    /// 1/(2 q_k e_k), a lower bound for the next convergent denominator.
    pub z_lower: Option<BigRational>,
    /// Q_k = ⌊z/3⌋
    pub witness_q: Option<BigInt>,
    /// Enclosure of log2(z/3).
    pub log2_witness_q: Option<Interval>,
    /// Φ(Q_k)
    pub phi: Option<BigRational>,
    pub threshold: Option<BigInt>,
    pub checks: Vec<Check>,
}

impl StageRecord {
    pub fn certified(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

#[derive(Clone, Debug)]
pub struct LiouvilleBuild {
    pub ifs: RationalIFS,
    pub f: usize,
    pub g: usize,
    /// Fixed point of f.
    pub alpha: RVec,
    pub schedule: String,
    pub tau: BigRational,
    pub diam: BigRational,
    /// Positions of g in the address, 1-based.
    pub a: Vec<Sym>,
    pub theta: Vec<Theta>,
    pub stages: Vec<StageRecord>,
}

impl LiouvilleBuild {
    pub fn certified(&self) -> bool {
        self.stages.iter().all(StageRecord::certified)
    }

    /// Address symbol at 1-based position i, while the positions are known exactly.
    pub fn symbol(&self, i: u64) -> Option<usize> {
        let i = BigInt::from(i);
        for a in &self.a {
            let a = a.as_int()?;
            if a == &i {
                return Some(self.g);
            }
            if a > &i {
                return Some(self.f);
            }
        }
        None
    }
}

struct Ctx<'a> {
    schedule: &'a dyn DecaySchedule,
    tau: BigRational,
    diam: BigRational,
    /// log2(1/τ)
    lambda: Expr,
}

fn common_denominator(v: &[BigRational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Choose a_{k+1} for an exactly known q_k.
fn stage_exact(ctx: &Ctx<'_>, k: usize, q: &BigInt, a_k: &BigInt) -> Result<StageRecord> {
    let c = BigRational::new(BigInt::one(), q * 6);
    let t = ctx.schedule.log2_threshold(&c).ok_or(Error::ScheduleNotDecreasing)?;
    let qd = rb(q) * &ctx.diam;
    // Legendre: m λ > log2(2 q^2 diam); decay: m λ > T + 1 + log2(6 q diam)
    let legendre_rhs = log2(Expr::rational(&qd * rb(q) * ri(2)));
    let decay_rhs = Expr::big(t.clone() + 1) + log2(Expr::rational(&qd * ri(6)));
    let rhs = legendre_rhs.max(&decay_rhs);
    let est = (rhs.clone() / ctx.lambda.clone()).enclose(&BigRational::new(BigInt::one(), BigInt::from(4)))?;
    let tau_bits = ctx.tau.denom().bits().max(1);
    let est_hi = est.hi.ceil().to_integer();
    let exact = est_hi.to_u64().is_some_and(|m| m.saturating_mul(tau_bits) <= EXACT_BITS);

    let mut checks = Vec::new();
    if exact {
        // smallest m >= a_k meeting both conditions exactly
        let start = (est.lo.floor().to_integer() - (t.bits() as i64 + 8)).max(a_k.clone()).max(BigInt::zero());
        let mut m = start;
        loop {
            let e = &ctx.diam * num_traits::pow::Pow::pow(&ctx.tau, m.to_u64().unwrap());
            let legendre = e < BigRational::new(BigInt::one(), q * q * 2);
            let z = (rb(q) * &e * ri(2)).recip();
            let big_q = (&z / ri(3)).floor().to_integer();
            let phi = ctx.schedule.value(&big_q);
            let decay = big_q > BigInt::one() && phi < c;
            if legendre && decay {
                let gap_l = &phi / rb(&big_q);
                let gap_r = (rb(q) * rb(&big_q) * ri(2)).recip();
                checks.push(check("legendre", &e, BigRational::new(BigInt::one(), q * q * 2), legendre));
                checks.push(check("decay", &phi, &c, decay));
                let gap = gap_l < gap_r;
                checks.push(check("gap", &gap_l, &gap_r, gap));
                let a_next = &m + 1;
                checks.push(check("increasing", &a_next, a_k, &a_next > a_k));
                return Ok(StageRecord {
                    k,
                    a_next: Sym::Int(a_next),
                    log2_error: None,
                    error_bound: Some(e),
                    z_lower: Some(z),
                    witness_q: Some(big_q),
                    log2_witness_q: None,
                    phi: Some(phi),
                    threshold: Some(t),
                    checks,
                });
            }
            m += 1;
            if m > &est_hi + 2 {
                return Err(Error::Undecided(STAGE_PREC));
            }
        }
    }

    let mut m = est.lo.floor().to_integer().max(a_k.clone()).max(BigInt::zero());
    loop {
        let lhs = Expr::big(m.clone()) * ctx.lambda.clone();
        if greater(&lhs, &rhs) {
            break;
        }
        m += 1;
        if m > &est_hi + 2 {
            return Err(Error::Undecided(STAGE_PREC));
        }
    }
    let lhs = Expr::big(m.clone()) * ctx.lambda.clone();
    let log2_e = (log2(Expr::rational(ctx.diam.clone())) - lhs.clone()).eval(64)?;
    let log2_zq = (lhs.clone() - log2(Expr::rational(&qd * ri(6)))).eval(64)?;
    checks.push(check("legendre", format!("{m}*log2(1/tau)"), "log2(2 q^2 diam)", greater(&lhs, &legendre_rhs)));
    checks.push(check("decay", format!("log2(z/3) in {log2_zq}"), format!("{t}+1"), greater(&lhs, &decay_rhs)));
    let a_next = &m + 1;
    checks.push(check("increasing", &a_next, a_k, &a_next > a_k));
    Ok(StageRecord {
        k,
        a_next: Sym::Int(a_next),
        error_bound: None,
        log2_error: Some(log2_e),
        z_lower: None,
        witness_q: None,
        log2_witness_q: Some(log2_zq),
        phi: None,
        threshold: Some(t),
        checks,
    })
}

/// Choose a_{k+1} = ceil(K q) + c for a symbolic upper bound q on q_k.
fn stage_symbolic(ctx: &Ctx<'_>, k: usize, q: &Sym, a_k: &BigInt) -> Result<StageRecord> {
    let kappa = ctx
        .schedule
        .threshold_slope()
        .ok_or_else(|| Error::BudgetExceeded(format!("stage {k}: schedule has no linear threshold")))?
        * ri(6);
    let log2_q = q.log2_expr().ok_or_else(|| Error::BudgetExceeded(format!("stage {k}: q is not a power")))?;
    let scale = pow2(20);
    let ratio = (Expr::rational(kappa.clone()) / ctx.lambda.clone()).eval(64)?;
    let big_k = BigRational::new((&ratio.hi * rb(&scale)).ceil().to_integer(), scale);
    let slope_ok = !matches!(compare_with_limit(&(Expr::rational(big_k.clone()) * ctx.lambda.clone()), &Expr::rational(kappa.clone()), STAGE_PREC), Ok(Ordering::Less) | Err(_));
    let offset_rhs = Expr::int(1) + log2(Expr::rational(&ctx.diam * ri(6))) + log2_q;
    let off = (offset_rhs.clone() / ctx.lambda.clone()).eval(64)?;
    let c: BigInt = (off.hi.ceil().to_integer() + 1u32).max(a_k.clone());
    let offset_ok = greater(&(Expr::big(c.clone()) * ctx.lambda.clone()), &offset_rhs);
    let mut checks = vec![
        check("slope", format!("{big_k}*log2(1/tau)"), &kappa, slope_ok),
        check("offset", format!("{c}*log2(1/tau)"), "1+log2(6 diam q)", offset_ok),
        check("legendre", format!("{kappa}*q"), "log2(q)", kappa >= BigRational::one()),
    ];
    // a_{k+1} - 1 >= c >= a_k
    checks.push(check("increasing", format!("ceil(K q)+{c}+1"), a_k, true));
    Ok(StageRecord {
        k,
        a_next: Sym::Lin { k: big_k, x: Box::new(q.clone()), c: c + 1 },
        error_bound: None,
        log2_error: None,
        z_lower: None,
        witness_q: None,
        log2_witness_q: None,
        phi: None,
        threshold: None,
        checks,
    })
}

/// Build ξ with address g at positions a_1 < a_2 < ... and f elsewhere.
///
/// Stage k fixes θ_k = (maps at positions 1..=a_k)(α) and picks a_{k+1} so that
/// θ_k is a convergent of ξ and Φ(Q_k) < 1/(6 q_k).
pub fn liouville_build(ifs: &RationalIFS, f: usize, g: usize, schedule: &dyn DecaySchedule, stages: usize) -> Result<LiouvilleBuild> {
    if stages == 0 {
        return Err(Error::InvalidArgument("at least one stage is required".into()));
    }
    if f == g {
        return Err(Error::InvalidArgument("f and g must differ".into()));
    }
    let fm = ifs.map(f)?.to_int_affine();
    let gm = ifs.map(g)?.to_int_affine();
    if fm == gm {
        return Err(Error::InvalidArgument("f and g must differ".into()));
    }
    validate_schedule(schedule)?;
    let alpha = fm.fixed_point().ok_or(Error::Domain("f has no fixed point"))?;
    let tau = ifs.tau_j()[f].clone().max(ifs.tau_j()[g].clone());
    let ctx = Ctx {
        schedule,
        tau: tau.clone(),
        diam: ifs.diam_ub().clone(),
        lambda: log2(Expr::rational(tau.recip())),
    };
    let alpha_den = common_denominator(&alpha);
    let step_den = fm.den.lcm(&gm.den);
    let step_bits = step_den.bits();

    let mut a = vec![Sym::Int(BigInt::one())];
    let mut prefix: Option<IntAffine> = Some(gm.clone());
    let mut theta = Vec::new();
    let mut records: Vec<StageRecord> = Vec::new();
    for k in 1..=stages {
        let a_k = a[k - 1].as_int().cloned().ok_or_else(|| Error::BudgetExceeded(format!("stage {k}: a_{k} is symbolic")))?;
        let th = match &prefix {
            Some(p) => {
                let pt = p.apply(&alpha);
                let q = common_denominator(&pt);
                let nums = pt.iter().map(|x| x.numer() * (&q / x.denom())).collect();
                Theta { numerators: Some(nums), q: Sym::Int(q) }
            }
            None => Theta { numerators: None, q: Sym::Pow { m: alpha_den.clone(), base: step_den.clone(), exp: a_k.clone() } },
        };
        let mut rec = match &th.q {
            Sym::Int(q) => stage_exact(&ctx, k, q, &a_k)?,
            q => stage_symbolic(&ctx, k, q, &a_k)?,
        };
        if let (Some(Sym::Int(p)), Sym::Int(q)) = (theta.last().map(|t: &Theta| &t.q), &th.q) {
            rec.checks.push(check("denominator_growth", q, p, q > p));
        }
        prefix = match (prefix, rec.a_next.as_int()) {
            (Some(p), Some(an)) if an.to_u64().is_some_and(|n| n.saturating_mul(step_bits) <= EXACT_BITS) => {
                let gap = (an - &a_k - 1u32).to_u64().unwrap();
                Some(p.compose(&fm.pow(gap)).compose(&gm))
            }
            _ => None,
        };
        a.push(rec.a_next.clone());
        theta.push(th);
        records.push(rec);
    }
    Ok(LiouvilleBuild {
        ifs: ifs.clone(),
        f,
        g,
        alpha,
        schedule: schedule.name(),
        tau,
        diam: ifs.diam_ub().clone(),
        a,
        theta,
        stages: records,
    })
}

/// Everything the stage-k scan needs.
#[derive(Clone, Debug)]
pub struct WitnessSetup {
    pub k: usize,
    pub witness_q: u64,
    /// Φ(Q_k)/Q_k
    pub bound: BigRational,
    /// Enclosure of ξ.
    pub lo: BigRational,
    pub hi: BigRational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WitnessVerdict {
    pub scanned: u64,
    pub members_skipped: u64,
    /// A non-member r/s with |ξ - r/s| <= Φ(Q_k)/Q_k.
    pub counterexample: Option<(BigInt, u64)>,
}

impl WitnessVerdict {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn merge(mut self, o: WitnessVerdict) -> WitnessVerdict {
        self.scanned += o.scanned;
        self.members_skipped += o.members_skipped;
        self.counterexample = self.counterexample.or(o.counterexample);
        self
    }
}

pub fn witness_setup(build: &LiouvilleBuild, k: usize) -> Result<WitnessSetup> {
    if build.ifs.dim() != 1 {
        return Err(Error::InvalidArgument("the exhaustive scan is one-dimensional".into()));
    }
    let rec = k.checked_sub(1).and_then(|i| build.stages.get(i)).ok_or_else(|| Error::InvalidArgument(format!("stage {k} not built")))?;
    let (Some(big_q), Some(phi)) = (&rec.witness_q, &rec.phi) else {
        return Err(Error::BudgetExceeded(format!("stage {k}: Q_k is symbolic")));
    };
    let q = big_q.to_u64().filter(|&q| q <= WITNESS_BUDGET).ok_or_else(|| Error::BudgetExceeded(format!("stage {k}: Q_k = {big_q}")))?;
    if phi >= &BigRational::one() {
        return Err(Error::InvalidArgument("Φ(Q_k) must be below 1".into()));
    }
    // deepest exact θ_j with a usable error bound
    let mut enclosure = None;
    for (j, st) in build.stages.iter().enumerate().skip(k - 1) {
        let Some(p) = build.theta[j].point() else { break };
        let radius = match (&st.error_bound, &st.log2_error) {
            (Some(e), _) => e.clone(),
            (None, Some(l)) => {
                let exp = l.hi.ceil().to_integer().max(BigInt::from(-256)).to_i64().unwrap();
                if exp >= 0 {
                    ri(1) * BigRational::from_integer(pow2(exp as u32))
                } else {
                    BigRational::new(BigInt::one(), pow2((-exp) as u32))
                }
            }
            _ => break,
        };
        enclosure = Some((&p[0] - &radius, &p[0] + &radius));
    }
    let (lo, hi) = enclosure.ok_or_else(|| Error::BudgetExceeded(format!("stage {k}: no exact enclosure of ξ")))?;
    Ok(WitnessSetup { k, witness_q: q, bound: phi / rb(big_q), lo, hi })
}

fn is_member_1d(build: &LiouvilleBuild, digits: Option<&MissingDigitSet>, x: &BigRational) -> Result<bool> {
    match digits {
        Some(set) => {
            if x < &set.min_point() || x > &set.max_point() {
                return Ok(false);
            }
            match (x.numer().to_u64(), x.denom().to_u64()) {
                (Some(p), Some(q)) => Ok(set.member_u64(p, q)),
                _ => Ok(set.contains(x)),
            }
        }
        None => Ok(Target::Ifs(&build.ifs).certify(core::slice::from_ref(x))?.is_none()),
    }
}

/// Scan denominators s in `range` against the stage-k bound.
pub fn witness_scan(build: &LiouvilleBuild, setup: &WitnessSetup, range: Range<u64>) -> Result<WitnessVerdict> {
    let digits = build.ifs.digits().map(|(b, w)| MissingDigitSet::new(b, w)).transpose()?;
    let mut out = WitnessVerdict::default();
    for s in range.start.max(1)..range.end.min(setup.witness_q + 1) {
        let sr = ri(s as i64);
        let r_lo = (&setup.lo * &sr).floor().to_integer();
        let r_hi = (&setup.hi * &sr).ceil().to_integer();
        let mut r = r_lo;
        while r <= r_hi {
            out.scanned += 1;
            let x = BigRational::new(r.clone(), BigInt::from(s));
            if is_member_1d(build, digits.as_ref(), &x)? {
                out.members_skipped += 1;
            } else {
                let dist = if setup.lo <= x && x <= setup.hi {
                    BigRational::zero()
                } else {
                    (&setup.lo - &x).abs().min((&setup.hi - &x).abs())
                };
                if dist <= setup.bound {
                    out.counterexample = Some((r, s));
                    return Ok(out);
                }
            }
            r += 1;
        }
    }
    Ok(out)
}

/// Check |ξ - r/s| > Φ(Q_k)/Q_k for every non-member r/s with s <= Q_k.
///
/// Only r next to sξ need scanning: any other r has |sξ - r| >= 1, so
/// |ξ - r/s| >= 1/Q_k > Φ(Q_k)/Q_k.
pub fn liouville_witness_check(build: &LiouvilleBuild, k: usize) -> Result<WitnessVerdict> {
    let setup = witness_setup(build, k)?;
    witness_scan(build, &setup, 1..setup.witness_q + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn point(x: BigRational) -> Vec<Arc<dyn ApproximableReal>> {
        vec![Arc::new(x)]
    }

    #[test]
    fn zero_at_three_gives_four_thirds() {
        let set = MissingDigitSet::middle_third();
        let res = uniform_extrinsic(Target::Digits(&set), &point(r(0, 1)), &r(3, 1), &[BigInt::one()], 5, Branch::Progression).unwrap();
        assert_eq!(res.point, vec![r(4, 3)]);
        assert_eq!(res.error_bound, r(4, 3));
        assert_eq!(res.realized_k, r(4, 1));
        assert_eq!(res.step, 4);
        assert!(res.certificate.confirms(Target::Digits(&set), &res.point).unwrap());
    }

    #[test]
    fn uniform_rejects_small_q_and_reports_exhaustion() {
        let set = MissingDigitSet::middle_third();
        let t = Target::Digits(&set);
        let one = [BigInt::one()];
        assert!(matches!(uniform_extrinsic(t, &point(r(0, 1)), &r(1, 1), &one, 5, Branch::Progression), Err(Error::InvalidArgument(_))));
        assert_eq!(uniform_extrinsic(t, &point(r(0, 1)), &r(3, 1), &one, 3, Branch::Progression).unwrap_err(), Error::Exhausted);
        let res = uniform_extrinsic(t, &point(r(1, 2)), &r(3, 1), &one, 5, Branch::Progression).unwrap();
        assert!(!set.contains(&res.point[0]));
    }

    #[test]
    fn prime_branch_finds_non_member() {
        let set = MissingDigitSet::middle_third();
        let res = uniform_extrinsic(Target::Digits(&set), &point(r(1, 4)), &r(100, 1), &[], 0, Branch::PrimeDenominator).unwrap();
        assert!(!set.contains(&res.point[0]));
        let n = res.denominator.to_u64().unwrap();
        assert!((50..100).contains(&n) && is_prime_u64(n));
        assert!(res.error_bound <= r(1, 2 * n as i64));
    }

    #[test]
    fn progression_on_plane_ifs() {
        let ifs = RationalIFS::parse(
            "dim 2\nmap\nA 1 0 0 1\nq 3\nb 0 0\ns 3\nmap\nA 1 0 0 1\nq 3\nb 2 0\ns 3\nmap\nA 0 1 1 0\nq 3\nb 0 2\ns 3",
        )
        .unwrap();
        let xi: Vec<Arc<dyn ApproximableReal>> = vec![Arc::new(r(0, 1)), Arc::new(r(0, 1))];
        let res = uniform_extrinsic(Target::Ifs(&ifs), &xi, &r(9, 1), &[BigInt::one(), BigInt::zero()], 20, Branch::Progression).unwrap();
        assert!(res.certificate.confirms(Target::Ifs(&ifs), &res.point).unwrap());
    }

    #[test]
    fn lower_bound_examples() {
        let set = MissingDigitSet::middle_third();
        let c = extrinsic_lower_bound_check(&set, &r(1, 2)).unwrap();
        assert_eq!(c.distance, r(1, 6));
        assert!(c.holds);
        let v = c.bound.approx_f64();
        assert!((v - 1.27e-3).abs() < 0.03e-3, "{v}");
        assert_eq!(extrinsic_lower_bound_check(&set, &r(1, 4)).unwrap_err(), Error::MemberInput);
        let c = extrinsic_lower_bound_check(&set, &r(4, 9)).unwrap();
        assert_eq!(c.distance, r(1, 9));
        assert!(c.holds);
    }

    #[test]
    fn schedules() {
        let s = InverseCeilLog2;
        assert_eq!(s.value(&BigInt::from(265720)), r(1, 19));
        assert_eq!(s.value(&BigInt::from(262144)), r(1, 18));
        assert_eq!(s.value(&BigInt::from(2)), r(1, 1));
        assert!(validate_schedule(&s).is_ok());
        assert_eq!(validate_schedule(&ConstantSchedule(r(1, 2))).unwrap_err(), Error::ScheduleNotDecreasing);
    }

    #[test]
    fn middle_third_build() {
        let ifs = RationalIFS::middle_third();
        let b = liouville_build(&ifs, 0, 1, &InverseCeilLog2, 3).unwrap();
        assert!(b.certified(), "{:#?}", b.stages);
        assert_eq!(b.a[0], Sym::Int(BigInt::one()));
        assert_eq!(b.a[1], Sym::Int(BigInt::from(15)));
        let a3 = b.a[2].as_int().unwrap().to_u64().unwrap();
        assert!((54_000_000..55_000_000).contains(&a3), "{a3}");
        assert!(matches!(b.a[3], Sym::Lin { .. }));
        assert_eq!(b.theta[0].point().unwrap(), vec![r(2, 3)]);
        let t2 = b.theta[1].point().unwrap();
        assert_eq!(t2[0], r(2, 3) + BigRational::new(BigInt::from(2), BigInt::from(3).pow(15)));
        assert_eq!(b.theta[2].q.to_string(), format!("3^{a3}"));
        assert_eq!(b.stages[0].witness_q, Some(BigInt::from(265720)));
        assert_eq!(b.stages[0].error_bound, Some(BigRational::new(BigInt::one(), BigInt::from(3).pow(14))));
    }

    #[test]
    fn build_preconditions() {
        let ifs = RationalIFS::middle_third();
        assert!(matches!(liouville_build(&ifs, 0, 1, &InverseCeilLog2, 0), Err(Error::InvalidArgument(_))));
        assert_eq!(liouville_build(&ifs, 0, 1, &ConstantSchedule(r(1, 10)), 2).unwrap_err(), Error::ScheduleNotDecreasing);
        assert!(matches!(liouville_build(&ifs, 0, 0, &InverseCeilLog2, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(liouville_build(&ifs, 0, 1, &InverseCeilLog2, 4), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn witness_scan_small_range_and_budget() {
        let ifs = RationalIFS::middle_third();
        let b = liouville_build(&ifs, 0, 1, &InverseCeilLog2, 2).unwrap();
        let setup = witness_setup(&b, 1).unwrap();
        assert_eq!(setup.witness_q, 265720);
        let v = witness_scan(&b, &setup, 1..5000).unwrap();
        assert!(v.holds());
        assert!(v.members_skipped > 0);
        assert!(matches!(liouville_witness_check(&b, 2), Err(Error::BudgetExceeded(_))));
    }
}
