//! Argument definitions and dispatch.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use cantor_dioph_core::arith::{ApproximableReal, ContinuedFraction, Interval};
use cantor_dioph_core::digits::{divisor_digit_sets, expand, format_digits, gcd_pattern_ratio, parse_digits, safe_prime_scan, MissingDigitSet};
use cantor_dioph_core::exponents::{estimate_exponents, minima_profile, minima_sample, prepare, MinimaSample};
use cantor_dioph_core::extrinsic::{
    extrinsic_lower_bound_check, liouville_build, uniform_extrinsic, validate_schedule, witness_setup, Branch, Certificate, ConstantSchedule, DecaySchedule,
    InverseCeilLog2, Target,
};
use cantor_dioph_core::ifs::{default_selector, period_length_bound_check, rational_to_address, Address, AddressPoint, PeriodicAddress};
use cantor_dioph_core::intrinsic::{counting_bound, enumerate_rationals, intrinsic_dirichlet, QBound, ENUMERATION_BUDGET};
use cantor_dioph_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::input::{format_address, format_word, parse_address, parse_int_vector, parse_rational, parse_real, parse_vector, usage, CliError, SetSpec};
use crate::report::{display_f64, int, interval, log_interval, rat, rat_str, vec_str, Format, Report, Table};
use crate::suites::{self, period_corpus, period_formula, pthm_corpus, witness_parallel, PROFILE_BITS, SUITES};

#[derive(Parser, Debug)]
#[command(name = "cantor-dioph", version, about = "Exact rational approximation on Cantor sets and rational IFS attractors")]
pub struct Cli {
    /// Set description, e.g. "missing-digit b=3 W=0,2".
    #[arg(long, global = true, conflicts_with = "ifs_file")]
    pub set: Option<String>,
    /// File in the IFS text format.
    #[arg(long, global = true)]
    pub ifs_file: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Cap on enumeration sizes.
    #[arg(long, global = true, env = "CANTOR_DIOPH_BUDGET")]
    pub budget: Option<u64>,
    #[arg(long, global = true, default_value_t = suites::DEFAULT_SEED)]
    pub seed: u64,
    /// Append wall-clock timings to JSON reports.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide membership of a rational point.
    Member(PointArgs),
    /// Nearest point of a missing-digit set and the exact distance.
    Nearest(PointArgs),
    /// Base-b expansion with preperiod and period.
    Expand(ExpandArgs),
    /// Rational points with denominator at most N, and the counting bound.
    Enumerate(EnumerateArgs),
    /// Dirichlet approximation by rational points of the attractor.
    Intrinsic(IntrinsicArgs),
    /// Approximation by rationals outside the attractor, or the distance lower bound.
    Extrinsic(ExtrinsicArgs),
    /// Staged construction of a Liouville point of the attractor.
    Liouville(LiouvilleArgs),
    /// Successive minima profile and exponent estimates.
    Profile(ProfileArgs),
    /// Period lengths of rational points.
    Periods(PeriodsArgs),
    /// Safe-prime, gcd, divisor and first-bad-digit scans.
    Scan(ScanArgs),
    /// Run acceptance suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct PointArgs {
    /// Comma-separated rationals p/q.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Defaults to the base of the set.
    #[arg(long)]
    pub base: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: u64,
}

#[derive(Args, Debug)]
pub struct IntrinsicArgs {
    /// Address PRE(PERIOD) or a finite prefix, 1-based map indices.
    #[arg(long, conflicts_with = "x", required_unless_present = "x")]
    pub address: Option<String>,
    /// A rational point of the attractor.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long)]
    pub q: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Progression,
    Prime,
}

#[derive(Args, Debug)]
pub struct ExtrinsicArgs {
    /// Target coordinates as reals (see `profile --help`), one per dimension.
    #[arg(long, num_args = 1.., conflicts_with_all = ["address", "lower_bound"], allow_negative_numbers = true)]
    pub xi: Vec<String>,
    /// Target given by its address on the set.
    #[arg(long, conflicts_with = "lower_bound")]
    pub address: Option<String>,
    #[arg(long, required_unless_present = "lower_bound")]
    pub q: Option<String>,
    #[arg(long, value_enum, default_value_t = BranchArg::Progression, conflicts_with = "lower_bound")]
    pub branch: BranchArg,
    /// Progression direction; defaults to all ones.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "lower_bound")]
    pub direction: Option<String>,
    #[arg(long, default_value_t = 10, conflicts_with = "lower_bound")]
    pub n_max: u64,
    /// Check d(C, p/q) against the lower bound instead.
    #[arg(long, conflicts_with = "q")]
    pub lower_bound: Option<String>,
}

#[derive(Args, Debug)]
pub struct LiouvilleArgs {
    #[arg(long, default_value_t = 3)]
    pub stages: usize,
    /// Map whose fixed point starts the address, 1-based.
    #[arg(long, default_value_t = 1)]
    pub f: usize,
    /// Map inserted at the positions a_k, 1-based.
    #[arg(long, default_value_t = 2)]
    pub g: usize,
    /// `inverse-log2` or `const:p/q`.
    #[arg(long, default_value = "inverse-log2")]
    pub schedule: String,
    /// Exhaustively scan rationals against the stage-k bound.
    #[arg(long)]
    pub witness_stage: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// p/q, sqrt:c, surd:a,b,c,d, golden, e, exp:p/q, ln:p/q, lacunary or address:ADDR.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    /// start:stop:step
    #[arg(long, default_value = "0:15:1/2")]
    pub grid: String,
    #[arg(long, default_value_t = PROFILE_BITS)]
    pub max_bits: u64,
    /// Also classify convergents up to this denominator against the set.
    #[arg(long)]
    pub exponents: Option<String>,
}

#[derive(Args, Debug)]
pub struct PeriodsArgs {
    #[arg(long, allow_hyphen_values = true, conflicts_with = "q_max", required_unless_present = "q_max")]
    pub x: Option<String>,
    /// Every member with denominator at most this.
    #[arg(long)]
    pub q_max: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    SafePrime,
    Gcd,
    Divisor,
    Pthm,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub kind: ScanKind,
    #[arg(long, required_if_eq_any = [("kind", "safe-prime"), ("kind", "pthm")])]
    pub q_max: Option<u64>,
    /// Digit word for the gcd scan.
    #[arg(long, required_if_eq("kind", "gcd"))]
    pub word: Option<String>,
    /// Word length N for the divisor scan.
    #[arg(long, required_if_eq("kind", "divisor"))]
    pub n: Option<usize>,
    /// Divisor dN of b^N - 1.
    #[arg(long, required_if_eq("kind", "divisor"))]
    pub dn: Option<String>,
    /// Number of leading digits forming W1, minus one.
    #[arg(long, default_value_t = 0)]
    pub phi_len: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite to run; repeatable. All suites when absent.
    #[arg(long)]
    pub suite: Vec<String>,
}

/// A finished command: its report and exit code.
pub struct Outcome {
    pub report: Report,
    pub exit: u8,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome { report, exit: 0, notes: Vec::new() }
    }
}

struct Ctx {
    set: SetSpec,
    seed: u64,
    budget: u64,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ctx = Ctx { set: SetSpec::load(cli.set.as_deref(), cli.ifs_file.as_deref())?, seed: cli.seed, budget: cli.budget.unwrap_or(ENUMERATION_BUDGET) };
    let mut out = match &cli.command {
        Command::Member(a) => member(&ctx, a),
        Command::Nearest(a) => nearest(&ctx, a),
        Command::Expand(a) => expand_cmd(&ctx, a),
        Command::Enumerate(a) => enumerate(&ctx, a),
        Command::Intrinsic(a) => intrinsic(&ctx, a),
        Command::Extrinsic(a) => extrinsic(&ctx, a),
        Command::Liouville(a) => liouville(&ctx, a),
        Command::Profile(a) => profile(&ctx, a),
        Command::Periods(a) => periods(&ctx, a),
        Command::Scan(a) => scan(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
    }?;
    out.report.timings.insert("total_seconds".into(), json!(start.elapsed().as_secs_f64()));
    Ok(out)
}

fn report(ctx: &Ctx, command: &'static str) -> Report {
    let mut r = Report::new(command, ctx.seed);
    r.input("set", ctx.set.text.clone());
    r
}

fn one_dim(x: &[BigRational]) -> Result<&BigRational, CliError> {
    match x {
        [v] => Ok(v),
        _ => Err(usage(format!("expected one coordinate, got {}", x.len()))),
    }
}

fn position(i: Option<usize>) -> Value {
    i.map_or(Value::Null, |i| json!(i + 1))
}

fn certificate(c: &Certificate) -> Value {
    match c {
        Certificate::OutsideHull => json!({ "kind": "outside_hull" }),
        Certificate::BadDigit { canonical, dual } => json!({ "kind": "bad_digit", "canonical_position": position(*canonical), "dual_position": position(*dual) }),
        Certificate::NoBranch => json!({ "kind": "no_branch" }),
    }
}

fn member(ctx: &Ctx, a: &PointArgs) -> Result<Outcome, CliError> {
    let x = parse_vector(&a.x)?;
    let mut r = report(ctx, "member");
    r.input("x", vec_str(&x));
    let member = match &ctx.set.digits {
        Some(d) => {
            let x = one_dim(&x)?;
            let m = d.is_member(x);
            let np = d.nearest_point(x);
            r.output("member", m.member).output("distance", rat(&np.distance)).output("nearest", rat_str(&np.point));
            r.certificates = match &m.witness {
                Some((pre, period)) => json!({ "kind": "expansion", "base": d.base(), "digits": format!("{}({})", format_digits(d.base(), pre), format_digits(d.base(), period)) }),
                None if m.outside_hull => json!({ "kind": "outside_hull" }),
                None => json!({ "kind": "bad_digit", "canonical_position": position(m.canonical_bad), "dual_position": position(m.dual_bad) }),
            };
            m.member
        }
        None => {
            let ifs = &ctx.set.ifs;
            match Target::Ifs(ifs).certify(&x)? {
                None => {
                    let addr = rational_to_address(ifs, &x, default_selector(ifs))?;
                    r.output("member", true);
                    r.certificates = json!({ "kind": "address", "address": format_address(&addr, ifs.len()) });
                    true
                }
                Some(c) => {
                    r.output("member", false);
                    r.certificates = certificate(&c);
                    false
                }
            }
        }
    };
    Ok(Outcome { report: r, exit: if member { 0 } else { 1 }, notes: Vec::new() })
}

fn nearest(ctx: &Ctx, a: &PointArgs) -> Result<Outcome, CliError> {
    let d = ctx.set.require_digits("nearest")?;
    let x = parse_vector(&a.x)?;
    let x = one_dim(&x)?;
    let np = d.nearest_point(x);
    let mut r = report(ctx, "nearest");
    r.input("x", rat_str(x));
    r.output("nearest", rat(&np.point)).output("distance", rat(&np.distance));
    let m = d.is_member(&np.point);
    if let Some((pre, period)) = m.witness {
        r.certificates = json!({ "kind": "expansion", "digits": format!("{}({})", format_digits(d.base(), &pre), format_digits(d.base(), &period)) });
    }
    Ok(Outcome::ok(r))
}

fn expand_cmd(ctx: &Ctx, a: &ExpandArgs) -> Result<Outcome, CliError> {
    let x = parse_rational(&a.x)?;
    let base = match (a.base, &ctx.set.digits) {
        (Some(b), _) => b,
        (None, Some(d)) => d.base(),
        (None, None) => return Err(usage("--base is required for sets without digits")),
    };
    let e = expand(&x, base)?;
    let mut r = report(ctx, "expand");
    r.input("x", rat_str(&x)).input("base", base);
    r.output("preperiod", format_digits(base, &e.pre))
        .output("period", format_digits(base, &e.period))
        .output("preperiod_length", e.pre.len())
        .output("period_length", e.period.len());
    if let Some(d) = ctx.set.digits.as_ref().filter(|d| d.base() == base) {
        r.output("member", d.contains(&x)).output("first_bad_digit", position(d.first_bad_digit(&x, false)));
    }
    Ok(Outcome::ok(r))
}

fn enumerate(ctx: &Ctx, a: &EnumerateArgs) -> Result<Outcome, CliError> {
    let d = ctx.set.require_digits("enumerate")?;
    let cat = enumerate_rationals(d, a.n, ctx.budget)?;
    let v = counting_bound(ctx.set.ifs.len(), &d.diam(), d.delta(), a.n, cat.points.len() as u64)?;
    let mut r = report(ctx, "enumerate");
    r.input("n", a.n);
    r.output("count", cat.points.len())
        .output("points", cat.points.iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>());
    r.certificates = json!({ "counting_bound": { "bound": log_interval(&v.bound), "holds": v.holds } });
    r.table = Some(Table { header: vec!["p", "q"], rows: cat.points.iter().map(|(p, q)| vec![p.to_string(), q.to_string()]).collect() });
    Ok(Outcome::ok(r))
}

fn point_address(set: &SetSpec, x: &[BigRational]) -> Result<PeriodicAddress, CliError> {
    match rational_to_address(&set.ifs, x, default_selector(&set.ifs)) {
        Err(Error::NotInAttractor) => Err(usage("the point is not in the attractor")),
        r => Ok(r?),
    }
}

fn intrinsic(ctx: &Ctx, a: &IntrinsicArgs) -> Result<Outcome, CliError> {
    let big_q = parse_rational(&a.q)?;
    let mut r = report(ctx, "intrinsic");
    let xi = match (&a.address, &a.x) {
        (Some(s), _) => {
            r.input("address", s.clone());
            parse_address(s, ctx.set.maps())?
        }
        (None, Some(s)) => {
            let x = parse_vector(s)?;
            r.input("x", vec_str(&x));
            Address::Periodic(point_address(&ctx.set, &x)?)
        }
        (None, None) => return Err(usage("one of --address or --x is required")),
    };
    r.input("q", rat_str(&big_q));
    let res = intrinsic_dirichlet(&ctx.set.ifs, &xi, &big_q)?;
    let maps = ctx.set.maps();
    r.output("point", vec_str(&res.point))
        .output("q", int(&res.q))
        .output("q_unreduced", int(&res.q_unreduced))
        .output("error_bound", rat(&res.error_bound))
        .output("address", format_address(&res.address, maps))
        .output("n", res.n)
        .output("m", res.m)
        .output("l", res.l);
    r.certificates = json!({
        "q_bound": match &res.q_bound {
            QBound::Power { base, exponent } => json!({ "kind": "power", "base": base, "exponent": int(exponent) }),
            QBound::Integer(v) => json!({ "kind": "integer", "value": int(v) }),
        },
        "dirichlet_bound": res.dirichlet_bound.as_ref().map_or(Value::Null, rat),
        "collision_word": format_word(&res.collision, maps),
    });
    Ok(Outcome::ok(r))
}

fn extrinsic(ctx: &Ctx, a: &ExtrinsicArgs) -> Result<Outcome, CliError> {
    let mut r = report(ctx, "extrinsic");
    if let Some(s) = &a.lower_bound {
        let d = ctx.set.require_digits("the lower-bound check")?;
        let x = parse_rational(s)?;
        r.input("lower_bound", rat_str(&x));
        let c = extrinsic_lower_bound_check(d, &x)?;
        r.output("distance", rat(&c.distance)).output("nearest", rat_str(&c.nearest)).output("bound", log_interval(&c.bound)).output("holds", c.holds);
        let exit = if c.holds { 0 } else { 1 };
        return Ok(Outcome { report: r, exit, notes: Vec::new() });
    }
    let big_q = parse_rational(a.q.as_deref().ok_or_else(|| usage("--q is required"))?)?;
    let dim = ctx.set.ifs.dim();
    let xi: Vec<Arc<dyn ApproximableReal>> = match (&a.address, a.xi.is_empty()) {
        (Some(s), _) => {
            r.input("address", s.clone());
            let p = AddressPoint::new(ctx.set.ifs.clone(), parse_address(s, ctx.set.maps())?);
            (0..dim).map(|i| Arc::new(p.coordinate(i)) as Arc<dyn ApproximableReal>).collect()
        }
        (None, false) => {
            r.input("xi", a.xi.clone());
            a.xi.iter().map(|s| parse_real(s, &ctx.set)).collect::<Result<_, _>>()?
        }
        (None, true) => return Err(usage("one of --xi or --address is required")),
    };
    let v = match &a.direction {
        Some(s) => parse_int_vector(s)?,
        None => vec![BigInt::one(); dim],
    };
    let branch = match a.branch {
        BranchArg::Progression => Branch::Progression,
        BranchArg::Prime => Branch::PrimeDenominator,
    };
    r.input("q", rat_str(&big_q)).input("branch", format!("{:?}", a.branch).to_lowercase()).input("direction", v.iter().map(int).collect::<Vec<_>>()).input("n_max", a.n_max);
    let target = match &ctx.set.digits {
        Some(d) => Target::Digits(d),
        None => Target::Ifs(&ctx.set.ifs),
    };
    let res = uniform_extrinsic(target, &xi, &big_q, &v, a.n_max, branch)?;
    r.output("point", vec_str(&res.point))
        .output("denominator", int(&res.denominator))
        .output("error_bound", rat(&res.error_bound))
        .output("realized_k", rat(&res.realized_k))
        .output("step", res.step);
    r.certificates = certificate(&res.certificate);
    Ok(Outcome::ok(r))
}

fn parse_schedule(s: &str) -> Result<Box<dyn DecaySchedule>, CliError> {
    let sched: Box<dyn DecaySchedule> = match s.split_once(':') {
        None if s == "inverse-log2" => Box::new(InverseCeilLog2),
        Some(("const", c)) => Box::new(ConstantSchedule(parse_rational(c)?)),
        _ => return Err(usage(format!("unknown schedule `{s}`"))),
    };
    Ok(sched)
}

fn opt_interval(iv: &Option<Interval>) -> Value {
    iv.as_ref().map_or(Value::Null, interval)
}

fn liouville(ctx: &Ctx, a: &LiouvilleArgs) -> Result<Outcome, CliError> {
    if a.f == 0 || a.g == 0 {
        return Err(usage("map indices are 1-based"));
    }
    let sched = parse_schedule(&a.schedule)?;
    validate_schedule(sched.as_ref())?;
    let b = liouville_build(&ctx.set.ifs, a.f - 1, a.g - 1, sched.as_ref(), a.stages)?;
    let mut r = report(ctx, "liouville");
    r.input("stages", a.stages).input("f", a.f).input("g", a.g).input("schedule", b.schedule.clone());
    let theta: Vec<Value> = b
        .theta
        .iter()
        .map(|t| json!({ "p": t.numerators.as_ref().map_or(Value::Null, |p| Value::from(p.iter().map(int).collect::<Vec<_>>())), "q": t.q.to_string() }))
        .collect();
    let big_q: Vec<Value> = b.stages.iter().map(|s| s.witness_q.as_ref().map_or_else(|| json!({ "log2": opt_interval(&s.log2_witness_q) }), int)).collect();
    r.output("alpha", vec_str(&b.alpha))
        .output("tau", rat_str(&b.tau))
        .output("diam", rat_str(&b.diam))
        .output("a", b.a.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .output("theta", theta)
        .output("Q", big_q)
        .output("certified", b.certified());
    let stages: Vec<Value> = b
        .stages
        .iter()
        .map(|s| {
            json!({
                "k": s.k,
                "a_next": s.a_next.to_string(),
                "error_bound": s.error_bound.as_ref().map_or(Value::Null, rat),
                "log2_error": opt_interval(&s.log2_error),
                "z_lower": s.z_lower.as_ref().map_or(Value::Null, rat),
                "phi": s.phi.as_ref().map_or(Value::Null, rat),
                "threshold": s.threshold.as_ref().map_or(Value::Null, int),
                "checks": s.checks.iter().map(|c| json!({ "name": c.name, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut certs = json!({ "stages": stages });
    let mut exit = if b.certified() { 0 } else { 1 };
    if let Some(k) = a.witness_stage {
        let setup = witness_setup(&b, k)?;
        let v = witness_parallel(&b, &setup)?;
        certs["witness"] = json!({
            "stage": k,
            "Q": setup.witness_q,
            "bound": rat(&setup.bound),
            "scanned": v.scanned,
            "members_skipped": v.members_skipped,
            "counterexample": v.counterexample.as_ref().map_or(Value::Null, |(p, s)| json!(format!("{p}/{s}"))),
            "holds": v.holds(),
        });
        if !v.holds() {
            exit = 1;
        }
    }
    r.certificates = certs;
    r.table = Some(Table {
        header: vec!["k", "a_next", "q", "Q", "certified"],
        rows: b
            .stages
            .iter()
            .map(|s| {
                let q = b.theta.get(s.k - 1).map(|t| t.q.to_string()).unwrap_or_default();
                let big_q = s.witness_q.as_ref().map(|v| v.to_string()).unwrap_or_default();
                vec![s.k.to_string(), s.a_next.to_string(), q, big_q, s.certified().to_string()]
            })
            .collect(),
    });
    Ok(Outcome { report: r, exit, notes: Vec::new() })
}

fn parse_grid(s: &str) -> Result<Vec<BigRational>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else { return Err(usage("grid must be start:stop:step")) };
    let (start, stop, step) = (parse_rational(start)?, parse_rational(stop)?, parse_rational(step)?);
    if !step.is_positive() || start.is_negative() || stop < start {
        return Err(usage("grid needs 0 <= start <= stop and step > 0"));
    }
    let mut out = Vec::new();
    let mut t = start;
    while t <= stop {
        out.push(t.clone());
        t += &step;
        if out.len() > 100_000 {
            return Err(usage("grid has too many points"));
        }
    }
    Ok(out)
}

fn sample_row(s: &MinimaSample) -> Vec<String> {
    vec![
        rat_str(&s.t),
        rat_str(&s.l1.lo),
        rat_str(&s.l1.hi),
        rat_str(&s.l2.lo),
        rat_str(&s.l2.hi),
        s.r1.0.to_string(),
        s.r1.1.to_string(),
        s.r2.0.to_string(),
        s.r2.1.to_string(),
    ]
}

fn profile(ctx: &Ctx, a: &ProfileArgs) -> Result<Outcome, CliError> {
    let xi = parse_real(&a.xi, &ctx.set)?;
    let grid = parse_grid(&a.grid)?;
    let (samples, terminal) = if xi.exact().is_some() {
        let p = minima_profile(xi.clone(), &grid, a.max_bits)?;
        (p.samples, p.terminal)
    } else {
        let mut cf = ContinuedFraction::new(xi.clone());
        prepare(&mut cf, grid.last().unwrap(), a.max_bits)?;
        (grid.par_iter().map(|t| minima_sample(&cf, t)).collect::<Result<Vec<_>, _>>()?, None)
    };
    let mut r = report(ctx, "profile");
    r.input("xi", a.xi.clone()).input("grid", a.grid.clone()).input("max_bits", a.max_bits);
    let violations = samples.iter().filter(|s| !s.band_ok).count();
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| {
            json!({
                "t": rat_str(&s.t),
                "l1": interval(&s.l1),
                "l2": interval(&s.l2),
                "r1": [int(&s.r1.0), int(&s.r1.1)],
                "r2": [int(&s.r2.0), int(&s.r2.1)],
                "r1_convergent": s.r1_convergent,
                "band_ok": s.band_ok,
            })
        })
        .collect();
    r.output("samples", rows).output("band_violations", violations).output("terminal", terminal.as_ref().map_or(Value::Null, |t| rat_str(t).into()));
    if let Some(depth) = &a.exponents {
        let d = ctx.set.require_digits("exponent estimates")?;
        let depth: BigInt = depth.parse().map_err(|_| usage(format!("malformed depth `{depth}`")))?;
        r.input("exponents_depth", int(&depth));
        let rep = estimate_exponents(d, xi, &depth)?;
        let est: Vec<Value> = rep
            .estimates
            .iter()
            .map(|e| {
                json!({
                    "kind": e.kind.name(),
                    "lower_witness": e.lower_witness.as_ref().map_or(Value::Null, rat),
                    "witness": e.witness.as_ref().map_or(Value::Null, |(p, q, bq)| json!({ "p": int(p), "q": int(q), "Q": int(bq) })),
                    "diagnostic_display_only": display_f64(e.diagnostic),
                })
            })
            .collect();
        let conv: Vec<Value> = rep
            .convergents
            .iter()
            .map(|c| json!({ "p": int(&c.p), "q": int(&c.q), "member": c.member, "exponent": c.exponent.as_ref().map_or(Value::Null, interval) }))
            .collect();
        r.output("exponents", est).output("convergents", conv);
        r.certificates = json!({ "checks": rep.checks.iter().map(|(n, ok)| json!({ "name": n, "holds": ok })).collect::<Vec<_>>() });
    }
    r.table = Some(Table { header: vec!["t", "L1_lo", "L1_hi", "L2_lo", "L2_hi", "m1", "n1", "m2", "n2"], rows: samples.iter().map(sample_row).collect() });
    let exit = if violations == 0 { 0 } else { 1 };
    Ok(Outcome { report: r, exit, notes: Vec::new() })
}

fn periods(ctx: &Ctx, a: &PeriodsArgs) -> Result<Outcome, CliError> {
    let mut r = report(ctx, "periods");
    let maps = ctx.set.maps();
    if let Some(s) = &a.x {
        let x = parse_vector(s)?;
        r.input("x", vec_str(&x));
        let pb = match period_length_bound_check(&ctx.set.ifs, &x) {
            Err(Error::NotInAttractor) => return Err(usage("the point is not in the attractor")),
            v => v?,
        };
        r.output("address", format_address(&pb.address, maps))
            .output("preperiod_length", pb.address.pre.len())
            .output("period_length", pb.address.period.len())
            .output("q", int(&pb.q))
            .output("ratio", log_interval(&pb.ratio));
        if let (Some(d), Some(q)) = (&ctx.set.digits, pb.q.to_u64()) {
            let (pre, per) = period_formula(d.base(), q)?;
            r.certificates = json!({ "formula_preperiod": pre, "formula_period": per, "matches": pre == pb.address.pre.len() as u64 && per == pb.address.period.len() as u64 });
        }
        return Ok(Outcome::ok(r));
    }
    let q_max = a.q_max.ok_or_else(|| usage("one of --x or --q-max is required"))?;
    let d = ctx.set.require_digits("the period corpus")?;
    if q_max > ctx.budget {
        return Err(Error::BudgetExceeded(format!("q_max = {q_max} exceeds budget {}", ctx.budget)).into());
    }
    r.input("q_max", q_max);
    let rows = period_corpus(d, q_max)?;
    let bad = rows.iter().filter(|v| !v.matches()).count();
    r.output("count", rows.len()).output("mismatches", bad).output("max_ratio_display_only", display_f64(suites::max_ratio(rows.iter().map(|v| &v.ratio))));
    r.table = Some(Table {
        header: vec!["p", "q", "address", "preperiod", "period", "formula_preperiod", "formula_period", "ratio_display_only"],
        rows: rows
            .iter()
            .map(|v| {
                vec![
                    v.p.to_string(),
                    v.q.to_string(),
                    format_address(&v.address, maps),
                    v.address.pre.len().to_string(),
                    v.address.period.len().to_string(),
                    v.formula_pre.to_string(),
                    v.formula_period.to_string(),
                    display_f64(v.ratio.approx_f64()),
                ]
            })
            .collect(),
    });
    let exit = if bad == 0 { 0 } else { 1 };
    Ok(Outcome { report: r, exit, notes: Vec::new() })
}

fn scan(ctx: &Ctx, a: &ScanArgs) -> Result<Outcome, CliError> {
    let d: &MissingDigitSet = ctx.set.require_digits("scan")?;
    let mut r = report(ctx, "scan");
    r.input("kind", format!("{:?}", a.kind).to_lowercase());
    let check_budget = |q: u64| -> Result<u64, CliError> {
        if q > ctx.budget {
            return Err(Error::BudgetExceeded(format!("q_max = {q} exceeds budget {}", ctx.budget)).into());
        }
        Ok(q)
    };
    match a.kind {
        ScanKind::SafePrime => {
            let q_max = check_budget(a.q_max.ok_or_else(|| usage("--q-max is required"))?)?;
            r.input("q_max", q_max);
            let hits = safe_prime_scan(d, q_max);
            let with_members = hits.iter().filter(|h| !h.1.is_empty()).count();
            r.output("primes", hits.len()).output("with_members", with_members);
            r.output("hits", hits.iter().map(|(q, ps)| json!({ "q": q, "p": ps })).collect::<Vec<_>>());
            r.table = Some(Table {
                header: vec!["q", "members", "p"],
                rows: hits.iter().map(|(q, ps)| vec![q.to_string(), ps.len().to_string(), ps.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")]).collect(),
            });
        }
        ScanKind::Gcd => {
            let word = parse_digits(d.base(), a.word.as_deref().unwrap_or_default())?;
            r.input("word", format_digits(d.base(), &word));
            let (g, ratio) = gcd_pattern_ratio(d, &word)?;
            r.output("gcd", int(&g)).output("ratio", log_interval(&ratio));
        }
        ScanKind::Divisor => {
            let n = a.n.ok_or_else(|| usage("--n is required"))?;
            let dn: BigInt = a.dn.as_deref().unwrap_or_default().parse().map_err(|_| usage("malformed --dn"))?;
            r.input("n", n).input("dn", int(&dn)).input("phi_len", a.phi_len);
            let v = divisor_digit_sets(d.base(), d.digits(), n, &dn, a.phi_len)?;
            r.output("word", format_digits(d.base(), &v.word))
                .output("w1", v.w1.iter().copied().collect::<Vec<_>>())
                .output("w2", v.w2.iter().copied().collect::<Vec<_>>())
                .output("equal", v.equal)
                .output("within_w", v.within_w);
        }
        ScanKind::Pthm => {
            let q_max = check_budget(a.q_max.ok_or_else(|| usage("--q-max is required"))?)?;
            r.input("q_max", q_max);
            let rows = pthm_corpus(d, q_max)?;
            r.output("count", rows.len()).output("max_ratio_display_only", display_f64(suites::max_ratio(rows.iter().map(|v| &v.ratio))));
            r.table = Some(Table {
                header: vec!["q", "p", "phi", "ratio_lo", "ratio_hi"],
                rows: rows.iter().map(|v| vec![v.q.to_string(), v.p.to_string(), (v.phi + 1).to_string(), rat_str(v.ratio.lo()), rat_str(v.ratio.hi())]).collect(),
            });
        }
    }
    Ok(Outcome::ok(r))
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Result<Outcome, CliError> {
    let names: Vec<&str> = if a.suite.is_empty() { SUITES.to_vec() } else { a.suite.iter().map(String::as_str).collect() };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(n)) {
        return Err(usage(format!("unknown suite `{bad}`; known: {}", SUITES.join(", "))));
    }
    let mut r = report(ctx, "verify");
    r.input("suites", names.clone());
    let outcomes: Vec<_> = names.iter().filter_map(|n| suites::run(n, ctx.seed)).collect();
    let all = outcomes.iter().all(|o| o.ok());
    r.output("passed", all);
    r.output("criteria", outcomes.iter().map(|o| json!({ "id": o.id, "name": o.name, "passed": o.passed, "fatal": o.fatal, "detail": o.detail })).collect::<Vec<_>>());
    for o in &outcomes {
        r.timings.insert(o.name.into(), json!(o.seconds));
    }
    r.table = Some(Table {
        header: vec!["id", "name", "passed", "fatal", "detail"],
        rows: outcomes.iter().map(|o| vec![o.id.to_string(), o.name.into(), o.passed.to_string(), o.fatal.to_string(), o.detail.clone()]).collect(),
    });
    Ok(Outcome { report: r, exit: if all { 0 } else { 1 }, notes: outcomes.iter().map(|o| o.line()).collect() })
}
