//! Parsing of command-line values: rationals, vectors, addresses, sets and target reals.

use std::path::Path;
use std::sync::Arc;

use cantor_dioph_core::arith::{ApproximableReal, Expr, ExprReal, QuadraticSurd};
use cantor_dioph_core::digits::MissingDigitSet;
use cantor_dioph_core::ifs::{Address, AddressPoint, PeriodicAddress, RationalIFS};
use cantor_dioph_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;

pub const DEFAULT_SET: &str = "missing-digit b=3 W=0,2";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the caller can fix by changing the input, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_)
                | Error::InvalidSet(_)
                | Error::BudgetExceeded(_)
                | Error::DimensionMismatch { .. }
                | Error::IndexOutOfRange { .. }
                | Error::NotContraction(_)
                | Error::NonPrimitivePeriod
                | Error::NotADivisor
                | Error::MemberInput
                | Error::RationalTarget
                | Error::ScheduleNotDecreasing
                | Error::DepthTooSmall
                | Error::AddressTooShort { .. } => 2,
                _ => 3,
            },
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let t = s.trim();
    let bad = || usage(format!("malformed rational `{s}`, expected p/q"));
    if t.is_empty() || t.chars().any(char::is_whitespace) {
        return Err(bad());
    }
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q == BigInt::from(0) {
                return Err(usage(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Comma-separated rationals.
pub fn parse_vector(s: &str) -> Result<Vec<BigRational>, CliError> {
    s.split(',').map(parse_rational).collect()
}

pub fn parse_int_vector(s: &str) -> Result<Vec<BigInt>, CliError> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| usage(format!("malformed integer `{t}`")))).collect()
}

fn symbols(s: &str, maps: usize) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let toks: Vec<&str> = if s.contains(',') {
        s.split(',').map(str::trim).collect()
    } else {
        s.char_indices().map(|(i, c)| &s[i..i + c.len_utf8()]).collect()
    };
    toks.iter()
        .map(|t| match t.parse::<usize>() {
            Ok(j) if (1..=maps).contains(&j) => Ok(j - 1),
            _ => Err(usage(format!("address symbol `{t}` is not a map index in 1..={maps}"))),
        })
        .collect()
}

/// `PRE(PERIOD)` or a finite `PRE`, with 1-based map indices. Symbols are single
/// digits unless separated by commas.
pub fn parse_address(s: &str, maps: usize) -> Result<Address, CliError> {
    let s = s.trim();
    match s.split_once('(') {
        Some((pre, rest)) => {
            let period = rest.strip_suffix(')').ok_or_else(|| usage(format!("unclosed period in `{s}`")))?;
            let pre = symbols(pre, maps)?;
            let period = symbols(period, maps)?;
            Ok(Address::Periodic(PeriodicAddress::new(pre, period)?))
        }
        None => {
            let w = symbols(s, maps)?;
            if w.is_empty() {
                return Err(usage("empty address"));
            }
            Ok(Address::Finite(w))
        }
    }
}

pub fn format_word(word: &[usize], maps: usize) -> String {
    if maps <= 9 {
        word.iter().map(|&j| char::from_digit(j as u32 + 1, 10).unwrap()).collect()
    } else {
        word.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn format_address(a: &PeriodicAddress, maps: usize) -> String {
    let sep = if maps <= 9 || a.pre.is_empty() { "" } else { "," };
    format!("{}{sep}({})", format_word(&a.pre, maps), format_word(&a.period, maps))
}

/// An attractor, with its digit structure when it is a missing-digit set.
#[derive(Clone, Debug)]
pub struct SetSpec {
    pub text: String,
    pub ifs: Arc<RationalIFS>,
    pub digits: Option<MissingDigitSet>,
}

impl SetSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ifs = RationalIFS::parse(text)?;
        let digits = ifs.digits().map(|(b, w)| MissingDigitSet::new(b, w)).transpose()?;
        // digit sets index their maps by ascending digit
        let ifs = match &digits {
            Some(d) => d.ifs(),
            None => ifs,
        };
        Ok(SetSpec { text: text.trim().to_string(), ifs: Arc::new(ifs), digits })
    }

    pub fn load(set: Option<&str>, file: Option<&Path>) -> Result<Self, CliError> {
        match (set, file) {
            (Some(_), Some(_)) => Err(usage("--set and --ifs-file are mutually exclusive")),
            (_, Some(p)) => SetSpec::parse(&std::fs::read_to_string(p)?),
            (Some(s), None) => SetSpec::parse(s),
            (None, None) => SetSpec::parse(DEFAULT_SET),
        }
    }

    pub fn require_digits(&self, what: &str) -> Result<&MissingDigitSet, CliError> {
        self.digits.as_ref().ok_or_else(|| usage(format!("{what} needs a missing-digit set")))
    }

    pub fn maps(&self) -> usize {
        self.ifs.len()
    }
}

/// Σ 2·3^{-n!}, as a point of the middle-third set.
pub fn lacunary() -> Arc<dyn ApproximableReal> {
    let ifs = Arc::new(RationalIFS::middle_third());
    Arc::new(AddressPoint::new(
        ifs,
        Address::generated(|i| {
            let (mut f, mut k) = (1usize, 1usize);
            while f < i + 1 {
                k += 1;
                f *= k;
            }
            usize::from(f == i + 1)
        }),
    ))
}

/// Target reals: `p/q`, `sqrt:c`, `surd:a,b,c,d` for (a + b√c)/d, `golden`, `e`,
/// `exp:p/q`, `ln:p/q`, `lacunary`, or `address:ADDR` on the current set.
pub fn parse_real(s: &str, set: &SetSpec) -> Result<Arc<dyn ApproximableReal>, CliError> {
    let s = s.trim();
    let (head, arg) = s.split_once(':').unwrap_or((s, ""));
    let surd = |a, b, c, d| -> Result<Arc<dyn ApproximableReal>, CliError> { Ok(Arc::new(QuadraticSurd::new(a, b, c, d)?)) };
    let small = |t: &str| t.trim().parse::<i64>().map_err(|_| usage(format!("malformed integer `{t}`")));
    match head {
        "golden" => Ok(Arc::new(QuadraticSurd::golden())),
        "e" => Ok(Arc::new(ExprReal(Expr::int(1).exp()))),
        "lacunary" => Ok(lacunary()),
        "sqrt" => surd(0, 1, small(arg)?, 1),
        "surd" => {
            let v: Vec<i64> = arg.split(',').map(small).collect::<Result<_, _>>()?;
            match v[..] {
                [a, b, c, d] => surd(a, b, c, d),
                _ => Err(usage("surd needs a,b,c,d")),
            }
        }
        "exp" => Ok(Arc::new(ExprReal(Expr::rational(parse_rational(arg)?).exp()))),
        "ln" => {
            let x = parse_rational(arg)?;
            if x <= BigRational::from_integer(0.into()) {
                return Err(usage("ln needs a positive argument"));
            }
            Ok(Arc::new(ExprReal(Expr::rational(x).ln())))
        }
        "address" => {
            if set.ifs.dim() != 1 {
                return Err(usage("address targets need a 1-dimensional set"));
            }
            Ok(Arc::new(AddressPoint::new(set.ifs.clone(), parse_address(arg, set.maps())?)))
        }
        _ => Ok(Arc::new(parse_rational(s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-2/4").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_rational("+3").unwrap(), BigRational::from_integer(3.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/2x").is_err());
        assert!(parse_rational("1 /2").is_err());
        assert_eq!(parse_vector("1/3, 2/3").unwrap().len(), 2);
    }

    #[test]
    fn addresses() {
        let a = parse_address("1(12)", 2).unwrap();
        let Address::Periodic(p) = a else { panic!("expected periodic") };
        assert_eq!((p.pre.clone(), p.period.clone()), (vec![0], vec![0, 1]));
        assert_eq!(format_address(&p, 2), "1(12)");
        assert!(parse_address("3", 2).is_err());
        assert!(parse_address("1(2", 2).is_err());
        assert_eq!(parse_address("10,11", 12).unwrap().symbol(1), Some(10));
    }

    #[test]
    fn sets() {
        let s = SetSpec::load(Some("missing-digit b=5 W=4,1"), None).unwrap();
        assert_eq!(s.digits.as_ref().unwrap().digits(), &[1, 4]);
        assert!(SetSpec::load(Some("dim 1"), None).is_err());
        assert!(SetSpec::load(None, None).unwrap().digits.is_some());
    }

    proptest::proptest! {
        #[test]
        fn address_round_trip(pre in proptest::collection::vec(0usize..3, 0..6), period in proptest::collection::vec(0usize..3, 1..6)) {
            let Ok(a) = PeriodicAddress::new(pre, period) else { return Ok(()) };
            let text = format_address(&a, 3);
            let Address::Periodic(b) = parse_address(&text, 3).unwrap() else { panic!("expected periodic") };
            proptest::prop_assert_eq!((a.pre, a.period), (b.pre, b.period));
        }

        #[test]
        fn rational_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let x = BigRational::new(p.into(), q.into());
            proptest::prop_assert_eq!(parse_rational(&x.to_string()).unwrap(), x);
        }
    }
}
