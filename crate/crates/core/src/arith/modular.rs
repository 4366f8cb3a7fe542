//! Factoring, primality and multiplicative orders.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Limits for integer factoring.
#[derive(Clone, Copy, Debug)]
pub struct FactorBudget {
    pub trial_limit: u64,
    /// Iterations of Brent's rho per composite cofactor.
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { trial_limit: 1_000_000, rho_iterations: 1 << 22 }
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn brent_rho(n: u64, c: u64, budget: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    let m = 128u64;
    let mut spent = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
            spent += m;
            if spent > budget {
                return None;
            }
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

fn split(n: u64, budget: &FactorBudget, out: &mut Vec<u64>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime_u64(n) {
        out.push(n);
        return Ok(());
    }
    for c in 1..64u64 {
        if let Some(d) = brent_rho(n, c, budget.rho_iterations) {
            split(d, budget, out)?;
            split(n / d, budget, out)?;
            return Ok(());
        }
    }
    Err(Error::FactorizationLimit(alloc::format!("{n}")))
}

/// Prime factorisation as sorted (prime, exponent) pairs.
pub fn factor_u64(mut n: u64, budget: &FactorBudget) -> Result<Vec<(u64, u32)>> {
    let mut primes = Vec::new();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut p = 2u64;
    while p <= budget.trial_limit && p * p <= n {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if p * p > n {
            primes.push(n);
        } else {
            split(n, budget, &mut primes)?;
        }
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match out.last_mut() {
            Some((r, e)) if *r == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    Ok(out)
}

/// Carmichael function from a factorisation.
pub fn carmichael(factors: &[(u64, u32)]) -> u64 {
    let mut l = 1u64;
    for &(p, e) in factors {
        let v = if p == 2 {
            match e {
                1 => 1,
                2 => 2,
                _ => 1u64 << (e - 2),
            }
        } else {
            (p - 1) * p.pow(e - 1)
        };
        l = l.lcm(&v);
    }
    l
}

/// Least m >= 1 with base^m = 1 (mod modulus).
pub fn mult_order_u64(base: u64, modulus: u64, budget: &FactorBudget) -> Result<u64> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if modulus == 1 {
        return Ok(1);
    }
    if base.gcd(&modulus) != 1 {
        return Err(Error::NotCoprime);
    }
    let lambda = carmichael(&factor_u64(modulus, budget)?);
    let mut order = lambda;
    for (r, _) in factor_u64(lambda, budget)? {
        while order % r == 0 && pow_mod(base, order / r, modulus) == 1 {
            order /= r;
        }
    }
    Ok(order)
}

/// Arbitrary-size front end; moduli beyond u64 raise `FactorizationLimit`.
pub fn mult_order(base: &BigUint, modulus: &BigUint, budget: &FactorBudget) -> Result<BigUint> {
    if modulus.is_zero() {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if modulus.is_one() {
        return Ok(BigUint::one());
    }
    if !base.gcd(modulus).is_one() {
        return Err(Error::NotCoprime);
    }
    let m = modulus.to_u64().ok_or_else(|| Error::FactorizationLimit(alloc::format!("{modulus}")))?;
    let b = (base % modulus).to_u64().unwrap();
    Ok(BigUint::from(mult_order_u64(b, m, budget)?))
}

/// Split n = c1 * c2 where every prime of c1 divides `base` and gcd(c2, base) = 1.
/// Returns (c1, c2, v) with v minimal such that c1 | base^v.
pub fn split_by_base(n: &BigUint, base: &BigUint) -> (BigUint, BigUint, u64) {
    let mut c2 = n.clone();
    let mut c1 = BigUint::one();
    loop {
        let g = c2.gcd(base);
        if g.is_one() {
            break;
        }
        c2 /= &g;
        c1 *= &g;
    }
    let mut v = 0u64;
    let mut pw = BigUint::one();
    while !(&pw % &c1).is_zero() {
        pw *= base;
        v += 1;
    }
    (c1, c2, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_order(b: u64, m: u64) -> u64 {
        let mut x = b % m;
        let mut k = 1;
        while x != 1 % m {
            x = x * b % m;
            k += 1;
        }
        k
    }

    #[test]
    fn spec_examples() {
        let bud = FactorBudget::default();
        assert_eq!(mult_order_u64(3, 13, &bud).unwrap(), 3);
        assert_eq!(mult_order_u64(10, 7, &bud).unwrap(), 6);
        assert_eq!(mult_order_u64(5, 1, &bud).unwrap(), 1);
        assert_eq!(mult_order_u64(6, 9, &bud).unwrap_err(), Error::NotCoprime);
    }

    #[test]
    fn matches_direct_powering() {
        let bud = FactorBudget::default();
        for m in 2..400u64 {
            for b in [2u64, 3, 5, 10] {
                if b.gcd(&m) == 1 {
                    assert_eq!(mult_order_u64(b, m, &bud).unwrap(), naive_order(b, m), "b={b} m={m}");
                }
            }
        }
    }

    #[test]
    fn factors_large_semiprime() {
        let bud = FactorBudget::default();
        let (p, q) = (1_000_003u64, 998_244_353u64);
        assert_eq!(factor_u64(p * q, &bud).unwrap(), alloc::vec![(p, 1), (q, 1)]);
    }

    #[test]
    fn rho_budget_is_enforced() {
        let bud = FactorBudget { trial_limit: 10, rho_iterations: 1 };
        let n = 1_000_003u64 * 998_244_353u64;
        assert!(matches!(factor_u64(n, &bud), Err(Error::FactorizationLimit(_))));
    }

    #[test]
    fn primality_agrees_with_sieve() {
        let mut sieve = alloc::vec![true; 5000];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..5000 {
            if sieve[i] {
                let mut j = i * i;
                while j < 5000 {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        for (n, &p) in sieve.iter().enumerate() {
            assert_eq!(is_prime_u64(n as u64), p);
        }
        assert!(is_prime_u64(18446744073709551557));
    }

    #[test]
    fn split_by_base_examples() {
        let (c1, c2, v) = split_by_base(&BigUint::from(6u32), &BigUint::from(10u32));
        assert_eq!((c1, c2, v), (BigUint::from(2u32), BigUint::from(3u32), 1));
        let (c1, c2, v) = split_by_base(&BigUint::from(4u32), &BigUint::from(2u32));
        assert_eq!((c1, c2, v), (BigUint::from(4u32), BigUint::one(), 2));
    }
}
