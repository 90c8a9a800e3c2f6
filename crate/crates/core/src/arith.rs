//! Sieve-backed elementary arithmetic.
//!
//! Every density formula in this crate is a product over the prime divisors of
//! some integer, so a single smallest-prime-factor table serves factorization,
//! the Möbius function and the prime products below.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::{Error, Result};

/// Exact rational in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Smallest-prime-factor table for `2..=limit`.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl FactorSieve {
    /// Linear sieve; each composite is crossed out exactly once by its
    /// smallest prime factor.
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Capacity(format!(
                "sieve limit {limit} exceeds {}",
                u32::MAX
            )));
        }
        let size = limit as usize + 1;
        let mut spf = vec![0u32; size];
        let mut primes = Vec::new();
        for i in 2..size {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let composite = i * p as usize;
                if p > si || composite >= size {
                    break;
                }
                spf[composite] = p;
            }
        }
        Ok(FactorSieve { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, `None` for `n < 2` or out of range.
    pub fn smallest_prime_factor(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            None
        } else {
            Some(self.spf[n as usize] as u64)
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.smallest_prime_factor(n) == Some(n)
    }

    /// All primes up to the sieve limit, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check_range(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            Err(Error::InvalidArgument(format!(
                "{n} is outside the sieve range 1..={}",
                self.limit
            )))
        } else {
            Ok(())
        }
    }

    /// Prime factorization as `(prime, exponent)` pairs with strictly
    /// increasing primes. `factorize(1)` is empty.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check_range(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut rest = n as usize;
        while rest > 1 {
            let p = self.spf[rest] as u64;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
            rest /= p as usize;
        }
        Ok(out)
    }

    /// Distinct prime divisors of `n`, ascending.
    pub fn prime_divisors(&self, n: u64) -> Result<Vec<u64>> {
        self.check_range(n)?;
        let mut out = Vec::new();
        self.push_prime_divisors(n, &mut out);
        Ok(out)
    }

    /// Appends the distinct primes of `n` to `out`; `n` must be in range.
    pub(crate) fn push_prime_divisors(&self, n: u64, out: &mut Vec<u64>) {
        let mut rest = n as usize;
        while rest > 1 {
            let p = self.spf[rest];
            out.push(p as u64);
            while rest.is_multiple_of(p as usize) {
                rest /= p as usize;
            }
        }
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        self.check_range(n)?;
        Ok(self.mobius_unchecked(n))
    }

    pub(crate) fn mobius_unchecked(&self, n: u64) -> i8 {
        let mut rest = n as usize;
        let mut sign = 1i8;
        while rest > 1 {
            let p = self.spf[rest] as usize;
            rest /= p;
            if rest.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        sign
    }

    /// `Π(q0,q1,q2) = ∏_{p|q0} (1 - 2/(p+1)) · ∏_{p|q1q2} (1 - 1/(p+1))`.
    pub fn pi_product(&self, q0: u64, q1: u64, q2: u64) -> Result<ExactRational> {
        for q in [q0, q1, q2] {
            self.check_range(q)?;
        }
        if gcd(q0, q1) != 1 || gcd(q0, q2) != 1 || gcd(q1, q2) != 1 {
            return Err(Error::InvalidArgument(format!(
                "q0={q0}, q1={q1}, q2={q2} are not pairwise coprime"
            )));
        }
        let mut value = self.q_factor(q0)?;
        for q in [q1, q2] {
            for p in self.prime_divisors(q)? {
                value *= BigRational::new(BigInt::from(p), BigInt::from(p + 1));
            }
        }
        Ok(value)
    }

    /// `∏_{p|q} (1 - 2/(p+1)) = ∏_{p|q} (p-1)/(p+1)`.
    pub fn q_factor(&self, q: u64) -> Result<ExactRational> {
        let mut value = ExactRational::one();
        for p in self.prime_divisors(q)? {
            value *= BigRational::new(BigInt::from(p - 1), BigInt::from(p + 1));
        }
        Ok(value)
    }

    /// `(1/c) · ∏_{p|c} (1 - 1/(p+1))`, the limiting share of fractions whose
    /// numerator (or denominator) is a multiple of `c`.
    pub fn unit_factor(&self, c: u64) -> Result<ExactRational> {
        let mut value = BigRational::new(BigInt::one(), BigInt::from(c.max(1)));
        for p in self.prime_divisors(c)? {
            value *= BigRational::new(BigInt::from(p), BigInt::from(p + 1));
        }
        Ok(value)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Least common multiple; fails instead of wrapping when it exceeds `u64`.
pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or_else(|| Error::Overflow(format!("lcm({a}, {b}) exceeds u64")))
}

/// Renders a rational as `p/q`, including integers (`1/1`).
pub fn rational_string(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &ExactRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
