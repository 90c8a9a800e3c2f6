//! Enumeration of `F^I_x` and membership in sets of multiples.
//!
//! Denominators `1..=x` are cut into contiguous blocks. Inside a block the
//! fractions come out in ascending `n`, then ascending `m`. For each `n` the
//! numerator window `(λ1·n, λ2·n)` is sieved by the prime divisors of `n`, so
//! coprimality costs `O(ω(n))` strides instead of a gcd per pair.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;

use crate::arith::{gcd, FactorSieve};
use crate::intervals::IntervalAt;
use crate::sums::CoprimalitySpec;
use crate::{Error, Result};

pub const DEFAULT_BLOCK_SIZE: u64 = 1024;

/// Positive rational `m/n` with `gcd(m, n) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedFraction {
    pub m: u64,
    pub n: u64,
}

impl ReducedFraction {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n == 0 || gcd(m, n) != 1 {
            return Err(Error::InvalidArgument(format!(
                "{m}/{n} is not a reduced positive fraction"
            )));
        }
        Ok(ReducedFraction { m, n })
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.m, self.n)
    }
}

/// The triple `(A, B, q)` defining `M(A,B|q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplesSpec {
    a: Vec<u64>,
    b: Vec<u64>,
    q: u64,
}

impl MultiplesSpec {
    /// Sorts and deduplicates `a` and `b`.
    pub fn new(mut a: Vec<u64>, mut b: Vec<u64>, q: u64) -> Result<Self> {
        for (name, set) in [("A", &mut a), ("B", &mut b)] {
            if set.is_empty() {
                return Err(Error::InvalidArgument(format!("set {name} is empty")));
            }
            if set.contains(&0) {
                return Err(Error::InvalidArgument(format!("set {name} contains 0")));
            }
            set.sort_unstable();
            set.dedup();
        }
        if q == 0 {
            return Err(Error::InvalidArgument("q must be at least 1".into()));
        }
        Ok(MultiplesSpec { a, b, q })
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }

    pub fn b(&self) -> &[u64] {
        &self.b
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `A = B = {1}`, `q = 1`: every fraction.
    pub fn full() -> Self {
        MultiplesSpec {
            a: vec![1],
            b: vec![1],
            q: 1,
        }
    }
}

/// Membership table for the set of multiples `M(A)` on `0..=limit`.
#[derive(Debug, Clone)]
pub struct MultiplesSieve {
    limit: u64,
    flags: Vec<bool>,
}

impl MultiplesSieve {
    pub fn build(a: &[u64], limit: u64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot sieve multiples of an empty set".into(),
            ));
        }
        if limit == 0 {
            return Err(Error::InvalidArgument(
                "multiples sieve limit must be at least 1".into(),
            ));
        }
        let mut flags = vec![false; limit as usize + 1];
        for &step in a {
            if step == 0 {
                return Err(Error::InvalidArgument("0 has no multiples".into()));
            }
            let mut k = step;
            while k <= limit {
                flags[k as usize] = true;
                k += step;
            }
        }
        Ok(MultiplesSieve { limit, flags })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `k ∈ M(A)`; `None` when `k` lies beyond the table.
    pub fn contains(&self, k: u64) -> Option<bool> {
        self.flags.get(k as usize).copied().map(|f| f && k > 0)
    }

    /// `|M(A) ∩ [1, limit]|`.
    pub fn count(&self) -> usize {
        self.flags.iter().skip(1).filter(|&&f| f).count()
    }
}

/// `m ∈ M(A)`, `n ∈ M(B)` and `mn ⊥ q`.
pub fn in_multiples(
    f: ReducedFraction,
    spec: &MultiplesSpec,
    sieve_a: &MultiplesSieve,
    sieve_b: &MultiplesSieve,
) -> Result<bool> {
    let in_a = sieve_a.contains(f.m).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "numerator {} beyond A-sieve limit {}",
            f.m, sieve_a.limit
        ))
    })?;
    let in_b = sieve_b.contains(f.n).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "denominator {} beyond B-sieve limit {}",
            f.n, sieve_b.limit
        ))
    })?;
    Ok(in_a && in_b && gcd(f.m, spec.q()) == 1 && gcd(f.n, spec.q()) == 1)
}

/// `mn ⊥ q0` and `m·q1 ⊥ n·q2`.
pub fn in_coprimality_class(f: ReducedFraction, spec: &CoprimalitySpec) -> bool {
    let (q0, q1, q2) = spec.parts();
    gcd(f.m, q0) == 1
        && gcd(f.n, q0) == 1
        && gcd(f.m, f.n) == 1
        && gcd(f.m, q2) == 1
        && gcd(q1, f.n) == 1
        && gcd(q1, q2) == 1
}

/// Enumerates `F^I_x = {m/n reduced : n ≤ x, λ1 < m/n < λ2}`.
#[derive(Debug, Clone, Copy)]
pub struct FareyEnumerator<'a> {
    x: u64,
    interval: IntervalAt,
    sieve: &'a FactorSieve,
    block_size: u64,
}

impl<'a> FareyEnumerator<'a> {
    pub fn new(x: u64, interval: IntervalAt, sieve: &'a FactorSieve) -> Result<Self> {
        if x == 0 {
            return Err(Error::InvalidArgument("x must be at least 1".into()));
        }
        if x > sieve.limit() {
            return Err(Error::InvalidArgument(format!(
                "x = {x} exceeds the factor sieve limit {}",
                sieve.limit()
            )));
        }
        Ok(FareyEnumerator {
            x,
            interval,
            sieve,
            block_size: DEFAULT_BLOCK_SIZE,
        })
    }

    pub fn with_block_size(mut self, block_size: u64) -> Self {
        self.block_size = block_size.max(1);
        self
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn interval(&self) -> &IntervalAt {
        &self.interval
    }

    pub fn block_count(&self) -> usize {
        self.x.div_ceil(self.block_size) as usize
    }

    /// Denominator range of block `index`.
    pub fn block(&self, index: usize) -> Range<u64> {
        let start = 1 + index as u64 * self.block_size;
        start..(start + self.block_size).min(self.x + 1)
    }

    /// Visits the fractions with denominators in `ns`, returning whether any
    /// numerator window had an ambiguous endpoint.
    pub fn for_each_in(&self, ns: Range<u64>, mut visit: impl FnMut(ReducedFraction)) -> bool {
        let mut ambiguous = false;
        let mut open = Vec::new();
        let mut primes = Vec::new();
        for n in ns {
            ambiguous |= self.coprime_numerators(n, &mut open, &mut primes, |m| {
                visit(ReducedFraction { m, n })
            });
        }
        ambiguous
    }

    fn coprime_numerators(
        &self,
        n: u64,
        open: &mut Vec<bool>,
        primes: &mut Vec<u64>,
        mut emit: impl FnMut(u64),
    ) -> bool {
        let w = self.interval.numerator_window(n, 1);
        if w.is_empty() {
            return w.ambiguous;
        }
        if n == 1 {
            (w.lo..=w.hi).for_each(&mut emit);
            return w.ambiguous;
        }
        let len = (w.hi - w.lo + 1) as usize;
        open.clear();
        open.resize(len, true);
        primes.clear();
        self.sieve.push_prime_divisors(n, primes);
        for &p in primes.iter() {
            let mut k = w.lo.div_ceil(p) * p;
            while k <= w.hi {
                open[(k - w.lo) as usize] = false;
                k += p;
            }
        }
        for (i, _) in open.iter().enumerate().filter(|(_, &o)| o) {
            emit(w.lo + i as u64);
        }
        w.ambiguous
    }

    /// Runs `f` on every block concurrently; results come back in block order.
    pub fn map_blocks<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Block<'_, 'a>) -> T + Sync,
    {
        (0..self.block_count())
            .into_par_iter()
            .map(|index| {
                f(Block {
                    enumerator: self,
                    range: self.block(index),
                })
            })
            .collect()
    }

    /// Sequential stream over all of `F^I_x`.
    pub fn iter(&self) -> FractionIter<'_, 'a> {
        FractionIter {
            enumerator: self,
            next_n: 1,
            current: Vec::new(),
            pos: 0,
            open: Vec::new(),
            primes: Vec::new(),
        }
    }

    pub fn count(&self) -> u64 {
        self.map_blocks(|b| {
            let mut c = 0u64;
            b.for_each(|_| c += 1);
            c
        })
        .into_iter()
        .sum()
    }
}

/// A contiguous range of denominators handed to one worker.
#[derive(Debug, Clone)]
pub struct Block<'e, 'a> {
    enumerator: &'e FareyEnumerator<'a>,
    range: Range<u64>,
}

impl Block<'_, '_> {
    pub fn range(&self) -> Range<u64> {
        self.range.clone()
    }

    pub fn for_each(&self, visit: impl FnMut(ReducedFraction)) -> bool {
        self.enumerator.for_each_in(self.range.clone(), visit)
    }
}

pub struct FractionIter<'e, 'a> {
    enumerator: &'e FareyEnumerator<'a>,
    next_n: u64,
    current: Vec<ReducedFraction>,
    pos: usize,
    open: Vec<bool>,
    primes: Vec<u64>,
}

impl Iterator for FractionIter<'_, '_> {
    type Item = ReducedFraction;

    fn next(&mut self) -> Option<ReducedFraction> {
        while self.pos == self.current.len() {
            if self.next_n > self.enumerator.x {
                return None;
            }
            let n = self.next_n;
            self.next_n += 1;
            self.current.clear();
            self.pos = 0;
            let current = &mut self.current;
            self.enumerator
                .coprime_numerators(n, &mut self.open, &mut self.primes, |m| {
                    current.push(ReducedFraction { m, n })
                });
        }
        let f = self.current[self.pos];
        self.pos += 1;
        Some(f)
    }
}

/// Collects `F^I_x` with a private factor sieve.
pub fn enumerate_fractions(x: u64, interval: IntervalAt) -> Result<Vec<ReducedFraction>> {
    let sieve = FactorSieve::new(x.max(2))?;
    let e = FareyEnumerator::new(x, interval, &sieve)?;
    Ok(e.iter().collect())
}
