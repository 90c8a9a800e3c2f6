//! Exact limiting densities of `M(A,B|q)` for finite `A`, `B`.
//!
//! For a single pair the limit is
//! `(1/ab) ∏_{p|q} (1 - 2/(p+1)) ∏_{p|ab} (1 - 1/(p+1))` when `a ⊥ b` and
//! `ab ⊥ q`, and `0` otherwise. Finite sets follow by inclusion–exclusion over
//! the nonempty `C ⊆ A×B`, where the intersection of `M(a,b|q)` over `C` is
//! `M(lcm of the a's, lcm of the b's | q)`.
//!
//! Everything here is exact rational arithmetic.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{gcd, lcm, rational_to_f64, ExactRational, FactorSieve};
use crate::{Error, Result};

/// Largest `|A|·|B|` accepted by [`ie_density`].
pub const MAX_PAIRS: usize = 22;

/// A limiting density, an exact rational in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DensityValue(ExactRational);

impl DensityValue {
    fn new(value: ExactRational) -> Self {
        debug_assert!(value >= ExactRational::zero() && value <= ExactRational::one());
        DensityValue(value)
    }

    pub fn value(&self) -> &ExactRational {
        &self.0
    }

    pub fn into_inner(self) -> ExactRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// `M(la, lb | q)` is nonempty.
fn admissible(la: u64, lb: u64, q: u64) -> bool {
    gcd(la, lb) == 1 && gcd(la, q) == 1 && gcd(lb, q) == 1
}

/// `(1/(la·lb)) ∏_{p|la·lb} p/(p+1)`, the primes of `la·lb` drawn from `primes`.
fn pair_weight(la: u64, lb: u64, primes: &[u64]) -> ExactRational {
    let mut num = BigInt::one();
    let mut den = BigInt::from(la) * BigInt::from(lb);
    for &p in primes {
        if la.is_multiple_of(p) || lb.is_multiple_of(p) {
            num *= p;
            den *= p + 1;
        }
    }
    BigRational::new(num, den)
}

/// Limit of `ν^{r1 r2}_x(M(a,b|q))`.
pub fn pair_density(a: u64, b: u64, q: u64, sieve: &FactorSieve) -> Result<DensityValue> {
    let mut primes = sieve.prime_divisors(a)?;
    primes.extend(sieve.prime_divisors(b)?);
    let q_factor = sieve.q_factor(q)?;
    if !admissible(a, b, q) {
        return Ok(DensityValue::new(ExactRational::zero()));
    }
    Ok(DensityValue::new(pair_weight(a, b, &primes) * q_factor))
}

fn normalized(set: &[u64], name: &str) -> Result<Vec<u64>> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("set {name} is empty")));
    }
    if set.contains(&0) {
        return Err(Error::InvalidArgument(format!("set {name} contains 0")));
    }
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Limit of `ν^{r1 r2}_x(M(A,B|q))` by inclusion–exclusion over `A×B`.
///
/// Subsets are folded pair by pair into a table keyed by
/// `(lcm of the a's, lcm of the b's)` holding the signed multiplicity
/// `Σ (-1)^{|C|+1}` of the subsets reaching that key. Keys with an empty
/// `M(·,·|q)` are dropped on sight; extending such a subset only grows the
/// lcms, so every extension is empty too.
pub fn ie_density(a: &[u64], b: &[u64], q: u64, sieve: &FactorSieve) -> Result<DensityValue> {
    let a = normalized(a, "A")?;
    let b = normalized(b, "B")?;
    if a.len() * b.len() > MAX_PAIRS {
        return Err(Error::Capacity(format!(
            "|A|·|B| = {} exceeds {MAX_PAIRS}",
            a.len() * b.len()
        )));
    }
    let lcm_all = |set: &[u64]| set.iter().try_fold(1u64, |acc, &v| lcm(acc, v));
    lcm_all(&a)?;
    lcm_all(&b)?;

    let mut primes = Vec::new();
    for &v in a.iter().chain(b.iter()) {
        primes.extend(sieve.prime_divisors(v)?);
    }
    primes.sort_unstable();
    primes.dedup();
    let q_factor = sieve.q_factor(q)?;

    let mut table: HashMap<(u64, u64), i64> = HashMap::new();
    for &ai in &a {
        for &bi in &b {
            if !admissible(ai, bi, q) {
                continue;
            }
            let mut next = table.clone();
            for (&(la, lb), &c) in &table {
                let key = (lcm(la, ai)?, lcm(lb, bi)?);
                if admissible(key.0, key.1, q) {
                    *next.entry(key).or_insert(0) -= c;
                }
            }
            *next.entry((ai, bi)).or_insert(0) += 1;
            next.retain(|_, c| *c != 0);
            table = next;
        }
    }

    let mut total = ExactRational::zero();
    for (&(la, lb), &c) in &table {
        total += pair_weight(la, lb, &primes) * BigInt::from(c);
    }
    Ok(DensityValue::new(total * q_factor))
}

/// Result of checking the coprimality hypotheses of the complement bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisReport {
    pub holds: bool,
    pub violations: Vec<String>,
}

/// `a ⊥ b` across the sets, and `a1 ⊥ a2/(a1,a2)` (likewise in `B`) over all
/// ordered pairs.
pub fn check_theorem4_hypotheses(a: &[u64], b: &[u64]) -> HypothesisReport {
    let mut violations = Vec::new();
    for &ai in a {
        for &bi in b {
            if gcd(ai, bi) != 1 {
                violations.push(format!("gcd(a={ai}, b={bi}) = {}", gcd(ai, bi)));
            }
        }
    }
    for (name, set) in [("A", a), ("B", b)] {
        for &u in set {
            for &v in set {
                let quotient = v / gcd(u, v);
                if gcd(u, quotient) != 1 {
                    violations.push(format!(
                        "{name}: {u} and {v}/({u},{v}) = {quotient} share {}",
                        gcd(u, quotient)
                    ));
                }
            }
        }
    }
    HypothesisReport {
        holds: violations.is_empty(),
        violations,
    }
}

/// `∏_{p|q} (1 - 2/(p+1)) · ∏_{c ∈ A∪B} (1 - (1/c) ∏_{p|c} (1 - 1/(p+1)))`.
///
/// Fails with [`Error::Precondition`] when the hypotheses do not hold.
pub fn theorem4_bound(a: &[u64], b: &[u64], q: u64, sieve: &FactorSieve) -> Result<ExactRational> {
    let a = normalized(a, "A")?;
    let b = normalized(b, "B")?;
    let report = check_theorem4_hypotheses(&a, &b);
    if !report.holds {
        return Err(Error::Precondition(format!(
            "complement bound hypotheses fail: {}",
            report.violations.join("; ")
        )));
    }
    let mut union: Vec<u64> = a.iter().chain(b.iter()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let mut bound = sieve.q_factor(q)?;
    for c in union {
        bound *= ExactRational::one() - sieve.unit_factor(c)?;
    }
    Ok(bound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub bound: ExactRational,
    pub density: DensityValue,
    pub one_minus_density: ExactRational,
    /// `1 - ν ≥ bound`, decided exactly.
    pub holds: bool,
    /// `ν = 0`; the inequality then holds trivially.
    pub density_is_zero: bool,
}

pub fn verify_theorem4(a: &[u64], b: &[u64], q: u64, sieve: &FactorSieve) -> Result<BoundCheck> {
    let bound = theorem4_bound(a, b, q, sieve)?;
    let density = ie_density(a, b, q, sieve)?;
    let one_minus_density = ExactRational::one() - density.value();
    Ok(BoundCheck {
        holds: one_minus_density >= bound,
        density_is_zero: density.is_zero(),
        bound,
        density,
        one_minus_density,
    })
}

/// Sets built from pairwise coprime atoms: each element of `A` is the product
/// of the atoms of `atoms_a` selected by one bit mask, likewise for `B`.
/// With disjoint atom pools the result satisfies
/// [`check_theorem4_hypotheses`].
pub fn sets_from_atoms(
    atoms_a: &[u64],
    atoms_b: &[u64],
    masks_a: &[u32],
    masks_b: &[u32],
) -> Result<(Vec<u64>, Vec<u64>)> {
    let atoms: Vec<u64> = atoms_a.iter().chain(atoms_b).copied().collect();
    for (i, &u) in atoms.iter().enumerate() {
        if u == 0 {
            return Err(Error::InvalidArgument("atoms must be positive".into()));
        }
        if atoms[i + 1..].iter().any(|&v| gcd(u, v) != 1) {
            return Err(Error::InvalidArgument(format!(
                "atom {u} is not coprime to the others"
            )));
        }
    }
    let build = |pool: &[u64], masks: &[u32]| -> Result<Vec<u64>> {
        let mut out: Vec<u64> = masks
            .iter()
            .map(|&mask| {
                pool.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .try_fold(1u64, |acc, (_, &r)| acc.checked_mul(r))
                    .ok_or_else(|| Error::Overflow("atom product exceeds u64".into()))
            })
            .collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    };
    Ok((build(atoms_a, masks_a)?, build(atoms_b, masks_b)?))
}
