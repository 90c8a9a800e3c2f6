//! Weighted sums `S^{r1 r2}_{x,I}(R) = Σ m^{-r1} n^{-r2}` over `F^I_x ∩ R`.
//!
//! Two independent routes are provided for the coprimality classes
//! `Q_{q0,q1,q2}`: direct enumeration ([`s_direct`]) and the Möbius-inverted
//! double sum ([`s_mobius`]), which never enumerates a fraction and evaluates
//! the innermost numerator sums in closed form.
//!
//! Accumulation is Neumaier-compensated per block; block partials are combined
//! by a pairwise tree whose shape depends only on the number of blocks, so the
//! result does not depend on how many worker threads ran.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::arith::{gcd, FactorSieve};
use crate::enumeration::{
    in_multiples, FareyEnumerator, MultiplesSieve, MultiplesSpec, ReducedFraction,
};
use crate::intervals::{IntervalAt, IntervalFamily};
use crate::{Error, Result};

/// The weight exponents `(r1, r2) ∈ {0,1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SumExponents {
    r1: u8,
    r2: u8,
}

impl SumExponents {
    pub const ALL: [SumExponents; 4] = [
        SumExponents { r1: 0, r2: 0 },
        SumExponents { r1: 0, r2: 1 },
        SumExponents { r1: 1, r2: 0 },
        SumExponents { r1: 1, r2: 1 },
    ];

    pub fn new(r1: u8, r2: u8) -> Result<Self> {
        if r1 > 1 || r2 > 1 {
            return Err(Error::InvalidArgument(format!(
                "exponents must be 0 or 1, got ({r1}, {r2})"
            )));
        }
        Ok(SumExponents { r1, r2 })
    }

    pub fn r1(self) -> u8 {
        self.r1
    }

    pub fn r2(self) -> u8 {
        self.r2
    }

    /// `m^{-r1} n^{-r2}`.
    #[inline]
    pub fn weight(self, m: u64, n: u64) -> f64 {
        match (self.r1, self.r2) {
            (0, 0) => 1.0,
            (0, _) => 1.0 / n as f64,
            (_, 0) => 1.0 / m as f64,
            _ => 1.0 / (m as f64 * n as f64),
        }
    }
}

impl fmt::Display for SumExponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.r1, self.r2)
    }
}

impl FromStr for SumExponents {
    type Err = Error;

    /// Two digits, `r1` first: `00`, `01`, `10`, `11`.
    fn from_str(s: &str) -> Result<Self> {
        let b = s.trim().as_bytes();
        if b.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "exponents `{s}` must be two digits"
            )));
        }
        let digit = |c: u8| match c {
            b'0' => Ok(0),
            b'1' => Ok(1),
            _ => Err(Error::InvalidArgument(format!(
                "exponents `{s}` must use 0 or 1"
            ))),
        };
        SumExponents::new(digit(b[0])?, digit(b[1])?)
    }
}

/// Pairwise coprime `(q0, q1, q2)` selecting `Q_{q0,q1,q2} = {m/n : mn ⊥ q0, m·q1 ⊥ n·q2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoprimalitySpec {
    q0: u64,
    q1: u64,
    q2: u64,
}

impl CoprimalitySpec {
    pub fn new(q0: u64, q1: u64, q2: u64) -> Result<Self> {
        if q0 == 0 || q1 == 0 || q2 == 0 {
            return Err(Error::InvalidArgument("q0, q1, q2 must be positive".into()));
        }
        if gcd(q0, q1) != 1 || gcd(q0, q2) != 1 || gcd(q1, q2) != 1 {
            return Err(Error::InvalidArgument(format!(
                "({q0}, {q1}, {q2}) is not pairwise coprime"
            )));
        }
        Ok(CoprimalitySpec { q0, q1, q2 })
    }

    pub fn trivial() -> Self {
        CoprimalitySpec {
            q0: 1,
            q1: 1,
            q2: 1,
        }
    }

    pub fn parts(&self) -> (u64, u64, u64) {
        (self.q0, self.q1, self.q2)
    }
}

impl fmt::Display for CoprimalitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.q0, self.q1, self.q2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumResult {
    pub value: f64,
    pub term_count: u64,
    pub x: u64,
    pub interval: IntervalAt,
    pub exponents: SumExponents,
    /// Some approximate endpoint product fell within rounding distance of an
    /// integer; see [`crate::intervals::Window::ambiguous`].
    pub precision_warning: bool,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Combines `items` along a balanced binary tree fixed by their indices.
pub fn pairwise_reduce<T>(mut items: Vec<T>, combine: &impl Fn(T, T) -> T) -> Option<T> {
    if items.len() <= 1 {
        return items.pop();
    }
    let right = items.split_off(items.len() / 2);
    let l = pairwise_reduce(items, combine)?;
    let r = pairwise_reduce(right, combine)?;
    Some(combine(l, r))
}

/// One accumulator per tracked sub-sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Slot {
    pub sum: CompensatedSum,
    pub count: u64,
}

impl Slot {
    #[inline]
    pub fn add(&mut self, v: f64) {
        self.sum.add(v);
        self.count += 1;
    }
}

pub(crate) struct Accumulated<const K: usize> {
    pub slots: [Slot; K],
    pub ambiguous: bool,
}

/// Runs `visit` over every fraction of the enumerator and reduces the
/// per-block slot arrays pairwise in block order.
pub(crate) fn accumulate<const K: usize, F>(en: &FareyEnumerator<'_>, visit: F) -> Accumulated<K>
where
    F: Fn(ReducedFraction, &mut [Slot; K]) + Sync,
{
    let blocks = en.map_blocks(|block| {
        let mut slots = [Slot::default(); K];
        let ambiguous = block.for_each(|f| visit(f, &mut slots));
        Accumulated { slots, ambiguous }
    });
    pairwise_reduce(blocks, &|mut a: Accumulated<K>, b: Accumulated<K>| {
        for (sa, sb) in a.slots.iter_mut().zip(b.slots.iter()) {
            sa.sum.merge(&sb.sum);
            sa.count += sb.count;
        }
        a.ambiguous |= b.ambiguous;
        a
    })
    .unwrap_or(Accumulated {
        slots: [Slot::default(); K],
        ambiguous: false,
    })
}

fn result_from(
    slot: &Slot,
    ambiguous: bool,
    x: u64,
    interval: IntervalAt,
    exps: SumExponents,
) -> SumResult {
    SumResult {
        value: slot.sum.value(),
        term_count: slot.count,
        x,
        interval,
        exponents: exps,
        precision_warning: ambiguous,
    }
}

/// `S^{r1 r2}_{x,I}(R)` by enumerating `F^I_x` and keeping the fractions that
/// pass `membership`.
pub fn s_direct<P>(
    x: u64,
    interval: IntervalAt,
    exps: SumExponents,
    membership: P,
    sieve: &FactorSieve,
) -> Result<SumResult>
where
    P: Fn(ReducedFraction) -> bool + Sync,
{
    let en = FareyEnumerator::new(x, interval, sieve)?;
    let acc = accumulate::<1, _>(&en, |f, slots| {
        if membership(f) {
            slots[0].add(exps.weight(f.m, f.n));
        }
    });
    Ok(result_from(&acc.slots[0], acc.ambiguous, x, interval, exps))
}

/// Size of the directly summed harmonic table.
pub const HARMONIC_TABLE_LEN: u64 = 100_000;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn harmonic_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut acc = CompensatedSum::default();
        let mut out = Vec::with_capacity(HARMONIC_TABLE_LEN as usize + 1);
        out.push(0.0);
        for j in 1..=HARMONIC_TABLE_LEN {
            acc.add(1.0 / j as f64);
            out.push(acc.value());
        }
        out
    })
}

/// `H(k) = Σ_{j ≤ k} 1/j`: table lookup up to [`HARMONIC_TABLE_LEN`], the
/// Euler–Maclaurin expansion `log k + γ + 1/(2k) - 1/(12k²) + 1/(120k⁴)`
/// beyond it.
pub fn harmonic_prefix(k: u64) -> f64 {
    if k <= HARMONIC_TABLE_LEN {
        return harmonic_table()[k as usize];
    }
    let kf = k as f64;
    let inv2 = 1.0 / (kf * kf);
    kf.ln() + EULER_GAMMA + 0.5 / kf - inv2 / 12.0 + inv2 * inv2 / 120.0
}

/// `Σ_{lo ≤ m ≤ hi} 1/m`.
fn reciprocal_range(lo: u64, hi: u64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    if hi - lo < 32 {
        let mut s = CompensatedSum::default();
        for m in lo..=hi {
            s.add(1.0 / m as f64);
        }
        s.value()
    } else {
        harmonic_prefix(hi) - harmonic_prefix(lo - 1)
    }
}

/// Number of squarefree-candidate `d` values handled per parallel task.
const MOBIUS_CHUNK: u64 = 4096;

/// `S^{r1 r2}_{x,I}(Q_{q0,q1,q2})` through the Möbius-inverted identity
///
/// `Σ_{d ⊥ q1} μ(d) d^{-r1} Σ_{n ≤ x, n ⊥ q0q1, d/(d,q0q2) | n} n^{-r2} Σ_{λ1 n/d < m < λ2 n/d} m^{-r1}`.
///
/// `sieve` must reach `x·q0·q2`, the largest `d` that can divide `n·q0·q2`.
pub fn s_mobius(
    x: u64,
    interval: IntervalAt,
    exps: SumExponents,
    spec: CoprimalitySpec,
    sieve: &FactorSieve,
) -> Result<SumResult> {
    if x == 0 {
        return Err(Error::InvalidArgument("x must be at least 1".into()));
    }
    let (q0, q1, q2) = spec.parts();
    let q02 = q0 * q2;
    let q01 = q0 * q1;
    let d_max = x
        .checked_mul(q02)
        .ok_or_else(|| Error::Overflow("x·q0·q2 exceeds u64".into()))?;
    if d_max > sieve.limit() {
        return Err(Error::InvalidArgument(format!(
            "Möbius route needs a factor sieve up to x·q0·q2 = {d_max}, have {}",
            sieve.limit()
        )));
    }

    struct Partial {
        sum: CompensatedSum,
        count: i64,
        ambiguous: bool,
    }

    let chunks = d_max.div_ceil(MOBIUS_CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut out = Partial {
                sum: CompensatedSum::default(),
                count: 0,
                ambiguous: false,
            };
            let start = 1 + c * MOBIUS_CHUNK;
            let end = (start + MOBIUS_CHUNK - 1).min(d_max);
            for d in start..=end {
                let mu = sieve.mobius_unchecked(d);
                if mu == 0 || gcd(d, q1) != 1 {
                    continue;
                }
                let step = d / gcd(d, q02);
                if step > x {
                    continue;
                }
                let mut inner = CompensatedSum::default();
                let mut inner_count = 0i64;
                let mut n = step;
                while n <= x {
                    if gcd(n, q01) == 1 {
                        let w = interval.numerator_window(n, d);
                        out.ambiguous |= w.ambiguous;
                        if !w.is_empty() {
                            let msum = if exps.r1() == 0 {
                                w.len() as f64
                            } else {
                                reciprocal_range(w.lo, w.hi)
                            };
                            let nw = if exps.r2() == 0 { 1.0 } else { 1.0 / n as f64 };
                            inner.add(msum * nw);
                            inner_count += w.len() as i64;
                        }
                    }
                    n += step;
                }
                let dw = if exps.r1() == 0 { 1.0 } else { 1.0 / d as f64 };
                let signed = if mu > 0 { dw } else { -dw };
                out.sum.add(signed * inner.value());
                out.count += mu as i64 * inner_count;
            }
            out
        })
        .collect();

    let total = pairwise_reduce(partials, &|mut a: Partial, b: Partial| {
        a.sum.merge(&b.sum);
        a.count += b.count;
        a.ambiguous |= b.ambiguous;
        a
    });
    let (value, count, ambiguous) = match total {
        Some(p) => (p.sum.value(), p.count, p.ambiguous),
        None => (0.0, 0, false),
    };
    debug_assert!(count >= 0);
    Ok(SumResult {
        value: value.max(0.0),
        term_count: count.max(0) as u64,
        x,
        interval,
        exponents: exps,
        precision_warning: ambiguous,
    })
}

/// Membership in `M(A,B|q)` backed by two multiples sieves sized for one
/// enumeration.
#[derive(Debug, Clone)]
pub struct MultiplesMembership {
    spec: MultiplesSpec,
    sieve_a: MultiplesSieve,
    sieve_b: MultiplesSieve,
}

impl MultiplesMembership {
    /// Sieves numerators up to `m_limit` and denominators up to `n_limit`.
    pub fn new(spec: &MultiplesSpec, m_limit: u64, n_limit: u64) -> Result<Self> {
        Ok(MultiplesMembership {
            sieve_a: MultiplesSieve::build(spec.a(), m_limit.max(1))?,
            sieve_b: MultiplesSieve::build(spec.b(), n_limit.max(1))?,
            spec: spec.clone(),
        })
    }

    /// Sized for `F^I_x`: numerators below `λ2·x`, denominators up to `x`.
    pub fn for_scale(spec: &MultiplesSpec, x: u64, interval: &IntervalAt) -> Result<Self> {
        let top = interval.numerator_window(x.max(1), 1).hi;
        MultiplesMembership::new(spec, top, x)
    }

    pub fn spec(&self) -> &MultiplesSpec {
        &self.spec
    }

    pub fn contains(&self, f: ReducedFraction) -> Result<bool> {
        in_multiples(f, &self.spec, &self.sieve_a, &self.sieve_b)
    }

    /// Membership for fractions known to lie inside the sized range.
    #[inline]
    pub(crate) fn contains_sized(&self, f: ReducedFraction) -> bool {
        self.contains(f)
            .expect("multiples sieves are sized from the numerator window")
    }
}

/// `ν^{r1 r2}_x(M(A,B|q)) = S(M(A,B|q)) / S(F^I_x)`.
pub fn empirical_density(
    x: u64,
    interval: IntervalAt,
    exps: SumExponents,
    spec: &MultiplesSpec,
    sieve: &FactorSieve,
) -> Result<f64> {
    let en = FareyEnumerator::new(x, interval, sieve)?;
    let member = MultiplesMembership::for_scale(spec, x, &interval)?;
    let acc = accumulate::<2, _>(&en, |f, slots| {
        let w = exps.weight(f.m, f.n);
        slots[0].add(w);
        if member.contains_sized(f) {
            slots[1].add(w);
        }
    });
    ratio_of(&acc.slots[1], &acc.slots[0], x)
}

fn ratio_of(part: &Slot, whole: &Slot, x: u64) -> Result<f64> {
    if whole.count == 0 {
        return Err(Error::EmptyFareySet { x });
    }
    Ok((part.sum.value() / whole.sum.value()).clamp(0.0, 1.0))
}

/// All four `ν^{r1 r2}_x(M(A,B|q))` from a single enumeration, ordered as
/// [`SumExponents::ALL`].
pub fn empirical_densities_all(
    x: u64,
    interval: IntervalAt,
    spec: &MultiplesSpec,
    sieve: &FactorSieve,
) -> Result<[f64; 4]> {
    let en = FareyEnumerator::new(x, interval, sieve)?;
    let member = MultiplesMembership::for_scale(spec, x, &interval)?;
    let acc = accumulate::<8, _>(&en, |f, slots| {
        let inside = member.contains_sized(f);
        for (k, e) in SumExponents::ALL.iter().enumerate() {
            let w = e.weight(f.m, f.n);
            slots[2 * k].add(w);
            if inside {
                slots[2 * k + 1].add(w);
            }
        }
    });
    let mut out = [0.0; 4];
    for (k, v) in out.iter_mut().enumerate() {
        *v = ratio_of(&acc.slots[2 * k + 1], &acc.slots[2 * k], x)?;
    }
    Ok(out)
}

/// `ν^{r1 r2}_x` along an increasing grid, with `I = family.evaluate(x)`.
pub fn density_sequence(
    x_grid: &[u64],
    family: &IntervalFamily,
    exps: SumExponents,
    spec: &MultiplesSpec,
    sieve: &FactorSieve,
) -> Result<Vec<(u64, f64)>> {
    check_grid(x_grid)?;
    x_grid
        .iter()
        .map(|&x| {
            let interval = family.evaluate(x as f64)?;
            Ok((x, empirical_density(x, interval, exps, spec, sieve)?))
        })
        .collect()
}

pub(crate) fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "grid {grid:?} must be strictly increasing"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::in_coprimality_class;
    use proptest::prelude::*;

    fn unit() -> IntervalAt {
        IntervalAt::rational((0, 1), (1, 1)).unwrap()
    }

    fn exps(s: &str) -> SumExponents {
        s.parse().unwrap()
    }

    #[test]
    fn direct_small_examples() {
        let sieve = FactorSieve::new(100).unwrap();
        let all = |_: ReducedFraction| true;
        let r = s_direct(4, unit(), exps("00"), all, &sieve).unwrap();
        assert_eq!((r.value, r.term_count), (5.0, 5));
        // 1/2 + 1/3 + 1/6 + 1/4 + 1/12
        let r = s_direct(4, unit(), exps("11"), all, &sieve).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-15);
        for e in SumExponents::ALL {
            let r = s_direct(1, unit(), e, all, &sieve).unwrap();
            assert_eq!((r.value, r.term_count), (0.0, 0));
        }
    }

    #[test]
    fn mobius_small_examples() {
        let sieve = FactorSieve::new(1000).unwrap();
        let t = CoprimalitySpec::trivial();
        let r = s_mobius(4, unit(), exps("00"), t, &sieve).unwrap();
        assert_eq!((r.value, r.term_count), (5.0, 5));
        let r = s_mobius(4, unit(), exps("11"), t, &sieve).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-14);

        let spec = CoprimalitySpec::new(2, 1, 1).unwrap();
        let direct = s_direct(50, unit(), exps("00"), |f| (f.m * f.n) % 2 == 1, &sieve).unwrap();
        let mob = s_mobius(50, unit(), exps("00"), spec, &sieve).unwrap();
        assert_eq!(mob.value, direct.value);
        assert_eq!(mob.term_count, direct.term_count);
    }

    #[test]
    fn mobius_requires_large_enough_sieve() {
        let sieve = FactorSieve::new(100).unwrap();
        let spec = CoprimalitySpec::new(2, 3, 5).unwrap();
        assert!(matches!(
            s_mobius(50, unit(), exps("00"), spec, &sieve),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_prefix(0), 0.0);
        assert!((harmonic_prefix(4) - 25.0 / 12.0).abs() < 1e-15);
        // direct summation oracle, descending order for accuracy
        let mut direct = 0.0f64;
        for j in (1..=1_000_000u64).rev() {
            direct += 1.0 / j as f64;
        }
        assert!((harmonic_prefix(1_000_000) - direct).abs() < 1e-12);
        let mut direct = 0.0f64;
        for j in (1..=100_001u64).rev() {
            direct += 1.0 / j as f64;
        }
        assert!((harmonic_prefix(100_001) - direct).abs() < 1e-12);
        assert!((harmonic_prefix(100_000) - (direct - 1.0 / 100_001.0)).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let sieve = FactorSieve::new(1000).unwrap();
        let spec = MultiplesSpec::new(vec![2], vec![3], 1).unwrap();
        let d = empirical_density(4, unit(), exps("00"), &spec, &sieve).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        for e in SumExponents::ALL {
            let d = empirical_density(50, unit(), e, &MultiplesSpec::full(), &sieve).unwrap();
            assert_eq!(d, 1.0);
            let sevens = MultiplesSpec::new(vec![7], vec![7], 1).unwrap();
            assert_eq!(
                empirical_density(4, unit(), e, &sevens, &sieve).unwrap(),
                0.0
            );
        }
        assert_eq!(
            empirical_density(1, unit(), exps("11"), &spec, &sieve),
            Err(Error::EmptyFareySet { x: 1 })
        );
    }

    #[test]
    fn density_sequence_examples() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let fam: IntervalFamily = "const:0,1".parse().unwrap();
        let spec = MultiplesSpec::new(vec![2], vec![3], 1).unwrap();
        let seq = density_sequence(&[10, 100], &fam, exps("11"), &spec, &sieve).unwrap();
        assert_eq!(seq.len(), 2);
        assert!(seq.iter().all(|&(_, v)| (0.0..=1.0).contains(&v)));

        let seq = density_sequence(&[100, 1000, 10_000], &fam, exps("11"), &spec, &sieve).unwrap();
        assert!((seq[2].1 - 1.0 / 12.0).abs() <= 0.02, "{seq:?}");

        let fam: IntervalFamily = "const:1,2".parse().unwrap();
        let seq =
            density_sequence(&[1000], &fam, exps("00"), &MultiplesSpec::full(), &sieve).unwrap();
        assert_eq!(seq, vec![(1000, 1.0)]);
        assert!(density_sequence(&[100, 10], &fam, exps("00"), &spec, &sieve).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let sieve = FactorSieve::new(5000).unwrap();
        let spec = CoprimalitySpec::new(3, 2, 5).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let d = s_direct(
                        3000,
                        unit(),
                        exps("11"),
                        |f| in_coprimality_class(f, &spec),
                        &sieve,
                    )
                    .unwrap();
                    let m = s_mobius(300, unit(), exps("11"), spec, &sieve).unwrap();
                    (d.value.to_bits(), m.value.to_bits())
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn block_size_only_perturbs_rounding() {
        let sieve = FactorSieve::new(3000).unwrap();
        let mut values = Vec::new();
        for bs in [1u64, 7, 256, 1024, 5000] {
            let en = FareyEnumerator::new(3000, unit(), &sieve)
                .unwrap()
                .with_block_size(bs);
            let acc = accumulate::<1, _>(&en, |f, s| s[0].add(exps("11").weight(f.m, f.n)));
            values.push(acc.slots[0].sum.value());
        }
        for v in &values {
            assert!((v - values[0]).abs() <= 1e-12 * values[0]);
        }
    }

    #[test]
    fn set_additivity() {
        let sieve = FactorSieve::new(2000).unwrap();
        let i = IntervalAt::rational((1, 2), (3, 1)).unwrap();
        for e in SumExponents::ALL {
            let whole = s_direct(1500, i, e, |f| f.m % 3 != 0 || f.n % 2 == 0, &sieve).unwrap();
            let a = s_direct(1500, i, e, |f| f.m % 3 != 0, &sieve).unwrap();
            let b = s_direct(1500, i, e, |f| f.m % 3 == 0 && f.n % 2 == 0, &sieve).unwrap();
            assert!((a.value + b.value - whole.value).abs() <= 1e-12 * whole.value);
            assert_eq!(a.term_count + b.term_count, whole.term_count);
        }
    }

    #[test]
    fn direct_is_monotone_in_x() {
        let sieve = FactorSieve::new(600).unwrap();
        let i = IntervalAt::rational((1, 1), (2, 1)).unwrap();
        for e in SumExponents::ALL {
            let mut prev = 0.0;
            for x in (1..=600).step_by(37) {
                let v = s_direct(x, i, e, |f| f.m % 2 == 1, &sieve).unwrap().value;
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(exps("10"), SumExponents::new(1, 0).unwrap());
        assert_eq!(exps("01").to_string(), "01");
        assert!("12".parse::<SumExponents>().is_err());
        assert!("1".parse::<SumExponents>().is_err());
        assert!(SumExponents::new(2, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mobius_matches_direct(x in 1u64..400, k in 0usize..6, iv in 0usize..3, e in 0usize..4) {
            let specs = [(1, 1, 1), (2, 1, 1), (1, 3, 1), (1, 1, 5), (2, 3, 5), (3, 2, 1)];
            let (q0, q1, q2) = specs[k];
            let spec = CoprimalitySpec::new(q0, q1, q2).unwrap();
            let i = [((0, 1), (1, 1)), ((1, 1), (2, 1)), ((1, 2), (3, 1))][iv];
            let i = IntervalAt::rational(i.0, i.1).unwrap();
            let e = SumExponents::ALL[e];
            let sieve = FactorSieve::new(400 * 30).unwrap();
            let d = s_direct(x, i, e, |f| in_coprimality_class(f, &spec), &sieve).unwrap();
            let m = s_mobius(x, i, e, spec, &sieve).unwrap();
            prop_assert_eq!(d.term_count, m.term_count);
            prop_assert!((d.value - m.value).abs() <= 1e-9 * d.value.max(1.0));
        }

        #[test]
        fn density_in_unit_range_and_monotone(extra in 2u64..12, x in 5u64..300) {
            let sieve = FactorSieve::new(300).unwrap();
            let small = MultiplesSpec::new(vec![2], vec![3], 1).unwrap();
            let big = MultiplesSpec::new(vec![2, extra], vec![3], 1).unwrap();
            let i = IntervalAt::rational((0, 1), (1, 1)).unwrap();
            for e in SumExponents::ALL {
                let a = empirical_density(x, i, e, &small, &sieve).unwrap();
                let b = empirical_density(x, i, e, &big, &sieve).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
                prop_assert!(a <= b);
            }
        }
    }
}
