//! Grid experiments: truncations `A_N = A ∩ [1,N]` on the integers, the
//! four-density table, and `ν^{11}` along shrinking intervals.

use crate::arith::FactorSieve;
use crate::enumeration::{MultiplesSieve, MultiplesSpec};
use crate::intervals::{IntervalAt, IntervalFamily};
use crate::limits::{ie_density, DensityValue};
use crate::sums::{check_grid, empirical_densities_all, empirical_density, SumExponents};
use crate::{Error, Result};

/// Default scales for sweeps.
pub const DEFAULT_X_GRID: [u64; 4] = [100, 1_000, 10_000, 30_000];

/// `ν⁰_x(A) = #(A ∩ [1,x]) / x` and `ν¹_x(A) = Σ_{n ∈ A ∩ [1,x]} (1/n) / log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerDensities {
    pub nu0: f64,
    pub nu1: f64,
    pub x: u64,
}

/// Densities of the set flagged by `sieve`. The reciprocal sum runs in
/// increasing `n`, which keeps `ν¹` monotone under set inclusion even in
/// floating point.
pub fn integer_densities(sieve: &MultiplesSieve, x: u64) -> Result<IntegerDensities> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!(
            "integer densities need x ≥ 2, got {x}"
        )));
    }
    if x > sieve.limit() {
        return Err(Error::InvalidArgument(format!(
            "x = {x} exceeds multiples sieve limit {}",
            sieve.limit()
        )));
    }
    let mut count = 0u64;
    let mut recip = 0.0f64;
    for n in 1..=x {
        if sieve.contains(n) == Some(true) {
            count += 1;
            recip += 1.0 / n as f64;
        }
    }
    Ok(IntegerDensities {
        nu0: count as f64 / x as f64,
        nu1: recip / (x as f64).ln(),
        x,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationExperiment {
    pub a: Vec<u64>,
    pub n_grid: Vec<u64>,
    pub x_grid: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRow {
    pub n: u64,
    pub x: u64,
    pub nu0: f64,
    pub nu1: f64,
}

/// One row per `(N, x)`, `N` outermost.
pub fn run_truncation(exp: &TruncationExperiment) -> Result<Vec<TruncationRow>> {
    check_grid(&exp.n_grid)?;
    check_grid(&exp.x_grid)?;
    let x_max = *exp.x_grid.last().expect("checked nonempty");
    let mut rows = Vec::with_capacity(exp.n_grid.len() * exp.x_grid.len());
    for &n in &exp.n_grid {
        let truncated: Vec<u64> = exp
            .a
            .iter()
            .copied()
            .filter(|&v| v >= 1 && v <= n)
            .collect();
        let sieve = if truncated.is_empty() {
            None
        } else {
            Some(MultiplesSieve::build(&truncated, x_max)?)
        };
        for &x in &exp.x_grid {
            let (nu0, nu1) = match &sieve {
                Some(s) => {
                    let d = integer_densities(s, x)?;
                    (d.nu0, d.nu1)
                }
                None if x < 2 => {
                    return Err(Error::InvalidArgument(format!(
                        "integer densities need x ≥ 2, got {x}"
                    )))
                }
                None => (0.0, 0.0),
            };
            rows.push(TruncationRow { n, x, nu0, nu1 });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Row {
    pub x: u64,
    /// `ν⁰⁰, ν⁰¹, ν¹⁰, ν¹¹`; `None` when `F^I_x` is empty.
    pub values: Option<[f64; 4]>,
    pub error: Option<String>,
}

/// The four empirical densities per scale, for a fixed interval.
pub fn run_theorem2_table(
    family: &IntervalFamily,
    spec: &MultiplesSpec,
    x_grid: &[u64],
    sieve: &FactorSieve,
) -> Result<Vec<Theorem2Row>> {
    let IntervalFamily::Constant { lower, upper } = *family else {
        return Err(Error::Precondition(format!(
            "the four-density table needs a fixed interval, got {family}"
        )));
    };
    check_grid(x_grid)?;
    x_grid
        .iter()
        .map(|&x| {
            let interval = IntervalAt::new(lower, upper, x as f64)?;
            match empirical_densities_all(x, interval, spec, sieve) {
                Ok(values) => Ok(Theorem2Row {
                    x,
                    values: Some(values),
                    error: None,
                }),
                Err(err @ Error::EmptyFareySet { .. }) => Ok(Theorem2Row {
                    x,
                    values: None,
                    error: Some(err.to_string()),
                }),
                Err(err) => Err(err),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem5Row {
    pub x: u64,
    pub nu11: f64,
    pub reference: DensityValue,
    pub distance: f64,
}

/// `ν^{11}_x(M(A,B|q))` along the family, against the exact limit.
pub fn run_theorem5(
    family: &IntervalFamily,
    spec: &MultiplesSpec,
    x_grid: &[u64],
    sieve: &FactorSieve,
) -> Result<Vec<Theorem5Row>> {
    let validation = family.validate_theorem5();
    if !validation.holds {
        return Err(Error::Precondition(validation.reason));
    }
    check_grid(x_grid)?;
    let reference = ie_density(spec.a(), spec.b(), spec.q(), sieve)?;
    let target = reference.to_f64();
    x_grid
        .iter()
        .map(|&x| {
            let interval = family.evaluate(x as f64)?;
            let nu11 = empirical_density(x, interval, SumExponents::new(1, 1)?, spec, sieve)?;
            Ok(Theorem5Row {
                x,
                nu11,
                reference: reference.clone(),
                distance: (nu11 - target).abs(),
            })
        })
        .collect()
}

/// Primes `p ≤ limit`.
pub fn primes_up_to(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Ok(Vec::new());
    }
    Ok(FactorSieve::new(limit)?
        .primes()
        .iter()
        .map(|&p| p as u64)
        .collect())
}

/// The union of the inclusive ranges `lo..=hi`, sorted and deduplicated.
pub fn integer_ranges(ranges: &[(u64, u64)]) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for &(lo, hi) in ranges {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!("bad range {lo}..={hi}")));
        }
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::Bound;

    fn harmonic(k: u64) -> f64 {
        (1..=k).map(|j| 1.0 / j as f64).sum()
    }

    fn unit_family() -> IntervalFamily {
        IntervalFamily::constant(Bound::integer(0), Bound::integer(1)).unwrap()
    }

    #[test]
    fn integer_density_examples() {
        let all = MultiplesSieve::build(&[1], 100).unwrap();
        let d = integer_densities(&all, 100).unwrap();
        assert_eq!(d.nu0, 1.0);
        assert!((d.nu1 - harmonic(100) / 100f64.ln()).abs() < 1e-12);
        assert!((d.nu1 - 1.12642).abs() < 1e-5, "{}", d.nu1);
        let even = MultiplesSieve::build(&[2], 100).unwrap();
        assert_eq!(integer_densities(&even, 100).unwrap().nu0, 0.5);
        let none = MultiplesSieve::build(&[500], 100).unwrap();
        let d = integer_densities(&none, 100).unwrap();
        assert_eq!((d.nu0, d.nu1), (0.0, 0.0));
        assert!(integer_densities(&all, 1).is_err());
        assert!(integer_densities(&all, 101).is_err());
    }

    #[test]
    fn full_set_nu0_is_one() {
        let all = MultiplesSieve::build(&[1], 5000).unwrap();
        for x in [2, 3, 17, 999, 5000] {
            assert_eq!(integer_densities(&all, x).unwrap().nu0, 1.0);
        }
    }

    #[test]
    fn truncation_examples() {
        let exp = TruncationExperiment {
            a: primes_up_to(1000).unwrap(),
            n_grid: vec![2, 3, 5],
            x_grid: vec![1000],
        };
        let rows = run_truncation(&exp).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0].nu1 <= w[1].nu1));

        let single = TruncationExperiment {
            a: vec![2],
            n_grid: vec![7],
            x_grid: vec![100],
        };
        assert_eq!(run_truncation(&single).unwrap().len(), 1);

        let stable = TruncationExperiment {
            a: vec![2],
            n_grid: vec![2, 10, 50],
            x_grid: vec![100, 1000],
        };
        let rows = run_truncation(&stable).unwrap();
        for x in [100, 1000] {
            let col: Vec<f64> = rows.iter().filter(|r| r.x == x).map(|r| r.nu1).collect();
            assert!(col.iter().all(|&v| v == col[0]));
        }
    }

    #[test]
    fn truncation_below_smallest_element() {
        let exp = TruncationExperiment {
            a: vec![5, 7],
            n_grid: vec![1, 5],
            x_grid: vec![50],
        };
        let rows = run_truncation(&exp).unwrap();
        assert_eq!((rows[0].nu0, rows[0].nu1), (0.0, 0.0));
        assert!(rows[1].nu0 > 0.0);
    }

    #[test]
    fn four_density_table_examples() {
        let sieve = FactorSieve::new(20_000).unwrap();
        let full = MultiplesSpec::new(vec![1], vec![1], 1).unwrap();
        let rows = run_theorem2_table(&unit_family(), &full, &[10, 100], &sieve).unwrap();
        assert!(rows.iter().all(|r| r.values == Some([1.0; 4])));

        let narrow =
            IntervalFamily::constant(Bound::exact(1, 7).unwrap(), Bound::exact(1, 6).unwrap())
                .unwrap();
        let rows = run_theorem2_table(&narrow, &full, &[3, 100], &sieve).unwrap();
        assert!(rows[0].values.is_none() && rows[0].error.is_some());
        assert!(rows[1].values.is_some());

        assert!(run_theorem2_table(
            &IntervalFamily::zero_power(0.5).unwrap(),
            &full,
            &[10],
            &sieve
        )
        .is_err());
    }

    #[test]
    fn shrinking_interval_examples() {
        let sieve = FactorSieve::new(5000).unwrap();
        let full = MultiplesSpec::new(vec![1], vec![1], 1).unwrap();
        let rows = run_theorem5(&unit_family(), &full, &[100, 1000], &sieve).unwrap();
        assert!(rows.iter().all(|r| r.nu11 == 1.0 && r.distance == 0.0));

        let spec = MultiplesSpec::new(vec![2], vec![3], 1).unwrap();
        let fam = IntervalFamily::shrink(Bound::integer(1), 0.5).unwrap();
        let first = run_theorem5(&fam, &spec, &[100, 1000], &sieve).unwrap();
        let again = run_theorem5(&fam, &spec, &[100, 1000], &sieve).unwrap();
        assert_eq!(first, again);
        assert!(first.iter().all(|r| (0.0..=1.0).contains(&r.nu11)));
        assert_eq!(first[0].reference.to_string(), "1/12");

        let bounded = IntervalFamily::shrink(Bound::integer(1), 1.0).unwrap();
        assert!(matches!(
            run_theorem5(&bounded, &spec, &[100], &sieve),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn generators() {
        assert_eq!(primes_up_to(20).unwrap(), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(primes_up_to(1).unwrap().is_empty());
        assert_eq!(
            integer_ranges(&[(5, 7), (1, 2), (6, 8)]).unwrap(),
            vec![1, 2, 5, 6, 7, 8]
        );
        assert!(integer_ranges(&[(3, 2)]).is_err());
    }
}
