//! Main terms of `S^{r1 r2}_{x,I}(Q_{q0,q1,q2})`, the ratio
//! `S(Q_{q0,q1,q2}) / S(ℚ⁺) → Π(q0,q1,q2)`, and the per-pair rescaling
//! `S_{x,I}(M(a,b|q)) = a^{-r1} b^{-r2} S_{x/b, (b/a)I}(Q_{q,a,b})`.

use std::f64::consts::PI;

use crate::arith::{gcd, rational_to_f64, FactorSieve};
use crate::enumeration::{in_coprimality_class, FareyEnumerator, MultiplesSpec};
use crate::intervals::{IntervalAt, IntervalFamily};
use crate::sums::{
    accumulate, check_grid, s_direct, s_mobius, CoprimalitySpec, MultiplesMembership, SumExponents,
};
use crate::{Error, Result};

/// The main-term expression, without the factor `Π`.
fn bare_main_term(x: f64, interval: &IntervalAt, exps: SumExponents) -> Result<f64> {
    let (l1, l2) = (interval.lambda1(), interval.lambda2());
    let c3 = 3.0 / (PI * PI);
    let c6 = 6.0 / (PI * PI);
    let zero = interval.lower().is_zero();
    let value = match (exps.r1(), exps.r2()) {
        (0, 0) => c3 * (l2 - l1) * x * x,
        (0, _) => c6 * (l2 - l1) * x,
        (_, r2) if !zero => {
            let spread = (l2 / l1).ln();
            if r2 == 0 {
                c6 * spread * x
            } else {
                c6 * spread * x.ln()
            }
        }
        (_, r2) => {
            if l2 * x <= 1.0 {
                return Err(Error::OutOfRegime(format!(
                    "λ1 = 0 with r1 = 1 needs λ2 > 1/x, got λ2 = {l2}, x = {x}"
                )));
            }
            if r2 == 0 {
                c6 * x * (l2 * x).ln()
            } else if l2 <= 1.0 {
                c3 * (l2 * x).ln().powi(2)
            } else {
                c3 * x.ln() * (l2 * l2 * x).ln()
            }
        }
    };
    Ok(value)
}

/// `Π(q0,q1,q2)` times the main term for the given exponents and interval.
pub fn main_term(
    x: u64,
    interval: &IntervalAt,
    exps: SumExponents,
    spec: CoprimalitySpec,
    sieve: &FactorSieve,
) -> Result<f64> {
    let (q0, q1, q2) = spec.parts();
    let pi = rational_to_f64(&sieve.pi_product(q0, q1, q2)?);
    Ok(pi * bare_main_term(x as f64, interval, exps)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainTermReport {
    pub x: u64,
    pub interval: IntervalAt,
    pub exponents: SumExponents,
    pub spec: CoprimalitySpec,
    pub main_term: f64,
    pub empirical: f64,
    pub ratio: f64,
}

/// Compares `S^{r1 r2}_{x,I}(Q_{q0,q1,q2})` with its main term.
///
/// The sum is taken along the Möbius route, so `sieve` must reach `x·q0·q2`.
pub fn lemma_check(
    x: u64,
    interval: IntervalAt,
    exps: SumExponents,
    spec: CoprimalitySpec,
    sieve: &FactorSieve,
) -> Result<MainTermReport> {
    let main = main_term(x, &interval, exps, spec, sieve)?;
    let empirical = s_mobius(x, interval, exps, spec, sieve)?.value;
    Ok(MainTermReport {
        x,
        interval,
        exponents: exps,
        spec,
        main_term: main,
        empirical,
        ratio: if main > 0.0 {
            empirical / main
        } else {
            f64::NAN
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryRow {
    pub x: u64,
    pub interval: IntervalAt,
    pub exponents: SumExponents,
    pub spec: CoprimalitySpec,
    pub restricted: f64,
    pub full: f64,
    pub ratio: f64,
    pub pi: f64,
    pub distance: f64,
}

/// `S(Q_{q0,q1,q2}) / S(ℚ⁺)` along the grid, with the distance to `Π`.
pub fn corollary_ratio_report(
    x_grid: &[u64],
    family: &IntervalFamily,
    exps: SumExponents,
    spec: CoprimalitySpec,
    sieve: &FactorSieve,
) -> Result<Vec<CorollaryRow>> {
    let validation = family.validate_theorem3();
    if !validation.holds {
        return Err(Error::Precondition(validation.reason));
    }
    check_grid(x_grid)?;
    let (q0, q1, q2) = spec.parts();
    let pi = rational_to_f64(&sieve.pi_product(q0, q1, q2)?);
    x_grid
        .iter()
        .map(|&x| {
            let interval = family.evaluate(x as f64)?;
            let en = FareyEnumerator::new(x, interval, sieve)?;
            let acc = accumulate::<2, _>(&en, |f, slots| {
                let w = exps.weight(f.m, f.n);
                slots[0].add(w);
                if in_coprimality_class(f, &spec) {
                    slots[1].add(w);
                }
            });
            if acc.slots[0].count == 0 {
                return Err(Error::EmptyFareySet { x });
            }
            let full = acc.slots[0].sum.value();
            let restricted = acc.slots[1].sum.value();
            let ratio = restricted / full;
            Ok(CorollaryRow {
                x,
                interval,
                exponents: exps,
                spec,
                restricted,
                full,
                ratio,
                pi,
                distance: (ratio - pi).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleReport {
    pub a: u64,
    pub b: u64,
    pub q: u64,
    pub x: u64,
    pub interval: IntervalAt,
    pub scaled_x: u64,
    pub scaled_interval: IntervalAt,
    pub exponents: SumExponents,
    /// `S_{x,I}(M(a,b|q))`.
    pub lhs: f64,
    /// `a^{-r1} b^{-r2} S_{⌊x/b⌋,(b/a)I}(Q_{q,a,b})`.
    pub rhs: f64,
    pub lhs_terms: u64,
    pub rhs_terms: u64,
    pub relative_error: f64,
}

impl RescaleReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.lhs_terms == self.rhs_terms && self.relative_error <= tolerance
    }
}

/// Evaluates both sides of the rescaling identity by direct enumeration.
pub fn pair_rescale_check(
    a: u64,
    b: u64,
    q: u64,
    x: u64,
    family: &IntervalFamily,
    exps: SumExponents,
    sieve: &FactorSieve,
) -> Result<RescaleReport> {
    if a == 0 || b == 0 || q == 0 {
        return Err(Error::InvalidArgument("a, b, q must be positive".into()));
    }
    if gcd(a, b) != 1 || gcd(a * b, q) != 1 {
        return Err(Error::Precondition(format!(
            "rescaling needs a ⊥ b and ab ⊥ q, got a={a}, b={b}, q={q}"
        )));
    }
    let scaled_x = x / b;
    if scaled_x == 0 {
        return Err(Error::Precondition(format!("x/b = {x}/{b} is below 1")));
    }
    let interval = family.evaluate(x as f64)?;
    let scaled_interval = interval.scaled(b, a)?;

    let spec = MultiplesSpec::new(vec![a], vec![b], q)?;
    let member = MultiplesMembership::for_scale(&spec, x, &interval)?;
    let lhs = s_direct(x, interval, exps, |f| member.contains_sized(f), sieve)?;

    let class = CoprimalitySpec::new(q, a, b)?;
    let rhs = s_direct(
        scaled_x,
        scaled_interval,
        exps,
        |f| in_coprimality_class(f, &class),
        sieve,
    )?;
    let factor = (a as f64).powi(-(exps.r1() as i32)) * (b as f64).powi(-(exps.r2() as i32));
    let rhs_value = factor * rhs.value;
    let scale = lhs.value.abs().max(rhs_value.abs());
    let relative_error = if scale == 0.0 {
        0.0
    } else {
        (lhs.value - rhs_value).abs() / scale
    };
    Ok(RescaleReport {
        a,
        b,
        q,
        x,
        interval,
        scaled_x,
        scaled_interval,
        exponents: exps,
        lhs: lhs.value,
        rhs: rhs_value,
        lhs_terms: lhs.term_count,
        rhs_terms: rhs.term_count,
        relative_error,
    })
}
