//! Interval families `I_x = (λ1(x), λ2(x))`.
//!
//! Endpoints are open. A rational endpoint is kept exact so that the strict
//! comparisons `λ1·n < d·m < λ2·n` are decided in integer arithmetic; other
//! endpoints are `f64` and the comparison is made against the rounded product
//! `fl(λ·n)`, which is the same number on every evaluation path.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::arith::gcd;
use crate::{Error, Result};

/// One endpoint of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// `num/den` in lowest terms, `den > 0`.
    Exact {
        num: u64,
        den: u64,
    },
    Approx(f64),
}

impl Bound {
    pub fn exact(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument(
                "zero denominator in endpoint".into(),
            ));
        }
        let g = gcd(num, den).max(1);
        Ok(Bound::Exact {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(v: u64) -> Self {
        Bound::Exact { num: v, den: 1 }
    }

    pub fn approx(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "endpoint {v} must be finite and nonnegative"
            )));
        }
        Ok(Bound::Approx(v))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Bound::Exact { num, den } => num as f64 / den as f64,
            Bound::Approx(v) => v,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Bound::Exact { num, .. } => num == 0,
            Bound::Approx(v) => v == 0.0,
        }
    }

    /// Multiplies the endpoint by `num/den`, exactly when possible.
    pub fn scale(self, num: u64, den: u64) -> Result<Self> {
        match self {
            Bound::Exact { num: p, den: q } => {
                let n = p as u128 * num as u128;
                let d = q as u128 * den as u128;
                let g = gcd_u128(n, d).max(1);
                let (n, d) = (n / g, d / g);
                if n > u64::MAX as u128 || d > u64::MAX as u128 {
                    return Err(Error::Overflow("rescaled endpoint exceeds u64".into()));
                }
                Bound::exact(n as u64, d as u64)
            }
            Bound::Approx(v) => Bound::approx(v * num as f64 / den as f64),
        }
    }

    /// `⌊λ·n / d⌋` and whether `fl(λ·n)` sits within rounding distance of an
    /// integer (always `false` for exact endpoints).
    fn floor_scaled(self, n: u64, d: u64) -> (u128, bool) {
        match self {
            Bound::Exact { num, den } => {
                (num as u128 * n as u128 / (den as u128 * d as u128), false)
            }
            Bound::Approx(v) => {
                let t = v * n as f64;
                (t.floor() as u128 / d as u128, near_integer(t))
            }
        }
    }

    /// `⌈λ·n / d⌉`, with the same ambiguity flag as [`Bound::floor_scaled`].
    fn ceil_scaled(self, n: u64, d: u64) -> (u128, bool) {
        match self {
            Bound::Exact { num, den } => (
                div_ceil_u128(num as u128 * n as u128, den as u128 * d as u128),
                false,
            ),
            Bound::Approx(v) => {
                let t = v * n as f64;
                (div_ceil_u128(t.ceil() as u128, d as u128), near_integer(t))
            }
        }
    }

    fn cmp_value(self, other: Bound) -> Ordering {
        match (self, other) {
            (Bound::Exact { num: a, den: b }, Bound::Exact { num: c, den: d }) => {
                (a as u128 * d as u128).cmp(&(c as u128 * b as u128))
            }
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn div_ceil_u128(a: u128, b: u128) -> u128 {
    a / b + u128::from(!a.is_multiple_of(b))
}

fn near_integer(t: f64) -> bool {
    if t == 0.0 {
        return false;
    }
    (t - t.round()).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0)
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact { num, den: 1 } => write!(f, "{num}"),
            Bound::Exact { num, den } => write!(f, "{num}/{den}"),
            // exponent form so that parsing gives back an approximate bound
            Bound::Approx(v) => write!(f, "{v:e}"),
        }
    }
}

impl FromStr for Bound {
    type Err = Error;

    /// `p`, `p/q` and plain decimals such as `0.25` parse exactly; anything
    /// else that `f64` accepts (`1e-3`, long decimals) becomes approximate.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse endpoint `{s}`"));
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Bound::exact(p, q);
        }
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            return Ok(Bound::integer(s.parse().map_err(|_| bad())?));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
            if digits_ok(int) && digits_ok(frac) && !frac.is_empty() && frac.len() <= 18 {
                let den = 10u64.pow(frac.len() as u32);
                let int: u64 = if int.is_empty() {
                    0
                } else {
                    int.parse().map_err(|_| bad())?
                };
                let frac: u64 = frac.parse().map_err(|_| bad())?;
                if let Some(num) = int.checked_mul(den).and_then(|v| v.checked_add(frac)) {
                    return Bound::exact(num, den);
                }
            }
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Bound::approx(v)
    }
}

/// A concrete open interval `(λ1, λ2)` at scale `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalAt {
    lower: Bound,
    upper: Bound,
    x: f64,
}

/// Inclusive range `lo..=hi` of admissible numerators; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
    /// An approximate endpoint product landed within rounding distance of an
    /// integer, so real-number membership at that boundary is uncertain.
    pub ambiguous: bool,
}

impl Window {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            self.hi - self.lo + 1
        }
    }
}

impl IntervalAt {
    pub fn new(lower: Bound, upper: Bound, x: f64) -> Result<Self> {
        if lower.cmp_value(upper) != Ordering::Less {
            return Err(Error::InvalidArgument(format!(
                "interval ({lower}, {upper}) needs λ1 < λ2"
            )));
        }
        if lower.to_f64() < 0.0 {
            return Err(Error::InvalidArgument("λ1 must be nonnegative".into()));
        }
        Ok(IntervalAt { lower, upper, x })
    }

    /// Exact integer-or-rational interval, mostly for tests and fixed configs.
    pub fn rational(lo: (u64, u64), hi: (u64, u64)) -> Result<Self> {
        IntervalAt::new(Bound::exact(lo.0, lo.1)?, Bound::exact(hi.0, hi.1)?, 0.0)
    }

    pub fn lower(&self) -> Bound {
        self.lower
    }

    pub fn upper(&self) -> Bound {
        self.upper
    }

    pub fn lambda1(&self) -> f64 {
        self.lower.to_f64()
    }

    pub fn lambda2(&self) -> f64 {
        self.upper.to_f64()
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Numerators `m ≥ 1` with `λ1·n < d·m < λ2·n`.
    ///
    /// With `d = 1` this is the numerator range of `F^I_x` at denominator `n`;
    /// larger `d` gives the inner range of the Möbius-inverted sum. Both
    /// routes share this function, so their term sets coincide.
    pub fn numerator_window(&self, n: u64, d: u64) -> Window {
        let (fl, amb_lo) = self.lower.floor_scaled(n, d);
        let (cl, amb_hi) = self.upper.ceil_scaled(n, d);
        let lo = (fl + 1).min(u64::MAX as u128) as u64;
        let hi = if cl == 0 {
            0
        } else {
            (cl - 1).min(u64::MAX as u128) as u64
        };
        Window {
            lo: lo.max(1),
            hi,
            ambiguous: amb_lo || amb_hi,
        }
    }

    /// `(num/den)·I` at the same scale.
    pub fn scaled(&self, num: u64, den: u64) -> Result<Self> {
        IntervalAt::new(
            self.lower.scale(num, den)?,
            self.upper.scale(num, den)?,
            self.x,
        )
    }
}

impl fmt::Display for IntervalAt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

/// Closed-form interval systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalFamily {
    /// `(λ1, λ2)` for every `x`.
    Constant { lower: Bound, upper: Bound },
    /// `(0, x^{-c})` with `0 < c < 1`.
    ZeroPower { exponent: f64 },
    /// `(λ0, λ0 + (log x)^{-γ})` with `λ0 > 0`, `0 < γ ≤ 1`.
    Shrink { base: Bound, width_exponent: f64 },
}

/// Outcome of a hypothesis validator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub holds: bool,
    pub reason: String,
}

impl Validation {
    fn yes(reason: impl Into<String>) -> Self {
        Validation {
            holds: true,
            reason: reason.into(),
        }
    }

    fn no(reason: impl Into<String>) -> Self {
        Validation {
            holds: false,
            reason: reason.into(),
        }
    }
}

impl IntervalFamily {
    pub fn constant(lower: Bound, upper: Bound) -> Result<Self> {
        IntervalAt::new(lower, upper, 0.0)?;
        Ok(IntervalFamily::Constant { lower, upper })
    }

    pub fn zero_power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "zeropow exponent must lie in (0, 1), got {exponent}"
            )));
        }
        Ok(IntervalFamily::ZeroPower { exponent })
    }

    pub fn shrink(base: Bound, width_exponent: f64) -> Result<Self> {
        if base.is_zero() {
            return Err(Error::InvalidArgument(
                "shrink base λ0 must be positive".into(),
            ));
        }
        if !(width_exponent > 0.0 && width_exponent <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink width exponent must lie in (0, 1], got {width_exponent}"
            )));
        }
        Ok(IntervalFamily::Shrink {
            base,
            width_exponent,
        })
    }

    pub fn evaluate(&self, x: f64) -> Result<IntervalAt> {
        if !x.is_finite() || x <= std::f64::consts::E {
            return Err(Error::InvalidArgument(format!(
                "interval families are evaluated at x > e, got {x}"
            )));
        }
        match *self {
            IntervalFamily::Constant { lower, upper } => IntervalAt::new(lower, upper, x),
            IntervalFamily::ZeroPower { exponent } => {
                IntervalAt::new(Bound::integer(0), Bound::approx(x.powf(-exponent))?, x)
            }
            IntervalFamily::Shrink {
                base,
                width_exponent,
            } => {
                let upper = base.to_f64() + x.ln().powf(-width_exponent);
                IntervalAt::new(base, Bound::approx(upper)?, x)
            }
        }
    }

    /// Symbolic check of the hypotheses under which all four densities of a
    /// finite `M(A,B|q)` exist and agree:
    /// `λ1 = 0 ⇒ λ2 > x^{-c}` for some `0 < c < 1`, and
    /// `λ1 > 0 ⇒ λ1·log(λ2/λ1)·log x → ∞`.
    pub fn validate_theorem3(&self) -> Validation {
        match *self {
            IntervalFamily::Constant { lower, .. } if lower.is_zero() => {
                Validation::yes("λ1 = 0 and λ2 is a positive constant, so λ2 > x^{-c} for every c")
            }
            IntervalFamily::Constant { .. } => {
                Validation::yes("λ1 > 0 constant: λ1·log(λ2/λ1)·log x grows like log x")
            }
            IntervalFamily::ZeroPower { exponent } => Validation::yes(format!(
                "λ1 = 0 and λ2 = x^-{exponent} > x^-c for any c in ({exponent}, 1)"
            )),
            IntervalFamily::Shrink { width_exponent, .. } if width_exponent < 1.0 => {
                Validation::yes(format!(
                    "λ1·log(λ2/λ1)·log x ≍ (log x)^{} → ∞",
                    1.0 - width_exponent
                ))
            }
            IntervalFamily::Shrink { .. } => {
                Validation::no("γ = 1: λ1·log(λ2/λ1)·log x stays bounded")
            }
        }
    }

    /// Symbolic check of the interval hypotheses for the existence of
    /// `ν^{11}` for arbitrary `A, B`.
    pub fn validate_theorem5(&self) -> Validation {
        match *self {
            IntervalFamily::Constant { lower, .. } if lower.is_zero() => {
                Validation::yes("λ1 = 0: λ2·x → ∞ and log x / log(λ2·x) → 1")
            }
            IntervalFamily::Constant { .. } => {
                Validation::yes("λ1 > 0 and λ2 bounded: (λ2 - λ1)·log x → ∞")
            }
            IntervalFamily::ZeroPower { exponent } => Validation::yes(format!(
                "λ1 = 0: λ2·x = x^{} → ∞ and log x / log(λ2·x) = {}",
                1.0 - exponent,
                1.0 / (1.0 - exponent)
            )),
            IntervalFamily::Shrink { width_exponent, .. } if width_exponent < 1.0 => {
                Validation::yes(format!(
                    "λ1 > 0 and λ2 bounded: (λ2 - λ1)·log x = (log x)^{} → ∞",
                    1.0 - width_exponent
                ))
            }
            IntervalFamily::Shrink { .. } => {
                Validation::no("γ = 1: (λ2 - λ1)·log x = 1 does not tend to infinity")
            }
        }
    }

    /// Largest `λ2` over the given scales, used for sieve sizing.
    pub fn max_upper(&self, xs: &[u64]) -> f64 {
        xs.iter()
            .filter_map(|&x| self.evaluate(x as f64).ok())
            .map(|i| i.lambda2())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for IntervalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalFamily::Constant { lower, upper } => write!(f, "const:{lower},{upper}"),
            IntervalFamily::ZeroPower { exponent } => write!(f, "zeropow:{exponent}"),
            IntervalFamily::Shrink {
                base,
                width_exponent,
            } => write!(f, "shrink:{base},{width_exponent}"),
        }
    }
}

impl FromStr for IntervalFamily {
    type Err = Error;

    /// Grammar: `const:λ1,λ2`, `zeropow:c`, `shrink:λ0,γ`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("family `{s}`: {why}"));
        let (kind, params) = s.split_once(':').ok_or_else(|| bad("missing `kind:`"))?;
        let parts: Vec<&str> = params.split(',').map(str::trim).collect();
        let real = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| bad(&format!("cannot parse number `{t}`")))
        };
        match (kind.trim(), parts.as_slice()) {
            ("const", [lo, hi]) => IntervalFamily::constant(lo.parse()?, hi.parse()?),
            ("zeropow", [c]) => IntervalFamily::zero_power(real(c)?),
            ("shrink", [base, gamma]) => IntervalFamily::shrink(base.parse()?, real(gamma)?),
            ("const" | "zeropow" | "shrink", _) => Err(bad("wrong number of parameters")),
            _ => Err(bad("unknown kind (expected const, zeropow or shrink)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let c: IntervalFamily = "const:0,1".parse().unwrap();
        let i = c.evaluate(100.0).unwrap();
        assert_eq!((i.lambda1(), i.lambda2()), (0.0, 1.0));

        let z = IntervalFamily::zero_power(0.5).unwrap();
        let i = z.evaluate(1e4).unwrap();
        assert_eq!(i.lambda1(), 0.0);
        assert!((i.lambda2() - 1e-2).abs() < 1e-15);

        let s = IntervalFamily::shrink(Bound::integer(1), 0.5).unwrap();
        let i = s.evaluate(4f64.exp()).unwrap();
        assert_eq!(i.lambda1(), 1.0);
        assert!((i.lambda2() - 1.5).abs() < 1e-12);

        assert!(c.evaluate(2.5).is_err());
        assert!(c.evaluate(std::f64::consts::E).is_err());
    }

    #[test]
    fn construction_errors() {
        assert!("const:1,1".parse::<IntervalFamily>().is_err());
        assert!("const:2,1".parse::<IntervalFamily>().is_err());
        assert!("zeropow:1".parse::<IntervalFamily>().is_err());
        assert!("zeropow:0".parse::<IntervalFamily>().is_err());
        assert!("shrink:0,0.5".parse::<IntervalFamily>().is_err());
        assert!("shrink:1,1.5".parse::<IntervalFamily>().is_err());
        assert!("circle:1".parse::<IntervalFamily>().is_err());
        assert!("const:1".parse::<IntervalFamily>().is_err());
    }

    #[test]
    fn fixed_ratio_validator_examples() {
        for (fam, expect) in [
            ("const:0,1", true),
            ("zeropow:0.5", true),
            ("shrink:1,0.5", true),
            ("const:1,2", true),
            ("shrink:1,1", false),
        ] {
            let f: IntervalFamily = fam.parse().unwrap();
            assert_eq!(f.validate_theorem3().holds, expect, "{fam}");
        }
    }

    #[test]
    fn harmonic_limit_validator_examples() {
        for (fam, expect) in [
            ("const:1,2", true),
            ("zeropow:0.5", true),
            ("const:0,3", true),
            ("shrink:1,0.5", true),
            ("shrink:2,1", false),
        ] {
            let f: IntervalFamily = fam.parse().unwrap();
            assert_eq!(f.validate_theorem5().holds, expect, "{fam}");
            assert_eq!(f.validate_theorem5(), f.validate_theorem5());
        }
    }

    #[test]
    fn bound_parsing() {
        assert_eq!(
            "1/2".parse::<Bound>().unwrap(),
            Bound::Exact { num: 1, den: 2 }
        );
        assert_eq!(
            "0.5".parse::<Bound>().unwrap(),
            Bound::Exact { num: 1, den: 2 }
        );
        assert_eq!("3".parse::<Bound>().unwrap(), Bound::integer(3));
        assert_eq!(
            "2/4".parse::<Bound>().unwrap(),
            Bound::Exact { num: 1, den: 2 }
        );
        assert_eq!("1e-3".parse::<Bound>().unwrap(), Bound::Approx(1e-3));
        assert!("abc".parse::<Bound>().is_err());
        assert!("-1".parse::<Bound>().is_err());
        assert!("1/0".parse::<Bound>().is_err());
    }

    #[test]
    fn window_respects_open_endpoints() {
        let i = IntervalAt::rational((1, 1), (2, 1)).unwrap();
        // n = 3: 3 < m < 6
        assert_eq!(
            i.numerator_window(3, 1),
            Window {
                lo: 4,
                hi: 5,
                ambiguous: false
            }
        );
        // d = 2: 3 < 2m < 6 → m = 2
        assert_eq!(
            i.numerator_window(3, 2),
            Window {
                lo: 2,
                hi: 2,
                ambiguous: false
            }
        );
        let unit = IntervalAt::rational((0, 1), (1, 1)).unwrap();
        assert!(unit.numerator_window(1, 1).is_empty());
        assert_eq!(unit.numerator_window(4, 1).len(), 3);
    }

    #[test]
    fn scaling_is_exact_for_rational_endpoints() {
        let i = IntervalAt::rational((1, 2), (3, 1)).unwrap();
        let s = i.scaled(3, 2).unwrap();
        assert_eq!(s.lower(), Bound::Exact { num: 3, den: 4 });
        assert_eq!(s.upper(), Bound::Exact { num: 9, den: 2 });
    }

    proptest! {
        #[test]
        fn evaluate_never_inverts(x in 3.0f64..1e9, c in 0.01f64..0.99, base in 1u64..5, g in 0.05f64..1.0) {
            for fam in [
                IntervalFamily::zero_power(c).unwrap(),
                IntervalFamily::shrink(Bound::integer(base), g).unwrap(),
                IntervalFamily::constant(Bound::exact(1, 3).unwrap(), Bound::integer(base + 1)).unwrap(),
            ] {
                let i = fam.evaluate(x).unwrap();
                prop_assert!(i.lambda1() >= 0.0 && i.lambda1() < i.lambda2());
            }
        }

        #[test]
        fn window_matches_exact_brute_force(p1 in 0u64..6, q1 in 1u64..5, w in 1u64..8, n in 1u64..60, d in 1u64..8) {
            // λ1 = p1/q1, λ2 = λ1 + w/q1
            let i = IntervalAt::rational((p1, q1), (p1 + w, q1)).unwrap();
            let win = i.numerator_window(n, d);
            let brute: Vec<u64> = (1..1000)
                .filter(|&m| p1 * n < d * m * q1 && d * m * q1 < (p1 + w) * n)
                .collect();
            let got: Vec<u64> = if win.is_empty() { vec![] } else { (win.lo..=win.hi).collect() };
            prop_assert_eq!(got, brute);
        }

        #[test]
        fn family_display_round_trips(c in 0.01f64..0.99, g in 0.05f64..1.0, p in 1u64..9, q in 1u64..9) {
            for fam in [
                IntervalFamily::zero_power(c).unwrap(),
                IntervalFamily::shrink(Bound::exact(p, q).unwrap(), g).unwrap(),
                IntervalFamily::constant(Bound::exact(p, q).unwrap(), Bound::approx(p as f64 / q as f64 + c).unwrap()).unwrap(),
            ] {
                let back: IntervalFamily = fam.to_string().parse().unwrap();
                prop_assert_eq!(back, fam);
            }
        }
    }
}
