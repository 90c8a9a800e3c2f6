//! Densities of sets of rational multiples.
//!
//! For finite sets `A`, `B` of naturals and a modulus `q`, the set
//! `M(A,B|q)` holds the reduced fractions `m/n` with `m` a multiple of some
//! `a ∈ A`, `n` a multiple of some `b ∈ B`, and `mn` coprime to `q`. The crate
//! measures these sets inside the Farey-type sets `F^I_x` (reduced fractions
//! with denominator at most `x` lying in an open interval `I`), weighting each
//! fraction by `m^{-r1} n^{-r2}`, and compares the empirical ratios with their
//! exact rational limits.
//!
//! Module map:
//!
//! * [`arith`]: smallest-prime-factor sieve, Möbius function, exact prime products.
//! * [`intervals`]: interval families `I_x` and their hypothesis validators.
//! * [`enumeration`]: streaming enumeration of `F^I_x` and multiples sieves.
//! * [`sums`]: weighted sums by direct enumeration and by Möbius inversion.
//! * [`limits`]: exact limiting densities and the complement lower bound.
//! * [`asymptotics`]: closed-form main terms and the pair rescaling identity.
//! * [`experiments`]: table runners for the convergence experiments.
//! * [`cli`]: the `multdens` command-line front end.

pub mod arith;
pub mod asymptotics;
pub mod cli;
pub mod enumeration;
mod error;
pub mod experiments;
pub mod intervals;
pub mod limits;
pub mod sums;

pub use error::{Error, Result};

pub use arith::{ExactRational, FactorSieve};
pub use enumeration::{MultiplesSieve, MultiplesSpec, ReducedFraction};
pub use intervals::{Bound, IntervalAt, IntervalFamily};
pub use limits::DensityValue;
pub use sums::{CoprimalitySpec, SumExponents, SumResult};
