//! Exact truncated q-series arithmetic and congruence machinery for
//! eta-quotients, built around the restricted-odd-difference overpartition
//! function `tbar(n)`.
//!
//! The crate is organized as:
//!
//! - [`ring`] / [`series`]: exact coefficient rings (`F_ell`, `Z`) and the
//!   dense truncated-series kernel every other module builds on;
//! - [`eta`]: eta-quotient descriptors, q-expansions with fractional-power
//!   offsets, Ligozat cusp orders, and Sturm bounds;
//! - [`operators`]: theta and `U_m` operators, Bernoulli numbers,
//!   Eisenstein series, and a level-one filtration engine;
//! - [`congruence`]: the `tbar` series and its brute-force oracle,
//!   Ramanujan-congruence scanning, and Sturm-certified congruences
//!   modulo 5;
//! - [`mainthm`]: quotient profiles, the companion forms `F_ell`, theta
//!   non-vanishing, residue transfer, case arithmetic, prime-exclusion
//!   reports, and coset enumeration.
//!
//! All arithmetic is exact; there is no floating point anywhere.

#![forbid(unsafe_code)]

pub mod congruence;
pub mod error;
pub mod eta;
pub mod mainthm;
pub mod operators;
pub mod ring;
pub mod series;

pub use error::{Error, Result};
pub use ring::{CoeffRing, Fp, PrimeModulus, ZZ};
pub use series::{sparse_factor_pow, Series, SparsePoly};

/// Series with coefficients in `F_ell`.
pub type ModSeries = Series<Fp>;
/// Series with exact big-integer coefficients.
pub type IntSeries = Series<ZZ>;
/// q-expansion over `F_ell` with a fractional-power offset.
pub type ModQExpansion = eta::QExpansion<Fp>;
/// q-expansion over `Z` with a fractional-power offset.
pub type IntQExpansion = eta::QExpansion<ZZ>;
