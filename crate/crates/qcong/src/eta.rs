//! Eta-quotients and their q-expansions.
//!
//! An [`EtaQuotient`] is a formal product `prod_d eta(d z)^{r_d}`. Its
//! expansion is a power series times the prefactor `q^{offset24/24}` with
//! `offset24 = sum d * r_d`, coming from `eta(z) = q^{1/24} prod (1-q^n)`.
//! The offset is tracked exactly as an integer multiple of 1/24; turning a
//! [`QExpansion`] into a plain series fails loudly unless the offset is a
//! non-negative multiple of 24.
//!
//! Also here: weights and levels, the Ligozat order of vanishing at the
//! cusps of `Gamma_0(N)`, subgroup indices, and Sturm bounds.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::CoeffRing;
use crate::series::{pentagonal_terms, Series, SparsePoly};

/// A formal product `prod_d eta(d z)^{r_d}` with positive scales `d` and
/// nonzero integer exponents `r_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "EtaQuotientRepr", into = "EtaQuotientRepr")]
pub struct EtaQuotient {
    factors: BTreeMap<u64, i64>,
}

#[derive(Serialize, Deserialize)]
struct EtaQuotientRepr {
    factors: Vec<(u64, i64)>,
}

impl From<EtaQuotientRepr> for EtaQuotient {
    fn from(repr: EtaQuotientRepr) -> Self {
        EtaQuotient::new(repr.factors).unwrap_or_else(|_| EtaQuotient::empty())
    }
}

impl From<EtaQuotient> for EtaQuotientRepr {
    fn from(eq: EtaQuotient) -> Self {
        EtaQuotientRepr {
            factors: eq.factors.into_iter().collect(),
        }
    }
}

impl EtaQuotient {
    /// Builds a quotient from `(scale, exponent)` pairs, merging repeated
    /// scales and dropping zero exponents.
    pub fn new<I: IntoIterator<Item = (u64, i64)>>(pairs: I) -> Result<Self> {
        let mut factors = BTreeMap::new();
        for (d, r) in pairs {
            if d == 0 {
                return Err(Error::InvalidArgument("eta scale must be positive".into()));
            }
            *factors.entry(d).or_insert(0) += r;
        }
        factors.retain(|_, r| *r != 0);
        Ok(EtaQuotient { factors })
    }

    /// The empty product (the constant 1).
    pub fn empty() -> Self {
        EtaQuotient {
            factors: BTreeMap::new(),
        }
    }

    /// The quotient `eta(3z) / (eta(2z) eta(z))` generating `tbar(n)`.
    pub fn tbar() -> Self {
        EtaQuotient::new([(3, 1), (2, -1), (1, -1)]).expect("valid scales")
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.factors.iter().map(|(&d, &r)| (d, r))
    }

    pub fn exponent(&self, d: u64) -> i64 {
        self.factors.get(&d).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Formal product of two quotients (exponents add).
    pub fn combine(&self, other: &EtaQuotient) -> EtaQuotient {
        let mut factors = self.factors.clone();
        for (&d, &r) in &other.factors {
            *factors.entry(d).or_insert(0) += r;
        }
        factors.retain(|_, r| *r != 0);
        EtaQuotient { factors }
    }

    /// Raises every exponent by the integer factor `e`.
    pub fn pow(&self, e: i64) -> EtaQuotient {
        if e == 0 {
            return EtaQuotient::empty();
        }
        let factors = self.factors.iter().map(|(&d, &r)| (d, r * e)).collect();
        EtaQuotient { factors }
    }

    /// `sum_d d * r_d`, the q-power prefactor in units of 1/24.
    pub fn offset24(&self) -> i64 {
        self.factors.iter().map(|(&d, &r)| d as i64 * r).sum()
    }

    /// Twice the weight: each eta factor contributes weight 1/2.
    pub fn weight2(&self) -> i64 {
        self.factors.values().sum()
    }

    /// Least common multiple of the scales (1 for the empty product).
    pub fn level_lcm(&self) -> u64 {
        self.factors.keys().fold(1u64, |acc, &d| acc.lcm(&d))
    }

    /// Parses the CLI syntax `"3^1 * 2^-1 * 1^-1"`: `scale^exponent`
    /// factors separated by whitespace, `*` optional, bare `scale`
    /// meaning exponent 1.
    pub fn parse(input: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for token in input
            .split(|c: char| c.is_whitespace() || c == '*')
            .filter(|t| !t.is_empty())
        {
            let (d_str, r_str) = match token.split_once('^') {
                Some((d, r)) => (d, r),
                None => (token, "1"),
            };
            let d: u64 = d_str
                .parse()
                .map_err(|_| Error::ParseEta(format!("bad scale in token '{token}'")))?;
            let r: i64 = r_str
                .parse()
                .map_err(|_| Error::ParseEta(format!("bad exponent in token '{token}'")))?;
            if d == 0 {
                return Err(Error::ParseEta(format!(
                    "scale must be positive: '{token}'"
                )));
            }
            pairs.push((d, r));
        }
        EtaQuotient::new(pairs)
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (&d, &r) in self.factors.iter().rev() {
            if !first {
                write!(f, " * ")?;
            }
            write!(f, "{d}^{r}")?;
            first = false;
        }
        Ok(())
    }
}

/// A truncated series together with a q-power offset in units of 1/24:
/// the value represented is `q^{offset24/24} * series`.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion<R: CoeffRing> {
    offset24: i64,
    series: Series<R>,
}

impl<R: CoeffRing> QExpansion<R> {
    pub fn new(offset24: i64, series: Series<R>) -> Self {
        QExpansion { offset24, series }
    }

    pub fn offset24(&self) -> i64 {
        self.offset24
    }

    pub fn series(&self) -> &Series<R> {
        &self.series
    }

    pub fn into_series(self) -> Series<R> {
        self.series
    }

    /// True when the prefactor is an integral power of q.
    pub fn is_integral(&self) -> bool {
        self.offset24.rem_euclid(24) == 0
    }

    /// Product of two expansions; offsets add, series truncate to the
    /// shorter operand.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(QExpansion {
            offset24: self.offset24 + other.offset24,
            series: self.series.mul(&other.series)?,
        })
    }

    /// Converts to a plain q-series by absorbing the prefactor, which must
    /// be a non-negative multiple of 24. The result has
    /// `trunc + offset24/24` coefficients.
    pub fn to_plain(&self) -> Result<Series<R>> {
        if self.offset24.rem_euclid(24) != 0 {
            return Err(Error::FractionalOffset {
                offset24: self.offset24,
            });
        }
        if self.offset24 < 0 {
            return Err(Error::NegativeOffset {
                offset24: self.offset24,
            });
        }
        Ok(self.series.shifted((self.offset24 / 24) as usize))
    }
}

/// Weight, level, and cusp-holomorphy metadata for an eta-quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularMeta {
    /// Twice the weight, so half-integral weights stay exact.
    pub weight2: i64,
    pub level: u64,
    pub holo_at_cusps: bool,
}

/// Metadata of `eq` regarded at level `n` (which the scales must divide).
pub fn modular_meta(eq: &EtaQuotient, n: u64) -> Result<ModularMeta> {
    Ok(ModularMeta {
        weight2: eq.weight2(),
        level: n,
        holo_at_cusps: is_holo_at_cusps(eq, n)?,
    })
}

/// Expansion of a single `eta(d z)` to `trunc` coefficients via the
/// pentagonal-number theorem; `offset24 = d`.
pub fn eta_series<R: CoeffRing>(ring: &R, d: u64, trunc: usize) -> QExpansion<R> {
    let terms = pentagonal_terms(d as usize, trunc);
    let sp = SparsePoly::from_terms(ring, &terms, trunc);
    QExpansion::new(d as i64, sp.to_series(ring, trunc))
}

/// Expansion of an eta-quotient to `trunc` coefficients.
///
/// Each factor `prod_n (1-q^{dn})^{r}` is applied either as `|r|` sparse
/// multiply/divide passes (cheap for the small exponents of large
/// certificate runs) or by binary exponentiation of the dense factor
/// (cheap for the huge exponents of the companion forms at short
/// truncations); the crossover is by operation count.
pub fn expand<R: CoeffRing>(ring: &R, eq: &EtaQuotient, trunc: usize) -> QExpansion<R> {
    let mut acc = Series::one(ring.clone(), trunc);
    for (d, r) in eq.factors() {
        apply_euler_power(ring, &mut acc, d as usize, r);
    }
    QExpansion::new(eq.offset24(), acc)
}

fn apply_euler_power<R: CoeffRing>(ring: &R, acc: &mut Series<R>, d: usize, r: i64) {
    let trunc = acc.trunc();
    let sp = SparsePoly::from_terms(ring, &pentagonal_terms(d, trunc), trunc);
    let abs = r.unsigned_abs();
    if abs == 0 {
        return;
    }
    let support = sp.support_len() as u64 + 1;
    let log2 = 64 - abs.leading_zeros() as u64;
    let sparse_cost = abs.saturating_mul(support);
    let dense_cost = (2 * log2 + 2).saturating_mul(trunc as u64);
    if sparse_cost <= dense_cost {
        if r > 0 {
            for _ in 0..abs {
                *acc = acc.mul_sparse(&sp);
            }
        } else {
            for _ in 0..abs {
                *acc = acc.div_sparse(&sp).expect("pentagonal constant term is 1");
            }
        }
    } else {
        let mut base = sp.to_series(ring, trunc);
        if r < 0 {
            base = base.invert().expect("pentagonal constant term is 1");
        }
        *acc = acc.mul(&base.pow(abs)).expect("same ring");
    }
}

/// Ligozat order of vanishing of `eq` at the cusps of `Gamma_0(N)` with
/// denominator `c | N`, in the local-variable normalization:
/// `(N/24) * sum_d gcd(c,d)^2 r_d / (gcd(c, N/c) * c * d)`.
pub fn cusp_order(eq: &EtaQuotient, n: u64, c: u64) -> Result<BigRational> {
    if c == 0 || n % c != 0 {
        return Err(Error::CuspNotDivisor { c, n });
    }
    let gcd_c_nc = c.gcd(&(n / c));
    let mut total = BigRational::zero();
    for (d, r) in eq.factors() {
        let g = c.gcd(&d);
        let num = BigInt::from(n) * BigInt::from(g) * BigInt::from(g) * BigInt::from(r);
        let den = BigInt::from(24u64) * BigInt::from(gcd_c_nc) * BigInt::from(c) * BigInt::from(d);
        total += BigRational::new(num, den);
    }
    Ok(total)
}

/// True when every cusp order of `eq` on `Gamma_0(N)` is non-negative.
/// The scales of `eq` must divide `n`.
pub fn is_holo_at_cusps(eq: &EtaQuotient, n: u64) -> Result<bool> {
    let lcm = eq.level_lcm();
    if n == 0 || n % lcm != 0 {
        return Err(Error::LevelTooSmall { scale: lcm, n });
    }
    for c in divisors(n) {
        if cusp_order(eq, n, c)? < BigRational::zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            primes.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    primes
}

/// Index of `Gamma_0(N)` in `SL_2(Z)`: `N * prod_{p|N} (1 + 1/p)`.
pub fn index_gamma0(n: u64) -> u64 {
    let mut idx = n;
    for p in distinct_prime_factors(n) {
        idx = idx / p * (p + 1);
    }
    idx
}

/// Index of `Gamma_1(N)` in `SL_2(Z)`: `N^2 * prod_{p|N} (1 - 1/p^2)`.
pub fn index_gamma1(n: u64) -> u64 {
    let mut idx = (n as u128) * (n as u128);
    for p in distinct_prime_factors(n) {
        let p2 = (p as u128) * (p as u128);
        idx = idx / p2 * (p2 - 1);
    }
    idx as u64
}

/// Sturm bound `floor((weight2/24) * [SL_2(Z) : Gamma_0(N)]) + 1`.
pub fn sturm_bound(weight2: i64, n: u64) -> Result<u64> {
    if weight2 <= 0 {
        return Err(Error::NonPositiveWeight(weight2));
    }
    let idx = index_gamma0(n) as i128;
    let bound = (weight2 as i128 * idx).div_euclid(24) + 1;
    Ok(bound as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Fp, ZZ};
    use num_bigint::BigInt;
    use num_traits::One;

    fn f5() -> Fp {
        Fp::from_prime(5).unwrap()
    }

    #[test]
    fn eta_series_small() {
        // eta(z): 1 - q - q^2 + q^5 + q^7, offset24 = 1
        let e = eta_series(&ZZ, 1, 8);
        assert_eq!(e.offset24(), 1);
        let expect = Series::from_i64(ZZ, &[1, -1, -1, 0, 0, 1, 0, 1]).unwrap();
        assert_eq!(*e.series(), expect);
        // eta(2z): substitute q -> q^2
        let e2 = eta_series(&ZZ, 2, 5);
        assert_eq!(e2.offset24(), 2);
        assert_eq!(
            *e2.series(),
            Series::from_i64(ZZ, &[1, 0, -1, 0, -1]).unwrap()
        );
        assert!(e.series().coeff(0).is_one());
    }

    #[test]
    fn pentagonal_matches_naive_product() {
        // naive oracle: multiply the factors (1 - q^{dn}) one by one
        for d in [1usize, 2, 3] {
            let trunc = 200;
            let mut naive = Series::one(ZZ, trunc);
            let mut n = 1;
            while d * n < trunc {
                let factor = SparsePoly::from_terms(&ZZ, &[(0, 1), (d * n, -1)], trunc);
                naive = naive.mul_sparse(&factor);
                n += 1;
            }
            let pent = eta_series(&ZZ, d as u64, trunc);
            assert_eq!(*pent.series(), naive, "scale {d}");
        }
    }

    #[test]
    fn expand_tbar_prefix() {
        let eq = EtaQuotient::tbar();
        let exp = expand(&ZZ, &eq, 5);
        assert_eq!(exp.offset24(), 0);
        assert_eq!(
            *exp.series(),
            Series::from_i64(ZZ, &[1, 1, 3, 3, 8]).unwrap()
        );
    }

    #[test]
    fn expand_delta_prefix() {
        let eq = EtaQuotient::new([(1, 24)]).unwrap();
        let exp = expand(&ZZ, &eq, 3);
        assert_eq!(exp.offset24(), 24);
        assert_eq!(*exp.series(), Series::from_i64(ZZ, &[1, -24, 252]).unwrap());
    }

    #[test]
    fn expand_stride_80() {
        let eq = EtaQuotient::new([(80, 12)]).unwrap();
        let exp = expand(&f5(), &eq, 81);
        assert_eq!(exp.offset24(), 960);
        for n in 1..80 {
            assert_eq!(*exp.series().coeff(n), 0);
        }
        assert_ne!(*exp.series().coeff(80), 0);
    }

    #[test]
    fn weight_and_level() {
        let tbar = EtaQuotient::tbar();
        assert_eq!(tbar.weight2(), -1);
        assert_eq!(tbar.level_lcm(), 6);
        let delta = EtaQuotient::new([(1, 24)]).unwrap();
        assert_eq!(delta.weight2(), 24);
        assert_eq!(EtaQuotient::empty().weight2(), 0);
        assert_eq!(EtaQuotient::empty().level_lcm(), 1);
    }

    #[test]
    fn cusp_orders() {
        let delta = EtaQuotient::new([(1, 24)]).unwrap();
        assert_eq!(
            cusp_order(&delta, 1, 1).unwrap(),
            BigRational::from(BigInt::from(1))
        );
        // order at infinity (c = N) is offset24 / 24
        let tbar = EtaQuotient::tbar();
        assert_eq!(
            cusp_order(&tbar, 6, 6).unwrap(),
            BigRational::from(BigInt::from(0))
        );
        // at c = 1 the tbar quotient has negative order: only weakly holomorphic
        let at_one = cusp_order(&tbar, 6, 1).unwrap();
        assert!(at_one < BigRational::zero());
        assert_eq!(at_one, BigRational::new(BigInt::from(-7), BigInt::from(24)));
        assert!(matches!(
            cusp_order(&tbar, 6, 4),
            Err(Error::CuspNotDivisor { c: 4, n: 6 })
        ));
    }

    #[test]
    fn order_at_infinity_is_offset_over_24() {
        // at c = N the Ligozat formula collapses to offset24/24
        for (eq, n) in [
            (EtaQuotient::tbar(), 6u64),
            (EtaQuotient::new([(1, 24)]).unwrap(), 4),
            (EtaQuotient::new([(2, 5), (3, -2), (8, 1)]).unwrap(), 24),
        ] {
            let at_inf = cusp_order(&eq, n, n).unwrap();
            let expect = BigRational::new(BigInt::from(eq.offset24()), BigInt::from(24));
            assert_eq!(at_inf, expect, "{eq} at level {n}");
        }
    }

    #[test]
    fn meta_bundles_weight_level_holomorphy() {
        let meta = modular_meta(&EtaQuotient::tbar(), 6).unwrap();
        assert_eq!(meta.weight2, -1);
        assert_eq!(meta.level, 6);
        assert!(!meta.holo_at_cusps);
        let delta = modular_meta(&EtaQuotient::new([(1, 24)]).unwrap(), 1).unwrap();
        assert!(delta.holo_at_cusps);
    }

    #[test]
    fn holomorphy_checks() {
        let delta = EtaQuotient::new([(1, 24)]).unwrap();
        assert!(is_holo_at_cusps(&delta, 1).unwrap());
        assert!(!is_holo_at_cusps(&EtaQuotient::tbar(), 6).unwrap());
        // Delta^49 * (1^48 2^48 3^-48) is holomorphic for Gamma_1(6)
        let f7 = EtaQuotient::new([(1, 24 * 49 + 48), (2, 48), (3, -48)]).unwrap();
        assert!(is_holo_at_cusps(&f7, 6).unwrap());
    }

    #[test]
    fn subgroup_indices() {
        assert_eq!(index_gamma0(1), 1);
        assert_eq!(index_gamma0(1440), 3456);
        assert_eq!(index_gamma1(6), 24);
        assert_eq!(index_gamma1(1), 1);
    }

    #[test]
    fn sturm_bounds_match_reported_values() {
        assert_eq!(sturm_bound(15, 1440).unwrap(), 2161);
        assert_eq!(sturm_bound(9, 2880).unwrap(), 2593);
        assert_eq!(sturm_bound(24, 1).unwrap(), 2);
        assert!(matches!(
            sturm_bound(0, 1),
            Err(Error::NonPositiveWeight(0))
        ));
    }

    #[test]
    fn parse_and_display() {
        let eq = EtaQuotient::parse("3^1 * 2^-1 * 1^-1").unwrap();
        assert_eq!(eq, EtaQuotient::tbar());
        // '*' optional, bare scale means exponent 1
        assert_eq!(EtaQuotient::parse("3 2^-1 1^-1").unwrap(), eq);
        assert_eq!(eq.to_string(), "3^1 * 2^-1 * 1^-1");
        assert!(EtaQuotient::parse("3^x").is_err());
        assert!(EtaQuotient::parse("0^2").is_err());
        // repeated scales merge; zero exponents vanish
        let merged = EtaQuotient::parse("2^3 2^-3").unwrap();
        assert!(merged.is_empty());
    }

    #[test]
    fn quotient_json_roundtrip() {
        let eq = EtaQuotient::tbar();
        let json = serde_json::to_string(&eq).unwrap();
        assert_eq!(json, r#"{"factors":[[1,-1],[2,-1],[3,1]]}"#);
        let back: EtaQuotient = serde_json::from_str(&json).unwrap();
        assert_eq!(back, eq);
    }

    #[test]
    fn plain_conversion_guards() {
        let frac = QExpansion::new(1, Series::one(ZZ, 4));
        assert!(matches!(
            frac.to_plain(),
            Err(Error::FractionalOffset { offset24: 1 })
        ));
        let neg = QExpansion::new(-24, Series::one(ZZ, 4));
        assert!(matches!(
            neg.to_plain(),
            Err(Error::NegativeOffset { offset24: -24 })
        ));
        let ok = QExpansion::new(48, Series::from_i64(ZZ, &[7, 1]).unwrap());
        let plain = ok.to_plain().unwrap();
        assert_eq!(plain.trunc(), 4);
        assert_eq!(*plain.coeff(2), BigInt::from(7));
    }

    #[test]
    fn expand_is_multiplicative() {
        let a = EtaQuotient::new([(1, 3), (2, -1)]).unwrap();
        let b = EtaQuotient::new([(2, 2), (5, 1)]).unwrap();
        let ab = a.combine(&b);
        let ea = expand(&f5(), &a, 64);
        let eb = expand(&f5(), &b, 64);
        let eab = expand(&f5(), &ab, 64);
        assert_eq!(ea.mul(&eb).unwrap(), eab);
        assert_eq!(eab.offset24(), a.offset24() + b.offset24());
    }
}
