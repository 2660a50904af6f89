//! Prime-exclusion machinery for Ramanujan congruences of eta-quotients
//! `prod (1-q^{lambda_i n}) / prod (1-q^{mu_j n})`.
//!
//! For a prime `ell`, the companion form
//! `F_ell = Delta^{ell^t} (prod Delta(mu_j z) / prod Delta(lambda_i z))^{delta_ell}`
//! with `delta_ell = (ell^2 - 1)/24` is an integral-weight holomorphic
//! form whose Ramanujan congruences mirror the quotient's through the
//! residue transfer `24b = 24a + (u - v) (mod ell)`. Combined with the
//! non-vanishing of `theta F_ell` and the case arithmetic on the
//! filtration weight, every prime `ell > max(5, |s-r|+4)` with
//! `ell` prime to `gamma N` is excluded (under the parity/residue
//! hypotheses on the partitions), leaving a finite residual set for
//! scanning or citation.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{expand, is_holo_at_cusps, EtaQuotient, QExpansion};
use crate::ring::{is_prime_u64, primes_up_to, CoeffRing, Fp};
use crate::series::{pentagonal_terms, Series, SparsePoly};
use crate::ModSeries;

/// Shape data of the quotient `prod (1-q^{lambda n}) / prod (1-q^{mu n})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientProfile {
    /// Numerator parts, non-increasing.
    pub lambda: Vec<u64>,
    /// Denominator parts, non-increasing.
    pub mu: Vec<u64>,
    /// Part counts `r = #lambda`, `s = #mu`.
    pub r: usize,
    pub s: usize,
    /// Part sums `u = sum(lambda)`, `v = sum(mu)`.
    pub u: u64,
    pub v: u64,
    /// `N = lcm` of all parts.
    pub level: u64,
    /// Multiplicity of the smallest element among all parts.
    pub gamma: u64,
}

/// Builds a profile from the two part multisets, which must be disjoint
/// (shared parts would cancel) and positive, with at least one part.
pub fn profile(lambda: &[u64], mu: &[u64]) -> Result<QuotientProfile> {
    if lambda.iter().chain(mu).any(|&p| p == 0) {
        return Err(Error::NonPositivePart);
    }
    if lambda.is_empty() && mu.is_empty() {
        return Err(Error::InvalidArgument(
            "profile needs at least one part".into(),
        ));
    }
    for &l in lambda {
        if mu.contains(&l) {
            return Err(Error::OverlappingParts(l));
        }
    }
    let mut lambda = lambda.to_vec();
    let mut mu = mu.to_vec();
    lambda.sort_unstable_by(|a, b| b.cmp(a));
    mu.sort_unstable_by(|a, b| b.cmp(a));
    let level = lambda.iter().chain(&mu).fold(1u64, |acc, &p| acc.lcm(&p));
    let smallest = *lambda.iter().chain(&mu).min().expect("nonempty");
    let gamma = lambda.iter().chain(&mu).filter(|&&p| p == smallest).count() as u64;
    Ok(QuotientProfile {
        r: lambda.len(),
        s: mu.len(),
        u: lambda.iter().sum(),
        v: mu.iter().sum(),
        level,
        gamma,
        lambda,
        mu,
    })
}

impl QuotientProfile {
    /// The smallest part across both partitions.
    pub fn min_part(&self) -> u64 {
        *self
            .lambda
            .iter()
            .chain(&self.mu)
            .min()
            .expect("nonempty profile")
    }

    /// The eta-quotient whose series part is the plain product
    /// `prod (1-q^{lambda n}) / prod (1-q^{mu n})` with coefficients `c(n)`.
    pub fn plain_quotient(&self) -> EtaQuotient {
        let pairs = self
            .lambda
            .iter()
            .map(|&d| (d, 1i64))
            .chain(self.mu.iter().map(|&d| (d, -1i64)));
        EtaQuotient::new(pairs).expect("positive scales")
    }

    /// Coefficients `c(n)` of the quotient, to `trunc` terms.
    pub fn coefficient_series<R: CoeffRing>(&self, ring: &R, trunc: usize) -> Series<R> {
        let mut acc = Series::one(ring.clone(), trunc);
        for &d in &self.lambda {
            let sp = SparsePoly::from_terms(ring, &pentagonal_terms(d as usize, trunc), trunc);
            acc = acc.mul_sparse(&sp);
        }
        for &d in &self.mu {
            let sp = SparsePoly::from_terms(ring, &pentagonal_terms(d as usize, trunc), trunc);
            acc = acc.div_sparse(&sp).expect("unit constant");
        }
        acc
    }
}

/// `delta_ell = (ell^2 - 1)/24`, integral for every prime `ell >= 5`.
pub fn delta_ell(ell: u64) -> u64 {
    (ell * ell - 1) / 24
}

const MINIMAL_T_CAP: u32 = 12;

fn checked_ell_pow(ell: u64, t: u32) -> Result<i64> {
    let p = (ell as i64)
        .checked_pow(t)
        .ok_or(Error::MinimalTCapExceeded { cap: MINIMAL_T_CAP })?;
    p.checked_mul(24)
        .ok_or(Error::MinimalTCapExceeded { cap: MINIMAL_T_CAP })?;
    Ok(p)
}

fn f_ell_eta(p: &QuotientProfile, ell: u64, t: u32) -> Result<EtaQuotient> {
    let delta = delta_ell(ell) as i64;
    let ell_t = checked_ell_pow(ell, t)?;
    let pairs = std::iter::once((1u64, 24 * ell_t))
        .chain(p.mu.iter().map(|&d| (d, 24 * delta)))
        .chain(p.lambda.iter().map(|&d| (d, -24 * delta)));
    EtaQuotient::new(pairs)
}

fn check_ell(p: &QuotientProfile, ell: u64) -> Result<()> {
    if !is_prime_u64(ell) {
        return Err(Error::NotPrime(ell));
    }
    if ell < 5 {
        return Err(Error::PrimeTooSmall { ell, min: 5 });
    }
    if p.level % ell == 0 {
        return Err(Error::PrimeDividesInvariant {
            ell,
            what: format!("the level N = {}", p.level),
        });
    }
    Ok(())
}

/// The least `t >= 2` making the companion form holomorphic at the cusps
/// of `Gamma_0(N)`; existence is guaranteed because the positive orders
/// of `Delta^{ell^t}` eventually dominate, but a hard cap guards against
/// implementation bugs.
pub fn minimal_t(p: &QuotientProfile, ell: u64) -> Result<u32> {
    check_ell(p, ell)?;
    for t in 2..=MINIMAL_T_CAP {
        let eq = f_ell_eta(p, ell, t)?;
        if is_holo_at_cusps(&eq, p.level)? {
            return Ok(t);
        }
    }
    Err(Error::MinimalTCapExceeded { cap: MINIMAL_T_CAP })
}

/// The companion form `F_ell` of a quotient profile.
#[derive(Clone, Debug, PartialEq)]
pub struct FEllForm {
    pub profile: QuotientProfile,
    pub ell: u64,
    pub t: u32,
    pub delta_ell: u64,
    /// Twice the weight `(ell^2-1)(s-r)/2 + 12 ell^t`.
    pub weight2: i64,
    pub level: u64,
    /// The merged eta-quotient defining the form.
    pub eta: EtaQuotient,
    /// Expansion mod ell; `offset24/24` is the leading exponent
    /// `ell^t + (v-u) delta_ell`.
    pub expansion: QExpansion<Fp>,
}

impl FEllForm {
    /// `ell^t + (v-u) delta_ell`, the exponent of the first nonzero term.
    pub fn leading_exponent(&self) -> i64 {
        self.expansion.offset24() / 24
    }

    /// Plain q-series of coefficients `D(n)`.
    pub fn plain(&self) -> Result<ModSeries> {
        self.expansion.to_plain()
    }
}

/// Builds `F_ell` mod ell with `plain_terms` coefficients `D(0..)`.
pub fn build_f_ell(p: &QuotientProfile, ell: u64, plain_terms: usize) -> Result<FEllForm> {
    check_ell(p, ell)?;
    let t = minimal_t(p, ell)?;
    let eq = f_ell_eta(p, ell, t)?;
    let fp = Fp::from_prime(ell)?;
    let shift = eq.offset24() / 24;
    debug_assert!(shift >= 0, "holomorphy at infinity");
    let series_trunc = plain_terms.saturating_sub(shift as usize).max(1);
    let expansion = expand(&fp, &eq, series_trunc);
    let delta = delta_ell(ell);
    let ell_t = (ell as i64).pow(t);
    let weight2 = (ell as i64 * ell as i64 - 1) * (p.s as i64 - p.r as i64) + 24 * ell_t;
    Ok(FEllForm {
        profile: p.clone(),
        ell,
        t,
        delta_ell: delta,
        weight2,
        level: p.level,
        eta: eq,
        expansion,
    })
}

/// Least witness `n` with `n D(n)` nonzero mod ell, certifying
/// `theta F_ell` does not vanish. The expansion must reach
/// `leading_exponent + min_part` inclusive, where the witness is
/// guaranteed to appear.
pub fn theta_nonvanishing(f: &FEllForm) -> Result<u64> {
    let plain = f.plain()?;
    let needed = f.leading_exponent() as usize + f.profile.min_part() as usize + 1;
    if plain.trunc() < needed {
        return Err(Error::InsufficientTruncation {
            need: needed,
            have: plain.trunc(),
        });
    }
    let fp = *plain.ring();
    for n in 0..plain.trunc() {
        let coeff = fp.mul(&fp.from_i64(n as i64), plain.coeff(n));
        if coeff != 0 {
            return Ok(n as u64);
        }
    }
    Err(Error::NoThetaWitness {
        trunc: plain.trunc(),
    })
}

/// Empirical check of the residue transfer: with
/// `b = a + 24^{-1}(u-v) (mod ell)`, the statements
/// `c(ell n + a) = 0 for all n <= T` and `D(ell n + b) = 0 for all n <= T`
/// are evaluated side by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueTransferReport {
    pub ell: u64,
    pub a: u64,
    pub b: u64,
    /// Indices `0 <= n <= t_checked` were examined on both sides.
    pub t_checked: u64,
    pub c_side_holds: bool,
    pub c_counterexample: Option<u64>,
    pub d_side_holds: bool,
    pub d_counterexample: Option<u64>,
    /// Whether the two vanishing statements agree over the checked range.
    pub agree: bool,
}

/// Residue `b` paired to `a` by `24b = 24a + (u - v) (mod ell)`,
/// equivalently `b = a - delta_ell (u - v)`.
///
/// This is the pairing under which the vanishing of `c(ell n + a)` and of
/// `D(ell n + b)` are equivalent: from
/// `q^{delta (u-v)} F_ell = Delta^{ell^t} G^{ell^2} f` with `G` a series
/// in `q^ell` mod ell, the coefficient of `q^{ell n + a}` on the left is
/// `D(ell n + a - delta(u-v))`, and `24 delta = -1 (mod ell)`.
/// (Checked against the classical `p(5n+4) = 0 (mod 5)`: on `Delta^26`
/// the vanishing progression is `b = 0`, not `b = 3`.)
pub fn transfer_residue(p: &QuotientProfile, ell: u64, a: u64) -> u64 {
    let fp = Fp::from_prime(ell).expect("prime");
    let inv24 = fp.inv(&fp.from_i64(24)).expect("24 a unit for ell >= 5");
    let diff = fp.from_i64(p.u as i64 - p.v as i64);
    fp.add(&fp.reduce_u64(a), &fp.mul(&inv24, &diff))
}

/// Runs the two-sided vanishing comparison for `0 <= n <= t_max`.
pub fn cong_reduce_check(
    p: &QuotientProfile,
    ell: u64,
    a: u64,
    t_max: u64,
) -> Result<ResidueTransferReport> {
    check_ell(p, ell)?;
    let a = a % ell;
    let b = transfer_residue(p, ell, a);
    let len = (ell * (t_max + 1)) as usize;
    let fp = Fp::from_prime(ell)?;
    let c_series = p.coefficient_series(&fp, len);
    let d_series = build_f_ell(p, ell, len)?.plain()?;
    let scan = |series: &ModSeries, residue: u64| -> Option<u64> {
        (0..=t_max).find(|&n| {
            let idx = (ell * n + residue) as usize;
            idx < series.trunc() && *series.coeff(idx) != 0
        })
    };
    let c_counterexample = scan(&c_series, a);
    let d_counterexample = scan(&d_series, b);
    Ok(ResidueTransferReport {
        ell,
        a,
        b,
        t_checked: t_max,
        c_side_holds: c_counterexample.is_none(),
        c_counterexample,
        d_side_holds: d_counterexample.is_none(),
        d_counterexample,
        agree: c_counterexample.is_none() == d_counterexample.is_none(),
    })
}

/// Pure modular arithmetic of the contradiction cases for one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTrace {
    pub ell: u64,
    pub t: u32,
    /// `k = weight of F_ell mod ell`; equals `(r-s)/2 mod ell`.
    pub weight_mod_ell: u64,
    /// `k0` with `k = -k0 (mod ell)`, normalized to `[0, ell)`; zero only
    /// when the weight is divisible by ell (`s = r mod 2 ell`).
    pub k0: u64,
    /// Check: `k` differs from `(ell+1)/2` and `(ell+3)/2 (mod ell)`,
    /// equivalently `r - s` differs from 1 and 3 mod ell.
    pub half_weight_check: bool,
    /// Check: case II is blocked, i.e. `r - s` differs from 4 mod ell.
    pub case_ii_blocked: bool,
    /// The case-IV filtration drop `(s - r) + 3 - ell`.
    pub case_iv_drop: i64,
    /// Check: the drop is negative, contradicting filtration monotonicity.
    pub case_iv_drop_negative: bool,
    /// All three checks together.
    pub all_pass: bool,
}

/// Evaluates the case arithmetic for `F_ell` of the given profile; no
/// series expansion is involved.
pub fn case_analysis(p: &QuotientProfile, ell: u64, t: u32) -> Result<CaseTrace> {
    check_ell(p, ell)?;
    let fp = Fp::from_prime(ell)?;
    // (ell^2 - 1)(s - r)/2 + 12 ell^t mod ell, the power term vanishing
    let inv2 = fp.inv(&2).expect("2 a unit");
    let r_minus_s = fp.from_i64(p.r as i64 - p.s as i64);
    let k = fp.mul(&r_minus_s, &inv2);
    let k0 = fp.neg(&k);
    let half1 = fp.mul(&fp.from_i64(ell as i64 + 1), &inv2);
    let half2 = fp.mul(&fp.from_i64(ell as i64 + 3), &inv2);
    let half_weight_check = k != half1 && k != half2;
    let case_ii_blocked = r_minus_s != fp.from_i64(4);
    let case_iv_drop = (p.s as i64 - p.r as i64) + 3 - ell as i64;
    let case_iv_drop_negative = case_iv_drop < 0;
    Ok(CaseTrace {
        ell,
        t,
        weight_mod_ell: k,
        k0,
        half_weight_check,
        case_ii_blocked,
        case_iv_drop,
        case_iv_drop_negative,
        all_pass: half_weight_check && case_ii_blocked && case_iv_drop_negative,
    })
}

/// How far the theorem's hypotheses reach for a given profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HypothesisStatus {
    /// `s - r` is a non-negative even integer, or `u = v` exactly with
    /// `r - s` outside {1, 3}: the exclusion covers every large prime.
    AllLargePrimes,
    /// `u != v` but `r - s` outside {1, 3}: only primes dividing `u - v`
    /// can satisfy `u = v (mod ell)`.
    OnlyDivisorsOfGap,
    /// Hypotheses fail for every prime.
    Inapplicable,
}

/// The prime-exclusion report for one quotient profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub profile: QuotientProfile,
    /// `B = max(5, |s-r| + 4)`: exclusion applies to primes above this.
    pub bound_b: u64,
    pub hypothesis: HypothesisStatus,
    pub hypothesis_ok: bool,
    pub hypothesis_reason: String,
    /// Description of the excluded set.
    pub excluded_description: String,
    /// Excluded primes up to `ell_max` (a concrete sample of the
    /// excluded set).
    pub excluded_up_to_max: Vec<u64>,
    /// Primes the theorem leaves open, for scanning or citation.
    pub residual: Vec<u64>,
    /// True when `residual` lists the complete residual set (every prime
    /// not in it is excluded); false when the theorem leaves infinitely
    /// many primes open and `residual` is truncated at `ell_max`.
    pub residual_complete: bool,
    pub ell_max: u64,
    /// Case traces for the excluded primes up to `ell_max`.
    pub traces: Vec<CaseTrace>,
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Builds the exclusion report for the quotient with numerator parts
/// `lambda` and denominator parts `mu`, sampling primes up to `ell_max`.
pub fn exclusion_report(lambda: &[u64], mu: &[u64], ell_max: u64) -> Result<ExclusionReport> {
    let p = profile(lambda, mu)?;
    let s_minus_r = p.s as i64 - p.r as i64;
    let r_minus_s = -s_minus_r;
    let bound_b = 5u64.max(s_minus_r.unsigned_abs() + 4);
    let gamma_n = p.gamma * p.level;
    let even_branch = s_minus_r >= 0 && s_minus_r % 2 == 0;
    let residue_branch_shape = r_minus_s != 1 && r_minus_s != 3;

    let gap = (p.u as i64 - p.v as i64).unsigned_abs();
    let gap_primes: Vec<u64> = prime_divisors(gap)
        .into_iter()
        .filter(|&ell| ell > bound_b && gamma_n % ell != 0)
        .collect();

    let (hypothesis, hypothesis_ok, hypothesis_reason) = if even_branch {
        (
            HypothesisStatus::AllLargePrimes,
            true,
            format!("s - r = {s_minus_r} is a non-negative even integer"),
        )
    } else if p.u == p.v && residue_branch_shape {
        (
            HypothesisStatus::AllLargePrimes,
            true,
            format!(
                "u = v = {} exactly, and r - s = {r_minus_s} avoids 1 and 3",
                p.u
            ),
        )
    } else if p.u != p.v && residue_branch_shape && !gap_primes.is_empty() {
        (
            HypothesisStatus::OnlyDivisorsOfGap,
            false,
            format!(
                "u = {} differs from v = {}; u = v (mod ell) holds only for ell dividing {gap}",
                p.u, p.v
            ),
        )
    } else if residue_branch_shape {
        (
            HypothesisStatus::Inapplicable,
            false,
            format!(
                "s - r = {s_minus_r} is not a non-negative even integer, and no usable prime divides |u - v| = {gap}"
            ),
        )
    } else {
        (
            HypothesisStatus::Inapplicable,
            false,
            format!(
                "s - r = {s_minus_r} is not a non-negative even integer and r - s = {r_minus_s} lies in {{1, 3}}"
            ),
        )
    };

    // per-prime hypothesis for concrete primes
    let hypothesis_at =
        |ell: u64| -> bool { even_branch || (residue_branch_shape && (p.u % ell) == (p.v % ell)) };
    let excluded_at =
        |ell: u64| -> bool { ell > bound_b && gamma_n % ell != 0 && hypothesis_at(ell) };

    let excluded_up_to_max: Vec<u64> = primes_up_to(ell_max)
        .into_iter()
        .filter(|&ell| excluded_at(ell))
        .collect();

    let (excluded_description, residual, residual_complete) = match hypothesis {
        HypothesisStatus::AllLargePrimes => {
            let residual: Vec<u64> = primes_up_to(bound_b.max(gamma_n))
                .into_iter()
                .filter(|&ell| !excluded_at(ell))
                .collect();
            (
                format!("every prime ell > {bound_b} with ell not dividing gamma*N = {gamma_n}"),
                residual,
                true,
            )
        }
        HypothesisStatus::OnlyDivisorsOfGap => {
            let residual: Vec<u64> = primes_up_to(ell_max)
                .into_iter()
                .filter(|&ell| !gap_primes.contains(&ell))
                .collect();
            (
                format!(
                    "only the primes {gap_primes:?} (divisors of |u-v| = {gap} above {bound_b} prime to gamma*N)"
                ),
                residual,
                false,
            )
        }
        HypothesisStatus::Inapplicable => (
            "no prime is excluded; the theorem does not apply to this profile".into(),
            primes_up_to(ell_max),
            false,
        ),
    };

    let traces: Vec<CaseTrace> = excluded_up_to_max
        .par_iter()
        .map(|&ell| {
            let t = minimal_t(&p, ell)?;
            case_analysis(&p, ell, t)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExclusionReport {
        profile: p,
        bound_b,
        hypothesis,
        hypothesis_ok,
        hypothesis_reason,
        excluded_description,
        excluded_up_to_max,
        residual,
        residual_complete,
        ell_max,
        traces,
    })
}

fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = extended_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Coset representatives of `Gamma_1(N)` in `SL_2(Z)`: one matrix per
/// pair `(c, d)` of additive order `N` in `(Z/N)^2`, the bottom row lifted
/// to a coprime pair and completed to determinant 1 by the extended
/// Euclidean algorithm.
pub fn coset_reps(n: u64) -> Vec<[[i64; 2]; 2]> {
    let n_i = n as i64;
    let mut reps = Vec::new();
    for c in 0..n {
        for d in 0..n {
            if n != 1 && c.gcd(&d).gcd(&n) != 1 {
                continue;
            }
            let mut c_l = c as i64;
            let mut d_l = d as i64;
            if c_l == 0 && d_l == 0 {
                // only for N = 1: the identity represents the single coset
                reps.push([[1, 0], [0, 1]]);
                continue;
            }
            // lift the bottom row to a coprime pair, as in (5,5) = (5,-1) mod 6
            if c_l == 0 {
                c_l = n_i;
            }
            while c_l.gcd(&d_l) != 1 {
                d_l += n_i;
            }
            let (g, x, y) = extended_gcd(c_l, d_l);
            debug_assert_eq!(g, 1);
            // a*d - b*c = 1 with a = y, b = -x
            reps.push([[y, -x], [c_l, d_l]]);
        }
    }
    reps
}

/// Number of sign-classes `(c, d) ~ (-c, -d)` among the coset
/// representatives.
pub fn coset_sign_classes(n: u64) -> usize {
    let reps = coset_reps(n);
    let mut seen = std::collections::BTreeSet::new();
    for m in &reps {
        let c = (m[1][0].rem_euclid(n as i64)) as u64;
        let d = (m[1][1].rem_euclid(n as i64)) as u64;
        let neg = ((n - c) % n, (n - d) % n);
        if !seen.contains(&(c, d)) && !seen.contains(&neg) {
            seen.insert((c, d));
        }
    }
    seen.len()
}
