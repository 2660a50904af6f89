//! The restricted-odd-difference overpartition function `tbar(n)`: series
//! expansion, a brute-force enumeration oracle, Ramanujan-congruence
//! scanning, dichotomy checks for the known congruences mod 2 and 3, and
//! Sturm-certified congruences mod 5 on the progressions 80n+40 and
//! 80n+60.
//!
//! `tbar(n)` counts overpartitions of `n` (the final occurrence of a part
//! value may be overlined) in which an odd gap between consecutive parts
//! is allowed only when the larger of the two is overlined, and an odd
//! smallest part must be overlined. The generating function is
//! `eta(3z) / (eta(2z) eta(z))`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{expand, sturm_bound, EtaQuotient};
use crate::operators::u_op;
use crate::ring::{CoeffRing, Fp};
use crate::series::Series;
use crate::ModSeries;

/// Expansion of `tbar` to `trunc` coefficients (the quotient has offset
/// zero, so this is a plain series).
pub fn tbar_series<R: CoeffRing>(ring: &R, trunc: usize) -> Series<R> {
    expand(ring, &EtaQuotient::tbar(), trunc).into_series()
}

/// An overpartition: parts in non-increasing order, `true` marking the
/// overlined (final) occurrence of a part value.
pub type Overpartition = Vec<(u64, bool)>;

fn enumerate_partitions<F: FnMut(&[u64])>(n: u64, visit: &mut F) {
    fn rec<F: FnMut(&[u64])>(remaining: u64, max_part: u64, current: &mut Vec<u64>, visit: &mut F) {
        if remaining == 0 {
            visit(current);
            return;
        }
        let top = remaining.min(max_part);
        for part in (1..=top).rev() {
            current.push(part);
            rec(remaining - part, part, current, visit);
            current.pop();
        }
    }
    let mut current = Vec::new();
    rec(n, n.max(1), &mut current, visit);
}

fn overpartitions_of_partition(parts: &[u64]) -> Vec<Overpartition> {
    let mut distinct: Vec<u64> = Vec::new();
    for &p in parts {
        if distinct.last() != Some(&p) {
            distinct.push(p);
        }
    }
    let k = distinct.len();
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0u32..(1 << k) {
        let mut op: Overpartition = Vec::with_capacity(parts.len());
        for (i, &v) in distinct.iter().enumerate() {
            let mult = parts.iter().filter(|&&p| p == v).count();
            let overlined = mask >> i & 1 == 1;
            for j in 0..mult {
                op.push((v, overlined && j == mult - 1));
            }
        }
        out.push(op);
    }
    out
}

fn satisfies_odd_difference_rules(op: &Overpartition) -> bool {
    if op.is_empty() {
        return true;
    }
    // rule (i): an odd gap between successive parts forces the larger
    // (earlier) part to be overlined. Only value boundaries can have an
    // odd gap, and there the earlier part is the final occurrence of its
    // value, which is exactly where an overline can live.
    for w in op.windows(2) {
        let (big, big_over) = w[0];
        let (small, _) = w[1];
        if (big - small) % 2 == 1 && !big_over {
            return false;
        }
    }
    // rule (ii): an odd smallest part must be overlined
    let &(smallest, over) = op.last().expect("nonempty");
    if smallest % 2 == 1 && !over {
        return false;
    }
    true
}

/// All overpartitions of `n` satisfying the restricted-odd-difference
/// rules, by exhaustive enumeration. Desk scale only.
pub fn tbar_bruteforce_list(n: u64) -> Vec<Overpartition> {
    let mut result = Vec::new();
    enumerate_partitions(n, &mut |parts| {
        for op in overpartitions_of_partition(parts) {
            if satisfies_odd_difference_rules(&op) {
                result.push(op);
            }
        }
    });
    result
}

/// `tbar(n)` by exhaustive enumeration: the independent oracle for the
/// series expansion.
pub fn tbar_bruteforce(n: u64) -> u64 {
    let mut count = 0u64;
    enumerate_partitions(n, &mut |parts| {
        for op in overpartitions_of_partition(parts) {
            if satisfies_odd_difference_rules(&op) {
                count += 1;
            }
        }
    });
    count
}

/// The unrestricted overpartition count, from the same enumeration
/// machinery with no filter.
pub fn overpartition_count(n: u64) -> u64 {
    let mut count = 0u64;
    enumerate_partitions(n, &mut |parts| {
        count += overpartitions_of_partition(parts).len() as u64;
    });
    count
}

/// Status of a scanned arithmetic progression `c(ell n + a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CandidateStatus {
    /// Held for every index checked; no proof implied.
    Empirical,
    /// Failed at the least index `n` with `ell` not dividing `c(ell n + a)`.
    Refuted { counterexample: u64 },
    /// Established by an external argument (never produced by a scan).
    Certified { reference: String },
}

/// One residue class of a Ramanujan-congruence scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceCandidate {
    pub ell: u64,
    pub a: u64,
    /// Number of indices `n` examined (`0 <= n < checked_up_to`).
    pub checked_up_to: u64,
    #[serde(flatten)]
    pub status: CandidateStatus,
}

/// Scans every residue class `a` in `[0, ell)` of `series` for the
/// Ramanujan pattern `c(ell n + a) = 0 (mod ell)`, reporting empirical
/// survival or the least counterexample.
pub fn scan_ramanujan(series: &ModSeries) -> Result<Vec<CongruenceCandidate>> {
    let ell = series.ring().modulus();
    let len = series.trunc() as u64;
    if len < ell {
        return Err(Error::InsufficientTruncation {
            need: ell as usize,
            have: series.trunc(),
        });
    }
    let residues: Vec<u64> = (0..ell).collect();
    Ok(residues
        .par_iter()
        .map(|&a| {
            let t = (len - a) / ell;
            let mut status = CandidateStatus::Empirical;
            for n in 0..t {
                if *series.coeff((ell * n + a) as usize) != 0 {
                    status = CandidateStatus::Refuted { counterexample: n };
                    break;
                }
            }
            CongruenceCandidate {
                ell,
                a,
                checked_up_to: t,
                status,
            }
        })
        .collect())
}

/// Report of an exhaustive dichotomy or vanishing check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub description: String,
    pub modulus: u64,
    /// Number of indices checked.
    pub checked: u64,
    /// Offending indices (empty when the check passed).
    pub failures: Vec<u64>,
    pub ok: bool,
}

/// Checks the mod-3 dichotomy: for `1 <= n < trunc`, `tbar(n)` is
/// `(-1)^(k+1) mod 3` when `n = k^2` and `0 mod 3` otherwise.
/// (`n = 0` is excluded: `tbar(0) = 1` sits outside the dichotomy.)
pub fn verify_mod3(trunc: usize) -> VerifyReport {
    let fp = Fp::from_prime(3).expect("3 is prime");
    let series = tbar_series(&fp, trunc);
    let mut failures = Vec::new();
    let mut k = 1u64;
    for n in 1..trunc as u64 {
        let expected = if k * k == n {
            // (-1)^(k+1) mod 3: 1 for odd k, 2 for even k
            let e = if k % 2 == 1 { 1 } else { 2 };
            k += 1;
            e
        } else {
            0
        };
        if *series.coeff(n as usize) != expected {
            failures.push(n);
        }
    }
    VerifyReport {
        description: "tbar(n) = (-1)^(k+1) (mod 3) iff n = k^2, else 0".into(),
        modulus: 3,
        checked: trunc as u64 - 1,
        ok: failures.is_empty(),
        failures,
    }
}

/// True when `n = (3k+1)^2` for some integer `k`; with `k` ranging over
/// all of `Z` these are exactly the squares of integers prime to 3.
pub fn is_shifted_square(n: u64) -> bool {
    let r = n.isqrt();
    r * r == n && r % 3 != 0
}

/// Checks the mod-2 dichotomy: for `1 <= n < trunc/2`, `tbar(2n)` is odd
/// exactly when `n = (3k+1)^2` for some integer `k`.
pub fn verify_mod2(trunc: usize) -> VerifyReport {
    let fp = Fp::from_prime(2).expect("2 is prime");
    let series = tbar_series(&fp, trunc);
    let mut failures = Vec::new();
    let half = (trunc as u64).div_euclid(2);
    for n in 1..half {
        let odd = *series.coeff((2 * n) as usize) == 1;
        if odd != is_shifted_square(n) {
            failures.push(n);
        }
    }
    VerifyReport {
        description: "tbar(2n) odd iff n = (3k+1)^2".into(),
        modulus: 2,
        checked: half.saturating_sub(1),
        ok: failures.is_empty(),
        failures,
    }
}

/// Checks `tbar(9^alpha (45n + 30)) = 0 (mod 5)` for all indices below
/// `trunc` with `alpha <= alpha_max`.
pub fn verify_linliu(trunc: usize, alpha_max: u32) -> VerifyReport {
    let fp = Fp::from_prime(5).expect("5 is prime");
    let series = tbar_series(&fp, trunc);
    let mut failures = Vec::new();
    let mut checked = 0u64;
    for alpha in 0..=alpha_max {
        let scale = 9u64.pow(alpha);
        let mut n = 0u64;
        loop {
            let idx = scale * (45 * n + 30);
            if idx >= trunc as u64 {
                break;
            }
            checked += 1;
            if *series.coeff(idx as usize) != 0 {
                failures.push(idx);
            }
            n += 1;
        }
    }
    VerifyReport {
        description: format!("tbar(9^a (45n+30)) = 0 (mod 5), a <= {alpha_max}"),
        modulus: 5,
        checked,
        ok: failures.is_empty(),
        failures,
    }
}

/// A machine-checkable record that a congruence was verified through its
/// Sturm bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SturmCertificate {
    pub kind: String,
    /// The merged eta-quotient whose expansion was computed.
    pub eta_factors: EtaQuotient,
    pub modulus: u64,
    /// Twice the weight of the ambient cusp form space.
    pub weight2: i64,
    pub level: u64,
    pub sturm_bound: u64,
    /// The U-operator index (80 for both certificates here).
    pub stride: u64,
    pub residue_checked: String,
    /// Plain-series coefficients computed before applying U.
    pub terms_computed: u64,
    pub verified: bool,
    pub first_failure: Option<u64>,
    pub runtime_ms: u64,
    pub tool_version: String,
}

fn certify_mod5(
    kind: &str,
    stride80_exponent: i64,
    weight2: i64,
    level: u64,
    residue: u64,
    min_terms: Option<usize>,
) -> Result<SturmCertificate> {
    let start = Instant::now();
    let fp = Fp::from_prime(5)?;
    let stride: u64 = 80;
    // tbar quotient * eta(80z)^e * eta(z)^5/eta(5z), merged by scale
    let eq = EtaQuotient::tbar()
        .combine(&EtaQuotient::new([(80, stride80_exponent)])?)
        .combine(&EtaQuotient::new([(1, 5), (5, -1)])?);
    let bound = sturm_bound(weight2, level)?;
    let offset_shift = (eq.offset24() / 24) as usize;
    // plain-series length covering indices stride*n for 0 <= n <= bound,
    // rounded up to a full stride
    let default_len = (stride as usize) * (bound as usize + 1);
    let plain_len = default_len.max(min_terms.unwrap_or(0));
    let expansion = expand(&fp, &eq, plain_len - offset_shift);
    let plain = expansion.to_plain()?;
    let sliced = u_op(&plain, stride)?;
    let first_failure =
        (0..=bound.min(sliced.trunc() as u64 - 1)).find(|&n| *sliced.coeff(n as usize) != 0);
    Ok(SturmCertificate {
        kind: kind.into(),
        eta_factors: eq,
        modulus: 5,
        weight2,
        level,
        sturm_bound: bound,
        stride,
        residue_checked: format!(
            "tbar({stride}n+{residue}) = 0 (mod 5) via c({stride}n) = 0 for 0 <= n <= {bound}"
        ),
        terms_computed: plain.trunc() as u64,
        verified: first_failure.is_none(),
        first_failure,
        runtime_ms: start.elapsed().as_millis() as u64,
        tool_version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// Certifies `tbar(80n + 40) = 0 (mod 5)` through the Sturm bound of the
/// weight-15/2 cusp form space on level 1440.
pub fn certify_80n_40() -> Result<SturmCertificate> {
    certify_mod5("mod5-40", 12, 15, 1440, 40, None)
}

/// Certifies `tbar(80n + 60) = 0 (mod 5)` through the Sturm bound of the
/// weight-9/2 cusp form space on level 2880.
pub fn certify_80n_60() -> Result<SturmCertificate> {
    certify_mod5("mod5-60", 6, 9, 2880, 60, None)
}

/// Same certificate with a caller-chosen minimum number of plain-series
/// terms (never below the Sturm requirement).
pub fn certify_80n_40_with_terms(min_terms: usize) -> Result<SturmCertificate> {
    certify_mod5("mod5-40", 12, 15, 1440, 40, Some(min_terms))
}

pub fn certify_80n_60_with_terms(min_terms: usize) -> Result<SturmCertificate> {
    certify_mod5("mod5-60", 6, 9, 2880, 60, Some(min_terms))
}
