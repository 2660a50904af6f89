//! Operators on modular forms mod ell: theta, U_m, Eisenstein series with
//! exact Bernoulli numbers, the weight-raising R-form, and a level-one
//! filtration engine.
//!
//! The filtration of a reduction `f mod ell` is the least weight `k'` such
//! that `f` agrees with the reduction of a weight-`k'` level-one form. At
//! level one the weight-`k'` forms are spanned by the monomials
//! `E4^a E6^b` with `4a + 6b = k'` (valid for `ell >= 5`), so membership is
//! a linear system over `F_ell`: solve on the expansion and verify the
//! candidate through the Sturm bound of the larger weight, which makes the
//! verified identity a proof rather than a heuristic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{sturm_bound, QExpansion};
use crate::ring::{CoeffRing, Fp, ZZ};
use crate::series::Series;
use crate::ModSeries;

/// `theta(sum a(n) q^n) = sum n a(n) q^n`.
pub fn theta<R: CoeffRing>(f: &Series<R>) -> Series<R> {
    let ring = f.ring().clone();
    f.map_indexed(|n, c| ring.mul(&ring.from_i64(n as i64), c))
}

/// Theta on a q-expansion; the offset must be exactly zero so powers of q
/// are the series indices.
pub fn theta_qexp<R: CoeffRing>(f: &QExpansion<R>) -> Result<QExpansion<R>> {
    if f.offset24() % 24 != 0 {
        return Err(Error::FractionalOffset {
            offset24: f.offset24(),
        });
    }
    if f.offset24() != 0 {
        return Err(Error::InvalidArgument(
            "theta on a q-expansion requires offset24 = 0".into(),
        ));
    }
    Ok(QExpansion::new(0, theta(f.series())))
}

/// `U_m` on a q-expansion; the offset must be exactly zero.
pub fn u_op_qexp<R: CoeffRing>(f: &QExpansion<R>, m: u64) -> Result<QExpansion<R>> {
    if f.offset24() % 24 != 0 {
        return Err(Error::FractionalOffset {
            offset24: f.offset24(),
        });
    }
    if f.offset24() != 0 {
        return Err(Error::InvalidArgument(
            "U_m on a q-expansion requires offset24 = 0".into(),
        ));
    }
    Ok(QExpansion::new(0, u_op(f.series(), m)?))
}

/// `U_m`: keeps every m-th coefficient, `a(n) -> a(mn)`. The output
/// truncation is `floor(L/m)`, which must be positive.
pub fn u_op<R: CoeffRing>(f: &Series<R>, m: u64) -> Result<Series<R>> {
    if m == 0 {
        return Err(Error::InvalidArgument("U_0 is not defined".into()));
    }
    let m = m as usize;
    let out_len = f.trunc() / m;
    if out_len == 0 {
        return Err(Error::UOperatorTooShort {
            m: m as u64,
            have: f.trunc(),
        });
    }
    let coeffs = (0..out_len).map(|n| f.coeff(m * n).clone()).collect();
    Series::from_coeffs(f.ring().clone(), coeffs)
}

/// Exact Bernoulli numbers `B_0..B_k` (convention `B_1 = -1/2`), via the
/// recurrence `sum_{j=0}^{k} C(k+1, j) B_j = 0`.
pub fn bernoulli_upto(k: u32) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(k as usize + 1);
    b.push(BigRational::one());
    for m in 1..=k as usize {
        // sum_{j=0}^{m-1} C(m+1, j) B_j, binomials built incrementally
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from(binom.clone()) * bj;
            // C(m+1, j+1) = C(m+1, j) * (m+1-j) / (j+1)
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from(BigInt::from(m + 1)));
    }
    b
}

/// The k-th Bernoulli number, exactly.
pub fn bernoulli(k: u32) -> BigRational {
    bernoulli_upto(k).pop().expect("nonempty")
}

/// A weight-k Eisenstein series `E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EisensteinSeries<R: CoeffRing> {
    k: u64,
    series: Series<R>,
}

impl<R: CoeffRing> EisensteinSeries<R> {
    pub fn weight(&self) -> u64 {
        self.k
    }

    pub fn series(&self) -> &Series<R> {
        &self.series
    }

    pub fn into_series(self) -> Series<R> {
        self.series
    }

    pub fn as_qexpansion(&self) -> QExpansion<R> {
        QExpansion::new(0, self.series.clone())
    }
}

fn eisenstein_factor(k: u64) -> Result<BigRational> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Eisenstein weight must be even and at least 2, got {k}"
        )));
    }
    let bk = bernoulli(k as u32);
    Ok(BigRational::from(BigInt::from(2 * k)) / bk)
}

fn mod_floor_u64(v: &BigInt, m: u64) -> u64 {
    let r = v.mod_floor(&BigInt::from(m));
    r.to_u64().expect("reduced value fits u64")
}

/// `E_k` reduced mod ell. Errors when ell divides the denominator of
/// `2k/B_k`, i.e. the series is not ell-integral.
pub fn eisenstein_fp(fp: Fp, k: u64, trunc: usize) -> Result<EisensteinSeries<Fp>> {
    let factor = eisenstein_factor(k)?;
    let ell = fp.modulus();
    let denom = mod_floor_u64(factor.denom(), ell);
    if denom == 0 {
        return Err(Error::EisensteinNotIntegral { k, ell });
    }
    let num = mod_floor_u64(factor.numer(), ell);
    let c = fp.neg(&fp.mul(&num, &fp.inv(&denom).expect("nonzero mod prime")));
    // sigma_{k-1} by divisor sieve
    let trunc = trunc.max(1);
    let mut sigma = vec![0u64; trunc];
    for d in 1..trunc {
        let pw = fp.pow_u64(d as u64 % ell, k - 1);
        let mut m = d;
        while m < trunc {
            sigma[m] = fp.add(&sigma[m], &pw);
            m += d;
        }
    }
    let mut coeffs = vec![0u64; trunc];
    coeffs[0] = fp.one();
    for n in 1..trunc {
        coeffs[n] = fp.mul(&c, &sigma[n]);
    }
    Ok(EisensteinSeries {
        k,
        series: Series::from_coeffs(fp, coeffs)?,
    })
}

/// `E_k` with exact integer coefficients; errors when `2k/B_k` is not an
/// integer (as for `k = 12`), in which case only the mod-ell form exists
/// here.
pub fn eisenstein_exact(k: u64, trunc: usize) -> Result<EisensteinSeries<ZZ>> {
    let factor = eisenstein_factor(k)?;
    if !factor.denom().abs().is_one() {
        return Err(Error::EisensteinNotExact { k });
    }
    let c = -factor.to_integer();
    let trunc = trunc.max(1);
    let mut coeffs = vec![BigInt::zero(); trunc];
    for d in 1..trunc {
        let pw = BigInt::from(d).pow(k as u32 - 1);
        let mut m = d;
        while m < trunc {
            coeffs[m] += &pw;
            m += d;
        }
    }
    for item in coeffs.iter_mut().skip(1) {
        *item *= &c;
    }
    coeffs[0] = BigInt::one();
    Ok(EisensteinSeries {
        k,
        series: Series::from_coeffs(ZZ, coeffs)?,
    })
}

/// The weight-raising form
/// `R = (theta f - (k/12) E_2 f) E_{ell-1} + (k/12) E_{ell+1} f`,
/// evaluated entirely in `F_ell` with `k/12 = k * 12^{-1}`. `R` is
/// congruent to `theta f` and realizes it in weight `k + ell + 1`.
pub fn r_form(f: &ModSeries, k: i64) -> Result<ModSeries> {
    let fp = *f.ring();
    let ell = fp.modulus();
    if ell < 5 {
        return Err(Error::PrimeTooSmall { ell, min: 5 });
    }
    let trunc = f.trunc();
    let e2 = eisenstein_fp(fp, 2, trunc)?.into_series();
    let e_lm1 = eisenstein_fp(fp, ell - 1, trunc)?.into_series();
    let e_lp1 = eisenstein_fp(fp, ell + 1, trunc)?.into_series();
    let k12 = fp.mul(
        &fp.from_i64(k),
        &fp.inv(&fp.from_i64(12)).expect("12 a unit"),
    );
    let theta_f = theta(f);
    let first = theta_f.sub(&e2.mul(f)?.scale(&k12))?.mul(&e_lm1)?;
    let second = e_lp1.mul(f)?.scale(&k12);
    first.add(&second)
}

/// Expansions mod ell of the monomials `E4^a E6^b` with `4a + 6b = k`,
/// ordered by ascending power of `E6`. Their span is the space of
/// level-one weight-k forms mod ell (`ell >= 5`).
pub fn level1_basis(fp: Fp, k: u64, trunc: usize) -> Result<Vec<ModSeries>> {
    if fp.modulus() < 5 {
        return Err(Error::PrimeTooSmall {
            ell: fp.modulus(),
            min: 5,
        });
    }
    if k % 2 != 0 {
        return Ok(Vec::new());
    }
    if k == 0 {
        return Ok(vec![Series::one(fp, trunc)]);
    }
    let e4 = eisenstein_fp(fp, 4, trunc)?.into_series();
    let e6 = eisenstein_fp(fp, 6, trunc)?.into_series();
    let mut basis = Vec::new();
    let mut e6_pow = Series::one(fp, trunc);
    let mut b = 0;
    while 6 * b <= k {
        let rem = k - 6 * b;
        if rem % 4 == 0 {
            basis.push(e4.pow(rem / 4).mul(&e6_pow)?);
        }
        b += 1;
        if 6 * b <= k {
            e6_pow = e6_pow.mul(&e6)?;
        }
    }
    Ok(basis)
}

/// Dimension of the level-one space of even weight k (0 for odd or
/// negative input).
pub fn dim_level1(k: i64) -> usize {
    if k < 0 || k % 2 != 0 {
        return 0;
    }
    let k = k as u64;
    if k % 12 == 2 {
        (k / 12) as usize
    } else {
        (k / 12) as usize + 1
    }
}

/// Result of a filtration computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationResult {
    /// The filtration: least weight whose reductions contain the series.
    pub w: u64,
    /// Candidate weights tested, in the order tried.
    pub witness_weight_chain: Vec<u64>,
    /// Number of leading coefficients on which the identity was verified.
    pub certified_up_to: u64,
}

/// Solves `basis * x = target` over `F_ell` on the first `rows`
/// coefficients; returns a solution if the system is consistent.
fn solve_membership(
    fp: Fp,
    basis: &[ModSeries],
    target: &ModSeries,
    rows: usize,
) -> Option<Vec<u64>> {
    let cols = basis.len();
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|n| {
            let mut row: Vec<u64> = basis.iter().map(|b| *b.coeff(n)).collect();
            row.push(*target.coeff(n));
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(r) = (pivot_row..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(pivot_row, r);
        let inv = fp.inv(&m[pivot_row][col]).expect("pivot nonzero");
        for entry in m[pivot_row][col..=cols].iter_mut() {
            *entry = fp.mul(entry, &inv);
        }
        let pivot_vals = m[pivot_row][col..=cols].to_vec();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && row[col] != 0 {
                let factor = row[col];
                for (entry, pv) in row[col..=cols].iter_mut().zip(&pivot_vals) {
                    let t = fp.mul(&factor, pv);
                    *entry = fp.sub(entry, &t);
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    // rows reduced to zero must have zero right-hand side
    for row in m.iter().skip(pivot_row) {
        if row[cols] != 0 {
            return None;
        }
    }
    let mut solution = vec![0u64; cols];
    for (i, &col) in pivot_cols.iter().enumerate() {
        solution[col] = m[i][cols];
    }
    Some(solution)
}

/// Filtration of a level-one form mod ell of nominal weight `k`: walks the
/// candidate weights `k' = k - j(ell-1) >= 0` from the smallest upward and
/// returns the first weight whose basis solves for `f` through the Sturm
/// bound of weight `k`.
pub fn filtration_level1(f: &ModSeries, k: u64) -> Result<FiltrationResult> {
    let fp = *f.ring();
    let ell = fp.modulus();
    if ell < 5 {
        return Err(Error::PrimeTooSmall { ell, min: 5 });
    }
    if f.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let needed = sturm_bound(2 * k.max(1) as i64, 1)? as usize;
    if f.trunc() < needed {
        return Err(Error::InsufficientTruncation {
            need: needed,
            have: f.trunc(),
        });
    }
    let step = ell - 1;
    let mut candidates: Vec<u64> = Vec::new();
    let mut kp = k % step;
    loop {
        candidates.push(kp);
        if kp + step > k {
            break;
        }
        kp += step;
    }
    let mut tried = Vec::new();
    for &cand in &candidates {
        tried.push(cand);
        let basis = level1_basis(fp, cand, needed)?;
        if basis.is_empty() {
            continue;
        }
        if solve_membership(fp, &basis, f, needed).is_some() {
            return Ok(FiltrationResult {
                w: cand,
                witness_weight_chain: tried,
                certified_up_to: needed as u64,
            });
        }
    }
    Err(Error::FiltrationFailed(format!(
        "series is not the reduction of a level-one form of weight {k} (mod {ell})"
    )))
}

/// One filtration drop inside a theta cycle: at `theta^index f` the
/// filtration was divisible by ell and the next step fell by
/// `s(ell-1) - (ell+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaDrop {
    pub index: u64,
    pub s: i64,
}

/// Filtrations along the theta cycle `w(theta^i f)`, `i = 0..ell-1`,
/// plus one extra step to expose the wrap-around.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaCycle {
    /// `w(theta^i f)` for `i = 0..=ell` (one full cycle plus the wrap step).
    pub filtrations: Vec<u64>,
    /// Drop data at the indices `i` within `0..ell-1` where
    /// `w(theta^i f) = 0 (mod ell)`.
    pub drops: Vec<ThetaDrop>,
}

/// Computes the theta cycle of a level-one form of weight `k` by repeated
/// `r_form` and filtration steps.
pub fn theta_cycle(f: &ModSeries, k: u64) -> Result<ThetaCycle> {
    let ell = f.ring().modulus();
    let mut filtrations = Vec::with_capacity(ell as usize + 1);
    let mut g = f.clone();
    let mut w = filtration_level1(&g, k)?.w;
    filtrations.push(w);
    for _ in 1..=ell {
        g = r_form(&g, w as i64)?;
        let next = filtration_level1(&g, w + ell + 1)?.w;
        filtrations.push(next);
        w = next;
    }
    let mut drops = Vec::new();
    for i in 0..ell as usize {
        let wi = filtrations[i];
        if wi % ell == 0 {
            let raise = wi as i64 + ell as i64 + 1 - filtrations[i + 1] as i64;
            if raise.rem_euclid(ell as i64 - 1) != 0 {
                return Err(Error::FiltrationFailed(format!(
                    "drop at theta^{i} is not an integer multiple of ell-1"
                )));
            }
            drops.push(ThetaDrop {
                index: i as u64,
                s: raise / (ell as i64 - 1),
            });
        }
    }
    Ok(ThetaCycle { filtrations, drops })
}
