//! Dense truncated power series with exact coefficients.
//!
//! A [`Series`] stores the coefficients `a(0), ..., a(L-1)` of a power
//! series truncated to `L` terms. Binary operations truncate to the
//! shorter operand; there is no implicit zero-extension, so uncomputed
//! coefficients can never leak into a result.
//!
//! The expensive kernels are the dense Cauchy product (parallelized over
//! output coefficients, hence deterministic) and the sparse-factor passes
//! used by the eta-quotient expander: multiplying or dividing a dense
//! series by a polynomial with a few hundred nonzero terms costs
//! `O(L * support)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ring::{CoeffRing, Fp, ZZ};

/// Truncation length above which the dense product parallelizes.
const PAR_THRESHOLD: usize = 1 << 12;

/// A dense truncated power series over the ring `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<R: CoeffRing> {
    ring: R,
    coeffs: Vec<R::Elem>,
}

impl<R: CoeffRing> Series<R> {
    /// Wraps a coefficient vector, normalizing each entry into canonical
    /// form. The vector length is the truncation.
    pub fn from_coeffs(ring: R, coeffs: Vec<R::Elem>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "series truncation must be positive".into(),
            ));
        }
        let coeffs = coeffs.into_iter().map(|c| ring.normalize(c)).collect();
        Ok(Series { ring, coeffs })
    }

    /// Builds a series from signed integers, reducing into the ring.
    pub fn from_i64(ring: R, values: &[i64]) -> Result<Self> {
        let coeffs = values.iter().map(|&v| ring.from_i64(v)).collect();
        Series::from_coeffs(ring, coeffs)
    }

    pub fn zero(ring: R, trunc: usize) -> Self {
        let coeffs = vec![ring.zero(); trunc.max(1)];
        Series { ring, coeffs }
    }

    pub fn one(ring: R, trunc: usize) -> Self {
        let mut s = Series::zero(ring, trunc);
        s.coeffs[0] = s.ring.one();
        s
    }

    /// The monomial `c * q^exp`, truncated to `trunc` terms.
    pub fn monomial(ring: R, c: R::Elem, exp: usize, trunc: usize) -> Self {
        let mut s = Series::zero(ring, trunc);
        if exp < s.coeffs.len() {
            s.coeffs[exp] = c;
        }
        s
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    /// Number of stored coefficients.
    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &R::Elem {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[R::Elem] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<R::Elem> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.ring.is_zero(c))
    }

    /// Copy truncated (or unchanged if `trunc` is not shorter).
    pub fn truncated(&self, trunc: usize) -> Self {
        let n = trunc.clamp(1, self.coeffs.len());
        Series {
            ring: self.ring.clone(),
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    /// The series `q^shift * self`, keeping `trunc + shift` coefficients.
    pub fn shifted(&self, shift: usize) -> Self {
        let mut coeffs = vec![self.ring.zero(); shift];
        coeffs.extend_from_slice(&self.coeffs);
        Series {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::ModulusMismatch(
                self.ring.modulus_id(),
                other.ring.modulus_id(),
            ))
        }
    }

    /// Coefficientwise sum, truncated to the shorter operand.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..n)
            .map(|i| self.ring.add(&self.coeffs[i], &other.coeffs[i]))
            .collect();
        Ok(Series {
            ring: self.ring.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..n)
            .map(|i| self.ring.sub(&self.coeffs[i], &other.coeffs[i]))
            .collect();
        Ok(Series {
            ring: self.ring.clone(),
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| self.ring.neg(c)).collect();
        Series {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// Scales every coefficient by `c`.
    pub fn scale(&self, c: &R::Elem) -> Self {
        let coeffs = self.coeffs.iter().map(|a| self.ring.mul(c, a)).collect();
        Series {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// Truncated Cauchy product. Deterministic for any thread count: each
    /// output coefficient is an independent exact convolution.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.trunc().min(other.trunc());
        let a = &self.coeffs;
        let b = &other.coeffs;
        let ring = &self.ring;
        let coeffs: Vec<R::Elem> = if n >= PAR_THRESHOLD {
            (0..n)
                .into_par_iter()
                .map(|k| ring.convolve_at(a, b, k))
                .collect()
        } else {
            (0..n).map(|k| ring.convolve_at(a, b, k)).collect()
        };
        Ok(Series {
            ring: self.ring.clone(),
            coeffs,
        })
    }

    /// Multiplicative inverse up to truncation; requires a unit constant
    /// term. Sparse inputs invert in `O(L * support)`.
    pub fn invert(&self) -> Result<Self> {
        let inv0 = self
            .ring
            .inv(&self.coeffs[0])
            .ok_or(Error::NonUnitConstantTerm)?;
        let support: Vec<usize> = (1..self.trunc())
            .filter(|&j| !self.ring.is_zero(&self.coeffs[j]))
            .collect();
        let mut out = Vec::with_capacity(self.trunc());
        out.push(inv0.clone());
        for n in 1..self.trunc() {
            let mut acc = self.ring.zero();
            for &j in support.iter().take_while(|&&j| j <= n) {
                acc = self
                    .ring
                    .add(&acc, &self.ring.mul(&self.coeffs[j], &out[n - j]));
            }
            out.push(self.ring.neg(&self.ring.mul(&inv0, &acc)));
        }
        Ok(Series {
            ring: self.ring.clone(),
            coeffs: out,
        })
    }

    /// `self^e` by binary exponentiation; `f^0 = 1`.
    pub fn pow(&self, e: u64) -> Self {
        let mut result = Series::one(self.ring.clone(), self.trunc());
        if e == 0 {
            return result;
        }
        let mut base = self.clone();
        let mut e = e;
        loop {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same ring");
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base).expect("same ring");
        }
        result
    }

    /// In-place product with a sparse polynomial.
    pub fn mul_sparse(&self, factor: &SparsePoly<R>) -> Self {
        let l = self.trunc();
        let ring = &self.ring;
        let a = &self.coeffs;
        let eval = |n: usize| -> R::Elem {
            let mut acc = ring.mul(&factor.constant, &a[n]);
            for &j in factor.plus.iter().take_while(|&&j| j <= n) {
                acc = ring.add(&acc, &a[n - j]);
            }
            for &j in factor.minus.iter().take_while(|&&j| j <= n) {
                acc = ring.sub(&acc, &a[n - j]);
            }
            for (j, c) in factor.general.iter().take_while(|(j, _)| *j <= n) {
                acc = ring.add(&acc, &ring.mul(c, &a[n - j]));
            }
            acc
        };
        let coeffs: Vec<R::Elem> = if l >= PAR_THRESHOLD {
            (0..l).into_par_iter().map(eval).collect()
        } else {
            (0..l).map(eval).collect()
        };
        Series {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// Exact quotient by a sparse polynomial with unit constant term:
    /// returns `g` with `g * factor = self` up to truncation.
    pub fn div_sparse(&self, factor: &SparsePoly<R>) -> Result<Self> {
        let inv0 = self
            .ring
            .inv(&factor.constant)
            .ok_or(Error::NonUnitConstantTerm)?;
        let one = self.ring.one();
        let trivial_lead = factor.constant == one;
        let l = self.trunc();
        let ring = self.ring.clone();
        let mut out: Vec<R::Elem> = Vec::with_capacity(l);
        for n in 0..l {
            let mut acc = self.coeffs[n].clone();
            for &j in factor.plus.iter().take_while(|&&j| j <= n) {
                acc = ring.sub(&acc, &out[n - j]);
            }
            for &j in factor.minus.iter().take_while(|&&j| j <= n) {
                acc = ring.add(&acc, &out[n - j]);
            }
            for (j, c) in factor.general.iter().take_while(|(j, _)| *j <= n) {
                acc = ring.sub(&acc, &ring.mul(c, &out[n - j]));
            }
            if !trivial_lead {
                acc = ring.mul(&inv0, &acc);
            }
            out.push(acc);
        }
        Ok(Series { ring, coeffs: out })
    }

    /// Applies `map` to each coefficient paired with its index.
    pub fn map_indexed<F>(&self, mut map: F) -> Self
    where
        F: FnMut(usize, &R::Elem) -> R::Elem,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| map(n, c))
            .collect();
        Series {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn leading_index(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !self.ring.is_zero(c))
    }

    /// Text dump: one `n<TAB>a(n)` line per coefficient.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for (n, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{n}\t{c}\n"));
        }
        out
    }

    /// Decimal coefficient strings (the JSON dump payload).
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

/// A sparse polynomial used as a multiplication/division factor.
///
/// Terms with coefficient plus or minus one are kept in dedicated lists so
/// the hot loops run without coefficient multiplications; everything else
/// lands in `general`. Exponent lists are strictly increasing.
#[derive(Clone, Debug)]
pub struct SparsePoly<R: CoeffRing> {
    constant: R::Elem,
    plus: Vec<usize>,
    minus: Vec<usize>,
    general: Vec<(usize, R::Elem)>,
}

impl<R: CoeffRing> SparsePoly<R> {
    /// Builds from `(exponent, signed coefficient)` terms; exponents must
    /// be distinct. Terms at or beyond `trunc` are dropped.
    pub fn from_terms(ring: &R, terms: &[(usize, i64)], trunc: usize) -> Self {
        let mut constant = ring.zero();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        let mut general = Vec::new();
        let mut sorted: Vec<(usize, i64)> = terms.to_vec();
        sorted.sort_unstable_by_key(|t| t.0);
        for (exp, c) in sorted {
            if exp >= trunc || c == 0 {
                continue;
            }
            if exp == 0 {
                constant = ring.from_i64(c);
            } else if c == 1 {
                plus.push(exp);
            } else if c == -1 {
                minus.push(exp);
            } else {
                general.push((exp, ring.from_i64(c)));
            }
        }
        SparsePoly {
            constant,
            plus,
            minus,
            general,
        }
    }

    /// Number of nonzero non-constant terms.
    pub fn support_len(&self) -> usize {
        self.plus.len() + self.minus.len() + self.general.len()
    }

    /// Dense form, mostly for cross-checks.
    pub fn to_series(&self, ring: &R, trunc: usize) -> Series<R> {
        let mut s = Series::zero(ring.clone(), trunc);
        s.coeffs[0] = self.constant.clone();
        for &j in &self.plus {
            if j < trunc {
                s.coeffs[j] = ring.one();
            }
        }
        for &j in &self.minus {
            if j < trunc {
                s.coeffs[j] = ring.neg(&ring.one());
            }
        }
        for (j, c) in &self.general {
            if *j < trunc {
                s.coeffs[*j] = c.clone();
            }
        }
        s
    }
}

/// Generalized pentagonal support of `prod_{n>=1} (1 - q^{d n})` up to
/// `trunc`: exponents `d*k(3k-1)/2`, `d*k(3k+1)/2` with sign `(-1)^k`.
pub fn pentagonal_terms(d: usize, trunc: usize) -> Vec<(usize, i64)> {
    let mut terms = vec![(0usize, 1i64)];
    let mut k = 1usize;
    loop {
        let g1 = d * (k * (3 * k - 1) / 2);
        if g1 >= trunc {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        terms.push((g1, sign));
        let g2 = d * (k * (3 * k + 1) / 2);
        if g2 < trunc {
            terms.push((g2, sign));
        }
        k += 1;
    }
    terms
}

/// Expansion of `(1 - q^m)^e` to `trunc` terms, for any integer `e`.
///
/// Small exponents apply the two-term factor `|e|` times (multiplying for
/// `e > 0`, exact-dividing for `e < 0`); large exponents switch to binary
/// exponentiation on the dense factor. Both paths are exact.
pub fn sparse_factor_pow<R: CoeffRing>(ring: &R, m: usize, e: i64, trunc: usize) -> Series<R> {
    let factor = SparsePoly::from_terms(ring, &[(0, 1), (m, -1)], trunc);
    let abs = e.unsigned_abs();
    let mut acc = Series::one(ring.clone(), trunc);
    if abs == 0 {
        return acc;
    }
    let log2 = 64 - abs.leading_zeros() as u64;
    let repeated_cost = abs.saturating_mul(2);
    let dense_cost = (2 * log2 + 1).saturating_mul(trunc as u64);
    if repeated_cost <= dense_cost || m >= trunc {
        if e > 0 {
            for _ in 0..abs {
                acc = acc.mul_sparse(&factor);
            }
        } else {
            for _ in 0..abs {
                acc = acc.div_sparse(&factor).expect("unit constant term");
            }
        }
        acc
    } else {
        let base = factor.to_series(ring, trunc);
        let powed = base.pow(abs);
        if e > 0 {
            powed
        } else {
            powed.invert().expect("unit constant term")
        }
    }
}

/// Reduces an integer series coefficientwise into `F_ell`.
pub fn reduce_series(series: &Series<ZZ>, fp: Fp) -> Series<Fp> {
    let coeffs = series
        .coeffs()
        .iter()
        .map(|c| fp.reduce_bigint(c))
        .collect();
    Series::from_coeffs(fp, coeffs).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn f5() -> Fp {
        Fp::from_prime(5).unwrap()
    }

    #[test]
    fn add_examples() {
        let f = Series::from_i64(f5(), &[1, 1]).unwrap();
        assert_eq!(f.add(&f).unwrap(), Series::from_i64(f5(), &[2, 2]).unwrap());
        let zero = Series::zero(f5(), 2);
        assert_eq!(f.add(&zero).unwrap(), f);
        let g = Series::from_i64(f5(), &[4, 3]).unwrap();
        let h = Series::from_i64(f5(), &[1, 2]).unwrap();
        assert!(g.add(&h).unwrap().is_zero());
    }

    #[test]
    fn modulus_mismatch_is_an_error() {
        let f = Series::from_i64(f5(), &[1]).unwrap();
        let g = Series::from_i64(Fp::from_prime(7).unwrap(), &[1]).unwrap();
        assert!(matches!(f.add(&g), Err(Error::ModulusMismatch(5, 7))));
        assert!(matches!(f.mul(&g), Err(Error::ModulusMismatch(5, 7))));
    }

    #[test]
    fn mul_truncates_to_shorter_operand() {
        let f = Series::from_i64(f5(), &[1, 2, 3, 4]).unwrap();
        let g = Series::from_i64(f5(), &[1, 1]).unwrap();
        assert_eq!(f.mul(&g).unwrap().trunc(), 2);
        // multiplicative identity
        assert_eq!(f.mul(&Series::one(f5(), 4)).unwrap(), f);
    }

    #[test]
    fn euler_square_reduces_like_the_exact_product() {
        // square of prod (1-q^n) to 10 terms: schoolbook over Z, then
        // reduce mod 7; must match the mod-7 computation
        let f7 = Fp::from_prime(7).unwrap();
        let euler_z = SparsePoly::from_terms(&ZZ, &pentagonal_terms(1, 10), 10).to_series(&ZZ, 10);
        let exact_sq = euler_z.mul(&euler_z).unwrap();
        let euler_m = SparsePoly::from_terms(&f7, &pentagonal_terms(1, 10), 10).to_series(&f7, 10);
        let mod_sq = euler_m.mul(&euler_m).unwrap();
        assert_eq!(reduce_series(&exact_sq, f7), mod_sq);
    }

    #[test]
    fn geometric_inverse() {
        // (1 - q) * (1 + q + q^2 + ...) = 1
        let one_minus_q = Series::from_i64(f5(), &[1, -1, 0, 0, 0, 0]).unwrap();
        let geo = one_minus_q.invert().unwrap();
        assert_eq!(geo, Series::from_i64(f5(), &[1, 1, 1, 1, 1, 1]).unwrap());
        assert!(one_minus_q
            .mul(&geo)
            .unwrap()
            .sub(&Series::one(f5(), 6))
            .unwrap()
            .is_zero());
        // invert is an involution
        assert_eq!(geo.invert().unwrap(), one_minus_q);
    }

    #[test]
    fn invert_requires_unit_constant() {
        let f = Series::from_i64(f5(), &[0, 1]).unwrap();
        assert!(matches!(f.invert(), Err(Error::NonUnitConstantTerm)));
        let z = Series::from_i64(ZZ, &[2, 1]).unwrap();
        assert!(matches!(z.invert(), Err(Error::NonUnitConstantTerm)));
    }

    #[test]
    fn pow_basics() {
        let f = Series::from_i64(f5(), &[1, 3, 2, 4]).unwrap();
        assert_eq!(f.pow(0), Series::one(f5(), 4));
        assert_eq!(f.pow(1), f);
        let lhs = f.pow(2).mul(&f.pow(3)).unwrap();
        assert_eq!(lhs, f.pow(5));
    }

    #[test]
    fn sparse_factor_pow_examples() {
        // m=1, e=-1: geometric series
        let geo = sparse_factor_pow(&f5(), 1, -1, 6);
        assert_eq!(geo, Series::from_i64(f5(), &[1, 1, 1, 1, 1, 1]).unwrap());
        // m=2, e=2 mod 7: (1-q^2)^2 = 1 - 2q^2 + q^4
        let f7 = Fp::from_prime(7).unwrap();
        let sq = sparse_factor_pow(&f7, 2, 2, 5);
        assert_eq!(sq, Series::from_i64(f7, &[1, 0, 5, 0, 1]).unwrap());
        // e=0 is the empty product
        assert_eq!(sparse_factor_pow(&f5(), 3, 0, 4), Series::one(f5(), 4));
    }

    #[test]
    fn sparse_factor_pow_negative_matches_invert_of_pow() {
        // two independent code paths for (1 - q^3)^{-48}
        let f7 = Fp::from_prime(7).unwrap();
        let direct = sparse_factor_pow(&f7, 3, -48, 30);
        let base = SparsePoly::from_terms(&f7, &[(0, 1), (3, -1)], 30).to_series(&f7, 30);
        let via_invert = base.pow(48).invert().unwrap();
        assert_eq!(direct, via_invert);
    }

    #[test]
    fn partition_numbers_mod_5() {
        // invert(prod (1-q^n)) has coefficients p(n); p(4) = 5 = 0 mod 5
        let euler = SparsePoly::from_terms(&f5(), &pentagonal_terms(1, 10), 10);
        let p = Series::one(f5(), 10).div_sparse(&euler).unwrap();
        assert_eq!(*p.coeff(0), 1);
        assert_eq!(*p.coeff(4), 0); // p(4) = 5
                                    // cross-check with exact integers
        let euler_z = SparsePoly::from_terms(&ZZ, &pentagonal_terms(1, 10), 10);
        let pz = Series::one(ZZ, 10).div_sparse(&euler_z).unwrap();
        assert_eq!(*pz.coeff(4), BigInt::from(5));
        assert_eq!(*pz.coeff(9), BigInt::from(30));
    }

    #[test]
    fn mul_sparse_matches_dense_mul() {
        let terms = pentagonal_terms(2, 40);
        let sp = SparsePoly::from_terms(&f5(), &terms, 40);
        let dense = sp.to_series(&f5(), 40);
        let f = Series::from_i64(f5(), &(0..40).map(|n| n * n + 1).collect::<Vec<_>>()).unwrap();
        assert_eq!(f.mul_sparse(&sp), f.mul(&dense).unwrap());
        // division undoes multiplication
        assert_eq!(f.mul_sparse(&sp).div_sparse(&sp).unwrap(), f);
    }

    #[test]
    fn reduction_commutes_with_arithmetic() {
        let a = Series::from_i64(ZZ, &[3, -7, 12, 40, -1]).unwrap();
        let b = Series::from_i64(ZZ, &[-2, 9, 8, -13, 6]).unwrap();
        let fp = Fp::from_prime(7).unwrap();
        let ra = reduce_series(&a, fp);
        let rb = reduce_series(&b, fp);
        assert_eq!(reduce_series(&a.mul(&b).unwrap(), fp), ra.mul(&rb).unwrap());
        assert_eq!(reduce_series(&a.add(&b).unwrap(), fp), ra.add(&rb).unwrap());
    }
}
