//! Coefficient rings for truncated power series.
//!
//! All arithmetic in this crate is exact. Series are generic over a
//! [`CoeffRing`]: the two instances are [`Fp`] (integers modulo a prime,
//! elements stored as reduced `u64`) and [`ZZ`] (arbitrary-precision
//! integers). The ring is a value, not just a type, because the prime
//! modulus is chosen at runtime.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A ring whose elements serve as series coefficients.
///
/// Implementations must be exact: no rounding, no tolerance.
// ring objects construct their own elements, so `from_*` takes `&self`
#[allow(clippy::wrong_self_convention)]
pub trait CoeffRing: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` when `a` is not a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;

    /// Canonical representative of an element (reduction into `[0, ell)`
    /// over `F_ell`; the identity over `Z`).
    fn normalize(&self, a: Self::Elem) -> Self::Elem {
        a
    }

    /// The Cauchy-product coefficient `sum_{i} a[i] * b[n-i]` over
    /// `max(0, n+1-b.len()) <= i <= min(n, a.len()-1)`.
    ///
    /// The default is a plain fold; rings may override with a faster
    /// accumulation. Must be exact and independent of evaluation order.
    fn convolve_at(&self, a: &[Self::Elem], b: &[Self::Elem], n: usize) -> Self::Elem {
        let lo = (n + 1).saturating_sub(b.len());
        let hi = n.min(a.len() - 1);
        let mut acc = self.zero();
        for i in lo..=hi {
            acc = self.add(&acc, &self.mul(&a[i], &b[n - i]));
        }
        acc
    }

    /// Human-readable label used in mismatch errors ("Z" or the prime).
    fn modulus_id(&self) -> u64;
}

/// A checked prime modulus.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    /// Wraps `ell` after a deterministic Miller-Rabin primality check.
    pub fn new(ell: u64) -> Result<Self> {
        if is_prime_u64(ell) {
            Ok(PrimeModulus(ell))
        } else {
            Err(Error::NotPrime(ell))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field of integers modulo a prime; elements are reduced `u64`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fp {
    ell: u64,
}

impl Fp {
    pub fn new(modulus: PrimeModulus) -> Self {
        Fp { ell: modulus.get() }
    }

    pub fn from_prime(ell: u64) -> Result<Self> {
        Ok(Fp::new(PrimeModulus::new(ell)?))
    }

    pub fn modulus(self) -> u64 {
        self.ell
    }

    pub fn reduce_u64(self, v: u64) -> u64 {
        v % self.ell
    }

    pub fn reduce_i64(self, v: i64) -> u64 {
        let r = v.rem_euclid(self.ell as i64);
        r as u64
    }

    pub fn reduce_bigint(self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.ell);
        let r = v.mod_floor(&m);
        // mod_floor of a positive modulus is non-negative
        let (_, digits) = r.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }

    pub fn pow_u64(self, base: u64, mut e: u64) -> u64 {
        let mut b = base % self.ell;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, b, self.ell);
            }
            b = mul_mod(b, b, self.ell);
            e >>= 1;
        }
        acc
    }
}

impl CoeffRing for Fp {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn one(&self) -> u64 {
        1 % self.ell
    }

    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.ell {
            s - self.ell
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.ell - b
        }
    }

    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.ell - a
        }
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.ell)
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            // Fermat: a^(ell-2), valid because ell is prime.
            Some(self.pow_u64(*a, self.ell - 2))
        }
    }

    #[inline]
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }

    #[inline]
    fn normalize(&self, a: u64) -> u64 {
        a % self.ell
    }

    fn convolve_at(&self, a: &[u64], b: &[u64], n: usize) -> u64 {
        let lo = (n + 1).saturating_sub(b.len());
        let hi = n.min(a.len() - 1);
        if self.ell < (1 << 32) {
            // Products fit in 64 bits; a u128 accumulator cannot overflow
            // for any realistic truncation.
            let mut acc: u128 = 0;
            for i in lo..=hi {
                acc += (a[i] as u128) * (b[n - i] as u128);
            }
            (acc % self.ell as u128) as u64
        } else {
            let mut acc: u128 = 0;
            for i in lo..=hi {
                acc += mul_mod(a[i], b[n - i], self.ell) as u128;
            }
            (acc % self.ell as u128) as u64
        }
    }

    fn modulus_id(&self) -> u64 {
        self.ell
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// The ring of arbitrary-precision integers.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ZZ;

impl CoeffRing for ZZ {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    fn one(&self) -> BigInt {
        BigInt::one()
    }

    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }

    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }

    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }

    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        if a.abs().is_one() {
            Some(a.clone())
        } else {
            None
        }
    }

    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn modulus_id(&self) -> u64 {
        0
    }
}

/// Deterministic Miller-Rabin for `u64` inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // This witness set is exact for all 64-bit integers.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(a: u64, mut e: u64, m: u64) -> u64 {
    let mut b = a % m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Primes in `[2, bound]`, ascending.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime_u64(n)).collect()
}
