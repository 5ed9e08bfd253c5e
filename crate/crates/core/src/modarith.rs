//! Exact modular arithmetic and the classical character sums built on it.
//!
//! Everything here is a pure function of its arguments. Moduli are `u64`;
//! intermediate products go through `u128`, so any modulus below `2^64` is
//! safe. Primality is decided by trial division, which is adequate for the
//! moduli used in this crate (all below `10^6`, or `10^12` at the very most).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numeric::{e_mod, CompensatedSum};
use crate::{Error, Result};

/// Prime powers up to this size are handled by scanning every residue;
/// larger ones are lifted one `p`-adic digit at a time.
pub const ENUMERATION_THRESHOLD: u64 = 1_000_000;

/// Nonnegative gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i128
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a as i128, b as i128) as u64
}

/// Returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Least nonnegative residue of `a` modulo `m`.
#[inline]
pub fn reduce(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Representative of `a mod m` in `(-m/2, m/2]`.
pub fn centered(a: i128, m: u64) -> i64 {
    let r = reduce(a, m) as i128;
    let m = m as i128;
    (if 2 * r > m { r - m } else { r }) as i64
}

pub fn mod_inv(a: i128, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd(reduce(a, m) as i128, m as i128);
    (g == 1).then(|| reduce(x, m))
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// p-adic valuation; `None` for `a = 0`.
pub fn valuation(a: i128, p: u64) -> Option<u32> {
    if a == 0 {
        return None;
    }
    let (mut a, p) = (a.unsigned_abs(), p as u128);
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    Some(v)
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p != 2 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotOddPrime(p))
    }
}

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(a: i128, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        Ok(Self {
            value: reduce(a, modulus),
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Legendre symbol `(a / p)` by Euler's criterion.
pub fn legendre(a: i128, p: u64) -> Result<i8> {
    require_odd_prime(p)?;
    let a = reduce(a, p);
    if a == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    })
}

/// Evaluates `coeffs` (constant term last) at `x` modulo `m`.
pub fn eval_mod(coeffs: &[i128], x: u64, m: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs {
        acc = ((mul_mod(acc, x, m) as u128 + reduce(c, m) as u128) % m as u128) as u64;
    }
    acc
}

fn checked_prime_power(p: u64, k: u32) -> Result<u64> {
    p.checked_pow(k).ok_or(Error::Overflow("prime power"))
}

/// Number of roots of `coeffs` (constant term last) modulo `p^k`.
///
/// Scans every residue when `p^k <= ENUMERATION_THRESHOLD` and lifts
/// digit by digit otherwise. A polynomial that vanishes identically modulo
/// `p^k` has `p^k` roots.
pub fn count_roots_mod(coeffs: &[i128], p: u64, k: u32) -> Result<u64> {
    require_prime(p)?;
    let modulus = checked_prime_power(p, k)?;
    if modulus <= ENUMERATION_THRESHOLD {
        Ok(count_roots_enumerate(coeffs, modulus))
    } else {
        count_roots_lift(coeffs, p, k)
    }
}

/// Root count by exhaustive scan of `[0, modulus)`.
pub fn count_roots_enumerate(coeffs: &[i128], modulus: u64) -> u64 {
    (0..modulus)
        .filter(|&x| eval_mod(coeffs, x, modulus) == 0)
        .count() as u64
}

/// Root count by extending every root modulo `p^j` to all `p` candidates
/// modulo `p^(j+1)`. Singular roots are handled because nothing is assumed
/// about the derivative: every candidate is tested.
pub fn count_roots_lift(coeffs: &[i128], p: u64, k: u32) -> Result<u64> {
    require_prime(p)?;
    checked_prime_power(p, k)?;
    if k == 0 {
        return Ok(1);
    }
    let mut roots: Vec<u64> = (0..p).filter(|&x| eval_mod(coeffs, x, p) == 0).collect();
    let mut pj = p;
    for _ in 1..k {
        let next = pj * p;
        roots = roots
            .iter()
            .flat_map(|&x| (0..p).map(move |t| x + t * pj))
            .filter(|&y| eval_mod(coeffs, y, next) == 0)
            .collect();
        pj = next;
    }
    Ok(roots.len() as u64)
}

/// Ramanujan sum `c_p(M)`: the sum of `e_p(M x)` over units `x mod p`.
pub fn ramanujan_sum(p: u64, m: i128) -> Result<i64> {
    require_prime(p)?;
    Ok(if reduce(m, p) == 0 { p as i64 - 1 } else { -1 })
}

/// Quadratic Gauss sum `sum_{x mod p} e_p(ell x^2 + m x)` in closed form:
/// `eps_p sqrt(p) (ell/p) e_p(-(4 ell)^{-1} m^2)` with `eps_p = 1` or `i`
/// according as `p = 1` or `3 mod 4`.
pub fn gauss_sum(p: u64, ell: i128, m: i128) -> Result<Complex64> {
    require_odd_prime(p)?;
    if reduce(ell, p) == 0 {
        return Err(Error::Divisible {
            what: "gauss_sum ell",
            p,
            value: ell,
        });
    }
    let eps = if p % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let chi = legendre(ell, p)? as f64;
    let inv4l = mod_inv(4 * reduce(ell, p) as i128, p).expect("p odd and p does not divide ell");
    let mm = mul_mod(reduce(m, p), reduce(m, p), p);
    let phase = e_mod(-(mul_mod(inv4l, mm, p) as i128), p);
    Ok(eps * (p as f64).sqrt() * chi * phase)
}

/// The same Gauss sum by direct summation over all residues.
pub fn gauss_sum_direct(p: u64, ell: i128, m: i128) -> Complex64 {
    let (l, m) = (reduce(ell, p), reduce(m, p));
    (0..p)
        .map(|x| {
            let q = (mul_mod(l, mul_mod(x, x, p), p) + mul_mod(m, x, p)) % p;
            e_mod(q as i128, p)
        })
        .collect::<CompensatedSum>()
        .value()
}

/// `rho = u v w^2` split by the parity of prime exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UVWDecomposition {
    /// Product of primes dividing `rho` exactly once.
    pub u: u64,
    /// Product of primes dividing `rho` to an odd power of at least 3.
    pub v: u64,
    pub w: u64,
}

pub fn decompose_uvw(rho: u64) -> Result<UVWDecomposition> {
    if rho == 0 {
        return Err(Error::InvalidArgument(
            "decompose_uvw needs rho >= 1".into(),
        ));
    }
    let (mut u, mut v, mut w) = (1u64, 1u64, 1u64);
    for (p, e) in factorize(rho) {
        match e {
            1 => u *= p,
            e if e % 2 == 1 => {
                v *= p;
                w *= p.pow((e - 1) / 2);
            }
            e => w *= p.pow(e / 2),
        }
    }
    Ok(UVWDecomposition { u, v, w })
}

/// Result of combining two residues by the Chinese remainder theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrtLift {
    pub residue: Residue,
    /// Bezout cofactors `(c1, c2)` with `m1 c1 + m2 c2 = 1`.
    pub cofactors: (i128, i128),
}

pub fn crt_lift(r1: Residue, r2: Residue) -> Result<CrtLift> {
    let (m1, m2) = (r1.modulus as i128, r2.modulus as i128);
    let (g, c1, c2) = ext_gcd(m1, m2);
    if g != 1 {
        return Err(Error::NonCoprimeModuli(r1.modulus, r2.modulus));
    }
    let m = r1
        .modulus
        .checked_mul(r2.modulus)
        .ok_or(Error::Overflow("crt modulus"))?;
    // x = a1 m2 c2 + a2 m1 c1
    let x = (r1.value as i128 * reduce(m2 * c2, m) as i128).rem_euclid(m as i128)
        + (r2.value as i128 * reduce(m1 * c1, m) as i128).rem_euclid(m as i128);
    Ok(CrtLift {
        residue: Residue::new(x, m)?,
        cofactors: (c1, c2),
    })
}
