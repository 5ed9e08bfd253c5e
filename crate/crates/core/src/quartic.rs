//! Reduction machinery for `f(y1) + f(y2) = f(y3) + f(y4)` with
//! `f(x) = x^4 + a x^2 + b x`.
//!
//! A canonical solution `y1 > y3 >= y4 > y2 >= 0` is mapped to
//!
//! ```text
//! u1 = y1 - y3, u2 = y1 + y3, v1 = y4 - y2, v2 = y4 + y2,
//! h1 = gcd(u1, v1), h2 = gcd(u2, v1 / h1),
//! r = u1 / h1, s = u2 / h2, rho = v1 / (h1 h2), sigma = v2,
//! ```
//!
//! after which `r F(r, s) = rho G(rho, sigma)` with
//! `F(u, v) = h2^2 v^3 + (h1^2 u^2 + 2a) v + c`,
//! `G(u, v) = v^3 + (h1^2 h2^2 u^2 + 2a) v + h2 c` and `2b = h2 c`.

use num::bigint::BigInt;
use num::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modarith::{gcd, is_prime, primes_up_to, reduce};
use crate::{Error, Result};

/// Largest prime accepted by the exhaustive singularity scan.
pub const SINGULAR_SCAN_CAP: u64 = 101;

fn big(x: i128) -> BigInt {
    BigInt::from(x)
}

fn narrow(x: BigInt, what: &'static str) -> Result<i128> {
    x.to_i128().ok_or(Error::Overflow(what))
}

/// `f(x) = x^4 + a x^2 + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarticParams {
    pub a: i64,
    pub b: i64,
}

impl QuarticParams {
    pub fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    /// `f = x^4`, which the pool construction does not accept.
    pub fn is_pure_power(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn eval(&self, x: i128) -> Result<i128> {
        let x = big(x);
        let x2 = &x * &x;
        narrow(
            &x2 * &x2 + BigInt::from(self.a) * &x2 + BigInt::from(self.b) * &x,
            "f(x)",
        )
    }

    /// Coefficients, constant last.
    pub fn coeffs(&self) -> [i128; 5] {
        [1, 0, self.a as i128, self.b as i128, 0]
    }
}

/// `scale * f(x) = X^4 + b2 X^2 + b3 X + b4` with `X = 4 a0 x + a1` and
/// `scale = 4^4 a0^3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalization {
    pub params: QuarticParams,
    pub original: [i64; 5],
    /// `X = x_scale * x + x_shift`.
    pub x_scale: i128,
    pub x_shift: i128,
    pub scale: i128,
    pub b2: i128,
    pub b3: i128,
    pub b4: i128,
}

/// Coefficients (constant last) of `p(m x + t)`.
fn compose_linear(coeffs: &[BigInt], m: &BigInt, t: &BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero()];
    for c in coeffs {
        // out = out * (m x + t) + c
        let mut next = vec![BigInt::zero(); out.len() + 1];
        for (k, o) in out.iter().enumerate() {
            next[k] += o * m;
            next[k + 1] += o * t;
        }
        *next.last_mut().expect("nonempty") += c;
        out = next;
    }
    // Drop the leading zero introduced by the initial accumulator.
    out.remove(0);
    out
}

/// Removes the cubic term of `a0 x^4 + a1 x^3 + a2 x^2 + a3 x + a4`.
pub fn normalize_quartic(a0: i64, a1: i64, a2: i64, a3: i64, a4: i64) -> Result<Normalization> {
    if a0 == 0 {
        return Err(Error::InvalidArgument(
            "leading coefficient a0 must be nonzero".into(),
        ));
    }
    let [a0b, a1b, a2b, a3b, a4b] = [a0, a1, a2, a3, a4].map(BigInt::from);
    // With T = X - a1 the scaled quartic is
    // T^4 + 4 a1 T^3 + 16 a0 a2 T^2 + 64 a0^2 a3 T + 256 a0^3 a4.
    let in_t = vec![
        BigInt::one(),
        4 * &a1b,
        16 * &a0b * &a2b,
        64 * &a0b * &a0b * &a3b,
        256 * &a0b * &a0b * &a0b * &a4b,
    ];
    let in_x = compose_linear(&in_t, &BigInt::one(), &-&a1b);
    debug_assert!(in_x[0].is_one() && in_x[1].is_zero());
    let scale = 256 * &a0b * &a0b * &a0b;

    let x_scale = 4 * &a0b;
    let check = compose_linear(&in_x, &x_scale, &a1b);
    let target: Vec<BigInt> = [&a0b, &a1b, &a2b, &a3b, &a4b]
        .iter()
        .map(|c| &scale * *c)
        .collect();
    if check != target {
        return Err(Error::InvalidArgument(
            "normalization failed coefficient comparison".into(),
        ));
    }
    let b2 = narrow(in_x[2].clone(), "b2")?;
    let b3 = narrow(in_x[3].clone(), "b3")?;
    let b4 = narrow(in_x[4].clone(), "b4")?;
    let params = QuarticParams::new(
        i64::try_from(b2).map_err(|_| Error::Overflow("a"))?,
        i64::try_from(b3).map_err(|_| Error::Overflow("b"))?,
    );
    Ok(Normalization {
        params,
        original: [a0, a1, a2, a3, a4],
        x_scale: 4 * a0 as i128,
        x_shift: a1 as i128,
        scale: narrow(scale, "4^4 a0^3")?,
        b2,
        b3,
        b4,
    })
}

/// `(a, b, h1, h2, rho)` together with `c = 2b / h2`,
/// `A = h1^2 h2^2 rho^2 + 2a` and `Delta = 8a^3 + 27b^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticContext {
    params: QuarticParams,
    h1: i64,
    h2: i64,
    rho: i64,
    c: i64,
    a_big: i128,
    delta: i128,
}

impl QuarticContext {
    pub fn new(params: QuarticParams, h1: i64, h2: i64, rho: i64) -> Result<Self> {
        if h1 < 1 || h2 < 1 || rho < 1 {
            return Err(Error::InvalidContext(format!(
                "h1, h2, rho must be positive, got ({h1}, {h2}, {rho})"
            )));
        }
        let two_b = 2 * params.b as i128;
        if two_b % h2 as i128 != 0 {
            return Err(Error::InvalidContext(format!(
                "h2 = {h2} does not divide 2b = {two_b}"
            )));
        }
        let c = i64::try_from(two_b / h2 as i128).map_err(|_| Error::Overflow("c"))?;
        let hhr = big(h1 as i128) * big(h2 as i128) * big(rho as i128);
        let a_big = narrow(&hhr * &hhr + 2 * BigInt::from(params.a), "A")?;
        let (a, b) = (BigInt::from(params.a), BigInt::from(params.b));
        let delta = narrow(8 * &a * &a * &a + 27 * &b * &b, "Delta")?;
        Ok(Self {
            params,
            h1,
            h2,
            rho,
            c,
            a_big,
            delta,
        })
    }

    pub fn params(&self) -> QuarticParams {
        self.params
    }

    pub fn a(&self) -> i64 {
        self.params.a
    }

    pub fn b(&self) -> i64 {
        self.params.b
    }

    pub fn h1(&self) -> i64 {
        self.h1
    }

    pub fn h2(&self) -> i64 {
        self.h2
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    /// `A = h1^2 h2^2 rho^2 + 2a`.
    pub fn big_a(&self) -> i128 {
        self.a_big
    }

    /// `8a^3 + 27b^2`.
    pub fn delta_cubic(&self) -> i128 {
        self.delta
    }

    /// The same `(a, b, h1, h2)` with another `rho`.
    pub fn with_rho(&self, rho: i64) -> Result<Self> {
        Self::new(self.params, self.h1, self.h2, rho)
    }

    pub fn reduced(&self, modulus: u64) -> ReducedContext {
        ReducedContext::new(self, modulus)
    }
}

/// `F(u, v) = h2^2 v^3 + (h1^2 u^2 + 2a) v + c`.
pub fn eval_f_form(ctx: &QuarticContext, u: i128, v: i128) -> Result<i128> {
    let (u, v) = (big(u), big(v));
    let (h1, h2) = (big(ctx.h1 as i128), big(ctx.h2 as i128));
    let val = &h2 * &h2 * &v * &v * &v
        + (&h1 * &h1 * &u * &u + 2 * big(ctx.a() as i128)) * &v
        + big(ctx.c as i128);
    narrow(val, "F(u, v)")
}

/// `G(u, v) = v^3 + (h1^2 h2^2 u^2 + 2a) v + h2 c`.
pub fn eval_g_form(ctx: &QuarticContext, u: i128, v: i128) -> Result<i128> {
    let (u, v) = (big(u), big(v));
    let hh = big(ctx.h1 as i128 * ctx.h2 as i128);
    let val = &v * &v * &v
        + (&hh * &hh * &u * &u + 2 * big(ctx.a() as i128)) * &v
        + big(ctx.h2 as i128 * ctx.c as i128);
    narrow(val, "G(u, v)")
}

/// `H(z1, z2, w) = z1^2 + z1 z2 + z2^2 + A w^2`.
pub fn eval_h_form(ctx: &QuarticContext, z1: i128, z2: i128, w: i128) -> Result<i128> {
    let (z1, z2, w) = (big(z1), big(z2), big(w));
    narrow(
        &z1 * &z1 + &z1 * &z2 + &z2 * &z2 + big(ctx.a_big) * &w * &w,
        "H(z1, z2, w)",
    )
}

/// `K(Z, X, Y, W) = h1 h2 rho (Z^3 W + A Z W^3 + h2 c W^4) - 2(X^4 - Y^4)
/// - 2a (X^2 - Y^2) W^2 - 2b (X - Y) W^3`.
pub fn eval_k_form(ctx: &QuarticContext, z: i128, x: i128, y: i128, w: i128) -> Result<i128> {
    let (z, x, y, w) = (big(z), big(x), big(y), big(w));
    let k0 = big(ctx.h1 as i128 * ctx.h2 as i128 * ctx.rho as i128);
    let w2 = &w * &w;
    let w3 = &w2 * &w;
    let x2 = &x * &x;
    let y2 = &y * &y;
    let val = k0
        * (&z * &z * &z * &w
            + big(ctx.a_big) * &z * &w3
            + big(ctx.h2 as i128 * ctx.c as i128) * &w3 * &w)
        - 2 * (&x2 * &x2 - &y2 * &y2)
        - 2 * big(ctx.a() as i128) * (&x2 - &y2) * &w2
        - 2 * big(ctx.b() as i128) * (&x - &y) * &w3;
    narrow(val, "K(Z, X, Y, W)")
}

/// A context with all coefficients reduced modulo `p < 2^31` (any modulus).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedContext {
    p: u64,
    a: u64,
    b: u64,
    h1: u64,
    h2: u64,
    rho: u64,
    c: u64,
    big_a: u64,
}

impl ReducedContext {
    fn new(ctx: &QuarticContext, p: u64) -> Self {
        assert!(
            (1..1 << 31).contains(&p),
            "modulus too large for u64 products"
        );
        Self {
            p,
            a: reduce(ctx.a() as i128, p),
            b: reduce(ctx.b() as i128, p),
            h1: reduce(ctx.h1 as i128, p),
            h2: reduce(ctx.h2 as i128, p),
            rho: reduce(ctx.rho as i128, p),
            c: reduce(ctx.c as i128, p),
            big_a: reduce(ctx.a_big, p),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn m(&self, x: u64, y: u64) -> u64 {
        x * y % self.p
    }

    /// `f(x) mod p`.
    #[inline]
    pub fn f(&self, x: u64) -> u64 {
        let x2 = self.m(x, x);
        (self.m(x2, x2) + self.m(self.a, x2) + self.m(self.b, x)) % self.p
    }

    #[inline]
    pub fn f_form(&self, u: u64, v: u64) -> u64 {
        let h2v = self.m(self.h2, v);
        let hu = self.m(self.h1, u);
        let lead = self.m(self.m(h2v, h2v), v);
        let mid = self.m((self.m(hu, hu) + 2 * self.a) % self.p, v);
        (lead + mid + self.c) % self.p
    }

    #[inline]
    pub fn g_form(&self, u: u64, v: u64) -> u64 {
        let hhu = self.m(self.m(self.h1, self.h2), u);
        let cube = self.m(self.m(v, v), v);
        let mid = self.m((self.m(hhu, hhu) + 2 * self.a) % self.p, v);
        (cube + mid + self.m(self.h2, self.c)) % self.p
    }

    /// `rho G(rho, x) mod p`.
    #[inline]
    pub fn rho_g(&self, x: u64) -> u64 {
        self.m(self.rho, self.g_form(self.rho, x))
    }

    #[inline]
    pub fn h_form(&self, z1: u64, z2: u64, w: u64) -> u64 {
        (self.m(z1, z1) + self.m(z1, z2) + self.m(z2, z2) + self.m(self.big_a, self.m(w, w)))
            % self.p
    }

    fn k0(&self) -> u64 {
        self.m(self.m(self.h1, self.h2), self.rho)
    }

    fn sub(&self, x: u64, y: u64) -> u64 {
        (x + self.p - y) % self.p
    }

    pub fn k_form(&self, z: u64, x: u64, y: u64, w: u64) -> u64 {
        let p = self.p;
        let (w2, x2, y2) = (self.m(w, w), self.m(x, x), self.m(y, y));
        let w3 = self.m(w2, w);
        let head = (self.m(self.m(self.m(z, z), z), w)
            + self.m(self.big_a, self.m(z, w3))
            + self.m(self.m(self.h2, self.c), self.m(w3, w)))
            % p;
        let pos = self.m(self.k0(), head);
        let neg = (2 * self.sub(self.m(x2, x2), self.m(y2, y2))
            + 2 * self.m(self.a, self.m(self.sub(x2, y2), w2))
            + 2 * self.m(self.b, self.m(self.sub(x, y), w3)))
            % p;
        self.sub(pos, neg)
    }

    /// `(dK/dZ, dK/dX, dK/dY, dK/dW) mod p`.
    pub fn k_gradient(&self, z: u64, x: u64, y: u64, w: u64) -> [u64; 4] {
        let p = self.p;
        let k0 = self.k0();
        let (w2, z2) = (self.m(w, w), self.m(z, z));
        let w3 = self.m(w2, w);
        let dz = self.m(k0, (3 * self.m(z2, w) + self.m(self.big_a, w3)) % p);
        let cubic = |t: u64| self.m(self.m(t, t), t);
        let dx_pos =
            (8 * cubic(x) + 4 * self.m(self.a, self.m(x, w2)) + 2 * self.m(self.b, w3)) % p;
        let dy_pos =
            (8 * cubic(y) + 4 * self.m(self.a, self.m(y, w2)) + 2 * self.m(self.b, w3)) % p;
        let dw_head = (self.m(z2, z)
            + 3 * self.m(self.big_a, self.m(z, w2))
            + 4 * self.m(self.m(self.h2, self.c), w3))
            % p;
        let dw_neg = (4 * self.m(self.a, self.m(self.sub(self.m(x, x), self.m(y, y)), w))
            + 6 * self.m(self.b, self.m(self.sub(x, y), w2)))
            % p;
        let dw = self.sub(self.m(k0, dw_head), dw_neg);
        [dz, self.sub(0, dx_pos), dy_pos, dw]
    }
}

/// Projective points of `P^3(F_p)` (normalised so the first nonzero
/// coordinate is 1) where `K` and its four partial derivatives vanish.
pub fn k_singular_points_mod_p(ctx: &QuarticContext, p: u64) -> Result<Vec<[u64; 4]>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > SINGULAR_SCAN_CAP {
        return Err(Error::CapExceeded {
            what: "singularity scan prime",
            value: p as u128,
            cap: SINGULAR_SCAN_CAP as u128,
        });
    }
    let cp = ctx.reduced(p);
    let singular = |pt: [u64; 4]| {
        cp.k_form(pt[0], pt[1], pt[2], pt[3]) == 0
            && cp.k_gradient(pt[0], pt[1], pt[2], pt[3]) == [0; 4]
    };
    let mut out = Vec::new();
    for lead in 0..4usize {
        let free = 3 - lead;
        // Split on the first free coordinate; chunks are merged in order.
        let chunks: Vec<Vec<[u64; 4]>> = (0..if free == 0 { 1 } else { p })
            .into_par_iter()
            .map(|first| {
                let mut found = Vec::new();
                let rest = if free == 0 { 1 } else { p.pow(free as u32 - 1) };
                for idx in 0..rest {
                    let mut pt = [0u64; 4];
                    pt[lead] = 1;
                    if free > 0 {
                        pt[lead + 1] = first;
                        let mut k = idx;
                        for slot in pt.iter_mut().skip(lead + 2) {
                            *slot = k % p;
                            k /= p;
                        }
                    }
                    if singular(pt) {
                        found.push(pt);
                    }
                }
                found
            })
            .collect();
        out.extend(chunks.into_iter().flatten());
    }
    out.sort_unstable();
    Ok(out)
}

/// Why a prime was left out of a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exclusion {
    /// `p | 6 h1 h2 rho A`.
    Divides,
    /// `K` has a singular point modulo `p`.
    Singular,
}

/// Admissible primes `p <= Q` for a context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePool {
    ctx: QuarticContext,
    bound: u64,
    primes: Vec<u64>,
    excluded: Vec<(u64, Exclusion)>,
}

impl PrimePool {
    pub fn context(&self) -> &QuarticContext {
        &self.ctx
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn excluded(&self) -> &[(u64, Exclusion)] {
        &self.excluded
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    pub fn require(&self, p: u64) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::NotInPool {
                p,
                pool: self.primes.clone(),
            })
        }
    }
}

/// Primes `p <= q_bound` with `p` not dividing `6 h1 h2 rho A` and `K`
/// nonsingular modulo `p`.
pub fn build_prime_pool(ctx: &QuarticContext, q_bound: u64) -> Result<PrimePool> {
    if q_bound > SINGULAR_SCAN_CAP {
        return Err(Error::CapExceeded {
            what: "pool bound Q",
            value: q_bound as u128,
            cap: SINGULAR_SCAN_CAP as u128,
        });
    }
    if ctx.params.is_pure_power() {
        return Err(Error::InvalidContext(
            "(a, b) = (0, 0) has no prime pool".into(),
        ));
    }
    if ctx.a_big == 0 {
        return Err(Error::InvalidContext("A = 0".into()));
    }
    let mut primes = Vec::new();
    let mut excluded = Vec::new();
    let divisors = [
        6,
        ctx.h1 as i128,
        ctx.h2 as i128,
        ctx.rho as i128,
        ctx.a_big,
    ];
    for p in primes_up_to(q_bound) {
        if divisors.iter().any(|&d| reduce(d, p) == 0) {
            excluded.push((p, Exclusion::Divides));
        } else if !k_singular_points_mod_p(ctx, p)?.is_empty() {
            excluded.push((p, Exclusion::Singular));
        } else {
            primes.push(p);
        }
    }
    Ok(PrimePool {
        ctx: *ctx,
        bound: q_bound,
        primes,
        excluded,
    })
}

/// `#{x mod p : rho G(rho, x) = r F(r, s) mod p}`, at most 3.
pub fn nu_quartic(ctx: &QuarticContext, r: i128, s: i128, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let cp = ctx.reduced(p);
    let target = cp.m(reduce(r, p), cp.f_form(reduce(r, p), reduce(s, p)));
    Ok((0..p).filter(|&x| cp.rho_g(x) == target).count() as u64)
}

/// `(h1, h2, r, s, rho, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Reduced {
    pub h1: i64,
    pub h2: i64,
    pub r: i64,
    pub s: i64,
    pub rho: i64,
    pub sigma: i64,
}

impl Reduced {
    pub fn as_tuple(&self) -> (i64, i64, i64, i64, i64, i64) {
        (self.h1, self.h2, self.r, self.s, self.rho, self.sigma)
    }
}

/// A solution in canonical order with its intermediate and reduced
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformedSolution {
    pub params: QuarticParams,
    /// `(y1, y2, y3, y4)` with `y1 > y3 >= y4 > y2 >= 0`.
    pub original: [i64; 4],
    /// `(u1, u2, v1, v2)`.
    pub intermediate: [i64; 4],
    pub reduced: Reduced,
}

impl TransformedSolution {
    pub fn context(&self) -> Result<QuarticContext> {
        QuarticContext::new(
            self.params,
            self.reduced.h1,
            self.reduced.h2,
            self.reduced.rho,
        )
    }

    /// Both sides `r F(r, s)` and `rho G(rho, sigma)`.
    pub fn reduced_sides(&self) -> Result<(i128, i128)> {
        let ctx = self.context()?;
        let t = self.reduced;
        let lhs = big(t.r as i128) * big(eval_f_form(&ctx, t.r as i128, t.s as i128)?);
        let rhs = big(t.rho as i128) * big(eval_g_form(&ctx, t.rho as i128, t.sigma as i128)?);
        Ok((narrow(lhs, "r F(r, s)")?, narrow(rhs, "rho G(rho, sigma)")?))
    }
}

/// Puts a solution in canonical order: `y1` is the largest entry, `y2` its
/// partner, and `y3 >= y4`.
pub fn canonical_order(y: [i64; 4]) -> Result<[i64; 4]> {
    let first_has_max = y[0].max(y[1]) >= y[2].max(y[3]);
    let (p1, p2) = if first_has_max {
        ((y[0], y[1]), (y[2], y[3]))
    } else {
        ((y[2], y[3]), (y[0], y[1]))
    };
    let (y1, y2) = (p1.0.max(p1.1), p1.0.min(p1.1));
    let (y3, y4) = (p2.0.max(p2.1), p2.0.min(p2.1));
    let out = [y1, y2, y3, y4];
    if y1 > y3 && y3 >= y4 && y4 > y2 && y2 >= 0 {
        Ok(out)
    } else {
        Err(Error::NonCanonical(y))
    }
}

/// Maps a nontrivial solution to its reduced coordinates, checking every
/// side condition and the reduced equation exactly.
pub fn forward_transform(y: [i64; 4], params: QuarticParams) -> Result<TransformedSolution> {
    let f = |t: i64| params.eval(t as i128);
    if f(y[0])? + f(y[1])? != f(y[2])? + f(y[3])? {
        return Err(Error::NotASolution(y));
    }
    let mut left = [y[0], y[1]];
    let mut right = [y[2], y[3]];
    left.sort_unstable();
    right.sort_unstable();
    if left == right {
        return Err(Error::TrivialQuadruple(y));
    }
    let [y1, y2, y3, y4] = canonical_order(y)?;
    let (u1, u2, v1, v2) = (y1 - y3, y1 + y3, y4 - y2, y4 + y2);
    if u1 == v1 {
        return Err(Error::EqualDifferences(y));
    }
    let h1 = gcd(u1 as i128, v1 as i128) as i64;
    let h2 = gcd(u2 as i128, (v1 / h1) as i128) as i64;
    let reduced = Reduced {
        h1,
        h2,
        r: u1 / h1,
        s: u2 / h2,
        rho: v1 / (h1 * h2),
        sigma: v2,
    };
    let ts = TransformedSolution {
        params,
        original: [y1, y2, y3, y4],
        intermediate: [u1, u2, v1, v2],
        reduced,
    };

    let (r, s, rho) = (reduced.r as i128, reduced.s as i128, reduced.rho as i128);
    if gcd(r, h2 as i128 * rho) != 1 || gcd(s, rho) != 1 {
        return Err(Error::InvalidContext(format!(
            "coprimality fails for {:?}",
            reduced.as_tuple()
        )));
    }
    let (lhs, rhs) = ts.reduced_sides()?;
    if lhs != rhs {
        return Err(Error::InvalidContext(format!(
            "reduced equation fails for {:?}: {lhs} != {rhs}",
            reduced.as_tuple()
        )));
    }
    Ok(ts)
}

/// Recovers `(y1, y2, y3, y4)` from reduced coordinates.
pub fn reconstruct(t: &Reduced) -> Result<[i64; 4]> {
    let (u1, u2, v1, v2) = (t.h1 * t.r, t.h2 * t.s, t.h1 * t.h2 * t.rho, t.sigma);
    if (u1 + u2) % 2 != 0 || (v1 + v2) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "{:?} has mismatched parities",
            t.as_tuple()
        )));
    }
    Ok([(u2 + u1) / 2, (v2 - v1) / 2, (u2 - u1) / 2, (v2 + v1) / 2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionClass {
    N1,
    N2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: SolutionClass,
    pub big_a: i128,
    /// `c = 0` and `h2^2 rho^2 A^3 = r^2 A'^3` with `A' = h1^2 r^2 + 2a`.
    pub reduced_predicate: bool,
}

/// `N1` iff `|A| > C` and `max(h1, h2) <= H`.
pub fn classify_solution(
    ts: &TransformedSolution,
    c_bound: u64,
    h_bound: u64,
) -> Result<Classification> {
    let ctx = ts.context()?;
    let t = ts.reduced;
    let big_a = ctx.big_a();
    let class = if big_a.unsigned_abs() > c_bound as u128 && t.h1.max(t.h2) as u64 <= h_bound {
        SolutionClass::N1
    } else {
        SolutionClass::N2
    };
    let reduced_predicate = ctx.c() == 0 && {
        let a_prime: BigInt = big(t.h1 as i128 * t.h1 as i128) * big(t.r as i128 * t.r as i128)
            + 2 * big(ctx.a() as i128);
        let lhs = big(t.h2 as i128 * t.h2 as i128)
            * big(t.rho as i128 * t.rho as i128)
            * big(big_a).pow(3);
        let rhs = big(t.r as i128 * t.r as i128) * a_prime.pow(3);
        lhs == rhs
    };
    Ok(Classification {
        class,
        big_a,
        reduced_predicate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx11111() -> QuarticContext {
        QuarticContext::new(QuarticParams::new(1, 1), 1, 1, 1).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let n = normalize_quartic(1, 0, 0, 0, 0).unwrap();
        assert_eq!(
            (n.params, n.x_scale, n.x_shift, n.b4),
            (QuarticParams::new(0, 0), 4, 0, 0)
        );
        let n = normalize_quartic(1, 0, 0, 1, 0).unwrap();
        assert_eq!(
            (n.params.a, n.params.b, n.scale, n.x_scale),
            (0, 64, 256, 4)
        );
        let n = normalize_quartic(2, 1, 0, 0, 0).unwrap();
        assert_eq!(
            (n.b2, n.b3, n.b4, n.x_scale, n.x_shift, n.scale),
            (-6, 8, -3, 8, 1, 2048)
        );
        assert!(normalize_quartic(0, 1, 0, 0, 0).is_err());
    }

    #[test]
    fn normalization_matches_pointwise() {
        for coeffs in [[3, -2, 5, 7, -11], [1, 1, 1, 1, 1], [-2, 3, 0, 0, 4]] {
            let n =
                normalize_quartic(coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]).unwrap();
            for x in -5i128..=5 {
                let fx: i128 = coeffs.iter().fold(0, |acc, &c| acc * x + c as i128);
                let xx = n.x_scale * x + n.x_shift;
                assert_eq!(n.scale * fx, xx.pow(4) + n.b2 * xx * xx + n.b3 * xx + n.b4);
            }
        }
    }

    #[test]
    fn context_fields() {
        let ctx = ctx11111();
        assert_eq!((ctx.c(), ctx.big_a(), ctx.delta_cubic()), (2, 3, 35));
        assert!(QuarticContext::new(QuarticParams::new(0, 3), 1, 4, 1).is_err());
        assert_eq!(
            QuarticContext::new(QuarticParams::new(0, 3), 1, 3, 1)
                .unwrap()
                .c(),
            2
        );
        assert!(QuarticContext::new(QuarticParams::new(0, 1), 0, 1, 1).is_err());
    }

    #[test]
    fn fourth_power_example() {
        let ts = forward_transform([158, 59, 134, 133], QuarticParams::new(0, 0)).unwrap();
        assert_eq!(ts.intermediate, [24, 292, 74, 192]);
        assert_eq!(ts.reduced.as_tuple(), (2, 1, 12, 292, 37, 192));
        assert_eq!(ts.reduced_sides().unwrap(), (300_783_360, 300_783_360));
        assert_eq!(reconstruct(&ts.reduced).unwrap(), [158, 59, 134, 133]);
        // Any ordering of the same solution is accepted.
        let again = forward_transform([133, 134, 59, 158], QuarticParams::new(0, 0)).unwrap();
        assert_eq!(again, ts);
    }

    #[test]
    fn transform_errors_are_distinct() {
        let p = QuarticParams::new(0, 0);
        assert_eq!(
            forward_transform([1, 2, 3, 4], p).unwrap_err(),
            Error::NotASolution([1, 2, 3, 4])
        );
        assert_eq!(
            forward_transform([5, 3, 3, 5], p).unwrap_err(),
            Error::TrivialQuadruple([5, 3, 3, 5])
        );
        // f(x) = x^4 - 5x^2 has f(1) = f(2) = -4.
        let q = QuarticParams::new(-5, 0);
        assert_eq!(
            forward_transform([2, 0, 1, 0], q).unwrap_err(),
            Error::NonCanonical([2, 0, 1, 0])
        );
        // f(x) = x^4 - 16x^2: f(3) + f(0) = f(2) + f(1) with u1 = v1 = 1.
        let r = QuarticParams::new(-16, 0);
        let y = [3, 0, 2, 1];
        assert_eq!(
            forward_transform(y, r).unwrap_err(),
            Error::EqualDifferences(y)
        );
    }

    #[test]
    fn classification_examples() {
        let ts = forward_transform([158, 59, 134, 133], QuarticParams::new(0, 0)).unwrap();
        let c = classify_solution(&ts, 1, 2).unwrap();
        assert_eq!((c.class, c.big_a), (SolutionClass::N1, 5476));
        assert_eq!(
            classify_solution(&ts, 1, 1).unwrap().class,
            SolutionClass::N2
        );
        assert_eq!(
            classify_solution(&ts, 1, 0).unwrap().class,
            SolutionClass::N2
        );
        assert_eq!(
            classify_solution(&ts, 10_000, 2).unwrap().class,
            SolutionClass::N2
        );
        assert!(!c.reduced_predicate);
    }

    #[test]
    fn symmetric_f_form() {
        let ctx = QuarticContext::new(QuarticParams::new(0, 0), 1, 1, 1).unwrap();
        for u in -6..=6i128 {
            for v in -6..=6i128 {
                assert_eq!(
                    u * eval_f_form(&ctx, u, v).unwrap(),
                    u * v * (u * u + v * v)
                );
            }
        }
    }

    #[test]
    fn k_restricts_to_boundary() {
        let ctx = QuarticContext::new(QuarticParams::new(3, -4), 2, 2, 5).unwrap();
        for (x, y) in [(1, 2), (-3, 5), (7, 0)] {
            assert_eq!(
                eval_k_form(&ctx, 11, x, y, 0).unwrap(),
                2 * (y.pow(4) - x.pow(4))
            );
        }
    }

    #[test]
    fn mod_p_forms_match_exact() {
        let ctx = QuarticContext::new(QuarticParams::new(-3, 7), 3, 1, 2).unwrap();
        let p = 13;
        let cp = ctx.reduced(p);
        for t in [
            (-4i128, 5i128, 2i128, 9i128),
            (0, 1, -7, 3),
            (12, -12, 6, -1),
        ] {
            let (z, x, y, w) = t;
            let r = |v: i128| reduce(v, p);
            assert_eq!(cp.f_form(r(z), r(x)), r(eval_f_form(&ctx, z, x).unwrap()));
            assert_eq!(cp.g_form(r(z), r(x)), r(eval_g_form(&ctx, z, x).unwrap()));
            assert_eq!(
                cp.h_form(r(z), r(x), r(w)),
                r(eval_h_form(&ctx, z, x, w).unwrap())
            );
            assert_eq!(
                cp.k_form(r(z), r(x), r(y), r(w)),
                r(eval_k_form(&ctx, z, x, y, w).unwrap())
            );
            assert_eq!(cp.f(r(x)), r(ctx.params().eval(x).unwrap()));
        }
    }

    #[test]
    fn gradient_satisfies_euler_relation() {
        let ctx = QuarticContext::new(QuarticParams::new(2, 5), 1, 5, 3).unwrap();
        let p = 31;
        let cp = ctx.reduced(p);
        for z in 0..p {
            for w in [0, 1, 7] {
                let (x, y) = ((z * 3 + 1) % p, (z * 5 + 2) % p);
                let g = cp.k_gradient(z, x, y, w);
                let euler = (g[0] * z + g[1] * x + g[2] * y + g[3] * w) % p;
                assert_eq!(euler, 4 * cp.k_form(z, x, y, w) % p);
            }
        }
    }

    #[test]
    fn singular_scan_example() {
        // Independent symbolic oracle: the only singular point mod 5.
        assert_eq!(
            k_singular_points_mod_p(&ctx11111(), 5).unwrap(),
            vec![[1, 2, 4, 3]]
        );
        assert!(k_singular_points_mod_p(&ctx11111(), 103).is_err());
        // p | A: the scan still runs.
        k_singular_points_mod_p(&ctx11111(), 3).unwrap();
    }

    #[test]
    fn pool_examples() {
        let pool = build_prime_pool(&ctx11111(), 20).unwrap();
        assert!(!pool.contains(2) && !pool.contains(3));
        // Cross-checked against an independent symbolic singularity search.
        assert_eq!(pool.primes(), &[7, 11, 13, 17, 19]);
        assert!(pool.excluded().contains(&(5, Exclusion::Singular)));
        let rho3 = build_prime_pool(&ctx11111().with_rho(3).unwrap(), 20).unwrap();
        assert_eq!(rho3.primes(), &[5, 13, 17, 19]);
        assert!(rho3.excluded().contains(&(7, Exclusion::Singular)));
        assert!(rho3.excluded().contains(&(11, Exclusion::Divides)));
        assert!(build_prime_pool(&ctx11111(), 2)
            .unwrap()
            .primes()
            .is_empty());
        let zero_a = QuarticContext::new(QuarticParams::new(-1, 2), 1, 1, 1).unwrap();
        assert_eq!(zero_a.big_a(), -1);
        let zero_a = QuarticContext::new(QuarticParams::new(-2, 2), 2, 1, 1).unwrap();
        assert_eq!(zero_a.big_a(), 0);
        assert!(build_prime_pool(&zero_a, 20).is_err());
        let pure = QuarticContext::new(QuarticParams::new(0, 0), 1, 1, 1).unwrap();
        assert!(build_prime_pool(&pure, 20).is_err());
    }

    #[test]
    fn nu_quartic_examples() {
        assert_eq!(nu_quartic(&ctx11111(), 1, 1, 5).unwrap(), 2);
        let ctx = ctx11111();
        for p in [5u64, 7, 11, 13] {
            for r in 0..p as i128 {
                for s in 0..p as i128 {
                    assert!(nu_quartic(&ctx, r, s, p).unwrap() <= 3);
                }
            }
        }
        // b = 0 and r = 0: roots of x^3 + A x.
        let ctx = QuarticContext::new(QuarticParams::new(1, 0), 1, 1, 1).unwrap();
        let p = 7;
        let expect = (0..p as i128)
            .filter(|x| (x * x * x + 3 * x) % p as i128 == 0)
            .count() as u64;
        assert_eq!(nu_quartic(&ctx, 0, 4, p).unwrap(), expect);
    }
}
