//! `Psi_{i,j}(m, n)` modulo `L = p q rho`:
//!
//! ```text
//! Psi_{i,j}(m, n) = sum_{(r, s) mod L, gcd(rho, r s) = 1, F(r, s) = 0 mod rho}
//!                   nu_p(r, s)^i nu_q(r, s)^j e_L(m r + n s)
//! ```
//!
//! For `p != q`, with `pq b + rho c = 1` and `p p' + q q' = 1`,
//! `Psi = Sigma_i(p; c q' m, c q' n) Sigma_j(q; c p' m, c p' n) Phi(rho; b m, b n)`.
//! For `p = q`, with `p b + rho c = 1`, `Psi` vanishes unless
//! `(m, n) = p (m', n')`, and then equals
//! `p^2 Sigma_{i+j}(p; c m', c n') Phi(rho; b m', b n')`.
//!
//! Counting lattice points `(r, s)` in `(0, Y1] x (0, Y2]` by residue class
//! gives `S_{i,j} = L^{-2} sum_{m, n} Gamma(Y1, m) Gamma(Y2, n) Psi_{i,j}(m, n)`.

use num::bigint::BigInt;
use num::BigRational;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma_sum;
use super::local::LocalTables;
use super::phi::phi_points;
use crate::modarith::{ext_gcd, gcd_u64, is_prime, reduce};
use crate::numeric::{all_frequencies, dft2_sparse, CompensatedSum, RootsOfUnity};
use crate::quartic::QuarticContext;
use crate::sieve::coeff_c;
use crate::{Error, Result};

/// Largest `p q rho` enumerated directly.
pub const PSI_MODULUS_CAP: u64 = 2000;

/// Largest box parameter `B` for the Fourier reconstruction.
pub const FOURIER_BOX_CAP: u64 = 200;

fn check_moduli(ctx: &QuarticContext, p: u64, q: u64) -> Result<u64> {
    for r in [p, q] {
        if r == 2 || !is_prime(r) {
            return Err(Error::NotOddPrime(r));
        }
    }
    let rho = ctx.rho() as u64;
    for r in [p, q] {
        if rho.is_multiple_of(r) {
            return Err(Error::NonCoprimeModuli(r, rho));
        }
    }
    Ok(p * q * rho)
}

fn check_cap(modulus: u64) -> Result<u64> {
    if modulus > PSI_MODULUS_CAP {
        return Err(Error::CapExceeded {
            what: "p q rho",
            value: modulus as u128,
            cap: PSI_MODULUS_CAP as u128,
        });
    }
    Ok(modulus)
}

fn check_indices(i: u32, j: u32) -> Result<()> {
    if i > 2 || j > 2 {
        return Err(Error::InvalidArgument(format!(
            "(i, j) = ({i}, {j}) outside 0..=2"
        )));
    }
    Ok(())
}

/// Bezout cofactors. For `p != q`: `pq * pq_bar + rho * rho_bar = 1` and
/// `p * p_prime + q * q_prime = 1`. For `p = q`: `p * pq_bar + rho * rho_bar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutCofactors {
    pub pq_bar: i128,
    pub rho_bar: i128,
    pub p_prime: i128,
    pub q_prime: i128,
}

impl BezoutCofactors {
    pub fn standard(p: u64, q: u64, rho: u64) -> Result<Self> {
        let outer = if p == q { p } else { p * q } as i128;
        let (g, pq_bar, rho_bar) = ext_gcd(outer, rho as i128);
        if g != 1 {
            return Err(Error::NonCoprimeModuli(outer as u64, rho));
        }
        let (p_prime, q_prime) = if p == q {
            (0, 0)
        } else {
            let (g, a, b) = ext_gcd(p as i128, q as i128);
            if g != 1 {
                return Err(Error::NonCoprimeModuli(p, q));
            }
            (a, b)
        };
        Ok(Self {
            pq_bar,
            rho_bar,
            p_prime,
            q_prime,
        })
    }

    /// Another valid choice: `pq_bar + k1 rho`, `rho_bar - k1 pq`,
    /// `p' + k2 q`, `q' - k2 p`.
    pub fn shifted(&self, p: u64, q: u64, rho: u64, k1: i128, k2: i128) -> Self {
        let outer = if p == q { p } else { p * q } as i128;
        let (p_prime, q_prime) = if p == q {
            (0, 0)
        } else {
            (self.p_prime + k2 * q as i128, self.q_prime - k2 * p as i128)
        };
        Self {
            pq_bar: self.pq_bar + k1 * rho as i128,
            rho_bar: self.rho_bar - k1 * outer,
            p_prime,
            q_prime,
        }
    }

    fn holds(&self, p: u64, q: u64, rho: u64) -> bool {
        let outer = if p == q { p } else { p * q } as i128;
        outer * self.pq_bar + rho as i128 * self.rho_bar == 1
            && (p == q || p as i128 * self.p_prime + q as i128 * self.q_prime == 1)
    }
}

/// The weight grid of `Psi_{i,j}` modulo `p q rho`.
#[derive(Debug, Clone)]
pub struct PsiWeights {
    modulus: u64,
    entries: Vec<(u64, u64, f64)>,
    total: u128,
}

impl PsiWeights {
    pub fn new(ctx: &QuarticContext, p: u64, q: u64, i: u32, j: u32) -> Result<Self> {
        check_indices(i, j)?;
        let modulus = check_cap(check_moduli(ctx, p, q)?)?;
        let rho = ctx.rho() as u64;
        let (tp, tq) = (LocalTables::new(ctx, p)?, LocalTables::new(ctx, q)?);
        let red = ctx.reduced(rho);
        let mut entries = Vec::new();
        let mut total = 0u128;
        for r in 0..modulus {
            if gcd_u64(r % rho, rho) != 1 {
                continue;
            }
            for s in 0..modulus {
                if gcd_u64(s % rho, rho) != 1 || red.f_form(r % rho, s % rho) != 0 {
                    continue;
                }
                let w = (tp.nu(r, s) as u64).pow(i) * (tq.nu(r, s) as u64).pow(j);
                if w != 0 {
                    entries.push((r, s, w as f64));
                    total += w as u128;
                }
            }
        }
        Ok(Self {
            modulus,
            entries,
            total,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `Psi(0, 0)`, exactly.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn value(&self, m: i128, n: i128) -> Complex64 {
        let l = self.modulus;
        let roots = RootsOfUnity::new(l);
        let (m, n) = (reduce(m, l), reduce(n, l));
        self.entries
            .iter()
            .map(|&(r, s, w)| roots.at((m * r + n * s) % l) * w)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Values on `ms x ns`, row-major in `ms`.
    pub fn values(&self, ms: &[u64], ns: &[u64]) -> Vec<Complex64> {
        dft2_sparse(&self.entries, self.modulus, ms, ns)
    }
}

/// `Psi_{i,j}(m, n)` by enumeration of `(r, s) mod p q rho`.
pub fn psi_direct(
    ctx: &QuarticContext,
    p: u64,
    q: u64,
    i: u32,
    j: u32,
    m: i128,
    n: i128,
) -> Result<Complex64> {
    Ok(PsiWeights::new(ctx, p, q, i, j)?.value(m, n))
}

/// The local factors of `Psi`, built once per `(ctx, p, q)`.
#[derive(Debug, Clone)]
pub struct PsiFactors {
    p: u64,
    q: u64,
    rho: u64,
    tp: LocalTables,
    tq: LocalTables,
    rho_points: Vec<(u64, u64)>,
}

impl PsiFactors {
    pub fn new(ctx: &QuarticContext, p: u64, q: u64) -> Result<Self> {
        check_moduli(ctx, p, q)?;
        let rho = ctx.rho() as u64;
        Ok(Self {
            p,
            q,
            rho,
            tp: LocalTables::new(ctx, p)?,
            tq: LocalTables::new(ctx, q)?,
            rho_points: phi_points(ctx, rho)?,
        })
    }

    fn phi(&self, m: i128, n: i128) -> Complex64 {
        let rho = self.rho;
        let roots = RootsOfUnity::new(rho);
        let (m, n) = (reduce(m, rho), reduce(n, rho));
        self.rho_points
            .iter()
            .map(|&(r, s)| roots.at((m * r + n * s) % rho))
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn value(
        &self,
        i: u32,
        j: u32,
        m: i128,
        n: i128,
        cof: &BezoutCofactors,
    ) -> Result<Complex64> {
        check_indices(i, j)?;
        let (p, q, rho) = (self.p, self.q, self.rho);
        if !cof.holds(p, q, rho) {
            return Err(Error::InvalidArgument(format!(
                "{cof:?} are not Bezout cofactors"
            )));
        }
        if p != q {
            let cq = cof.rho_bar % p as i128 * (cof.q_prime % p as i128);
            let cp = cof.rho_bar % q as i128 * (cof.p_prime % q as i128);
            let b = cof.pq_bar % rho as i128;
            let sp = self
                .tp
                .sigma(i, cq * (m % p as i128), cq * (n % p as i128))?;
            let sq = self
                .tq
                .sigma(j, cp * (m % q as i128), cp * (n % q as i128))?;
            let f = self.phi(b * (m % rho as i128), b * (n % rho as i128));
            return Ok(sp * sq * f);
        }
        let l = (p * p * rho) as i128;
        let (m, n) = (m.rem_euclid(l), n.rem_euclid(l));
        if m % p as i128 != 0 || n % p as i128 != 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (m1, n1) = (m / p as i128, n / p as i128);
        let c = cof.rho_bar % p as i128;
        let b = cof.pq_bar % rho as i128;
        let s = self
            .tp
            .sigma(i + j, c * (m1 % p as i128), c * (n1 % p as i128))?;
        let f = self.phi(b * (m1 % rho as i128), b * (n1 % rho as i128));
        Ok(s * f * (p * p) as f64)
    }

    /// `Psi(0, 0)`, exactly.
    pub fn zero_value(&self, i: u32, j: u32) -> Result<u128> {
        let count = self.rho_points.len() as u128;
        if self.p == self.q {
            Ok((self.p * self.p) as u128 * self.tp.sigma_zero(i + j)? as u128 * count)
        } else {
            Ok(self.tp.sigma_zero(i)? as u128 * self.tq.sigma_zero(j)? as u128 * count)
        }
    }

    /// `Psi(m, n)` for all residues modulo `p q rho`, at index `m * L + n`.
    pub fn grid(&self, i: u32, j: u32) -> Result<Vec<Complex64>> {
        check_indices(i, j)?;
        let (p, q, rho) = (self.p, self.q, self.rho);
        let l = check_cap(p * q * rho)?;
        let cof = BezoutCofactors::standard(p, q, rho)?;
        let rho_freq = all_frequencies(rho);
        let phi_grid = dft2_sparse(
            &self
                .rho_points
                .iter()
                .map(|&(r, s)| (r, s, 1.0))
                .collect::<Vec<_>>(),
            rho,
            &rho_freq,
            &rho_freq,
        );
        let b = reduce(cof.pq_bar, rho);
        let mut out = vec![Complex64::new(0.0, 0.0); (l * l) as usize];
        if p != q {
            let (gp, gq) = (self.tp.sigma_grid(i)?, self.tq.sigma_grid(j)?);
            let cq = reduce(cof.rho_bar * cof.q_prime, p);
            let cp = reduce(cof.rho_bar * cof.p_prime, q);
            for m in 0..l {
                for n in 0..l {
                    let a = gp[((cq * (m % p) % p) * p + cq * (n % p) % p) as usize];
                    let c = gq[((cp * (m % q) % q) * q + cp * (n % q) % q) as usize];
                    let f = phi_grid[((b * (m % rho) % rho) * rho + b * (n % rho) % rho) as usize];
                    out[(m * l + n) as usize] = a * c * f;
                }
            }
        } else {
            let g = self.tp.sigma_grid(i + j)?;
            let c = reduce(cof.rho_bar, p);
            for m in (0..l).step_by(p as usize) {
                for n in (0..l).step_by(p as usize) {
                    let (m1, n1) = (m / p, n / p);
                    let a = g[((c * (m1 % p) % p) * p + c * (n1 % p) % p) as usize];
                    let f =
                        phi_grid[((b * (m1 % rho) % rho) * rho + b * (n1 % rho) % rho) as usize];
                    out[(m * l + n) as usize] = a * f * (p * p) as f64;
                }
            }
        }
        Ok(out)
    }
}

/// `Psi_{i,j}(m, n)` assembled from `Sigma_i`, `Sigma_j` and `Phi`.
pub fn psi_factored(
    ctx: &QuarticContext,
    p: u64,
    q: u64,
    i: u32,
    j: u32,
    m: i128,
    n: i128,
) -> Result<Complex64> {
    let cof = BezoutCofactors::standard(p, q, ctx.rho() as u64)?;
    PsiFactors::new(ctx, p, q)?.value(i, j, m, n, &cof)
}

fn box_sides(ctx: &QuarticContext, b: u64) -> Result<(u64, u64)> {
    if b > FOURIER_BOX_CAP {
        return Err(Error::CapExceeded {
            what: "box B",
            value: b as u128,
            cap: FOURIER_BOX_CAP as u128,
        });
    }
    Ok((2 * b / ctx.h1() as u64, 2 * b / ctx.h2() as u64))
}

/// `S_{i,j}` by summing over `(r, s)` in `(0, 2B/h1] x (0, 2B/h2]` with
/// `gcd(r s, rho) = 1` and `F(r, s) = 0 mod rho`.
pub fn s_ij_direct(ctx: &QuarticContext, b: u64, p: u64, q: u64, i: u32, j: u32) -> Result<u128> {
    check_indices(i, j)?;
    check_moduli(ctx, p, q)?;
    let (y1, y2) = box_sides(ctx, b)?;
    let rho = ctx.rho() as u64;
    let red = ctx.reduced(rho);
    let (tp, tq) = (LocalTables::new(ctx, p)?, LocalTables::new(ctx, q)?);
    let mut total = 0u128;
    for r in 1..=y1 {
        for s in 1..=y2 {
            if gcd_u64(r * s, rho) == 1 && red.f_form(r % rho, s % rho) == 0 {
                total += ((tp.nu(r, s) as u64).pow(i) * (tq.nu(r, s) as u64).pow(j)) as u128;
            }
        }
    }
    Ok(total)
}

/// `S_{i,j}` reconstructed from `Gamma` and the factored `Psi`.
pub fn s_ij_fourier(
    ctx: &QuarticContext,
    b: u64,
    p: u64,
    q: u64,
    i: u32,
    j: u32,
) -> Result<Complex64> {
    let (y1, y2) = box_sides(ctx, b)?;
    let factors = PsiFactors::new(ctx, p, q)?;
    let l = p * q * ctx.rho() as u64;
    let grid = factors.grid(i, j)?;
    let g1: Vec<Complex64> = (0..l).map(|m| gamma_sum(y1, m as i128, l)).collect();
    let g2: Vec<Complex64> = (0..l).map(|n| gamma_sum(y2, n as i128, l)).collect();
    let mut acc = CompensatedSum::new();
    for m in 0..l as usize {
        let row: CompensatedSum = (0..l as usize)
            .map(|n| g2[n] * grid[m * l as usize + n])
            .collect();
        acc.add(g1[m] * row.value());
    }
    Ok(acc.value() / (l * l) as f64)
}

/// `M_{i,j} = 4 Psi_{i,j}(0, 0) B^2 / (h1 h2 (p q rho)^2)`.
pub fn m_ij(ctx: &QuarticContext, b: u64, p: u64, q: u64, i: u32, j: u32) -> Result<BigRational> {
    let psi0 = PsiFactors::new(ctx, p, q)?.zero_value(i, j)?;
    main_term(ctx, b, p, q, psi0)
}

fn main_term(ctx: &QuarticContext, b: u64, p: u64, q: u64, psi0: u128) -> Result<BigRational> {
    let l = BigInt::from(p) * BigInt::from(q) * BigInt::from(ctx.rho());
    let num = BigInt::from(4u32) * BigInt::from(psi0) * BigInt::from(b) * BigInt::from(b);
    let den = BigInt::from(ctx.h1()) * BigInt::from(ctx.h2()) * &l * &l;
    Ok(BigRational::new(num, den))
}

/// `sum_{i,j} c_{i,j}(1) M_{i,j}` with the cubic coefficients, for `p != q`.
pub fn alpha_one_main_term(ctx: &QuarticContext, b: u64, p: u64, q: u64) -> Result<BigRational> {
    if p == q {
        return Err(Error::InvalidArgument(
            "the main-term cancellation needs p != q".into(),
        ));
    }
    let factors = PsiFactors::new(ctx, p, q)?;
    let mut total = BigRational::from_integer(BigInt::from(0));
    for i in 0..3u32 {
        for j in 0..3u32 {
            let c = coeff_c(i as usize, j as usize, 1, 3)?;
            total += main_term(ctx, b, p, q, factors.zero_value(i, j)?)? * BigInt::from(c);
        }
    }
    Ok(total)
}
