//! Sums modulo a single prime `p`.
//!
//! `nu(r, s) = #{x : rho G(rho, x) = r F(r, s)}` and
//!
//! ```text
//! Sigma_t(p; M, N) = sum_{r, s} nu(r, s)^t e_p(M r + N s)
//! S_p(c)           = sum_{h1 h2 rho G(rho, z) = 2(f(x) - f(y))} e_p(c1 x + c2 y)
//! T_p(c)           = the same over (x, y, z1, z2) with H(z1, z2, 1) = 0
//! ```
//!
//! The substitution `x = (h1 r + h2 s) / 2`, `y = (-h1 r + h2 s) / 2` turns
//! `Sigma_1(M, N)` into `S_p(M/h1 + N/h2, -M/h1 + N/h2)`, and splitting
//! `nu^2` by whether the two roots coincide gives
//! `Sigma_2 = Sigma_1 + T_p(...) - D` with `D` supported on `3x^2 + A = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PhaseHistogram;
use crate::modarith::{is_prime, mod_inv, reduce};
use crate::numeric::{all_frequencies, dft2_sparse};
use crate::quartic::{PrimePool, QuarticContext, ReducedContext};
use crate::{Error, Result};

/// Largest prime for which the local tables are built.
pub const LOCAL_PRIME_CAP: u64 = 101;

/// Largest power `t` in `Sigma_t`.
pub const MAX_T: u32 = 4;

/// Precomputed root counts for one context and prime.
#[derive(Debug, Clone)]
pub struct LocalTables {
    ctx: QuarticContext,
    p: u64,
    red: ReducedContext,
    /// `nu(r, s)` at index `r * p + s`.
    nu: Vec<u8>,
}

impl LocalTables {
    pub fn new(ctx: &QuarticContext, p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > LOCAL_PRIME_CAP {
            return Err(Error::CapExceeded {
                what: "local prime",
                value: p as u128,
                cap: LOCAL_PRIME_CAP as u128,
            });
        }
        let red = ctx.reduced(p);
        let mut roots_at = vec![0u8; p as usize];
        for x in 0..p {
            roots_at[red.rho_g(x) as usize] += 1;
        }
        let mut nu = Vec::with_capacity((p * p) as usize);
        for r in 0..p {
            for s in 0..p {
                nu.push(roots_at[(r * red.f_form(r, s) % p) as usize]);
            }
        }
        Ok(Self {
            ctx: *ctx,
            p,
            red,
            nu,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn context(&self) -> &QuarticContext {
        &self.ctx
    }

    #[inline]
    pub fn nu(&self, r: u64, s: u64) -> u8 {
        self.nu[((r % self.p) * self.p + s % self.p) as usize]
    }

    fn check_t(t: u32) -> Result<()> {
        if t > MAX_T {
            return Err(Error::InvalidArgument(format!("t = {t} exceeds {MAX_T}")));
        }
        Ok(())
    }

    /// Histogram over rows `r` and columns `s` with the given per-cell weight.
    fn grid_hist(&self, m: i128, n: i128, weight: impl Fn(u64, u64) -> i64) -> PhaseHistogram {
        let p = self.p;
        let (m, n) = (reduce(m, p), reduce(n, p));
        let mut h = PhaseHistogram::new(p).expect("p is prime");
        for r in 0..p {
            for s in 0..p {
                let w = weight(r, s);
                if w != 0 {
                    h.add((m * r + n * s) % p, w);
                }
            }
        }
        h
    }

    pub fn sigma_hist(&self, t: u32, m: i128, n: i128) -> Result<PhaseHistogram> {
        Self::check_t(t)?;
        Ok(self.grid_hist(m, n, |r, s| (self.nu(r, s) as i64).pow(t)))
    }

    pub fn sigma(&self, t: u32, m: i128, n: i128) -> Result<Complex64> {
        Ok(self.sigma_hist(t, m, n)?.value())
    }

    /// `Sigma_t(p; 0, 0) = sum nu^t`.
    pub fn sigma_zero(&self, t: u32) -> Result<u64> {
        Self::check_t(t)?;
        Ok(self.nu.iter().map(|&v| (v as u64).pow(t)).sum())
    }

    /// `Sigma_t(p; M, N)` for all `(M, N)`, at index `M * p + N`.
    pub fn sigma_grid(&self, t: u32) -> Result<Vec<Complex64>> {
        Self::check_t(t)?;
        let p = self.p;
        let entries: Vec<(u64, u64, f64)> = (0..p)
            .flat_map(|r| (0..p).map(move |s| (r, s)))
            .filter_map(|(r, s)| {
                let w = (self.nu(r, s) as u64).pow(t);
                (w != 0).then_some((r, s, w as f64))
            })
            .collect();
        let freqs = all_frequencies(p);
        Ok(dft2_sparse(&entries, p, &freqs, &freqs))
    }

    /// Per value `v`, the number of `z` with `h1 h2 rho G(rho, z) = v`,
    /// each weighted by `#{z2 : H(z, z2, 1) = 0}` when `with_h` is set.
    fn z_weights(&self, with_h: bool) -> Vec<i64> {
        let p = self.p;
        let hh = reduce(self.ctx.h1() as i128 * self.ctx.h2() as i128, p);
        let mut out = vec![0i64; p as usize];
        for z in 0..p {
            let w = if with_h {
                (0..p).filter(|&z2| self.red.h_form(z, z2, 1) == 0).count() as i64
            } else {
                1
            };
            out[(hh * self.red.rho_g(z) % p) as usize] += w;
        }
        out
    }

    /// Per `(x, y)`, the weight of `z` (or `(z1, z2)`) solving the `S_p`
    /// (or `T_p`) equation.
    fn xy_weight(&self, zw: &[i64], x: u64, y: u64) -> i64 {
        let p = self.p;
        let diff = (self.red.f(x) + p - self.red.f(y)) % p;
        zw[(2 * diff % p) as usize]
    }

    pub fn s_hist(&self, c1: i128, c2: i128) -> PhaseHistogram {
        let zw = self.z_weights(false);
        self.grid_hist(c1, c2, |x, y| self.xy_weight(&zw, x, y))
    }

    pub fn t_hist(&self, c1: i128, c2: i128) -> PhaseHistogram {
        let zw = self.z_weights(true);
        self.grid_hist(c1, c2, |x, y| self.xy_weight(&zw, x, y))
    }

    fn xy_grid(&self, with_h: bool) -> Vec<Complex64> {
        let p = self.p;
        let zw = self.z_weights(with_h);
        let entries: Vec<(u64, u64, f64)> = (0..p)
            .flat_map(|x| (0..p).map(move |y| (x, y)))
            .filter_map(|(x, y)| {
                let w = self.xy_weight(&zw, x, y);
                (w != 0).then_some((x, y, w as f64))
            })
            .collect();
        let freqs = all_frequencies(p);
        dft2_sparse(&entries, p, &freqs, &freqs)
    }

    /// `S_p(c1, c2)` for all `c`, at index `c1 * p + c2`.
    pub fn s_grid(&self) -> Vec<Complex64> {
        self.xy_grid(false)
    }

    /// `T_p(c1, c2)` for all `c`, at index `c1 * p + c2`.
    pub fn t_grid(&self) -> Vec<Complex64> {
        self.xy_grid(true)
    }

    /// Per value `v = r F(r, s)`, the number of ordered `(x1, x2)` with
    /// `x1 != x2`, `H(x1, x2, 1) = 0` and `rho G(rho, x1) = v`.
    fn off_diagonal_weights(&self) -> Vec<i64> {
        let p = self.p;
        let mut out = vec![0i64; p as usize];
        for x1 in 0..p {
            let k = (0..p)
                .filter(|&x2| x2 != x1 && self.red.h_form(x1, x2, 1) == 0)
                .count() as i64;
            out[self.red.rho_g(x1) as usize] += k;
        }
        out
    }

    /// Per value `v`, the number of `x` with `3x^2 + A = 0` and
    /// `rho G(rho, x) = v`.
    fn diagonal_weights(&self) -> Vec<i64> {
        let p = self.p;
        let mut out = vec![0i64; p as usize];
        for x in 0..p {
            if self.red.h_form(x, x, 1) == 0 {
                out[self.red.rho_g(x) as usize] += 1;
            }
        }
        out
    }

    fn rs_hist(&self, m: i128, n: i128, by_value: &[i64]) -> PhaseHistogram {
        let p = self.p;
        self.grid_hist(m, n, |r, s| {
            by_value[(r * self.red.f_form(r, s) % p) as usize]
        })
    }

    /// `(M / h1 + N / h2, -M / h1 + N / h2) mod p`; needs `p` odd and
    /// coprime to `h1 h2`.
    pub fn twist_to_xy(&self, m: i128, n: i128) -> Result<(i128, i128)> {
        let p = self.p;
        if p == 2 {
            return Err(Error::NotOddPrime(p));
        }
        let inv = |h: i64| {
            mod_inv(h as i128, p).ok_or(Error::Divisible {
                what: "h",
                p,
                value: h as i128,
            })
        };
        let (i1, i2) = (inv(self.ctx.h1())? as i128, inv(self.ctx.h2())? as i128);
        let (a, b) = (reduce(m * i1, p) as i128, reduce(n * i2, p) as i128);
        Ok(((a + b) % p as i128, (b - a).rem_euclid(p as i128)))
    }
}

/// `Sigma_t(p; M, N)` for a pool prime.
pub fn sigma_t(pool: &PrimePool, p: u64, m: i128, n: i128, t: u32) -> Result<Complex64> {
    pool.require(p)?;
    LocalTables::new(pool.context(), p)?.sigma(t, m, n)
}

/// `S_p(c1, c2)`.
pub fn s_p(ctx: &QuarticContext, c1: i128, c2: i128, p: u64) -> Result<Complex64> {
    Ok(LocalTables::new(ctx, p)?.s_hist(c1, c2).value())
}

/// `T_p(c1, c2)`.
pub fn t_p(ctx: &QuarticContext, c1: i128, c2: i128, p: u64) -> Result<Complex64> {
    Ok(LocalTables::new(ctx, p)?.t_hist(c1, c2).value())
}

/// The pieces of `Sigma_2(p; M, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma2Split {
    pub p: u64,
    pub m: i64,
    pub n: i64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    /// Contribution of `x1 != x2` with `H(x1, x2, 1) = 0`.
    pub off_diagonal: Complex64,
    /// Contribution of `x1 = x2` with `3 x1^2 + A = 0`.
    pub diagonal: Complex64,
    /// `T_p` at the transformed twist.
    pub t_p: Complex64,
    /// `Sigma_1 = S_p(transformed twist)` in `Z[zeta_p]`.
    pub sigma1_matches_s_p: bool,
    /// `Sigma_2 = Sigma_1 + off_diagonal` in `Z[zeta_p]`.
    pub sigma2_splits: bool,
    /// `off_diagonal = T_p - diagonal` in `Z[zeta_p]`.
    pub off_diagonal_matches_t_p: bool,
}

impl Sigma2Split {
    pub fn exact(&self) -> bool {
        self.sigma1_matches_s_p && self.sigma2_splits && self.off_diagonal_matches_t_p
    }

    /// `|D| <= 8p`: at most two diagonal roots, each meeting at most `4p`
    /// points `(r, s)`.
    pub fn diagonal_within_bound(&self) -> bool {
        self.diagonal.norm() <= 8.0 * self.p as f64 + 1e-9
    }
}

/// Decomposes `Sigma_2(p; M, N)` exactly. Needs `p` odd and coprime to
/// `h1 h2 rho`.
pub fn sigma2_split(ctx: &QuarticContext, p: u64, m: i128, n: i128) -> Result<Sigma2Split> {
    let tables = LocalTables::new(ctx, p)?;
    sigma2_split_with(&tables, m, n)
}

pub fn sigma2_split_with(tables: &LocalTables, m: i128, n: i128) -> Result<Sigma2Split> {
    let p = tables.p;
    if reduce(tables.ctx.rho() as i128, p) == 0 {
        return Err(Error::Divisible {
            what: "rho",
            p,
            value: tables.ctx.rho() as i128,
        });
    }
    let (c1, c2) = tables.twist_to_xy(m, n)?;
    let s1 = tables.sigma_hist(1, m, n)?;
    let s2 = tables.sigma_hist(2, m, n)?;
    let off = tables.rs_hist(m, n, &tables.off_diagonal_weights());
    let diag = tables.rs_hist(m, n, &tables.diagonal_weights());
    let sp = tables.s_hist(c1, c2);
    let tp = tables.t_hist(c1, c2);
    Ok(Sigma2Split {
        p,
        m: reduce(m, p) as i64,
        n: reduce(n, p) as i64,
        sigma1: s1.value(),
        sigma2: s2.value(),
        off_diagonal: off.value(),
        diagonal: diag.value(),
        t_p: tp.value(),
        sigma1_matches_s_p: s1.same_value(&sp),
        sigma2_splits: s2.same_value(&s1.plus(&off)),
        off_diagonal_matches_t_p: off.same_value(&tp.minus(&diag)),
    })
}

/// Best integer `k` in `[-20, 20]` for `Sigma_t ~ (1 - k) Sigma_1 + k Sigma_2`
/// over all twists modulo `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaTFit {
    pub p: u64,
    pub t: u32,
    pub k: i64,
    pub max_residual: f64,
    pub residual_over_p: f64,
}

pub fn sigma_t_fit(ctx: &QuarticContext, p: u64, t: u32) -> Result<SigmaTFit> {
    let tables = LocalTables::new(ctx, p)?;
    let (g1, g2, gt) = (
        tables.sigma_grid(1)?,
        tables.sigma_grid(2)?,
        tables.sigma_grid(t)?,
    );
    let residual = |k: i64| {
        let kf = k as f64;
        g1.iter()
            .zip(&g2)
            .zip(&gt)
            .map(|((s1, s2), st)| (st - s1 * (1.0 - kf) - s2 * kf).norm())
            .fold(0.0, f64::max)
    };
    let (k, max_residual) =
        (-20..=20)
            .map(|k| (k, residual(k)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
    Ok(SigmaTFit {
        p,
        t,
        k,
        max_residual,
        residual_over_p: max_residual / p as f64,
    })
}
