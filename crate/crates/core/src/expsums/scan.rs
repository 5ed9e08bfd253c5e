//! Empirical ratios of exact sums against their expected envelopes.
//!
//! Every row stores the quantity being bounded (`value`), the envelope and
//! `ratio = value / envelope`. The families:
//!
//! | name          | value                                        | envelope                                             |
//! |---------------|----------------------------------------------|------------------------------------------------------|
//! | `sigma-zero`  | `abs(Sigma_t(p;0,0) - max(1,t) p^2)`, t <= 2 | `p`                                                  |
//! | `sigma-twist` | `abs(Sigma_t(p;M,N))`, `(M,N) != 0`, t <= 4  | `p`                                                  |
//! | `s-p`, `t-p`  | `abs(S_p(c) - [c = 0] p^2)`                  | `p`                                                  |
//! | `phi-k1`      | `abs(Phi(p;M,N))`                            | `p^(1/2) gcd(p, D)^(1/2)`, `D = h2^2 M^2 + h1^2 N^2` |
//! | `phi-pk`      | `abs(Phi(p^k;M,N))`, k >= 2                  | `p^k gcd(p^[k/2], h1)`                               |
//! | `phi-rho`     | `abs(Phi(rho;M,N))`                          | `u^(1/2) v w^2 gcd(w, h1) gcd(u, D)^(1/2)`           |
//! | `psi-zero`    | `Psi_{i,j}(0,0)`                             | `(pq)^2 rho gcd(w, h1)`                              |
//!
//! Moduli above [`FULL_GRID_CAP`] are scanned on a fixed sample of twists.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::{LocalTables, MAX_T};
use super::phi::{phi, phi_grid};
use super::psi::PsiFactors;
use crate::modarith::{decompose_uvw, gcd, gcd_u64, is_prime, primes_up_to, reduce};
use crate::numeric::all_frequencies;
use crate::quartic::{build_prime_pool, QuarticContext, QuarticParams};
use crate::{Error, Result};

/// Moduli up to this size are scanned over all twists.
pub const FULL_GRID_CAP: u64 = 64;

/// Twists per axis for larger moduli.
pub const SAMPLE_SIDE: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFamily {
    SigmaZero,
    SigmaTwist,
    SP,
    TP,
    PhiK1,
    PhiPk,
    PhiRho,
    PsiZero,
}

impl ScanFamily {
    pub const ALL: [ScanFamily; 8] = [
        Self::SigmaZero,
        Self::SigmaTwist,
        Self::SP,
        Self::TP,
        Self::PhiK1,
        Self::PhiPk,
        Self::PhiRho,
        Self::PsiZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SigmaZero => "sigma-zero",
            Self::SigmaTwist => "sigma-twist",
            Self::SP => "s-p",
            Self::TP => "t-p",
            Self::PhiK1 => "phi-k1",
            Self::PhiPk => "phi-pk",
            Self::PhiRho => "phi-rho",
            Self::PsiZero => "psi-zero",
        }
    }
}

impl fmt::Display for ScanFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scan family {s:?}")))
    }
}

/// Scan limits and the context being scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRanges {
    pub ctx: QuarticContext,
    /// Largest prime for the prime-modulus families.
    pub pmax: u64,
    /// Largest prime power for `phi-pk`.
    pub pk_max: u64,
    /// Largest `rho` for `phi-rho`.
    pub rho_max: u64,
    /// Largest `rho` for `psi-zero`.
    pub psi_rho_max: u64,
}

impl ScanRanges {
    pub const PMAX_CAP: u64 = 61;
    pub const PK_CAP: u64 = 2000;
    pub const RHO_CAP: u64 = 200;
    pub const PSI_RHO_CAP: u64 = 30;

    pub fn with_pmax(pmax: u64) -> Self {
        Self {
            pmax,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, value, cap) in [
            ("pmax", self.pmax, Self::PMAX_CAP),
            ("pk_max", self.pk_max, Self::PK_CAP),
            ("rho_max", self.rho_max, Self::RHO_CAP),
            ("psi_rho_max", self.psi_rho_max, Self::PSI_RHO_CAP),
        ] {
            if value > cap {
                return Err(Error::CapExceeded {
                    what,
                    value: value as u128,
                    cap: cap as u128,
                });
            }
        }
        Ok(())
    }

    fn describe(&self, family: ScanFamily) -> String {
        match family {
            ScanFamily::PhiPk => format!("p^k <= {}", self.pk_max),
            ScanFamily::PhiRho => format!("rho <= {}", self.rho_max),
            ScanFamily::PsiZero => format!("p, q <= {}, rho <= {}", self.pmax, self.psi_rho_max),
            _ => format!("p <= {}", self.pmax),
        }
    }
}

impl Default for ScanRanges {
    fn default() -> Self {
        Self {
            ctx: QuarticContext::new(QuarticParams::new(1, 1), 1, 1, 1)
                .expect("valid default context"),
            pmax: Self::PMAX_CAP,
            pk_max: Self::PK_CAP,
            rho_max: Self::RHO_CAP,
            psi_rho_max: Self::PSI_RHO_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub family: ScanFamily,
    pub params: Vec<(String, i64)>,
    pub value: f64,
    pub envelope: f64,
    pub ratio: f64,
}

impl ScanRow {
    fn new(family: ScanFamily, params: &[(&str, i64)], value: f64, envelope: f64) -> Self {
        Self {
            family,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value,
            envelope,
            ratio: value / envelope,
        }
    }

    pub fn param(&self, key: &str) -> Option<i64> {
        self.params.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    /// `key=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundScanReport {
    pub family: ScanFamily,
    pub range: String,
    pub worst_ratio: f64,
    pub witness: Vec<(String, i64)>,
    pub rows: Vec<ScanRow>,
}

impl BoundScanReport {
    fn from_rows(family: ScanFamily, range: String, rows: Vec<ScanRow>) -> Self {
        let worst = rows.iter().fold(None::<&ScanRow>, |best, row| match best {
            Some(b) if b.ratio >= row.ratio => Some(b),
            _ => Some(row),
        });
        let (worst_ratio, witness) =
            worst.map_or((0.0, Vec::new()), |r| (r.ratio, r.params.clone()));
        Self {
            family,
            range,
            worst_ratio,
            witness,
            rows,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.ratio.is_finite() && r.ratio >= 0.0)
    }

    /// Re-evaluates the witness by direct enumeration and returns its ratio.
    pub fn reevaluate_witness(&self, ctx: &QuarticContext) -> Result<f64> {
        Ok(evaluate(self.family, ctx, &self.witness)?.ratio)
    }
}

fn prime_power_envelope(p: u64, k: u32, h1: i64) -> f64 {
    let g = gcd(p.pow(k / 2) as i128, h1 as i128);
    p.pow(k) as f64 * g as f64
}

fn delta(ctx: &QuarticContext, m: i128, n: i128) -> i128 {
    let (h1, h2) = (ctx.h1() as i128, ctx.h2() as i128);
    h2 * h2 * m * m + h1 * h1 * n * n
}

fn rho_envelope(ctx: &QuarticContext, rho: u64, m: i128, n: i128) -> Result<f64> {
    let uvw = decompose_uvw(rho)?;
    let gw = gcd(uvw.w as i128, ctx.h1() as i128) as f64;
    let gu = gcd(uvw.u as i128, delta(ctx, m, n)) as f64;
    Ok((uvw.u as f64).sqrt() * uvw.v as f64 * (uvw.w * uvw.w) as f64 * gw * gu.sqrt())
}

fn twist_axis(modulus: u64) -> Vec<u64> {
    if modulus <= FULL_GRID_CAP {
        return all_frequencies(modulus);
    }
    let mut axis: Vec<u64> = (0..SAMPLE_SIDE)
        .map(|k| (k * modulus / SAMPLE_SIDE + k % 3) % modulus)
        .collect();
    axis.sort_unstable();
    axis.dedup();
    axis
}

fn phi_k1_primes(ctx: &QuarticContext, pmax: u64) -> Vec<u64> {
    let bad = 2 * gcd(ctx.a() as i128, ctx.c() as i128) * ctx.h1() as i128 * ctx.h2() as i128;
    primes_up_to(pmax)
        .into_iter()
        .filter(|&p| p > 2 && reduce(bad, p) != 0)
        .collect()
}

fn prime_powers(limit: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in primes_up_to((limit as f64).sqrt() as u64 + 1) {
        let mut k = 2;
        while p.pow(k) <= limit {
            out.push((p, k));
            k += 1;
        }
    }
    out
}

fn modulus_rows(
    family: ScanFamily,
    ctx: &QuarticContext,
    modulus: u64,
    head: &[(&str, i64)],
    envelope: impl Fn(i128, i128) -> Result<f64> + Sync,
) -> Result<Vec<ScanRow>> {
    let axis = twist_axis(modulus);
    let grid = phi_grid(ctx, modulus, &axis, &axis)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (a, &m) in axis.iter().enumerate() {
        for (b, &n) in axis.iter().enumerate() {
            let mut params = head.to_vec();
            params.extend([("M", m as i64), ("N", n as i64)]);
            let env = envelope(m as i128, n as i128)?;
            rows.push(ScanRow::new(
                family,
                &params,
                grid[a * axis.len() + b].norm(),
                env,
            ));
        }
    }
    Ok(rows)
}

fn pool_primes(ranges: &ScanRanges) -> Result<Vec<u64>> {
    Ok(build_prime_pool(&ranges.ctx, ranges.pmax)?
        .primes()
        .to_vec())
}

fn collect<T: Send>(
    items: Vec<T>,
    f: impl Fn(T) -> Result<Vec<ScanRow>> + Sync + Send,
) -> Result<Vec<ScanRow>> {
    let parts: Vec<Result<Vec<ScanRow>>> = items.into_par_iter().map(f).collect();
    let mut rows = Vec::new();
    for part in parts {
        rows.extend(part?);
    }
    Ok(rows)
}

/// Runs one scan family over the given ranges.
pub fn bound_scan(family: ScanFamily, ranges: &ScanRanges) -> Result<BoundScanReport> {
    ranges.validate()?;
    let ctx = ranges.ctx;
    let rows = match family {
        ScanFamily::SigmaZero => collect(pool_primes(ranges)?, |p| {
            let tables = LocalTables::new(&ctx, p)?;
            (0..=2u32)
                .map(|t| {
                    let dev = tables.sigma_zero(t)? as f64 - (t.max(1) as u64 * p * p) as f64;
                    Ok(ScanRow::new(
                        family,
                        &[("p", p as i64), ("t", t as i64)],
                        dev.abs(),
                        p as f64,
                    ))
                })
                .collect()
        })?,
        ScanFamily::SigmaTwist => collect(pool_primes(ranges)?, |p| {
            let tables = LocalTables::new(&ctx, p)?;
            let mut rows = Vec::new();
            for t in 0..=MAX_T {
                let grid = tables.sigma_grid(t)?;
                for (k, z) in grid.iter().enumerate().skip(1) {
                    let (m, n) = (k as u64 / p, k as u64 % p);
                    let params = [
                        ("p", p as i64),
                        ("t", t as i64),
                        ("M", m as i64),
                        ("N", n as i64),
                    ];
                    rows.push(ScanRow::new(family, &params, z.norm(), p as f64));
                }
            }
            Ok(rows)
        })?,
        ScanFamily::SP | ScanFamily::TP => collect(pool_primes(ranges)?, |p| {
            let tables = LocalTables::new(&ctx, p)?;
            let grid = if family == ScanFamily::SP {
                tables.s_grid()
            } else {
                tables.t_grid()
            };
            let main = Complex64::new((p * p) as f64, 0.0);
            Ok(grid
                .iter()
                .enumerate()
                .map(|(k, &z)| {
                    let (c1, c2) = (k as u64 / p, k as u64 % p);
                    let dev = if k == 0 { z - main } else { z };
                    ScanRow::new(
                        family,
                        &[("p", p as i64), ("c1", c1 as i64), ("c2", c2 as i64)],
                        dev.norm(),
                        p as f64,
                    )
                })
                .collect())
        })?,
        ScanFamily::PhiK1 => collect(phi_k1_primes(&ctx, ranges.pmax), |p| {
            modulus_rows(family, &ctx, p, &[("p", p as i64)], |m, n| {
                Ok((p as f64).sqrt() * (gcd(p as i128, delta(&ctx, m, n)) as f64).sqrt())
            })
        })?,
        ScanFamily::PhiPk => collect(prime_powers(ranges.pk_max), |(p, k)| {
            let env = prime_power_envelope(p, k, ctx.h1());
            modulus_rows(
                family,
                &ctx,
                p.pow(k),
                &[("p", p as i64), ("k", k as i64)],
                |_, _| Ok(env),
            )
        })?,
        ScanFamily::PhiRho => collect((1..=ranges.rho_max).collect(), |rho| {
            modulus_rows(family, &ctx, rho, &[("rho", rho as i64)], |m, n| {
                rho_envelope(&ctx, rho, m, n)
            })
        })?,
        ScanFamily::PsiZero => collect((1..=ranges.psi_rho_max).collect(), |rho| {
            psi_zero_rows(ranges, rho)
        })?,
    };
    Ok(BoundScanReport::from_rows(
        family,
        ranges.describe(family),
        rows,
    ))
}

fn psi_zero_rows(ranges: &ScanRanges, rho: u64) -> Result<Vec<ScanRow>> {
    let ctx = ranges.ctx.with_rho(rho as i64)?;
    let primes: Vec<u64> = match build_prime_pool(&ctx, ranges.pmax) {
        Ok(pool) => pool
            .primes()
            .iter()
            .copied()
            .filter(|&p| gcd_u64(p, rho) == 1)
            .collect(),
        Err(Error::InvalidContext(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let uvw = decompose_uvw(rho)?;
    let gw = gcd(uvw.w as i128, ctx.h1() as i128) as f64;
    let mut rows = Vec::new();
    for (k, &p) in primes.iter().enumerate() {
        for &q in &primes[k..] {
            let factors = PsiFactors::new(&ctx, p, q)?;
            let env = ((p * q) as f64).powi(2) * rho as f64 * gw;
            for i in 0..=2u32 {
                for j in 0..=2u32 {
                    let value = factors.zero_value(i, j)? as f64;
                    let params = [
                        ("rho", rho as i64),
                        ("p", p as i64),
                        ("q", q as i64),
                        ("i", i as i64),
                        ("j", j as i64),
                    ];
                    rows.push(ScanRow::new(ScanFamily::PsiZero, &params, value, env));
                }
            }
        }
    }
    Ok(rows)
}

/// Evaluates a single row by direct enumeration.
pub fn evaluate(
    family: ScanFamily,
    ctx: &QuarticContext,
    params: &[(String, i64)],
) -> Result<ScanRow> {
    let get = |key: &str| -> Result<i64> {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|&(_, v)| v)
            .ok_or_else(|| Error::InvalidArgument(format!("missing parameter {key}")))
    };
    let prime = |key: &str| -> Result<u64> {
        let p = get(key)? as u64;
        if is_prime(p) {
            Ok(p)
        } else {
            Err(Error::NotPrime(p))
        }
    };
    let row = match family {
        ScanFamily::SigmaZero | ScanFamily::SigmaTwist => {
            let (p, t) = (prime("p")?, get("t")? as u32);
            let (m, n) = if family == ScanFamily::SigmaZero {
                (0, 0)
            } else {
                (get("M")?, get("N")?)
            };
            let z = LocalTables::new(ctx, p)?.sigma(t, m as i128, n as i128)?;
            let main = if family == ScanFamily::SigmaZero {
                (t.max(1) as u64 * p * p) as f64
            } else {
                0.0
            };
            let mut row = ScanRow::new(family, &[], (z - main).norm(), p as f64);
            row.params = params.to_vec();
            row
        }
        ScanFamily::SP | ScanFamily::TP => {
            let (p, c1, c2) = (prime("p")?, get("c1")? as i128, get("c2")? as i128);
            let tables = LocalTables::new(ctx, p)?;
            let h = if family == ScanFamily::SP {
                tables.s_hist(c1, c2)
            } else {
                tables.t_hist(c1, c2)
            };
            let main = if reduce(c1, p) == 0 && reduce(c2, p) == 0 {
                (p * p) as f64
            } else {
                0.0
            };
            ScanRow::new(family, &[], (h.value() - main).norm(), p as f64)
        }
        ScanFamily::PhiK1 => {
            let (p, m, n) = (prime("p")?, get("M")? as i128, get("N")? as i128);
            let env = (p as f64).sqrt() * (gcd(p as i128, delta(ctx, m, n)) as f64).sqrt();
            ScanRow::new(family, &[], phi(ctx, p, m, n)?.norm(), env)
        }
        ScanFamily::PhiPk => {
            let (p, k, m, n) = (
                prime("p")?,
                get("k")? as u32,
                get("M")? as i128,
                get("N")? as i128,
            );
            ScanRow::new(
                family,
                &[],
                phi(ctx, p.pow(k), m, n)?.norm(),
                prime_power_envelope(p, k, ctx.h1()),
            )
        }
        ScanFamily::PhiRho => {
            let (rho, m, n) = (get("rho")? as u64, get("M")? as i128, get("N")? as i128);
            ScanRow::new(
                family,
                &[],
                phi(ctx, rho, m, n)?.norm(),
                rho_envelope(ctx, rho, m, n)?,
            )
        }
        ScanFamily::PsiZero => {
            let rho = get("rho")? as u64;
            let ctx = ctx.with_rho(rho as i64)?;
            let (p, q, i, j) = (prime("p")?, prime("q")?, get("i")? as u32, get("j")? as u32);
            let uvw = decompose_uvw(rho)?;
            let gw = gcd(uvw.w as i128, ctx.h1() as i128) as f64;
            let value = super::psi::PsiWeights::new(&ctx, p, q, i, j)
                .map(|w| w.total() as f64)
                .or_else(|_| {
                    PsiFactors::new(&ctx, p, q)?
                        .zero_value(i, j)
                        .map(|v| v as f64)
                })?;
            ScanRow::new(
                family,
                &[],
                value,
                ((p * q) as f64).powi(2) * rho as f64 * gw,
            )
        }
    };
    Ok(ScanRow {
        params: params.to_vec(),
        ..row
    })
}
