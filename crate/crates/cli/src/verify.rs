//! The identity suite behind `expsum-verify`. Every row compares two
//! independent evaluations; exact rows compare in `Z[zeta_p]` or `Z`.

use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polysieve::expsums::local::sigma2_split_with;
use polysieve::expsums::psi::{FOURIER_BOX_CAP, PSI_MODULUS_CAP};
use polysieve::expsums::{
    phi, phi_melt, phi_product, s_ij_direct, s_ij_fourier, BezoutCofactors, LocalTables,
    PsiFactors, PsiWeights, ScanRanges,
};
use polysieve::modarith::{gauss_sum, gauss_sum_direct, gcd_u64, primes_up_to};
use polysieve::quartic::QuarticContext;
use polysieve::sieve::square_sieve_identity;
use polysieve::Complex64;

/// Relative tolerance, scaled by the number of summed terms.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub identity: &'static str,
    pub params: String,
    pub checked: u64,
    pub mismatches: u64,
    /// Largest `|lhs - rhs| / max(1, terms)`; zero for exact rows.
    pub max_deviation: f64,
}

impl IdentityRow {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

struct Tally {
    checked: u64,
    mismatches: u64,
    max_deviation: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            checked: 0,
            mismatches: 0,
            max_deviation: 0.0,
        }
    }

    fn exact(&mut self, ok: bool) {
        self.checked += 1;
        self.mismatches += u64::from(!ok);
    }

    fn approx(&mut self, a: Complex64, b: Complex64, terms: f64) {
        let dev = (a - b).norm() / terms.max(1.0);
        self.checked += 1;
        self.max_deviation = self.max_deviation.max(dev);
        self.mismatches += u64::from(dev.is_nan() || dev > TOLERANCE);
    }

    fn row(self, identity: &'static str, params: String) -> IdentityRow {
        IdentityRow {
            identity,
            params,
            checked: self.checked,
            mismatches: self.mismatches,
            max_deviation: self.max_deviation,
        }
    }
}

fn odd_primes(pmax: u64) -> Vec<u64> {
    primes_up_to(pmax).into_iter().filter(|&p| p > 2).collect()
}

fn gauss_rows(pmax: u64) -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for p in odd_primes(pmax) {
        let mut t = Tally::new();
        for ell in 1..p as i128 {
            for m in 0..p as i128 {
                t.approx(gauss_sum(p, ell, m)?, gauss_sum_direct(p, ell, m), p as f64);
            }
        }
        rows.push(t.row("gauss-sum", format!("p={p}")));
    }
    Ok(rows)
}

fn square_sieve_rows(pmax: u64) -> Result<Vec<IdentityRow>> {
    let primes = odd_primes(pmax);
    let mut rows = Vec::new();
    for (k, &p) in primes.iter().enumerate() {
        for &q in &primes[k + 1..] {
            let mut t = Tally::new();
            for n in 1..=100i64 {
                if ((2 * n) as u64).is_multiple_of(p) || ((2 * n) as u64).is_multiple_of(q) {
                    continue;
                }
                for alpha in 1..=3 {
                    let (lhs, rhs) = square_sieve_identity(n, p, q, alpha)?;
                    t.exact(lhs == rhs);
                }
            }
            rows.push(t.row("square-sieve", format!("p={p};q={q}")));
        }
    }
    Ok(rows)
}

fn local_rows(ctx: &QuarticContext, pmax: u64) -> Result<Vec<IdentityRow>> {
    let bad = (ctx.h1() * ctx.h2() * ctx.rho()) as u64;
    let mut rows = Vec::new();
    for p in odd_primes(pmax)
        .into_iter()
        .filter(|&p| !bad.is_multiple_of(p))
    {
        let tables = LocalTables::new(ctx, p)?;
        let (mut s1, mut s2, mut off) = (Tally::new(), Tally::new(), Tally::new());
        for m in 0..p as i128 {
            for n in 0..p as i128 {
                let d = sigma2_split_with(&tables, m, n)?;
                s1.exact(d.sigma1_matches_s_p);
                s2.exact(d.sigma2_splits);
                off.exact(d.off_diagonal_matches_t_p && d.diagonal_within_bound());
            }
        }
        let params = format!("p={p}");
        rows.push(s1.row("sigma1-is-s-p", params.clone()));
        rows.push(s2.row("sigma2-splits", params.clone()));
        rows.push(off.row("off-diagonal-is-t-p", params));
    }
    Ok(rows)
}

fn phi_rows(ctx: &QuarticContext) -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for r1 in 2..=15u64 {
        for r2 in r1 + 1..=30 / r1 {
            if gcd_u64(r1, r2) != 1 {
                continue;
            }
            let l = r1 * r2;
            let terms = (l * l) as f64;
            let mut t = Tally::new();
            for m in 0..l as i128 {
                for n in 0..l as i128 {
                    let direct = phi(ctx, l, m, n)?;
                    t.approx(direct, phi_product(ctx, r1, r2, m, n)?, terms);
                    t.approx(direct, phi_melt(ctx, l, m, n)?, terms);
                }
            }
            rows.push(t.row("phi-multiplicative", format!("rho1={r1};rho2={r2}")));
        }
    }
    Ok(rows)
}

fn psi_rows(ctx: &QuarticContext, pmax: u64, rng: &mut ChaCha8Rng) -> Result<Vec<IdentityRow>> {
    let rho = ctx.rho() as u64;
    let primes: Vec<u64> = odd_primes(pmax)
        .into_iter()
        .filter(|&p| !rho.is_multiple_of(p))
        .collect();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for (k, &p) in primes.iter().enumerate() {
        for &q in &primes[k..] {
            if p * q * rho <= PSI_MODULUS_CAP {
                pairs.push((p, q));
            }
        }
    }
    let take = pairs.len().min(6);
    let mut chosen: Vec<(u64, u64)> = pairs.choose_multiple(rng, take).copied().collect();
    chosen.sort_unstable();
    let mut rows = Vec::new();
    for (p, q) in chosen {
        let l = p * q * rho;
        let factors = PsiFactors::new(ctx, p, q)?;
        let standard = BezoutCofactors::standard(p, q, rho)?;
        let shifted = standard.shifted(p, q, rho, rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let twists: Vec<(i128, i128)> = (0..12)
            .map(|_| (rng.gen_range(0..l) as i128, rng.gen_range(0..l) as i128))
            .collect();
        let mut t = Tally::new();
        for i in 0..3 {
            for j in 0..3 {
                let weights = PsiWeights::new(ctx, p, q, i, j)?;
                for &(m, n) in &twists {
                    let direct = weights.value(m, n);
                    let terms = (l * l) as f64;
                    t.approx(direct, factors.value(i, j, m, n, &standard)?, terms);
                    t.approx(direct, factors.value(i, j, m, n, &shifted)?, terms);
                }
            }
        }
        rows.push(t.row("psi-factorisation", format!("p={p};q={q}")));
    }
    Ok(rows)
}

fn fourier_rows(ctx: &QuarticContext, pmax: u64) -> Result<Vec<IdentityRow>> {
    let rho = ctx.rho() as u64;
    let primes: Vec<u64> = odd_primes(pmax)
        .into_iter()
        .filter(|&p| !rho.is_multiple_of(p))
        .collect();
    let Some((p, q)) = primes.first().zip(primes.get(1)).map(|(&p, &q)| (p, q)) else {
        return Ok(Vec::new());
    };
    if p * q * rho > PSI_MODULUS_CAP {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for b in [10u64, 25, 40, 60]
        .into_iter()
        .filter(|&b| b <= FOURIER_BOX_CAP)
    {
        let mut t = Tally::new();
        for i in 0..3 {
            for j in 0..3 {
                let direct = s_ij_direct(ctx, b, p, q, i, j)? as f64;
                let fourier = s_ij_fourier(ctx, b, p, q, i, j)?;
                t.approx(Complex64::new(direct, 0.0), fourier, direct);
            }
        }
        rows.push(t.row("fourier-s-ij", format!("p={p};q={q};B={b}")));
    }
    Ok(rows)
}

/// Runs the whole suite for primes up to `pmax`.
pub fn identity_suite(ctx: &QuarticContext, pmax: u64, seed: u64) -> Result<Vec<IdentityRow>> {
    if !(3..=ScanRanges::PMAX_CAP).contains(&pmax) {
        bail!("--pmax {pmax} outside 3..={}", ScanRanges::PMAX_CAP);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = gauss_rows(pmax)?;
    rows.extend(square_sieve_rows(pmax)?);
    rows.extend(local_rows(ctx, pmax)?);
    rows.extend(phi_rows(ctx)?);
    rows.extend(psi_rows(ctx, pmax, &mut rng)?);
    rows.extend(fourier_rows(ctx, pmax)?);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use polysieve::quartic::QuarticParams;

    #[test]
    fn small_suite_passes() {
        let ctx = QuarticContext::new(QuarticParams::new(1, 1), 1, 1, 1).unwrap();
        let rows = identity_suite(&ctx, 7, 1).unwrap();
        assert!(rows.iter().all(IdentityRow::passed), "{rows:?}");
        for id in [
            "gauss-sum",
            "square-sieve",
            "sigma1-is-s-p",
            "phi-multiplicative",
            "psi-factorisation",
            "fourier-s-ij",
        ] {
            assert!(
                rows.iter().any(|r| r.identity == id && r.checked > 0),
                "{id}"
            );
        }
    }

    #[test]
    fn pmax_is_capped() {
        let ctx = QuarticContext::new(QuarticParams::new(1, 1), 1, 1, 1).unwrap();
        assert!(identity_suite(&ctx, 67, 1).is_err());
        assert!(identity_suite(&ctx, 2, 1).is_err());
    }
}
