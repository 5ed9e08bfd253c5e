//! `Phi(rho; M, N) = sum* e_rho(M r + N s)` over `(r, s) mod rho` with
//! `gcd(rho, r s) = 1` and `F(r, s) = 0 mod rho`.
//!
//! For coprime `rho1, rho2` with `rho1 b1 + rho2 b2 = 1`,
//! `Phi(rho1 rho2; M, N) = Phi(rho1; b2 M, b2 N) Phi(rho2; b1 M, b1 N)`.

use num_complex::Complex64;

use crate::modarith::{ext_gcd, factorize, gcd_u64, mod_inv, reduce};
use crate::numeric::{dft2_sparse, CompensatedSum, RootsOfUnity};
use crate::quartic::QuarticContext;
use crate::{Error, Result};

/// Largest modulus enumerated directly.
pub const PHI_MODULUS_CAP: u64 = 4096;

/// Unit pairs `(r, s) mod modulus` with `F(r, s) = 0`, in lexicographic order.
pub fn phi_points(ctx: &QuarticContext, modulus: u64) -> Result<Vec<(u64, u64)>> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if modulus > PHI_MODULUS_CAP {
        return Err(Error::CapExceeded {
            what: "Phi modulus",
            value: modulus as u128,
            cap: PHI_MODULUS_CAP as u128,
        });
    }
    let red = ctx.reduced(modulus);
    let units: Vec<u64> = (0..modulus).filter(|&r| gcd_u64(r, modulus) == 1).collect();
    let mut out = Vec::new();
    for &r in &units {
        for &s in &units {
            if red.f_form(r, s) == 0 {
                out.push((r, s));
            }
        }
    }
    Ok(out)
}

fn sum_over(points: &[(u64, u64)], modulus: u64, m: i128, n: i128) -> Complex64 {
    let roots = RootsOfUnity::new(modulus);
    let (m, n) = (reduce(m, modulus), reduce(n, modulus));
    points
        .iter()
        .map(|&(r, s)| roots.at((m * r + n * s) % modulus))
        .collect::<CompensatedSum>()
        .value()
}

/// `Phi(modulus; M, N)` by direct enumeration.
pub fn phi(ctx: &QuarticContext, modulus: u64, m: i128, n: i128) -> Result<Complex64> {
    Ok(sum_over(&phi_points(ctx, modulus)?, modulus, m, n))
}

/// `Phi(modulus; M, N)` for all `(M, N)` in `ms x ns`, row-major in `ms`.
pub fn phi_grid(
    ctx: &QuarticContext,
    modulus: u64,
    ms: &[u64],
    ns: &[u64],
) -> Result<Vec<Complex64>> {
    let entries: Vec<(u64, u64, f64)> = phi_points(ctx, modulus)?
        .into_iter()
        .map(|(r, s)| (r, s, 1.0))
        .collect();
    Ok(dft2_sparse(&entries, modulus, ms, ns))
}

/// `Phi(modulus; M, N)` assembled from its prime-power pieces.
pub fn phi_melt(ctx: &QuarticContext, modulus: u64, m: i128, n: i128) -> Result<Complex64> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let mut value = Complex64::new(1.0, 0.0);
    for (p, k) in factorize(modulus) {
        let q = p.pow(k);
        let cof = mod_inv((modulus / q) as i128, q).expect("cofactor is a unit") as i128;
        value *= phi(ctx, q, cof * m, cof * n)?;
    }
    Ok(value)
}

/// `Phi(rho1; b2 M, b2 N) Phi(rho2; b1 M, b1 N)` with
/// `rho1 b1 + rho2 b2 = 1`.
pub fn phi_product(
    ctx: &QuarticContext,
    rho1: u64,
    rho2: u64,
    m: i128,
    n: i128,
) -> Result<Complex64> {
    let (g, b1, b2) = ext_gcd(rho1 as i128, rho2 as i128);
    if g != 1 {
        return Err(Error::NonCoprimeModuli(rho1, rho2));
    }
    Ok(phi(ctx, rho1, b2 * m, b2 * n)? * phi(ctx, rho2, b1 * m, b1 * n)?)
}
