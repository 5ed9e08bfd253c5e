//! Randomised invariants.

use std::collections::HashMap;

use num::{BigInt, BigRational};
use proptest::prelude::*;

use polysieve::counting::{count_e, moments};
use polysieve::expsums::{
    gamma_envelope, gamma_sum, phi, phi_melt, psi_direct, psi_factored, BezoutCofactors,
    PhaseHistogram, PsiFactors,
};
use polysieve::modarith::{
    centered, count_roots_enumerate, count_roots_lift, ext_gcd, gcd, mod_inv, reduce,
};
use polysieve::polyfam::{format_rational, parse_rational, power_family, IntPoly, Weighting};
use polysieve::quartic::{QuarticContext, QuarticParams};
use polysieve::sieve::SieveInstance;

fn ctx(a: i64, b: i64, h1: i64, h2: i64, rho: i64) -> QuarticContext {
    QuarticContext::new(QuarticParams::new(a, b), h1, h2, rho).unwrap()
}

fn hash_count(f: &IntPoly, b: i128) -> u128 {
    let mut by_sum: HashMap<i128, Vec<(i128, i128)>> = HashMap::new();
    for y in 1..=b {
        for z in 1..=b {
            by_sum
                .entry(f.eval(y).unwrap() + f.eval(z).unwrap())
                .or_default()
                .push((y, z));
        }
    }
    by_sum
        .values()
        .map(|v| {
            let mut n = 0;
            for &(a, b) in v {
                for &(c, d) in v {
                    n += u128::from(!((a == c && b == d) || (a == d && b == c)));
                }
            }
            n
        })
        .sum()
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])
}

fn odd_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 11])
}

fn close(a: num_complex::Complex64, b: num_complex::Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * scale.max(1.0)
}

proptest! {
    #[test]
    fn bezout_identity(a in -10_000i128..10_000, b in -10_000i128..10_000) {
        let (g, x, y) = ext_gcd(a, b);
        prop_assert_eq!(a * x + b * y, g);
        prop_assert_eq!(g, gcd(a, b));
        prop_assert!(g >= 0);
    }

    #[test]
    fn inverse_and_residues(a in -100_000i128..100_000, m in 1u64..5000) {
        let r = reduce(a, m);
        prop_assert!(r < m);
        prop_assert_eq!((a - r as i128).rem_euclid(m as i128), 0);
        let c = centered(a, m) as i128;
        prop_assert!(2 * c > -(m as i128) && 2 * c <= m as i128);
        prop_assert_eq!(reduce(c, m), r);
        match mod_inv(a, m) {
            Some(inv) => prop_assert_eq!(reduce(a * inv as i128, m), 1 % m),
            None => prop_assert!(gcd(a, m as i128) != 1),
        }
    }

    #[test]
    fn lifted_roots_match_enumeration(
        coeffs in prop::collection::vec(-20i128..20, 2..6),
        p in small_prime(),
        k in 1u32..4,
    ) {
        let modulus = p.pow(k);
        prop_assert_eq!(count_roots_lift(&coeffs, p, k).unwrap(), count_roots_enumerate(&coeffs, modulus));
    }

    #[test]
    fn rational_strings_round_trip(num in -1_000_000i64..1_000_000, den in 1i64..100_000) {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }

    #[test]
    fn histogram_certificates(
        p in odd_prime(),
        phases in prop::collection::vec((0u64..50, -5i64..6), 0..30),
        shift in -4i64..5,
    ) {
        let mut h = PhaseHistogram::new(p).unwrap();
        for &(k, w) in &phases {
            h.add(k, w);
        }
        // Adding the same weight to every phase adds shift * (1 + zeta + ...) = 0.
        let mut g = h.clone();
        for k in 0..p {
            g.add(k, shift);
        }
        prop_assert!(h.same_value(&g));
        prop_assert!(close(h.value(), g.value(), 100.0));
        prop_assert!(h.minus(&g).as_integer() == Some(0));
        if let Some(v) = h.as_integer() {
            prop_assert!((h.value().re - v as f64).abs() < 1e-9 && h.value().im.abs() < 1e-9);
        }
    }

    #[test]
    fn gamma_within_envelope(y in 0u64..500, n in -1000i128..1000, modulus in 1u64..400) {
        prop_assert!(gamma_sum(y, n, modulus).norm() <= gamma_envelope(y, n, modulus) * (1.0 + 1e-9) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn count_e_matches_hash_oracle(
        coeffs in prop::collection::vec(-4i128..5, 2..5),
        lead in 1i128..4,
        b in 0u64..25,
    ) {
        let mut all = vec![lead];
        all.extend(coeffs);
        let f = IntPoly::new(all);
        prop_assert_eq!(count_e(&f, b).unwrap(), hash_count(&f, b as i128));
    }

    #[test]
    fn moment_identity(
        coeffs in prop::collection::vec(0i128..4, 1..4),
        lead in 1i128..3,
        n in 1i128..5000,
    ) {
        let mut all = vec![lead];
        all.extend(coeffs);
        let m = moments(&IntPoly::new(all), n).unwrap();
        prop_assert!(m.identity_holds());
        prop_assert!(m.r2 >= m.r);
    }

    #[test]
    fn phi_melts_into_prime_powers(
        modulus in 1u64..=60,
        m in -100i128..100,
        n in -100i128..100,
        which in 0usize..3,
    ) {
        let c = [ctx(1, 1, 1, 1, 1), ctx(-6, 8, 1, 2, 1), ctx(2, 3, 3, 1, 1)][which];
        let direct = phi(&c, modulus, m, n).unwrap();
        let melted = phi_melt(&c, modulus, m, n).unwrap();
        prop_assert!(close(direct, melted, modulus as f64 * modulus as f64), "{direct} vs {melted}");
    }

    #[test]
    fn psi_factors_match_enumeration(
        p in odd_prime(),
        q in odd_prime(),
        rho in prop::sample::select(vec![1u64, 2, 4, 13]),
        i in 0u32..3,
        j in 0u32..3,
        m in -50i128..50,
        n in -50i128..50,
    ) {
        let c = ctx(1, 1, 1, 1, rho as i64);
        let scale = (p * q * rho) as f64;
        let direct = psi_direct(&c, p, q, i, j, m, n).unwrap();
        let factored = psi_factored(&c, p, q, i, j, m, n).unwrap();
        prop_assert!(close(direct, factored, scale * scale), "{direct} vs {factored}");
    }

    #[test]
    fn psi_ignores_cofactor_choice(
        p in odd_prime(),
        q in odd_prime(),
        rho in prop::sample::select(vec![1u64, 2, 4, 13]),
        k1 in -5i128..6,
        k2 in -5i128..6,
        m in -50i128..50,
        n in -50i128..50,
    ) {
        let c = ctx(1, 1, 1, 1, rho as i64);
        let factors = PsiFactors::new(&c, p, q).unwrap();
        let base = BezoutCofactors::standard(p, q, rho).unwrap();
        let moved = base.shifted(p, q, rho, k1, k2);
        let scale = (p * q * rho) as f64;
        for (i, j) in [(0, 0), (1, 2), (2, 1)] {
            let a = factors.value(i, j, m, n, &base).unwrap();
            let b = factors.value(i, j, m, n, &moved).unwrap();
            prop_assert!(close(a, b, scale * scale));
        }
    }

    #[test]
    fn sieve_expansion_is_exact(
        lo in 1i64..40,
        len in 1i64..40,
        primes in prop::sample::subsequence(vec![3u64, 5, 7, 11, 13, 17, 19], 1..5),
        alpha in 1u64..4,
    ) {
        // Points must stay below exp(P).
        prop_assume!(((lo + len) as f64) < (primes.len() as f64).exp());
        let (family, g) = power_family(2).unwrap();
        let points = (lo..lo + len).map(|n| vec![n]).collect();
        let inst = SieveInstance::new(family, g, Weighting::unit(points), alpha, primes).unwrap();
        let (direct, expanded) = inst.expansion_check();
        prop_assert_eq!(direct, expanded);
    }
}
