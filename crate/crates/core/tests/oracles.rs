//! Reference values pinned against brute-force oracles written here,
//! independently of the library code paths.

use std::collections::HashMap;

use num::{BigInt, BigRational, ToPrimitive};
use num_complex::Complex64;

use polysieve::counting::{census, count_e, moments, r_table};
use polysieve::expsums::{m_ij, phi_points, psi_direct, s_ij_direct, LocalTables};
use polysieve::modarith::{count_roots_mod, crt_lift, decompose_uvw, gauss_sum, legendre, Residue};
use polysieve::polyfam::{
    h_gcd, nu_p, power_family, IntPoly, MPoly, Monomial, PolyFamily, Weighting,
};
use polysieve::quartic::{
    build_prime_pool, k_singular_points_mod_p, nu_quartic, QuarticContext, QuarticParams,
};
use polysieve::sieve::{power_sieve_instance, SieveInstance};

fn ctx(a: i64, b: i64, h1: i64, h2: i64, rho: i64) -> QuarticContext {
    QuarticContext::new(QuarticParams::new(a, b), h1, h2, rho).unwrap()
}

fn brute_roots(coeffs: &[i128], modulus: i128) -> u64 {
    (0..modulus)
        .filter(|&x| {
            coeffs
                .iter()
                .fold(0i128, |acc, &c| (acc * x + c).rem_euclid(modulus))
                == 0
        })
        .count() as u64
}

#[test]
fn legendre_matches_squares() {
    for p in [3u64, 5, 7, 11, 13, 97] {
        let squares: Vec<i128> = (1..p as i128).map(|x| x * x % p as i128).collect();
        for a in -20i128..40 {
            let r = a.rem_euclid(p as i128);
            let expected = if r == 0 {
                0
            } else if squares.contains(&r) {
                1
            } else {
                -1
            };
            assert_eq!(legendre(a, p).unwrap(), expected, "({a}/{p})");
        }
    }
}

#[test]
fn root_counts_match_enumeration() {
    let polys: [&[i128]; 4] = [
        &[1, 0, -2],
        &[1, 0, 0, -1],
        &[1, -3, 3, -1],
        &[2, 0, 7, 0, 1],
    ];
    for coeffs in polys {
        for (p, k) in [(2u64, 5u32), (3, 4), (5, 3), (7, 2)] {
            let modulus = p.pow(k);
            assert_eq!(
                count_roots_mod(coeffs, p, k).unwrap(),
                brute_roots(coeffs, modulus as i128)
            );
        }
    }
}

#[test]
fn crt_and_uvw_examples() {
    let lift = crt_lift(Residue::new(2, 5).unwrap(), Residue::new(3, 7).unwrap()).unwrap();
    assert_eq!((lift.residue.value(), lift.residue.modulus()), (17, 35));
    let d = decompose_uvw(2 * 27 * 25).unwrap();
    assert_eq!((d.u, d.v, d.w), (2, 3, 15));
}

#[test]
fn gauss_sum_small_cases() {
    // p = 3, ell = 1, m = 0: 1 + 2 e(1/3) = i sqrt(3).
    let g = gauss_sum(3, 1, 0).unwrap();
    assert!((g - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    let g = gauss_sum(5, 1, 0).unwrap();
    assert!((g - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
}

#[test]
fn h_and_nu_examples() {
    let (square, _) = power_family(2).unwrap();
    assert_eq!(h_gcd(&square, &[6]).unwrap(), 1);
    let fam = PolyFamily::new(
        1,
        vec![
            MPoly::new(
                1,
                vec![Monomial {
                    coeff: 1,
                    exp: vec![1],
                }],
            )
            .unwrap(),
            MPoly::constant(1, 0),
            MPoly::constant(1, 0),
            MPoly::new(
                1,
                vec![Monomial {
                    coeff: 1,
                    exp: vec![2],
                }],
            )
            .unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(h_gcd(&fam, &[2]).unwrap(), 2);
    for p in [3u64, 5, 7, 11] {
        for n in 1..30i64 {
            assert_eq!(
                nu_p(&square, &[n], p).unwrap(),
                brute_roots(&[1, 0, -(n as i128)], p as i128)
            );
        }
    }
}

#[test]
fn square_sieve_s10_is_sum_of_nu3() {
    let (family, g) = power_family(2).unwrap();
    let points: Vec<Vec<i64>> = (2..=20).map(|n| vec![n]).collect();
    let inst = SieveInstance::new(family, g, Weighting::unit(points), 1, vec![3, 5, 7]).unwrap();
    let expected: u64 = (2..=20i128)
        .filter(|n| (2 * n) % 3 != 0 && (2 * n) % 7 != 0)
        .map(|n| brute_roots(&[1, 0, -n], 3))
        .sum();
    assert_eq!(
        inst.s_ij(1, 0, 3, 7).unwrap(),
        BigRational::from_integer(BigInt::from(expected))
    );
}

#[test]
fn power_sieve_counts_fourth_powers() {
    let inst = power_sieve_instance(4, 1, 200, vec![3, 5, 7, 11, 13, 17], 1).unwrap();
    let report = inst.sieve_bound().unwrap();
    assert_eq!(report.s_of_a, BigRational::from_integer(BigInt::from(3)));
    assert!(report.lower_bound_holds);
}

#[test]
fn singular_points_and_pools() {
    // Confirmed with a symbolic gradient search over all of P^3(F_5).
    assert_eq!(
        k_singular_points_mod_p(&ctx(1, 1, 1, 1, 1), 5).unwrap(),
        vec![[1, 2, 4, 3]]
    );
    assert_eq!(
        build_prime_pool(&ctx(1, 1, 1, 1, 1), 20).unwrap().primes(),
        &[7, 11, 13, 17, 19]
    );
    assert_eq!(
        build_prime_pool(&ctx(1, 1, 1, 1, 3), 20).unwrap().primes(),
        &[5, 13, 17, 19]
    );
}

#[test]
fn nu_quartic_counts_roots() {
    let c = ctx(1, 1, 1, 1, 1);
    for p in [5u64, 7, 11] {
        for r in 0..p as i128 {
            for s in 0..p as i128 {
                // rho G(rho, x) = x^3 + 3x + 2 with rho = 1; r F(r, s) = r (s^3 + (r^2 + 2) s + 2).
                let target = r * (s * s * s + (r * r + 2) * s + 2);
                let n = brute_roots(&[1, 0, 3, 2 - target], p as i128);
                assert_eq!(nu_quartic(&c, r, s, p).unwrap(), n);
                assert!(n <= 3);
            }
        }
    }
}

#[test]
fn psi_zero_counts_filtered_residues() {
    let c = ctx(1, 1, 1, 1, 3);
    let pts = phi_points(&c, 3).unwrap().len() as f64;
    let z = psi_direct(&c, 5, 7, 0, 0, 0, 0).unwrap();
    assert!((z.re - pts * 35.0 * 35.0).abs() < 1e-6 && z.im.abs() < 1e-6);
    // i = j = 0: 4 (#filtered residues) B^2 / (h1 h2 rho^2).
    let m = m_ij(&c, 10, 5, 7, 0, 0).unwrap();
    assert!((m.to_f64().unwrap() - 4.0 * pts * 100.0 / 9.0).abs() < 1e-9);
}

#[test]
fn lattice_sum_by_hand() {
    let c = ctx(1, 1, 1, 1, 1);
    let (tp, tq) = (
        LocalTables::new(&c, 5).unwrap(),
        LocalTables::new(&c, 7).unwrap(),
    );
    let mut total = 0u128;
    for r in 1..=40u64 {
        for s in 1..=40u64 {
            total += (tp.nu(r, s) as u128) * (tq.nu(r, s) as u128).pow(2);
        }
    }
    assert_eq!(s_ij_direct(&c, 20, 5, 7, 1, 2).unwrap(), total);
}

fn hash_count(f: impl Fn(i128) -> i128, b: i128) -> u128 {
    let mut by_sum: HashMap<i128, Vec<(i128, i128)>> = HashMap::new();
    for y in 1..=b {
        for z in 1..=b {
            by_sum.entry(f(y) + f(z)).or_default().push((y, z));
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

#[test]
fn counting_reference_values() {
    let cube = IntPoly::new(vec![1, 0, 0, 0]);
    assert_eq!(count_e(&cube, 12).unwrap(), hash_count(|x| x.pow(3), 12));
    assert_eq!(count_e(&cube, 12).unwrap(), 8);
    let t = r_table(&cube, 2000).unwrap();
    assert_eq!(t.get(1729), 4);
    assert_eq!(t.distribution()[4], 1);
    let fourth = IntPoly::new(vec![1, 0, 0, 0, 0]);
    assert_eq!(
        count_e(&fourth, 158).unwrap(),
        hash_count(|x| x.pow(4), 158)
    );
}

#[test]
fn moment_estar_against_count_e() {
    // N = 2 f(B) admits pairs with one entry beyond B, so Estar >= E.
    let cube = IntPoly::new(vec![1, 0, 0, 0]);
    assert_eq!(
        moments(&cube, 2 * 12i128.pow(3)).unwrap().estar,
        count_e(&cube, 12).unwrap()
    );
    for b in [20i128, 40, 60] {
        let m = moments(&cube, 2 * b.pow(3)).unwrap();
        assert!(m.estar >= count_e(&cube, b as u64).unwrap());
    }
}

#[test]
fn census_reconciles_with_count_e() {
    for (a, b, bmax) in [(0, 0, 158u64), (0, 1, 120), (-2, 0, 60), (2, 6, 120)] {
        let c = census(QuarticParams::new(a, b), bmax, 1, 2).unwrap();
        let f = IntPoly::new(QuarticParams::new(a, b).coeffs().to_vec());
        assert_eq!(c.total() as u128, count_e(&f, bmax).unwrap(), "({a}, {b})");
    }
}
