//! The polynomial sieve inequality.
//!
//! For a weighted finite set `A`, a family `f(x; n)` of degree `d`, an
//! auxiliary polynomial `g` and a set `P` of primes, every `n` for which
//! `f(x; n)` has an integer root satisfies `1 <= nu_p(n) <= d` at each prime
//! not dividing `g(n) h(n)`. The weight `alpha + (nu - 1)(d - nu)` is then at
//! least `alpha >= 1`, and squaring its sum over `P` and expanding gives
//!
//! ```text
//! Sigma = sum_{p,q in P} sum_{i,j in 0..=2} c_{i,j}(alpha) S_{i,j}(p, q).
//! ```
//!
//! All arithmetic in this module is exact: weights are rationals and every
//! sum is accumulated as a big integer over the common denominator.

use num::bigint::BigInt;
use num::integer::Integer;
use num::{BigRational, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modarith::{is_prime, legendre, reduce};
use crate::polyfam::{
    format_rational, h_gcd, has_integer_root, nu_p, parse_rational, power_family, rational_string,
    FamilyDoc, MPoly, PolyFamily, Weighting,
};
use crate::{Error, Result};

/// Coefficient `c_{i,j}(alpha)` of `nu_p^i nu_q^j` in the product of two
/// weights `alpha + (nu - 1)(d - nu)`.
pub fn coeff_c(i: usize, j: usize, alpha: i64, d: i64) -> Result<i64> {
    let c = match (i.min(j), i.max(j)) {
        (0, 0) => (alpha - d) * (alpha - d),
        (0, 1) => alpha + (alpha - 1) * d - d * d,
        (1, 1) => (1 + d) * (1 + d),
        (0, 2) => d - alpha,
        (1, 2) => -1 - d,
        (2, 2) => 1,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "c_{{{i},{j}}} needs i, j in 0..=2"
            )))
        }
    };
    Ok(c)
}

/// `alpha + (nu - 1)(d - nu)`.
pub fn weight_factor(nu: i64, alpha: i64, d: i64) -> i64 {
    alpha + (nu - 1) * (d - nu)
}

#[derive(Debug, Clone)]
struct PointData {
    /// `w(n)` times the common denominator.
    numer: BigInt,
    /// `nu_p(n)` per prime of the instance.
    nu: Vec<u64>,
    /// Whether `p` does not divide `g(n) h(n)`, per prime.
    coprime: Vec<bool>,
    gh_nonzero: bool,
}

/// A validated sieve problem: family, auxiliary polynomial, weighting,
/// `alpha` and the prime set `P`.
#[derive(Debug, Clone)]
pub struct SieveInstance {
    family: PolyFamily,
    g: MPoly,
    weighting: Weighting,
    alpha: u64,
    primes: Vec<u64>,
    denom: BigInt,
    data: Vec<PointData>,
}

impl SieveInstance {
    pub fn new(
        family: PolyFamily,
        g: MPoly,
        weighting: Weighting,
        alpha: u64,
        primes: Vec<u64>,
    ) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidInstance("alpha must be at least 1".into()));
        }
        if g.is_zero() {
            return Err(Error::InvalidInstance("g must be nonzero".into()));
        }
        if g.nvars() != family.m() {
            return Err(Error::InvalidInstance(
                "g and the family use different numbers of variables".into(),
            ));
        }
        let mut primes = primes;
        primes.sort_unstable();
        if primes.is_empty() {
            return Err(Error::InvalidInstance("the prime set is empty".into()));
        }
        if let Some(w) = primes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!(
                "prime {} listed twice",
                w[0]
            )));
        }
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        weighting.validate(&family, &g, primes.len())?;

        let denom = weighting
            .weights()
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let data = weighting
            .iter()
            .map(|(n, w)| {
                let gv = g.eval(n)?;
                let h = h_gcd(&family, n)?;
                let nu = primes
                    .iter()
                    .map(|&p| nu_p(&family, n, p))
                    .collect::<Result<Vec<_>>>()?;
                let coprime = primes
                    .iter()
                    .map(|&p| h != 0 && gv != 0 && reduce(gv, p) != 0 && h % p as u128 != 0)
                    .collect();
                let numer = w.numer() * (&denom / w.denom());
                Ok(PointData {
                    numer,
                    nu,
                    coprime,
                    gh_nonzero: h != 0 && gv != 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family,
            g,
            weighting,
            alpha,
            primes,
            denom,
            data,
        })
    }

    pub fn family(&self) -> &PolyFamily {
        &self.family
    }

    pub fn g(&self) -> &MPoly {
        &self.g
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    fn index_of(&self, p: u64) -> Result<usize> {
        self.primes.binary_search(&p).map_err(|_| Error::NotInPool {
            p,
            pool: self.primes.clone(),
        })
    }

    fn ratio(&self, numer: BigInt) -> BigRational {
        BigRational::new(numer, self.denom.clone())
    }

    /// Weight mass per `(nu_p, nu_q)` over points with `gcd(pq, g h) = 1`.
    fn mass_table(&self, ip: usize, iq: usize) -> Vec<Vec<BigInt>> {
        let d = self.family.d();
        let mut mass = vec![vec![BigInt::zero(); d + 1]; d + 1];
        for pt in &self.data {
            if pt.coprime[ip] && pt.coprime[iq] {
                mass[pt.nu[ip] as usize][pt.nu[iq] as usize] += &pt.numer;
            }
        }
        mass
    }

    fn sij_from_mass(mass: &[Vec<BigInt>], i: u32, j: u32) -> BigInt {
        let mut acc = BigInt::zero();
        for (a, row) in mass.iter().enumerate() {
            for (b, m) in row.iter().enumerate() {
                if !m.is_zero() {
                    acc += m * BigInt::from((a as u64).pow(i) * (b as u64).pow(j));
                }
            }
        }
        acc
    }

    /// `S_{i,j}(p, q)`: the sum of `w(n) nu_p(n)^i nu_q(n)^j` over support
    /// points with `gcd(pq, g(n) h(n)) = 1`.
    pub fn s_ij(&self, i: u32, j: u32, p: u64, q: u64) -> Result<BigRational> {
        if i > 2 || j > 2 {
            return Err(Error::InvalidArgument(format!(
                "S_{{{i},{j}}} needs i, j in 0..=2"
            )));
        }
        let mass = self.mass_table(self.index_of(p)?, self.index_of(q)?);
        Ok(self.ratio(Self::sij_from_mass(&mass, i, j)))
    }

    /// All `S_{i,j}(p, q)` for ordered prime pairs, in lexicographic
    /// `(p, q, i, j)` order.
    pub fn sij_table(&self) -> Vec<SijEntry> {
        let k = self.primes.len();
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect();
        pairs
            .par_iter()
            .map(|&(a, b)| {
                let mass = self.mass_table(a, b);
                let mut out = Vec::with_capacity(9);
                for i in 0..3 {
                    for j in 0..3 {
                        out.push(SijEntry {
                            p: self.primes[a],
                            q: self.primes[b],
                            i,
                            j,
                            value: self.ratio(Self::sij_from_mass(&mass, i, j)),
                        });
                    }
                }
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    /// The squared weight sum `Sigma`, evaluated point by point.
    pub fn sigma_direct(&self) -> BigRational {
        let (alpha, d) = (self.alpha as i64, self.family.d() as i64);
        let total = self.data.iter().fold(BigInt::zero(), |acc, pt| {
            let inner: i128 = pt
                .nu
                .iter()
                .zip(&pt.coprime)
                .filter(|(_, &ok)| ok)
                .map(|(&nu, _)| weight_factor(nu as i64, alpha, d) as i128)
                .sum();
            acc + &pt.numer * BigInt::from(inner * inner)
        });
        self.ratio(total)
    }

    /// `sum_{p,q} sum_{i,j} c_{i,j}(alpha) S_{i,j}(p, q)`.
    pub fn expanded_sum(&self) -> BigRational {
        let (alpha, d) = (self.alpha as i64, self.family.d() as i64);
        let c: Vec<BigInt> = (0..9)
            .map(|k| BigInt::from(coeff_c(k / 3, k % 3, alpha, d).expect("indices in range")))
            .collect();
        let k = self.primes.len();
        let total = (0..k * k)
            .into_par_iter()
            .map(|idx| {
                let mass = self.mass_table(idx / k, idx % k);
                (0..9).fold(BigInt::zero(), |acc, t| {
                    acc + &c[t] * Self::sij_from_mass(&mass, (t / 3) as u32, (t % 3) as u32)
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(BigInt::zero(), |acc, x| acc + x);
        self.ratio(total)
    }

    /// `(sigma_direct, expanded_sum)`; the two agree exactly.
    pub fn expansion_check(&self) -> (BigRational, BigRational) {
        (self.sigma_direct(), self.expanded_sum())
    }

    /// Computes `S(A)` directly alongside the sieve bound and the lower
    /// estimate `Sigma >= S(A) min_n (P - omega_P(g(n) h(n)))^2`.
    pub fn sieve_bound(&self) -> Result<SieveReport> {
        let table = self.sij_table();
        let (alpha, d) = (self.alpha as i64, self.family.d() as i64);
        let pcount = self.primes.len();
        let mut bound = BigRational::zero();
        for block in table.chunks(9) {
            let mut inner = BigRational::zero();
            for e in block {
                inner += &e.value * BigInt::from(coeff_c(e.i as usize, e.j as usize, alpha, d)?);
            }
            bound += inner.abs();
        }
        bound /= BigInt::from((pcount * pcount) as u64);

        let mut s_numer = BigInt::zero();
        let mut min_surviving: Option<u64> = None;
        for ((n, _), pt) in self.weighting.iter().zip(&self.data) {
            if pt.numer.is_zero() || !pt.gh_nonzero {
                continue;
            }
            if has_integer_root(&self.family.specialize(n)?)?.is_some() {
                s_numer += &pt.numer;
                let surviving = pt.coprime.iter().filter(|&&ok| ok).count() as u64;
                min_surviving = Some(min_surviving.map_or(surviving, |m| m.min(surviving)));
            }
        }
        let s_of_a = self.ratio(s_numer);
        let sigma = self.sigma_direct();
        let m = min_surviving.unwrap_or(0);
        let lower = &s_of_a * BigInt::from(m * m);
        Ok(SieveReport {
            lower_bound_holds: sigma >= lower,
            s_of_a,
            bound_value: bound,
            sigma_direct: sigma,
            min_surviving_primes: min_surviving,
            lower_bound: lower,
            sij_table: table,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SijEntry {
    pub p: u64,
    pub q: u64,
    pub i: u32,
    pub j: u32,
    #[serde(with = "rational_string")]
    pub value: BigRational,
}

/// Outcome of [`SieveInstance::sieve_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveReport {
    /// Total weight of support points with an integer root.
    #[serde(with = "rational_string")]
    pub s_of_a: BigRational,
    /// `P^{-2} sum_{p,q} |sum_{i,j} c_{i,j}(alpha) S_{i,j}(p, q)|`.
    #[serde(with = "rational_string")]
    pub bound_value: BigRational,
    #[serde(with = "rational_string")]
    pub sigma_direct: BigRational,
    /// Least number of primes of `P` coprime to `g(n) h(n)` over soluble
    /// support points, `None` if there are none.
    pub min_surviving_primes: Option<u64>,
    #[serde(with = "rational_string")]
    pub lower_bound: BigRational,
    pub lower_bound_holds: bool,
    pub sij_table: Vec<SijEntry>,
}

/// One support entry of the JSON instance document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportDoc {
    pub point: Vec<i64>,
    #[serde(default = "one_string")]
    pub weight: String,
}

fn one_string() -> String {
    "1".into()
}

/// JSON form of a sieve instance:
/// `{"family": FamilyDoc, "support": [{"point": [..], "weight": "n/d"}], "primes": [..], "alpha": k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub family: FamilyDoc,
    pub support: Vec<SupportDoc>,
    pub primes: Vec<u64>,
    pub alpha: u64,
}

impl InstanceDoc {
    pub fn build(&self) -> Result<SieveInstance> {
        let (family, g) = self.family.build()?;
        let points = self.support.iter().map(|s| s.point.clone()).collect();
        let weights = self
            .support
            .iter()
            .map(|s| parse_rational(&s.weight))
            .collect::<Result<Vec<_>>>()?;
        SieveInstance::new(
            family,
            g,
            Weighting::new(points, weights)?,
            self.alpha,
            self.primes.clone(),
        )
    }

    pub fn from_instance(inst: &SieveInstance) -> Self {
        Self {
            family: FamilyDoc::from_parts(&inst.family, &inst.g),
            support: inst
                .weighting
                .iter()
                .map(|(n, w)| SupportDoc {
                    point: n.to_vec(),
                    weight: format_rational(w),
                })
                .collect(),
            primes: inst.primes.clone(),
            alpha: inst.alpha,
        }
    }
}

/// The power-sieve instance `x^d - n`, `g(n) = d n`, unit weights on
/// `n = lo..=hi`, with the given primes.
pub fn power_sieve_instance(
    d: usize,
    lo: i64,
    hi: i64,
    primes: Vec<u64>,
    alpha: u64,
) -> Result<SieveInstance> {
    let (family, g) = power_family(d)?;
    let points = (lo..=hi).map(|n| vec![n]).collect();
    SieveInstance::new(family, g, Weighting::unit(points), alpha, primes)
}

/// Both sides of the square-sieve reduction at `n`:
/// `sum_{i,j} c_{i,j}(alpha) nu_p(n)^i nu_q(n)^j` for `x^2 - n`, and
/// `(alpha - 1)^2 + (alpha - 1)((n/p) + (n/q)) + (n/pq)`.
pub fn square_sieve_identity(n: i64, p: u64, q: u64, alpha: i64) -> Result<(i64, i64)> {
    for r in [p, q] {
        if r == 2 || !is_prime(r) {
            return Err(Error::NotOddPrime(r));
        }
    }
    if reduce(2 * n as i128, p) == 0 || reduce(2 * n as i128, q) == 0 {
        return Err(Error::InvalidArgument(format!("gcd({p}*{q}, 2*{n}) != 1")));
    }
    let (family, _) = power_family(2)?;
    let nup = nu_p(&family, &[n], p)? as i64;
    let nuq = nu_p(&family, &[n], q)? as i64;
    let mut lhs = 0;
    for i in 0..3u32 {
        for j in 0..3u32 {
            lhs += coeff_c(i as usize, j as usize, alpha, 2)? * nup.pow(i) * nuq.pow(j);
        }
    }
    let (lp, lq) = (
        legendre(n as i128, p)? as i64,
        legendre(n as i128, q)? as i64,
    );
    let rhs = (alpha - 1) * (alpha - 1) + (alpha - 1) * (lp + lq) + lp * lq;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::primes_up_to;

    #[test]
    fn coefficient_examples() {
        assert_eq!(coeff_c(0, 0, 1, 3).unwrap(), 4);
        assert_eq!(coeff_c(1, 1, 7, 3).unwrap(), 16);
        assert_eq!(coeff_c(1, 0, 2, 2).unwrap(), 0);
        assert!(coeff_c(3, 0, 1, 2).is_err());
    }

    #[test]
    fn cubic_coefficients_match_closed_table() {
        for alpha in 1..6 {
            let table = [
                ((0, 0), (alpha - 3) * (alpha - 3)),
                ((1, 0), 4 * (alpha - 3)),
                ((0, 1), 4 * (alpha - 3)),
                ((1, 1), 16),
                ((2, 0), 3 - alpha),
                ((0, 2), 3 - alpha),
                ((2, 1), -4),
                ((1, 2), -4),
                ((2, 2), 1),
            ];
            for ((i, j), v) in table {
                assert_eq!(coeff_c(i, j, alpha, 3).unwrap(), v);
            }
        }
    }

    #[test]
    fn coefficients_expand_the_weight_product() {
        for d in 1..7 {
            for alpha in 1..5 {
                for a in 0..=d {
                    for b in 0..=d {
                        let direct = weight_factor(a, alpha, d) * weight_factor(b, alpha, d);
                        let mut expanded = 0;
                        for i in 0..3 {
                            for j in 0..3 {
                                expanded += coeff_c(i, j, alpha, d).unwrap()
                                    * a.pow(i as u32)
                                    * b.pow(j as u32);
                            }
                        }
                        assert_eq!(direct, expanded);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_factor_examples() {
        assert_eq!(weight_factor(1, 5, 4), 5);
        assert_eq!(weight_factor(4, 5, 4), 5);
        assert_eq!(weight_factor(2, 1, 3), 2);
        for d in 1..=6 {
            for nu in 1..=d {
                for alpha in 1..5 {
                    assert!(weight_factor(nu, alpha, d) >= alpha);
                }
            }
        }
    }

    #[test]
    fn empty_support_gives_zero() {
        let inst = power_sieve_instance(2, 1, 0, vec![3, 5], 1).unwrap();
        assert!(inst.s_ij(1, 1, 3, 5).unwrap().is_zero());
        let (a, b) = inst.expansion_check();
        assert!(a.is_zero() && b.is_zero());
        let rep = inst.sieve_bound().unwrap();
        assert!(rep.s_of_a.is_zero() && rep.lower_bound_holds);
    }

    #[test]
    fn s00_is_filtered_weight() {
        let inst = power_sieve_instance(2, 1, 60, vec![3, 5, 7, 11, 13], 1).unwrap();
        let filtered = (1..=60).filter(|n| n % 3 != 0 && n % 7 != 0).count();
        assert_eq!(
            inst.s_ij(0, 0, 3, 7).unwrap(),
            BigRational::from_integer(filtered.into())
        );
    }

    #[test]
    fn s10_matches_direct_enumeration() {
        let inst = power_sieve_instance(2, 2, 20, vec![3, 7, 11], 1).unwrap();
        let direct: u64 = (2..=20i64)
            .filter(|n| n % 3 != 0 && n % 7 != 0)
            .map(|n| (0..3i64).filter(|x| (x * x - n).rem_euclid(3) == 0).count() as u64)
            .sum();
        assert_eq!(
            inst.s_ij(1, 0, 3, 7).unwrap(),
            BigRational::from_integer(direct.into())
        );
    }

    #[test]
    fn single_point_examples() {
        // x^2 - 1 at p = 3 has nu = 2 (d = 2), so the weight is alpha.
        let inst = power_sieve_instance(2, 1, 1, vec![3], 1).unwrap();
        assert_eq!(inst.sigma_direct(), BigRational::one());
        // x^2 - 2 at p = 3 has nu = 0: both sides equal (alpha - 2)^2.
        for alpha in 1..4u64 {
            let inst = power_sieve_instance(2, 2, 2, vec![3], alpha).unwrap();
            let (a, b) = inst.expansion_check();
            let expect = BigRational::from_integer(((alpha as i64 - 2).pow(2)).into());
            assert_eq!(a, expect);
            assert_eq!(b, expect);
        }
    }

    #[test]
    fn square_sieve_counts_squares() {
        let primes: Vec<u64> = primes_up_to(50).into_iter().filter(|&p| p >= 3).collect();
        let inst = power_sieve_instance(2, 1, 100, primes, 1).unwrap();
        let rep = inst.sieve_bound().unwrap();
        assert_eq!(rep.s_of_a, BigRational::from_integer(10.into()));
        assert!(rep.lower_bound_holds);
        let (a, b) = inst.expansion_check();
        assert_eq!(a, b);
    }

    #[test]
    fn power_sieve_counts_fourth_powers() {
        let inst = power_sieve_instance(4, 1, 200, vec![3, 5, 7, 11, 13, 17], 2).unwrap();
        let rep = inst.sieve_bound().unwrap();
        let fourth = (1..=200i64)
            .filter(|n| (1..=4).any(|x| x * x * x * x == *n))
            .count();
        assert_eq!(rep.s_of_a, BigRational::from_integer(fourth.into()));
        assert!(rep.lower_bound_holds);
    }

    #[test]
    fn insoluble_support() {
        let inst = power_sieve_instance(2, 2, 3, vec![5, 7], 1).unwrap();
        let rep = inst.sieve_bound().unwrap();
        assert!(rep.s_of_a.is_zero());
        assert_eq!(rep.min_surviving_primes, None);
        assert!(rep.lower_bound_holds);
    }

    #[test]
    fn instance_rejects_bad_input() {
        assert!(power_sieve_instance(2, 1, 5, vec![], 1).is_err());
        assert!(power_sieve_instance(2, 1, 5, vec![3, 3], 1).is_err());
        assert_eq!(
            power_sieve_instance(2, 1, 2, vec![4], 1).unwrap_err(),
            Error::NotPrime(4)
        );
        assert!(power_sieve_instance(2, 1, 2, vec![3], 0).is_err());
        // |n| must stay below e^P.
        assert!(power_sieve_instance(2, 1, 3, vec![3], 1).is_err());
        // g(0) = 0 with nonzero weight.
        assert!(power_sieve_instance(2, 0, 2, vec![3, 5], 1).is_err());
    }

    #[test]
    fn square_sieve_examples() {
        assert_eq!(square_sieve_identity(2, 3, 7, 1).unwrap(), (-1, -1));
        // 4 is a square modulo everything.
        assert_eq!(square_sieve_identity(4, 5, 7, 1).unwrap(), (1, 1));
        let (a, b) = square_sieve_identity(5, 3, 11, 2).unwrap();
        assert_eq!(a, b);
        assert!(square_sieve_identity(3, 3, 7, 1).is_err());
        assert!(square_sieve_identity(4, 2, 7, 1).is_err());
    }

    #[test]
    fn rational_weights_are_exact() {
        let (family, g) = power_family(2).unwrap();
        let w = Weighting::new(
            vec![vec![1], vec![2], vec![4]],
            vec![
                parse_rational("1/3").unwrap(),
                parse_rational("2/7").unwrap(),
                parse_rational("5/6").unwrap(),
            ],
        )
        .unwrap();
        let inst = SieveInstance::new(family, g, w, 1, vec![3, 5]).unwrap();
        let rep = inst.sieve_bound().unwrap();
        assert_eq!(rep.s_of_a, parse_rational("7/6").unwrap());
        let (a, b) = inst.expansion_check();
        assert_eq!(a, b);
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = power_sieve_instance(3, 1, 10, vec![5, 7, 11], 2).unwrap();
        let doc = InstanceDoc::from_instance(&inst);
        let back: InstanceDoc =
            serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.sigma_direct(), inst.sigma_direct());
        let rep = serde_json::to_value(inst.sieve_bound().unwrap()).unwrap();
        assert!(rep["s_of_a"].is_string());
    }
}
