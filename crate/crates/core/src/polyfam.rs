//! The sieved family `f(x; y) = c_0(y) x^d + ... + c_d(y)` and its local data.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::modarith::{count_roots_mod, gcd};
use crate::{Error, Result};

/// Largest root bound for which [`has_integer_root`] will scan.
pub const ROOT_SEARCH_CAP: u128 = 1_000_000;
/// Largest admissible weight denominator.
pub const MAX_WEIGHT_DENOMINATOR: u64 = 1_000_000;

/// Univariate integer polynomial, coefficients with the constant term last.
///
/// Leading zeros are stripped on construction, so the zero polynomial has an
/// empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntPoly {
    coeffs: Vec<i128>,
}

impl IntPoly {
    pub fn new(coeffs: impl Into<Vec<i128>>) -> Self {
        let mut coeffs = coeffs.into();
        let lead = coeffs.iter().position(|&c| c != 0).unwrap_or(coeffs.len());
        coeffs.drain(..lead);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<i128> {
        self.coeffs.first().copied()
    }

    pub fn eval(&self, x: i128) -> Result<i128> {
        self.coeffs.iter().try_fold(0i128, |acc, &c| {
            acc.checked_mul(x)
                .and_then(|v| v.checked_add(c))
                .ok_or(Error::Overflow("polynomial evaluation"))
        })
    }

    /// The derivative, same coefficient order.
    pub fn derivative(&self) -> IntPoly {
        let n = self.coeffs.len();
        IntPoly::new(
            self.coeffs
                .iter()
                .take(n.saturating_sub(1))
                .enumerate()
                .map(|(i, &c)| c * (n - 1 - i) as i128)
                .collect::<Vec<_>>(),
        )
    }

    /// An integer `R` with every complex root of modulus at most `R`: the
    /// smaller of the Cauchy and Fujiwara bounds, rounded up.
    pub fn root_bound(&self) -> Result<u128> {
        let lead = self.leading().ok_or(Error::ZeroPolynomial)?.unsigned_abs();
        let rest = &self.coeffs[1..];
        let cauchy = 1 + rest
            .iter()
            .map(|c| c.unsigned_abs().div_ceil(lead))
            .max()
            .unwrap_or(0);
        let fujiwara = 2 * rest
            .iter()
            .enumerate()
            .map(|(i, c)| int_root_ceil(c.unsigned_abs().div_ceil(lead), i as u32 + 1))
            .max()
            .unwrap_or(0);
        Ok(cauchy.min(fujiwara.max(1)))
    }
}

/// Smallest `t` with `t^k >= x`.
fn int_root_ceil(x: u128, k: u32) -> u128 {
    if x <= 1 || k == 1 {
        return x;
    }
    let mut t = (x as f64).powf(1.0 / k as f64).floor() as u128;
    let pow_ge = |t: u128| t.checked_pow(k).is_none_or(|v| v >= x);
    while t > 0 && pow_ge(t - 1) {
        t -= 1;
    }
    while !pow_ge(t) {
        t += 1;
    }
    t
}

/// Whether `poly` has an integer root, with the root of least absolute value
/// (positive first) as witness.
pub fn has_integer_root(poly: &IntPoly) -> Result<Option<i128>> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let constant = *poly.coeffs.last().expect("nonzero");
    if constant == 0 {
        return Ok(Some(0));
    }
    let bound = poly.root_bound()?;
    if bound > ROOT_SEARCH_CAP {
        return Err(Error::CapExceeded {
            what: "integer root bound",
            value: bound,
            cap: ROOT_SEARCH_CAP,
        });
    }
    for x in 1..=bound as i128 {
        if constant % x != 0 {
            continue;
        }
        for cand in [x, -x] {
            if poly.eval(cand)? == 0 {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// One term `coeff * y_1^exp[0] * ... * y_m^exp[m-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: i128,
    pub exp: Vec<u32>,
}

/// Sparse integer polynomial in `nvars` variables. Like terms are merged and
/// zero terms dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MPoly {
    nvars: usize,
    terms: Vec<Monomial>,
}

impl MPoly {
    pub fn new(nvars: usize, terms: Vec<Monomial>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.exp.len() != nvars) {
            return Err(Error::InvalidFamily(format!(
                "monomial {:?} has {} exponents, expected {nvars}",
                t,
                t.exp.len()
            )));
        }
        let mut terms = terms;
        terms.sort_by(|a, b| a.exp.cmp(&b.exp));
        let mut merged: Vec<Monomial> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exp == t.exp => {
                    last.coeff = last
                        .coeff
                        .checked_add(t.coeff)
                        .ok_or(Error::Overflow("monomial merge"))?
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0);
        Ok(Self {
            nvars,
            terms: merged,
        })
    }

    pub fn constant(nvars: usize, c: i128) -> Self {
        Self::new(
            nvars,
            vec![Monomial {
                coeff: c,
                exp: vec![0; nvars],
            }],
        )
        .expect("well-formed")
    }

    /// `c * y_var`.
    pub fn linear(nvars: usize, var: usize, c: i128) -> Self {
        let mut exp = vec![0; nvars];
        exp[var] = 1;
        Self::new(nvars, vec![Monomial { coeff: c, exp }]).expect("well-formed")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &[i64]) -> Result<i128> {
        if point.len() != self.nvars {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} for a polynomial in {} variables",
                point.len(),
                self.nvars
            )));
        }
        let overflow = || Error::Overflow("multivariate evaluation");
        self.terms.iter().try_fold(0i128, |acc, t| {
            let mut v = t.coeff;
            for (&y, &e) in point.iter().zip(&t.exp) {
                let pw = (y as i128).checked_pow(e).ok_or_else(overflow)?;
                v = v.checked_mul(pw).ok_or_else(overflow)?;
            }
            acc.checked_add(v).ok_or_else(overflow)
        })
    }
}

/// `f(x; y) = c_0(y) x^d + ... + c_d(y)` with `m` auxiliary variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFamily {
    m: usize,
    d: usize,
    coeffs: Vec<MPoly>,
}

impl PolyFamily {
    pub fn new(m: usize, coeffs: Vec<MPoly>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidFamily("m must be at least 1".into()));
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidFamily("degree d must be at least 1".into()));
        }
        if let Some(c) = coeffs.iter().find(|c| c.nvars() != m) {
            return Err(Error::InvalidFamily(format!(
                "coefficient in {} variables, expected {m}",
                c.nvars()
            )));
        }
        if coeffs[0].is_zero() {
            return Err(Error::InvalidFamily(
                "leading coefficient c_0 vanishes identically".into(),
            ));
        }
        Ok(Self {
            m,
            d: coeffs.len() - 1,
            coeffs,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeff_polys(&self) -> &[MPoly] {
        &self.coeffs
    }

    /// The values `c_0(n), ..., c_d(n)`; leading entries may vanish.
    pub fn coefficients_at(&self, n: &[i64]) -> Result<Vec<i128>> {
        self.coeffs.iter().map(|c| c.eval(n)).collect()
    }

    pub fn specialize(&self, n: &[i64]) -> Result<IntPoly> {
        Ok(IntPoly::new(self.coefficients_at(n)?))
    }
}

/// `h(n) = gcd(c_0(n), ..., c_d(n))`, zero exactly when every coefficient
/// vanishes at `n`.
pub fn h_gcd(family: &PolyFamily, n: &[i64]) -> Result<u128> {
    Ok(family.coefficients_at(n)?.into_iter().fold(0, gcd) as u128)
}

/// Number of roots of `f(x; n)` modulo `p`. Returns `p` when the reduction
/// vanishes identically.
pub fn nu_p(family: &PolyFamily, n: &[i64], p: u64) -> Result<u64> {
    count_roots_mod(&family.coefficients_at(n)?, p, 1)
}

/// `x^d - y` with `m = 1` together with the companion `g(y) = d y`.
pub fn power_family(d: usize) -> Result<(PolyFamily, MPoly)> {
    if d < 2 {
        return Err(Error::InvalidFamily("power family needs d >= 2".into()));
    }
    let mut coeffs = vec![MPoly::constant(1, 1)];
    coeffs.extend((1..d).map(|_| MPoly::constant(1, 0)));
    coeffs.push(MPoly::linear(1, 0, -1));
    Ok((PolyFamily::new(1, coeffs)?, MPoly::linear(1, 0, d as i128)))
}

/// The JSON family document
/// `{"m": .., "d": .., "coeffs": [[monomial, ..], ..], "g": [monomial, ..]}`
/// where a monomial is `{"coeff": c, "exp": [e_1, .., e_m]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub m: usize,
    pub d: usize,
    pub coeffs: Vec<Vec<Monomial>>,
    pub g: Vec<Monomial>,
}

impl FamilyDoc {
    pub fn build(&self) -> Result<(PolyFamily, MPoly)> {
        if self.coeffs.len() != self.d + 1 {
            return Err(Error::InvalidFamily(format!(
                "d = {} needs {} coefficient polynomials, got {}",
                self.d,
                self.d + 1,
                self.coeffs.len()
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|t| MPoly::new(self.m, t.clone()))
            .collect::<Result<Vec<_>>>()?;
        let family = PolyFamily::new(self.m, coeffs)?;
        let g = MPoly::new(self.m, self.g.clone())?;
        if g.is_zero() {
            return Err(Error::InvalidFamily(
                "g must be a nonzero polynomial".into(),
            ));
        }
        Ok((family, g))
    }

    pub fn from_parts(family: &PolyFamily, g: &MPoly) -> Self {
        Self {
            m: family.m(),
            d: family.d(),
            coeffs: family
                .coeff_polys()
                .iter()
                .map(|c| c.terms().to_vec())
                .collect(),
            g: g.terms().to_vec(),
        }
    }
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Serde adapter storing a [`BigRational`] as a `"num/den"` string.
pub mod rational_string {
    use num::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Finite support with nonnegative rational weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Weighting {
    points: Vec<Vec<i64>>,
    weights: Vec<BigRational>,
}

impl Weighting {
    pub fn new(points: Vec<Vec<i64>>, weights: Vec<BigRational>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidInstance(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.len() != first.len()) {
                return Err(Error::InvalidInstance(
                    "support points of mixed dimension".into(),
                ));
            }
        }
        let cap = BigInt::from(MAX_WEIGHT_DENOMINATOR);
        for w in &weights {
            if w.is_negative() {
                return Err(Error::InvalidInstance(format!("negative weight {w}")));
            }
            if w.denom() > &cap {
                return Err(Error::InvalidInstance(format!(
                    "weight denominator of {w} exceeds {cap}"
                )));
            }
        }
        Ok(Self { points, weights })
    }

    /// Every point with weight one.
    pub fn unit(points: Vec<Vec<i64>>) -> Self {
        let weights = vec![BigRational::one(); points.len()];
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], &BigRational)> {
        self.points.iter().map(Vec::as_slice).zip(&self.weights)
    }

    pub fn total(&self) -> BigRational {
        self.weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w)
    }

    /// Checks the support conditions against `g` and a prime set of size
    /// `prime_count`: zero weight wherever `g(n) h(n) = 0`, and
    /// `max_i |n_i| < exp(prime_count)` (natural exponential) on the support.
    pub fn validate(&self, family: &PolyFamily, g: &MPoly, prime_count: usize) -> Result<()> {
        for (n, w) in self.iter() {
            if n.len() != family.m() {
                return Err(Error::InvalidInstance(format!(
                    "point {n:?} has dimension {}, family has m = {}",
                    n.len(),
                    family.m()
                )));
            }
            if w.is_zero() {
                continue;
            }
            if g.eval(n)? == 0 || h_gcd(family, n)? == 0 {
                return Err(Error::InvalidInstance(format!(
                    "nonzero weight at {n:?} where g(n) h(n) = 0"
                )));
            }
            let norm = n.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
            if norm > 0 && (norm as f64).ln() >= prime_count as f64 {
                return Err(Error::InvalidInstance(format!(
                    "|n| = {norm} at {n:?} is not below exp(P) with P = {prime_count}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_family() -> PolyFamily {
        power_family(2).unwrap().0
    }

    #[test]
    fn intpoly_trims_and_evaluates() {
        let p = IntPoly::new(vec![0, 0, 1, 0, -4]);
        assert_eq!(p.coeffs(), &[1, 0, -4]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(3).unwrap(), 5);
        assert!(IntPoly::new(vec![0, 0]).is_zero());
        assert_eq!(p.derivative().coeffs(), &[2, 0]);
    }

    #[test]
    fn root_bound_contains_roots() {
        // (x - 7)(x + 3)(x - 100)
        let p = IntPoly::new(vec![1, -104, 379, 2100]);
        assert!(p.root_bound().unwrap() >= 100);
        assert_eq!(int_root_ceil(27, 3), 3);
        assert_eq!(int_root_ceil(28, 3), 4);
        assert_eq!(int_root_ceil(1, 5), 1);
    }

    #[test]
    fn integer_root_examples() {
        assert_eq!(
            has_integer_root(&IntPoly::new(vec![1, 0, -4])).unwrap(),
            Some(2)
        );
        assert_eq!(
            has_integer_root(&IntPoly::new(vec![1, 0, -2])).unwrap(),
            None
        );
        assert_eq!(
            has_integer_root(&IntPoly::new(vec![1, 0, 0, -27])).unwrap(),
            Some(3)
        );
        assert_eq!(
            has_integer_root(&IntPoly::new(vec![2, 3, 0])).unwrap(),
            Some(0)
        );
        assert_eq!(has_integer_root(&IntPoly::new(vec![5])).unwrap(), None);
        assert_eq!(
            has_integer_root(&IntPoly::new(vec![0])),
            Err(Error::ZeroPolynomial)
        );
        assert!(matches!(
            has_integer_root(&IntPoly::new(vec![1, -5_000_000])),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn h_gcd_examples() {
        let fam = square_family();
        assert_eq!(h_gcd(&fam, &[6]).unwrap(), 1);
        // n x^3 + n^2
        let fam = PolyFamily::new(
            1,
            vec![
                MPoly::linear(1, 0, 1),
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
        assert_eq!(h_gcd(&fam, &[0]).unwrap(), 0);
    }

    #[test]
    fn nu_p_examples() {
        let fam = square_family();
        assert_eq!(nu_p(&fam, &[2], 7).unwrap(), 2);
        assert_eq!(nu_p(&fam, &[3], 7).unwrap(), 0);
        for d in 2..6 {
            let (fam, _) = power_family(d).unwrap();
            for p in [2, 3, 5, 7] {
                assert_eq!(nu_p(&fam, &[0], p).unwrap(), 1);
            }
        }
        let (fam4, g4) = power_family(4).unwrap();
        assert_eq!(nu_p(&fam4, &[1], 5).unwrap(), 4);
        assert_eq!(g4.eval(&[3]).unwrap(), 12);
    }

    #[test]
    fn leading_coefficient_must_not_vanish() {
        let r = PolyFamily::new(1, vec![MPoly::constant(1, 0), MPoly::linear(1, 0, 1)]);
        assert!(matches!(r, Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn family_json_round_trip() {
        let (fam, g) = power_family(3).unwrap();
        let doc = FamilyDoc::from_parts(&fam, &g);
        let text = serde_json::to_string(&doc).unwrap();
        let back: FamilyDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), (fam, g));
        let bad = r#"{"m":1,"d":2,"coeffs":[[{"coeff":1,"exp":[0]}],[]],"g":[]}"#;
        let doc: FamilyDoc = serde_json::from_str(bad).unwrap();
        assert!(doc.build().is_err());
    }

    #[test]
    fn rational_strings() {
        let q = parse_rational("6/4").unwrap();
        assert_eq!(format_rational(&q), "3/2");
        assert_eq!(format_rational(&parse_rational("-5").unwrap()), "-5");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn weighting_validation() {
        let (fam, g) = power_family(2).unwrap();
        let w = Weighting::unit(vec![vec![1], vec![2]]);
        assert!(w.validate(&fam, &g, 1).is_ok());
        // e^1 < 3
        let w = Weighting::unit(vec![vec![3]]);
        assert!(w.validate(&fam, &g, 1).is_err());
        assert!(w.validate(&fam, &g, 2).is_ok());
        // g(0) = 0
        let w = Weighting::unit(vec![vec![0]]);
        assert!(w.validate(&fam, &g, 3).is_err());
        let w = Weighting::new(vec![vec![0]], vec![BigRational::zero()]).unwrap();
        assert!(w.validate(&fam, &g, 3).is_ok());
        assert!(Weighting::new(vec![vec![1]], vec![parse_rational("-1").unwrap()]).is_err());
        assert!(Weighting::new(vec![vec![1]], vec![parse_rational("1/1000001").unwrap()]).is_err());
    }
}
