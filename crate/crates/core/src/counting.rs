//! Equal sums `f(y1) + f(y2) = f(y3) + f(y4)` over positive integers.
//!
//! Everything here counts **ordered** tuples. `E_f(B)` is the number of
//! `(y1, y2, y3, y4)` in `[1, B]^4` with equal sums and
//! `{y1, y2} != {y3, y4}`, so `1^3 + 12^3 = 9^3 + 10^3` contributes 8.
//! `r_f(n)` counts ordered pairs `(y, z)`, so `r_{x^3}(1729) = 4`.
//!
//! Pair sums are sorted and grouped. In a group with `a` unordered pairs
//! `y < z` and `b` pairs `y = z` there are `T = 2a + b` ordered pairs,
//! `T^2` ordered quadruples and `4a + b` trivial ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::polyfam::IntPoly;
use crate::quartic::{classify_solution, forward_transform, QuarticParams, Reduced, SolutionClass};
use crate::{Error, Result};

/// Default cap on `B` for [`count_e`].
pub const DEFAULT_B_CAP: u64 = 10_000;

/// Hard cap on `B`.
pub const MAX_B: u64 = 50_000;

/// Cap on the number of ordered pairs enumerated by [`r_table`].
pub const PAIR_CAP: u128 = 100_000_000;

/// Cap on `B` for [`census`].
pub const CENSUS_B_CAP: u64 = 500;

/// Largest `|f(y)|` accepted, so that `2 (f(y) + f(z)) + 1` fits in `i128`.
const VALUE_LIMIT: u128 = 1 << 124;

/// Checks that `f` has positive leading coefficient.
fn check_poly(f: &IntPoly) -> Result<()> {
    match f.leading() {
        None => Err(Error::ZeroPolynomial),
        Some(c) if c < 0 => Err(Error::InvalidArgument(
            "leading coefficient must be positive".into(),
        )),
        Some(_) if f.degree() == Some(0) => {
            Err(Error::InvalidArgument("f must be nonconstant".into()))
        }
        Some(_) => Ok(()),
    }
}

/// `f(1), ..., f(B)`.
fn values(f: &IntPoly, b: u64) -> Result<Vec<i128>> {
    check_poly(f)?;
    (1..=b as i128)
        .map(|y| {
            let v = f.eval(y)?;
            if v.unsigned_abs() >= VALUE_LIMIT {
                return Err(Error::Overflow("f(y) exceeds 2^124"));
            }
            Ok(v)
        })
        .collect()
}

/// A sorted key `2 (f(y) + f(z)) + [y = z]` per unordered pair `y <= z`.
trait PairKey: Ord + Copy + Send + Sync + Into<i128> + TryFrom<i128> {}
impl PairKey for i64 {}
impl PairKey for i128 {}

fn sorted_keys<K: PairKey>(vals: &[i128]) -> Vec<K> {
    let n = vals.len();
    let mut keys: Vec<K> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i..n).map(move |j| {
                let key = 2 * (vals[i] + vals[j]) + (i == j) as i128;
                K::try_from(key)
                    .ok()
                    .expect("key width chosen from the value range")
            })
        })
        .collect();
    keys.par_sort_unstable();
    keys
}

/// Totals over the collision groups of the sorted keys.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct GroupTotals {
    /// Sum of `T` over groups: ordered pairs.
    ordered_pairs: u128,
    /// Sum of `b`: diagonal pairs.
    diagonal: u128,
    /// Sum of `T^2 - 4a - b`: nontrivial ordered quadruples.
    nontrivial: u128,
}

fn group_totals<K: PairKey>(keys: &[K]) -> GroupTotals {
    let mut totals = GroupTotals::default();
    let mut flush = |a: u128, b: u128| {
        let t = 2 * a + b;
        totals.ordered_pairs += t;
        totals.diagonal += b;
        totals.nontrivial += t * t - 4 * a - b;
    };
    let (mut current, mut a, mut b) = (None::<i128>, 0u128, 0u128);
    for &k in keys {
        let k: i128 = k.into();
        let sum = k >> 1;
        if current != Some(sum) {
            if current.is_some() {
                flush(a, b);
            }
            current = Some(sum);
            a = 0;
            b = 0;
        }
        if k & 1 == 1 {
            b += 1;
        } else {
            a += 1;
        }
    }
    if current.is_some() {
        flush(a, b);
    }
    totals
}

fn totals_for(vals: &[i128]) -> GroupTotals {
    let max = vals.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    if max < 1 << 60 {
        group_totals(&sorted_keys::<i64>(vals))
    } else {
        group_totals(&sorted_keys::<i128>(vals))
    }
}

/// `E_f(B)` with the default cap on `B`.
pub fn count_e(f: &IntPoly, b: u64) -> Result<u128> {
    count_e_capped(f, b, DEFAULT_B_CAP)
}

/// `E_f(B)` with an explicit cap (at most [`MAX_B`]).
pub fn count_e_capped(f: &IntPoly, b: u64, cap: u64) -> Result<u128> {
    if cap > MAX_B {
        return Err(Error::CapExceeded {
            what: "B cap",
            value: cap as u128,
            cap: MAX_B as u128,
        });
    }
    if b > cap {
        return Err(Error::CapExceeded {
            what: "B",
            value: b as u128,
            cap: cap as u128,
        });
    }
    Ok(totals_for(&values(f, b)?).nontrivial)
}

/// `E_f(B)` on a dedicated pool of `workers` threads.
pub fn count_e_with_workers(f: &IntPoly, b: u64, cap: u64, workers: usize) -> Result<u128> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| count_e_capped(f, b, cap))
}

/// Representation counts `r_f(n)` for `n <= N`, sorted by `n`, zero counts
/// omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RTable {
    pub n_max: i128,
    pub entries: Vec<(i128, u64)>,
}

impl RTable {
    pub fn get(&self, n: i128) -> u64 {
        self.entries
            .binary_search_by_key(&n, |&(k, _)| k)
            .map_or(0, |i| self.entries[i].1)
    }

    /// How many `n` have each value of `r_f(n)`, indexed by `r`.
    pub fn distribution(&self) -> Vec<u64> {
        let top = self.entries.iter().map(|&(_, r)| r).max().unwrap_or(0);
        let mut out = vec![0u64; top as usize + 1];
        for &(_, r) in &self.entries {
            out[r as usize] += 1;
        }
        out
    }
}

/// `f(y)` for every `y >= 1` that can appear in a pair sum `<= n_max`.
fn values_up_to(f: &IntPoly, n_max: i128) -> Result<Vec<i128>> {
    check_poly(f)?;
    // f is increasing beyond every real root of f'.
    let rising_from = match f.degree() {
        Some(d) if d >= 2 => f.derivative().root_bound()? as i128 + 1,
        _ => 1,
    };
    let mut vals = Vec::new();
    let mut low = i128::MAX;
    for y in 1..=rising_from {
        let v = f.eval(y)?;
        low = low.min(v);
        vals.push(v);
    }
    let mut y = rising_from;
    loop {
        y += 1;
        let v = f.eval(y)?;
        if v.checked_add(low).is_none_or(|s| s > n_max) {
            break;
        }
        if v.unsigned_abs() >= VALUE_LIMIT {
            return Err(Error::Overflow("f(y) exceeds 2^124"));
        }
        vals.push(v);
    }
    Ok(vals)
}

/// Ordered pairs `(i, j)` with `vals[i] + vals[j] <= n_max`.
fn ordered_pair_count(sorted: &[i128], n_max: i128) -> u128 {
    let mut hi = sorted.len();
    let mut count = 0u128;
    for &v in sorted {
        while hi > 0 && v + sorted[hi - 1] > n_max {
            hi -= 1;
        }
        count += hi as u128;
    }
    count
}

/// `r_f(n) = #{(y, z) in Z_{>0}^2 : f(y) + f(z) = n}` for all `n <= N`.
pub fn r_table(f: &IntPoly, n_max: i128) -> Result<RTable> {
    let mut vals = values_up_to(f, n_max)?;
    vals.sort_unstable();
    let pairs = ordered_pair_count(&vals, n_max);
    if pairs > PAIR_CAP {
        return Err(Error::CapExceeded {
            what: "ordered pairs",
            value: pairs,
            cap: PAIR_CAP,
        });
    }
    let mut sums: Vec<i128> = vals
        .par_iter()
        .flat_map_iter(|&v| {
            vals.iter()
                .map(move |&w| v + w)
                .take_while(move |&s| s <= n_max)
        })
        .collect();
    sums.par_sort_unstable();
    let mut entries: Vec<(i128, u64)> = Vec::new();
    for s in sums {
        match entries.last_mut() {
            Some((k, c)) if *k == s => *c += 1,
            _ => entries.push((s, 1)),
        }
    }
    Ok(RTable { n_max, entries })
}

/// `R = sum r(n)`, `R2 = sum r(n)^2`, `D = #{y : 2 f(y) <= N}` and
/// `Estar`, the nontrivial ordered quadruples with common sum `<= N`.
/// `R2 = 2R - D + Estar` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n_max: i128,
    pub r: u128,
    pub r2: u128,
    pub d: u128,
    pub estar: u128,
    /// `R2 / R`, absent when `R = 0`.
    pub ratio: Option<f64>,
}

impl MomentReport {
    pub fn identity_holds(&self) -> bool {
        self.r2 + self.d == 2 * self.r + self.estar
    }
}

pub fn moments(f: &IntPoly, n_max: i128) -> Result<MomentReport> {
    let table = r_table(f, n_max)?;
    let r: u128 = table.entries.iter().map(|&(_, c)| c as u128).sum();
    let r2: u128 = table.entries.iter().map(|&(_, c)| (c as u128).pow(2)).sum();
    let vals = values_up_to(f, n_max)?;
    let d = vals.iter().filter(|&&v| 2 * v <= n_max).count() as u128;
    // Unordered pairs with sum <= N, grouped independently of the table.
    let mut keys: Vec<i128> = Vec::new();
    for i in 0..vals.len() {
        for j in i..vals.len() {
            let s = vals[i] + vals[j];
            if s <= n_max {
                keys.push(2 * s + (i == j) as i128);
            }
        }
    }
    keys.par_sort_unstable();
    let totals = group_totals(&keys);
    let report = MomentReport {
        n_max,
        r,
        r2,
        d,
        estar: totals.nontrivial,
        ratio: (r > 0).then(|| r2 as f64 / r as f64),
    };
    if !report.identity_holds() || totals.ordered_pairs != r || totals.diagonal != d {
        return Err(Error::InvalidArgument(format!(
            "moment identity failed: {report:?}"
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub b: u64,
    pub e: u128,
    /// `E / B^2`.
    pub e_over_b2: f64,
    /// `E / B^(11/6)`.
    pub e_over_b_11_6: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
}

impl GrowthTable {
    /// `E` nondecreasing in `B`.
    pub fn is_monotone(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by_key(|r| r.b);
        rows.windows(2).all(|w| w[0].e <= w[1].e)
    }

    /// `E / B^2` non-increasing in `B`.
    pub fn normalized_non_increasing(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by_key(|r| r.b);
        rows.windows(2).all(|w| w[1].e_over_b2 <= w[0].e_over_b2)
    }
}

pub fn growth_scan(f: &IntPoly, bs: &[u64]) -> Result<GrowthTable> {
    let rows = bs
        .iter()
        .map(|&b| {
            let e = count_e(f, b)?;
            let bf = b as f64;
            Ok(GrowthRow {
                b,
                e,
                e_over_b2: e as f64 / bf.powi(2),
                e_over_b_11_6: e as f64 / bf.powf(11.0 / 6.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = GrowthTable { rows };
    if !table.is_monotone() {
        return Err(Error::InvalidArgument("E_f(B) decreased in B".into()));
    }
    Ok(table)
}

/// Every nontrivial ordered quadruple in `[1, B]^4`, sorted.
pub fn nontrivial_quadruples(f: &IntPoly, b: u64) -> Result<Vec<[i64; 4]>> {
    if b > CENSUS_B_CAP {
        return Err(Error::CapExceeded {
            what: "B",
            value: b as u128,
            cap: CENSUS_B_CAP as u128,
        });
    }
    let vals = values(f, b)?;
    let mut pairs: Vec<(i128, i64, i64)> = Vec::new();
    for y in 1..=b as i64 {
        for z in y..=b as i64 {
            pairs.push((vals[y as usize - 1] + vals[z as usize - 1], y, z));
        }
    }
    pairs.sort_unstable();
    let orderings = |y: i64, z: i64| {
        if y == z {
            vec![(y, z)]
        } else {
            vec![(y, z), (z, y)]
        }
    };
    let mut out = Vec::new();
    for group in pairs.chunk_by(|a, b| a.0 == b.0) {
        for (i, &(_, a1, a2)) in group.iter().enumerate() {
            for (j, &(_, b1, b2)) in group.iter().enumerate() {
                if i == j {
                    continue;
                }
                for (y1, y2) in orderings(a1, a2) {
                    for (y3, y4) in orderings(b1, b2) {
                        out.push([y1, y2, y3, y4]);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordStatus {
    Transformed,
    /// `u1 = v1`, the degenerate family handled separately.
    EqualDifferences,
    /// No ordering satisfies `y1 > y3 >= y4 > y2` (non-injective `f`).
    NonCanonical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleRecord {
    pub y: [i64; 4],
    pub status: RecordStatus,
    pub canonical: Option<[i64; 4]>,
    pub intermediate: Option<[i64; 4]>,
    pub reduced: Option<Reduced>,
    pub class: Option<SolutionClass>,
    pub big_a: Option<i128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub params: QuarticParams,
    pub b: u64,
    pub c_bound: u64,
    pub h_bound: u64,
    pub n1: u64,
    pub n2: u64,
    pub degenerate: u64,
    pub noncanonical: u64,
    pub records: Vec<QuadrupleRecord>,
}

impl Census {
    pub fn total(&self) -> u64 {
        self.n1 + self.n2 + self.degenerate + self.noncanonical
    }
}

/// `f = x^4 + a x^2 + b x` as an [`IntPoly`].
pub fn quartic_poly(params: QuarticParams) -> IntPoly {
    IntPoly::new(params.coeffs().to_vec())
}

/// Transforms and classifies every nontrivial solution at `B`.
pub fn census(params: QuarticParams, b: u64, c_bound: u64, h_bound: u64) -> Result<Census> {
    let quads = nontrivial_quadruples(&quartic_poly(params), b)?;
    let mut census = Census {
        params,
        b,
        c_bound,
        h_bound,
        n1: 0,
        n2: 0,
        degenerate: 0,
        noncanonical: 0,
        records: Vec::new(),
    };
    for y in quads {
        let mut record = QuadrupleRecord {
            y,
            status: RecordStatus::Transformed,
            canonical: None,
            intermediate: None,
            reduced: None,
            class: None,
            big_a: None,
        };
        match forward_transform(y, params) {
            Ok(ts) => {
                let class = classify_solution(&ts, c_bound, h_bound)?;
                match class.class {
                    SolutionClass::N1 => census.n1 += 1,
                    SolutionClass::N2 => census.n2 += 1,
                }
                record.canonical = Some(ts.original);
                record.intermediate = Some(ts.intermediate);
                record.reduced = Some(ts.reduced);
                record.class = Some(class.class);
                record.big_a = Some(class.big_a);
            }
            Err(Error::EqualDifferences(_)) => {
                census.degenerate += 1;
                record.status = RecordStatus::EqualDifferences;
            }
            Err(Error::NonCanonical(_)) => {
                census.noncanonical += 1;
                record.status = RecordStatus::NonCanonical;
            }
            Err(e) => return Err(e),
        }
        census.records.push(record);
    }
    Ok(census)
}
