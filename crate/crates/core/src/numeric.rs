//! Complex accumulation helpers shared by the exponential-sum code.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier-compensated complex sum, applied to each component.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    /// Merges another partial sum; used for the fixed-order reduction of
    /// parallel partitions.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(Complex64::new(other.re, other.im));
        self.add(Complex64::new(other.re_c, other.im_c));
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// `e(k / modulus) = exp(2 pi i k / modulus)` with `k` reduced exactly first.
pub fn e_mod(k: i128, modulus: u64) -> Complex64 {
    let m = modulus as i128;
    let r = k.rem_euclid(m);
    Complex64::from_polar(1.0, TAU * (r as f64) / (modulus as f64))
}

/// Precomputed `e(k / modulus)` for `k` in `[0, modulus)`.
#[derive(Debug, Clone)]
pub struct RootsOfUnity {
    modulus: u64,
    table: Vec<Complex64>,
}

impl RootsOfUnity {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1);
        let table = (0..modulus).map(|k| e_mod(k as i128, modulus)).collect();
        Self { modulus, table }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn e(&self, k: i128) -> Complex64 {
        self.table[k.rem_euclid(self.modulus as i128) as usize]
    }

    #[inline]
    pub fn at(&self, reduced: u64) -> Complex64 {
        self.table[reduced as usize]
    }
}

/// Relative distance `|x - y| / max(1, |x|, |y|)`.
pub fn rel_err(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm()).max(1.0);
    (x - y).norm() / scale
}

/// `W(m, n) = sum w e((m r + n s) / modulus)` over sparse entries
/// `(r, s, w)`, evaluated at every `(m, n)` in `ms x ns`.
///
/// The result is row-major in `ms`. Work splits over `ns`, and each output
/// is accumulated in a fixed order, so results do not depend on the thread
/// count.
pub fn dft2_sparse(
    entries: &[(u64, u64, f64)],
    modulus: u64,
    ms: &[u64],
    ns: &[u64],
) -> Vec<Complex64> {
    let roots = RootsOfUnity::new(modulus);
    let len = modulus as usize;
    // cols[k][r] = sum over entries with first coordinate r of w e(n_k s).
    let cols: Vec<Vec<Complex64>> = ns
        .par_iter()
        .map(|&n| {
            let mut acc = vec![CompensatedSum::new(); len];
            let n = n % modulus;
            for &(r, s, w) in entries {
                acc[r as usize].add(roots.at(n * s % modulus) * w);
            }
            acc.iter().map(CompensatedSum::value).collect()
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = ms
        .par_iter()
        .map(|&m| {
            let m = m % modulus;
            cols.iter()
                .map(|col| {
                    col.iter()
                        .enumerate()
                        .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
                        .map(|(r, z)| roots.at(m * r as u64 % modulus) * z)
                        .collect::<CompensatedSum>()
                        .value()
                })
                .collect()
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// `0..modulus` as a frequency list.
pub fn all_frequencies(modulus: u64) -> Vec<u64> {
    (0..modulus).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_cancels_roots_of_unity() {
        let m = 1009;
        let s: CompensatedSum = (0..m).map(|k| e_mod(k, m as u64)).collect();
        assert!(s.value().norm() < 1e-12);
    }

    #[test]
    fn roots_table_matches_direct() {
        let r = RootsOfUnity::new(12);
        assert!((r.e(-1) - e_mod(11, 12)).norm() < 1e-15);
        assert!((r.e(3) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn sparse_dft_matches_direct() {
        let m = 7u64;
        let entries = vec![(0, 1, 2.0), (3, 5, -1.0), (6, 6, 0.5), (3, 5, 4.0)];
        let ms = vec![0, 2, 9];
        let ns = vec![1, 4];
        let got = dft2_sparse(&entries, m, &ms, &ns);
        for (a, &mm) in ms.iter().enumerate() {
            for (b, &nn) in ns.iter().enumerate() {
                let direct: Complex64 = entries
                    .iter()
                    .map(|&(r, s, w)| e_mod((mm * r + nn * s) as i128, m) * w)
                    .sum();
                assert!((got[a * ns.len() + b] - direct).norm() < 1e-12);
            }
        }
    }
}
