//! Complete exponential sums attached to a quartic context.
//!
//! * [`local`]: `Sigma_t(p; M, N)`, `S_p`, `T_p` and the decomposition of
//!   `Sigma_2` into diagonal and off-diagonal parts.
//! * [`phi`]: the restricted sum `Phi(rho; M, N)` and its CRT assembly.
//! * [`psi`]: `Psi_{i,j}(m, n)` modulo `p q rho`, its factorisation, the
//!   Fourier expansion of `S_{i,j}` and the main terms `M_{i,j}`.
//! * [`scan`]: empirical ratios against the expected envelopes.
//!
//! Sums modulo a prime are accumulated as integer phase histograms, which
//! makes identity checks between them exact. Composite moduli go through
//! compensated double-precision sums.

pub mod local;
pub mod phi;
pub mod psi;
pub mod scan;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::modarith::{centered, is_prime};
use crate::numeric::{CompensatedSum, RootsOfUnity};
use crate::{Error, Result};

pub use local::{
    s_p, sigma2_split, sigma_t, sigma_t_fit, t_p, LocalTables, Sigma2Split, SigmaTFit,
};
pub use phi::{phi, phi_grid, phi_melt, phi_points, phi_product};
pub use psi::{
    alpha_one_main_term, m_ij, psi_direct, psi_factored, s_ij_direct, s_ij_fourier,
    BezoutCofactors, PsiFactors, PsiWeights,
};
pub use scan::{bound_scan, evaluate, BoundScanReport, ScanFamily, ScanRanges, ScanRow};

/// Twist frequencies `(M, N)` with representatives in `(-mod/2, mod/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistFrequencies {
    pub m: i64,
    pub n: i64,
    pub modulus: u64,
}

impl TwistFrequencies {
    pub fn new(m: i128, n: i128, modulus: u64) -> Self {
        Self {
            m: centered(m, modulus),
            n: centered(n, modulus),
            modulus,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.n == 0
    }
}

/// `Gamma(Y, N) = sum_{1 <= y <= Y} e(-N y / modulus)` in closed form.
pub fn gamma_sum(y: u64, n: i128, modulus: u64) -> Complex64 {
    assert!(modulus >= 1);
    let nc = centered(n, modulus);
    if nc == 0 {
        return Complex64::new(y as f64, 0.0);
    }
    // sum_{y=1}^{Y} e^{i t y} = e^{i t (Y + 1) / 2} sin(t Y / 2) / sin(t / 2)
    let theta = -std::f64::consts::TAU * nc as f64 / modulus as f64;
    let half_y = (y % modulus) as f64 * theta / 2.0;
    let mag = half_y.sin() / (theta / 2.0).sin();
    let phase = theta * ((y % modulus) as f64 + 1.0) / 2.0;
    Complex64::from_polar(mag, phase)
}

/// `min(Y, modulus / (2 |N|))` with `N` centred; bounds `|gamma_sum|`.
pub fn gamma_envelope(y: u64, n: i128, modulus: u64) -> f64 {
    let nc = centered(n, modulus).unsigned_abs();
    if nc == 0 {
        y as f64
    } else {
        (y as f64).min(modulus as f64 / (2.0 * nc as f64))
    }
}

/// An element `sum_k c_k zeta^k` of `Z[zeta_p]` for a prime `p`, stored by
/// its coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseHistogram {
    modulus: u64,
    counts: Vec<i64>,
}

impl PhaseHistogram {
    pub fn new(modulus: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Self {
            modulus,
            counts: vec![0; modulus as usize],
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    #[inline]
    pub fn add(&mut self, phase: u64, weight: i64) {
        self.counts[(phase % self.modulus) as usize] += weight;
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus);
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            modulus: self.modulus,
            counts,
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus);
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            modulus: self.modulus,
            counts,
        }
    }

    /// Exact equality in `Z[zeta_p]`: the only relation among
    /// `1, zeta, ..., zeta^{p-1}` is that they sum to zero.
    pub fn same_value(&self, other: &Self) -> bool {
        if self.modulus != other.modulus {
            return false;
        }
        let d0 = self.counts[0] - other.counts[0];
        self.counts
            .iter()
            .zip(&other.counts)
            .all(|(a, b)| a - b == d0)
    }

    /// The value as a rational integer, if it is one.
    pub fn as_integer(&self) -> Option<i64> {
        let Some(&base) = self.counts.get(1) else {
            return Some(self.counts[0]);
        };
        self.counts[1..]
            .iter()
            .all(|&c| c == base)
            .then(|| self.counts[0] - base)
    }

    pub fn value(&self) -> Complex64 {
        let roots = RootsOfUnity::new(self.modulus);
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| roots.at(k as u64) * c as f64)
            .collect::<CompensatedSum>()
            .value()
    }
}
