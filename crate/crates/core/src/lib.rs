//! Polynomial sieve toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`modarith`]: residues, Legendre symbols, root counting modulo prime
//!   powers, Ramanujan and quadratic Gauss sums, CRT plumbing.
//! * [`polyfam`]: integer polynomials, the sieved family `f(x; y)` and
//!   weightings of a finite support.
//! * [`sieve`]: the weighted sieve inequality, its `S_{i,j}` moment sums and
//!   the exact expansion of the squared weight.
//! * [`quartic`]: the reduction of `f(y1)+f(y2) = f(y3)+f(y4)` for quartic
//!   `f` to the variables `(h1, h2, r, s, rho, sigma)`, the auxiliary forms
//!   `F, G, H, K` and prime pools.
//! * [`expsums`]: exact evaluation of the complete exponential sums attached
//!   to a quartic context, their factorisation identities and bound scans.
//! * [`counting`]: representation counts `r_f(n)`, the quadruple count
//!   `E_f(B)`, second moments and the solution census.

pub mod counting;
pub mod error;
pub mod expsums;
pub mod modarith;
pub mod numeric;
pub mod polyfam;
pub mod quartic;
pub mod sieve;

pub use error::{Error, Result};
pub use num::BigRational;
pub use num_complex::Complex64;
