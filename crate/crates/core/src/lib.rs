//! Torsion-clean and nil-clean decompositions of matrix rings over GF(2).
//!
//! A ring element is *n-torsion clean* when it splits as `u + e` with `u` a
//! unit satisfying `u^n = 1` and `e` an idempotent; a ring is *almost
//! n-torsion clean* when every element splits that way, and *n-torsion clean*
//! when `n` is minimal with that property. This crate implements the full
//! toolchain for studying those decompositions in `M_n(F_2)` (all matrices)
//! and `T_n(F_2)` (upper-triangular matrices):
//!
//! * [`gf2poly`] — dense polynomials over GF(2): arithmetic, factorization,
//!   orders, and degree-constrained divisors of `X^n - 1`.
//! * [`numtheory`] — multiplicative orders, Euler phi, binomial parity, and
//!   the knapsack characterization of p-practical numbers.
//! * [`gf2mat`] — bit-packed square matrices over GF(2) up to 64x64, with
//!   rank, inverses, companion matrices, characteristic/minimal polynomials,
//!   unit orders, and idempotent enumeration.
//! * [`canon`] — Frobenius (rational canonical) form with an explicit
//!   similarity transform.
//! * [`decomp`] — constructive torsion-clean and nil-clean decompositions,
//!   plus torsion profiles of the modular rings `Z_n`.
//! * [`certify`] — brute-force certification of almost/exact torsion
//!   cleanness and nil-clean indexes over small rings.
//!
//! All randomized searches draw from a seeded ChaCha stream, so every result
//! in the crate is reproducible; [`DEFAULT_SEED`] is used unless a caller
//! overrides it.

pub mod canon;
pub mod certify;
pub mod decomp;
pub mod gf2mat;
pub mod gf2poly;
pub mod numtheory;

/// Seed used by every randomized search unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 0xF2F2_0001;
