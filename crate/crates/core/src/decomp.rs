//! Constructive decompositions of matrices over GF(2): writing a matrix as
//! idempotent + unit with a prescribed unit exponent (via companion blocks
//! of the Frobenius normal form), idempotent + nilpotent witnesses, and the
//! analogous torsion profile of the integers mod n.
//!
//! The central step works on one companion block `C` of polynomial `q`:
//! find an idempotent `E` such that `C + E` has characteristic polynomial
//! `r`, where `r` is a degree-matched divisor of `X^n - 1`. Then
//! `(C + E)^n = I` by Cayley-Hamilton, so `C = E + U` with `U^n = I`.
//! Adding a rank-`k` idempotent can only shift the `X^(s-1)` coefficient by
//! `k mod 2` (the trace), which pins the achievable ranks to one parity
//! class; the search ladder exploits the easy cases first:
//!
//! 1. `q = r`: take `E = 0`;
//! 2. `charpoly(C + I) = r`: take `E = I`;
//! 3. block size at most 5: exhaustive scan of the idempotent table;
//! 4. block size at most 10: randomized rank-parity-matched draws under a
//!    retry budget.
//!
//! Searches are deterministic: each (q, r) search runs on a fresh RNG
//! seeded from the configuration, and outcomes are cached, so repeated and
//! reordered calls agree.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::{assemble_block_diagonal, frobenius_form};
use crate::gf2mat::{self, Mat, RingSpec};
use crate::gf2poly::{divisor_of_degree, divisors_of_degree, Poly, PolyError};
use crate::numtheory;

/// Largest block size the randomized search rung accepts.
pub const MAX_SEARCH_DIM: usize = 10;

/// Largest modulus [`zn_torsion_profile`] accepts.
pub const MAX_MODULUS: u64 = 10_000;

/// Seed and retry budget for the randomized search rung.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub seed: u64,
    /// Maximum idempotent draws per block search.
    pub budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { seed: crate::DEFAULT_SEED, budget: 1_000_000 }
    }
}

/// Which rung of the search ladder produced a block's idempotent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    ZeroIdempotent,
    IdentityIdempotent,
    ExhaustiveScan,
    RandomizedDraw,
    /// Pipeline fallback: no divisor target was reachable, so the block was
    /// scanned directly for an idempotent making it an n-th root of the
    /// identity (the unit's minimal polynomial then divides `X^n - 1` even
    /// though its characteristic polynomial does not).
    ExponentScan,
    /// Randomized variant of the direct-exponent fallback.
    RandomizedExponentDraw,
}

/// A verified `input = e + u` decomposition with `u^exponent = I`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TorsionDecomposition {
    pub e: Mat,
    pub u: Mat,
    /// The requested exponent `n`; `u^n = I`.
    pub exponent: u64,
    /// The exact multiplicative order of `u`; divides `exponent`.
    pub unit_order: u128,
    pub idempotent_rank: usize,
    /// Ladder rung used for each companion block, in block order.
    pub strategies: Vec<Strategy>,
}

/// A verified `input = e + nil` decomposition with `nil` nilpotent.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct NilCleanDecomposition {
    pub e: Mat,
    pub nil: Mat,
    /// Least `k` with `nil^k = 0`.
    pub nil_index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompError {
    /// The matrix handed in as a companion block is not one.
    NotCompanion,
    /// Declared block size disagrees with the matrix or polynomial.
    SizeMismatch { declared: usize, matrix: usize, polynomial: usize },
    /// The target polynomial does not divide `X^n - 1`.
    NotDivisor { r: Poly, n: u64 },
    /// `X^n - 1` has no divisor of the degree a block needs.
    NoDivisorOfDegree { n: u64, degree: usize },
    /// Every ladder rung failed within budget (block size over the search
    /// range, or the randomized rung exhausted its draws).
    SearchFailed { q: Poly, r: Poly, draws: u64 },
    /// The direct-exponent fallback also failed for a block.
    ExponentSearchFailed { q: Poly, n: u64, draws: u64 },
    /// The randomized nil-clean search exhausted its draws.
    NilSearchFailed { dim: usize, draws: u64 },
    /// Exponents must be positive.
    BadExponent { n: u64 },
    /// Dimension outside the supported search range.
    DimensionOutOfRange { dim: usize, max: usize },
    /// Modulus outside 2..=10^4.
    BadModulus { modulus: u64 },
    /// Polynomial-level failure bubbled up.
    Poly(PolyError),
}

impl fmt::Display for DecompError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompError::NotCompanion => write!(f, "matrix is not a companion matrix"),
            DecompError::SizeMismatch { declared, matrix, polynomial } => write!(
                f,
                "size mismatch: declared {declared}, matrix {matrix}, polynomial degree {polynomial}"
            ),
            DecompError::NotDivisor { r, n } => {
                write!(f, "{r} does not divide X^{n} - 1")
            }
            DecompError::NoDivisorOfDegree { n, degree } => {
                write!(f, "X^{n} - 1 has no divisor of degree {degree}")
            }
            DecompError::SearchFailed { q, r, draws } => write!(
                f,
                "no idempotent found for block {q} with target {r} after {draws} draws"
            ),
            DecompError::ExponentSearchFailed { q, n, draws } => write!(
                f,
                "no idempotent makes block {q} an {n}-th root of identity ({draws} draws)"
            ),
            DecompError::NilSearchFailed { dim, draws } => {
                write!(f, "no nil-clean witness found in dimension {dim} after {draws} draws")
            }
            DecompError::BadExponent { n } => write!(f, "exponent {n} must be positive"),
            DecompError::DimensionOutOfRange { dim, max } => {
                write!(f, "dimension {dim} outside the search range (max {max})")
            }
            DecompError::BadModulus { modulus } => {
                write!(f, "modulus {modulus} outside 2..={MAX_MODULUS}")
            }
            DecompError::Poly(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DecompError {}

impl From<PolyError> for DecompError {
    fn from(e: PolyError) -> Self {
        DecompError::Poly(e)
    }
}

/// Decomposition engine: holds the search configuration, per-size
/// idempotent tables, and a cache of per-(q, r) block search outcomes, so
/// exhaustive sweeps over a ring share the work of repeated block shapes.
pub struct Decomposer {
    config: SearchConfig,
    idem_tables: HashMap<usize, Vec<Mat>>,
    block_cache: HashMap<(Poly, Poly), Result<(Mat, Strategy), DecompError>>,
    exponent_cache: HashMap<(Poly, u64), Result<(Mat, Strategy), DecompError>>,
}

impl Decomposer {
    pub fn new(config: SearchConfig) -> Self {
        Decomposer {
            config,
            idem_tables: HashMap::new(),
            block_cache: HashMap::new(),
            exponent_cache: HashMap::new(),
        }
    }

    pub fn config(&self) -> SearchConfig {
        self.config
    }

    fn idempotent_table(&mut self, s: usize) -> &[Mat] {
        self.idem_tables.entry(s).or_insert_with(|| {
            gf2mat::idempotents(RingSpec::full(s))
                .expect("table sizes stay within the enumeration budget")
                .collect()
        })
    }

    /// Find an idempotent `E` with `charpoly(companion(q) + E) = r` by the
    /// search ladder; cached per (q, r).
    fn block_idempotent(&mut self, q: &Poly, r: &Poly) -> Result<(Mat, Strategy), DecompError> {
        let key = (q.clone(), r.clone());
        if let Some(hit) = self.block_cache.get(&key) {
            return hit.clone();
        }
        let out = self.block_idempotent_uncached(q, r);
        self.block_cache.insert(key, out.clone());
        out
    }

    fn block_idempotent_uncached(
        &mut self,
        q: &Poly,
        r: &Poly,
    ) -> Result<(Mat, Strategy), DecompError> {
        let s = q.degree().expect("block polynomials are nonconstant");
        let c = Mat::companion(q).expect("block degrees are in range");
        if q == r {
            return Ok((Mat::zero(s), Strategy::ZeroIdempotent));
        }
        if c.add(&Mat::identity(s)).charpoly() == *r {
            return Ok((Mat::identity(s), Strategy::IdentityIdempotent));
        }
        // Adding a rank-k idempotent shifts the X^(s-1) coefficient by the
        // trace, i.e. by k mod 2; only one parity class of ranks can work.
        let parity = (r.coeff(s - 1) != q.coeff(s - 1)) as usize;
        if s <= 5 {
            let table: Vec<Mat> = self
                .idempotent_table(s)
                .iter()
                .filter(|e| (e.diagonal().count_ones() as usize) % 2 == parity)
                .cloned()
                .collect();
            for e in table {
                if c.add(&e).charpoly() == *r {
                    return Ok((e, Strategy::ExhaustiveScan));
                }
            }
            return Err(DecompError::SearchFailed { q: q.clone(), r: r.clone(), draws: 0 });
        }
        if s <= MAX_SEARCH_DIM {
            let ranks: Vec<usize> = (0..=s).filter(|k| k % 2 == parity).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
            for draw in 0..self.config.budget {
                let k = ranks[draw as usize % ranks.len()];
                let Ok(e) = gf2mat::rand_idempotent(&mut rng, s, k) else {
                    continue;
                };
                if c.add(&e).charpoly() == *r {
                    return Ok((e, Strategy::RandomizedDraw));
                }
            }
        }
        Err(DecompError::SearchFailed {
            q: q.clone(),
            r: r.clone(),
            draws: if s <= MAX_SEARCH_DIM { self.config.budget } else { 0 },
        })
    }

    /// Pipeline fallback when no divisor target is reachable: look for any
    /// idempotent `E` with `(companion(q) + E)^n = I` directly. This is
    /// strictly weaker than steering the characteristic polynomial — the
    /// unit's minimal polynomial still divides `X^n - 1`, its
    /// characteristic polynomial need not — and rescues blocks like
    /// `q = X^2 + X` at `n = 3`, where the only degree-2 divisor of
    /// `X^3 - 1` is unreachable for trace-parity reasons but `E` with
    /// `C + E = I` exists. Cached per (q, n).
    fn block_exponent_idempotent(
        &mut self,
        q: &Poly,
        n: u64,
    ) -> Result<(Mat, Strategy), DecompError> {
        let key = (q.clone(), n);
        if let Some(hit) = self.exponent_cache.get(&key) {
            return hit.clone();
        }
        let out = self.block_exponent_idempotent_uncached(q, n);
        self.exponent_cache.insert(key, out.clone());
        out
    }

    fn block_exponent_idempotent_uncached(
        &mut self,
        q: &Poly,
        n: u64,
    ) -> Result<(Mat, Strategy), DecompError> {
        let s = q.degree().expect("block polynomials are nonconstant");
        let c = Mat::companion(q).expect("block degrees are in range");
        if s <= 5 {
            let table: Vec<Mat> = self.idempotent_table(s).to_vec();
            for e in table {
                if c.add(&e).pow(n as u128).is_identity() {
                    return Ok((e, Strategy::ExponentScan));
                }
            }
            return Err(DecompError::ExponentSearchFailed { q: q.clone(), n, draws: 0 });
        }
        if s <= MAX_SEARCH_DIM {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
            for _ in 0..self.config.budget {
                let k = rng.gen_range(0..=s);
                let Ok(e) = gf2mat::rand_idempotent(&mut rng, s, k) else {
                    continue;
                };
                if c.add(&e).pow(n as u128).is_identity() {
                    return Ok((e, Strategy::RandomizedExponentDraw));
                }
            }
        }
        Err(DecompError::ExponentSearchFailed {
            q: q.clone(),
            n,
            draws: if s <= MAX_SEARCH_DIM { self.config.budget } else { 0 },
        })
    }

    /// Decompose a companion block `c` (of declared size `s`) as `E + U`
    /// with `charpoly(U) = r`, hence `U^n = I`; see the module docs for the
    /// ladder. `r` must be monic of degree `s` and divide `X^n - 1`.
    pub fn companion_torsion_decompose(
        &mut self,
        s: usize,
        c: &Mat,
        n: u64,
        r: &Poly,
    ) -> Result<TorsionDecomposition, DecompError> {
        if n == 0 {
            return Err(DecompError::BadExponent { n });
        }
        let q = c.companion_polynomial().ok_or(DecompError::NotCompanion)?;
        let r_deg = r.degree().unwrap_or(0);
        if s != c.dim() || s != r_deg {
            return Err(DecompError::SizeMismatch {
                declared: s,
                matrix: c.dim(),
                polynomial: r_deg,
            });
        }
        let xn1 = Poly::xn_minus_1(n as usize)?;
        if !r.divides(&xn1) {
            return Err(DecompError::NotDivisor { r: r.clone(), n });
        }
        let (e, strategy) = self.block_idempotent(&q, r)?;
        let u = c.add(&e);
        let decomposition = TorsionDecomposition {
            idempotent_rank: e.rank(),
            unit_order: u.unit_order().expect("charpoly divides X^n - 1, so U is a unit"),
            e,
            u,
            exponent: n,
            strategies: vec![strategy],
        };
        decomposition.verify(c);
        Ok(decomposition)
    }

    /// Decompose any matrix as `E + U` with `U^n = I`: bring it to
    /// Frobenius normal form, decompose each companion block against a
    /// degree-matched divisor of `X^n - 1` (preferring the canonical
    /// divisor, then retrying the alternatives, since different targets
    /// flip the achievable rank parity), and conjugate back.
    pub fn almost_torsion_decompose(
        &mut self,
        a: &Mat,
        n: u64,
    ) -> Result<TorsionDecomposition, DecompError> {
        if n == 0 {
            return Err(DecompError::BadExponent { n });
        }
        let form = frobenius_form(a);
        let mut block_es = Vec::with_capacity(form.blocks.len());
        let mut strategies = Vec::with_capacity(form.blocks.len());
        for q in &form.invariant_factors {
            let s = q.degree().expect("invariant factors are nonconstant");
            let mut candidates = Vec::new();
            if let Some(canonical) = divisor_of_degree(n as usize, s)? {
                candidates.push(canonical);
            }
            for r in divisors_of_degree(n as usize, s)? {
                if !candidates.contains(&r) {
                    candidates.push(r);
                }
            }
            if candidates.is_empty() {
                return Err(DecompError::NoDivisorOfDegree { n, degree: s });
            }
            let mut found = None;
            for r in &candidates {
                if let Ok(hit) = self.block_idempotent(q, r) {
                    found = Some(hit);
                    break;
                }
            }
            // Divisor targets exist but none is reachable: fall back to the
            // direct exponent test (see block_exponent_idempotent).
            let (e, strategy) = match found {
                Some(hit) => hit,
                None => self.block_exponent_idempotent(q, n)?,
            };
            block_es.push(e);
            strategies.push(strategy);
        }
        let p = &form.transform;
        let p_inv = p.inverse().expect("transforms are invertible");
        let e_diag = assemble_block_diagonal(&block_es).expect("blocks match the dimension");
        let e = p.mul(&e_diag).mul(&p_inv);
        let u = a.add(&e);
        let decomposition = TorsionDecomposition {
            idempotent_rank: e.rank(),
            unit_order: u.unit_order().expect("block charpolys divide X^n - 1"),
            e,
            u,
            exponent: n,
            strategies,
        };
        decomposition.verify(a);
        Ok(decomposition)
    }

    /// Find an idempotent `E` with `input + E` nilpotent. Exhaustive over
    /// the idempotent table (minimizing the nilpotency index, first found
    /// on ties) for dimension at most 4; randomized first-found draws for
    /// dimensions 5..=10.
    pub fn nil_clean_decompose(&mut self, a: &Mat) -> Result<NilCleanDecomposition, DecompError> {
        let dim = a.dim();
        if dim <= 4 {
            let mut best: Option<(u32, Mat)> = None;
            for e in self.idempotent_table(dim) {
                let n = a.add(e);
                if let Some(idx) = n.nilpotency_index() {
                    if best.as_ref().is_none_or(|(b, _)| idx < *b) {
                        best = Some((idx, e.clone()));
                    }
                }
            }
            let (nil_index, e) = best.ok_or(DecompError::NilSearchFailed { dim, draws: 0 })?;
            let decomposition = NilCleanDecomposition { nil: a.add(&e), e, nil_index };
            decomposition.verify(a);
            return Ok(decomposition);
        }
        if dim > MAX_SEARCH_DIM {
            return Err(DecompError::DimensionOutOfRange { dim, max: MAX_SEARCH_DIM });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        for _ in 0..self.config.budget {
            let k = rng.gen_range(0..=dim);
            let Ok(e) = gf2mat::rand_idempotent(&mut rng, dim, k) else {
                continue;
            };
            let n = a.add(&e);
            if let Some(nil_index) = n.nilpotency_index() {
                let decomposition = NilCleanDecomposition { e, nil: n, nil_index };
                decomposition.verify(a);
                return Ok(decomposition);
            }
        }
        Err(DecompError::NilSearchFailed { dim, draws: self.config.budget })
    }
}

impl TorsionDecomposition {
    /// Re-check every invariant against the decomposed input; panics on any
    /// violation (decompositions are verified before being returned).
    pub fn verify(&self, input: &Mat) {
        assert!(self.e.is_idempotent(), "E is idempotent");
        assert_eq!(self.e.add(&self.u), *input, "input = E + U");
        assert_eq!(self.e.rank(), self.idempotent_rank, "recorded rank");
        assert!(self.exponent > 0, "exponent is positive");
        assert!(self.u.pow(self.exponent as u128).is_identity(), "U^n = I");
        assert_eq!(self.u.unit_order(), Some(self.unit_order), "recorded order");
        assert_eq!(self.exponent as u128 % self.unit_order, 0, "order divides exponent");
    }
}

impl NilCleanDecomposition {
    /// Re-check every invariant against the decomposed input; panics on any
    /// violation.
    pub fn verify(&self, input: &Mat) {
        assert!(self.e.is_idempotent(), "E is idempotent");
        assert_eq!(self.e.add(&self.nil), *input, "input = E + N");
        assert_eq!(self.nil.nilpotency_index(), Some(self.nil_index), "recorded index");
    }
}

/// One-shot [`Decomposer::companion_torsion_decompose`] with defaults.
pub fn companion_torsion_decompose(
    s: usize,
    c: &Mat,
    n: u64,
    r: &Poly,
) -> Result<TorsionDecomposition, DecompError> {
    Decomposer::new(SearchConfig::default()).companion_torsion_decompose(s, c, n, r)
}

/// One-shot [`Decomposer::almost_torsion_decompose`] with defaults.
pub fn almost_torsion_decompose(a: &Mat, n: u64) -> Result<TorsionDecomposition, DecompError> {
    Decomposer::new(SearchConfig::default()).almost_torsion_decompose(a, n)
}

/// One-shot [`Decomposer::nil_clean_decompose`] with defaults.
pub fn nil_clean_decompose(a: &Mat) -> Result<NilCleanDecomposition, DecompError> {
    Decomposer::new(SearchConfig::default()).nil_clean_decompose(a)
}

/// Torsion profile of the integers mod `modulus`, by exhaustive search:
/// the least `n` such that every residue `r` splits as `r = u + e` with
/// `u^n = 1` and `e^2 = e` (plain), and the least `n` allowing `r = u + e`
/// or `r = u - e` (weak). Supported for `2 <= modulus <= 10^4`.
pub fn zn_torsion_profile(modulus: u64) -> Result<(u64, u64), DecompError> {
    if !(2..=MAX_MODULUS).contains(&modulus) {
        return Err(DecompError::BadModulus { modulus });
    }
    let m = modulus;
    // Multiplicative order of each unit, by iteration.
    let mut order = vec![0u64; m as usize];
    for u in 1..m {
        if numtheory::gcd(u, m) != 1 {
            continue;
        }
        let mut x = u;
        let mut e = 1;
        while x != 1 {
            x = x * u % m;
            e += 1;
        }
        order[u as usize] = e;
    }
    let idempotents: Vec<u64> = (0..m).filter(|&e| e * e % m == e).collect();
    let lambda = order.iter().filter(|&&d| d > 0).fold(1u64, |acc, &d| {
        numtheory::lcm_u128(acc as u128, d as u128) as u64
    });

    // For each residue, the set of unit orders achievable by a plain or
    // weak decomposition; the answer is the least n covered by every set.
    let mut plain = vec![Vec::new(); m as usize];
    let mut weak = vec![Vec::new(); m as usize];
    for r in 0..m {
        for &e in &idempotents {
            let u_plus = (r + m - e) % m;
            if order[u_plus as usize] > 0 {
                plain[r as usize].push(order[u_plus as usize]);
                weak[r as usize].push(order[u_plus as usize]);
            }
            let u_minus = (r + e) % m;
            if order[u_minus as usize] > 0 {
                weak[r as usize].push(order[u_minus as usize]);
            }
        }
    }
    let least = |sets: &[Vec<u64>]| -> u64 {
        'next: for n in 1..=lambda {
            for set in sets {
                assert!(!set.is_empty(), "every residue splits as unit + idempotent");
                if !set.iter().any(|&d| n % d == 0) {
                    continue 'next;
                }
            }
            return n;
        }
        unreachable!("n = lcm of all unit orders always works")
    };
    Ok((least(&plain), least(&weak)))
}
