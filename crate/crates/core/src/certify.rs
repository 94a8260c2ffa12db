//! Brute-force certification of torsion-cleanness for full and
//! upper-triangular matrix rings over GF(2).
//!
//! A ring is *almost m-torsion clean* when every element `A` splits as
//! `A = E + U` with `E` idempotent and `U^m = I`; equivalently, some
//! idempotent `e` in the ring satisfies `(A + e)^m = I` (such an `A + e` is
//! automatically a unit). The *torsion-clean order* is the least such `m`,
//! and `m`-torsion cleanness proper additionally demands that no smaller
//! exponent `u >= 2` works — a certificate therefore records the almost
//! flag for every exponent up to a bound and derives both readings.
//!
//! The scan enumerates the ring's idempotents once into a table, then walks
//! the elements. Elements are indexed; the element space is partitioned
//! across worker threads that share the read-only table, publish failures
//! through per-exponent atomic minimum indices, and skip work that can no
//! longer affect the outcome — the result is independent of the worker
//! count. For triangular rings a unit must have an all-ones diagonal, so
//! only idempotents with the complementary diagonal are ever tried; for the
//! nil-clean index the same bucketing applies with the matching diagonal.
//!
//! Budgets: full rings are exhausted up to dimension 4 and sampled at
//! dimension 5 (a one-sided verdict from 10^5 random elements by default);
//! triangular rings are exhausted up to dimension 6.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf2mat::{self, Mat, MatError, RingKind, RingSpec};
use crate::numtheory;

/// Knobs for the certification scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Largest exponent a certificate covers; `None` means `2 * size + 4`.
    pub m_max: Option<u64>,
    /// Sample count for the one ring that supports sampled scans (the full
    /// 5x5 ring); `None` means 10^5 there and is ignored elsewhere.
    pub samples: Option<u64>,
    /// Seed for the sampled mode's element draws.
    pub seed: u64,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { m_max: None, samples: None, seed: crate::DEFAULT_SEED, threads: 0 }
    }
}

/// Whether a verdict covered the whole ring or a random sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Coverage {
    Exhaustive,
    /// One-sided: "no counterexample among the sampled elements".
    Sampled { samples: u64 },
}

/// Outcome of a single-exponent check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlmostVerdict {
    pub holds: bool,
    /// An element with no valid idempotent, when `holds` is false.
    pub failing_witness: Option<Mat>,
    pub coverage: Coverage,
}

/// Full scan result: almost flags for every exponent up to `m_max`, with
/// witnesses for the failures and the derived minimal order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TorsionCertificate {
    pub ring: RingSpec,
    pub m_max: u64,
    /// `almost_flags[m]` is true iff every element splits at exponent `m`.
    pub almost_flags: BTreeMap<u64, bool>,
    /// Least flagged exponent, when one exists within `m_max`.
    pub minimal_m: Option<u64>,
    /// Per false flag, the first element (in enumeration order) with no
    /// valid idempotent at that exponent.
    pub failing_witness: BTreeMap<u64, Mat>,
    pub element_count: u64,
    pub idempotent_count: u64,
    pub coverage: Coverage,
    /// Filled by the scan; serialized only when explicitly requested, so
    /// reports stay byte-deterministic by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl TorsionCertificate {
    /// The two-sided reading at exponent `m`: almost m-torsion clean and no
    /// smaller exponent `u >= 2` already suffices. `None` when `m` is
    /// outside the certified range.
    ///
    /// The almost flag alone can be true at many exponents (for triangular
    /// rings, at every `m` whose largest odd-binomial row index is big
    /// enough); cleanness proper holds only at the minimal one, which is
    /// why both views are recorded.
    pub fn torsion_clean(&self, m: u64) -> Option<bool> {
        let flag = *self.almost_flags.get(&m)?;
        Some(flag && (2..m).all(|u| !self.almost_flags.get(&u).copied().unwrap_or(false)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertifyError {
    /// Ring too large to scan: beyond both the exhaustive budget and the
    /// sampled mode (which only the full 5x5 ring supports).
    BudgetExceeded { ring: RingSpec },
    /// Some element has no idempotent making it nilpotent (never observed;
    /// reported rather than hidden if brute force ever finds one).
    NotNilClean { ring: RingSpec, witness: Mat },
    /// Invalid argument (exponent 0, dimension mismatch, ...).
    BadArgument(String),
    /// Enumeration-level failure bubbled up.
    Mat(MatError),
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::BudgetExceeded { ring } => {
                write!(f, "{ring} exceeds the scan budget")
            }
            CertifyError::NotNilClean { ring, witness } => {
                write!(f, "element of {ring} with no nil-clean witness:\n{witness}")
            }
            CertifyError::BadArgument(msg) => write!(f, "{msg}"),
            CertifyError::Mat(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CertifyError {}

impl From<MatError> for CertifyError {
    fn from(e: MatError) -> Self {
        CertifyError::Mat(e)
    }
}

/// Stack-allocated matrix kernel for the hot loops: no heap traffic, row
/// bitmasks in a fixed array, dimensions up to 8 (the budgets cap scans at
/// 6).
#[derive(Clone, Copy)]
struct K {
    n: usize,
    rows: [u64; 8],
}

impl K {
    fn from_mat(m: &Mat) -> K {
        assert!(m.dim() <= 8, "kernel supports dimensions up to 8");
        let mut rows = [0u64; 8];
        rows[..m.dim()].copy_from_slice(m.rows());
        K { n: m.dim(), rows }
    }

    fn identity(n: usize) -> K {
        let mut rows = [0u64; 8];
        for (i, r) in rows[..n].iter_mut().enumerate() {
            *r = 1 << i;
        }
        K { n, rows }
    }

    fn add(&self, o: &K) -> K {
        let mut rows = self.rows;
        for (r, s) in rows[..self.n].iter_mut().zip(&o.rows[..o.n]) {
            *r ^= s;
        }
        K { n: self.n, rows }
    }

    fn mul(&self, o: &K) -> K {
        let mut rows = [0u64; 8];
        for i in 0..self.n {
            let mut acc = 0u64;
            let mut bits = self.rows[i];
            while bits != 0 {
                acc ^= o.rows[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            rows[i] = acc;
        }
        K { n: self.n, rows }
    }

    fn is_identity(&self) -> bool {
        self.rows[..self.n].iter().enumerate().all(|(i, &r)| r == 1 << i)
    }

    fn is_zero(&self) -> bool {
        self.rows[..self.n].iter().all(|&r| r == 0)
    }

    fn pow_is_identity(&self, mut e: u64) -> bool {
        let mut acc = K::identity(self.n);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc.is_identity()
    }

    /// Least `k >= 1` with `self^k = 0`, or `None`.
    fn nilpotency_index(&self) -> Option<u32> {
        let mut p = *self;
        for k in 1..=self.n as u32 {
            if p.is_zero() {
                return Some(k);
            }
            p = p.mul(self);
        }
        if p.is_zero() {
            return Some(self.n as u32);
        }
        None
    }
}

/// How a scan may cover the ring, per the module-level budget policy.
enum ScanMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

/// Default sample count for the full 5x5 ring's sampled mode.
pub const DEFAULT_SAMPLES: u64 = 100_000;

fn scan_mode(ring: RingSpec, opts: &CertifyOptions) -> Result<ScanMode, CertifyError> {
    let exhaustive_ok = match ring.kind {
        RingKind::Full => ring.size <= 4,
        RingKind::UpperTriangular => ring.size <= 6,
    };
    if exhaustive_ok {
        return Ok(ScanMode::Exhaustive);
    }
    if ring.kind == RingKind::Full && ring.size == 5 {
        let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
        return Ok(ScanMode::Sampled { samples, seed: opts.seed });
    }
    Err(CertifyError::BudgetExceeded { ring })
}

fn worker_count(opts: &CertifyOptions) -> usize {
    if opts.threads > 0 {
        opts.threads
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Idempotent table as kernels, bucketed by diagonal for triangular rings
/// (index = diagonal bitmask); full rings use bucket 0 for everything.
struct IdempotentTable {
    buckets: HashMap<u64, Vec<K>>,
    count: u64,
    triangular: bool,
}

impl IdempotentTable {
    fn build(ring: RingSpec) -> Result<IdempotentTable, CertifyError> {
        let triangular = ring.kind == RingKind::UpperTriangular;
        let mut buckets: HashMap<u64, Vec<K>> = HashMap::new();
        let mut count = 0;
        for e in gf2mat::idempotents(ring)? {
            let key = if triangular { e.diagonal() } else { 0 };
            buckets.entry(key).or_default().push(K::from_mat(&e));
            count += 1;
        }
        Ok(IdempotentTable { buckets, count, triangular })
    }

    /// Candidates for `A + e` being a unit: complementary diagonal in the
    /// triangular case (triangular units have all-ones diagonals).
    fn unit_candidates(&self, a: &K) -> &[K] {
        let key = if self.triangular {
            let mask = if a.n == 64 { u64::MAX } else { (1 << a.n) - 1 };
            diagonal_of(a) ^ mask
        } else {
            0
        };
        self.buckets.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Candidates for `A + e` being nilpotent: matching diagonal in the
    /// triangular case (triangular nilpotents have all-zero diagonals).
    fn nilpotent_candidates(&self, a: &K) -> &[K] {
        let key = if self.triangular { diagonal_of(a) } else { 0 };
        self.buckets.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn diagonal_of(a: &K) -> u64 {
    a.rows[..a.n].iter().enumerate().fold(0, |acc, (i, &r)| acc | (r >> i & 1) << i)
}

/// The element indices a scan walks, in deterministic order.
fn scan_positions(ring: RingSpec, mode: &ScanMode) -> (Vec<u64>, Coverage) {
    match mode {
        ScanMode::Exhaustive => {
            let total = ring.element_count().expect("budgeted rings are indexable");
            ((0..total).collect(), Coverage::Exhaustive)
        }
        ScanMode::Sampled { samples, seed } => {
            let total = ring.element_count().expect("budgeted rings are indexable");
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let indices = (0..*samples).map(|_| rng.gen_range(0..total)).collect();
            (indices, Coverage::Sampled { samples: *samples })
        }
    }
}

/// Core multi-exponent scan: for each `m` in `ms`, find whether every
/// walked element has an idempotent `e` with `(A + e)^m = I`, and the first
/// failing element otherwise. See the module docs for the worker scheme.
fn scan_almost(
    ring: RingSpec,
    ms: &[u64],
    opts: &CertifyOptions,
) -> Result<(BTreeMap<u64, bool>, BTreeMap<u64, Mat>, u64, Coverage), CertifyError> {
    if ms.is_empty() || ms.contains(&0) {
        return Err(CertifyError::BadArgument("exponents must be positive".into()));
    }
    let mode = scan_mode(ring, opts)?;
    let table = IdempotentTable::build(ring)?;
    let (positions, coverage) = scan_positions(ring, &mode);
    let total = positions.len() as u64;
    let max_m = *ms.iter().max().expect("ms is nonempty");

    // Per-exponent first-failure positions, u64::MAX = none found.
    let first_fail: Vec<AtomicU64> = ms.iter().map(|_| AtomicU64::new(u64::MAX)).collect();
    let workers = worker_count(opts).max(1);
    let chunk = (total as usize).div_ceil(workers).max(1);

    std::thread::scope(|scope| {
        for range in positions.chunks(chunk).enumerate().map(|(w, c)| {
            let start = (w * chunk) as u64;
            (start, c)
        }) {
            let (start, chunk_positions) = range;
            let first_fail = &first_fail;
            let table = &table;
            let ms = &ms;
            scope.spawn(move || {
                let mut needed: Vec<usize> = Vec::with_capacity(ms.len());
                for (offset, &element_index) in chunk_positions.iter().enumerate() {
                    let pos = start + offset as u64;
                    needed.clear();
                    needed.extend(
                        (0..ms.len())
                            .filter(|&mi| first_fail[mi].load(Ordering::Relaxed) > pos),
                    );
                    if needed.is_empty() {
                        // Every exponent already failed earlier; nothing a
                        // later element could add.
                        break;
                    }
                    let a = K::from_mat(&ring.element(element_index));
                    for e in table.unit_candidates(&a) {
                        let u = a.add(e);
                        if ms.len() == 1 {
                            if u.pow_is_identity(ms[0]) {
                                needed.clear();
                            }
                        } else {
                            // One sequential power run covers all exponents.
                            let mut p = K::identity(u.n);
                            let mut j = 0;
                            while j < max_m {
                                p = p.mul(&u);
                                j += 1;
                                needed.retain(|&mi| ms[mi] != j || !p.is_identity());
                            }
                        }
                        if needed.is_empty() {
                            break;
                        }
                    }
                    for &mi in &needed {
                        first_fail[mi].fetch_min(pos, Ordering::Relaxed);
                    }
                }
            });
        }
    });

    let mut flags = BTreeMap::new();
    let mut witnesses = BTreeMap::new();
    for (mi, &m) in ms.iter().enumerate() {
        let fail = first_fail[mi].load(Ordering::Relaxed);
        flags.insert(m, fail == u64::MAX);
        if fail != u64::MAX {
            witnesses.insert(m, ring.element(positions[fail as usize]));
        }
    }
    Ok((flags, witnesses, table.count, coverage))
}

/// Does every element of the ring split as idempotent + m-torsion unit?
/// False comes with a concrete failing element. Exhaustive within budget;
/// the full 5x5 ring is sampled instead and yields a one-sided verdict.
pub fn is_almost_m_torsion_clean(
    ring: RingSpec,
    m: u64,
    opts: &CertifyOptions,
) -> Result<AlmostVerdict, CertifyError> {
    let (flags, mut witnesses, _, coverage) = scan_almost(ring, &[m], opts)?;
    Ok(AlmostVerdict { holds: flags[&m], failing_witness: witnesses.remove(&m), coverage })
}

/// Scan every exponent up to `m_max` (default `2 * size + 4`) and derive
/// the minimal torsion order; see [`TorsionCertificate`].
pub fn torsion_clean_order(
    ring: RingSpec,
    opts: &CertifyOptions,
) -> Result<TorsionCertificate, CertifyError> {
    let start = Instant::now();
    let m_max = opts.m_max.unwrap_or(2 * ring.size as u64 + 4);
    if m_max == 0 {
        return Err(CertifyError::BadArgument("m_max must be positive".into()));
    }
    let ms: Vec<u64> = (1..=m_max).collect();
    let (almost_flags, failing_witness, idempotent_count, coverage) =
        scan_almost(ring, &ms, opts)?;
    let minimal_m = almost_flags.iter().find(|(_, &flag)| flag).map(|(&m, _)| m);
    let certificate = TorsionCertificate {
        ring,
        m_max,
        element_count: ring.element_count().expect("budgeted rings are indexable"),
        idempotent_count,
        almost_flags,
        minimal_m,
        failing_witness,
        coverage,
        wall_time_seconds: Some(start.elapsed().as_secs_f64()),
    };
    if let Some(m) = certificate.minimal_m {
        assert_eq!(certificate.almost_flags.get(&m), Some(&true));
        assert!((2..m).all(|u| !certificate.almost_flags[&u]), "minimality is two-sided");
    }
    Ok(certificate)
}

/// First idempotent (in enumeration order) witnessing `(a + e)^m = I`, or
/// `None`; the re-verification primitive behind certificate witnesses.
pub fn torsion_witness(ring: RingSpec, a: &Mat, m: u64) -> Result<Option<Mat>, CertifyError> {
    if m == 0 {
        return Err(CertifyError::BadArgument("exponents must be positive".into()));
    }
    if !ring.contains(a) {
        return Err(CertifyError::BadArgument(format!("matrix is not in {ring}")));
    }
    let ak = K::from_mat(a);
    for e in gf2mat::idempotents(ring)? {
        if ak.add(&K::from_mat(&e)).pow_is_identity(m) {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

/// Predicted minimal torsion order of the triangular ring: the first power
/// of two at or above the dimension (`2^(t+1)` for `2^t < n <= 2^(t+1)`).
/// Defined for dimensions above 2.
pub fn tn_predicted_order(n: u64) -> Result<u64, CertifyError> {
    if n <= 2 {
        return Err(CertifyError::BadArgument(format!(
            "prediction needs dimension > 2, got {n}"
        )));
    }
    Ok(n.next_power_of_two())
}

/// Predicted almost m-torsion cleanness of the triangular ring: the
/// dimension is at most the largest row index with all-odd binomials,
/// `n <= k1(m)`. Defined for dimension and exponent above 2.
pub fn tn_almost_predicate(n: u64, m: u64) -> Result<bool, CertifyError> {
    if n <= 2 || m <= 2 {
        return Err(CertifyError::BadArgument(format!(
            "predicate needs dimension and exponent > 2, got ({n}, {m})"
        )));
    }
    Ok(n <= numtheory::k1(m).expect("m > 2 rules the error cases out"))
}

/// Least `k` such that every element has an idempotent `e` with
/// `(A + e)^k = 0`; exhaustive within budget (no sampling mode).
pub fn nil_clean_index(ring: RingSpec, opts: &CertifyOptions) -> Result<u32, CertifyError> {
    match scan_mode(ring, opts)? {
        ScanMode::Exhaustive => {}
        ScanMode::Sampled { .. } => return Err(CertifyError::BudgetExceeded { ring }),
    }
    let table = IdempotentTable::build(ring)?;
    let total = ring.element_count().expect("budgeted rings are indexable");
    let workers = worker_count(opts).max(1);
    let chunk = (total as usize).div_ceil(workers).max(1) as u64;

    // Per-worker: the max over elements of the min nilpotency index, plus
    // the first element (if any) with no nilpotent complement.
    let results: Vec<(u32, Option<u64>)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers as u64 {
            let table = &table;
            let start = w * chunk;
            let end = (start + chunk).min(total);
            handles.push(scope.spawn(move || {
                let mut worst = 0u32;
                let mut first_uncovered = None;
                for idx in start..end {
                    let a = K::from_mat(&ring.element(idx));
                    let mut best: Option<u32> = None;
                    for e in table.nilpotent_candidates(&a) {
                        if let Some(k) = a.add(e).nilpotency_index() {
                            if best.is_none_or(|b| k < b) {
                                best = Some(k);
                                if k == 1 {
                                    break;
                                }
                            }
                        }
                    }
                    match best {
                        Some(k) => worst = worst.max(k),
                        None => {
                            first_uncovered = Some(idx);
                            break;
                        }
                    }
                }
                (worst, first_uncovered)
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    if let Some(idx) = results.iter().filter_map(|(_, fail)| *fail).min() {
        return Err(CertifyError::NotNilClean { ring, witness: ring.element(idx) });
    }
    Ok(results.iter().map(|(worst, _)| *worst).max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exhaustive() -> CertifyOptions {
        CertifyOptions::default()
    }

    #[test]
    fn small_rings_have_order_two() {
        for ring in [RingSpec::upper_triangular(2), RingSpec::full(2)] {
            let cert = torsion_clean_order(ring, &exhaustive()).unwrap();
            assert_eq!(cert.minimal_m, Some(2), "{ring}");
            assert_eq!(cert.almost_flags[&1], false, "{ring}");
            assert_eq!(cert.torsion_clean(2), Some(true), "{ring}");
            assert_eq!(cert.coverage, Coverage::Exhaustive);
            assert!(is_almost_m_torsion_clean(ring, 2, &exhaustive()).unwrap().holds);
        }
    }

    #[test]
    fn full_ring_orders() {
        let cert = torsion_clean_order(RingSpec::full(3), &exhaustive()).unwrap();
        assert_eq!(cert.minimal_m, Some(3));
        assert_eq!(cert.element_count, 512);
        assert_eq!(cert.idempotent_count, 58);
    }

    #[test]
    fn triangular_3_certificate_and_dual_flags() {
        let opts = CertifyOptions { m_max: Some(28), ..CertifyOptions::default() };
        let cert = torsion_clean_order(RingSpec::upper_triangular(3), &opts).unwrap();
        assert_eq!(cert.minimal_m, Some(4));
        // The almost property holds at 28 (k1(28) = 4 >= 3) — but the ring
        // is not 28-torsion clean, because exponent 4 already works. The
        // two flags answer different questions.
        assert_eq!(cert.almost_flags[&28], true);
        assert_eq!(cert.torsion_clean(28), Some(false));
        assert_eq!(cert.torsion_clean(4), Some(true));
        assert_eq!(cert.torsion_clean(2), Some(false));

        let verdict =
            is_almost_m_torsion_clean(RingSpec::upper_triangular(3), 28, &exhaustive()).unwrap();
        assert!(verdict.holds);
        assert!(verdict.failing_witness.is_none());

        // Example values: T3 is almost 4-torsion clean, not almost 2.
        assert!(is_almost_m_torsion_clean(RingSpec::upper_triangular(3), 4, &exhaustive())
            .unwrap()
            .holds);
        assert!(!is_almost_m_torsion_clean(RingSpec::upper_triangular(3), 2, &exhaustive())
            .unwrap()
            .holds);
    }

    #[test]
    fn witnesses_reverify() {
        let cert = torsion_clean_order(RingSpec::upper_triangular(3), &exhaustive()).unwrap();
        for (&m, witness) in &cert.failing_witness {
            assert_eq!(cert.almost_flags[&m], false);
            assert!(
                torsion_witness(RingSpec::upper_triangular(3), witness, m).unwrap().is_none(),
                "witness for m = {m} must admit no idempotent"
            );
        }
        // Every flagged m has no witness entry.
        for (&m, &flag) in &cert.almost_flags {
            assert_eq!(cert.failing_witness.contains_key(&m), !flag);
        }
    }

    #[test]
    fn triangular_units_are_unipotent() {
        // Every witness unit in a triangular decomposition has an all-ones
        // diagonal.
        let ring = RingSpec::upper_triangular(3);
        let mask = (1u64 << 3) - 1;
        for idx in 0..ring.element_count().unwrap() {
            let a = ring.element(idx);
            let e = torsion_witness(ring, &a, 4).unwrap().expect("T3 is almost 4-torsion clean");
            let u = a.add(&e);
            assert_eq!(u.diagonal(), mask, "unit must be unipotent");
            assert!(u.is_upper_triangular());
        }
    }

    #[test]
    fn predictions() {
        assert_eq!(tn_predicted_order(3).unwrap(), 4);
        assert_eq!(tn_predicted_order(4).unwrap(), 4);
        assert_eq!(tn_predicted_order(5).unwrap(), 8);
        assert_eq!(tn_predicted_order(6).unwrap(), 8);
        assert_eq!(tn_predicted_order(8).unwrap(), 8);
        assert!(tn_predicted_order(2).is_err());

        assert_eq!(tn_almost_predicate(5, 8).unwrap(), true);
        assert_eq!(tn_almost_predicate(5, 4).unwrap(), false);
        assert_eq!(tn_almost_predicate(3, 28).unwrap(), true);
        assert!(tn_almost_predicate(2, 4).is_err());
        assert!(tn_almost_predicate(4, 2).is_err());
    }

    #[test]
    fn triangular_4_matches_prediction() {
        let cert = torsion_clean_order(RingSpec::upper_triangular(4), &exhaustive()).unwrap();
        assert_eq!(cert.minimal_m, Some(tn_predicted_order(4).unwrap()));
        assert_eq!(cert.minimal_m, Some(4));
    }

    #[test]
    fn budget_rules() {
        let err = torsion_clean_order(RingSpec::full(6), &exhaustive()).unwrap_err();
        assert!(matches!(err, CertifyError::BudgetExceeded { .. }));
        assert!(torsion_clean_order(RingSpec::upper_triangular(7), &exhaustive()).is_err());

        // The full 5x5 ring falls back to sampling: labeled non-exhaustive
        // and deterministic under a fixed seed.
        let opts = CertifyOptions { samples: Some(64), ..CertifyOptions::default() };
        let v1 = is_almost_m_torsion_clean(RingSpec::full(5), 4, &opts).unwrap();
        let v2 = is_almost_m_torsion_clean(RingSpec::full(5), 4, &opts).unwrap();
        assert_eq!(v1.coverage, Coverage::Sampled { samples: 64 });
        assert_eq!(v1.holds, v2.holds);
        assert_eq!(v1.failing_witness, v2.failing_witness);

        // Without an explicit count the sampled mode draws its default.
        let verdict =
            is_almost_m_torsion_clean(RingSpec::full(5), 1, &exhaustive()).unwrap();
        assert_eq!(verdict.coverage, Coverage::Sampled { samples: DEFAULT_SAMPLES });
        assert!(!verdict.holds, "almost-1 requires A + I idempotent for every A");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let single = CertifyOptions { threads: 1, ..CertifyOptions::default() };
        let multi = CertifyOptions { threads: 3, ..CertifyOptions::default() };
        let a = torsion_clean_order(RingSpec::upper_triangular(3), &single).unwrap();
        let b = torsion_clean_order(RingSpec::upper_triangular(3), &multi).unwrap();
        assert_eq!(a.almost_flags, b.almost_flags);
        assert_eq!(a.failing_witness, b.failing_witness);
        assert_eq!(a.minimal_m, b.minimal_m);
    }

    #[test]
    fn nil_clean_indices() {
        assert_eq!(nil_clean_index(RingSpec::upper_triangular(2), &exhaustive()).unwrap(), 2);
        assert_eq!(nil_clean_index(RingSpec::upper_triangular(3), &exhaustive()).unwrap(), 3);
        assert_eq!(nil_clean_index(RingSpec::full(2), &exhaustive()).unwrap(), 2);
        assert_eq!(nil_clean_index(RingSpec::full(3), &exhaustive()).unwrap(), 3);
        assert!(nil_clean_index(RingSpec::full(5), &exhaustive()).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(is_almost_m_torsion_clean(RingSpec::full(2), 0, &exhaustive()).is_err());
        let opts = CertifyOptions { m_max: Some(0), ..CertifyOptions::default() };
        assert!(torsion_clean_order(RingSpec::full(2), &opts).is_err());
        let wrong_dim = Mat::identity(4);
        assert!(torsion_witness(RingSpec::full(2), &wrong_dim, 2).is_err());
    }
}
