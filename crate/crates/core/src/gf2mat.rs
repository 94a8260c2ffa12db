//! Bit-packed square matrices over GF(2), one `u64` per row, dimension
//! 1..=64.
//!
//! Row `i` stores entry `(i, j)` in bit `j`, so a matrix-vector product is a
//! handful of masked XORs and a full matrix product is `n` of them. That is
//! what makes the exhaustive ring scans in [`crate::certify`] feasible.
//!
//! Operations that can only fail through programmer error (dimension
//! mismatches, out-of-range indices) panic; fallible operations (parsing,
//! inversion, enumeration budgets, randomized retries) return `Result` or
//! `Option`.
//!
//! The text format is one line per row of `0`/`1` characters, e.g. `"01\n11"`
//! for the companion matrix of `X^2 + X + 1`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::canon;
use crate::gf2poly::Poly;

/// Largest supported dimension: rows must fit in a `u64`.
pub const MAX_DIM: usize = 64;

/// Enumeration budget: rings with more than `2^MAX_ENUM_BITS` elements are
/// refused by [`RingSpec::elements`] and [`idempotents`].
pub const MAX_ENUM_BITS: u32 = 25;

/// Errors reported by matrix operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatError {
    /// Dimension outside 1..=64.
    BadDimension { n: usize },
    /// Unparseable matrix text.
    Parse(String),
    /// Companion matrices need degree 1..=64.
    BadCompanionDegree { degree: usize },
    /// Requested idempotent rank exceeds the dimension.
    RankOutOfRange { n: usize, k: usize },
    /// A randomized construction exhausted its retry budget.
    RetryExhausted { attempts: u32 },
    /// The ring is too large to enumerate (more than 2^25 elements).
    BudgetExceeded { ring: RingSpec, bits: u32 },
}

impl fmt::Display for MatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatError::BadDimension { n } => write!(f, "dimension {n} outside 1..=64"),
            MatError::Parse(s) => write!(f, "cannot parse matrix: {s}"),
            MatError::BadCompanionDegree { degree } => {
                write!(f, "companion matrix needs degree 1..=64, got {degree}")
            }
            MatError::RankOutOfRange { n, k } => {
                write!(f, "idempotent rank {k} out of range for dimension {n}")
            }
            MatError::RetryExhausted { attempts } => {
                write!(f, "randomized construction failed after {attempts} attempts")
            }
            MatError::BudgetExceeded { ring, bits } => {
                write!(f, "{ring} has 2^{bits} elements, over the 2^{MAX_ENUM_BITS} budget")
            }
        }
    }
}

impl std::error::Error for MatError {}

/// A square matrix over GF(2); see the module docs for the representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    rows: Vec<u64>,
}

impl Mat {
    fn assert_dim(n: usize) {
        assert!(n >= 1 && n <= MAX_DIM, "dimension {n} outside 1..=64");
    }

    fn row_mask(n: usize) -> u64 {
        if n == 64 { u64::MAX } else { (1 << n) - 1 }
    }

    /// The zero matrix.
    pub fn zero(n: usize) -> Self {
        Self::assert_dim(n);
        Mat { n, rows: vec![0; n] }
    }

    /// The identity matrix.
    pub fn identity(n: usize) -> Self {
        Self::assert_dim(n);
        Mat { n, rows: (0..n).map(|i| 1 << i).collect() }
    }

    /// Build from row bitmasks (bit `j` of `rows[i]` is entry `(i, j)`).
    pub fn from_rows(rows: Vec<u64>, n: usize) -> Result<Self, MatError> {
        if n < 1 || n > MAX_DIM || rows.len() != n {
            return Err(MatError::BadDimension { n });
        }
        if rows.iter().any(|&r| r & !Self::row_mask(n) != 0) {
            return Err(MatError::Parse("row has bits beyond the dimension".into()));
        }
        Ok(Mat { n, rows })
    }

    /// Uniformly random matrix.
    pub fn random(rng: &mut impl Rng, n: usize) -> Self {
        Self::assert_dim(n);
        Mat { n, rows: (0..n).map(|_| rng.gen::<u64>() & Self::row_mask(n)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.n && j < self.n, "index out of range");
        self.rows[i] >> j & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.n && j < self.n, "index out of range");
        if value {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r == 1 << i)
    }

    /// The diagonal as a bitmask (bit `i` is entry `(i, i)`).
    pub fn diagonal(&self) -> u64 {
        self.rows.iter().enumerate().fold(0, |acc, (i, &r)| acc | (r >> i & 1) << i)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r & ((1 << i) - 1) == 0)
    }

    /// Sum (= difference) over GF(2). Panics on dimension mismatch.
    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Mat {
            n: self.n,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Matrix product. Panics on dimension mismatch.
    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut acc = 0u64;
                let mut bits = r;
                while bits != 0 {
                    acc ^= other.rows[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        Mat { n: self.n, rows }
    }

    /// Matrix-vector product with a column vector packed in a `u64`.
    pub fn mul_vec(&self, v: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &r)| acc | (((r & v).count_ones() & 1) as u64) << i)
    }

    /// `self^e` by square-and-multiply; `e = 0` gives the identity.
    pub fn pow(&self, mut e: u128) -> Mat {
        let mut acc = Mat::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.n);
        for i in 0..self.n {
            let mut bits = self.rows[i];
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                out.rows[j] |= 1 << i;
                bits &= bits - 1;
            }
        }
        out
    }

    /// Rank by Gaussian elimination on a copy of the rows.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(pivot) = (rank..self.n).find(|&r| rows[r] >> col & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            for r in 0..self.n {
                if r != rank && rows[r] >> col & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse, or `None` for singular input. The result is verified against
    /// the definition before being returned.
    pub fn inverse(&self) -> Option<Mat> {
        let mut a = self.rows.clone();
        let mut inv: Vec<u64> = (0..self.n).map(|i| 1 << i).collect();
        for col in 0..self.n {
            let pivot = (col..self.n).find(|&r| a[r] >> col & 1 == 1)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..self.n {
                if r != col && a[r] >> col & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        let out = Mat { n: self.n, rows: inv };
        debug_assert!(self.mul(&out).is_identity());
        Some(out)
    }

    pub fn is_idempotent(&self) -> bool {
        self.mul(self) == *self
    }

    /// A matrix is nilpotent iff its n-th power vanishes.
    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_index().is_some()
    }

    /// Least `k >= 1` with `self^k = 0`, or `None` if not nilpotent. The
    /// index never exceeds the dimension.
    pub fn nilpotency_index(&self) -> Option<u32> {
        let mut power = Mat::identity(self.n);
        for k in 1..=self.n as u32 {
            power = power.mul(self);
            if power.is_zero() {
                return Some(k);
            }
        }
        None
    }

    /// Companion matrix of a polynomial of degree `s` in 1..=64: ones on the
    /// subdiagonal and the coefficients `c_0..c_(s-1)` down the last column,
    /// so that the characteristic and minimal polynomials both equal the
    /// input.
    pub fn companion(q: &Poly) -> Result<Mat, MatError> {
        let s = match q.degree() {
            Some(s) if (1..=MAX_DIM).contains(&s) => s,
            other => return Err(MatError::BadCompanionDegree { degree: other.unwrap_or(0) }),
        };
        let mut rows = vec![0u64; s];
        for (i, row) in rows.iter_mut().enumerate() {
            if i > 0 {
                *row |= 1 << (i - 1);
            }
            if q.coeff(i) {
                *row |= 1 << (s - 1);
            }
        }
        Ok(Mat { n: s, rows })
    }

    /// If `self` has companion shape, the polynomial it is the companion of.
    pub fn companion_polynomial(&self) -> Option<Poly> {
        let s = self.n;
        for i in 0..s {
            // Off the last column only the subdiagonal entry may be set
            // (the subdiagonal never reaches the last column itself).
            let expected = if i > 0 { 1u64 << (i - 1) } else { 0 };
            if self.rows[i] & !(1 << (s - 1)) != expected {
                return None;
            }
        }
        let mut q = Poly::monomial(s);
        for i in 0..s {
            if self.rows[i] >> (s - 1) & 1 == 1 {
                q = q.add(&Poly::monomial(i));
            }
        }
        debug_assert_eq!(q.degree(), Some(s));
        Some(q)
    }

    /// Characteristic polynomial: the product of the invariant factors of
    /// the Frobenius normal form.
    pub fn charpoly(&self) -> Poly {
        canon::frobenius_form(self)
            .invariant_factors
            .iter()
            .fold(Poly::one(), |acc, q| acc.mul(q))
    }

    /// Minimal polynomial: the least common multiple of the annihilators of
    /// the standard basis vectors under the Krylov map.
    pub fn minpoly(&self) -> Poly {
        let mut m = Poly::one();
        for i in 0..self.n {
            m = m.lcm(&vector_annihilator(self, 1 << i)).expect("annihilators are nonzero");
        }
        m
    }

    /// Multiplicative order of an invertible matrix, `None` for singular
    /// input.
    ///
    /// The order equals the order of the minimal polynomial (odd part from
    /// the distinct irreducible factors, a power of two from the largest
    /// multiplicity); it is verified with one powering before returning.
    pub fn unit_order(&self) -> Option<u128> {
        let mu = self.minpoly();
        if !mu.coeff(0) {
            return None; // X divides the minimal polynomial: singular
        }
        let e = mu.poly_order().expect("degree >= 1 and nonzero constant term");
        assert!(self.pow(e).is_identity(), "unit order failed verification");
        Some(e)
    }

    /// Evaluate a polynomial at this matrix (Horner's scheme).
    pub fn eval_poly(&self, p: &Poly) -> Mat {
        let Some(d) = p.degree() else { return Mat::zero(self.n) };
        let mut acc = Mat::zero(self.n);
        for i in (0..=d).rev() {
            acc = acc.mul(self);
            if p.coeff(i) {
                acc = acc.add(&Mat::identity(self.n));
            }
        }
        acc
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            for j in 0..self.n {
                write!(f, "{}", row >> j & 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Mat {
    type Err = MatError;

    /// Parse the row-per-line text format; the matrix must be square with
    /// dimension 1..=64 and contain only `0`/`1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lines: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let n = lines.len();
        if n < 1 || n > MAX_DIM {
            return Err(MatError::Parse(format!("{n} rows outside 1..=64")));
        }
        let mut rows = Vec::with_capacity(n);
        for line in lines {
            if line.chars().count() != n {
                return Err(MatError::Parse(format!(
                    "row `{line}` does not have {n} entries"
                )));
            }
            let mut row = 0u64;
            for (j, c) in line.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => row |= 1 << j,
                    _ => return Err(MatError::Parse(format!("bad character `{c}`"))),
                }
            }
            rows.push(row);
        }
        Ok(Mat { n, rows })
    }
}

impl serde::Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Annihilator of the column vector `v` under `a`: the monic polynomial `p`
/// of least degree with `p(a)v = 0`, found by reducing the Krylov sequence
/// `v, av, a^2 v, ...` incrementally and tracking the combination that
/// produced the first dependence. Shared with the canonical-form machinery.
pub(crate) fn vector_annihilator(a: &Mat, v: u64) -> Poly {
    let mut pivot_of_bit = [usize::MAX; 64];
    let mut pivots: Vec<(u64, u128)> = Vec::new();
    let mut t = v;
    let mut k = 0usize;
    loop {
        let mut w = t;
        let mut combo: u128 = 1 << k;
        while w != 0 {
            let lead = 63 - w.leading_zeros() as usize;
            let idx = pivot_of_bit[lead];
            if idx == usize::MAX {
                break;
            }
            w ^= pivots[idx].0;
            combo ^= pivots[idx].1;
        }
        if w == 0 {
            return Poly::from_coeff_bits(combo);
        }
        let lead = 63 - w.leading_zeros() as usize;
        pivot_of_bit[lead] = pivots.len();
        pivots.push((w, combo));
        t = a.mul_vec(t);
        k += 1;
        assert!(k <= a.n, "Krylov dependence must appear by the dimension");
    }
}

/// Which matrix ring over GF(2) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RingKind {
    /// All n x n matrices.
    Full,
    /// Upper-triangular n x n matrices.
    UpperTriangular,
}

/// A concrete matrix ring: kind plus dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct RingSpec {
    pub kind: RingKind,
    pub size: usize,
}

impl RingSpec {
    pub fn full(size: usize) -> Self {
        RingSpec { kind: RingKind::Full, size }
    }

    pub fn upper_triangular(size: usize) -> Self {
        RingSpec { kind: RingKind::UpperTriangular, size }
    }

    /// Number of free entries, i.e. `log2` of the element count.
    pub fn free_bits(&self) -> u32 {
        let n = self.size as u32;
        match self.kind {
            RingKind::Full => n * n,
            RingKind::UpperTriangular => n * (n + 1) / 2,
        }
    }

    /// Element count, or `None` when it does not fit in a `u64`.
    pub fn element_count(&self) -> Option<u64> {
        let bits = self.free_bits();
        (bits < 64).then(|| 1u64 << bits)
    }

    fn check_budget(&self) -> Result<(), MatError> {
        let bits = self.free_bits();
        if bits > MAX_ENUM_BITS {
            return Err(MatError::BudgetExceeded { ring: *self, bits });
        }
        Ok(())
    }

    /// Decode an enumeration index into a matrix. Indices are ordered
    /// lexicographically by row bit-patterns, row 0 most significant, so
    /// index 0 is the zero matrix. Panics if the ring has more than `2^64`
    /// elements (indices would not cover it).
    pub fn element(&self, index: u64) -> Mat {
        let n = self.size;
        Mat::assert_dim(n);
        let total = self.free_bits();
        assert!(total <= 64, "{self} is not indexable by u64");
        let mut rows = vec![0u64; n];
        let mut shift = total;
        for (i, row) in rows.iter_mut().enumerate() {
            let bits = match self.kind {
                RingKind::Full => n as u32,
                RingKind::UpperTriangular => (n - i) as u32,
            };
            shift -= bits;
            let mask = if bits == 64 { u64::MAX } else { (1 << bits) - 1 };
            let chunk = if shift == 64 { 0 } else { index >> shift & mask };
            *row = match self.kind {
                RingKind::Full => chunk,
                RingKind::UpperTriangular => chunk << i,
            };
        }
        Mat { n, rows }
    }

    /// Is this matrix an element of the ring?
    pub fn contains(&self, m: &Mat) -> bool {
        m.dim() == self.size
            && match self.kind {
                RingKind::Full => true,
                RingKind::UpperTriangular => m.is_upper_triangular(),
            }
    }

    /// Enumerate the whole ring in index order; refused over the budget.
    pub fn elements(&self) -> Result<impl Iterator<Item = Mat>, MatError> {
        self.check_budget()?;
        let spec = *self;
        Ok((0..1u64 << self.free_bits()).map(move |i| spec.element(i)))
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::Full => write!(f, "M_{}(F_2)", self.size),
            RingKind::UpperTriangular => write!(f, "T_{}(F_2)", self.size),
        }
    }
}

/// All idempotents of the ring, in enumeration index order (lexicographic
/// by row bit-patterns). Refused for rings over the `2^25`-element budget.
pub fn idempotents(ring: RingSpec) -> Result<impl Iterator<Item = Mat>, MatError> {
    Ok(ring.elements()?.filter(|m| m.is_idempotent()))
}

/// Random idempotent of exact rank `k` in `M_n(F_2)`, built as
/// `E = X (Y X)^(-1) Y` from uniform `n x k` and `k x n` factors, redrawn
/// until `Y X` is invertible (at most 64 attempts).
pub fn rand_idempotent(rng: &mut impl Rng, n: usize, k: usize) -> Result<Mat, MatError> {
    Mat::assert_dim(n);
    if k > n {
        return Err(MatError::RankOutOfRange { n, k });
    }
    if k == 0 {
        return Ok(Mat::zero(n));
    }
    const ATTEMPTS: u32 = 64;
    for _ in 0..ATTEMPTS {
        // X: n rows of k bits; Y: k rows of n bits.
        let x: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & Mat::row_mask(k)).collect();
        let y: Vec<u64> = (0..k).map(|_| rng.gen::<u64>() & Mat::row_mask(n)).collect();
        // (Y X)[i] = XOR of X-rows selected by Y[i].
        let yx: Vec<u64> = y
            .iter()
            .map(|&yr| {
                let mut acc = 0u64;
                let mut bits = yr;
                while bits != 0 {
                    acc ^= x[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        let Some(inv) = Mat { n: k, rows: yx }.inverse() else {
            continue;
        };
        // E = X * (inv * Y).
        let inv_y: Vec<u64> = (0..k)
            .map(|i| {
                let mut acc = 0u64;
                let mut bits = inv.rows[i];
                while bits != 0 {
                    acc ^= y[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        let rows: Vec<u64> = x
            .iter()
            .map(|&xr| {
                let mut acc = 0u64;
                let mut bits = xr;
                while bits != 0 {
                    acc ^= inv_y[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        let e = Mat { n, rows };
        debug_assert!(e.is_idempotent());
        debug_assert_eq!(e.rank(), k);
        return Ok(e);
    }
    Err(MatError::RetryExhausted { attempts: ATTEMPTS })
}
