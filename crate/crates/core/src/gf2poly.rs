//! Dense polynomials over GF(2), packed 64 coefficients to a word.
//!
//! Addition is XOR and squaring is coefficient spreading, which keeps the
//! whole factorization pipeline — square-free split, distinct-degree split,
//! and randomized equal-degree split via trace maps — fast enough to run
//! exhaustively in tests. The randomized splitter draws from a ChaCha stream
//! seeded with a fixed constant, so factorizations are deterministic.
//!
//! Two text forms are understood: a human form like `X^3+X+1` (printed), and
//! an ascending coefficient bit-string like `1101` meaning `1 + X + X^3`
//! (parsed only). The zero polynomial prints as `0`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numtheory;

/// Errors reported by polynomial operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    /// Division or reduction by the zero polynomial.
    DivisionByZero,
    /// `gcd(0, 0)` is undefined.
    GcdOfZeros,
    /// Factorization and order computations need degree >= 1.
    ConstantInput,
    /// Orders are defined only for polynomials with nonzero constant term.
    ZeroConstantTerm,
    /// `X^0 - 1` is degenerate.
    ZeroExponent,
    /// Unparseable polynomial text.
    Parse(String),
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::DivisionByZero => write!(f, "division by the zero polynomial"),
            PolyError::GcdOfZeros => write!(f, "gcd of two zero polynomials is undefined"),
            PolyError::ConstantInput => write!(f, "operation requires degree >= 1"),
            PolyError::ZeroConstantTerm => {
                write!(f, "polynomial order requires a nonzero constant term")
            }
            PolyError::ZeroExponent => write!(f, "exponent must be positive"),
            PolyError::Parse(s) => write!(f, "cannot parse polynomial: {s}"),
        }
    }
}

impl std::error::Error for PolyError {}

/// A polynomial over GF(2), stored as little-endian 64-bit coefficient limbs
/// with no trailing zero limbs. The zero polynomial is the empty limb vector
/// and is the only polynomial whose [`Poly::degree`] is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    limbs: Vec<u64>,
}

impl Poly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Poly { limbs: vec![] }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Poly { limbs: vec![1] }
    }

    /// The monomial `X`.
    pub fn x() -> Self {
        Poly { limbs: vec![2] }
    }

    /// The monomial `X^k`.
    pub fn monomial(k: usize) -> Self {
        let mut limbs = vec![0u64; k / 64 + 1];
        limbs[k / 64] = 1 << (k % 64);
        Poly { limbs }
    }

    /// Build from the low 128 coefficient bits (bit `i` is the coefficient
    /// of `X^i`). Convenient for small literals in tests.
    pub fn from_coeff_bits(bits: u128) -> Self {
        let mut p = Poly { limbs: vec![bits as u64, (bits >> 64) as u64] };
        p.normalize();
        p
    }

    /// `X^n - 1` (equal to `X^n + 1` over GF(2)); requires `n >= 1`.
    pub fn xn_minus_1(n: usize) -> Result<Self, PolyError> {
        if n == 0 {
            return Err(PolyError::ZeroExponent);
        }
        let mut p = Poly::monomial(n);
        p.flip_coeff(0);
        Ok(p)
    }

    fn normalize(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    /// `None` exactly for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + (63 - last.leading_zeros() as usize))
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.limbs == [1]
    }

    /// Coefficient of `X^i`.
    pub fn coeff(&self, i: usize) -> bool {
        self.limbs
            .get(i / 64)
            .is_some_and(|limb| limb >> (i % 64) & 1 == 1)
    }

    fn flip_coeff(&mut self, i: usize) {
        if i / 64 >= self.limbs.len() {
            self.limbs.resize(i / 64 + 1, 0);
        }
        self.limbs[i / 64] ^= 1 << (i % 64);
        self.normalize();
    }

    /// The low 128 coefficient bits; panics above degree 127. The inverse of
    /// [`Poly::from_coeff_bits`] for polynomials that fit.
    pub fn coeff_bits(&self) -> u128 {
        assert!(self.degree().is_none_or(|d| d < 128), "degree too large");
        let lo = self.limbs.first().copied().unwrap_or(0) as u128;
        let hi = self.limbs.get(1).copied().unwrap_or(0) as u128;
        lo | hi << 64
    }

    /// Multiply by `X^k`.
    pub fn shl(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let (words, bits) = (k / 64, k % 64);
        let mut limbs = vec![0u64; self.limbs.len() + words + 1];
        for (i, &limb) in self.limbs.iter().enumerate() {
            limbs[i + words] |= limb << bits;
            if bits > 0 {
                limbs[i + words + 1] |= limb >> (64 - bits);
            }
        }
        let mut p = Poly { limbs };
        p.normalize();
        p
    }

    /// Sum (= difference) over GF(2).
    pub fn add(&self, other: &Poly) -> Poly {
        let mut limbs = self.limbs.clone();
        if other.limbs.len() > limbs.len() {
            limbs.resize(other.limbs.len(), 0);
        }
        for (i, &limb) in other.limbs.iter().enumerate() {
            limbs[i] ^= limb;
        }
        let mut p = Poly { limbs };
        p.normalize();
        p
    }

    /// Carry-less schoolbook product.
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let (short, long) = if self.limbs.len() <= other.limbs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Poly::zero();
        for (w, &limb) in short.limbs.iter().enumerate() {
            let mut bits = limb;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                acc = acc.add(&long.shl(w * 64 + b));
                bits &= bits - 1;
            }
        }
        acc
    }

    /// Squaring: spread every coefficient to the doubled exponent.
    pub fn square(&self) -> Poly {
        let mut limbs = vec![0u64; self.limbs.len() * 2];
        for (w, &limb) in self.limbs.iter().enumerate() {
            let mut bits = limb;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                let pos = 2 * (w * 64 + b);
                limbs[pos / 64] |= 1 << (pos % 64);
                bits &= bits - 1;
            }
        }
        let mut p = Poly { limbs };
        p.normalize();
        p
    }

    /// Quotient and remainder; the divisor must be nonzero.
    pub fn divmod(&self, divisor: &Poly) -> Result<(Poly, Poly), PolyError> {
        let dd = divisor.degree().ok_or(PolyError::DivisionByZero)?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            rem = rem.add(&divisor.shl(shift));
            quot.flip_coeff(shift);
        }
        Ok((quot, rem))
    }

    /// Remainder modulo `divisor`.
    pub fn rem(&self, divisor: &Poly) -> Result<Poly, PolyError> {
        Ok(self.divmod(divisor)?.1)
    }

    /// Exact division; panics if `divisor` does not divide `self`. Internal
    /// helper for the factorization pipeline, where divisibility is known.
    fn div_exact(&self, divisor: &Poly) -> Poly {
        let (q, r) = self.divmod(divisor).expect("nonzero divisor");
        assert!(r.is_zero(), "div_exact called with a non-divisor");
        q
    }

    /// Does `self` divide `other`?
    pub fn divides(&self, other: &Poly) -> bool {
        match other.rem(self) {
            Ok(r) => r.is_zero(),
            Err(_) => false,
        }
    }

    /// Greatest common divisor (monic by construction over GF(2)); defined
    /// unless both inputs are zero.
    pub fn gcd(&self, other: &Poly) -> Result<Poly, PolyError> {
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::GcdOfZeros);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        Ok(a)
    }

    /// Least common multiple; zero if either input is zero.
    pub fn lcm(&self, other: &Poly) -> Result<Poly, PolyError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        Ok(self.div_exact(&self.gcd(other)?).mul(other))
    }

    /// Formal derivative: over GF(2) only odd-exponent terms survive.
    pub fn derivative(&self) -> Poly {
        let mut out = Poly::zero();
        for i in (1..=self.degree().unwrap_or(0)).step_by(2) {
            if self.coeff(i) {
                out.flip_coeff(i - 1);
            }
        }
        out
    }

    /// Square root of a perfect square (all exponents even); caller must
    /// ensure the precondition, which holds exactly when the derivative
    /// vanishes.
    fn sqrt(&self) -> Poly {
        let mut out = Poly::zero();
        for i in (0..=self.degree().unwrap_or(0)).step_by(2) {
            if self.coeff(i) {
                out.flip_coeff(i / 2);
            }
        }
        out
    }

    /// `self^e mod modulus` by square-and-multiply.
    pub fn pow_mod(&self, e: u128, modulus: &Poly) -> Result<Poly, PolyError> {
        if modulus.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let mut acc = Poly::one().rem(modulus)?;
        let mut base = self.rem(modulus)?;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(modulus)?;
            }
            base = base.square().rem(modulus)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Rabin irreducibility test: `X^(2^d) = X (mod f)` and, for every prime
    /// `q` dividing `d`, `gcd(X^(2^(d/q)) - X, f) = 1`.
    pub fn is_irreducible(&self) -> bool {
        let Some(d) = self.degree() else { return false };
        if d == 0 {
            return false;
        }
        let x = Poly::x();
        let prime_divs: Vec<u64> = numtheory::factorize(d as u64)
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        let mut h = x.rem(self).expect("nonzero modulus");
        for i in 1..=d {
            h = h.square().rem(self).expect("nonzero modulus");
            if prime_divs.iter().any(|&q| d as u64 / q == i as u64) {
                let g = h.add(&x).gcd(self).expect("self is nonzero");
                if !g.is_one() {
                    return false;
                }
            }
        }
        h == x.rem(self).expect("nonzero modulus")
    }

    /// Factor into irreducibles; requires degree >= 1.
    pub fn factor(&self) -> Result<FactorMultiset, PolyError> {
        match self.degree() {
            None => Err(PolyError::ConstantInput),
            Some(0) => Err(PolyError::ConstantInput),
            Some(_) => Ok(FactorMultiset::build(self)),
        }
    }

    /// The order of `f`: the least `e >= 1` with `f | X^e - 1`. Requires
    /// degree >= 1 and a nonzero constant term.
    ///
    /// For an irreducible factor of degree `d` the order divides `2^d - 1`
    /// and is found by peeling primes off that group order; a repeated
    /// factor of multiplicity `m` contributes an extra `2^ceil(log2 m)`.
    /// The result is verified once against `X^e mod f` before returning.
    pub fn poly_order(&self) -> Result<u128, PolyError> {
        match self.degree() {
            None | Some(0) => return Err(PolyError::ConstantInput),
            Some(_) if !self.coeff(0) => return Err(PolyError::ZeroConstantTerm),
            Some(_) => {}
        }
        let factors = self.factor()?;
        let mut odd_part = 1u128;
        let mut max_mult = 1u32;
        for (g, mult) in factors.factors() {
            odd_part = numtheory::lcm_u128(odd_part, irreducible_order(g) as u128);
            max_mult = max_mult.max(*mult);
        }
        let two_power = u32::BITS - max_mult.saturating_sub(1).leading_zeros();
        let e = odd_part << two_power;
        let check = Poly::x().pow_mod(e, self)?;
        assert!(check.is_one(), "computed order failed verification");
        Ok(e)
    }

    /// Ascending coefficient bit-string (`1 + X + X^3` -> `"1101"`).
    pub fn bit_string(&self) -> String {
        match self.degree() {
            None => "0".to_owned(),
            Some(d) => (0..=d).map(|i| if self.coeff(i) { '1' } else { '0' }).collect(),
        }
    }
}

impl Ord for Poly {
    /// Numeric order of the coefficient bit-string: sorts by degree first,
    /// then by ascending coefficient bits. This is the canonical factor
    /// order used throughout the crate.
    fn cmp(&self, other: &Self) -> Ordering {
        self.limbs
            .len()
            .cmp(&other.limbs.len())
            .then_with(|| self.limbs.iter().rev().cmp(other.limbs.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else { return write!(f, "0") };
        let mut first = true;
        for i in (0..=d).rev() {
            if !self.coeff(i) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "1")?,
                1 => write!(f, "X")?,
                _ => write!(f, "X^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = PolyError;

    /// Parse either text form. A string of only `0`/`1` characters is read
    /// as an ascending coefficient bit-string; anything else is read as a
    /// human-form sum of `1`, `X`, and `X^k` terms. `-` is accepted as a
    /// synonym for `+` (they coincide over GF(2)).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolyError::Parse(s.to_owned()));
        }
        if compact.chars().all(|c| c == '0' || c == '1') {
            let mut p = Poly::zero();
            for (i, c) in compact.chars().enumerate() {
                if c == '1' {
                    p.flip_coeff(i);
                }
            }
            return Ok(p);
        }
        let mut p = Poly::zero();
        for term in compact.replace('-', "+").split('+') {
            let exp = match term {
                "1" => 0,
                "X" | "x" => 1,
                _ => {
                    let rest = term
                        .strip_prefix("X^")
                        .or_else(|| term.strip_prefix("x^"))
                        .ok_or_else(|| PolyError::Parse(s.to_owned()))?;
                    rest.parse::<usize>().map_err(|_| PolyError::Parse(s.to_owned()))?
                }
            };
            if p.coeff(exp) {
                // A repeated term would silently cancel; treat it as a typo.
                return Err(PolyError::Parse(s.to_owned()));
            }
            p.flip_coeff(exp);
        }
        Ok(p)
    }
}

impl serde::Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Order of an irreducible polynomial `g` with nonzero constant term: the
/// order of `X` in the field `F_2[X]/(g)`, a divisor of `2^deg(g) - 1`.
fn irreducible_order(g: &Poly) -> u64 {
    let d = g.degree().expect("irreducible implies degree >= 1") as u32;
    let group = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    let mut e = group;
    for (p, _) in numtheory::factorize(group) {
        while e % p == 0 {
            let candidate = e / p;
            let h = Poly::x()
                .pow_mod(candidate as u128, g)
                .expect("irreducible modulus is nonzero");
            if h.is_one() {
                e = candidate;
            } else {
                break;
            }
        }
    }
    e
}

/// A verified factorization into irreducibles, sorted canonically (degree
/// first, then ascending coefficient bits).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorMultiset {
    input: Poly,
    factors: Vec<(Poly, u32)>,
}

impl FactorMultiset {
    /// Run the pipeline and check its own output: the product of the factors
    /// must reproduce the input and every factor must pass the
    /// irreducibility test. A failure here would be an internal bug, so it
    /// panics rather than returning an error.
    fn build(input: &Poly) -> Self {
        let mut factors: BTreeMap<Poly, u32> = BTreeMap::new();
        for (part, mult) in square_free_parts(input) {
            for (product, degree) in distinct_degree_parts(&part) {
                for g in equal_degree_split(&product, degree) {
                    *factors.entry(g).or_insert(0) += mult;
                }
            }
        }
        let factors: Vec<(Poly, u32)> = factors.into_iter().collect();

        let mut product = Poly::one();
        for (g, mult) in &factors {
            assert!(g.is_irreducible(), "reducible factor {g} in output");
            for _ in 0..*mult {
                product = product.mul(g);
            }
        }
        assert_eq!(&product, input, "factor product does not reproduce input");

        FactorMultiset { input: input.clone(), factors }
    }

    /// The factored polynomial.
    pub fn input(&self) -> &Poly {
        &self.input
    }

    /// `(irreducible, multiplicity)` pairs in canonical order.
    pub fn factors(&self) -> &[(Poly, u32)] {
        &self.factors
    }

    /// Degree multiset as ascending `(degree, count)` pairs, counting
    /// multiplicities.
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for (g, mult) in &self.factors {
            *counts.entry(g.degree().expect("factors are nonconstant")).or_insert(0) +=
                *mult as usize;
        }
        counts.into_iter().collect()
    }
}

impl fmt::Display for FactorMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (g, mult) in &self.factors {
            if !first {
                write!(f, " * ")?;
            }
            write!(f, "({g})")?;
            if *mult > 1 {
                write!(f, "^{mult}")?;
            }
            first = false;
        }
        Ok(())
    }
}

/// Square-free decomposition in characteristic 2: returns pairs
/// `(square-free part, multiplicity)` whose expansion reproduces the input.
/// A vanishing derivative signals a perfect square, which is handled by
/// taking the square root and doubling multiplicities.
fn square_free_parts(f: &Poly) -> Vec<(Poly, u32)> {
    if f.degree().is_none_or(|d| d == 0) {
        return vec![];
    }
    let fp = f.derivative();
    if fp.is_zero() {
        return square_free_parts(&f.sqrt())
            .into_iter()
            .map(|(g, m)| (g, m * 2))
            .collect();
    }
    let mut out = vec![];
    let mut r = f.gcd(&fp).expect("f is nonzero");
    let mut t = f.div_exact(&r);
    let mut i = 1u32;
    while !t.is_one() {
        let v = r.gcd(&t).expect("t is nonzero");
        let w = t.div_exact(&v);
        if !w.is_one() {
            out.push((w, i));
        }
        r = r.div_exact(&v);
        t = v;
        i += 1;
    }
    // What survives in r carries only even multiplicities.
    if !r.is_one() {
        out.extend(square_free_parts(&r.sqrt()).into_iter().map(|(g, m)| (g, m * 2)));
    }
    out
}

/// Distinct-degree decomposition of a square-free polynomial: pairs
/// `(product of all irreducible factors of degree d, d)`.
fn distinct_degree_parts(f: &Poly) -> Vec<(Poly, usize)> {
    let mut out = vec![];
    let mut rest = f.clone();
    let x = Poly::x();
    let mut h = x.rem(&rest).expect("degree >= 1");
    let mut d = 0usize;
    while rest.degree().is_some_and(|deg| deg >= 2 * (d + 1)) {
        d += 1;
        h = h.square().rem(&rest).expect("rest is nonzero");
        let g = h.add(&x).gcd(&rest).expect("rest is nonzero");
        if !g.is_one() {
            out.push((g.clone(), d));
            rest = rest.div_exact(&g);
            h = h.rem(&rest).expect("rest is nonzero");
        }
    }
    if rest.degree().is_some_and(|deg| deg > 0) {
        let deg = rest.degree().unwrap();
        out.push((rest, deg));
    }
    out
}

/// Split a square-free product of irreducibles of common degree `d` into the
/// individual factors, using gcds with trace maps of random elements. The
/// ChaCha stream is seeded with a fixed constant, so the output (a sorted
/// set anyway) is reached deterministically.
fn equal_degree_split(f: &Poly, d: usize) -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
    let mut out = vec![];
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        let deg = g.degree().expect("factors have degree >= 1");
        if deg == d {
            out.push(g);
            continue;
        }
        // Trace of a random element: a + a^2 + a^4 + ... lands in GF(2)
        // independently modulo each irreducible factor, so its gcd with g
        // splits g with probability about 1/2 per draw.
        let split = loop {
            let a = random_poly_below(&mut rng, deg);
            if a.is_zero() {
                continue;
            }
            let mut trace = a.clone();
            let mut power = a.clone();
            for _ in 1..d {
                power = power.square().rem(&g).expect("g is nonzero");
                trace = trace.add(&power);
            }
            let candidate = trace.gcd(&g).expect("g is nonzero");
            let cd = candidate.degree().unwrap_or(0);
            if cd > 0 && cd < deg {
                break candidate;
            }
        };
        stack.push(g.div_exact(&split));
        stack.push(split);
    }
    out.sort();
    out
}

fn random_poly_below(rng: &mut ChaCha8Rng, degree_bound: usize) -> Poly {
    let mut limbs = vec![0u64; degree_bound / 64 + 1];
    for limb in &mut limbs {
        *limb = rng.gen();
    }
    let top_bits = degree_bound % 64;
    let len = limbs.len();
    limbs[len - 1] &= (1u64 << top_bits) - 1;
    if top_bits == 0 {
        limbs.pop();
    }
    let mut p = Poly { limbs };
    p.normalize();
    p
}

/// Degree multiset of the irreducible factorization of `X^n - 1` over
/// GF(2), as ascending `(degree, count)` pairs.
///
/// Computed two independent ways and cross-checked on every call: by direct
/// factorization, and by 2-cyclotomic cosets modulo the odd part of `n`
/// (writing `n = 2^a * n0` with `n0` odd, each coset of size `s` modulo
/// `n0` contributes the degree `s` with multiplicity `2^a`).
pub fn xn_minus_1_degrees(n: usize) -> Result<Vec<(usize, usize)>, PolyError> {
    let direct = Poly::xn_minus_1(n)?.factor()?.degrees();

    let two_power = n / (n >> n.trailing_zeros());
    let odd = n >> n.trailing_zeros();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen = vec![false; odd];
    for start in 0..odd {
        if seen[start] {
            continue;
        }
        let mut size = 0usize;
        let mut c = start;
        loop {
            seen[c] = true;
            size += 1;
            c = c * 2 % odd;
            if c == start {
                break;
            }
        }
        *counts.entry(size).or_insert(0) += two_power;
    }
    let cosets: Vec<(usize, usize)> = counts.into_iter().collect();

    assert_eq!(direct, cosets, "factor degrees disagree with cyclotomic cosets at n = {n}");
    Ok(direct)
}

/// Enumerate every monic divisor of `X^n - 1` of degree exactly `d`, in
/// ascending lexicographic order of the multiplicity vector over the
/// canonically sorted irreducible factors. The first entry is therefore the
/// canonical choice returned by [`divisor_of_degree`].
pub fn divisors_of_degree(n: usize, d: usize) -> Result<Vec<Poly>, PolyError> {
    let modulus = Poly::xn_minus_1(n)?;
    if d > n {
        return Ok(vec![]);
    }
    if d == 0 {
        return Ok(vec![Poly::one()]);
    }
    let factors = modulus.factor()?;
    let items: Vec<(usize, u32)> = factors
        .factors()
        .iter()
        .map(|(g, m)| (g.degree().expect("nonconstant"), *m))
        .collect();

    // reachable[i] = degrees attainable using items i.. only.
    let mut reachable = vec![vec![false; d + 1]; items.len() + 1];
    reachable[items.len()][0] = true;
    for i in (0..items.len()).rev() {
        let (weight, cap) = items[i];
        for value in 0..=d {
            if reachable[i + 1][value] {
                for used in 0..=cap as usize {
                    let total = value + used * weight;
                    if total > d {
                        break;
                    }
                    reachable[i][total] = true;
                }
            }
        }
    }
    if !reachable[0][d] {
        return Ok(vec![]);
    }

    let mut out = vec![];
    let mut mults = vec![0u32; items.len()];
    enumerate_divisors(&factors, &items, &reachable, d, 0, &mut mults, &mut out);
    for divisor in &out {
        assert!(divisor.divides(&modulus), "enumerated non-divisor");
    }
    Ok(out)
}

fn enumerate_divisors(
    factors: &FactorMultiset,
    items: &[(usize, u32)],
    reachable: &[Vec<bool>],
    remaining: usize,
    i: usize,
    mults: &mut Vec<u32>,
    out: &mut Vec<Poly>,
) {
    if i == items.len() {
        if remaining == 0 {
            let mut p = Poly::one();
            for (j, (g, _)) in factors.factors().iter().enumerate() {
                for _ in 0..mults[j] {
                    p = p.mul(g);
                }
            }
            out.push(p);
        }
        return;
    }
    let (weight, cap) = items[i];
    for used in 0..=cap {
        let spent = used as usize * weight;
        if spent > remaining {
            break;
        }
        if !reachable[i + 1][remaining - spent] {
            continue;
        }
        mults[i] = used;
        enumerate_divisors(factors, items, reachable, remaining - spent, i + 1, mults, out);
    }
    mults[i] = 0;
}

/// A monic divisor of `X^n - 1` of degree exactly `d`, or `None` when no
/// such divisor exists. Ties are broken canonically: the lexicographically
/// smallest multiplicity vector over the sorted irreducible factors.
pub fn divisor_of_degree(n: usize, d: usize) -> Result<Option<Poly>, PolyError> {
    Ok(divisors_of_degree(n, d)?.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().expect("test literal")
    }

    #[test]
    fn degree_and_zero_marker() {
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!(Poly::one().degree(), Some(0));
        assert_eq!(Poly::monomial(64).degree(), Some(64));
        assert!(Poly::zero().is_zero());
    }

    #[test]
    fn arithmetic_basics() {
        // (X + 1)(X^2 + X + 1) = X^3 + 1
        assert_eq!(p("X+1").mul(&p("X^2+X+1")), p("X^3+1"));
        // Addition is cancellation.
        assert_eq!(p("X^3+X+1").add(&p("X^3+X+1")), Poly::zero());
        assert_eq!(p("X^3+X+1").add(&p("X+1")), p("X^3"));
        // Squaring spreads exponents.
        assert_eq!(p("X+1").square(), p("X^2+1"));
        assert_eq!(p("X^2+X+1").square(), p("X^4+X^2+1"));
    }

    #[test]
    fn divmod_examples() {
        let (q, r) = p("X^3+1").divmod(&p("X+1")).unwrap();
        assert_eq!(q, p("X^2+X+1"));
        assert!(r.is_zero());

        let (q, r) = p("X^4+X+1").divmod(&p("X^2+1")).unwrap();
        assert_eq!(q.mul(&p("X^2+1")).add(&r), p("X^4+X+1"));
        assert!(r.degree().unwrap() < 2);

        let (q, r) = p("X+1").divmod(&p("X^3+X+1")).unwrap();
        assert!(q.is_zero());
        assert_eq!(r, p("X+1"));

        assert_eq!(
            p("X^2").divmod(&Poly::zero()),
            Err(PolyError::DivisionByZero)
        );
    }

    #[test]
    fn divmod_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let a = random_poly_below(&mut rng, 96);
            let b = random_poly_below(&mut rng, 48);
            if b.is_zero() {
                continue;
            }
            let (q, r) = a.divmod(&b).unwrap();
            assert_eq!(q.mul(&b).add(&r), a);
            if let Some(rd) = r.degree() {
                assert!(rd < b.degree().unwrap());
            }
        }
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(p("X^3+1").gcd(&p("X^2+1")).unwrap(), p("X+1"));
        assert_eq!(p("X^2+X+1").gcd(&p("X+1")).unwrap(), Poly::one());
        assert_eq!(p("X^2+X").gcd(&Poly::zero()).unwrap(), p("X^2+X"));
        assert_eq!(Poly::zero().gcd(&Poly::zero()), Err(PolyError::GcdOfZeros));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("1101"), p("X^3+X+1"));
        assert_eq!(p("X^3 + X + 1"), p("X^3+X+1"));
        assert_eq!(p("X^28 - 1"), Poly::xn_minus_1(28).unwrap());
        assert_eq!(p("0").degree(), None);
        assert_eq!(p("1"), Poly::one());
        assert_eq!(p("01"), Poly::x());
        assert_eq!(p("10"), Poly::one()); // trailing zero coefficient
        assert_eq!(p("X^3+X+1").to_string(), "X^3 + X + 1");
        assert_eq!(p("X^3+X+1").bit_string(), "1101");
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(Poly::zero().bit_string(), "0");
        assert!("X^2+Y".parse::<Poly>().is_err());
        assert!("X^2+X^2".parse::<Poly>().is_err());
        assert!("".parse::<Poly>().is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_poly_below(&mut rng, 80);
            assert_eq!(a.to_string().parse::<Poly>().unwrap(), a);
            assert_eq!(a.bit_string().parse::<Poly>().unwrap(), a);
        }
    }

    #[test]
    fn canonical_order() {
        // Degree dominates, then ascending coefficient bits.
        let mut v = vec![p("X^3+X^2+1"), p("X+1"), p("X^3+X+1"), p("X^2+X+1")];
        v.sort();
        assert_eq!(
            v,
            vec![p("X+1"), p("X^2+X+1"), p("X^3+X+1"), p("X^3+X^2+1")]
        );
    }

    /// Trial-division factorization oracle, independent of the pipeline
    /// under test: strip candidate divisors in ascending canonical order.
    /// By the time a reducible candidate comes up, its irreducible factors
    /// have already been stripped, so every divisor found is irreducible and
    /// the output comes out in canonical order by construction.
    fn naive_factor(f: &Poly) -> Vec<(Poly, u32)> {
        let mut rest = f.clone();
        let mut out: Vec<(Poly, u32)> = vec![];
        let mut bits = 2u128; // start at X
        while rest.degree().unwrap() > 0 {
            let candidate = Poly::from_coeff_bits(bits);
            let mut mult = 0u32;
            while candidate.divides(&rest) {
                rest = rest.div_exact(&candidate);
                mult += 1;
            }
            if mult > 0 {
                out.push((candidate, mult));
            }
            bits += 1;
        }
        out
    }

    #[test]
    fn factor_examples() {
        let f = p("X^3+1").factor().unwrap();
        assert_eq!(f.factors(), &[(p("X+1"), 1), (p("X^2+X+1"), 1)]);
        assert_eq!(f.to_string(), "(X + 1) * (X^2 + X + 1)");

        // X^28 - 1 = (X+1)^4 (X^3+X+1)^4 (X^3+X^2+1)^4
        let f = Poly::xn_minus_1(28).unwrap().factor().unwrap();
        assert_eq!(
            f.factors(),
            &[(p("X+1"), 4), (p("X^3+X+1"), 4), (p("X^3+X^2+1"), 4)]
        );
        assert_eq!(f.degrees(), vec![(1, 4), (3, 8)]);

        // A perfect square exercises the derivative-zero branch.
        let f = p("X^4+X^2+1").factor().unwrap();
        assert_eq!(f.factors(), &[(p("X^2+X+1"), 2)]);

        assert_eq!(Poly::one().factor(), Err(PolyError::ConstantInput));
        assert_eq!(Poly::zero().factor(), Err(PolyError::ConstantInput));
    }

    #[test]
    fn factor_matches_naive_oracle() {
        // Every polynomial of degree 1..=10 with a handful of terms, plus
        // everything of degree <= 7 exhaustively.
        for bits in 2u128..256 {
            let f = Poly::from_coeff_bits(bits);
            assert_eq!(f.factor().unwrap().factors(), naive_factor(&f), "f = {f}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..60 {
            let f = random_poly_below(&mut rng, 12);
            if f.degree().unwrap_or(0) == 0 {
                continue;
            }
            assert_eq!(f.factor().unwrap().factors(), naive_factor(&f), "f = {f}");
        }
    }

    #[test]
    fn factor_roundtrip_random_degree_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..120 {
            let mut f = random_poly_below(&mut rng, 64);
            if f.degree().unwrap_or(0) == 0 {
                f = f.add(&Poly::monomial(64));
            }
            // FactorMultiset::build verifies product and irreducibility
            // internally; spot-check the product again from the outside.
            let fs = f.factor().unwrap();
            let mut back = Poly::one();
            for (g, m) in fs.factors() {
                for _ in 0..*m {
                    back = back.mul(g);
                }
            }
            assert_eq!(back, f);
        }
    }

    #[test]
    fn irreducibility_against_naive() {
        let naive = |f: &Poly| {
            let d = f.degree().unwrap();
            if d == 0 {
                return false;
            }
            (2..1u128 << d)
                .map(Poly::from_coeff_bits)
                .filter(|g| g.degree().unwrap() <= d / 2)
                .all(|g| !g.divides(f))
        };
        for bits in 2u128..512 {
            let f = Poly::from_coeff_bits(bits);
            assert_eq!(f.is_irreducible(), naive(&f), "f = {f}");
        }
    }

    #[test]
    fn xn_degrees_examples() {
        assert_eq!(xn_minus_1_degrees(28).unwrap(), vec![(1, 4), (3, 8)]);
        assert_eq!(xn_minus_1_degrees(7).unwrap(), vec![(1, 1), (3, 2)]);
        assert_eq!(xn_minus_1_degrees(8).unwrap(), vec![(1, 8)]);
        assert_eq!(xn_minus_1_degrees(1).unwrap(), vec![(1, 1)]);
        assert!(matches!(xn_minus_1_degrees(0), Err(PolyError::ZeroExponent)));
    }

    #[test]
    fn xn_degrees_frobenius_doubling() {
        // Squaring the modulus doubles every multiplicity:
        // X^(2n) - 1 = (X^n - 1)^2.
        for n in 1..=128 {
            let base = xn_minus_1_degrees(n).unwrap();
            let doubled = xn_minus_1_degrees(2 * n).unwrap();
            let expected: Vec<(usize, usize)> =
                base.into_iter().map(|(d, c)| (d, 2 * c)).collect();
            assert_eq!(doubled, expected, "n = {n}");
        }
    }

    #[test]
    fn xn_degrees_routes_agree_to_200() {
        // The two routes are cross-checked inside the call; driving it for
        // every n <= 200 makes the agreement an explicit test.
        for n in 1..=200 {
            xn_minus_1_degrees(n).unwrap();
        }
    }

    #[test]
    fn poly_order_examples() {
        assert_eq!(p("X+1").poly_order(), Ok(1));
        assert_eq!(p("X^2+X+1").poly_order(), Ok(3));
        assert_eq!(p("X^2+1").poly_order(), Ok(2)); // (X+1)^2
        assert_eq!(p("X^4+X^3+X^2+X+1").poly_order(), Ok(5));
        assert_eq!(p("X").poly_order(), Err(PolyError::ZeroConstantTerm));
        assert_eq!(p("X^2+X").poly_order(), Err(PolyError::ZeroConstantTerm));
        assert_eq!(Poly::one().poly_order(), Err(PolyError::ConstantInput));
    }

    #[test]
    fn poly_order_matches_naive_scan() {
        // Least e with f | X^e - 1, found by stepping X^e mod f.
        let naive = |f: &Poly| {
            let x = Poly::x();
            let mut h = x.rem(f).unwrap();
            let mut e = 1u128;
            while !h.is_one() {
                h = h.mul(&x).rem(f).unwrap();
                e += 1;
            }
            e
        };
        for bits in 0u128..256 {
            let f = Poly::from_coeff_bits(bits * 2 + 1); // force constant term
            if f.degree().unwrap() == 0 {
                continue;
            }
            assert_eq!(f.poly_order().unwrap(), naive(&f), "f = {f}");
        }
    }

    #[test]
    fn divisor_of_degree_examples() {
        // Degrees of X^5 - 1 are {1, 4}: no divisor of degree 2.
        assert_eq!(divisor_of_degree(5, 2).unwrap(), None);
        assert_eq!(divisor_of_degree(5, 4).unwrap(), Some(p("X^4+X^3+X^2+X+1")));

        // Canonical degree-5 divisor of X^28 - 1: multiplicity vector
        // (2, 0, 1) over the sorted factors (X+1, X^3+X+1, X^3+X^2+1).
        let d = divisor_of_degree(28, 5).unwrap().unwrap();
        assert_eq!(d, p("X+1").square().mul(&p("X^3+X^2+1")));
        assert!(d.divides(&Poly::xn_minus_1(28).unwrap()));

        assert_eq!(divisor_of_degree(3, 0).unwrap(), Some(Poly::one()));
        assert_eq!(divisor_of_degree(3, 7).unwrap(), None);
        assert!(matches!(divisor_of_degree(0, 1), Err(PolyError::ZeroExponent)));
    }

    #[test]
    fn divisor_feasibility_matches_subset_sums() {
        // A degree is feasible exactly when the subset-sum closure of the
        // factor degree multiset reaches it.
        for n in 1..=40usize {
            let degrees = xn_minus_1_degrees(n).unwrap();
            let mut reach = vec![false; n + 1];
            reach[0] = true;
            for (d, count) in degrees {
                for _ in 0..count {
                    for v in (d..=n).rev() {
                        if reach[v - d] {
                            reach[v] = true;
                        }
                    }
                }
            }
            for d in 0..=n {
                let got = divisor_of_degree(n, d).unwrap();
                assert_eq!(got.is_some(), reach[d], "n = {n}, d = {d}");
                if let Some(divisor) = got {
                    assert_eq!(divisor.degree(), Some(d));
                    assert!(divisor.divides(&Poly::xn_minus_1(n).unwrap()));
                }
            }
        }
    }

    #[test]
    fn divisor_enumeration_is_complete() {
        // Against a brute-force scan of all monic polynomials of degree d.
        for n in [6usize, 12] {
            let modulus = Poly::xn_minus_1(n).unwrap();
            for d in 1..=6usize {
                let enumerated = divisors_of_degree(n, d).unwrap();
                let mut brute: Vec<Poly> = (0..1u128 << d)
                    .map(|low| Poly::from_coeff_bits(low | 1 << d))
                    .filter(|c| c.divides(&modulus))
                    .collect();
                brute.sort();
                let mut sorted = enumerated.clone();
                sorted.sort();
                assert_eq!(sorted, brute, "n = {n}, d = {d}");
                // No duplicates in enumeration order either.
                assert_eq!(sorted.len(), enumerated.len());
            }
        }
    }
}
