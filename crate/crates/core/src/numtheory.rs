//! Integer helpers: multiplicative orders, Euler phi, binomial parity, and
//! the bounded-knapsack characterization of p-practical numbers.
//!
//! An integer `n` is *p-practical* when `X^n - 1` has a divisor of every
//! degree between 1 and `n` over `F_p`. Rather than factor polynomials, this
//! module decides the property through the equivalent knapsack condition:
//! every `m` in `1..=n` must be expressible as `sum(l*_p(d) * n_d)` over the
//! divisors `d` of `n`, where `l*_p(d)` is the multiplicative order of `p`
//! modulo the largest divisor of `d` coprime to `p` and each `n_d` is capped
//! by `phi(d) / l*_p(d)`. For `p = 2` the verdict is cross-checked against
//! the factor degrees of `X^n - 1` computed by [`crate::gf2poly`].

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// Errors reported by the integer helpers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumError {
    /// `mult_order(a, n)` requires `gcd(a, n) = 1`.
    NotCoprime { a: u64, n: u64 },
    /// `is_p_practical(p, n)` requires `p` prime.
    NotPrime { p: u64 },
    /// A `k > m` was passed to `binom_odd`.
    BinomialOutOfRange { m: u64, k: u64 },
    /// Zero was passed where a positive integer is required.
    Zero,
}

impl fmt::Display for NumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumError::NotCoprime { a, n } => {
                write!(f, "multiplicative order undefined: gcd({a}, {n}) != 1")
            }
            NumError::NotPrime { p } => write!(f, "{p} is not prime"),
            NumError::BinomialOutOfRange { m, k } => {
                write!(f, "binomial C({m}, {k}) out of range: k > m")
            }
            NumError::Zero => write!(f, "argument must be positive"),
        }
    }
}

impl std::error::Error for NumError {}

/// `gcd(a, b)` by the Euclidean algorithm; `gcd(0, 0) = 0`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple in `u128` to survive products of 64-bit orders.
pub fn lcm_u128(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    let mut x = a;
    let mut y = b;
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // This witness set decides primality for every n < 3.3 * 10^24.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-cycle Pollard rho; returns a nontrivial factor of composite odd `n`.
fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of `n >= 1` as sorted `(prime, exponent)` pairs.
///
/// Trial division handles small primes; Pollard rho splits what remains, so
/// inputs of the size `2^d - 1` for `d <= 64` are fine.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: BTreeMap<u64, u32> = BTreeMap::new();
    for p in [2u64, 3, 5] {
        while n % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    let mut d = 7u64;
    while d <= 100_000 && d * d <= n {
        while n % d == 0 {
            *out.entry(d).or_insert(0) += 1;
            n /= d;
        }
        d += 2;
    }
    let mut stack = vec![];
    if n > 1 {
        stack.push(n);
    }
    while let Some(m) = stack.pop() {
        if is_prime(m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let f = pollard_rho(m);
            stack.push(f);
            stack.push(m / f);
        }
    }
    out.into_iter().collect()
}

/// All divisors of `n >= 1` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Euler's totient `phi(n)` for `n >= 1`.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n > 0, "euler_phi(0) is undefined");
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// Multiplicative order of `a` modulo `n`: the least `e >= 1` with
/// `a^e = 1 (mod n)`. Found by direct iteration, so at most `phi(n)` steps.
///
/// Requires `n >= 1` and `gcd(a, n) = 1`; the order modulo 1 is 1.
pub fn mult_order(a: u64, n: u64) -> Result<u64, NumError> {
    if n == 0 {
        return Err(NumError::Zero);
    }
    if n == 1 {
        return Ok(1);
    }
    let a = a % n;
    if gcd(a, n) != 1 {
        return Err(NumError::NotCoprime { a, n });
    }
    let mut x = a;
    let mut e = 1u64;
    while x != 1 {
        x = mul_mod(x, a, n);
        e += 1;
    }
    Ok(e)
}

/// The largest divisor of `n` coprime to `a` (strip every prime shared
/// with `a`).
pub fn coprime_part(mut n: u64, a: u64) -> u64 {
    assert!(n > 0, "coprime_part requires n >= 1");
    loop {
        let g = gcd(n, a);
        if g == 1 {
            return n;
        }
        while n % g == 0 {
            n /= g;
        }
    }
}

/// `l*_a(n)`: the multiplicative order of `a` modulo the largest divisor of
/// `n` coprime to `a`. Defined for every `n >= 1` (and any `a >= 2`), since
/// the stripped modulus is always coprime to `a`.
pub fn l_star(a: u64, n: u64) -> Result<u64, NumError> {
    if a < 2 || n == 0 {
        return Err(NumError::Zero);
    }
    mult_order(a, coprime_part(n, a))
}

/// Parity of the binomial coefficient `C(m, k)` via Lucas' theorem: odd
/// exactly when every base-2 digit of `k` is at most the matching digit of
/// `m`, i.e. when `k` is a submask of `m`.
pub fn binom_odd(m: u64, k: u64) -> Result<bool, NumError> {
    if k > m {
        return Err(NumError::BinomialOutOfRange { m, k });
    }
    Ok(m & k == k)
}

/// `k_1(m)`: the least `k >= 1` with `C(m, k)` odd. By Lucas this is the
/// lowest set bit of `m`, hence always the 2-adic power `2^v2(m)`; for odd
/// `m` it is 1 and `k_1(m) = m` exactly when `m` is a power of two.
///
/// Defined for every `m >= 1`. Note that `m = 1` and `m = 2` are degenerate
/// (`k_1(m) = m` there too, trivially).
pub fn k1(m: u64) -> Result<u64, NumError> {
    if m == 0 {
        return Err(NumError::Zero);
    }
    Ok(m & m.wrapping_neg())
}

/// Number of odd entries in row `m` of Pascal's triangle: `2^popcount(m)`.
pub fn odd_count_row(m: u64) -> u128 {
    1u128 << m.count_ones()
}

/// One knapsack item of the p-practicality characterization: divisor `d` of
/// `n` contributes up to `capacity` copies of `weight = l*_p(d)`, where
/// `capacity = phi(d) / l*_p(d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PracticalItem {
    pub d: u64,
    pub weight: u64,
    pub capacity: u64,
}

/// Outcome of [`is_p_practical`], with one witness representation per
/// reachable target.
///
/// `table[m][d]` is the multiplicity `n_d` in the stored representation
/// `m = sum(l*_p(d) * n_d)`; for each representable `m` the stored vector is
/// the lexicographically first one over divisors in ascending order. When
/// the verdict is negative, `missing_m` is the smallest unreachable target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PracticalityWitness {
    pub p: u64,
    pub n: u64,
    pub practical: bool,
    pub missing_m: Option<u64>,
    pub items: Vec<PracticalItem>,
    pub table: BTreeMap<u64, BTreeMap<u64, u64>>,
}

impl PracticalityWitness {
    /// Re-verify every stored representation: capacities respected and sums
    /// correct. Used by tests and by the JSON report path.
    pub fn verify(&self) -> bool {
        for (&m, rep) in &self.table {
            let mut total = 0u64;
            for (&d, &count) in rep {
                let Some(item) = self.items.iter().find(|item| item.d == d) else {
                    return false;
                };
                if count > item.capacity {
                    return false;
                }
                total += item.weight * count;
            }
            if total != m {
                return false;
            }
        }
        if self.practical {
            (1..=self.n).all(|m| self.table.contains_key(&m))
        } else {
            self.missing_m.is_some_and(|m| !self.table.contains_key(&m))
        }
    }
}

/// Decide whether `n` is p-practical: does `X^n - 1` over `F_p` have a
/// divisor of every degree `1..=n`?
///
/// Decided entirely in integer arithmetic through the knapsack
/// characterization described in the module docs, returning a witness table
/// of representations. For `p = 2` the reachable degree set is additionally
/// cross-checked against the factor degrees of `X^n - 1`; a disagreement
/// would be an internal arithmetic bug, so it panics.
pub fn is_p_practical(p: u64, n: u64) -> Result<PracticalityWitness, NumError> {
    if n == 0 {
        return Err(NumError::Zero);
    }
    if !is_prime(p) {
        return Err(NumError::NotPrime { p });
    }

    let items: Vec<PracticalItem> = divisors(n)
        .into_iter()
        .map(|d| {
            let weight = l_star(p, d).expect("stripped modulus is coprime to p");
            let phi = euler_phi(d);
            assert_eq!(phi % weight, 0, "l*_p(d) must divide phi(d)");
            PracticalItem { d, weight, capacity: phi / weight }
        })
        .collect();

    // reachable[i] = degree sums attainable using items i.. only; computed
    // back-to-front so representations can be reconstructed greedily.
    let size = n as usize + 1;
    let mut reachable = vec![vec![false; size]; items.len() + 1];
    reachable[items.len()][0] = true;
    for i in (0..items.len()).rev() {
        let PracticalItem { weight, capacity, .. } = items[i];
        for m in 0..size {
            if reachable[i + 1][m] {
                let mut value = m;
                let mut used = 0u64;
                while used <= capacity && value < size {
                    // Marking from the suffix row covers every multiplicity,
                    // including 0.
                    reachable[i][value] = true;
                    value += weight as usize;
                    used += 1;
                }
            }
        }
    }

    let mut table = BTreeMap::new();
    let mut missing_m = None;
    for m in 1..=n {
        if !reachable[0][m as usize] {
            if missing_m.is_none() {
                missing_m = Some(m);
            }
            continue;
        }
        // Lexicographically first representation over ascending divisors:
        // commit the smallest multiplicity that keeps the suffix feasible.
        let mut rep = BTreeMap::new();
        let mut rest = m;
        for (i, item) in items.iter().enumerate() {
            let mut picked = None;
            for n_d in 0..=item.capacity.min(rest / item.weight) {
                let after = rest - n_d * item.weight;
                if reachable[i + 1][after as usize] {
                    picked = Some(n_d);
                    break;
                }
            }
            let n_d = picked.expect("reachable target must decompose");
            if n_d > 0 {
                rep.insert(item.d, n_d);
            }
            rest -= n_d * item.weight;
        }
        assert_eq!(rest, 0);
        table.insert(m, rep);
    }

    let witness = PracticalityWitness {
        p,
        n,
        practical: missing_m.is_none(),
        missing_m,
        items,
        table,
    };

    if p == 2 {
        // Independent route: subset sums of the factor degrees of X^n - 1.
        let degrees = crate::gf2poly::xn_minus_1_degrees(n as usize)
            .expect("n >= 1 checked above");
        let mut sums = vec![false; size];
        sums[0] = true;
        for (degree, count) in degrees {
            for _ in 0..count {
                for m in (degree..size).rev() {
                    if sums[m - degree] {
                        sums[m] = true;
                    }
                }
            }
        }
        for m in 1..=n as usize {
            assert_eq!(
                sums[m],
                witness.table.contains_key(&(m as u64)),
                "knapsack and factor-degree routes disagree at n={n}, m={m}"
            );
        }
    }

    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_and_lcm() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(gcd(7, 0), 7);
        assert_eq!(lcm_u128(6, 10), 30);
        assert_eq!(lcm_u128(0, 10), 0);
    }

    #[test]
    fn primality_matches_trial_division() {
        let naive = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000 {
            assert_eq!(is_prime(n), naive(n), "n = {n}");
        }
        assert!(is_prime(2_147_483_647)); // 2^31 - 1
        assert!(is_prime(2_305_843_009_213_693_951)); // 2^61 - 1
        assert!(!is_prime(u64::MAX)); // 2^64 - 1 = 3 * 5 * 17 * 257 * 641 * 65537 * 6700417
    }

    #[test]
    fn factorize_reconstructs_and_is_prime() {
        for n in 1..3000u64 {
            let f = factorize(n);
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            assert!(f.iter().all(|&(p, _)| is_prime(p)));
        }
        // Mersenne-sized inputs exercise the rho path.
        let f = factorize((1u64 << 59) - 1);
        assert_eq!(f, vec![(179_951, 1), (3_203_431_780_337, 1)]);
        let back: u64 = factorize(u64::MAX).iter().map(|&(p, e)| p.pow(e)).product();
        assert_eq!(back, u64::MAX);
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(28), vec![1, 2, 4, 7, 14, 28]);
        assert_eq!(divisors(44), vec![1, 2, 4, 11, 22, 44]);
    }

    #[test]
    fn euler_phi_values() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(4), 2);
        assert_eq!(euler_phi(11), 10);
        // Against the definition, for a while.
        for n in 1..500u64 {
            let direct = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
            assert_eq!(euler_phi(n), direct, "n = {n}");
        }
    }

    #[test]
    fn mult_order_values() {
        assert_eq!(mult_order(2, 7), Ok(3));
        assert_eq!(mult_order(2, 11), Ok(10));
        assert_eq!(mult_order(2, 1), Ok(1));
        assert_eq!(mult_order(3, 1), Ok(1));
        assert_eq!(mult_order(2, 4), Err(NumError::NotCoprime { a: 2, n: 4 }));
        assert_eq!(mult_order(2, 0), Err(NumError::Zero));
        // Lagrange: the order divides phi(n).
        for n in 2..200u64 {
            for a in 2..n {
                if gcd(a, n) == 1 {
                    let e = mult_order(a, n).unwrap();
                    assert_eq!(euler_phi(n) % e, 0, "a = {a}, n = {n}");
                    assert_eq!(pow_mod(a, e, n), 1);
                }
            }
        }
    }

    #[test]
    fn l_star_values() {
        assert_eq!(l_star(2, 4), Ok(1)); // strip 4 -> 1
        assert_eq!(l_star(2, 7), Ok(3));
        assert_eq!(l_star(2, 14), Ok(3)); // strip 14 -> 7
        assert_eq!(l_star(2, 28), Ok(3));
        assert_eq!(l_star(2, 1), Ok(1));
        assert_eq!(coprime_part(28, 2), 7);
        assert_eq!(coprime_part(44, 2), 11);
        assert_eq!(coprime_part(9, 3), 1);
    }

    #[test]
    fn binomial_parity_against_pascal() {
        // Pascal's triangle mod 2, built by additions only.
        let limit = 512usize;
        let mut row = vec![0u8; limit + 1];
        row[0] = 1;
        for m in 0..=limit {
            for k in (1..=m).rev() {
                row[k] ^= row[k - 1];
            }
            for k in 0..=m {
                assert_eq!(
                    binom_odd(m as u64, k as u64).unwrap(),
                    row[k] == 1,
                    "C({m}, {k})"
                );
            }
        }
        assert!(!binom_odd(4, 2).unwrap());
        assert!(binom_odd(44, 4).unwrap());
        assert_eq!(
            binom_odd(3, 5),
            Err(NumError::BinomialOutOfRange { m: 3, k: 5 })
        );
    }

    #[test]
    fn k1_matches_definitional_scan() {
        for m in 1..=4096u64 {
            let scan = (1..=m)
                .find(|&k| binom_odd(m, k).unwrap())
                .expect("C(m, m) = 1 is always odd");
            let fast = k1(m).unwrap();
            assert_eq!(fast, scan, "m = {m}");
            assert_eq!(fast, 1 << m.trailing_zeros());
            // k_1(m) = m exactly for powers of two; otherwise k_1(m) <= m/2.
            if m.is_power_of_two() {
                assert_eq!(fast, m);
            } else {
                assert!(fast <= m / 2);
            }
        }
        assert_eq!(k1(44), Ok(4));
        assert_eq!(k1(28), Ok(4));
        assert_eq!(k1(1), Ok(1));
        assert_eq!(k1(2), Ok(2));
        assert_eq!(k1(0), Err(NumError::Zero));
    }

    #[test]
    fn odd_counts_against_row_scan() {
        for m in 0..=256u64 {
            let scan = (0..=m).filter(|&k| binom_odd(m, k).unwrap()).count() as u128;
            assert_eq!(odd_count_row(m), scan, "m = {m}");
        }
        assert_eq!(odd_count_row(4), 2);
        assert_eq!(odd_count_row(3), 4);
    }

    #[test]
    fn practical_examples() {
        let w = is_p_practical(2, 28).unwrap();
        assert!(w.practical);
        assert_eq!(w.missing_m, None);
        assert!(w.verify());

        let w = is_p_practical(2, 44).unwrap();
        assert!(!w.practical);
        assert!(w.verify());

        let w = is_p_practical(2, 1).unwrap();
        assert!(w.practical);
        assert!(w.verify());

        let w = is_p_practical(2, 5).unwrap();
        assert!(!w.practical);
        // Degrees of X^5 - 1 are {1, 4}: the first unreachable target is 2.
        assert_eq!(w.missing_m, Some(2));
        assert!(w.verify());

        assert_eq!(is_p_practical(4, 10), Err(NumError::NotPrime { p: 4 }));
        assert_eq!(is_p_practical(2, 0), Err(NumError::Zero));
    }

    #[test]
    fn practical_witnesses_verify_in_bulk() {
        for n in 1..=120u64 {
            let w = is_p_practical(2, n).unwrap();
            assert!(w.verify(), "witness inconsistent at n = {n}");
        }
        // An odd prime too, to keep the knapsack honest away from p = 2.
        for n in 1..=60u64 {
            let w = is_p_practical(3, n).unwrap();
            assert!(w.verify(), "p = 3 witness inconsistent at n = {n}");
        }
    }

    #[test]
    fn practical_order_bound_for_odd_primes() {
        // If 4p is 2-practical for an odd prime p, the order of 2 mod p is
        // at most 5: the order must appear as a nonnegative combination of
        // the item weights available below it.
        for p in (3..=97u64).filter(|&p| is_prime(p)) {
            let w = is_p_practical(2, 4 * p).unwrap();
            if w.practical {
                assert!(
                    mult_order(2, p).unwrap() <= 5,
                    "p = {p} breaks the order bound"
                );
            }
        }
        // And the bound bites: 44 = 4 * 11 fails exactly because
        // ord_2(11) = 10 > 5.
        assert_eq!(mult_order(2, 11).unwrap(), 10);
        assert!(!is_p_practical(2, 44).unwrap().practical);
    }
}
