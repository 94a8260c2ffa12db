//! Frobenius normal form over GF(2): similarity transform to a block
//! diagonal of companion matrices whose polynomials form a divisibility
//! chain.
//!
//! The algorithm repeatedly peels off a largest cyclic subspace:
//!
//! 1. build a vector whose annihilator is the minimal polynomial of the
//!    current operator, by combining per-factor components of the standard
//!    basis vectors (the annihilators of a spanning set have the minimal
//!    polynomial as their least common multiple, and components with
//!    pairwise coprime annihilators add up to one with the product);
//! 2. take its Krylov chain as the block's basis columns;
//! 3. cut out an invariant complement as the joint kernel of the functionals
//!    `phi, phi A, ..., phi A^(d-1)`, where `phi` reads off the last chain
//!    coordinate in a basis extending the chain — invariance relies on the
//!    chain polynomial annihilating the whole space, which is exactly why
//!    the largest block must be peeled first;
//! 4. restrict the operator to the complement and repeat.
//!
//! Blocks therefore appear with descending polynomials and are reversed at
//! the end, so `invariant_factors` is ascending: each divides the next. The
//! returned data is self-checked (conjugation identity, divisibility,
//! degrees summing to the dimension) before being handed out.

use crate::gf2mat::{Mat, MatError};
use crate::gf2poly::Poly;

/// Result of [`frobenius_form`]: `transform^-1 * a * transform` equals the
/// block diagonal of `blocks`, where `blocks[i]` is the companion matrix of
/// `invariant_factors[i]` and each factor divides the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusForm {
    /// Monic polynomials `q_1 | q_2 | ... | q_k`; the last is the minimal
    /// polynomial, the product is the characteristic polynomial.
    pub invariant_factors: Vec<Poly>,
    /// Companion matrices of the factors, in the same order.
    pub blocks: Vec<Mat>,
    /// Invertible matrix whose columns are the concatenated Krylov chains.
    pub transform: Mat,
}

impl FrobeniusForm {
    /// The block diagonal the transform conjugates to.
    pub fn block_diagonal(&self) -> Mat {
        assemble_block_diagonal(&self.blocks).expect("blocks fit the dimension")
    }
}

/// Multiply a row vector by a matrix: the XOR of the rows selected by the
/// vector's bits, i.e. the functional `x -> v . (a x)` as a row vector.
fn row_mul(v: u64, a: &Mat) -> u64 {
    let mut acc = 0u64;
    let mut bits = v;
    while bits != 0 {
        acc ^= a.row(bits.trailing_zeros() as usize);
        bits &= bits - 1;
    }
    acc
}

/// Apply a polynomial in `a` to a column vector (Horner's scheme).
fn poly_apply(a: &Mat, p: &Poly, v: u64) -> u64 {
    let Some(d) = p.degree() else { return 0 };
    let mut acc = 0u64;
    for i in (0..=d).rev() {
        acc = a.mul_vec(acc);
        if p.coeff(i) {
            acc ^= v;
        }
    }
    acc
}

/// Reduce `w` against an echelon basis (keyed by leading bits) and insert
/// the reduction if it is nonzero; reports whether `w` was independent.
fn echelon_insert(ech: &mut Vec<u64>, w: u64) -> bool {
    let mut r = w;
    for &e in ech.iter() {
        let lead = 1u64 << (63 - e.leading_zeros());
        if r & lead != 0 {
            r ^= e;
        }
    }
    if r != 0 {
        ech.push(r);
        true
    } else {
        false
    }
}

/// Matrix with the given bit-packed columns.
fn mat_from_cols(cols: &[u64], n: usize) -> Mat {
    let mut rows = vec![0u64; n];
    for (j, &col) in cols.iter().enumerate() {
        let mut bits = col;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            rows[i] |= 1 << j;
            bits &= bits - 1;
        }
    }
    Mat::from_rows(rows, n).expect("columns fit the dimension")
}

/// Exponent of the irreducible `f` in `p`.
fn factor_exponent(p: &Poly, f: &Poly) -> u32 {
    let mut rest = p.clone();
    let mut e = 0;
    while f.divides(&rest) {
        rest = rest.divmod(f).expect("irreducible factors are nonzero").0;
        e += 1;
    }
    e
}

fn poly_power(f: &Poly, e: u32) -> Poly {
    let mut acc = Poly::one();
    for _ in 0..e {
        acc = acc.mul(f);
    }
    acc
}

/// A vector whose annihilator under `a` is the minimal polynomial of `a`.
///
/// For each irreducible factor of the minimal polynomial, the standard
/// basis vector with the largest exponent of that factor in its annihilator
/// (smallest index on ties) contributes a component with primary
/// annihilator; the components' annihilators are pairwise coprime, so their
/// sum is annihilated exactly by the product.
fn maximal_vector(a: &Mat) -> (u64, Poly) {
    let n = a.dim();
    let anns: Vec<Poly> = (0..n).map(|i| crate::gf2mat::vector_annihilator(a, 1 << i)).collect();
    let mut mu = Poly::one();
    for ann in &anns {
        mu = mu.lcm(ann).expect("annihilators are nonzero");
    }
    let mut v = 0u64;
    for (f, e) in irreducible_factors(&mu) {
        let i = (0..n)
            .find(|&i| factor_exponent(&anns[i], &f) == e)
            .expect("some basis vector attains the lcm exponent");
        let cofactor = anns[i].divmod(&poly_power(&f, e)).expect("exponent divides").0;
        v ^= poly_apply(a, &cofactor, 1 << i);
    }
    debug_assert_eq!(crate::gf2mat::vector_annihilator(a, v), mu);
    (v, mu)
}

fn irreducible_factors(p: &Poly) -> Vec<(Poly, u32)> {
    p.factor().expect("minimal polynomials are nonconstant").factors().to_vec()
}

/// Basis of the null space of the rows `rows[0..k]` (n-bit row vectors),
/// one bit-packed solution vector per free column.
fn null_space(rows: &[u64], n: usize) -> Vec<u64> {
    let mut ech: Vec<u64> = Vec::new();
    let mut pivot_col: Vec<usize> = Vec::new();
    for &r in rows {
        let mut w = r;
        for (i, &e) in ech.iter().enumerate() {
            if w >> pivot_col[i] & 1 == 1 {
                w ^= e;
            }
        }
        if w != 0 {
            let col = w.trailing_zeros() as usize;
            // Clear this column from earlier rows to reach reduced form.
            for e in ech.iter_mut() {
                if *e >> col & 1 == 1 {
                    *e ^= w;
                }
            }
            ech.push(w);
            pivot_col.push(col);
        }
    }
    let mut basis = Vec::new();
    for j in 0..n {
        if pivot_col.contains(&j) {
            continue;
        }
        let mut sol = 1u64 << j;
        for (i, &col) in pivot_col.iter().enumerate() {
            if ech[i] >> j & 1 == 1 {
                sol |= 1 << col;
            }
        }
        basis.push(sol);
    }
    basis
}

/// Reduced echelon store for solving `N x = w` where `N` has the given
/// bit-packed columns: each entry is a reduced column with the combination
/// of original columns that produced it.
struct ColumnSolver {
    pivots: Vec<(u64, u64)>,
}

impl ColumnSolver {
    fn new(cols: &[u64]) -> Self {
        let mut pivots: Vec<(u64, u64)> = Vec::new();
        for (j, &c) in cols.iter().enumerate() {
            let mut w = c;
            let mut combo = 1u64 << j;
            for &(p, pc) in &pivots {
                if w >> p.trailing_zeros() & 1 == 1 {
                    w ^= p;
                    combo ^= pc;
                }
            }
            assert!(w != 0, "solver columns must be independent");
            // Keep the store fully reduced so each pivot bit lives in
            // exactly one pivot and reduction order never matters.
            let bit = w.trailing_zeros();
            for (p, pc) in pivots.iter_mut() {
                if *p >> bit & 1 == 1 {
                    *p ^= w;
                    *pc ^= combo;
                }
            }
            pivots.push((w, combo));
        }
        ColumnSolver { pivots }
    }

    /// Coordinates of `w` in the column basis; panics if `w` is outside the
    /// span (the callers only solve for vectors of an invariant subspace).
    fn solve(&self, w: u64) -> u64 {
        let mut w = w;
        let mut combo = 0u64;
        for &(p, pc) in &self.pivots {
            if w >> p.trailing_zeros() & 1 == 1 {
                w ^= p;
                combo ^= pc;
            }
        }
        assert_eq!(w, 0, "vector outside the column span");
        combo
    }
}

/// Compute the Frobenius normal form of `a`; see the module docs.
pub fn frobenius_form(a: &Mat) -> FrobeniusForm {
    let n = a.dim();
    // Chains in original coordinates, with their polynomials, largest first.
    let mut peeled: Vec<(Poly, Vec<u64>)> = Vec::new();
    // Current operator and the lift of its coordinates into the original
    // space (one n-bit column per current coordinate).
    let mut cur = a.clone();
    let mut lift: Vec<u64> = (0..n as u32).map(|i| 1u64 << i).collect();
    loop {
        let m = cur.dim();
        let (v, mu) = maximal_vector(&cur);
        let d = mu.degree().expect("minimal polynomials are nonconstant");

        let mut chain = Vec::with_capacity(d);
        let mut t = v;
        for _ in 0..d {
            chain.push(t);
            t = cur.mul_vec(t);
        }
        let lifted: Vec<u64> = chain
            .iter()
            .map(|&c| {
                let mut acc = 0u64;
                let mut bits = c;
                while bits != 0 {
                    acc ^= lift[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        peeled.push((mu.clone(), lifted));

        if d == m {
            break;
        }

        // Extend the chain to a basis by greedy unit vectors, then read off
        // the functional dual to the last chain coordinate.
        let mut basis = chain.clone();
        let mut ech: Vec<u64> = Vec::new();
        for &c in &chain {
            assert!(echelon_insert(&mut ech, c), "chain vectors must be independent");
        }
        for j in 0..m {
            if basis.len() == m {
                break;
            }
            if echelon_insert(&mut ech, 1 << j) {
                basis.push(1 << j);
            }
        }
        assert_eq!(basis.len(), m, "chain extends to a basis");
        let p_full = mat_from_cols(&basis, m);
        let p_inv = p_full.inverse().expect("basis matrix is invertible");
        let phi = p_inv.row(d - 1);

        // Joint kernel of phi, phi A, ..., phi A^(d-1): the invariant
        // complement of the chain span.
        let mut functionals = Vec::with_capacity(d);
        let mut f = phi;
        for _ in 0..d {
            functionals.push(f);
            f = row_mul(f, &cur);
        }
        let complement = null_space(&functionals, m);
        assert_eq!(complement.len(), m - d, "complement has complementary dimension");

        // Restrict the operator: solve N x = A n_j for each basis column.
        let solver = ColumnSolver::new(&complement);
        let restricted_cols: Vec<u64> =
            complement.iter().map(|&c| solver.solve(cur.mul_vec(c))).collect();
        cur = mat_from_cols(&restricted_cols, m - d);
        lift = complement
            .iter()
            .map(|&c| {
                let mut acc = 0u64;
                let mut bits = c;
                while bits != 0 {
                    acc ^= lift[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
    }

    peeled.reverse(); // ascending divisibility order
    let invariant_factors: Vec<Poly> = peeled.iter().map(|(q, _)| q.clone()).collect();
    let blocks: Vec<Mat> = invariant_factors
        .iter()
        .map(|q| Mat::companion(q).expect("factors have degree 1..=64"))
        .collect();
    let cols: Vec<u64> = peeled.iter().flat_map(|(_, chain)| chain.iter().copied()).collect();
    let transform = mat_from_cols(&cols, n);

    // Self-check before handing the form out.
    let form = FrobeniusForm { invariant_factors, blocks, transform };
    assert!(form.transform.inverse().is_some(), "transform is invertible");
    let b = form.block_diagonal();
    assert_eq!(a.mul(&form.transform), form.transform.mul(&b), "conjugation identity");
    for w in form.invariant_factors.windows(2) {
        assert!(w[0].divides(&w[1]), "invariant factors form a divisibility chain");
    }
    let total: usize = form.invariant_factors.iter().map(|q| q.degree().unwrap()).sum();
    assert_eq!(total, n, "factor degrees sum to the dimension");
    for q in &form.invariant_factors {
        assert!(q.degree().unwrap_or(0) >= 1, "factors are nonconstant");
    }
    form
}

/// Block diagonal of the given square matrices; errors if the total
/// dimension leaves the supported range.
pub fn assemble_block_diagonal(blocks: &[Mat]) -> Result<Mat, MatError> {
    let n: usize = blocks.iter().map(Mat::dim).sum();
    if n < 1 || n > crate::gf2mat::MAX_DIM {
        return Err(MatError::BadDimension { n });
    }
    let mut rows = Vec::with_capacity(n);
    let mut offset = 0;
    for b in blocks {
        for i in 0..b.dim() {
            rows.push(b.row(i) << offset);
        }
        offset += b.dim();
    }
    Mat::from_rows(rows, n)
}

/// Cut a block-diagonal matrix back into blocks of the given sizes; errors
/// if the sizes do not sum to the dimension or any off-block entry is set.
pub fn split_block_diagonal(m: &Mat, sizes: &[usize]) -> Result<Vec<Mat>, MatError> {
    let n: usize = sizes.iter().sum();
    if n != m.dim() || sizes.iter().any(|&s| s == 0) {
        return Err(MatError::BadDimension { n });
    }
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &s in sizes {
        let mask = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
        let mut rows = Vec::with_capacity(s);
        for i in 0..s {
            let row = m.row(offset + i);
            if row & !(mask << offset) != 0 {
                return Err(MatError::Parse(format!(
                    "entries outside the {s}x{s} block at offset {offset}"
                )));
            }
            rows.push(row >> offset);
        }
        blocks.push(Mat::from_rows(rows, s)?);
        offset += s;
    }
    Ok(blocks)
}
