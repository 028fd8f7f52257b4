//! Exact arithmetic and linear algebra over prime fields GF(p).
//!
//! Everything downstream (condition checkers, code verifiers, entropy
//! oracles) reduces to rank, determinant and null-space computations over a
//! prime field, so this module keeps them exact: residues are machine
//! integers, reduced after every product. Moduli are restricted to primes
//! below 2^31 so that a product of two residues never overflows 64 bits.
//!
//! Error convention: data-dependent failures (inverting zero, taking the
//! determinant of a non-square matrix, a non-prime modulus) are reported as
//! [`GfError`]. Dimension and field mismatches between operands are
//! programmer errors and panic.

use std::fmt;

use thiserror::Error;

/// Largest admissible modulus (exclusive): primes must fit in 31 bits.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of range (need 2 <= p < 2^31)")]
    ModulusOutOfRange(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is {rows}x{cols}, not square")]
    NonSquare { rows: usize, cols: usize },
}

/// A prime field GF(p), identified by its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldPrime {
    p: u64,
}

impl FieldPrime {
    /// Validates the modulus: `2 <= p < 2^31` and p prime (deterministic
    /// trial division; the bound keeps it instant).
    pub fn new(p: u64) -> Result<Self, GfError> {
        if !(2..MAX_MODULUS).contains(&p) {
            return Err(GfError::ModulusOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// The residue of `value` in this field.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            field: *self,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    fn reduce(&self, value: u64) -> u64 {
        value % self.p
    }

    fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mul_raw(&self, a: u64, b: u64) -> u64 {
        // a, b < 2^31, so the product fits in u64.
        (a * b) % self.p
    }

    fn inv_raw(&self, a: u64) -> Result<u64, GfError> {
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        // Extended Euclid on (p, a); p < 2^31 keeps everything in i64.
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime, gcd must be 1");
        Ok(t0.rem_euclid(self.p as i64) as u64)
    }
}

impl fmt::Display for FieldPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    if p.is_multiple_of(3) {
        return p == 3;
    }
    let mut d = 5;
    while d * d <= p {
        if p.is_multiple_of(d) || p.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// A residue in a prime field, carrying its field.
///
/// Arithmetic between elements of different fields panics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: FieldPrime,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> FieldPrime {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(&self) -> Result<FieldElement, GfError> {
        Ok(FieldElement {
            value: self.field.inv_raw(self.value)?,
            field: self.field,
        })
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, mut exp: u64) -> FieldElement {
        let mut base = self.value;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.field.mul_raw(acc, base);
            }
            base = self.field.mul_raw(base, base);
            exp >>= 1;
        }
        FieldElement {
            value: acc,
            field: self.field,
        }
    }

    fn assert_same_field(&self, other: &FieldElement) {
        assert_eq!(
            self.field, other.field,
            "field mismatch: {} vs {}",
            self.field, other.field
        );
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        FieldElement {
            value: self.field.add_raw(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        FieldElement {
            value: self.field.sub_raw(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        FieldElement {
            value: self.field.mul_raw(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            value: self.field.sub_raw(0, self.value),
            field: self.field,
        }
    }
}

/// A dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    field: FieldPrime,
    entries: Vec<u64>,
}

impl FieldMatrix {
    /// The zero matrix of the given shape. Zero rows or columns are allowed;
    /// they arise naturally from empty column selections.
    pub fn zeros(rows: usize, cols: usize, field: FieldPrime) -> Self {
        Self {
            rows,
            cols,
            field,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(size: usize, field: FieldPrime) -> Self {
        let mut m = Self::zeros(size, size, field);
        for i in 0..size {
            m.entries[i * size + i] = 1;
        }
        m
    }

    /// Builds a matrix from explicit rows, reducing entries mod p.
    ///
    /// Panics if the rows are empty or ragged; use [`FieldMatrix::zeros`]
    /// for degenerate shapes.
    pub fn from_rows(field: FieldPrime, rows: &[Vec<u64>]) -> Self {
        assert!(!rows.is_empty(), "from_rows needs at least one row");
        let cols = rows[0].len();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            entries.extend(row.iter().map(|&v| field.reduce(v)));
        }
        Self {
            rows: rows.len(),
            cols,
            field,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> FieldPrime {
        self.field
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.field.element(self.entries[row * self.cols + col])
    }

    pub fn set(&mut self, row: usize, col: usize, value: u64) {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.entries[row * self.cols + col] = self.field.reduce(value);
    }

    /// Raw residue access for hot loops.
    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut t = FieldMatrix::zeros(self.cols, self.rows, self.field);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        t
    }

    /// The submatrix keeping the given columns, in the given order.
    pub fn column_submatrix(&self, cols: &[usize]) -> FieldMatrix {
        let mut m = FieldMatrix::zeros(self.rows, cols.len(), self.field);
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                assert!(j < self.cols, "column index out of range");
                m.entries[i * cols.len() + jj] = self.entries[i * self.cols + j];
            }
        }
        m
    }

    /// Appends the rows of `other` below `self`.
    pub fn stacked(&self, other: &FieldMatrix) -> FieldMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        assert_eq!(self.field, other.field, "field mismatch");
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        FieldMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            field: self.field,
            entries,
        }
    }

    /// Row rank by Gaussian elimination with first-nonzero pivots.
    pub fn rank(&self) -> usize {
        let mut work = self.entries.clone();
        echelon(&mut work, self.rows, self.cols, self.field).0
    }

    /// Exact determinant; errors on non-square input.
    pub fn determinant(&self) -> Result<FieldElement, GfError> {
        if self.rows != self.cols {
            return Err(GfError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.field.one());
        }
        let mut work = self.entries.clone();
        let (rank, swaps) = echelon(&mut work, n, n, self.field);
        if rank < n {
            return Ok(self.field.zero());
        }
        let mut det = 1u64;
        for i in 0..n {
            det = self.field.mul_raw(det, work[i * n + i]);
        }
        if swaps % 2 == 1 {
            det = self.field.sub_raw(0, det);
        }
        Ok(self.field.element(det))
    }

    /// True iff `v` lies in the row space: stacking it must not raise the rank.
    pub fn row_space_contains(&self, v: &[FieldElement]) -> bool {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut work = self.entries.clone();
        work.extend(v.iter().map(|e| {
            assert_eq!(e.field(), self.field, "field mismatch");
            e.value()
        }));
        let stacked_rank = echelon(&mut work, self.rows + 1, self.cols, self.field).0;
        stacked_rank == self.rank()
    }

    /// A basis of the right null space; empty iff the matrix has full
    /// column rank.
    pub fn nullspace_basis(&self) -> Vec<Vec<FieldElement>> {
        let mut work = self.entries.clone();
        let pivots = reduced_echelon(&mut work, self.rows, self.cols, self.field);
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            // Free column: set it to 1, pivot variables to the negated
            // reduced-echelon entries, every other free variable to 0.
            let mut vec = vec![self.field.zero(); self.cols];
            vec[free] = self.field.one();
            for (row, &col) in pivots.iter().enumerate() {
                let coeff = work[row * self.cols + free];
                vec[col] = self.field.element(self.field.sub_raw(0, coeff));
            }
            basis.push(vec);
        }
        basis
    }

    /// Row vector times matrix: `x * self`, for `x` of length `rows`.
    pub fn left_multiply(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(x.len(), self.rows, "vector length mismatch");
        (0..self.cols)
            .map(|j| {
                let mut acc = 0u64;
                for (i, e) in x.iter().enumerate() {
                    assert_eq!(e.field(), self.field, "field mismatch");
                    acc = self
                        .field
                        .add_raw(acc, self.field.mul_raw(e.value(), self.entries[i * self.cols + j]));
                }
                self.field.element(acc)
            })
            .collect()
    }
}

/// In-place row echelon form. Returns (rank, number of row swaps).
fn echelon(entries: &mut [u64], rows: usize, cols: usize, field: FieldPrime) -> (usize, usize) {
    let mut pivot_row = 0;
    let mut swaps = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let Some(found) = (pivot_row..rows).find(|&r| entries[r * cols + col] != 0) else {
            continue;
        };
        if found != pivot_row {
            for j in 0..cols {
                entries.swap(found * cols + j, pivot_row * cols + j);
            }
            swaps += 1;
        }
        let pivot = entries[pivot_row * cols + col];
        let pivot_inv = field.inv_raw(pivot).expect("pivot is nonzero");
        for r in pivot_row + 1..rows {
            let lead = entries[r * cols + col];
            if lead == 0 {
                continue;
            }
            let factor = field.mul_raw(lead, pivot_inv);
            for j in col..cols {
                let sub = field.mul_raw(factor, entries[pivot_row * cols + j]);
                entries[r * cols + j] = field.sub_raw(entries[r * cols + j], sub);
            }
        }
        pivot_row += 1;
    }
    (pivot_row, swaps)
}

/// In-place reduced row echelon form. Returns the pivot column of each of the
/// first `rank` rows.
fn reduced_echelon(entries: &mut [u64], rows: usize, cols: usize, field: FieldPrime) -> Vec<usize> {
    let (rank, _) = echelon(entries, rows, cols, field);
    let mut pivots = Vec::with_capacity(rank);
    for row in 0..rank {
        let col = (0..cols)
            .find(|&c| entries[row * cols + c] != 0)
            .expect("echelon row below rank is nonzero");
        pivots.push(col);
        // Normalize the pivot to 1.
        let inv = field.inv_raw(entries[row * cols + col]).expect("nonzero");
        for j in col..cols {
            entries[row * cols + j] = field.mul_raw(entries[row * cols + j], inv);
        }
        // Eliminate above.
        for r in 0..row {
            let lead = entries[r * cols + col];
            if lead == 0 {
                continue;
            }
            for j in col..cols {
                let sub = field.mul_raw(lead, entries[row * cols + j]);
                entries[r * cols + j] = field.sub_raw(entries[r * cols + j], sub);
            }
        }
    }
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u64) -> FieldPrime {
        FieldPrime::new(p).unwrap()
    }

    #[test]
    fn modulus_validation() {
        assert!(FieldPrime::new(2).is_ok());
        assert!(FieldPrime::new(65537).is_ok());
        assert_eq!(FieldPrime::new(1), Err(GfError::ModulusOutOfRange(1)));
        assert_eq!(FieldPrime::new(0), Err(GfError::ModulusOutOfRange(0)));
        assert_eq!(FieldPrime::new(9), Err(GfError::NotPrime(9)));
        assert_eq!(FieldPrime::new(65536), Err(GfError::NotPrime(65536)));
        assert_eq!(
            FieldPrime::new(1 << 31),
            Err(GfError::ModulusOutOfRange(1 << 31))
        );
        // 2^31 - 1 is prime and the largest admissible modulus.
        assert!(FieldPrime::new((1 << 31) - 1).is_ok());
    }

    #[test]
    fn scalar_arithmetic() {
        let f5 = gf(5);
        assert_eq!((f5.element(3) + f5.element(4)).value(), 2);
        assert_eq!(f5.element(2).inv().unwrap().value(), 3);
        let f7 = gf(7);
        assert_eq!(f7.element(3).pow(6).value(), 1);
        assert_eq!((f5.element(1) - f5.element(3)).value(), 3);
        assert_eq!((-f5.element(2)).value(), 3);
        assert_eq!(f5.zero().inv(), Err(GfError::ZeroInverse));
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mixed_field_arithmetic_panics() {
        let _ = gf(5).element(1) + gf(7).element(1);
    }

    #[test]
    fn rank_examples() {
        let f5 = gf(5);
        assert_eq!(FieldMatrix::zeros(3, 3, f5).rank(), 0);
        assert_eq!(FieldMatrix::identity(4, f5).rank(), 4);
        let m = FieldMatrix::from_rows(f5, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn determinant_examples() {
        let f5 = gf(5);
        assert_eq!(
            FieldMatrix::identity(3, f5).determinant().unwrap().value(),
            1
        );
        let m = FieldMatrix::from_rows(f5, &[vec![1, 1], vec![1, 2]]);
        assert_eq!(m.determinant().unwrap().value(), 1);
        let repeated = FieldMatrix::from_rows(f5, &[vec![2, 3], vec![2, 3]]);
        assert_eq!(repeated.determinant().unwrap().value(), 0);
        let wide = FieldMatrix::zeros(2, 3, f5);
        assert_eq!(
            wide.determinant(),
            Err(GfError::NonSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn row_space_membership() {
        let f5 = gf(5);
        let id = FieldMatrix::identity(2, f5);
        assert!(id.row_space_contains(&[f5.element(1), f5.element(1)]));
        let m = FieldMatrix::from_rows(f5, &[vec![1, 1]]);
        assert!(!m.row_space_contains(&[f5.element(1), f5.element(0)]));
        let zero = FieldMatrix::zeros(2, 2, f5);
        assert!(zero.row_space_contains(&[f5.zero(), f5.zero()]));
    }

    #[test]
    fn nullspace_examples() {
        let f3 = gf(3);
        assert!(FieldMatrix::identity(3, f3).nullspace_basis().is_empty());

        let m = FieldMatrix::from_rows(f3, &[vec![1, 1]]);
        let basis = m.nullspace_basis();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert!(v.iter().any(|e| !e.is_zero()));
        // m * v^T = 0
        let dot = v[0].value() + v[1].value();
        assert_eq!(dot % 3, 0);

        let f5 = gf(5);
        let rank2 = FieldMatrix::from_rows(f5, &[vec![1, 0, 1], vec![0, 1, 2]]);
        assert_eq!(rank2.nullspace_basis().len(), 1);
    }

    #[test]
    fn left_multiply_matches_manual_product() {
        let f5 = gf(5);
        let g = FieldMatrix::from_rows(f5, &[vec![1, 1, 1], vec![1, 2, 3]]);
        let y = g.left_multiply(&[f5.element(1), f5.element(1)]);
        let values: Vec<u64> = y.iter().map(|e| e.value()).collect();
        assert_eq!(values, vec![2, 3, 4]);
    }

    #[test]
    fn column_submatrix_and_stack() {
        let f5 = gf(5);
        let g = FieldMatrix::from_rows(f5, &[vec![1, 2, 3], vec![4, 0, 1]]);
        let sub = g.column_submatrix(&[2, 0]);
        assert_eq!(sub.row(0), &[3, 1]);
        assert_eq!(sub.row(1), &[1, 4]);
        let st = g.stacked(&FieldMatrix::identity(3, f5));
        assert_eq!(st.rows(), 5);
        assert_eq!(st.rank(), 3);
    }

    fn arb_matrix(p: u64, max_dim: usize) -> impl Strategy<Value = FieldMatrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..p, r * c).prop_map(move |entries| FieldMatrix {
                rows: r,
                cols: c,
                field: FieldPrime::new(p).unwrap(),
                entries,
            })
        })
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(raw in any::<u64>(), p in prop::sample::select(vec![5u64, 13, 65537])) {
            let f = gf(p);
            let a = f.element(1 + raw % (p - 1)); // nonzero residue
            prop_assert_eq!((a * a.inv().unwrap()).value(), 1);
        }

        #[test]
        fn rank_equals_transpose_rank(m in arb_matrix(5, 6)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn determinant_nonzero_iff_full_rank(
            p in prop::sample::select(vec![5u64, 13]),
            dim in 1usize..=6,
            seed_entries in proptest::collection::vec(0u64..65536, 36),
        ) {
            let f = gf(p);
            let entries: Vec<u64> = seed_entries[..dim * dim].iter().map(|&v| v % p).collect();
            let m = FieldMatrix { rows: dim, cols: dim, field: f, entries };
            let det = m.determinant().unwrap();
            prop_assert_eq!(!det.is_zero(), m.rank() == dim);
        }

        #[test]
        fn rank_nullity(m in arb_matrix(13, 6)) {
            prop_assert_eq!(m.cols(), m.rank() + m.nullspace_basis().len());
        }
    }
}
