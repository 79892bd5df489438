//! Dense linear algebra over GF(2).
//!
//! Vectors are row vectors and matrices act on the right: `v * M`, so row
//! `i` of a matrix is the image of the unit vector `e_i`. Bit 0 is the
//! least significant bit of the integer a vector encodes.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length bit vector packed into machine words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector from `len` low bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == WORD {
                value
            } else {
                value & ((1u64 << len) - 1)
            };
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Integer value of the vector, if it fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.as_slice() {
            [] => Some(0),
            [w] => Some(*w),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    fn lowest_one(&self) -> Option<usize> {
        self.iter_ones().next()
    }

    /// Bits `start..start + len` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len);
        let mut out = BitVector::zeros(len);
        for i in self.iter_ones().filter(|&i| i >= start && i < start + len) {
            out.set(i - start, true);
        }
        out
    }

    /// Bits `start..start + len` as an integer (`len <= 64`).
    pub fn field(&self, start: usize, len: usize) -> u64 {
        assert!(len <= WORD && start + len <= self.len);
        let mut out = 0u64;
        for k in 0..len {
            if self.get(start + k) {
                out |= 1 << k;
            }
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, ")")
    }
}

/// A dense matrix over GF(2), stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: vec![BitVector::zeros(n_cols); n_rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, BitVector::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                found: bad.len(),
            });
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            rows,
        })
    }

    /// Permutation matrix whose row `i` is `e_{perm[i]}` (0-based).
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        let mut m = Self::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "not a permutation of 0..{n}: entry {i} -> {p}"
                )));
            }
            m.set(i, p, true);
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.rows[i].set(j, bit);
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.n_cols, self.n_rows);
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// `v * self`.
    pub fn apply(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.n_cols);
        for i in v.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        Ok(out)
    }

    /// `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: other.n_rows,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.apply(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            rows,
        })
    }

    /// Row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut basis: Vec<(usize, BitVector)> = Vec::new();
        for row in &self.rows {
            if let Some(r) = reduce_against(&basis, row.clone()) {
                let p = r.lowest_one().expect("reduced row is nonzero");
                basis.push((p, r));
            }
        }
        basis.len()
    }

    /// Basis of the left kernel `{v : v * self = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        // Each row carries the combination of original rows that produced it.
        let mut pivots: Vec<(usize, BitVector, BitVector)> = Vec::new();
        let mut kernel = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let mut r = row.clone();
            let mut combo = BitVector::unit(self.n_rows, i);
            for (p, prow, pcombo) in &pivots {
                if r.get(*p) {
                    r.xor_assign(prow);
                    combo.xor_assign(pcombo);
                }
            }
            match r.lowest_one() {
                None => kernel.push(combo),
                Some(p) => pivots.push((p, r, combo)),
            }
        }
        kernel
    }

    pub fn is_invertible(&self) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.n_rows,
                cols: self.n_cols,
            });
        }
        Ok(self.rank() == self.n_rows)
    }

    /// Rows packed as integers, for matrices with at most 64 columns.
    pub fn packed_rows(&self) -> Option<Vec<u64>> {
        self.rows.iter().map(BitVector::to_u64).collect()
    }

    /// Columns `start..start + len` of every row, as integers (`len <= 64`).
    pub fn column_field(&self, start: usize, len: usize) -> Vec<u64> {
        self.rows.iter().map(|r| r.field(start, len)).collect()
    }

    /// Rectangular window of the matrix.
    pub fn window(&self, row0: usize, n_rows: usize, col0: usize, n_cols: usize) -> BitMatrix {
        let rows = self.rows[row0..row0 + n_rows]
            .iter()
            .map(|r| r.slice(col0, n_cols))
            .collect();
        BitMatrix {
            n_rows,
            n_cols,
            rows,
        }
    }
}

/// Reduces `v` against an echelon basis whose entries carry their pivot bit.
fn reduce_against(basis: &[(usize, BitVector)], mut v: BitVector) -> Option<BitVector> {
    for (p, b) in basis {
        if v.get(*p) {
            v.xor_assign(b);
        }
    }
    (!v.is_zero()).then_some(v)
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.n_rows, self.n_cols)?;
        for row in &self.rows {
            write!(f, "  ")?;
            for j in 0..self.n_cols {
                write!(f, "{}", u8::from(row.get(j)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Row-packed copy of a matrix with at most 64 rows and columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedMatrix {
    rows: Vec<u64>,
}

impl PackedMatrix {
    pub fn new(m: &BitMatrix) -> Result<Self> {
        if m.n_rows() > WORD || m.n_cols() > WORD {
            return Err(Error::GuardExceeded {
                what: "packed matrix dimension",
                limit: WORD,
                got: m.n_rows().max(m.n_cols()),
            });
        }
        Ok(Self {
            rows: m.packed_rows().expect("columns fit in one word"),
        })
    }

    /// `v * self` with `v` given as an integer.
    #[inline]
    pub fn apply(&self, mut v: u64) -> u64 {
        let mut out = 0;
        while v != 0 {
            let i = v.trailing_zeros() as usize;
            out ^= self.rows[i];
            v &= v - 1;
        }
        out
    }
}

/// `v * m` over GF(2).
pub fn mat_vec_mul(v: &BitVector, m: &BitMatrix) -> Result<BitVector> {
    m.apply(v)
}

/// A square bit matrix partitioned into `delta x delta` blocks of size `m`.
///
/// Under the right action, block row `i` collects the images of input brick
/// `i` and block column `j` the coordinates of output brick `j`. Brick `j`
/// (1-based) covers bit indices `(j-1)m .. jm-1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BlockView {
    matrix: BitMatrix,
    m: usize,
    delta: usize,
}

impl BlockView {
    pub fn new(matrix: BitMatrix, m: usize, delta: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.n_rows(),
                cols: matrix.n_cols(),
            });
        }
        if m == 0 || delta == 0 || m * delta != matrix.n_rows() {
            return Err(Error::InvalidShape(format!(
                "n = {} is not m * delta = {m} * {delta}",
                matrix.n_rows()
            )));
        }
        Ok(Self { matrix, m, delta })
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> BitMatrix {
        self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// The submatrix spanning blocks `(i1, j1)` to `(i2, j2)`, 1-based and inclusive.
    pub fn submatrix(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> Result<BitMatrix> {
        let d = self.delta;
        if !(1 <= i1 && i1 <= i2 && i2 <= d && 1 <= j1 && j1 <= j2 && j2 <= d) {
            return Err(Error::BlockIndex {
                i1,
                j1,
                i2,
                j2,
                delta: d,
            });
        }
        let m = self.m;
        Ok(self
            .matrix
            .window((i1 - 1) * m, (i2 - i1 + 1) * m, (j1 - 1) * m, (j2 - j1 + 1) * m))
    }

    /// Block `(i, j)`, 1-based.
    pub fn block(&self, i: usize, j: usize) -> Result<BitMatrix> {
        self.submatrix(i, j, i, j)
    }

    /// Rows of block `(i, j)` packed as `m`-bit integers (`m <= 64`).
    pub(crate) fn block_rows(&self, i: usize, j: usize) -> Vec<u64> {
        let m = self.m;
        self.matrix.rows()[(i - 1) * m..i * m]
            .iter()
            .map(|r| r.field((j - 1) * m, m))
            .collect()
    }

    /// Whether the blocks `(i1, j1)..(i2, j2)` are all zero; empty ranges count as zero.
    pub(crate) fn range_is_zero(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> bool {
        if i1 > i2 || j1 > j2 {
            return true;
        }
        let m = self.m;
        self.matrix.rows()[(i1 - 1) * m..i2 * m].iter().all(|r| {
            r.iter_ones()
                .all(|c| c < (j1 - 1) * m || c >= j2 * m)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitVector {
        BitVector::from_bits(&s.bytes().map(|b| b == b'1').collect::<Vec<_>>())
    }

    fn mat(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_rows(rows.iter().map(|r| bits(r)).collect()).unwrap()
    }

    #[test]
    fn identity_action_is_trivial() {
        let v = bits("1011001");
        assert_eq!(mat_vec_mul(&v, &BitMatrix::identity(7)).unwrap(), v);
    }

    #[test]
    fn rotation_by_one_moves_unit_vector() {
        // row i = e_{(i+1) mod 4}
        let rot = BitMatrix::from_permutation(&[1, 2, 3, 0]).unwrap();
        assert_eq!(mat_vec_mul(&bits("1000"), &rot).unwrap(), bits("0100"));
    }

    #[test]
    fn two_by_two_product() {
        let m = mat(&["11", "01"]);
        assert_eq!(mat_vec_mul(&bits("11"), &m).unwrap(), bits("10"));
    }

    #[test]
    fn mat_vec_dimension_mismatch() {
        let err = mat_vec_mul(&bits("101"), &BitMatrix::identity(4)).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 4,
                found: 3
            }
        );
    }

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(BitMatrix::identity(9).rank(), 9);
        assert_eq!(BitMatrix::zeros(5, 7).rank(), 0);
        assert_eq!(mat(&["110", "011", "101"]).rank(), 2);
    }

    #[test]
    fn kernel_examples() {
        assert!(BitMatrix::identity(6).kernel_basis().is_empty());
        assert_eq!(BitMatrix::zeros(3, 3).kernel_basis().len(), 3);
        assert_eq!(mat(&["11", "11"]).kernel_basis(), vec![bits("11")]);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = mat(&["1100", "0110", "1010", "0001", "1011"]);
        let ker = m.kernel_basis();
        assert_eq!(m.rank() + ker.len(), 5);
        for k in &ker {
            assert!(m.apply(k).unwrap().is_zero());
        }
    }

    #[test]
    fn invertibility() {
        assert!(BitMatrix::identity(4).is_invertible().unwrap());
        assert!(!BitMatrix::zeros(4, 4).is_invertible().unwrap());
        assert!(matches!(
            BitMatrix::zeros(2, 3).is_invertible(),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn submatrix_ranges() {
        let m = BitMatrix::from_permutation(&[2, 3, 0, 1, 5, 4]).unwrap();
        let view = BlockView::new(m.clone(), 2, 3).unwrap();
        assert_eq!(view.submatrix(1, 1, 3, 3).unwrap(), m);
        assert_eq!(view.block(1, 2).unwrap(), BitMatrix::identity(2));
        assert!(view.block(1, 1).unwrap().is_zero());
        assert_eq!(view.submatrix(2, 1, 3, 2).unwrap().n_rows(), 4);
        assert!(matches!(
            view.submatrix(2, 1, 4, 1),
            Err(Error::BlockIndex { .. })
        ));
        assert!(matches!(
            view.submatrix(2, 2, 1, 2),
            Err(Error::BlockIndex { .. })
        ));
        assert!(view.range_is_zero(3, 1, 3, 2));
        assert!(!view.range_is_zero(1, 1, 1, 2));
        assert_eq!(view.block_rows(1, 2), vec![0b01, 0b10]);
    }

    #[test]
    fn block_view_rejects_bad_shape() {
        assert!(matches!(
            BlockView::new(BitMatrix::identity(6), 4, 2),
            Err(Error::InvalidShape(_))
        ));
    }

    #[test]
    fn transpose_of_permutation_is_inverse() {
        let p = BitMatrix::from_permutation(&[3, 0, 4, 1, 2]).unwrap();
        assert_eq!(p.mul(&p.transpose()).unwrap(), BitMatrix::identity(5));
    }

    #[test]
    fn wide_vectors_cross_word_boundary() {
        let n = 130;
        let perm: Vec<usize> = (0..n).map(|i| (i + 67) % n).collect();
        let p = BitMatrix::from_permutation(&perm).unwrap();
        let v = BitVector::unit(n, 100);
        assert_eq!(p.apply(&v).unwrap(), BitVector::unit(n, 37));
        assert!(p.is_invertible().unwrap());
    }
}
