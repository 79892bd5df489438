//! Arithmetic in binary extension fields F_{2^m} and small matrices over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, BlockView};

/// AES reduction polynomial x^8 + x^4 + x^3 + x + 1.
pub const AES_MODULUS: u32 = 0x11B;

/// Largest degree accepted by [`GfField`].
pub const MAX_DEGREE: u32 = 16;

/// Largest order for which [`is_mds`] enumerates minors.
pub const MAX_MDS_ORDER: usize = 8;

/// F_{2^m} in polynomial basis; elements are `m`-bit integers, bit `k` the
/// coefficient of `x^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GfField {
    m: u32,
    modulus: u32,
}

fn poly_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

fn is_irreducible(p: u32, m: u32) -> bool {
    if poly_degree(p) != Some(m) {
        return false;
    }
    // Any factorization has a factor of degree <= m/2.
    (2u32..(1 << (m / 2 + 1))).all(|d| poly_rem(p, d) != 0)
}

impl GfField {
    pub fn new(m: u32, modulus: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "extension degree must be in 1..={MAX_DEGREE}, got {m}"
            )));
        }
        if !is_irreducible(modulus, m) {
            return Err(Error::NotIrreducible { m, modulus });
        }
        Ok(Self { m, modulus })
    }

    /// The AES polynomial for `m = 8`, otherwise the numerically smallest
    /// irreducible polynomial of degree `m` with nonzero constant term.
    pub fn default_for(m: u32) -> Result<Self> {
        if m == 8 {
            return Self::new(8, AES_MODULUS);
        }
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "extension degree must be in 1..={MAX_DEGREE}, got {m}"
            )));
        }
        let modulus = ((1u32 << m)..(1u32 << (m + 1)))
            .find(|&p| p & 1 == 1 && is_irreducible(p, m))
            .expect("irreducible polynomials exist in every degree");
        Ok(Self { m, modulus })
    }

    pub fn aes() -> Self {
        Self {
            m: 8,
            modulus: AES_MODULUS,
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u32 {
        1 << self.m
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.order()
    }

    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let top = 1 << self.m;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, mut a: u32, mut e: u32) -> u32 {
        let mut acc = 1;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }

    /// Binary matrix of `x -> x * c` under the right action.
    pub fn mul_matrix(&self, c: u32) -> BitMatrix {
        let m = self.m as usize;
        let rows = (0..m)
            .map(|k| BitVector::from_u64(u64::from(self.mul(1 << k, c)), m))
            .collect();
        BitMatrix::from_rows(rows).expect("rows have equal length")
    }
}

/// Product of two field elements.
pub fn gf_mul(field: &GfField, a: u32, b: u32) -> u32 {
    field.mul(a, b)
}

/// A dense matrix over a binary extension field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GfMatrix {
    field: GfField,
    n_rows: usize,
    n_cols: usize,
    entries: Vec<u32>,
}

impl GfMatrix {
    pub fn new(field: GfField, n_rows: usize, n_cols: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                found: entries.len(),
            });
        }
        if let Some(&e) = entries.iter().find(|&&e| !field.contains(e)) {
            return Err(Error::InvalidParameter(format!(
                "entry {e:#x} is not reduced modulo {:#x}",
                field.modulus()
            )));
        }
        Ok(Self {
            field,
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn from_rows(field: GfField, rows: &[Vec<u32>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                found: bad.len(),
            });
        }
        Self::new(field, rows.len(), n_cols, rows.concat())
    }

    pub fn zeros(field: GfField, n_rows: usize, n_cols: usize) -> Self {
        Self {
            field,
            n_rows,
            n_cols,
            entries: vec![0; n_rows * n_cols],
        }
    }

    pub fn identity(field: GfField, n: usize) -> Self {
        let mut out = Self::zeros(field, n, n);
        for i in 0..n {
            out.set(i, i, 1);
        }
        out
    }

    pub fn field(&self) -> &GfField {
        &self.field
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u32) {
        debug_assert!(self.field.contains(value));
        self.entries[i * self.n_cols + j] = value;
    }

    pub fn transpose(&self) -> GfMatrix {
        let mut t = GfMatrix::zeros(self.field, self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &GfMatrix) -> Result<GfMatrix> {
        if self.field != other.field {
            return Err(Error::InvalidParameter(
                "matrices are over different fields".into(),
            ));
        }
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: other.n_rows,
            });
        }
        let f = &self.field;
        let mut out = GfMatrix::zeros(self.field, self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for j in 0..other.n_cols {
                let v = (0..self.n_cols)
                    .fold(0, |acc, k| acc ^ f.mul(self.get(i, k), other.get(k, j)));
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Determinant of the square submatrix on the given rows and columns.
    fn minor(&self, rows: &[usize], cols: &[usize]) -> u32 {
        let k = rows.len();
        let f = &self.field;
        let mut a: Vec<Vec<u32>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        let mut det = 1;
        for c in 0..k {
            let Some(p) = (c..k).find(|&r| a[r][c] != 0) else {
                return 0;
            };
            a.swap(c, p);
            det = f.mul(det, a[c][c]);
            let inv = f.inv(a[c][c]).expect("pivot is nonzero");
            for r in c + 1..k {
                if a[r][c] != 0 {
                    let factor = f.mul(a[r][c], inv);
                    for cc in c..k {
                        let sub = f.mul(factor, a[c][cc]);
                        a[r][cc] ^= sub;
                    }
                }
            }
        }
        det
    }
}

/// Subsets of `0..n` of size `k`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// True iff every square minor of `m` is nonzero.
pub fn is_mds(m: &GfMatrix) -> Result<bool> {
    if m.n_rows() != m.n_cols() {
        return Err(Error::NotSquare {
            rows: m.n_rows(),
            cols: m.n_cols(),
        });
    }
    let n = m.n_rows();
    if n > MAX_MDS_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            max: MAX_MDS_ORDER,
        });
    }
    for k in 1..=n {
        let subsets = combinations(n, k);
        for rows in &subsets {
            for cols in &subsets {
                if m.minor(rows, cols) == 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Number of square minors of an `n x n` matrix.
pub fn minor_count(n: usize) -> usize {
    (1..=n).map(|k| combinations(n, k).len().pow(2)).sum()
}

/// Replaces every entry `c` of a square field matrix by the `m x m` binary
/// matrix of multiplication by `c`, so the binary right action agrees with
/// the field right action.
pub fn lift_gf_matrix(m: &GfMatrix) -> Result<BlockView> {
    if m.n_rows() != m.n_cols() {
        return Err(Error::NotSquare {
            rows: m.n_rows(),
            cols: m.n_cols(),
        });
    }
    let delta = m.n_rows();
    let bits = m.field().m() as usize;
    let n = delta * bits;
    let mut out = BitMatrix::zeros(n, n);
    for i in 0..delta {
        for j in 0..delta {
            let block = m.field().mul_matrix(m.get(i, j));
            for r in 0..bits {
                for c in block.row(r).iter_ones() {
                    out.set(i * bits + r, j * bits + c, true);
                }
            }
        }
    }
    BlockView::new(out, bits, delta)
}
