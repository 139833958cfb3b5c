//! Bit-packed linear algebra over GF(2).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Gf2Error;
use crate::group::Sign;

/// A bit vector packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &BitRow) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }
}

/// A linear system `A x = b` over GF(2).
///
/// After [`Gf2System::echelonize`] the matrix is in reduced row echelon form:
/// rows `0..rank` carry the pivots in increasing column order and every pivot
/// column has a single set bit among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2System {
    rows: Vec<BitRow>,
    rhs: Vec<bool>,
    ncols: usize,
    rank: usize,
    pivots: Vec<usize>,
    free_cols: Vec<usize>,
    reduced: bool,
}

impl Gf2System {
    pub fn new(ncols: usize) -> Self {
        Self {
            rows: Vec::new(),
            rhs: Vec::new(),
            ncols,
            rank: 0,
            pivots: Vec::new(),
            free_cols: Vec::new(),
            reduced: false,
        }
    }

    pub fn homogeneous(rows: Vec<BitRow>, ncols: usize) -> Result<Self, Gf2Error> {
        let mut system = Self::new(ncols);
        for row in rows {
            system.push(row, false)?;
        }
        Ok(system)
    }

    pub fn push(&mut self, row: BitRow, rhs: bool) -> Result<(), Gf2Error> {
        if row.len() != self.ncols {
            return Err(Gf2Error::RowLength {
                expected: self.ncols,
                got: row.len(),
            });
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        self.reduced = false;
        Ok(())
    }

    /// System whose columns are the given vectors: solutions `a` satisfy
    /// `sum_j a_j * columns[j] = 0`.
    pub fn from_columns(columns: &[Vec<bool>], nrows: usize) -> Result<Self, Gf2Error> {
        let mut rows = vec![BitRow::zeros(columns.len()); nrows];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != nrows {
                return Err(Gf2Error::RowLength {
                    expected: nrows,
                    got: col.len(),
                });
            }
            for (i, &bit) in col.iter().enumerate() {
                rows[i].set(j, bit);
            }
        }
        Self::homogeneous(rows, columns.len())
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn rhs(&self) -> &[bool] {
        &self.rhs
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn free_cols(&self) -> &[usize] {
        &self.free_cols
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.iter().all(|&b| !b)
    }

    /// Gauss-Jordan elimination in place. Pivots are taken at the leftmost
    /// remaining column, from the topmost eligible row.
    pub fn echelonize(&mut self) {
        let mut rank = 0;
        let mut pivots = Vec::new();
        for col in 0..self.ncols {
            let Some(found) = (rank..self.rows.len()).find(|&r| self.rows[r].get(col)) else {
                continue;
            };
            self.rows.swap(rank, found);
            self.rhs.swap(rank, found);
            let (head, tail) = self.rows.split_at_mut(rank);
            let (pivot_row, tail) = tail.split_first_mut().expect("pivot row exists");
            let pivot_rhs = self.rhs[rank];
            for (r, row) in head.iter_mut().enumerate() {
                if row.get(col) {
                    row.xor_assign(pivot_row);
                    self.rhs[r] ^= pivot_rhs;
                }
            }
            for (offset, row) in tail.iter_mut().enumerate() {
                if row.get(col) {
                    row.xor_assign(pivot_row);
                    self.rhs[rank + 1 + offset] ^= pivot_rhs;
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == self.rows.len() {
                break;
            }
        }
        self.free_cols = (0..self.ncols).filter(|c| !pivots.contains(c)).collect();
        self.pivots = pivots;
        self.rank = rank;
        self.reduced = true;
    }

    fn ensure_reduced(&mut self) {
        if !self.reduced {
            self.echelonize();
        }
    }

    pub fn is_consistent(&mut self) -> bool {
        self.ensure_reduced();
        self.rhs[self.rank..].iter().all(|&b| !b)
    }

    /// Completes an assignment of the free variables to a full solution.
    pub fn solution_from_free(&mut self, free_values: &[bool]) -> Result<BitRow, Gf2Error> {
        self.ensure_reduced();
        if !self.is_consistent() {
            return Err(Gf2Error::Inconsistent);
        }
        debug_assert_eq!(free_values.len(), self.free_cols.len());
        let mut x = BitRow::zeros(self.ncols);
        for (&col, &v) in self.free_cols.iter().zip(free_values) {
            x.set(col, v);
        }
        for (r, &p) in self.pivots.iter().enumerate() {
            // the pivot bit of x is still zero, so the dot product only sees free columns
            let value = self.rhs[r] ^ self.rows[r].dot(&x);
            x.set(p, value);
        }
        Ok(x)
    }

    /// Unique solution when the system has full column rank.
    pub fn unique_solution(&mut self) -> Result<Option<BitRow>, Gf2Error> {
        self.ensure_reduced();
        if !self.is_consistent() {
            return Err(Gf2Error::Inconsistent);
        }
        if !self.free_cols.is_empty() {
            return Ok(None);
        }
        self.solution_from_free(&[]).map(Some)
    }

    /// A uniformly random nonzero solution of a homogeneous system.
    ///
    /// Nonzero solutions are in bijection with nonzero assignments of the `k`
    /// free variables, so each one is returned with probability `1/(2^k - 1)`.
    pub fn sample_uniform_solution<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<BitRow, Gf2Error> {
        if !self.is_homogeneous() {
            return Err(Gf2Error::NotHomogeneous);
        }
        self.ensure_reduced();
        let k = self.free_cols.len();
        if k == 0 {
            return Err(Gf2Error::NoFreeVariable);
        }
        let free_values: Vec<bool> = if k < 64 {
            let pattern = rng.random_range(1..(1u64 << k));
            (0..k).map(|i| (pattern >> i) & 1 == 1).collect()
        } else {
            loop {
                let bits: Vec<bool> = (0..k).map(|_| rng.random()).collect();
                if bits.iter().any(|&b| b) {
                    break bits;
                }
            }
        };
        self.solution_from_free(&free_values)
    }

    /// Every nonzero solution of a homogeneous system. Only for small nullity.
    pub fn nonzero_solutions(&mut self) -> Result<Vec<BitRow>, Gf2Error> {
        if !self.is_homogeneous() {
            return Err(Gf2Error::NotHomogeneous);
        }
        self.ensure_reduced();
        let k = self.free_cols.len();
        assert!(k < 24, "nullity {k} too large to enumerate");
        (1u64..(1u64 << k))
            .map(|pattern| {
                let free: Vec<bool> = (0..k).map(|i| (pattern >> i) & 1 == 1).collect();
                self.solution_from_free(&free)
            })
            .collect()
    }

    /// Checks `A x = b` against the current rows.
    pub fn satisfies(&self, x: &BitRow) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(row, &b)| row.dot(x) == b)
    }
}

/// Coefficients in `{-1, 0, +1}` of a signed combination of `n + 1` labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoefficientVector {
    entries: Vec<i8>,
}

impl CoefficientVector {
    pub fn zeros(len: usize) -> Self {
        Self { entries: vec![0; len] }
    }

    pub fn from_support(support: &BitRow) -> Self {
        Self {
            entries: support.to_bools().into_iter().map(i8::from).collect(),
        }
    }

    pub fn set(&mut self, index: usize, sign: Option<Sign>) {
        self.entries[index] = match sign {
            None => 0,
            Some(Sign::Plus) => 1,
            Some(Sign::Minus) => -1,
        };
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn support(&self) -> BitRow {
        BitRow::from_bools(&self.entries.iter().map(|&e| e != 0).collect::<Vec<_>>())
    }
}
