//! Bit-packed GF(2) vectors and matrices.
//!
//! Cycles, stabilizers, errors and logical operators are all [`EdgeVector`]s:
//! one bit per edge, addition is symmetric difference.

use std::fmt;

use crate::error::CssError;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeVector {
    len: usize,
    words: Vec<u64>,
}

impl EdgeVector {
    pub fn zeros(len: usize) -> Self {
        EdgeVector {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_support(len: usize, support: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in support {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place symmetric difference.
    pub fn xor_assign(&mut self, other: &EdgeVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &EdgeVector) -> EdgeVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the inner product `⟨self, other⟩` over GF(2).
    pub fn dot(&self, other: &EdgeVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Size of the intersection of the two supports.
    pub fn overlap(&self, other: &EdgeVector) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            })
        })
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }
}

impl fmt::Debug for EdgeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeVector[{}]{:?}", self.len, self.support())
    }
}

/// Row-major bit matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<EdgeVector>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<EdgeVector>) -> Result<Self, CssError> {
        for r in &rows {
            if r.len() != cols {
                return Err(CssError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            cols: n,
            rows: (0..n).map(|i| EdgeVector::from_support(n, [i])).collect(),
        }
    }

    pub fn push_row(&mut self, row: EdgeVector) -> Result<(), CssError> {
        if row.len() != self.cols {
            return Err(CssError::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[EdgeVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &EdgeVector {
        &self.rows[i]
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    /// `self · v` as a vector indexed by row.
    pub fn mul_vec(&self, v: &EdgeVector) -> Result<EdgeVector, CssError> {
        if v.len() != self.cols {
            return Err(CssError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = EdgeVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> Result<BitMatrix, CssError> {
        if self.cols != other.cols {
            return Err(CssError::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.mul_vec(r).expect("column counts checked"))
            .collect();
        Ok(BitMatrix {
            cols: other.rows.len(),
            rows,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(EdgeVector::is_zero)
    }

    pub fn rank(&self) -> usize {
        gf2_rank(&self.rows)
    }
}

/// Incrementally maintained reduced row-echelon basis.
///
/// Each stored row owns a pivot column that is zero in every other row.
#[derive(Clone, Debug)]
pub struct Gf2Basis {
    len: usize,
    rows: Vec<EdgeVector>,
    pivot_of_col: Vec<Option<usize>>,
}

impl Gf2Basis {
    pub fn new(len: usize) -> Self {
        Gf2Basis {
            len,
            rows: Vec::new(),
            pivot_of_col: vec![None; len],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &EdgeVector) -> EdgeVector {
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        r
    }

    fn reduce_in_place(&self, r: &mut EdgeVector) {
        // xoring a row clears its pivot and leaves every other pivot bit untouched
        for col in r.support() {
            if let Some(ri) = self.pivot_of_col[col] {
                r.xor_assign(&self.rows[ri]);
            }
        }
    }

    pub fn contains(&self, v: &EdgeVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns `false` when it was already in the span.
    pub fn insert(&mut self, v: &EdgeVector) -> bool {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        let r = self.reduce(v);
        let Some(pivot) = r.first_one() else {
            return false;
        };
        // keep existing rows free of the new pivot
        for row in self.rows.iter_mut() {
            if row.get(pivot) {
                row.xor_assign(&r);
            }
        }
        self.pivot_of_col[pivot] = Some(self.rows.len());
        self.rows.push(r);
        true
    }
}

pub fn gf2_rank(rows: &[EdgeVector]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let mut basis = Gf2Basis::new(first.len());
    rows.iter().filter(|r| basis.insert(r)).count()
}

/// Exact span membership of `v` in the row space of `basis`.
pub fn gf2_in_span(v: &EdgeVector, basis: &[EdgeVector]) -> Result<bool, CssError> {
    let mut b = Gf2Basis::new(v.len());
    for r in basis {
        if r.len() != v.len() {
            return Err(CssError::DimensionMismatch {
                expected: v.len(),
                found: r.len(),
            });
        }
        b.insert(r);
    }
    Ok(b.contains(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_of_identity() {
        for n in [1, 5, 64, 65, 130] {
            assert_eq!(BitMatrix::identity(n).rank(), n);
        }
    }

    #[test]
    fn span_of_sum() {
        let a = EdgeVector::from_support(10, [0, 1, 2]);
        let b = EdgeVector::from_support(10, [2, 3, 4]);
        let c = EdgeVector::from_support(10, [7, 8]);
        let basis = vec![a.clone(), b.clone(), c];
        assert!(gf2_in_span(&a.xor(&b), &basis).unwrap());
        assert!(!gf2_in_span(&EdgeVector::from_support(10, [9]), &basis).unwrap());
        assert!(gf2_in_span(&EdgeVector::zeros(10), &basis).unwrap());
    }

    #[test]
    fn dimension_mismatch_reported() {
        let err = gf2_in_span(&EdgeVector::zeros(4), &[EdgeVector::zeros(5)]).unwrap_err();
        assert_eq!(err, CssError::DimensionMismatch { expected: 4, found: 5 });
        let mut m = BitMatrix::new(3);
        assert!(m.push_row(EdgeVector::zeros(2)).is_err());
    }

    #[test]
    fn bit_ops() {
        let mut v = EdgeVector::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.flip(129);
        assert_eq!(v.support(), vec![0, 64, 129]);
        assert_eq!(v.weight(), 3);
        let w = EdgeVector::from_support(130, [64, 100]);
        assert!(v.dot(&w));
        assert_eq!(v.overlap(&w), 1);
        assert_eq!(v.xor(&w).support(), vec![0, 100, 129]);
        assert_eq!(v.first_one(), Some(0));
    }

    /// Dense elimination kept separate from [`Gf2Basis`] as an oracle.
    fn dense_rank(rows: &[Vec<bool>]) -> usize {
        let mut m: Vec<Vec<bool>> = rows.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..m.len()).find(|&r| m[r][c]) {
                m.swap(rank, p);
                for r in 0..m.len() {
                    if r != rank && m[r][c] {
                        let pivot = m[rank].clone();
                        for (x, y) in m[r].iter_mut().zip(pivot) {
                            *x ^= y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    proptest! {
        #[test]
        fn rank_matches_dense_elimination(rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 70), 0..20)) {
            let packed: Vec<EdgeVector> = rows
                .iter()
                .map(|r| EdgeVector::from_support(70, r.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)))
                .collect();
            prop_assert_eq!(gf2_rank(&packed), dense_rank(&rows));
        }

        #[test]
        fn every_row_is_in_span(rows in prop::collection::vec(prop::collection::vec(0usize..90, 0..12), 1..10)) {
            let packed: Vec<EdgeVector> = rows.iter().map(|r| EdgeVector::from_support(90, r.iter().copied())).collect();
            let mut sum = EdgeVector::zeros(90);
            for r in &packed {
                prop_assert!(gf2_in_span(r, &packed).unwrap());
                sum.xor_assign(r);
            }
            prop_assert!(gf2_in_span(&sum, &packed).unwrap());
        }
    }
}
