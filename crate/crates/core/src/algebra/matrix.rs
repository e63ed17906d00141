//! Row-major sparse matrices over [`ExpSum`].

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::expsum::{ExpSum, ExponentMap, MAX_ARITY};
use super::scalar::Scalar;
use crate::error::{Error, Result};

type Row = BTreeMap<usize, ExpSum>;

/// A `rows × cols` sparse matrix whose entries are exponential sums of a
/// common arity. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    arity: usize,
    data: Vec<Row>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize, arity: usize) -> Self {
        assert!(arity <= MAX_ARITY, "arity {arity} exceeds {MAX_ARITY}");
        SparseMatrix {
            rows,
            cols,
            arity,
            data: vec![Row::new(); rows],
        }
    }

    pub fn identity(n: usize, arity: usize) -> Self {
        let mut m = Self::zeros(n, n, arity);
        for i in 0..n {
            m.data[i].insert(i, ExpSum::one(arity));
        }
        m
    }

    /// The constant matrix with a single `1` at `(row, col)`, 0-based.
    pub fn unit(n: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(n, n, 0);
        m.data[row].insert(col, ExpSum::one(0));
        m
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        arity: usize,
        entries: impl IntoIterator<Item = (usize, usize, ExpSum)>,
    ) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        let mut m = Self::zeros(rows, cols, arity);
        for (i, j, v) in entries {
            m.add_at(i, j, &v)?;
        }
        Ok(m)
    }

    /// Builds an arity-0 matrix from scalar entries.
    pub fn from_scalars(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Result<Self> {
        Self::from_entries(
            rows,
            cols,
            0,
            entries
                .into_iter()
                .map(|(i, j, c)| (i, j, ExpSum::constant(0, c))),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BTreeMap::is_empty)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&ExpSum> {
        self.data.get(i).and_then(|r| r.get(&j))
    }

    /// The entry at `(i, j)`, zero if absent.
    pub fn entry(&self, i: usize, j: usize) -> ExpSum {
        self.get(i, j)
            .cloned()
            .unwrap_or_else(|| ExpSum::zero(self.arity))
    }

    /// Entries in `(row, col)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &ExpSum)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, v)| (i, j, v)))
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &ExpSum)> + '_ {
        self.data[i].iter().map(|(&j, v)| (j, v))
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "({i}, {j}) in a {}×{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    fn check_entry_arity(&self, v: &ExpSum) -> Result<()> {
        if v.arity() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: v.arity(),
            });
        }
        Ok(())
    }

    /// Overwrites the entry at `(i, j)`; a zero value removes it.
    pub fn set(&mut self, i: usize, j: usize, v: ExpSum) -> Result<()> {
        self.check_index(i, j)?;
        self.check_entry_arity(&v)?;
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
        Ok(())
    }

    /// Adds `v` to the entry at `(i, j)`.
    pub fn add_at(&mut self, i: usize, j: usize, v: &ExpSum) -> Result<()> {
        self.check_index(i, j)?;
        self.check_entry_arity(v)?;
        accumulate(&mut self.data[i], j, v);
        Ok(())
    }

    fn check_same_shape(&self, other: &SparseMatrix) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, j, v) in other.entries() {
            accumulate(&mut out.data[i], j, v);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.try_add(&-other)
    }

    /// Exact product, computed in parallel over the rows of `self`.
    pub fn try_mul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data: Vec<Row> = self
            .data
            .par_iter()
            .map(|row| {
                let mut acc = Row::new();
                for (&k, a) in row {
                    for (&j, b) in &other.data[k] {
                        accumulate(&mut acc, j, &(a * b));
                    }
                }
                acc
            })
            .collect();
        Ok(SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            arity: self.arity,
            data,
        })
    }

    /// Kronecker product: `(A⊗B)[i·B.rows + k, j·B.cols + l] = A[i,j]·B[k,l]`.
    pub fn kron(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        let rows = checked_dim(self.rows, other.rows)?;
        let cols = checked_dim(self.cols, other.cols)?;
        let mut out = SparseMatrix::zeros(rows, cols, self.arity);
        for (i, j, a) in self.entries() {
            for (k, l, b) in other.entries() {
                let v = a * b;
                if !v.is_zero() {
                    out.data[i * other.rows + k].insert(j * other.cols + l, v);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> SparseMatrix {
        self.map_entries(|v| v.scale(c))
    }

    /// Multiplies every entry by the exponential sum `f`.
    pub fn scale_by(&self, f: &ExpSum) -> Result<SparseMatrix> {
        if f.arity() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: f.arity(),
            });
        }
        Ok(self.map_entries(|v| v * f))
    }

    /// Applies the exponent substitution to every entry.
    pub fn lift(&self, map: &ExponentMap) -> Result<SparseMatrix> {
        if map.source_arity() != self.arity {
            return Err(Error::DimensionMismatch(format!(
                "exponent map expects arity {}, matrix has arity {}",
                map.source_arity(),
                self.arity
            )));
        }
        let mut out = SparseMatrix::zeros(self.rows, self.cols, map.target_arity());
        for (i, j, v) in self.entries() {
            let w = v.lift(map)?;
            if !w.is_zero() {
                out.data[i].insert(j, w);
            }
        }
        Ok(out)
    }

    /// Constant matrix embedded at the given arity.
    pub fn with_arity(&self, arity: usize) -> Result<SparseMatrix> {
        if self.arity == arity {
            return Ok(self.clone());
        }
        self.lift(&ExponentMap::constant(arity)?)
    }

    /// Exact value with every variable set to zero (arity 0 result).
    pub fn at_origin(&self) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.rows, self.cols, 0);
        for (i, j, v) in self.entries() {
            let c = v.at_origin();
            if !c.is_zero() {
                out.data[i].insert(j, ExpSum::constant(0, c));
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.cols, self.rows, self.arity);
        for (i, j, v) in self.entries() {
            out.data[j].insert(i, v.clone());
        }
        out
    }

    pub fn trace(&self) -> ExpSum {
        (0..self.rows.min(self.cols))
            .filter_map(|i| self.get(i, i))
            .fold(ExpSum::zero(self.arity), |acc, v| &acc + v)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    /// The diagonal entries in storage order, zeros included.
    pub fn diagonal(&self) -> Vec<ExpSum> {
        (0..self.rows.min(self.cols))
            .map(|i| self.entry(i, i))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.nnz() == self.rows
            && self.entries().all(|(i, j, v)| i == j && v.is_one())
    }

    /// The submatrix of rows `r0..r0+h` and columns `c0..c0+w`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Result<SparseMatrix> {
        if r0 + h > self.rows || c0 + w > self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "block {h}×{w} at ({r0}, {c0}) in a {}×{} matrix",
                self.rows, self.cols
            )));
        }
        let mut out = SparseMatrix::zeros(h, w, self.arity);
        for i in 0..h {
            for (&j, v) in self.data[r0 + i].range(c0..c0 + w) {
                out.data[i].insert(j - c0, v.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<SparseMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "power of a non-square matrix".into(),
            ));
        }
        let mut acc = SparseMatrix::identity(self.rows, self.arity);
        for _ in 0..n {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    pub fn map_entries(&self, f: impl Fn(&ExpSum) -> ExpSum) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.rows, self.cols, self.arity);
        for (i, j, v) in self.entries() {
            let w = f(v);
            if !w.is_zero() {
                out.data[i].insert(j, w);
            }
        }
        out
    }

    /// Dense `f64` values at `point`, row-major.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (i, j, v) in self.entries() {
            out[i * self.cols + j] = v.eval(point)?;
        }
        Ok(out)
    }
}

fn accumulate(row: &mut Row, j: usize, v: &ExpSum) {
    if v.is_zero() {
        return;
    }
    match row.get_mut(&j) {
        Some(cur) => {
            let sum = &*cur + v;
            if sum.is_zero() {
                row.remove(&j);
            } else {
                *cur = sum;
            }
        }
        None => {
            row.insert(j, v.clone());
        }
    }
}

fn checked_dim(a: usize, b: usize) -> Result<usize> {
    a.checked_mul(b)
        .ok_or_else(|| Error::DimensionMismatch(format!("{a}·{b} overflows")))
}

impl<'a> Add<&'a SparseMatrix> for &'a SparseMatrix {
    type Output = SparseMatrix;
    /// Panics on shape or arity mismatch; see [`SparseMatrix::try_add`].
    fn add(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.try_add(rhs).expect("matrix addition")
    }
}

impl<'a> Sub<&'a SparseMatrix> for &'a SparseMatrix {
    type Output = SparseMatrix;
    fn sub(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.try_sub(rhs).expect("matrix subtraction")
    }
}

impl<'a> Mul<&'a SparseMatrix> for &'a SparseMatrix {
    type Output = SparseMatrix;
    fn mul(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.try_mul(rhs).expect("matrix multiplication")
    }
}

impl Neg for &SparseMatrix {
    type Output = SparseMatrix;
    fn neg(self) -> SparseMatrix {
        self.map_entries(|v| -v)
    }
}

/// `Σ cᵢ·Aᵢ` over matrices of one shape; `None` for an empty iterator.
pub fn linear_combination<'a>(
    terms: impl IntoIterator<Item = (Scalar, &'a SparseMatrix)>,
) -> Option<SparseMatrix> {
    let mut acc: Option<SparseMatrix> = None;
    for (c, m) in terms {
        let scaled = if c.is_one() { m.clone() } else { m.scale(&c) };
        acc = Some(match acc {
            None => scaled,
            Some(a) => &a + &scaled,
        });
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::int;

    fn flip(n: usize) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(n * n, n * n, 0);
        for a in 0..n {
            for c in 0..n {
                m.set(a * n + c, c * n + a, ExpSum::one(0)).unwrap();
            }
        }
        m
    }

    #[test]
    fn identity_is_neutral() {
        let a = SparseMatrix::from_scalars(
            3,
            3,
            [
                (0, 1, Scalar::from_int(2)),
                (2, 0, Scalar::from_ratio(1, 3)),
            ],
        )
        .unwrap();
        assert_eq!(&a * &SparseMatrix::identity(3, 0), a);
        assert_eq!(&SparseMatrix::identity(3, 0) * &a, a);
    }

    #[test]
    fn flip_is_an_involution() {
        for n in 2..5 {
            let p = flip(n);
            assert!((&p * &p).is_identity());
        }
    }

    #[test]
    fn kron_of_identities() {
        let i3 = SparseMatrix::identity(3, 0);
        assert_eq!(i3.kron(&i3).unwrap(), SparseMatrix::identity(9, 0));
    }

    #[test]
    fn kron_of_matrix_units() {
        // (ab)⊗(cd) with 1-based a=1,b=3,c=2,d=1 lands at row (a−1)N+(c−1), col (b−1)N+(d−1).
        let n = 3;
        let ab = SparseMatrix::unit(n, 0, 2);
        let cd = SparseMatrix::unit(n, 1, 0);
        let k = ab.kron(&cd).unwrap();
        assert_eq!(k.nnz(), 1);
        assert!(k.get(1, 6).unwrap().is_one());
    }

    #[test]
    fn stored_zeros_are_dropped() {
        let mut m = SparseMatrix::zeros(2, 2, 0);
        m.add_at(0, 0, &ExpSum::one(0)).unwrap();
        m.add_at(0, 0, &-&ExpSum::one(0)).unwrap();
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = SparseMatrix::zeros(2, 3, 0);
        let b = SparseMatrix::zeros(2, 3, 0);
        assert!(a.try_mul(&b).is_err());
        assert!(a.try_add(&SparseMatrix::zeros(2, 3, 1)).is_err());
        assert!(a.kron(&SparseMatrix::zeros(1, 1, 1)).is_err());
        let mut c = SparseMatrix::zeros(2, 2, 0);
        assert!(c.set(2, 0, ExpSum::one(0)).is_err());
        assert!(c.set(0, 0, ExpSum::one(1)).is_err());
    }

    #[test]
    fn trace_and_block() {
        let m = SparseMatrix::from_scalars(
            4,
            4,
            [
                (0, 0, Scalar::from_int(1)),
                (3, 3, Scalar::from_int(-1)),
                (2, 3, Scalar::from_int(5)),
            ],
        )
        .unwrap();
        assert!(m.trace().is_zero());
        let b = m.block(2, 2, 2, 2).unwrap();
        assert_eq!(b.entry(0, 1), ExpSum::constant(0, Scalar::from_int(5)));
        assert!(m.block(3, 3, 2, 2).is_err());
    }

    #[test]
    fn lift_then_origin() {
        let m = SparseMatrix::from_entries(2, 2, 1, [(0, 1, ExpSum::exp(int(3)))]).unwrap();
        let lifted = m.lift(&ExponentMap::linear(&[1, 1]).unwrap()).unwrap();
        assert_eq!(lifted.arity(), 2);
        assert!(lifted.at_origin().get(0, 1).unwrap().is_one());
    }
}
