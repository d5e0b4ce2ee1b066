//! Sparse real operators restricted to a sector basis.

use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{SectorBasis, SymmetrySectorTransform};

/// Real matrix of an operator in a [`SectorBasis`], stored row-compressed.
///
/// Every operator built by this crate is symmetric; [`SectorOperator::to_dense`]
/// is the hand-off point to the dense eigensolver.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    basis: SectorBasis,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SectorOperator {
    /// Builds from per-row `(column, value)` lists. Duplicate columns are
    /// summed; exact zeros are dropped.
    pub fn from_rows(basis: SectorBasis, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), basis.dim(), "row count must match the basis");
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != 0.0 {
                    cols.push(c as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            basis,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn zeros(basis: SectorBasis) -> Self {
        let dim = basis.dim();
        Self::from_rows(basis, vec![Vec::new(); dim])
    }

    pub fn identity(basis: SectorBasis) -> Self {
        Self::from_diagonal(basis, |_| 1.0)
    }

    pub fn from_diagonal(basis: SectorBasis, f: impl Fn(usize) -> f64) -> Self {
        let rows = (0..basis.dim()).map(|i| vec![(i, f(i))]).collect();
        Self::from_rows(basis, rows)
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.vals[range])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// All stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max-row-sum norm, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A - Aᵀ|`.
    pub fn symmetry_deviation(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        (0..self.dim())
            .map(|r| x[r] * self.row(r).map(|(c, v)| v * x[c]).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Entry-wise sum of two operators on the same basis.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::Argument("operators live in different bases".into()));
        }
        let rows = (0..self.dim())
            .map(|r| self.row(r).chain(other.row(r)).collect())
            .collect();
        Ok(Self::from_rows(self.basis.clone(), rows))
    }

    /// Largest entry-wise difference between two operators on the same basis.
    pub fn max_difference(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let a = self
            .triplets()
            .map(|(r, c, v)| (v - other.get(r, c)).abs())
            .fold(0.0, f64::max);
        let b = other
            .triplets()
            .map(|(r, c, v)| (v - self.get(r, c)).abs())
            .fold(0.0, f64::max);
        a.max(b)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// `A V` for a dense `V` with `dim` rows.
    pub fn mul_dense(&self, v: faer::MatRef<'_, f64>) -> Mat<f64> {
        assert_eq!(v.nrows(), self.dim());
        let ncols = v.ncols();
        let mut out = Mat::<f64>::zeros(self.dim(), ncols);
        let columns: Vec<Vec<f64>> = (0..ncols)
            .into_par_iter()
            .map(|j| {
                let col: Vec<f64> = (0..v.nrows()).map(|i| v[(i, j)]).collect();
                self.apply(&col)
            })
            .collect();
        for (j, col) in columns.into_iter().enumerate() {
            out.col_as_slice_mut(j).copy_from_slice(&col);
        }
        out
    }
}

/// Builds an operator in `basis`: `build` always receives the plain
/// computational block, and the result is projected onto the requested
/// reflection parity when `basis` is desymmetrized.
pub fn in_sector(
    basis: &SectorBasis,
    build: impl FnOnce(&SectorBasis) -> Result<SectorOperator>,
) -> Result<SectorOperator> {
    if !basis.is_desymmetrized() {
        return build(basis);
    }
    let parent = basis.parent();
    let op = build(&parent)?;
    SymmetrySectorTransform::new(&parent)?.project(&op, basis.parity())
}
